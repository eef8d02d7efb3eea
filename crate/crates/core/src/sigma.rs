//! The correlator expression `S_n` and its probability form `Σ_n`.
//!
//! Contexts and outcome strings are bit words: bit `i - 1` holds party `i`'s
//! setting (or outcome). `S_n` is built from the two-party CHSH expression by
//! appending one party at a time: every term of `S_{n-1}` gets the new
//! party's setting 1, and every term of the conjugate of `S_{n-1}` gets the
//! new party's setting 0 (see [`build_sn`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::scenario::{Event, ProductEvent, Scenario};

/// Largest party count for dense distributions and `Σ_n` supports.
pub const MAX_DENSE_PARTIES: usize = 8;

/// Largest party count `build_sn` accepts.
pub const MAX_TERM_PARTIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorTerm {
    /// Setting word, bit `i - 1` for party `i`.
    pub context: u32,
    /// `+1` or `-1`.
    pub sign: i8,
}

impl CorrelatorTerm {
    pub fn settings(&self, n: usize) -> Vec<u8> {
        bits(self.context, n)
    }
}

pub(crate) fn bits(word: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| (word >> i) as u8 & 1).collect()
}

pub(crate) fn parity(word: u32) -> u32 {
    word.count_ones() & 1
}

fn check_parties(n: usize, max: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    if n > max {
        return Err(Error::TooManyParties { n, max });
    }
    Ok(())
}

/// Terms of `S_n` in recursion order.
///
/// `S_n = S_{n−1}·x_1 + S̄_{n−1}·x_0`, where the conjugate `S̄_{n−1}` gives
/// context `x` the sign of `x` in `S_{n−1}` times `(−1)^{|x|+1}`. For
/// `S_2` this is the same as exchanging every `x_0` with `x_1`; unlike that
/// exchange it keeps the last party relevant for every `n` (exchanging the
/// settings of `S_3` gives back `S_3`). Conjugate terms are listed in the
/// order of the exchanged contexts.
pub fn build_sn(n: usize) -> Result<Vec<CorrelatorTerm>> {
    check_parties(n, MAX_TERM_PARTIES)?;
    let mut terms: Vec<CorrelatorTerm> = [(0b00, 1), (0b10, 1), (0b01, 1), (0b11, -1)]
        .into_iter()
        .map(|(context, sign)| CorrelatorTerm { context, sign })
        .collect();
    for m in 2..n {
        let all = (1u32 << m) - 1;
        let new_bit = 1u32 << m;
        let signs = sign_table(&terms, m);
        let mut next = Vec::with_capacity(terms.len() * 2);
        next.extend(terms.iter().map(|t| CorrelatorTerm {
            context: t.context | new_bit,
            sign: t.sign,
        }));
        next.extend(terms.iter().map(|t| {
            let context = t.context ^ all;
            let odd = context.count_ones() % 2 == 1;
            let sign = signs[context as usize];
            CorrelatorTerm {
                context,
                sign: if odd { sign } else { -sign },
            }
        }));
        terms = next;
    }
    Ok(terms)
}

/// Sign of every context, indexed by the setting word.
fn sign_table(terms: &[CorrelatorTerm], n: usize) -> Vec<i8> {
    let mut signs = vec![0i8; 1 << n];
    for t in terms {
        signs[t.context as usize] = t.sign;
    }
    signs
}

/// `S_n` together with the support of `Σ_n`: for each context, the outcome
/// strings whose parity is even when the context's sign is `+1` and odd when
/// it is `-1`.
#[derive(Debug, Clone)]
pub struct SigmaExpression {
    n: usize,
    terms: Vec<CorrelatorTerm>,
    signs: Vec<i8>,
    support: Vec<Event>,
}

pub fn build_sigma(n: usize) -> Result<SigmaExpression> {
    check_parties(n, MAX_DENSE_PARTIES)?;
    let terms = build_sn(n)?;
    let signs = sign_table(&terms, n);
    let scenario = Scenario::single(n)?;
    let mut support = Vec::with_capacity(1 << (2 * n - 1));
    for ctx in 0..1u32 << n {
        let class = parity_class(signs[ctx as usize]);
        for out in 0..1u32 << n {
            if parity(out) == class {
                support.push(Event::from_packed(scenario, ProductEvent::single(out, ctx))?);
            }
        }
    }
    support.sort();
    Ok(SigmaExpression {
        n,
        terms,
        signs,
        support,
    })
}

fn parity_class(sign: i8) -> u32 {
    if sign > 0 {
        0
    } else {
        1
    }
}

impl SigmaExpression {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[CorrelatorTerm] {
        &self.terms
    }

    /// Support events in canonical order.
    pub fn support(&self) -> &[Event] {
        &self.support
    }

    pub fn sign(&self, context: u32) -> i8 {
        self.signs[context as usize]
    }

    /// Required outcome parity for `context`.
    pub fn parity_class(&self, context: u32) -> u32 {
        parity_class(self.signs[context as usize])
    }

    pub fn contains(&self, outcomes: u32, context: u32) -> bool {
        parity(outcomes) == self.parity_class(context)
    }

    /// Whether the single-city part of `e` for `city` lies in the support.
    pub fn contains_event(&self, e: &ProductEvent, city: crate::scenario::City) -> bool {
        self.contains(e.outcome_word(city), e.setting_word(city))
    }

    pub fn evaluate<T: Scalar>(&self, p: &Distribution<T>) -> Result<T> {
        self.check_n(p)?;
        let mut total = T::zero();
        for ctx in 0..1u32 << self.n {
            let class = self.parity_class(ctx);
            for out in 0..1u32 << self.n {
                if parity(out) == class {
                    total = total + p.prob(ctx, out).clone();
                }
            }
        }
        Ok(total)
    }

    pub fn evaluate_sn<T: Scalar>(&self, p: &Distribution<T>) -> Result<T> {
        self.check_n(p)?;
        evaluate_sn(&self.terms, p)
    }

    fn check_n<T: Scalar>(&self, p: &Distribution<T>) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::InvalidDistribution(format!(
                "distribution has {} parties, expression has {}",
                p.n(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn document(&self) -> SigmaDocument {
        SigmaDocument {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| TermDocument {
                    context: t.settings(self.n),
                    sign: t.sign,
                })
                .collect(),
            support: self.support.iter().map(Event::token).collect(),
        }
    }
}

/// `Σ sign(x)·(2·P_even(x) − 1)` over the listed terms.
pub fn evaluate_sn<T: Scalar>(terms: &[CorrelatorTerm], p: &Distribution<T>) -> Result<T> {
    let n = p.n();
    if terms.len() != 1 << n || terms.iter().any(|t| t.context >> n != 0) {
        return Err(Error::InvalidDistribution(format!(
            "terms do not describe an {n}-party expression"
        )));
    }
    let two = T::from_i64(2);
    let mut total = T::zero();
    for t in terms {
        let mut even = T::zero();
        for out in 0..1u32 << n {
            if parity(out) == 0 {
                even = even + p.prob(t.context, out).clone();
            }
        }
        let corr = two.clone() * even - T::one();
        total = if t.sign > 0 { total + corr } else { total - corr };
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct TermDocument {
    pub context: Vec<u8>,
    pub sign: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaDocument {
    pub n: usize,
    pub terms: Vec<TermDocument>,
    pub support: Vec<String>,
}

/// Dense conditional distribution `p(b|x)` of a single n-party experiment.
///
/// Entry `(x, b)` is stored at `x·2^n + b`. Construction rejects negative
/// entries and contexts whose total differs from 1 by more than the scalar
/// tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    n: usize,
    table: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(n: usize, table: Vec<T>) -> Result<Self> {
        check_parties(n, MAX_DENSE_PARTIES)?;
        if table.len() != 1 << (2 * n) {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, got {}",
                1usize << (2 * n),
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| v.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative entry {v:?}")));
        }
        let tol = T::tolerance();
        for (ctx, row) in table.chunks(1 << n).enumerate() {
            let sum = row.iter().cloned().fold(T::zero(), |a, b| a + b);
            if !sum.approx_eq(&T::one(), &tol) {
                return Err(Error::InvalidDistribution(format!(
                    "context {ctx} sums to {sum:?}"
                )));
            }
        }
        Ok(Self { n, table })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32, u32) -> T) -> Result<Self> {
        check_parties(n, MAX_DENSE_PARTIES)?;
        let mut table = Vec::with_capacity(1 << (2 * n));
        for ctx in 0..1u32 << n {
            for out in 0..1u32 << n {
                table.push(f(ctx, out));
            }
        }
        Self::new(n, table)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let w = T::from_ratio(1, 1 << n);
        Self::from_fn(n, |_, _| w.clone())
    }

    /// Point mass on `response(x)` for every context `x`.
    pub fn deterministic(n: usize, mut response: impl FnMut(u32) -> u32) -> Result<Self> {
        Self::from_fn(n, |ctx, out| {
            if response(ctx) == out {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, context: u32, outcomes: u32) -> &T {
        &self.table[((context as usize) << self.n) | outcomes as usize]
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }
}
