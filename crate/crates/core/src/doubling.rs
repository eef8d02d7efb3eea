//! Families of pairwise exclusive events in the doubled experiment.
//!
//! The two-party family is seeded from eight hand-written sets (four events
//! shown per set, the other four obtained by flipping every outcome) plus
//! their images under a setting-flip relabeling. Exchanging the cities, the
//! obvious choice, maps four of the seed sets onto themselves. Each set for `n` parties lifts to four sets
//! for `n + 1` parties. The verifier re-derives every structural fact the
//! summation argument needs instead of trusting the seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{larger_quadratic_root, Real, Scalar};
use crate::scenario::{AncillaryEvent, City, DerivedPair, Event, MeasurementId, ProductEvent, Scenario};
use crate::sigma::{build_sigma, Distribution, SigmaExpression};

/// Party count above which `family` refuses to build without an override.
pub const DEFAULT_MAX_FAMILY_PARTIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusiveSet {
    pub product_events: Vec<ProductEvent>,
    pub ancillary: AncillaryEvent,
}

impl ExclusiveSet {
    /// Every ancillary event exclusive to all product events of the set.
    pub fn compatible_ancillaries(&self) -> Vec<AncillaryEvent> {
        all_ancillaries()
            .into_iter()
            .filter(|a| self.product_events.iter().all(|e| a.excludes(e)))
            .collect()
    }
}

fn all_ancillaries() -> Vec<AncillaryEvent> {
    let mut v = Vec::with_capacity(8);
    for pair in [DerivedPair::Diagonal, DerivedPair::Cross] {
        for c in 0..2 {
            for d in 0..2 {
                v.push(AncillaryEvent::new(pair, [c, d]).expect("bits"));
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    n: usize,
    sets: Vec<ExclusiveSet>,
}

/// Two-party seed: four displayed events per set plus its ancillary event.
const SEED: [([&str; 4], &str); 8] = [
    (["0,0,0,0|0,0,0,0", "0,1,0,1|0,0,0,0", "0,0,1,1|1,0,1,0", "0,1,1,0|1,0,1,0"], "1,0|A00,A11"),
    (["0,0,1,1|0,0,0,0", "0,1,1,0|0,0,0,0", "0,0,0,0|1,0,1,0", "0,1,0,1|1,0,1,0"], "0,1|A00,A11"),
    (["0,0,1,1|0,0,0,1", "0,1,1,0|0,0,0,1", "0,0,1,0|1,0,1,1", "0,1,1,1|1,0,1,1"], "0,0|A00,A11"),
    (["0,0,0,0|0,0,0,1", "0,1,0,1|0,0,0,1", "0,0,0,1|1,0,1,1", "0,1,0,0|1,0,1,1"], "1,1|A00,A11"),
    (["0,0,1,0|0,0,1,1", "0,1,1,1|0,0,1,1", "0,0,1,1|1,0,0,1", "0,1,1,0|1,0,0,1"], "0,0|A01,A10"),
    (["0,0,0,1|0,0,1,1", "0,1,0,0|0,0,1,1", "0,0,0,0|1,0,0,1", "0,1,0,1|1,0,0,1"], "1,1|A01,A10"),
    (["0,0,0,0|0,0,1,0", "0,1,0,1|0,0,1,0", "0,0,1,1|1,0,0,0", "0,1,1,0|1,0,0,0"], "1,0|A01,A10"),
    (["0,0,1,1|0,0,1,0", "0,1,1,0|0,0,1,0", "0,0,0,0|1,0,0,0", "0,1,0,1|1,0,0,0"], "0,1|A01,A10"),
];

/// The sixteen two-party sets: the eight seed sets completed by the global
/// outcome flip, followed by their images under `mirror_event`.
pub fn base_family_n2() -> SetFamily {
    let scenario = Scenario::doubled(2).expect("n = 2");
    let parse = |t: &str| Event::parse(scenario, t).expect("seed tokens are well formed");
    let mut sets = Vec::with_capacity(16);
    for (shown, anc) in SEED {
        let mut product_events: Vec<ProductEvent> =
            shown.iter().map(|t| *parse(t).as_product().expect("product")).collect();
        let flipped: Vec<ProductEvent> = product_events.iter().map(|e| e.flip_outcomes(2)).collect();
        product_events.extend(flipped);
        sets.push(ExclusiveSet {
            product_events,
            ancillary: *parse(anc).as_ancillary().expect("ancillary"),
        });
    }
    let mirrored: Vec<ExclusiveSet> = sets
        .iter()
        .map(|s| ExclusiveSet {
            product_events: s.product_events.iter().map(mirror_event).collect(),
            ancillary: mirror_ancillary(&s.ancillary),
        })
        .collect();
    sets.extend(mirrored);
    SetFamily { n: 2, sets }
}

/// Two-party relabeling that flips both settings in each city and maps
/// `b_1 -> b_1 + x_1 + 1`, `b_2 -> b_2 + x_2` (old settings, mod 2). It
/// preserves exclusivity and membership in the support of the expression.
fn mirror_event(e: &ProductEvent) -> ProductEvent {
    let city = |c: City| {
        let (b, x) = (e.outcome_word(c), e.setting_word(c));
        let (x1, x2) = (x & 1, (x >> 1) & 1);
        let b = b ^ (x1 ^ 1) ^ (x2 << 1);
        (b, x ^ 0b11)
    };
    let (bs, xs) = city(City::Stockholm);
    let (bv, xv) = city(City::Vienna);
    ProductEvent::from_cities([bs, bv], [xs, xv])
}

/// Image of an ancillary event under `mirror_event`: `A_sv` becomes
/// `A_{s+1,v+1}` with its outcome shifted by `s + v`.
fn mirror_ancillary(a: &AncillaryEvent) -> AncillaryEvent {
    let [(m0, c0), (m1, c1)] = a.assignments();
    let t = |m: MeasurementId, c: u8| match m {
        MeasurementId::Derived { s, v } => (MeasurementId::Derived { s: s ^ 1, v: v ^ 1 }, c ^ s ^ v),
        other => (other, c),
    };
    AncillaryEvent::from_assignments(t(m0, c0), t(m1, c1)).expect("mirror maps pairs onto pairs")
}

fn party_one_settings(e: &ProductEvent) -> [u8; 2] {
    [e.setting(City::Stockholm, 1), e.setting(City::Vienna, 1)]
}

/// Parity of every outcome except party 1 in both cities.
fn rest_parity(e: &ProductEvent) -> u32 {
    (e.outcome_word(City::Stockholm) >> 1).count_ones() + (e.outcome_word(City::Vienna) >> 1).count_ones() & 1
}

impl SetFamily {
    pub fn new(n: usize, sets: Vec<ExclusiveSet>) -> Result<Self> {
        Scenario::doubled(n)?;
        Ok(Self { n, sets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::doubled(self.n).expect("validated at construction")
    }

    pub fn sets(&self) -> &[ExclusiveSet] {
        &self.sets
    }

    pub fn sets_mut(&mut self) -> &mut [ExclusiveSet] {
        &mut self.sets
    }

    /// Each set `P` and each new setting pair `(s, s')` give one set for
    /// `n + 1` parties. Its events extend `P` and its companion (`P` with
    /// the last Stockholm outcome flipped, which swaps the (in,in)/(out,out)
    /// classes with the mixed ones) by the two outcome pairs that land in the
    /// (in,in) or (out,out) class. Events are grouped by their party-1
    /// settings; when the two groups would share a rest parity (parties
    /// `2..=n+1`), `b'_1` is flipped on the second group together with the
    /// matching ancillary outcome, which restores exclusivity across groups.
    fn lift_unchecked(&self) -> Result<SetFamily> {
        let n = self.n;
        let sigma = build_sigma(n + 1)?;
        let extend = |block: &[ProductEvent], setting: [u8; 2]| {
            let mut out = Vec::with_capacity(block.len() * 4);
            for e in block {
                for parent in [*e, e.flip_outcome(City::Stockholm, n)] {
                    for b in [[0, 0], [0, 1], [1, 0], [1, 1]] {
                        let child = parent.extend(n, b, setting);
                        if sigma.contains_event(&child, City::Stockholm)
                            == sigma.contains_event(&child, City::Vienna)
                        {
                            out.push(child);
                        }
                    }
                }
            }
            out
        };
        let mut sets = Vec::with_capacity(self.sets.len() * 4);
        for set in &self.sets {
            let [first, _] = set.ancillary.pair().settings();
            let (head, tail): (Vec<ProductEvent>, Vec<ProductEvent>) = set
                .product_events
                .iter()
                .partition(|e| party_one_settings(e) == first);
            let flipped_tail: Vec<ProductEvent> =
                tail.iter().map(|e| e.flip_outcome(City::Vienna, 1)).collect();
            for setting in [[0, 0], [0, 1], [1, 0], [1, 1]] {
                let mut product_events = extend(&head, setting);
                let mut rest = extend(&tail, setting);
                let mut ancillary = set.ancillary;
                let clash = match (product_events.first(), rest.first()) {
                    (Some(a), Some(b)) => rest_parity(a) == rest_parity(b),
                    _ => false,
                };
                if clash {
                    rest = extend(&flipped_tail, setting);
                    let [c, d] = ancillary.outcomes();
                    ancillary = AncillaryEvent::new(ancillary.pair(), [c, d ^ 1])?;
                }
                product_events.append(&mut rest);
                sets.push(ExclusiveSet {
                    product_events,
                    ancillary,
                });
            }
        }
        Ok(SetFamily { n: n + 1, sets })
    }

    pub fn document(&self) -> FamilyDocument {
        let scenario = self.scenario();
        let token = |e: &ProductEvent| {
            Event::from_packed(scenario, *e)
                .map(|e| e.token())
                .unwrap_or_else(|_| "<out of scenario>".into())
        };
        FamilyDocument {
            n: self.n,
            sets: self
                .sets
                .iter()
                .map(|s| SetDocument {
                    events: s.product_events.iter().map(token).collect(),
                    ancillary: Event::ancillary(scenario, s.ancillary)
                        .expect("doubled")
                        .token(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &FamilyDocument) -> Result<Self> {
        let scenario = Scenario::doubled(doc.n)?;
        let sets = doc
            .sets
            .iter()
            .map(|s| {
                let product_events = s
                    .events
                    .iter()
                    .map(|t| {
                        Event::parse(scenario, t)?
                            .as_product()
                            .copied()
                            .ok_or_else(|| Error::InvalidEvent(format!("`{t}` is not a product event")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ancillary = *Event::parse(scenario, &s.ancillary)?
                    .as_ancillary()
                    .ok_or_else(|| Error::InvalidEvent(format!("`{}` is not ancillary", s.ancillary)))?;
                Ok(ExclusiveSet {
                    product_events,
                    ancillary,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: doc.n, sets })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDocument {
    pub events: Vec<String>,
    pub ancillary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDocument {
    pub n: usize,
    pub sets: Vec<SetDocument>,
}

/// Lifts a verified family for `n` parties to `n + 1` parties.
pub fn lift(f: &SetFamily) -> Result<SetFamily> {
    let sigma = build_sigma(f.n)?;
    let verdict = verify_family(f, &sigma)?;
    if !verdict.passed() {
        return Err(Error::FamilyInvalid(verdict.failures.join(", ")));
    }
    f.lift_unchecked()
}

/// The family for `n` parties, lifted from the two-party seed.
pub fn family(n: usize) -> Result<SetFamily> {
    Scenario::doubled(n)?;
    let mut f = base_family_n2();
    while f.n < n {
        f = f.lift_unchecked()?;
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyChecks {
    pub set_count: bool,
    pub set_sizes: bool,
    pub pairwise_exclusive: bool,
    pub disjoint: bool,
    pub coverage: bool,
    pub ancillary_mass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub sets: usize,
    pub expected_sets: usize,
    pub min_set_size: usize,
    pub max_set_size: usize,
    pub expected_set_size: usize,
    pub product_events: usize,
    pub expected_product_events: usize,
    pub in_in: usize,
    pub out_out: usize,
    pub mixed: usize,
    pub out_of_scenario: usize,
    pub duplicated: usize,
    pub missing: usize,
    pub non_exclusive_pairs: usize,
    pub failing_sets: usize,
    /// Occurrences of each ancillary event, `[c,d|A00,A11]` for
    /// `(c,d) = 00, 01, 10, 11`, then the same for `A01,A10`.
    pub ancillary_multiplicities: Vec<usize>,
    /// Number of normalization sums the ancillary events add up to, when
    /// every outcome of each pair occurs equally often.
    pub ancillary_mass: Option<usize>,
    pub expected_ancillary_mass: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub n: usize,
    pub checks: FamilyChecks,
    pub counts: FamilyCounts,
    pub failures: Vec<String>,
    /// Present only when every structural check passes.
    pub derived_bound: Option<f64>,
}

impl FamilyVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Bitset over all `4^{2n}` doubled product events.
struct EventBits {
    words: Vec<u64>,
}

impl EventBits {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// Sets the bit and reports whether it was already set.
    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let was = self.words[w] & b != 0;
        self.words[w] |= b;
        was
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1u64 << (i % 64)) != 0
    }
}

fn event_key(e: &ProductEvent, n: usize) -> usize {
    let w = |x: u32, k: usize| (x as usize) << (k * n);
    w(e.outcome_word(City::Stockholm), 0)
        | w(e.setting_word(City::Stockholm), 1)
        | w(e.outcome_word(City::Vienna), 2)
        | w(e.setting_word(City::Vienna), 3)
}

fn count_non_exclusive(set: &ExclusiveSet) -> usize {
    let ev = &set.product_events;
    let mut bad = 0;
    for i in 0..ev.len() {
        if !set.ancillary.excludes(&ev[i]) {
            bad += 1;
        }
        for j in i + 1..ev.len() {
            if !ev[i].exclusive_with(&ev[j]) {
                bad += 1;
            }
        }
    }
    bad
}

/// Checks set count, set sizes, pairwise exclusivity inside every set,
/// disjointness across sets, exact coverage of the (in,in) and (out,out)
/// classes, and the ancillary normalization mass.
pub fn verify_family(f: &SetFamily, sigma: &SigmaExpression) -> Result<FamilyVerdict> {
    let n = f.n;
    if sigma.n() != n {
        return Err(Error::FamilyInvalid(format!(
            "expression has {} parties, family has {n}",
            sigma.n()
        )));
    }
    let expected_sets = 1usize << (2 * n);
    let expected_set_size = 2 * (1usize << (2 * (n - 1)));
    let universe = 1usize << (4 * n);
    let expected_product_events = universe / 2;
    let expected_ancillary_mass = 1usize << (2 * (n - 1));

    let sizes = f.sets.iter().map(|s| s.product_events.len());
    let min_set_size = sizes.clone().min().unwrap_or(0);
    let max_set_size = sizes.max().unwrap_or(0);

    let per_set: Vec<usize> = f.sets.par_iter().map(count_non_exclusive).collect();
    let non_exclusive_pairs = per_set.iter().sum();
    let failing_sets = per_set.iter().filter(|&&c| c > 0).count();

    let mut seen = EventBits::new(universe);
    let (mut product_events, mut duplicated, mut out_of_scenario) = (0, 0, 0);
    let (mut in_in, mut out_out, mut mixed) = (0, 0, 0);
    for set in &f.sets {
        for e in &set.product_events {
            product_events += 1;
            if e.truncate(n) != *e {
                out_of_scenario += 1;
                continue;
            }
            if seen.insert(event_key(e, n)) {
                duplicated += 1;
                continue;
            }
            match (
                sigma.contains_event(e, City::Stockholm),
                sigma.contains_event(e, City::Vienna),
            ) {
                (true, true) => in_in += 1,
                (false, false) => out_out += 1,
                _ => mixed += 1,
            }
        }
    }
    let mut missing = 0;
    let mask = (1usize << n) - 1;
    for key in 0..universe {
        let part = |k: usize| ((key >> (k * n)) & mask) as u32;
        let s_in = sigma.contains(part(0), part(1));
        let v_in = sigma.contains(part(2), part(3));
        if s_in == v_in && !seen.contains(key) {
            missing += 1;
        }
    }

    let mut ancillary_multiplicities = vec![0usize; 8];
    for set in &f.sets {
        let a = set.ancillary;
        let [c, d] = a.outcomes();
        let base = match a.pair() {
            DerivedPair::Diagonal => 0,
            DerivedPair::Cross => 4,
        };
        ancillary_multiplicities[base + 2 * c as usize + d as usize] += 1;
    }
    let ancillary_mass = ancillary_multiplicities
        .chunks(4)
        .map(|m| m.iter().all(|&x| x == m[0]).then_some(m[0]))
        .sum::<Option<usize>>();

    let checks = FamilyChecks {
        set_count: f.sets.len() == expected_sets,
        set_sizes: min_set_size == expected_set_size && max_set_size == expected_set_size,
        pairwise_exclusive: non_exclusive_pairs == 0,
        disjoint: duplicated == 0,
        coverage: mixed == 0
            && missing == 0
            && out_of_scenario == 0
            && in_in + out_out == expected_product_events,
        ancillary_mass: ancillary_mass == Some(expected_ancillary_mass),
    };
    let failures: Vec<String> = [
        ("set_count", checks.set_count),
        ("set_sizes", checks.set_sizes),
        ("pairwise_exclusive", checks.pairwise_exclusive),
        ("disjoint", checks.disjoint),
        ("coverage", checks.coverage),
        ("ancillary_mass", checks.ancillary_mass),
    ]
    .into_iter()
    .filter(|(_, ok)| !ok)
    .map(|(name, _)| name.to_string())
    .collect();
    let derived_bound = if failures.is_empty() {
        Some(derive_bound::<f64>(n)?)
    } else {
        None
    };
    Ok(FamilyVerdict {
        n,
        checks,
        counts: FamilyCounts {
            sets: f.sets.len(),
            expected_sets,
            min_set_size,
            max_set_size,
            expected_set_size,
            product_events,
            expected_product_events,
            in_in,
            out_out,
            mixed,
            out_of_scenario,
            duplicated,
            missing,
            non_exclusive_pairs,
            failing_sets,
            ancillary_multiplicities,
            ancillary_mass,
            expected_ancillary_mass,
        },
        failures,
        derived_bound,
    })
}

/// Larger root `s` of `s² + (2^n − s)² + 4^{n−1} = 4^n`.
pub fn derive_bound<T: Real>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    if n > 60 {
        return Err(Error::TooManyParties { n, max: 60 });
    }
    let one = T::one();
    let two = T::cast(2.0);
    let pow2 = T::cast((1u64 << n) as f64);
    let quarter_square = T::cast((1u64 << (n - 1)) as f64).powi(2);
    // s² + (2^n − s)² + 4^{n−1} − 4^n expanded in s.
    let a = one + one;
    let b = -(two * pow2);
    let c = pow2 * pow2 + quarter_square - pow2 * pow2;
    larger_quadratic_root(a, b, c).ok_or_else(|| Error::InvalidDistribution("no real root".into()))
}

/// Independent product of two single-copy distributions.
#[derive(Debug, Clone)]
pub struct ProductDistribution<T> {
    stockholm: Distribution<T>,
    vienna: Distribution<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMassCheck<T> {
    pub in_in: T,
    pub out_out: T,
    pub expected_in_in: T,
    pub expected_out_out: T,
    pub holds: bool,
}

pub fn product_distribution<T: Scalar>(
    stockholm: Distribution<T>,
    vienna: Distribution<T>,
) -> Result<ProductDistribution<T>> {
    if stockholm.n() != vienna.n() {
        return Err(Error::InvalidDistribution(format!(
            "copies have {} and {} parties",
            stockholm.n(),
            vienna.n()
        )));
    }
    Ok(ProductDistribution { stockholm, vienna })
}

impl<T: Scalar> ProductDistribution<T> {
    pub fn n(&self) -> usize {
        self.stockholm.n()
    }

    pub fn prob(&self, e: &ProductEvent) -> T {
        self.stockholm
            .prob(e.setting_word(City::Stockholm), e.outcome_word(City::Stockholm))
            .clone()
            * self
                .vienna
                .prob(e.setting_word(City::Vienna), e.outcome_word(City::Vienna))
                .clone()
    }

    /// Sums the product assignment over every (in,in) and (out,out) doubled
    /// event and compares against `Σ(pS)·Σ(pV)` and
    /// `(2^n − Σ(pS))·(2^n − Σ(pV))`.
    pub fn mass_check(&self, sigma: &SigmaExpression, tol: &T) -> Result<ProductMassCheck<T>> {
        let n = self.n();
        if sigma.n() != n {
            return Err(Error::InvalidDistribution("expression and distribution differ in n".into()));
        }
        let (mut in_in, mut out_out) = (T::zero(), T::zero());
        for xs in 0..1u32 << n {
            for bs in 0..1u32 << n {
                let s_in = sigma.contains(bs, xs);
                for xv in 0..1u32 << n {
                    for bv in 0..1u32 << n {
                        if sigma.contains(bv, xv) != s_in {
                            continue;
                        }
                        let p = self.prob(&ProductEvent::from_cities([bs, bv], [xs, xv]));
                        if s_in {
                            in_in = in_in + p;
                        } else {
                            out_out = out_out + p;
                        }
                    }
                }
            }
        }
        let total = T::from_i64(1 << n);
        let ss = sigma.evaluate(&self.stockholm)?;
        let sv = sigma.evaluate(&self.vienna)?;
        let expected_in_in = ss.clone() * sv.clone();
        let expected_out_out = (total.clone() - ss) * (total - sv);
        let holds = in_in.approx_eq(&expected_in_in, tol) && out_out.approx_eq(&expected_out_out, tol);
        Ok(ProductMassCheck {
            in_in,
            out_out,
            expected_in_in,
            expected_out_out,
            holds,
        })
    }
}

/// Sum over all sets of the set's total probability, with ancillary events
/// weighted by `ancillary`.
pub fn total_set_mass<T: Scalar>(
    f: &SetFamily,
    p: &ProductDistribution<T>,
    ancillary: impl Fn(&AncillaryEvent) -> T,
) -> T {
    f.sets.iter().fold(T::zero(), |acc, set| {
        let products = set
            .product_events
            .iter()
            .fold(T::zero(), |a, e| a + p.prob(e));
        acc + products + ancillary(&set.ancillary)
    })
}
