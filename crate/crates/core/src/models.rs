//! Values of `Σ_n` under local, hybrid (bipartite-split), nonsignaling and
//! quantum models, each computed by its own construction.

use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{Real, Scalar};
use crate::sigma::{build_sigma, build_sn, parity, CorrelatorTerm, Distribution, SigmaExpression, MAX_DENSE_PARTIES};

/// Largest n for the exhaustive local and hybrid enumerations.
pub const MAX_ENUMERATION_PARTIES: usize = 8;

/// Largest n for the GHZ statevector.
pub const MAX_GHZ_PARTIES: usize = 12;

/// Largest n for the angle optimizer.
pub const MAX_OPTIMIZER_PARTIES: usize = 10;

fn check_range(n: usize, max: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    if n > max {
        return Err(Error::TooManyParties { n, max });
    }
    Ok(())
}

/// Per-party deterministic response: `outcome = constant ⊕ (linear ∧ setting)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalStrategy {
    /// Bit `i - 1`: party `i` flips its outcome.
    pub constant: u32,
    /// Bit `i - 1`: party `i` outputs its setting.
    pub linear: u32,
}

impl LocalStrategy {
    pub fn respond(&self, context: u32) -> u32 {
        self.constant ^ (self.linear & context)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalBound {
    pub sigma: u64,
    pub s_value: f64,
    pub strategy: LocalStrategy,
}

/// Maximum of `Σ_n` over the `4^n` products of single-party deterministic
/// functions.
pub fn local_bound(n: usize) -> Result<LocalBound> {
    check_range(n, MAX_ENUMERATION_PARTIES)?;
    let sigma = build_sigma(n)?;
    let classes: Vec<u32> = (0..1u32 << n).map(|x| sigma.parity_class(x)).collect();
    let mut best: Option<(u64, LocalStrategy)> = None;
    for linear in 0..1u32 << n {
        for constant in 0..1u32 << n {
            let strategy = LocalStrategy { constant, linear };
            let value = (0..1u32 << n)
                .filter(|&x| parity(strategy.respond(x)) == classes[x as usize])
                .count() as u64;
            if best.is_none_or(|(b, _)| value > b) {
                best = Some((value, strategy));
            }
        }
    }
    let (value, strategy) = best.expect("at least one strategy");
    Ok(LocalBound {
        sigma: value,
        s_value: 2.0 * (value as f64 - (1u64 << (n - 1)) as f64),
        strategy,
    })
}

/// A model where the parties in `group` share arbitrary correlations, as do
/// the remaining parties, with no correlation across the split.
///
/// `group_response[k]` is the joint outcome of the group for its `k`-th
/// joint setting; joint words list the group's parties in ascending order,
/// lowest party in bit 0. `rest_response` is the same for the complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HybridStrategy {
    pub n: usize,
    /// Parties (1-based) in the first group.
    pub group: Vec<usize>,
    pub group_response: Vec<u32>,
    pub rest_response: Vec<u32>,
}

/// Gathers the bits of `word` at the positions set in `mask` into a
/// contiguous word.
pub(crate) fn gather(word: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut k = 0;
    for i in 0..32 {
        if mask >> i & 1 == 1 {
            out |= (word >> i & 1) << k;
            k += 1;
        }
    }
    out
}

/// Inverse of [`gather`].
pub(crate) fn scatter(word: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut k = 0;
    for i in 0..32 {
        if mask >> i & 1 == 1 {
            out |= (word >> k & 1) << i;
            k += 1;
        }
    }
    out
}

impl HybridStrategy {
    pub fn group_mask(&self) -> u32 {
        self.group.iter().fold(0, |m, &p| m | 1 << (p - 1))
    }

    pub fn respond(&self, context: u32) -> u32 {
        let g = self.group_mask();
        let rest = ((1u32 << self.n) - 1) & !g;
        scatter(self.group_response[gather(context, g) as usize], g)
            | scatter(self.rest_response[gather(context, rest) as usize], rest)
    }

    /// `Σ_n` of the deterministic distribution this strategy defines.
    pub fn sigma_value(&self, sigma: &SigmaExpression) -> u64 {
        (0..1u32 << self.n)
            .filter(|&x| sigma.contains(self.respond(x), x))
            .count() as u64
    }

    pub fn distribution<T: Scalar>(&self) -> Result<Distribution<T>> {
        Distribution::deterministic(self.n, |x| self.respond(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridBound {
    pub sigma: u64,
    pub witness: HybridStrategy,
}

/// Group masks for every split of the parties, one per complementary pair.
pub fn bipartitions(n: usize) -> Vec<u32> {
    let full = (1u32 << n) - 1;
    (1..full)
        .filter(|&k| {
            let size = k.count_ones() as usize;
            2 * size < n || (2 * size == n && k & 1 == 1)
        })
        .collect()
}

/// Maximum of `Σ_n` over all hybrid models.
///
/// For each split the smaller group is enumerated and the larger group
/// best-responds setting by setting. Since `Σ_n` depends on outcomes only
/// through their parity, the smaller group is enumerated by the parity of
/// its joint outcome as a function of its joint setting.
pub fn hybrid_bound(n: usize) -> Result<HybridBound> {
    check_range(n, MAX_ENUMERATION_PARTIES)?;
    let sigma = build_sigma(n)?;
    let full = (1u32 << n) - 1;
    let mut best: Option<(u64, u32, u64)> = None;
    for group in bipartitions(n) {
        let rest = full & !group;
        let k = group.count_ones();
        let group_contexts = 1u32 << k;
        let used = (1u64 << group_contexts) - 1;
        // classes[r] bit j: required parity for group setting j and rest setting r.
        let classes: Vec<u64> = (0..1u32 << rest.count_ones())
            .map(|r| {
                (0..group_contexts).fold(0u64, |m, j| {
                    let x = scatter(j, group) | scatter(r, rest);
                    m | (sigma.parity_class(x) as u64) << j
                })
            })
            .collect();
        let per_group: Option<(u64, u64)> = (0..=used)
            .into_par_iter()
            .map(|parities| {
                let v: u64 = classes
                    .iter()
                    .map(|&c| {
                        let mismatch = ((parities ^ c) & used).count_ones() as u64;
                        mismatch.max(group_contexts as u64 - mismatch)
                    })
                    .sum();
                (v, parities)
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        let (v, parities) = per_group.expect("non-empty enumeration");
        if best.is_none_or(|(b, _, _)| v > b) {
            best = Some((v, group, parities));
        }
    }
    let (value, group, parities) = best.expect("n >= 2 has a split");
    let witness = hybrid_witness(n, &sigma, group, parities);
    debug_assert_eq!(witness.sigma_value(&sigma), value);
    Ok(HybridBound { sigma: value, witness })
}

/// Group's lowest party reports the parity, everyone else reports 0; the
/// complement best-responds in the same way.
fn hybrid_witness(n: usize, sigma: &SigmaExpression, group: u32, parities: u64) -> HybridStrategy {
    let full = (1u32 << n) - 1;
    let rest = full & !group;
    let k = group.count_ones();
    let group_response: Vec<u32> = (0..1u32 << k).map(|j| (parities >> j & 1) as u32).collect();
    let rest_response: Vec<u32> = (0..1u32 << rest.count_ones())
        .map(|r| {
            let agree_even = (0..1u32 << k)
                .filter(|&j| {
                    let x = scatter(j, group) | scatter(r, rest);
                    (parities >> j & 1) as u32 == sigma.parity_class(x)
                })
                .count() as u32;
            u32::from(2 * agree_even < 1 << k)
        })
        .collect();
    let parties = |m: u32| (1..=n).filter(|&p| m >> (p - 1) & 1 == 1).collect::<Vec<_>>();
    HybridStrategy {
        n,
        group: parties(group),
        group_response,
        rest_response,
    }
}

/// The box with `p(b|x) = 2^{1−n}` on the support of `Σ_n` and 0 elsewhere.
pub fn ns_box<T: Scalar>(n: usize) -> Result<Distribution<T>> {
    check_range(n, MAX_DENSE_PARTIES)?;
    let sigma = build_sigma(n)?;
    let w = T::from_ratio(2, 1 << n);
    Distribution::from_fn(n, |x, b| if sigma.contains(b, x) { w.clone() } else { T::zero() })
}

/// Whether every marginal over every proper nonempty party subset is
/// independent of the settings of the other parties, up to `tol`.
pub fn check_nonsignaling<T: Scalar>(p: &Distribution<T>, tol: &T) -> bool {
    let n = p.n();
    let full = (1u32 << n) - 1;
    for kept in 1..full {
        let dropped = full & !kept;
        let k = kept.count_ones();
        let marginal = |x: u32| -> Vec<T> {
            let mut m = vec![T::zero(); 1 << k];
            for b in 0..1u32 << n {
                let idx = gather(b, kept) as usize;
                m[idx] = m[idx].clone() + p.prob(x, b).clone();
            }
            m
        };
        for x in 0..1u32 << n {
            if x & dropped == 0 {
                continue;
            }
            let reference = marginal(x & kept);
            let here = marginal(x);
            if reference.iter().zip(&here).any(|(a, b)| !a.approx_eq(b, tol)) {
                return false;
            }
        }
    }
    true
}

/// `⟨⊗_i (cos θ_i X + sin θ_i Y)⟩` on `(|0…0⟩ + |1…1⟩)/√2`, by applying each
/// single-qubit operator to a dense statevector.
pub fn ghz_correlator<T: Real>(angles: &[T]) -> Result<T> {
    let n = angles.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no parties".into()));
    }
    if n > MAX_GHZ_PARTIES {
        return Err(Error::TooManyParties {
            n,
            max: MAX_GHZ_PARTIES,
        });
    }
    let dim = 1usize << n;
    let amp = T::one() / T::cast(2.0).sqrt();
    let mut ghz = vec![Complex::new(T::zero(), T::zero()); dim];
    ghz[0] = Complex::new(amp, T::zero());
    ghz[dim - 1] = Complex::new(amp, T::zero());
    let mut psi = ghz.clone();
    for (q, &theta) in angles.iter().enumerate() {
        // cos θ X + sin θ Y = [[0, e^{-iθ}], [e^{iθ}, 0]]
        let up = Complex::new(theta.cos(), -theta.sin());
        let down = Complex::new(theta.cos(), theta.sin());
        let bit = 1usize << q;
        for i in (0..dim).filter(|i| i & bit == 0) {
            let (a0, a1) = (psi[i], psi[i | bit]);
            psi[i] = up * a1;
            psi[i | bit] = down * a0;
        }
    }
    let overlap = ghz
        .iter()
        .zip(&psi)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (g, p)| acc + g.conj() * p);
    Ok(overlap.re)
}

/// Equatorial measurement angles, `angles[i][x]` for party `i + 1` and
/// setting `x`, reduced into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumAngles {
    angles: Vec<[f64; 2]>,
}

impl QuantumAngles {
    pub fn new(angles: Vec<[f64; 2]>) -> Self {
        Self {
            angles: angles
                .into_iter()
                .map(|pair| pair.map(|a| a.rem_euclid(TAU)))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[[f64; 2]] {
        &self.angles
    }

    pub fn for_context(&self, context: u32) -> Vec<f64> {
        self.angles
            .iter()
            .enumerate()
            .map(|(i, pair)| pair[(context >> i & 1) as usize])
            .collect()
    }
}

/// `S_n` evaluated with GHZ correlators for the given angles.
pub fn sn_quantum_value(terms: &[CorrelatorTerm], angles: &QuantumAngles) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        let e = ghz_correlator(&angles.for_context(t.context))?;
        total += t.sign as f64 * e;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumOptimum {
    pub angles: QuantumAngles,
    pub s_value: f64,
    /// `S_n / 2 + 2^{n−1}`.
    pub sigma_value: f64,
    pub starts: usize,
}

const GRID_STEP: f64 = PI / 8.0;
const LOCAL_TOL: f64 = 1e-8;
const MULTI_STARTS: usize = 12;
const SEED: u64 = 0x5eed_2014;

/// Maximizes `S_n` over equatorial angles by coordinate ascent: every
/// coordinate is scanned on a π/8 grid, then refined by golden-section
/// search around the best grid point. Restarts from the zero angles and
/// from seeded random points; the best value wins, ties to the lowest start.
pub fn optimize_sn_angles(n: usize) -> Result<QuantumOptimum> {
    check_range(n, MAX_OPTIMIZER_PARTIES)?;
    let terms = build_sn(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let starts: Vec<Vec<f64>> = std::iter::once(vec![0.0; 2 * n])
        .chain((1..MULTI_STARTS).map(|_| (0..2 * n).map(|_| rng.gen_range(0.0..TAU)).collect()))
        .collect();
    let objective = |theta: &[f64]| -> f64 {
        let angles = QuantumAngles::new(theta.chunks(2).map(|c| [c[0], c[1]]).collect());
        sn_quantum_value(&terms, &angles).expect("n within GHZ limit")
    };
    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|start| coordinate_ascent(start, &objective))
        .collect();
    let (value, theta) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one start");
    Ok(QuantumOptimum {
        angles: QuantumAngles::new(theta.chunks(2).map(|c| [c[0], c[1]]).collect()),
        s_value: value,
        sigma_value: value / 2.0 + (1u64 << (n - 1)) as f64,
        starts: MULTI_STARTS,
    })
}

fn coordinate_ascent(mut theta: Vec<f64>, f: &impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let mut value = f(&theta);
    for _sweep in 0..500 {
        let before = value;
        for c in 0..theta.len() {
            let mut probe = theta.clone();
            let mut at = |a: f64| {
                probe[c] = a;
                f(&probe)
            };
            let (mut best_a, mut best_v) = (theta[c], value);
            for k in 0..16 {
                let a = k as f64 * GRID_STEP;
                let v = at(a);
                if v > best_v {
                    (best_a, best_v) = (a, v);
                }
            }
            let (a, v) = golden_section(&mut at, best_a - GRID_STEP, best_a + GRID_STEP);
            if v > best_v {
                (best_a, best_v) = (a, v);
            }
            if best_v > value {
                theta[c] = best_a;
                value = best_v;
            }
        }
        if value - before <= 1e-13 {
            break;
        }
    }
    (value, theta)
}

fn golden_section(f: &mut impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > LOCAL_TOL {
        if fa > fb {
            hi = b;
            (b, fb) = (a, fa);
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            (a, fa) = (b, fb);
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn local_examples() {
        let l2 = local_bound(2).unwrap();
        assert_eq!(l2.sigma, 3);
        assert_eq!(l2.s_value, 2.0);
        assert_eq!(local_bound(3).unwrap().sigma, 6);
        assert!(local_bound(9).is_err());
    }

    #[test]
    fn gather_scatter_inverse() {
        for mask in [0b1011u32, 0b0110, 0b1] {
            for w in 0..1u32 << mask.count_ones() {
                assert_eq!(gather(scatter(w, mask), mask), w);
            }
        }
    }

    #[test]
    fn bipartition_representatives() {
        assert_eq!(bipartitions(2), vec![0b01]);
        assert_eq!(bipartitions(3).len(), 3);
        assert_eq!(bipartitions(4).len(), 7);
    }

    #[test]
    fn hybrid_small() {
        let h = hybrid_bound(2).unwrap();
        assert_eq!(h.sigma, 3);
        assert_eq!(h.witness.sigma_value(&build_sigma(2).unwrap()), 3);
        assert_eq!(hybrid_bound(3).unwrap().sigma, 6);
        assert!(hybrid_bound(1).is_err());
    }

    #[test]
    fn ns_box_two_parties() {
        let b = ns_box::<Ratio<i64>>(2).unwrap();
        let s = build_sigma(2).unwrap();
        assert_eq!(s.evaluate(&b).unwrap(), Ratio::from_integer(4));
        assert!(check_nonsignaling(&b, &Ratio::tolerance()));
        // PR box: p(b|x) = 1/2 exactly when b1 ⊕ b2 = x1 ∧ x2.
        for x in 0..4u32 {
            for out in 0..4u32 {
                let pr = parity(out) == (x == 3) as u32;
                let expected = if pr { Ratio::new(1, 2) } else { Ratio::from_integer(0) };
                assert_eq!(*b.prob(x, out), expected);
            }
        }
    }

    #[test]
    fn signaling_fixture_detected() {
        // Party 2's outcome copies party 1's setting.
        let p = Distribution::<f64>::deterministic(2, |x| (x & 1) << 1).unwrap();
        assert!(!check_nonsignaling(&p, &1e-12));
        let local = Distribution::<f64>::deterministic(2, |x| x ^ 0b10).unwrap();
        assert!(check_nonsignaling(&local, &1e-12));
    }

    #[test]
    fn ghz_examples() {
        assert!((ghz_correlator(&[0.0f64, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((ghz_correlator::<f64>(&[PI / 2.0, PI / 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(ghz_correlator::<f64>(&[PI / 6.0; 3]).unwrap().abs() < 1e-12);
        assert!(ghz_correlator::<f64>(&[0.0; 13]).is_err());
        assert!((ghz_correlator(&[0.0f32, 0.0]).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn angles_are_reduced() {
        let a = QuantumAngles::new(vec![[-0.5, 7.0]]);
        assert!((a.angles()[0][0] - (TAU - 0.5)).abs() < 1e-12);
        assert!((a.angles()[0][1] - (7.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn tsirelson_from_optimizer() {
        let q = optimize_sn_angles(2).unwrap();
        assert!(q.s_value >= 2.0 * 2f64.sqrt() - 1e-6, "{q:?}");
        assert!(q.s_value <= 2.0 * 2f64.sqrt() + 1e-9);
    }
}
