mod common;

use nlbounds_core::models::{
    bipartitions, check_nonsignaling, ghz_correlator, hybrid_bound, local_bound, ns_box, optimize_sn_angles,
    sn_quantum_value, QuantumAngles,
};
use nlbounds_core::sigma::{build_sigma, build_sn};
use nlbounds_core::{Distribution64, Rational, RationalDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn hybrid_matches_full_enumeration() {
    for n in 2..=3 {
        let sigma = build_sigma(n).unwrap();
        assert_eq!(hybrid_bound(n).unwrap().sigma, common::hybrid_oracle(&sigma), "n={n}");
    }
}

#[test]
fn hybrid_closed_form() {
    for n in 2..=5 {
        let h = hybrid_bound(n).unwrap();
        assert_eq!(h.sigma, 3 << (n - 2), "n={n}");
        assert_eq!(h.witness.sigma_value(&build_sigma(n).unwrap()), h.sigma);
    }
}

#[test]
fn local_at_most_hybrid() {
    assert_eq!(local_bound(2).unwrap().sigma, 3);
    assert_eq!(local_bound(3).unwrap().sigma, 6);
    for n in 2..=5 {
        let l = local_bound(n).unwrap();
        assert!(l.sigma <= hybrid_bound(n).unwrap().sigma);
        let sigma = build_sigma(n).unwrap();
        let p = RationalDistribution::deterministic(n, |x| l.strategy.respond(x)).unwrap();
        assert_eq!(sigma.evaluate(&p).unwrap(), Rational::from_integer(l.sigma as i64));
        assert!(check_nonsignaling(&p, &Rational::from_integer(0)));
    }
}

#[test]
fn bipartition_counts() {
    for n in 2..=6 {
        assert_eq!(bipartitions(n).len(), (1 << (n - 1)) - 1);
    }
}

#[test]
fn ghz_matches_cosine_of_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 2..=6 {
        for _ in 0..1000 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let e = ghz_correlator(&a).unwrap();
            assert!((e - a.iter().sum::<f64>().cos()).abs() < 1e-10);
        }
    }
    assert!(ghz_correlator::<f64>(&[]).is_err());
}

#[test]
fn quantum_optimum() {
    for n in 2..=4 {
        let q = optimize_sn_angles(n).unwrap();
        let want = 2f64.sqrt() * (1 << (n - 1)) as f64;
        assert!((q.s_value - want).abs() < 1e-6, "n={n}: {}", q.s_value);
        let again = sn_quantum_value(&build_sn(n).unwrap(), &q.angles).unwrap();
        assert!((again - q.s_value).abs() < 1e-12);
    }
}

#[test]
fn quantum_angles_reduce() {
    let a = QuantumAngles::new(vec![[-1.0, 7.0]]);
    assert!(a.angles()[0].iter().all(|&v| (0.0..std::f64::consts::TAU).contains(&v)));
}

#[test]
fn ns_box_exact() {
    for n in 2..=4 {
        let p: RationalDistribution = ns_box(n).unwrap();
        let sigma = build_sigma(n).unwrap();
        assert_eq!(sigma.evaluate(&p).unwrap(), Rational::from_integer(1 << n));
        assert!(check_nonsignaling(&p, &Rational::from_integer(0)));
    }
}

#[test]
fn signaling_box_detected() {
    // party 1 outputs party 2's setting
    let p = RationalDistribution::deterministic(2, |x| x >> 1 & 1).unwrap();
    assert!(!check_nonsignaling(&p, &Rational::from_integer(0)));
    let q = Distribution64::uniform(3).unwrap();
    assert!(check_nonsignaling(&q, &1e-12));
}
