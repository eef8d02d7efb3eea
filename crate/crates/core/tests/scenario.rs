mod common;

use nlbounds_core::doubling::base_family_n2;
use nlbounds_core::scenario::{
    determined_outcome, exclusive, AncillaryEvent, DerivedPair, Event, MeasurementId, ProductEvent, Scenario,
};
use proptest::prelude::*;

fn product(n: usize) -> impl Strategy<Value = Event> {
    let m = (1u32 << n) - 1;
    (0..=m, 0..=m, 0..=m, 0..=m).prop_map(move |(bs, bv, xs, xv)| {
        Event::from_packed(Scenario::doubled(n).unwrap(), ProductEvent::from_cities([bs, bv], [xs, xv])).unwrap()
    })
}

fn ancillary(n: usize) -> impl Strategy<Value = Event> {
    (any::<bool>(), 0u8..2, 0u8..2).prop_map(move |(diag, c, d)| {
        let pair = if diag { DerivedPair::Diagonal } else { DerivedPair::Cross };
        Event::ancillary(Scenario::doubled(n).unwrap(), AncillaryEvent::new(pair, [c, d]).unwrap()).unwrap()
    })
}

fn event(n: usize) -> impl Strategy<Value = Event> {
    prop_oneof![4 => product(n), 1 => ancillary(n)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn exclusivity_matches_outcome_maps((a, b) in (2usize..5).prop_flat_map(|n| (event(n), event(n)))) {
        prop_assert_eq!(exclusive(&a, &b).unwrap(), common::exclusive_oracle(&a, &b), "{} {}", a, b);
    }

    #[test]
    fn exclusivity_symmetric_and_irreflexive(a in event(2), b in event(2)) {
        prop_assert_eq!(exclusive(&a, &b).unwrap(), exclusive(&b, &a).unwrap());
        prop_assert!(!exclusive(&a, &a).unwrap());
    }

    #[test]
    fn tokens_round_trip(e in event(3)) {
        prop_assert_eq!(Event::parse(e.scenario(), &e.token()).unwrap(), e);
    }
}

#[test]
fn determined_outcome_needs_matching_party_one_settings() {
    let s = Scenario::doubled(2).unwrap();
    let e = Event::parse(s, "1,0,0,1|1,0,0,1").unwrap();
    let a = |i, j| MeasurementId::derived(i, j).unwrap();
    assert_eq!(determined_outcome(&e, a(1, 0)).unwrap(), Some(1));
    assert_eq!(determined_outcome(&e, a(0, 0)).unwrap(), None);
    assert_eq!(determined_outcome(&e, a(1, 1)).unwrap(), None);
    let anc = Event::parse(s, "1,0|A00,A11").unwrap();
    assert!(determined_outcome(&anc, a(0, 0)).is_err());
    let single = Event::parse(Scenario::single(2).unwrap(), "0,0|0,0").unwrap();
    assert!(determined_outcome(&single, a(0, 0)).is_err());
}

#[test]
fn seed_rows_exclude_their_ancillary_event() {
    // every displayed row, read as tokens, is exclusive to its ancillary event
    let f = base_family_n2();
    let s = f.scenario();
    for set in &f.sets()[..8] {
        let anc = Event::ancillary(s, set.ancillary).unwrap();
        for e in &set.product_events {
            let e = Event::from_packed(s, *e).unwrap();
            assert!(common::exclusive_oracle(&anc, &e), "{anc} vs {e}");
        }
    }
}

#[test]
fn row_one_r2_by_hand() {
    let s = Scenario::doubled(2).unwrap();
    let anc = Event::parse(s, "1,0|A00,A11").unwrap();
    let ex = |t: &str| exclusive(&anc, &Event::parse(s, t).unwrap()).unwrap();
    // A00 = 0⊕0 against 1
    assert!(ex("0,0,0,0|0,0,0,0"));
    // A11 = 0⊕1 against 0
    assert!(ex("0,0,1,1|1,0,1,0"));
    // A11 = 1⊕1 agrees
    assert!(!ex("1,0,1,0|1,0,1,0"));
    // A01 is not part of the pair
    assert!(!ex("0,0,1,0|0,0,1,0"));
}

#[test]
fn partial_events_are_rejected() {
    let s = Scenario::doubled(2).unwrap();
    assert!(Event::parse(s, "0,0|0,0").is_err());
    assert!(Event::parse(s, "0,1|A00,A01").is_err());
    assert!(Event::parse(s, "0,2,0,0|0,0,0,0").is_err());
}
