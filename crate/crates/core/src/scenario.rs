//! Events over single and doubled n-party scenarios with two binary
//! settings per party, and the exclusivity relation between them.
//!
//! A doubled scenario runs two independent copies of the experiment, one in
//! Stockholm and one in Vienna. Besides the native local measurements it
//! knows the four derived measurements `A_ij` acting on party 1 of both
//! copies: `A_ij` outputs 0 when party 1 in Stockholm measured with setting
//! `i` and party 1 in Vienna measured with setting `j` obtained equal
//! outcomes, and 1 otherwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest party count representable in the packed event layout.
pub const MAX_PARTIES: usize = 16;

/// Bit offset of the Vienna copy inside packed outcome/setting words.
const VIENNA_SHIFT: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scenario {
    n: usize,
    doubled: bool,
}

impl Scenario {
    pub fn new(n: usize, doubled: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewParties(n));
        }
        if n > MAX_PARTIES {
            return Err(Error::TooManyParties { n, max: MAX_PARTIES });
        }
        Ok(Self { n, doubled })
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, false)
    }

    pub fn doubled(n: usize) -> Result<Self> {
        Self::new(n, true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_doubled(&self) -> bool {
        self.doubled
    }

    pub fn cities(&self) -> &'static [City] {
        if self.doubled {
            &[City::Stockholm, City::Vienna]
        } else {
            &[City::Stockholm]
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.doubled { "doubled" } else { "single" };
        write!(f, "n={} {kind}", self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum City {
    Stockholm,
    Vienna,
}

impl City {
    fn shift(self) -> u32 {
        match self {
            City::Stockholm => 0,
            City::Vienna => VIENNA_SHIFT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasurementId {
    /// Local measurement `setting` of `party` (1-based) in `city`.
    Native { city: City, party: u8, setting: u8 },
    /// `A_ij`: `s` is the Stockholm setting `i`, `v` the Vienna setting `j`.
    Derived { s: u8, v: u8 },
}

impl MeasurementId {
    pub fn native(city: City, party: usize, setting: u8) -> Result<Self> {
        if party == 0 || party > MAX_PARTIES {
            return Err(Error::InvalidMeasurement(format!("party {party} out of range")));
        }
        if setting > 1 {
            return Err(Error::InvalidMeasurement(format!("setting {setting} is not a bit")));
        }
        Ok(MeasurementId::Native {
            city,
            party: party as u8,
            setting,
        })
    }

    pub fn derived(s: u8, v: u8) -> Result<Self> {
        if s > 1 || v > 1 {
            return Err(Error::InvalidMeasurement(format!("A_{s}{v} settings must be bits")));
        }
        Ok(MeasurementId::Derived { s, v })
    }

    /// Derived measurement acting on arbitrary parties; only party 1 of
    /// each city is supported.
    pub fn derived_on(stockholm_party: usize, vienna_party: usize, s: u8, v: u8) -> Result<Self> {
        if stockholm_party != 1 || vienna_party != 1 {
            return Err(Error::InvalidMeasurement(format!(
                "derived measurements act on party 1 of each city, got parties ({stockholm_party}, {vienna_party})"
            )));
        }
        Self::derived(s, v)
    }

    fn check_in(&self, scenario: Scenario) -> Result<()> {
        match *self {
            MeasurementId::Native { city, party, .. } => {
                if party as usize > scenario.n || party == 0 {
                    return Err(Error::InvalidMeasurement(format!(
                        "party {party} outside 1..={}",
                        scenario.n
                    )));
                }
                if city == City::Vienna && !scenario.doubled {
                    return Err(Error::InvalidMeasurement(
                        "Vienna measurement in a single-city scenario".into(),
                    ));
                }
                Ok(())
            }
            MeasurementId::Derived { .. } if !scenario.doubled => Err(Error::InvalidMeasurement(
                "derived measurements exist only in doubled scenarios".into(),
            )),
            MeasurementId::Derived { .. } => Ok(()),
        }
    }
}

impl fmt::Display for MeasurementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementId::Native { city, party, setting } => {
                let c = match city {
                    City::Stockholm => 'S',
                    City::Vienna => 'V',
                };
                write!(f, "{c}{party}:{setting}")
            }
            MeasurementId::Derived { s, v } => write!(f, "A{s}{v}"),
        }
    }
}

/// The two pairs of derived measurements that may be measured jointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DerivedPair {
    /// `A_00` with `A_11`.
    Diagonal,
    /// `A_01` with `A_10`.
    Cross,
}

impl DerivedPair {
    /// Members in canonical (sorted) order.
    pub fn members(self) -> [MeasurementId; 2] {
        match self {
            DerivedPair::Diagonal => [
                MeasurementId::Derived { s: 0, v: 0 },
                MeasurementId::Derived { s: 1, v: 1 },
            ],
            DerivedPair::Cross => [
                MeasurementId::Derived { s: 0, v: 1 },
                MeasurementId::Derived { s: 1, v: 0 },
            ],
        }
    }

    /// Party-1 settings `(s, v)` of each member, in canonical order.
    pub fn settings(self) -> [[u8; 2]; 2] {
        match self {
            DerivedPair::Diagonal => [[0, 0], [1, 1]],
            DerivedPair::Cross => [[0, 1], [1, 0]],
        }
    }

    fn of(a: MeasurementId, b: MeasurementId) -> Option<(Self, bool)> {
        for pair in [DerivedPair::Diagonal, DerivedPair::Cross] {
            let [m0, m1] = pair.members();
            if (a, b) == (m0, m1) {
                return Some((pair, false));
            }
            if (a, b) == (m1, m0) {
                return Some((pair, true));
            }
        }
        None
    }
}

/// An event assigning one setting and one outcome to every party of every
/// city in the scenario.
///
/// Party `p` of Stockholm lives at bit `p - 1`, party `p` of Vienna at bit
/// `16 + p - 1`. Unused bits are zero, which keeps the bitwise exclusivity
/// test exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductEvent {
    outcomes: u64,
    settings: u64,
}

impl ProductEvent {
    /// Packs per-city outcome and setting words (bit `p - 1` for party `p`).
    pub fn from_cities(outcomes: [u32; 2], settings: [u32; 2]) -> Self {
        Self {
            outcomes: outcomes[0] as u64 | (outcomes[1] as u64) << VIENNA_SHIFT,
            settings: settings[0] as u64 | (settings[1] as u64) << VIENNA_SHIFT,
        }
    }

    pub fn single(outcomes: u32, settings: u32) -> Self {
        Self::from_cities([outcomes, 0], [settings, 0])
    }

    pub fn outcome_word(&self, city: City) -> u32 {
        (self.outcomes >> city.shift()) as u32 & 0xffff
    }

    pub fn setting_word(&self, city: City) -> u32 {
        (self.settings >> city.shift()) as u32 & 0xffff
    }

    pub fn outcome(&self, city: City, party: usize) -> u8 {
        (self.outcomes >> (city.shift() + party as u32 - 1)) as u8 & 1
    }

    pub fn setting(&self, city: City, party: usize) -> u8 {
        (self.settings >> (city.shift() + party as u32 - 1)) as u8 & 1
    }

    /// Rule R1: some party of some city uses the same setting in both
    /// events and records different outcomes.
    #[inline]
    pub fn exclusive_with(&self, other: &ProductEvent) -> bool {
        (!(self.settings ^ other.settings) & (self.outcomes ^ other.outcomes)) != 0
    }

    /// Outcome `A_ij` would give, if the party-1 settings match `(s, v)`.
    #[inline]
    pub fn derived_outcome(&self, s: u8, v: u8) -> Option<u8> {
        let shift = VIENNA_SHIFT;
        let si = (self.settings & 1) as u8;
        let vi = ((self.settings >> shift) & 1) as u8;
        if si != s || vi != v {
            return None;
        }
        Some(((self.outcomes ^ (self.outcomes >> shift)) & 1) as u8)
    }

    /// Appends party `n + 1` to both cities.
    pub fn extend(&self, n: usize, outcome: [u8; 2], setting: [u8; 2]) -> Self {
        let bit = n as u32;
        let mut out = *self;
        out.outcomes |= (outcome[0] as u64) << bit | (outcome[1] as u64) << (VIENNA_SHIFT + bit);
        out.settings |= (setting[0] as u64) << bit | (setting[1] as u64) << (VIENNA_SHIFT + bit);
        out
    }

    /// Drops every party above `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let m = (1u64 << n) - 1;
        let mask = m | m << VIENNA_SHIFT;
        Self {
            outcomes: self.outcomes & mask,
            settings: self.settings & mask,
        }
    }

    /// Exchanges the roles of the two cities.
    pub fn swap_cities(&self) -> Self {
        let swap = |w: u64| (w & 0xffff) << VIENNA_SHIFT | (w >> VIENNA_SHIFT) & 0xffff;
        Self {
            outcomes: swap(self.outcomes),
            settings: swap(self.settings),
        }
    }

    /// Flips the outcome of one party (1-based) in one city.
    pub fn flip_outcome(&self, city: City, party: usize) -> Self {
        Self {
            outcomes: self.outcomes ^ 1u64 << (city.shift() + party as u32 - 1),
            settings: self.settings,
        }
    }

    /// Flips every outcome of the first `n` parties of both cities.
    pub fn flip_outcomes(&self, n: usize) -> Self {
        let m = (1u64 << n) - 1;
        Self {
            outcomes: self.outcomes ^ (m | m << VIENNA_SHIFT),
            settings: self.settings,
        }
    }
}

/// A joint outcome of one of the compatible pairs of derived measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AncillaryEvent {
    pair: DerivedPair,
    /// Outcomes of `pair.members()` in that order.
    outcomes: [u8; 2],
}

impl AncillaryEvent {
    pub fn new(pair: DerivedPair, outcomes: [u8; 2]) -> Result<Self> {
        if outcomes.iter().any(|&b| b > 1) {
            return Err(Error::InvalidEvent("ancillary outcomes must be bits".into()));
        }
        Ok(Self { pair, outcomes })
    }

    /// Builds from two assignments given in any order. Mixed pairs such as
    /// `{A_00, A_01}` are rejected.
    pub fn from_assignments(a: (MeasurementId, u8), b: (MeasurementId, u8)) -> Result<Self> {
        let (pair, swapped) = DerivedPair::of(a.0, b.0).ok_or_else(|| {
            Error::InvalidEvent(format!(
                "{} and {} are not a compatible derived pair",
                a.0, b.0
            ))
        })?;
        let outcomes = if swapped { [b.1, a.1] } else { [a.1, b.1] };
        Self::new(pair, outcomes)
    }

    pub fn pair(&self) -> DerivedPair {
        self.pair
    }

    pub fn outcomes(&self) -> [u8; 2] {
        self.outcomes
    }

    pub fn assignments(&self) -> [(MeasurementId, u8); 2] {
        let [m0, m1] = self.pair.members();
        [(m0, self.outcomes[0]), (m1, self.outcomes[1])]
    }

    pub fn outcome_of(&self, s: u8, v: u8) -> Option<u8> {
        self.assignments()
            .into_iter()
            .find(|(m, _)| *m == MeasurementId::Derived { s, v })
            .map(|(_, b)| b)
    }

    /// Rule R2 against a product event.
    #[inline]
    pub fn excludes(&self, e: &ProductEvent) -> bool {
        self.assignments().into_iter().any(|(m, c)| match m {
            MeasurementId::Derived { s, v } => e.derived_outcome(s, v).is_some_and(|b| b != c),
            MeasurementId::Native { .. } => false,
        })
    }

    /// City exchange: `A_ij` becomes `A_ji` with the outcome carried over.
    pub fn swap_cities(&self) -> Self {
        let [(m0, b0), (m1, b1)] = self.assignments();
        let t = |m: MeasurementId| match m {
            MeasurementId::Derived { s, v } => MeasurementId::Derived { s: v, v: s },
            other => other,
        };
        Self::from_assignments((t(m0), b0), (t(m1), b1)).expect("swap maps pairs onto pairs")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Product(ProductEvent),
    Ancillary(AncillaryEvent),
}

/// A labeled outcome assignment within a scenario.
///
/// The representation is canonical, so derived equality and hashing are
/// structural: an ancillary event built from `A_10 ↦ 1, A_01 ↦ 0` equals
/// the one built from `A_01 ↦ 0, A_10 ↦ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    scenario: Scenario,
    kind: EventKind,
}

impl Event {
    /// Product event from explicit outcome and setting vectors, listed
    /// Stockholm parties first and then Vienna parties for doubled scenarios.
    pub fn product(scenario: Scenario, outcomes: &[u8], settings: &[u8]) -> Result<Self> {
        let width = scenario.n * scenario.cities().len();
        if outcomes.len() != width || settings.len() != width {
            return Err(Error::InvalidEvent(format!(
                "product event in {scenario} needs {width} outcomes and settings, got {} and {}",
                outcomes.len(),
                settings.len()
            )));
        }
        if outcomes.iter().chain(settings).any(|&b| b > 1) {
            return Err(Error::InvalidEvent("outcomes and settings must be bits".into()));
        }
        let pack = |bits: &[u8]| -> u32 {
            bits.iter().enumerate().fold(0, |w, (i, &b)| w | (b as u32) << i)
        };
        let n = scenario.n;
        let (ob, sb) = if scenario.doubled {
            (
                [pack(&outcomes[..n]), pack(&outcomes[n..])],
                [pack(&settings[..n]), pack(&settings[n..])],
            )
        } else {
            ([pack(outcomes), 0], [pack(settings), 0])
        };
        Ok(Self {
            scenario,
            kind: EventKind::Product(ProductEvent::from_cities(ob, sb)),
        })
    }

    /// Wraps a packed product event; bits beyond the scenario must be zero.
    pub fn from_packed(scenario: Scenario, e: ProductEvent) -> Result<Self> {
        let vienna_used = e.outcome_word(City::Vienna) | e.setting_word(City::Vienna) != 0;
        if e.truncate(scenario.n) != e || (!scenario.doubled && vienna_used) {
            return Err(Error::InvalidEvent("packed event uses parties outside the scenario".into()));
        }
        Ok(Self {
            scenario,
            kind: EventKind::Product(e),
        })
    }

    pub fn ancillary(scenario: Scenario, a: AncillaryEvent) -> Result<Self> {
        if !scenario.doubled {
            return Err(Error::InvalidEvent(
                "ancillary events exist only in doubled scenarios".into(),
            ));
        }
        Ok(Self {
            scenario,
            kind: EventKind::Ancillary(a),
        })
    }

    /// Builds an event from a measurement → outcome map, validating that it
    /// is either a complete product event or a compatible ancillary pair.
    pub fn from_assignments<I>(scenario: Scenario, assignments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MeasurementId, u8)>,
    {
        let mut natives = Vec::new();
        let mut derived = Vec::new();
        for (m, b) in assignments {
            m.check_in(scenario)?;
            if b > 1 {
                return Err(Error::InvalidEvent(format!("outcome {b} of {m} is not a bit")));
            }
            match m {
                MeasurementId::Native { .. } => natives.push((m, b)),
                MeasurementId::Derived { .. } => derived.push((m, b)),
            }
        }
        match (natives.is_empty(), derived.len()) {
            (true, 2) => {
                let a = AncillaryEvent::from_assignments(derived[0], derived[1])?;
                Self::ancillary(scenario, a)
            }
            (true, 0) => Err(Error::InvalidEvent("empty assignment".into())),
            (false, 0) => {
                let cities = scenario.cities().len();
                let mut seen = vec![false; scenario.n * cities];
                let mut outcomes = vec![0u8; scenario.n * cities];
                let mut settings = vec![0u8; scenario.n * cities];
                for (m, b) in natives {
                    if let MeasurementId::Native { city, party, setting } = m {
                        let idx = city as usize * scenario.n + party as usize - 1;
                        if seen[idx] {
                            return Err(Error::InvalidEvent(format!(
                                "two native assignments for {city:?} party {party}"
                            )));
                        }
                        seen[idx] = true;
                        outcomes[idx] = b;
                        settings[idx] = setting;
                    }
                }
                if seen.iter().any(|s| !s) {
                    return Err(Error::InvalidEvent(
                        "product events must assign every party of every city".into(),
                    ));
                }
                Self::product(scenario, &outcomes, &settings)
            }
            _ => Err(Error::InvalidEvent(
                "an event is either all-native or exactly two derived assignments".into(),
            )),
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn kind(&self) -> &EventKind {
        &self.kind
    }

    pub fn as_product(&self) -> Option<&ProductEvent> {
        match &self.kind {
            EventKind::Product(p) => Some(p),
            EventKind::Ancillary(_) => None,
        }
    }

    pub fn as_ancillary(&self) -> Option<&AncillaryEvent> {
        match &self.kind {
            EventKind::Ancillary(a) => Some(a),
            EventKind::Product(_) => None,
        }
    }

    /// Canonical (sorted) measurement → outcome list.
    pub fn assignments(&self) -> Vec<(MeasurementId, u8)> {
        let mut out = match &self.kind {
            EventKind::Product(p) => {
                let mut v = Vec::with_capacity(self.scenario.n * 2);
                for &city in self.scenario.cities() {
                    for party in 1..=self.scenario.n {
                        v.push((
                            MeasurementId::Native {
                                city,
                                party: party as u8,
                                setting: p.setting(city, party),
                            },
                            p.outcome(city, party),
                        ));
                    }
                }
                v
            }
            EventKind::Ancillary(a) => a.assignments().to_vec(),
        };
        out.sort();
        out
    }

    /// Text token: `b1,…|x1,…` for product events (Stockholm parties, then
    /// Vienna parties) and `c,d|Aij,Akl` for ancillary events.
    pub fn token(&self) -> String {
        self.to_string()
    }

    pub fn parse(scenario: Scenario, token: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let (lhs, rhs) = token.trim().split_once('|').ok_or_else(|| err("missing `|`"))?;
        let bits = |s: &str| -> Result<Vec<u8>> {
            s.split(',')
                .map(|t| match t.trim() {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    _ => Err(err("components must be 0 or 1")),
                })
                .collect()
        };
        let outcomes = bits(lhs)?;
        if rhs.contains('A') {
            let ids = rhs
                .split(',')
                .map(|t| {
                    let t = t.trim();
                    let digits = t.strip_prefix('A').ok_or_else(|| err("expected Aij"))?;
                    match digits.as_bytes() {
                        [s @ (b'0' | b'1'), v @ (b'0' | b'1')] => {
                            MeasurementId::derived(s - b'0', v - b'0')
                        }
                        _ => Err(err("expected Aij with binary i, j")),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if ids.len() != 2 || outcomes.len() != 2 {
                return Err(err("ancillary events carry exactly two derived outcomes"));
            }
            Self::from_assignments(scenario, [(ids[0], outcomes[0]), (ids[1], outcomes[1])])
                .map_err(|e| err(&e.to_string()))
        } else {
            let settings = bits(rhs)?;
            Self::product(scenario, &outcomes, &settings).map_err(|e| err(&e.to_string()))
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match &self.kind {
            EventKind::Product(p) => {
                let mut o = Vec::new();
                let mut s = Vec::new();
                for &city in self.scenario.cities() {
                    for party in 1..=self.scenario.n {
                        o.push(p.outcome(city, party).to_string());
                        s.push(p.setting(city, party).to_string());
                    }
                }
                write!(f, "{}|{}", join(o), join(s))
            }
            EventKind::Ancillary(a) => {
                let [(m0, b0), (m1, b1)] = a.assignments();
                write!(f, "{b0},{b1}|{m0},{m1}")
            }
        }
    }
}

/// Parses a token in a scenario given as `n` plus the doubled flag.
pub struct EventToken;

impl EventToken {
    pub fn parse(n: usize, doubled: bool, token: &str) -> Result<Event> {
        Event::parse(Scenario::new(n, doubled)?, token)
    }
}

impl FromStr for DerivedPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A00,A11" | "A11,A00" => Ok(DerivedPair::Diagonal),
            "A01,A10" | "A10,A01" => Ok(DerivedPair::Cross),
            _ => Err(Error::InvalidMeasurement(format!("`{s}` is not a compatible pair"))),
        }
    }
}

/// Outcome a derived measurement `A_ij` takes on a product event: present
/// only when the event measured setting `i` on Stockholm party 1 and
/// setting `j` on Vienna party 1.
pub fn determined_outcome(e: &Event, m: MeasurementId) -> Result<Option<u8>> {
    if !e.scenario.doubled {
        return Err(Error::InvalidEvent(
            "derived outcomes need a doubled scenario".into(),
        ));
    }
    let p = e.as_product().ok_or_else(|| {
        Error::InvalidEvent("derived outcomes are defined for product events only".into())
    })?;
    match m {
        MeasurementId::Derived { s, v } => Ok(p.derived_outcome(s, v)),
        MeasurementId::Native { .. } => Err(Error::InvalidMeasurement(format!(
            "{m} is not a derived measurement"
        ))),
    }
}

/// Exclusivity: two events are exclusive when some measurement assigns
/// them different outcomes, either directly (native or shared derived
/// measurement) or through the outcome a product event forces on a derived
/// measurement.
pub fn exclusive(e1: &Event, e2: &Event) -> Result<bool> {
    if e1.scenario != e2.scenario {
        return Err(Error::ScenarioMismatch(e1.scenario, e2.scenario));
    }
    Ok(match (&e1.kind, &e2.kind) {
        (EventKind::Product(a), EventKind::Product(b)) => a.exclusive_with(b),
        (EventKind::Ancillary(a), EventKind::Product(p))
        | (EventKind::Product(p), EventKind::Ancillary(a)) => a.excludes(p),
        (EventKind::Ancillary(a), EventKind::Ancillary(b)) => {
            a.pair == b.pair && a.outcomes != b.outcomes
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d2() -> Scenario {
        Scenario::doubled(2).unwrap()
    }

    fn ev(t: &str) -> Event {
        Event::parse(d2(), t).unwrap()
    }

    #[test]
    fn determined_outcome_examples() {
        let a00 = MeasurementId::derived(0, 0).unwrap();
        let a11 = MeasurementId::derived(1, 1).unwrap();
        assert_eq!(determined_outcome(&ev("0,0,0,0|0,0,0,0"), a00).unwrap(), Some(0));
        assert_eq!(determined_outcome(&ev("0,0,1,1|1,0,1,0"), a11).unwrap(), Some(1));
        assert_eq!(determined_outcome(&ev("0,0,0,0|0,0,0,0"), a11).unwrap(), None);
    }

    #[test]
    fn determined_outcome_rejects_ancillary_and_single() {
        let a00 = MeasurementId::derived(0, 0).unwrap();
        assert!(determined_outcome(&ev("1,0|A00,A11"), a00).is_err());
        let single = Event::parse(Scenario::single(2).unwrap(), "0,0|0,0").unwrap();
        assert!(determined_outcome(&single, a00).is_err());
    }

    #[test]
    fn exclusive_examples() {
        assert!(exclusive(&ev("0,0,0,0|0,0,0,0"), &ev("0,1,0,1|0,0,0,0")).unwrap());
        assert!(exclusive(&ev("1,0|A00,A11"), &ev("0,0,0,0|0,0,0,0")).unwrap());
        let e = ev("0,1,1,0|1,0,1,0");
        assert!(!exclusive(&e, &e).unwrap());
        let s = Scenario::single(2).unwrap();
        let a = Event::parse(s, "0,0|0,0").unwrap();
        let b = Event::parse(s, "1,1|1,1").unwrap();
        assert!(!exclusive(&a, &b).unwrap());
    }

    #[test]
    fn ancillary_rule_r3() {
        assert!(exclusive(&ev("1,0|A00,A11"), &ev("0,0|A00,A11")).unwrap());
        assert!(!exclusive(&ev("1,0|A00,A11"), &ev("1,0|A01,A10")).unwrap());
    }

    #[test]
    fn scenario_mismatch_is_an_error() {
        let s = Event::parse(Scenario::single(2).unwrap(), "0,0|0,0").unwrap();
        assert!(matches!(
            exclusive(&s, &ev("0,0,0,0|0,0,0,0")),
            Err(Error::ScenarioMismatch(..))
        ));
    }

    #[test]
    fn ancillary_identity_is_map_based() {
        let a = ev("1,0|A10,A01");
        let b = ev("0,1|A01,A10");
        assert_eq!(a, b);
        assert_eq!(a.token(), "0,1|A01,A10");
    }

    #[test]
    fn mixed_derived_pairs_are_rejected() {
        assert!(Event::parse(d2(), "0,0|A00,A01").is_err());
        assert!(Event::parse(d2(), "0,0|A00,A00").is_err());
    }

    #[test]
    fn derived_measurements_need_party_one_and_doubling() {
        assert!(MeasurementId::derived_on(2, 1, 0, 0).is_err());
        assert!(MeasurementId::derived_on(1, 1, 0, 1).is_ok());
        let single = Scenario::single(2).unwrap();
        let m = MeasurementId::derived(0, 0).unwrap();
        let m2 = MeasurementId::derived(1, 1).unwrap();
        assert!(Event::from_assignments(single, [(m, 0), (m2, 1)]).is_err());
    }

    #[test]
    fn from_assignments_validates_products() {
        let s = Scenario::single(2).unwrap();
        let a = |party, setting| MeasurementId::native(City::Stockholm, party, setting).unwrap();
        let e = Event::from_assignments(s, [(a(2, 1), 1), (a(1, 0), 0)]).unwrap();
        assert_eq!(e.token(), "0,1|0,1");
        assert!(Event::from_assignments(s, [(a(1, 0), 0)]).is_err());
        assert!(Event::from_assignments(s, [(a(1, 0), 0), (a(1, 1), 0), (a(2, 0), 0)]).is_err());
        assert!(Event::from_assignments(s, [(a(3, 0), 0), (a(1, 0), 0), (a(2, 0), 0)]).is_err());
        assert_eq!(Event::from_assignments(s, e.assignments()).unwrap(), e);
    }

    #[test]
    fn tokens_round_trip() {
        for t in ["0,1,1,0|1,0,1,0", "1,1|A00,A11", "0,1|A01,A10"] {
            assert_eq!(ev(t).token(), t);
        }
        assert!(Event::parse(d2(), "0,1|1,0").is_err());
        assert!(Event::parse(d2(), "0,2,0,0|0,0,0,0").is_err());
        assert!(Event::parse(d2(), "0,0,0,0").is_err());
    }

    #[test]
    fn swap_and_flip() {
        let e = *ev("0,0,1,1|1,0,1,1").as_product().unwrap();
        let s = Event::from_packed(d2(), e.swap_cities()).unwrap();
        assert_eq!(s.token(), "1,1,0,0|1,1,1,0");
        let f = Event::from_packed(d2(), e.flip_outcomes(2)).unwrap();
        assert_eq!(f.token(), "1,1,0,0|1,0,1,1");
        let a = *ev("1,0|A01,A10").as_ancillary().unwrap();
        assert_eq!(a.swap_cities(), *ev("0,1|A01,A10").as_ancillary().unwrap());
        let d = *ev("1,0|A00,A11").as_ancillary().unwrap();
        assert_eq!(d.swap_cities(), d);
    }

    #[test]
    fn scenario_bounds() {
        assert_eq!(Scenario::single(1), Err(Error::TooFewParties(1)));
        assert!(Scenario::doubled(MAX_PARTIES + 1).is_err());
    }
}
