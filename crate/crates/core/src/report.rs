//! Bounds reports: every computed value next to its closed form.

use serde::Serialize;

use crate::doubling::{derive_bound, family, verify_family, DEFAULT_MAX_FAMILY_PARTIES};
use crate::error::{Error, Result};
use crate::graph::{build_graph, independence_number, is_vertex_transitive};
use crate::models::{hybrid_bound, local_bound, ns_box, optimize_sn_angles, MAX_ENUMERATION_PARTIES};
use crate::sigma::build_sigma;
use crate::theta::{lovasz_theta, product_identity_check, MAX_THETA_VERTICES};

/// Rounds to nine significant digits, the precision of every emitted number.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Skip {
    pub quantum: bool,
    pub hybrid: bool,
    pub ns: bool,
    pub theta: bool,
}

impl Skip {
    /// Parses a comma-separated list such as `quantum,ns`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut skip = Skip::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "quantum" => skip.quantum = true,
                "hybrid" => skip.hybrid = true,
                "ns" => skip.ns = true,
                "theta" => skip.theta = true,
                other => return Err(Error::InvalidArgument(format!("unknown skip item `{other}`"))),
            }
        }
        Ok(skip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportOptions {
    /// Solver tolerance for the Lovász number.
    pub tol: f64,
    pub skip: Skip,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            skip: Skip::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms {
    /// `3·2^{n−2}`, hybrid (and local for two or three parties).
    pub hybrid: f64,
    /// `(2+√2)·2^{n−2}`.
    pub quantum_sigma: f64,
    /// `√2·2^{n−1}`.
    pub quantum_s: f64,
    /// `2^n`.
    pub nonsignaling: f64,
}

impl ClosedForms {
    pub fn new(n: usize) -> Self {
        let p = 2f64.powi(n as i32 - 2);
        Self {
            hybrid: 3.0 * p,
            quantum_sigma: (2.0 + 2f64.sqrt()) * p,
            quantum_s: 2f64.sqrt() * 2.0 * p,
            nonsignaling: 4.0 * p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub integer: f64,
    pub quantum: f64,
    pub theta: f64,
    pub derived_bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integer: 0.0,
            quantum: 1e-4,
            theta: 1e-3,
            derived_bound: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|computed − expected| ≤ tolerance`.
    Equal,
    /// `computed ≤ expected + tolerance`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub computed: Option<f64>,
    pub relation: Relation,
    pub expected: f64,
    pub tolerance: f64,
    /// `None` when the value could not be computed.
    pub matches: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportRow {
    fn new(name: &str, computed: Option<f64>, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed: computed.map(round_sig),
            relation: Relation::Equal,
            expected: round_sig(expected),
            tolerance,
            matches: computed.map(|c| (c - expected).abs() <= tolerance + 1e-12 * expected.abs()),
            note: None,
        }
    }

    fn at_most(name: &str, computed: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            relation: Relation::AtMost,
            matches: Some(computed <= bound + tolerance + 1e-12 * bound.abs()),
            ..Self::new(name, Some(computed), bound, tolerance)
        }
    }

    fn missing(name: &str, expected: f64, tolerance: f64, note: String) -> Self {
        Self {
            note: Some(note),
            ..Self::new(name, None, expected, tolerance)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumSummary {
    pub s_value: f64,
    pub sigma_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub local: Option<u64>,
    pub hybrid: Option<u64>,
    pub quantum_found: Option<QuantumSummary>,
    pub theta_bound: Option<f64>,
    pub ns_value: Option<f64>,
    pub closed_forms: ClosedForms,
    pub tolerances: Tolerances,
    pub rows: Vec<ReportRow>,
    /// Every row that was not skipped has a computed value.
    pub complete: bool,
    /// Every computed value matches its closed form.
    pub all_match: bool,
}

fn finish(rows: &[ReportRow]) -> (bool, bool) {
    let complete = rows.iter().all(|r| r.computed.is_some());
    let all_match = rows.iter().all(|r| r.matches != Some(false));
    (complete, all_match)
}

pub fn bounds_report(n: usize, opts: &ReportOptions) -> Result<BoundsReport> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    if n > MAX_ENUMERATION_PARTIES {
        return Err(Error::TooManyParties {
            n,
            max: MAX_ENUMERATION_PARTIES,
        });
    }
    let cf = ClosedForms::new(n);
    let tol = Tolerances::default();
    let mut rows = Vec::new();

    // Local models are hybrid models; equality holds for two and three parties.
    let local = local_bound(n)?.sigma;
    rows.push(ReportRow::at_most("local", local as f64, cf.hybrid, tol.integer));

    let hybrid = if opts.skip.hybrid {
        None
    } else {
        let h = hybrid_bound(n)?.sigma;
        rows.push(ReportRow::new("hybrid", Some(h as f64), cf.hybrid, tol.integer));
        Some(h)
    };

    let quantum_found = if opts.skip.quantum {
        None
    } else {
        let q = optimize_sn_angles(n)?;
        rows.push(ReportRow::new("quantum_s", Some(q.s_value), cf.quantum_s, tol.quantum));
        rows.push(ReportRow::new("quantum_sigma", Some(q.sigma_value), cf.quantum_sigma, tol.quantum));
        Some(QuantumSummary {
            s_value: round_sig(q.s_value),
            sigma_value: round_sig(q.sigma_value),
        })
    };

    let vertices = 1usize << (2 * n - 1);
    let theta_bound = if opts.skip.theta {
        None
    } else if vertices > MAX_THETA_VERTICES {
        rows.push(ReportRow::missing(
            "theta",
            cf.quantum_sigma,
            tol.theta,
            format!("{vertices} vertices exceed the solver limit of {MAX_THETA_VERTICES}"),
        ));
        None
    } else {
        let sigma = build_sigma(n)?;
        let g = build_graph(sigma.support())?;
        match lovasz_theta::<f64>(&g, opts.tol) {
            Ok(t) => {
                rows.push(ReportRow::new("theta", Some(t.value), cf.quantum_sigma, tol.theta));
                Some(round_sig(t.value))
            }
            Err(e) => {
                rows.push(ReportRow::missing("theta", cf.quantum_sigma, tol.theta, e.to_string()));
                None
            }
        }
    };

    let ns_value = if opts.skip.ns {
        None
    } else {
        let v = build_sigma(n)?.evaluate(&ns_box::<f64>(n)?)?;
        rows.push(ReportRow::new("ns", Some(v), cf.nonsignaling, tol.integer));
        Some(round_sig(v))
    };

    let (complete, all_match) = finish(&rows);
    Ok(BoundsReport {
        n,
        local: Some(local),
        hybrid,
        quantum_found,
        theta_bound,
        ns_value,
        closed_forms: ClosedForms {
            hybrid: round_sig(cf.hybrid),
            quantum_sigma: round_sig(cf.quantum_sigma),
            quantum_s: round_sig(cf.quantum_s),
            nonsignaling: round_sig(cf.nonsignaling),
        },
        tolerances: tol,
        rows,
        complete,
        all_match,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub alpha: Option<usize>,
    pub vertex_transitive: Option<bool>,
    /// `ϑ(G)·ϑ(Ḡ)/|V|`, present for vertex-transitive graphs within the
    /// solver limit.
    pub product_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub passed: bool,
    pub failures: Vec<String>,
    pub derived_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsolidatedReport {
    pub n: usize,
    pub bounds: BoundsReport,
    pub family: Option<FamilySummary>,
    pub graph: GraphSummary,
    pub rows: Vec<ReportRow>,
    pub complete: bool,
    pub all_match: bool,
}

/// Bounds, exclusivity graph invariants and family verification for one `n`.
pub fn consolidated_report(n: usize, opts: &ReportOptions) -> Result<ConsolidatedReport> {
    let bounds = bounds_report(n, opts)?;
    let cf = ClosedForms::new(n);
    let tol = Tolerances::default();
    let mut rows = bounds.rows.clone();

    let family = if n <= DEFAULT_MAX_FAMILY_PARTIES {
        let verdict = verify_family(&family(n)?, &build_sigma(n)?)?;
        rows.push(ReportRow::new(
            "derived_bound",
            verdict.derived_bound,
            cf.quantum_sigma,
            tol.derived_bound,
        ));
        Some(FamilySummary {
            passed: verdict.passed(),
            failures: verdict.failures,
            derived_bound: verdict.derived_bound.map(round_sig),
        })
    } else {
        let b: f64 = derive_bound(n)?;
        rows.push(ReportRow::missing(
            "derived_bound",
            cf.quantum_sigma,
            tol.derived_bound,
            format!("family not verified above {DEFAULT_MAX_FAMILY_PARTIES} parties (quadratic root {})", round_sig(b)),
        ));
        None
    };

    let sigma = build_sigma(n)?;
    let g = build_graph(sigma.support())?;
    let alpha = independence_number(&g).value();
    let local = bounds.local.map_or(cf.hybrid, |l| l as f64);
    rows.push(ReportRow::new("alpha", alpha.map(|a| a as f64), local, tol.integer));
    let vertex_transitive = is_vertex_transitive(&g).ok();
    let product_ratio = if vertex_transitive == Some(true) && g.order() <= MAX_THETA_VERTICES && !opts.skip.theta {
        product_identity_check::<f64>(&g, tol.theta).ok().map(|r| round_sig(r.ratio))
    } else {
        None
    };
    let graph = GraphSummary {
        vertices: g.order(),
        edges: g.edge_count(),
        alpha,
        vertex_transitive,
        product_ratio,
    };

    let (complete, all_match) = finish(&rows);
    let all_match = all_match && family.as_ref().map_or(true, |f| f.passed);
    Ok(ConsolidatedReport {
        n,
        bounds,
        family,
        graph,
        rows,
        complete,
        all_match,
    })
}
