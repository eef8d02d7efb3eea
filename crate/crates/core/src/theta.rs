//! Lovász number of a graph by semidefinite programming.
//!
//! The program solved is
//!
//! ```text
//! maximize   ⟨J, X⟩
//! subject to tr X = 1,  X_uv = 0 for every edge uv,  X ⪰ 0
//! ```
//!
//! with dual `minimize t  s.t.  t·I + Σ_uv y_uv (e_u e_vᵀ + e_v e_uᵀ) − J ⪰ 0`.
//! Two independent solvers are provided: a feasible-start primal-dual
//! interior-point method (HKM direction with a Mehrotra-style centering
//! heuristic) and an ADMM scheme that alternates projections onto the PSD
//! cone with exact solves over the affine constraints.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_vertex_transitive, ExclusivityGraph};
use crate::num::Real;

/// Largest graph accepted by the solvers.
pub const MAX_THETA_VERTICES: usize = 256;

/// Above this many vertices `Auto` uses ADMM.
pub const MAX_INTERIOR_POINT_VERTICES: usize = 128;

/// Above this many equality constraints `Auto` uses ADMM, since the
/// interior-point Schur complement is dense in the constraints.
pub const MAX_INTERIOR_POINT_CONSTRAINTS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMethod {
    Auto,
    InteriorPoint,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub method: ThetaMethod,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 0,
            method: ThetaMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaResult<T> {
    pub value: T,
    pub primal_value: T,
    pub dual_value: T,
    /// `‖A(X) − b‖` of the returned primal matrix.
    pub primal_feasibility: T,
    /// Relative duality gap `|dual − primal| / (1 + |primal| + |dual|)`.
    pub duality_gap: T,
    pub iterations: usize,
    pub method: ThetaMethod,
}

pub fn lovasz_theta<T: Real>(g: &ExclusivityGraph, tol: f64) -> Result<ThetaResult<T>> {
    lovasz_theta_with(
        g,
        &ThetaOptions {
            tol,
            ..ThetaOptions::default()
        },
    )
}

pub fn lovasz_theta_with<T: Real>(g: &ExclusivityGraph, opts: &ThetaOptions) -> Result<ThetaResult<T>> {
    let n = g.order();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > MAX_THETA_VERTICES {
        return Err(Error::SizeLimit {
            size: n,
            limit: MAX_THETA_VERTICES,
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    let edges = g.edges();
    let method = match opts.method {
        ThetaMethod::Auto
            if n > MAX_INTERIOR_POINT_VERTICES || edges.len() + 1 > MAX_INTERIOR_POINT_CONSTRAINTS =>
        {
            ThetaMethod::Admm
        }
        ThetaMethod::Auto => ThetaMethod::InteriorPoint,
        m => m,
    };
    let problem = ThetaProblem { n, edges };
    match method {
        ThetaMethod::Admm => {
            let iters = if opts.max_iterations == 0 { 200_000 } else { opts.max_iterations };
            problem.admm(T::cast(opts.tol), iters)
        }
        _ => {
            let iters = if opts.max_iterations == 0 { 200 } else { opts.max_iterations };
            problem.interior_point(T::cast(opts.tol), iters)
        }
    }
}

struct ThetaProblem {
    n: usize,
    edges: Vec<(usize, usize)>,
}

fn total<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a + b)
}

fn rel_gap<T: Real>(p: T, d: T) -> T {
    let abs = |x: T| if x < T::zero() { -x } else { x };
    abs(d - p) / (T::one() + abs(p) + abs(d))
}

/// Largest `α ≤ 1` with `M + α·ΔM ⪰ 0`, scaled by `step`.
fn step_length<T: Real>(m: &DMatrix<T>, dm: &DMatrix<T>, step: T) -> Option<T> {
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let scaled = &linv * dm * linv.transpose();
    let sym = (&scaled + scaled.transpose()) * T::cast(0.5);
    let eig = SymmetricEigen::new(sym);
    let lmin = eig.eigenvalues.iter().copied().fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a });
    if lmin >= T::zero() {
        return Some(T::one());
    }
    let alpha = step * (-T::one() / lmin);
    Some(if alpha > T::one() { T::one() } else { alpha })
}

impl ThetaProblem {
    fn constraints(&self) -> usize {
        self.edges.len() + 1
    }

    /// `A(Q)` for an arbitrary square matrix.
    fn apply<T: Real>(&self, q: &DMatrix<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.constraints());
        out[0] = q.trace();
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            out[k + 1] = q[(i, j)] + q[(j, i)];
        }
        out
    }

    /// `Aᵀ(y) = y_0·I + Σ y_e E_e`.
    fn adjoint<T: Real>(&self, y: &DVector<T>) -> DMatrix<T> {
        let mut m = DMatrix::identity(self.n, self.n) * y[0];
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            m[(i, j)] += y[k + 1];
            m[(j, i)] += y[k + 1];
        }
        m
    }

    fn rhs_b<T: Real>(&self) -> DVector<T> {
        let mut b = DVector::zeros(self.constraints());
        b[0] = T::one();
        b
    }

    fn schur<T: Real>(&self, x: &DMatrix<T>, w: &DMatrix<T>) -> DMatrix<T> {
        let m = self.constraints();
        let p = w * x;
        let mut s = DMatrix::zeros(m, m);
        s[(0, 0)] = p.trace();
        for (l, &(a, b)) in self.edges.iter().enumerate() {
            let v = p[(a, b)] + p[(b, a)];
            s[(0, l + 1)] = v;
            s[(l + 1, 0)] = v;
        }
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for (l, &(pp, q)) in self.edges.iter().enumerate().skip(k) {
                let v = x[(j, pp)] * w[(q, i)]
                    + x[(j, q)] * w[(pp, i)]
                    + x[(i, pp)] * w[(q, j)]
                    + x[(i, q)] * w[(pp, j)];
                s[(k + 1, l + 1)] = v;
                s[(l + 1, k + 1)] = v;
            }
        }
        s
    }

    fn interior_point<T: Real>(&self, tol: T, max_iter: usize) -> Result<ThetaResult<T>> {
        let n = self.n;
        let nf = T::cast(n as f64);
        let half = T::cast(0.5);
        let step = T::cast(0.95);
        let c = DMatrix::from_element(n, n, T::one());
        let b = self.rhs_b::<T>();
        let mut x = DMatrix::identity(n, n) / nf;
        let mut y = DVector::zeros(self.constraints());
        y[0] = nf + T::one();
        let mut z = self.adjoint(&y) - &c;
        let mut iterations = 0;
        loop {
            let primal = total(&x);
            let dual = y[0];
            let feas = (self.apply(&x) - &b).norm();
            let gap = rel_gap(primal, dual);
            if gap <= tol && feas <= tol * nf {
                return Ok(self.result(primal, dual, feas, gap, iterations, ThetaMethod::InteriorPoint));
            }
            if iterations >= max_iter {
                return Err(Error::NotConverged {
                    lower: primal.to_f64(),
                    upper: dual.to_f64(),
                    iterations,
                });
            }
            iterations += 1;
            let stalled = || Error::NotConverged {
                lower: primal.to_f64(),
                upper: dual.to_f64(),
                iterations,
            };
            let w = z.clone().try_inverse().ok_or_else(stalled)?;
            let w = (&w + w.transpose()) * half;
            let fd = &z - self.adjoint(&y) + &c;
            let schur = self.schur(&x, &w);
            // Near the optimum the Schur matrix can lose definiteness to
            // rounding; LU still solves it.
            let chol = Cholesky::new(schur.clone());
            let lu = chol.is_none().then(|| schur.lu());
            let xfw = self.apply(&(&x * &fd * &w));
            let aw = self.apply(&w);
            let direction = |mu: T| {
                let rhs = &aw * mu + &xfw - &b;
                let dy = match (&chol, &lu) {
                    (Some(c), _) => Some(c.solve(&rhs)),
                    (None, Some(lu)) => lu.solve(&rhs),
                    _ => None,
                }?;
                let dz = self.adjoint(&dy) - &fd;
                let dx = &w * mu - &x - &x * &dz * &w;
                let dx = (&dx + dx.transpose()) * half;
                Some((dx, dy, dz))
            };
            let mu_now = x.dot(&z) / nf;
            let (dx, _, dz) = direction(T::zero()).ok_or_else(stalled)?;
            let ap = step_length(&x, &dx, T::one()).ok_or_else(stalled)?;
            let ad = step_length(&z, &dz, T::one()).ok_or_else(stalled)?;
            let affine = (&x + &dx * ap).dot(&(&z + &dz * ad)) / nf;
            let ratio = affine / mu_now;
            let sigma = if ratio < T::one() { ratio * ratio * ratio } else { T::one() };
            let (dx, dy, dz) = direction(sigma * mu_now).ok_or_else(stalled)?;
            let ap = step_length(&x, &dx, step).ok_or_else(stalled)?;
            let ad = step_length(&z, &dz, step).ok_or_else(stalled)?;
            x += &dx * ap;
            x = (&x + x.transpose()) * half;
            y += &dy * ad;
            z += &dz * ad;
            z = (&z + z.transpose()) * half;
        }
    }

    fn admm<T: Real>(&self, tol: T, max_iter: usize) -> Result<ThetaResult<T>> {
        let n = self.n;
        let nf = T::cast(n as f64);
        let half = T::cast(0.5);
        let two = T::cast(2.0);
        // Minimization form: C = −J.
        let c = DMatrix::from_element(n, n, -T::one());
        let b = self.rhs_b::<T>();
        let c_norm = c.norm();
        let mut x = DMatrix::identity(n, n) / nf;
        let mut s = DMatrix::<T>::zeros(n, n);
        let mut mu = T::one();
        let mut y = DVector::zeros(self.constraints());
        for it in 1..=max_iter {
            // y solves A Aᵀ y = μ(b − A(X)) + A(C − S); A Aᵀ = diag(n, 2, …, 2).
            let mut r = (&b - self.apply(&x)) * mu + self.apply(&(&c - &s));
            r[0] /= nf;
            for k in 1..r.len() {
                r[k] /= two;
            }
            y = r;
            let v = &c - self.adjoint(&y) - &x * mu;
            let v = (&v + v.transpose()) * half;
            let eig = SymmetricEigen::new(v.clone());
            let pos = eig.eigenvalues.map(|l| if l > T::zero() { l } else { T::zero() });
            s = &eig.eigenvectors * DMatrix::from_diagonal(&pos) * eig.eigenvectors.transpose();
            x = (&s - &v) / mu;
            x = (&x + x.transpose()) * half;

            let pinf = (self.apply(&x) - &b).norm() / (T::one() + b.norm());
            let dinf = (self.adjoint(&y) + &s - &c).norm() / (T::one() + c_norm);
            let primal = total(&x);
            let dual = -y[0];
            let gap = rel_gap(primal, dual);
            if gap <= tol && pinf <= tol && dinf <= tol {
                let feas = (self.apply(&x) - &b).norm();
                return Ok(self.result(primal, dual, feas, gap, it, ThetaMethod::Admm));
            }
            if it % 20 == 0 {
                let ratio = pinf / dinf;
                // The dual residual carries the penalty 1/μ.
                if ratio > T::cast(4.0) && mu < T::cast(1e6) {
                    mu *= T::cast(1.4);
                } else if ratio < T::cast(0.25) && mu > T::cast(1e-6) {
                    mu *= T::cast(0.7);
                }
            }
        }
        Err(Error::NotConverged {
            lower: total(&x).to_f64(),
            upper: (-y[0]).to_f64(),
            iterations: max_iter,
        })
    }

    fn result<T: Real>(&self, primal: T, dual: T, feas: T, gap: T, iterations: usize, method: ThetaMethod) -> ThetaResult<T> {
        ThetaResult {
            value: (primal + dual) * T::cast(0.5),
            primal_value: primal,
            dual_value: dual,
            primal_feasibility: feas,
            duality_gap: gap,
            iterations,
            method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductIdentityReport<T> {
    pub vertices: usize,
    pub theta: T,
    pub theta_complement: T,
    /// `ϑ(G)·ϑ(Ḡ)/|V|`.
    pub ratio: T,
    pub holds: bool,
}

/// Checks `ϑ(G)·ϑ(Ḡ) = |V|` for a vertex-transitive graph by solving both
/// programs independently.
pub fn product_identity_check<T: Real>(g: &ExclusivityGraph, tol: f64) -> Result<ProductIdentityReport<T>> {
    if !is_vertex_transitive(g)? {
        return Err(Error::NotVertexTransitive);
    }
    let solver_tol = (tol * 1e-3).max(1e-9);
    let theta = lovasz_theta::<T>(g, solver_tol)?.value;
    let theta_complement = lovasz_theta::<T>(&g.complement(), solver_tol)?.value;
    let ratio = theta * theta_complement / T::cast(g.order() as f64);
    let dev = ratio - T::one();
    let dev = if dev < T::zero() { -dev } else { dev };
    Ok(ProductIdentityReport {
        vertices: g.order(),
        theta,
        theta_complement,
        ratio,
        holds: dev <= T::cast(tol),
    })
}
