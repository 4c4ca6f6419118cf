//! Dirichlet problem `−div((μ + |∇u|)^(p−2) ∇u) = f` as a convex minimisation.
//!
//! The discrete functional `E_h(u) − ⟨f, u⟩_h` is minimised by lagged
//! diffusivity (Kačanov) outer iterations: the coefficient is frozen at the
//! current iterate and the resulting symmetric positive definite system is
//! solved by preconditioned CG. For `1 < p ≤ 2` the energy density is concave
//! in `|∇u|²`, so each frozen-coefficient quadratic majorises the functional
//! and the iterates descend. The coefficient is regularised as
//! `B(√(|∇u|² + ε²))` along a decreasing `ε` schedule; convergence is judged
//! with the exact (unregularised) operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FluxOperator, VectorField};
use crate::linalg::pcg;
use crate::nonlinearity::Constitutive;
use crate::scalar::{dot, Real};
use crate::verify::{EstimateId, EstimateRecord, RecordMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySolveConfig {
    /// Target for the normalised residual.
    pub tol: f64,
    /// Budget of outer iterations across all regularisation levels.
    pub max_outer: usize,
    /// Strictly decreasing positive regularisation floors.
    pub eps_schedule: Vec<f64>,
    /// Lower limit on the relative tolerance of each inner CG solve.
    pub inner_tol: f64,
    pub max_inner: usize,
}

impl Default for StationarySolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_outer: 400,
            eps_schedule: (2..=10).map(|k| 10f64.powi(-k)).collect(),
            inner_tol: 1e-12,
            max_inner: 20_000,
        }
    }
}

impl StationarySolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::Invalid(format!("inner_tol must be positive, got {}", self.inner_tol)));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Invalid("iteration budgets must be positive".into()));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::Invalid("eps_schedule must not be empty".into()));
        }
        if self.eps_schedule.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Invalid("eps_schedule entries must be positive".into()));
        }
        if self.eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Invalid("eps_schedule must be strictly decreasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StationaryResult<T> {
    pub u: VectorField<T>,
    /// Normalised residual of the exact operator.
    pub residual: f64,
    pub iterations: usize,
    /// Total CG iterations over all outer iterations.
    pub inner_iterations: usize,
    /// `∫ G(|∇u|²)` of the solution.
    pub energy: T,
    /// Value of the minimised functional at the solution (exact law).
    pub functional: T,
    pub residual_history: Vec<f64>,
    /// Regularised functional after each outer iteration, tagged with its level.
    pub functional_history: Vec<(usize, f64)>,
}

/// One frozen-coefficient minimisation problem
/// `min ½∫G(|Dv|²) + (shift/2)‖v‖² − ⟨rhs, v⟩` on padded vectors.
pub(crate) struct KacanovProblem<'a, T, L> {
    pub op: &'a FluxOperator,
    pub law: &'a L,
    pub shift: T,
    pub rhs: Vec<T>,
}

pub(crate) struct KacanovOutcome<T> {
    pub u: Vec<T>,
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub residual_history: Vec<f64>,
    pub functional_history: Vec<(usize, f64)>,
}

impl<T: Real, L: Constitutive<T>> KacanovProblem<'_, T, L> {
    fn volume(&self) -> T {
        self.op.grid().cell_volume::<T>()
    }

    fn rhs_scale(&self) -> T {
        (dot(&self.rhs, &self.rhs) * self.volume()).sqrt().max(T::one())
    }

    pub fn functional(&self, v: &[T], eps2: T) -> T {
        let vol = self.volume();
        let half = T::of(0.5);
        half * self.op.energy_padded(v, self.law, eps2) + half * self.shift * dot(v, v) * vol - dot(&self.rhs, v) * vol
    }

    /// `‖D*S(Dv) + shift v − rhs‖_h / max(‖rhs‖_h, 1)`.
    pub fn residual(&self, v: &[T], eps2: T, scratch: &mut [T]) -> T {
        self.op.stress_divergence_padded(v, self.law, eps2, scratch);
        for &pn in &self.op.layout.interior {
            let nc = self.op.components();
            for c in 0..nc {
                let i = pn * nc + c;
                scratch[i] = -scratch[i] + self.shift * v[i] - self.rhs[i];
            }
        }
        (dot(scratch, scratch) * self.volume()).sqrt() / self.rhs_scale()
    }

    pub fn solve(&self, mut u: Vec<T>, config: &StationarySolveConfig) -> Result<KacanovOutcome<T>> {
        let tol = T::of(config.tol);
        let mut scratch = vec![T::zero(); u.len()];
        let mut weights = Vec::new();
        let mut diag = vec![T::zero(); u.len()];
        let mut residual_history = Vec::new();
        let mut functional_history = Vec::new();

        let exact = self.residual(&u, T::zero(), &mut scratch);
        if exact <= tol {
            return Ok(KacanovOutcome {
                u,
                residual: exact.as_f64(),
                iterations: 0,
                inner_iterations: 0,
                residual_history,
                functional_history,
            });
        }

        let levels: Vec<T> = if self.law.is_linear() {
            vec![T::zero()]
        } else {
            config.eps_schedule.iter().map(|&e| T::of(e)).collect()
        };
        let mut best = (exact, u.clone());
        let mut iterations = 0;
        let mut inner_iterations = 0;
        let mut current = exact;
        let rhs_norm = dot(&self.rhs, &self.rhs).sqrt();
        // The CG tolerance is relative to ‖rhs‖ in the Euclidean norm, the outer
        // residual to max(‖rhs‖_h, 1); convert between the two.
        let cg_scale = (self.rhs_scale() / (rhs_norm * self.volume().sqrt()).max(T::min_positive_value())).as_f64();

        for (level, &eps) in levels.iter().enumerate() {
            let eps2 = eps * eps;
            let last = level + 1 == levels.len();
            let level_tol = if last { tol } else { tol.max(eps) };
            let mut prev_functional = self.functional(&u, eps2);
            loop {
                if iterations >= config.max_outer {
                    return Err(Error::NonConvergence {
                        iterations,
                        residual: best.0.as_f64(),
                        history: residual_history,
                        best: self.op.layout.unpad(&best.1).iter().map(|v| v.as_f64()).collect(),
                    });
                }
                self.op.map_corners_padded(&u, |s2| self.law.coefficient_regularized(s2, eps2), &mut weights);
                self.op.weighted_diagonal(&weights, self.shift, &mut diag);
                let cg_tol = (0.05 * current.as_f64()).min(1e-2).max(config.inner_tol) * cg_scale;
                let op = self.op;
                let shift = self.shift;
                let w = &weights;
                let cg = pcg(
                    |x: &[T], y: &mut [T]| op.apply_weighted(w, shift, x, y),
                    &diag,
                    &self.rhs,
                    &mut u,
                    T::of(cg_tol.min(0.5)),
                    config.max_inner,
                );
                iterations += 1;
                inner_iterations += cg.iterations;
                if !cg.converged && cg.relative_residual > 0.5 {
                    return Err(Error::NonConvergence {
                        iterations,
                        residual: best.0.as_f64(),
                        history: residual_history,
                        best: self.op.layout.unpad(&best.1).iter().map(|v| v.as_f64()).collect(),
                    });
                }
                let f_new = self.functional(&u, eps2);
                functional_history.push((level, f_new.as_f64()));
                debug_assert!(
                    f_new <= prev_functional + T::of(1e4) * T::unit_roundoff() * prev_functional.abs().max(T::one()),
                    "Kačanov step increased the functional"
                );
                prev_functional = f_new;
                let exact = self.residual(&u, T::zero(), &mut scratch);
                residual_history.push(exact.as_f64());
                if exact < best.0 {
                    best = (exact, u.clone());
                }
                let measured = if last || eps2 == T::zero() { exact } else { self.residual(&u, eps2, &mut scratch) };
                current = measured;
                if last && exact <= tol {
                    return Ok(KacanovOutcome {
                        u,
                        residual: exact.as_f64(),
                        iterations,
                        inner_iterations,
                        residual_history,
                        functional_history,
                    });
                }
                if !last && measured <= level_tol {
                    break;
                }
            }
        }
        unreachable!("the final level either converges or exhausts the budget")
    }
}

/// Minimises `E_h(u) − ⟨f, u⟩_h` starting from zero.
pub fn solve_stationary<T: Real, L: Constitutive<T>>(
    f: &VectorField<T>,
    law: &L,
    config: &StationarySolveConfig,
) -> Result<StationaryResult<T>> {
    solve_stationary_from(f, law, config, VectorField::zeros(*f.grid(), f.components()))
}

/// As [`solve_stationary`], warm-started from `initial`.
pub fn solve_stationary_from<T: Real, L: Constitutive<T>>(
    f: &VectorField<T>,
    law: &L,
    config: &StationarySolveConfig,
    initial: VectorField<T>,
) -> Result<StationaryResult<T>> {
    config.validate()?;
    if !initial.same_shape(f) {
        return Err(Error::Shape("initial guess and forcing differ in shape".into()));
    }
    let op = FluxOperator::new(*f.grid(), f.components());
    let problem = KacanovProblem { op: &op, law, shift: T::zero(), rhs: op.layout.pad(f.values()) };
    let out = problem.solve(op.layout.pad(initial.values()), config)?;
    let functional = problem.functional(&out.u, T::zero());
    let u = VectorField::from_values(*f.grid(), f.components(), op.layout.unpad(&out.u))?;
    let energy = op.energy(&u, law);
    Ok(StationaryResult {
        u,
        residual: out.residual,
        iterations: out.iterations,
        inner_iterations: out.inner_iterations,
        energy,
        functional,
        residual_history: out.residual_history,
        functional_history: out.functional_history,
    })
}

/// `‖div S(∇u) + f‖₂ / max(‖f‖₂, 1)` with the exact law.
pub fn stationary_residual<T: Real, L: Constitutive<T>>(u: &VectorField<T>, f: &VectorField<T>, law: &L) -> Result<T> {
    if !u.same_shape(f) {
        return Err(Error::Shape("solution and forcing differ in shape".into()));
    }
    let op = FluxOperator::new(*f.grid(), f.components());
    let problem = KacanovProblem { op: &op, law, shift: T::zero(), rhs: op.layout.pad(f.values()) };
    let pad = op.layout.pad(u.values());
    let mut scratch = vec![T::zero(); pad.len()];
    Ok(problem.residual(&pad, T::zero(), &mut scratch))
}

/// Implied constant of `‖u‖_{2,q̂} ≤ C (‖f‖_{q̂} + ‖f‖₂^(1/(p−1)))`.
pub fn verify_dnq<T: Real>(
    u: &VectorField<T>,
    f: &VectorField<T>,
    p: f64,
    q_hat: f64,
    meta: RecordMeta,
) -> EstimateRecord {
    let lhs = crate::field::sobolev_norms(u, q_hat).w2.as_f64();
    let f_q: f64 = crate::field::lebesgue_norm(f, q_hat).as_f64();
    let f_2: f64 = crate::field::lebesgue_norm(f, 2.0).as_f64();
    let basis = f_q + f_2.powf(1.0 / (p - 1.0));
    EstimateRecord::implied(EstimateId::Dnq, lhs, basis, meta)
}
