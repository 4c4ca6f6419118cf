//! Implicit Euler time stepping for `∂ₜu − div S(∇u) = f`.
//!
//! Each step minimises `E_h(v) + ‖v − u_k‖²/(2τ) − ⟨f_k, v⟩_h` with the
//! stationary Kačanov machinery, so the scheme inherits the discrete
//! gradient-flow structure and the energy inequality
//! `∫G(u^{k+1}) − ∫G(u^k) + τ D_k ≤ τ F_k` holds up to solver tolerance.
//! The forcing of step `k` is sampled at the end of the step, `f(t_{k+1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FluxOperator, Trajectory, VectorField};
use crate::nonlinearity::Constitutive;
use crate::scalar::{dot, Real};
use crate::stationary::{KacanovProblem, StationarySolveConfig};
use crate::verify::fmt_f64;

/// Snapshots kept by default before thinning kicks in.
pub const DEFAULT_SNAPSHOT_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicRunConfig {
    pub tau: f64,
    /// Final time; must be an integer multiple of `tau`.
    pub final_time: f64,
    #[serde(default)]
    pub solver: StationarySolveConfig,
    /// Keep every `stride`-th state (the final state is always kept).
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
}

impl ParabolicRunConfig {
    pub fn new(tau: f64, steps: usize) -> Self {
        Self { tau, final_time: tau * steps as f64, solver: StationarySolveConfig::default(), snapshot_stride: None }
    }

    pub fn steps(&self) -> usize {
        (self.final_time / self.tau).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::Invalid(format!("final_time must be positive, got {}", self.final_time)));
        }
        let m = self.steps();
        if m == 0 || (m as f64 * self.tau - self.final_time).abs() > 1e-9 * self.final_time {
            return Err(Error::Invalid(format!(
                "final_time {} is not an integer multiple of tau {}",
                self.final_time, self.tau
            )));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::Invalid("snapshot_stride must be at least 1".into()));
        }
        self.solver.validate()
    }

    pub fn stride(&self) -> usize {
        self.snapshot_stride.unwrap_or_else(|| self.steps().div_ceil(DEFAULT_SNAPSHOT_LIMIT).max(1))
    }
}

/// Time-dependent forcing sampled at nodes.
pub trait Source<T> {
    fn sample(&self, t: f64) -> Result<VectorField<T>>;
}

impl<T, F: Fn(f64) -> Result<VectorField<T>>> Source<T> for F {
    fn sample(&self, t: f64) -> Result<VectorField<T>> {
        self(t)
    }
}

/// Time-independent forcing.
#[derive(Debug, Clone)]
pub struct ConstantSource<T>(pub VectorField<T>);

impl<T: Clone> Source<T> for ConstantSource<T> {
    fn sample(&self, _t: f64) -> Result<VectorField<T>> {
        Ok(self.0.clone())
    }
}

/// `∫G` and the solver functional `E_h = ½∫G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub integral_g: f64,
    pub functional: f64,
}

pub fn energy<T: Real, L: Constitutive<T>>(u: &VectorField<T>, law: &L) -> EnergyValue {
    let g = FluxOperator::new(*u.grid(), u.components()).energy(u, law).as_f64();
    EnergyValue { integral_g: g, functional: 0.5 * g }
}

/// Terms of one implicit step ending in state `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerRow {
    pub k: usize,
    pub t: f64,
    /// `∫G(|∇u^k|²)`.
    pub energy: f64,
    /// `‖div S(∇u^k)‖₂²`.
    pub dissipation: f64,
    /// `‖f(t_k)‖₂²`.
    pub forcing: f64,
    /// `‖(u^k − u^{k−1})/τ‖₂²`.
    pub dtnorm: f64,
    /// `‖∇u^k‖_p^p` in the staggered quadrature.
    pub grad_p_pow: f64,
    /// `‖(u^k − u^{k−1})/τ − div S(∇u^k) − f(t_k)‖₂`.
    pub el_residual: f64,
    /// `2τ ‖div S‖₂ ‖residual‖₂`, the admissible defect of the step inequality.
    pub slack: f64,
    /// `τF − (∫G^k − ∫G^{k−1}) − τD`.
    pub margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyLedger {
    pub tau: f64,
    pub p: f64,
    pub initial_energy: f64,
    pub initial_grad_p_pow: f64,
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn energy_before(&self, i: usize) -> f64 {
        if i == 0 {
            self.initial_energy
        } else {
            self.rows[i - 1].energy
        }
    }

    /// CSV with columns `k,t,E,D,F,dtnorm,margin,slack,el_residual,grad_p_pow`;
    /// row `k = 0` is the initial state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,E,D,F,dtnorm,margin,slack,el_residual,grad_p_pow\n");
        out.push_str(&format!(
            "0,{},{},,,,,,,{}\n",
            fmt_f64(0.0),
            fmt_f64(self.initial_energy),
            fmt_f64(self.initial_grad_p_pow)
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.k,
                fmt_f64(r.t),
                fmt_f64(r.energy),
                fmt_f64(r.dissipation),
                fmt_f64(r.forcing),
                fmt_f64(r.dtnorm),
                fmt_f64(r.margin),
                fmt_f64(r.slack),
                fmt_f64(r.el_residual),
                fmt_f64(r.grad_p_pow)
            ));
        }
        out
    }
}

/// Outcome of one implicit step.
#[derive(Debug, Clone)]
pub struct StepResult<T> {
    pub u: VectorField<T>,
    /// Normalised residual `‖D*S + v/τ − (f + u_k/τ)‖ / max(‖f + u_k/τ‖, 1)`.
    pub residual: f64,
    pub iterations: usize,
    pub row: LedgerRow,
}

fn step_full<T: Real, L: Constitutive<T>>(
    op: &FluxOperator,
    u_k: &VectorField<T>,
    f_k: &VectorField<T>,
    tau: f64,
    law: &L,
    config: &StationarySolveConfig,
) -> Result<StepResult<T>> {
    if !u_k.same_shape(f_k) {
        return Err(Error::Shape("state and forcing differ in shape".into()));
    }
    let inv_tau = T::of(1.0 / tau);
    let old = op.layout.pad(u_k.values());
    let mut rhs = op.layout.pad(f_k.values());
    for (r, &o) in rhs.iter_mut().zip(&old) {
        *r += inv_tau * o;
    }
    let problem = KacanovProblem { op, law, shift: inv_tau, rhs };
    let out = problem.solve(old.clone(), config)?;
    let new = out.u;

    let vol = op.grid().cell_volume::<T>().as_f64();
    let mut div = vec![T::zero(); new.len()];
    op.stress_divergence_padded(&new, law, T::zero(), &mut div);
    let f_pad = op.layout.pad(f_k.values());
    let (mut dd, mut ff, mut vv, mut rr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let nc = op.components();
    for &pn in &op.layout.interior {
        for c in 0..nc {
            let i = pn * nc + c;
            let v = (new[i] - old[i]) * inv_tau;
            let d = div[i];
            dd.push(d * d);
            ff.push(f_pad[i] * f_pad[i]);
            vv.push(v * v);
            let r = v - d - f_pad[i];
            rr.push(r * r);
        }
    }
    let sum = |v: &[T]| crate::scalar::pairwise_sum_slice(v).as_f64() * vol;
    let dissipation = sum(&dd);
    let forcing = sum(&ff);
    let dtnorm = sum(&vv);
    let el_residual = sum(&rr).sqrt();
    let energy = op.energy_padded(&new, law, T::zero()).as_f64();
    let u = VectorField::from_values(*u_k.grid(), nc, op.layout.unpad(&new))?;
    let grad_p_pow = op.gradient_power(&u, law.p()).as_f64();
    debug_assert!(dot(&div, &div).is_finite());
    Ok(StepResult {
        u,
        residual: out.residual,
        iterations: out.iterations,
        row: LedgerRow {
            k: 0,
            t: 0.0,
            energy,
            dissipation,
            forcing,
            dtnorm,
            grad_p_pow,
            el_residual,
            slack: 2.0 * tau * dissipation.sqrt() * el_residual,
            margin: f64::NAN,
            iterations: out.iterations,
        },
    })
}

/// One implicit Euler step from `u_k` with forcing `f_k`.
pub fn step_implicit<T: Real, L: Constitutive<T>>(
    u_k: &VectorField<T>,
    f_k: &VectorField<T>,
    tau: f64,
    law: &L,
    config: &StationarySolveConfig,
) -> Result<StepResult<T>> {
    if !(tau > 0.0) {
        return Err(Error::Invalid(format!("tau must be positive, got {tau}")));
    }
    config.validate()?;
    let op = FluxOperator::new(*u_k.grid(), u_k.components());
    let mut s = step_full(&op, u_k, f_k, tau, law, config)?;
    let e0 = op.energy(u_k, law).as_f64();
    let r = &mut s.row;
    r.k = 1;
    r.t = tau;
    r.margin = tau * r.forcing - (r.energy - e0) - tau * r.dissipation;
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct ParabolicRun<T> {
    pub trajectory: Trajectory<T>,
    pub ledger: EnergyLedger,
}

/// A run that stopped early; holds everything computed before the failure
/// (`None` when the configuration was rejected up front).
#[derive(Debug)]
pub struct PartialRun<T> {
    pub run: Option<ParabolicRun<T>>,
    pub error: Error,
}

impl<T> From<Box<PartialRun<T>>> for Error {
    fn from(p: Box<PartialRun<T>>) -> Self {
        p.error
    }
}

/// `M = T/τ` implicit steps from `u0`.
pub fn solve_parabolic<T: Real, L: Constitutive<T>, S: Source<T> + ?Sized>(
    u0: &VectorField<T>,
    source: &S,
    law: &L,
    config: &ParabolicRunConfig,
) -> std::result::Result<ParabolicRun<T>, Box<PartialRun<T>>> {
    let invalid = |error: Error| Box::new(PartialRun { run: None, error });
    if let Err(e) = config.validate() {
        return Err(invalid(e));
    }
    let trajectory = match Trajectory::new(T::of(config.tau), u0.clone()) {
        Ok(t) => t,
        Err(e) => return Err(invalid(e)),
    };
    let op = FluxOperator::new(*u0.grid(), u0.components());
    let steps = config.steps();
    let stride = config.stride();
    let mut run = ParabolicRun {
        trajectory,
        ledger: EnergyLedger {
            tau: config.tau,
            p: law.p().as_f64(),
            initial_energy: op.energy(u0, law).as_f64(),
            initial_grad_p_pow: op.gradient_power(u0, law.p()).as_f64(),
            rows: Vec::with_capacity(steps),
        },
    };
    let mut u = u0.clone();
    for k in 1..=steps {
        let t = k as f64 * config.tau;
        let fail = |run: ParabolicRun<T>, e: Error| {
            Box::new(PartialRun { run: Some(run), error: Error::Step { step: k, source: Box::new(e) } })
        };
        let f_k = match source.sample(t) {
            Ok(f) => f,
            Err(e) => return Err(fail(run, e)),
        };
        let s = match step_full(&op, &u, &f_k, config.tau, law, &config.solver) {
            Ok(s) => s,
            Err(e) => return Err(fail(run, e)),
        };
        let mut row = s.row;
        row.k = k;
        row.t = t;
        let before = run.ledger.energy_before(k - 1);
        row.margin = config.tau * row.forcing - (row.energy - before) - config.tau * row.dissipation;
        run.ledger.rows.push(row);
        u = s.u;
        if k % stride == 0 || k == steps {
            run.trajectory.push(k, u.clone()).expect("increasing steps of a fixed shape");
        }
    }
    Ok(run)
}

/// Margin of one discrete energy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMargin {
    pub k: usize,
    pub margin: f64,
    pub slack: f64,
    /// `margin` over the largest term of the inequality.
    pub relative: f64,
}

impl StepMargin {
    /// Within the relative tolerance or the solver-derived slack.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.relative >= -rel_tol || self.margin + self.slack >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    /// Per-step form `∫G^{k} − ∫G^{k−1} + τD_k ≤ τF_k`.
    pub steps: Vec<StepMargin>,
    /// Time-integrated form `∫G^k + τΣ_{j≤k} D_j ≤ ∫G^0 + τΣ_{j≤k} F_j`.
    pub cumulative: Vec<StepMargin>,
}

impl EnergyCheck {
    pub fn worst_step(&self) -> Option<&StepMargin> {
        self.steps.iter().min_by(|a, b| a.relative.total_cmp(&b.relative))
    }

    pub fn worst_cumulative(&self) -> Option<&StepMargin> {
        self.cumulative.iter().min_by(|a, b| a.relative.total_cmp(&b.relative))
    }
}

/// Per-step and cumulative energy-inequality margins from a ledger.
pub fn check_energy_inequality(ledger: &EnergyLedger) -> EnergyCheck {
    let tau = ledger.tau;
    let mut steps = Vec::with_capacity(ledger.len());
    let mut cumulative = Vec::with_capacity(ledger.len());
    let (mut sum_d, mut sum_f, mut sum_slack) = (0.0, 0.0, 0.0);
    for (i, r) in ledger.rows.iter().enumerate() {
        let before = ledger.energy_before(i);
        let scale = [before.abs(), r.energy.abs(), tau * r.dissipation, tau * r.forcing]
            .into_iter()
            .fold(f64::MIN_POSITIVE, f64::max);
        steps.push(StepMargin { k: r.k, margin: r.margin, slack: r.slack, relative: r.margin / scale });
        sum_d += tau * r.dissipation;
        sum_f += tau * r.forcing;
        sum_slack += r.slack;
        let margin = ledger.initial_energy + sum_f - r.energy - sum_d;
        let scale =
            [ledger.initial_energy.abs(), r.energy.abs(), sum_d, sum_f].into_iter().fold(f64::MIN_POSITIVE, f64::max);
        cumulative.push(StepMargin { k: r.k, margin, slack: sum_slack, relative: margin / scale });
    }
    EnergyCheck { steps, cumulative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::nonlinearity::NonlinearityParams;
    use std::f64::consts::PI;

    fn mode(g: Grid, amp: f64) -> VectorField<f64> {
        VectorField::from_fn(g, 1, |x: &[f64], o: &mut [f64]| {
            o[0] = amp * x.iter().map(|&xi| (PI * xi).sin()).product::<f64>()
        })
    }

    fn zero_source(g: Grid) -> ConstantSource<f64> {
        ConstantSource(VectorField::zeros(g, 1))
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(2, 7).unwrap();
        let law = NonlinearityParams::new(1.6, 0.0).unwrap();
        let run = solve_parabolic(&VectorField::zeros(g, 1), &zero_source(g), &law, &ParabolicRunConfig::new(0.01, 5))
            .unwrap();
        assert!(run.trajectory.snapshots().iter().all(|u| u.is_zero()));
        assert_eq!(run.ledger.len(), 5);
    }

    #[test]
    fn heat_mode_decays_by_discrete_factor() {
        let g = Grid::new(2, 15).unwrap();
        let h: f64 = g.h();
        let law = NonlinearityParams::new(2.0, 0.0).unwrap();
        let tau = 0.01;
        let lambda = 2.0 * 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        let u0 = mode(g, 1.0);
        let run = solve_parabolic(&u0, &zero_source(g), &law, &ParabolicRunConfig::new(tau, 4)).unwrap();
        for (k, u) in run.trajectory.snapshots().iter().enumerate() {
            let expect = u0.scaled((1.0 + tau * lambda).powi(-(k as i32)));
            let e: f64 = crate::field::lebesgue_norm(&u.difference(&expect).unwrap(), f64::INFINITY);
            assert!(e < 1e-10, "step {k}: {e}");
        }
    }

    #[test]
    fn energy_inequality_and_monotone_gradient_norm() {
        let g = Grid::new(2, 11).unwrap();
        let law = NonlinearityParams::new(1.6, 0.0).unwrap();
        let run = solve_parabolic(&mode(g, 1.0), &zero_source(g), &law, &ParabolicRunConfig::new(0.002, 10)).unwrap();
        let check = check_energy_inequality(&run.ledger);
        assert!(check.steps.iter().all(|m| m.relative >= -1e-10));
        assert!(check.cumulative.iter().all(|m| m.relative >= -1e-10));
        let mut prev = run.ledger.initial_grad_p_pow;
        for r in &run.ledger.rows {
            assert!(r.grad_p_pow <= prev * (1.0 + 1e-12));
            assert!(r.el_residual <= 1e-6);
            prev = r.grad_p_pow;
        }
    }

    #[test]
    fn step_satisfies_euler_lagrange() {
        let g = Grid::new(2, 9).unwrap();
        let law = NonlinearityParams::new(1.5, 0.2).unwrap();
        let u0 = mode(g, 0.5);
        let f = mode(g, 3.0);
        let s = step_implicit(&u0, &f, 0.01, &law, &StationarySolveConfig::default()).unwrap();
        let lhs = s.u.difference(&u0).unwrap().scaled(100.0);
        let rhs = crate::field::divergence_of_stress(&s.u, &law).add_scaled(1.0, &f).unwrap();
        let r: f64 = crate::field::lebesgue_norm(&lhs.difference(&rhs).unwrap(), 2.0);
        assert!((r - s.row.el_residual).abs() < 1e-9);
        assert!(s.residual <= 1e-8);
    }

    #[test]
    fn ledger_csv_shape() {
        let g = Grid::new(1, 7).unwrap();
        let law = NonlinearityParams::new(1.8, 0.0).unwrap();
        let run = solve_parabolic(&mode(g, 1.0), &zero_source(g), &law, &ParabolicRunConfig::new(0.01, 3)).unwrap();
        let csv = run.ledger.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("k,t,E,D,F,dtnorm,margin"));
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn stride_thins_snapshots() {
        let g = Grid::new(1, 7).unwrap();
        let law = NonlinearityParams::new(2.0, 0.0).unwrap();
        let cfg = ParabolicRunConfig { snapshot_stride: Some(3), ..ParabolicRunConfig::new(0.01, 7) };
        let run = solve_parabolic(&mode(g, 1.0), &zero_source(g), &law, &cfg).unwrap();
        assert_eq!(run.trajectory.steps(), &[0, 3, 6, 7]);
        assert_eq!(run.ledger.len(), 7);
    }

    #[test]
    fn config_rejects_non_multiple() {
        let cfg = ParabolicRunConfig { final_time: 0.105, ..ParabolicRunConfig::new(0.01, 10) };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_ledger_gives_no_margins() {
        let ledger = EnergyLedger { tau: 0.1, p: 1.5, initial_energy: 1.0, initial_grad_p_pow: 1.0, rows: vec![] };
        let c = check_energy_inequality(&ledger);
        assert!(c.steps.is_empty() && c.cumulative.is_empty());
    }
}
