use serde::{Deserialize, Serialize};

use super::modes::SineMode;
use crate::error::{Error, Result};
use crate::field::{Grid, Trajectory, VectorField};

/// Which eigenvalues drive the reference solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatVariant {
    /// `u(t) = Σ c_j e^(−λ_j t) φ_j` with `λ_j = π²|k_j|²`.
    Continuum,
    /// Implicit Euler recursion with the grid eigenvalues:
    /// amplitudes multiply by `1/(1 + τ λ_h)` per step.
    DiscreteEuler,
}

/// Reference solution of the heat equation (`p = 2`, `f = 0`) from a finite
/// sine expansion, sampled at `t_k = k τ`, `k = 0..=steps`.
pub fn heat_reference(
    modes: &[SineMode],
    tau: f64,
    steps: usize,
    grid: Grid,
    components: usize,
    variant: HeatVariant,
) -> Result<Trajectory<f64>> {
    if !(tau > 0.0) {
        return Err(Error::Invalid(format!("tau must be positive, got {tau}")));
    }
    for m in modes {
        m.validate(grid.n(), components)?;
    }
    let h: f64 = grid.h();
    let profiles: Vec<VectorField<f64>> = modes
        .iter()
        .map(|m| VectorField::from_fn(grid, 1, |x: &[f64], out: &mut [f64]| out[0] = m.profile(x)))
        .collect();
    let mut snapshots = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let mut vals = vec![0.0; grid.nodes() * components];
        for (m, phi) in modes.iter().zip(&profiles) {
            let factor = match variant {
                HeatVariant::Continuum => (-m.eigenvalue() * tau * k as f64).exp(),
                HeatVariant::DiscreteEuler => (1.0 + tau * m.discrete_eigenvalue(h)).powi(-(k as i32)),
            };
            for (node, &s) in phi.values().iter().enumerate() {
                for (c, a) in m.amplitude.iter().enumerate() {
                    vals[node * components + c] += factor * a * s;
                }
            }
        }
        snapshots.push(VectorField::from_values(grid, components, vals)?);
    }
    Trajectory::uniform(tau, snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn initial_snapshot_is_u0() {
        let g = Grid::new(3, 7).unwrap();
        let m = SineMode::new(vec![1, 1, 1], vec![2.0]);
        let tr = heat_reference(std::slice::from_ref(&m), 0.01, 3, g, 1, HeatVariant::Continuum).unwrap();
        let u0 = VectorField::from_fn(g, 1, |x: &[f64], o: &mut [f64]| o[0] = 2.0 * m.profile(x));
        assert_eq!(tr.initial(), &u0);
    }

    #[test]
    fn continuum_decay_rate() {
        let g = Grid::new(3, 7).unwrap();
        let m = SineMode::new(vec![1, 1, 1], vec![1.0]);
        let tr = heat_reference(std::slice::from_ref(&m), 0.05, 2, g, 1, HeatVariant::Continuum).unwrap();
        let ratio = tr.last().values()[100] / tr.initial().values()[100];
        assert!((ratio - (-3.0 * PI * PI * 0.1).exp()).abs() < 1e-14);
    }

    #[test]
    fn discrete_eigenvalue_tends_to_continuum() {
        let m = SineMode::new(vec![1, 2, 3], vec![1.0]);
        let lam = m.eigenvalue();
        let l1 = m.discrete_eigenvalue(1.0 / 32.0);
        let l2 = m.discrete_eigenvalue(1.0 / 64.0);
        assert!(l1 < lam && l2 < lam);
        assert!(((lam - l1) / (lam - l2) - 4.0).abs() < 0.05);
    }
}
