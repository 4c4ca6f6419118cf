//! Closed-form solutions and an independent high-order oracle for their forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::nonlinearity::Constitutive;

/// Analytic field with zero trace on the unit box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManufacturedSolution {
    /// `amplitude[c] · Π sin(k_i π x_i)`; frequencies must be positive integers.
    SineProduct { k: Vec<f64>, amplitude: Vec<f64> },
    /// `amplitude[c] · Π (4 x_i (1 − x_i))^power`.
    Bump { power: u32, amplitude: Vec<f64> },
}

impl ManufacturedSolution {
    pub fn sine(k: Vec<f64>, amplitude: Vec<f64>) -> Self {
        Self::SineProduct { k, amplitude }
    }

    pub fn amplitude(&self) -> &[f64] {
        match self {
            Self::SineProduct { amplitude, .. } | Self::Bump { amplitude, .. } => amplitude,
        }
    }

    pub fn validate(&self, n: usize, components: usize) -> Result<()> {
        if self.amplitude().len() != components {
            return Err(Error::Shape(format!(
                "solution has {} amplitudes, field has {components} components",
                self.amplitude().len()
            )));
        }
        if self.amplitude().iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("amplitudes must be finite".into()));
        }
        match self {
            Self::SineProduct { k, .. } => {
                if k.len() != n {
                    return Err(Error::Shape(format!("{} frequencies for dimension {n}", k.len())));
                }
                if k.iter().any(|&ki| !(ki >= 1.0) || (ki - ki.round()).abs() > 1e-12) {
                    return Err(Error::Domain(format!(
                        "sine frequencies {k:?} must be positive integers for a zero boundary trace"
                    )));
                }
            }
            Self::Bump { power, .. } => {
                if *power == 0 {
                    return Err(Error::Domain("bump power 0 does not vanish on the boundary".into()));
                }
            }
        }
        Ok(())
    }

    /// Scalar profile multiplying the amplitude vector.
    pub fn profile(&self, x: &[f64]) -> f64 {
        match self {
            Self::SineProduct { k, .. } => {
                k.iter().zip(x).map(|(&ki, &xi)| (ki * std::f64::consts::PI * xi).sin()).product()
            }
            Self::Bump { power, .. } => x.iter().map(|&xi| (4.0 * xi * (1.0 - xi)).powi(*power as i32)).product(),
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<VectorField<f64>> {
        self.validate(grid.n(), self.amplitude().len())?;
        let a = self.amplitude().to_vec();
        Ok(VectorField::from_fn(grid, a.len(), |x: &[f64], out: &mut [f64]| {
            let s = self.profile(x);
            for (o, ai) in out.iter_mut().zip(&a) {
                *o = ai * s;
            }
        }))
    }
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

/// `f = −div S(∇u*)` at the grid nodes.
///
/// `u*` is evaluated on the lattice refined four times; first derivatives of
/// `u*` and of the stress use fourth-order central differences there. The
/// solver's discrete operator is not involved.
pub fn manufactured_forcing<L: Constitutive<f64>>(
    solution: &ManufacturedSolution,
    grid: Grid,
    law: &L,
) -> Result<VectorField<f64>> {
    let n = grid.n();
    let a = solution.amplitude().to_vec();
    solution.validate(n, a.len())?;
    let amp_norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let hf = grid.h::<f64>() / 4.0;
    let mut y = [0.0; 3];
    let mut z = [0.0; 3];
    // Gradient of the scalar profile at y by fourth-order differences.
    let grad_profile = |y: &[f64], z: &mut [f64; 3], g: &mut [f64; 3]| {
        for l in 0..n {
            let mut s = 0.0;
            for &(off, w) in &D1 {
                z[..n].copy_from_slice(y);
                z[l] += off * hf;
                s += w * solution.profile(&z[..n]);
            }
            g[l] = s / hf;
        }
    };
    let mut g = [0.0; 3];
    Ok(VectorField::from_fn(grid, a.len(), |x: &[f64], out: &mut [f64]| {
        // u* = a φ, so ∇u* = a ⊗ ∇φ, |∇u*| = |a| |∇φ| and S = B(|∇u*|) a ⊗ ∇φ.
        let mut div = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for &(off, w) in &D1 {
                y[..n].copy_from_slice(x);
                y[i] += off * hf;
                grad_profile(&y[..n], &mut z, &mut g);
                let gn = g[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
                s += w * law.stress_factor(amp_norm * gn) * g[i];
            }
            div += s / hf;
        }
        for (o, ai) in out.iter_mut().zip(&a) {
            *o = -ai * div;
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{divergence_of_stress, lebesgue_norm};
    use crate::nonlinearity::NonlinearityParams;
    use std::f64::consts::PI;

    #[test]
    fn zero_solution_zero_forcing() {
        let law = NonlinearityParams::new(1.6, 0.0).unwrap();
        let u = ManufacturedSolution::sine(vec![1.0, 2.0], vec![0.0]);
        let f = manufactured_forcing(&u, Grid::new(2, 7).unwrap(), &law).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn heat_eigenmode_identity() {
        let law = NonlinearityParams::new(2.0, 0.0).unwrap();
        let u = ManufacturedSolution::sine(vec![1.0, 1.0, 2.0], vec![1.0, -0.5]);
        let scale = 6.0 * PI * PI;
        let mut errs = Vec::new();
        for m in [7, 15] {
            let g = Grid::new(3, m).unwrap();
            let f = manufactured_forcing(&u, g, &law).unwrap();
            let expect = u.sample(g).unwrap().scaled(scale);
            errs.push(lebesgue_norm::<f64, _>(&f.difference(&expect).unwrap(), f64::INFINITY) / scale);
        }
        assert!(errs[1] < 1e-5, "{errs:?}");
        assert!((errs[0] / errs[1]).log2() > 3.8, "{errs:?}");
    }

    #[test]
    fn non_integer_frequency_rejected() {
        let law = NonlinearityParams::new(1.6, 0.0).unwrap();
        let u = ManufacturedSolution::sine(vec![1.5, 1.0], vec![1.0]);
        assert!(matches!(manufactured_forcing(&u, Grid::new(2, 7).unwrap(), &law), Err(Error::Domain(_))));
        let u = ManufacturedSolution::Bump { power: 0, amplitude: vec![1.0] };
        assert!(u.validate(2, 1).is_err());
    }

    /// Away from the points where `∇u*` vanishes (the centre and the box
    /// corners), where `S(∇u*)` is not smooth, the oracle and the staggered
    /// operator agree to second order.
    #[test]
    fn oracle_matches_solver_operator_at_second_order() {
        for (p, mu) in [(1.6, 0.1), (1.6, 0.0), (1.3, 0.0)] {
            let law = NonlinearityParams::new(p, mu).unwrap();
            let u = ManufacturedSolution::sine(vec![1.0, 1.0], vec![1.0]);
            let mut errs = Vec::new();
            for m in [31, 63, 127] {
                let g = Grid::new(2, m).unwrap();
                let oracle = manufactured_forcing(&u, g, &law).unwrap();
                let discrete = divergence_of_stress(&u.sample(g).unwrap(), &law).scaled(-1.0);
                let mut x = [0.0f64; 2];
                let mut worst = 0.0f64;
                for node in 0..g.nodes() {
                    g.coords(node, &mut x);
                    let corner = x[0].min(1.0 - x[0]).hypot(x[1].min(1.0 - x[1]));
                    if (x[0] - 0.5).hypot(x[1] - 0.5) > 0.2 && corner > 0.2 {
                        worst = worst.max((oracle.values()[node] - discrete.values()[node]).abs());
                    }
                }
                errs.push(worst);
            }
            for w in errs.windows(2) {
                assert!((w[0] / w[1]).log2() > 1.8, "p {p} mu {mu}: {errs:?}");
            }
        }
    }
}
