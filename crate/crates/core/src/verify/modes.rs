use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `amplitude[c] · Π_i sin(k_i π x_i)` in component `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineMode {
    /// Positive integer frequency per spatial axis.
    pub k: Vec<u32>,
    /// One amplitude per component.
    pub amplitude: Vec<f64>,
}

impl SineMode {
    pub fn new(k: Vec<u32>, amplitude: Vec<f64>) -> Self {
        Self { k, amplitude }
    }

    pub fn validate(&self, n: usize, components: usize) -> Result<()> {
        if self.k.len() != n {
            return Err(Error::Shape(format!("mode has {} frequencies, grid dimension is {n}", self.k.len())));
        }
        if self.k.contains(&0) {
            return Err(Error::Invalid("mode frequencies must be at least 1".into()));
        }
        if self.amplitude.len() != components {
            return Err(Error::Shape(format!(
                "mode has {} amplitudes, field has {components} components",
                self.amplitude.len()
            )));
        }
        if self.amplitude.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("mode amplitudes must be finite".into()));
        }
        Ok(())
    }

    pub fn profile(&self, x: &[f64]) -> f64 {
        self.k.iter().zip(x).map(|(&k, &xi)| (k as f64 * std::f64::consts::PI * xi).sin()).product()
    }

    /// Continuum Dirichlet eigenvalue `π² |k|²`.
    pub fn eigenvalue(&self) -> f64 {
        std::f64::consts::PI.powi(2) * self.k.iter().map(|&k| (k as f64).powi(2)).sum::<f64>()
    }

    /// Eigenvalue of the `(2n+1)`-point Laplacian, `Σ (4/h²) sin²(k_i π h / 2)`.
    pub fn discrete_eigenvalue(&self, h: f64) -> f64 {
        self.k.iter().map(|&k| 4.0 / (h * h) * (k as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2)).sum()
    }
}

/// Adds every mode at `x` into `out`.
pub(crate) fn eval_modes(modes: &[SineMode], x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for m in modes {
        let s = m.profile(x);
        for (o, a) in out.iter_mut().zip(&m.amplitude) {
            *o += a * s;
        }
    }
}

/// Unit direction in component space; `None` means the first basis vector.
pub(crate) fn unit_direction(direction: Option<&[f64]>, components: usize) -> Result<Vec<f64>> {
    match direction {
        None => {
            let mut d = vec![0.0; components];
            d[0] = 1.0;
            Ok(d)
        }
        Some(d) => {
            if d.len() != components {
                return Err(Error::Shape(format!(
                    "direction has {} entries, field has {components} components",
                    d.len()
                )));
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Invalid("direction must be a finite nonzero vector".into()));
            }
            Ok(d.iter().map(|v| v / norm).collect())
        }
    }
}

/// Singular point inside the open unit box; `None` means its centre.
pub(crate) fn interior_point(x0: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    match x0 {
        None => Ok(vec![0.5; n]),
        Some(x) => {
            if x.len() != n {
                return Err(Error::Shape(format!("x0 has {} coordinates, grid dimension is {n}", x.len())));
            }
            if x.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::Domain("x0 must lie inside the open unit box".into()));
            }
            Ok(x.to_vec())
        }
    }
}
