use serde::{Deserialize, Serialize};

use super::modes::{eval_modes, interior_point, unit_direction, SineMode};
use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};

fn one() -> f64 {
    1.0
}

/// Initial data `u₀ ∈ W^{1,p}_0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Zero,
    /// Finite sine expansion (smooth).
    Modes { modes: Vec<SineMode> },
    /// `amplitude · |x − x0|^γ · Π sin(π x_i) · d`, a cusp at `x0`; needs
    /// `0 < γ` and `γ > 1 − n/p` so that `∇u₀ ∈ L^p`.
    Cusp {
        gamma: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
}

impl InitialSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Modes { .. } => "smooth-modes",
            Self::Cusp { .. } => "rough-cusp",
        }
    }

    pub fn validate(&self, n: usize, components: usize, p: f64) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Modes { modes } => modes.iter().try_for_each(|m| m.validate(n, components)),
            Self::Cusp { gamma, amplitude, x0, direction } => {
                let floor = (1.0 - n as f64 / p).max(0.0);
                if !(*gamma > floor) {
                    return Err(Error::Domain(format!(
                        "cusp exponent gamma = {gamma} must exceed max(0, 1 - n/p) = {floor}"
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::Invalid("amplitude must be finite".into()));
                }
                interior_point(x0.as_deref(), n)?;
                unit_direction(direction.as_deref(), components).map(|_| ())
            }
        }
    }
}

pub fn make_initial(grid: Grid, components: usize, spec: &InitialSpec, p: f64) -> Result<VectorField<f64>> {
    spec.validate(grid.n(), components, p)?;
    Ok(match spec {
        InitialSpec::Zero => VectorField::zeros(grid, components),
        InitialSpec::Modes { modes } => {
            VectorField::from_fn(grid, components, |x: &[f64], out: &mut [f64]| eval_modes(modes, x, out))
        }
        InitialSpec::Cusp { gamma, amplitude, x0, direction } => {
            let x0 = interior_point(x0.as_deref(), grid.n())?;
            let d = unit_direction(direction.as_deref(), components)?;
            VectorField::from_fn(grid, components, |x: &[f64], out: &mut [f64]| {
                let r = x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let s: f64 = x.iter().map(|&xi| (std::f64::consts::PI * xi).sin()).product();
                let v = amplitude * r.powf(*gamma) * s;
                for (o, di) in out.iter_mut().zip(&d) {
                    *o = v * di;
                }
            })
        }
    })
}
