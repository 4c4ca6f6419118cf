use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manufactured::{manufactured_forcing, ManufacturedSolution};
use super::modes::{eval_modes, interior_point, unit_direction, SineMode};
use super::quadrature::radial_cell_average;
use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::nonlinearity::NonlinearityParams;
use crate::parabolic::Source;
use crate::scalar::Real;

fn one() -> f64 {
    1.0
}

/// Spatial shape of the forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForcingShape {
    Zero,
    SmoothMode {
        modes: Vec<SineMode>,
    },
    /// `amplitude · |x − x0|^(−β) · d`, square integrable for `β < n/2`.
    RoughRadial {
        beta: f64,
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// `−div S(∇u*)` for a closed-form `u*`.
    Manufactured {
        solution: ManufacturedSolution,
    },
}

/// Time modulation `a(t)` of the spatial shape.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `count` boxes of the given width at seeded uniform centres in
    /// `[0, horizon]`, each of height `amplitude/√width` (unit `L²` mass for
    /// amplitude one).
    SpikeTrain { count: usize, width: f64, amplitude: f64, horizon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub shape: ForcingShape,
    #[serde(default)]
    pub profile: TimeProfile,
    #[serde(default)]
    pub seed: u64,
}

impl ForcingSpec {
    pub fn constant(shape: ForcingShape) -> Self {
        Self { shape, profile: TimeProfile::Constant, seed: 0 }
    }

    pub fn rough(beta: f64, amplitude: f64) -> Self {
        Self::constant(ForcingShape::RoughRadial { beta, x0: None, amplitude, direction: None })
    }

    pub fn validate(&self, n: usize, components: usize) -> Result<()> {
        match &self.shape {
            ForcingShape::Zero => {}
            ForcingShape::SmoothMode { modes } => {
                for m in modes {
                    m.validate(n, components)?;
                }
            }
            ForcingShape::RoughRadial { beta, x0, amplitude, direction } => {
                if !(*beta >= 0.0) || !(*beta < n as f64 / 2.0) {
                    return Err(Error::Domain(format!(
                        "beta = {beta} must satisfy 0 <= beta < n/2 = {} for a square-integrable forcing",
                        n as f64 / 2.0
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::Invalid("amplitude must be finite".into()));
                }
                interior_point(x0.as_deref(), n)?;
                unit_direction(direction.as_deref(), components)?;
            }
            ForcingShape::Manufactured { solution } => solution.validate(n, components)?,
        }
        if let TimeProfile::SpikeTrain { count, width, amplitude, horizon } = self.profile {
            if count == 0 || !(width > 0.0) || !(horizon > 0.0) || !amplitude.is_finite() {
                return Err(Error::Invalid(
                    "spike train needs count >= 1, width > 0, horizon > 0 and a finite amplitude".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Nodal samples of `a(t) · shape(x)`.
#[derive(Debug, Clone)]
pub struct ForcingSource<T> {
    shape: VectorField<T>,
    profile: TimeProfile,
    centres: Vec<f64>,
}

impl<T: Real> ForcingSource<T> {
    pub fn shape(&self) -> &VectorField<T> {
        &self.shape
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        match self.profile {
            TimeProfile::Constant => 1.0,
            TimeProfile::SpikeTrain { width, amplitude, .. } => {
                let height = amplitude / width.sqrt();
                self.centres.iter().filter(|&&c| (t - c).abs() <= 0.5 * width).count() as f64 * height
            }
        }
    }

    pub fn spike_centres(&self) -> &[f64] {
        &self.centres
    }

    pub fn is_constant(&self) -> bool {
        self.profile == TimeProfile::Constant
    }
}

impl<T: Real> Source<T> for ForcingSource<T> {
    fn sample(&self, t: f64) -> Result<VectorField<T>> {
        match self.profile {
            TimeProfile::Constant => Ok(self.shape.clone()),
            _ => Ok(self.shape.scaled(T::of(self.amplitude(t)))),
        }
    }
}

/// Radial singular forcing; a node at `x0` receives the cell average
/// `h^(−β) · mean_{[−½,½]^n} |ξ|^(−β)`.
pub fn rough_radial_field(
    grid: Grid,
    components: usize,
    beta: f64,
    x0: Option<&[f64]>,
    amplitude: f64,
    direction: Option<&[f64]>,
) -> Result<VectorField<f64>> {
    let n = grid.n();
    if !(beta >= 0.0 && beta < n as f64 / 2.0) {
        return Err(Error::Domain(format!("beta = {beta} must satisfy 0 <= beta < n/2 = {}", n as f64 / 2.0)));
    }
    let x0 = interior_point(x0, n)?;
    let d = unit_direction(direction, components)?;
    let h: f64 = grid.h();
    let singular = amplitude * h.powf(-beta) * radial_cell_average(n, beta);
    Ok(VectorField::from_fn(grid, components, |x: &[f64], out: &mut [f64]| {
        let r = x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let v = if r <= 1e-9 * h { singular } else { amplitude * r.powf(-beta) };
        for (o, di) in out.iter_mut().zip(&d) {
            *o = v * di;
        }
    }))
}

/// Builds any forcing. `law` is needed by manufactured shapes only.
pub fn make_forcing(
    grid: Grid,
    components: usize,
    spec: &ForcingSpec,
    law: &NonlinearityParams<f64>,
) -> Result<ForcingSource<f64>> {
    spec.validate(grid.n(), components)?;
    let shape = match &spec.shape {
        ForcingShape::Zero => VectorField::zeros(grid, components),
        ForcingShape::SmoothMode { modes } => {
            VectorField::from_fn(grid, components, |x: &[f64], out: &mut [f64]| eval_modes(modes, x, out))
        }
        ForcingShape::RoughRadial { beta, x0, amplitude, direction } => {
            rough_radial_field(grid, components, *beta, x0.as_deref(), *amplitude, direction.as_deref())?
        }
        ForcingShape::Manufactured { solution } => manufactured_forcing(solution, grid, law)?,
    };
    let centres = match spec.profile {
        TimeProfile::Constant => Vec::new(),
        TimeProfile::SpikeTrain { count, horizon, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut c: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..horizon)).collect();
            c.sort_by(f64::total_cmp);
            c
        }
    };
    Ok(ForcingSource { shape, profile: spec.profile.clone(), centres })
}

/// Rough radial forcing; rejects anything but a rough-radial shape.
pub fn make_rough_forcing(grid: Grid, components: usize, spec: &ForcingSpec) -> Result<ForcingSource<f64>> {
    if !matches!(spec.shape, ForcingShape::RoughRadial { .. }) {
        return Err(Error::Invalid("make_rough_forcing needs a rough-radial shape".into()));
    }
    let law = NonlinearityParams::new(2.0, 0.0)?;
    make_forcing(grid, components, spec, &law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lebesgue_norm;

    #[test]
    fn beta_at_half_dimension_rejected() {
        let spec = ForcingSpec::rough(1.5, 1.0);
        let g = Grid::new(3, 7).unwrap();
        assert!(matches!(make_rough_forcing(g, 1, &spec), Err(Error::Domain(_))));
    }

    #[test]
    fn rough_norms_under_refinement() {
        let spec = ForcingSpec::rough(1.4, 1.0);
        let mut l2 = Vec::new();
        let mut l4 = Vec::new();
        for m in [15, 31, 63] {
            let g = Grid::new(3, m).unwrap();
            let f = make_rough_forcing(g, 1, &spec).unwrap().sample(0.0).unwrap();
            l2.push(lebesgue_norm::<f64, _>(&f, 2.0));
            l4.push(lebesgue_norm::<f64, _>(&f, 4.0).powi(4));
        }
        // ‖f‖₂ converges, the tail shrinking like h^(3/2 − β).
        assert!((l2[2] - l2[1]).abs() < (l2[1] - l2[0]).abs());
        assert!((l2[2] - l2[1]).abs() / l2[2] < 0.05);
        // ‖f‖₄⁴ grows like h^(3 − 4β).
        let rate = (l4[2] / l4[1]).log2();
        assert!((rate - 2.6).abs() < 0.15, "rate {rate}");
    }

    #[test]
    fn bounded_forcing_for_zero_beta() {
        let spec = ForcingSpec::rough(0.0, 2.0);
        let g = Grid::new(2, 9).unwrap();
        let f = make_rough_forcing(g, 2, &spec).unwrap().sample(0.0).unwrap();
        assert!(f.values().chunks(2).all(|c| c == [2.0, 0.0]));
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let g = Grid::new(2, 9).unwrap();
        let f = make_rough_forcing(g, 1, &ForcingSpec::rough(0.7, 0.0)).unwrap();
        assert!(f.sample(0.3).unwrap().is_zero());
        let spec = ForcingSpec {
            profile: TimeProfile::SpikeTrain { count: 3, width: 0.01, amplitude: 0.0, horizon: 1.0 },
            ..ForcingSpec::rough(0.7, 1.0)
        };
        let f = make_rough_forcing(g, 1, &spec).unwrap();
        for t in [0.0, 0.2, 0.5, 0.9] {
            assert!(f.sample(t).unwrap().is_zero());
        }
    }

    #[test]
    fn spike_train_is_seeded() {
        let g = Grid::new(1, 7).unwrap();
        let spec = |seed| ForcingSpec {
            profile: TimeProfile::SpikeTrain { count: 4, width: 0.05, amplitude: 1.0, horizon: 1.0 },
            seed,
            ..ForcingSpec::rough(0.2, 1.0)
        };
        let a = make_rough_forcing(g, 1, &spec(7)).unwrap();
        let b = make_rough_forcing(g, 1, &spec(7)).unwrap();
        let c = make_rough_forcing(g, 1, &spec(8)).unwrap();
        assert_eq!(a.spike_centres(), b.spike_centres());
        assert_ne!(a.spike_centres(), c.spike_centres());
        let t = a.spike_centres()[0];
        assert!((a.amplitude(t) - 1.0 / 0.05f64.sqrt()).abs() < 1e-12 || a.amplitude(t) > 1.0 / 0.05f64.sqrt());
    }

    #[test]
    fn spec_rejects_unknown_keys() {
        let text = r#"{"seed": 3,
            "shape": {"kind": "rough-radial", "beta": 1.4},
            "profile": {"kind": "spike-train", "count": 2, "width": 0.1, "amplitude": 1.0, "horizon": 0.5}}"#;
        let spec: ForcingSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.seed, 3);
        let bad = r#"{"shape": {"kind": "rough-radial", "beta": 1.4, "bta": 2}}"#;
        assert!(serde_json::from_str::<ForcingSpec>(bad).is_err());
    }
}
