//! Run configuration: TOML with every unknown key rejected and every module
//! precondition re-checked at parse time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use plap_core::exponents::DEFAULT_YUDOVICH_K;
use plap_core::field::Grid;
use plap_core::parabolic::ParabolicRunConfig;
use plap_core::stationary::StationarySolveConfig;
use plap_core::verify::{AuditConfig, ForcingShape, ForcingSpec, InitialSpec, SineMode, TimeProfile};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "PLAP_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

fn default_components() -> usize {
    1
}

fn default_k() -> f64 {
    DEFAULT_YUDOVICH_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    #[serde(default)]
    pub mu: f64,
    pub n: usize,
    /// Number of components `N`.
    #[serde(rename = "N", default = "default_components")]
    pub components: usize,
    pub m: usize,
    /// Final time `T`; parabolic runs only.
    #[serde(rename = "T", default)]
    pub final_time: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    /// Constant of the Calderón–Zygmund bound `C2(q) ≤ K q`.
    #[serde(rename = "K", default = "default_k")]
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Factor applied to every explicit right-hand side.
    pub slack_factor: f64,
    /// Relative defect tolerated in the discrete energy inequalities.
    pub energy_rel_tol: f64,
    /// Record the implied `dnq` constant for stationary solves.
    pub dnq: bool,
    /// `μ` values of the uniformity sweeps.
    pub mu_values: Vec<f64>,
    /// Largest admissible max/min ratio of implied constants.
    pub uniformity_threshold: f64,
    /// Also sweep parabolic runs over `mu_values` (`funds3` uniformity).
    pub parabolic_sweep: bool,
    /// Report Hölder seminorms against the `W^{2,q̂}` Bochner norm.
    pub holder: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let audit = AuditConfig::default();
        Self {
            slack_factor: audit.slack_factor,
            energy_rel_tol: audit.energy_rel_tol,
            dnq: true,
            mu_values: plap_core::verify::STANDARD_MU_SWEEP.to_vec(),
            uniformity_threshold: 10.0,
            parabolic_sweep: false,
            holder: false,
        }
    }
}

impl VerifyConfig {
    pub fn audit(&self) -> AuditConfig {
        AuditConfig { slack_factor: self.slack_factor, energy_rel_tol: self.energy_rel_tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// `p = 2` sine-mode run against the closed-form heat solution.
    Heat,
    /// Stationary solve against a manufactured solution.
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauRule {
    /// `τ = h²`.
    HSquared,
    /// `τ` from `problem.tau` on every rung.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub kind: StudyKind,
    /// Refinement ladder of `m`.
    pub m_values: Vec<usize>,
    pub tau_rule: TauRule,
    /// Smallest acceptable observed order on the last rung.
    pub min_order: f64,
    /// Largest `μ` of the dyadic limit study.
    pub mu0: f64,
    pub levels: usize,
    /// Required length of the strictly decreasing chain of differences.
    pub min_cauchy_levels: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            kind: StudyKind::Heat,
            m_values: vec![15, 31],
            tau_rule: TauRule::HSquared,
            min_order: 1.8,
            mu0: 1.0,
            levels: 6,
            min_cauchy_levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default = "zero_forcing")]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: StationarySolveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub study: StudyConfig,
    /// Snapshot thinning stride for parabolic runs.
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn zero_forcing() -> ForcingSpec {
    ForcingSpec::constant(ForcingShape::Zero)
}

/// A validated configuration with the hash of its source bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// Hex SHA-256 of the configuration bytes.
    pub hash: String,
    pub source: Option<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| ConfigError::Parse(format!("{} is not valid UTF-8", path.display())))?;
    let config = parse_config_str(&text).map_err(|e| match e {
        ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(LoadedConfig { config, hash: sha256_hex(&bytes), source: Some(path.to_owned()) })
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.problem.n, self.problem.m).expect("validated grid")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pr = &self.problem;
        if !(pr.p > 1.0 && pr.p <= 2.0) {
            return Err(invalid("problem.p", format!("p = {} must lie in (1, 2]", pr.p)));
        }
        if !(pr.mu >= 0.0) || !pr.mu.is_finite() {
            return Err(invalid("problem.mu", format!("mu = {} must be finite and >= 0", pr.mu)));
        }
        if !(1..=3).contains(&pr.n) {
            return Err(invalid("problem.n", format!("n = {} must be 1, 2 or 3", pr.n)));
        }
        if pr.components == 0 {
            return Err(invalid("problem.N", "the number of components must be at least 1"));
        }
        if pr.m < 3 {
            return Err(invalid("problem.m", format!("m = {} must be at least 3", pr.m)));
        }
        if !(pr.k > 0.0) {
            return Err(invalid("problem.K", format!("K = {} must be positive", pr.k)));
        }
        match (pr.final_time, pr.tau) {
            (Some(t), Some(tau)) => {
                self.parabolic_config_for(t, tau)?;
            }
            (None, None) => {}
            _ => return Err(invalid("problem.T", "T and tau must be given together")),
        };
        if let Err(e) = self.solver.validate() {
            return Err(invalid("solver", e.to_string()));
        }
        if let Err(e) = self.forcing_spec().validate(pr.n, pr.components) {
            return Err(invalid("forcing", e.to_string()));
        }
        if let Err(e) = self.initial.validate(pr.n, pr.components, pr.p) {
            return Err(invalid("initial", e.to_string()));
        }
        let v = &self.verify;
        if !(v.slack_factor >= 1.0) {
            return Err(invalid("verify.slack_factor", "must be at least 1"));
        }
        if !(v.energy_rel_tol >= 0.0) {
            return Err(invalid("verify.energy_rel_tol", "must be nonnegative"));
        }
        if v.mu_values.iter().any(|&mu| !(mu >= 0.0) || !mu.is_finite()) {
            return Err(invalid("verify.mu_values", "every mu must be finite and >= 0"));
        }
        if !(v.uniformity_threshold >= 1.0) {
            return Err(invalid("verify.uniformity_threshold", "must be at least 1"));
        }
        let s = &self.study;
        if s.m_values.iter().any(|&m| m < 3) {
            return Err(invalid("study.m_values", "every m must be at least 3"));
        }
        if s.m_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("study.m_values", "the ladder must be strictly increasing"));
        }
        if !(s.mu0 > 0.0) {
            return Err(invalid("study.mu0", "must be positive"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(invalid("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }

    fn parabolic_config_for(&self, t: f64, tau: f64) -> Result<ParabolicRunConfig, ConfigError> {
        let cfg = ParabolicRunConfig {
            tau,
            final_time: t,
            solver: self.solver.clone(),
            snapshot_stride: self.snapshot_stride,
        };
        cfg.validate().map_err(|e| invalid("problem.T", e.to_string()))?;
        Ok(cfg)
    }

    /// Parabolic settings; `None` for stationary-only configurations.
    pub fn parabolic(&self) -> Option<ParabolicRunConfig> {
        match (self.problem.final_time, self.problem.tau) {
            (Some(t), Some(tau)) => self.parabolic_config_for(t, tau).ok(),
            _ => None,
        }
    }

    /// Forcing with the spike-train horizon defaulted to `T` and the seed
    /// defaulted to the run seed.
    pub fn forcing_spec(&self) -> ForcingSpec {
        let mut spec = self.forcing.clone();
        if spec.seed == 0 {
            spec.seed = self.seed;
        }
        if let (TimeProfile::SpikeTrain { horizon, .. }, Some(t)) = (&mut spec.profile, self.problem.final_time) {
            if *horizon <= 0.0 {
                *horizon = t;
            }
        }
        spec
    }

    /// Sine modes of the initial data (for the heat oracle).
    pub fn initial_modes(&self) -> Option<&[SineMode]> {
        match &self.initial {
            InitialSpec::Modes { modes } => Some(modes),
            _ => None,
        }
    }
}

/// Output directory: explicit flag, then the config, then
/// `$PLAP_OUTPUT_ROOT/<config stem>`, then `plap-out/<config stem>`.
pub fn resolve_output_dir(flag: Option<&Path>, loaded: &LoadedConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_owned();
    }
    if let Some(p) = &loaded.config.output_dir {
        return p.clone();
    }
    let stem = loaded
        .source
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("plap-out"));
    root.join(stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\np = 1.6\nn = 3\nm = 15\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.problem.mu, 0.0);
        assert_eq!(c.problem.components, 1);
        assert_eq!(c.problem.k, 1.0);
        assert_eq!(c.solver, StationarySolveConfig::default());
        assert_eq!(c.verify, VerifyConfig::default());
        assert_eq!(c.initial, InitialSpec::Zero);
        assert!(c.parabolic().is_none());
    }

    #[test]
    fn p_out_of_range_names_interval() {
        let e = parse_config_str("[problem]\np = 2.5\nn = 3\nm = 15\n").unwrap_err();
        assert!(e.to_string().contains("(1, 2]"), "{e}");
    }

    #[test]
    fn beta_at_least_half_dimension_rejected() {
        let text = format!("{MINIMAL}[forcing.shape]\nkind = \"rough-radial\"\nbeta = 1.6\n");
        let e = parse_config_str(&text).unwrap_err();
        assert!(e.to_string().contains("n/2"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config_str(&format!("{MINIMAL}tolerance = 1\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse(_)));
        let e = parse_config_str("[problem]\np = 1.6\nn = 3\nm = 15\nmuu = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("muu"), "{e}");
    }

    #[test]
    fn time_grid_must_be_consistent() {
        let e = parse_config_str("[problem]\np = 1.6\nn = 3\nm = 15\nT = 0.1\ntau = 0.03\n").unwrap_err();
        assert!(e.to_string().contains("multiple"), "{e}");
        assert!(parse_config_str("[problem]\np = 1.6\nn = 3\nm = 15\nT = 0.1\n").is_err());
    }

    #[test]
    fn hash_is_sha256_of_bytes() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
