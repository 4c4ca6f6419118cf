//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use plap_core::exponents::{exponent_report, hat_q};
use plap_core::field::{lebesgue_norm, read_snapshot, sobolev_norms, Grid, Trajectory, VectorField};
use plap_core::nonlinearity::NonlinearityParams;
use plap_core::parabolic::{
    check_energy_inequality, solve_parabolic, EnergyLedger, ParabolicRun, ParabolicRunConfig, Source,
};
use plap_core::stationary::{solve_stationary, verify_dnq};
use plap_core::verify::{
    dnq_mu_sweep, heat_reference, holder_report, make_forcing, make_initial, mu_limit_study, verify_theorem12,
    EstimateId, EstimateRecord, ForcingShape, ForcingSource, HeatVariant, HolderReport, RecordMeta, SweepReport,
};

use crate::config::{LoadedConfig, RunConfig, StudyKind, TauRule};
use crate::output::Artifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckExponents,
    SolveStationary,
    SolveParabolic,
    VerifyEstimates,
    ConvergenceStudy,
    MuSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::CheckExponents => "check-exponents",
            Self::SolveStationary => "solve-stationary",
            Self::SolveParabolic => "solve-parabolic",
            Self::VerifyEstimates => "verify-estimates",
            Self::ConvergenceStudy => "convergence-study",
            Self::MuSweep => "mu-sweep",
        }
    }
}

/// Exit-code contract of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    EstimateFailure,
    NonConvergence,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::EstimateFailure => 2,
            Self::NonConvergence => 3,
        }
    }

    fn worst(self, other: Self) -> Self {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Core(#[from] plap_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 4,
            Self::Core(e) => core_exit_code(e),
            Self::Io(_) => 1,
        }
    }
}

fn core_exit_code(e: &plap_core::Error) -> i32 {
    use plap_core::Error as E;
    match e {
        E::NonConvergence { .. } => 3,
        E::Step { source, .. } => core_exit_code(source),
        E::Domain(_) | E::Invalid(_) | E::Shape(_) | E::Empty(_) => 4,
        E::Io(_) | E::Snapshot(_) => 1,
    }
}

#[derive(Debug, Default, Clone)]
pub struct RunOptions {
    /// Completed `solve-parabolic` output to audit instead of solving.
    pub run_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub artifacts: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

pub fn run_subcommand(
    command: Command,
    loaded: &LoadedConfig,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<Outcome, CliError> {
    let mut art = Artifacts::new(out_dir, &loaded.hash)?;
    let cfg = &loaded.config;
    let (status, summary) = match command {
        Command::CheckExponents => check_exponents(cfg.problem.p, cfg.problem.n, cfg.problem.k, &mut art)?,
        Command::SolveStationary => solve_stationary_cmd(cfg, &mut art)?,
        Command::SolveParabolic => solve_parabolic_cmd(cfg, &mut art)?,
        Command::VerifyEstimates => verify_estimates(cfg, options, &mut art)?,
        Command::ConvergenceStudy => convergence_study(cfg, &mut art)?,
        Command::MuSweep => mu_sweep(cfg, &mut art)?,
    };
    Ok(Outcome { status, artifacts: art.into_written(), summary })
}

fn law(cfg: &RunConfig, mu: f64) -> Result<NonlinearityParams<f64>, CliError> {
    Ok(NonlinearityParams::new(cfg.problem.p, mu)?)
}

fn meta(cfg: &RunConfig, grid: Grid, mu: f64, tau: Option<f64>, label: &str) -> RecordMeta {
    RecordMeta {
        p: cfg.problem.p,
        mu,
        n: grid.n(),
        m: grid.m(),
        h: grid.h(),
        tau,
        seed: Some(cfg.seed),
        label: Some(label.to_owned()),
    }
}

fn forcing_label(cfg: &RunConfig) -> String {
    let shape = match &cfg.forcing.shape {
        ForcingShape::Zero => "zero",
        ForcingShape::SmoothMode { .. } => "smooth-mode",
        ForcingShape::RoughRadial { .. } => "rough-radial",
        ForcingShape::Manufactured { .. } => "manufactured",
    };
    format!("{shape}/{}", cfg.initial.label())
}

fn source(cfg: &RunConfig, grid: Grid, mu: f64) -> Result<ForcingSource<f64>, CliError> {
    Ok(make_forcing(grid, cfg.problem.components, &cfg.forcing_spec(), &law(cfg, mu)?)?)
}

#[derive(Serialize)]
struct ExponentsOut {
    #[serde(flatten)]
    report: plap_core::exponents::ExponentReport,
    identity_error: f64,
}

/// `check-exponents` from bare arguments; unlike a run configuration this
/// accepts any dimension `n >= 3`.
pub fn check_exponents_args(p: f64, n: usize, k: f64, out_dir: &Path) -> Result<Outcome, CliError> {
    let canonical = format!("p={p:?} n={n} K={k:?}");
    let mut art = Artifacts::new(out_dir, &crate::config::sha256_hex(canonical.as_bytes()))?;
    let (status, summary) = check_exponents(p, n, k, &mut art)?;
    Ok(Outcome { status, artifacts: art.into_written(), summary })
}

fn check_exponents(p: f64, n: usize, k: f64, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let report = exponent_report(p, n, k)?;
    let identity_error = (report.r_of_q_hat - 2.0).abs();
    let status = if identity_error <= 1e-12 { Status::Pass } else { Status::EstimateFailure };
    let summary = format!("q_hat = {}, r(q_hat) = {}", report.q_hat, report.r_of_q_hat);
    art.json("exponents.json", &ExponentsOut { report, identity_error })?;
    Ok((status, summary))
}

#[derive(Serialize)]
struct StationaryOut {
    p: f64,
    mu: f64,
    converged: bool,
    residual: f64,
    iterations: usize,
    inner_iterations: Option<usize>,
    energy: Option<f64>,
    functional: Option<f64>,
    dnq: Option<EstimateRecord>,
    /// Relative `W^{1,p}` distance to the manufactured solution.
    manufactured_error: Option<f64>,
    error: Option<String>,
}

fn manufactured_error(cfg: &RunConfig, grid: Grid, u: &VectorField<f64>) -> Result<Option<f64>, CliError> {
    let ForcingShape::Manufactured { solution } = &cfg.forcing.shape else {
        return Ok(None);
    };
    let exact = solution.sample(grid)?;
    let p = cfg.problem.p;
    let err = sobolev_norms(&u.difference(&exact)?, p).w1;
    let scale = sobolev_norms(&exact, p).w1;
    Ok(Some(if scale > 0.0 { err / scale } else { err }))
}

fn solve_stationary_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let grid = cfg.grid();
    let mu = cfg.problem.mu;
    let law = law(cfg, mu)?;
    let f = source(cfg, grid, mu)?.sample(0.0)?;
    match solve_stationary(&f, &law, &cfg.solver) {
        Ok(sol) => {
            let dnq = if cfg.verify.dnq {
                hat_q(cfg.problem.p, grid.n())
                    .ok()
                    .map(|q| verify_dnq(&sol.u, &f, cfg.problem.p, q, meta(cfg, grid, mu, None, &forcing_label(cfg))))
            } else {
                None
            };
            let out = StationaryOut {
                p: cfg.problem.p,
                mu,
                converged: true,
                residual: sol.residual,
                iterations: sol.iterations,
                inner_iterations: Some(sol.inner_iterations),
                energy: Some(sol.energy),
                functional: Some(sol.functional),
                manufactured_error: manufactured_error(cfg, grid, &sol.u)?,
                dnq,
                error: None,
            };
            art.field("solution.field", &sol.u, 0.0, 0)?;
            art.json("stationary.json", &out)?;
            let status =
                if out.dnq.as_ref().is_some_and(|r| r.failed()) { Status::EstimateFailure } else { Status::Pass };
            Ok((status, format!("residual {:e} after {} iterations", sol.residual, sol.iterations)))
        }
        Err(plap_core::Error::NonConvergence { iterations, residual, best, .. }) => {
            let u = VectorField::from_values(grid, cfg.problem.components, best)?;
            art.field("solution.field", &u, 0.0, 0)?;
            let out = StationaryOut {
                p: cfg.problem.p,
                mu,
                converged: false,
                residual,
                iterations,
                inner_iterations: None,
                energy: None,
                functional: None,
                dnq: None,
                manufactured_error: None,
                error: Some("outer iteration budget exhausted".into()),
            };
            art.json("stationary.json", &out)?;
            Ok((Status::NonConvergence, format!("no convergence: best residual {residual:e}")))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct HeatCheck {
    /// `‖u^M − u(T)‖₂` against the continuum solution.
    continuum_l2_error: f64,
    /// `max_k ‖u^k − u_h^k‖_∞` against the discrete recursion.
    discrete_max_error: f64,
}

#[derive(Serialize)]
struct ParabolicSummary {
    p: f64,
    mu: f64,
    tau: f64,
    steps: usize,
    completed_steps: usize,
    initial_energy: f64,
    final_energy: Option<f64>,
    worst_step_relative_margin: Option<f64>,
    worst_cumulative_relative_margin: Option<f64>,
    energy_violations: usize,
    max_el_residual: f64,
    heat: Option<HeatCheck>,
    error: Option<String>,
}

fn is_heat_benchmark(cfg: &RunConfig) -> bool {
    cfg.problem.p == 2.0 && matches!(cfg.forcing.shape, ForcingShape::Zero) && cfg.initial_modes().is_some()
}

fn heat_check(cfg: &RunConfig, run: &ParabolicRun<f64>, pc: &ParabolicRunConfig) -> Result<HeatCheck, CliError> {
    let grid = cfg.grid();
    let modes = cfg.initial_modes().expect("heat benchmark has modes");
    let steps = pc.steps();
    let nc = cfg.problem.components;
    let cont = heat_reference(modes, pc.tau, steps, grid, nc, HeatVariant::Continuum)?;
    let disc = heat_reference(modes, pc.tau, steps, grid, nc, HeatVariant::DiscreteEuler)?;
    let continuum_l2_error = lebesgue_norm(&run.trajectory.last().difference(cont.last())?, 2.0);
    let mut discrete_max_error = 0.0f64;
    for (&k, u) in run.trajectory.steps().iter().zip(run.trajectory.snapshots()) {
        let e: f64 = lebesgue_norm(&u.difference(&disc.snapshots()[k])?, f64::INFINITY);
        discrete_max_error = discrete_max_error.max(e);
    }
    Ok(HeatCheck { continuum_l2_error, discrete_max_error })
}

fn write_run(
    art: &mut Artifacts,
    run: &ParabolicRun<f64>,
    cfg: &RunConfig,
    pc: &ParabolicRunConfig,
    error: Option<String>,
) -> Result<ParabolicSummary, CliError> {
    for (&k, u) in run.trajectory.steps().iter().zip(run.trajectory.snapshots()) {
        art.field(&format!("snapshots/step_{k:06}.field"), u, pc.tau, k)?;
    }
    art.csv("ledger.csv", &run.ledger.to_csv())?;
    art.json("ledger.json", &run.ledger)?;
    let check = check_energy_inequality(&run.ledger);
    let tol = cfg.verify.energy_rel_tol;
    let violations = check.steps.iter().chain(&check.cumulative).filter(|m| !m.holds(tol)).count();
    let heat = if is_heat_benchmark(cfg) && error.is_none() { Some(heat_check(cfg, run, pc)?) } else { None };
    let summary = ParabolicSummary {
        p: cfg.problem.p,
        mu: cfg.problem.mu,
        tau: pc.tau,
        steps: pc.steps(),
        completed_steps: run.ledger.len(),
        initial_energy: run.ledger.initial_energy,
        final_energy: run.ledger.rows.last().map(|r| r.energy),
        worst_step_relative_margin: check.worst_step().map(|m| m.relative),
        worst_cumulative_relative_margin: check.worst_cumulative().map(|m| m.relative),
        energy_violations: violations,
        max_el_residual: run.ledger.rows.iter().map(|r| r.el_residual).fold(0.0, f64::max),
        heat,
        error,
    };
    art.json("summary.json", &summary)?;
    Ok(summary)
}

fn parabolic_config(cfg: &RunConfig) -> Result<ParabolicRunConfig, CliError> {
    cfg.parabolic().ok_or_else(|| {
        crate::config::ConfigError::Invalid { field: "problem.T", message: "this subcommand needs T and tau".into() }
            .into()
    })
}

/// Runs the configured parabolic problem at viscosity `mu`.
fn run_parabolic(cfg: &RunConfig, mu: f64) -> Result<(ParabolicRun<f64>, Option<plap_core::Error>), CliError> {
    let pc = parabolic_config(cfg)?;
    let grid = cfg.grid();
    let u0 = make_initial(grid, cfg.problem.components, &cfg.initial, cfg.problem.p)?;
    let src = source(cfg, grid, mu)?;
    let law = law(cfg, mu)?;
    match solve_parabolic(&u0, &src, &law, &pc) {
        Ok(run) => Ok((run, None)),
        Err(partial) => match partial.run {
            Some(run) => Ok((run, Some(partial.error))),
            None => Err(partial.error.into()),
        },
    }
}

fn solve_parabolic_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let pc = parabolic_config(cfg)?;
    let (run, err) = run_parabolic(cfg, cfg.problem.mu)?;
    let summary = write_run(art, &run, cfg, &pc, err.as_ref().map(|e| e.to_string()))?;
    if let Some(e) = err {
        let status = if core_exit_code(&e) == 3 { Status::NonConvergence } else { return Err(e.into()) };
        return Ok((status, format!("stopped after {} of {} steps: {e}", summary.completed_steps, summary.steps)));
    }
    let mut status = if summary.energy_violations > 0 { Status::EstimateFailure } else { Status::Pass };
    if let Some(h) = &summary.heat {
        if h.discrete_max_error > 1e-10 {
            status = Status::EstimateFailure;
        }
    }
    Ok((
        status,
        format!(
            "{} steps, worst relative energy margin {:e}",
            summary.steps,
            summary.worst_step_relative_margin.unwrap_or(0.0)
        ),
    ))
}

/// Reads `ledger.json` and every snapshot of a `solve-parabolic` output.
pub fn load_run(dir: &Path) -> Result<(Trajectory<f64>, EnergyLedger), CliError> {
    let text = std::fs::read_to_string(dir.join("ledger.json"))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(std::io::Error::other)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("config_hash");
        obj.remove("tool_version");
    }
    let ledger: EnergyLedger = serde_json::from_value(value).map_err(std::io::Error::other)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir.join("snapshots"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "field"))
        .collect();
    paths.sort();
    let mut traj: Option<Trajectory<f64>> = None;
    for path in paths {
        let reader = std::io::BufReader::new(std::fs::File::open(&path)?);
        let (header, u) = read_snapshot(reader)?;
        match traj.as_mut() {
            None => {
                if header.step != 0 {
                    return Err(plap_core::Error::Empty("run directory lacks the initial snapshot".into()).into());
                }
                traj = Some(Trajectory::new(header.tau, u)?);
            }
            Some(t) => t.push(header.step, u)?,
        }
    }
    let traj = traj.ok_or_else(|| plap_core::Error::Empty("run directory has no snapshots".into()))?;
    Ok((traj, ledger))
}

#[derive(Serialize)]
struct VerifyOut {
    report: SweepReport,
    holder: Option<HolderReport>,
    notes: Vec<String>,
}

fn verify_estimates(cfg: &RunConfig, options: &RunOptions, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let grid = cfg.grid();
    let mu = cfg.problem.mu;
    let law = law(cfg, mu)?;
    let label = forcing_label(cfg);
    let mut records = Vec::new();
    let mut notes = Vec::new();
    let mut holder = None;
    let mut status = Status::Pass;

    let run = match &options.run_dir {
        Some(dir) => Some(load_run(dir)?),
        None if cfg.parabolic().is_some() => {
            let (run, err) = run_parabolic(cfg, mu)?;
            if let Some(e) = err {
                notes.push(format!("parabolic run stopped early: {e}"));
                status = Status::NonConvergence;
            }
            Some((run.trajectory, run.ledger))
        }
        None => None,
    };
    if let Some((traj, ledger)) = &run {
        let m = meta(cfg, grid, mu, Some(ledger.tau), &label);
        records.extend(verify_theorem12(traj, ledger, &law, &m, &cfg.verify.audit())?);
        if cfg.verify.holder {
            match holder_report(traj, cfg.problem.p) {
                Ok(h) => holder = Some(h),
                Err(e) => notes.push(format!("Hölder report skipped: {e}")),
            }
        }
    }
    if cfg.verify.dnq && options.run_dir.is_none() {
        if let Ok(q) = hat_q(cfg.problem.p, grid.n()) {
            let f = source(cfg, grid, mu)?.sample(0.0)?;
            match solve_stationary(&f, &law, &cfg.solver) {
                Ok(sol) => records.push(verify_dnq(&sol.u, &f, cfg.problem.p, q, meta(cfg, grid, mu, None, &label))),
                Err(e) => {
                    notes.push(format!("stationary solve failed: {e}"));
                    status = status.worst(Status::NonConvergence);
                }
            }
        } else {
            notes.push("dnq skipped: no core exponent for this dimension".into());
        }
    }
    let mut report = SweepReport::new(records);
    if cfg.verify.parabolic_sweep && run.is_some() && options.run_dir.is_none() {
        let mut extra = Vec::new();
        for &mu_j in &cfg.verify.mu_values {
            let (r, err) = run_parabolic(cfg, mu_j)?;
            if let Some(e) = err {
                notes.push(format!("mu = {mu_j}: parabolic run stopped early: {e}"));
                status = status.worst(Status::NonConvergence);
                continue;
            }
            let m = meta(cfg, grid, mu_j, Some(r.ledger.tau), &format!("{label}/mu-sweep"));
            let totals = plap_core::verify::LedgerTotals::from_ledger(&r.ledger);
            if let Some(rec) = plap_core::verify::funds3_record(&r.trajectory, &totals, cfg.problem.p, &m) {
                extra.push(rec.with_form("mu-sweep"));
            }
        }
        report.extend(extra);
        report.add_uniformity(EstimateId::Funds3, Some("mu-sweep"), cfg.verify.uniformity_threshold);
    }
    if !report.pass {
        status = status.worst(Status::EstimateFailure);
    }
    let failures = report.failures().count();
    let summary = format!("{} records, {failures} failures", report.records.len());
    art.csv("records.csv", &report.to_csv())?;
    art.json("report.json", &VerifyOut { report, holder, notes })?;
    Ok((status, summary))
}

#[derive(Serialize)]
struct Rung {
    m: usize,
    h: f64,
    tau: Option<f64>,
    steps: Option<usize>,
    error: f64,
    order: Option<f64>,
    /// Heat ladder: distance to the discrete-eigenvalue recursion.
    discrete_max_error: Option<f64>,
}

#[derive(Serialize)]
struct ConvergenceOut {
    kind: StudyKind,
    rungs: Vec<Rung>,
    min_order: f64,
    pass: bool,
    failure: Option<String>,
}

fn ladder_rung(cfg: &RunConfig, m: usize) -> Result<Rung, CliError> {
    let study = &cfg.study;
    let mut c = cfg.clone();
    c.problem.m = m;
    let grid = c.grid();
    let h: f64 = grid.h();
    Ok(match study.kind {
        StudyKind::Heat => {
            if !is_heat_benchmark(&c) {
                return Err(crate::config::ConfigError::Invalid {
                    field: "study.kind",
                    message: "the heat ladder needs p = 2, zero forcing and sine-mode initial data".into(),
                }
                .into());
            }
            let t = parabolic_config(&c)?.final_time;
            let tau = match study.tau_rule {
                TauRule::HSquared => h * h,
                TauRule::Fixed => parabolic_config(&c)?.tau,
            };
            let steps = ((t / tau).round() as usize).max(1);
            let tau = t / steps as f64;
            c.problem.tau = Some(tau);
            let pc = ParabolicRunConfig { tau, final_time: t, solver: c.solver.clone(), snapshot_stride: Some(1) };
            c.snapshot_stride = Some(1);
            let (run, err) = run_parabolic(&c, c.problem.mu)?;
            if let Some(e) = err {
                return Err(e.into());
            }
            let hc = heat_check(&c, &run, &pc)?;
            Rung {
                m,
                h,
                tau: Some(tau),
                steps: Some(steps),
                error: hc.continuum_l2_error,
                order: None,
                discrete_max_error: Some(hc.discrete_max_error),
            }
        }
        StudyKind::Manufactured => {
            let f = source(&c, grid, c.problem.mu)?.sample(0.0)?;
            let sol = solve_stationary(&f, &law(&c, c.problem.mu)?, &c.solver)?;
            let error = manufactured_error(&c, grid, &sol.u)?.ok_or_else(|| crate::config::ConfigError::Invalid {
                field: "study.kind",
                message: "the manufactured ladder needs a manufactured forcing".into(),
            })?;
            Rung { m, h, tau: None, steps: None, error, order: None, discrete_max_error: None }
        }
    })
}

fn convergence_study(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let study = &cfg.study;
    let mut rungs: Vec<Rung> = Vec::new();
    let mut status = Status::Pass;
    let mut failure = None;
    for &m in &study.m_values {
        match ladder_rung(cfg, m) {
            Ok(rung) => rungs.push(rung),
            Err(e) if e.exit_code() == 3 => {
                failure = Some(format!("m = {m}: {e}"));
                status = Status::NonConvergence;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    for i in 1..rungs.len() {
        let (a, b) = (&rungs[i - 1], &rungs[i]);
        let order = (a.error / b.error).ln() / (a.h / b.h).ln();
        rungs[i].order = Some(order);
    }
    let last_order = rungs.last().and_then(|r| r.order);
    let pass = match study.kind {
        StudyKind::Heat => {
            last_order.is_none_or(|o| o >= study.min_order)
                && rungs.iter().all(|r| r.discrete_max_error.is_none_or(|e| e <= 1e-10))
        }
        StudyKind::Manufactured => rungs.windows(2).all(|w| w[1].error < w[0].error),
    } && failure.is_none();
    if !pass {
        status = status.worst(Status::EstimateFailure);
    }
    let mut csv = String::from("m,h,tau,steps,error,order,discrete_max_error\n");
    let opt = |v: Option<f64>| v.map(plap_core::verify::fmt_f64).unwrap_or_default();
    for r in &rungs {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.m,
            plap_core::verify::fmt_f64(r.h),
            opt(r.tau),
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            plap_core::verify::fmt_f64(r.error),
            opt(r.order),
            opt(r.discrete_max_error)
        ));
    }
    art.csv("convergence.csv", &csv)?;
    let summary =
        format!("last observed order {}", last_order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "n/a".into()));
    art.json(
        "convergence.json",
        &ConvergenceOut { kind: study.kind, rungs, min_order: study.min_order, pass, failure },
    )?;
    Ok((status, summary))
}

#[derive(Serialize)]
struct MuSweepOut {
    report: SweepReport,
    mu_limit: plap_core::verify::MuLimitTable,
    decreasing_levels: usize,
    min_cauchy_levels: usize,
    pass: bool,
}

fn mu_sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Status, String), CliError> {
    let grid = cfg.grid();
    let label = forcing_label(cfg);
    let f = source(cfg, grid, cfg.problem.mu)?.sample(0.0)?;
    let mut report = dnq_mu_sweep(
        &f,
        cfg.problem.p,
        &cfg.verify.mu_values,
        &cfg.solver,
        &meta(cfg, grid, cfg.problem.mu, None, &label),
        cfg.verify.uniformity_threshold,
    )?;
    let table = mu_limit_study(&f, cfg.problem.p, cfg.study.mu0, cfg.study.levels, &cfg.solver)?;
    if cfg.verify.parabolic_sweep && cfg.parabolic().is_some() {
        let mut extra = Vec::new();
        for &mu in &cfg.verify.mu_values {
            let (r, err) = run_parabolic(cfg, mu)?;
            if let Some(e) = err {
                return Err(e.into());
            }
            let m = meta(cfg, grid, mu, Some(r.ledger.tau), &label);
            let totals = plap_core::verify::LedgerTotals::from_ledger(&r.ledger);
            if let Some(rec) = plap_core::verify::funds3_record(&r.trajectory, &totals, cfg.problem.p, &m) {
                extra.push(rec.with_form("mu-sweep"));
            }
        }
        report.extend(extra);
        report.add_uniformity(EstimateId::Funds3, Some("mu-sweep"), cfg.verify.uniformity_threshold);
    }
    let decreasing = table.decreasing_levels();
    let solved = table.rows.iter().all(|r| r.error.is_none());
    let pass = report.pass && decreasing >= cfg.study.min_cauchy_levels && solved;
    let status = if !solved {
        Status::NonConvergence
    } else if pass {
        Status::Pass
    } else {
        Status::EstimateFailure
    };
    let ratios: Vec<String> = report.uniformity.iter().map(|u| format!("{} {:.3}", u.id, u.ratio)).collect();
    let summary = format!("uniformity [{}], {decreasing} decreasing Cauchy levels", ratios.join(", "));
    art.csv("records.csv", &report.to_csv())?;
    art.csv("mu_limit.csv", &table.to_csv())?;
    art.json(
        "mu_sweep.json",
        &MuSweepOut {
            report,
            mu_limit: table,
            decreasing_levels: decreasing,
            min_cauchy_levels: cfg.study.min_cauchy_levels,
            pass,
        },
    )?;
    Ok((status, summary))
}
