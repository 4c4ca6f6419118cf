//! Acceptance suite. Each test prints exactly one `PASS`/`FAIL` line.

#![allow(clippy::explicit_write)]

use std::io::Write;
use std::path::Path;
use std::process::Command as Process;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plap_cli::commands::{run_subcommand, Command, RunOptions, Status};
use plap_cli::config::{sha256_hex, LoadedConfig};
use plap_cli::parse_config_str;
use plap_core::exponents::{check_bunov, hat_q, r_of_q};
use plap_core::field::Grid;
use plap_core::nonlinearity::{a_coeff, g_bounds, g_density, structural_constants, NonlinearityParams};
use plap_core::parabolic::{check_energy_inequality, solve_parabolic, ParabolicRun, ParabolicRunConfig};
use plap_core::stationary::StationarySolveConfig;
use plap_core::verify::{
    dnq_mu_sweep, funds3_record, make_forcing, make_initial, verify_theorem12, AuditConfig, EstimateId, ForcingShape,
    ForcingSpec, InitialSpec, LedgerTotals, RecordMeta, SineMode, SweepReport, TimeProfile,
};

fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    writeln!(std::io::stderr(), "criterion {criterion:>2}: {verdict} {detail}").unwrap();
}

fn loaded(text: &str) -> LoadedConfig {
    LoadedConfig { config: parse_config_str(text).unwrap(), hash: sha256_hex(text.as_bytes()), source: None }
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn c01_exponent_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let n = rng.gen_range(3..=6usize);
        let lower = if n == 3 { 1.25 } else { 2.0 * n as f64 / (n as f64 + 2.0) };
        let p = rng.gen_range(lower..=2.0);
        if !check_bunov(p, n).ok {
            continue;
        }
        let q = hat_q(p, n).unwrap();
        worst = worst.max((r_of_q(q, p, n).unwrap() - 2.0).abs());
        count += 1;
    }
    let ok = worst <= 1e-12;
    report(1, ok, &format!("max |r(q_hat) - 2| = {worst:e} over {count} pairs"));
    assert!(ok);
}

#[test]
fn c02_energy_density_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let y = 10.0 * (1.0 - rng.gen::<f64>());
        let p: f64 = rng.gen_range(1.3..=2.0);
        let mu: f64 = rng.gen_range(0.0..=2.0);
        if mu + y < 1e-3 {
            continue;
        }
        let law = NonlinearityParams::new(p, mu).unwrap();
        // Fourth-order central difference.
        let d = 1e-2 * y.min(mu + y);
        let g = |s: f64| g_density(s, &law);
        let fd = (8.0 * (g(y + d) - g(y - d)) - (g(y + 2.0 * d) - g(y - 2.0 * d))) / (12.0 * d);
        let exact = 2.0 * y * a_coeff(y * y, &law).unwrap().finite().unwrap();
        worst = worst.max((fd - exact).abs() / exact.abs());
        count += 1;
    }
    let ok = worst <= 1e-6;
    report(2, ok, &format!("max relative derivative error {worst:e} over {count} samples"));
    assert!(ok);
}

#[test]
fn c03_sandwich_and_minimiser() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bound_violations = 0;
    for _ in 0..10_000 {
        let y: f64 = rng.gen_range(0.0..=10.0);
        let p: f64 = rng.gen_range(1.3..=2.0);
        let mu: f64 = rng.gen_range(0.0..=2.0);
        let law = NonlinearityParams::new(p, mu).unwrap();
        let g = g_density(y, &law);
        let b = g_bounds(y, &law);
        let tol = 1e-12 * g.abs().max(b.lower.abs()).max(b.upper.abs()).max(1e-300);
        if !(b.lower <= g + tol && g <= b.upper + tol && b.upper <= b.upper_split + tol) {
            bound_violations += 1;
        }
    }
    let mut worst_z = 0.0f64;
    let mut worst_v = 0.0f64;
    for _ in 0..20 {
        let p: f64 = rng.gen_range(1.3..=2.0);
        let mu: f64 = rng.gen_range(0.05..=2.0);
        let law = NonlinearityParams::new(p, mu).unwrap();
        let phi = |z: f64| g_density(z - mu, &law) - z.powf(p) / p;
        let (lo, hi) = (0.0, 10.0 * mu);
        let samples = 2_000_000;
        let dz = (hi - lo) / samples as f64;
        let (mut zbest, mut vbest) = (lo, phi(lo));
        for i in 1..=samples {
            let z = lo + i as f64 * dz;
            let v = phi(z);
            if v < vbest {
                zbest = z;
                vbest = v;
            }
        }
        let c1 = structural_constants(&law).big_c1;
        worst_z = worst_z.max((zbest - 2.0 * mu).abs());
        worst_v = worst_v.max((vbest + c1 * mu.powf(p)).abs());
    }
    let ok = bound_violations == 0 && worst_z <= 1e-4 && worst_v <= 1e-8;
    report(
        3,
        ok,
        &format!("{bound_violations} envelope violations; minimiser off by {worst_z:e}, value off by {worst_v:e}"),
    );
    assert!(ok);
}

const HEAT: &str = r#"
[problem]
p = 2.0
n = 3
m = 15
T = 0.0625
tau = 0.00390625

[initial]
kind = "modes"
modes = [{ k = [1, 1, 1], amplitude = [1.0] }]

[solver]
tol = 1e-11

[verify]
dnq = false

[study]
kind = "heat"
m_values = [15, 31]
tau_rule = "h-squared"
min_order = 1.8
"#;

#[test]
fn c04_heat_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_subcommand(Command::ConvergenceStudy, &loaded(HEAT), dir.path(), &RunOptions::default()).unwrap();
    let json = read_json(&dir.path().join("convergence.json"));
    let rungs = json["rungs"].as_array().unwrap();
    let order = rungs[1]["order"].as_f64().unwrap();
    let decreasing = rungs[1]["error"].as_f64().unwrap() < rungs[0]["error"].as_f64().unwrap();
    let discrete = rungs.iter().map(|r| r["discrete_max_error"].as_f64().unwrap()).fold(0.0, f64::max);
    let ok = outcome.status == Status::Pass && decreasing && order >= 1.8 && discrete <= 1e-10;
    report(4, ok, &format!("observed order {order:.4}, max stepper/recursion gap {discrete:e}"));
    assert!(ok);
}

struct MatrixRun {
    label: String,
    law: NonlinearityParams<f64>,
    /// Zero forcing, `μ = 0`, smooth data.
    dissipation_case: bool,
    /// Part of the energy-inequality set.
    inequality_case: bool,
    run: ParabolicRun<f64>,
}

const T_FINAL: f64 = 0.02;
const STEPS: usize = 64;

fn run_case(grid: Grid, p: f64, forcing: &ForcingSpec, initial: &InitialSpec) -> ParabolicRun<f64> {
    let law = NonlinearityParams::new(p, 0.0).unwrap();
    let src = make_forcing(grid, 1, forcing, &law).unwrap();
    let u0 = make_initial(grid, 1, initial, p).unwrap();
    let mut cfg = ParabolicRunConfig::new(T_FINAL / STEPS as f64, STEPS);
    cfg.snapshot_stride = Some(1);
    solve_parabolic(&u0, &src, &law, &cfg).map_err(|e| e.error).unwrap()
}

/// Standard run matrix, solved once and shared.
fn matrix() -> &'static [MatrixRun] {
    static RUNS: OnceLock<Vec<MatrixRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let grid = Grid::new(3, 15).unwrap();
        let sine = InitialSpec::Modes { modes: vec![SineMode::new(vec![1, 1, 1], vec![1.0])] };
        let zero = ForcingSpec::constant(ForcingShape::Zero);
        let rough = ForcingSpec::rough(1.4, 10.0);
        let mut runs = Vec::new();
        for p in [1.4, 1.6, 1.8] {
            runs.push((format!("sine p={p}"), p, zero.clone(), sine.clone(), true, true));
        }
        for p in [1.4, 1.6] {
            runs.push((format!("rough p={p}"), p, rough.clone(), InitialSpec::Zero, false, true));
        }
        runs.push(("rough p=1.8".into(), 1.8, rough.clone(), InitialSpec::Zero, false, false));
        let cusp = InitialSpec::Cusp { gamma: 0.5, amplitude: 1.0, x0: None, direction: None };
        runs.push(("cusp p=1.6".into(), 1.6, zero.clone(), cusp, false, false));
        let mut spikes = ForcingSpec::rough(1.4, 1.0);
        spikes.profile = TimeProfile::SpikeTrain { count: 3, width: 0.002, amplitude: 1.0, horizon: T_FINAL };
        spikes.seed = 5;
        runs.push(("rough spikes p=1.6".into(), 1.6, spikes, InitialSpec::Zero, false, false));
        runs.into_iter()
            .map(|(label, p, forcing, initial, dissipation_case, inequality_case)| MatrixRun {
                label,
                law: NonlinearityParams::new(p, 0.0).unwrap(),
                dissipation_case,
                inequality_case,
                run: run_case(grid, p, &forcing, &initial),
            })
            .collect()
    })
}

#[test]
fn c05_energy_dissipation() {
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for r in matrix().iter().filter(|r| r.dissipation_case) {
        let ledger = &r.run.ledger;
        for i in 0..ledger.len() {
            let (before, after) = (ledger.energy_before(i), ledger.rows[i].energy);
            worst = worst.max((after - before) / before.abs());
        }
        cases += 1;
    }
    let ok = cases == 3 && worst <= 1e-8;
    report(5, ok, &format!("largest relative energy increase {worst:e} over {cases} runs"));
    assert!(ok);
}

#[test]
fn c06_discrete_energy_inequality() {
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    for r in matrix().iter().filter(|r| r.inequality_case) {
        let check = check_energy_inequality(&r.run.ledger);
        worst = worst.min(check.worst_step().unwrap().relative);
        cases += 1;
    }
    let ok = cases == 5 && worst >= -1e-6;
    report(6, ok, &format!("smallest relative step margin {worst:e} over {cases} runs"));
    assert!(ok);
}

#[test]
fn c07_explicit_estimates() {
    let audit = AuditConfig { slack_factor: 1.05, ..AuditConfig::default() };
    let grid = Grid::new(3, 15).unwrap();
    let mut records = Vec::new();
    for r in matrix() {
        let meta = RecordMeta {
            p: r.law.p,
            mu: 0.0,
            n: 3,
            m: 15,
            h: grid.h(),
            tau: Some(r.run.ledger.tau),
            seed: None,
            label: Some(r.label.clone()),
        };
        records.extend(verify_theorem12(&r.run.trajectory, &r.run.ledger, &r.law, &meta, &audit).unwrap());
    }
    let checked: Vec<_> = records
        .iter()
        .filter(|r| matches!(r.id, EstimateId::Primas2 | EstimateId::Segas2 | EstimateId::Tercas2) && r.pass.is_some())
        .filter(|r| r.form.is_none())
        .collect();
    let failed: Vec<String> = checked
        .iter()
        .filter(|r| r.failed())
        .map(|r| format!("{} on {}", r.id, r.meta.label.as_deref().unwrap_or("?")))
        .collect();
    let min_margin = checked.iter().filter_map(|r| r.relative_margin()).fold(f64::INFINITY, f64::min);
    let ok = matrix().len() >= 8 && checked.len() == 3 * matrix().len() && failed.is_empty();
    report(
        7,
        ok,
        &format!(
            "{} checks on {} runs, smallest relative margin {min_margin:e}, failures: [{}]",
            checked.len(),
            matrix().len(),
            failed.join("; ")
        ),
    );
    assert!(ok);
}

const MUS: [f64; 5] = [0.0, 1e-3, 1e-2, 1e-1, 1.0];

#[test]
fn c08_uniformity_in_mu() {
    let p = 1.6;
    let forcing = ForcingSpec::rough(1.4, 50.0);
    let grid = Grid::new(3, 15).unwrap();
    let meta = RecordMeta { p, mu: 0.0, n: 3, m: 15, h: grid.h(), tau: None, seed: None, label: Some("rough".into()) };
    let law0 = NonlinearityParams::new(p, 0.0).unwrap();
    let f = make_forcing(grid, 1, &forcing, &law0).unwrap().shape().clone();
    let stationary = dnq_mu_sweep(&f, p, &MUS, &StationarySolveConfig::default(), &meta, 10.0).unwrap();
    let dnq_ratio = stationary.uniformity[0].ratio;

    let mut parabolic = Vec::new();
    for mu in MUS {
        let law = NonlinearityParams::new(p, mu).unwrap();
        let src = make_forcing(grid, 1, &forcing, &law).unwrap();
        let u0 = make_initial(grid, 1, &InitialSpec::Zero, p).unwrap();
        let cfg = ParabolicRunConfig::new(T_FINAL / STEPS as f64, STEPS);
        let run = solve_parabolic(&u0, &src, &law, &cfg).map_err(|e| e.error).unwrap();
        let m = RecordMeta { mu, tau: Some(cfg.tau), ..meta.clone() };
        let totals = LedgerTotals::from_ledger(&run.ledger);
        parabolic.push(funds3_record(&run.trajectory, &totals, p, &m).unwrap());
    }
    let mut sweep = SweepReport::new(parabolic);
    let funds3_ratio = sweep.add_uniformity(EstimateId::Funds3, None, 10.0).unwrap().ratio;
    let ok = stationary.pass && sweep.pass && dnq_ratio <= 10.0 && funds3_ratio <= 10.0;
    report(8, ok, &format!("max/min implied constant: stationary {dnq_ratio:.4}, parabolic {funds3_ratio:.4}"));
    assert!(ok);
}

const MANUFACTURED: &str = r#"
[problem]
p = 1.6
n = 3
m = 15

[forcing.shape]
kind = "manufactured"
solution = { kind = "sine-product", k = [1.0, 1.0, 1.0], amplitude = [1.0] }

[verify]
dnq = false

[study]
kind = "manufactured"
m_values = [15, 31]
"#;

#[test]
fn c09_manufactured_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let outcome =
        run_subcommand(Command::ConvergenceStudy, &loaded(MANUFACTURED), dir.path(), &RunOptions::default()).unwrap();
    let json = read_json(&dir.path().join("convergence.json"));
    let rungs = json["rungs"].as_array().unwrap();
    let (coarse, fine) = (rungs[0]["error"].as_f64().unwrap(), rungs[1]["error"].as_f64().unwrap());
    let ok = outcome.status == Status::Pass && fine <= 0.05 && fine < coarse;
    report(9, ok, &format!("relative W1p error {coarse:e} at m=15, {fine:e} at m=31"));
    assert!(ok);
}

const MU_LIMIT: &str = r#"
[problem]
p = 1.6
n = 3
m = 15

[forcing.shape]
kind = "rough-radial"
beta = 1.4
amplitude = 50.0

[study]
mu0 = 1.0
levels = 6
min_cauchy_levels = 4
"#;

#[test]
fn c10_mu_limit_cauchy() {
    let dir = tempfile::tempdir().unwrap();
    run_subcommand(Command::MuSweep, &loaded(MU_LIMIT), dir.path(), &RunOptions::default()).unwrap();
    let json = read_json(&dir.path().join("mu_sweep.json"));
    let levels = json["decreasing_levels"].as_u64().unwrap();
    let ok = levels >= 4;
    report(10, ok, &format!("{levels} strictly decreasing successive differences"));
    assert!(ok);
}

const DETERMINISM: &str = r#"
seed = 9

[problem]
p = 1.6
n = 3
m = 7
T = 0.01
tau = 0.00125

[forcing]
seed = 4
shape = { kind = "rough-radial", beta = 1.4, amplitude = 5.0 }
profile = { kind = "spike-train", count = 2, width = 0.002, amplitude = 1.0, horizon = 0.01 }

[initial]
kind = "cusp"
gamma = 0.5

[verify]
mu_values = [0.0, 0.1]
holder = true

[study]
levels = 3
min_cauchy_levels = 1
"#;

fn collect_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn c11_determinism() {
    let work = tempfile::tempdir().unwrap();
    let config = work.path().join("det.toml");
    std::fs::write(&config, DETERMINISM).unwrap();
    let subcommands = ["solve-stationary", "solve-parabolic", "verify-estimates", "mu-sweep"];
    let mut trees = Vec::new();
    for rep in 0..2 {
        let root = work.path().join(format!("rep{rep}"));
        for sub in subcommands {
            let status = Process::new(env!("CARGO_BIN_EXE_plap"))
                .args([sub, "--config"])
                .arg(&config)
                .arg("--output")
                .arg(root.join(sub))
                .output()
                .unwrap()
                .status;
            assert!(matches!(status.code(), Some(0 | 2)), "{sub} exited with {status}");
        }
        trees.push(collect_files(&root));
    }
    let names: Vec<&str> = trees[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = trees[0] == trees[1];
    let has_tabular = names.iter().any(|n| n.ends_with(".csv")) && names.iter().any(|n| n.ends_with(".json"));
    let ok = identical && has_tabular;
    report(11, ok, &format!("{} output files compared byte for byte", names.len()));
    assert!(ok);
}
