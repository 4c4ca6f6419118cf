//! Stationary sweeps over `μ`.

use serde::{Deserialize, Serialize};

use super::records::{EstimateId, RecordMeta, SweepReport};
use crate::error::Result;
use crate::exponents::hat_q;
use crate::field::{sobolev_norms, VectorField};
use crate::nonlinearity::NonlinearityParams;
use crate::stationary::{solve_stationary, solve_stationary_from, verify_dnq, StationarySolveConfig};

/// The `μ` values of the uniformity sweep.
pub const STANDARD_MU_SWEEP: [f64; 5] = [0.0, 1e-3, 1e-2, 1e-1, 1.0];

/// Implied `dnq` constants over `mus` for a fixed forcing, with the max/min
/// spread checked against `threshold`.
pub fn dnq_mu_sweep(
    f: &VectorField<f64>,
    p: f64,
    mus: &[f64],
    config: &StationarySolveConfig,
    meta: &RecordMeta,
    threshold: f64,
) -> Result<SweepReport> {
    let q = hat_q(p, f.grid().n())?;
    let mut records = Vec::with_capacity(mus.len());
    for &mu in mus {
        let law = NonlinearityParams::new(p, mu)?;
        let sol = solve_stationary(f, &law, config)?;
        let meta = RecordMeta { p, mu, ..meta.clone() };
        records.push(
            verify_dnq(&sol.u, f, p, q, meta)
                .with_note(format!("residual {:e} after {} iterations", sol.residual, sol.iterations)),
        );
    }
    let mut report = SweepReport::new(records);
    report.add_uniformity(EstimateId::Dnq, None, threshold);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuLimitRow {
    /// Dyadic level, `None` for the limit `μ = 0`.
    pub level: Option<usize>,
    pub mu: f64,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    /// `‖u_{μ_j} − u_{μ_{j+1}}‖_{W^{1,p}}`.
    pub diff_next: Option<f64>,
    /// `‖u_{μ_j} − u_0‖_{W^{1,p}}`.
    pub diff_limit: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuLimitTable {
    pub p: f64,
    pub mu0: f64,
    pub rows: Vec<MuLimitRow>,
}

impl MuLimitTable {
    /// Number of successive differences, from the coarsest level on, that
    /// form a strictly decreasing chain.
    pub fn decreasing_levels(&self) -> usize {
        let diffs: Vec<f64> = self.rows.iter().map_while(|r| r.diff_next).collect();
        if diffs.is_empty() {
            return 0;
        }
        1 + diffs.windows(2).take_while(|w| w[1] < w[0]).count()
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(super::fmt_f64).unwrap_or_default();
        let mut out = String::from("level,mu,iterations,residual,diff_next,diff_limit,error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.level.map(|l| l.to_string()).unwrap_or_else(|| "limit".into()),
                super::fmt_f64(r.mu),
                r.iterations.map(|i| i.to_string()).unwrap_or_default(),
                opt(r.residual),
                opt(r.diff_next),
                opt(r.diff_limit),
                r.error.as_deref().unwrap_or("").replace(',', ";")
            ));
        }
        out
    }
}

/// Stationary solves at `μ_j = 2^(−j) μ₀`, `j = 0..=levels`, and at `μ = 0`,
/// each warm-started from the previous one.
pub fn mu_limit_study(
    f: &VectorField<f64>,
    p: f64,
    mu0: f64,
    levels: usize,
    config: &StationarySolveConfig,
) -> Result<MuLimitTable> {
    NonlinearityParams::new(p, mu0)?;
    config.validate()?;
    let mut mus: Vec<(Option<usize>, f64)> = (0..=levels).map(|j| (Some(j), mu0 * 0.5f64.powi(j as i32))).collect();
    mus.push((None, 0.0));
    let mut sols: Vec<Option<VectorField<f64>>> = Vec::with_capacity(mus.len());
    let mut rows = Vec::with_capacity(mus.len());
    let mut warm: Option<VectorField<f64>> = None;
    for &(level, mu) in &mus {
        let law = NonlinearityParams::new(p, mu)?;
        let res = match warm.take() {
            Some(w) => solve_stationary_from(f, &law, config, w),
            None => solve_stationary(f, &law, config),
        };
        match res {
            Ok(s) => {
                rows.push(MuLimitRow {
                    level,
                    mu,
                    iterations: Some(s.iterations),
                    residual: Some(s.residual),
                    diff_next: None,
                    diff_limit: None,
                    error: None,
                });
                warm = Some(s.u.clone());
                sols.push(Some(s.u));
            }
            Err(e) => {
                rows.push(MuLimitRow {
                    level,
                    mu,
                    iterations: None,
                    residual: None,
                    diff_next: None,
                    diff_limit: None,
                    error: Some(e.to_string()),
                });
                sols.push(None);
            }
        }
    }
    let dist = |a: &Option<VectorField<f64>>, b: &Option<VectorField<f64>>| -> Option<f64> {
        let d = a.as_ref()?.difference(b.as_ref()?).ok()?;
        Some(sobolev_norms(&d, p).w1)
    };
    let limit = sols.len() - 1;
    for j in 0..limit {
        if j + 1 < limit {
            rows[j].diff_next = dist(&sols[j], &sols[j + 1]);
        }
        rows[j].diff_limit = dist(&sols[j], &sols[limit]);
    }
    Ok(MuLimitTable { p, mu0, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn forcing(g: Grid, amp: f64) -> VectorField<f64> {
        VectorField::from_fn(g, 1, |x: &[f64], o: &mut [f64]| o[0] = amp * (1.0 + x[0] * x[1]))
    }

    #[test]
    fn linear_law_ignores_mu() {
        let g = Grid::new(2, 9).unwrap();
        let cfg = StationarySolveConfig::default();
        let t = mu_limit_study(&forcing(g, 3.0), 2.0, 1.0, 3, &cfg).unwrap();
        for r in &t.rows {
            if let Some(d) = r.diff_limit {
                assert!(d < 1e-7, "{d}");
            }
        }
    }

    #[test]
    fn zero_forcing_all_zero() {
        let g = Grid::new(2, 7).unwrap();
        let t = mu_limit_study(&VectorField::zeros(g, 1), 1.6, 1.0, 2, &StationarySolveConfig::default()).unwrap();
        assert!(t.rows.iter().all(|r| r.diff_limit.unwrap_or(0.0) == 0.0));
        assert_eq!(t.rows.len(), 4);
    }

    #[test]
    fn decreasing_chain_counted() {
        let row = |d: Option<f64>| MuLimitRow {
            level: Some(0),
            mu: 1.0,
            iterations: None,
            residual: None,
            diff_next: d,
            diff_limit: None,
            error: None,
        };
        let t =
            MuLimitTable { p: 1.6, mu0: 1.0, rows: vec![row(Some(4.0)), row(Some(3.0)), row(Some(3.5)), row(None)] };
        assert_eq!(t.decreasing_levels(), 2);
    }

    #[test]
    fn dnq_sweep_reports_uniformity() {
        let g = Grid::new(3, 7).unwrap();
        let rep = dnq_mu_sweep(
            &forcing(g, 50.0),
            1.6,
            &[0.0, 0.1, 1.0],
            &StationarySolveConfig::default(),
            &RecordMeta::default(),
            10.0,
        )
        .unwrap();
        assert_eq!(rep.records.len(), 3);
        assert_eq!(rep.uniformity.len(), 1);
    }
}
