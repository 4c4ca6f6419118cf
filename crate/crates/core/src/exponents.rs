//! Exponent calculus for the singular p-Laplacian regularity theory.
//!
//! Everything here is plain double precision: the quantities are closed-form
//! expressions in `(p, n, K)` and the admissibility tests are exact strict
//! inequalities. Margins are reported alongside every flag so near-threshold
//! parameters are visible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{lebesgue_norm, second_derivatives, Grid, VectorField};

/// Distance to 1 below which `q_hat` is reported as near-degenerate.
pub const NEAR_DEGENERATE: f64 = 1e-6;

/// Default Yudovich constant `K` in `C2(q) <= K q`.
pub const DEFAULT_YUDOVICH_K: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub p: f64,
    pub n: usize,
    /// Yudovich constant.
    pub k: f64,
    pub q: f64,
}

impl ExponentParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if self.n < 1 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.k > 0.0) {
            return Err(Error::Domain(format!("K must be positive, got {}", self.k)));
        }
        if !(self.q > 1.0) {
            return Err(Error::Domain(format!("q must exceed 1, got {}", self.q)));
        }
        Ok(())
    }

    /// Conjugate exponent `p' = p / (p - 1)`.
    pub fn p_conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// A strict-inequality check together with its signed margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub ok: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrasCheck {
    /// `2 - n/(2nK + 2) < p <= 2`.
    pub oras: Condition,
    /// `(2 - p) q_hat < 1/K`; `None` when `q_hat` is undefined.
    pub bolas: Option<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub p: f64,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub q_hat: f64,
    pub r_of_q_hat: f64,
    pub bunov_ok: bool,
    pub bunov_margin: f64,
    /// Gated with the pessimistic value `C2(q_hat) = K q_hat`.
    pub kkapas_ok: Condition,
    pub c2_used: f64,
    pub oras_ok: Condition,
    pub bolas: Option<Condition>,
    pub holder_alpha: Option<f64>,
    pub near_degenerate: bool,
    pub notes: Vec<String>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p must lie in (1, 2], got {p}")))
    }
}

/// Core exponent `2n(p-1) / (n - 2(2-p))`.
pub fn hat_q(p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if n < 3 {
        return Err(Error::Domain(format!("core exponent needs n >= 3, got n = {n}")));
    }
    let nf = n as f64;
    let denom = nf - 2.0 * (2.0 - p);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("n - 2(2 - p) > 0 violated: {nf} - 2(2 - {p}) = {denom}")));
    }
    Ok(2.0 * nf * (p - 1.0) / denom)
}

/// Integrability exponent of the forcing needed for `W^{2,q}` regularity.
pub fn r_of_q(q: f64, p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q must exceed 1, got {q}")));
    }
    if n < 3 {
        return Err(Error::Domain(format!("r(q) needs n >= 3, got n = {n}")));
    }
    let nf = n as f64;
    if q <= nf {
        Ok(nf * q / (nf * (p - 1.0) + q * (2.0 - p)))
    } else {
        Ok(q)
    }
}

/// Admissibility window on `p`: `2n/(n+2) < p <= 2` for `n > 3`, `5/4 < p <= 2` for `n = 3`.
pub fn check_bunov(p: f64, n: usize) -> Condition {
    let lower = bunov_lower(n);
    Condition { ok: p > lower && p <= 2.0 && n >= 3, margin: p - lower }
}

fn bunov_lower(n: usize) -> f64 {
    if n == 3 {
        1.25
    } else {
        let nf = n as f64;
        2.0 * nf / (nf + 2.0)
    }
}

/// `(2 - p) C2 < 1`.
pub fn check_kkapas(p: f64, c2: f64) -> Condition {
    let margin = 1.0 - (2.0 - p) * c2;
    Condition { ok: margin > 0.0, margin }
}

/// Sufficient condition `2 - n/(2nK + 2) < p <= 2`, plus the intermediate
/// `(2 - p) q_hat < 1/K` it implies.
pub fn check_oras(p: f64, n: usize, k: f64) -> OrasCheck {
    let nf = n as f64;
    let threshold = 2.0 - nf / (2.0 * nf * k + 2.0);
    let oras = Condition { ok: p > threshold && p <= 2.0, margin: p - threshold };
    let bolas = hat_q(p, n).ok().map(|qh| {
        let margin = 1.0 / k - (2.0 - p) * qh;
        Condition { ok: margin > 0.0, margin }
    });
    OrasCheck { oras, bolas }
}

/// Hölder exponent `(p - 3/2)/(p - 1)` of the `n = 3` embedding.
pub fn holder_alpha(p: f64) -> Result<f64> {
    if !(p > 1.5) {
        return Err(Error::Domain(format!("Hölder exponent needs p > 3/2, got {p}")));
    }
    Ok((p - 1.5) / (p - 1.0))
}

/// Full exponent report for `(p, n, K)`.
pub fn exponent_report(p: f64, n: usize, k: f64) -> Result<ExponentReport> {
    check_p(p)?;
    if !(k > 0.0) {
        return Err(Error::Domain(format!("K must be positive, got {k}")));
    }
    let q_hat = hat_q(p, n)?;
    let r_of_q_hat = r_of_q(q_hat, p, n)?;
    let bunov = check_bunov(p, n);
    let c2_used = k * q_hat;
    let kkapas = check_kkapas(p, c2_used);
    let oras = check_oras(p, n, k);
    let holder = if n == 3 { holder_alpha(p).ok() } else { None };
    let near_degenerate = (q_hat - 1.0).abs() < NEAR_DEGENERATE;
    let mut notes = Vec::new();
    if !bunov.ok {
        notes.push("p outside the admissibility window; q_hat in (1, 2] not guaranteed".into());
    }
    if near_degenerate {
        notes.push(format!("q_hat within {NEAR_DEGENERATE:e} of 1 (near-degenerate)"));
    }
    if p <= 2.0 - 2.0 / n as f64 {
        notes.push("p <= 2 - 2/n: Yudovich bound C2(q) <= K q not guaranteed at q_hat".into());
    }
    Ok(ExponentReport {
        p,
        n,
        k,
        q_hat,
        r_of_q_hat,
        bunov_ok: bunov.ok,
        bunov_margin: bunov.margin,
        kkapas_ok: kkapas,
        c2_used,
        oras_ok: oras.oras,
        bolas: oras.bolas,
        holder_alpha: holder,
        near_degenerate,
        notes,
    })
}

/// Empirical lower bound on the discrete Calderón–Zygmund constant
/// `sup ||D^2 v||_q / ||Δv||_q`, sampled over random sine-series fields.
///
/// This only ever bounds the constant from below; admissibility gating uses
/// `K q_hat` instead.
pub fn estimate_c2_lower(grid: &Grid, q: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q must be at least 1, got {q}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_freq = 3usize;
    let n = grid.n();
    let modes: Vec<Vec<usize>> = (0..max_freq.pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let k = idx % max_freq + 1;
                    idx /= max_freq;
                    k
                })
                .collect()
        })
        .collect();
    let mut best: Option<f64> = None;
    for _ in 0..samples {
        let coeffs: Vec<f64> = modes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = VectorField::<f64>::from_fn(*grid, 1, |x, out| {
            out[0] = modes
                .iter()
                .zip(&coeffs)
                .map(|(k, c)| {
                    c * k.iter().zip(x).map(|(&ki, &xi)| (ki as f64 * std::f64::consts::PI * xi).sin()).product::<f64>()
                })
                .sum();
        });
        let hess = second_derivatives(&v);
        let lap = hess.trace_last_two();
        let denom = lebesgue_norm(&lap, q);
        if denom == 0.0 {
            continue;
        }
        let ratio = lebesgue_norm(&hess, q) / denom;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| Error::Empty("no non-degenerate samples for C2 estimate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hat_q_examples() {
        assert_eq!(hat_q(2.0, 3).unwrap(), 2.0);
        assert_relative_eq!(hat_q(1.8, 3).unwrap(), 24.0 / 13.0, max_relative = 1e-15);
        assert_relative_eq!(hat_q(1.5, 3).unwrap(), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn hat_q_rejects_bad_inputs() {
        assert!(hat_q(2.5, 3).is_err());
        assert!(hat_q(1.0, 3).is_err());
        assert!(hat_q(1.8, 2).is_err());
        // n >= 3 keeps n - 2(2 - p) >= 1, so p near 1 is still defined.
        assert!(hat_q(1.0001, 3).unwrap() > 0.0);
    }

    #[test]
    fn r_of_q_examples() {
        assert_eq!(r_of_q(5.0, 1.7, 3).unwrap(), 5.0);
        assert_relative_eq!(r_of_q(2.0, 2.0, 3).unwrap(), 2.0, max_relative = 1e-15);
        let qh = hat_q(1.8, 3).unwrap();
        assert_relative_eq!(r_of_q(qh, 1.8, 3).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn r_of_q_branches_agree_at_n() {
        for n in 3..9 {
            for &p in &[1.3, 1.5, 1.77, 2.0] {
                let nf = n as f64;
                let lower = nf * nf / (nf * (p - 1.0) + nf * (2.0 - p));
                assert_relative_eq!(lower, nf, max_relative = 1e-12);
                assert_eq!(r_of_q(nf, p, n).unwrap(), lower);
            }
        }
    }

    #[test]
    fn bunov_examples() {
        let c = check_bunov(1.3, 3);
        assert!(c.ok);
        assert_relative_eq!(c.margin, 0.05, max_relative = 1e-12);
        assert!(!check_bunov(1.25, 3).ok);
        assert!(check_bunov(2.0, 4).ok);
        assert!(!check_bunov(2.0001, 4).ok);
    }

    #[test]
    fn kkapas_examples() {
        let c = check_kkapas(2.0, 1e6);
        assert!(c.ok);
        assert_eq!(c.margin, 1.0);
        let c = check_kkapas(1.5, 1.9);
        assert!(c.ok);
        assert_relative_eq!(c.margin, 0.05, max_relative = 1e-12);
        assert!(!check_kkapas(1.5, 2.0).ok);
    }

    #[test]
    fn oras_examples() {
        for n in 3..7 {
            assert!(check_oras(2.0, n, 3.7).oras.ok);
        }
        let c = check_oras(1.9, 3, 1.0);
        assert!(c.oras.ok);
        assert_relative_eq!(c.oras.margin, 1.9 - 1.625, max_relative = 1e-12);
        assert!(!check_oras(1.6, 3, 1.0).oras.ok);
    }

    #[test]
    fn holder_examples() {
        assert_eq!(holder_alpha(2.0).unwrap(), 0.5);
        assert_relative_eq!(holder_alpha(1.8).unwrap(), 0.375, max_relative = 1e-12);
        assert!(holder_alpha(1.5 + 1e-12).unwrap() < 1e-10);
        assert!(holder_alpha(1.5).is_err());
    }

    #[test]
    fn report_near_degenerate_at_n4_lower_endpoint() {
        let p = 4.0 / 3.0 + 1e-9;
        let r = exponent_report(p, 4, 1.0).unwrap();
        assert!(r.near_degenerate);
        assert!(r.q_hat > 1.0);
        assert!(r.bunov_ok);
    }

    #[test]
    fn report_json_has_type_fields() {
        let r = exponent_report(1.8, 3, 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["q_hat", "r_of_q_hat", "bunov_ok", "kkapas_ok", "oras_ok", "holder_alpha", "K"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_relative_eq!(v["holder_alpha"].as_f64().unwrap(), 0.375, max_relative = 1e-12);
    }

    #[test]
    fn c2_single_mode_is_at_most_one() {
        // One sample with all coefficients but one suppressed is not reachable
        // through the random API, so check the identity directly.
        let grid = Grid::new(3, 15).unwrap();
        let v = VectorField::<f64>::from_fn(grid, 1, |x, out| {
            out[0] = x.iter().map(|&xi| (std::f64::consts::PI * xi).sin()).product();
        });
        let hess = second_derivatives(&v);
        let ratio = lebesgue_norm(&hess, 2.0) / lebesgue_norm(&hess.trace_last_two(), 2.0);
        // Mixed derivatives do not vanish on the boundary, which the interior
        // node sum drops: the ratio sits below 1 by O(h).
        assert!(ratio <= 1.0 + 1e-2, "ratio {ratio}");
        assert!(ratio >= 1.0 - 2.0 * grid.h::<f64>(), "ratio {ratio}");
    }

    #[test]
    fn c2_running_max_is_monotone_in_samples() {
        let grid = Grid::new(2, 9).unwrap();
        let mut last = 0.0;
        for s in [1, 2, 4, 8] {
            let c = estimate_c2_lower(&grid, 1.5, s, 11).unwrap();
            assert!(c >= last);
            last = c;
        }
        assert!(estimate_c2_lower(&grid, 1.5, 0, 11).is_err());
    }
}
