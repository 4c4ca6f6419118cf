//! Cell averages of radial power singularities.

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Mean of `|ξ|^(−β)` over the unit cube `[−½, ½]^n`, `β < n`.
///
/// The cube splits into its half-size copy and a shell of `4^n − 2^n`
/// sub-cubes of side ¼; scaling gives `I = I_shell / (1 − 2^(β−n))`, and the
/// integrand is smooth on the shell.
pub fn radial_cell_average(n: usize, beta: f64) -> f64 {
    assert!((1..=3).contains(&n) && beta < n as f64);
    if beta == 0.0 {
        return 1.0;
    }
    let rule = gauss_legendre(12);
    let side = 0.25;
    let mut shell = 0.0;
    let cubes = 4usize.pow(n as u32);
    let mut idx = [0usize; 3];
    for c in 0..cubes {
        let mut rem = c;
        for slot in idx.iter_mut().take(n) {
            *slot = rem % 4;
            rem /= 4;
        }
        if idx[..n].iter().all(|&i| i == 1 || i == 2) {
            continue;
        }
        let lo: Vec<f64> = idx[..n].iter().map(|&i| -0.5 + side * i as f64).collect();
        let pts = rule.len().pow(n as u32);
        for q in 0..pts {
            let mut rem = q;
            let mut r2 = 0.0;
            let mut w = 1.0;
            for &l in lo.iter() {
                let (x, wx) = rule[rem % rule.len()];
                rem /= rule.len();
                let xi = l + side * 0.5 * (x + 1.0);
                r2 += xi * xi;
                w *= wx * side * 0.5;
            }
            shell += w * r2.powf(-0.5 * beta);
        }
    }
    shell / (1.0 - 2f64.powf(beta - n as f64))
}
