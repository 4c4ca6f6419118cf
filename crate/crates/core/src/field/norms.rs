//! Discrete Lebesgue, Sobolev, Bochner and Hölder (semi)norms.
//!
//! Quadrature is the node sum `h^n Σ`; the boundary contributes nothing.
//! Pointwise magnitudes are Euclidean over the per-node block (Frobenius
//! for tensors).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gradient, second_derivatives, NodalField, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Above this node count the Hölder seminorm samples pairs instead of
/// enumerating all of them.
pub const HOLDER_EXACT_LIMIT: usize = 4096;
pub const HOLDER_RANDOM_PAIRS: usize = 1_000_000;
const HOLDER_SEED: u64 = 0x5eed_4011;

fn block_mag2<T: Real>(b: &[T]) -> T {
    b.iter().fold(T::zero(), |a, &x| a + x * x)
}

/// `‖v‖_q = (h^n Σ |v|^q)^(1/q)`, or the max norm for `q = ∞`.
pub fn lebesgue_norm<T: Real, F: NodalField<T> + ?Sized>(field: &F, q: f64) -> T {
    let nodes = field.grid().nodes();
    if q.is_infinite() {
        return (0..nodes).map(|k| block_mag2(field.node_block(k))).fold(T::zero(), T::max).sqrt();
    }
    assert!(q >= 1.0, "Lebesgue exponent must be >= 1, got {q}");
    let sum = lebesgue_power(field, q);
    sum.powf(T::of(1.0 / q))
}

/// `h^n Σ |v|^q` (the `q`-th power of the norm).
pub(crate) fn lebesgue_power<T: Real, F: NodalField<T> + ?Sized>(field: &F, q: f64) -> T {
    let nodes = field.grid().nodes();
    let half_q = T::of(q / 2.0);
    let two = q == 2.0;
    let sum = pairwise_sum(nodes, &|k| {
        let m2 = block_mag2(field.node_block(k));
        if two || m2 == T::zero() {
            m2
        } else {
            m2.powf(half_q)
        }
    });
    sum * field.grid().cell_volume::<T>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevNorms<T> {
    pub w1: T,
    pub w2: T,
}

/// `W^{1,q}` and `W^{2,q}` norms with centred derivatives. Finite `q` only.
pub fn sobolev_norms<T: Real>(u: &VectorField<T>, q: f64) -> SobolevNorms<T> {
    assert!(q.is_finite() && q >= 1.0, "Sobolev exponent must be finite and >= 1");
    let u_q: T = lebesgue_power(u, q);
    let grad_q: T = lebesgue_power(&gradient(u), q);
    let hess_q: T = lebesgue_power(&second_derivatives(u), q);
    let inv = T::of(1.0 / q);
    SobolevNorms { w1: (u_q + grad_q).powf(inv), w2: (u_q + grad_q + hess_q).powf(inv) }
}

/// Spatial norm applied to each snapshot inside a Bochner norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "q", rename_all = "kebab-case")]
pub enum SpatialNorm {
    Lebesgue(f64),
    /// `‖∇u‖_q` with the centred gradient.
    Gradient(f64),
    W1(f64),
    W2(f64),
}

impl SpatialNorm {
    pub fn eval<T: Real>(&self, u: &VectorField<T>) -> T {
        match *self {
            SpatialNorm::Lebesgue(q) => lebesgue_norm(u, q),
            SpatialNorm::Gradient(q) => lebesgue_norm(&gradient(u), q),
            SpatialNorm::W1(q) => sobolev_norms(u, q).w1,
            SpatialNorm::W2(q) => sobolev_norms(u, q).w2,
        }
    }
}

/// `L^r(0, T; X)` norm of a trajectory by the rectangle rule on the retained
/// snapshots `k ≥ 1`: `(Σ (t_k − t_{k−1}) X(u^k)^r)^(1/r)`. The initial
/// snapshot is excluded; `r = ∞` takes the max over `k ≥ 1`.
pub fn bochner_norm<T: Real>(traj: &Trajectory<T>, r: f64, spatial: SpatialNorm) -> Result<T> {
    if traj.len() < 2 {
        return Err(Error::Empty("Bochner norm needs at least one step after the initial snapshot".into()));
    }
    let values: Vec<T> = traj.snapshots()[1..].iter().map(|u| spatial.eval(u)).collect();
    if r.is_infinite() {
        return Ok(values.iter().copied().fold(T::zero(), T::max));
    }
    // 2(p-1) < 1 for p < 3/2; the quasi-norm is still well defined.
    if !(r > 0.0) {
        return Err(Error::Domain(format!("time exponent must be positive, got {r}")));
    }
    let times = traj.times();
    let rr = T::of(r);
    let sum = pairwise_sum(values.len(), &|k| (times[k + 1] - times[k]) * values[k].powf(rr));
    Ok(sum.powf(T::one() / rr))
}

/// Hölder seminorm `max |u(x) − u(y)| / |x − y|^α` over node pairs: all pairs
/// when `m^n ≤ 4096`, otherwise axis neighbours plus seeded random pairs.
pub fn holder_seminorm<T: Real>(u: &VectorField<T>, alpha: f64) -> T {
    holder_seminorm_with(u, alpha, HOLDER_SEED, HOLDER_RANDOM_PAIRS)
}

pub fn holder_seminorm_with<T: Real>(u: &VectorField<T>, alpha: f64, seed: u64, random_pairs: usize) -> T {
    assert!(alpha > 0.0 && alpha <= 1.0, "Hölder exponent must lie in (0, 1]");
    let grid = *u.grid();
    let nodes = grid.nodes();
    let n = grid.n();
    let h = grid.h::<T>();
    let half_alpha = T::of(alpha / 2.0);
    let idx: Vec<[usize; 3]> = (0..nodes).map(|k| grid.multi_index(k)).collect();
    let quotient = |a: usize, b: usize| -> T {
        let d2 = (0..n).fold(T::zero(), |acc, d| {
            let diff = T::of(idx[a][d] as f64 - idx[b][d] as f64) * h;
            acc + diff * diff
        });
        let num = u.at(a).iter().zip(u.at(b)).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt();
        num / d2.powf(half_alpha)
    };
    let mut best = T::zero();
    if nodes <= HOLDER_EXACT_LIMIT {
        for a in 0..nodes {
            for b in (a + 1)..nodes {
                best = best.max(quotient(a, b));
            }
        }
        return best;
    }
    for (a, &ia) in idx.iter().enumerate() {
        for d in 0..n {
            if ia[d] + 1 < grid.m() {
                let mut j = ia;
                j[d] += 1;
                best = best.max(quotient(a, grid.node_index(&j)));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_pairs {
        let a = rng.gen_range(0..nodes);
        let b = rng.gen_range(0..nodes);
        if a != b {
            best = best.max(quotient(a, b));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, TensorField};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine(grid: Grid) -> VectorField<f64> {
        VectorField::<f64>::from_fn(grid, 1, |x, o| o[0] = x.iter().map(|&xi| (PI * xi).sin()).product())
    }

    #[test]
    fn single_node_and_constant_fields() {
        let g = Grid::new(2, 4).unwrap();
        let mut vals = vec![0.0; g.nodes()];
        vals[5] = -3.0;
        let u = VectorField::from_values(g, 1, vals).unwrap();
        let h = g.h::<f64>();
        assert!((lebesgue_norm(&u, 1.0) - h * h * 3.0).abs() < 1e-15);
        assert_eq!(lebesgue_norm(&u, f64::INFINITY), 3.0);
        let c = VectorField::from_values(g, 2, vec![0.6; g.nodes() * 2]).unwrap();
        let mag = (0.72f64).sqrt();
        let area = (g.nodes() as f64) * h * h;
        assert!((lebesgue_norm(&c, 3.0) - mag * area.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn sine_mode_l2_norm() {
        for n in 1..=3 {
            let u = sine(Grid::new(n, 15).unwrap());
            let exact = 2f64.powf(-(n as f64) / 2.0);
            // The node sum is exact for this trigonometric polynomial.
            assert!((lebesgue_norm(&u, 2.0) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_mode_sobolev_norms() {
        let u = sine(Grid::new(3, 31).unwrap());
        let s = sobolev_norms(&u, 2.0);
        // ‖u‖² = 1/8, ‖∇u‖² = 3π²/8, ‖D²u‖² = 9π⁴/8.
        let pi2 = PI * PI;
        let w1 = ((1.0 + 3.0 * pi2) / 8.0f64).sqrt();
        let w2 = ((1.0 + 3.0 * pi2 + 9.0 * pi2 * pi2) / 8.0f64).sqrt();
        // Derivatives are nonzero on the boundary, which the node sum omits.
        let h = 1.0 / 32.0;
        assert!((s.w1 - w1).abs() / w1 < 2.0 * h, "{} vs {w1}", s.w1);
        assert!((s.w2 - w2).abs() / w2 < 2.0 * h, "{} vs {w2}", s.w2);
        let z = sobolev_norms(&VectorField::<f64>::zeros(Grid::new(2, 5).unwrap(), 1), 1.5);
        assert_eq!((z.w1, z.w2), (0.0, 0.0));
    }

    #[test]
    fn constant_trajectory_bochner() {
        let g = Grid::new(2, 5).unwrap();
        let u = sine(g);
        let tau = 0.1;
        let traj = Trajectory::uniform(tau, vec![u.clone(), u.clone(), u.clone(), u.clone()]).unwrap();
        let x = lebesgue_norm(&u, 2.0);
        let t = 0.3f64;
        let b = bochner_norm(&traj, 1.5, SpatialNorm::Lebesgue(2.0)).unwrap();
        assert!((b - t.powf(1.0 / 1.5) * x).abs() < 1e-14);
        let spike = Trajectory::uniform(tau, vec![u.clone(), u.scaled(0.1), u.scaled(7.0), u.scaled(0.2)]).unwrap();
        assert!((bochner_norm(&spike, f64::INFINITY, SpatialNorm::Lebesgue(2.0)).unwrap() - 7.0 * x).abs() < 1e-13);
        let single = Trajectory::uniform(tau, vec![u]).unwrap();
        assert!(bochner_norm(&single, 2.0, SpatialNorm::W2(2.0)).is_err());
    }

    #[test]
    fn holder_of_zero_and_ramp() {
        let g = Grid::new(2, 6).unwrap();
        assert_eq!(holder_seminorm(&VectorField::<f64>::zeros(g, 1), 0.5), 0.0);
        let ramp = VectorField::<f64>::from_fn(g, 1, |x, o| o[0] = -2.5 * x[0]);
        assert!((holder_seminorm(&ramp, 1.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn holder_sampled_path_on_large_grid() {
        let g = Grid::new(3, 17).unwrap();
        let ramp = VectorField::<f64>::from_fn(g, 1, |x, o| o[0] = 1.5 * x[2]);
        let v = holder_seminorm_with(&ramp, 1.0, 3, 10_000);
        assert!((v - 1.5).abs() < 1e-12);
    }

    fn random_tensor(g: Grid, vals: &[f64]) -> TensorField<f64> {
        let mut t = TensorField::zeros(g, vec![2]);
        t.values_mut().copy_from_slice(&vals[..g.nodes() * 2]);
        t
    }

    proptest! {
        #[test]
        fn norms_homogeneous_and_subadditive(
            a in proptest::collection::vec(-3.0f64..3.0, 32),
            b in proptest::collection::vec(-3.0f64..3.0, 32),
            c in -4.0f64..4.0,
            q in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.7), Just(f64::INFINITY)],
        ) {
            let g = Grid::new(2, 4).unwrap();
            let ta = random_tensor(g, &a);
            let tb = random_tensor(g, &b);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            let na: f64 = lebesgue_norm(&ta, q);
            let nb: f64 = lebesgue_norm(&tb, q);
            let ns: f64 = lebesgue_norm(&random_tensor(g, &sum), q);
            let nc: f64 = lebesgue_norm(&random_tensor(g, &scaled), q);
            prop_assert!(ns <= (na + nb) * (1.0 + 1e-12) + 1e-14);
            prop_assert!((nc - c.abs() * na).abs() <= 1e-12 * (1.0 + nc));
        }

        #[test]
        fn holder_monotone_in_alpha(vals in proptest::collection::vec(-1.0f64..1.0, 27)) {
            // On the unit box |x - y| <= √3 but node pairs of a 3^3 grid are within 1.
            let g = Grid::new(3, 3).unwrap();
            let u = VectorField::from_values(g, 1, vals).unwrap();
            prop_assert!(holder_seminorm(&u, 0.3) <= holder_seminorm(&u, 0.8) * (1.0 + 1e-12));
        }
    }
}
