//! Staggered ("flux-form") gradient and its adjoint divergence.
//!
//! Every grid cell (the `(m+1)^n` boxes spanned by neighbouring nodes,
//! boundary nodes included) carries `2^n` one-sided gradients, one per corner:
//! at a corner the `i`-th partial derivative is the difference quotient along
//! the cell edge in direction `i` that touches that corner. The discrete energy
//!
//! `E_h(u) = (h^n / 2^n) Σ_cells Σ_corners ½ G(|D u|²)`
//!
//! and the divergence `div_h σ = -D* σ` (adjoint in the weighted inner
//! products) give `div_h S(D u) = -grad E_h(u)` exactly. For `p = 2` the
//! operator is the standard `(2n+1)`-point Laplacian.

use super::{Grid, PaddedLayout, VectorField};
use crate::nonlinearity::Constitutive;
use crate::scalar::Real;

/// Corner-gradient operator for a grid and component count.
#[derive(Debug, Clone)]
pub struct FluxOperator {
    grid: Grid,
    pub(crate) layout: PaddedLayout,
    /// Padded node offset of the lower corner of each cell.
    cells: Vec<usize>,
    /// `edges[corner][dir] = (lo, hi)` node offsets relative to the cell base.
    edges: Vec<[(usize, usize); 3]>,
}

impl FluxOperator {
    pub fn new(grid: Grid, components: usize) -> Self {
        let layout = PaddedLayout::new(&grid, components);
        let n = grid.n();
        let m = grid.m();
        let cell_count = (m + 1).pow(n as u32);
        let mut cells = Vec::with_capacity(cell_count);
        for c in 0..cell_count {
            let mut rem = c;
            let mut off = 0;
            for d in (0..n).rev() {
                off += (rem % (m + 1)) * layout.strides[d];
                rem /= m + 1;
            }
            cells.push(off);
        }
        let corner_offset =
            |bits: usize| -> usize { (0..n).filter(|d| bits & (1 << d) != 0).map(|d| layout.strides[d]).sum() };
        let edges = (0..1usize << n)
            .map(|s| {
                let mut e = [(0, 0); 3];
                for (d, slot) in e.iter_mut().enumerate().take(n) {
                    *slot = (corner_offset(s & !(1 << d)), corner_offset(s | (1 << d)));
                }
                e
            })
            .collect();
        Self { grid, layout, cells, edges }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.layout.components
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn corners(&self) -> usize {
        self.edges.len()
    }

    /// Number of scalar entries of one corner gradient (`N n`).
    pub fn gradient_block(&self) -> usize {
        self.components() * self.grid.n()
    }

    /// Quadrature weight of one corner sample, `h^n / 2^n`.
    pub fn corner_weight<T: Real>(&self) -> T {
        self.grid.cell_volume::<T>() / T::of_usize(self.corners())
    }

    /// Corner gradient of a padded field at `(cell, corner)`, written as `[N, n]`.
    #[inline]
    pub(crate) fn corner_gradient<T: Real>(&self, pad: &[T], cell: usize, corner: usize, inv_h: T, out: &mut [T]) {
        let base = self.cells[cell];
        let nc = self.components();
        let n = self.grid.n();
        let e = &self.edges[corner];
        for c in 0..nc {
            for (i, &(lo, hi)) in e.iter().enumerate().take(n) {
                out[c * n + i] = (pad[(base + hi) * nc + c] - pad[(base + lo) * nc + c]) * inv_h;
            }
        }
    }

    /// Scatters `D*`-contributions of a corner flux `sigma` (`[N, n]`) scaled
    /// by `scale` into a padded accumulator.
    #[inline]
    pub(crate) fn scatter_adjoint<T: Real>(&self, acc: &mut [T], cell: usize, corner: usize, sigma: &[T], scale: T) {
        let base = self.cells[cell];
        let nc = self.components();
        let n = self.grid.n();
        let e = &self.edges[corner];
        for c in 0..nc {
            for (i, &(lo, hi)) in e.iter().enumerate().take(n) {
                let v = sigma[c * n + i] * scale;
                acc[(base + hi) * nc + c] += v;
                acc[(base + lo) * nc + c] -= v;
            }
        }
    }

    /// All corner gradients of `u`, laid out as `[cell][corner][N][n]`.
    pub fn gradients<T: Real>(&self, u: &VectorField<T>) -> Vec<T> {
        let pad = self.layout.pad(u.values());
        self.gradients_padded(&pad)
    }

    pub(crate) fn gradients_padded<T: Real>(&self, pad: &[T]) -> Vec<T> {
        let b = self.gradient_block();
        let k = self.corners();
        let inv_h = T::one() / self.grid.h::<T>();
        let mut out = vec![T::zero(); self.cells.len() * k * b];
        for cell in 0..self.cells.len() {
            for s in 0..k {
                let at = (cell * k + s) * b;
                self.corner_gradient(pad, cell, s, inv_h, &mut out[at..at + b]);
            }
        }
        out
    }

    /// `D* σ` for corner fluxes laid out like [`FluxOperator::gradients`];
    /// the weighted adjoint of `D`, so `⟨D* σ, w⟩_h = ⟨σ, D w⟩_corner`.
    pub fn adjoint<T: Real>(&self, sigma: &[T]) -> VectorField<T> {
        let b = self.gradient_block();
        let k = self.corners();
        let mut acc = vec![T::zero(); self.layout.len()];
        let scale = T::one() / (T::of_usize(k) * self.grid.h::<T>());
        for cell in 0..self.cells.len() {
            for s in 0..k {
                let at = (cell * k + s) * b;
                self.scatter_adjoint(&mut acc, cell, s, &sigma[at..at + b], scale);
            }
        }
        let vals = self.layout.unpad(&acc);
        VectorField::from_values(self.grid, self.components(), vals).expect("finite adjoint")
    }

    /// Weighted corner inner product `(h^n/2^n) Σ σ : τ`.
    pub fn corner_inner<T: Real>(&self, a: &[T], b: &[T]) -> T {
        crate::scalar::dot(a, b) * self.corner_weight::<T>()
    }

    /// `div S(D u)` on a padded field with the coefficient regularised by
    /// `eps2` (`eps2 = 0` is the exact law, continuously extended at `Du = 0`).
    pub(crate) fn stress_divergence_padded<T: Real, L: Constitutive<T>>(
        &self,
        pad: &[T],
        law: &L,
        eps2: T,
        out: &mut [T],
    ) {
        out.fill(T::zero());
        let b = self.gradient_block();
        let k = self.corners();
        let inv_h = T::one() / self.grid.h::<T>();
        let scale = -inv_h / T::of_usize(k);
        let mut g = vec![T::zero(); b];
        for cell in 0..self.cells.len() {
            for s in 0..k {
                self.corner_gradient(pad, cell, s, inv_h, &mut g);
                let s2 = g.iter().fold(T::zero(), |a, &x| a + x * x);
                let factor =
                    if eps2 > T::zero() { law.coefficient_regularized(s2, eps2) } else { law.stress_factor(s2.sqrt()) };
                self.scatter_adjoint(out, cell, s, &g, scale * factor);
            }
        }
        self.layout.zero_boundary(out);
    }

    /// `∫ G(|D u|²)` with the regularisation `eps2` (`0` for the exact law).
    pub(crate) fn energy_padded<T: Real, L: Constitutive<T>>(&self, pad: &[T], law: &L, eps2: T) -> T {
        let mut vals = Vec::with_capacity(self.cells.len() * self.corners());
        self.map_corners_padded(pad, |s2| law.density_regularized(s2, eps2), &mut vals);
        crate::scalar::pairwise_sum_slice(&vals) * self.corner_weight::<T>()
    }

    /// Per-corner value `f(|D u|²)` for every `(cell, corner)`.
    pub(crate) fn map_corners_padded<T: Real>(&self, pad: &[T], f: impl Fn(T) -> T, out: &mut Vec<T>) {
        let b = self.gradient_block();
        let k = self.corners();
        let inv_h = T::one() / self.grid.h::<T>();
        out.clear();
        let mut g = vec![T::zero(); b];
        for cell in 0..self.cells.len() {
            for s in 0..k {
                self.corner_gradient(pad, cell, s, inv_h, &mut g);
                let s2 = g.iter().fold(T::zero(), |a, &x| a + x * x);
                out.push(f(s2));
            }
        }
    }

    /// `y = D*(w D x) + shift x` on padded vectors, `w` one weight per corner.
    pub(crate) fn apply_weighted<T: Real>(&self, weights: &[T], shift: T, x: &[T], y: &mut [T]) {
        y.fill(T::zero());
        let nc = self.components();
        let n = self.grid.n();
        let k = self.corners();
        let h = self.grid.h::<T>();
        let scale = T::one() / (T::of_usize(k) * h * h);
        for (cell, &base) in self.cells.iter().enumerate() {
            for (s, e) in self.edges.iter().enumerate() {
                let w = weights[cell * k + s] * scale;
                for c in 0..nc {
                    for &(lo, hi) in e.iter().take(n) {
                        let (ilo, ihi) = ((base + lo) * nc + c, (base + hi) * nc + c);
                        let v = w * (x[ihi] - x[ilo]);
                        y[ihi] += v;
                        y[ilo] -= v;
                    }
                }
            }
        }
        self.layout.zero_boundary(y);
        if shift != T::zero() {
            for &pn in &self.layout.interior {
                for c in 0..nc {
                    y[pn * nc + c] += shift * x[pn * nc + c];
                }
            }
        }
    }

    /// Diagonal of `D*(w D ·) + shift`, set to 1 on boundary nodes.
    pub(crate) fn weighted_diagonal<T: Real>(&self, weights: &[T], shift: T, diag: &mut [T]) {
        diag.fill(T::zero());
        let nc = self.components();
        let n = self.grid.n();
        let k = self.corners();
        let h = self.grid.h::<T>();
        let scale = T::one() / (T::of_usize(k) * h * h);
        for (cell, &base) in self.cells.iter().enumerate() {
            for (s, e) in self.edges.iter().enumerate() {
                let w = weights[cell * k + s] * scale;
                for c in 0..nc {
                    for &(lo, hi) in e.iter().take(n) {
                        diag[(base + hi) * nc + c] += w;
                        diag[(base + lo) * nc + c] += w;
                    }
                }
            }
        }
        for &pn in &self.layout.interior {
            for c in 0..nc {
                diag[pn * nc + c] += shift;
            }
        }
        for &pn in &self.layout.boundary {
            diag[pn * nc..(pn + 1) * nc].fill(T::one());
        }
    }

    /// Exact `div S(D u)` for the law.
    pub fn stress_divergence<T: Real, L: Constitutive<T>>(&self, u: &VectorField<T>, law: &L) -> VectorField<T> {
        let pad = self.layout.pad(u.values());
        let mut out = vec![T::zero(); pad.len()];
        self.stress_divergence_padded(&pad, law, T::zero(), &mut out);
        VectorField::from_values(self.grid, self.components(), self.layout.unpad(&out))
            .expect("finite stress divergence")
    }

    /// `∫ G(|D u|²)`, the energy in the normalisation of the a-priori estimates
    /// (twice the solver functional).
    pub fn energy<T: Real, L: Constitutive<T>>(&self, u: &VectorField<T>, law: &L) -> T {
        let pad = self.layout.pad(u.values());
        self.energy_padded(&pad, law, T::zero())
    }

    /// `(h^n/2^n) Σ |D u|^p`, the staggered `‖∇u‖_p^p`.
    pub fn gradient_power<T: Real>(&self, u: &VectorField<T>, p: T) -> T {
        let pad = self.layout.pad(u.values());
        let mut vals = Vec::new();
        let half_p = p / T::of(2.0);
        self.map_corners_padded(&pad, |s2| if s2 == T::zero() { s2 } else { s2.powf(half_p) }, &mut vals);
        crate::scalar::pairwise_sum_slice(&vals) * self.corner_weight::<T>()
    }
}

/// `div S(∇u)` with the flux-form discretisation.
pub fn divergence_of_stress<T: Real, L: Constitutive<T>>(u: &VectorField<T>, law: &L) -> VectorField<T> {
    FluxOperator::new(*u.grid(), u.components()).stress_divergence(u, law)
}

/// Staggered `‖∇u‖_p^p`.
pub fn flux_gradient_power<T: Real>(u: &VectorField<T>, p: T) -> T {
    FluxOperator::new(*u.grid(), u.components()).gradient_power(u, p)
}

/// Both sides of the summation-by-parts identity
/// `⟨div S(Du), w⟩_h = -⟨S(Du), D w⟩_corner`, returned as `(lhs, rhs)`.
pub fn summation_by_parts_pair<T: Real, L: Constitutive<T>>(u: &VectorField<T>, w: &VectorField<T>, law: &L) -> (T, T) {
    let op = FluxOperator::new(*u.grid(), u.components());
    let div = op.stress_divergence(u, law);
    let lhs = div.inner(w).expect("same shape");
    let gu = op.gradients(u);
    let gw = op.gradients(w);
    let b = op.gradient_block();
    let mut sigma = vec![T::zero(); gu.len()];
    for (chunk, out) in gu.chunks(b).zip(sigma.chunks_mut(b)) {
        let s = chunk.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        let f = law.stress_factor(s);
        for (o, &g) in out.iter_mut().zip(chunk) {
            *o = f * g;
        }
    }
    (lhs, -op.corner_inner(&sigma, &gw))
}
