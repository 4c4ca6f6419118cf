//! Uniform-grid fields on the unit box `[0,1]^n` with zero Dirichlet data.
//!
//! Only interior nodes are stored; the boundary trace is identically zero.
//! Node order is row-major (last axis fastest) with components innermost.

mod flux;
mod norms;
mod snapshot;
mod stencil;
mod trajectory;

pub use flux::{divergence_of_stress, flux_gradient_power, summation_by_parts_pair, FluxOperator};
pub use norms::{
    bochner_norm, holder_seminorm, holder_seminorm_with, lebesgue_norm, sobolev_norms, SobolevNorms, SpatialNorm,
    HOLDER_EXACT_LIMIT, HOLDER_RANDOM_PAIRS,
};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader, SNAPSHOT_FORMAT};
pub use stencil::{gradient, second_derivatives};
pub use trajectory::Trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Interior nodes of the unit box, `m` per axis, spacing `h = 1/(m+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    m: usize,
}

impl Grid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Invalid(format!("grid dimension must be 1, 2 or 3, got {n}")));
        }
        if m < 3 {
            return Err(Error::Invalid(format!("need at least 3 interior nodes per axis, got {m}")));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h<T: Real>(&self) -> T {
        T::one() / T::of_usize(self.m + 1)
    }

    /// `h^n`, the quadrature weight of one node.
    pub fn cell_volume<T: Real>(&self) -> T {
        self.h::<T>().powi(self.n as i32)
    }

    pub fn nodes(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Space dimensions below 3 are solver sandboxes, not covered by the theory.
    pub fn outside_theory(&self) -> bool {
        self.n < 3
    }

    /// Zero-based interior multi-index of a node (unused axes are 0).
    pub fn multi_index(&self, mut node: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for d in (0..self.n).rev() {
            idx[d] = node % self.m;
            node /= self.m;
        }
        idx
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx[..self.n].iter().fold(0, |acc, &i| acc * self.m + i)
    }

    /// Physical coordinates of a node.
    pub fn coords<T: Real>(&self, node: usize, out: &mut [T]) {
        let idx = self.multi_index(node);
        let h = self.h::<T>();
        for d in 0..self.n {
            out[d] = T::of_usize(idx[d] + 1) * h;
        }
    }
}

/// Zero-padded node layout of `(m+2)^n` nodes, boundary included.
#[derive(Debug, Clone)]
pub(crate) struct PaddedLayout {
    pub n: usize,
    pub ext: usize,
    pub components: usize,
    /// Node strides per axis in the padded layout.
    pub strides: [usize; 3],
    /// Padded node offset of every interior node, in interior order.
    pub interior: Vec<usize>,
    /// Padded node offsets of boundary nodes.
    pub boundary: Vec<usize>,
}

impl PaddedLayout {
    pub fn new(grid: &Grid, components: usize) -> Self {
        let n = grid.n;
        let ext = grid.m + 2;
        let mut strides = [0usize; 3];
        let mut s = 1;
        for d in (0..n).rev() {
            strides[d] = s;
            s *= ext;
        }
        let total = s;
        let mut interior = Vec::with_capacity(grid.nodes());
        let mut boundary = Vec::new();
        for node in 0..total {
            let mut rem = node;
            let mut inside = true;
            for &stride in &strides[..n] {
                let i = rem / stride;
                rem %= stride;
                if i == 0 || i == ext - 1 {
                    inside = false;
                }
            }
            if inside {
                interior.push(node);
            } else {
                boundary.push(node);
            }
        }
        Self { n, ext, components, strides, interior, boundary }
    }

    pub fn total_nodes(&self) -> usize {
        self.ext.pow(self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.total_nodes() * self.components
    }

    pub fn pad<T: Real>(&self, values: &[T]) -> Vec<T> {
        let nc = self.components;
        let mut out = vec![T::zero(); self.len()];
        for (k, &pn) in self.interior.iter().enumerate() {
            out[pn * nc..(pn + 1) * nc].copy_from_slice(&values[k * nc..(k + 1) * nc]);
        }
        out
    }

    pub fn unpad<T: Real>(&self, padded: &[T]) -> Vec<T> {
        let nc = self.components;
        let mut out = Vec::with_capacity(self.interior.len() * nc);
        for &pn in &self.interior {
            out.extend_from_slice(&padded[pn * nc..(pn + 1) * nc]);
        }
        out
    }

    pub fn zero_boundary<T: Real>(&self, padded: &mut [T]) {
        let nc = self.components;
        for &pn in &self.boundary {
            padded[pn * nc..(pn + 1) * nc].fill(T::zero());
        }
    }
}

/// Anything stored as a fixed-size block of values per interior node.
pub trait NodalField<T: Real> {
    fn grid(&self) -> &Grid;
    /// Values per node.
    fn block(&self) -> usize;
    fn data(&self) -> &[T];

    fn node_block(&self, node: usize) -> &[T] {
        let b = self.block();
        &self.data()[node * b..(node + 1) * b]
    }
}

/// `N`-component nodal field with zero boundary trace.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid,
    components: usize,
    values: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        assert!(components >= 1, "a field needs at least one component");
        Self { grid, components, values: vec![T::zero(); grid.nodes() * components] }
    }

    pub fn from_values(grid: Grid, components: usize, values: Vec<T>) -> Result<Self> {
        if components == 0 {
            return Err(Error::Invalid("component count must be at least 1".into()));
        }
        if values.len() != grid.nodes() * components {
            return Err(Error::Shape(format!("expected {} values, got {}", grid.nodes() * components, values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at flat index {i}")));
        }
        Ok(Self { grid, components, values })
    }

    /// Samples `fill(x, out)` at every interior node.
    pub fn from_fn(grid: Grid, components: usize, mut fill: impl FnMut(&[T], &mut [T])) -> Self {
        let mut field = Self::zeros(grid, components);
        let mut x = [T::zero(); 3];
        for node in 0..grid.nodes() {
            grid.coords(node, &mut x);
            fill(&x[..grid.n], &mut field.values[node * components..(node + 1) * components]);
        }
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, node: usize) -> &[T] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.grid == other.grid && self.components == other.components
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "fields differ: ({:?}, N={}) vs ({:?}, N={})",
                self.grid, self.components, other.grid, other.components
            )))
        }
    }

    /// `self - other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self { grid: self.grid, components: self.components, values })
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: T, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + alpha * b).collect();
        Ok(Self { grid: self.grid, components: self.components, values })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { grid: self.grid, components: self.components, values: self.values.iter().map(|&v| c * v).collect() }
    }

    /// Discrete `L²` inner product `h^n Σ u·w`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_shape(other)?;
        Ok(crate::scalar::dot(&self.values, &other.values) * self.grid.cell_volume::<T>())
    }

    /// Lossless widening (or narrowing) to another scalar type.
    pub fn cast<U: Real>(&self) -> VectorField<U> {
        VectorField {
            grid: self.grid,
            components: self.components,
            values: self.values.iter().map(|&v| U::of(v.as_f64())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }
}

impl<T: Real> NodalField<T> for VectorField<T> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn block(&self) -> usize {
        self.components
    }

    fn data(&self) -> &[T] {
        &self.values
    }
}

/// Per-node tensors, e.g. gradients (`[N, n]`) or Hessians (`[N, n, n]`).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField<T> {
    grid: Grid,
    shape: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> TensorField<T> {
    pub fn zeros(grid: Grid, shape: Vec<usize>) -> Self {
        let block: usize = shape.iter().product();
        Self { grid, shape, values: vec![T::zero(); grid.nodes() * block] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Contracts the last two axes of an `[N, n, n]` field (the Laplacian for a Hessian).
    pub fn trace_last_two(&self) -> VectorField<T> {
        assert_eq!(self.shape.len(), 3, "trace needs a rank-3 tensor field");
        let (nc, n) = (self.shape[0], self.shape[1]);
        let block = nc * n * n;
        let mut out = VectorField::zeros(self.grid, nc);
        for node in 0..self.grid.nodes() {
            for c in 0..nc {
                let mut acc = T::zero();
                for i in 0..n {
                    acc += self.values[node * block + c * n * n + i * n + i];
                }
                out.values[node * nc + c] = acc;
            }
        }
        out
    }
}

impl<T: Real> NodalField<T> for TensorField<T> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn block(&self) -> usize {
        self.shape.iter().product()
    }

    fn data(&self) -> &[T] {
        &self.values
    }
}
