//! Node-centred difference stencils used for norm reporting.

use super::{PaddedLayout, TensorField, VectorField};
use crate::scalar::Real;

/// Centred first differences, shape `[N, n]` per node.
pub fn gradient<T: Real>(u: &VectorField<T>) -> TensorField<T> {
    let grid = *u.grid();
    let (n, nc) = (grid.n(), u.components());
    let lay = PaddedLayout::new(&grid, nc);
    let pad = lay.pad(u.values());
    let inv2h = T::one() / (T::of(2.0) * grid.h::<T>());
    let mut out = TensorField::zeros(grid, vec![nc, n]);
    let block = nc * n;
    let vals = out.values_mut();
    for (node, &pn) in lay.interior.iter().enumerate() {
        for i in 0..n {
            let s = lay.strides[i];
            for c in 0..nc {
                vals[node * block + c * n + i] = (pad[(pn + s) * nc + c] - pad[(pn - s) * nc + c]) * inv2h;
            }
        }
    }
    out
}

/// Centred second differences, shape `[N, n, n]` per node. Mixed terms use
/// the four-point cross stencil.
pub fn second_derivatives<T: Real>(u: &VectorField<T>) -> TensorField<T> {
    let grid = *u.grid();
    let (n, nc) = (grid.n(), u.components());
    let lay = PaddedLayout::new(&grid, nc);
    let pad = lay.pad(u.values());
    let h = grid.h::<T>();
    let inv_h2 = T::one() / (h * h);
    let inv_4h2 = inv_h2 / T::of(4.0);
    let two = T::of(2.0);
    let mut out = TensorField::zeros(grid, vec![nc, n, n]);
    let block = nc * n * n;
    let vals = out.values_mut();
    for (node, &pn) in lay.interior.iter().enumerate() {
        for c in 0..nc {
            let at = |off: usize| pad[off * nc + c];
            let base = node * block + c * n * n;
            for i in 0..n {
                let si = lay.strides[i];
                vals[base + i * n + i] = (at(pn + si) - two * at(pn) + at(pn - si)) * inv_h2;
                for j in (i + 1)..n {
                    let sj = lay.strides[j];
                    let v = (at(pn + si + sj) - at(pn + si - sj) - at(pn - si + sj) + at(pn - si - sj)) * inv_4h2;
                    vals[base + i * n + j] = v;
                    vals[base + j * n + i] = v;
                }
            }
        }
    }
    out
}
