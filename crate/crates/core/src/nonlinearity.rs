//! Power-law ellipticity `B(s) = (μ + s)^(p-2)`, its energy density and the
//! structural constants that enter the a-priori estimates.
//!
//! Solver and audit code only talk to a [`Constitutive`] law, so another
//! coefficient family can be added without touching them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponent `p ∈ (1, 2]` and shift `μ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearityParams<T> {
    pub p: T,
    pub mu: T,
}

impl<T: Real> NonlinearityParams<T> {
    pub fn new(p: T, mu: T) -> Result<Self> {
        if !(p > T::one() && p <= T::of(2.0)) {
            return Err(Error::Domain(format!("p must lie in (1, 2], got {p}")));
        }
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be a finite value >= 0, got {mu}")));
        }
        Ok(Self { p, mu })
    }

    pub fn is_singular(&self) -> bool {
        self.mu == T::zero() && self.p < T::of(2.0)
    }
}

/// Value of a coefficient that may blow up at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient<T> {
    Finite(T),
    /// `μ = 0`, `s = 0`, `p < 2`: the coefficient is `+∞`.
    Singular,
}

impl<T: Real> Coefficient<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Coefficient::Finite(v) => Some(v),
            Coefficient::Singular => None,
        }
    }
}

/// `B(s) = (μ + s)^(p-2)`.
pub fn b_coeff<T: Real>(s: T, params: &NonlinearityParams<T>) -> Result<Coefficient<T>> {
    if !(s >= T::zero()) {
        return Err(Error::Domain(format!("gradient magnitude must be >= 0, got {s}")));
    }
    let base = params.mu + s;
    if params.p == T::of(2.0) {
        return Ok(Coefficient::Finite(T::one()));
    }
    if base == T::zero() {
        return Ok(Coefficient::Singular);
    }
    Ok(Coefficient::Finite(base.powf(params.p - T::of(2.0))))
}

/// `A(y) = B(√y)`, the coefficient as a function of the squared gradient.
pub fn a_coeff<T: Real>(y: T, params: &NonlinearityParams<T>) -> Result<Coefficient<T>> {
    if !(y >= T::zero()) {
        return Err(Error::Domain(format!("squared gradient must be >= 0, got {y}")));
    }
    b_coeff(y.sqrt(), params)
}

/// Closed-form energy density `G(y²) = (2/p)(μ+y)^p − (2μ/(p−1))(μ+y)^(p−1)`.
///
/// `y` is the gradient magnitude. The integration constant is the one fixed by
/// this closed form, so `G(0) = −2μ^p / (p(p−1))`.
pub fn g_density<T: Real>(y: T, params: &NonlinearityParams<T>) -> T {
    let p = params.p;
    let mu = params.mu;
    let z = mu + y;
    let two = T::of(2.0);
    let zp1 = z.powf(p - T::one());
    two / p * zp1 * z - two * mu / (p - T::one()) * zp1
}

/// Lower and upper envelopes of `G(y²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GBounds<T> {
    /// `(1/p)(μ+y)^p − C1 μ^p`, the envelope attained at `μ + y = 2μ`.
    pub lower: T,
    /// `(1/p)(μ+y)^p − C1 μ²`; not a valid bound for `μ < 1`, `p < 2`.
    pub lower_mu_squared: T,
    /// `(2/p)(μ+y)^p`.
    pub upper: T,
    /// `(2^p/p)(y^p + μ^p)`.
    pub upper_split: T,
}

pub fn g_bounds<T: Real>(y: T, params: &NonlinearityParams<T>) -> GBounds<T> {
    let p = params.p;
    let mu = params.mu;
    let zp = (mu + y).powf(p);
    let c1 = big_c1(p);
    GBounds {
        lower: zp / p - c1 * mu.powf(p),
        lower_mu_squared: zp / p - c1 * mu * mu,
        upper: T::of(2.0) / p * zp,
        upper_split: T::of(2.0).powf(p) / p * (y.powf(p) + mu.powf(p)),
    }
}

fn big_c1<T: Real>(p: T) -> T {
    T::of(2.0).powf(p) / (p * (p - T::one()))
}

/// Stress `S(ξ) = B(|ξ|) ξ` with the Frobenius norm, written into `out`.
/// At `ξ = 0` the continuous extension `S = 0` is used, also when `μ = 0`.
pub fn stress<T: Real>(grad: &[T], params: &NonlinearityParams<T>, out: &mut [T]) {
    let s = frobenius(grad);
    let factor = params.stress_factor(s);
    for (o, &g) in out.iter_mut().zip(grad) {
        *o = factor * g;
    }
}

pub(crate) fn frobenius<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Constants of the sandwich `c0 y^p − c1 ≤ G(y²) ≤ c̃0 y^p + c̃1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralConstants<T> {
    pub c0: T,
    /// `C1 μ²`, the published choice.
    pub c1: T,
    /// `C1 μ^p`, the value the minimisation at `z = 2μ` actually gives.
    pub c1_corrected: T,
    pub c0_tilde: T,
    /// `2^p / p`; dominates `(2^p/p) μ^p` only for `μ ≤ 1`.
    pub c1_tilde: T,
    #[serde(rename = "C1")]
    pub big_c1: T,
}

impl<T: Real> StructuralConstants<T> {
    pub fn c1_for(&self, convention: MuConvention) -> T {
        match convention {
            MuConvention::MuSquared => self.c1,
            MuConvention::MuPowerP => self.c1_corrected,
        }
    }
}

/// Which power of `μ` multiplies `C1` in the lower envelope of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuConvention {
    MuSquared,
    MuPowerP,
}

pub fn structural_constants<T: Real>(params: &NonlinearityParams<T>) -> StructuralConstants<T> {
    let p = params.p;
    let mu = params.mu;
    let big_c1 = big_c1(p);
    let tilde = T::of(2.0).powf(p) / p;
    StructuralConstants {
        c0: T::one() / p,
        c1: big_c1 * mu * mu,
        c1_corrected: big_c1 * mu.powf(p),
        c0_tilde: tilde,
        c1_tilde: tilde,
        big_c1,
    }
}

/// A coefficient law `S(ξ) = B(|ξ|) ξ` with an energy density `G` satisfying
/// `d/dy G(y²) = 2y B(y)`.
pub trait Constitutive<T: Real>: Sync {
    fn p(&self) -> T;

    fn mu(&self) -> T;

    /// `B(√(s2 + eps2))`, finite whenever `eps2 > 0` or `μ > 0`.
    fn coefficient_regularized(&self, s2: T, eps2: T) -> T;

    /// `B(s)·` applied to a gradient of magnitude `s`; `0` at `s = 0`.
    fn stress_factor(&self, s: T) -> T;

    /// `G(s²)` as a function of the gradient magnitude `s`.
    fn density(&self, s: T) -> T;

    fn structural(&self) -> StructuralConstants<T>;

    /// True when `B` is constant, so one linear solve is exact.
    fn is_linear(&self) -> bool;

    /// Energy density of the regularised law, `G(s² + eps2)`.
    fn density_regularized(&self, s2: T, eps2: T) -> T {
        self.density((s2 + eps2).sqrt())
    }
}

impl<T: Real> Constitutive<T> for NonlinearityParams<T> {
    fn p(&self) -> T {
        self.p
    }

    fn mu(&self) -> T {
        self.mu
    }

    fn coefficient_regularized(&self, s2: T, eps2: T) -> T {
        if self.is_linear() {
            return T::one();
        }
        (self.mu + (s2 + eps2).sqrt()).powf(self.p - T::of(2.0))
    }

    fn stress_factor(&self, s: T) -> T {
        if self.is_linear() {
            T::one()
        } else if s == T::zero() {
            T::zero()
        } else {
            (self.mu + s).powf(self.p - T::of(2.0))
        }
    }

    fn density(&self, s: T) -> T {
        g_density(s, self)
    }

    fn structural(&self) -> StructuralConstants<T> {
        structural_constants(self)
    }

    fn is_linear(&self) -> bool {
        self.p == T::of(2.0)
    }
}
