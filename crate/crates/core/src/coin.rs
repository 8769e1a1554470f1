//! Two-level complex primitives for the polarization coin.
//!
//! Basis order is fixed to `(H, V)` everywhere: `|H⟩ = (1, 0)`, `|V⟩ = (0, 1)`,
//! and every 2×2 matrix is stored row-major in that order.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used by constructors and tags for physical states and operators.
pub const PHYSICAL_TOL: f64 = 1e-12;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `λ = e^{i2π/3}`.
fn lambda() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// A polarization amplitude pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinVector {
    pub h: C64,
    pub v: C64,
}

impl CoinVector {
    pub const fn new(h: C64, v: C64) -> Self {
        Self { h, v }
    }

    pub const fn horizontal() -> Self {
        Self::new(c(1.0, 0.0), c(0.0, 0.0))
    }

    pub const fn vertical() -> Self {
        Self::new(c(0.0, 0.0), c(1.0, 0.0))
    }

    pub const fn zero() -> Self {
        Self::new(c(0.0, 0.0), c(0.0, 0.0))
    }

    /// Builds a physical state, rejecting inputs whose norm² differs from 1 by more than 1e-12.
    pub fn normalized(h: C64, v: C64) -> Result<Self> {
        let s = Self::new(h, v);
        let n = s.norm_sqr();
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        if (n - 1.0).abs() > PHYSICAL_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn is_zero(&self) -> bool {
        self.h == C64::new(0.0, 0.0) && self.v == C64::new(0.0, 0.0)
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::new(self.h * a, self.v * a)
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.h, self.v]
    }

    /// Rescales to unit norm.
    pub fn unit(&self) -> Self {
        self.scale(C64::new(1.0 / self.norm_sqr().sqrt(), 0.0))
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CoinOperator {
        CoinOperator::outer(self, self)
    }
}

impl Add for CoinVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.h + o.h, self.v + o.v)
    }
}

impl Sub for CoinVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.h - o.h, self.v - o.v)
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &CoinVector, b: &CoinVector) -> C64 {
    a.h.conj() * b.h + a.v.conj() * b.v
}

/// Vertices of the qubit SIC tetrahedron, `i ∈ 1..=4`.
pub fn sic_vector(i: usize) -> Result<CoinVector> {
    let s3 = 3f64.sqrt();
    let r = c(1.0 / s3, 0.0);
    let t = c(2f64.sqrt() / s3, 0.0);
    match i {
        1 => Ok(CoinVector::horizontal()),
        2 => Ok(CoinVector::new(r, t)),
        3 => Ok(CoinVector::new(r, lambda() * t)),
        4 => Ok(CoinVector::new(r, lambda().conj() * t)),
        _ => Err(Error::IndexOutOfRange(i)),
    }
}

/// Initial coin states orthogonal to the matching tetrahedron vertex, `i ∈ 1..=4`.
pub fn initial_state(i: usize) -> Result<CoinVector> {
    let s3 = 3f64.sqrt();
    let r = c(1.0 / s3, 0.0);
    let t = c(2f64.sqrt() / s3, 0.0);
    match i {
        1 => Ok(CoinVector::vertical()),
        2 => Ok(CoinVector::new(t, -r)),
        3 => Ok(CoinVector::new(t, -lambda() * r)),
        4 => Ok(CoinVector::new(t, -lambda().conj() * r)),
        _ => Err(Error::IndexOutOfRange(i)),
    }
}

/// A 2×2 complex matrix acting on the coin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoinOperator(pub [[C64; 2]; 2]);

/// Result of [`CoinOperator::checks`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub unitary: bool,
    pub hermitian: bool,
    pub psd: bool,
}

impl CoinOperator {
    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Self(m)
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self([
            [c(m[0][0], 0.0), c(m[0][1], 0.0)],
            [c(m[1][0], 0.0), c(m[1][1], 0.0)],
        ])
    }

    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn zero() -> Self {
        Self::from_real([[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn sigma_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &CoinVector, b: &CoinVector) -> Self {
        Self([
            [a.h * b.h.conj(), a.h * b.v.conj()],
            [a.v * b.h.conj(), a.v * b.v.conj()],
        ])
    }

    pub fn entry(&self, r: usize, col: usize) -> C64 {
        self.0[r][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn apply(&self, x: &CoinVector) -> CoinVector {
        let m = &self.0;
        CoinVector::new(m[0][0] * x.h + m[0][1] * x.v, m[1][0] * x.h + m[1][1] * x.v)
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= a);
        out
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(c(a, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn entries(&self) -> impl Iterator<Item = &C64> {
        self.0.iter().flatten()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `M†M` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let h = (*self + self.adjoint()).scale_re(0.5);
        let a = h.0[0][0].re;
        let d = h.0[1][1].re;
        let b = h.0[0][1];
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.hermitian_eigenvalues()[0] >= -tol
    }

    /// Unitary, Hermitian and positive-semidefinite predicates at tolerance `tol`.
    pub fn checks(&self, tol: f64) -> Result<MatrixReport> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(MatrixReport {
            unitary: self.is_unitary(tol),
            hermitian: self.is_hermitian(tol),
            psd: self.is_psd(tol),
        })
    }
}

impl Mul for CoinOperator {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }
}

impl Add for CoinOperator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.0
            .iter_mut()
            .flatten()
            .zip(o.entries())
            .for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for CoinOperator {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for CoinOperator {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl std::iter::Sum for CoinOperator {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, m| acc + m)
    }
}

/// `min_φ ‖a − e^{iφ} b‖_F`, with the optimal phase taken from `Tr(b†a)`.
pub fn phase_invariant_distance(a: &CoinOperator, b: &CoinOperator) -> f64 {
    let overlap = (b.adjoint() * *a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    (*a - b.scale(phase)).frobenius_norm()
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CoinOperator, b: &CoinOperator) -> f64 {
    let [l0, l1] = (*a - *b).hermitian_eigenvalues();
    0.5 * (l0.abs() + l1.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn sic_vectors_match_closed_forms() {
        let s3 = 3f64.sqrt();
        assert_eq!(sic_vector(1).unwrap(), CoinVector::horizontal());
        let x2 = sic_vector(2).unwrap();
        assert!(close(x2.h, c(1.0 / s3, 0.0), 1e-15));
        assert!(close(x2.v, c(2f64.sqrt() / s3, 0.0), 1e-15));
        let x3 = sic_vector(3).unwrap();
        // √2·(−1 + √3 i)/2 / √3
        let v3 = c(-1.0, s3) * (2f64.sqrt() / (2.0 * s3));
        assert!(close(x3.v, v3, 1e-15));
        assert!(matches!(sic_vector(0), Err(Error::IndexOutOfRange(0))));
        assert!(matches!(sic_vector(5), Err(Error::IndexOutOfRange(5))));
    }

    #[test]
    fn initial_states_match_closed_forms() {
        let s3 = 3f64.sqrt();
        assert_eq!(initial_state(1).unwrap(), CoinVector::vertical());
        let p2 = initial_state(2).unwrap();
        assert!(close(p2.h, c(2f64.sqrt() / s3, 0.0), 1e-15));
        assert!(close(p2.v, c(-1.0 / s3, 0.0), 1e-15));
        let p4 = initial_state(4).unwrap();
        let v4 = -C64::from_polar(1.0, -2.0 * PI / 3.0) / s3;
        assert!(close(p4.v, v4, 1e-15));
        assert!(initial_state(7).is_err());
    }

    #[test]
    fn tetrahedron_geometry() {
        for i in 1..=4 {
            let xi = sic_vector(i).unwrap();
            let psi = initial_state(i).unwrap();
            assert!((xi.norm_sqr() - 1.0).abs() < 1e-15);
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
            assert!(inner(&psi, &xi).norm() < 1e-15);
            for j in 1..=4 {
                if i != j {
                    let o = inner(&xi, &sic_vector(j).unwrap()).norm_sqr();
                    assert!((o - 1.0 / 3.0).abs() < 1e-12);
                }
            }
        }
        let sum: CoinOperator = (1..=4)
            .map(|i| sic_vector(i).unwrap().projector().scale_re(0.5))
            .sum();
        assert!(sum.max_abs_diff(&CoinOperator::identity()) < 1e-12);
    }

    #[test]
    fn inner_examples() {
        let h = CoinVector::horizontal();
        assert_eq!(inner(&h, &h), c(1.0, 0.0));
        let o = inner(&sic_vector(1).unwrap(), &sic_vector(2).unwrap()).norm();
        assert!((o - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let a = CoinVector::new(c(0.0, 1.0), c(0.0, 0.0));
        // conjugate-linear in the first slot
        assert_eq!(inner(&a, &h), c(0.0, -1.0));
    }

    #[test]
    fn matrix_check_examples() {
        let sx = CoinOperator::sigma_x().checks(1e-12).unwrap();
        assert_eq!(
            sx,
            MatrixReport {
                unitary: true,
                hermitian: true,
                psd: false
            }
        );
        let e1 = sic_vector(1).unwrap().projector().scale_re(0.5);
        assert_eq!(
            e1.checks(1e-12).unwrap(),
            MatrixReport {
                unitary: false,
                hermitian: true,
                psd: true
            }
        );
        let bad = CoinOperator::new([[c(f64::NAN, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(bad.checks(1e-12), Err(Error::NonFinite)));
    }

    #[test]
    fn normalized_constructor_rejects_unnormalized() {
        assert!(CoinVector::normalized(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(CoinVector::normalized(c(0.6, 0.0), c(0.0, 0.8)).is_ok());
    }

    #[test]
    fn phase_invariant_distance_ignores_global_phase() {
        let u = CoinOperator::sigma_x();
        let v = u.scale(C64::from_polar(1.0, 0.7));
        assert!(phase_invariant_distance(&u, &v) < 1e-15);
        assert!(phase_invariant_distance(&u, &CoinOperator::identity()) > 1.0);
    }
}
