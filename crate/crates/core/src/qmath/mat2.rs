use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use super::eigen::hermitian2_eigenvalues;
use super::{QmathError, Tolerances};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(
            C64::new(a, 0.0),
            C64::new(b, 0.0),
            C64::new(c, 0.0),
            C64::new(d, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Mat2::new(ZERO, C64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Mat2::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0))
    }

    pub const fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn conj(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a.conj(), b.conj(), c.conj(), d.conj())
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a, c, b, d)
    }

    pub fn scale(&self, s: C64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a * s, b * s, c * s, d * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// `self * x * self†`
    #[inline]
    pub fn conjugate(&self, x: &Mat2) -> Mat2 {
        *self * *x * self.dagger()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).max_abs_diff(&Mat2::identity()) <= tol
    }

    /// Column-stacked vectorization: index `row + 2 * col`.
    pub fn vec(&self) -> [C64; 4] {
        let m = &self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1]]
    }

    pub fn unvec(v: &[C64; 4]) -> Self {
        Mat2::new(v[0], v[2], v[1], v[3])
    }

    /// `½ Σ |λ_i|` for a Hermitian matrix, via the closed-form spectrum.
    pub fn half_trace_norm_hermitian(&self) -> f64 {
        let [lo, hi] = hermitian2_eigenvalues(self.0[0][0].re, self.0[0][1], self.0[1][1].re);
        0.5 * (lo.abs() + hi.abs())
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::zero()
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Real Bloch vector `b` of `ρ = ½(I + b·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        BlochVector([
            polar.sin() * azimuth.cos(),
            polar.sin() * azimuth.sin(),
            polar.cos(),
        ])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn neg(&self) -> Self {
        BlochVector(self.0.map(|x| -x))
    }

    /// `b·σ` (no identity part).
    pub fn pauli_sum(&self) -> Mat2 {
        let [x, y, z] = self.0;
        Mat2::new(
            C64::new(z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(-z, 0.0),
        )
    }
}

/// A validated qubit density operator.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity against
    /// [`Tolerances::default`].
    pub fn new(m: Mat2) -> Result<Self, QmathError> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: Mat2, tol: &Tolerances) -> Result<Self, QmathError> {
        if !m.is_finite() {
            return Err(QmathError::NonFinite);
        }
        let herm = m.hermiticity_error();
        if herm > tol.hermitian {
            return Err(QmathError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(QmathError::TraceNotOne(tr.re));
        }
        let [lo, _] = hermitian2_eigenvalues(m.0[0][0].re, m.0[0][1], m.0[1][1].re);
        if lo < -tol.positivity {
            return Err(QmathError::NotPositive(lo));
        }
        Ok(DensityMatrix(m))
    }

    pub fn from_bloch(b: BlochVector) -> Result<Self, QmathError> {
        Self::new((Mat2::identity() + b.pauli_sum()).scale_re(0.5))
    }

    /// Pure state `|ψ⟩⟨ψ|` for an (unnormalized) amplitude pair.
    pub fn pure(a0: C64, a1: C64) -> Result<Self, QmathError> {
        let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(QmathError::NonFinite);
        }
        let (a0, a1) = (a0 / n, a1 / n);
        Self::new(Mat2::new(
            a0 * a0.conj(),
            a0 * a1.conj(),
            a1 * a0.conj(),
            a1 * a1.conj(),
        ))
    }

    /// Horizontal polarization, the first computational basis state.
    pub fn horizontal() -> Self {
        DensityMatrix(Mat2::real(1.0, 0.0, 0.0, 0.0))
    }

    /// Vertical polarization, the second computational basis state.
    pub fn vertical() -> Self {
        DensityMatrix(Mat2::real(0.0, 0.0, 0.0, 1.0))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::real(0.5, 0.0, 0.0, 0.5))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        let m = &self.0 .0;
        BlochVector([
            2.0 * m[0][1].re,
            -2.0 * m[0][1].im,
            (m[0][0] - m[1][1]).re,
        ])
    }

    /// `U ρ U†`, re-validated.
    pub fn evolve(&self, u: &Mat2) -> Result<Self, QmathError> {
        Self::new(u.conjugate(&self.0))
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix{:?}", self.0)
    }
}

/// `D(a, b) = ½‖a − b‖₁`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.0 - b.0).half_trace_norm_hermitian().clamp(0.0, 1.0)
}
