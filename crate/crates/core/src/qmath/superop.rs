use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;

use super::eigen::{hermitian4_eigenvalues, real_svd};
use super::mat2::Mat2;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Linear map on 2×2 operators, acting on the column-stacked vectorization
/// (`vec(X)[r + 2c] = X[r][c]`), so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Superoperator(pub [[C64; 4]; 4]);

/// `a ⊗ b` with the outer index taken from `a`.
pub fn kron(a: &Mat2, b: &Mat2) -> [[C64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.get(i, j) * b.get(k, l);
                }
            }
        }
    }
    out
}

impl Superoperator {
    pub const fn zero() -> Self {
        Superoperator([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut s = Self::zero();
        for k in 0..4 {
            s.0[k][k] = ONE;
        }
        s
    }

    /// `X ↦ U X U†`.
    pub fn from_unitary(u: &Mat2) -> Self {
        Superoperator(kron(&u.conj(), u))
    }

    /// `X ↦ A X B†` — one cross term of a Kraus-like expansion.
    pub fn sandwich(a: &Mat2, b: &Mat2) -> Self {
        Superoperator(kron(&b.conj(), a))
    }

    pub fn from_kraus(ops: &[Mat2]) -> Self {
        ops.iter()
            .map(|k| Self::from_unitary(k))
            .fold(Self::zero(), |acc, s| acc + s)
    }

    /// `X ↦ Xᵀ`.
    pub fn transpose_map() -> Self {
        let mut s = Self::zero();
        // vec index r + 2c -> c + 2r
        for r in 0..2 {
            for c in 0..2 {
                s.0[c + 2 * r][r + 2 * c] = ONE;
            }
        }
        s
    }

    /// `X ↦ tr(X) I/2`.
    pub fn completely_depolarizing() -> Self {
        let mut s = Self::zero();
        for row in [0, 3] {
            for col in [0, 3] {
                s.0[row][col] = C64::new(0.5, 0.0);
            }
        }
        s
    }

    pub fn scale(&self, w: f64) -> Self {
        Superoperator(self.0.map(|row| row.map(|z| z * w)))
    }

    pub fn scale_complex(&self, w: C64) -> Self {
        Superoperator(self.0.map(|row| row.map(|z| z * w)))
    }

    pub fn apply(&self, x: &Mat2) -> Mat2 {
        let v = x.vec();
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(self.0.iter()) {
            *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        Mat2::unvec(&out)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    /// Largest deviation of `vec(I)† S` from `vec(I)†`, i.e. of
    /// `tr(S(X))` from `tr(X)` on the matrix-unit basis.
    pub fn trace_preservation_error(&self) -> f64 {
        (0..4)
            .map(|col| {
                let target = if col == 0 || col == 3 { ONE } else { ZERO };
                (self.0[0][col] + self.0[3][col] - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Choi matrix `J = Σ_ij E_ij ⊗ S(E_ij)` via reshuffling:
    /// `J[2i + a][2j + b] = S[a + 2b][i + 2j]`.
    pub fn choi(&self) -> [[C64; 4]; 4] {
        let mut j = [[ZERO; 4]; 4];
        for i in 0..2 {
            for jj in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        j[2 * i + a][2 * jj + b] = self.0[a + 2 * b][i + 2 * jj];
                    }
                }
            }
        }
        j
    }

    /// Inverse of [`Superoperator::choi`].
    pub fn from_choi(choi: &[[C64; 4]; 4]) -> Self {
        let mut s = Self::zero();
        for i in 0..2 {
            for jj in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        s.0[a + 2 * b][i + 2 * jj] = choi[2 * i + a][2 * jj + b];
                    }
                }
            }
        }
        s
    }

    pub fn choi_hermiticity_error(&self) -> f64 {
        let j = self.choi();
        let mut m = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                m = m.max((j[r][c] - j[c][r].conj()).norm());
            }
        }
        m
    }

    pub fn choi_eigenvalues(&self) -> [f64; 4] {
        hermitian4_eigenvalues(&self.choi())
    }

    /// Smallest Choi eigenvalue; non-negative (within tolerance) exactly when
    /// the map is completely positive.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        self.choi_eigenvalues()[0]
    }

    fn real_embedding(&self) -> Vec<f64> {
        // [[Re, -Im], [Im, Re]] has the singular values of S, each doubled
        let n = 8;
        let mut e = vec![0.0; n * n];
        for i in 0..4 {
            for j in 0..4 {
                let z = self.0[i][j];
                e[i * n + j] = z.re;
                e[(i + 4) * n + (j + 4)] = z.re;
                e[(i + 4) * n + j] = z.im;
                e[i * n + (j + 4)] = -z.im;
            }
        }
        e
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [f64; 4] {
        let (sigma, _, _) = real_svd(&self.real_embedding(), 8);
        [sigma[0], sigma[2], sigma[4], sigma[6]]
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` for an exactly
    /// singular pivot.
    pub fn inverse(&self) -> Option<Self> {
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for col in 0..4 {
            let pivot = (col..4).max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))?;
            if a[pivot][col].norm() == 0.0 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col];
            for k in 0..4 {
                a[col][k] /= p;
                inv[col][k] /= p;
            }
            for row in 0..4 {
                if row == col {
                    continue;
                }
                let factor = a[row][col];
                if factor == ZERO {
                    continue;
                }
                for k in 0..4 {
                    a[row][k] -= factor * a[col][k];
                    inv[row][k] -= factor * inv[col][k];
                }
            }
        }
        Some(Superoperator(inv))
    }

    /// Moore–Penrose pseudo-inverse discarding singular values below
    /// `rel_cutoff * σ_max`. Also returns the retained rank.
    pub fn pseudo_inverse(&self, rel_cutoff: f64) -> (Self, usize) {
        let n = 8;
        let (sigma, u, v) = real_svd(&self.real_embedding(), n);
        let cut = rel_cutoff * sigma[0];
        let mut pinv = vec![0.0; n * n];
        let mut kept = 0;
        for (k, &s) in sigma.iter().enumerate() {
            if s <= cut || s == 0.0 {
                continue;
            }
            kept += 1;
            for i in 0..n {
                for j in 0..n {
                    pinv[i * n + j] += v[i * n + k] * u[j * n + k] / s;
                }
            }
        }
        // the embedding of S⁺ is the pseudo-inverse of the embedding
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = C64::new(pinv[i * n + j], pinv[(i + 4) * n + j]);
            }
        }
        (out, kept / 2)
    }

    /// Pauli transfer matrix `R[a][b] = ½ tr(σ_a S(σ_b))` with
    /// `σ_0 = I`. Real for Hermiticity-preserving maps; the largest discarded
    /// imaginary part is returned alongside.
    pub fn pauli_transfer(&self) -> ([[f64; 4]; 4], f64) {
        let basis = [
            Mat2::identity(),
            Mat2::sigma_x(),
            Mat2::sigma_y(),
            Mat2::sigma_z(),
        ];
        let mut r = [[0.0; 4]; 4];
        let mut imag = 0.0f64;
        for (b, sb) in basis.iter().enumerate() {
            let image = self.apply(sb);
            for (a, sa) in basis.iter().enumerate() {
                let z = (*sa * image).trace() * 0.5;
                r[a][b] = z.re;
                imag = imag.max(z.im.abs());
            }
        }
        (r, imag)
    }

    /// Linear part `T` of the affine Bloch-vector map `b ↦ T b + t`.
    pub fn bloch_linear_part(&self) -> [[f64; 3]; 3] {
        let (r, _) = self.pauli_transfer();
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = r[i + 1][j + 1];
            }
        }
        t
    }
}

impl Default for Superoperator {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Superoperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Superoperator[")?;
        for row in &self.0 {
            writeln!(f, "  {:?}", row)?;
        }
        write!(f, "]")
    }
}

impl Add for Superoperator {
    type Output = Superoperator;
    fn add(mut self, rhs: Superoperator) -> Superoperator {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Mul for Superoperator {
    type Output = Superoperator;
    /// Composition: `(A * B)(X) = A(B(X))`.
    fn mul(self, rhs: Superoperator) -> Superoperator {
        let mut out = Superoperator::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::DensityMatrix;

    fn hadamard() -> Mat2 {
        Mat2::real(1.0, 1.0, 1.0, -1.0).scale_re(std::f64::consts::FRAC_1_SQRT_2)
    }

    #[test]
    fn identity_choi_is_twice_the_bell_projector() {
        let ev = Superoperator::identity().choi_eigenvalues();
        for (v, e) in ev.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((v - e).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn depolarizing_choi_is_half_identity() {
        let j = Superoperator::completely_depolarizing().choi();
        for r in 0..4 {
            for c in 0..4 {
                let e = if r == c { 0.5 } else { 0.0 };
                assert!((j[r][c] - C64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn transpose_map_has_negative_choi_eigenvalue() {
        let min = Superoperator::transpose_map().min_choi_eigenvalue();
        assert!((min + 1.0).abs() < 1e-12, "{min}");
    }

    #[test]
    fn unitary_channel_is_cp_with_rank_one_choi() {
        let u = hadamard() * Mat2::diag(C64::new(1.0, 0.0), C64::from_polar(1.0, 0.7));
        let s = Superoperator::from_unitary(&u);
        let ev = s.choi_eigenvalues();
        assert!(ev[0] >= -1e-12);
        // rank one: three zero eigenvalues, one equal to 2
        assert!(ev[..3].iter().all(|x| x.abs() < 1e-12), "{ev:?}");
        assert!((ev[3] - 2.0).abs() < 1e-12);
        assert!(s.trace_preservation_error() < 1e-15);
    }

    #[test]
    fn apply_matches_direct_conjugation() {
        let u = hadamard();
        let rho = DensityMatrix::horizontal();
        let direct = u.conjugate(rho.matrix());
        let via = Superoperator::from_unitary(&u).apply(rho.matrix());
        assert!(direct.max_abs_diff(&via) < 1e-15);
    }

    #[test]
    fn sandwich_vectorizes_a_x_b_dagger() {
        let a = Mat2::new(
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(0.9, 0.0),
            C64::new(0.1, -0.4),
        );
        let b = hadamard() * Mat2::diag(C64::new(0.0, 1.0), C64::new(1.0, 0.0));
        let x = Mat2::real(0.1, 0.2, 0.3, 0.4);
        let direct = a * x * b.dagger();
        let via = Superoperator::sandwich(&a, &b).apply(&x);
        assert!(direct.max_abs_diff(&via) < 1e-15);
    }

    #[test]
    fn inverse_and_pseudo_inverse_agree_on_invertible_maps() {
        let u = hadamard();
        let s = Superoperator::from_unitary(&u) * Superoperator::completely_depolarizing().scale(0.3)
            + Superoperator::identity().scale(0.7);
        let inv = s.inverse().unwrap();
        assert!((s * inv).max_abs_diff(&Superoperator::identity()) < 1e-12);
        let (pinv, rank) = s.pseudo_inverse(1e-12);
        assert_eq!(rank, 4);
        assert!(pinv.max_abs_diff(&inv) < 1e-10);
    }

    #[test]
    fn singular_values_of_dephasing_map() {
        let mut s = Superoperator::identity();
        s.0[1][1] = C64::new(0.0, 0.25);
        s.0[2][2] = C64::new(0.0, -0.25);
        let sv = s.singular_values();
        for (v, e) in sv.iter().zip([1.0, 1.0, 0.25, 0.25]) {
            assert!((v - e).abs() < 1e-13, "{sv:?}");
        }
    }

    #[test]
    fn pauli_transfer_of_identity_is_identity() {
        let (r, imag) = Superoperator::identity().pauli_transfer();
        assert_eq!(imag, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }
}
