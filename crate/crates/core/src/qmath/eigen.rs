//! Small dense eigenvalue routines.
//!
//! Hermitian 2×2 spectra are computed in closed form. Larger Hermitian
//! matrices (the 4×4 Choi and Gram matrices) go through a cyclic Jacobi sweep
//! on the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is
//! the Hermitian spectrum with every eigenvalue doubled.

use num_complex::Complex64 as C64;

/// Off-diagonal Frobenius mass below which a Jacobi sweep stops.
pub const JACOBI_THRESHOLD: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a 2×2 Hermitian matrix `[[a, b], [conj(b), d]]`, ascending.
pub fn hermitian2_eigenvalues(a: f64, b: C64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix stored
/// row-major in `a` (`n * n` entries). Returns ascending eigenvalues and the
/// matching eigenvectors as columns of a row-major `n * n` matrix.
pub fn symmetric_jacobi(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    // one polishing sweep after the threshold is met; convergence is
    // quadratic so this takes the residual to rounding level
    let mut polish = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off == 0.0 || polish {
            break;
        }
        if off <= JACOBI_THRESHOLD * scale {
            polish = true;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    (values, vectors)
}

/// Ascending eigenvalues of a 4×4 Hermitian matrix (row-major).
pub fn hermitian4_eigenvalues(m: &[[C64; 4]; 4]) -> [f64; 4] {
    const N: usize = 8;
    let mut emb = vec![0.0; N * N];
    for i in 0..4 {
        for j in 0..4 {
            // symmetrize so a slightly non-Hermitian input still yields a
            // real symmetric embedding
            let h = 0.5 * (m[i][j] + m[j][i].conj());
            emb[i * N + j] = h.re;
            emb[(i + 4) * N + (j + 4)] = h.re;
            emb[(i + 4) * N + j] = h.im;
            emb[i * N + (j + 4)] = -h.im;
        }
    }
    let (values, _) = symmetric_jacobi(emb, N);
    // every eigenvalue appears twice in the embedding
    [values[0], values[2], values[4], values[6]]
}

/// Singular value decomposition of a real `n × n` matrix (row-major) via the
/// symmetric embedding `[[0, A], [Aᵀ, 0]]`, whose eigenvalues are `±σ_i`.
///
/// Returns singular values in descending order together with the left and
/// right singular vectors as columns of row-major `n × n` matrices. Vectors
/// belonging to zero singular values are not guaranteed to split cleanly and
/// should be ignored by callers (the pseudo-inverse discards them).
pub fn real_svd(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            emb[i * m + (n + j)] = a[i * n + j];
            emb[(n + j) * m + i] = a[i * n + j];
        }
    }
    let (values, vectors) = symmetric_jacobi(emb, m);
    // the n largest eigenvalues are +σ_i (descending once reversed)
    let mut sigma = Vec::with_capacity(n);
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * n];
    for (k, col) in (n..m).rev().enumerate() {
        sigma.push(values[col].max(0.0));
        let sqrt2 = std::f64::consts::SQRT_2;
        for row in 0..n {
            u[row * n + k] = sqrt2 * vectors[row * m + col];
            v[row * n + k] = sqrt2 * vectors[(n + row) * m + col];
        }
    }
    (sigma, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_2x2_matches_known_spectrum() {
        let [lo, hi] = hermitian2_eigenvalues(0.8, C64::new(0.0, 0.0), 0.2);
        assert!((lo - 0.2).abs() < 1e-15 && (hi - 0.8).abs() < 1e-15);
        // sigma_x
        let [lo, hi] = hermitian2_eigenvalues(0.0, C64::new(1.0, 0.0), 0.0);
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_diagonalizes_symmetric_3x3() {
        let a = vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let (vals, vecs) = symmetric_jacobi(a.clone(), 3);
        let s2 = 2f64.sqrt();
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        // A v = lambda v for each column
        for col in 0..3 {
            for row in 0..3 {
                let av: f64 = (0..3).map(|k| a[row * 3 + k] * vecs[k * 3 + col]).sum();
                assert!((av - vals[col] * vecs[row * 3 + col]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_reconstructs_matrix() {
        let a = [3.0, 1.0, -2.0, 0.5, 4.0, 1.0, -1.0, 2.0, 0.25];
        let (s, u, v) = real_svd(&a, 3);
        assert!(s[0] >= s[1] && s[1] >= s[2]);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| u[i * 3 + k] * s[k] * v[j * 3 + k]).sum();
                assert!((r - a[i * 3 + j]).abs() < 1e-12, "{r} vs {}", a[i * 3 + j]);
            }
        }
    }

    #[test]
    fn svd_of_rank_deficient_matrix_has_zero_singular_value() {
        let a = [1.0, 2.0, 2.0, 4.0];
        let (s, _, _) = real_svd(&a, 2);
        assert!((s[0] - 5.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-14);
    }

    #[test]
    fn hermitian4_handles_complex_entries() {
        // sigma_y ⊗ I has eigenvalues {-1,-1,1,1}
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let m = [[z, z, -i, z], [z, z, z, -i], [i, z, z, z], [z, i, z, z]];
        let ev = hermitian4_eigenvalues(&m);
        for (v, e) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }
}
