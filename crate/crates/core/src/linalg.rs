//! Small dense helpers shared by the state, tomography and metrics modules.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub(crate) type M2 = Matrix2<Complex64>;
pub(crate) type M4 = Matrix4<Complex64>;

/// Kronecker product of two 2x2 matrices; the left factor acts on the signal.
pub(crate) fn kron(a: &M2, b: &M2) -> M4 {
    let mut out = M4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian 4x4 matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &M4) -> (Vector4<f64>, M4) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vector4::zeros();
    let mut vectors = M4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Rebuilds `V diag(f(lambda)) V^dagger`.
pub(crate) fn spectral_map(values: &Vector4<f64>, vectors: &M4, f: impl Fn(f64) -> f64) -> M4 {
    let mut diag = M4::zeros();
    for i in 0..4 {
        diag[(i, i)] = Complex64::new(f(values[i]), 0.0);
    }
    vectors * diag * vectors.adjoint()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub(crate) fn psd_sqrt(m: &M4) -> M4 {
    let (values, vectors) = hermitian_eigen(m);
    spectral_map(&values, &vectors, |v| v.max(0.0).sqrt())
}

/// Closest unit-trace positive semidefinite matrix in Frobenius norm.
///
/// Eigenvalues are projected onto the probability simplex.
pub(crate) fn project_to_density(m: &M4) -> M4 {
    let (values, vectors) = hermitian_eigen(m);
    let projected = simplex_projection(values.as_slice());
    let v = Vector4::from_column_slice(&projected);
    let mut out = M4::zeros();
    for (i, &lambda) in v.iter().enumerate() {
        let col = vectors.column(i);
        out += (col * col.adjoint()) * Complex64::new(lambda, 0.0);
    }
    out
}

fn simplex_projection(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k as f64 + 1.0);
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|v| (v - shift).max(0.0)).collect()
}

/// Largest absolute entry of `m - m^dagger`.
pub(crate) fn hermiticity_defect(m: &M4) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_keeps_valid_distribution() {
        let p = simplex_projection(&[0.1, 0.2, 0.3, 0.4]);
        for (a, b) in p.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn simplex_projection_clips_negative_eigenvalue() {
        let p = simplex_projection(&[-0.1, 0.1, 0.3, 0.7]);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn kron_orders_signal_first() {
        let h = M2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let v = M2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        // H on signal, V on idler selects the HV basis state (index 1).
        let hv = kron(&h, &v);
        assert_eq!(hv[(1, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(hv.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }
}
