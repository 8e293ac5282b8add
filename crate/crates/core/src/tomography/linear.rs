use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::TomographyError;
use crate::linalg::{hermitian_eigen, kron, project_to_density, M2, M4};
use crate::polarimetry::{analyzer_projector, AnalyzerSetting, TomographyDataset};
use crate::state::DensityMatrix;

/// Relative singular-value cutoff for the rank of the measurement design.
const RANK_TOL: f64 = 1e-10;

fn paulis() -> [M2; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        M2::new(o, z, z, o),
        M2::new(z, o, o, z),
        M2::new(z, -i, i, z),
        M2::new(o, z, z, -o),
    ]
}

/// The 16 two-qubit Pauli products, `G[4a + b] = s_a x s_b`.
pub(crate) fn pauli_basis() -> Vec<M4> {
    let p = paulis();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(kron(a, b));
        }
    }
    out
}

pub(crate) fn measurement_operator(s: &AnalyzerSetting, i: &AnalyzerSetting) -> M4 {
    kron(
        analyzer_projector(s).matrix(),
        analyzer_projector(i).matrix(),
    )
}

/// Least-squares estimate that may be non-positive.
#[derive(Debug, Clone)]
pub struct LinearReconstruction {
    matrix: M4,
    /// Fitted intensity `tr X` in the units of the input rates.
    pub scale: f64,
    pub rank: usize,
    pub condition_number: f64,
    pub min_eigenvalue: f64,
}

impl LinearReconstruction {
    /// Hermitian, unit-trace estimate as solved, without any positivity fix.
    pub fn matrix(&self) -> &nalgebra::Matrix4<Complex64> {
        &self.matrix
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= -crate::state::POSITIVITY_TOL
    }

    /// The estimate as a density matrix, if it is already positive.
    pub fn density(&self) -> Option<DensityMatrix> {
        DensityMatrix::new(self.matrix).ok()
    }

    /// Nearest density matrix in Frobenius norm.
    pub fn projected(&self) -> DensityMatrix {
        let p = project_to_density(&self.matrix);
        DensityMatrix::from_trusted((p + p.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Rows of `[re, im]` pairs in `HH, HV, VH, VV` order.
    pub fn rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| [self.matrix[(r, c)].re, self.matrix[(r, c)].im])
                    .collect()
            })
            .collect()
    }
}

/// Solves `rate_k = tr(X M_k)` for Hermitian `X` and returns `X / tr X`.
pub fn linear_from_rates(
    settings: &[(AnalyzerSetting, AnalyzerSetting)],
    rates: &[f64],
) -> Result<LinearReconstruction, TomographyError> {
    if settings.len() != rates.len() {
        return Err(TomographyError::InvalidInput(format!(
            "{} settings but {} rates",
            settings.len(),
            rates.len()
        )));
    }
    if rates.iter().all(|&r| r == 0.0) {
        return Err(TomographyError::DegenerateDataset);
    }
    let basis = pauli_basis();
    let ops: Vec<M4> = settings
        .iter()
        .map(|(s, i)| measurement_operator(s, i))
        .collect();
    // X = sum_j x_j G_j / 4, so tr(X M) = sum_j x_j tr(G_j M) / 4 with real
    // coefficients.
    let design = DMatrix::from_fn(ops.len(), 16, |k, j| 0.25 * (basis[j] * ops[k]).trace().re);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax)
        .count();
    if rank < 16 {
        return Err(TomographyError::RankDeficient { rank });
    }
    let condition_number = smax / svd.singular_values.min();
    let y = DVector::from_column_slice(rates);
    let x = svd
        .solve(&y, RANK_TOL * smax)
        .map_err(|e| TomographyError::InvalidInput(e.to_string()))?;
    let scale = x[0];
    if !(scale > 0.0) {
        return Err(TomographyError::DegenerateDataset);
    }
    let mut m = M4::zeros();
    for (j, g) in basis.iter().enumerate() {
        m += g * Complex64::new(x[j] / (4.0 * scale), 0.0);
    }
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, _) = hermitian_eigen(&m);
    Ok(LinearReconstruction {
        matrix: m,
        scale,
        rank,
        condition_number,
        min_eigenvalue: values[0],
    })
}

/// Linear inversion of background-subtracted count rates.
pub fn linear_reconstruct(
    data: &TomographyDataset,
) -> Result<LinearReconstruction, TomographyError> {
    data.validate()?;
    let rates: Vec<f64> = data
        .records
        .iter()
        .map(|r| (r.counts as f64 - r.background as f64) / r.duration_s)
        .collect();
    linear_from_rates(&data.settings(), &rates)
}
