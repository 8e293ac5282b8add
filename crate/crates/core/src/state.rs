//! Two-qubit polarization states in the `HH, HV, VH, VV` basis (signal
//! first).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{hermitian_eigen, hermiticity_defect, M4};
use crate::spectral::OverlapResult;

/// Basis labels in storage order.
pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-POSITIVITY_TOL, 0)` read out as zero; anything lower is
/// rejected.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("matrix is not Hermitian (max |rho - rho^dagger| = {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("|q| = {q:.6} exceeds sqrt(p_hv p_vh) = {bound:.6}; the state would not be positive")]
    CauchySchwarz { q: f64, bound: f64 },
    #[error("invalid overlap coefficients: {0}")]
    InvalidOverlap(String),
    #[error("mixing weight {0} outside [0, 1]")]
    MixingOutOfRange(f64),
    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("unexpected basis labels {0:?}")]
    BasisMismatch(Vec<String>),
}

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(M4);

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self, StateError> {
        let defect = hermiticity_defect(&m);
        if defect > HERMITICITY_TOL {
            return Err(StateError::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(StateError::BadTrace(tr.re));
        }
        let (values, _) = hermitian_eigen(&m);
        if values[0] < -POSITIVITY_TOL {
            return Err(StateError::NotPositive(values[0]));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_trusted(m: M4) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(M4::identity() * Complex64::new(0.25, 0.0))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.vector();
        Self(v * v.adjoint())
    }

    /// Projector onto a single basis state, index in `HH, HV, VH, VV` order.
    pub fn basis_projector(index: usize) -> Self {
        let mut m = M4::zeros();
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<Complex64> {
        self.0
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// Eigenvalues, ascending, with values in `[-POSITIVITY_TOL, 0)` clamped
    /// to zero.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let (v, _) = hermitian_eigen(&self.0);
        let mut out = [0.0; 4];
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o = if *x < 0.0 && *x >= -POSITIVITY_TOL {
                0.0
            } else {
                *x
            };
        }
        out
    }

    /// Smallest eigenvalue before clamping.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.0).0[0]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Applies a two-qubit unitary: `U rho U^dagger`.
    pub fn transformed(&self, u: &Matrix4<Complex64>) -> Self {
        let m = u * self.0 * u.adjoint();
        Self((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("density matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6}{}",
            "",
            BASIS_LABELS.map(|l| format!("{l:>20}")).join("")
        )?;
        for (r, label) in BASIS_LABELS.iter().enumerate() {
            write!(f, "{label:>6}")?;
            for c in 0..4 {
                let z = self.0[(r, c)];
                write!(f, "{:>20}", format!("{:+.4}{:+.4}i", z.re, z.im))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixWire {
    basis: Vec<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let matrix = (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| [self.0[(r, c)].re, self.0[(r, c)].im])
                    .collect()
            })
            .collect();
        DensityMatrixWire {
            basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            matrix,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = DensityMatrixWire::deserialize(d)?;
        if wire.basis != BASIS_LABELS {
            return Err(D::Error::custom(StateError::BasisMismatch(wire.basis)));
        }
        let m = matrix_from_rows(&wire.matrix).map_err(D::Error::custom)?;
        DensityMatrix::new(m).map_err(D::Error::custom)
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<M4, String> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err("matrix must be 4x4".into());
    }
    let mut m = M4::zeros();
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = Complex64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

/// Unit-norm two-qubit state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: Vector4<Complex64>,
    label: String,
}

impl PureState {
    pub fn new(vector: Vector4<Complex64>, label: impl Into<String>) -> Result<Self, StateError> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self {
            vector,
            label: label.into(),
        })
    }

    pub fn vector(&self) -> &Vector4<Complex64> {
        &self.vector
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.vector.dotc(&other.vector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub fn label(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
        }
    }
}

pub fn bell_state(kind: BellKind) -> PureState {
    let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let v = match kind {
        BellKind::PsiPlus => Vector4::new(z, a, a, z),
        BellKind::PsiMinus => Vector4::new(z, a, -a, z),
        BellKind::PhiPlus => Vector4::new(a, z, z, a),
        BellKind::PhiMinus => Vector4::new(a, z, z, -a),
    };
    PureState {
        vector: v,
        label: kind.label().to_string(),
    }
}

/// `p_hv |HV><HV| + p_vh |VH><VH| + q |HV><VH| + q* |VH><HV|`.
pub fn dm_from_overlap(ov: &OverlapResult) -> Result<DensityMatrix, StateError> {
    let (p_hv, p_vh, q) = (ov.p_hv, ov.p_vh, ov.q);
    if ![p_hv, p_vh, q.re, q.im].iter().all(|x| x.is_finite()) {
        return Err(StateError::InvalidOverlap("non-finite coefficient".into()));
    }
    if !(0.0..=1.0).contains(&p_hv) || !(0.0..=1.0).contains(&p_vh) {
        return Err(StateError::InvalidOverlap(format!(
            "populations ({p_hv}, {p_vh}) outside [0, 1]"
        )));
    }
    if (p_hv + p_vh - 1.0).abs() > TRACE_TOL {
        return Err(StateError::BadTrace(p_hv + p_vh));
    }
    let bound = (p_hv * p_vh).sqrt();
    if q.norm() > bound + 1e-12 {
        return Err(StateError::CauchySchwarz { q: q.norm(), bound });
    }
    let mut m = M4::zeros();
    m[(1, 1)] = Complex64::new(p_hv, 0.0);
    m[(2, 2)] = Complex64::new(p_vh, 0.0);
    m[(1, 2)] = q;
    m[(2, 1)] = q.conj();
    Ok(DensityMatrix(m))
}

/// `(1 - eps) rho + eps background`.
pub fn add_background(
    dm: &DensityMatrix,
    eps: f64,
    background: &DensityMatrix,
) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(StateError::MixingOutOfRange(eps));
    }
    let m = dm.0 * Complex64::new(1.0 - eps, 0.0) + background.0 * Complex64::new(eps, 0.0);
    Ok(DensityMatrix(m))
}

/// Werner state `p |bell><bell| + (1 - p) I/4`.
pub fn werner(p: f64, kind: BellKind) -> Result<DensityMatrix, StateError> {
    add_background(
        &DensityMatrix::from_pure(&bell_state(kind)),
        1.0 - p,
        &DensityMatrix::maximally_mixed(),
    )
}
