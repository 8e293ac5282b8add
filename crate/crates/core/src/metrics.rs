//! Entanglement and fringe figures of merit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, psd_sqrt, M4};
use crate::polarimetry::{Curve, PolarimetryError};
use crate::state::{DensityMatrix, PureState};

/// Values below this are treated as zero in eigenvalue lists.
const EIGEN_FLOOR: f64 = 1e-12;

/// Relative rms residual above which a fitted fringe is flagged as not
/// sinusoidal.
pub const NON_SINUSOIDAL_THRESHOLD: f64 = 0.05;

fn sigma_y_sigma_y() -> M4 {
    let mut m = M4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`.
///
/// The `l_i` are the singular values of `W^T (sy x sy) W` with
/// `rho = W W^dag`, which equal the square roots of the eigenvalues of
/// `rho (sy x sy) rho* (sy x sy)` without taking square roots of tiny
/// numbers.
pub fn concurrence(dm: &DensityMatrix) -> f64 {
    let (values, vectors) = hermitian_eigen(dm.matrix());
    let mut w = vectors;
    for (k, &v) in values.iter().enumerate() {
        let s = if v < EIGEN_FLOOR { 0.0 } else { v.sqrt() };
        w.column_mut(k).scale_mut(s);
    }
    let tau = w.transpose() * sigma_y_sigma_y() * w;
    let mut l: Vec<f64> = tau
        .singular_values()
        .iter()
        .map(|&x| if x < EIGEN_FLOOR { 0.0 } else { x })
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0)
}

/// Pure-target fidelity `<psi| rho |psi>`.
pub fn fidelity(dm: &DensityMatrix, target: &PureState) -> f64 {
    let v = target.vector();
    (v.adjoint() * dm.matrix() * v)[(0, 0)].re.clamp(0.0, 1.0)
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` between two
/// mixed states.
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let s = psd_sqrt(a.matrix());
    let inner = s * b.matrix() * s;
    let (values, _) = hermitian_eigen(&inner);
    let t: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    (t * t).clamp(0.0, 1.0)
}

/// `(1/2) sum |eig(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a.matrix() - b.matrix()));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// `tr(rho^2)`, computed as the squared Frobenius norm.
pub fn purity(dm: &DensityMatrix) -> f64 {
    dm.matrix().norm_squared().clamp(0.25, 1.0)
}

/// Least-squares fit of `offset + b sin(2 theta) + c cos(2 theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub offset: f64,
    /// `sqrt(b^2 + c^2)`.
    pub amplitude: f64,
    /// `atan2(c, b)`, rad.
    pub phase: f64,
    /// `amplitude / offset`.
    pub visibility: f64,
    /// `-b / offset`: the signed visibility of the `sin 2 theta` component
    /// at the analyzer phase actually used. Equals `2 Re q` for an A-basis
    /// scan of the overlap family.
    pub phase_resolved: f64,
    /// Rms residual divided by the offset.
    pub relative_residual: f64,
    pub sinusoidal: bool,
}

pub fn fit_visibility(curve: &Curve) -> Result<VisibilityFit, PolarimetryError> {
    if curve.theta.len() != curve.probability.len() {
        return Err(PolarimetryError::InvalidDataset(format!(
            "curve has {} angles and {} values",
            curve.theta.len(),
            curve.probability.len()
        )));
    }
    crate::polarimetry::scan_check(&curve.theta)?;
    let n = curve.len();
    let design = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => 1.0,
        1 => (2.0 * curve.theta[r]).sin(),
        _ => (2.0 * curve.theta[r]).cos(),
    });
    let y = DVector::from_column_slice(&curve.probability);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| PolarimetryError::InvalidDataset(e.to_string()))?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let resid = &y - &design * &coef;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let amplitude = b.hypot(c);
    if !(a > 0.0) {
        return Ok(VisibilityFit {
            offset: a,
            amplitude,
            phase: c.atan2(b),
            visibility: 0.0,
            phase_resolved: 0.0,
            relative_residual: f64::INFINITY,
            sinusoidal: false,
        });
    }
    let relative_residual = rms / a;
    Ok(VisibilityFit {
        offset: a,
        amplitude,
        phase: c.atan2(b),
        visibility: amplitude / a,
        phase_resolved: -b / a,
        relative_residual,
        sinusoidal: relative_residual <= NON_SINUSOIDAL_THRESHOLD,
    })
}

/// Fitted fringe visibility `|B| / A`.
pub fn visibility(curve: &Curve) -> Result<f64, PolarimetryError> {
    fit_visibility(curve).map(|f| f.visibility)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCurve {
    pub label: String,
    pub curve: Curve,
}

impl LabeledCurve {
    pub fn new(label: impl Into<String>, curve: Curve) -> Self {
        Self {
            label: label.into(),
            curve,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveVisibility {
    pub label: String,
    pub visibility: f64,
    pub phase_resolved: f64,
    pub sinusoidal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub target: String,
    pub concurrence: f64,
    pub fidelity_to_target: f64,
    pub purity: f64,
    pub visibilities: Vec<CurveVisibility>,
}

impl EntanglementReport {
    pub fn visibility(&self, label: &str) -> Option<f64> {
        self.visibilities
            .iter()
            .find(|v| v.label == label)
            .map(|v| v.visibility)
    }
}

pub fn report(
    dm: &DensityMatrix,
    target: &PureState,
    scans: &[LabeledCurve],
) -> Result<EntanglementReport, PolarimetryError> {
    let visibilities = scans
        .iter()
        .map(|s| {
            let fit = fit_visibility(&s.curve)?;
            Ok(CurveVisibility {
                label: s.label.clone(),
                visibility: fit.visibility,
                phase_resolved: fit.phase_resolved,
                sinusoidal: fit.sinusoidal,
            })
        })
        .collect::<Result<_, PolarimetryError>>()?;
    Ok(EntanglementReport {
        target: target.label().to_string(),
        concurrence: concurrence(dm),
        fidelity_to_target: fidelity(dm, target),
        purity: purity(dm),
        visibilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarimetry::{theta_grid, visibility_scan, AnalyzerSetting, NamedBasis};
    use crate::spectral::OverlapResult;
    use crate::state::{bell_state, dm_from_overlap, werner, BellKind};
    use nalgebra::Matrix4;

    fn overlap_state(q: Complex64) -> DensityMatrix {
        dm_from_overlap(&OverlapResult::explicit(0.5, 0.5, q)).unwrap()
    }

    fn pure(kind: BellKind) -> DensityMatrix {
        DensityMatrix::from_pure(&bell_state(kind))
    }

    /// Square roots of the eigenvalues of `rho rho~` from a general complex
    /// eigensolver.
    fn brute_force_concurrence(dm: &DensityMatrix) -> f64 {
        let yy = sigma_y_sigma_y();
        let r: Matrix4<Complex64> = dm.matrix() * yy * dm.matrix().map(|z| z.conj()) * yy;
        let ev = r
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let mut l: Vec<f64> = ev.iter().map(|z| z.re.max(0.0).sqrt()).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    #[test]
    fn concurrence_reference_values() {
        assert!((concurrence(&pure(BellKind::PsiPlus)) - 1.0).abs() < 1e-12);
        assert!((concurrence(&pure(BellKind::PhiMinus)) - 1.0).abs() < 1e-12);
        assert_eq!(concurrence(&DensityMatrix::maximally_mixed()), 0.0);
        let dm = overlap_state(Complex64::new(0.26, 0.0));
        assert!((concurrence(&dm) - 0.52).abs() < 1e-12);
        assert!((brute_force_concurrence(&dm) - 0.52).abs() < 1e-6);
    }

    #[test]
    fn concurrence_of_werner_states() {
        // Werner(p) has concurrence max(0, (3p - 1) / 2).
        for p in [0.2, 1.0 / 3.0, 0.5, 0.7, 0.95] {
            let w = werner(p, BellKind::PsiPlus).unwrap();
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&w) - want).abs() < 1e-10, "p = {p}");
            assert!((brute_force_concurrence(&w) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn fidelity_and_purity_values() {
        let psi = bell_state(BellKind::PsiPlus);
        assert!((fidelity(&pure(BellKind::PsiPlus), &psi) - 1.0).abs() < 1e-15);
        assert!(fidelity(&pure(BellKind::PsiMinus), &psi).abs() < 1e-15);
        let dm = overlap_state(Complex64::new(0.26, 0.0));
        assert!((fidelity(&dm, &psi) - 0.76).abs() < 1e-12);
        assert!((purity(&dm) - 0.6352).abs() < 1e-12);
        assert!((purity(&DensityMatrix::maximally_mixed()) - 0.25).abs() < 1e-15);
        assert!((purity(&pure(BellKind::PhiPlus)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_state_fidelity_and_distance() {
        let a = pure(BellKind::PsiPlus);
        let b = werner(0.7, BellKind::PsiPlus).unwrap();
        // For a pure argument the Uhlmann fidelity is the quadratic form.
        let direct = fidelity(&b, &bell_state(BellKind::PsiPlus));
        assert!((state_fidelity(&a, &b) - direct).abs() < 1e-9);
        assert!((state_fidelity(&b, &b) - 1.0).abs() < 1e-9);
        assert!(trace_distance(&b, &b) < 1e-12);
        // Orthogonal pure states are perfectly distinguishable.
        assert!((trace_distance(&a, &pure(BellKind::PsiMinus)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visibility_of_reference_curves() {
        let theta = theta_grid(73, 1.0);
        let min_zero = Curve {
            theta: theta.clone(),
            probability: theta
                .iter()
                .map(|t| 0.5 * (1.0 + (2.0 * t).sin()))
                .collect(),
        };
        assert!((visibility(&min_zero).unwrap() - 1.0).abs() < 1e-12);
        let flat = Curve {
            theta: theta.clone(),
            probability: vec![0.25; theta.len()],
        };
        assert!(visibility(&flat).unwrap().abs() < 1e-12);
        let dm = overlap_state(Complex64::new(0.4, 0.0));
        let c = visibility_scan(&dm, &AnalyzerSetting::named(NamedBasis::A), &theta).unwrap();
        let fit = fit_visibility(&c).unwrap();
        assert!((fit.visibility - 0.8).abs() < 1e-9);
        assert!((fit.phase_resolved - 0.8).abs() < 1e-9);
        let mm = (c.max() - c.min()) / (c.max() + c.min());
        assert!((fit.visibility - mm).abs() < 1e-9);
        assert!(fit.sinusoidal && fit.relative_residual < 1e-9);
    }

    #[test]
    fn square_wave_is_flagged() {
        let theta = theta_grid(64, 1.0);
        let sq = Curve {
            theta: theta.clone(),
            probability: theta
                .iter()
                .map(|t| if (2.0 * t).sin() > 0.0 { 1.0 } else { 0.1 })
                .collect(),
        };
        assert!(!fit_visibility(&sq).unwrap().sinusoidal);
    }

    #[test]
    fn report_of_reference_states() {
        let theta = theta_grid(37, 1.0);
        let psi = bell_state(BellKind::PsiPlus);
        let scans = |dm: &DensityMatrix| {
            vec![
                LabeledCurve::new(
                    "HV",
                    visibility_scan(dm, &AnalyzerSetting::named(NamedBasis::V), &theta).unwrap(),
                ),
                LabeledCurve::new(
                    "DA",
                    visibility_scan(dm, &AnalyzerSetting::named(NamedBasis::A), &theta).unwrap(),
                ),
            ]
        };
        let p = pure(BellKind::PsiPlus);
        let r = report(&p, &psi, &scans(&p)).unwrap();
        assert_eq!(r.target, "psi_plus");
        assert!((r.concurrence - 1.0).abs() < 1e-12);
        assert!((r.fidelity_to_target - 1.0).abs() < 1e-12);
        assert!((r.purity - 1.0).abs() < 1e-12);
        assert!(r
            .visibilities
            .iter()
            .all(|v| (v.visibility - 1.0).abs() < 1e-9));

        let mm = DensityMatrix::maximally_mixed();
        let r = report(&mm, &psi, &scans(&mm)).unwrap();
        assert_eq!(r.concurrence, 0.0);
        assert!((r.fidelity_to_target - 0.25).abs() < 1e-15);
        assert!((r.purity - 0.25).abs() < 1e-15);
        assert!(r.visibilities.iter().all(|v| v.visibility.abs() < 1e-12));
        assert_eq!(r.visibility("DA"), Some(r.visibilities[1].visibility));
    }
}
