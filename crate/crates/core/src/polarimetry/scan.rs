use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::jones::{analyzer_projector, AnalyzerSetting, Projector};
use super::PolarimetryError;
use crate::linalg::kron;
use crate::state::DensityMatrix;

/// Minimum sampling density of a fringe scan, points per period of pi.
pub const MIN_POINTS_PER_PERIOD: f64 = 8.0;

/// `Tr(rho (ps x pi))`, clamped to `[0, 1]` against round-off.
pub fn coincidence_probability(dm: &DensityMatrix, ps: &Projector, pi: &Projector) -> f64 {
    let m = kron(ps.matrix(), pi.matrix());
    (dm.matrix() * m).trace().re.clamp(0.0, 1.0)
}

/// Coincidence probability against the idler analyzer angle `theta`, rad,
/// with `theta = 0` meaning vertical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub theta: Vec<f64>,
    pub probability: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.probability
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.probability
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `points` evenly spaced angles covering `[0, periods * pi]` inclusive.
pub fn theta_grid(points: usize, periods: f64) -> Vec<f64> {
    let span = periods * PI;
    let n = points.max(2);
    (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect()
}

pub(crate) fn check_theta_grid(theta: &[f64]) -> Result<(), PolarimetryError> {
    if theta.len() < 2 || theta.iter().any(|t| !t.is_finite()) {
        return Err(PolarimetryError::ScanTooSparse {
            points_per_period: 0.0,
        });
    }
    let lo = theta.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span < PI * (1.0 - 1e-12) {
        return Err(PolarimetryError::ScanTooShort { span });
    }
    let density = (theta.len() - 1) as f64 * PI / span;
    if density < MIN_POINTS_PER_PERIOD * (1.0 - 1e-12) {
        return Err(PolarimetryError::ScanTooSparse {
            points_per_period: density,
        });
    }
    Ok(())
}

fn scan_with(
    dm: &DensityMatrix,
    signal: &AnalyzerSetting,
    theta: &[f64],
    idler: impl Fn(f64) -> Projector,
) -> Result<Curve, PolarimetryError> {
    signal.validate()?;
    check_theta_grid(theta)?;
    let ps = analyzer_projector(signal);
    Ok(Curve {
        theta: theta.to_vec(),
        probability: theta
            .iter()
            .map(|&t| coincidence_probability(dm, &ps, &idler(t)))
            .collect(),
    })
}

/// Fringe with the idler analyzer linear at each `theta` from vertical.
pub fn visibility_scan(
    dm: &DensityMatrix,
    signal: &AnalyzerSetting,
    theta: &[f64],
) -> Result<Curve, PolarimetryError> {
    scan_with(dm, signal, theta, |t| {
        analyzer_projector(&AnalyzerSetting::linear_from_vertical(t))
    })
}

/// Same as [`visibility_scan`], with an idler wave plate adding `phase` to the
/// V component before the polarizer. Setting `phase = arg q` removes the
/// phase of the coherence from the fringe.
pub fn compensated_scan(
    dm: &DensityMatrix,
    signal: &AnalyzerSetting,
    theta: &[f64],
    phase: f64,
) -> Result<Curve, PolarimetryError> {
    scan_with(dm, signal, theta, |t| {
        Projector::linear_with_phase(t, phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarimetry::NamedBasis;
    use crate::spectral::OverlapResult;
    use crate::state::{bell_state, dm_from_overlap, BellKind};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_4;

    fn psi_plus() -> DensityMatrix {
        DensityMatrix::from_pure(&bell_state(BellKind::PsiPlus))
    }

    #[test]
    fn psi_plus_h_v_correlation() {
        let p = coincidence_probability(
            &psi_plus(),
            &Projector::named(NamedBasis::H),
            &Projector::named(NamedBasis::V),
        );
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn a_basis_fringe_formula() {
        // <A, theta| rho |A, theta> = 1/4 - (Re q / 2) sin 2 theta
        let dm =
            dm_from_overlap(&OverlapResult::explicit(0.5, 0.5, Complex64::new(0.4, 0.0))).unwrap();
        let p = coincidence_probability(
            &dm,
            &Projector::named(NamedBasis::A),
            &analyzer_projector(&AnalyzerSetting::linear_from_vertical(FRAC_PI_4)),
        );
        assert!((p - 0.05).abs() < 1e-14);
        for k in 0..20 {
            let t = 0.17 * k as f64;
            let p = coincidence_probability(
                &dm,
                &Projector::named(NamedBasis::A),
                &Projector::linear_with_phase(t, 0.0),
            );
            assert!((p - (0.25 - 0.2 * (2.0 * t).sin())).abs() < 1e-14);
        }
    }

    #[test]
    fn outcomes_sum_to_one() {
        let dm =
            dm_from_overlap(&OverlapResult::explicit(0.3, 0.7, Complex64::new(0.1, 0.2))).unwrap();
        for (a, b) in [
            (NamedBasis::H, NamedBasis::D),
            (NamedBasis::R, NamedBasis::A),
        ] {
            let mut sum = 0.0;
            for x in [a, a.orthogonal()] {
                for y in [b, b.orthogonal()] {
                    sum += coincidence_probability(&dm, &Projector::named(x), &Projector::named(y));
                }
            }
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn psi_plus_signal_v_fringe() {
        let c = visibility_scan(
            &psi_plus(),
            &AnalyzerSetting::named(NamedBasis::V),
            &theta_grid(33, 1.0),
        )
        .unwrap();
        assert!(c.min().abs() < 1e-15);
        assert!((c.max() - 0.5).abs() < 1e-15);
        // idler vertical never coincides with a V signal photon
        assert!(c.probability[0].abs() < 1e-15);
    }

    #[test]
    fn classical_mixture_is_flat() {
        let dm =
            dm_from_overlap(&OverlapResult::explicit(0.5, 0.5, Complex64::new(0.0, 0.0))).unwrap();
        let c = visibility_scan(
            &dm,
            &AnalyzerSetting::named(NamedBasis::A),
            &theta_grid(17, 1.0),
        )
        .unwrap();
        assert!(c.probability.iter().all(|p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn sparse_or_short_grids_rejected() {
        let dm = psi_plus();
        let s = AnalyzerSetting::named(NamedBasis::A);
        assert!(matches!(
            visibility_scan(&dm, &s, &theta_grid(8, 1.0)),
            Err(PolarimetryError::ScanTooSparse { .. })
        ));
        assert!(matches!(
            visibility_scan(&dm, &s, &theta_grid(40, 0.5)),
            Err(PolarimetryError::ScanTooShort { .. })
        ));
        assert!(visibility_scan(&dm, &s, &theta_grid(9, 1.0)).is_ok());
    }

    #[test]
    fn compensation_restores_full_fringe() {
        let q = Complex64::from_polar(0.4, 1.1);
        let dm = dm_from_overlap(&OverlapResult::explicit(0.5, 0.5, q)).unwrap();
        let s = AnalyzerSetting::named(NamedBasis::A);
        let c = compensated_scan(&dm, &s, &theta_grid(65, 1.0), q.arg()).unwrap();
        assert!((c.max() - 0.45).abs() < 1e-12);
        assert!((c.min() - 0.05).abs() < 1e-12);
    }
}
