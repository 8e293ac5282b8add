use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PolarimetryError;
use crate::linalg::M2;

const PROJECTOR_TOL: f64 = 1e-12;
const BASIS_MATCH_TOL: f64 = 1e-9;

fn rotation(theta: f64) -> M2 {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c).map(|x| Complex64::new(x, 0.0))
}

/// Jones matrix of a linear retarder with fast axis at `theta` from
/// horizontal and retardance `delta`.
pub fn retarder(theta: f64, delta: f64) -> Matrix2<Complex64> {
    let core = Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, delta),
    );
    rotation(theta) * core * rotation(-theta)
}

pub fn quarter_wave(theta: f64) -> Matrix2<Complex64> {
    retarder(theta, FRAC_PI_2)
}

pub fn half_wave(theta: f64) -> Matrix2<Complex64> {
    retarder(theta, PI)
}

/// Transmission axis of a linear polarizer at `theta` from horizontal.
pub fn linear_state(theta: f64) -> Vector2<Complex64> {
    Vector2::new(
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(theta.sin(), 0.0),
    )
}

/// The six canonical single-photon analyzer states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedBasis {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl NamedBasis {
    pub const ALL: [NamedBasis; 6] = [
        NamedBasis::H,
        NamedBasis::V,
        NamedBasis::D,
        NamedBasis::A,
        NamedBasis::R,
        NamedBasis::L,
    ];

    /// `H = (1, 0)`, `D = (1, 1)/sqrt 2`, `R = (1, -i)/sqrt 2` and their
    /// orthogonal partners.
    pub fn state(self) -> Vector2<Complex64> {
        let s = FRAC_1_SQRT_2;
        let (a, b) = match self {
            NamedBasis::H => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            NamedBasis::V => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            NamedBasis::D => (Complex64::new(s, 0.0), Complex64::new(s, 0.0)),
            NamedBasis::A => (Complex64::new(s, 0.0), Complex64::new(-s, 0.0)),
            NamedBasis::R => (Complex64::new(s, 0.0), Complex64::new(0.0, -s)),
            NamedBasis::L => (Complex64::new(s, 0.0), Complex64::new(0.0, s)),
        };
        Vector2::new(a, b)
    }

    /// Wave-plate angles `(qwp, hwp)` that select this state with the
    /// polarizer horizontal.
    pub fn plate_angles(self) -> (f64, f64) {
        match self {
            NamedBasis::H => (0.0, 0.0),
            NamedBasis::V => (0.0, FRAC_PI_4),
            NamedBasis::D => (0.0, FRAC_PI_8),
            NamedBasis::A => (0.0, -FRAC_PI_8),
            NamedBasis::R => (FRAC_PI_4, 0.0),
            NamedBasis::L => (-FRAC_PI_4, 0.0),
        }
    }

    pub fn orthogonal(self) -> NamedBasis {
        match self {
            NamedBasis::H => NamedBasis::V,
            NamedBasis::V => NamedBasis::H,
            NamedBasis::D => NamedBasis::A,
            NamedBasis::A => NamedBasis::D,
            NamedBasis::R => NamedBasis::L,
            NamedBasis::L => NamedBasis::R,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NamedBasis::H => "H",
            NamedBasis::V => "V",
            NamedBasis::D => "D",
            NamedBasis::A => "A",
            NamedBasis::R => "R",
            NamedBasis::L => "L",
        }
    }
}

impl fmt::Display for NamedBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedBasis {
    type Err = PolarimetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedBasis::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PolarimetryError::InvalidSetting(format!("unknown basis {s:?}")))
    }
}

/// One arm's analyzer: light passes the half-wave plate, then the
/// quarter-wave plate, then the polarizer. Angles in radians from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSetting {
    pub qwp_angle: f64,
    pub hwp_angle: f64,
    pub polarizer_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<NamedBasis>,
}

impl AnalyzerSetting {
    pub fn new(qwp_angle: f64, hwp_angle: f64, polarizer_angle: f64) -> Self {
        Self {
            qwp_angle,
            hwp_angle,
            polarizer_angle,
            basis: None,
        }
    }

    pub fn named(basis: NamedBasis) -> Self {
        let (qwp, hwp) = basis.plate_angles();
        Self {
            qwp_angle: qwp,
            hwp_angle: hwp,
            polarizer_angle: 0.0,
            basis: Some(basis),
        }
    }

    /// Linear analyzer at `theta` measured from vertical, set with the
    /// half-wave plate.
    pub fn linear_from_vertical(theta: f64) -> Self {
        Self::new(0.0, 0.5 * (FRAC_PI_2 - theta), 0.0)
    }

    /// The single-photon state this analyzer transmits, `J_hwp^dag J_qwp^dag |pol>`.
    pub fn analyzed_state(&self) -> Vector2<Complex64> {
        half_wave(self.hwp_angle).adjoint()
            * quarter_wave(self.qwp_angle).adjoint()
            * linear_state(self.polarizer_angle)
    }

    pub fn validate(&self) -> Result<(), PolarimetryError> {
        let angles = [self.qwp_angle, self.hwp_angle, self.polarizer_angle];
        if !angles.iter().all(|a| a.is_finite()) {
            return Err(PolarimetryError::InvalidSetting(format!(
                "non-finite analyzer angles {angles:?}"
            )));
        }
        if let Some(b) = self.basis {
            let got = Projector::from_state(&self.analyzed_state());
            let want = Projector::from_state(&b.state());
            let diff = (got.matrix() - want.matrix()).norm();
            if diff > BASIS_MATCH_TOL {
                return Err(PolarimetryError::BasisMismatch {
                    basis: b,
                    deviation: diff,
                });
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.basis {
            Some(b) => b.to_string(),
            None => format!(
                "q{:.2}/h{:.2}/p{:.2}",
                self.qwp_angle.to_degrees(),
                self.hwp_angle.to_degrees(),
                self.polarizer_angle.to_degrees()
            ),
        }
    }
}

/// Rank-1 single-photon measurement operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector(M2);

impl Projector {
    /// Projector onto the normalized direction of `v`.
    pub fn from_state(v: &Vector2<Complex64>) -> Self {
        let u = v / Complex64::new(v.norm(), 0.0);
        Self(u * u.adjoint())
    }

    pub fn named(basis: NamedBasis) -> Self {
        Self::from_state(&basis.state())
    }

    /// Linear analyzer at `theta` from vertical with an extra phase `phase`
    /// on the V component: `(sin theta, e^{i phase} cos theta)`.
    pub fn linear_with_phase(theta: f64, phase: f64) -> Self {
        Self::from_state(&Vector2::new(
            Complex64::new(theta.sin(), 0.0),
            Complex64::from_polar(theta.cos(), phase),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Largest of `|P - P^dag|`, `|P^2 - P|` and `|tr P - 1|`.
    pub fn defect(&self) -> f64 {
        let herm = (self.0 - self.0.adjoint()).camax();
        let idem = (self.0 * self.0 - self.0).camax();
        let tr = (self.0.trace() - Complex64::new(1.0, 0.0)).norm();
        herm.max(idem).max(tr)
    }

    pub fn is_valid(&self) -> bool {
        self.defect() <= PROJECTOR_TOL
    }
}

pub fn analyzer_projector(s: &AnalyzerSetting) -> Projector {
    Projector::from_state(&s.analyzed_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &M2, b: &M2) -> bool {
        (a - b).camax() < 1e-12
    }

    #[test]
    fn all_zero_angles_is_horizontal() {
        let p = analyzer_projector(&AnalyzerSetting::new(0.0, 0.0, 0.0));
        assert!(close(
            p.matrix(),
            &Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
        ));
    }

    #[test]
    fn hwp_at_22_5_gives_diagonal() {
        // HWP(22.5) = [[cos 45, sin 45], [sin 45, -cos 45]], applied to (1, 0).
        let p = analyzer_projector(&AnalyzerSetting::new(0.0, FRAC_PI_8, 0.0));
        let h = c(0.5, 0.0);
        assert!(close(p.matrix(), &Matrix2::new(h, h, h, h)));
    }

    #[test]
    fn qwp_at_45_gives_circular() {
        let p = analyzer_projector(&AnalyzerSetting::new(FRAC_PI_4, 0.0, 0.0));
        let m = p.matrix();
        assert!((m[(0, 0)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((m[(1, 1)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((m[(0, 1)].re).abs() < 1e-12 && (m[(0, 1)].im.abs() - 0.5).abs() < 1e-12);
        assert!((m[(1, 0)] - m[(0, 1)].conj()).norm() < 1e-12);
    }

    #[test]
    fn named_settings_match_named_states() {
        for b in NamedBasis::ALL {
            let s = AnalyzerSetting::named(b);
            s.validate().unwrap();
            assert!(
                close(
                    analyzer_projector(&s).matrix(),
                    Projector::named(b).matrix()
                ),
                "{b}"
            );
        }
    }

    #[test]
    fn named_pairs_are_complete() {
        for b in [NamedBasis::H, NamedBasis::D, NamedBasis::R] {
            let sum = Projector::named(b).matrix() + Projector::named(b.orthogonal()).matrix();
            assert!(close(&sum, &M2::identity()));
        }
    }

    #[test]
    fn mislabeled_basis_rejected() {
        let mut s = AnalyzerSetting::named(NamedBasis::D);
        s.basis = Some(NamedBasis::A);
        assert!(matches!(
            s.validate(),
            Err(PolarimetryError::BasisMismatch { .. })
        ));
        assert!(AnalyzerSetting::new(f64::NAN, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn linear_from_vertical_convention() {
        let v = AnalyzerSetting::linear_from_vertical(0.0);
        assert!(close(
            analyzer_projector(&v).matrix(),
            Projector::named(NamedBasis::V).matrix()
        ));
        let h = AnalyzerSetting::linear_from_vertical(FRAC_PI_2);
        assert!(close(
            analyzer_projector(&h).matrix(),
            Projector::named(NamedBasis::H).matrix()
        ));
        let t = 0.3;
        assert!(close(
            analyzer_projector(&AnalyzerSetting::linear_from_vertical(t)).matrix(),
            Projector::linear_with_phase(t, 0.0).matrix()
        ));
    }

    #[test]
    fn basis_names_parse() {
        assert_eq!("d".parse::<NamedBasis>().unwrap(), NamedBasis::D);
        assert!("X".parse::<NamedBasis>().is_err());
    }
}
