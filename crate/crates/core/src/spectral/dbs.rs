use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::{norm_sqr, BiphotonAmplitude};
use super::grid::{nm_to_omega, omega_to_nm, wavelength_width_to_omega, SpectralGrid};
use super::quadrature::trapezoid_weights;
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeModel {
    #[default]
    IdealStep,
    RaisedCosine,
}

/// Wavelength-selective splitter: shorter wavelengths are reflected into the
/// signal arm, longer ones transmitted into the idler arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichroicSplitter {
    pub cut_nm: f64,
    #[serde(default)]
    pub edge: EdgeModel,
    /// Full width of the raised-cosine transition, nm. Ignored by the ideal
    /// step.
    #[serde(default = "default_edge_width")]
    pub edge_width_nm: f64,
    /// Half-width of the band around the cut in which routed weight counts
    /// as leakage, nm.
    #[serde(default = "default_guard")]
    pub guard_nm: f64,
    #[serde(default = "default_threshold")]
    pub leakage_threshold: f64,
}

fn default_edge_width() -> f64 {
    10.0
}
fn default_guard() -> f64 {
    5.0
}
fn default_threshold() -> f64 {
    0.05
}

impl Default for DichroicSplitter {
    fn default() -> Self {
        Self {
            cut_nm: 1560.0,
            edge: EdgeModel::IdealStep,
            edge_width_nm: default_edge_width(),
            guard_nm: default_guard(),
            leakage_threshold: default_threshold(),
        }
    }
}

impl DichroicSplitter {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |m: String| Err(SpectralError::InvalidSplitter(m));
        if !(self.cut_nm > 0.0 && self.cut_nm.is_finite()) {
            return bad(format!("cut wavelength {} nm", self.cut_nm));
        }
        if !(self.edge_width_nm >= 0.0 && self.edge_width_nm.is_finite()) {
            return bad(format!("edge width {} nm must be >= 0", self.edge_width_nm));
        }
        if !(self.guard_nm >= 0.0 && self.guard_nm.is_finite()) {
            return bad(format!("guard band {} nm must be >= 0", self.guard_nm));
        }
        if !(self.leakage_threshold > 0.0 && self.leakage_threshold < 1.0) {
            return bad(format!(
                "leakage threshold {} must lie in (0, 1)",
                self.leakage_threshold
            ));
        }
        Ok(())
    }

    /// Power reflectivity into the signal arm at angular frequency `omega`.
    pub fn signal_fraction(&self, omega: f64) -> f64 {
        let cut = nm_to_omega(self.cut_nm);
        let x = omega - cut;
        let width = match self.edge {
            EdgeModel::IdealStep => 0.0,
            EdgeModel::RaisedCosine => wavelength_width_to_omega(self.edge_width_nm, self.cut_nm),
        };
        if width > 0.0 && x.abs() < 0.5 * width {
            0.5 * (1.0 + (PI * x / width).sin())
        } else if x > 0.0 {
            1.0
        } else if x < 0.0 {
            0.0
        } else {
            0.5
        }
    }

    fn in_guard(&self, omega: f64) -> bool {
        (omega_to_nm(omega) - self.cut_nm).abs() <= self.guard_nm
    }

    /// Routes every pair without judging the result.
    pub fn route(&self, amp: &BiphotonAmplitude) -> Result<SplitAmplitude, SpectralError> {
        self.validate()?;
        let grid = amp.grid().clone();
        let (n1, n2) = grid.shape();
        let arms = |axis: &[f64]| -> Vec<(f64, f64)> {
            axis.iter()
                .map(|&w| {
                    let r2 = self.signal_fraction(w);
                    (r2.sqrt(), (1.0 - r2).sqrt())
                })
                .collect()
        };
        let arm1 = arms(grid.omega1());
        let arm2 = arms(grid.omega2());
        let total = amp.a_hv() + amp.a_vh();

        let mut a_hv = DMatrix::zeros(n1, n2);
        let mut a_vh = DMatrix::zeros(n1, n2);
        let mut same_port = DMatrix::<Complex64>::zeros(n1, n2);
        for j in 0..n2 {
            let (r2, t2) = arm2[j];
            for i in 0..n1 {
                let (r1, t1) = arm1[i];
                let a = total[(i, j)];
                // H to signal, V to idler
                a_hv[(i, j)] = a * (r1 * t2);
                // V to signal, H to idler
                a_vh[(i, j)] = a * (t1 * r2);
                same_port[(i, j)] = a * ((r1 * r2).powi(2) + (t1 * t2).powi(2)).sqrt();
            }
        }

        // HV and VH emission into the same mode add coherently, so fractions
        // are taken relative to the norm of the summed amplitude.
        let total_weight = norm_sqr(&grid, &total);
        let same_port_weight = norm_sqr(&grid, &same_port) / total_weight;
        let guard_weight = guard_weight(self, &grid, &a_hv, &a_vh) / total_weight;
        let leakage = same_port_weight + guard_weight;
        Ok(SplitAmplitude {
            grid,
            a_hv,
            a_vh,
            normalized: amp.is_normalized(),
            total_weight,
            same_port_weight,
            guard_weight,
            leakage,
            leakage_threshold: self.leakage_threshold,
        })
    }
}

fn guard_weight(
    dbs: &DichroicSplitter,
    grid: &SpectralGrid,
    a_hv: &DMatrix<Complex64>,
    a_vh: &DMatrix<Complex64>,
) -> f64 {
    let w1 = trapezoid_weights(grid.omega1());
    let w2 = trapezoid_weights(grid.omega2());
    let g1: Vec<bool> = grid.omega1().iter().map(|&w| dbs.in_guard(w)).collect();
    let g2: Vec<bool> = grid.omega2().iter().map(|&w| dbs.in_guard(w)).collect();
    let mut acc = 0.0;
    for j in 0..w2.len() {
        for i in 0..w1.len() {
            if g1[i] || g2[j] {
                acc += w1[i] * w2[j] * (a_hv[(i, j)].norm_sqr() + a_vh[(i, j)].norm_sqr());
            }
        }
    }
    acc
}

/// Two-arm amplitudes after the dichroic.
///
/// `a_hv(w1, w2)` is the amplitude of an H photon at `w1` in the signal arm
/// with a V photon at `w2` in the idler arm; `a_vh(w1, w2)` is the amplitude
/// of a V photon at `w2` in the signal arm with an H photon at `w1` in the
/// idler arm.
#[derive(Debug, Clone)]
pub struct SplitAmplitude {
    pub(crate) grid: SpectralGrid,
    pub(crate) a_hv: DMatrix<Complex64>,
    pub(crate) a_vh: DMatrix<Complex64>,
    pub(crate) normalized: bool,
    /// `||A_HV + A_VH||^2` before routing.
    pub total_weight: f64,
    /// Fraction of the total routed to a single arm.
    pub same_port_weight: f64,
    /// Fraction of the total with either photon inside the guard band.
    pub guard_weight: f64,
    /// `same_port_weight + guard_weight`.
    pub leakage: f64,
    pub leakage_threshold: f64,
}

impl SplitAmplitude {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn a_hv(&self) -> &DMatrix<Complex64> {
        &self.a_hv
    }

    pub fn a_vh(&self) -> &DMatrix<Complex64> {
        &self.a_vh
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Whether the two-arm labeling holds to within the leakage threshold.
    pub fn approximation_valid(&self) -> bool {
        self.leakage <= self.leakage_threshold
    }

    pub fn require_valid(&self) -> Result<(), SpectralError> {
        if self.approximation_valid() {
            Ok(())
        } else {
            Err(SpectralError::LeakageThresholdExceeded {
                leakage: self.leakage,
                threshold: self.leakage_threshold,
            })
        }
    }
}

/// Routes the amplitude through the splitter and fails if the leakage
/// exceeds the splitter's threshold. Use [`DichroicSplitter::route`] to
/// inspect a failing split.
pub fn apply_dbs(
    amp: &BiphotonAmplitude,
    dbs: &DichroicSplitter,
) -> Result<SplitAmplitude, SpectralError> {
    if !amp.is_normalized() {
        return Err(SpectralError::Unnormalized);
    }
    let split = dbs.route(amp)?;
    split.require_valid()?;
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_step_routes_by_wavelength() {
        let d = DichroicSplitter::default();
        assert_eq!(d.signal_fraction(nm_to_omega(1537.0)), 1.0);
        assert_eq!(d.signal_fraction(nm_to_omega(1575.0)), 0.0);
        assert_eq!(d.signal_fraction(nm_to_omega(1560.0)), 0.5);
    }

    #[test]
    fn raised_cosine_is_monotone_and_centered() {
        let d = DichroicSplitter {
            edge: EdgeModel::RaisedCosine,
            ..DichroicSplitter::default()
        };
        assert!((d.signal_fraction(nm_to_omega(1560.0)) - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..=40 {
            let f = d.signal_fraction(nm_to_omega(1550.0 + 0.5 * k as f64));
            assert!(f <= prev + 1e-15);
            prev = f;
        }
        assert_eq!(d.signal_fraction(nm_to_omega(1570.0)), 0.0);
        assert_eq!(d.signal_fraction(nm_to_omega(1550.0)), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        for d in [
            DichroicSplitter {
                leakage_threshold: 1.0,
                ..Default::default()
            },
            DichroicSplitter {
                guard_nm: -1.0,
                ..Default::default()
            },
            DichroicSplitter {
                edge_width_nm: -0.1,
                ..Default::default()
            },
        ] {
            assert!(d.validate().is_err());
        }
    }
}
