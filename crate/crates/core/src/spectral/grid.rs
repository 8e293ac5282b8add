use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Vacuum speed of light in m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum number of samples per grid axis.
pub const MIN_AXIS_POINTS: usize = 64;

/// `2 pi c` expressed in nm * rad/s.
const TWO_PI_C_NM: f64 = 2.0 * PI * SPEED_OF_LIGHT * 1e9;

pub fn nm_to_omega(lambda_nm: f64) -> f64 {
    TWO_PI_C_NM / lambda_nm
}

pub fn omega_to_nm(omega: f64) -> f64 {
    TWO_PI_C_NM / omega
}

/// Converts a small wavelength width at `center_nm` into angular frequency.
pub fn wavelength_width_to_omega(width_nm: f64, center_nm: f64) -> f64 {
    TWO_PI_C_NM * width_nm / (center_nm * center_nm)
}

/// Inverse of [`wavelength_width_to_omega`] at the given center frequency.
pub fn omega_width_to_nm(width: f64, center_omega: f64) -> f64 {
    TWO_PI_C_NM * width / (center_omega * center_omega)
}

/// Rectangular frequency grid.
///
/// Axes are angular frequencies in rad/s, strictly increasing. The overlap
/// integral evaluates `A_VH(omega2, omega1)` by transposition, which needs
/// both axes to be identical; [`SpectralGrid::square`] builds such grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    omega1: Vec<f64>,
    omega2: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(omega1: Vec<f64>, omega2: Vec<f64>) -> Result<Self, SpectralError> {
        check_axis("omega1", &omega1)?;
        check_axis("omega2", &omega2)?;
        Ok(Self { omega1, omega2 })
    }

    /// Same axis on both dimensions.
    pub fn square(axis: Vec<f64>) -> Result<Self, SpectralError> {
        Self::new(axis.clone(), axis)
    }

    /// Square grid uniform in angular frequency spanning the wavelength
    /// interval `[lambda_min_nm, lambda_max_nm]`.
    pub fn from_wavelength_span(
        lambda_min_nm: f64,
        lambda_max_nm: f64,
        points: usize,
    ) -> Result<Self, SpectralError> {
        if !(lambda_min_nm.is_finite() && lambda_max_nm.is_finite())
            || lambda_min_nm <= 0.0
            || lambda_min_nm >= lambda_max_nm
        {
            return Err(SpectralError::InvalidGrid(format!(
                "wavelength span [{lambda_min_nm}, {lambda_max_nm}] nm is not a valid interval"
            )));
        }
        if points < 2 {
            return Err(SpectralError::InvalidGrid(format!(
                "{points} points per axis, need at least {MIN_AXIS_POINTS}"
            )));
        }
        let lo = nm_to_omega(lambda_max_nm);
        let hi = nm_to_omega(lambda_min_nm);
        let step = (hi - lo) / (points - 1) as f64;
        let axis: Vec<f64> = (0..points)
            .map(|k| {
                if k == points - 1 {
                    hi
                } else {
                    lo + step * k as f64
                }
            })
            .collect();
        Self::square(axis)
    }

    pub fn omega1(&self) -> &[f64] {
        &self.omega1
    }

    pub fn omega2(&self) -> &[f64] {
        &self.omega2
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.omega1.len(), self.omega2.len())
    }

    pub fn is_square(&self) -> bool {
        self.omega1 == self.omega2
    }

    pub fn wavelengths1_nm(&self) -> Vec<f64> {
        self.omega1.iter().map(|&w| omega_to_nm(w)).collect()
    }

    pub fn wavelengths2_nm(&self) -> Vec<f64> {
        self.omega2.iter().map(|&w| omega_to_nm(w)).collect()
    }

    /// Largest spacing on either axis.
    pub fn max_step(&self) -> f64 {
        max_step(&self.omega1).max(max_step(&self.omega2))
    }

    /// Grid with every interval bisected (`2n - 1` points per axis).
    pub fn refined(&self) -> Self {
        Self {
            omega1: bisect(&self.omega1),
            omega2: bisect(&self.omega2),
        }
    }

    pub fn omega1_range(&self) -> (f64, f64) {
        (self.omega1[0], *self.omega1.last().unwrap())
    }

    pub fn omega2_range(&self) -> (f64, f64) {
        (self.omega2[0], *self.omega2.last().unwrap())
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<(), SpectralError> {
    if axis.len() < MIN_AXIS_POINTS {
        return Err(SpectralError::InvalidGrid(format!(
            "{name} has {} points, need at least {MIN_AXIS_POINTS}",
            axis.len()
        )));
    }
    if axis.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(SpectralError::InvalidGrid(format!(
            "{name} contains non-finite or non-positive frequencies"
        )));
    }
    if axis.windows(2).any(|p| p[1] <= p[0]) {
        return Err(SpectralError::InvalidGrid(format!(
            "{name} is not strictly increasing"
        )));
    }
    Ok(())
}

fn max_step(axis: &[f64]) -> f64 {
    axis.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max)
}

fn bisect(axis: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * axis.len() - 1);
    for p in axis.windows(2) {
        out.push(p[0]);
        out.push(0.5 * (p[0] + p[1]));
    }
    out.push(*axis.last().unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_round_trip() {
        for l in [777.9, 1537.0, 1575.0] {
            assert!((omega_to_nm(nm_to_omega(l)) - l).abs() < 1e-9);
        }
    }

    #[test]
    fn width_conversion_matches_finite_difference() {
        let (c, w) = (1550.0, 0.01);
        let fd = nm_to_omega(c - w / 2.0) - nm_to_omega(c + w / 2.0);
        let lin = wavelength_width_to_omega(w, c);
        assert!(((fd - lin) / lin).abs() < 1e-8);
    }

    #[test]
    fn rejects_short_axis() {
        let axis: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        assert!(matches!(
            SpectralGrid::square(axis),
            Err(SpectralError::InvalidGrid(_))
        ));
    }

    #[test]
    fn rejects_non_monotone_axis() {
        let mut axis: Vec<f64> = (1..=80).map(|k| k as f64).collect();
        axis.swap(3, 4);
        assert!(SpectralGrid::square(axis).is_err());
    }

    #[test]
    fn span_grid_endpoints() {
        let g = SpectralGrid::from_wavelength_span(1500.0, 1600.0, 101).unwrap();
        let (lo, hi) = g.omega1_range();
        assert_eq!(lo, nm_to_omega(1600.0));
        assert_eq!(hi, nm_to_omega(1500.0));
        assert!(g.is_square());
        assert_eq!(g.refined().shape(), (201, 201));
    }
}
