use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{omega_to_nm, SpectralGrid};
use super::model::{Channel, PhaseMatchModel};
use super::quadrature::{integrate, trapezoid_weights};
use super::SpectralError;

/// Grid-sampled `A_HV(w1, w2)` and `A_VH(w1, w2)`; rows index `omega1` (H),
/// columns index `omega2` (V).
#[derive(Debug, Clone)]
pub struct BiphotonAmplitude {
    grid: SpectralGrid,
    a_hv: DMatrix<Complex64>,
    a_vh: DMatrix<Complex64>,
    normalized: bool,
}

impl BiphotonAmplitude {
    /// Wraps raw samples. The result is not normalized until
    /// [`BiphotonAmplitude::normalize`] is called.
    pub fn from_samples(
        grid: SpectralGrid,
        a_hv: DMatrix<Complex64>,
        a_vh: DMatrix<Complex64>,
    ) -> Result<Self, SpectralError> {
        let shape = grid.shape();
        if a_hv.shape() != shape || a_vh.shape() != shape {
            return Err(SpectralError::InvalidGrid(format!(
                "amplitude shapes {:?}/{:?} do not match grid {:?}",
                a_hv.shape(),
                a_vh.shape(),
                shape
            )));
        }
        Ok(Self {
            grid,
            a_hv,
            a_vh,
            normalized: false,
        })
    }

    /// Scales both channels jointly so that the total pair probability is 1.
    pub fn normalize(mut self) -> Result<Self, SpectralError> {
        let total = self.channel_norms();
        let total = total.0 + total.1;
        if !(total > 0.0 && total.is_finite()) {
            return Err(SpectralError::ChannelsOutsideGrid {
                channel: "HV+VH".into(),
                detail: "amplitude vanishes on the grid".into(),
            });
        }
        let s = Complex64::new(1.0 / total.sqrt(), 0.0);
        self.a_hv *= s;
        self.a_vh *= s;
        self.normalized = true;
        Ok(self)
    }

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

    /// `(int |a_hv|^2, int |a_vh|^2)` by the trapezoid rule.
    pub fn channel_norms(&self) -> (f64, f64) {
        (
            norm_sqr(&self.grid, &self.a_hv),
            norm_sqr(&self.grid, &self.a_vh),
        )
    }

    /// `sqrt(int |a_vh(w1, w2) - a_hv(w2, w1)|^2)`; zero for swap-symmetric
    /// amplitudes. Needs a square grid.
    pub fn swap_asymmetry_norm(&self) -> Result<f64, SpectralError> {
        require_square(&self.grid)?;
        let diff = &self.a_vh - self.a_hv.transpose();
        Ok(norm_sqr(&self.grid, &diff).sqrt())
    }
}

pub(crate) fn require_square(grid: &SpectralGrid) -> Result<(), SpectralError> {
    if grid.is_square() {
        Ok(())
    } else {
        Err(SpectralError::InvalidGrid(
            "swap-based integrals need identical omega1 and omega2 axes".into(),
        ))
    }
}

pub(crate) fn norm_sqr(grid: &SpectralGrid, m: &DMatrix<Complex64>) -> f64 {
    let w1 = trapezoid_weights(grid.omega1());
    let w2 = trapezoid_weights(grid.omega2());
    if grid.is_square() {
        // Pairing (i, j) with (j, i) makes the sum bit-identical for a
        // matrix and its transpose.
        let n = w1.len();
        let mut acc = 0.0;
        for j in 0..n {
            let mut inner = w1[j] * w1[j] * m[(j, j)].norm_sqr();
            for i in 0..j {
                inner += (w1[i] * w1[j]) * (m[(i, j)].norm_sqr() + m[(j, i)].norm_sqr());
            }
            acc += inner;
        }
        return acc;
    }
    let mut acc = 0.0;
    for (j, wj) in w2.iter().enumerate() {
        let col = m.column(j);
        let mut inner = 0.0;
        for (i, wi) in w1.iter().enumerate() {
            inner += wi * col[i].norm_sqr();
        }
        acc += wj * inner;
    }
    acc
}

/// Samples the model on the grid and normalizes each channel to its weight
/// (`hv_weight` and `1 - hv_weight`).
pub fn build_amplitudes(
    model: &PhaseMatchModel,
    grid: &SpectralGrid,
) -> Result<BiphotonAmplitude, SpectralError> {
    model.validate()?;
    check_resolution(model, grid)?;
    check_coverage(model, grid)?;

    let (n1, n2) = grid.shape();
    let columns: Vec<(Vec<Complex64>, Vec<Complex64>)> = grid
        .omega2()
        .par_iter()
        .map(|&w2| {
            let mut hv = Vec::with_capacity(n1);
            let mut vh = Vec::with_capacity(n1);
            for &w1 in grid.omega1() {
                let (a, b) = model.raw_amplitudes(w1, w2);
                hv.push(Complex64::new(a, 0.0));
                vh.push(Complex64::new(b, 0.0));
            }
            (hv, vh)
        })
        .collect();
    let mut a_hv = DMatrix::zeros(n1, n2);
    let mut a_vh = DMatrix::zeros(n1, n2);
    for (j, (hv, vh)) in columns.into_iter().enumerate() {
        a_hv.column_mut(j).copy_from_slice(&hv);
        a_vh.column_mut(j).copy_from_slice(&vh);
    }

    let (raw_hv, raw_vh) = (norm_sqr(grid, &a_hv), norm_sqr(grid, &a_vh));
    for (ch, raw) in [(Channel::Hv, raw_hv), (Channel::Vh, raw_vh)] {
        if !(raw > 0.0 && raw.is_finite()) {
            return Err(SpectralError::ChannelsOutsideGrid {
                channel: ch.label().into(),
                detail: "amplitude vanishes on the grid".into(),
            });
        }
    }
    a_hv *= Complex64::new((model.hv_weight / raw_hv).sqrt(), 0.0);
    a_vh *= Complex64::new(((1.0 - model.hv_weight) / raw_vh).sqrt(), 0.0);

    Ok(BiphotonAmplitude {
        grid: grid.clone(),
        a_hv,
        a_vh,
        normalized: true,
    })
}

const MIN_STEPS_PER_CHANNEL_WIDTH: f64 = 4.0;
const MIN_STEPS_PER_PUMP_WIDTH: f64 = 1.0;
const COVERAGE_WIDTHS: f64 = 3.0;

fn check_resolution(model: &PhaseMatchModel, grid: &SpectralGrid) -> Result<(), SpectralError> {
    let step = grid.max_step();
    for ch in [Channel::Hv, Channel::Vh] {
        let width = model.channel(ch).sigma_signal;
        if width < MIN_STEPS_PER_CHANNEL_WIDTH * step {
            return Err(SpectralError::GridTooCoarse {
                feature: format!("{} channel", ch.label()),
                width,
                step,
                required: MIN_STEPS_PER_CHANNEL_WIDTH,
            });
        }
    }
    let pump = model.pump_sigma();
    if pump < MIN_STEPS_PER_PUMP_WIDTH * step {
        return Err(SpectralError::GridTooCoarse {
            feature: "pump".into(),
            width: pump,
            step,
            required: MIN_STEPS_PER_PUMP_WIDTH,
        });
    }
    Ok(())
}

fn check_coverage(model: &PhaseMatchModel, grid: &SpectralGrid) -> Result<(), SpectralError> {
    let sum = model.pump_sum_omega();
    let inside = |w: f64, half: f64, (lo, hi): (f64, f64)| w - half >= lo && w + half <= hi;
    for ch in [Channel::Hv, Channel::Vh] {
        let shape = model.channel(ch);
        let (ws, wi) = shape.emission_center(sum);
        let half = COVERAGE_WIDTHS * shape.sigma_signal;
        // HV puts the signal on the H axis (omega1); VH puts it on omega2.
        let (sig_axis, idl_axis) = match ch {
            Channel::Hv => (grid.omega1_range(), grid.omega2_range()),
            Channel::Vh => (grid.omega2_range(), grid.omega1_range()),
        };
        if !inside(ws, half, sig_axis) || !inside(wi, half, idl_axis) {
            return Err(SpectralError::ChannelsOutsideGrid {
                channel: ch.label().into(),
                detail: format!(
                    "emission at ({:.2}, {:.2}) nm +/- {COVERAGE_WIDTHS} widths not inside [{:.2}, {:.2}] nm",
                    omega_to_nm(ws),
                    omega_to_nm(wi),
                    omega_to_nm(grid.omega1_range().1),
                    omega_to_nm(grid.omega1_range().0),
                ),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Single-photon spectral density in 1/(rad/s) on an increasing frequency
/// axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub polarization: Polarization,
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl Spectrum {
    pub fn total(&self) -> f64 {
        integrate(&self.omega, &self.intensity)
    }

    /// `(wavelength_nm, density per nm)` rows in increasing wavelength.
    pub fn wavelength_density(&self) -> Vec<(f64, f64)> {
        let mut rows: Vec<(f64, f64)> = self
            .omega
            .iter()
            .zip(&self.intensity)
            .map(|(&w, &s)| {
                let nm = omega_to_nm(w);
                // |d omega / d lambda| = omega / lambda
                (nm, s * w / nm)
            })
            .collect();
        rows.reverse();
        rows
    }

    /// Wavelengths (nm) of local maxima higher than `min_relative` of the
    /// global maximum.
    pub fn peaks_nm(&self, min_relative: f64) -> Vec<f64> {
        let max = self.intensity.iter().cloned().fold(0.0, f64::max);
        let s = &self.intensity;
        let mut out: Vec<f64> = (1..s.len().saturating_sub(1))
            .filter(|&k| s[k] >= s[k - 1] && s[k] > s[k + 1] && s[k] >= min_relative * max)
            .map(|k| omega_to_nm(self.omega[k]))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Single-photon spectrum of the H (resp. V) photon: `|a_hv + a_vh|^2`
/// integrated over the partner frequency.
pub fn marginal_spectrum(
    amp: &BiphotonAmplitude,
    pol: Polarization,
) -> Result<Spectrum, SpectralError> {
    if !amp.is_normalized() {
        return Err(SpectralError::Unnormalized);
    }
    let grid = amp.grid();
    let total = &amp.a_hv + &amp.a_vh;
    let (n1, n2) = grid.shape();
    let (omega, intensity) = match pol {
        Polarization::H => {
            let w2 = trapezoid_weights(grid.omega2());
            let dens = (0..n1)
                .map(|i| (0..n2).map(|j| w2[j] * total[(i, j)].norm_sqr()).sum())
                .collect();
            (grid.omega1().to_vec(), dens)
        }
        Polarization::V => {
            let w1 = trapezoid_weights(grid.omega1());
            let dens = (0..n2)
                .map(|j| (0..n1).map(|i| w1[i] * total[(i, j)].norm_sqr()).sum())
                .collect();
            (grid.omega2().to_vec(), dens)
        }
    };
    Ok(Spectrum {
        polarization: pol,
        omega,
        intensity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::nm_to_omega;

    fn grid(points: usize) -> SpectralGrid {
        SpectralGrid::from_wavelength_span(1505.0, 1610.0, points).unwrap()
    }

    #[test]
    fn paper_preset_normalizes_to_unit_probability() {
        let amp = build_amplitudes(&PhaseMatchModel::paper(), &grid(513)).unwrap();
        let (hv, vh) = amp.channel_norms();
        assert!((hv - 0.5).abs() < 1e-12);
        assert!((vh - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weights_split_probability() {
        let mut m = PhaseMatchModel::paper();
        m.hv_weight = 0.7;
        let amp = build_amplitudes(&m, &grid(513)).unwrap();
        let (hv, vh) = amp.channel_norms();
        assert!((hv - 0.7).abs() < 1e-12 && (vh - 0.3).abs() < 1e-12);
    }

    #[test]
    fn symmetric_model_has_zero_swap_asymmetry() {
        let amp = build_amplitudes(&PhaseMatchModel::symmetric(), &grid(513)).unwrap();
        assert_eq!(amp.swap_asymmetry_norm().unwrap(), 0.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = SpectralGrid::from_wavelength_span(1505.0, 1610.0, 64).unwrap();
        let err = build_amplitudes(&PhaseMatchModel::paper(), &g).unwrap_err();
        assert!(matches!(err, SpectralError::GridTooCoarse { .. }), "{err}");
    }

    #[test]
    fn narrow_pump_needs_finer_grid() {
        let mut m = PhaseMatchModel::symmetric();
        m.pump_linewidth_nm = 0.01;
        let err = build_amplitudes(&m, &grid(513)).unwrap_err();
        assert!(
            matches!(err, SpectralError::GridTooCoarse { ref feature, .. } if feature == "pump")
        );
    }

    #[test]
    fn channel_outside_grid_is_rejected() {
        let g = SpectralGrid::from_wavelength_span(1530.0, 1580.0, 257).unwrap();
        let err = build_amplitudes(&PhaseMatchModel::paper(), &g).unwrap_err();
        assert!(
            matches!(err, SpectralError::ChannelsOutsideGrid { .. }),
            "{err}"
        );
    }

    #[test]
    fn raw_samples_need_normalization_for_marginals() {
        let g = grid(65);
        let a = DMatrix::from_element(65, 65, Complex64::new(1.0, 0.0));
        let amp = BiphotonAmplitude::from_samples(g, a.clone(), a).unwrap();
        assert_eq!(
            marginal_spectrum(&amp, Polarization::H).unwrap_err(),
            SpectralError::Unnormalized
        );
        let amp = amp.normalize().unwrap();
        let s = marginal_spectrum(&amp, Polarization::H).unwrap();
        // constant amplitudes overlap completely: |a+a|^2 = 4|a|^2 = 2 * total
        assert!((s.total() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let g = grid(65);
        let a = DMatrix::zeros(65, 64);
        let b = DMatrix::zeros(65, 65);
        assert!(BiphotonAmplitude::from_samples(g, a, b).is_err());
    }

    #[test]
    fn disjoint_channels_give_two_peaks() {
        let amp = build_amplitudes(&PhaseMatchModel::paper(), &grid(513)).unwrap();
        let h = marginal_spectrum(&amp, Polarization::H).unwrap();
        let peaks = h.peaks_nm(0.05);
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        assert!((h.total() - 1.0).abs() < 1e-6, "{}", h.total());
    }

    #[test]
    fn wavelength_density_integrates_to_same_total() {
        let amp = build_amplitudes(&PhaseMatchModel::symmetric(), &grid(513)).unwrap();
        let s = marginal_spectrum(&amp, Polarization::V).unwrap();
        let rows = s.wavelength_density();
        let nm: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let d: Vec<f64> = rows.iter().map(|r| r.1).collect();
        assert!((integrate(&nm, &d) - s.total()).abs() < 1e-4);
        assert!(nm.windows(2).all(|p| p[1] > p[0]));
        assert!(nm_to_omega(nm[0]) > nm_to_omega(nm[1]));
    }
}
