use serde::{Deserialize, Serialize};

use super::grid::{nm_to_omega, omega_to_nm, wavelength_width_to_omega, SpectralGrid};
use super::SpectralError;

/// Shape of the phase-matching factor along the mismatch coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    #[default]
    Gaussian,
    /// `sinc` amplitude, i.e. a `sinc^2` intensity profile with the same
    /// FWHM as the Gaussian of equal width.
    SincSquaredAmplitude,
}

/// One decay channel, described in (signal, idler) = (short, long) wavelength
/// coordinates.
///
/// The phase mismatch is modeled as linear in the detunings,
/// `delta = (w_s - w_s0) + shear * (w_i - w_i0)`. Along a CW pump line the
/// signal marginal then has rms width `width_nm`, and changing the pump moves
/// the emission point along a straight locus whose slope is set by `shear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Perfectly phase-matched signal (shorter) wavelength, nm.
    pub signal_nm: f64,
    /// Perfectly phase-matched idler (longer) wavelength, nm.
    pub idler_nm: f64,
    /// rms width of the signal marginal under a CW pump, nm.
    pub width_nm: f64,
    /// Ratio of idler to signal detuning sensitivity of the mismatch.
    #[serde(default = "default_shear")]
    pub shear: f64,
}

fn default_shear() -> f64 {
    -1.0
}

/// Optional phase-matching loci for sweep reports: polynomials in the pump
/// detuning `lambda_p - pump_nm` (nm), lowest order first, each giving a
/// wavelength in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Loci {
    pub hv_signal: Vec<f64>,
    pub hv_idler: Vec<f64>,
    pub vh_signal: Vec<f64>,
    pub vh_idler: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMatchModel {
    pub hv: ChannelSpec,
    pub vh: ChannelSpec,
    #[serde(default)]
    pub envelope: Envelope,
    pub pump_nm: f64,
    /// Pump intensity FWHM in nm.
    #[serde(default = "default_pump_linewidth")]
    pub pump_linewidth_nm: f64,
    /// Fraction of pairs emitted into the HV channel.
    #[serde(default = "default_weight")]
    pub hv_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loci: Option<Loci>,
}

/// Default CW pump FWHM. Narrower pumps need proportionally finer grids for
/// the trapezoid rule to resolve the anti-diagonal ridge.
pub const DEFAULT_PUMP_LINEWIDTH_NM: f64 = 0.2;

fn default_pump_linewidth() -> f64 {
    DEFAULT_PUMP_LINEWIDTH_NM
}

fn default_weight() -> f64 {
    0.5
}

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;
// sinc^2(x) = 1/2 at x = 1.391557; the Gaussian half-width at half maximum
// is sqrt(2 ln 2) sigma.
const SINC_SCALE: f64 = 1.391_557_378_251_51 / 1.177_410_022_515_474_6;

impl PhaseMatchModel {
    /// Calibrated model around the 777.9 nm operating point: HV pairs near
    /// (1537, 1575) nm, the VH channel sharing the same phase-matched point
    /// but with a broader spectrum and a different tuning slope.
    pub fn paper() -> Self {
        Self {
            hv: ChannelSpec {
                signal_nm: 1537.06,
                idler_nm: 1575.0,
                width_nm: 1.0,
                shear: -0.25,
            },
            vh: ChannelSpec {
                signal_nm: 1537.06,
                idler_nm: 1575.0,
                width_nm: 2.75,
                shear: -4.0,
            },
            envelope: Envelope::Gaussian,
            pump_nm: 777.9,
            pump_linewidth_nm: DEFAULT_PUMP_LINEWIDTH_NM,
            hv_weight: 0.5,
            loci: None,
        }
    }

    /// Both channels identical in (signal, idler) coordinates, so that
    /// `A_VH(w1, w2) = A_HV(w2, w1)`.
    pub fn symmetric() -> Self {
        let ch = ChannelSpec {
            signal_nm: 1537.06,
            idler_nm: 1575.0,
            width_nm: 3.0,
            shear: -0.5,
        };
        Self {
            hv: ch.clone(),
            vh: ch,
            envelope: Envelope::Gaussian,
            pump_nm: 777.9,
            pump_linewidth_nm: DEFAULT_PUMP_LINEWIDTH_NM,
            hv_weight: 0.5,
            loci: None,
        }
    }

    /// Wavelength-degenerate pairs centered on 1555.8 nm, straddling a
    /// 1555.8 nm dichroic cut.
    pub fn degenerate() -> Self {
        let ch = ChannelSpec {
            signal_nm: 1555.8,
            idler_nm: 1555.8,
            width_nm: 4.0,
            shear: -0.5,
        };
        Self {
            hv: ch.clone(),
            vh: ch,
            envelope: Envelope::Gaussian,
            pump_nm: 777.9,
            pump_linewidth_nm: DEFAULT_PUMP_LINEWIDTH_NM,
            hv_weight: 0.5,
            loci: None,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper" => Some(Self::paper()),
            "symmetric" => Some(Self::symmetric()),
            "degenerate" => Some(Self::degenerate()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["paper", "symmetric", "degenerate"];

    pub fn with_pump(&self, pump_nm: f64) -> Self {
        Self {
            pump_nm,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |msg: String| Err(SpectralError::InvalidModel(msg));
        for (name, ch) in [("hv", &self.hv), ("vh", &self.vh)] {
            if !(ch.signal_nm.is_finite() && ch.idler_nm.is_finite())
                || ch.signal_nm <= 0.0
                || ch.idler_nm <= 0.0
            {
                return bad(format!("{name}: center wavelengths must be positive"));
            }
            if ch.signal_nm > ch.idler_nm {
                return bad(format!(
                    "{name}: signal {} nm must not exceed idler {} nm",
                    ch.signal_nm, ch.idler_nm
                ));
            }
            if !(ch.width_nm > 0.0 && ch.width_nm.is_finite()) {
                return bad(format!("{name}: width must be > 0"));
            }
            if !ch.shear.is_finite() || (1.0 - ch.shear).abs() < 1e-6 {
                return bad(format!(
                    "{name}: shear {} makes the phase-matching ridge parallel to the pump line",
                    ch.shear
                ));
            }
        }
        if !(self.pump_nm > 0.0 && self.pump_nm.is_finite()) {
            return bad("pump wavelength must be > 0".into());
        }
        if !(self.pump_linewidth_nm > 0.0 && self.pump_linewidth_nm.is_finite()) {
            return bad("pump linewidth must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.hv_weight) {
            return bad(format!("hv_weight {} outside [0, 1]", self.hv_weight));
        }
        Ok(())
    }

    pub(crate) fn pump_sum_omega(&self) -> f64 {
        nm_to_omega(self.pump_nm)
    }

    /// rms width of the pump envelope in the sum frequency, rad/s.
    pub(crate) fn pump_sigma(&self) -> f64 {
        wavelength_width_to_omega(self.pump_linewidth_nm, self.pump_nm) / FWHM_PER_SIGMA
    }

    pub(crate) fn channel(&self, which: Channel) -> ChannelShape {
        let spec = match which {
            Channel::Hv => &self.hv,
            Channel::Vh => &self.vh,
        };
        ChannelShape::new(spec, self.envelope)
    }

    /// Unnormalized pump envelope at sum frequency `sum`.
    pub(crate) fn pump_amplitude(&self, sum: f64) -> f64 {
        let s = self.pump_sigma();
        let x = sum - self.pump_sum_omega();
        (-x * x / (4.0 * s * s)).exp()
    }

    /// Unnormalized `(A_HV, A_VH)` at `(omega1, omega2)` = (H, V) frequencies.
    pub fn raw_amplitudes(&self, omega1: f64, omega2: f64) -> (f64, f64) {
        let pump = self.pump_amplitude(omega1 + omega2);
        let hv = self.channel(Channel::Hv).phase_matching(omega1, omega2);
        let vh = self.channel(Channel::Vh).phase_matching(omega2, omega1);
        (pump * hv, pump * vh)
    }

    /// Square grid uniform in frequency covering both channels, `margin`
    /// widths beyond every emission point, for every pump wavelength in
    /// `[pump_lo_nm, pump_hi_nm]`.
    pub fn covering_grid(
        &self,
        pump_lo_nm: f64,
        pump_hi_nm: f64,
        margin: f64,
        points: usize,
    ) -> Result<SpectralGrid, SpectralError> {
        self.validate()?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for pump in [pump_lo_nm, pump_hi_nm] {
            let sum = nm_to_omega(pump);
            for ch in [Channel::Hv, Channel::Vh] {
                let shape = self.channel(ch);
                let (ws, wi) = shape.emission_center(sum);
                let half = margin * shape.sigma_signal;
                lo = lo.min(ws.min(wi) - half);
                hi = hi.max(ws.max(wi) + half);
            }
        }
        SpectralGrid::from_wavelength_span(omega_to_nm(hi), omega_to_nm(lo), points)
    }

    /// Phase-matched (hv_signal, hv_idler, vh_signal, vh_idler) wavelengths in
    /// nm at the given pump wavelength.
    pub fn phase_matched_wavelengths(&self, pump_nm: f64) -> [f64; 4] {
        if let Some(loci) = &self.loci {
            let d = pump_nm - self.pump_nm;
            return [
                eval_poly(&loci.hv_signal, d),
                eval_poly(&loci.hv_idler, d),
                eval_poly(&loci.vh_signal, d),
                eval_poly(&loci.vh_idler, d),
            ];
        }
        let sum = nm_to_omega(pump_nm);
        let (hs, hi) = self.channel(Channel::Hv).emission_center(sum);
        let (vs, vi) = self.channel(Channel::Vh).emission_center(sum);
        [
            omega_to_nm(hs),
            omega_to_nm(hi),
            omega_to_nm(vs),
            omega_to_nm(vi),
        ]
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Channel {
    Hv,
    Vh,
}

impl Channel {
    pub(crate) fn label(self) -> &'static str {
        match self {
            Channel::Hv => "HV",
            Channel::Vh => "VH",
        }
    }
}

/// Phase-matching factor of one channel in (signal, idler) frequencies.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChannelShape {
    pub omega_s0: f64,
    pub omega_i0: f64,
    /// rms width of the signal marginal along a CW pump line, rad/s.
    pub sigma_signal: f64,
    pub shear: f64,
    envelope: Envelope,
}

impl ChannelShape {
    fn new(spec: &ChannelSpec, envelope: Envelope) -> Self {
        Self {
            omega_s0: nm_to_omega(spec.signal_nm),
            omega_i0: nm_to_omega(spec.idler_nm),
            sigma_signal: wavelength_width_to_omega(spec.width_nm, spec.signal_nm),
            shear: spec.shear,
            envelope,
        }
    }

    fn sigma_mismatch(&self) -> f64 {
        (1.0 - self.shear).abs() * self.sigma_signal
    }

    pub(crate) fn phase_matching(&self, omega_s: f64, omega_i: f64) -> f64 {
        let delta = (omega_s - self.omega_s0) + self.shear * (omega_i - self.omega_i0);
        let x = delta / self.sigma_mismatch();
        match self.envelope {
            Envelope::Gaussian => (-0.25 * x * x).exp(),
            Envelope::SincSquaredAmplitude => {
                let arg = SINC_SCALE * x;
                if arg.abs() < 1e-8 {
                    1.0
                } else {
                    arg.sin() / arg
                }
            }
        }
    }

    /// Intersection of the zero-mismatch ridge with the line
    /// `w_s + w_i = sum`.
    pub(crate) fn emission_center(&self, sum: f64) -> (f64, f64) {
        let k = self.omega_s0 + self.shear * self.omega_i0;
        let omega_i = (sum - k) / (1.0 - self.shear);
        (sum - omega_i, omega_i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PhaseMatchModel::PRESETS {
            PhaseMatchModel::preset(name).unwrap().validate().unwrap();
        }
        assert!(PhaseMatchModel::preset("nope").is_none());
    }

    #[test]
    fn paper_preset_conserves_energy_at_operating_point() {
        let m = PhaseMatchModel::paper();
        let inv = 1.0 / m.hv.signal_nm + 1.0 / m.hv.idler_nm;
        assert!((1.0 / inv - 777.9).abs() < 0.01);
    }

    #[test]
    fn emission_center_lies_on_both_lines() {
        let m = PhaseMatchModel::paper();
        let ch = m.channel(Channel::Vh);
        let sum = nm_to_omega(777.0);
        let (ws, wi) = ch.emission_center(sum);
        assert!(((ws + wi) - sum).abs() / sum < 1e-14);
        assert!(ch.phase_matching(ws, wi) > 1.0 - 1e-12);
    }

    #[test]
    fn emission_at_reference_pump_is_channel_center() {
        let m = PhaseMatchModel::paper();
        let [s, i, _, _] =
            m.phase_matched_wavelengths(1.0 / (1.0 / m.hv.signal_nm + 1.0 / m.hv.idler_nm));
        assert!((s - m.hv.signal_nm).abs() < 1e-9);
        assert!((i - m.hv.idler_nm).abs() < 1e-9);
    }

    #[test]
    fn loci_polynomials_override_model_loci() {
        let mut m = PhaseMatchModel::paper();
        m.loci = Some(Loci {
            hv_signal: vec![1537.0, -1.5],
            hv_idler: vec![1575.0, 4.0],
            vh_signal: vec![1537.0],
            vh_idler: vec![1575.0, 0.0, 1.0],
        });
        let l = m.phase_matched_wavelengths(778.9);
        assert_eq!(l, [1535.5, 1579.0, 1537.0, 1576.0]);
    }

    #[test]
    fn rejects_bad_models() {
        let mut m = PhaseMatchModel::paper();
        m.hv_weight = 1.5;
        assert!(m.validate().is_err());
        let mut m = PhaseMatchModel::paper();
        m.vh.width_nm = 0.0;
        assert!(m.validate().is_err());
        let mut m = PhaseMatchModel::paper();
        m.hv.shear = 1.0;
        assert!(m.validate().is_err());
        let mut m = PhaseMatchModel::paper();
        m.hv.signal_nm = 1600.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn sinc_envelope_has_gaussian_fwhm() {
        let mut m = PhaseMatchModel::symmetric();
        m.envelope = Envelope::SincSquaredAmplitude;
        let ch = m.channel(Channel::Hv);
        let half = 1.177_410_022_515_474_6 * ch.sigma_mismatch();
        let v = ch.phase_matching(ch.omega_s0 + half, ch.omega_i0);
        assert!((v * v - 0.5).abs() < 1e-9);
    }
}
