use std::f64::consts::{FRAC_PI_3, PI};

use serde::{Deserialize, Serialize};

use super::PolarimetryError;

/// Birefringent plate tilted about its fast axis to add phase between the
/// H and V components passing through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltPlate {
    /// Tilt from normal incidence, rad.
    pub tilt: f64,
    /// Birefringence `n_slow - n_fast`.
    pub birefringence: f64,
    pub thickness_um: f64,
    pub design_wavelength_nm: f64,
}

impl TiltPlate {
    /// Zero-order quarter-wave plate for `design_wavelength_nm`.
    pub fn quarter_wave(design_wavelength_nm: f64, birefringence: f64) -> Self {
        Self {
            tilt: 0.0,
            birefringence,
            thickness_um: design_wavelength_nm * 1e-3 / (4.0 * birefringence),
            design_wavelength_nm,
        }
    }

    pub fn with_tilt(self, tilt: f64) -> Self {
        Self { tilt, ..self }
    }

    pub fn validate(&self) -> Result<(), PolarimetryError> {
        if !(self.thickness_um > 0.0 && self.thickness_um.is_finite()) {
            return Err(PolarimetryError::InvalidPlate(format!(
                "thickness {} um must be > 0",
                self.thickness_um
            )));
        }
        if !(self.birefringence.is_finite() && self.birefringence != 0.0) {
            return Err(PolarimetryError::InvalidPlate(format!(
                "birefringence {} must be finite and nonzero",
                self.birefringence
            )));
        }
        if !(self.design_wavelength_nm > 0.0 && self.design_wavelength_nm.is_finite()) {
            return Err(PolarimetryError::InvalidPlate(format!(
                "design wavelength {} nm",
                self.design_wavelength_nm
            )));
        }
        if !(self.tilt.abs() < FRAC_PI_3) {
            return Err(PolarimetryError::TiltOutOfRange(self.tilt));
        }
        Ok(())
    }
}

/// Retardance of the tilted plate in the thin-plate model: the path through
/// the plate grows as `1/cos(tilt)`, so
/// `gamma = 2 pi dn d / (lambda cos(tilt))`. Increasing in `|tilt|`.
pub fn tilt_to_gamma(plate: &TiltPlate) -> Result<f64, PolarimetryError> {
    plate.validate()?;
    let opd_nm = plate.birefringence * plate.thickness_um * 1e3 / plate.tilt.cos();
    Ok(2.0 * PI * opd_nm / plate.design_wavelength_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn untilted_quarter_wave_is_quarter_wave() {
        let p = TiltPlate::quarter_wave(1560.0, 0.0092);
        assert!((tilt_to_gamma(&p).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_tilt() {
        let p = TiltPlate::quarter_wave(1560.0, 0.0092);
        let g10 = tilt_to_gamma(&p.with_tilt(10f64.to_radians())).unwrap();
        let g20 = tilt_to_gamma(&p.with_tilt(20f64.to_radians())).unwrap();
        assert!(g10 < g20);
    }

    #[test]
    fn full_wave_of_extra_path_adds_two_pi() {
        // Multi-order plate, 20 waves thick, so one extra wave needs a
        // moderate tilt: 1/cos(t) = 21/20.
        let lambda_nm = 1560.0;
        let dn = 0.0092;
        let thickness_um = 20.0 * lambda_nm * 1e-3 / dn;
        let p = TiltPlate {
            tilt: 0.0,
            birefringence: dn,
            thickness_um,
            design_wavelength_nm: lambda_nm,
        };
        let tilt = (20.0f64 / 21.0).acos();
        let extra_path_nm = dn * thickness_um * 1e3 * (1.0 / tilt.cos() - 1.0);
        assert!((extra_path_nm - lambda_nm).abs() < 1e-8);
        let d = tilt_to_gamma(&p.with_tilt(tilt)).unwrap() - tilt_to_gamma(&p).unwrap();
        assert!((d - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn invalid_plates_rejected() {
        let p = TiltPlate::quarter_wave(1560.0, 0.0092);
        assert!(matches!(
            tilt_to_gamma(&p.with_tilt(1.1)),
            Err(PolarimetryError::TiltOutOfRange(_))
        ));
        let thin = TiltPlate {
            thickness_um: 0.0,
            ..p
        };
        assert!(tilt_to_gamma(&thin).is_err());
    }
}
