use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::linear::measurement_operator;
use super::{BackgroundHandling, TomographyError};
use crate::linalg::M4;
use crate::polarimetry::TomographyDataset;
use crate::state::DensityMatrix;

/// Counts, exposures and offsets in the form the likelihood needs.
///
/// The predicted mean for setting `k` is `n * a_k * p_k + b_k` with `a_k`
/// the duration, `p_k` the coincidence probability and `n` the detected
/// pair rate. `n` is not known in advance and is profiled out.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub ops: Vec<M4>,
    pub counts: Vec<f64>,
    pub exposure: Vec<f64>,
    pub offset: Vec<f64>,
    /// `sum_k c_k ln c_k - c_k - ln c_k!`, the part of the log-likelihood
    /// that does not depend on the state.
    pub constant: f64,
}

pub(crate) struct Evaluation {
    pub value: f64,
    pub intensity: f64,
    pub means: Vec<f64>,
}

impl Problem {
    pub fn new(data: &TomographyDataset, bg: BackgroundHandling) -> Result<Self, TomographyError> {
        data.validate()?;
        let mut counts = Vec::with_capacity(data.len());
        let mut offset = Vec::with_capacity(data.len());
        for r in &data.records {
            let (c, b) = match bg {
                BackgroundHandling::Offset => (r.counts as f64, r.background as f64),
                BackgroundHandling::Subtract => {
                    ((r.counts as f64 - r.background as f64).max(0.0), 0.0)
                }
            };
            counts.push(c);
            offset.push(b);
        }
        let constant = counts
            .iter()
            .map(|&c| {
                let sat = if c > 0.0 { c * c.ln() - c } else { 0.0 };
                sat - ln_gamma(c + 1.0)
            })
            .sum();
        Ok(Self {
            ops: data
                .records
                .iter()
                .map(|r| measurement_operator(&r.signal, &r.idler))
                .collect(),
            counts,
            exposure: data.records.iter().map(|r| r.duration_s).collect(),
            offset,
            constant,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.counts.iter().all(|&c| c == 0.0)
    }

    pub fn probabilities(&self, rho: &M4) -> Vec<f64> {
        self.ops
            .iter()
            .map(|m| (rho * m).trace().re.max(0.0))
            .collect()
    }

    /// Maximizes over the intensity `n >= 0`.
    fn profile_intensity(&self, p: &[f64]) -> f64 {
        let a: Vec<f64> = p.iter().zip(&self.exposure).map(|(p, t)| p * t).collect();
        let sum_a: f64 = a.iter().sum();
        let sum_c: f64 = self.counts.iter().sum();
        if !(sum_a > 0.0) {
            return 0.0;
        }
        if self.offset.iter().all(|&b| b == 0.0) {
            return sum_c / sum_a;
        }
        // Stationarity: g(n) = sum c a / (n a + b) - sum a, decreasing in n,
        // and g(sum c / sum a) <= 0.
        let g = |n: f64| -> f64 {
            let mut acc = -sum_a;
            for k in 0..a.len() {
                let mu = n * a[k] + self.offset[k];
                if self.counts[k] > 0.0 {
                    acc += self.counts[k] * a[k] / mu;
                }
            }
            acc
        };
        if g(0.0) <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, sum_c / sum_a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Log-likelihood without [`Problem::constant`]:
    /// `sum_k c_k ln(mu_k / c_k) - mu_k + c_k`, which stays near zero for
    /// good fits.
    pub fn evaluate(&self, rho: &M4) -> Result<Evaluation, TomographyError> {
        let probabilities = self.probabilities(rho);
        let intensity = self.profile_intensity(&probabilities);
        let mut value = 0.0;
        let mut means = Vec::with_capacity(self.ops.len());
        for k in 0..self.ops.len() {
            let mu = intensity * self.exposure[k] * probabilities[k] + self.offset[k];
            let c = self.counts[k];
            if c > 0.0 {
                if !(mu > 0.0) {
                    return Err(TomographyError::ZeroPredictedMean { index: k });
                }
                value += c * (mu / c).ln() - mu + c;
            } else {
                value -= mu;
            }
            means.push(mu);
        }
        Ok(Evaluation {
            value,
            intensity,
            means,
        })
    }

    /// `sum_k (d value / d p_k) M_k` at fixed intensity.
    pub fn probability_gradient(&self, e: &Evaluation) -> M4 {
        let mut r = M4::zeros();
        for k in 0..self.ops.len() {
            let c = self.counts[k];
            let ratio = if c > 0.0 { c / e.means[k] } else { 0.0 };
            let w = (ratio - 1.0) * e.intensity * self.exposure[k];
            r += self.ops[k] * Complex64::new(w, 0.0);
        }
        r
    }
}

/// Poisson log-likelihood of the observed counts under `dm`, with the
/// unknown pair rate set to its maximum-likelihood value. Background counts
/// enter as a known offset on each predicted mean.
pub fn log_likelihood(
    dm: &DensityMatrix,
    data: &TomographyDataset,
) -> Result<f64, TomographyError> {
    log_likelihood_with(dm, data, BackgroundHandling::Offset)
}

pub fn log_likelihood_with(
    dm: &DensityMatrix,
    data: &TomographyDataset,
    bg: BackgroundHandling,
) -> Result<f64, TomographyError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let p = Problem::new(data, bg)?;
    Ok(p.evaluate(dm.matrix())?.value + p.constant)
}
