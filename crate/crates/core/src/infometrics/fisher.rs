//! Fisher information of the uncertain measurement model.

use crate::dynamics::TargetState;
use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, Mat4, Vec4};
use crate::numeric::{integrate_pieces, std_normal_pdf, UniformTable};
use crate::sensing::{cell_mass, level_probability, Quantizer, Sensor, SignalModel};
use crate::tracking::ParticleCloud;

use super::FisherMatrix;

const KAPPA_REL_TOL: f64 = 1e-8;
const MAX_PANELS: usize = 400;

/// `∂h/∂x` for the attenuation model; the velocity components are zero.
pub fn amplitude_gradient(sensor: &Sensor, state: &TargetState, model: &SignalModel) -> Vec4 {
    let dx = state.x - sensor.x;
    let dy = state.y - sensor.y;
    let (gx, gy) = planar_gradient(dx, dy, model);
    Vec4::new(gx, gy, 0.0, 0.0)
}

/// Gradient of `h` with respect to target position, given the offset from the
/// sensor. Defined as zero at the sensor itself.
pub(crate) fn planar_gradient(dx: f64, dy: f64, model: &SignalModel) -> (f64, f64) {
    let d2 = dx * dx + dy * dy;
    let n = model.decay_exponent;
    if d2 == 0.0 && n != 2.0 {
        return (0.0, 0.0);
    }
    let atten = model.attenuation(d2);
    let h = (model.source_power / (1.0 + atten)).sqrt();
    let d_pow = if n == 2.0 { 1.0 } else { d2.powf(0.5 * (n - 2.0)) };
    let coef = -0.5 * model.atten_scale * n * h * d_pow / (1.0 + atten);
    (coef * dx, coef * dy)
}

fn outer_position(gx: f64, gy: f64, scale: f64) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = scale * gx * gx;
    m[(0, 1)] = scale * gx * gy;
    m[(1, 0)] = scale * gx * gy;
    m[(1, 1)] = scale * gy * gy;
    m
}

/// `p_s²·κ^A(h)`: the scalar multiplying `∇h∇hᵀ` in the analog Fisher
/// information, by adaptive quadrature over `z ∈ [-8σ, h + 8σ]`.
pub fn analog_gain(h: f64, ps: f64, sigma: f64) -> Result<f64> {
    if ps == 0.0 {
        return Ok(0.0);
    }
    let log_odds = if ps < 1.0 {
        ((1.0 - ps) / ps).ln()
    } else {
        f64::NEG_INFINITY
    };
    let integrand = |z: f64| {
        let t = (z - h) / sigma;
        let u = z / sigma;
        let a = ps * std_normal_pdf(t) / sigma;
        if a == 0.0 {
            return 0.0;
        }
        // (1 - p_s)·N(z; 0, σ²) relative to the signal branch
        let ratio = (log_odds + 0.5 * (t * t - u * u)).exp();
        (t / sigma).powi(2) * a / (1.0 + ratio)
    };
    let s = sigma;
    let points = [-8.0 * s, h - 8.0 * s, h - 2.0 * s, h, h + 2.0 * s, h + 8.0 * s];
    let r = integrate_pieces(integrand, &points, KAPPA_REL_TOL, 1e-300, MAX_PANELS);
    if !r.converged {
        return Err(Error::Quadrature {
            sensor: usize::MAX,
            amplitude: h,
            error: r.error,
        });
    }
    Ok(r.value)
}

/// `p_s²·κ^Q(h)`, summed over every level.
pub fn quantized_gain(h: f64, ps: f64, sigma: f64, quantizer: &Quantizer) -> f64 {
    quantized_gain_over(0..quantizer.levels, h, ps, sigma, quantizer, None)
}

/// Levels whose Gaussian-edge difference can contribute at amplitude `h`.
pub(crate) fn signal_window(h: f64, sigma: f64, q: &Quantizer) -> std::ops::Range<usize> {
    q.levels_touching(h - 12.0 * sigma, h + 12.0 * sigma)
}

pub(crate) fn quantized_gain_over(
    levels: std::ops::Range<usize>,
    h: f64,
    ps: f64,
    sigma: f64,
    q: &Quantizer,
    noise_cells: Option<&[f64]>,
) -> f64 {
    if ps == 0.0 {
        return 0.0;
    }
    let edge = |eta: f64| {
        if eta.is_finite() {
            let t = (eta - h) / sigma;
            (-0.5 * t * t).exp()
        } else {
            0.0
        }
    };
    let norm = 2.0 * std::f64::consts::PI * sigma * sigma;
    let mut total = 0.0;
    let mut lower = edge(q.thresholds[levels.start]);
    for l in levels {
        let upper = edge(q.thresholds[l + 1]);
        let diff = lower - upper;
        lower = upper;
        if diff == 0.0 {
            continue;
        }
        let pmf = match noise_cells {
            Some(c) => ps * cell_mass(l, h, sigma, q) + (1.0 - ps) * c[l],
            None => level_probability(l, h, ps, sigma, q),
        };
        // vanishing-probability cell
        if pmf < 1e-300 {
            continue;
        }
        total += ps * ps * diff * diff / (norm * pmf);
    }
    total
}

/// Standard FI of one sensor with analog data at a given state.
pub fn fi_analog_single(
    sensor: &Sensor,
    state: &TargetState,
    model: &SignalModel,
) -> Result<FisherMatrix> {
    let dx = state.x - sensor.x;
    let dy = state.y - sensor.y;
    let h = model.amplitude_at_sq_distance(dx * dx + dy * dy);
    let gain = analog_gain(h, sensor.sensing_prob, model.noise_std).map_err(|e| match e {
        Error::Quadrature {
            amplitude, error, ..
        } => Error::Quadrature {
            sensor: sensor.id,
            amplitude,
            error,
        },
        other => other,
    })?;
    let (gx, gy) = planar_gradient(dx, dy, model);
    Ok(FisherMatrix(outer_position(gx, gy, gain)))
}

/// Standard FI of one sensor with `M`-bit quantized data at a given state.
pub fn fi_quantized_single(
    sensor: &Sensor,
    state: &TargetState,
    model: &SignalModel,
    quantizer: &Quantizer,
) -> FisherMatrix {
    let dx = state.x - sensor.x;
    let dy = state.y - sensor.y;
    let h = model.amplitude_at_sq_distance(dx * dx + dy * dy);
    let gain = quantized_gain(h, sensor.sensing_prob, model.noise_std, quantizer);
    let (gx, gy) = planar_gradient(dx, dy, model);
    FisherMatrix(outer_position(gx, gy, gain))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorFisher {
    pub matrix: FisherMatrix,
    /// The cloud covariance needed diagonal jitter to invert.
    pub jittered: bool,
}

/// Inverse of the weighted particle covariance (Gaussian approximation of the
/// prior information).
pub fn prior_fisher(cloud: &ParticleCloud) -> PriorFisher {
    let cov = cloud.covariance();
    let (inv, jittered) = inverse_spd(&cov);
    let sym = 0.5 * (inv + inv.transpose());
    PriorFisher {
        matrix: FisherMatrix(sym),
        jittered,
    }
}

/// Particle average of the single-state FI, evaluated directly (one
/// quadrature per particle for analog data).
pub fn expected_fi(
    sensor: &Sensor,
    cloud: &ParticleCloud,
    model: &SignalModel,
    quantizer: Option<&Quantizer>,
) -> Result<FisherMatrix> {
    let mut acc = Mat4::zeros();
    for (s, w) in cloud.iter() {
        let fi = match quantizer {
            Some(q) => fi_quantized_single(sensor, s, model, q),
            None => fi_analog_single(sensor, s, model)?,
        };
        acc += w * fi.0;
    }
    Ok(FisherMatrix(acc))
}

/// `p_s²κ^A` and the conditional entropy of the analog mixture, tabulated over
/// the amplitude for one sensing probability.
#[derive(Debug, Clone)]
pub struct AmplitudeProfile {
    gain: UniformTable,
    cond_entropy: UniformTable,
    cutoff: f64,
    far_gain: f64,
    far_entropy: f64,
}

/// Beyond this many noise deviations the two branches do not overlap.
const PROFILE_SPAN: f64 = 16.0;
const PROFILE_POINTS: usize = 513;

impl AmplitudeProfile {
    pub fn new(ps: f64, sigma: f64) -> Result<Self> {
        let cutoff = PROFILE_SPAN * sigma;
        let mut err = None;
        let gain = UniformTable::tabulate(0.0, cutoff, PROFILE_POINTS, |h| {
            analog_gain(h, ps, sigma).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        });
        let cond_entropy = UniformTable::tabulate(0.0, cutoff, PROFILE_POINTS, |h| {
            super::mutual::conditional_entropy(h, ps, sigma).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        let binary = super::mutual::neg_xlnx(ps) + super::mutual::neg_xlnx(1.0 - ps);
        Ok(Self {
            gain,
            cond_entropy,
            cutoff,
            far_gain: ps / (sigma * sigma),
            far_entropy: binary + super::mutual::gaussian_entropy(sigma),
        })
    }

    pub fn gain(&self, h: f64) -> f64 {
        if h >= self.cutoff {
            self.far_gain
        } else {
            self.gain.eval(h)
        }
    }

    /// Differential entropy (nats) of the measurement given amplitude `h`.
    pub fn conditional_entropy(&self, h: f64) -> f64 {
        if h >= self.cutoff {
            self.far_entropy
        } else {
            self.cond_entropy.eval(h)
        }
    }
}
