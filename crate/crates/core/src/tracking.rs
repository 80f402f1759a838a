//! SIR particle filter.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{propagate, MotionModel, TargetState};
use crate::error::{Error, Result};
use crate::linalg::{psd_factor, Mat4, Vec4};
use crate::sensing::{Measurement, Scene};

/// Gaussian prior on the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub mean: Vec4,
    pub cov: Mat4,
}

impl Prior {
    /// `N(mean, diag(σ², σ², v, v))` with position spread `σ` and velocity variance `v`.
    pub fn isotropic(mean: TargetState, position_std: f64, velocity_var: f64) -> Self {
        let s2 = position_std * position_std;
        Self {
            mean: mean.to_vector(),
            cov: Mat4::from_diagonal(&Vec4::new(s2, s2, velocity_var, velocity_var)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub states: Vec<TargetState>,
    pub weights: Vec<f64>,
}

impl ParticleCloud {
    pub fn new(states: Vec<TargetState>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::invalid(
                "cloud",
                format!("{} states vs {} weights", states.len(), weights.len()),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("weights", "must be non-negative and sum to 1"));
        }
        Ok(Self { states, weights })
    }

    pub fn uniform(states: Vec<TargetState>) -> Self {
        let w = 1.0 / states.len() as f64;
        let weights = vec![w; states.len()];
        Self { states, weights }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TargetState, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Weighted covariance of the full state.
    pub fn covariance(&self) -> Mat4 {
        let mean = estimate(self).to_vector();
        let mut cov = Mat4::zeros();
        for (s, w) in self.iter() {
            let d = s.to_vector() - mean;
            cov += w * d * d.transpose();
        }
        cov
    }

    pub fn effective_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

pub fn init_particles<R: Rng + ?Sized>(
    prior: &Prior,
    count: usize,
    rng: &mut R,
) -> Result<ParticleCloud> {
    if count == 0 {
        return Err(Error::invalid("particles", "count must be at least 1"));
    }
    let l = psd_factor(&prior.cov);
    let states = (0..count)
        .map(|_| {
            let n = Vec4::from_fn(|_, _| rng.sample(StandardNormal));
            TargetState::from_vector(&(prior.mean + l * n))
        })
        .collect();
    Ok(ParticleCloud::uniform(states))
}

/// Weighted mean of the particle states.
pub fn estimate(cloud: &ParticleCloud) -> TargetState {
    let mut acc = Vec4::zeros();
    for (s, w) in cloud.iter() {
        acc += w * s.to_vector();
    }
    TargetState::from_vector(&acc)
}

/// Propagates every particle through the motion model.
pub fn predict<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    model: &MotionModel,
    rng: &mut R,
) -> ParticleCloud {
    ParticleCloud {
        states: cloud
            .states
            .iter()
            .map(|s| propagate(s, model, rng))
            .collect(),
        weights: cloud.weights.clone(),
    }
}

/// Multiplies weights by the measurement likelihoods (in the log domain) and
/// renormalizes. Returns `true` when every weight underflowed and the cloud was
/// reset to uniform weights.
pub fn reweight(cloud: &mut ParticleCloud, measurements: &[Measurement], scene: &Scene) -> bool {
    if measurements.is_empty() {
        return false;
    }
    let log_w: Vec<f64> = cloud
        .iter()
        .map(|(s, w)| {
            measurements
                .iter()
                .fold(w.ln(), |acc, m| acc + scene.ln_likelihood(m, s))
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = cloud.len() as f64;
    if !max.is_finite() {
        cloud.weights.iter_mut().for_each(|w| *w = 1.0 / n);
        return true;
    }
    let mut total = 0.0;
    for (w, lw) in cloud.weights.iter_mut().zip(&log_w) {
        *w = (lw - max).exp();
        total += *w;
    }
    cloud.weights.iter_mut().for_each(|w| *w /= total);
    false
}

/// Systematic resampling: one uniform offset, `N` evenly spaced pointers.
pub fn systematic_resample<R: Rng + ?Sized>(cloud: &ParticleCloud, rng: &mut R) -> ParticleCloud {
    let n = cloud.len();
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut states = Vec::with_capacity(n);
    let mut cumulative = cloud.weights[0];
    let mut i = 0;
    for _ in 0..n {
        while u > cumulative && i + 1 < n {
            i += 1;
            cumulative += cloud.weights[i];
        }
        states.push(cloud.states[i]);
        u += step;
    }
    ParticleCloud::uniform(states)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterStep {
    pub cloud: ParticleCloud,
    pub estimate: TargetState,
    /// Likelihoods underflowed for every particle; weights were reset.
    pub weights_reset: bool,
}

/// Measurement update, estimate, and resampling of an already predicted cloud.
pub fn correct<R: Rng + ?Sized>(
    mut predicted: ParticleCloud,
    measurements: &[Measurement],
    scene: &Scene,
    rng: &mut R,
) -> FilterStep {
    let weights_reset = reweight(&mut predicted, measurements, scene);
    let est = estimate(&predicted);
    FilterStep {
        cloud: systematic_resample(&predicted, rng),
        estimate: est,
        weights_reset,
    }
}

/// One full SIR iteration: propagate, weight, normalize, estimate, resample.
pub fn pf_step<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    model: &MotionModel,
    measurements: &[Measurement],
    scene: &Scene,
    rng: &mut R,
) -> FilterStep {
    let predicted = predict(cloud, model, rng);
    correct(predicted, measurements, scene, rng)
}
