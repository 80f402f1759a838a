//! Target state and the constant-velocity motion model.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{psd_factor, Mat4, Vec4};

/// Position (m) and velocity (m/s), ordered `[x, y, vx, vy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl TargetState {
    pub const fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy }
    }

    pub fn to_vector(self) -> Vec4 {
        Vec4::new(self.x, self.y, self.vx, self.vy)
    }

    pub fn from_vector(v: &Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.vx.is_finite() && self.vy.is_finite()
    }

    /// Squared error of the position components only.
    pub fn position_sq_error(&self, other: &TargetState) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub sample_interval: f64,
    pub noise_intensity: f64,
    pub transition: Mat4,
    pub process_cov: Mat4,
    noise_factor: Mat4,
}

pub fn transition_matrix(dt: f64) -> Mat4 {
    Mat4::new(
        1.0, 0.0, dt, 0.0, //
        0.0, 1.0, 0.0, dt, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

pub fn process_covariance(dt: f64, q: f64) -> Mat4 {
    let a = dt.powi(3) / 3.0;
    let b = dt.powi(2) / 2.0;
    Mat4::new(
        a, 0.0, b, 0.0, //
        0.0, a, 0.0, b, //
        b, 0.0, dt, 0.0, //
        0.0, b, 0.0, dt,
    ) * q
}

pub fn build_motion_model(sample_interval: f64, noise_intensity: f64) -> Result<MotionModel> {
    if !(sample_interval > 0.0 && sample_interval.is_finite()) {
        return Err(Error::invalid(
            "sample_interval",
            format!("must be positive, got {sample_interval}"),
        ));
    }
    if !(noise_intensity >= 0.0 && noise_intensity.is_finite()) {
        return Err(Error::invalid(
            "noise_intensity",
            format!("must be non-negative, got {noise_intensity}"),
        ));
    }
    let process_cov = process_covariance(sample_interval, noise_intensity);
    Ok(MotionModel {
        sample_interval,
        noise_intensity,
        transition: transition_matrix(sample_interval),
        noise_factor: psd_factor(&process_cov),
        process_cov,
    })
}

impl MotionModel {
    /// Noise-free prediction `F·x`.
    pub fn predict(&self, state: &TargetState) -> TargetState {
        let dt = self.sample_interval;
        TargetState::new(
            state.x + dt * state.vx,
            state.y + dt * state.vy,
            state.vx,
            state.vy,
        )
    }

    /// A draw from `N(0, Q)`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec4 {
        let n = Vec4::from_fn(|_, _| rng.sample(StandardNormal));
        self.noise_factor * n
    }
}

/// One step of `x ← F·x + w`, `w ~ N(0, Q)`.
pub fn propagate<R: Rng + ?Sized>(
    state: &TargetState,
    model: &MotionModel,
    rng: &mut R,
) -> TargetState {
    let mean = model.predict(state).to_vector();
    if model.noise_intensity == 0.0 {
        return TargetState::from_vector(&mean);
    }
    TargetState::from_vector(&(mean + model.sample_noise(rng)))
}

/// Ground-truth path; element 0 is one propagation past `initial`.
pub fn generate_trajectory<R: Rng + ?Sized>(
    initial: &TargetState,
    model: &MotionModel,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<TargetState>> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    let mut out = Vec::with_capacity(steps);
    let mut cur = *initial;
    for _ in 0..steps {
        cur = propagate(&cur, model, rng);
        out.push(cur);
    }
    Ok(out)
}
