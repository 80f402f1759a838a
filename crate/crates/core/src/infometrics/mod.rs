//! Information measures used to rank sensors: expected Fisher information and
//! mutual information, computed from the predicted particle cloud.

mod fisher;
mod mutual;

use crate::error::Result;
use crate::linalg::Mat4;
use crate::sensing::{DataModel, Quantizer, Scene};
use crate::tracking::ParticleCloud;

pub use fisher::{
    amplitude_gradient, analog_gain, expected_fi, fi_analog_single, fi_quantized_single,
    prior_fisher, quantized_gain, AmplitudeProfile, PriorFisher,
};
pub use mutual::{conditional_entropy, mi_analog, mi_quantized, MiEstimate, MIN_MI_SAMPLES};

/// A 4×4 Fisher information matrix over `(x, y, ẋ, ẏ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix(pub Mat4);

impl FisherMatrix {
    pub fn zeros() -> Self {
        Self(Mat4::zeros())
    }
}

/// Per-sensor information at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub per_sensor_fi: Vec<FisherMatrix>,
    /// Single-sensor mutual information in bits.
    pub per_sensor_mi: Vec<f64>,
    pub prior_fi: FisherMatrix,
    pub prior_jittered: bool,
}

impl MetricTable {
    pub fn len(&self) -> usize {
        self.per_sensor_mi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_sensor_mi.is_empty()
    }
}

/// `J_P + Σ_{i∈mask} J_D(i)`.
pub fn total_fi(mask: &[bool], table: &MetricTable) -> FisherMatrix {
    let mut acc = table.prior_fi.0;
    for (fi, _) in table.per_sensor_fi.iter().zip(mask).filter(|(_, &m)| m) {
        acc += fi.0;
    }
    FisherMatrix(acc)
}

/// Upper bound on the joint mutual information: the sum of single-sensor MI.
pub fn miub(mask: &[bool], table: &MetricTable) -> f64 {
    table
        .per_sensor_mi
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v)
        .sum()
}

const BINS_PER_SIGMA: usize = 16;

#[derive(Debug, Clone)]
enum Kernel {
    Analog(Vec<AmplitudeProfile>),
    Quantized { quantizer: Quantizer, cells: Vec<f64> },
}

/// Precomputed per-sensor tables that make the metric table cheap to build
/// once per time step.
#[derive(Debug, Clone)]
pub struct InfoModel {
    scene: Scene,
    kernel: Kernel,
}

impl InfoModel {
    pub fn new(scene: Scene) -> Result<Self> {
        let sigma = scene.signal.noise_std;
        let kernel = match &scene.data {
            DataModel::Analog => {
                // sensors often share a probability; tabulate each value once
                let mut cache: Vec<(f64, AmplitudeProfile)> = Vec::new();
                let mut profiles = Vec::with_capacity(scene.field.len());
                for (idx, s) in scene.field.sensors.iter().enumerate() {
                    let p = match cache.iter().find(|(ps, _)| *ps == s.sensing_prob) {
                        Some((_, p)) => p.clone(),
                        None => {
                            let p = AmplitudeProfile::new(s.sensing_prob, sigma)
                                .map_err(|e| with_sensor(e, idx))?;
                            cache.push((s.sensing_prob, p.clone()));
                            p
                        }
                    };
                    profiles.push(p);
                }
                Kernel::Analog(profiles)
            }
            DataModel::Quantized(q) => Kernel::Quantized {
                quantizer: q.clone(),
                cells: mutual::noise_cells(sigma, q),
            },
        };
        Ok(Self { scene, kernel })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// Expected FI and single-sensor MI of every sensor, plus the prior FI.
    pub fn table(&self, cloud: &ParticleCloud) -> MetricTable {
        let n = self.scene.field.len();
        let mut per_sensor_fi = Vec::with_capacity(n);
        let mut per_sensor_mi = Vec::with_capacity(n);
        let mut amps = vec![0.0; cloud.len()];
        let model = &self.scene.signal;
        let sigma = model.noise_std;
        for (idx, sensor) in self.scene.field.sensors.iter().enumerate() {
            let ps = sensor.sensing_prob;
            let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
            for ((s, w), a) in cloud.iter().zip(amps.iter_mut()) {
                let dx = s.x - sensor.x;
                let dy = s.y - sensor.y;
                let h = model.amplitude_at_sq_distance(dx * dx + dy * dy);
                *a = h;
                let gain = match &self.kernel {
                    Kernel::Analog(p) => p[idx].gain(h),
                    Kernel::Quantized { quantizer, cells } => fisher::quantized_gain_over(
                        fisher::signal_window(h, sigma, quantizer),
                        h,
                        ps,
                        sigma,
                        quantizer,
                        Some(cells),
                    ),
                };
                let (gx, gy) = fisher::planar_gradient(dx, dy, model);
                let g = w * gain;
                xx += g * gx * gx;
                xy += g * gx * gy;
                yy += g * gy * gy;
            }
            let mut m = Mat4::zeros();
            m[(0, 0)] = xx;
            m[(0, 1)] = xy;
            m[(1, 0)] = xy;
            m[(1, 1)] = yy;
            per_sensor_fi.push(FisherMatrix(m));

            let nats = match &self.kernel {
                Kernel::Analog(p) => {
                    let hz = mutual::marginal_entropy_binned(&amps, &cloud.weights, ps, sigma, BINS_PER_SIGMA);
                    let hzx: f64 = amps
                        .iter()
                        .zip(&cloud.weights)
                        .map(|(&h, &w)| w * p[idx].conditional_entropy(h))
                        .sum();
                    (hz - hzx).max(0.0)
                }
                Kernel::Quantized { quantizer, cells } => {
                    mutual::quantized_sensor_mi(&amps, &cloud.weights, ps, sigma, quantizer, cells)
                }
            };
            per_sensor_mi.push(nats / crate::numeric::LN_2);
        }
        let prior = prior_fisher(cloud);
        MetricTable {
            per_sensor_fi,
            per_sensor_mi,
            prior_fi: prior.matrix,
            prior_jittered: prior.jittered,
        }
    }
}

fn with_sensor(e: crate::Error, sensor: usize) -> crate::Error {
    match e {
        crate::Error::Quadrature {
            amplitude, error, ..
        } => crate::Error::Quadrature {
            sensor,
            amplitude,
            error,
        },
        other => other,
    }
}
