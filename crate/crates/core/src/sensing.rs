//! Sensor field, the uncertain (occlusion) measurement model, quantization,
//! and likelihood evaluation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::TargetState;
use crate::error::{Error, Result};
use crate::numeric::{ln_add_exp, normal_ln_pdf, normal_pdf};

pub use crate::numeric::gaussian_tail;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensor {
    /// Stable identifier; survives pre-filtering of the field.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub sensing_prob: f64,
}

impl Sensor {
    pub fn distance_to(&self, state: &TargetState) -> f64 {
        (state.x - self.x).hypot(state.y - self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorField {
    pub sensors: Vec<Sensor>,
}

impl SensorField {
    pub fn new(sensors: Vec<Sensor>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::Empty("sensor field"));
        }
        for s in &sensors {
            if !(0.0..=1.0).contains(&s.sensing_prob) {
                return Err(Error::invalid(
                    "sensing_prob",
                    format!("sensor {} has {}", s.id, s.sensing_prob),
                ));
            }
        }
        Ok(Self { sensors })
    }

    /// `m × m` lattice over the square `[-side/2, side/2]²`, corners included,
    /// numbered row-major from the lower-left corner.
    pub fn grid(m: usize, side: f64, sensing_probs: &[f64]) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("grid", "must be at least 1"));
        }
        if sensing_probs.len() != m * m {
            return Err(Error::invalid(
                "sensing_probs",
                format!("expected {} values, got {}", m * m, sensing_probs.len()),
            ));
        }
        let spacing = if m > 1 { side / (m - 1) as f64 } else { 0.0 };
        let origin = if m > 1 { -side / 2.0 } else { 0.0 };
        let sensors = (0..m * m)
            .map(|k| Sensor {
                id: k,
                x: origin + spacing * (k % m) as f64,
                y: origin + spacing * (k / m) as f64,
                sensing_prob: sensing_probs[k],
            })
            .collect();
        Self::new(sensors)
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalModel {
    pub source_power: f64,
    pub atten_scale: f64,
    pub decay_exponent: f64,
    pub noise_std: f64,
}

impl Default for SignalModel {
    fn default() -> Self {
        Self {
            source_power: 1000.0,
            atten_scale: 1.0,
            decay_exponent: 2.0,
            noise_std: 0.2,
        }
    }
}

impl SignalModel {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("source_power", self.source_power > 0.0),
            ("noise_std", self.noise_std > 0.0),
            ("atten_scale", self.atten_scale >= 0.0),
            ("decay_exponent", self.decay_exponent > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::invalid(name, "out of range"));
            }
        }
        Ok(())
    }

    /// `α·d^n`, given the squared distance.
    pub(crate) fn attenuation(&self, dist_sq: f64) -> f64 {
        let dn = if self.decay_exponent == 2.0 {
            dist_sq
        } else {
            dist_sq.powf(0.5 * self.decay_exponent)
        };
        self.atten_scale * dn
    }

    pub fn amplitude_at_sq_distance(&self, dist_sq: f64) -> f64 {
        (self.source_power / (1.0 + self.attenuation(dist_sq))).sqrt()
    }
}

/// `h = √(P₀ / (1 + α·dⁿ))`.
pub fn received_amplitude(sensor: &Sensor, state: &TargetState, model: &SignalModel) -> f64 {
    let dx = state.x - sensor.x;
    let dy = state.y - sensor.y;
    model.amplitude_at_sq_distance(dx * dx + dy * dy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    pub bits: u32,
    pub levels: usize,
    /// `η₀ = -∞ < η₁ < … < η_{L-1} < η_L = +∞`.
    pub thresholds: Vec<f64>,
}

/// Uniform quantizer whose interior thresholds split `[-σ, σ + √P₀]` into `L`
/// equal cells.
pub fn build_quantizer(bits: u32, model: &SignalModel) -> Result<Quantizer> {
    if !(1..=16).contains(&bits) {
        return Err(Error::invalid(
            "bits",
            format!("must be in 1..=16, got {bits}"),
        ));
    }
    let levels = 1usize << bits;
    let lo = -model.noise_std;
    let width = (2.0 * model.noise_std + model.source_power.sqrt()) / levels as f64;
    let mut thresholds = Vec::with_capacity(levels + 1);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.extend((1..levels).map(|l| lo + width * l as f64));
    thresholds.push(f64::INFINITY);
    Ok(Quantizer {
        bits,
        levels,
        thresholds,
    })
}

impl Quantizer {
    fn interior(&self) -> &[f64] {
        &self.thresholds[1..self.levels]
    }

    /// Levels whose cells intersect `[lo, hi]`.
    pub fn levels_touching(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = self.interior().partition_point(|&t| t <= lo);
        let last = self.interior().partition_point(|&t| t < hi);
        first..(last + 1).min(self.levels)
    }
}

/// Level `l` with `η_l ≤ value < η_{l+1}`; a value on a threshold takes the
/// higher level.
pub fn quantize(value: f64, quantizer: &Quantizer) -> u32 {
    quantizer.interior().partition_point(|&t| t <= value) as u32
}

/// `P(a ≤ Z < b)` for standard normal `Z`, evaluated on the side of the
/// distribution that keeps precision.
pub fn interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        gaussian_tail(a) - gaussian_tail(b)
    } else if b <= 0.0 {
        gaussian_tail(-b) - gaussian_tail(-a)
    } else {
        1.0 - gaussian_tail(-a) - gaussian_tail(b)
    }
}

/// Probability that the signal branch (mean `h`) lands in cell `level`.
pub(crate) fn cell_mass(level: usize, mean: f64, sigma: f64, quantizer: &Quantizer) -> f64 {
    let lo = (quantizer.thresholds[level] - mean) / sigma;
    let hi = (quantizer.thresholds[level + 1] - mean) / sigma;
    interval_mass(lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataModel {
    Analog,
    Quantized(Quantizer),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Index into the field's sensor list.
    pub sensor: usize,
    /// Analog amplitude as sensed (kept in quantized runs for diagnostics).
    pub value: f64,
    pub level: Option<u32>,
    /// Simulation-only: whether the signal branch fired.
    pub truth_sensed: bool,
}

impl Measurement {
    pub fn is_quantized(&self) -> bool {
        self.level.is_some()
    }
}

/// Draws `h + v` with probability `p_s`, otherwise `v`, with `v ~ N(0, σ²)`.
pub fn sample_measurement<R: Rng + ?Sized>(
    sensor: &Sensor,
    state: &TargetState,
    model: &SignalModel,
    rng: &mut R,
) -> Measurement {
    let sensed = rng.random::<f64>() < sensor.sensing_prob;
    let noise: f64 = rng.sample::<f64, _>(StandardNormal) * model.noise_std;
    let value = if sensed {
        received_amplitude(sensor, state, model) + noise
    } else {
        noise
    };
    Measurement {
        sensor: sensor.id,
        value,
        level: None,
        truth_sensed: sensed,
    }
}

/// `p_s·N(z; h, σ²) + (1 − p_s)·N(z; 0, σ²)`.
pub fn analog_likelihood(
    value: f64,
    sensor: &Sensor,
    state: &TargetState,
    model: &SignalModel,
) -> f64 {
    let h = received_amplitude(sensor, state, model);
    mixture_density(value, h, sensor.sensing_prob, model.noise_std)
}

pub(crate) fn mixture_density(z: f64, h: f64, ps: f64, sigma: f64) -> f64 {
    ps * normal_pdf(z, h, sigma) + (1.0 - ps) * normal_pdf(z, 0.0, sigma)
}

pub(crate) fn mixture_ln_density(z: f64, h: f64, ps: f64, sigma: f64) -> f64 {
    let a = if ps > 0.0 {
        ps.ln() + normal_ln_pdf(z, h, sigma)
    } else {
        f64::NEG_INFINITY
    };
    let b = if ps < 1.0 {
        (1.0 - ps).ln() + normal_ln_pdf(z, 0.0, sigma)
    } else {
        f64::NEG_INFINITY
    };
    ln_add_exp(a, b)
}

/// Probability of level `l` under the uncertain model.
pub fn quantized_pmf(
    level: u32,
    sensor: &Sensor,
    state: &TargetState,
    model: &SignalModel,
    quantizer: &Quantizer,
) -> f64 {
    let h = received_amplitude(sensor, state, model);
    level_probability(level as usize, h, sensor.sensing_prob, model.noise_std, quantizer)
}

pub(crate) fn level_probability(
    level: usize,
    h: f64,
    ps: f64,
    sigma: f64,
    quantizer: &Quantizer,
) -> f64 {
    ps * cell_mass(level, h, sigma, quantizer) + (1.0 - ps) * cell_mass(level, 0.0, sigma, quantizer)
}

/// A sensor configuration plus the transmission format.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub field: SensorField,
    pub signal: SignalModel,
    pub data: DataModel,
}

impl Scene {
    pub fn new(field: SensorField, signal: SignalModel, data: DataModel) -> Result<Self> {
        signal.validate()?;
        Ok(Self {
            field,
            signal,
            data,
        })
    }

    /// Index of a sensor id in the field.
    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.field.sensors.iter().position(|s| s.id == id)
    }

    /// Samples the selected sensor (by field index) and quantizes if needed.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        index: usize,
        state: &TargetState,
        rng: &mut R,
    ) -> Measurement {
        let sensor = &self.field.sensors[index];
        let mut m = sample_measurement(sensor, state, &self.signal, rng);
        m.sensor = index;
        if let DataModel::Quantized(q) = &self.data {
            m.level = Some(quantize(m.value, q));
        }
        m
    }

    /// Log-likelihood of one measurement for a hypothesised state.
    pub fn ln_likelihood(&self, m: &Measurement, state: &TargetState) -> f64 {
        let sensor = &self.field.sensors[m.sensor];
        let h = received_amplitude(sensor, state, &self.signal);
        match (&self.data, m.level) {
            (DataModel::Quantized(q), Some(level)) => {
                level_probability(level as usize, h, sensor.sensing_prob, self.signal.noise_std, q)
                    .ln()
            }
            _ => mixture_ln_density(m.value, h, sensor.sensing_prob, self.signal.noise_std),
        }
    }
}
