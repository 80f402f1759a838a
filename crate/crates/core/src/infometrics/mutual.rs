//! Mutual information between the target state and sensor measurements.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{integrate_pieces, ln_sum_exp, std_normal_pdf, LN_2};
use crate::sensing::{cell_mass, level_probability, mixture_density, mixture_ln_density, DataModel, Quantizer, Scene};
use crate::tracking::ParticleCloud;

/// `-p ln p`, zero at `p = 0`.
pub(crate) fn neg_xlnx(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Differential entropy of `N(0, σ²)` in nats.
pub(crate) fn gaussian_entropy(sigma: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln()
}

/// Entropy (nats) of the analog measurement at amplitude `h`.
pub fn conditional_entropy(h: f64, ps: f64, sigma: f64) -> Result<f64> {
    if ps == 0.0 || ps == 1.0 || h == 0.0 {
        return Ok(gaussian_entropy(sigma));
    }
    let s = sigma;
    let mut points = vec![-10.0 * s, 0.0, 10.0 * s, h - 10.0 * s, h, h + 10.0 * s];
    points.retain(|&p| p >= -10.0 * s && p <= h + 10.0 * s);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let r = integrate_pieces(
        |z| neg_xlnx(mixture_density(z, h, ps, sigma)),
        &points,
        1e-10,
        1e-14,
        400,
    );
    if !r.converged {
        return Err(Error::Quadrature {
            sensor: usize::MAX,
            amplitude: h,
            error: r.error,
        });
    }
    Ok(r.value)
}

/// Entropy (nats) of `(1-p_s)·N(0,σ²) + p_s·Σ w_s N(h_s,σ²)`: the components
/// are linearly binned on a grid of `σ/bins_per_sigma` and convolved with a
/// Gaussian kernel truncated at ±8σ.
pub(crate) fn marginal_entropy_binned(
    amps: &[f64],
    weights: &[f64],
    ps: f64,
    sigma: f64,
    bins_per_sigma: usize,
) -> f64 {
    let delta = sigma / bins_per_sigma as f64;
    let half = 8 * bins_per_sigma;
    let (lo, hi) = amps
        .iter()
        .fold((0.0f64, 0.0f64), |(lo, hi), &h| (lo.min(h), hi.max(h)));
    let origin = lo - (half + 1) as f64 * delta;
    let n = ((hi - origin) / delta).ceil() as usize + half + 3;
    let mut hist = vec![0.0; n];
    let mut deposit = |centre: f64, mass: f64| {
        let p = (centre - origin) / delta;
        let i = p.floor();
        let f = p - i;
        let i = i as usize;
        hist[i] += mass * (1.0 - f);
        hist[i + 1] += mass * f;
    };
    deposit(0.0, 1.0 - ps);
    for (&h, &w) in amps.iter().zip(weights) {
        deposit(h, ps * w);
    }
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|k| std_normal_pdf((k as f64 - half as f64) / bins_per_sigma as f64) / sigma)
        .collect();
    let mut density = vec![0.0; n];
    for (j, &m) in hist.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let row = &mut density[j - half..=j + half];
        for (d, &k) in row.iter_mut().zip(&kernel) {
            *d += m * k;
        }
    }
    density.iter().map(|&p| neg_xlnx(p)).sum::<f64>() * delta
}

/// Per-level noise-only masses of the quantizer (`N(0, σ²)` branch).
pub(crate) fn noise_cells(sigma: f64, q: &Quantizer) -> Vec<f64> {
    (0..q.levels).map(|l| cell_mass(l, 0.0, sigma, q)).collect()
}

/// `I(x; u)` in nats for one quantized sensor. Only levels within 12σ of each
/// particle's amplitude carry signal mass; the rest fall back to the noise
/// branch, whose entropy terms come from prefix sums.
pub(crate) fn quantized_sensor_mi(
    amps: &[f64],
    weights: &[f64],
    ps: f64,
    sigma: f64,
    q: &Quantizer,
    cells: &[f64],
) -> f64 {
    let noise_terms: Vec<f64> = cells.iter().map(|&c| neg_xlnx((1.0 - ps) * c)).collect();
    let mut prefix = Vec::with_capacity(q.levels + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for t in &noise_terms {
        acc += t;
        prefix.push(acc);
    }
    let noise_total = acc;
    let mut signal = vec![0.0; q.levels];
    let mut cond = 0.0;
    for (&h, &w) in amps.iter().zip(weights) {
        let win = super::fisher::signal_window(h, sigma, q);
        let mut hx = noise_total - (prefix[win.end] - prefix[win.start]);
        for l in win {
            let a = cell_mass(l, h, sigma, q);
            signal[l] += w * a;
            hx += neg_xlnx(ps * a + (1.0 - ps) * cells[l]);
        }
        cond += w * hx;
    }
    let marginal: f64 = signal
        .iter()
        .zip(cells)
        .map(|(&s, &c)| neg_xlnx((1.0 - ps) * c + ps * s))
        .sum();
    (marginal - cond).max(0.0)
}

/// Received amplitudes of each selected sensor (by field index) at every
/// particle.
fn amplitude_rows(subset: &[usize], cloud: &ParticleCloud, scene: &Scene) -> Result<Vec<Vec<f64>>> {
    subset
        .iter()
        .map(|&i| {
            let sensor = scene
                .field
                .sensors
                .get(i)
                .ok_or_else(|| Error::invalid("subset", format!("sensor index {i} out of range")))?;
            Ok(cloud
                .states
                .iter()
                .map(|s| {
                    let dx = s.x - sensor.x;
                    let dy = s.y - sensor.y;
                    scene.signal.amplitude_at_sq_distance(dx * dx + dy * dy)
                })
                .collect())
        })
        .collect()
}

/// Exact `I(x; u_S)` in bits for quantized data, summing over every level
/// tuple. Fails when `L^|S|` exceeds `budget`.
pub fn mi_quantized(subset: &[usize], cloud: &ParticleCloud, scene: &Scene, budget: u128) -> Result<f64> {
    let DataModel::Quantized(q) = &scene.data else {
        return Err(Error::invalid("scene", "exact joint MI needs quantized data"));
    };
    if subset.is_empty() {
        return Ok(0.0);
    }
    let size = (q.levels as u128).checked_pow(subset.len() as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::CombinatorialBudget { size, budget });
    }
    let sigma = scene.signal.noise_std;
    let rows = amplitude_rows(subset, cloud, scene)?;
    let ns = cloud.len();
    let levels = q.levels;
    // pmf[k][l * ns + s]
    let mut pmf = Vec::with_capacity(subset.len());
    let mut cond = 0.0;
    for (k, &i) in subset.iter().enumerate() {
        let ps = scene.field.sensors[i].sensing_prob;
        let mut table = vec![0.0; levels * ns];
        for (s, &h) in rows[k].iter().enumerate() {
            let mut hs = 0.0;
            for l in 0..levels {
                let p = level_probability(l, h, ps, sigma, q);
                table[l * ns + s] = p;
                hs += neg_xlnx(p);
            }
            cond += cloud.weights[s] * hs;
        }
        pmf.push(table);
    }

    fn joint(depth: usize, prod: &[f64], pmf: &[Vec<f64>], levels: usize, out: &mut f64) {
        if depth == pmf.len() {
            *out += neg_xlnx(prod.iter().sum());
            return;
        }
        let ns = prod.len();
        let mut next = vec![0.0; ns];
        for l in 0..levels {
            let row = &pmf[depth][l * ns..(l + 1) * ns];
            let mut any = false;
            for ((n, &p), &r) in next.iter_mut().zip(prod).zip(row) {
                *n = p * r;
                any |= *n != 0.0;
            }
            if any {
                joint(depth + 1, &next, pmf, levels, out);
            }
        }
    }
    let mut marginal = 0.0;
    joint(0, &cloud.weights, &pmf, levels, &mut marginal);
    Ok((marginal - cond).max(0.0) / LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    /// Monte Carlo standard error of `bits`.
    pub std_error: f64,
}

pub const MIN_MI_SAMPLES: usize = 1000;

/// `I(x; z_S)` for analog data: `H(z)` by Monte Carlo over the particle
/// mixture, `H(z|x)` by quadrature (sensors are conditionally independent).
pub fn mi_analog<R: Rng + ?Sized>(
    subset: &[usize],
    cloud: &ParticleCloud,
    scene: &Scene,
    sample_count: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    if sample_count < MIN_MI_SAMPLES {
        return Err(Error::invalid(
            "sample_count",
            format!("need at least {MIN_MI_SAMPLES}, got {sample_count}"),
        ));
    }
    if subset.is_empty() {
        return Ok(MiEstimate {
            bits: 0.0,
            std_error: 0.0,
        });
    }
    let sigma = scene.signal.noise_std;
    let rows = amplitude_rows(subset, cloud, scene)?;
    let probs: Vec<f64> = subset.iter().map(|&i| scene.field.sensors[i].sensing_prob).collect();
    let mut cond = 0.0;
    for (row, &ps) in rows.iter().zip(&probs) {
        for (&h, &w) in row.iter().zip(&cloud.weights) {
            cond += w * conditional_entropy(h, ps, sigma)?;
        }
    }

    let mut cumulative = Vec::with_capacity(cloud.len());
    let mut acc = 0.0;
    for w in &cloud.weights {
        acc += w;
        cumulative.push(acc);
    }
    let ln_w: Vec<f64> = cloud.weights.iter().map(|w| w.ln()).collect();
    let mut z = vec![0.0; subset.len()];
    let mut terms = vec![0.0; cloud.len()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..sample_count {
        let u = rng.random::<f64>() * acc;
        let s = cumulative.partition_point(|&c| c <= u).min(cloud.len() - 1);
        for (k, zk) in z.iter_mut().enumerate() {
            let sensed = rng.random::<f64>() < probs[k];
            let noise: f64 = StandardNormal.sample(rng);
            *zk = if sensed { rows[k][s] } else { 0.0 } + sigma * noise;
        }
        for (j, t) in terms.iter_mut().enumerate() {
            *t = ln_w[j]
                + z.iter()
                    .enumerate()
                    .map(|(k, &zk)| mixture_ln_density(zk, rows[k][j], probs[k], sigma))
                    .sum::<f64>();
        }
        let v = -ln_sum_exp(&terms);
        sum += v;
        sum_sq += v * v;
    }
    let n = sample_count as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MiEstimate {
        bits: (mean - cond) / LN_2,
        std_error: (var / n).sqrt() / LN_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TargetState;
    use crate::rng;
    use crate::sensing::{build_quantizer, Sensor, SensorField, SignalModel};
    use crate::tracking::{init_particles, Prior};

    fn scene(probs: &[f64], data: DataModel) -> Scene {
        let sensors = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| Sensor {
                id: i,
                x: 10.0 * i as f64 - 5.0,
                y: 3.0,
                sensing_prob: p,
            })
            .collect();
        Scene::new(SensorField::new(sensors).unwrap(), SignalModel::default(), data).unwrap()
    }

    fn cloud(n: usize, seed: u64) -> ParticleCloud {
        let prior = Prior::isotropic(TargetState::new(2.0, 0.0, 0.0, 0.0), 4.0, 0.01);
        init_particles(&prior, n, &mut rng::source(seed)).unwrap()
    }

    /// Differential entropy of a Gaussian mixture by brute-force trapezoid.
    fn mixture_entropy_oracle(amps: &[f64], weights: &[f64], ps: f64, sigma: f64) -> f64 {
        let lo = -10.0 * sigma;
        let hi = amps.iter().cloned().fold(0.0, f64::max) + 10.0 * sigma;
        let n = 200_000;
        let dz = (hi - lo) / n as f64;
        let mut h = 0.0;
        for i in 0..=n {
            let z = lo + i as f64 * dz;
            let mut p = (1.0 - ps) * std_normal_pdf(z / sigma) / sigma;
            for (&a, &w) in amps.iter().zip(weights) {
                p += ps * w * std_normal_pdf((z - a) / sigma) / sigma;
            }
            let f = if i == 0 || i == n { 0.5 } else { 1.0 };
            h += f * neg_xlnx(p);
        }
        h * dz
    }

    #[test]
    fn conditional_entropy_limits() {
        let g = gaussian_entropy(0.2);
        assert!((conditional_entropy(3.0, 1.0, 0.2).unwrap() - g).abs() < 1e-12);
        // well-separated branches add the binary entropy of p_s
        let far = conditional_entropy(20.0, 0.3, 0.2).unwrap();
        let hb = neg_xlnx(0.3) + neg_xlnx(0.7);
        assert!((far - g - hb).abs() < 1e-8, "{far}");
        let mid = conditional_entropy(0.3, 0.3, 0.2).unwrap();
        assert!(mid > g && mid < g + hb);
    }

    #[test]
    fn binned_entropy_matches_brute_force() {
        let c = cloud(60, 40);
        let amps: Vec<f64> = c
            .states
            .iter()
            .map(|s| SignalModel::default().amplitude_at_sq_distance(s.x * s.x + s.y * s.y))
            .collect();
        for ps in [0.2, 0.8, 1.0] {
            let binned = marginal_entropy_binned(&amps, &c.weights, ps, 0.2, 16);
            let oracle = mixture_entropy_oracle(&amps, &c.weights, ps, 0.2);
            assert!((binned - oracle).abs() < 1e-3, "ps {ps}: {binned} vs {oracle}");
        }
    }

    #[test]
    fn windowed_quantized_mi_matches_exact() {
        let q = build_quantizer(5, &SignalModel::default()).unwrap();
        let sc = scene(&[0.35], DataModel::Quantized(q.clone()));
        let c = cloud(300, 41);
        let exact = mi_quantized(&[0], &c, &sc, 1 << 20).unwrap();
        let amps = &amplitude_rows(&[0], &c, &sc).unwrap()[0];
        let fast = quantized_sensor_mi(amps, &c.weights, 0.35, 0.2, &q, &noise_cells(0.2, &q)) / LN_2;
        assert!((exact - fast).abs() < 1e-9, "{exact} vs {fast}");
    }

    #[test]
    fn quantized_mi_bounds() {
        let q = build_quantizer(3, &SignalModel::default()).unwrap();
        let sc = scene(&[0.0, 0.7, 1.0], DataModel::Quantized(q.clone()));
        let c = cloud(200, 42);
        assert_eq!(mi_quantized(&[0], &c, &sc, 1 << 20).unwrap(), 0.0);
        assert_eq!(mi_quantized(&[], &c, &sc, 1 << 20).unwrap(), 0.0);
        let one = mi_quantized(&[1], &c, &sc, 1 << 20).unwrap();
        let two = mi_quantized(&[1, 2], &c, &sc, 1 << 20).unwrap();
        let miub = mi_quantized(&[1], &c, &sc, 1 << 20).unwrap() + mi_quantized(&[2], &c, &sc, 1 << 20).unwrap();
        assert!(one > 0.0 && one <= 3.0);
        assert!(two >= one - 1e-12);
        assert!(two <= miub + 1e-9, "{two} > {miub}");
        // a single particle carries no information
        let point = ParticleCloud::uniform(vec![TargetState::new(1.0, 1.0, 0.0, 0.0)]);
        assert!(mi_quantized(&[1, 2], &point, &sc, 1 << 20).unwrap() < 1e-12);
    }

    #[test]
    fn quantized_budget_is_enforced() {
        let q = build_quantizer(5, &SignalModel::default()).unwrap();
        let sc = scene(&[0.5; 5], DataModel::Quantized(q));
        let c = cloud(10, 43);
        match mi_quantized(&[0, 1, 2, 3, 4], &c, &sc, 1 << 20) {
            Err(Error::CombinatorialBudget { size, .. }) => assert_eq!(size, 1 << 25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn analog_mc_matches_quadrature_oracle() {
        let sc = scene(&[0.6], DataModel::Analog);
        let c = cloud(40, 44);
        let amps = &amplitude_rows(&[0], &c, &sc).unwrap()[0];
        let hz = mixture_entropy_oracle(amps, &c.weights, 0.6, 0.2);
        let hzx: f64 = amps
            .iter()
            .zip(&c.weights)
            .map(|(&h, &w)| w * conditional_entropy(h, 0.6, 0.2).unwrap())
            .sum();
        let oracle = (hz - hzx) / LN_2;
        let est = mi_analog(&[0], &c, &sc, 20_000, &mut rng::source(45)).unwrap();
        assert!((est.bits - oracle).abs() < 4.0 * est.std_error + 1e-3, "{est:?} vs {oracle}");
        assert!(est.std_error < 0.05);
        assert!(mi_analog(&[0], &c, &sc, 999, &mut rng::source(1)).is_err());
    }

    #[test]
    fn analog_joint_mi_below_upper_bound() {
        let sc = scene(&[0.9, 0.9], DataModel::Analog);
        let c = cloud(150, 46);
        let joint = mi_analog(&[0, 1], &c, &sc, 4000, &mut rng::source(47)).unwrap();
        let a = mi_analog(&[0], &c, &sc, 4000, &mut rng::source(48)).unwrap();
        let b = mi_analog(&[1], &c, &sc, 4000, &mut rng::source(49)).unwrap();
        let se = (joint.std_error.powi(2) + a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(joint.bits <= a.bits + b.bits + 3.0 * se);
        assert!(joint.bits >= a.bits.max(b.bits) - 3.0 * se);
    }
}
