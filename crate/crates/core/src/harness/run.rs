//! Trials and Monte Carlo runs.

use std::time::{Duration, Instant};

use super::config::{DataKind, ExperimentConfig, Rule, Scheme};
use super::layout::sensing_probabilities;
use crate::dynamics::{build_motion_model, generate_trajectory, MotionModel, TargetState};
use crate::error::{Error, Result};
use crate::infometrics::{InfoModel, MetricTable};
use crate::linalg::logdet_spd;
use crate::moo::{diversity_metric, nsga2_run, FiObjective, MiubObjective, SelectionMask};
use crate::rng::{self, stream, RandomSource};
use crate::selection::{
    compromise, knee_point, threshold_prefilter, top_a_select, weighted_sum_front, weighted_sum_miub,
    FrontPoint, Metric,
};
use crate::sensing::{build_quantizer, DataModel, Scene, SensorField};
use crate::tracking::{correct, init_particles, predict, ParticleCloud, Prior};

/// One tracking step of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub truth: TargetState,
    pub estimate: TargetState,
    /// Over the (possibly prefiltered) field of the experiment.
    pub mask: SelectionMask,
    pub selected_ids: Vec<usize>,
    /// Analog value of each selected sensor's measurement, before quantization.
    pub values: Vec<f64>,
    /// Whether each selected sensor actually observed the target.
    pub sensed: Vec<bool>,
    pub weights_reset: bool,
    /// The Pareto front the mask was picked from, if one was computed.
    pub front: Option<Vec<FrontPoint>>,
    pub diversity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
}

impl TrialResult {
    pub fn weight_resets(&self) -> usize {
        self.steps.iter().filter(|s| s.weights_reset).count()
    }
}

/// Per step, the fraction of selected sensors whose measurement falls outside
/// `[-3σ, 3σ]`; 0 when nothing was selected.
pub fn reliable_fraction(trial: &TrialResult, sigma: f64) -> Vec<f64> {
    trial
        .steps
        .iter()
        .map(|s| fraction(s.values.iter().filter(|v| v.abs() > 3.0 * sigma).count(), s.values.len()))
        .collect()
}

/// Per step, the fraction of selected sensors that truly observed the target.
pub fn sensed_fraction(trial: &TrialResult) -> Vec<f64> {
    trial
        .steps
        .iter()
        .map(|s| fraction(s.sensed.iter().filter(|&&b| b).count(), s.sensed.len()))
        .collect()
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Per-step averages over the successful trials of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Position MSE, `E[(x̂−x)² + (ŷ−y)²]`.
    pub mse: Vec<f64>,
    pub mean_selected: Vec<f64>,
    /// Reliable fraction pooled over trials: the ±3σ test for analog data, the
    /// simulator's ground truth for quantized data.
    pub reliable_frac: Vec<f64>,
    pub beyond_3sigma_frac: Vec<f64>,
    pub sensed_frac: Vec<f64>,
    /// Mean spread `Δ` of the fronts; NaN when the scheme computes none.
    pub diversity: Vec<f64>,
    pub weight_resets: Vec<usize>,
    pub trials_ok: usize,
    /// `(trial index, error)` of every failed trial.
    pub failures: Vec<(usize, String)>,
    /// Fronts of trial 0, per step.
    pub fronts: Vec<Option<Vec<FrontPoint>>>,
    pub elapsed: Duration,
}

/// Aggregates trials in the order given.
pub fn summarize(trials: &[TrialResult], steps: usize, sigma: f64, quantized: bool) -> RunSummary {
    let n = trials.len().max(1) as f64;
    let mut s = RunSummary {
        mse: vec![0.0; steps],
        mean_selected: vec![0.0; steps],
        reliable_frac: vec![0.0; steps],
        beyond_3sigma_frac: vec![0.0; steps],
        sensed_frac: vec![0.0; steps],
        diversity: vec![f64::NAN; steps],
        weight_resets: vec![0; steps],
        trials_ok: trials.len(),
        failures: Vec::new(),
        fronts: trials
            .first()
            .map(|t| t.steps.iter().map(|s| s.front.clone()).collect())
            .unwrap_or_default(),
        elapsed: Duration::ZERO,
    };
    for t in 0..steps {
        let (mut selected, mut beyond, mut sensed) = (0usize, 0usize, 0usize);
        let (mut div_sum, mut div_n) = (0.0, 0usize);
        for trial in trials {
            let r = &trial.steps[t];
            s.mse[t] += r.estimate.position_sq_error(&r.truth);
            selected += r.values.len();
            beyond += r.values.iter().filter(|v| v.abs() > 3.0 * sigma).count();
            sensed += r.sensed.iter().filter(|&&b| b).count();
            s.weight_resets[t] += r.weights_reset as usize;
            if let Some(d) = r.diversity {
                div_sum += d;
                div_n += 1;
            }
        }
        s.mse[t] /= n;
        s.mean_selected[t] = selected as f64 / n;
        s.beyond_3sigma_frac[t] = fraction(beyond, selected);
        s.sensed_frac[t] = fraction(sensed, selected);
        s.reliable_frac[t] = if quantized {
            s.sensed_frac[t]
        } else {
            s.beyond_3sigma_frac[t]
        };
        if div_n > 0 {
            s.diversity[t] = div_sum / div_n as f64;
        }
    }
    s
}

/// The selected mask and, when the scheme builds one, the front it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub mask: SelectionMask,
    pub front: Option<Vec<FrontPoint>>,
    pub diversity: Option<f64>,
}

/// State of a trial at one step, just before the sensors are chosen.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub truth: TargetState,
    pub predicted: ParticleCloud,
    pub table: MetricTable,
    pub decision: Decision,
}

/// One row of the per-sensor metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorMetrics {
    pub sensor_id: usize,
    /// Distance from the sensor to the true target position.
    pub dist: f64,
    pub p_s: f64,
    /// `logdet(J_P + J_i) − logdet(J_P)`.
    pub fi_logdet_gain: f64,
    pub mi_bits: f64,
}

/// A validated configuration with everything that is shared between trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    info: InfoModel,
    motion: MotionModel,
    prior: Prior,
}

const MAX_FAILED_SHARE: f64 = 0.1;

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let probs = sensing_probabilities(&config)?;
        let mut field = SensorField::grid(config.field.grid, config.field.side, &probs)?;
        if let Some(p) = config.field.prefilter {
            field = threshold_prefilter(&field, p)?;
        }
        if let Scheme::FixedA { count } = config.select.scheme {
            if count > field.len() {
                return Err(Error::config(
                    "select.count",
                    format!("{count} exceeds the {} available sensors", field.len()),
                ));
            }
        }
        let data = match config.data {
            DataKind::Analog => DataModel::Analog,
            DataKind::Quantized { bits } => DataModel::Quantized(build_quantizer(bits, &config.signal)?),
        };
        let scene = Scene::new(field, config.signal, data)?;
        let info = InfoModel::new(scene)?;
        let motion = build_motion_model(config.interval, config.process_noise)?;
        let prior = Prior::isotropic(config.prior_mean, config.prior_sigma_pos, config.prior_var_vel);
        Ok(Self {
            config,
            info,
            motion,
            prior,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn scene(&self) -> &Scene {
        self.info.scene()
    }

    /// Seed of trial `index`, split from the master seed by counter.
    pub fn trial_seed(&self, index: usize) -> u64 {
        rng::derive_seed(self.config.seed, &[index as u64])
    }

    /// NSGA-II front for the configured metric, sorted by ascending `f₂`.
    pub fn pareto_front(&self, table: &MetricTable, rng: &mut RandomSource) -> Result<Vec<FrontPoint>> {
        let front = match self.config.select.metric {
            Metric::Fi => nsga2_run(&FiObjective::new(table, self.config.select.fi_gap)?, &self.config.nsga, rng)?,
            Metric::Miub => nsga2_run(&MiubObjective::new(table)?, &self.config.nsga, rng)?,
        };
        Ok(front.iter().map(FrontPoint::from).collect())
    }

    /// Applies the configured scheme to one step's metric table.
    pub fn decide(&self, table: &MetricTable, rng: &mut RandomSource) -> Result<Decision> {
        let sel = &self.config.select;
        let with_front = |front: Vec<FrontPoint>, pick: FrontPoint| {
            let pts: Vec<(f64, f64)> = front.iter().map(|p| (p.f1, p.f2)).collect();
            let d = diversity_metric(&pts, Some([(1.0, 0.0), (0.0, 1.0)]));
            Decision {
                mask: pick.mask,
                front: Some(front),
                diversity: Some(d),
            }
        };
        Ok(match (sel.scheme, sel.metric) {
            (Scheme::FixedA { count }, metric) => Decision {
                mask: top_a_select(table, count, metric)?,
                front: None,
                diversity: None,
            },
            (Scheme::WeightedSum { weight }, Metric::Miub) => Decision {
                mask: weighted_sum_miub(&MiubObjective::new(table)?, weight)?,
                front: None,
                diversity: None,
            },
            (Scheme::WeightedSum { weight }, Metric::Fi) => {
                let front = self.pareto_front(table, rng)?;
                let pick = weighted_sum_front(&front, weight)?;
                with_front(front, pick)
            }
            (Scheme::Nsga, _) => {
                let front = self.pareto_front(table, rng)?;
                let pick = match sel.rule {
                    Rule::Compromise => compromise(&front)?,
                    Rule::Knee => knee_point(&front)?,
                };
                with_front(front, pick)
            }
        })
    }

    fn run(&self, trial_seed: u64, stop_at: Option<usize>) -> Result<(TrialResult, Option<Snapshot>)> {
        let steps = stop_at.unwrap_or(self.config.steps);
        let scene = self.scene();
        let mut truth_rng = rng::derived(trial_seed, &[stream::TRUTH]);
        let start = match self.config.truth_start {
            Some(s) => s,
            None => init_particles(&self.prior, 1, &mut truth_rng)?.states[0],
        };
        let truth = generate_trajectory(&start, &self.motion, steps, &mut truth_rng)?;
        let mut filter_rng = rng::derived(trial_seed, &[stream::FILTER]);
        let mut cloud = init_particles(
            &self.prior,
            self.config.particles,
            &mut rng::derived(trial_seed, &[stream::INIT]),
        )?;
        let mut records = Vec::with_capacity(steps);
        for (t, x) in truth.iter().enumerate() {
            let at = |e: Error| e.at_step(t + 1);
            let predicted = predict(&cloud, &self.motion, &mut filter_rng);
            let table = self.info.table(&predicted);
            let decision = self
                .decide(&table, &mut rng::derived(trial_seed, &[stream::OPTIMIZER, t as u64]))
                .map_err(at)?;
            if stop_at == Some(t + 1) {
                let snap = Snapshot {
                    truth: *x,
                    predicted,
                    table,
                    decision,
                };
                return Ok((
                    TrialResult {
                        seed: trial_seed,
                        steps: records,
                    },
                    Some(snap),
                ));
            }
            // measurements are drawn only once the mask is fixed
            let measurements: Vec<_> = decision
                .mask
                .selected()
                .map(|i| {
                    let id = scene.field.sensors[i].id;
                    let mut r = rng::derived(trial_seed, &[stream::MEASURE, t as u64, id as u64]);
                    scene.measure(i, x, &mut r)
                })
                .collect();
            let step = correct(predicted, &measurements, scene, &mut filter_rng);
            if !step.estimate.is_finite() {
                return Err(at(Error::invalid("estimate", "filter produced a non-finite estimate")));
            }
            records.push(StepRecord {
                truth: *x,
                estimate: step.estimate,
                selected_ids: decision.mask.selected().map(|i| scene.field.sensors[i].id).collect(),
                mask: decision.mask,
                values: measurements.iter().map(|m| m.value).collect(),
                sensed: measurements.iter().map(|m| m.truth_sensed).collect(),
                weights_reset: step.weights_reset,
                front: decision.front,
                diversity: decision.diversity,
            });
            cloud = step.cloud;
        }
        Ok((
            TrialResult {
                seed: trial_seed,
                steps: records,
            },
            None,
        ))
    }

    /// Runs one trial: per step predict, score the sensors on the predicted
    /// cloud, select, measure the selected sensors, and correct.
    pub fn run_trial(&self, trial_seed: u64) -> Result<TrialResult> {
        self.run(trial_seed, None).map(|(r, _)| r)
    }

    /// The trial state at `step` (1-based), just before measuring.
    pub fn snapshot(&self, trial_seed: u64, step: usize) -> Result<Snapshot> {
        if step < 1 {
            return Err(Error::invalid("step", "steps are numbered from 1"));
        }
        let (_, snap) = self.run(trial_seed, Some(step))?;
        Ok(snap.expect("stopped at the requested step"))
    }

    /// Per-sensor information at a snapshot, ordered by sensor id.
    pub fn sensor_metrics(&self, snap: &Snapshot) -> Vec<SensorMetrics> {
        let prior = snap.table.prior_fi.0;
        let base = logdet_spd(&prior).0;
        let mut rows: Vec<SensorMetrics> = self
            .scene()
            .field
            .sensors
            .iter()
            .enumerate()
            .map(|(i, s)| SensorMetrics {
                sensor_id: s.id,
                dist: s.distance_to(&snap.truth),
                p_s: s.sensing_prob,
                fi_logdet_gain: logdet_spd(&(prior + snap.table.per_sensor_fi[i].0)).0 - base,
                mi_bits: snap.table.per_sensor_mi[i],
            })
            .collect();
        rows.sort_by_key(|r| r.sensor_id);
        rows
    }

    /// Runs every trial, on up to `workers` threads, and aggregates in trial
    /// order. Fails when more than 10% of the trials fail.
    pub fn run_monte_carlo(&self, workers: Option<usize>) -> Result<RunSummary> {
        let started = Instant::now();
        let results = self.run_all(workers)?;
        let total = results.len();
        let mut ok = Vec::with_capacity(total);
        let mut failures = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(t) => ok.push(t),
                Err(e) => failures.push((i, e.to_string())),
            }
        }
        if failures.len() as f64 > MAX_FAILED_SHARE * total as f64 || ok.is_empty() {
            return Err(Error::TooManyFailures {
                failed: failures.len(),
                total,
                first: failures.first().map(|(_, e)| e.clone()).unwrap_or_default(),
            });
        }
        let quantized = matches!(self.config.data, DataKind::Quantized { .. });
        let mut s = summarize(&ok, self.config.steps, self.config.signal.noise_std, quantized);
        s.failures = failures;
        s.elapsed = started.elapsed();
        Ok(s)
    }

    fn trial(&self, index: usize) -> Result<TrialResult> {
        let mut r = self.run_trial(self.trial_seed(index))?;
        if index > 0 {
            // only the first trial's fronts are reported
            r.steps.iter_mut().for_each(|s| s.front = None);
        }
        Ok(r)
    }

    #[cfg(feature = "parallel")]
    fn run_all(&self, workers: Option<usize>) -> Result<Vec<Result<TrialResult>>> {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        Ok(pool.install(|| {
            (0..self.config.trials)
                .into_par_iter()
                .map(|i| self.trial(i))
                .collect()
        }))
    }

    #[cfg(not(feature = "parallel"))]
    fn run_all(&self, _workers: Option<usize>) -> Result<Vec<Result<TrialResult>>> {
        Ok((0..self.config.trials).map(|i| self.trial(i)).collect())
    }
}
