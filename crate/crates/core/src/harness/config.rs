//! Flat `section.key = value` configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::dynamics::TargetState;
use crate::error::{Error, Result};
use crate::moo::{FiGap, NsgaConfig};
use crate::selection::Metric;
use crate::sensing::SignalModel;

/// How sensing probabilities are assigned to the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Low probabilities along the target's nominal track, high far from it.
    TrackLow,
    /// The reverse of `TrackLow`.
    TrackHigh,
    UniformRandom,
    /// Every sensor always observes the target.
    Reliable,
    /// Explicit row-major probabilities from the lower-left corner.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataKind {
    Analog,
    Quantized { bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Nsga,
    WeightedSum { weight: f64 },
    FixedA { count: usize },
}

/// Which point of the Pareto front is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Compromise,
    Knee,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub grid: usize,
    pub side: f64,
    pub layout: Layout,
    pub layout_seed: u64,
    /// Sensors below this sensing probability are switched off.
    pub prefilter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectSpec {
    pub metric: Metric,
    pub scheme: Scheme,
    pub rule: Rule,
    pub fi_gap: FiGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub signal: SignalModel,
    pub data: DataKind,
    pub interval: f64,
    pub process_noise: f64,
    pub prior_mean: TargetState,
    pub prior_sigma_pos: f64,
    pub prior_var_vel: f64,
    /// Fixed ground-truth initial state; drawn from the prior per trial when
    /// unset.
    pub truth_start: Option<TargetState>,
    pub particles: usize,
    pub select: SelectSpec,
    pub nsga: NsgaConfig,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field: FieldSpec {
                grid: 6,
                side: 50.0,
                layout: Layout::TrackLow,
                layout_seed: 7,
                prefilter: None,
            },
            signal: SignalModel::default(),
            data: DataKind::Quantized { bits: 5 },
            interval: 1.25,
            process_noise: 2.5e-3,
            prior_mean: TargetState::new(-23.0, -24.0, 2.0, 2.0),
            prior_sigma_pos: 6.0,
            prior_var_vel: 0.01,
            truth_start: None,
            particles: 5000,
            select: SelectSpec {
                metric: Metric::Miub,
                scheme: Scheme::Nsga,
                rule: Rule::Compromise,
                fi_gap: FiGap::Prior,
            },
            nsga: NsgaConfig::default(),
            steps: 20,
            trials: 500,
            seed: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

fn parse_state(key: &str, v: &str) -> Result<TargetState> {
    match parse_list(key, v)?.as_slice() {
        &[x, y, vx, vy] => Ok(TargetState::new(x, y, vx, vy)),
        other => Err(Error::config(key, format!("expected 4 values, got {}", other.len()))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("`{v}` is not a boolean"))),
    }
}

/// Parses the key-value text. Blank lines and `#` comments are ignored;
/// unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", n + 1), "expected `key = value`"))?;
        let k = k.trim().to_string();
        if entries.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::config(k, "given more than once"));
        }
    }

    let mut c = ExperimentConfig::default();
    let mut data_kind: Option<String> = None;
    let mut bits: Option<u32> = None;
    let mut scheme: Option<String> = None;
    let mut weight = 0.5;
    let mut count = 1usize;
    let mut probabilities: Option<Vec<f64>> = None;
    let mut layout_name: Option<String> = None;

    for (k, v) in &entries {
        let (k, v) = (k.as_str(), v.as_str());
        match k {
            "field.grid" => c.field.grid = parse(k, v)?,
            "field.side" => c.field.side = parse(k, v)?,
            "field.layout" => layout_name = Some(v.to_string()),
            "field.probabilities" => probabilities = Some(parse_list(k, v)?),
            "field.layout_seed" => c.field.layout_seed = parse(k, v)?,
            "field.prefilter" => {
                c.field.prefilter = match v {
                    "none" => None,
                    _ => Some(parse(k, v)?),
                }
            }
            "signal.p0" => c.signal.source_power = parse(k, v)?,
            "signal.alpha" => c.signal.atten_scale = parse(k, v)?,
            "signal.exponent" => c.signal.decay_exponent = parse(k, v)?,
            "signal.sigma" => c.signal.noise_std = parse(k, v)?,
            "data.kind" => data_kind = Some(v.to_string()),
            "data.bits" => bits = Some(parse(k, v)?),
            "motion.interval" => c.interval = parse(k, v)?,
            "motion.q" => c.process_noise = parse(k, v)?,
            "prior.mean" => c.prior_mean = parse_state(k, v)?,
            "prior.sigma_pos" => c.prior_sigma_pos = parse(k, v)?,
            "prior.var_vel" => c.prior_var_vel = parse(k, v)?,
            "truth.start" => {
                c.truth_start = match v {
                    "sample" => None,
                    _ => Some(parse_state(k, v)?),
                }
            }
            "filter.particles" => c.particles = parse(k, v)?,
            "select.metric" => {
                c.select.metric = match v {
                    "fi" => Metric::Fi,
                    "miub" => Metric::Miub,
                    _ => return Err(Error::config(k, format!("`{v}` is not one of fi, miub"))),
                }
            }
            "select.scheme" => scheme = Some(v.to_string()),
            "select.weight" => weight = parse(k, v)?,
            "select.count" => count = parse(k, v)?,
            "select.rule" => {
                c.select.rule = match v {
                    "compromise" => Rule::Compromise,
                    "knee" => Rule::Knee,
                    _ => return Err(Error::config(k, format!("`{v}` is not one of compromise, knee"))),
                }
            }
            "select.fi_gap" => {
                c.select.fi_gap = match v {
                    "prior" => FiGap::Prior,
                    "total" => FiGap::Total,
                    _ => return Err(Error::config(k, format!("`{v}` is not one of prior, total"))),
                }
            }
            "nsga.population" => c.nsga.pop_size = parse(k, v)?,
            "nsga.generations" => c.nsga.generations = parse(k, v)?,
            "nsga.mutation_rate" => {
                c.nsga.mutation_rate = match v {
                    "auto" => None,
                    _ => Some(parse(k, v)?),
                }
            }
            "nsga.seed_extremes" => c.nsga.seed_extremes = parse_bool(k, v)?,
            "run.steps" => c.steps = parse(k, v)?,
            "run.trials" => c.trials = parse(k, v)?,
            "run.seed" => c.seed = parse(k, v)?,
            _ => return Err(Error::config(k, "unknown key")),
        }
    }

    c.data = match data_kind.as_deref().unwrap_or("quantized") {
        "analog" => {
            if bits.is_some() {
                return Err(Error::config("data.bits", "only meaningful with data.kind = quantized"));
            }
            DataKind::Analog
        }
        "quantized" => DataKind::Quantized { bits: bits.unwrap_or(5) },
        other => return Err(Error::config("data.kind", format!("`{other}` is not one of analog, quantized"))),
    };
    c.select.scheme = match scheme.as_deref().unwrap_or("nsga") {
        "nsga" => Scheme::Nsga,
        "weighted_sum" => Scheme::WeightedSum { weight },
        "fixed_a" => Scheme::FixedA { count },
        other => {
            return Err(Error::config(
                "select.scheme",
                format!("`{other}` is not one of nsga, weighted_sum, fixed_a"),
            ))
        }
    };
    if !matches!(c.select.scheme, Scheme::WeightedSum { .. }) && entries.contains_key("select.weight") {
        return Err(Error::config("select.weight", "only meaningful with select.scheme = weighted_sum"));
    }
    if !matches!(c.select.scheme, Scheme::FixedA { .. }) && entries.contains_key("select.count") {
        return Err(Error::config("select.count", "only meaningful with select.scheme = fixed_a"));
    }
    c.field.layout = match (layout_name.as_deref(), probabilities) {
        (Some("custom") | None, Some(p)) => Layout::Custom(p),
        (Some("custom"), None) => return Err(Error::config("field.probabilities", "required by the custom layout")),
        (_, Some(_)) => return Err(Error::config("field.probabilities", "only meaningful with field.layout = custom")),
        (None | Some("track_low"), None) => Layout::TrackLow,
        (Some("track_high"), None) => Layout::TrackHigh,
        (Some("uniform_random"), None) => Layout::UniformRandom,
        (Some("reliable"), None) => Layout::Reliable,
        (Some(other), None) => {
            return Err(Error::config(
                "field.layout",
                format!("`{other}` is not one of track_low, track_high, uniform_random, reliable, custom"),
            ))
        }
    };
    c.validate()?;
    Ok(c)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.field.grid < 1 {
            return Err(Error::config("field.grid", "must be at least 1"));
        }
        positive("field.side", self.field.side)?;
        if let Layout::Custom(p) = &self.field.layout {
            let n = self.field.grid * self.field.grid;
            if p.len() != n {
                return Err(Error::config("field.probabilities", format!("expected {n} values, got {}", p.len())));
            }
            if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::config("field.probabilities", format!("{bad} is not a probability")));
            }
        }
        if let Some(p) = self.field.prefilter {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config("field.prefilter", format!("{p} is not a probability")));
            }
        }
        positive("signal.p0", self.signal.source_power)?;
        positive("signal.alpha", self.signal.atten_scale)?;
        positive("signal.exponent", self.signal.decay_exponent)?;
        positive("signal.sigma", self.signal.noise_std)?;
        if let DataKind::Quantized { bits } = self.data {
            if !(1..=16).contains(&bits) {
                return Err(Error::config("data.bits", format!("must be in 1..=16, got {bits}")));
            }
        }
        positive("motion.interval", self.interval)?;
        if !(self.process_noise >= 0.0) {
            return Err(Error::config("motion.q", "must be non-negative"));
        }
        if !self.prior_mean.is_finite() {
            return Err(Error::config("prior.mean", "must be finite"));
        }
        positive("prior.sigma_pos", self.prior_sigma_pos)?;
        if !(self.prior_var_vel >= 0.0) {
            return Err(Error::config("prior.var_vel", "must be non-negative"));
        }
        if self.particles < 1 {
            return Err(Error::config("filter.particles", "must be at least 1"));
        }
        match self.select.scheme {
            Scheme::WeightedSum { weight } if !(0.0..=1.0).contains(&weight) => {
                return Err(Error::config("select.weight", format!("{weight} is not in [0, 1]")))
            }
            Scheme::FixedA { count } if count > self.field.grid * self.field.grid => {
                return Err(Error::config("select.count", format!("{count} exceeds the number of sensors")))
            }
            _ => {}
        }
        self.nsga
            .validate()
            .map_err(|e| Error::config("nsga", e.to_string()))?;
        if self.steps < 1 {
            return Err(Error::config("run.steps", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::config("run.trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Where the target nominally starts: the fixed truth start, else the
    /// prior mean.
    pub fn nominal_start(&self) -> TargetState {
        self.truth_start.unwrap_or(self.prior_mean)
    }

    /// Every key with its resolved value, in the same syntax `parse_config`
    /// reads. Floats print in their shortest round-trip form.
    pub fn to_text(&self) -> String {
        let state = |s: &TargetState| format!("{}, {}, {}, {}", s.x, s.y, s.vx, s.vy);
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("field.grid", self.field.grid.to_string());
        kv("field.side", self.field.side.to_string());
        match &self.field.layout {
            Layout::Custom(p) => {
                kv("field.layout", "custom".into());
                kv(
                    "field.probabilities",
                    p.iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
                );
            }
            other => kv(
                "field.layout",
                match other {
                    Layout::TrackLow => "track_low",
                    Layout::TrackHigh => "track_high",
                    Layout::UniformRandom => "uniform_random",
                    Layout::Reliable => "reliable",
                    Layout::Custom(_) => unreachable!(),
                }
                .into(),
            ),
        }
        kv("field.layout_seed", self.field.layout_seed.to_string());
        kv(
            "field.prefilter",
            self.field.prefilter.map_or("none".into(), |p| p.to_string()),
        );
        kv("signal.p0", self.signal.source_power.to_string());
        kv("signal.alpha", self.signal.atten_scale.to_string());
        kv("signal.exponent", self.signal.decay_exponent.to_string());
        kv("signal.sigma", self.signal.noise_std.to_string());
        match self.data {
            DataKind::Analog => kv("data.kind", "analog".into()),
            DataKind::Quantized { bits } => {
                kv("data.kind", "quantized".into());
                kv("data.bits", bits.to_string());
            }
        }
        kv("motion.interval", self.interval.to_string());
        kv("motion.q", self.process_noise.to_string());
        kv("prior.mean", state(&self.prior_mean));
        kv("prior.sigma_pos", self.prior_sigma_pos.to_string());
        kv("prior.var_vel", self.prior_var_vel.to_string());
        kv("truth.start", self.truth_start.as_ref().map_or("sample".into(), state));
        kv("filter.particles", self.particles.to_string());
        kv(
            "select.metric",
            match self.select.metric {
                Metric::Fi => "fi",
                Metric::Miub => "miub",
            }
            .into(),
        );
        match self.select.scheme {
            Scheme::Nsga => kv("select.scheme", "nsga".into()),
            Scheme::WeightedSum { weight } => {
                kv("select.scheme", "weighted_sum".into());
                kv("select.weight", weight.to_string());
            }
            Scheme::FixedA { count } => {
                kv("select.scheme", "fixed_a".into());
                kv("select.count", count.to_string());
            }
        }
        kv(
            "select.rule",
            match self.select.rule {
                Rule::Compromise => "compromise",
                Rule::Knee => "knee",
            }
            .into(),
        );
        kv(
            "select.fi_gap",
            match self.select.fi_gap {
                FiGap::Prior => "prior",
                FiGap::Total => "total",
            }
            .into(),
        );
        kv("nsga.population", self.nsga.pop_size.to_string());
        kv("nsga.generations", self.nsga.generations.to_string());
        kv(
            "nsga.mutation_rate",
            self.nsga.mutation_rate.map_or("auto".into(), |r| r.to_string()),
        );
        kv("nsga.seed_extremes", self.nsga.seed_extremes.to_string());
        kv("run.steps", self.steps.to_string());
        kv("run.trials", self.trials.to_string());
        kv("run.seed", self.seed.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.field.grid, 6);
        assert_eq!(c.field.side, 50.0);
        assert_eq!(c.signal.source_power, 1000.0);
        assert_eq!(c.signal.noise_std, 0.2);
        assert_eq!(c.interval, 1.25);
        assert_eq!(c.process_noise, 2.5e-3);
        assert_eq!(c.prior_mean, TargetState::new(-23.0, -24.0, 2.0, 2.0));
        assert_eq!(c.prior_sigma_pos, 6.0);
        assert_eq!(c.particles, 5000);
        assert_eq!((c.nsga.pop_size, c.nsga.generations), (100, 100));
        assert_eq!((c.steps, c.trials), (20, 500));
    }

    #[test]
    fn schema_violations_name_the_key() {
        let err = parse_config("data.kind = quantized\ndata.bits = 0").unwrap_err();
        assert!(err.to_string().contains("data.bits"), "{err}");
        let err = parse_config("run.trials = -1").unwrap_err();
        assert!(err.to_string().contains("run.trials"), "{err}");
        let err = parse_config("signal.pO = 3").unwrap_err();
        assert!(err.to_string().contains("signal.pO"), "{err}");
        assert!(parse_config("run.steps = 3\nrun.steps = 4").is_err());
        assert!(parse_config("select.weight = 0.5").is_err());
        assert!(parse_config("field.layout = custom").is_err());
        assert!(parse_config("field.grid = 2\nfield.probabilities = 1, 0.5, 0.2").is_err());
        assert!(parse_config("nsga.population = 5").is_err());
        assert!(parse_config("garbage").is_err());
    }

    #[test]
    fn values_are_read() {
        let c = parse_config(
            "# comment\n\
             data.kind = analog\n\
             select.metric = fi   # trailing\n\
             select.scheme = weighted_sum\n\
             select.weight = 0.25\n\
             field.grid = 2\n\
             field.probabilities = 1, 0.5, 0.2, 0\n\
             truth.start = 1, 2, 3, 4\n\
             nsga.mutation_rate = 0.1\n",
        )
        .unwrap();
        assert_eq!(c.data, DataKind::Analog);
        assert_eq!(c.select.metric, Metric::Fi);
        assert_eq!(c.select.scheme, Scheme::WeightedSum { weight: 0.25 });
        assert_eq!(c.field.layout, Layout::Custom(vec![1.0, 0.5, 0.2, 0.0]));
        assert_eq!(c.nominal_start(), TargetState::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(c.nsga.mutation_rate, Some(0.1));
    }

    #[test]
    fn text_round_trips() {
        let mut c = ExperimentConfig::default();
        c.signal.noise_std = 0.1 + 0.2;
        c.select.scheme = Scheme::FixedA { count: 3 };
        c.field.prefilter = Some(0.15);
        c.truth_start = Some(TargetState::new(-23.5, -24.0, 2.0, 1.9));
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let d = ExperimentConfig {
            data: DataKind::Analog,
            field: FieldSpec {
                layout: Layout::Custom(vec![0.3; 36]),
                ..c.field.clone()
            },
            ..c
        };
        assert_eq!(parse_config(&d.to_text()).unwrap(), d);
    }
}
