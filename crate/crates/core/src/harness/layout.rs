//! Sensing-probability maps for the grid.

use rand::Rng;

use super::config::{ExperimentConfig, Layout};
use crate::error::Result;
use crate::rng::{self, stream};
use crate::sensing::SensorField;

const JITTER: f64 = 0.02;

/// Sensing probability of every grid sensor under the configured layout.
///
/// The track layouts measure each sensor's distance to the nominal track (the
/// line through the nominal start along its velocity), normalize it by the
/// largest such distance, and map it through `0.05 + 0.9·t^0.7`; a small seeded
/// jitter keeps mirror-image sensors from tying exactly.
pub fn sensing_probabilities(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let m = config.field.grid;
    let n = m * m;
    let mut r = rng::derived(config.field.layout_seed, &[stream::LAYOUT]);
    let mut jitter = || r.random_range(-JITTER..JITTER);
    Ok(match &config.field.layout {
        Layout::Custom(p) => p.clone(),
        Layout::Reliable => vec![1.0; n],
        Layout::UniformRandom => {
            let mut r = rng::derived(config.field.layout_seed, &[stream::LAYOUT]);
            (0..n).map(|_| r.random_range(0.05..0.95)).collect()
        }
        layout @ (Layout::TrackLow | Layout::TrackHigh) => {
            let field = SensorField::grid(m, config.field.side, &vec![1.0; n])?;
            let start = config.nominal_start();
            let speed = start.vx.hypot(start.vy);
            let dist: Vec<f64> = field
                .sensors
                .iter()
                .map(|s| {
                    let (dx, dy) = (s.x - start.x, s.y - start.y);
                    if speed > 0.0 {
                        (dx * start.vy - dy * start.vx).abs() / speed
                    } else {
                        dx.hypot(dy)
                    }
                })
                .collect();
            let far = dist.iter().cloned().fold(0.0, f64::max);
            dist.iter()
                .map(|&d| {
                    let t = if far > 0.0 { d / far } else { 0.0 };
                    let shape = 0.9 * t.powf(0.7);
                    let p = match layout {
                        Layout::TrackLow => 0.05 + shape,
                        _ => 0.95 - shape,
                    };
                    (p + jitter()).clamp(0.0, 1.0)
                })
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn track_layouts_are_mirrored() {
        let c = ExperimentConfig::default();
        let low = sensing_probabilities(&c).unwrap();
        let high = sensing_probabilities(&ExperimentConfig {
            field: super::super::config::FieldSpec {
                layout: Layout::TrackHigh,
                ..c.field.clone()
            },
            ..c.clone()
        })
        .unwrap();
        assert_eq!(low.len(), 36);
        // diagonal sensors sit on the track
        for k in [0, 7, 14, 21, 28, 35] {
            assert!(low[k] < 0.2, "{k}: {}", low[k]);
            assert!(high[k] > 0.8);
        }
        // far corners are reliable in the default layout
        assert!(low[5] > 0.9 && low[30] > 0.9);
        for (a, b) in low.iter().zip(&high) {
            assert!((a + b - 1.0).abs() <= 2.0 * JITTER + 1e-12);
        }
        assert_eq!(sensing_probabilities(&c).unwrap(), low);
    }

    #[test]
    fn other_layouts() {
        let mut c = ExperimentConfig::default();
        c.field.layout = Layout::Reliable;
        assert_eq!(sensing_probabilities(&c).unwrap(), vec![1.0; 36]);
        c.field.layout = Layout::UniformRandom;
        let p = sensing_probabilities(&c).unwrap();
        assert!(p.iter().all(|v| (0.05..0.95).contains(v)));
    }
}
