//! The two-objective formulations: information gap vs. normalized sensor count.

use crate::error::{Error, Result};
use crate::infometrics::MetricTable;
use crate::linalg::{logdet_spd, Mat4};
use nalgebra::Matrix2;

/// `f₁` (information gap) and `f₂` (fraction of sensors selected), both
/// minimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objectives {
    pub info_gap: f64,
    pub count_frac: f64,
}

impl Objectives {
    pub fn new(info_gap: f64, count_frac: f64) -> Self {
        Self {
            info_gap,
            count_frac,
        }
    }
}

/// A two-objective function over selection masks.
pub trait Objective: Sync {
    /// Number of genes.
    fn len(&self) -> usize;

    fn evaluate(&self, mask: &[bool]) -> Objectives;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn count_frac(mask: &[bool]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    mask.iter().filter(|&&g| g).count() as f64 / mask.len() as f64
}

/// How the log-det gap is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiGap {
    /// `(L_all − L_α) / (L_all − L_prior)`: exactly 1 for the empty selection
    /// and independent of the units of the state.
    #[default]
    Prior,
    /// `(L_all − L_α) / L_all`.
    Total,
}

/// Log-det gap of `J_P + Σ αᵢ J_i`.
///
/// Sensor information only touches the position block, so the log-det is
/// `logdet(J_vv) + logdet(S + Σ αᵢ J_i,pp)` with `S` the Schur complement of the
/// prior's velocity block; only 2×2 determinants are needed per evaluation.
#[derive(Debug, Clone)]
pub struct FiObjective {
    blocks: Vec<[f64; 3]>,
    base: Base,
    full: f64,
    denom: f64,
    shift: f64,
}

#[derive(Debug, Clone)]
enum Base {
    Schur([f64; 3]),
    // velocity block of the prior not invertible
    Dense(Mat4, Vec<Mat4>),
}

fn logdet2(m: [f64; 3]) -> f64 {
    let det = m[0] * m[2] - m[1] * m[1];
    det.max(f64::MIN_POSITIVE).ln()
}

impl FiObjective {
    pub fn new(table: &MetricTable, gap: FiGap) -> Result<Self> {
        let prior = table.prior_fi.0;
        let blocks: Vec<[f64; 3]> = table
            .per_sensor_fi
            .iter()
            .map(|f| [f.0[(0, 0)], 0.5 * (f.0[(0, 1)] + f.0[(1, 0)]), f.0[(1, 1)]])
            .collect();
        let vv = Matrix2::new(prior[(2, 2)], prior[(2, 3)], prior[(3, 2)], prior[(3, 3)]);
        let (base, velocity_ld) = match vv.cholesky() {
            Some(c) => {
                let pv = prior.fixed_view::<2, 2>(0, 2).into_owned();
                let s = prior.fixed_view::<2, 2>(0, 0).into_owned() - pv * c.solve(&pv.transpose());
                let ld = c.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum::<f64>();
                (Base::Schur([s[(0, 0)], 0.5 * (s[(0, 1)] + s[(1, 0)]), s[(1, 1)]]), ld)
            }
            None => {
                let dense = table.per_sensor_fi.iter().map(|f| f.0).collect();
                (Base::Dense(prior, dense), 0.0)
            }
        };
        let mut obj = Self {
            blocks,
            base,
            full: 0.0,
            denom: 1.0,
            shift: velocity_ld,
        };
        let n = obj.blocks.len();
        let full = obj.logdet(&vec![true; n]);
        let empty = obj.logdet(&vec![false; n]);
        let denom = match gap {
            FiGap::Prior => full - empty,
            FiGap::Total => full + obj.shift,
        };
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::DegenerateScale(format!(
                "log-det normalizer {denom} is not positive"
            )));
        }
        obj.full = full;
        obj.denom = denom;
        Ok(obj)
    }

    /// Log-det of the accumulated information, without the velocity offset
    /// (which cancels in every gap).
    fn logdet(&self, mask: &[bool]) -> f64 {
        match &self.base {
            Base::Schur(s) => {
                let mut m = *s;
                for (b, _) in self.blocks.iter().zip(mask).filter(|(_, &g)| g) {
                    m[0] += b[0];
                    m[1] += b[1];
                    m[2] += b[2];
                }
                logdet2(m)
            }
            Base::Dense(prior, sensors) => {
                let mut m = *prior;
                for (j, _) in sensors.iter().zip(mask).filter(|(_, &g)| g) {
                    m += j;
                }
                logdet_spd(&m).0
            }
        }
    }

    /// Full log-det of `J_P + Σ αᵢ J_i`.
    pub fn total_logdet(&self, mask: &[bool]) -> f64 {
        self.logdet(mask) + self.shift
    }
}

impl Objective for FiObjective {
    fn len(&self) -> usize {
        self.blocks.len()
    }

    fn evaluate(&self, mask: &[bool]) -> Objectives {
        let gap = ((self.full - self.logdet(mask)) / self.denom).max(0.0);
        Objectives::new(gap, count_frac(mask))
    }
}

/// Normalized gap of the mutual-information upper bound.
#[derive(Debug, Clone)]
pub struct MiubObjective {
    mi: Vec<f64>,
    total: f64,
}

impl MiubObjective {
    pub fn new(table: &MetricTable) -> Result<Self> {
        let total: f64 = table.per_sensor_mi.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateScale(format!(
                "total single-sensor MI {total} is not positive"
            )));
        }
        Ok(Self {
            mi: table.per_sensor_mi.clone(),
            total,
        })
    }

    /// Each sensor's share of the total MIUB.
    pub fn shares(&self) -> impl Iterator<Item = f64> + '_ {
        self.mi.iter().map(move |v| v / self.total)
    }
}

impl Objective for MiubObjective {
    fn len(&self) -> usize {
        self.mi.len()
    }

    fn evaluate(&self, mask: &[bool]) -> Objectives {
        // summing what is left out makes the all-one mask exactly 0
        let missing: f64 = self.mi.iter().zip(mask).filter(|(_, &g)| !g).map(|(v, _)| v).sum();
        Objectives::new(missing / self.total, count_frac(mask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infometrics::FisherMatrix;
    use crate::rng;
    use rand::Rng;

    fn random_table(n: usize, seed: u64) -> MetricTable {
        let mut r = rng::source(seed);
        let per_sensor_fi = (0..n)
            .map(|_| {
                let g = nalgebra::Vector2::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
                let mut m = Mat4::zeros();
                m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(g * g.transpose() * r.random_range(0.1..5.0)));
                FisherMatrix(m)
            })
            .collect();
        let a = Mat4::from_fn(|_, _| r.random_range(-1.0..1.0));
        let prior = a * a.transpose() + Mat4::identity() * 0.5;
        MetricTable {
            per_sensor_fi,
            per_sensor_mi: (0..n).map(|_| r.random_range(0.0..2.0)).collect(),
            prior_fi: FisherMatrix(prior),
            prior_jittered: false,
        }
    }

    #[test]
    fn fi_extremes_and_count() {
        let t = random_table(36, 60);
        let f = FiObjective::new(&t, FiGap::Prior).unwrap();
        assert_eq!(f.evaluate(&[true; 36]), Objectives::new(0.0, 1.0));
        let zero = f.evaluate(&[false; 36]);
        assert!((zero.info_gap - 1.0).abs() < 1e-12);
        assert_eq!(zero.count_frac, 0.0);
        let mut nine = [false; 36];
        nine[..9].iter_mut().for_each(|g| *g = true);
        assert_eq!(f.evaluate(&nine).count_frac, 0.25);
    }

    #[test]
    fn schur_path_matches_dense_logdet() {
        let t = random_table(8, 61);
        let f = FiObjective::new(&t, FiGap::Total).unwrap();
        let mut r = rng::source(62);
        for _ in 0..50 {
            let mask: Vec<bool> = (0..8).map(|_| r.random_bool(0.5)).collect();
            let dense = logdet_spd(&crate::infometrics::total_fi(&mask, &t).0).0;
            assert!((f.total_logdet(&mask) - dense).abs() < 1e-10 * dense.abs().max(1.0));
            let full = logdet_spd(&crate::infometrics::total_fi(&[true; 8], &t).0).0;
            let verbatim = (full - dense) / full;
            assert!((f.evaluate(&mask).info_gap - verbatim.max(0.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn fi_gap_is_monotone() {
        let t = random_table(6, 63);
        let f = FiObjective::new(&t, FiGap::Prior).unwrap();
        for bits in 0u32..64 {
            let mask: Vec<bool> = (0..6).map(|i| bits >> i & 1 == 1).collect();
            let base = f.evaluate(&mask).info_gap;
            assert!((0.0..=1.0 + 1e-12).contains(&base));
            for i in (0..6).filter(|&i| !mask[i]) {
                let mut more = mask.clone();
                more[i] = true;
                assert!(f.evaluate(&more).info_gap <= base + 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_scales_are_rejected() {
        let mut t = random_table(4, 64);
        t.per_sensor_fi.iter_mut().for_each(|f| *f = FisherMatrix::zeros());
        assert!(matches!(FiObjective::new(&t, FiGap::Prior), Err(Error::DegenerateScale(_))));
        t.per_sensor_mi = vec![0.0; 4];
        assert!(matches!(MiubObjective::new(&t), Err(Error::DegenerateScale(_))));
    }

    #[test]
    fn miub_gap() {
        let mut t = random_table(4, 65);
        t.per_sensor_mi = vec![0.7; 4];
        let m = MiubObjective::new(&t).unwrap();
        assert_eq!(m.evaluate(&[true; 4]).info_gap, 0.0);
        assert_eq!(m.evaluate(&[false; 4]).info_gap, 1.0);
        assert!((m.evaluate(&[true, false, true, false]).info_gap - 0.5).abs() < 1e-15);
    }
}
