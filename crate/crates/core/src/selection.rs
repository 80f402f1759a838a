//! Picking one mask from a Pareto front, and the baseline selection schemes.

use crate::error::{Error, Result};
use crate::infometrics::{total_fi, MetricTable};
use crate::linalg::logdet_spd;
use crate::moo::{Individual, MiubObjective, Objective, SelectionMask};
use crate::sensing::SensorField;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub mask: SelectionMask,
    pub f1: f64,
    pub f2: f64,
}

impl From<&Individual> for FrontPoint {
    fn from(i: &Individual) -> Self {
        Self {
            mask: i.mask.clone(),
            f1: i.objectives.info_gap,
            f2: i.objectives.count_frac,
        }
    }
}

/// Which information measure scores a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Fi,
    Miub,
}

fn by_f2(a: &FrontPoint, b: &FrontPoint) -> std::cmp::Ordering {
    a.f2.total_cmp(&b.f2)
        .then(b.f1.total_cmp(&a.f1))
        .then(a.mask.cmp(&b.mask))
}

/// The point with the steepest turn of the front, measured as
/// `180 − atan(Δf₁/Δf₂)` in degrees against its left neighbour. The empty
/// selection `(1, 0)` anchors the left end and is never returned itself.
pub fn knee_point(front: &[FrontPoint]) -> Result<FrontPoint> {
    let mut pts: Vec<&FrontPoint> = front.iter().collect();
    pts.sort_by(|a, b| by_f2(a, b));
    pts.dedup_by(|b, a| a.f1 == b.f1 && a.f2 == b.f2);
    let anchor = (1.0, 0.0);
    let mut coords: Vec<(f64, f64)> = pts.iter().map(|p| (p.f1, p.f2)).collect();
    let offset = match coords.first() {
        Some(&(_, f2)) if f2 == 0.0 => 0,
        _ => {
            coords.insert(0, anchor);
            1
        }
    };
    if coords.len() < 2 {
        return Err(Error::invalid("front", "knee point needs a point besides the anchor"));
    }
    let mut best: Option<(usize, f64)> = None;
    for b in 1..coords.len() {
        let (f1a, f2a) = coords[b - 1];
        let (f1b, f2b) = coords[b];
        let slope = 180.0 - ((f1a - f1b) / (f2a - f2b)).atan().to_degrees();
        if best.is_none_or(|(_, s)| slope > s) {
            best = Some((b, slope));
        }
    }
    let (b, _) = best.expect("at least one candidate");
    Ok(pts[b - offset].clone())
}

/// The point nearest the utopia point `(0, 0)`.
pub fn compromise(front: &[FrontPoint]) -> Result<FrontPoint> {
    front
        .iter()
        .min_by(|a, b| {
            let da = a.f1.hypot(a.f2);
            let db = b.f1.hypot(b.f2);
            da.total_cmp(&db).then(by_f2(a, b))
        })
        .cloned()
        .ok_or(Error::Empty("front"))
}

fn check_weight(w1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w1) {
        return Err(Error::invalid("w1", format!("{w1} is not in [0, 1]")));
    }
    Ok(())
}

/// Minimizer of `w₁f₁ + (1−w₁)f₂` for the MIUB objectives. `f₁` is additive,
/// so sensor `i` is worth selecting iff `w₁·shareᵢ ≥ (1−w₁)/N`.
pub fn weighted_sum_miub(objective: &MiubObjective, w1: f64) -> Result<SelectionMask> {
    check_weight(w1)?;
    let cost = (1.0 - w1) / objective.len() as f64;
    Ok(SelectionMask::new(objective.shares().map(|s| w1 * s >= cost).collect()))
}

/// Minimizer of `w₁f₁ + (1−w₁)f₂` among the points of a front.
pub fn weighted_sum_front(front: &[FrontPoint], w1: f64) -> Result<FrontPoint> {
    check_weight(w1)?;
    front
        .iter()
        .min_by(|a, b| {
            let sa = w1 * a.f1 + (1.0 - w1) * a.f2;
            let sb = w1 * b.f1 + (1.0 - w1) * b.f2;
            sa.total_cmp(&sb).then(by_f2(a, b))
        })
        .cloned()
        .ok_or(Error::Empty("front"))
}

/// Drops every sensor with `p_s < p_th`; the survivors keep their ids.
pub fn threshold_prefilter(field: &SensorField, p_th: f64) -> Result<SensorField> {
    if !(0.0..=1.0).contains(&p_th) {
        return Err(Error::invalid("p_th", format!("{p_th} is not a probability")));
    }
    let kept: Vec<_> = field
        .sensors
        .iter()
        .filter(|s| s.sensing_prob >= p_th)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::Empty("sensor field after prefiltering"));
    }
    SensorField::new(kept)
}

/// Largest number of subsets scanned before falling back to greedy search.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn fi_logdet(mask: &[bool], table: &MetricTable) -> f64 {
    logdet_spd(&total_fi(mask, table).0).0
}

/// Forward selection: repeatedly add the sensor that most increases the
/// log-det of the accumulated information (lowest index on ties).
pub fn greedy_fi_select(table: &MetricTable, a: usize) -> SelectionMask {
    let n = table.len();
    let mut mask = vec![false; n];
    for _ in 0..a.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if mask[i] {
                continue;
            }
            mask[i] = true;
            let v = fi_logdet(&mask, table);
            mask[i] = false;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        mask[best.expect("a sensor is left").0] = true;
    }
    SelectionMask::new(mask)
}

/// The `a`-subset with the largest log-det, first in lexicographic order on
/// ties.
pub fn exhaustive_fi_select(table: &MetricTable, a: usize) -> SelectionMask {
    let n = table.len();
    let a = a.min(n);
    let mut idx: Vec<usize> = (0..a).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let v = fi_logdet(SelectionMask::from_indices(n, &idx).genes(), table);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((idx.clone(), v));
        }
        // next combination
        let Some(pos) = (0..a).rev().find(|&p| idx[p] < n - a + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..a {
            idx[p] = idx[p - 1] + 1;
        }
    }
    SelectionMask::from_indices(n, &best.expect("one combination").0)
}

/// Always select `a` sensors: the `a` largest single-sensor MI values, or the
/// best log-det subset (exhaustive when small enough, greedy otherwise).
pub fn top_a_select(table: &MetricTable, a: usize, metric: Metric) -> Result<SelectionMask> {
    let n = table.len();
    if a > n {
        return Err(Error::invalid("A", format!("{a} exceeds the {n} available sensors")));
    }
    Ok(match metric {
        Metric::Miub => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| table.per_sensor_mi[j].total_cmp(&table.per_sensor_mi[i]).then(i.cmp(&j)));
            SelectionMask::from_indices(n, &order[..a])
        }
        Metric::Fi if binomial(n, a) <= EXHAUSTIVE_LIMIT => exhaustive_fi_select(table, a),
        Metric::Fi => greedy_fi_select(table, a),
    })
}
