//! NSGA-II over binary masks.

use std::cmp::Ordering;

use rand::seq::index;
use rand::Rng;

use super::{Objective, Objectives, SelectionMask};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub mask: SelectionMask,
    pub objectives: Objectives,
    pub rank: usize,
    pub crowding: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsgaConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Per-gene flip probability; `None` means `1/N`.
    pub mutation_rate: Option<f64>,
    /// Put the all-zero and all-one masks into the initial population.
    pub seed_extremes: bool,
}

impl Default for NsgaConfig {
    fn default() -> Self {
        Self {
            pop_size: 100,
            generations: 100,
            mutation_rate: None,
            seed_extremes: true,
        }
    }
}

impl NsgaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 || !self.pop_size.is_multiple_of(2) {
            return Err(Error::invalid("pop_size", format!("must be even and at least 4, got {}", self.pop_size)));
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid("mutation_rate", format!("{r} is not a probability")));
            }
        }
        Ok(())
    }
}

/// `a` Pareto-dominates `b` (both objectives minimized).
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    a.info_gap <= b.info_gap
        && a.count_frac <= b.count_frac
        && (a.info_gap < b.info_gap || a.count_frac < b.count_frac)
}

/// Deb's fast non-dominated sort. Returns the fronts as index lists, best
/// first, each in ascending index order.
pub fn fast_nondominated_sort(objs: &[Objectives]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&objs[i], &objs[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Rank of every individual, from [`fast_nondominated_sort`].
pub fn ranks(objs: &[Objectives]) -> Vec<usize> {
    let mut r = vec![0; objs.len()];
    for (k, front) in fast_nondominated_sort(objs).iter().enumerate() {
        for &i in front {
            r[i] = k;
        }
    }
    r
}

/// Crowding distance of the members of one front (same order as `front`).
pub fn crowding_distance(objs: &[Objectives], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let keys: [fn(&Objectives) -> f64; 2] = [|o| o.info_gap, |o| o.count_frac];
    for key in keys {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            key(&objs[front[a]])
                .total_cmp(&key(&objs[front[b]]))
                .then(front[a].cmp(&front[b]))
        });
        let lo = key(&objs[front[order[0]]]);
        let hi = key(&objs[front[order[m - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range == 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = key(&objs[front[w[2]]]) - key(&objs[front[w[0]]]);
            dist[w[1]] += gap / range;
        }
    }
    dist
}

/// Crowded comparison: lower rank, then larger crowding, then lower index.
fn better(pop: &[Individual], a: usize, b: usize) -> usize {
    let (x, y) = (&pop[a], &pop[b]);
    match x.rank.cmp(&y.rank) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => match x.crowding.total_cmp(&y.crowding) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => a.min(b),
        },
    }
}

/// Index of the winner of a binary tournament between two uniform picks.
pub fn binary_tournament<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    better(pop, a, b)
}

/// Uniform crossover with an independent fair coin per gene.
pub fn uniform_crossover<R: Rng + ?Sized>(
    p1: &SelectionMask,
    p2: &SelectionMask,
    rng: &mut R,
) -> (SelectionMask, SelectionMask) {
    assert_eq!(p1.len(), p2.len(), "parents differ in length");
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    for i in 0..p1.len() {
        let xi = rng.random::<f64>() <= 0.5;
        if !xi {
            c1.set(i, p2.get(i));
            c2.set(i, p1.get(i));
        }
    }
    (c1, c2)
}

/// Flip each gene independently with probability `rate`.
pub fn uniform_mutation<R: Rng + ?Sized>(mut child: SelectionMask, rate: f64, rng: &mut R) -> SelectionMask {
    if rate <= 0.0 {
        return child;
    }
    for i in 0..child.len() {
        if rate >= 1.0 || rng.random::<f64>() < rate {
            child.flip(i);
        }
    }
    child
}

/// A mask whose cardinality is uniform on `0..=n`, so the initial population
/// already spans the whole count axis.
fn random_mask<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SelectionMask {
    let k = rng.random_range(0..=n);
    let picked = index::sample(rng, n, k);
    SelectionMask::from_indices(n, &picked.into_vec())
}

fn evaluate_all<O: Objective + ?Sized>(objective: &O, masks: &[SelectionMask]) -> Vec<Objectives> {
    masks.iter().map(|m| objective.evaluate(m.genes())).collect()
}

/// Rank and crowd `masks`, then keep the best `keep` by the crowded order.
fn survive(masks: Vec<SelectionMask>, objs: Vec<Objectives>, keep: usize) -> Vec<Individual> {
    let fronts = fast_nondominated_sort(&objs);
    let mut out = Vec::with_capacity(keep);
    let mut slots: Vec<Option<SelectionMask>> = masks.into_iter().map(Some).collect();
    for (rank, front) in fronts.iter().enumerate() {
        if out.len() == keep {
            break;
        }
        let crowd = crowding_distance(&objs, front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        if out.len() + front.len() > keep {
            order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(front[a].cmp(&front[b])));
            order.truncate(keep - out.len());
        }
        for k in order {
            let i = front[k];
            out.push(Individual {
                mask: slots[i].take().expect("each index used once"),
                objectives: objs[i],
                rank,
                crowding: crowd[k],
            });
        }
    }
    out
}

/// Runs NSGA-II and returns the final non-dominated set, one individual per
/// distinct objective vector (the lexicographically smallest mask wins),
/// sorted by ascending `f₂`.
pub fn nsga2_run<O: Objective + ?Sized>(
    objective: &O,
    config: &NsgaConfig,
    rng: &mut RandomSource,
) -> Result<Vec<Individual>> {
    config.validate()?;
    let n = objective.len();
    if n == 0 {
        return Err(Error::Empty("sensor field"));
    }
    let p = config.pop_size;
    let rate = config.mutation_rate.unwrap_or(1.0 / n as f64);

    let mut masks = Vec::with_capacity(p);
    if config.seed_extremes {
        masks.push(SelectionMask::zeros(n));
        masks.push(SelectionMask::ones(n));
    }
    while masks.len() < p {
        masks.push(random_mask(n, rng));
    }
    let objs = evaluate_all(objective, &masks);
    let mut pop = survive(masks, objs, p);

    for _ in 0..config.generations {
        let mut children = Vec::with_capacity(p);
        for _ in 0..p / 2 {
            let a = binary_tournament(&pop, rng);
            let b = binary_tournament(&pop, rng);
            let (c1, c2) = uniform_crossover(&pop[a].mask, &pop[b].mask, rng);
            children.push(uniform_mutation(c1, rate, rng));
            children.push(uniform_mutation(c2, rate, rng));
        }
        let child_objs = evaluate_all(objective, &children);
        let mut masks = Vec::with_capacity(2 * p);
        let mut objs = Vec::with_capacity(2 * p);
        for ind in pop {
            masks.push(ind.mask);
            objs.push(ind.objectives);
        }
        masks.extend(children);
        objs.extend(child_objs);
        pop = survive(masks, objs, p);
    }

    Ok(final_front(pop))
}

fn final_front(pop: Vec<Individual>) -> Vec<Individual> {
    let mut front: Vec<Individual> = pop.into_iter().filter(|i| i.rank == 0).collect();
    front.sort_by(|a, b| {
        a.objectives
            .count_frac
            .total_cmp(&b.objectives.count_frac)
            .then(a.objectives.info_gap.total_cmp(&b.objectives.info_gap))
            .then(a.mask.cmp(&b.mask))
    });
    front.dedup_by(|later, kept| later.objectives == kept.objectives);
    front
}

/// Spread indicator `Δ` of a front given as `(f₁, f₂)` points sorted along the
/// front. `extremes` are the ideal end points; when absent the boundary gaps
/// are zero. A single point has no spread and scores 1.
pub fn diversity_metric(front: &[(f64, f64)], extremes: Option<[(f64, f64); 2]>) -> f64 {
    if front.len() < 2 {
        return 1.0;
    }
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let gaps: Vec<f64> = front.windows(2).map(|w| dist(w[0], w[1])).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let (df, dl) = match extremes {
        Some([first, last]) => (dist(first, front[0]), dist(last, front[front.len() - 1])),
        None => (0.0, 0.0),
    };
    let denom = df + dl + gaps.len() as f64 * mean;
    if denom == 0.0 {
        return 1.0;
    }
    (df + dl + gaps.iter().map(|d| (d - mean).abs()).sum::<f64>()) / denom
}
