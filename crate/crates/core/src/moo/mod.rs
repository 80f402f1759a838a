//! Multiobjective sensor selection with NSGA-II.

mod mask;
mod nsga;
mod objectives;

pub use mask::SelectionMask;
pub use nsga::{
    binary_tournament, crowding_distance, diversity_metric, dominates, fast_nondominated_sort,
    nsga2_run, ranks, uniform_crossover, uniform_mutation, Individual, NsgaConfig,
};
pub use objectives::{FiGap, FiObjective, MiubObjective, Objective, Objectives};
