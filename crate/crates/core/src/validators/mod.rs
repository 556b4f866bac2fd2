//! Independent oracles for the theory behind the solvers: dense linear
//! algebra, dense-simplex LPs and exhaustive enumeration. They are slow on
//! purpose and share no numerics with the production solvers.

mod beckmann;
mod cuts;
mod instances;
mod lattice;
mod robustness;
mod suite;

pub use beckmann::{beckmann_oracle, beckmann_signed, dual_norm_weights, weighted_norm};
pub use cuts::{exhaustive_st_mincut, mincut_maxflow_lp, monte_carlo_cuts, randomized_cut_check, MincutReport, MonteCarloCut, RandomizedCut};
pub use instances::{random_connected_graph, random_graph_with, random_measure_pair, random_probability};
pub use lattice::{lattice_benchmark, lattice_instance, write_lattice_csv, LatticeBenchmark, LATTICE_SIDE};
pub use robustness::{label_flip_perturbation, robustness_bound_check, RobustnessRow, RobustnessTable, ROBUSTNESS_MAX_NODES};
pub use suite::{
    check_effective_resistance, check_exhaustive_mincut, check_gauge_duality, check_lp_duality, check_prox_oracles, check_randomized_cuts,
    check_robustness, duality_report, prox_max_oracle, prox_scalar_oracle, run_validation_suite, write_validation_csv, DualityReport,
    SuiteOptions, ValidationRecord,
};

/// Node limit of the LP and Beckmann oracles.
pub const ORACLE_MAX_NODES: usize = 20;
