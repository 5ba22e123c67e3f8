//! Compressor sequencing and thermal load shifting for industrial
//! refrigeration fleets with affine power–heat curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fleet;
pub mod loadshift;
pub mod online;
pub mod profile;
pub mod stage_cost;
pub mod static_opt;
pub mod waterfill;

pub use analysis::{
    bounds_report, compare, gap_sweep, partition_report, BoundsReport, Comparison,
    ComparisonReport, GapSweep, MethodCosts, PartitionReport,
};
pub use error::{Error, Result};
pub use fleet::{Compressor, Fleet, SavingsBound, SequencingOrder};
pub use loadshift::{
    dp_slack, fixed_order_extremes, fixed_order_trajectory, optimal_shift, savings_gap,
    static_trajectory, tiny_oracle, worst_case_profiles, FixedOrderExtremes, ShiftOptions,
    ShiftPlan,
};
pub use online::{capacity_distribution, online_shift, CapacityShare};
pub use profile::{load_csv, moving_average, save_csv, synth, LoadProfile, ProfileSpec};
pub use stage_cost::{Dispatch, StageCost};
pub use static_opt::{
    brute_oracle, fixed_order_costs, optimal_static, order_partition, OrderInterval,
    StaticSolution, StaticSolver,
};
pub use waterfill::{assignment_cost, waterfill, Assignment};

/// Absolute tolerance for load comparisons, in kW.
pub const TOLERANCE_KW: f64 = 1e-6;
