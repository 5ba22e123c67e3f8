//! Reports combining the optimizers: method comparisons, fixed-order gap
//! sweeps and fleet bounds.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fleet::Fleet;
use crate::loadshift::{
    dp_slack, fixed_order_extremes, optimal_shift, static_trajectory, ShiftOptions, ShiftPlan,
};
use crate::online::{capacity_distribution, online_shift, CapacityShare};
use crate::profile::LoadProfile;
use crate::static_opt::{all_orders, order_partition, OrderInterval};
use crate::waterfill::{check_demand, waterfill_unchecked};
use crate::TOLERANCE_KW;

pub const SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the fleet's JSON form.
pub fn fleet_hash(fleet: &Fleet) -> String {
    hex::encode(Sha256::digest(fleet.to_json().as_bytes()))
}

/// SHA-256 over the step and the little-endian bytes of every load.
pub fn profile_hash(profile: &LoadProfile) -> String {
    let mut h = Sha256::new();
    h.update(profile.step_minutes.to_le_bytes());
    for q in &profile.loads {
        h.update(q.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodCosts {
    pub worst_fixed_order: f64,
    pub best_fixed_order: f64,
    pub static_cs: f64,
    pub online_ls: f64,
    pub optimal_ls: f64,
}

impl MethodCosts {
    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("worst_fixed_order", self.worst_fixed_order),
            ("best_fixed_order", self.best_fixed_order),
            ("static_cs", self.static_cs),
            ("online_ls", self.online_ls),
            ("optimal_ls", self.optimal_ls),
        ]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        MethodCosts {
            worst_fixed_order: f(self.worst_fixed_order),
            best_fixed_order: f(self.best_fixed_order),
            static_cs: f(self.static_cs),
            online_ls: f(self.online_ls),
            optimal_ls: f(self.optimal_ls),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceCheck {
    pub relation: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub static_cs: Vec<CapacityShare>,
    pub online_ls: Vec<CapacityShare>,
    pub optimal_ls: Vec<CapacityShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub fleet_hash: String,
    pub profile_hash: String,
    pub stages: usize,
    pub step_minutes: f64,
    pub mean_load_kw: f64,
    pub online_mean_kw: f64,
    pub shift_options: ShiftOptions,
    pub surplus_cap_kw: f64,
    pub tolerance_kw: f64,
    pub worst_order: Vec<String>,
    pub best_order: Vec<String>,
    pub avg_power_kw: MethodCosts,
    /// `(static_cs - method) / static_cs`, in percent.
    pub savings_vs_static_pct: MethodCosts,
    pub dominance: Vec<DominanceCheck>,
    pub capacity: CapacityReport,
}

/// A report together with the plans behind it.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub static_plan: ShiftPlan,
    pub online_plan: ShiftPlan,
    pub optimal_plan: ShiftPlan,
}

/// Runs all five methods on one profile and checks the dominance chain
/// `worst >= best >= static >= optimal` and `online >= optimal`.
pub fn compare(
    fleet: &Fleet,
    profile: &LoadProfile,
    options: &ShiftOptions,
    mean: Option<f64>,
) -> Result<Comparison> {
    let extremes = fixed_order_extremes(fleet, profile)?;
    let static_plan = static_trajectory(fleet, profile)?;
    let online_mean = mean.unwrap_or_else(|| profile.mean());
    let online_plan = online_shift(fleet, profile, Some(online_mean))?;
    let optimal_plan = optimal_shift(fleet, profile, options)?;
    optimal_plan.check(fleet)?;

    let costs = MethodCosts {
        worst_fixed_order: extremes.worst_avg_power,
        best_fixed_order: extremes.best_avg_power,
        static_cs: static_plan.avg_power,
        online_ls: online_plan.avg_power,
        optimal_ls: optimal_plan.avg_power,
    };
    let tol = TOLERANCE_KW + dp_slack(fleet, options);
    let ge = |a: f64, b: f64, t: f64| a >= b - t;
    let dominance = vec![
        DominanceCheck {
            relation: "worst_fixed_order >= best_fixed_order",
            holds: ge(
                costs.worst_fixed_order,
                costs.best_fixed_order,
                TOLERANCE_KW,
            ),
        },
        DominanceCheck {
            relation: "best_fixed_order >= static_cs",
            holds: ge(costs.best_fixed_order, costs.static_cs, TOLERANCE_KW),
        },
        DominanceCheck {
            relation: "static_cs >= optimal_ls",
            holds: ge(costs.static_cs, costs.optimal_ls, TOLERANCE_KW),
        },
        DominanceCheck {
            relation: "online_ls >= optimal_ls",
            holds: ge(costs.online_ls, costs.optimal_ls, tol),
        },
    ];
    if let Some(broken) = dominance.iter().find(|d| !d.holds) {
        return Err(Error::Invariant(format!(
            "{} fails ({costs:?}); if the online plan wins, the surplus cap or step is too tight",
            broken.relation
        )));
    }
    let base = costs.static_cs;
    let savings = costs.map(|c| {
        if base > 0.0 {
            100.0 * (base - c) / base
        } else {
            0.0
        }
    });
    let report = ComparisonReport {
        schema_version: SCHEMA_VERSION,
        fleet_hash: fleet_hash(fleet),
        profile_hash: profile_hash(profile),
        stages: profile.len(),
        step_minutes: profile.step_minutes,
        mean_load_kw: profile.mean(),
        online_mean_kw: online_mean,
        shift_options: *options,
        surplus_cap_kw: options.cap(fleet, profile),
        tolerance_kw: tol,
        worst_order: extremes
            .worst_order
            .ids(fleet)
            .into_iter()
            .map(str::to_owned)
            .collect(),
        best_order: extremes
            .best_order
            .ids(fleet)
            .into_iter()
            .map(str::to_owned)
            .collect(),
        avg_power_kw: costs,
        savings_vs_static_pct: savings,
        dominance,
        capacity: CapacityReport {
            static_cs: capacity_distribution(&static_plan, fleet),
            online_ls: capacity_distribution(&online_plan, fleet),
            optimal_ls: capacity_distribution(&optimal_plan, fleet),
        },
    };
    Ok(Comparison {
        report,
        static_plan,
        online_plan,
        optimal_plan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub q_in_kw: f64,
    pub best_kw: f64,
    pub worst_kw: f64,
    /// `(worst - best) / best`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSweep {
    pub schema_version: u32,
    pub fleet_hash: String,
    pub max_ratio: f64,
    pub argmax_kw: f64,
    pub points: Vec<GapPoint>,
}

/// Best and worst fixed-order cost at every demand in `[q_lo, q_hi]`.
pub fn gap_sweep(fleet: &Fleet, q_lo: f64, q_hi: f64, step: f64) -> Result<GapSweep> {
    if !(step > 0.0) || !(q_lo <= q_hi) || q_lo < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= lo <= hi and step > 0, got lo = {q_lo}, hi = {q_hi}, step = {step}"
        )));
    }
    check_demand(fleet, q_hi)?;
    let orders = all_orders(fleet)?;
    let n = ((q_hi - q_lo) / step + 1e-9).floor() as usize;
    let mut points = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let q = q_lo + k as f64 * step;
        let (mut best, mut worst) = (f64::INFINITY, 0.0f64);
        for o in &orders {
            let c = waterfill_unchecked(fleet, o.indices(), q).cost(fleet)?;
            best = best.min(c);
            worst = worst.max(c);
        }
        let ratio = if best > 0.0 {
            (worst - best) / best
        } else {
            0.0
        };
        points.push(GapPoint {
            q_in_kw: q,
            best_kw: best,
            worst_kw: worst,
            ratio,
        });
    }
    let top = points
        .iter()
        .copied()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .expect("at least one point");
    Ok(GapSweep {
        schema_version: SCHEMA_VERSION,
        fleet_hash: fleet_hash(fleet),
        max_ratio: top.ratio,
        argmax_kw: top.q_in_kw,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineRatios {
    pub id: String,
    pub min_capacity_cost_ratio: f64,
    pub full_capacity_cost_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub fleet_hash: String,
    pub r_max: f64,
    pub r_min: f64,
    pub bound: f64,
    pub total_capacity_kw: f64,
    pub min_turn_on_kw: f64,
    pub full_power_kw: f64,
    pub shift_order: Vec<String>,
    pub machines: Vec<MachineRatios>,
}

pub fn bounds_report(fleet: &Fleet) -> BoundsReport {
    let b = fleet.savings_bound();
    BoundsReport {
        schema_version: SCHEMA_VERSION,
        fleet_hash: fleet_hash(fleet),
        r_max: b.r_max,
        r_min: b.r_min,
        bound: b.bound,
        total_capacity_kw: fleet.total_capacity(),
        min_turn_on_kw: fleet.min_turn_on(),
        full_power_kw: fleet.full_power(),
        shift_order: fleet
            .shift_order()
            .ids(fleet)
            .into_iter()
            .map(str::to_owned)
            .collect(),
        machines: fleet
            .compressors()
            .iter()
            .map(|c| MachineRatios {
                id: c.id.clone(),
                min_capacity_cost_ratio: c.min_capacity_cost_ratio(),
                full_capacity_cost_ratio: c.full_capacity_cost_ratio(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub lo_kw: f64,
    pub hi_kw: f64,
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub schema_version: u32,
    pub fleet_hash: String,
    pub intervals: Vec<PartitionRow>,
}

pub fn partition_report(fleet: &Fleet, q_lo: f64, q_hi: f64, step: f64) -> Result<PartitionReport> {
    let intervals = order_partition(fleet, q_lo, q_hi, step)?
        .into_iter()
        .map(|OrderInterval { lo, hi, order }| PartitionRow {
            lo_kw: lo,
            hi_kw: hi,
            order: order.ids(fleet).into_iter().map(str::to_owned).collect(),
        })
        .collect();
    Ok(PartitionReport {
        schema_version: SCHEMA_VERSION,
        fleet_hash: fleet_hash(fleet),
        intervals,
    })
}
