//! The online load-shifting heuristic and capacity-usage summaries.
//!
//! Each stage adds its demand to a running deficit, then switches machines
//! on at full capacity in shift order while the target
//! `max(deficit, mean demand)` is still positive. Machines are either off
//! or at full capacity; any overshoot is banked as a negative deficit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fleet::Fleet;
use crate::loadshift::ShiftPlan;
use crate::profile::LoadProfile;
use crate::waterfill::Assignment;
use crate::TOLERANCE_KW;

/// Runs the heuristic. `mean` replaces the profile mean when given, e.g.
/// with a forecast.
pub fn online_shift(fleet: &Fleet, profile: &LoadProfile, mean: Option<f64>) -> Result<ShiftPlan> {
    let mean = mean.unwrap_or_else(|| profile.mean());
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean must be >= 0, got {mean}"
        )));
    }
    let order = fleet.shift_order();
    let mut deficit = 0.0;
    let mut shifted = Vec::with_capacity(profile.len());
    let mut assignments = Vec::with_capacity(profile.len());
    for (k, &q_in) in profile.loads.iter().enumerate() {
        deficit += q_in;
        let mut target = deficit.max(mean);
        let mut loads = vec![0.0; fleet.len()];
        for &i in order.indices() {
            if target > 0.0 {
                let q_max = fleet.get(i).q_max;
                loads[i] = q_max;
                target -= q_max;
                deficit -= q_max;
            }
        }
        if deficit > TOLERANCE_KW {
            log::warn!("stage {k}: online plan is {deficit} kW behind demand");
        }
        let a = Assignment::new(fleet, loads)?;
        shifted.push(a.total());
        assignments.push(a);
    }
    ShiftPlan::new(
        fleet,
        profile.step_minutes,
        profile.loads.clone(),
        shifted,
        assignments,
    )
}

/// Share of stages a machine spends off, in trim and near full capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityShare {
    pub id: String,
    pub off_fraction: f64,
    pub trim_fraction: f64,
    pub full_fraction: f64,
}

/// Loads above this share of `q_max` count as full capacity.
pub const FULL_THRESHOLD: f64 = 0.99;

pub fn capacity_distribution(plan: &ShiftPlan, fleet: &Fleet) -> Vec<CapacityShare> {
    let n = plan.len().max(1) as f64;
    fleet
        .compressors()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (mut off, mut full) = (0usize, 0usize);
            for a in &plan.assignments {
                let q = a.load(i);
                if q <= TOLERANCE_KW {
                    off += 1;
                } else if q > FULL_THRESHOLD * c.q_max {
                    full += 1;
                }
            }
            let trim = plan.len() - off - full;
            CapacityShare {
                id: c.id.clone(),
                off_fraction: off as f64 / n,
                trim_fraction: trim as f64 / n,
                full_fraction: full as f64 / n,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loadshift::static_trajectory;

    #[test]
    fn zero_profile_keeps_everything_off() {
        let f = Fleet::butterball();
        let p = LoadProfile::new(1.0, vec![0.0; 10]).unwrap();
        let plan = online_shift(&f, &p, None).unwrap();
        assert_eq!(plan.avg_power, 0.0);
        let d = capacity_distribution(&plan, &f);
        assert!(d.iter().all(|s| s.off_fraction == 1.0));
    }

    #[test]
    fn single_machine_at_capacity() {
        let f = Fleet::new(vec![Fleet::butterball().get(0).clone()]).unwrap();
        let p = LoadProfile::new(1.0, vec![3000.0; 8]).unwrap();
        let plan = online_shift(&f, &p, None).unwrap();
        assert!(plan.assignments.iter().all(|a| a.loads() == [3000.0]));
        assert_eq!(plan.avg_power, 262.0);
        plan.check(&f).unwrap();
    }

    #[test]
    fn only_full_or_off_in_shift_order_prefix() {
        let f = Fleet::butterball();
        let p =
            LoadProfile::new(1.0, vec![500.0, 4000.0, 8000.0, 100.0, 2500.0, 0.0, 6000.0]).unwrap();
        let plan = online_shift(&f, &p, None).unwrap();
        plan.check(&f).unwrap();
        let order = f.shift_order();
        for a in &plan.assignments {
            let on: Vec<bool> = order.indices().iter().map(|&i| a.load(i) > 0.0).collect();
            assert!(on.windows(2).all(|w| w[0] || !w[1]));
            for (c, &q) in f.compressors().iter().zip(a.loads()) {
                assert!(q == 0.0 || q == c.q_max);
            }
        }
        assert!(capacity_distribution(&plan, &f)
            .iter()
            .all(|s| s.trim_fraction == 0.0));
    }

    #[test]
    fn mean_override_is_used() {
        let f = Fleet::butterball();
        let p = LoadProfile::new(1.0, vec![0.0; 4]).unwrap();
        let plan = online_shift(&f, &p, Some(100.0)).unwrap();
        // The mean alone keeps the most efficient machine running.
        assert!(plan
            .assignments
            .iter()
            .all(|a| a.loads() == [3000.0, 0.0, 0.0, 0.0]));
        assert!(online_shift(&f, &p, Some(-1.0)).is_err());
    }

    #[test]
    fn static_plans_trim() {
        let f = Fleet::butterball();
        let p = LoadProfile::new(1.0, vec![1000.0, 2500.0, 4100.0]).unwrap();
        let plan = static_trajectory(&f, &p).unwrap();
        let d = capacity_distribution(&plan, &f);
        assert!(d.iter().any(|s| s.trim_fraction > 0.0));
        for s in &d {
            assert!((s.off_fraction + s.trim_fraction + s.full_fraction - 1.0).abs() < 1e-12);
        }
    }
}
