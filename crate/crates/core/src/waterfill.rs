//! Fixed-order water filling.
//!
//! The first pass walks the order and turns machines on at full capacity
//! until the demand is covered. The second pass walks the same order
//! backwards and trims each running machine toward its minimum until the
//! overshoot is gone.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fleet::{Fleet, SequencingOrder};
use crate::TOLERANCE_KW;

/// Per-machine thermal loads for one instant, aligned with fleet order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    loads: Vec<f64>,
}

impl Assignment {
    pub fn off(fleet: &Fleet) -> Self {
        Assignment {
            loads: vec![0.0; fleet.len()],
        }
    }

    /// Builds an assignment, checking that every load is zero or in window.
    pub fn new(fleet: &Fleet, loads: Vec<f64>) -> Result<Self> {
        if loads.len() != fleet.len() {
            return Err(Error::InvalidParameter(format!(
                "assignment has {} loads for a fleet of {}",
                loads.len(),
                fleet.len()
            )));
        }
        for (c, &q) in fleet.compressors().iter().zip(&loads) {
            if !c.admits(q) {
                return Err(Error::OutOfWindow {
                    id: c.id.clone(),
                    load: q,
                    q_min: c.q_min,
                    q_max: c.q_max,
                });
            }
        }
        Ok(Assignment { loads })
    }

    pub(crate) fn from_raw(loads: Vec<f64>) -> Self {
        Assignment { loads }
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn load(&self, index: usize) -> f64 {
        self.loads[index]
    }

    pub fn get(&self, fleet: &Fleet, id: &str) -> Option<f64> {
        fleet.index_of(id).map(|i| self.loads[i])
    }

    pub fn total(&self) -> f64 {
        self.loads.iter().sum()
    }

    pub fn to_map(&self, fleet: &Fleet) -> BTreeMap<String, f64> {
        fleet
            .ids()
            .map(str::to_owned)
            .zip(self.loads.iter().copied())
            .collect()
    }

    pub fn cost(&self, fleet: &Fleet) -> Result<f64> {
        assignment_cost(fleet, self)
    }

    /// Machines strictly between their minimum and full capacity.
    pub fn strictly_in_trim(&self, fleet: &Fleet) -> usize {
        fleet
            .compressors()
            .iter()
            .zip(&self.loads)
            .filter(|(c, &q)| q > c.q_min + TOLERANCE_KW && q < c.q_max - TOLERANCE_KW)
            .count()
    }

    pub fn machines_on(&self) -> usize {
        self.loads.iter().filter(|&&q| q > TOLERANCE_KW).count()
    }
}

/// Total electrical power of an assignment.
pub fn assignment_cost(fleet: &Fleet, assignment: &Assignment) -> Result<f64> {
    if assignment.loads.len() != fleet.len() {
        return Err(Error::InvalidParameter(
            "assignment does not match the fleet".into(),
        ));
    }
    fleet
        .compressors()
        .iter()
        .zip(&assignment.loads)
        .map(|(c, &q)| c.power_at(q))
        .sum()
}

pub(crate) fn check_demand(fleet: &Fleet, q_in: f64) -> Result<f64> {
    if !q_in.is_finite() || q_in < -TOLERANCE_KW {
        return Err(Error::NegativeDemand(q_in));
    }
    let capacity = fleet.total_capacity();
    if q_in > capacity + TOLERANCE_KW {
        return Err(Error::InfeasibleDemand {
            demand: q_in,
            capacity,
            shortfall: q_in - capacity,
        });
    }
    Ok(q_in.clamp(0.0, capacity))
}

/// Water filling with a complete order over `fleet`.
pub fn waterfill(fleet: &Fleet, order: &SequencingOrder, q_in: f64) -> Result<Assignment> {
    if !order.is_complete(fleet) {
        return Err(Error::InvalidOrder(format!(
            "water filling needs all {} compressors, the order names {}",
            fleet.len(),
            order.len()
        )));
    }
    let q_in = check_demand(fleet, q_in)?;
    Ok(waterfill_unchecked(fleet, order.indices(), q_in))
}

/// Both passes, literally. `q_in` must already be feasible.
pub(crate) fn waterfill_unchecked(fleet: &Fleet, order: &[usize], q_in: f64) -> Assignment {
    let mut loads = vec![0.0; fleet.len()];
    let mut total = 0.0;
    for &i in order {
        if q_in > total {
            let c = fleet.get(i);
            loads[i] = c.q_max;
            total += c.q_max;
        }
    }
    for &i in order.iter().rev() {
        if q_in <= total && loads[i] != 0.0 {
            let c = fleet.get(i);
            let d = c.range().min(total - q_in);
            loads[i] -= d;
            total -= d;
        }
    }
    Assignment { loads }
}
