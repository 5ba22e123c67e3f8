//! Compressors, fleets and the affine power–heat model.
//!
//! Each compressor serves a thermal load of either zero (off) or a value in
//! its operating window `[q_min, q_max]`. Inside the window the electrical
//! power is the straight line between `(q_min, p_min)` and `(q_max, p_max)`.
//! A fleet is validated so that every machine is at least as efficient at
//! full capacity as at its minimum (`p_min / q_min >= p_max / q_max`).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOLERANCE_KW;

const BUTTERBALL_JSON: &str = include_str!("../data/butterball.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compressor {
    pub id: String,
    #[serde(rename = "q_min_kw")]
    pub q_min: f64,
    #[serde(rename = "q_max_kw")]
    pub q_max: f64,
    #[serde(rename = "p_min_kw")]
    pub p_min: f64,
    #[serde(rename = "p_max_kw")]
    pub p_max: f64,
}

impl Compressor {
    pub fn new(
        id: impl Into<String>,
        q_min: f64,
        q_max: f64,
        p_min: f64,
        p_max: f64,
    ) -> Result<Self> {
        let c = Compressor {
            id: id.into(),
            q_min,
            q_max,
            p_min,
            p_max,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidCompressor {
                id: self.id.clone(),
                reason,
            })
        };
        if self.id.trim().is_empty() {
            return fail("id must be nonempty".into());
        }
        let values = [self.q_min, self.q_max, self.p_min, self.p_max];
        if values.iter().any(|v| !v.is_finite()) {
            return fail("capacities and powers must be finite".into());
        }
        if !(self.q_min > 0.0 && self.q_min < self.q_max) {
            return fail(format!(
                "need 0 < q_min < q_max, got q_min = {}, q_max = {}",
                self.q_min, self.q_max
            ));
        }
        if !(self.p_min > 0.0 && self.p_min <= self.p_max) {
            return fail(format!(
                "need 0 < p_min <= p_max, got p_min = {}, p_max = {}",
                self.p_min, self.p_max
            ));
        }
        // p_min / q_min >= p_max / q_max, cross-multiplied to avoid division noise.
        if self.p_min * self.q_max < self.p_max * self.q_min * (1.0 - 1e-12) {
            return fail(format!(
                "less efficient at full capacity ({:.6} kW/kW) than at minimum ({:.6} kW/kW)",
                self.p_max / self.q_max,
                self.p_min / self.q_min
            ));
        }
        Ok(())
    }

    /// Width of the operating window, `q_max - q_min`.
    pub fn range(&self) -> f64 {
        self.q_max - self.q_min
    }

    /// Marginal electrical power per kW of cooling inside the window.
    pub fn slope(&self) -> f64 {
        (self.p_max - self.p_min) / (self.q_max - self.q_min)
    }

    /// Electrical power needed to serve thermal load `q`.
    ///
    /// `q` must be zero or inside `[q_min, q_max]`; values within
    /// [`TOLERANCE_KW`] of the window edges are clamped onto them.
    pub fn power_at(&self, q: f64) -> Result<f64> {
        if q.abs() <= TOLERANCE_KW {
            return Ok(0.0);
        }
        if !q.is_finite() || q < self.q_min - TOLERANCE_KW || q > self.q_max + TOLERANCE_KW {
            return Err(Error::OutOfWindow {
                id: self.id.clone(),
                load: q,
                q_min: self.q_min,
                q_max: self.q_max,
            });
        }
        let q = q.clamp(self.q_min, self.q_max);
        Ok(self.p_min + (q - self.q_min) / (self.q_max - self.q_min) * (self.p_max - self.p_min))
    }

    /// Power per unit of cooling at full capacity, `p_max / q_max`.
    pub fn full_capacity_cost_ratio(&self) -> f64 {
        self.p_max / self.q_max
    }

    /// Power per unit of cooling at minimum capacity, `p_min / q_min`.
    pub fn min_capacity_cost_ratio(&self) -> f64 {
        self.p_min / self.q_min
    }

    /// True when `q` is zero or inside the operating window (with tolerance).
    pub fn admits(&self, q: f64) -> bool {
        q.abs() <= TOLERANCE_KW
            || (q >= self.q_min - TOLERANCE_KW && q <= self.q_max + TOLERANCE_KW)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFleet")]
pub struct Fleet {
    compressors: Vec<Compressor>,
}

#[derive(Deserialize)]
struct RawFleet {
    compressors: Vec<Compressor>,
}

impl TryFrom<RawFleet> for Fleet {
    type Error = Error;

    fn try_from(raw: RawFleet) -> Result<Self> {
        Fleet::new(raw.compressors)
    }
}

impl Fleet {
    pub fn new(compressors: Vec<Compressor>) -> Result<Self> {
        if compressors.is_empty() {
            return Err(Error::InvalidFleet(
                "a fleet needs at least one compressor".into(),
            ));
        }
        let mut seen = HashSet::new();
        for c in &compressors {
            c.validate()?;
            if !seen.insert(c.id.as_str()) {
                return Err(Error::InvalidFleet(format!(
                    "duplicate compressor id `{}`",
                    c.id
                )));
            }
        }
        Ok(Fleet { compressors })
    }

    /// The four-machine fleet from the Butterball case study.
    pub fn butterball() -> Self {
        Fleet::from_json(BUTTERBALL_JSON).expect("bundled fleet is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Fleet::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fleet serializes")
    }

    pub fn compressors(&self) -> &[Compressor] {
        &self.compressors
    }

    pub fn len(&self) -> usize {
        self.compressors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compressors.is_empty()
    }

    pub fn get(&self, index: usize) -> &Compressor {
        &self.compressors[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.compressors.iter().position(|c| c.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.compressors.iter().map(|c| c.id.as_str())
    }

    /// Sum of full capacities.
    pub fn total_capacity(&self) -> f64 {
        self.compressors.iter().map(|c| c.q_max).sum()
    }

    /// Smallest load any single machine can serve when on.
    pub fn min_turn_on(&self) -> f64 {
        self.compressors
            .iter()
            .map(|c| c.q_min)
            .fold(f64::INFINITY, f64::min)
    }

    /// Power of the whole fleet at full capacity.
    pub fn full_power(&self) -> f64 {
        self.compressors.iter().map(|c| c.p_max).sum()
    }

    /// All machines sorted by increasing cost per kW of cooling at full
    /// capacity; ties keep declaration order.
    pub fn shift_order(&self) -> SequencingOrder {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.compressors[a]
                .full_capacity_cost_ratio()
                .total_cmp(&self.compressors[b].full_capacity_cost_ratio())
        });
        SequencingOrder(idx)
    }

    /// Declaration order.
    pub fn canonical_order(&self) -> SequencingOrder {
        SequencingOrder((0..self.len()).collect())
    }

    /// Worst-case efficiency spread bounding the savings from load shifting.
    pub fn savings_bound(&self) -> SavingsBound {
        let r_max = self
            .compressors
            .iter()
            .map(Compressor::min_capacity_cost_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let r_min = self
            .compressors
            .iter()
            .map(Compressor::full_capacity_cost_ratio)
            .fold(f64::INFINITY, f64::min);
        SavingsBound {
            r_max,
            r_min,
            bound: (r_max - r_min) / r_min,
        }
    }
}

/// `r_max` is the worst power per kW cooling anywhere in the fleet (at a
/// machine's minimum), `r_min` the best (at a machine's full capacity);
/// `bound = (r_max - r_min) / r_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsBound {
    pub r_max: f64,
    pub r_min: f64,
    pub bound: f64,
}

/// An ordering of (a subset of) fleet machines, stored as fleet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SequencingOrder(Vec<usize>);

impl SequencingOrder {
    pub fn new(fleet: &Fleet, indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; fleet.len()];
        for &i in &indices {
            if i >= fleet.len() {
                return Err(Error::InvalidOrder(format!(
                    "index {i} is not in the fleet"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidOrder(format!(
                    "compressor `{}` appears twice",
                    fleet.get(i).id
                )));
            }
        }
        Ok(SequencingOrder(indices))
    }

    pub fn from_ids<S: AsRef<str>>(fleet: &Fleet, ids: &[S]) -> Result<Self> {
        let indices = ids
            .iter()
            .map(|id| {
                let id = id.as_ref().trim();
                fleet
                    .index_of(id)
                    .ok_or_else(|| Error::InvalidOrder(format!("unknown compressor id `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        SequencingOrder::new(fleet, indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the order names every machine of `fleet` exactly once.
    pub fn is_complete(&self, fleet: &Fleet) -> bool {
        self.0.len() == fleet.len()
    }

    pub fn ids<'a>(&self, fleet: &'a Fleet) -> Vec<&'a str> {
        self.0.iter().map(|&i| fleet.get(i).id.as_str()).collect()
    }

    pub fn label(&self, fleet: &Fleet) -> String {
        self.ids(fleet).join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Compressor {
        Fleet::butterball().get(0).clone()
    }

    #[test]
    fn power_curve_matches_table_endpoints() {
        let c = c1();
        assert_eq!(c.power_at(3000.0).unwrap(), 262.0);
        assert_eq!(c.power_at(220.0).unwrap(), 124.0);
        assert_eq!(c.power_at(0.0).unwrap(), 0.0);
        assert!((c.power_at(1610.0).unwrap() - 193.0).abs() < 1e-12);
    }

    #[test]
    fn power_outside_window_names_the_machine() {
        let c = c1();
        for q in [100.0, 3000.5, -3.0] {
            match c.power_at(q) {
                Err(Error::OutOfWindow {
                    id, q_min, q_max, ..
                }) => {
                    assert_eq!(id, "C1");
                    assert_eq!((q_min, q_max), (220.0, 3000.0));
                }
                other => panic!("expected window error, got {other:?}"),
            }
        }
    }

    #[test]
    fn cost_ratios() {
        let f = Fleet::butterball();
        assert!((f.get(0).full_capacity_cost_ratio() - 262.0 / 3000.0).abs() < 1e-15);
        assert!((f.get(3).full_capacity_cost_ratio() - 0.21012).abs() < 1e-5);
        let flat = Compressor::new("X", 10.0, 20.0, 20.0, 20.0).unwrap();
        assert_eq!(flat.full_capacity_cost_ratio(), 1.0);
    }

    #[test]
    fn shift_order_of_butterball() {
        let f = Fleet::butterball();
        assert_eq!(f.shift_order().ids(&f), ["C1", "C2", "C3", "C4"]);
    }

    #[test]
    fn shift_order_ties_keep_declaration_order() {
        let a = Compressor::new("A", 10.0, 100.0, 5.0, 20.0).unwrap();
        let mut b = a.clone();
        b.id = "B".into();
        let f = Fleet::new(vec![a, b]).unwrap();
        assert_eq!(f.shift_order().ids(&f), ["A", "B"]);
        let single = Fleet::new(vec![c1()]).unwrap();
        assert_eq!(single.shift_order().ids(&single), ["C1"]);
    }

    #[test]
    fn savings_bound_of_butterball() {
        let b = Fleet::butterball().savings_bound();
        assert!((b.r_max - 142.0 / 165.0).abs() < 1e-15);
        assert!((b.r_min - 262.0 / 3000.0).abs() < 1e-15);
        assert!((b.bound - 8.85).abs() < 0.01);
    }

    #[test]
    fn savings_bound_single_machine() {
        let b = Fleet::new(vec![c1()]).unwrap().savings_bound();
        let expected = (124.0 / 220.0 - 262.0 / 3000.0) / (262.0 / 3000.0);
        assert!((b.bound - expected).abs() < 1e-12);
        assert!((b.bound - 5.454).abs() < 1e-3);

        let linear = Compressor::new("L", 100.0, 400.0, 10.0, 40.0).unwrap();
        let b = Fleet::new(vec![linear]).unwrap().savings_bound();
        assert!(b.bound.abs() < 1e-12);
    }

    #[test]
    fn capacity_summaries() {
        let f = Fleet::butterball();
        assert_eq!(f.total_capacity(), 9237.0);
        assert_eq!(f.min_turn_on(), 165.0);
        assert_eq!(f.full_power(), 1539.0);
        let single = Fleet::new(vec![c1()]).unwrap();
        assert_eq!(
            (single.total_capacity(), single.min_turn_on()),
            (3000.0, 220.0)
        );
    }

    #[test]
    fn rejects_bad_compressors_and_fleets() {
        assert!(Compressor::new("", 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(Compressor::new("A", 0.0, 2.0, 1.0, 1.0).is_err());
        assert!(Compressor::new("A", 3.0, 2.0, 1.0, 1.0).is_err());
        assert!(Compressor::new("A", 1.0, 2.0, 0.0, 1.0).is_err());
        assert!(Compressor::new("A", 1.0, 2.0, 2.0, 1.0).is_err());
        // More efficient at minimum than at full capacity.
        assert!(Compressor::new("A", 100.0, 200.0, 10.0, 40.0).is_err());
        assert!(Fleet::new(vec![]).is_err());
        assert!(Fleet::new(vec![c1(), c1()]).is_err());
    }

    #[test]
    fn fleet_json_round_trip_and_validation() {
        let f = Fleet::butterball();
        assert_eq!(Fleet::from_json(&f.to_json()).unwrap(), f);
        let bad =
            r#"{"compressors":[{"id":"A","q_min_kw":5,"q_max_kw":1,"p_min_kw":1,"p_max_kw":2}]}"#;
        assert!(Fleet::from_json(bad).is_err());
        assert!(Fleet::from_json(r#"{"compressors":[]}"#).is_err());
    }

    #[test]
    fn orders_validate_ids() {
        let f = Fleet::butterball();
        let o = SequencingOrder::from_ids(&f, &["C3", "C1"]).unwrap();
        assert_eq!(o.indices(), &[2, 0]);
        assert!(!o.is_complete(&f));
        assert!(SequencingOrder::from_ids(&f, &["C1", "C1"]).is_err());
        assert!(SequencingOrder::from_ids(&f, &["C9"]).is_err());
    }
}
