//! Dispatch over a horizon with load shifting.
//!
//! A plan may deliver cooling early: the shifted trajectory `q_sh` only has
//! to keep the cumulative surplus `s(k) = sum_{j<=k} (q_sh(j) - q_in(j))`
//! non-negative. [`optimal_shift`] is a dynamic program over that surplus,
//! discretized at `surplus_step`, with stage decisions
//! `q_sh(k) = q_in(k) + d * surplus_step` for integer `d`, plus switching the
//! whole fleet off and delivering exactly a sum of machine endpoints. The
//! last two land between grid states; the surplus is then rounded down,
//! which never overstates it. The stage cost is piecewise linear, so each
//! piece is handled with a sliding-window minimum and the program is exact
//! on its grid.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fleet::{Compressor, Fleet, SequencingOrder};
use crate::profile::LoadProfile;
use crate::stage_cost::{Dispatch, StageCost};
use crate::static_opt::{all_orders, StaticSolver};
use crate::waterfill::{waterfill_unchecked, Assignment};
use crate::TOLERANCE_KW;

/// Upper bound on surplus states summed over all stages.
pub const MAX_DP_CELLS: f64 = 4e7;
/// Upper bound on trajectories enumerated by [`tiny_oracle`].
pub const TINY_SEARCH_LIMIT: f64 = 1e8;

const UNREACHED: u32 = u32::MAX;
// Decision kinds stored next to the predecessor state.
const ON_GRID: u16 = 0;
const SWITCH_OFF: u16 = 1;
const FIRST_POINT: u16 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftOptions {
    /// Surplus grid, in kW per stage.
    pub surplus_step: f64,
    /// Largest carried surplus; `None` means one day of full fleet output.
    pub surplus_cap: Option<f64>,
    pub dispatch: Dispatch,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions {
            surplus_step: 1.0,
            surplus_cap: None,
            dispatch: Dispatch::Optimal,
        }
    }
}

impl ShiftOptions {
    pub fn with_step(surplus_step: f64) -> Self {
        ShiftOptions {
            surplus_step,
            ..Default::default()
        }
    }

    pub fn cap(&self, fleet: &Fleet, profile: &LoadProfile) -> f64 {
        self.surplus_cap
            .unwrap_or_else(|| fleet.total_capacity() * profile.stages_per_day())
    }

    fn validate(&self) -> Result<()> {
        if !(self.surplus_step > 0.0 && self.surplus_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "surplus step must be positive, got {}",
                self.surplus_step
            )));
        }
        if let Some(cap) = self.surplus_cap {
            if !(cap >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "surplus cap must be >= 0, got {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// A dispatched trajectory: demand, delivered target and per-stage loads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftPlan {
    pub step_minutes: f64,
    pub loads: Vec<f64>,
    pub shifted: Vec<f64>,
    pub assignments: Vec<Assignment>,
    pub stage_power: Vec<f64>,
    pub avg_power: f64,
}

impl ShiftPlan {
    pub fn new(
        fleet: &Fleet,
        step_minutes: f64,
        loads: Vec<f64>,
        shifted: Vec<f64>,
        assignments: Vec<Assignment>,
    ) -> Result<Self> {
        if loads.is_empty() || loads.len() != shifted.len() || loads.len() != assignments.len() {
            return Err(Error::InvalidParameter(format!(
                "plan lengths differ: {} loads, {} shifted, {} assignments",
                loads.len(),
                shifted.len(),
                assignments.len()
            )));
        }
        let stage_power = assignments
            .iter()
            .map(|a| a.cost(fleet))
            .collect::<Result<Vec<_>>>()?;
        let avg_power = stage_power.iter().sum::<f64>() / stage_power.len() as f64;
        Ok(ShiftPlan {
            step_minutes,
            loads,
            shifted,
            assignments,
            stage_power,
            avg_power,
        })
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    /// Carried surplus after each stage.
    pub fn surplus(&self) -> Vec<f64> {
        let mut s = 0.0;
        self.shifted
            .iter()
            .zip(&self.loads)
            .map(|(sh, q)| {
                s += sh - q;
                s
            })
            .collect()
    }

    /// Checks windows, per-stage service and cumulative cooling.
    pub fn check(&self, fleet: &Fleet) -> Result<()> {
        let (mut cum_sh, mut cum_in) = (0.0, 0.0);
        for (k, a) in self.assignments.iter().enumerate() {
            Assignment::new(fleet, a.loads().to_vec())
                .map_err(|e| Error::Invariant(format!("stage {k}: {e}")))?;
            if a.total() < self.shifted[k] - TOLERANCE_KW {
                return Err(Error::Invariant(format!(
                    "stage {k} delivers {} kW of a {} kW target",
                    a.total(),
                    self.shifted[k]
                )));
            }
            cum_sh += self.shifted[k];
            cum_in += self.loads[k];
            if cum_sh < cum_in - TOLERANCE_KW - 1e-12 * cum_in {
                return Err(Error::Invariant(format!(
                    "after stage {k} the plan has delivered {cum_sh} kW of {cum_in} kW demanded"
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, fleet: &Fleet, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["stage".to_string(), "q_in_kw".into(), "q_sh_kw".into()];
        header.extend(fleet.ids().map(str::to_owned));
        header.push("power_kw".into());
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![
                k.to_string(),
                self.loads[k].to_string(),
                self.shifted[k].to_string(),
            ];
            row.extend(self.assignments[k].loads().iter().map(f64::to_string));
            row.push(self.stage_power[k].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a plan written by [`ShiftPlan::write_csv`]; compressor columns
    /// are matched to `fleet` by id.
    pub fn read_csv<R: Read>(fleet: &Fleet, reader: R, step_minutes: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse {
                    row: 1,
                    message: format!("missing column `{name}`"),
                })
        };
        let (c_in, c_sh) = (col("q_in_kw")?, col("q_sh_kw")?);
        let machine_cols = fleet.ids().map(col).collect::<Result<Vec<_>>>()?;
        let (mut loads, mut shifted, mut assignments) = (Vec::new(), Vec::new(), Vec::new());
        for (i, record) in rdr.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            let num = |c: usize| -> Result<f64> {
                record
                    .get(c)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        row,
                        message: format!("column {} is not a number", c + 1),
                    })
            };
            loads.push(num(c_in)?);
            shifted.push(num(c_sh)?);
            let qs = machine_cols
                .iter()
                .map(|&c| num(c))
                .collect::<Result<Vec<_>>>()?;
            assignments.push(Assignment::new(fleet, qs).map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?);
        }
        if loads.is_empty() {
            return Err(Error::Parse {
                row: 1,
                message: "plan has no stages".into(),
            });
        }
        ShiftPlan::new(fleet, step_minutes, loads, shifted, assignments)
    }
}

fn stage_assigner(
    fleet: &Fleet,
    dispatch: Dispatch,
) -> Result<Box<dyn Fn(f64) -> Assignment + '_>> {
    Ok(match dispatch {
        Dispatch::Optimal => {
            let solver = StaticSolver::new(fleet)?;
            Box::new(move |q| solver.solve(q).expect("stage within capacity").assignment)
        }
        Dispatch::ShiftOrder => {
            let order = fleet.shift_order();
            let cap = fleet.total_capacity();
            Box::new(move |q| waterfill_unchecked(fleet, order.indices(), q.clamp(0.0, cap)))
        }
    })
}

fn check_cumulative(fleet: &Fleet, loads: &[f64]) -> Result<()> {
    let cap = fleet.total_capacity();
    let mut cum = 0.0;
    for (k, q) in loads.iter().enumerate() {
        cum += q;
        let available = (k + 1) as f64 * cap;
        if cum > available + TOLERANCE_KW * (k + 1) as f64 {
            return Err(Error::InfeasibleStage {
                stage: k,
                required: cum,
                available,
            });
        }
    }
    Ok(())
}

/// Minimum-average-power plan with load shifting, exact on the surplus grid.
pub fn optimal_shift(
    fleet: &Fleet,
    profile: &LoadProfile,
    options: &ShiftOptions,
) -> Result<ShiftPlan> {
    options.validate()?;
    let q = &profile.loads;
    let n = q.len();
    let g = options.surplus_step;
    let cap_total = fleet.total_capacity();
    let surplus_cap = options.cap(fleet, profile);
    check_cumulative(fleet, q)?;

    // Surplus that must be carried out of stage k to serve what follows.
    let mut need = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        need[k] = (need[k + 1] + q[k + 1] - cap_total).max(0.0);
    }
    if let Some(k) = (0..n).find(|&k| need[k] > surplus_cap + TOLERANCE_KW) {
        return Err(Error::SurplusCapExceeded {
            stage: k,
            needed: need[k],
            cap: surplus_cap,
        });
    }

    let mut remaining = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        remaining[k] = remaining[k + 1] + q[k + 1];
    }
    let states: Vec<usize> = remaining
        .iter()
        .map(|&r| {
            let by_cap = (surplus_cap / g + 1e-9).floor();
            let by_rest = (r / g - 1e-9).ceil().max(0.0);
            by_cap.min(by_rest) as usize
        })
        .collect();
    let cells: f64 = states.iter().map(|&s| s as f64 + 1.0).sum();
    if cells > MAX_DP_CELLS {
        return Err(Error::SearchTooLarge {
            size: cells,
            limit: MAX_DP_CELLS,
        });
    }

    let cost = StageCost::new(fleet, options.dispatch)?;
    let zero_cost = cost.eval(0.0).unwrap_or(0.0);
    let mut prev = vec![0.0];
    let mut choices: Vec<(Vec<u32>, Vec<u16>)> = Vec::with_capacity(n);
    let mut cum = 0.0;
    for k in 0..n {
        let qk = q[k];
        cum += qk;
        let s_cur = states[k];
        let s_prev = prev.len() - 1;
        let mut next = vec![f64::INFINITY; s_cur + 1];
        let mut pick = vec![UNREACHED; s_cur + 1];
        let mut kinds = vec![ON_GRID; s_cur + 1];

        for (pi, piece) in cost.pieces().iter().enumerate() {
            if piece.lo == piece.hi {
                let exact = ((piece.lo - qk) / g).round();
                let (dr, kind) = if (qk + exact * g - piece.lo).abs() <= TOLERANCE_KW {
                    (exact, ON_GRID)
                } else if piece.anchor && piece.lo > 0.0 {
                    (((piece.lo - qk) / g).floor(), FIRST_POINT + pi as u16)
                } else {
                    continue;
                };
                let d = dr as i64;
                let lo = d.max(0);
                let hi = (s_cur as i64).min(s_prev as i64 + d);
                for sp in lo..=hi {
                    let s = (sp - d) as usize;
                    let v = prev[s] + piece.a;
                    if v < next[sp as usize] {
                        next[sp as usize] = v;
                        pick[sp as usize] = s as u32;
                        kinds[sp as usize] = kind;
                    }
                }
                continue;
            }
            let (d_min, d_max) = match decision_range(qk, g, piece.lo, piece.hi, piece.open) {
                Some(r) => r,
                None => continue,
            };
            let bg = piece.b * g;
            let offset = piece.a + piece.b * qk;
            let sp_lo = d_min.max(0);
            let sp_hi = (s_cur as i64).min(s_prev as i64 + d_max);
            if sp_lo > sp_hi {
                continue;
            }
            let w = |s: usize| prev[s] - bg * s as f64;
            let mut window: VecDeque<usize> = VecDeque::new();
            let mut next_s: i64 = (sp_lo - d_max).max(0);
            for sp in sp_lo..=sp_hi {
                let hi_s = (sp - d_min).min(s_prev as i64);
                while next_s <= hi_s {
                    let s = next_s as usize;
                    if prev[s].is_finite() {
                        let ws = w(s);
                        while window.back().is_some_and(|&b| w(b) >= ws) {
                            window.pop_back();
                        }
                        window.push_back(s);
                    }
                    next_s += 1;
                }
                let lo_s = sp - d_max;
                while window.front().is_some_and(|&f| (f as i64) < lo_s) {
                    window.pop_front();
                }
                if let Some(&s) = window.front() {
                    let v = w(s) + offset + bg * sp as f64;
                    let spu = sp as usize;
                    if v < next[spu] {
                        next[spu] = v;
                        pick[spu] = s as u32;
                        kinds[spu] = ON_GRID;
                    }
                }
            }
        }

        // Switching off with enough banked surplus; leftovers below one grid
        // step are dropped.
        if qk > TOLERANCE_KW {
            for (s, &v0) in prev.iter().enumerate() {
                let banked = s as f64 * g;
                if !v0.is_finite() || banked < qk - TOLERANCE_KW {
                    continue;
                }
                let sp = (((banked - qk) / g + 1e-9).floor().max(0.0) as usize).min(s_cur);
                let v = v0 + zero_cost;
                if v < next[sp] {
                    next[sp] = v;
                    pick[sp] = s as u32;
                    kinds[sp] = SWITCH_OFF;
                }
            }
        }

        if next.iter().all(|v| !v.is_finite()) {
            log::warn!("stage {k} unreachable on a {g} kW surplus grid");
            return Err(Error::InfeasibleStage {
                stage: k,
                required: cum,
                available: (k + 1) as f64 * cap_total,
            });
        }
        prev = next;
        choices.push((pick, kinds));
    }

    let (mut sp, &best) = prev
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one state");
    let mut shifted = vec![0.0; n];
    for k in (0..n).rev() {
        let (s, kind) = (choices[k].0[sp], choices[k].1[sp]);
        debug_assert_ne!(s, UNREACHED);
        let s = s as usize;
        shifted[k] = match kind {
            ON_GRID => (q[k] + (sp as f64 - s as f64) * g).clamp(0.0, cap_total),
            SWITCH_OFF => 0.0,
            point => cost.pieces()[(point - FIRST_POINT) as usize].lo,
        };
        sp = s;
    }

    let assign = stage_assigner(fleet, options.dispatch)?;
    let assignments = shifted.iter().map(|&x| assign(x)).collect();
    let plan = ShiftPlan::new(fleet, profile.step_minutes, q.clone(), shifted, assignments)?;
    let dp_avg = best / n as f64;
    if (dp_avg - plan.avg_power).abs() > 1e-6 * dp_avg.max(1.0) {
        log::debug!(
            "grid value {dp_avg} kW differs from realized {} kW",
            plan.avg_power
        );
    }
    Ok(plan)
}

/// Integer `d` range with `q + d * g` inside the piece's interval.
fn decision_range(q: f64, g: f64, lo: f64, hi: f64, open: bool) -> Option<(i64, i64)> {
    let inside_lo = |d: i64| {
        let x = q + d as f64 * g;
        if open {
            x > lo + TOLERANCE_KW
        } else {
            x >= lo - TOLERANCE_KW
        }
    };
    let inside_hi = |d: i64| {
        let x = q + d as f64 * g;
        if open {
            x < hi - TOLERANCE_KW
        } else {
            x <= hi + TOLERANCE_KW
        }
    };
    let mut d_min = ((lo - q) / g).floor() as i64;
    while !inside_lo(d_min) {
        d_min += 1;
    }
    while inside_lo(d_min - 1) {
        d_min -= 1;
    }
    let mut d_max = ((hi - q) / g).ceil() as i64;
    while !inside_hi(d_max) {
        d_max -= 1;
    }
    while inside_hi(d_max + 1) {
        d_max += 1;
    }
    (d_min <= d_max).then_some((d_min, d_max))
}

/// Exhaustive search over every shifted trajectory on the grid
/// `q_in(k) + d * grid_step` (plus switching off), with optimal dispatch.
pub fn tiny_oracle(fleet: &Fleet, profile: &LoadProfile, grid_step: f64) -> Result<ShiftPlan> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    check_cumulative(fleet, &profile.loads)?;
    let cap = fleet.total_capacity();
    let options: Vec<Vec<f64>> = profile
        .loads
        .iter()
        .map(|&q| {
            let d_lo = (-q / grid_step).ceil() as i64;
            let d_hi = ((cap - q) / grid_step + 1e-9).floor() as i64;
            let mut v = vec![0.0];
            v.extend(
                (d_lo..=d_hi)
                    .map(|d| q + d as f64 * grid_step)
                    .filter(|&x| x > TOLERANCE_KW && x <= cap + TOLERANCE_KW),
            );
            v
        })
        .collect();
    let space: f64 = options.iter().map(|o| o.len() as f64).product();
    if space > TINY_SEARCH_LIMIT {
        return Err(Error::SearchTooLarge {
            size: space,
            limit: TINY_SEARCH_LIMIT,
        });
    }
    let solver = StaticSolver::new(fleet)?;
    let costs: Vec<Vec<f64>> = options
        .iter()
        .map(|o| o.iter().map(|&x| solver.cost(x.min(cap))).collect())
        .collect::<Result<_>>()?;

    struct Search<'a> {
        loads: &'a [f64],
        options: &'a [Vec<f64>],
        costs: &'a [Vec<f64>],
        path: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, k: usize, surplus: f64, cost: f64) {
            if k == self.loads.len() {
                if self.best.as_ref().is_none_or(|b| cost < b.0) {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            for i in 0..self.options[k].len() {
                let s = surplus + self.options[k][i] - self.loads[k];
                if s < -TOLERANCE_KW {
                    continue;
                }
                self.path.push(i);
                self.go(k + 1, s, cost + self.costs[k][i]);
                self.path.pop();
            }
        }
    }
    let mut search = Search {
        loads: &profile.loads,
        options: &options,
        costs: &costs,
        path: Vec::new(),
        best: None,
    };
    search.go(0, 0.0, 0.0);
    let (_, path) = search.best.ok_or_else(|| Error::InfeasibleStage {
        stage: 0,
        required: profile.loads[0],
        available: cap,
    })?;
    let shifted: Vec<f64> = path
        .iter()
        .enumerate()
        .map(|(k, &i)| options[k][i].min(cap))
        .collect();
    let assignments = shifted
        .iter()
        .map(|&x| Ok(solver.solve(x)?.assignment))
        .collect::<Result<_>>()?;
    ShiftPlan::new(
        fleet,
        profile.step_minutes,
        profile.loads.clone(),
        shifted,
        assignments,
    )
}

fn per_stage(
    fleet: &Fleet,
    profile: &LoadProfile,
    dispatch: impl Fn(f64) -> Assignment,
) -> Result<ShiftPlan> {
    let cap = fleet.total_capacity();
    let assignments = profile
        .loads
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            if q > cap + TOLERANCE_KW {
                Err(Error::InfeasibleStage {
                    stage: k,
                    required: q,
                    available: cap,
                })
            } else {
                Ok(dispatch(q.min(cap)))
            }
        })
        .collect::<Result<_>>()?;
    ShiftPlan::new(
        fleet,
        profile.step_minutes,
        profile.loads.clone(),
        profile.loads.clone(),
        assignments,
    )
}

/// No shifting: the static optimum at every stage.
pub fn static_trajectory(fleet: &Fleet, profile: &LoadProfile) -> Result<ShiftPlan> {
    let solver = StaticSolver::new(fleet)?;
    per_stage(fleet, profile, |q| {
        solver.solve(q).expect("checked demand").assignment
    })
}

/// No shifting: water filling in one order at every stage.
pub fn fixed_order_trajectory(
    fleet: &Fleet,
    profile: &LoadProfile,
    order: &SequencingOrder,
) -> Result<ShiftPlan> {
    if !order.is_complete(fleet) {
        return Err(Error::InvalidOrder(format!(
            "water filling needs all {} compressors, the order names {}",
            fleet.len(),
            order.len()
        )));
    }
    per_stage(fleet, profile, |q| {
        waterfill_unchecked(fleet, order.indices(), q)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedOrderExtremes {
    pub best_order: SequencingOrder,
    pub best_avg_power: f64,
    pub worst_order: SequencingOrder,
    pub worst_avg_power: f64,
}

/// Cheapest and most expensive single order held over the whole profile.
pub fn fixed_order_extremes(fleet: &Fleet, profile: &LoadProfile) -> Result<FixedOrderExtremes> {
    let orders = all_orders(fleet)?;
    let mut scored = Vec::with_capacity(orders.len());
    for order in orders {
        let avg = fixed_order_trajectory(fleet, profile, &order)?.avg_power;
        scored.push((order, avg));
    }
    let best = scored
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .expect("at least one order");
    let worst = scored
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .expect("at least one order");
    Ok(FixedOrderExtremes {
        best_order: best.0.clone(),
        best_avg_power: best.1,
        worst_order: worst.0.clone(),
        worst_avg_power: worst.1,
    })
}

/// Two profiles with equal total cooling: `q1` runs `c` at its minimum over
/// the last `round(d * q_max)` stages, `q2` runs it at full capacity over
/// the first `round(d * q_min)` stages. One-minute steps.
pub fn worst_case_profiles(
    c: &Compressor,
    d: f64,
    horizon: usize,
) -> Result<(LoadProfile, LoadProfile)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {d}"
        )));
    }
    let n1 = (d * c.q_max).round() as usize;
    let n2 = (d * c.q_min).round() as usize;
    if n2 == 0 || n1 > horizon || n2 >= horizon - n1 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < round(d*q_min) = {n2} < horizon - round(d*q_max) = {}",
            horizon as i64 - n1 as i64
        )));
    }
    let mut q1 = vec![0.0; horizon];
    for x in &mut q1[horizon - n1..] {
        *x = c.q_min;
    }
    let mut q2 = vec![0.0; horizon];
    for x in &mut q2[..n2] {
        *x = c.q_max;
    }
    Ok((LoadProfile::new(1.0, q1)?, LoadProfile::new(1.0, q2)?))
}

/// `(J_static - J_shift) / J_shift`; infinite when only shifting is free.
pub fn savings_gap(fleet: &Fleet, profile: &LoadProfile, options: &ShiftOptions) -> Result<f64> {
    let baseline = static_trajectory(fleet, profile)?.avg_power;
    let shifted = optimal_shift(fleet, profile, options)?.avg_power;
    Ok(if shifted > 0.0 {
        (baseline - shifted) / shifted
    } else if baseline > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

/// Average-power slack of the surplus grid away from cost jumps: one grid
/// step at the steepest slope in the fleet.
pub fn dp_slack(fleet: &Fleet, options: &ShiftOptions) -> f64 {
    let slope = fleet
        .compressors()
        .iter()
        .map(|c| c.slope())
        .fold(0.0, f64::max);
    slope * options.surplus_step
}
