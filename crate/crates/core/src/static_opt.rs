//! Exact single-instant compressor sequencing.
//!
//! At an optimum at most one machine runs strictly between its minimum and
//! full capacity; every other machine is off, at minimum, or at full
//! capacity. [`StaticSolver`] enumerates those configurations (3^m of them,
//! each with an optional trim machine), so it is exact for the affine model.
//! [`brute_oracle`] searches a load grid with no structural assumptions and
//! serves as an independent check.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fleet::{Fleet, SequencingOrder};
use crate::waterfill::{check_demand, waterfill_unchecked, Assignment};
use crate::TOLERANCE_KW;

pub const MAX_PERMUTATION_FLEET: usize = 8;
pub const MAX_STRUCTURAL_FLEET: usize = 12;
/// Upper bound on state transitions examined by [`brute_oracle`].
pub const BRUTE_SEARCH_LIMIT: f64 = 1e10;

const COST_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticSolution {
    pub assignment: Assignment,
    pub cost: f64,
    pub realizing_order: SequencingOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Off,
    Min,
    Full,
}

#[derive(Debug, Clone)]
struct Config {
    levels: Vec<Level>,
    base: f64,
    cost: f64,
    on: Vec<usize>,
}

/// Precomputed endpoint configurations of a fleet.
#[derive(Debug, Clone)]
pub struct StaticSolver<'a> {
    fleet: &'a Fleet,
    configs: Vec<Config>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate<'c> {
    config: &'c Config,
    trim: Option<usize>,
    cost: f64,
}

impl<'a> StaticSolver<'a> {
    pub fn new(fleet: &'a Fleet) -> Result<Self> {
        let m = fleet.len();
        if m > MAX_STRUCTURAL_FLEET {
            return Err(Error::TooManyCompressors {
                count: m,
                limit: MAX_STRUCTURAL_FLEET,
            });
        }
        let total = 3usize.pow(m as u32);
        let mut configs = Vec::with_capacity(total);
        for code in 0..total {
            let mut rest = code;
            let mut levels = Vec::with_capacity(m);
            let (mut base, mut cost) = (0.0, 0.0);
            let mut on = Vec::new();
            for (i, c) in fleet.compressors().iter().enumerate() {
                let level = match rest % 3 {
                    0 => Level::Off,
                    1 => Level::Min,
                    _ => Level::Full,
                };
                rest /= 3;
                match level {
                    Level::Off => {}
                    Level::Min => {
                        base += c.q_min;
                        cost += c.p_min;
                        on.push(i);
                    }
                    Level::Full => {
                        base += c.q_max;
                        cost += c.p_max;
                        on.push(i);
                    }
                }
                levels.push(level);
            }
            configs.push(Config {
                levels,
                base,
                cost,
                on,
            });
        }
        Ok(StaticSolver { fleet, configs })
    }

    pub fn fleet(&self) -> &Fleet {
        self.fleet
    }

    /// Minimum fleet power that covers `q_in`, without building the assignment.
    pub fn cost(&self, q_in: f64) -> Result<f64> {
        let q_in = check_demand(self.fleet, q_in)?;
        Ok(self.best(q_in).cost)
    }

    pub fn solve(&self, q_in: f64) -> Result<StaticSolution> {
        let q_in = check_demand(self.fleet, q_in)?;
        let best = self.best(q_in);
        let mut loads = vec![0.0; self.fleet.len()];
        for (i, level) in best.config.levels.iter().enumerate() {
            let c = self.fleet.get(i);
            loads[i] = match level {
                Level::Off => 0.0,
                Level::Min => c.q_min,
                Level::Full => c.q_max,
            };
        }
        if let Some(t) = best.trim {
            let c = self.fleet.get(t);
            loads[t] = (c.q_min + (q_in - best.config.base)).min(c.q_max);
        }
        let assignment = Assignment::from_raw(loads);
        let realizing_order = self.realizing_order(best, &assignment, q_in);
        Ok(StaticSolution {
            cost: best.cost,
            assignment,
            realizing_order,
        })
    }

    /// Every candidate as `(lo, hi, a, b)`: cost `a + b * q` for demand `q`
    /// in `[lo, hi]`.
    pub(crate) fn candidate_lines(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::new();
        for config in &self.configs {
            out.push((0.0, config.base, config.cost, 0.0));
            for &i in &config.on {
                if config.levels[i] == Level::Min {
                    let c = self.fleet.get(i);
                    let b = c.slope();
                    out.push((
                        config.base,
                        config.base + c.range(),
                        config.cost - b * config.base,
                        b,
                    ));
                }
            }
        }
        out.sort_by(|x, y| {
            x.0.total_cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.total_cmp(&y.2))
                .then(x.3.total_cmp(&y.3))
        });
        out.dedup();
        out
    }

    fn best(&self, q_in: f64) -> Candidate<'_> {
        fn offer<'c>(cand: Candidate<'c>, best: &mut Option<Candidate<'c>>) {
            if best.is_none_or(|b| prefer(&cand, &b) == Ordering::Less) {
                *best = Some(cand);
            }
        }
        let mut best: Option<Candidate> = None;
        for config in &self.configs {
            if config.base >= q_in - TOLERANCE_KW {
                offer(
                    Candidate {
                        config,
                        trim: None,
                        cost: config.cost,
                    },
                    &mut best,
                );
                continue;
            }
            let need = q_in - config.base;
            for &i in &config.on {
                if config.levels[i] != Level::Min {
                    continue;
                }
                let c = self.fleet.get(i);
                if need <= c.range() + TOLERANCE_KW {
                    offer(
                        Candidate {
                            config,
                            trim: Some(i),
                            cost: config.cost + c.slope() * need.min(c.range()),
                        },
                        &mut best,
                    );
                }
            }
        }
        best.expect("the all-full configuration covers every feasible demand")
    }

    fn realizing_order(
        &self,
        best: Candidate<'_>,
        target: &Assignment,
        q_in: f64,
    ) -> SequencingOrder {
        let fleet = self.fleet;
        let levels = &best.config.levels;
        let mut on: Vec<usize> = Vec::new();
        on.extend((0..fleet.len()).filter(|&i| levels[i] == Level::Full && Some(i) != best.trim));
        on.extend(best.trim);
        on.extend((0..fleet.len()).filter(|&i| levels[i] == Level::Min && Some(i) != best.trim));
        let off: Vec<usize> = (0..fleet.len())
            .filter(|&i| levels[i] == Level::Off)
            .collect();

        let reproduces = |on: &[usize]| {
            let order: Vec<usize> = on.iter().chain(&off).copied().collect();
            let got = waterfill_unchecked(fleet, &order, q_in);
            let cost = got.cost(fleet).unwrap_or(f64::INFINITY);
            ((cost - best.cost).abs() <= 1e-6).then_some(order)
        };
        if let Some(order) = reproduces(&on) {
            return SequencingOrder::new(fleet, order).expect("permutation of fleet");
        }
        let mut perm = on.clone();
        perm.sort_unstable();
        loop {
            if let Some(order) = reproduces(&perm) {
                return SequencingOrder::new(fleet, order).expect("permutation of fleet");
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        log::warn!(
            "no water-filling order reproduces the optimum at {q_in} kW ({:?})",
            target.loads()
        );
        SequencingOrder::new(fleet, on.into_iter().chain(off).collect())
            .expect("permutation of fleet")
    }
}

/// Total order on candidates: cost, then fewer machines on, then the on-set
/// in canonical order, then trim machine.
fn prefer(a: &Candidate<'_>, b: &Candidate<'_>) -> Ordering {
    let scale = a.cost.abs().max(b.cost.abs()).max(1.0);
    if (a.cost - b.cost).abs() > COST_TIE * scale {
        return a.cost.total_cmp(&b.cost);
    }
    a.config
        .on
        .len()
        .cmp(&b.config.on.len())
        .then_with(|| a.config.on.cmp(&b.config.on))
        .then_with(|| a.trim.cmp(&b.trim))
        .then_with(|| {
            let rank = |l: &Level| match l {
                Level::Off => 0,
                Level::Min => 1,
                Level::Full => 2,
            };
            a.config
                .levels
                .iter()
                .map(rank)
                .cmp(b.config.levels.iter().map(rank))
        })
}

/// Exact minimum-power assignment covering `q_in`.
pub fn optimal_static(fleet: &Fleet, q_in: f64) -> Result<StaticSolution> {
    StaticSolver::new(fleet)?.solve(q_in)
}

/// Grid search over every machine's load grid (`0`, then `q_min`,
/// `q_min + step`, ... and always `q_max`).
///
/// The search runs machine by machine over the accumulated load, which is
/// equivalent to enumerating every combination of grid loads. Results are
/// within `max slope * grid_step * machines` of the continuous optimum.
pub fn brute_oracle(fleet: &Fleet, q_in: f64, grid_step: f64) -> Result<StaticSolution> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let q_in = check_demand(fleet, q_in)?;
    let options: Vec<Vec<f64>> = fleet
        .compressors()
        .iter()
        .map(|c| {
            let mut v = vec![0.0];
            let steps = ((c.range() / grid_step) + 1e-9).floor() as usize;
            v.extend((0..=steps).map(|k| c.q_min + k as f64 * grid_step));
            if c.q_max - v.last().unwrap() > 1e-9 {
                v.push(c.q_max);
            } else {
                *v.last_mut().unwrap() = c.q_max;
            }
            v
        })
        .collect();

    let aligned = std::iter::once(q_in)
        .chain(options.iter().flatten().copied())
        .all(|x| ((x / grid_step) - (x / grid_step).round()).abs() < 1e-9);
    let states = (q_in / grid_step).ceil() + 1.0;
    let work: f64 = options.iter().map(|o| o.len() as f64 * states).sum();
    if work > BRUTE_SEARCH_LIMIT {
        return Err(Error::SearchTooLarge {
            size: work,
            limit: BRUTE_SEARCH_LIMIT,
        });
    }

    let loads = if aligned {
        brute_aligned(fleet, &options, q_in, grid_step)
    } else {
        brute_general(fleet, &options, q_in)
    };
    let assignment = Assignment::from_raw(loads);
    let cost = assignment.cost(fleet)?;
    let mut on: Vec<usize> = (0..fleet.len()).collect();
    on.sort_by(|&a, &b| assignment.load(b).total_cmp(&assignment.load(a)));
    Ok(StaticSolution {
        assignment,
        cost,
        realizing_order: SequencingOrder::new(fleet, on)?,
    })
}

fn brute_aligned(fleet: &Fleet, options: &[Vec<f64>], q_in: f64, step: f64) -> Vec<f64> {
    let target = (q_in / step).round() as usize;
    let m = fleet.len();
    // layers[i][x]: cheapest way for the first i machines to deliver x grid
    // units, with x = target meaning "at least the demand".
    let mut layers: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut first = vec![f64::INFINITY; target + 1];
    first[0] = 0.0;
    layers.push(first);
    let mut choice: Vec<Vec<u32>> = Vec::with_capacity(m);
    for (i, opts) in options.iter().enumerate() {
        let c = fleet.get(i);
        let best = &layers[i];
        let mut next = vec![f64::INFINITY; target + 1];
        let mut pick = vec![0u32; target + 1];
        for (k, &q) in opts.iter().enumerate() {
            let p = c.power_at(q).expect("grid load in window");
            let units = (q / step).round() as usize;
            let k = k as u32;
            let split = (target + 1).saturating_sub(units);
            for (x, &b) in best[..split].iter().enumerate() {
                let v = b + p;
                let y = x + units;
                if v < next[y] {
                    next[y] = v;
                    pick[y] = k;
                }
            }
            for &b in &best[split..] {
                let v = b + p;
                if v < next[target] {
                    next[target] = v;
                    pick[target] = k;
                }
            }
        }
        layers.push(next);
        choice.push(pick);
    }

    let mut loads = vec![0.0; m];
    let mut y = target;
    for i in (0..m).rev() {
        let q = options[i][choice[i][y] as usize];
        loads[i] = q;
        let units = (q / step).round() as usize;
        y = if y < target {
            y - units
        } else {
            let p = fleet.get(i).power_at(q).expect("grid load in window");
            let goal = layers[i + 1][target];
            (target.saturating_sub(units)..=target)
                .find(|&x| layers[i][x] + p == goal)
                .expect("a predecessor state produced the recorded optimum")
        };
    }
    loads
}

fn brute_general(fleet: &Fleet, options: &[Vec<f64>], q_in: f64) -> Vec<f64> {
    use std::collections::HashMap;
    // Key: accumulated load in micro-kW, saturated at the demand.
    let key = |x: f64| -> i64 {
        if x >= q_in - TOLERANCE_KW {
            i64::MAX
        } else {
            (x * 1e6).round() as i64
        }
    };
    let mut layer: HashMap<i64, (f64, f64, Vec<f64>)> = HashMap::new();
    layer.insert(key(0.0), (0.0, 0.0, Vec::new()));
    for (i, opts) in options.iter().enumerate() {
        let c = fleet.get(i);
        let mut next: HashMap<i64, (f64, f64, Vec<f64>)> = HashMap::new();
        for (sum, cost, loads) in layer.values() {
            for &q in opts {
                let s = sum + q;
                let v = cost + c.power_at(q).expect("grid load in window");
                let k = key(s);
                if next.get(&k).is_none_or(|e| v < e.1) {
                    let mut l = loads.clone();
                    l.push(q);
                    next.insert(k, (s, v, l));
                }
            }
        }
        layer = next;
    }
    layer
        .remove(&i64::MAX)
        .expect("full capacity covers demand")
        .2
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every complete order of the fleet, in lexicographic index order.
pub fn all_orders(fleet: &Fleet) -> Result<Vec<SequencingOrder>> {
    if fleet.len() > MAX_PERMUTATION_FLEET {
        return Err(Error::TooManyCompressors {
            count: fleet.len(),
            limit: MAX_PERMUTATION_FLEET,
        });
    }
    let mut perm: Vec<usize> = (0..fleet.len()).collect();
    let mut out = Vec::new();
    loop {
        out.push(SequencingOrder::new(fleet, perm.clone())?);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// Water-filling cost under every complete order, cheapest first.
pub fn fixed_order_costs(fleet: &Fleet, q_in: f64) -> Result<Vec<(SequencingOrder, f64)>> {
    let orders = all_orders(fleet)?;
    let q_in = check_demand(fleet, q_in)?;
    let mut out = orders
        .into_iter()
        .map(|o| {
            let cost = waterfill_unchecked(fleet, o.indices(), q_in).cost(fleet)?;
            Ok((o, cost))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderInterval {
    pub lo: f64,
    pub hi: f64,
    pub order: SequencingOrder,
}

/// Sweeps demand over `[q_lo, q_hi]` and merges runs of equal realizing orders.
pub fn order_partition(
    fleet: &Fleet,
    q_lo: f64,
    q_hi: f64,
    step: f64,
) -> Result<Vec<OrderInterval>> {
    if !(step > 0.0) || !(q_lo < q_hi) || q_lo < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= lo < hi and step > 0, got lo = {q_lo}, hi = {q_hi}, step = {step}"
        )));
    }
    check_demand(fleet, q_hi)?;
    let solver = StaticSolver::new(fleet)?;
    let n = ((q_hi - q_lo) / step + 1e-9).floor() as usize;
    let mut out: Vec<OrderInterval> = Vec::new();
    for k in 0..=n {
        let q = q_lo + k as f64 * step;
        let order = solver.solve(q)?.realizing_order;
        match out.last_mut() {
            Some(last) if last.order == order => last.hi = q,
            _ => out.push(OrderInterval {
                lo: q,
                hi: q,
                order,
            }),
        }
    }
    Ok(out)
}
