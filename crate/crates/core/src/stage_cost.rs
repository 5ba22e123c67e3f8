//! Per-stage power as an explicit piecewise-linear function of delivered
//! cooling, for either optimal dispatch or a fixed water-filling order.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fleet::{Fleet, SequencingOrder};
use crate::static_opt::StaticSolver;
use crate::waterfill::waterfill_unchecked;
use crate::TOLERANCE_KW;

/// How each stage's delivered cooling is split across the fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dispatch {
    /// Exact static optimum at every stage.
    #[default]
    Optimal,
    /// Water filling in the fleet's shift order at every stage.
    ShiftOrder,
}

/// Cost `a + b * q` on `[lo, hi]` (a single point when `lo == hi`) or on
/// the open interval `(lo, hi)` when `open` is set. `anchor` marks points
/// that are sums of machine endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
    pub open: bool,
    pub anchor: bool,
}

impl Piece {
    pub fn value(&self, q: f64) -> f64 {
        self.a + self.b * q
    }

    pub fn contains(&self, q: f64) -> bool {
        if self.open {
            q > self.lo + TOLERANCE_KW && q < self.hi - TOLERANCE_KW
        } else {
            q >= self.lo - TOLERANCE_KW && q <= self.hi + TOLERANCE_KW
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCost {
    pieces: Vec<Piece>,
    capacity: f64,
}

impl StageCost {
    pub fn new(fleet: &Fleet, dispatch: Dispatch) -> Result<Self> {
        match dispatch {
            Dispatch::Optimal => Self::optimal(fleet),
            Dispatch::ShiftOrder => Ok(Self::fixed_order(fleet, &fleet.shift_order())),
        }
    }

    pub fn optimal(fleet: &Fleet) -> Result<Self> {
        let solver = StaticSolver::new(fleet)?;
        let lines = solver.candidate_lines();
        let mut points: Vec<f64> = lines.iter().flat_map(|l| [l.0, l.1]).collect();
        points.push(0.0);
        points.push(fleet.total_capacity());
        sort_dedup(&mut points);
        let anchors = points.clone();
        let crossings = envelope_crossings(&lines, &points);
        points.extend(crossings);
        sort_dedup(&mut points);
        Ok(Self::from_breakpoints(fleet, &points, &anchors, |q| {
            solver.cost(q).expect("breakpoint within capacity")
        }))
    }

    pub fn fixed_order(fleet: &Fleet, order: &SequencingOrder) -> Self {
        let idx = order.indices();
        let mut points = vec![0.0, fleet.total_capacity()];
        let mut prefix = 0.0;
        for (j, &i) in idx.iter().enumerate() {
            prefix += fleet.get(i).q_max;
            points.push(prefix);
            let mut trimmed = 0.0;
            for &t in idx[..=j].iter().rev() {
                trimmed += fleet.get(t).range();
                points.push(prefix - trimmed);
            }
        }
        points.retain(|&x| x >= 0.0);
        sort_dedup(&mut points);
        let cap = fleet.total_capacity();
        Self::from_breakpoints(fleet, &points, &points, |q| {
            waterfill_unchecked(fleet, idx, q.min(cap))
                .cost(fleet)
                .expect("water filling stays in window")
        })
    }

    /// Exact representation of `f`, assumed linear between consecutive
    /// breakpoints: one point piece per breakpoint and one open piece per gap,
    /// with collinear neighbours merged.
    fn from_breakpoints(
        fleet: &Fleet,
        points: &[f64],
        anchors: &[f64],
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let mut raw: Vec<Piece> = Vec::with_capacity(2 * points.len());
        for (k, &x) in points.iter().enumerate() {
            let v = f(x);
            raw.push(Piece {
                lo: x,
                hi: x,
                a: v,
                b: 0.0,
                open: false,
                anchor: anchors.iter().any(|&y| (y - x).abs() <= 1e-9),
            });
            if let Some(&x1) = points.get(k + 1) {
                let (u, w) = (x + (x1 - x) / 3.0, x + 2.0 * (x1 - x) / 3.0);
                let (fu, fw) = (f(u), f(w));
                let b = (fw - fu) / (w - u);
                raw.push(Piece {
                    lo: x,
                    hi: x1,
                    a: fu - b * u,
                    b,
                    open: true,
                    anchor: false,
                });
            }
        }

        let mut pieces: Vec<Piece> = Vec::with_capacity(raw.len());
        let mut kept_anchors = Vec::new();
        let mut i = 0;
        while i < raw.len() {
            let mut cur = raw[i];
            i += 1;
            if cur.open {
                // Absorb (point, open) pairs that continue the same line.
                while i + 1 < raw.len() {
                    let (p, next) = (raw[i], raw[i + 1]);
                    let same =
                        |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
                    if same(cur.value(p.lo), p.a)
                        && same(cur.value(next.lo), next.value(next.lo))
                        && same(cur.value(next.hi), next.value(next.hi))
                    {
                        if p.anchor {
                            kept_anchors.push(p);
                        }
                        cur.hi = next.hi;
                        i += 2;
                    } else {
                        break;
                    }
                }
            }
            pieces.push(cur);
        }
        pieces.extend(kept_anchors);
        StageCost {
            pieces,
            capacity: fleet.total_capacity(),
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Stage power for delivered cooling `q`, or `None` above capacity.
    pub fn eval(&self, q: f64) -> Option<f64> {
        self.pieces
            .iter()
            .filter(|p| p.contains(q))
            .map(|p| p.value(q))
            .min_by(f64::total_cmp)
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
}

/// Points inside the elementary segments where the lower envelope of the
/// candidate lines switches from one line to another.
fn envelope_crossings(lines: &[(f64, f64, f64, f64)], points: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let active: Vec<(f64, f64)> = lines
            .iter()
            .filter(|l| l.0 <= x0 + 1e-9 && l.1 >= x1 - 1e-9)
            .map(|l| (l.2, l.3))
            .collect();
        if active.is_empty() {
            continue;
        }
        let at = |l: (f64, f64), x: f64| l.0 + l.1 * x;
        let mut cur = active[0];
        for &l in &active[1..] {
            let (vl, vc) = (at(l, x0), at(cur, x0));
            if vl < vc - 1e-12 || ((vl - vc).abs() <= 1e-12 && l.1 < cur.1) {
                cur = l;
            }
        }
        let mut x = x0;
        loop {
            let mut next: Option<(f64, (f64, f64))> = None;
            for &l in &active {
                if l.1 >= cur.1 {
                    continue;
                }
                let xc = (l.0 - cur.0) / (cur.1 - l.1);
                if xc > x + 1e-9 && xc < x1 - 1e-9 {
                    let better = match next {
                        None => true,
                        Some((xn, ln)) => {
                            xc < xn - 1e-12 || ((xc - xn).abs() <= 1e-12 && l.1 < ln.1)
                        }
                    };
                    if better {
                        next = Some((xc, l));
                    }
                }
            }
            match next {
                Some((xc, l)) => {
                    out.push(xc);
                    x = xc;
                    cur = l;
                }
                None => break,
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::Compressor;
    use crate::static_opt::optimal_static;
    use crate::waterfill::waterfill;

    #[test]
    fn optimal_pieces_match_the_solver() {
        let f = Fleet::butterball();
        let sc = StageCost::optimal(&f).unwrap();
        assert!(sc.pieces().len() < 200);
        for q in 0..=9237 {
            let q = q as f64 * 1.0;
            let want = optimal_static(&f, q).unwrap().cost;
            let got = sc.eval(q).unwrap();
            assert!((got - want).abs() < 1e-7, "q = {q}: {got} vs {want}");
        }
        assert_eq!(sc.eval(9300.0), None);
    }

    #[test]
    fn fixed_order_pieces_match_water_filling() {
        let f = Fleet::butterball();
        let order = SequencingOrder::from_ids(&f, &["C3", "C1", "C4", "C2"]).unwrap();
        let sc = StageCost::fixed_order(&f, &order);
        for q in (0..=18474).map(|k| k as f64 * 0.5) {
            let want = waterfill(&f, &order, q).unwrap().cost(&f).unwrap();
            let got = sc.eval(q).unwrap();
            assert!((got - want).abs() < 1e-7, "q = {q}: {got} vs {want}");
        }
    }

    #[test]
    fn crossing_lines_are_split() {
        // A cheap-floor machine and a cheap-slope machine cross inside a
        // shared interval.
        let f = Fleet::new(vec![
            Compressor::new("A", 10.0, 100.0, 2.0, 20.0).unwrap(),
            Compressor::new("B", 10.0, 100.0, 8.0, 14.0).unwrap(),
        ])
        .unwrap();
        let sc = StageCost::optimal(&f).unwrap();
        for q in (0..=2000).map(|k| k as f64 * 0.1) {
            let want = optimal_static(&f, q).unwrap().cost;
            assert!((sc.eval(q).unwrap() - want).abs() < 1e-9, "q = {q}");
        }
    }
}
