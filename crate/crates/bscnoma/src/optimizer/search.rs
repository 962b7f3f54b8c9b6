//! Bracketing one-dimensional maximization used by primal recovery.

/// Golden-section iterations stop once the bracket is this narrow relative to its position.
const REL_TOL: f64 = 1e-13;
const MAX_GOLDEN: usize = 90;
const MAX_BISECT: usize = 80;

fn value(v: Option<f64>) -> f64 {
    match v {
        Some(x) if !x.is_nan() => x,
        _ => f64::NEG_INFINITY,
    }
}

/// Keeps the best `(x, f(x))` seen so far; ties keep the earlier point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Best {
    pub x: f64,
    pub v: f64,
}

impl Best {
    fn offer(slot: &mut Option<Best>, x: f64, v: f64) {
        if v.is_finite() && slot.is_none_or(|b| v > b.v) {
            *slot = Some(Best { x, v });
        }
    }
}

/// Bisects between a feasible and an infeasible point and returns the last
/// feasible point, which lies within rounding of the boundary.
fn boundary(f: &mut impl FnMut(f64) -> Option<f64>, mut ok: f64, mut bad: f64) -> (f64, f64) {
    let mut ok_v = value(f(ok));
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (ok + bad);
        if mid == ok || mid == bad {
            break;
        }
        let v = value(f(mid));
        if v.is_finite() {
            ok = mid;
            ok_v = v;
        } else {
            bad = mid;
        }
    }
    (ok, ok_v)
}

fn golden(f: &mut impl FnMut(f64) -> Option<f64>, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = value(f(c));
    let mut fd = value(f(d));
    for _ in 0..MAX_GOLDEN {
        if (b - a).abs() <= REL_TOL * (a.abs() + b.abs()) + f64::MIN_POSITIVE {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = value(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = value(f(d));
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes `f` over the ascending `grid` plus `extra` probe points.
///
/// `f` returns `None` where the point is infeasible. Every change of
/// feasibility between neighbouring grid points is bisected, and the grid's
/// local maxima are refined by golden section inside their neighbours.
pub(crate) fn maximize(f: &mut impl FnMut(f64) -> Option<f64>, grid: &[f64], extra: &[f64]) -> Option<Best> {
    let vals: Vec<f64> = grid.iter().map(|&x| value(f(x))).collect();
    let mut best = None;
    for (&x, &v) in grid.iter().zip(&vals) {
        Best::offer(&mut best, x, v);
    }
    for &x in extra {
        if x >= grid[0] && x <= grid[grid.len() - 1] {
            let v = value(f(x));
            Best::offer(&mut best, x, v);
        }
    }
    let n = grid.len();
    // Feasible ends of each feasibility change.
    let mut lo_edge = grid.to_vec();
    let mut hi_edge = grid.to_vec();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (vals[i].is_finite(), vals[i + 1].is_finite());
        if a && !b {
            let (x, v) = boundary(f, grid[i], grid[i + 1]);
            hi_edge[i] = x;
            Best::offer(&mut best, x, v);
        } else if !a && b {
            let (x, v) = boundary(f, grid[i + 1], grid[i]);
            lo_edge[i + 1] = x;
            Best::offer(&mut best, x, v);
        }
    }
    // Local maxima of the sampled curve, best first.
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| vals[i].is_finite())
        .filter(|&i| (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == n || vals[i] >= vals[i + 1]))
        .collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    for &i in peaks.iter().take(3) {
        let a = if i > 0 && vals[i - 1].is_finite() {
            grid[i - 1]
        } else if i > 0 {
            lo_edge[i]
        } else {
            grid[i]
        };
        let b = if i + 1 < n && vals[i + 1].is_finite() {
            grid[i + 1]
        } else if i + 1 < n {
            hi_edge[i]
        } else {
            grid[i]
        };
        if b > a {
            let (x, v) = golden(f, a, b);
            Best::offer(&mut best, x, v);
        }
    }
    best
}
