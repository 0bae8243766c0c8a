//! Scalar root finding: log-grid bracketing, bisection and Newton polishing.

use crate::error::{Error, Result};

/// Scan range and grid used to bracket positive roots.
#[derive(Debug, Clone, Copy)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { lo: 1e-4, hi: 1e4, nodes: 400 }
    }
}

impl LogGrid {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let m = (self.nodes - 1) as f64;
        (0..self.nodes).map(move |i| (a + (b - a) * i as f64 / m).exp())
    }
}

/// Bisection on a bracket with `f(a)` and `f(b)` of opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Newton iteration from `x`, kept inside `[a, b]`; stops at relative step `tol`.
pub fn newton_polish<F, D>(f: &F, df: &D, mut x: f64, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    for _ in 0..50 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x) / d;
        if !(next >= a && next <= b) {
            break;
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs() {
            break;
        }
    }
    x
}

/// All roots of `f` on a logarithmic grid: sign changes are bisected and
/// then polished by Newton to relative accuracy 1e-12.
pub fn positive_roots<F, D>(f: F, df: D, grid: LogGrid) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let xs: Vec<f64> = grid.points().collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() && fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            if !(fs[i].is_finite() && fs[i + 1].is_finite()) {
                continue;
            }
            let x0 = bisect(&f, xs[i], xs[i + 1]);
            roots.push(newton_polish(&f, &df, x0, xs[i], xs[i + 1], 1e-12));
        }
    }
    roots
}

/// The positive roots, or `NoRoot` naming `what` when there are none.
pub fn require_roots<F, D>(f: F, df: D, grid: LogGrid, what: &str) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let roots = positive_roots(f, df, grid);
    if roots.is_empty() {
        return Err(Error::NoRoot(format!("{what}: no sign change on [{:e}, {:e}]", grid.lo, grid.hi)));
    }
    Ok(roots)
}
