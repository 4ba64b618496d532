//! Derivative-free one-dimensional minimization: coarse grid scan followed
//! by golden-section refinement inside the best bracket. The grid guards
//! against local traps near the crossover point of max-type objectives.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` on `[lo, hi]`. Returns `(argmin, min)`.
pub(crate) fn minimize(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(grid >= 2 && hi > lo);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best_x = lo;
    let mut best_v = f64::INFINITY;
    for i in 0..grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    let mut a = (best_x - step).max(lo);
    let mut b = (best_x + step).min(hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    let vm = f(xm);
    if vm <= best_v {
        (xm, vm)
    } else {
        (best_x, best_v)
    }
}

/// Maximize `f` on `[lo, hi]`. Returns `(argmax, max)`.
pub(crate) fn maximize(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    let (x, v) = minimize(|t| -f(t), lo, hi, grid, tol);
    (x, -v)
}
