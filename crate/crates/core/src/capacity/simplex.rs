//! Maximization over probability simplices: coarse grid, then pairwise-transfer
//! pattern search.

use rayon::prelude::*;

/// Number of points `k/r` compositions of `r` into `a` parts.
pub(crate) fn grid_size(a: usize, r: usize) -> u128 {
    // C(r + a - 1, a - 1)
    let mut c: u128 = 1;
    for i in 0..(a as u128 - 1) {
        c = c * (r as u128 + 1 + i) / (i + 1);
    }
    c
}

/// Largest resolution `<= requested` whose grid fits under `cap` points.
pub(crate) fn fit_resolution(a: usize, requested: usize, cap: u128) -> usize {
    let mut r = requested.max(1);
    while r > 1 && grid_size(a, r) > cap {
        r -= 1;
    }
    r
}

pub(crate) fn grid_points(a: usize, r: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; a];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, r: usize, out: &mut Vec<Vec<f64>>) {
        let a = cur.len();
        if k == a - 1 {
            cur[k] = left;
            out.push(cur.iter().map(|&c| c as f64 / r as f64).collect());
            return;
        }
        for c in (0..=left).rev() {
            cur[k] = c;
            rec(k + 1, left - c, cur, r, out);
        }
    }
    rec(0, r, &mut cur, r, &mut out);
    out
}

/// Best grid point; ties go to the earliest point so results never depend on
/// thread scheduling.
pub(crate) fn grid_argmax<F>(a: usize, r: usize, f: &F) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pts = grid_points(a, r);
    let vals: Vec<f64> = pts.par_iter().map(|p| f(p)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    let n = pts.len();
    (pts[best].clone(), vals[best], n)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchStats {
    pub iterations: usize,
    pub evaluations: usize,
}

/// Pattern search moving mass between coordinate pairs; the step halves when
/// no move improves and the search stops once it drops below `tol`.
pub(crate) fn pattern_search<F>(
    start: Vec<f64>,
    start_value: f64,
    step: f64,
    tol: f64,
    f: &F,
) -> (Vec<f64>, f64, SearchStats)
where
    F: Fn(&[f64]) -> f64,
{
    let a = start.len();
    let mut p = start;
    let mut val = start_value;
    let mut s = step;
    let mut stats = SearchStats { iterations: 0, evaluations: 0 };
    if a < 2 {
        return (p, val, stats);
    }
    while s >= tol {
        stats.iterations += 1;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..a {
            if p[i] <= 0.0 {
                continue;
            }
            let mv = s.min(p[i]);
            for j in 0..a {
                if i == j {
                    continue;
                }
                let mut q = p.clone();
                q[i] -= mv;
                q[j] += mv;
                if q[i] < 1e-15 {
                    q[i] = 0.0;
                }
                let v = f(&q);
                stats.evaluations += 1;
                if v > best.as_ref().map_or(val, |b| b.1) {
                    best = Some((q, v));
                }
            }
        }
        match best {
            Some((q, v)) if v > val => {
                p = q;
                val = v;
            }
            _ => s /= 2.0,
        }
    }
    (p, val, stats)
}
