//! Deterministic derivative-free optimization helpers.
//!
//! Nothing here draws random numbers; every routine visits points in a fixed
//! order so results are reproducible bit-for-bit.

use crate::error::{Error, Result};

/// Bisection for a monotone scalar function.
///
/// `g(lo)` and `g(hi)` must have opposite signs (zero at either end is
/// accepted as a root). Stops when `|g(x)| <= tol` or the bracket is narrower
/// than `tol`.
pub fn bisect_monotone<F>(mut g: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.is_nan() || gb.is_nan() || ga.signum() == gb.signum() {
        return Err(Error::Bracket { lo, hi, g_lo: ga, g_hi: gb });
    }
    let increasing = ga < 0.0;
    // 200 halvings exhaust f64 resolution on any finite bracket.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm.abs() <= tol || (b - a) <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        if (gm < 0.0) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Which end of the interval a 1-D maximizer was pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum1d {
    pub x: f64,
    pub value: f64,
    pub boundary: Option<Boundary>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[lo, hi]` for a unimodal `g`.
pub fn maximize_1d<F>(mut g: F, lo: f64, hi: f64, tol: f64) -> Maximum1d
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a) > tol {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let (mut x, mut value) = if gc >= gd { (c, gc) } else { (d, gd) };
    let mut boundary = None;
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_hi >= value {
        x = hi;
        value = g_hi;
        boundary = Some(Boundary::Upper);
    }
    if g_lo > value {
        x = lo;
        value = g_lo;
        boundary = Some(Boundary::Lower);
    }
    if boundary.is_none() {
        if hi - x <= tol {
            boundary = Some(Boundary::Upper);
        } else if x - lo <= tol {
            boundary = Some(Boundary::Lower);
        }
    }
    Maximum1d { x, value, boundary }
}

/// A lattice on the probability simplex: all points whose coordinates are
/// integer multiples of `1/resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub dimension: usize,
    pub resolution: u32,
}

impl GridSpec {
    pub fn new(dimension: usize, resolution: u32) -> Result<Self> {
        if dimension == 0 || resolution == 0 {
            return Err(Error::Input("grid needs dimension >= 1 and resolution >= 1".into()));
        }
        Ok(GridSpec { dimension, resolution })
    }

    /// `C(k + d - 1, d - 1)`.
    pub fn len(&self) -> usize {
        let (k, d) = (self.resolution as u128, self.dimension as u128);
        let mut num = 1u128;
        for i in 1..d {
            num = num * (k + i) / i;
        }
        num as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Lexicographic stream of the compositions of `k` into `d` parts, scaled to
/// the simplex.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    counts: Vec<u32>,
    k: u32,
    done: bool,
}

pub fn simplex_grid(spec: GridSpec) -> SimplexGrid {
    let mut counts = vec![0; spec.dimension];
    counts[spec.dimension - 1] = spec.resolution;
    SimplexGrid { counts, k: spec.resolution, done: false }
}

impl Iterator for SimplexGrid {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let k = self.k as f64;
        let out = self.counts.iter().map(|&c| c as f64 / k).collect();
        let d = self.counts.len();
        let mut tail = 0;
        let mut pivot = None;
        for i in (0..d.saturating_sub(1)).rev() {
            tail += self.counts[i + 1];
            if tail > 0 {
                pivot = Some(i);
                break;
            }
        }
        match pivot {
            None => self.done = true,
            Some(i) => {
                self.counts[i] += 1;
                for c in &mut self.counts[i + 1..] {
                    *c = 0;
                }
                self.counts[d - 1] = tail - 1;
            }
        }
        Some(out)
    }
}

/// Clamp negatives to zero and renormalize.
pub fn project_to_simplex(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|x| *x = 1.0 / n);
    }
}

/// Point in a product of simplices.
pub type SimplexPoint = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: SimplexPoint,
    pub value: f64,
    pub evaluations: usize,
}

/// Compass search over a product of simplices, maximizing `f`.
///
/// Each sweep probes every coordinate of every block at `+step` and `-step`,
/// projecting back onto the simplex; the first strict improvement is taken.
/// A sweep without improvement halves the step, down to `min_step`.
pub fn pattern_search<F>(f: F, start: SimplexPoint, step: f64, min_step: f64) -> SearchResult
where
    F: Fn(&SimplexPoint) -> f64,
{
    let mut point = start;
    let mut value = f(&point);
    let mut evaluations = 1;
    let mut step = step;
    while step >= min_step {
        let mut improved = false;
        'sweep: for b in 0..point.len() {
            if point[b].len() < 2 {
                continue;
            }
            for i in 0..point[b].len() {
                for sign in [1.0, -1.0] {
                    let mut cand = point.clone();
                    cand[b][i] += sign * step;
                    project_to_simplex(&mut cand[b]);
                    if cand[b] == point[b] {
                        continue;
                    }
                    let v = f(&cand);
                    evaluations += 1;
                    if v > value {
                        point = cand;
                        value = v;
                        improved = true;
                        break 'sweep;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    SearchResult { point, value, evaluations }
}

/// Lattice-then-refine search over a product of simplices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSearch {
    /// Lattice resolution `k` per block (coordinates are multiples of `1/k`).
    pub resolution: u32,
    /// Upper bound on the number of lattice points; the resolution is lowered
    /// until the product lattice fits.
    pub max_grid_points: usize,
    /// Number of best lattice points refined by pattern search.
    pub refine_starts: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Largest alphabet a caller may search over.
    pub max_inputs: usize,
}

impl Default for SimplexSearch {
    fn default() -> Self {
        SimplexSearch {
            resolution: 20,
            max_grid_points: 20_000,
            refine_starts: 3,
            initial_step: 0.05,
            min_step: 1e-4,
            max_inputs: 6,
        }
    }
}

impl SimplexSearch {
    /// Largest resolution `<= self.resolution` whose product lattice over
    /// blocks of the given dimensions fits the budget.
    pub fn effective_resolution(&self, dims: &[usize]) -> u32 {
        let mut k = self.resolution.max(1);
        while k > 1 {
            let total = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(GridSpec { dimension: d, resolution: k }.len()));
            if matches!(total, Some(t) if t <= self.max_grid_points) {
                break;
            }
            k -= 1;
        }
        k
    }

    pub fn check_alphabet(&self, n: usize) -> Result<()> {
        if n > self.max_inputs {
            return Err(Error::Input(format!("search over {n} symbols exceeds the configured cap of {}", self.max_inputs)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptimum {
    pub point: SimplexPoint,
    pub value: f64,
    pub grid_resolution: u32,
}

/// Product lattice over blocks, in mixed-radix order with the last block
/// varying fastest.
pub fn product_lattice(dims: &[usize], resolution: u32) -> Vec<SimplexPoint> {
    let blocks: Vec<Vec<Vec<f64>>> = dims
        .iter()
        .map(|&d| simplex_grid(GridSpec { dimension: d, resolution }).collect())
        .collect();
    let mut out: Vec<SimplexPoint> = vec![Vec::new()];
    for block in &blocks {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                block.iter().map(move |b| {
                    let mut p = prefix.clone();
                    p.push(b.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Maximizes `f` over a product of simplices of the given dimensions.
///
/// The lattice is evaluated in parallel; ranking and refinement order depend
/// only on lattice order, so the result is identical for any thread count.
pub fn maximize_on_simplices<F>(f: F, dims: &[usize], search: &SimplexSearch) -> SimplexOptimum
where
    F: Fn(&SimplexPoint) -> f64 + Sync,
{
    use rayon::prelude::*;
    let k = search.effective_resolution(dims);
    let lattice = product_lattice(dims, k);
    let values: Vec<f64> = lattice.par_iter().map(&f).collect();
    let mut order: Vec<usize> = (0..lattice.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let starts: Vec<usize> = order.into_iter().take(search.refine_starts.max(1)).collect();
    let refined: Vec<SearchResult> = starts
        .par_iter()
        .map(|&i| {
            if values[i] == f64::INFINITY {
                return SearchResult { point: lattice[i].clone(), value: values[i], evaluations: 0 };
            }
            pattern_search(&f, lattice[i].clone(), search.initial_step, search.min_step)
        })
        .collect();
    let (best, value) = argmax_first(refined, |r| r.value).expect("lattice is never empty");
    SimplexOptimum { point: best.point, value, grid_resolution: k }
}

/// Pulls `p` toward `center` until `g <= level`.
///
/// Returns `center + s (p - center)` for the largest `s` in `[0, 1]` with
/// `g <= level`, assuming `g(center) <= level` and `g` convex along the
/// segment. Every feasible point is a fixed point, so composing an objective
/// with this map turns a convex constraint into an unconstrained search.
pub fn retract_to_level<G>(center: &[f64], p: &[f64], g: G, level: f64) -> Vec<f64>
where
    G: Fn(&[f64]) -> f64,
{
    let at = |s: f64| -> Vec<f64> { center.iter().zip(p).map(|(c, x)| c + s * (x - c)).collect() };
    if g(p) <= level {
        return p.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(&at(mid)) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Best point of a collection under `f`; ties keep the earliest point.
pub fn argmax_first<T, I, F>(items: I, mut f: F) -> Option<(T, f64)>
where
    I: IntoIterator<Item = T>,
    F: FnMut(&T) -> f64,
{
    let mut best: Option<(T, f64)> = None;
    for it in items {
        let v = f(&it);
        if best.as_ref().map_or(true, |(_, bv)| v > *bv || (bv.is_nan() && !v.is_nan())) {
            best = Some((it, v));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bisect_linear() {
        let r = bisect_monotone(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = bisect_monotone(|x| 1.0 - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_without_sign_change_is_bracket_error() {
        let e = bisect_monotone(|x| x + 5.0, 0.0, 2.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
    }

    #[test]
    fn bisect_bracket_halves_each_iteration() {
        let mut mids = Vec::new();
        let _ = bisect_monotone(
            |x| {
                mids.push(x);
                x - 0.3
            },
            0.0,
            1.0,
            1e-9,
        );
        // mids[0], mids[1] are the endpoints; successive midpoints move by
        // exactly half the previous move.
        let steps: Vec<f64> = mids[2..].windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in steps.windows(2) {
            assert!((w[1] - 0.5 * w[0]).abs() <= 1e-15);
        }
    }

    #[test]
    fn golden_section_quadratic() {
        let m = maximize_1d(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!((m.x - 0.3).abs() < 1e-8);
        assert!(m.value.abs() < 1e-15);
        assert_eq!(m.boundary, None);
    }

    #[test]
    fn golden_section_monotone_flags_boundary() {
        let m = maximize_1d(|x| x, 0.0, 2.0, 1e-9);
        assert_eq!(m.x, 2.0);
        assert_eq!(m.boundary, Some(Boundary::Upper));
        let m = maximize_1d(|x| -x, 0.0, 2.0, 1e-9);
        assert_eq!(m.x, 0.0);
        assert_eq!(m.boundary, Some(Boundary::Lower));
    }

    #[test]
    fn simplex_grid_examples() {
        let pts: Vec<_> = simplex_grid(GridSpec::new(2, 2).unwrap()).collect();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        let pts: Vec<_> = simplex_grid(GridSpec::new(3, 1).unwrap()).collect();
        assert_eq!(pts, vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
        let spec = GridSpec::new(3, 4).unwrap();
        assert_eq!(simplex_grid(spec).count(), 15);
        assert_eq!(spec.len(), 15);
        let pts: Vec<_> = simplex_grid(GridSpec::new(1, 7).unwrap()).collect();
        assert_eq!(pts, vec![vec![1.0]]);
    }

    #[test]
    fn pattern_search_concave_quadratic() {
        let target = [0.2, 0.5, 0.3];
        let f = |p: &SimplexPoint| -> f64 { -p[0].iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>() };
        let r = pattern_search(f, vec![vec![1.0 / 3.0; 3]], 0.1, 1e-6);
        for (a, b) in r.point[0].iter().zip(&target) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.point);
        }
    }

    #[test]
    fn pattern_search_constant_returns_start() {
        let start = vec![vec![0.25, 0.75], vec![1.0, 0.0, 0.0]];
        let r = pattern_search(|_| 1.0, start.clone(), 0.1, 1e-3);
        assert_eq!(r.point, start);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn argmax_first_keeps_earliest_tie() {
        let (i, v) = argmax_first(vec![1, 2, 3, 4], |&i| if i % 2 == 0 { 5.0 } else { 1.0 }).unwrap();
        assert_eq!((i, v), (2, 5.0));
    }

    proptest! {
        #[test]
        fn grid_count_and_validity(d in 1usize..5, k in 1u32..9) {
            let spec = GridSpec::new(d, k).unwrap();
            let pts: Vec<_> = simplex_grid(spec).collect();
            prop_assert_eq!(pts.len(), spec.len());
            for p in &pts {
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(p.iter().all(|&v| v >= 0.0));
            }
            for w in pts.windows(2) {
                prop_assert!(w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less));
            }
        }

        #[test]
        fn pattern_search_never_worse_than_start(a in 0.0f64..1.0, c in -3.0f64..3.0) {
            let f = |p: &SimplexPoint| (c * p[0][0]).sin() + p[0][1] * p[0][1];
            let start = vec![vec![a, 1.0 - a]];
            let v0 = f(&start);
            let r = pattern_search(f, start, 0.1, 1e-4);
            prop_assert!(r.value >= v0);
        }
    }
}
