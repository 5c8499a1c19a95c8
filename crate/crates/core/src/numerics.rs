//! Bracketed scalar root finding and grid-refinement minimisation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::Point;

const MAX_BISECTIONS: usize = 400;

/// A sign-changing interval `[lo, hi]` of some scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both endpoints and checks for a sign change.
    pub fn new<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Self> {
        Self::from_values(lo, hi, f(lo), f(hi))
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        let ordered = lo < hi || (lo == hi && f_lo == 0.0);
        if !ordered || f_lo.is_nan() || f_hi.is_nan() || f_lo * f_hi > 0.0 {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }
}

/// Bisection on a validated bracket.
///
/// Stops as soon as `|f(x)| <= tol` or the interval is narrower than `tol`,
/// returning whichever visited point has the smallest residual. The result
/// depends only on `f`, the bracket and `tol`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> f64 {
    let Bracket { mut lo, mut hi, mut f_lo, f_hi } = bracket;
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    let (mut best, mut best_res) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo.abs()) } else { (hi, f_hi.abs()) };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid.abs() < best_res {
            best = mid;
            best_res = f_mid.abs();
        }
        if f_mid == 0.0 || f_mid.abs() <= tol {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    best
}

/// Samples `f` at `samples + 1` evenly spaced points on `[lo, hi]` and returns
/// a bracket for every sign change, in increasing order.
pub fn scan_brackets<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, samples: usize) -> Vec<Bracket> {
    let samples = samples.max(1);
    let step = (hi - lo) / samples as f64;
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(lo);
    for i in 1..=samples {
        let x1 = if i == samples { hi } else { lo + step * i as f64 };
        let f1 = f(x1);
        if let Ok(b) = Bracket::from_values(x0, x1, f0, f1) {
            // A zero sitting exactly on a shared sample is reported once.
            if !(f0 == 0.0 && out.last().is_some_and(|p: &Bracket| p.hi == x0)) {
                out.push(b);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn centered(center: Point, half_width: f64) -> Self {
        let h = Point::new(half_width, half_width);
        Self { min: center - h, max: center + h }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            min: Point::new(self.min.x.max(other.min.x), self.min.y.max(other.min.y)),
            max: Point::new(self.max.x.min(other.max.x), self.max.y.min(other.max.y)),
        }
    }
}

/// Sampling density for [`grid_argmin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Samples per axis in every pass.
    pub resolution: usize,
    /// Local refinement passes after the initial global pass.
    pub refine_rounds: usize,
    /// Factor by which the window shrinks in each refinement pass.
    pub shrink: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { resolution: 256, refine_rounds: 3, shrink: 8.0 }
    }
}

impl GridSpec {
    pub fn new(resolution: usize, refine_rounds: usize) -> Result<Self> {
        if resolution < 16 || refine_rounds < 1 {
            return Err(Error::InvalidParams(format!(
                "grid needs resolution >= 16 and refine_rounds >= 1, got {resolution} and {refine_rounds}"
            )));
        }
        Ok(Self { resolution, refine_rounds, shrink: 8.0 })
    }

    /// Diagonal of one cell in the last refinement pass over `domain`.
    pub fn final_cell_diagonal(&self, domain: &Rect) -> f64 {
        let scale = self.shrink.powi(self.refine_rounds as i32) * (self.resolution - 1) as f64;
        (domain.width().powi(2) + domain.height().powi(2)).sqrt() / scale
    }
}

/// Sample positions of one grid pass, row-major with `y` outermost.
pub fn grid_points(window: &Rect, resolution: usize) -> impl Iterator<Item = Point> + '_ {
    let n = resolution.max(2);
    let dx = window.width() / (n - 1) as f64;
    let dy = window.height() / (n - 1) as f64;
    (0..n).flat_map(move |j| (0..n).map(move |i| Point::new(window.min.x + dx * i as f64, window.min.y + dy * j as f64)))
}

/// Minimises `objective` over the feasible samples of a refining grid.
///
/// `feasible` is only evaluated at samples that would improve on the row's
/// incumbent, so it may be the expensive one of the two closures.
///
/// The first pass covers `domain`; every refinement pass re-centres a window
/// `shrink` times smaller on the incumbent (clipped to `domain`). Rows are
/// evaluated in parallel but ties are broken by sample index, so the result
/// is deterministic.
pub fn grid_argmin<O, F>(objective: O, feasible: F, domain: Rect, spec: &GridSpec) -> Option<Point>
where
    O: Fn(Point) -> f64 + Sync,
    F: Fn(Point) -> bool + Sync,
{
    let mut window = domain;
    let mut incumbent: Option<(f64, Point)> = None;
    for _ in 0..=spec.refine_rounds {
        if let Some((v, p)) = best_on_grid(&objective, &feasible, &window, spec.resolution) {
            if incumbent.is_none_or(|(best, _)| v < best) {
                incumbent = Some((v, p));
            }
        }
        let (_, center) = incumbent?;
        let half = 0.5 * window.width().max(window.height()) / spec.shrink;
        window = Rect::centered(center, half).intersect(&domain);
    }
    incumbent.map(|(_, p)| p)
}

fn best_on_grid<O, F>(objective: &O, feasible: &F, window: &Rect, resolution: usize) -> Option<(f64, Point)>
where
    O: Fn(Point) -> f64 + Sync,
    F: Fn(Point) -> bool + Sync,
{
    let n = resolution.max(2);
    let dx = window.width() / (n - 1) as f64;
    let dy = window.height() / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .filter_map(|j| {
            let y = window.min.y + dy * j as f64;
            let mut best: Option<(f64, usize, Point)> = None;
            for i in 0..n {
                let p = Point::new(window.min.x + dx * i as f64, y);
                let v = objective(p);
                if best.is_some_and(|(b, _, _)| v >= b) || !feasible(p) {
                    continue;
                }
                best = Some((v, j * n + i, p));
            }
            best
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(v, _, p)| (v, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let b = Bracket::new(&f, 0.0, 2.0).unwrap();
        let x = find_root(f, b, 1e-12);
        assert_abs_diff_eq!(x, 2f64.sqrt(), epsilon = 1e-12);
        assert!(f(x).abs() <= 1e-12);
    }

    #[test]
    fn linear_through_origin() {
        let f = |x: f64| x;
        let x = find_root(f, Bracket::new(&f, -1.0, 1.0).unwrap(), 1e-14);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn same_sign_bracket_is_rejected() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(Bracket::new(&f, -1.0, 1.0), Err(Error::InvalidBracket { .. })));
        assert!(Bracket::from_values(1.0, 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn decreasing_function() {
        let f = |x: f64| (1.0 - x).powi(3);
        let x = find_root(f, Bracket::new(&f, -3.0, 4.0).unwrap(), 1e-15);
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn scan_finds_every_sign_change() {
        let f = |x: f64| x.sin();
        let b = scan_brackets(&f, 0.5, 10.0, 100);
        assert_eq!(b.len(), 3);
        let roots: Vec<f64> = b.iter().map(|br| find_root(f, *br, 1e-13)).collect();
        for (k, r) in roots.iter().enumerate() {
            assert_abs_diff_eq!(*r, std::f64::consts::PI * (k + 1) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn argmin_nearest_corner_of_rectangle() {
        let dom = Rect::new(Point::new(1.0, -1.0), Point::new(2.0, 1.0));
        let p = grid_argmin(|p| p.norm(), |_| true, dom, &GridSpec::default()).unwrap();
        assert_abs_diff_eq!(p, Point::new(1.0, 0.0), epsilon = GridSpec::default().final_cell_diagonal(&dom));
    }

    #[test]
    fn argmin_on_constraint_boundary() {
        let dom = Rect::new(Point::new(-2.0, -2.0), Point::new(2.0, 2.0));
        let spec = GridSpec::default();
        let p = grid_argmin(|p| p.norm(), |p| p.norm() >= 1.0, dom, &spec).unwrap();
        assert!(p.norm() >= 1.0);
        assert!(p.norm() - 1.0 <= spec.final_cell_diagonal(&dom));
    }

    #[test]
    fn argmin_empty_feasible_set() {
        let dom = Rect::new(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        assert!(grid_argmin(|p| p.norm(), |_| false, dom, &GridSpec::default()).is_none());
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(8, 3).is_err());
        assert!(GridSpec::new(64, 0).is_err());
        assert!(GridSpec::new(64, 1).is_ok());
    }
}
