//! Global minimization of the Fréchet functional.
//!
//! For an atomic measure the derivative of `F` has unit slope between the
//! antipodes of consecutive atoms and drops by `2π·w` across the antipode of
//! an atom of weight `w`. Each such window therefore holds at most one zero
//! of the derivative, and that zero is found by solving one affine equation.
//! [`critical_points`] does this for every window, so the set of local minima
//! is exact and complete. [`grid_oracle`] is an independent brute-force
//! minimizer for arbitrary measures.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{derivatives_in_chart, value_in_chart};
use crate::geometry::{coord_distance_f64, cut_locus_f64, exp_map, wrap_f64, Angle, CirclePoint};
use crate::measures::{CircularMeasure, LineMeasure};

/// Default absolute tolerance on `F` values for declaring a tie.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Candidates closer than this to a window edge are attributed to the edge.
const WINDOW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    /// Coordinate in the working chart.
    pub coord: Angle,
    /// Coordinate in the chart centered at [`CirclePoint::ORIGIN`].
    pub angle: Angle,
    pub point: CirclePoint,
    pub value: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub is_local_min: bool,
    /// Window (exact solver) or grid cell (oracle) that produced the point.
    pub branch_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanResult {
    /// Global minimizers within the tie tolerance, sorted by `angle`.
    pub argmins: Vec<CriticalPoint>,
    pub unique: bool,
    pub min_value: f64,
    /// Best local-minimum value outside `argmins` minus `min_value`; `None`
    /// when every local minimum is a global one.
    pub runner_up_gap: Option<f64>,
    /// Every local minimum found, sorted by `angle`.
    pub local_minima: Vec<CriticalPoint>,
}

impl MeanResult {
    fn from_minima(mut local_minima: Vec<CriticalPoint>, tie_tol: f64) -> Result<Self> {
        if local_minima.is_empty() {
            return Err(Error::InvalidMeasure("no local minimum found".into()));
        }
        local_minima.sort_by(|a, b| a.angle.value().total_cmp(&b.angle.value()));
        let min_value = local_minima
            .iter()
            .map(|c| c.value)
            .fold(f64::INFINITY, f64::min);
        let (argmins, rest): (Vec<&CriticalPoint>, Vec<&CriticalPoint>) = local_minima
            .iter()
            .partition(|c| c.value <= min_value + tie_tol);
        let runner_up_gap = rest
            .iter()
            .map(|c| c.value - min_value)
            .min_by(f64::total_cmp);
        Ok(MeanResult {
            unique: argmins.len() == 1,
            argmins: argmins.into_iter().copied().collect(),
            min_value,
            runner_up_gap,
            local_minima,
        })
    }

    /// The argmin with the smallest value (first in angle order on ties).
    pub fn best(&self) -> &CriticalPoint {
        self.argmins
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("argmins is never empty")
    }
}

fn check_tie_tol(tie_tol: f64) -> Result<()> {
    if tie_tol.is_finite() && tie_tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "tie_tol",
            value: tie_tol,
            expected: "a finite value >= 0",
        })
    }
}

fn require_atomic(mu: &CircularMeasure) -> Result<()> {
    if mu.is_atomic() {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(
            "the exact solver needs a purely atomic measure; use the grid oracle".into(),
        ))
    }
}

fn critical_point(nu: &LineMeasure, theta: f64, is_local_min: bool, branch_index: usize) -> CriticalPoint {
    let coord = Angle::wrapped(theta);
    let point = exp_map(nu.base(), coord);
    let (left, right) = derivatives_in_chart(nu, coord.value());
    CriticalPoint {
        coord,
        angle: point.angle(),
        point,
        value: value_in_chart(nu, coord.value()),
        left_derivative: left,
        right_derivative: right,
        is_local_min,
        branch_index,
    }
}

/// Every critical point of `F_μ` for an atomic `μ`, in the chart centered at
/// its first atom, sorted by coordinate.
///
/// Local minima are interior zeros of the derivative. A zero landing on a
/// window edge is reported with `is_local_min = false`: the antipode of that
/// point carries mass, so the derivative jumps down there.
pub fn critical_points(mu: &CircularMeasure) -> Result<Vec<CriticalPoint>> {
    require_atomic(mu)?;
    let base = CirclePoint::from_angle(mu.atoms()[0].position);
    let nu = mu.pushforward(&base);
    Ok(critical_points_in_chart(&nu))
}

pub(crate) fn critical_points_in_chart(nu: &LineMeasure) -> Vec<CriticalPoint> {
    let mut edges: Vec<f64> = nu.atoms().map(|(t, _)| cut_locus_f64(t)).collect();
    edges.sort_by(f64::total_cmp);
    let n = edges.len();
    let mut out = Vec::new();
    for k in 0..n {
        let a = edges[k];
        let len = if n == 1 {
            TAU
        } else if k + 1 < n {
            edges[k + 1] - a
        } else {
            edges[0] + TAU - a
        };
        let (_, right) = derivatives_in_chart(nu, a);
        let u = -right;
        if u > WINDOW_TOL && u < len - WINDOW_TOL {
            out.push(critical_point(nu, a + u, true, k));
        } else if (u - len).abs() <= WINDOW_TOL {
            // snap to the edge so its cut locus is exactly the atom
            let edge = if k + 1 < n { edges[k + 1] } else { edges[0] };
            out.push(critical_point(nu, edge, false, k));
        }
    }
    out.sort_by(|a, b| a.coord.value().total_cmp(&b.coord.value()));
    out
}

/// All global minimizers of `F_μ` for an atomic `μ`.
pub fn frechet_mean(mu: &CircularMeasure, tie_tol: f64) -> Result<MeanResult> {
    require_atomic(mu)?;
    frechet_mean_in_chart(mu, &CirclePoint::from_angle(mu.atoms()[0].position), tie_tol)
}

/// [`frechet_mean`] computed in the chart centered at `base`. The result is
/// independent of `base` up to rounding.
pub fn frechet_mean_in_chart(mu: &CircularMeasure, base: &CirclePoint, tie_tol: f64) -> Result<MeanResult> {
    check_tie_tol(tie_tol)?;
    require_atomic(mu)?;
    let minima = critical_points_in_chart(&mu.pushforward(base))
        .into_iter()
        .filter(|c| c.is_local_min)
        .collect();
    MeanResult::from_minima(minima, tie_tol)
}

/// Exact solver for atomic measures, grid oracle otherwise.
pub fn solve(mu: &CircularMeasure, tie_tol: f64, resolution: usize) -> Result<MeanResult> {
    if mu.is_atomic() {
        frechet_mean(mu, tie_tol)
    } else {
        grid_oracle_with_tol(mu, resolution, tie_tol)
    }
}

/// Brute-force minimizer: grid scan, golden-section refinement of every
/// candidate basin, then bisection on the sign of the derivative.
pub fn grid_oracle(mu: &CircularMeasure, resolution: usize) -> Result<MeanResult> {
    grid_oracle_with_tol(mu, resolution, DEFAULT_TIE_TOL)
}

const REFINE_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;
/// A refined point is kept only if its one-sided derivatives bracket zero to
/// this tolerance; refinements that stalled on a bracket edge fail it.
const STATIONARY_TOL: f64 = 1e-7;

pub fn grid_oracle_with_tol(mu: &CircularMeasure, resolution: usize, tie_tol: f64) -> Result<MeanResult> {
    check_tie_tol(tie_tol)?;
    if resolution < 8 {
        return Err(Error::OutOfRange {
            what: "resolution",
            value: resolution as f64,
            expected: "at least 8",
        });
    }
    let nu = mu.pushforward(&CirclePoint::ORIGIN);
    let h = TAU / resolution as f64;
    let grid: Vec<f64> = (0..resolution).map(|k| -PI + k as f64 * h).collect();
    let values: Vec<f64> = grid.iter().map(|&t| value_in_chart(&nu, t)).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);

    // F is 2π-Lipschitz, so a global minimizer lies within h/2 of a grid
    // point whose value is at most best + π·h
    let candidates: Vec<usize> = (0..resolution)
        .filter(|&k| {
            let prev = values[(k + resolution - 1) % resolution];
            let next = values[(k + 1) % resolution];
            (values[k] <= prev && values[k] <= next) || values[k] <= best + PI * h
        })
        .collect();

    let mut found: Vec<(f64, usize)> = Vec::new();
    for &k in &candidates {
        let lo = grid[k] - h;
        let hi = grid[k] + h;
        let x = golden_section(&nu, lo, hi);
        let x = polish(&nu, lo, hi, x);
        found.push((wrap_f64(x), k));
    }

    let mut minima: Vec<CriticalPoint> = found
        .into_iter()
        .map(|(t, k)| critical_point(&nu, t, true, k))
        .filter(|c| c.left_derivative <= STATIONARY_TOL && c.right_derivative >= -STATIONARY_TOL)
        .collect();
    minima.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut kept: Vec<CriticalPoint> = Vec::new();
    for c in minima {
        if kept
            .iter()
            .all(|d| coord_distance_f64(c.coord.value(), d.coord.value()) > DEDUP_TOL)
        {
            kept.push(c);
        }
    }
    MeanResult::from_minima(kept, tie_tol)
}

fn golden_section(nu: &LineMeasure, mut a: f64, mut b: f64) -> f64 {
    let f = |t: f64| value_in_chart(nu, wrap_f64(t));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > REFINE_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Locates the sign change `left(θ) ≤ 0 < left(θ⁺)` of the left-continuous
/// derivative near `x`, falling back to `x` when no bracket is found.
fn polish(nu: &LineMeasure, lo: f64, hi: f64, x: f64) -> f64 {
    let d = |t: f64| derivatives_in_chart(nu, wrap_f64(t)).0;
    // golden-section stalls about √ε away from a smooth minimum, so widen
    // the bracket until the derivative changes sign across it
    let bracket = [1e-7, 1e-5, 1e-3, f64::INFINITY].into_iter().find_map(|r| {
        let (a, b) = if r < 1e-4 { (x - r, x + r) } else { ((x - r).max(lo), (x + r).min(hi)) };
        (d(a) <= 0.0 && d(b) > 0.0).then_some((a, b))
    });
    let Some((mut a, mut b)) = bracket else {
        return x;
    };
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if d(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    // at a cusp the left derivative at `a` is ≤ 0 and the right one ≥ 0
    let (_, right_a) = derivatives_in_chart(nu, wrap_f64(a));
    if right_a >= 0.0 {
        a
    } else {
        b
    }
}
