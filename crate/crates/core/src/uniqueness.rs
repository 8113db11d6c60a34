//! Certificates of uniqueness for a critical point of the Fréchet functional.
//!
//! Centered at a critical point `p*`, with `ν` the image measure, the gap
//! `G(θ) = F(θ) − F(0)` equals `2π·I(θ)` where
//!
//! ```text
//! I(θ) =  ∫₀^θ  (t/2π − ν([-π, −π + t))) dt     θ ∈ (0, π]
//! I(θ) =  ∫₀^|θ| (v/2π − ν((π − v, π))) dv       θ ∈ [-π, 0)
//! ```
//!
//! `p*` is the unique global minimizer exactly when `I > 0` on both branches.
//! The integrand is piecewise linear, so `I` is piecewise quadratic and its
//! extrema are found exactly from breakpoints and piece vertices.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{gap_in_chart, require_critical};
use crate::geometry::{Angle, CirclePoint};
use crate::measures::{CircularMeasure, LineMeasure};
use crate::solver::{solve, MeanResult};

/// Margins within this distance of zero are reported as exactly zero.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub critical_point: CirclePoint,
    pub holds: bool,
    /// Smallest value of `I` past its initial rise on either branch, and its
    /// value at the antipode; positive exactly when `p*` is the unique mean.
    pub margin: f64,
    /// Chart coordinate where `margin` is attained, when `holds` is false.
    pub violating_theta: Option<Angle>,
    /// `margin` was within [`BOUNDARY_TOL`] of zero and has been set to zero.
    pub at_boundary: bool,
    /// Largest `|2π·I − G|` over the evaluated candidate points.
    pub identity_residual: f64,
}

/// One branch of `I` on `[0, π]`, in its own variable `s = |θ|`.
#[derive(Debug, Clone)]
struct Branch {
    breaks: Vec<f64>,
    // value of I at each breakpoint
    values: Vec<f64>,
    // cumulative mass just to the right of each breakpoint
    mass: Vec<f64>,
    // density of the mass on (breaks[k], breaks[k+1])
    slope: Vec<f64>,
}

impl Branch {
    /// `atoms` are `(position, weight)` and `segments` are disjoint
    /// `(lo, hi, density)`; every position lies in `[0, π]`.
    fn build(atoms: Vec<(f64, f64)>, segments: Vec<(f64, f64, f64)>) -> Self {
        let mut breaks: Vec<f64> = vec![0.0, PI];
        breaks.extend(atoms.iter().map(|a| a.0));
        for s in &segments {
            breaks.push(s.0);
            breaks.push(s.1);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let index = |x: f64| breaks.partition_point(|&b| b < x);

        let n = breaks.len();
        let mut jump = vec![0.0; n];
        for (pos, w) in atoms {
            jump[index(pos)] += w;
        }
        let mut slope = vec![0.0; n];
        for (lo, hi, f) in segments {
            for s in &mut slope[index(lo)..index(hi)] {
                *s = f;
            }
        }

        let mut values = vec![0.0; n];
        let mut mass = vec![0.0; n];
        mass[0] = jump[0];
        for k in 1..n {
            let (b0, b1) = (breaks[k - 1], breaks[k]);
            let dx = b1 - b0;
            values[k] = values[k - 1] + (b1 * b1 - b0 * b0) / (2.0 * TAU) - mass[k - 1] * dx - 0.5 * slope[k - 1] * dx * dx;
            mass[k] = mass[k - 1] + slope[k - 1] * dx + jump[k];
        }
        Branch {
            breaks,
            values,
            mass,
            slope,
        }
    }

    fn eval(&self, s: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= s).saturating_sub(1);
        self.eval_on(k, s)
    }

    fn eval_on(&self, k: usize, s: f64) -> f64 {
        let b = self.breaks[k];
        let dx = s - b;
        self.values[k] + (s * s - b * b) / (2.0 * TAU) - self.mass[k] * dx - 0.5 * self.slope[k] * dx * dx
    }

    /// Breakpoints and interior stationary points of `I`, in increasing order.
    fn candidates(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.breaks.len());
        for k in 0..self.breaks.len() {
            out.push((self.breaks[k], self.values[k]));
            if k + 1 < self.breaks.len() {
                let denom = 1.0 / TAU - self.slope[k];
                if denom != 0.0 {
                    let t = (self.mass[k] - self.slope[k] * self.breaks[k]) / denom;
                    if t > self.breaks[k] && t < self.breaks[k + 1] {
                        out.push((t, self.eval_on(k, t)));
                    }
                }
            }
        }
        out
    }

    /// Minimum of `I` past its initial rise, with the location.
    fn margin(&self) -> (f64, f64) {
        let c = self.candidates();
        let start = c
            .windows(2)
            .position(|w| w[1].1 <= w[0].1)
            .unwrap_or(c.len() - 1);
        c[start..]
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(s, v)| (v, s))
            .expect("at least the endpoint")
    }

    /// Exact minimum of `I` over `[lo, hi] ⊂ [0, π]`.
    fn min_over(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (self.eval(lo), lo);
        let e = self.eval(hi);
        if e < best.0 {
            best = (e, hi);
        }
        for (s, v) in self.candidates() {
            if s >= lo && s <= hi && v < best.0 {
                best = (v, s);
            }
        }
        best
    }
}

/// The piecewise-quadratic function `I` centered at a critical point.
#[derive(Debug, Clone)]
pub struct CutLocusIntegral {
    plus: Branch,
    minus: Branch,
}

impl CutLocusIntegral {
    /// Builds `I` for a measure already read in the chart at the critical
    /// point.
    pub fn new(nu: &LineMeasure) -> Self {
        let mut plus_atoms = Vec::new();
        let mut minus_atoms = Vec::new();
        for (t, w) in nu.atoms() {
            if t < 0.0 {
                plus_atoms.push((t + PI, w));
            } else {
                minus_atoms.push((PI - t, w));
            }
        }
        let mut plus_segments = Vec::new();
        let mut minus_segments = Vec::new();
        for p in nu.pieces() {
            if p.lo < 0.0 {
                plus_segments.push((p.lo + PI, p.hi.min(0.0) + PI, p.value));
            }
            if p.hi > 0.0 {
                minus_segments.push((PI - p.hi, PI - p.lo.max(0.0), p.value));
            }
        }
        CutLocusIntegral {
            plus: Branch::build(plus_atoms, plus_segments),
            minus: Branch::build(minus_atoms, minus_segments),
        }
    }

    /// `I(θ)` for `θ ∈ [-π, π]`.
    pub fn eval(&self, theta: f64) -> f64 {
        if theta >= 0.0 {
            self.plus.eval(theta.min(PI))
        } else {
            self.minus.eval((-theta).min(PI))
        }
    }

    /// Margin and the coordinate where it is attained.
    pub fn margin(&self) -> (f64, Angle) {
        let (vp, sp) = self.plus.margin();
        let (vm, sm) = self.minus.margin();
        if vp <= vm {
            (vp, Angle::wrapped(sp))
        } else {
            (vm, Angle::wrapped(-sm))
        }
    }

    /// Exact minimum of `G = 2π·I` over `θ ∈ [lo, hi]`, where the interval
    /// lies within one branch (`0 ≤ lo` or `hi ≤ 0`) and inside `[-π, π]`.
    pub fn min_gap_over(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo <= hi && lo >= -PI && hi <= PI && (lo >= 0.0 || hi <= 0.0)) {
            return Err(Error::OutOfRange {
                what: "interval",
                value: lo,
                expected: "lo <= hi within a single branch of [-π, π]",
            });
        }
        let (v, s) = if lo >= 0.0 {
            let (v, s) = self.plus.min_over(lo, hi);
            (v, s)
        } else {
            let (v, s) = self.minus.min_over(-hi, -lo);
            (v, -s)
        };
        Ok((TAU * v, s))
    }

    fn candidate_thetas(&self) -> impl Iterator<Item = f64> + '_ {
        let plus = self.plus.candidates().into_iter().map(|c| c.0);
        let minus = self.minus.candidates().into_iter().map(|c| -c.0);
        plus.chain(minus)
    }
}

/// Certificate for the critical point `p_star` of `F_μ`.
pub fn certify(mu: &CircularMeasure, p_star: &CirclePoint) -> Result<UniquenessCertificate> {
    let nu = mu.pushforward(p_star);
    require_critical(&nu)?;
    let integral = CutLocusIntegral::new(&nu);
    let (raw, at) = integral.margin();
    let at_boundary = raw.abs() <= BOUNDARY_TOL;
    let margin = if at_boundary { 0.0 } else { raw };
    let holds = margin > 0.0;
    let identity_residual = integral
        .candidate_thetas()
        .map(|t| {
            let t = if t >= PI { -PI } else { t };
            (TAU * integral.eval(t) - gap_in_chart(&nu, t)).abs()
        })
        .fold(0.0, f64::max);
    Ok(UniquenessCertificate {
        critical_point: *p_star,
        holds,
        margin,
        violating_theta: (!holds).then_some(at),
        at_boundary,
        identity_residual,
    })
}

/// Finds the global argmins (exactly for atomic measures, by the grid oracle
/// otherwise) and certifies the best one. The two verdicts must agree.
pub fn find_mean_and_certify(
    mu: &CircularMeasure,
    tie_tol: f64,
    resolution: usize,
) -> Result<(MeanResult, UniquenessCertificate)> {
    let mean = solve(mu, tie_tol, resolution)?;
    let cert = certify(mu, &mean.best().point)?;
    if mean.unique != cert.holds {
        return Err(Error::VerdictMismatch {
            argmins: mean.argmins.len(),
            gap: mean.runner_up_gap,
            margin: cert.margin,
        });
    }
    Ok((mean, cert))
}
