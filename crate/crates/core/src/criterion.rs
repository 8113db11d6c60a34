//! A sufficient condition for uniqueness on densities.
//!
//! A density `f` has property `P(p, α, φ)` when, read in the chart at `p`,
//! `f(θ) ≤ (1 − α)/2π` for every `|θ| ≥ φ`. If `p` is critical and
//! `φ < φ_α = π√α/(1 + √α)`, then `p` is the unique Fréchet mean. The
//! search in [`guarantee_existence`] needs no critical point in advance: any
//! witness with `α ≥ α_δ` and `φ ≤ δ·φ_α` already pins a unique mean within
//! `(1 − δ)·φ_α` of its center.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::geometry::{arclength_distance, Angle, CirclePoint};
use crate::measures::CircularMeasure;

/// Slack on the density bound, absorbing rounding in grid values.
pub const DENSITY_SLACK: f64 = 1e-15;

/// Number of centers scanned by [`guarantee_existence`].
pub const WITNESS_CENTERS: usize = 720;

/// Step of the `α` grid scanned by [`guarantee_existence`].
pub const WITNESS_ALPHA_STEP: f64 = 0.01;

const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionParams {
    pub p: CirclePoint,
    pub alpha: f64,
    pub phi: f64,
}

impl CriterionParams {
    /// Requires `0 < α ≤ 1` and `0 < φ < π`.
    pub fn new(p: CirclePoint, alpha: f64, phi: f64) -> Result<Self> {
        check_finite(alpha)?;
        check_finite(phi)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange {
                what: "alpha",
                value: alpha,
                expected: "(0, 1]",
            });
        }
        if !(phi > 0.0 && phi < PI) {
            return Err(Error::OutOfRange {
                what: "phi",
                value: phi,
                expected: "(0, π)",
            });
        }
        Ok(CriterionParams { p, alpha, phi })
    }

    /// The density ceiling `(1 − α)/2π` away from the center.
    pub fn bound(&self) -> f64 {
        (1.0 - self.alpha) / (2.0 * PI)
    }

    /// Whether `φ < φ_α`, the regime where the property forces uniqueness.
    pub fn is_sufficient(&self) -> bool {
        self.phi < phi_alpha_unchecked(self.alpha)
    }
}

fn require_density(mu: &CircularMeasure) -> Result<()> {
    if mu.is_atomless() {
        Ok(())
    } else {
        Err(Error::AtomicPart(mu.atom_weight()))
    }
}

/// Whether the density of `mu` has property `P(params)`. Every grid cell
/// meeting `{|θ| ≥ φ}` is compared with the bound.
pub fn satisfies_p(mu: &CircularMeasure, params: &CriterionParams) -> Result<bool> {
    require_density(mu)?;
    let nu = mu.pushforward(&params.p);
    let ceiling = params.bound() + DENSITY_SLACK;
    Ok(nu
        .pieces()
        .iter()
        .filter(|c| c.hi > params.phi || c.lo <= -params.phi)
        .all(|c| c.value <= ceiling))
}

fn phi_alpha_unchecked(alpha: f64) -> f64 {
    let s = alpha.sqrt();
    PI * s / (1.0 + s)
}

/// `φ_α = π√α/(1 + √α)`, increasing from `0` to `π/2` on `(0, 1]`.
pub fn phi_alpha(alpha: f64) -> Result<f64> {
    check_finite(alpha)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            expected: "(0, 1]",
        });
    }
    Ok(phi_alpha_unchecked(alpha))
}

fn cubic(delta: f64, x: f64) -> f64 {
    let a = 5.0 - 6.0 * delta + delta * delta;
    let b = 1.0 - delta * delta;
    let c = -(2.0 * delta + 1.0);
    ((a * x + b) * x + c) * x - 1.0
}

/// `α_δ`: the square of the root in `(0, 1]` of
/// `(5 − 6δ + δ²)X³ + (1 − δ²)X² − (2δ + 1)X − 1`.
pub fn alpha_delta(delta: f64) -> Result<f64> {
    check_finite(delta)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta,
            expected: "(0, 1/2]",
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (cubic(delta, lo), cubic(delta, hi));
    if f_hi == 0.0 {
        return Ok(1.0);
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::Criterion(format!("no sign change of the cubic on (0, 1] for delta = {delta}")));
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if cubic(delta, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    Ok(root * root)
}

/// Moves the center to `p2`: `P(p, α, φ) ⟹ P(p2, α, φ + d(p, p2))`.
/// Requires `φ < π/2` and `d(p, p2) < π − φ`.
pub fn translate(params: &CriterionParams, p2: &CirclePoint) -> Result<CriterionParams> {
    if params.phi >= PI / 2.0 {
        return Err(Error::Criterion(format!("phi = {} must be below π/2", params.phi)));
    }
    let d = arclength_distance(&params.p, p2);
    if d >= PI - params.phi {
        return Err(Error::Criterion(format!(
            "distance {d} between centers must be below π − phi = {}",
            PI - params.phi
        )));
    }
    CriterionParams::new(*p2, params.alpha, params.phi + d)
}

/// `P(p, α, φ) ⟹ P(p, α2, φ2)` for `α2 ≤ α` and `φ2 ≥ φ`.
pub fn weaken(params: &CriterionParams, alpha2: f64, phi2: f64) -> Result<CriterionParams> {
    if alpha2 > params.alpha || phi2 < params.phi {
        return Err(Error::Criterion(format!(
            "weakening needs alpha2 <= {} and phi2 >= {}",
            params.alpha, params.phi
        )));
    }
    CriterionParams::new(params.p, alpha2, phi2)
}

/// Bound on `|m(μ_p)|` for densities with property `P(p, α, φ)`:
/// `φ + (1 − α)(π − φ)²/4π`. Accepts the closed ranges `α ∈ [0, 1]`,
/// `φ ∈ [0, π]`.
pub fn mean_bound(alpha: f64, phi: f64) -> Result<f64> {
    check_finite(alpha)?;
    check_finite(phi)?;
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=PI).contains(&phi) {
        return Err(Error::OutOfRange {
            what: "alpha or phi",
            value: if (0.0..=1.0).contains(&alpha) { phi } else { alpha },
            expected: "alpha in [0, 1], phi in [0, π]",
        });
    }
    Ok(phi + (1.0 - alpha) * (PI - phi).powi(2) / (4.0 * PI))
}

/// Lower bound `½(α(π − φ)² − φ²)` on the gap `G` near the antipode of a
/// critical center with property `P(α, φ)`.
pub fn gap_floor(alpha: f64, phi: f64) -> f64 {
    0.5 * (alpha * (PI - phi).powi(2) - phi * phi)
}

/// The `α` values scanned for a given `δ`: `α_δ, α_δ + 0.01, …` and `1`.
pub fn witness_alphas(delta: f64) -> Result<Vec<f64>> {
    let a0 = alpha_delta(delta)?;
    let mut out: Vec<f64> = (0..)
        .map(|k| a0 + k as f64 * WITNESS_ALPHA_STEP)
        .take_while(|&a| a < 1.0)
        .collect();
    out.push(1.0);
    Ok(out)
}

/// Searches [`WITNESS_CENTERS`] centers and the `α` grid of
/// [`witness_alphas`] for parameters `(p, α, δ·φ_α)` satisfied by the
/// density. Centers are scanned in increasing angle from `-π`, and `α` in
/// increasing order for each center; the first hit is returned.
pub fn guarantee_existence(mu: &CircularMeasure, delta: f64) -> Result<Option<CriterionParams>> {
    require_density(mu)?;
    if delta >= 0.5 {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta,
            expected: "(0, 1/2)",
        });
    }
    let alphas = witness_alphas(delta)?;
    let hit = (0..WITNESS_CENTERS).into_par_iter().find_map_first(|j| {
        let c = -PI + 2.0 * PI * j as f64 / WITNESS_CENTERS as f64;
        let p = CirclePoint::from_angle(Angle::wrapped(c));
        alphas.iter().find_map(|&alpha| {
            let phi = delta * phi_alpha_unchecked(alpha);
            let params = CriterionParams::new(p, alpha, phi).ok()?;
            satisfies_p(mu, &params).ok()?.then_some(params)
        })
    });
    Ok(hit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::GridDensity;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_alpha_values() {
        assert_abs_diff_eq!(phi_alpha(1.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_alpha(0.25).unwrap(), PI / 3.0, epsilon = 1e-15);
        assert!(phi_alpha(1e-12).unwrap() < 1e-5);
        assert!(phi_alpha(0.0).is_err());
        assert!(phi_alpha(1.5).is_err());
    }

    #[test]
    fn alpha_delta_values() {
        let expected = [(0.1, 0.4562), (0.2, 0.5368), (1.0 / 3.0, 0.6868), (0.49, 0.9749), (0.5, 1.0)];
        for (d, a) in expected {
            assert_abs_diff_eq!(alpha_delta(d).unwrap(), a, epsilon = 1e-4);
        }
        let mut prev = 0.0;
        for k in 1..=500 {
            let a = alpha_delta(k as f64 / 1000.0).unwrap();
            assert!(a > prev && a > 0.39 && a <= 1.0);
            prev = a;
        }
        assert!(alpha_delta(0.0).is_err());
        assert!(alpha_delta(0.6).is_err());
    }

    #[test]
    fn mean_bound_values() {
        assert_eq!(mean_bound(1.0, 0.7).unwrap(), 0.7);
        assert_abs_diff_eq!(mean_bound(0.0, 0.0).unwrap(), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_never_satisfies() {
        let u = CircularMeasure::uniform(512).unwrap();
        let p = CriterionParams::new(CirclePoint::ORIGIN, 0.1, 1.0).unwrap();
        assert!(!satisfies_p(&u, &p).unwrap());
        for &d in &[0.1, 0.2, 1.0 / 3.0, 0.49] {
            assert_eq!(guarantee_existence(&u, d).unwrap(), None);
        }
    }

    #[test]
    fn compact_support_satisfies() {
        let cells = 4096;
        let h = 2.0 * PI / cells as f64;
        let values: Vec<f64> = (0..cells)
            .map(|k| {
                let lo = -PI + k as f64 * h;
                if lo > -0.1 && lo + h <= 0.1 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let mu = CircularMeasure::from_density(GridDensity::from_cells(values).unwrap());
        let p = CriterionParams::new(CirclePoint::ORIGIN, 1.0, 0.1).unwrap();
        assert!(satisfies_p(&mu, &p).unwrap());
        let atoms = CircularMeasure::single_atom(Angle::ZERO);
        assert!(matches!(satisfies_p(&atoms, &p), Err(Error::AtomicPart(_))));
    }

    #[test]
    fn translation_preserves_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let alpha = rng.gen_range(0.2..1.0);
            let phi = rng.gen_range(0.05..1.4);
            let cells: Vec<f64> = (0..1024)
                .map(|k| {
                    let t = -PI + (k as f64 + 0.5) * 2.0 * PI / 1024.0;
                    if t.abs() < phi {
                        rng.gen_range(0.0..5.0)
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            // rescale the outer cells so the property holds after normalization
            let d = GridDensity::from_cells(cells).unwrap();
            let h = d.cell_width();
            // headroom for the rounding of the final normalization
            let ceiling = (1.0 - alpha) / (2.0 * PI) * (1.0 - 1e-12);
            let outer = |k: usize| d.edge(k + 1) > phi || d.edge(k) <= -phi;
            let scaled: Vec<f64> = d
                .values()
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    if outer(k) {
                        v.min(ceiling)
                    } else {
                        v
                    }
                })
                .collect();
            let inner: f64 = scaled
                .iter()
                .enumerate()
                .filter(|(k, _)| !outer(*k))
                .map(|(_, v)| v * h)
                .sum();
            if inner <= 0.0 {
                continue;
            }
            let outer_mass: f64 = scaled.iter().map(|v| v * h).sum::<f64>() - inner;
            let factor = (1.0 - outer_mass) / inner;
            if factor < 1.0 {
                continue;
            }
            let cells: Vec<f64> = scaled
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    if outer(k) {
                        v
                    } else {
                        v * factor
                    }
                })
                .collect();
            let mu = CircularMeasure::from_density(GridDensity::from_cells(cells).unwrap());
            let params = CriterionParams::new(CirclePoint::ORIGIN, alpha, phi).unwrap();
            assert!(satisfies_p(&mu, &params).unwrap());
            if phi < PI / 2.0 {
                let shift = rng.gen_range(-(PI - phi) * 0.99..(PI - phi) * 0.99);
                let p2 = CirclePoint::from_angle(Angle::new(shift).unwrap());
                let moved = translate(&params, &p2).unwrap();
                assert!(satisfies_p(&mu, &moved).unwrap());
            }
            let weaker = weaken(&params, alpha * 0.5, (phi * 1.5).min(3.0)).unwrap();
            assert!(satisfies_p(&mu, &weaker).unwrap());
            let m = mu.pushforward(&CirclePoint::ORIGIN).mean().abs();
            assert!(m <= mean_bound(alpha, phi).unwrap() + 1e-12);
        }
    }

    #[test]
    fn translate_checks_preconditions() {
        let p = CriterionParams::new(CirclePoint::ORIGIN, 0.5, 1.0).unwrap();
        let same = translate(&p, &CirclePoint::ORIGIN).unwrap();
        assert_eq!(same, p);
        let far = CirclePoint::from_angle(Angle::new(2.5).unwrap());
        assert!(translate(&p, &far).is_err());
        let wide = CriterionParams::new(CirclePoint::ORIGIN, 0.5, 1.7).unwrap();
        assert!(translate(&wide, &CirclePoint::ORIGIN).is_err());
        assert!(weaken(&p, 0.6, 1.0).is_err());
        assert!(weaken(&p, 0.5, 0.9).is_err());
    }

    #[test]
    fn concentrated_density_has_a_witness() {
        let d = GridDensity::from_fn(4096, |t| if t.abs() <= 0.05 { 1.0 } else { 0.01 / (2.0 * PI) * 0.1 / 0.99 })
            .unwrap();
        let mu = CircularMeasure::from_density(d);
        let w = guarantee_existence(&mu, 1.0 / 3.0).unwrap().expect("a witness");
        assert!(w.alpha >= alpha_delta(1.0 / 3.0).unwrap());
        assert!(w.phi <= phi_alpha(w.alpha).unwrap() / 3.0 + 1e-15);
    }
}
