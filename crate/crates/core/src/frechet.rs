//! Exact evaluation of the Fréchet functional `F(p) = ½ ∫ d²(x, p) dμ(x)`.
//!
//! In the chart centered at `p0`, with `ν` the image measure, `m` its mean and
//! `m₂` its second moment,
//!
//! ```text
//! F(θ) = ½ m₂ − θ m + ½ θ² + 2π g(θ)
//! g(θ) = ∫_{[-π, θ-π)} (t − (θ − π)) dν(t)      θ ∈ [0, π)
//! g(θ) = ∫_{[θ+π, π)}  ((θ + π) − t) dν(t)      θ ∈ [-π, 0)
//! ```
//!
//! Both partial integrals come from the prefix sums of [`LineMeasure`], so a
//! point evaluation costs `O(log n)` and is exact up to rounding for atoms and
//! piecewise-constant densities alike.
//!
//! The derivative is piecewise `θ − m − 2π·ν([-π, cut(θ)))` (with `2π` added on
//! the negative half). It is left-continuous and drops by `2π·w` when the cut
//! locus of `θ` crosses an atom of weight `w`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{cut_locus_f64, wrap_f64, Angle, CirclePoint};
use crate::measures::{CircularMeasure, LineMeasure, ATOM_MERGE_TOL};

/// A point is accepted as critical when `|m(ν_p)|` is below this.
pub const CRITICAL_TOL: f64 = 1e-8;

/// Functional value and one-sided derivatives at a chart coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetEvaluation {
    pub theta: Angle,
    pub value: f64,
    /// Left limit of the derivative; this is the value of the
    /// left-continuous derivative at `theta`.
    pub left_derivative: f64,
    pub right_derivative: f64,
    /// `right_derivative − left_derivative`: `−2π·μ({cut locus})`, never positive.
    pub jump: f64,
}

/// `2π g(θ)`, the part of `F` that sees the cut locus.
fn cut_term(nu: &LineMeasure, theta: f64) -> f64 {
    let total = nu.total_mass();
    let g = if theta >= 0.0 {
        let c = theta - PI;
        let (m0, m1) = nu.moments_below(c);
        m1 - c * m0
    } else {
        let c = theta + PI;
        let (m0, m1) = nu.moments_below(c);
        c * (total - m0) - (nu.mean() - m1)
    };
    TAU * g
}

/// `F` in the chart of `nu` at coordinate `theta ∈ [-π, π)`.
pub fn value_in_chart(nu: &LineMeasure, theta: f64) -> f64 {
    0.5 * nu.second_moment() - theta * nu.mean() + 0.5 * theta * theta + cut_term(nu, theta)
}

/// `F(θ) − F(0)` in the chart of `nu`.
pub fn gap_in_chart(nu: &LineMeasure, theta: f64) -> f64 {
    0.5 * theta * theta - theta * nu.mean() + cut_term(nu, theta)
}

/// One-sided derivatives `(left, right)` at `theta`.
pub fn derivatives_in_chart(nu: &LineMeasure, theta: f64) -> (f64, f64) {
    // within tolerance of the chart center the cut locus sits on the seam at
    // ±π; read it at exactly -π so atoms on either side of the seam count
    let theta = if theta.abs() <= ATOM_MERGE_TOL { 0.0 } else { theta };
    let c = cut_locus_f64(theta);
    let (near, atoms_below) = nu.split_atoms_at(c, ATOM_MERGE_TOL);
    let below = nu.density_moments_below(c).0 + atoms_below;
    let unwrapped = if theta < 0.0 { theta + TAU } else { theta };
    let left = unwrapped - TAU * below - nu.mean();
    let right = left - TAU * near;
    (left, right)
}

/// Full evaluation at chart coordinate `theta`.
pub fn evaluate_in_chart(nu: &LineMeasure, theta: Angle) -> FrechetEvaluation {
    let t = theta.value();
    let (left, right) = derivatives_in_chart(nu, t);
    FrechetEvaluation {
        theta,
        value: value_in_chart(nu, t),
        left_derivative: left,
        right_derivative: right,
        jump: right - left,
    }
}

/// `F_μ(p)`.
pub fn functional(mu: &CircularMeasure, p: &CirclePoint) -> f64 {
    let nu = mu.pushforward(p);
    value_in_chart(&nu, 0.0)
}

/// Value and one-sided derivatives of `F` at `exp_{p0}(theta)`, read in the
/// chart centered at `p0`.
pub fn derivative(mu: &CircularMeasure, p0: &CirclePoint, theta: Angle) -> FrechetEvaluation {
    evaluate_in_chart(&mu.pushforward(p0), theta)
}

/// `G(θ) = F(exp_{p*}(θ)) − F(p*)` for a critical point `p*`.
pub fn g_centered(mu: &CircularMeasure, p_star: &CirclePoint, theta: Angle) -> Result<f64> {
    let nu = mu.pushforward(p_star);
    require_critical(&nu)?;
    Ok(gap_in_chart(&nu, theta.value()))
}

pub(crate) fn require_critical(nu: &LineMeasure) -> Result<()> {
    let m = nu.mean().abs();
    if m < CRITICAL_TOL {
        Ok(())
    } else {
        Err(Error::NotCritical {
            measured: m,
            tolerance: CRITICAL_TOL,
        })
    }
}

/// Coordinates in the chart of `nu` where the derivative may jump: the cut
/// loci of its atoms.
pub fn cusp_coordinates(nu: &LineMeasure) -> Vec<f64> {
    let mut v: Vec<f64> = nu.atoms().map(|(t, _)| cut_locus_f64(t)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Evaluations on a uniform grid of `resolution` points over `[-π, π)`,
/// merged with every cusp coordinate, sorted by `theta`.
pub fn scan(nu: &LineMeasure, resolution: usize) -> Vec<FrechetEvaluation> {
    let h = TAU / resolution.max(1) as f64;
    let mut thetas: Vec<f64> = (0..resolution.max(1))
        .map(|k| -PI + k as f64 * h)
        .chain(cusp_coordinates(nu))
        .map(wrap_f64)
        .collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    thetas
        .par_iter()
        .map(|&t| evaluate_in_chart(nu, Angle::wrapped(t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{coord_distance_f64, exp_map};
    use crate::measures::GridDensity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct sum over atoms, independent of the prefix-sum route.
    fn brute_force_atoms(atoms: &[(f64, f64)], theta: f64) -> f64 {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        0.5 * atoms
            .iter()
            .map(|&(t, w)| w / total * coord_distance_f64(t, theta).powi(2))
            .sum::<f64>()
    }

    /// Midpoint quadrature of `½ ∫ d² f` with many sub-points per cell.
    fn quadrature_density(d: &GridDensity, theta: f64) -> f64 {
        let sub = 64;
        let h = d.cell_width() / sub as f64;
        let mut acc = 0.0;
        for (k, &v) in d.values().iter().enumerate() {
            for j in 0..sub {
                let t = d.edge(k) + (j as f64 + 0.5) * h;
                acc += v * coord_distance_f64(t, theta).powi(2) * h;
            }
        }
        0.5 * acc
    }

    fn three_atoms() -> CircularMeasure {
        CircularMeasure::from_atoms([
            (2.0 * PI / 3.0, 1.0 / 6.0),
            (0.0, 2.0 / 3.0),
            (-2.0 * PI / 3.0, 1.0 / 6.0),
        ])
        .unwrap()
    }

    #[test]
    fn uniform_is_constant() {
        let mu = CircularMeasure::uniform(4096).unwrap();
        for &b in &[0.0, 0.77, -2.9] {
            let p = CirclePoint::from_angle(Angle::new(b).unwrap());
            assert_abs_diff_eq!(functional(&mu, &p), PI * PI / 6.0, epsilon = 1e-12);
        }
        let nu = mu.pushforward(&CirclePoint::ORIGIN);
        for k in 0..100 {
            let t = -PI + k as f64 * 0.0628;
            let e = evaluate_in_chart(&nu, Angle::new(t).unwrap());
            assert_abs_diff_eq!(e.left_derivative, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.right_derivative, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_atom_at_its_own_position() {
        let a = Angle::new(0.4).unwrap();
        let mu = CircularMeasure::single_atom(a);
        assert_eq!(functional(&mu, &CirclePoint::from_angle(a)), 0.0);
    }

    #[test]
    fn three_atoms_value_at_center() {
        let v = functional(&three_atoms(), &CirclePoint::ORIGIN);
        assert_abs_diff_eq!(v, 2.0 * PI * PI / 27.0, epsilon = 1e-14);
        let atoms = [(2.0 * PI / 3.0, 1.0 / 6.0), (0.0, 2.0 / 3.0), (-2.0 * PI / 3.0, 1.0 / 6.0)];
        assert_abs_diff_eq!(v, brute_force_atoms(&atoms, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn derivative_at_center_is_minus_mean() {
        let mu = CircularMeasure::from_atoms([(0.3, 1.0), (1.2, 2.0), (-2.0, 0.5)]).unwrap();
        let p0 = CirclePoint::from_angle(Angle::new(0.1).unwrap());
        let nu = mu.pushforward(&p0);
        let e = evaluate_in_chart(&nu, Angle::ZERO);
        assert_abs_diff_eq!(e.left_derivative, -nu.mean(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.right_derivative, -nu.mean(), epsilon = 1e-15);
    }

    #[test]
    fn three_atoms_jump_at_cut_locus_of_light_atom() {
        let nu = three_atoms().pushforward(&CirclePoint::ORIGIN);
        // the atom at -2π/3 has its cut locus at π/3
        let e = evaluate_in_chart(&nu, Angle::new(PI / 3.0).unwrap());
        assert_abs_diff_eq!(e.jump, -TAU / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.left_derivative, PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.right_derivative, 0.0, epsilon = 1e-12);

        // finite differences on both sides of the cusp
        let h = 1e-7;
        let c = PI / 3.0;
        let fd_left = (value_in_chart(&nu, c - h) - value_in_chart(&nu, c - 2.0 * h)) / h;
        let fd_right = (value_in_chart(&nu, c + 2.0 * h) - value_in_chart(&nu, c + h)) / h;
        assert_abs_diff_eq!(fd_right - fd_left, -TAU / 6.0, epsilon = 1e-5);
    }

    #[test]
    fn jump_at_chart_center_uses_atom_at_minus_pi() {
        let mu = CircularMeasure::from_atoms([(-PI, 0.25), (1.0, 0.75)]).unwrap();
        let nu = mu.pushforward(&CirclePoint::ORIGIN);
        let e = evaluate_in_chart(&nu, Angle::ZERO);
        assert_abs_diff_eq!(e.left_derivative, -nu.mean(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.jump, -TAU * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn jump_at_minus_pi_uses_atom_at_zero() {
        let mu = CircularMeasure::from_atoms([(0.0, 0.4), (2.0, 0.6)]).unwrap();
        let nu = mu.pushforward(&CirclePoint::ORIGIN);
        let e = evaluate_in_chart(&nu, Angle::MINUS_PI);
        assert_abs_diff_eq!(e.jump, -TAU * 0.4, epsilon = 1e-15);
        // left-continuity across the seam: limit from θ → π⁻
        let (l, _) = derivatives_in_chart(&nu, PI - 1e-9);
        assert_abs_diff_eq!(e.left_derivative, l, epsilon = 1e-8);
    }

    #[test]
    fn g_centered_examples() {
        let u = CircularMeasure::uniform(4096).unwrap();
        for &t in &[-3.0, -0.5, 0.2, 3.1] {
            let g = g_centered(&u, &CirclePoint::ORIGIN, Angle::new(t).unwrap()).unwrap();
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
        }
        let p = Angle::new(-1.3).unwrap();
        let single = CircularMeasure::single_atom(p);
        for &t in &[-3.0, -0.5, 0.2, 3.1] {
            let g = g_centered(&single, &CirclePoint::from_angle(p), Angle::new(t).unwrap()).unwrap();
            assert_abs_diff_eq!(g, t * t / 2.0, epsilon = 1e-12);
        }
        let degenerate = CircularMeasure::from_atoms([(-PI / 2.0, 1.0), (PI / 2.0, 1.0)]).unwrap();
        let g = g_centered(&degenerate, &CirclePoint::ORIGIN, Angle::MINUS_PI).unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);

        let off = CirclePoint::from_angle(Angle::new(0.3).unwrap());
        assert!(matches!(
            g_centered(&degenerate, &off, Angle::ZERO),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..30);
            let atoms: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-PI..PI), rng.gen_range(0.01..1.0)))
                .collect();
            let mu = CircularMeasure::from_atoms(atoms.clone()).unwrap();
            let base = rng.gen_range(-PI..PI);
            let p0 = CirclePoint::from_angle(Angle::new(base).unwrap());
            let nu = mu.pushforward(&p0);
            for _ in 0..20 {
                let theta = rng.gen_range(-PI..PI);
                let abs = wrap_f64(theta + base);
                assert_abs_diff_eq!(
                    value_in_chart(&nu, theta),
                    brute_force_atoms(&atoms, abs),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn matches_quadrature_on_density() {
        let d = GridDensity::von_mises(3.0, 1.0, 128).unwrap();
        let mu = CircularMeasure::from_density(d.clone());
        let nu = mu.pushforward(&CirclePoint::ORIGIN);
        for k in 0..40 {
            let theta = -PI + 0.157 * k as f64;
            assert_abs_diff_eq!(value_in_chart(&nu, theta), quadrature_density(&d, theta), epsilon = 1e-6);
        }
    }

    #[test]
    fn scan_contains_cusps_and_is_sorted() {
        let nu = three_atoms().pushforward(&CirclePoint::ORIGIN);
        let rows = scan(&nu, 64);
        assert!(rows.windows(2).all(|w| w[0].theta.value() < w[1].theta.value()));
        let jumps: Vec<f64> = rows.iter().filter(|r| r.jump < -1e-9).map(|r| r.jump).collect();
        assert_eq!(jumps.len(), 3);
        let mut sorted = jumps.clone();
        sorted.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(sorted[0], -TAU * 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[1], -TAU / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[2], -TAU / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn finite_differences_on_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let cells: Vec<f64> = (0..256).map(|_| rng.gen_range(0.0..1.0)).collect();
            let mu = CircularMeasure::from_density(GridDensity::from_cells(cells).unwrap());
            let nu = mu.pushforward(&CirclePoint::from_angle(Angle::new(rng.gen_range(-PI..PI)).unwrap()));
            for _ in 0..50 {
                let t = rng.gen_range(-3.1..3.1);
                let h = 1e-6;
                let fd = (value_in_chart(&nu, t + h) - value_in_chart(&nu, t - h)) / (2.0 * h);
                let (l, r) = derivatives_in_chart(&nu, t);
                assert_abs_diff_eq!(l, r, epsilon = 1e-12);
                assert_abs_diff_eq!(l, fd, epsilon = 1e-5);
            }
        }
    }

    proptest! {
        #[test]
        fn lipschitz(
            atoms in proptest::collection::vec((-PI..PI, 0.01f64..1.0), 1..12),
            a in -PI..PI, b in -PI..PI,
        ) {
            let mu = CircularMeasure::from_atoms(atoms).unwrap();
            let pa = CirclePoint::from_angle(Angle::new(a).unwrap());
            let pb = CirclePoint::from_angle(Angle::new(b).unwrap());
            let lhs = (functional(&mu, &pa) - functional(&mu, &pb)).abs();
            prop_assert!(lhs <= TAU * coord_distance_f64(a, b) + 1e-12);
        }

        #[test]
        fn second_moment_is_twice_functional(
            atoms in proptest::collection::vec((-PI..PI, 0.01f64..1.0), 1..12),
            frac in 0.0f64..0.9,
            base in -PI..PI,
        ) {
            let d = GridDensity::von_mises(0.7, -1.0, 256).unwrap();
            let mu = CircularMeasure::mixture(1.0 - frac, atoms, d).unwrap();
            let p = CirclePoint::from_angle(Angle::new(base).unwrap());
            let nu = mu.pushforward(&p);
            prop_assert!((nu.second_moment() - 2.0 * functional(&mu, &p)).abs() < 1e-10);
        }

        #[test]
        fn gap_is_difference_of_values(
            atoms in proptest::collection::vec((-PI..PI, 0.01f64..1.0), 1..12),
            base in -PI..PI, theta in -PI..PI,
        ) {
            let mu = CircularMeasure::from_atoms(atoms).unwrap();
            let p = CirclePoint::from_angle(Angle::new(base).unwrap());
            let nu = mu.pushforward(&p);
            let q = exp_map(&p, Angle::new(theta).unwrap());
            let direct = functional(&mu, &q) - functional(&mu, &p);
            prop_assert!((gap_in_chart(&nu, theta) - direct).abs() < 1e-10);
        }
    }
}
