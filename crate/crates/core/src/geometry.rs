//! Angles, points and normal coordinates on the unit circle.
//!
//! Every chart coordinate lives in the half-open interval `[-π, π)`. The
//! point `π` is never represented: it is identified with `-π`, which is the
//! coordinate of the cut locus of the chart center.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Result};

/// A chart coordinate in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const MINUS_PI: Angle = Angle(-PI);

    /// Reduces `t` modulo `2π` into `[-π, π)`.
    pub fn new(t: f64) -> Result<Self> {
        check_finite(t).map(|t| Angle(wrap_f64(t)))
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(check_finite(deg)?.to_radians())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Coordinate of the antipodal point.
    #[inline]
    pub fn antipode(self) -> Angle {
        Angle(cut_locus_f64(self.0))
    }

    /// Geodesic distance to `other` along the circle.
    #[inline]
    pub fn distance(self, other: Angle) -> f64 {
        coord_distance_f64(self.0, other.0)
    }

    /// Internal constructor for values already known to be finite.
    #[inline]
    pub(crate) fn wrapped(t: f64) -> Angle {
        debug_assert!(t.is_finite());
        Angle(wrap_f64(t))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Canonical representative of `t mod 2π` in `[-π, π)`.
pub fn wrap(t: f64) -> Result<Angle> {
    Angle::new(t)
}

#[inline]
pub(crate) fn wrap_f64(t: f64) -> f64 {
    if (-PI..PI).contains(&t) {
        return t;
    }
    let r = t.rem_euclid(TAU);
    // rem_euclid may round up to exactly TAU for tiny negative inputs; the
    // shift below maps that case to 0 as well.
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

#[inline]
pub(crate) fn cut_locus_f64(t: f64) -> f64 {
    if t >= 0.0 {
        t - PI
    } else {
        t + PI
    }
}

#[inline]
pub(crate) fn coord_distance_f64(t1: f64, t2: f64) -> f64 {
    let d = (t1 - t2).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance on `ℝ/2πℤ`: `min_k |t1 - t2 + 2πk|`.
pub fn coord_distance(t1: Angle, t2: Angle) -> f64 {
    coord_distance_f64(t1.0, t2.0)
}

/// Coordinate of the cut locus of the point with coordinate `t`.
pub fn cut_locus_coord(t: Angle) -> Angle {
    t.antipode()
}

/// A point of the unit circle in Euclidean coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    x: f64,
    y: f64,
}

impl CirclePoint {
    /// The reference point `(1, 0)`: coordinates of measures are read in the
    /// chart centered here unless stated otherwise.
    pub const ORIGIN: CirclePoint = CirclePoint { x: 1.0, y: 0.0 };

    /// Projects `(x, y)` onto the circle. Rejects the zero vector.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        check_finite(x)?;
        check_finite(y)?;
        let r = x.hypot(y);
        if r == 0.0 {
            return Err(crate::Error::OutOfRange {
                what: "norm",
                value: 0.0,
                expected: "a non-zero vector",
            });
        }
        Ok(CirclePoint { x: x / r, y: y / r })
    }

    pub fn from_angle(a: Angle) -> Self {
        let (s, c) = a.0.sin_cos();
        CirclePoint { x: c, y: s }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Coordinate of this point in the chart centered at [`CirclePoint::ORIGIN`].
    pub fn angle(&self) -> Angle {
        Angle(wrap_f64(self.y.atan2(self.x)))
    }

    pub fn antipode(&self) -> CirclePoint {
        CirclePoint {
            x: -self.x,
            y: -self.y,
        }
    }

    #[inline]
    fn dot(&self, other: &CirclePoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    fn cross(&self, other: &CirclePoint) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

/// Arclength distance, `2·arcsin(‖p1 − p2‖ / 2)`.
///
/// Evaluated as the angle between the two position vectors, which is the
/// same quantity without the loss of precision of `arcsin` near antipodes.
pub fn arclength_distance(p1: &CirclePoint, p2: &CirclePoint) -> f64 {
    p1.cross(p2).abs().atan2(p1.dot(p2))
}

/// Applies the rotation `R_t` to `p0`.
pub fn exp_map(p0: &CirclePoint, t: Angle) -> CirclePoint {
    let (s, c) = t.0.sin_cos();
    CirclePoint {
        x: c * p0.x - s * p0.y,
        y: s * p0.x + c * p0.y,
    }
}

/// Normal coordinate of `p` in the chart centered at `p0`.
pub fn log_map(p0: &CirclePoint, p: &CirclePoint) -> Angle {
    Angle(wrap_f64(p0.cross(p).atan2(p0.dot(p))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(0.0).unwrap().value(), 0.0);
        assert_eq!(wrap(PI).unwrap().value(), -PI);
        assert_eq!(wrap(-PI).unwrap().value(), -PI);
        assert_abs_diff_eq!(wrap(3.5 * PI).unwrap().value(), -PI / 2.0, epsilon = 1e-15);
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_tiny_negative_stays_in_range() {
        let a = wrap(-1e-300).unwrap().value();
        assert!((-PI..PI).contains(&a));
        let b = wrap(-f64::MIN_POSITIVE).unwrap().value();
        assert!((-PI..PI).contains(&b));
    }

    #[test]
    fn distance_examples() {
        let p = CirclePoint::from_angle(Angle::new(0.3).unwrap());
        assert_eq!(arclength_distance(&p, &p), 0.0);
        assert_eq!(arclength_distance(&p, &p.antipode()), PI);
        let a = CirclePoint::from_angle(Angle::new(0.75 * PI).unwrap());
        let b = CirclePoint::from_angle(Angle::new(-0.75 * PI).unwrap());
        assert_abs_diff_eq!(arclength_distance(&a, &b), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn coord_distance_examples() {
        let d = coord_distance(Angle::ZERO, Angle::new(PI / 2.0).unwrap());
        assert_abs_diff_eq!(d, PI / 2.0, epsilon = 1e-15);
        let d = coord_distance(Angle::MINUS_PI, Angle::new(PI - 1e-9).unwrap());
        assert_abs_diff_eq!(d, 1e-9, epsilon = 1e-15);
        let t = Angle::new(1.234).unwrap();
        assert_eq!(coord_distance(t, t), 0.0);
    }

    #[test]
    fn exp_log_examples() {
        let p = CirclePoint::from_angle(Angle::new(2.0).unwrap());
        assert_eq!(log_map(&p, &p).value(), 0.0);
        let q = exp_map(&p, Angle::MINUS_PI);
        let anti = p.antipode();
        assert_abs_diff_eq!(q.x(), anti.x(), epsilon = 1e-15);
        assert_abs_diff_eq!(q.y(), anti.y(), epsilon = 1e-15);
        assert_eq!(log_map(&p, &anti).value(), -PI);
    }

    #[test]
    fn cut_locus_examples() {
        assert_eq!(cut_locus_coord(Angle::ZERO).value(), -PI);
        assert_abs_diff_eq!(
            cut_locus_coord(Angle::new(-PI / 2.0).unwrap()).value(),
            PI / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            cut_locus_coord(Angle::new(PI / 2.0).unwrap()).value(),
            -PI / 2.0,
            epsilon = 1e-15
        );
        assert_eq!(cut_locus_coord(Angle::MINUS_PI).value(), 0.0);
    }

    #[test]
    fn circle_point_rejects_zero() {
        assert!(CirclePoint::new(0.0, 0.0).is_err());
        let p = CirclePoint::new(3.0, 4.0).unwrap();
        assert_abs_diff_eq!(p.x() * p.x() + p.y() * p.y(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_log_round_trip_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p0 = CirclePoint::from_angle(Angle::new(rng.gen_range(-PI..PI)).unwrap());
            let p = CirclePoint::from_angle(Angle::new(rng.gen_range(-PI..PI)).unwrap());
            let back = exp_map(&p0, log_map(&p0, &p));
            assert_abs_diff_eq!(back.x(), p.x(), epsilon = 1e-12);
            assert_abs_diff_eq!(back.y(), p.y(), epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn wrap_is_canonical(t in -1e7f64..1e7) {
            let a = wrap(t).unwrap().value();
            prop_assert!((-PI..PI).contains(&a));
            prop_assert_eq!(wrap(a).unwrap().value(), a);
        }

        #[test]
        fn wrap_is_periodic(t in -PI..PI, k in -1_000_000i64..=1_000_000) {
            let shifted = wrap(t + TAU * k as f64).unwrap();
            let base = wrap(t).unwrap();
            prop_assert!(coord_distance(shifted, base) < 1e-9);
        }

        #[test]
        fn chart_distance_matches_arclength(
            base in -PI..PI, t1 in -PI..PI, t2 in -PI..PI,
        ) {
            let p = CirclePoint::from_angle(Angle::new(base).unwrap());
            let a = Angle::new(t1).unwrap();
            let b = Angle::new(t2).unwrap();
            let d_chart = coord_distance(a, b);
            let d_arc = arclength_distance(&exp_map(&p, a), &exp_map(&p, b));
            prop_assert!((d_chart - d_arc).abs() < 1e-10);
            prop_assert!((0.0..=PI).contains(&d_arc));
        }

        #[test]
        fn arclength_is_a_metric(t1 in -PI..PI, t2 in -PI..PI, t3 in -PI..PI) {
            let p: Vec<_> = [t1, t2, t3]
                .iter()
                .map(|&t| CirclePoint::from_angle(Angle::new(t).unwrap()))
                .collect();
            let d = |i: usize, j: usize| arclength_distance(&p[i], &p[j]);
            prop_assert_eq!(d(0, 1), d(1, 0));
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        }

        #[test]
        fn antipode_is_at_distance_pi(t in -PI..PI) {
            let a = Angle::new(t).unwrap();
            let c = cut_locus_coord(a);
            prop_assert!((coord_distance(a, c) - PI).abs() < 1e-12);
            prop_assert!((-PI..PI).contains(&c.value()));
        }
    }
}
