//! Probability measures on the circle and their images in normal coordinates.
//!
//! A [`CircularMeasure`] is a mixture `a·(atoms) + (1 − a)·(density)` where the
//! density is piecewise constant on a uniform grid over `[-π, π)` in the chart
//! centered at [`CirclePoint::ORIGIN`]. Pushing it through the inverse chart at
//! some base point gives a [`LineMeasure`] on `[-π, π)` whose CDF and partial
//! moments are answered in `O(log n)` from prefix sums.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::geometry::{coord_distance_f64, wrap_f64, Angle, CirclePoint};

/// Grid resolution used when none is given.
pub const DEFAULT_GRID: usize = 4096;

/// Atoms closer than this (on the circle) are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

const MASS_TOL: f64 = 1e-12;
const DENSITY_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub position: Angle,
    pub weight: f64,
}

/// Piecewise-constant probability density on `M` equal cells covering `[-π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    values: Vec<f64>,
}

impl GridDensity {
    /// Builds a density from nonnegative cell values, rescaling them so that
    /// `Σ value · 2π/M = 1`.
    pub fn from_cells(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMeasure("density grid has no cells".into()));
        }
        for &v in &values {
            check_finite(v)?;
            if v < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative density value {v}")));
            }
        }
        let h = TAU / values.len() as f64;
        let total: f64 = values.iter().sum::<f64>() * h;
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("density has zero mass".into()));
        }
        let values = values.into_iter().map(|v| v / total).collect();
        Ok(GridDensity { values })
    }

    pub fn uniform(cells: usize) -> Result<Self> {
        Self::from_cells(vec![1.0; cells.max(1)])
    }

    /// Von Mises density `∝ exp(κ cos(t − μ))`, averaged over each cell.
    pub fn von_mises(kappa: f64, mu: f64, cells: usize) -> Result<Self> {
        check_finite(kappa)?;
        check_finite(mu)?;
        if kappa < 0.0 {
            return Err(Error::OutOfRange {
                what: "kappa",
                value: kappa,
                expected: "kappa >= 0",
            });
        }
        Self::from_fn(cells, |t| (kappa * ((t - mu).cos() - 1.0)).exp())
    }

    /// Discretizes an arbitrary nonnegative function by composite Simpson
    /// averages over each cell, then normalizes.
    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        const SUB: usize = 8;
        let cells = cells.max(1);
        let h = TAU / cells as f64;
        let values = (0..cells)
            .map(|k| {
                let lo = -PI + k as f64 * h;
                let step = h / SUB as f64;
                let mut acc = f(lo) + f(lo + h);
                for j in 1..SUB {
                    let w = if j % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(lo + j as f64 * step);
                }
                acc / (3.0 * SUB as f64)
            })
            .collect();
        Self::from_cells(values)
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn cell_width(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Left edge of cell `k` (for `k == cells()`, the right edge `π`).
    #[inline]
    pub fn edge(&self, k: usize) -> f64 {
        if k == self.values.len() {
            PI
        } else {
            -PI + k as f64 * self.cell_width()
        }
    }

    pub fn value_at(&self, t: Angle) -> f64 {
        let k = ((t.value() + PI) / self.cell_width()).floor() as usize;
        self.values[k.min(self.values.len() - 1)]
    }
}

/// A probability measure on the circle: weighted atoms plus a grid density.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularMeasure {
    atom_weight: f64,
    atoms: Vec<Atom>,
    density: Option<GridDensity>,
}

impl CircularMeasure {
    /// Purely atomic measure. Weights must be positive; they are normalized to
    /// sum to one and atoms closer than [`ATOM_MERGE_TOL`] are merged.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let atoms = normalize_atoms(atoms)?;
        Ok(CircularMeasure {
            atom_weight: 1.0,
            atoms,
            density: None,
        })
    }

    /// Equal-weight atoms at the given angles.
    pub fn empirical_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidMeasure("no samples".into()));
        }
        Self::from_atoms(angles.iter().map(|&a| (a, 1.0)))
    }

    /// Empirical measure `(1/n) Σ δ_{x_i}`.
    pub fn empirical(points: &[CirclePoint]) -> Result<Self> {
        let angles: Vec<f64> = points.iter().map(|p| p.angle().value()).collect();
        Self::empirical_angles(&angles)
    }

    pub fn single_atom(position: Angle) -> Self {
        CircularMeasure {
            atom_weight: 1.0,
            atoms: vec![Atom {
                position,
                weight: 1.0,
            }],
            density: None,
        }
    }

    pub fn from_density(density: GridDensity) -> Self {
        CircularMeasure {
            atom_weight: 0.0,
            atoms: Vec::new(),
            density: Some(density),
        }
    }

    pub fn uniform(cells: usize) -> Result<Self> {
        GridDensity::uniform(cells).map(Self::from_density)
    }

    /// `atom_weight · atoms + (1 − atom_weight) · density`.
    pub fn mixture<I>(atom_weight: f64, atoms: I, density: GridDensity) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        check_finite(atom_weight)?;
        if !(0.0..=1.0).contains(&atom_weight) {
            return Err(Error::OutOfRange {
                what: "atom_weight",
                value: atom_weight,
                expected: "[0, 1]",
            });
        }
        if atom_weight == 0.0 {
            return Ok(Self::from_density(density));
        }
        let atoms = normalize_atoms(atoms)?;
        if atom_weight == 1.0 {
            return Ok(CircularMeasure {
                atom_weight,
                atoms,
                density: None,
            });
        }
        Ok(CircularMeasure {
            atom_weight,
            atoms,
            density: Some(density),
        })
    }

    /// Convex combination of measures. Density parts must share a grid size.
    pub fn combine(components: &[(CircularMeasure, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMeasure("empty mixture".into()));
        }
        let total: f64 = components.iter().map(|(_, w)| *w).sum();
        if components.iter().any(|(_, w)| !(w.is_finite() && *w > 0.0)) || total <= 0.0 {
            return Err(Error::InvalidMeasure("mixture weights must be positive".into()));
        }
        let mut atoms = Vec::new();
        let mut cells: Option<Vec<f64>> = None;
        let mut atom_mass = 0.0;
        for (mu, w) in components {
            let w = w / total;
            for a in &mu.atoms {
                atoms.push((a.position.value(), a.weight * mu.atom_weight * w));
            }
            atom_mass += mu.atom_weight * w;
            if let Some(d) = &mu.density {
                let scale = (1.0 - mu.atom_weight) * w;
                match &mut cells {
                    None => cells = Some(d.values.iter().map(|v| v * scale).collect()),
                    Some(acc) => {
                        if acc.len() != d.cells() {
                            return Err(Error::InvalidMeasure(format!(
                                "density grids differ in size ({} vs {})",
                                acc.len(),
                                d.cells()
                            )));
                        }
                        for (a, v) in acc.iter_mut().zip(&d.values) {
                            *a += v * scale;
                        }
                    }
                }
            }
        }
        match cells {
            None => Self::from_atoms(atoms),
            Some(c) if atoms.is_empty() => Ok(Self::from_density(GridDensity::from_cells(c)?)),
            Some(c) => {
                let atom_mass = atom_mass.clamp(0.0, 1.0);
                Self::mixture(atom_mass, atoms, GridDensity::from_cells(c)?)
            }
        }
    }

    /// Mass `a_δ` carried by the atomic part.
    #[inline]
    pub fn atom_weight(&self) -> f64 {
        self.atom_weight
    }

    #[inline]
    pub fn density_weight(&self) -> f64 {
        1.0 - self.atom_weight
    }

    /// Atoms with weights normalized within the atomic part.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&GridDensity> {
        self.density.as_ref()
    }

    pub fn is_atomic(&self) -> bool {
        self.density.is_none()
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass (should be one up to rounding).
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum::<f64>() * self.atom_weight;
        let dens = self
            .density
            .as_ref()
            .map(|d| d.values.iter().sum::<f64>() * d.cell_width())
            .unwrap_or(0.0)
            * self.density_weight();
        atoms + dens
    }

    /// Image of the measure in the normal-coordinate chart centered at `p0`.
    pub fn pushforward(&self, p0: &CirclePoint) -> LineMeasure {
        let shift = p0.angle().value();
        let mut atoms: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|a| {
                (
                    wrap_f64(a.position.value() - shift),
                    a.weight * self.atom_weight,
                )
            })
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut pieces = Vec::new();
        if let Some(d) = &self.density {
            let scale = self.density_weight();
            let m = d.cells();
            let edges: Vec<f64> = (0..=m).map(|k| wrap_f64(d.edge(k) - shift)).collect();
            for k in 0..m {
                let value = d.values[k] * scale;
                let lo = edges[k];
                let mut hi = edges[k + 1];
                if hi == -PI {
                    hi = PI;
                }
                if hi > lo {
                    pieces.push(Piece { lo, hi, value });
                } else {
                    // the cell straddles the cut locus of the chart center
                    if lo < PI {
                        pieces.push(Piece { lo, hi: PI, value });
                    }
                    if hi > -PI {
                        pieces.push(Piece { lo: -PI, hi, value });
                    }
                }
            }
            pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        }
        LineMeasure::build(*p0, atoms, pieces)
    }

    /// `n` i.i.d. draws; deterministic given `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<CirclePoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
            .map(|v| v.into_iter().map(CirclePoint::from_angle).collect())
    }

    /// Angles of `n` i.i.d. draws using the caller's generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Angle>> {
        if n == 0 {
            return Err(Error::InvalidMeasure("sample size must be at least 1".into()));
        }
        let atom_cdf = cumulative(self.atoms.iter().map(|a| a.weight));
        let cell_cdf = self
            .density
            .as_ref()
            .map(|d| cumulative(d.values.iter().copied()));
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let use_atoms = match self.density {
                None => true,
                Some(_) if self.atoms.is_empty() => false,
                Some(_) => rng.gen::<f64>() < self.atom_weight,
            };
            if use_atoms {
                let u = rng.gen::<f64>() * atom_cdf.last().copied().unwrap_or(1.0);
                let k = atom_cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
                out.push(self.atoms[k].position);
            } else {
                let d = self.density.as_ref().expect("density part present");
                let cdf = cell_cdf.as_ref().expect("density cdf present");
                let u = rng.gen::<f64>() * cdf.last().copied().unwrap_or(1.0);
                let k = cdf.partition_point(|&c| c <= u).min(d.cells() - 1);
                let t = d.edge(k) + rng.gen::<f64>() * d.cell_width();
                out.push(Angle::wrapped(t));
            }
        }
        Ok(out)
    }

    /// Arclength diameter of the support, in `[0, π]`.
    pub fn support_diameter(&self) -> Result<f64> {
        // arcs as (start, length)
        let mut arcs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| (a.position.value(), 0.0))
            .collect();
        if let Some(d) = &self.density {
            let positive: Vec<bool> = d.values.iter().map(|&v| v > 0.0).collect();
            let m = positive.len();
            if positive.iter().all(|&p| p) {
                return Ok(PI);
            }
            // start scanning right after a zero cell so no run wraps around
            let first_zero = positive.iter().position(|&p| !p).unwrap_or(0);
            let mut run: Option<(usize, usize)> = None;
            for step in 1..=m {
                let k = (first_zero + step) % m;
                if positive[k] {
                    run = Some(match run {
                        None => (k, 1),
                        Some((s, len)) => (s, len + 1),
                    });
                } else if let Some((s, len)) = run.take() {
                    arcs.push((d.edge(s), len as f64 * d.cell_width()));
                }
            }
            if let Some((s, len)) = run {
                arcs.push((d.edge(s), len as f64 * d.cell_width()));
            }
        }
        if arcs.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut best: f64 = 0.0;
        for (i, &(a, la)) in arcs.iter().enumerate() {
            best = best.max(la.min(PI));
            for &(b, lb) in &arcs[i + 1..] {
                // differences y - x sweep [b - a - la, b - a + lb]
                let lo = b - a - la;
                let len = la + lb;
                if (PI - lo).rem_euclid(TAU) <= len {
                    return Ok(PI);
                }
                best = best
                    .max(coord_distance_f64(lo, 0.0))
                    .max(coord_distance_f64(lo + len, 0.0));
            }
            if best >= PI {
                return Ok(PI);
            }
        }
        Ok(best.min(PI))
    }

    /// Ambient (chordal) diameter matching [`Self::support_diameter`].
    pub fn support_chord_diameter(&self) -> Result<f64> {
        self.support_diameter().map(|s| 2.0 * (s / 2.0).sin())
    }
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn normalize_atoms<I>(atoms: I) -> Result<Vec<Atom>>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for (pos, w) in atoms {
        check_finite(pos)?;
        check_finite(w)?;
        if w <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "atom weight must be positive, got {w}"
            )));
        }
        raw.push((wrap_f64(pos), w));
    }
    if raw.is_empty() {
        return Err(Error::InvalidMeasure("no atoms".into()));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (pos, w) in raw {
        match merged.last_mut() {
            Some(last) if pos - last.0 <= ATOM_MERGE_TOL => last.1 += w,
            _ => merged.push((pos, w)),
        }
    }
    // the first and last atoms may be neighbours across -π
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if coord_distance_f64(first.0, last.0) <= ATOM_MERGE_TOL {
            merged[0].1 += last.1;
            merged.pop();
        }
    }
    let total: f64 = merged.iter().map(|a| a.1).sum();
    Ok(merged
        .into_iter()
        .map(|(pos, w)| Atom {
            position: Angle::wrapped(pos),
            weight: w / total,
        })
        .collect())
}

/// Neumaier summation; prefix sums over thousands of cells stay within a few ulps.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Constant-density piece `[lo, hi)` of a [`LineMeasure`]; `value` is absolute
/// (mass per radian of the whole measure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// A probability measure on `[-π, π)`: the image of a circular measure in
/// the chart centered at `base`.
#[derive(Debug, Clone)]
pub struct LineMeasure {
    base: CirclePoint,
    coords: Vec<f64>,
    weights: Vec<f64>,
    // prefix sums over atoms: mass, first moment
    atom_m0: Vec<f64>,
    atom_m1: Vec<f64>,
    pieces: Vec<Piece>,
    piece_m0: Vec<f64>,
    piece_m1: Vec<f64>,
    mean: f64,
    second_moment: f64,
}

impl LineMeasure {
    fn build(base: CirclePoint, atoms: Vec<(f64, f64)>, pieces: Vec<Piece>) -> Self {
        let n = atoms.len();
        let mut atom_m0 = Vec::with_capacity(n + 1);
        let mut atom_m1 = Vec::with_capacity(n + 1);
        let (mut s0, mut s1, mut s2) = (Compensated::default(), Compensated::default(), Compensated::default());
        atom_m0.push(0.0);
        atom_m1.push(0.0);
        for &(t, w) in &atoms {
            s0.add(w);
            s1.add(w * t);
            s2.add(w * t * t);
            atom_m0.push(s0.value());
            atom_m1.push(s1.value());
        }
        let mut piece_m0 = Vec::with_capacity(pieces.len() + 1);
        let mut piece_m1 = Vec::with_capacity(pieces.len() + 1);
        let (mut p0, mut p1, mut p2) = (Compensated::default(), Compensated::default(), Compensated::default());
        piece_m0.push(0.0);
        piece_m1.push(0.0);
        for p in &pieces {
            p0.add(p.value * (p.hi - p.lo));
            p1.add(p.value * (p.hi - p.lo) * (p.hi + p.lo) / 2.0);
            p2.add(p.value * (p.hi - p.lo) * (p.hi * p.hi + p.hi * p.lo + p.lo * p.lo) / 3.0);
            piece_m0.push(p0.value());
            piece_m1.push(p1.value());
        }
        let (coords, weights) = atoms.into_iter().unzip();
        LineMeasure {
            base,
            coords,
            weights,
            atom_m0,
            atom_m1,
            pieces,
            piece_m0,
            piece_m1,
            mean: s1.value() + p1.value(),
            second_moment: s2.value() + p2.value(),
        }
    }

    pub fn base(&self) -> &CirclePoint {
        &self.base
    }

    /// Atom coordinates (sorted) with their absolute masses.
    pub fn atoms(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.coords.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn atom_count(&self) -> usize {
        self.coords.len()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_m0.last().unwrap() + self.piece_m0.last().unwrap()
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    #[inline]
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `ν([-π, t))`; atoms located exactly at `t` are excluded.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_finite(t)?;
        if !(-PI..=PI).contains(&t) {
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                expected: "[-π, π]",
            });
        }
        if t >= PI {
            return Ok(1.0);
        }
        Ok(self.moments_below(t).0)
    }

    /// `(ν([-π, c)), ∫_{[-π,c)} t dν)` for `c ∈ [-π, π]`.
    pub(crate) fn moments_below(&self, c: f64) -> (f64, f64) {
        let k = self.coords.partition_point(|&x| x < c);
        let (mut m0, mut m1) = (self.atom_m0[k], self.atom_m1[k]);
        let (d0, d1) = self.density_moments_below(c);
        m0 += d0;
        m1 += d1;
        (m0, m1)
    }

    pub(crate) fn density_moments_below(&self, c: f64) -> (f64, f64) {
        if self.pieces.is_empty() {
            return (0.0, 0.0);
        }
        let j = self.pieces.partition_point(|p| p.hi <= c);
        let (mut m0, mut m1) = (self.piece_m0[j], self.piece_m1[j]);
        if let Some(p) = self.pieces.get(j) {
            if p.lo < c {
                m0 += p.value * (c - p.lo);
                m1 += p.value * (c * c - p.lo * p.lo) / 2.0;
            }
        }
        (m0, m1)
    }

    /// Mass of the atoms lying within `tol` of `c` on the circle, and the
    /// mass of atoms strictly below `c` that are not among them.
    pub(crate) fn split_atoms_at(&self, c: f64, tol: f64) -> (f64, f64) {
        let lo = self.coords.partition_point(|&x| x < c - tol);
        let hi = self.coords.partition_point(|&x| x <= c + tol);
        let mut near = self.atom_m0[hi] - self.atom_m0[lo];
        let mut below = self.atom_m0[lo];
        // wraparound neighbours of -π
        if c - tol < -PI {
            let from = self.coords.partition_point(|&x| x < c - tol + TAU);
            near += self.atom_m0[self.coords.len()] - self.atom_m0[from];
        }
        if c + tol >= PI {
            let upto = self.coords.partition_point(|&x| x <= c + tol - TAU);
            near += self.atom_m0[upto];
            below -= self.atom_m0[upto.min(lo)];
        }
        (near, below)
    }

    /// Density value at chart coordinate `t` (zero outside every piece).
    pub fn density_at(&self, t: f64) -> f64 {
        let j = self.pieces.partition_point(|p| p.hi <= t);
        match self.pieces.get(j) {
            Some(p) if p.lo <= t => p.value,
            _ => 0.0,
        }
    }

    /// Sorted, de-duplicated breakpoints of the CDF: atom coordinates and
    /// density piece boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.coords.clone();
        for p in &self.pieces {
            pts.push(p.lo);
            pts.push(p.hi);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Free-function form of [`LineMeasure::cdf`].
pub fn cdf(nu: &LineMeasure, t: f64) -> Result<f64> {
    nu.cdf(t)
}

/// Free-function form of [`CircularMeasure::pushforward`].
pub fn pushforward(mu: &CircularMeasure, p0: &CirclePoint) -> LineMeasure {
    mu.pushforward(p0)
}

/// Checks the documented invariants of a measure. Useful after manual
/// construction through [`CircularMeasure::combine`].
pub fn validate(mu: &CircularMeasure) -> Result<()> {
    let mass = mu.total_mass();
    let tol = if mu.is_atomic() { MASS_TOL } else { DENSITY_MASS_TOL };
    if (mass - 1.0).abs() > tol {
        return Err(Error::InvalidMeasure(format!("total mass {mass} != 1")));
    }
    for w in mu.atoms.windows(2) {
        if coord_distance_f64(w[0].position.value(), w[1].position.value()) <= ATOM_MERGE_TOL {
            return Err(Error::InvalidMeasure("atoms are not distinct".into()));
        }
    }
    Ok(())
}
