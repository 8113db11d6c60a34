//! Concentration of empirical Fréchet means.
//!
//! For a measure with a unique mean `p*`, the gap `G(θ) = F(θ) − F(0)` read
//! at `p*` is bounded below by an increasing function `ρ` of the distance,
//! and `ρ(d(p*_n, p*)) ≥ C(s)·√(x/n)` has probability at most `2e^{−x}`.
//! [`simulate`] samples empirical means and measures how often that and the
//! related bounds fail.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::criterion::gap_floor;
use crate::error::{check_finite, Error, Result};
use crate::frechet::{gap_in_chart, value_in_chart};
use crate::geometry::{arclength_distance, cut_locus_f64, log_map, Angle};
use crate::measures::{CircularMeasure, DEFAULT_GRID};
use crate::solver::{frechet_mean, DEFAULT_TIE_TOL};
use crate::uniqueness::find_mean_and_certify;

/// Values of `f` at or below this, away from its zero, count as a second zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Cap on `C(s)` over `s ∈ [0, π]`.
pub const ENVELOPE_CAP: f64 = 4.0 * PI * (2.0 * PI * PI + PI + 1.0);

/// Quantile levels reported for the distances `d(p*_n, p*)`.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Default confidence parameters.
pub const DEFAULT_X: [f64; 3] = [1.0, 2.0, 4.0];

const RHO_STEPS: usize = 4096;
const SANDWICH_GRID: usize = 4096;
const SANDWICH_TOL: f64 = 1e-12;

/// Nondecreasing lower bound `ρ` on a gap function, tabulated on `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rho {
    step: f64,
    /// Suffix minima `g` at the grid points.
    floor: Vec<f64>,
    /// `Σ_{j<k} step·g_j`, a lower sum for `∫₀^{k·step} g`.
    lower_sum: Vec<f64>,
    values: Vec<f64>,
}

impl Rho {
    /// Lower sum of `(1/d)∫₀^d g` with `g` frozen at each left grid point;
    /// never exceeds the exact average since `g` is nondecreasing.
    /// `ρ(0) = 0` and `d ≥ π` reads `ρ(π)`.
    pub fn eval(&self, d: f64) -> f64 {
        if d.is_nan() || d <= 0.0 {
            return 0.0;
        }
        let last = self.floor.len() - 1;
        let d = d.min(last as f64 * self.step);
        let k = ((d / self.step).floor() as usize).min(last);
        (self.lower_sum[k] + (d - k as f64 * self.step) * self.floor[k]) / d
    }

    /// `ρ` at the grid points `k·π/4096`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Builds `ρ(θ) = (1/θ)∫₀^θ g(t) dt` with `g(t) = min_{|τ| ≥ t} f(θ₀ + τ)`,
/// the minimum taken over a grid of step `π/4096` on each side.
///
/// Rejects `f` that is negative somewhere or vanishes away from `θ₀`.
pub fn rho_from_gap(f: impl Fn(f64) -> f64, theta0: f64) -> Result<Rho> {
    check_finite(theta0)?;
    let step = PI / RHO_STEPS as f64;
    let mut side_min = Vec::with_capacity(RHO_STEPS + 1);
    for k in 0..=RHO_STEPS {
        let tau = k as f64 * step;
        let (a, b) = (f(theta0 + tau), f(theta0 - tau));
        for (v, t) in [(a, theta0 + tau), (b, theta0 - tau)] {
            check_finite(v)?;
            if v < -ZERO_TOL {
                return Err(Error::NegativeGap { theta: t, value: v });
            }
            if k > 0 && v <= ZERO_TOL {
                return Err(Error::MultipleZeros(t));
            }
        }
        side_min.push(a.min(b));
    }
    // suffix minima give g on the grid
    let mut g = side_min;
    for k in (0..RHO_STEPS).rev() {
        g[k] = g[k].min(g[k + 1]);
    }
    let mut lower_sum = Vec::with_capacity(RHO_STEPS + 1);
    let mut values = Vec::with_capacity(RHO_STEPS + 1);
    lower_sum.push(0.0);
    values.push(0.0);
    let mut integral = 0.0;
    for k in 1..=RHO_STEPS {
        integral += g[k - 1] * step;
        lower_sum.push(integral);
        values.push(integral / (k as f64 * step));
    }
    Ok(Rho {
        step,
        floor: g,
        lower_sum,
        values,
    })
}

/// `C(s) = 4π² + 4π²s + 2s`.
pub fn envelope_constant(s: f64) -> Result<f64> {
    check_finite(s)?;
    if !(0.0..=PI).contains(&s) {
        return Err(Error::OutOfRange {
            what: "s",
            value: s,
            expected: "[0, π]",
        });
    }
    Ok(4.0 * PI * PI + 4.0 * PI * PI * s + 2.0 * s)
}

fn check_x_n(x: f64, n: usize) -> Result<()> {
    check_finite(x)?;
    if x.is_nan() || x <= 0.0 {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            expected: "x > 0",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    Ok(())
}

/// `C(s)·√(x/n)`.
pub fn concentration_envelope(s: f64, x: f64, n: usize) -> Result<f64> {
    check_x_n(x, n)?;
    Ok(envelope_constant(s)? * (x / n as f64).sqrt())
}

/// `√B·(x/n)^{1/4}` with `B = C·max{π²/γ, 2/α}`, `γ = ½(α(π − φ)² − φ²)`
/// and `C` the cap [`ENVELOPE_CAP`]. Requires `γ > 0`.
pub fn rate_envelope(alpha: f64, phi: f64, x: f64, n: usize) -> Result<f64> {
    check_finite(alpha)?;
    check_finite(phi)?;
    check_x_n(x, n)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            expected: "(0, 1]",
        });
    }
    let gamma = gap_floor(alpha, phi);
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Criterion(format!(
            "gamma(alpha, phi) = {gamma} must be positive (phi below phi_alpha)"
        )));
    }
    let b = ENVELOPE_CAP * (PI * PI / gamma).max(2.0 / alpha);
    Ok(b.sqrt() * (x / n as f64).powf(0.25))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub x_values: Vec<f64>,
    /// `(α, φ)` of a criterion witness; enables the rate-envelope check.
    pub criterion: Option<(f64, f64)>,
    pub tie_tol: f64,
    /// Grid used to locate `p*` when `μ` is not atomic.
    pub resolution: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_values: vec![50, 200, 800],
            trials: 400,
            seed: 0,
            x_values: DEFAULT_X.to_vec(),
            criterion: None,
            tie_tol: DEFAULT_TIE_TOL,
            resolution: DEFAULT_GRID,
        }
    }
}

/// Statistics of `d(p*_n, p*)` for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSizeStats {
    pub n: usize,
    /// At [`QUANTILE_LEVELS`].
    pub quantiles: Vec<f64>,
    pub mean_distance: f64,
    /// Fraction of trials with `ρ(d) ≥ C(s)√(x/n)`, `s` the arclength
    /// diameter of the support; one entry per `x`.
    pub violation_rate: Vec<f64>,
    /// Same with `s` the chordal diameter.
    pub violation_rate_chord: Vec<f64>,
    /// Fraction of trials with `d ≥ √B (x/n)^{1/4}`, when criterion
    /// parameters were given.
    pub rate_violation_rate: Option<Vec<f64>>,
    /// Trials whose empirical measure had several tied means.
    pub non_unique: usize,
    /// Trials with `F(p*_n) − F(p*) < ρ(d)`.
    pub rho_violations: usize,
    /// Trials breaking `F(p*_n) − F(p*) ≤ 2 sup |F_n − F|`.
    pub sandwich_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub x_values: Vec<f64>,
    /// `2e^{−x}` for each `x`.
    pub probability_bounds: Vec<f64>,
    pub mean: Angle,
    pub min_value: f64,
    pub support_diameter: f64,
    pub support_chord_diameter: f64,
    pub quantile_levels: Vec<f64>,
    pub stats: Vec<SampleSizeStats>,
}

impl ConcentrationReport {
    /// One CSV row per sample size.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Output(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["n".into(), "trials".into()];
        header.extend(self.quantile_levels.iter().map(|q| format!("q{:02}", (q * 100.0).round() as u32)));
        header.push("mean".into());
        for x in &self.x_values {
            header.push(format!("violation_rate_x{x}"));
        }
        for x in &self.x_values {
            header.push(format!("violation_rate_chord_x{x}"));
        }
        let with_rate = self.stats.iter().any(|s| s.rate_violation_rate.is_some());
        if with_rate {
            for x in &self.x_values {
                header.push(format!("rate_violation_rate_x{x}"));
            }
        }
        header.extend(["non_unique", "rho_violations", "sandwich_violations"].map(String::from));
        w.write_record(&header).map_err(io)?;
        for s in &self.stats {
            let mut row: Vec<String> = vec![s.n.to_string(), self.trials.to_string()];
            row.extend(s.quantiles.iter().map(|q| q.to_string()));
            row.push(s.mean_distance.to_string());
            row.extend(s.violation_rate.iter().map(|v| v.to_string()));
            row.extend(s.violation_rate_chord.iter().map(|v| v.to_string()));
            if with_rate {
                match &s.rate_violation_rate {
                    Some(r) => row.extend(r.iter().map(|v| v.to_string())),
                    None => row.extend(self.x_values.iter().map(|_| String::new())),
                }
            }
            row.push(s.non_unique.to_string());
            row.push(s.rho_violations.to_string());
            row.push(s.sandwich_violations.to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Output(e.to_string()))
    }
}

/// Result of one simulated trial.
#[derive(Debug, Clone, Copy)]
struct Trial {
    distance: f64,
    gap: f64,
    unique: bool,
    sandwich_ok: bool,
}

fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    match sorted.get(k + 1) {
        Some(&next) => sorted[k] + frac * (next - sorted[k]),
        None => sorted[k],
    }
}

/// Samples `trials` empirical means for each `n` and checks them against the
/// concentration bounds. Deterministic given `config.seed`.
pub fn simulate(mu: &CircularMeasure, config: &SimulationConfig) -> Result<ConcentrationReport> {
    if config.trials == 0 {
        return Err(Error::OutOfRange {
            what: "trials",
            value: 0.0,
            expected: "at least 1",
        });
    }
    if config.n_values.is_empty() || config.n_values.contains(&0) {
        return Err(Error::OutOfRange {
            what: "n",
            value: 0.0,
            expected: "a nonempty list of sizes >= 1",
        });
    }
    for &x in &config.x_values {
        check_x_n(x, 1)?;
    }
    let (mean, _) = find_mean_and_certify(mu, config.tie_tol, config.resolution)?;
    if !mean.unique {
        return Err(Error::NotUnique {
            argmins: mean.argmins.len(),
        });
    }
    let p_star = mean.best().point;
    let nu = mu.pushforward(&p_star);
    let rho = rho_from_gap(|t| gap_in_chart(&nu, Angle::wrapped(t).value()), 0.0)?;
    let s = mu.support_diameter()?;
    let chord = 2.0 * (s / 2.0).sin();
    let c_arc = envelope_constant(s)?;
    let c_chord = envelope_constant(chord)?;

    let grid: Vec<f64> = (0..SANDWICH_GRID)
        .map(|k| -PI + 2.0 * PI * k as f64 / SANDWICH_GRID as f64)
        .collect();
    let f_grid: Vec<f64> = grid.iter().map(|&t| value_in_chart(&nu, t)).collect();
    let f_star = value_in_chart(&nu, 0.0);

    let mut stats = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let trials: Vec<Trial> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<Trial> {
                let mut rng = trial_rng(config.seed, n, t);
                let angles = mu.sample_with(n, &mut rng)?;
                let emp = CircularMeasure::from_atoms(angles.iter().map(|a| (a.value(), 1.0)))?;
                let r = frechet_mean(&emp, config.tie_tol)?;
                let p_n = r.best().point;
                let distance = arclength_distance(&p_n, &p_star);
                let theta_n = log_map(&p_star, &p_n).value();
                let gap = gap_in_chart(&nu, theta_n);

                let emp_nu = emp.pushforward(&p_star);
                let mut sup: f64 = 0.0;
                for (&t, &f) in grid.iter().zip(&f_grid) {
                    sup = sup.max((value_in_chart(&emp_nu, t) - f).abs());
                }
                for (t, _) in emp_nu.atoms() {
                    let c = cut_locus_f64(t);
                    sup = sup.max((value_in_chart(&emp_nu, c) - value_in_chart(&nu, c)).abs());
                }
                sup = sup
                    .max((value_in_chart(&emp_nu, 0.0) - f_star).abs())
                    .max((value_in_chart(&emp_nu, theta_n) - value_in_chart(&nu, theta_n)).abs());
                Ok(Trial {
                    distance,
                    gap,
                    unique: r.unique,
                    sandwich_ok: gap.abs() <= 2.0 * sup + SANDWICH_TOL,
                })
            })
            .collect::<Result<_>>()?;

        let rho_at = |d: f64| rho.eval(d);
        let rate = |hit: &dyn Fn(&Trial) -> bool| trials.iter().filter(|t| hit(t)).count() as f64 / trials.len() as f64;
        let violation_rate = config
            .x_values
            .iter()
            .map(|&x| {
                let e = c_arc * (x / n as f64).sqrt();
                rate(&|t| rho_at(t.distance) >= e)
            })
            .collect();
        let violation_rate_chord = config
            .x_values
            .iter()
            .map(|&x| {
                let e = c_chord * (x / n as f64).sqrt();
                rate(&|t| rho_at(t.distance) >= e)
            })
            .collect();
        let rate_violation_rate = match config.criterion {
            Some((alpha, phi)) => Some(
                config
                    .x_values
                    .iter()
                    .map(|&x| {
                        let e = rate_envelope(alpha, phi, x, n)?;
                        Ok(rate(&|t| t.distance >= e))
                    })
                    .collect::<Result<Vec<f64>>>()?,
            ),
            None => None,
        };

        let mut distances: Vec<f64> = trials.iter().map(|t| t.distance).collect();
        distances.sort_by(f64::total_cmp);
        stats.push(SampleSizeStats {
            n,
            quantiles: QUANTILE_LEVELS.iter().map(|&q| quantile(&distances, q)).collect(),
            mean_distance: distances.iter().sum::<f64>() / distances.len() as f64,
            violation_rate,
            violation_rate_chord,
            rate_violation_rate,
            non_unique: trials.iter().filter(|t| !t.unique).count(),
            rho_violations: trials.iter().filter(|t| t.gap < rho_at(t.distance)).count(),
            sandwich_violations: trials.iter().filter(|t| !t.sandwich_ok).count(),
        });
    }

    Ok(ConcentrationReport {
        n_values: config.n_values.clone(),
        trials: config.trials,
        seed: config.seed,
        x_values: config.x_values.clone(),
        probability_bounds: config.x_values.iter().map(|x| 2.0 * (-x).exp()).collect(),
        mean: p_star.angle(),
        min_value: mean.min_value,
        support_diameter: s,
        support_chord_diameter: chord,
        quantile_levels: QUANTILE_LEVELS.to_vec(),
        stats,
    })
}
