//! Subcommand implementations. Each returns the full output text so it can
//! be written in one go.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use circfrechet::criterion::{gap_floor, WITNESS_CENTERS};
use circfrechet::frechet::scan;
use circfrechet::input::{load_measure, parse_density_spec};
use circfrechet::solver::solve;
use circfrechet::uniqueness::find_mean_and_certify;
use circfrechet::{
    alpha_delta, arclength_distance, certify, guarantee_existence, mean_bound, phi_alpha, satisfies_p, simulate, wrap,
    CircularMeasure, CirclePoint, CriterionParams, Error, SimulationConfig,
};

use crate::{Cli, Command, GlobalArgs};

/// 2 for a disagreement between the solver and the certificate, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::VerdictMismatch { .. }) => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

fn format(g: &GlobalArgs, default: Format) -> Format {
    if g.json {
        Format::Json
    } else if g.csv {
        Format::Csv
    } else {
        default
    }
}

fn json_only(g: &GlobalArgs, name: &str) -> Result<()> {
    if g.csv {
        bail!("`{name}` has no CSV output");
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn point(g: &GlobalArgs, angle: f64) -> Result<CirclePoint> {
    Ok(CirclePoint::from_angle(wrap(g.unit().to_radians(angle))?))
}

fn load(g: &GlobalArgs) -> Result<CircularMeasure> {
    if g.grid == 0 {
        bail!("--grid must be positive");
    }
    if !(g.tie_tol > 0.0 && g.tie_tol.is_finite()) {
        bail!("--tie-tol must be positive");
    }
    match (&g.input, &g.density) {
        (Some(path), None) => Ok(load_measure(path, g.unit())?),
        (None, Some(spec)) => Ok(parse_density_spec(spec, g.grid, g.unit())?),
        _ => bail!("give exactly one of --input FILE or --density SPEC"),
    }
}

pub fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    let mu = load(g)?;
    match &cli.command {
        Command::Mean => mean(g, &mu),
        Command::Scan { center } => scan_cmd(g, &mu, *center),
        Command::Unique { at } => unique(g, &mu, *at),
        Command::Criterion {
            delta,
            center,
            alpha,
            phi,
        } => criterion(g, &mu, *delta, *center, *alpha, *phi),
        Command::Simulate { n, trials, alpha, phi } => simulate_cmd(g, &mu, n, *trials, *alpha, *phi),
    }
}

fn mean(g: &GlobalArgs, mu: &CircularMeasure) -> Result<String> {
    let result = solve(mu, g.tie_tol, g.grid)?;
    match format(g, Format::Json) {
        Format::Json => to_json(&result),
        Format::Csv => {
            let mut out = String::from("angle,F\n");
            for c in &result.argmins {
                writeln!(out, "{},{}", c.angle.value(), c.value)?;
            }
            Ok(out)
        }
    }
}

fn scan_cmd(g: &GlobalArgs, mu: &CircularMeasure, center: Option<f64>) -> Result<String> {
    let base = match center {
        Some(c) => point(g, c)?,
        None => CirclePoint::ORIGIN,
    };
    let rows = scan(&mu.pushforward(&base), g.grid);
    match format(g, Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("theta,F,F_left_derivative,F_right_derivative\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.theta.value(),
                    r.value,
                    r.left_derivative,
                    r.right_derivative
                )?;
            }
            Ok(out)
        }
    }
}

fn unique(g: &GlobalArgs, mu: &CircularMeasure, at: Option<f64>) -> Result<String> {
    json_only(g, "unique")?;
    let report = match at {
        Some(a) => {
            let cert = certify(mu, &point(g, a)?)?;
            let mut v = serde_json::to_value(cert)?;
            v["critical_angle"] = json!(cert.critical_point.angle().value());
            v
        }
        None => {
            let (mean, cert) = find_mean_and_certify(mu, g.tie_tol, g.grid)?;
            let mut v = serde_json::to_value(cert)?;
            v["critical_angle"] = json!(cert.critical_point.angle().value());
            v["argmins"] = json!(mean.argmins.iter().map(|c| c.angle.value()).collect::<Vec<_>>());
            v["runner_up_gap"] = json!(mean.runner_up_gap);
            v
        }
    };
    to_json(&report)
}

fn criterion(
    g: &GlobalArgs,
    mu: &CircularMeasure,
    delta: Option<f64>,
    center: Option<f64>,
    alpha: Option<f64>,
    phi: Option<f64>,
) -> Result<String> {
    json_only(g, "criterion")?;
    let report: Value = match (delta, center, alpha, phi) {
        (Some(delta), None, None, None) => {
            let a = alpha_delta(delta)?;
            let pa = phi_alpha(a)?;
            let witness = guarantee_existence(mu, delta)?;
            let mut v = json!({
                "mode": "search",
                "delta": delta,
                "alpha_delta": a,
                "phi_alpha": pa,
                "delta_phi_alpha": delta * pa,
                "centers_scanned": WITNESS_CENTERS,
                "satisfied": witness.is_some(),
                "witness": witness.map(|w| witness_json(&w)),
            });
            if let Some(w) = witness {
                v["mean"] = mean_json(g, mu, &w)?;
            }
            v
        }
        (None, Some(c), Some(a), Some(p)) => {
            let params = CriterionParams::new(point(g, c)?, a, g.unit().to_radians(p))?;
            let satisfied = satisfies_p(mu, &params)?;
            let mut v = json!({
                "mode": "check",
                "params": witness_json(&params),
                "phi_alpha": phi_alpha(params.alpha)?,
                "sufficient": params.is_sufficient(),
                "satisfied": satisfied,
                "mean_bound": mean_bound(params.alpha, params.phi)?,
                "gap_floor": gap_floor(params.alpha, params.phi),
            });
            if satisfied {
                v["mean"] = mean_json(g, mu, &params)?;
            }
            v
        }
        _ => bail!("give either --delta, or all of --center, --alpha and --phi"),
    };
    to_json(&report)
}

fn witness_json(p: &CriterionParams) -> Value {
    json!({
        "center": p.p.angle().value(),
        "alpha": p.alpha,
        "phi": p.phi,
    })
}

/// Mean of `mu` with its distance from the criterion center.
fn mean_json(g: &GlobalArgs, mu: &CircularMeasure, params: &CriterionParams) -> Result<Value> {
    let (mean, cert) = find_mean_and_certify(mu, g.tie_tol, g.grid)?;
    let best = mean.best();
    Ok(json!({
        "angle": best.angle.value(),
        "distance_from_center": arclength_distance(&best.point, &params.p),
        "unique": mean.unique,
        "certificate_holds": cert.holds,
        "margin": cert.margin,
    }))
}

fn simulate_cmd(
    g: &GlobalArgs,
    mu: &CircularMeasure,
    n: &[usize],
    trials: usize,
    alpha: Option<f64>,
    phi: Option<f64>,
) -> Result<String> {
    let config = SimulationConfig {
        n_values: n.to_vec(),
        trials,
        seed: g.seed,
        x_values: g.x.clone(),
        criterion: alpha.zip(phi.map(|p| g.unit().to_radians(p))),
        tie_tol: g.tie_tol,
        resolution: g.grid,
    };
    let report = simulate(mu, &config).context("simulation failed")?;
    match format(g, Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&report)?;
            v["distance"] = json!("arclength");
            to_json(&v)
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf)?)
        }
    }
}
