//! Reading measures from text.
//!
//! Three sources are understood:
//!
//! * an angle list: one real per line, blank lines and `#` comments ignored;
//! * a weighted CSV with header `angle,weight`;
//! * a density spec string:
//!   - `uniform`
//!   - `vonmises:kappa=<K>,mu=<M>`
//!   - `box:center=<C>,width=<W>` (constant on an arc of length `W`)
//!   - `mixture:<spec>[@<w>];<spec>[@<w>];...` (weights default to 1)

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measures::{CircularMeasure, GridDensity};

/// Angle unit of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Radians,
    Degrees,
}

impl Unit {
    pub fn to_radians(self, v: f64) -> f64 {
        match self {
            Unit::Radians => v,
            Unit::Degrees => v.to_radians(),
        }
    }
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not a number", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("`{}` is not finite", field.trim()),
        });
    }
    Ok(v)
}

/// Angles in radians from a one-per-line listing. Line numbers in errors
/// start at 1.
pub fn parse_angle_list(text: &str, unit: Unit) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        out.push(unit.to_radians(parse_real(content, i + 1)?));
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no angles found".into(),
        });
    }
    Ok(out)
}

/// `(angle in radians, weight)` pairs from a CSV with header `angle,weight`.
/// Weights are normalized later by the measure constructor.
pub fn parse_weighted_csv(text: &str, unit: Unit) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ia), Some(iw)) = (col("angle"), col("weight")) else {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `angle,weight`".into(),
        });
    };
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: "missing field".into(),
            })
        };
        let angle = unit.to_radians(parse_real(field(ia)?, line)?);
        let weight = parse_real(field(iw)?, line)?;
        if weight <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("weight {weight} must be positive"),
            });
        }
        out.push((angle, weight));
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no rows found".into(),
        });
    }
    Ok(out)
}

/// Measure from the contents of an angle list or weighted CSV, told apart
/// by the `angle,weight` header.
pub fn parse_measure(text: &str, unit: Unit) -> Result<CircularMeasure> {
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.to_ascii_lowercase().starts_with("angle") {
        CircularMeasure::from_atoms(parse_weighted_csv(text, unit)?)
    } else {
        CircularMeasure::empirical_angles(&parse_angle_list(text, unit)?)
    }
}

/// Reads a measure from a file; see [`parse_measure`].
pub fn load_measure(path: &Path, unit: Unit) -> Result<CircularMeasure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_measure(&text, unit)
}

/// Fraction of each cell covered by the arc of length `width` centred at
/// `center`. Slivers below `1e-12` of a cell are dropped.
fn box_cells(center: f64, width: f64, cells: usize) -> Vec<f64> {
    let h = 2.0 * PI / cells as f64;
    let (a, b) = (center - width / 2.0, center + width / 2.0);
    (0..cells)
        .map(|k| {
            let lo = -PI + k as f64 * h;
            let hi = lo + h;
            let cover: f64 = [-2.0 * PI, 0.0, 2.0 * PI]
                .iter()
                .map(|s| (hi.min(b + s) - lo.max(a + s)).max(0.0))
                .sum();
            let frac = (cover / h).min(1.0);
            if frac < 1e-12 {
                0.0
            } else {
                frac
            }
        })
        .collect()
}

fn params(body: &str, spec: &str, names: &[&str]) -> Result<Vec<f64>> {
    let mut values = vec![None; names.len()];
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::UnknownSpec(spec.into()))?;
        let i = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| Error::UnknownSpec(spec.into()))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::UnknownSpec(spec.into()))?;
        if !v.is_finite() {
            return Err(Error::UnknownSpec(spec.into()));
        }
        values[i] = Some(v);
    }
    values
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::UnknownSpec(spec.into())))
        .collect()
}

/// Density measure on a grid of `cells` cells from a spec string. Angle
/// parameters (`mu`, `center`, `width`) are read in `unit`.
pub fn parse_density_spec(spec: &str, cells: usize, unit: Unit) -> Result<CircularMeasure> {
    let spec = spec.trim();
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "uniform" if body.trim().is_empty() => CircularMeasure::uniform(cells),
        "vonmises" => {
            let v = params(body, spec, &["kappa", "mu"])?;
            let d = GridDensity::von_mises(v[0], unit.to_radians(v[1]), cells)?;
            Ok(CircularMeasure::from_density(d))
        }
        "box" => {
            let v = params(body, spec, &["center", "width"])?;
            let (center, width) = (unit.to_radians(v[0]), unit.to_radians(v[1]));
            if !(width > 0.0 && width <= 2.0 * PI) {
                return Err(Error::UnknownSpec(spec.into()));
            }
            let d = GridDensity::from_cells(box_cells(center, width, cells.max(1)))?;
            Ok(CircularMeasure::from_density(d))
        }
        "mixture" => {
            let mut parts = Vec::new();
            for comp in body.split(';').filter(|c| !c.trim().is_empty()) {
                let (inner, w) = match comp.rsplit_once('@') {
                    Some((s, w)) => (s, w.trim().parse::<f64>().map_err(|_| Error::UnknownSpec(spec.into()))?),
                    None => (comp, 1.0),
                };
                if inner.trim_start().starts_with("mixture") {
                    return Err(Error::UnknownSpec(spec.into()));
                }
                parts.push((parse_density_spec(inner, cells, unit)?, w));
            }
            if parts.is_empty() {
                return Err(Error::UnknownSpec(spec.into()));
            }
            CircularMeasure::combine(&parts)
        }
        _ => Err(Error::UnknownSpec(spec.into())),
    }
}
