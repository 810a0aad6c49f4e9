//! File formats: CSV series, JSON documents, ensemble checkpoints, surface
//! descriptions and `Φ` grid dumps.
//!
//! Numbers are written in the shortest form that reads back to the same
//! `f64`, so every file round-trips exactly and reruns compare byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vlasov_core::exec::Executor;
use vlasov_core::geometry::{MoebiusElement, SurfaceDescription, SurfaceModel};
use vlasov_core::kinetics::{Ensemble, Particle};
use vlasov_core::observables::TimeSeries;
use vlasov_core::potential::{domain_grid, PotentialField};

use crate::HarnessError;

/// Shortest round-tripping decimal; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes a numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    w.write_record(header)
        .map_err(|e| HarnessError::csv(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads a numeric table, returning the header and the columns.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| HarnessError::csv(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            let v = field.trim().parse::<f64>().map_err(|_| {
                HarnessError::Format(format!(
                    "{}: row {}: `{field}` is not a number",
                    path.display(),
                    line + 2
                ))
            })?;
            c.push(v);
        }
    }
    Ok((header, cols))
}

/// A time series as `t,<label>` columns.
pub fn write_series(path: &Path, series: &TimeSeries) -> Result<(), HarnessError> {
    let label = if series.label.is_empty() {
        "value"
    } else {
        series.label.as_str()
    };
    let rows: Vec<Vec<f64>> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(t, v)| vec![*t, *v])
        .collect();
    write_table(path, &["t", label], &rows)
}

/// Reads column `column` (by name, or the second column) against the first.
pub fn read_series(path: &Path, column: Option<&str>) -> Result<TimeSeries, HarnessError> {
    let (header, cols) = read_table(path)?;
    if cols.len() < 2 {
        return Err(HarnessError::Format(format!(
            "{}: need a time column and a value column",
            path.display()
        )));
    }
    let idx = match column {
        Some(name) => header.iter().position(|h| h == name).ok_or_else(|| {
            HarnessError::Format(format!("{}: no column `{name}`", path.display()))
        })?,
        None => 1,
    };
    let series = TimeSeries::new(cols[0].clone(), cols[idx].clone())
        .map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))?;
    Ok(series.with_label(&header[idx]))
}

/// Pretty JSON with a trailing newline. Structs serialize in declaration
/// order and maps are ordered, so the key order is stable.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| HarnessError::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))
}

pub fn write_surface(path: &Path, surface: &SurfaceModel) -> Result<(), HarnessError> {
    write_json(path, &surface.description())
}

pub fn read_surface(path: &Path) -> Result<SurfaceModel, HarnessError> {
    let desc: SurfaceDescription = read_json(path)?;
    SurfaceModel::from_description(&desc)
        .map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))
}

/// First line of a checkpoint file, after the `#`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub time: f64,
    pub seed: u64,
    pub config_hash: String,
    pub particles: usize,
}

const CHECKPOINT_COLUMNS: [&str; 6] = ["a", "b", "c", "d", "r", "w"];

/// One `#`-prefixed JSON header line, then a CSV table with one particle per
/// row: the four frame entries, the speed and the weight.
pub fn write_checkpoint(path: &Path, e: &Ensemble, config_hash: &str) -> Result<(), HarnessError> {
    let header = CheckpointHeader {
        time: e.time(),
        seed: e.seed(),
        config_hash: config_hash.into(),
        particles: e.len(),
    };
    let file = File::create(path).map_err(|err| HarnessError::io(path, err))?;
    let mut out = BufWriter::new(file);
    let json =
        serde_json::to_string(&header).map_err(|err| HarnessError::Format(err.to_string()))?;
    writeln!(out, "# {json}").map_err(|err| HarnessError::io(path, err))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHECKPOINT_COLUMNS)
        .map_err(|err| HarnessError::csv(path, err))?;
    for p in e.particles() {
        let g = p.frame();
        let row = [g.a, g.b, g.c, g.d, p.r(), p.w()];
        w.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(|err| HarnessError::csv(path, err))?;
    }
    w.flush().map_err(|err| HarnessError::io(path, err))
}

/// Restores an ensemble bit for bit; frames are taken as stored.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Ensemble), HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| HarnessError::io(path, e))?;
    let json = first.strip_prefix('#').ok_or_else(|| {
        HarnessError::Format(format!("{}: missing checkpoint header", path.display()))
    })?;
    let header: CheckpointHeader = serde_json::from_str(json.trim())
        .map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(reader);
    let mut particles = Vec::with_capacity(header.particles);
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                HarnessError::Format(format!("{}: particle {i}: bad number", path.display()))
            })?;
        if v.len() != CHECKPOINT_COLUMNS.len() {
            return Err(HarnessError::Format(format!(
                "{}: particle {i}: expected 6 columns",
                path.display()
            )));
        }
        let frame = MoebiusElement {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
        };
        let p = Particle::new(frame, v[4], v[5])
            .map_err(|e| HarnessError::Format(format!("{}: particle {i}: {e}", path.display())))?;
        particles.push(p);
    }
    if particles.len() != header.particles {
        return Err(HarnessError::Format(format!(
            "{}: header announces {} particles, found {}",
            path.display(),
            header.particles,
            particles.len()
        )));
    }
    let e = Ensemble::from_parts(particles, header.time, header.seed);
    Ok((header, e))
}

/// `x,y,phi` over the domain grid of the given resolution.
pub fn write_phi_grid<E: Executor>(
    path: &Path,
    field: &PotentialField,
    surface: &SurfaceModel,
    resolution: usize,
    exec: &E,
) -> Result<(), HarnessError> {
    let grid = domain_grid(surface, resolution).map_err(|e| HarnessError::Config(e.to_string()))?;
    let values = exec.map_indexed(grid.len(), |i| field.evaluate_phi(grid[i]));
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .zip(values)
        .map(|(p, v)| vec![p.re, p.im, v])
        .collect();
    write_table(path, &["x", "y", "phi"], &rows)
}
