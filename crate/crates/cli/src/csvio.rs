//! CSV files written and read by the harness. Numbers carry 17 significant
//! digits so every value parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use llmoea::algorithms::TrajectoryPoint;

use crate::error::usage;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Objective rows under `f1..fm`, followed by `x1..xd` when decision
/// vectors are given.
pub fn write_points_to<W: Write>(
    out: W,
    objectives: &[Vec<f64>],
    decisions: Option<&[Vec<f64>]>,
) -> Result<()> {
    let m = objectives.first().map_or(0, Vec::len);
    let d = decisions.and_then(|x| x.first()).map_or(0, Vec::len);
    let mut w = writer(out);
    let header: Vec<String> = (1..=m)
        .map(|j| format!("f{j}"))
        .chain((1..=d).map(|k| format!("x{k}")))
        .collect();
    if !header.is_empty() {
        w.write_record(&header)?;
    }
    for (i, f) in objectives.iter().enumerate() {
        let mut row: Vec<String> = f.iter().map(|v| fmt_num(*v)).collect();
        if let Some(xs) = decisions {
            row.extend(xs[i].iter().map(|v| fmt_num(*v)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points(
    path: &Path,
    objectives: &[Vec<f64>],
    decisions: Option<&[Vec<f64>]>,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_points_to(std::io::BufWriter::new(file), objectives, decisions)
}

/// Reads the `f*` columns of a points file. A file without such a header
/// is read as bare objective rows. Empty input is a usage error.
pub fn read_points_from<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let Some(first) = records.next() else {
        return Err(usage("no rows in objective file"));
    };
    let first = first?;
    let is_objective = |name: &str| {
        name.strip_prefix('f')
            .is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()))
    };
    let header_cols: Vec<usize> = first
        .iter()
        .enumerate()
        .filter(|(_, name)| is_objective(name))
        .map(|(i, _)| i)
        .collect();
    let (cols, mut rows) = if header_cols.is_empty() {
        let cols: Vec<usize> = (0..first.len()).collect();
        (cols.clone(), vec![parse_row(&first, &cols, 1)?])
    } else {
        (header_cols, Vec::new())
    };
    for (i, rec) in records.enumerate() {
        rows.push(parse_row(&rec?, &cols, i + 2)?);
    }
    if rows.is_empty() {
        return Err(usage("no rows in objective file"));
    }
    Ok(rows)
}

fn parse_row(rec: &csv::StringRecord, cols: &[usize], line: usize) -> Result<Vec<f64>> {
    cols.iter()
        .map(|&c| {
            let field = rec
                .get(c)
                .with_context(|| format!("line {line}: missing column {}", c + 1))?;
            field
                .parse::<f64>()
                .with_context(|| format!("line {line}: `{field}` is not a number"))
        })
        .collect()
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_points_from(file).with_context(|| format!("reading {}", path.display()))
}

pub fn write_trajectory_to<W: Write>(out: W, points: &[TrajectoryPoint]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["evals", "hv", "igd"])?;
    for p in points {
        w.write_record([p.evaluations.to_string(), fmt_num(p.hv), fmt_num(p.igd)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, points: &[TrajectoryPoint]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trajectory_to(std::io::BufWriter::new(file), points)
}

pub fn read_trajectory_from<R: Read>(input: R) -> Result<Vec<TrajectoryPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["evals", "hv", "igd"] {
        bail!("expected header evals,hv,igd, found {:?}", headers);
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(TrajectoryPoint {
            evaluations: rec[0]
                .parse()
                .with_context(|| format!("bad evals `{}`", &rec[0]))?,
            hv: rec[1]
                .parse()
                .with_context(|| format!("bad hv `{}`", &rec[1]))?,
            igd: rec[2]
                .parse()
                .with_context(|| format!("bad igd `{}`", &rec[2]))?,
        });
    }
    Ok(out)
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryPoint>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_trajectory_from(file).with_context(|| format!("reading {}", path.display()))
}

/// `key=value` lines, in key order.
pub fn write_summary(path: &Path, fields: &BTreeMap<String, String>) -> Result<()> {
    let mut text = String::new();
    for (k, v) in fields {
        text.push_str(&format!("{k}={v}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_summary(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    crate::config::parse_key_values(&text)
        .map(|kv| kv.into_iter().collect())
        .with_context(|| format!("parsing {}", path.display()))
}
