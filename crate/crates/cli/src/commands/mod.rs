//! Subcommand implementations and the file-format helpers they share.

pub mod coeffs;
pub mod converge;
pub mod energy;
pub mod solve;
pub mod symbol_gap;

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use latfkg::{format_f64, Forcing, GridFunction, LatticeSpec, MassField, SampledForcing};

use crate::config::MassConfig;
use crate::CliError;

pub fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Write a CSV under the output directory through a buffered writer.
pub fn write_csv(
    out_dir: &Path,
    name: &str,
    write: impl FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(out_dir.join(name))?);
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_row(w: &mut impl Write, fields: &[String]) -> Result<(), CliError> {
    let mut line = fields.join(",");
    line.push('\n');
    w.write_all(line.as_bytes())?;
    Ok(())
}

pub fn load_grid(spec: LatticeSpec, path: &PathBuf) -> Result<GridFunction, CliError> {
    let file =
        fs::File::open(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    GridFunction::read_csv(spec, BufReader::new(file))
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn load_mass(spec: LatticeSpec, cfg: &MassConfig) -> Result<MassField, CliError> {
    match cfg {
        MassConfig::Const(c) => Ok(MassField::constant(spec, *c)?),
        MassConfig::File(path) => {
            let grid = load_grid(spec, path)?;
            let mut values = Vec::with_capacity(grid.values().len());
            for (i, v) in grid.values().iter().enumerate() {
                if v.im != 0.0 {
                    return Err(CliError::invalid(format!(
                        "{}: mass must be real, entry {i} has im = {}",
                        path.display(),
                        v.im
                    )));
                }
                values.push(v.re);
            }
            Ok(MassField::from_values(spec, values)?)
        }
    }
}

/// Forcing file: header "t,index_0,...,index_{n-1},re,im", rows grouped by
/// strictly increasing t, one full grid per time block, uniform time spacing.
pub fn load_forcing(spec: LatticeSpec, path: &PathBuf) -> Result<Forcing, CliError> {
    let file =
        fs::File::open(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let dim = spec.dim();
    let bad = |line: usize, msg: String| {
        CliError::invalid(format!("{} line {line}: {msg}", path.display()))
    };

    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(CliError::invalid(format!("{}: empty file", path.display()))),
    };
    let expected: String = std::iter::once("t".to_string())
        .chain((0..dim).map(|a| format!("index_{a}")))
        .chain(["re".to_string(), "im".to_string()])
        .collect::<Vec<_>>()
        .join(",");
    if header.trim() != expected {
        return Err(bad(
            1,
            format!("expected header '{expected}', got '{header}'"),
        ));
    }

    let mut times: Vec<f64> = Vec::new();
    let mut blocks: Vec<Vec<Complex64>> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    let mut signed = vec![0i64; dim];
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != dim + 3 {
            return Err(bad(lineno + 1, format!("expected {} fields", dim + 3)));
        }
        let t: f64 = parts[0]
            .parse()
            .map_err(|e| bad(lineno + 1, format!("bad t: {e}")))?;
        if times.last() != Some(&t) {
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(bad(
                        lineno + 1,
                        format!("times must increase, {t} after {prev}"),
                    ));
                }
            }
            times.push(t);
            blocks.push(vec![Complex64::ZERO; spec.site_count()]);
            filled.push(false);
        }
        for (axis, p) in parts[1..=dim].iter().enumerate() {
            signed[axis] = p
                .parse()
                .map_err(|e| bad(lineno + 1, format!("bad index: {e}")))?;
        }
        let re: f64 = parts[dim + 1]
            .parse()
            .map_err(|e| bad(lineno + 1, format!("bad re: {e}")))?;
        let im: f64 = parts[dim + 2]
            .parse()
            .map_err(|e| bad(lineno + 1, format!("bad im: {e}")))?;
        let flat = spec.flat_index(&signed);
        blocks.last_mut().unwrap()[flat] = Complex64::new(re, im);
        *filled.last_mut().unwrap() = true;
    }
    if times.len() < 2 {
        return Err(CliError::invalid(format!(
            "{}: needs at least two time blocks",
            path.display()
        )));
    }
    let span = times.last().unwrap() - times[0];
    let step0 = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - step0).abs() > 1e-9 * span.max(1.0) {
            return Err(CliError::invalid(format!(
                "{}: time grid must be uniform",
                path.display()
            )));
        }
    }
    let samples: Result<Vec<GridFunction>, latfkg::Error> = blocks
        .into_iter()
        .map(|b| GridFunction::from_values(spec, b))
        .collect();
    let samples = samples.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(Forcing::Sampled(
        SampledForcing::new(samples, times[0], *times.last().unwrap())
            .map_err(|e| CliError::invalid(e.to_string()))?,
    ))
}

pub fn grid_csv_name(prefix: &str, index: usize) -> String {
    format!("{prefix}_{index:04}.csv")
}

pub fn fmt(x: f64) -> String {
    format_f64(x)
}
