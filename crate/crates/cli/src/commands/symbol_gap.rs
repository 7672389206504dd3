//! `latfkg symbol-gap`: continuum/lattice symbol gap over the dual grid.

use serde_json::{json, Map, Value};

use latfkg::{symbol_field, symbol_gap, FractionalOrder, LatticeSpec};

use super::{ensure_out_dir, fmt, write_csv, write_row};
use crate::config::{load_json, validate_symbol_gap};
use crate::manifest::ManifestBuilder;
use crate::{CliError, SymbolGapArgs};

pub fn run(args: SymbolGapArgs) -> Result<(), CliError> {
    let mut obj: Map<String, Value> = match &args.run.config {
        Some(path) => load_json(path)?,
        None => Map::new(),
    };
    if let Some(a) = args.alpha {
        obj.insert("alpha".into(), json!(a));
    }
    if let Some(h) = args.hbar {
        obj.insert("hbar".into(), json!(h));
    }
    if let Some(n) = args.n {
        obj.insert("n".into(), json!(n));
    }
    if let Some(p) = args.points {
        obj.insert("N".into(), json!(p));
    }
    if let Some(s) = args.run.seed {
        obj.insert("seed".into(), json!(s));
    }
    let cfg = validate_symbol_gap(&obj)?;

    ensure_out_dir(&args.run.out_dir)?;
    let mut manifest = ManifestBuilder::new("symbol-gap", cfg.echo(), cfg.seed);

    let order = FractionalOrder::new(cfg.alpha)?;
    let spec = LatticeSpec::new(cfg.dim, cfg.hbar, cfg.points)?;

    let mut max_gap = 0.0f64;
    let mut max_norm = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let name = args
        .run
        .out
        .as_deref()
        .unwrap_or("symbol_gap.csv")
        .to_string();
    write_csv(&args.run.out_dir, &name, |w| {
        let header: Vec<String> = (0..cfg.dim)
            .map(|a| format!("theta_{a}"))
            .chain(["gap".to_string(), "normalized".to_string()])
            .collect();
        write_row(w, &header)?;
        let mut rows: Vec<(Vec<f64>, f64, f64)> = Vec::new();
        spec.for_each_dual(|_, _, theta| {
            let (gap, norm) = symbol_gap(theta, cfg.hbar, order);
            rows.push((theta.to_vec(), gap, norm));
        });
        for (theta, gap, norm) in rows {
            max_gap = max_gap.max(gap);
            min_gap = min_gap.min(gap);
            max_norm = max_norm.max(norm);
            let fields: Vec<String> = theta
                .iter()
                .map(|&t| fmt(t))
                .chain([fmt(gap), fmt(norm)])
                .collect();
            write_row(w, &fields)?;
        }
        Ok(())
    })?;
    manifest.add_output(&args.run.out_dir, &name)?;

    if args.run.assert_mode {
        let symbol_max = symbol_field(&spec, order, false).max();
        let bound = (4.0 * cfg.dim as f64).powf(cfg.alpha);
        if symbol_max > bound + 1e-12 {
            return Err(CliError::Assertion(format!(
                "unscaled symbol max {symbol_max} exceeds (4n)^alpha = {bound}"
            )));
        }
        if cfg.alpha == 1.0 {
            let c = 4.0 * std::f64::consts::PI.powi(4) / 3.0;
            if max_norm > c + 1e-9 {
                return Err(CliError::Assertion(format!(
                    "normalized gap {max_norm} exceeds 4 pi^4 / 3 = {c}"
                )));
            }
            if min_gap < 0.0 {
                return Err(CliError::Assertion(format!(
                    "negative gap {min_gap} at alpha = 1"
                )));
            }
        }
    }

    manifest.finish(
        &args.run.out_dir,
        json!({
            "max_gap": max_gap,
            "max_normalized": max_norm,
        }),
    )
}
