//! `latfkg coeffs`: fractional centered-difference coefficient table as CSV.

use serde_json::{json, Map, Value};

use latfkg::{build_table, FractionalOrder};

use super::{ensure_out_dir, fmt, write_csv, write_row};
use crate::config::{load_json, validate_coeffs};
use crate::manifest::ManifestBuilder;
use crate::{CliError, CoeffsArgs};

pub fn run(args: CoeffsArgs) -> Result<(), CliError> {
    let mut obj: Map<String, Value> = match &args.run.config {
        Some(path) => load_json(path)?,
        None => Map::new(),
    };
    // direct flags override config entries
    if let Some(a) = args.alpha {
        obj.insert("alpha".into(), json!(a));
    }
    if let Some(d) = args.dim {
        obj.insert("dim".into(), json!(d));
    }
    if let Some(r) = args.radius {
        obj.insert("radius".into(), json!(r));
    }
    if let Some(m) = args.quad_points {
        obj.insert("quad_points".into(), json!(m));
    }
    if let Some(s) = args.run.seed {
        obj.insert("seed".into(), json!(s));
    }
    let cfg = validate_coeffs(&obj)?;

    ensure_out_dir(&args.run.out_dir)?;
    let mut manifest = ManifestBuilder::new("coeffs", cfg.echo(), cfg.seed);

    let order = FractionalOrder::new(cfg.alpha)?;
    let table = build_table(order, cfg.dim, cfg.radius, cfg.quad_points)?;

    let name = args.run.out.as_deref().unwrap_or("coeffs.csv").to_string();
    write_csv(&args.run.out_dir, &name, |w| {
        let header: Vec<String> = (0..cfg.dim)
            .map(|a| format!("j_{a}"))
            .chain(["a_j".to_string(), "quad_err".to_string()])
            .collect();
        write_row(w, &header)?;
        let mut rows: Vec<(Vec<i64>, f64)> = Vec::new();
        table.for_each(|j, weight| rows.push((j.to_vec(), weight)));
        for ((j, weight), err) in rows.iter().zip(table.errors()) {
            let fields: Vec<String> = j
                .iter()
                .map(|x| x.to_string())
                .chain([fmt(*weight), fmt(*err)])
                .collect();
            write_row(w, &fields)?;
        }
        Ok(())
    })?;
    manifest.add_output(&args.run.out_dir, &name)?;

    if args.run.assert_mode {
        assert_invariants(&table)?;
    }

    let zero = vec![0i64; cfg.dim];
    manifest.finish(
        &args.run.out_dir,
        json!({
            "center_weight": table.weight(&zero),
            "weight_sum": table.weight_sum(),
            "tail_estimate": table.tail_estimate(),
            "quad_error_estimate": table.quad_error_estimate(),
        }),
    )
}

fn assert_invariants(table: &latfkg::CoefficientTable) -> Result<(), CliError> {
    let zero = vec![0i64; table.dim()];
    let center = table.weight(&zero);
    if center <= 0.0 {
        return Err(CliError::Assertion(format!(
            "center weight {center} not positive"
        )));
    }
    let mut failure = None;
    table.for_each(|j, w| {
        if failure.is_some() {
            return;
        }
        let neg: Vec<i64> = j.iter().map(|x| -x).collect();
        if w != table.weight(&neg) {
            failure = Some(format!("symmetry broken at j = {j:?}"));
        }
        if j.iter().any(|&x| x != 0) && w > 1e-10 {
            failure = Some(format!(
                "off-center weight {w} above tolerance at j = {j:?}"
            ));
        }
    });
    match failure {
        Some(m) => Err(CliError::Assertion(m)),
        None => Ok(()),
    }
}
