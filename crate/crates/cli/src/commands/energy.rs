//! `latfkg energy`: energy functional of a stored (u, du) pair.

use serde_json::json;

use latfkg::{energy, EvolutionState, FractionalOrder, LatticeSpec};

use super::{ensure_out_dir, fmt, load_grid, load_mass, write_csv, write_row};
use crate::config::{load_json, validate_energy};
use crate::manifest::ManifestBuilder;
use crate::{CliError, RunArgs};

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let config_path = args
        .config
        .clone()
        .ok_or_else(|| CliError::invalid("energy requires --config <file.json>"))?;
    let obj = load_json(&config_path)?;
    let cfg = validate_energy(&obj, Some(&config_path))?;
    let seed = args.seed.unwrap_or(cfg.seed);

    ensure_out_dir(&args.out_dir)?;
    let mut manifest = ManifestBuilder::new("energy", cfg.echo.clone(), seed);

    let spec = LatticeSpec::new(cfg.dim, cfg.hbar, cfg.points)?;
    let order = FractionalOrder::new(cfg.alpha)?;
    let mass = load_mass(spec, &cfg.mass)?;
    let u = load_grid(spec, &cfg.u_file)?;
    let du = load_grid(spec, &cfg.du_file)?;
    let state = EvolutionState::new(0.0, u, du)?;
    let record = energy(&state, order, &mass)?;

    let name = args.out.as_deref().unwrap_or("energy.csv").to_string();
    write_csv(&args.out_dir, &name, |w| {
        write_row(
            w,
            &["kinetic", "dirichlet", "potential", "total"].map(String::from),
        )?;
        write_row(
            w,
            &[
                fmt(record.kinetic),
                fmt(record.dirichlet),
                fmt(record.potential),
                fmt(record.total),
            ],
        )?;
        Ok(())
    })?;
    manifest.add_output(&args.out_dir, &name)?;

    manifest.finish(
        &args.out_dir,
        json!({
            "kinetic": record.kinetic,
            "dirichlet": record.dirichlet,
            "potential": record.potential,
            "total": record.total,
        }),
    )
}
