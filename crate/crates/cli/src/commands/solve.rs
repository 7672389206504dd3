//! `latfkg solve`: evolve the Cauchy problem, dump recorded states and the
//! energy ledger.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use latfkg::{solve, Forcing, FractionalOrder, GridFunction, LatticeSpec, SolveParams};

use super::{
    ensure_out_dir, fmt, grid_csv_name, load_forcing, load_grid, load_mass, write_csv, write_row,
};
use crate::config::{load_json, validate_solve, DataConfig, ForcingConfig, SolveConfig};
use crate::manifest::ManifestBuilder;
use crate::{CliError, RunArgs};

fn build_data(
    spec: LatticeSpec,
    cfg: &DataConfig,
    seed: u64,
    stream: u64,
) -> Result<GridFunction, CliError> {
    Ok(match cfg {
        DataConfig::Zero => GridFunction::zeros(spec),
        DataConfig::File(path) => load_grid(spec, path)?,
        DataConfig::Gaussian {
            amplitude,
            width,
            center,
        } => {
            let (a, w) = (*amplitude, *width);
            let c = center.clone();
            GridFunction::from_fn(spec, move |x| {
                let r2: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
                Complex64::new(a * (-r2 / (2.0 * w * w)).exp(), 0.0)
            })
        }
        DataConfig::Planewave { mode } => GridFunction::plane_wave(spec, mode),
        DataConfig::Random { scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(stream));
            let values = (0..spec.site_count())
                .map(|_| {
                    Complex64::new(
                        scale * (rng.random::<f64>() - 0.5),
                        scale * (rng.random::<f64>() - 0.5),
                    )
                })
                .collect();
            GridFunction::from_values(spec, values)?
        }
    })
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let config_path = args
        .config
        .clone()
        .ok_or_else(|| CliError::invalid("solve requires --config <file.json>"))?;
    let obj = load_json(&config_path)?;
    let cfg: SolveConfig = validate_solve(&obj, Some(&config_path))?;
    let seed = args.seed.unwrap_or(cfg.seed);

    ensure_out_dir(&args.out_dir)?;
    let mut echo = cfg.echo.clone();
    echo["seed"] = json!(seed);
    let mut manifest = ManifestBuilder::new("solve", echo, seed);

    let spec = LatticeSpec::new(cfg.dim, cfg.hbar, cfg.points)?;
    let order = FractionalOrder::new(cfg.alpha)?;
    let mass = load_mass(spec, &cfg.mass)?;
    let forcing = match &cfg.forcing {
        ForcingConfig::Zero => Forcing::Zero,
        ForcingConfig::File(path) => load_forcing(spec, path)?,
    };
    let u0 = build_data(spec, &cfg.u0, seed, 0)?;
    let u1 = build_data(spec, &cfg.u1, seed, 1)?;

    let params = SolveParams {
        order,
        time_horizon: cfg.t_end,
        dt: cfg.dt,
        record_every: cfg.record_every,
    };
    let trace = solve(&u0, &u1, &mass, &forcing, &params)?;

    for (i, state) in trace.states.iter().enumerate() {
        for (prefix, grid) in [("u", &state.u), ("du", &state.du)] {
            let name = grid_csv_name(prefix, i);
            write_csv(&args.out_dir, &name, |w| {
                grid.write_csv(w)?;
                Ok(())
            })?;
            manifest.add_output(&args.out_dir, &name)?;
        }
    }

    let mut max_slack = f64::NEG_INFINITY;
    write_csv(&args.out_dir, "energies.csv", |w| {
        write_row(
            w,
            &[
                "t",
                "kinetic",
                "dirichlet",
                "potential",
                "total",
                "sqrtE_bound",
            ]
            .map(String::from),
        )?;
        for (e, bound) in trace.energies.iter().zip(&trace.sqrt_energy_bounds) {
            max_slack = max_slack.max(e.total.sqrt() - bound);
            write_row(
                w,
                &[
                    fmt(e.time),
                    fmt(e.kinetic),
                    fmt(e.dirichlet),
                    fmt(e.potential),
                    fmt(e.total),
                    fmt(*bound),
                ],
            )?;
        }
        Ok(())
    })?;
    manifest.add_output(&args.out_dir, "energies.csv")?;

    if args.assert_mode && max_slack > 1e-8 {
        return Err(CliError::Assertion(format!(
            "energy inequality violated: max sqrt(E) - bound = {max_slack:.3e} > 1e-8"
        )));
    }

    manifest.finish(
        &args.out_dir,
        json!({
            "records": trace.states.len(),
            "final_time": trace.times.last().copied().unwrap_or(0.0),
            "final_energy": trace.energies.last().map(|e| e.total).unwrap_or(0.0),
            "max_energy_inequality_slack": max_slack,
            "forcing_l2_sq": trace.forcing_l2_sq,
        }),
    )
}
