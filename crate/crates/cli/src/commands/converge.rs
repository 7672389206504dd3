//! `latfkg converge`: lattice-vs-continuum sweep, rate fit, assertable gate.

use std::io::Write;

use serde_json::json;

use latfkg::{
    run_sweep, self_convergence, BandLimitedProfile, ConvergenceReport, DtPolicy, FractionalOrder,
    GaussianProfileSpec, RateFit, SweepPlan,
};

use super::{ensure_out_dir, fmt, write_csv, write_row};
use crate::config::{load_json, validate_converge, ConvergeConfig, ProfileConfig, SweepMode};
use crate::manifest::ManifestBuilder;
use crate::{CliError, RunArgs};

fn build_profile(cfg: &ConvergeConfig) -> Result<BandLimitedProfile, CliError> {
    Ok(match &cfg.profile {
        ProfileConfig::Gaussian {
            cutoff,
            xi_points,
            width0,
            amp0,
            width1,
            amp1,
            commensurate,
        } => {
            let g = GaussianProfileSpec {
                width0: *width0,
                amp0: *amp0,
                width1: *width1,
                amp1: *amp1,
                low_cut: None,
            };
            if *commensurate {
                BandLimitedProfile::commensurate_gaussian(cfg.dim, cfg.box_len, *cutoff, &g)?
            } else {
                BandLimitedProfile::tapered_gaussian(cfg.dim, *cutoff, *xi_points, &g)?
            }
        }
        ProfileConfig::SingleCell {
            cutoff,
            xi_points,
            amp0,
            amp1,
        } => BandLimitedProfile::single_cell_at_zero(cfg.dim, *cutoff, *xi_points, *amp0, *amp1)?,
    })
}

fn rate_fields(rate: &RateFit) -> (String, String) {
    match rate {
        RateFit::Exact => ("exact".to_string(), "0".to_string()),
        RateFit::Fitted { slope, residual } => (format!("{slope:.6}"), format!("{residual:.3e}")),
    }
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let config_path = args
        .config
        .clone()
        .ok_or_else(|| CliError::invalid("converge requires --config <file.json>"))?;
    let obj = load_json(&config_path)?;
    let cfg = validate_converge(&obj)?;
    let seed = args.seed.unwrap_or(cfg.seed);

    ensure_out_dir(&args.out_dir)?;
    let mut manifest = ManifestBuilder::new("converge", cfg.echo.clone(), seed);

    let profile = build_profile(&cfg)?;
    let order = FractionalOrder::new(cfg.alpha)?;
    let dt_policy = match (cfg.mode, cfg.steps) {
        (SweepMode::Exact, None) => DtPolicy::SingleExactStep,
        (SweepMode::Exact, Some(s)) => DtPolicy::StepsTotal(s),
        (SweepMode::SelfReference, steps) => DtPolicy::StepsTotal(steps.unwrap_or(1024)),
    };
    let plan = SweepPlan {
        order,
        dim: cfg.dim,
        mass_const: cfg.mass_const,
        profile,
        time_horizon: cfg.t_end,
        hbar_list: cfg.hbar_list.clone(),
        box_len: cfg.box_len,
        dt_policy,
    };
    let report: ConvergenceReport = match cfg.mode {
        SweepMode::Exact => run_sweep(&plan)?,
        SweepMode::SelfReference => {
            let mf = cfg.mass_function.clone().expect("validated");
            let mass_fn = move |x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                mf.base + mf.bump_amplitude * (-r2 / (mf.bump_width * mf.bump_width)).exp()
            };
            self_convergence(&plan, &mass_fn)?
        }
    };

    let name = args.out.as_deref().unwrap_or("converge.csv").to_string();
    let (rate_s, res_s) = rate_fields(&report.rate);
    write_csv(&args.out_dir, &name, |w| {
        write_row(
            w,
            &[
                "hbar",
                "N",
                "D_u",
                "D_du",
                "D_total",
                "D_total_weighted",
                "normalized",
            ]
            .map(String::from),
        )?;
        for r in &report.rows {
            write_row(
                w,
                &[
                    fmt(r.hbar),
                    r.points_per_axis.to_string(),
                    fmt(r.d_u),
                    fmt(r.d_du),
                    fmt(r.d_total),
                    fmt(r.d_total_weighted),
                    fmt(r.normalized),
                ],
            )?;
        }
        w.write_all(format!("# fitted_rate={rate_s} residual={res_s}\n").as_bytes())?;
        Ok(())
    })?;
    manifest.add_output(&args.out_dir, &name)?;

    let threshold = 2.0 * cfg.alpha - 0.3;
    if args.assert_mode {
        if let RateFit::Fitted { slope, .. } = report.rate {
            if slope < threshold {
                return Err(CliError::Assertion(format!(
                    "fitted rate {slope:.4} below 2 alpha - 0.3 = {threshold:.4}"
                )));
            }
        }
    }

    manifest.finish(
        &args.out_dir,
        json!({
            "fitted_rate": report.rate.slope(),
            "weighted_rate": report.weighted_rate.slope(),
            "rate_threshold": threshold,
            "rows": report.rows.len(),
        }),
    )
}
