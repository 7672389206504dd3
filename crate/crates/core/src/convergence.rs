//! Shrinking-h sweeps: lattice vs continuum discrepancies and fitted rates.
//!
//! A sweep fixes the physical box length L and runs matched problems for a
//! decreasing h-list (N = L/h per axis, always even). For constant mass the
//! continuum side is the closed-form band-limited reference; discrepancies
//! are taken in the unweighted lattice l2 norm at the final time, with a
//! volume-weighted h^{n/2} variant reported alongside. The fitted rate is
//! the least-squares slope of log D against log h over the last half of the
//! list.
//!
//! Variable mass has no closed-form reference; `self_convergence` instead
//! measures each run against the finest run of a dyadic h-list, whose sites
//! contain every coarser site set exactly.

use crate::coefficients::FractionalOrder;
use crate::continuum::{sobolev_weight_norm, BandLimitedProfile, ContinuumSolutionSampler};
use crate::error::{Error, Result};
use crate::lattice::{GridFunction, LatticeSpec};
use crate::solver::{
    build_propagator, propagate_exact, solve, EvolutionState, Forcing, MassField, SolveParams,
};

/// How the lattice problem is advanced to the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// One exact constant-mass step over the whole horizon (no time error).
    SingleExactStep,
    /// Fixed step size for every h.
    Fixed(f64),
    /// Fixed number of steps for every h.
    StepsTotal(usize),
}

/// One matched lattice/continuum experiment across an h-list.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub order: FractionalOrder,
    pub dim: usize,
    pub mass_const: f64,
    pub profile: BandLimitedProfile,
    pub time_horizon: f64,
    pub hbar_list: Vec<f64>,
    pub box_len: f64,
    pub dt_policy: DtPolicy,
}

impl SweepPlan {
    fn points_for(&self, hbar: f64) -> Result<usize> {
        let ratio = self.box_len / hbar;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::SweepPlan(format!(
                "box length {} over hbar {hbar} is not an integer ({ratio})",
                self.box_len
            )));
        }
        let n = n as usize;
        if n % 2 != 0 || n < 2 {
            return Err(Error::SweepPlan(format!(
                "box length {} over hbar {hbar} gives odd point count {n}",
                self.box_len
            )));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hbar_list.is_empty() {
            return Err(Error::SweepPlan("empty hbar list".into()));
        }
        if !(self.time_horizon > 0.0) {
            return Err(Error::SweepPlan(format!(
                "time horizon must be positive, got {}",
                self.time_horizon
            )));
        }
        if !(self.mass_const >= 0.0) || !self.mass_const.is_finite() {
            return Err(Error::SweepPlan(format!(
                "mass must be nonnegative, got {}",
                self.mass_const
            )));
        }
        if self.profile.dim() != self.dim {
            return Err(Error::SweepPlan(format!(
                "profile dim {} vs plan dim {}",
                self.profile.dim(),
                self.dim
            )));
        }
        let mut prev = f64::INFINITY;
        for &h in &self.hbar_list {
            if !(h > 0.0) || h >= prev {
                return Err(Error::SweepPlan(format!(
                    "hbar list must be strictly decreasing and positive, got {:?}",
                    self.hbar_list
                )));
            }
            prev = h;
            self.points_for(h)?;
            let nyquist = 0.5 / h;
            if self.profile.cutoff() > nyquist {
                return Err(Error::NyquistViolation {
                    cutoff: self.profile.cutoff(),
                    nyquist,
                    max_hbar: 0.5 / self.profile.cutoff(),
                });
            }
        }
        Ok(())
    }

    /// Dyadic check: each h is exactly half its predecessor.
    fn require_dyadic(&self) -> Result<()> {
        for pair in self.hbar_list.windows(2) {
            let ratio = pair[0] / pair[1];
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(Error::SweepPlan(format!(
                    "self-convergence needs a dyadic hbar list, got ratio {ratio}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-h measurements. Discrepancies are at the final time in the unweighted
/// lattice l2 norm; `d_total_weighted` carries the volume factor h^{n/2};
/// `normalized` divides by h^{2a} * h^{-n/2} * (Sobolev weight factor).
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub hbar: f64,
    pub points_per_axis: usize,
    pub d_u: f64,
    pub d_du: f64,
    pub d_total: f64,
    pub d_total_weighted: f64,
    pub normalized: f64,
}

/// Outcome of a log-log fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFit {
    /// All discrepancies were exactly zero (mode-exact agreement).
    Exact,
    Fitted {
        slope: f64,
        residual: f64,
    },
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            RateFit::Exact => None,
            RateFit::Fitted { slope, .. } => Some(*slope),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fit of d_total over the last ceil(half) rows (at least 3 when available).
    pub rate: RateFit,
    /// Same fit on the h^{n/2}-weighted column.
    pub weighted_rate: RateFit,
}

/// Ordinary least squares of log D on log h.
///
/// Rows with D exactly zero short-circuit to [`RateFit::Exact`]; otherwise at
/// least 3 rows are required.
pub fn fit_rate(rows: &[(f64, f64)]) -> Result<RateFit> {
    if rows.iter().any(|&(_, d)| d == 0.0) {
        return Ok(RateFit::Exact);
    }
    if rows.len() < 3 {
        return Err(Error::NotEnoughRows { got: rows.len() });
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit::Fitted { slope, residual })
}

fn fit_window(len: usize) -> usize {
    len.div_ceil(2).max(3).min(len)
}

fn fit_columns(rows: &[ConvergenceRow]) -> Result<(RateFit, RateFit)> {
    let take = fit_window(rows.len());
    let tail = &rows[rows.len() - take..];
    let plain: Vec<(f64, f64)> = tail.iter().map(|r| (r.hbar, r.d_total)).collect();
    let weighted: Vec<(f64, f64)> = tail.iter().map(|r| (r.hbar, r.d_total_weighted)).collect();
    Ok((fit_rate(&plain)?, fit_rate(&weighted)?))
}

fn l2_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Run the constant-mass sweep against the closed-form continuum reference.
pub fn run_sweep(plan: &SweepPlan) -> Result<ConvergenceReport> {
    plan.validate()?;
    let sampler = ContinuumSolutionSampler::new(plan.profile.clone(), plan.order, plan.mass_const)?;
    let t_end = plan.time_horizon;
    let weight_factor = sobolev_weight_norm(&plan.profile, plan.order, t_end, plan.mass_const);
    let alpha = plan.order.alpha();
    let half_dim = plan.dim as f64 / 2.0;

    let mut rows = Vec::with_capacity(plan.hbar_list.len());
    for &hbar in &plan.hbar_list {
        let n = plan.points_for(hbar)?;
        let spec = LatticeSpec::new(plan.dim, hbar, n)?;
        let (u0, u1) = sampler.sample(0.0, &spec)?;
        let final_state = advance(plan, &spec, &u0, &u1)?;
        let (v_t, dv_t) = sampler.sample(t_end, &spec)?;
        let d_u = l2_diff(&v_t, &final_state.u);
        let d_du = l2_diff(&dv_t, &final_state.du);
        let d_total = d_u + d_du;
        let weight = hbar.powf(2.0 * alpha) * hbar.powf(-half_dim) * weight_factor;
        rows.push(ConvergenceRow {
            hbar,
            points_per_axis: n,
            d_u,
            d_du,
            d_total,
            d_total_weighted: hbar.powf(half_dim) * d_total,
            normalized: if weight > 0.0 { d_total / weight } else { 0.0 },
        });
    }
    let (rate, weighted_rate) = fit_columns(&rows)?;
    Ok(ConvergenceReport {
        rows,
        rate,
        weighted_rate,
    })
}

fn advance(
    plan: &SweepPlan,
    spec: &LatticeSpec,
    u0: &GridFunction,
    u1: &GridFunction,
) -> Result<EvolutionState> {
    match plan.dt_policy {
        DtPolicy::SingleExactStep => {
            let prop = build_propagator(spec, plan.order, plan.mass_const)?;
            let state = EvolutionState::new(0.0, u0.clone(), u1.clone())?;
            propagate_exact(&state, &prop, plan.time_horizon, &Forcing::Zero)
        }
        DtPolicy::Fixed(dt) => {
            let mass = MassField::constant(*spec, plan.mass_const)?;
            let params = SolveParams {
                order: plan.order,
                time_horizon: plan.time_horizon,
                dt,
                record_every: usize::MAX - 1,
            };
            let trace = solve(u0, u1, &mass, &Forcing::Zero, &params)?;
            Ok(trace.states.last().unwrap().clone())
        }
        DtPolicy::StepsTotal(steps) => {
            if steps == 0 {
                return Err(Error::TimeStep("steps must be >= 1".into()));
            }
            let mass = MassField::constant(*spec, plan.mass_const)?;
            let params = SolveParams {
                order: plan.order,
                time_horizon: plan.time_horizon,
                dt: plan.time_horizon / steps as f64,
                record_every: usize::MAX - 1,
            };
            let trace = solve(u0, u1, &mass, &Forcing::Zero, &params)?;
            Ok(trace.states.last().unwrap().clone())
        }
    }
}

/// Variable-mass fallback: the finest run of a dyadic h-list is the
/// reference; coarser runs are compared on their own site sets, which the
/// fine lattice contains exactly.
pub fn self_convergence(
    plan: &SweepPlan,
    mass_fn: &dyn Fn(&[f64]) -> f64,
) -> Result<ConvergenceReport> {
    plan.validate()?;
    plan.require_dyadic()?;
    if plan.hbar_list.len() < 2 {
        return Err(Error::SweepPlan(
            "self-convergence needs at least two hbar values".into(),
        ));
    }
    let steps = match plan.dt_policy {
        DtPolicy::StepsTotal(s) if s > 0 => s,
        DtPolicy::Fixed(dt) => {
            let s = (plan.time_horizon / dt).round();
            if s < 1.0 {
                return Err(Error::TimeStep("dt exceeds the horizon".into()));
            }
            s as usize
        }
        _ => {
            return Err(Error::SweepPlan(
                "self-convergence needs a Fixed or StepsTotal dt policy".into(),
            ))
        }
    };
    let sampler = ContinuumSolutionSampler::new(plan.profile.clone(), plan.order, plan.mass_const)?;
    let t_end = plan.time_horizon;
    let alpha = plan.order.alpha();
    let half_dim = plan.dim as f64 / 2.0;
    let weight_factor = sobolev_weight_norm(&plan.profile, plan.order, t_end, plan.mass_const);

    let mut finals: Vec<(LatticeSpec, EvolutionState)> = Vec::new();
    for &hbar in &plan.hbar_list {
        let n = plan.points_for(hbar)?;
        let spec = LatticeSpec::new(plan.dim, hbar, n)?;
        let (u0, u1) = sampler.sample(0.0, &spec)?;
        let mass = MassField::from_fn(spec, |x| mass_fn(x))?;
        let params = SolveParams {
            order: plan.order,
            time_horizon: t_end,
            dt: t_end / steps as f64,
            record_every: usize::MAX - 1,
        };
        let trace = solve(&u0, &u1, &mass, &Forcing::Zero, &params)?;
        finals.push((spec, trace.states.last().unwrap().clone()));
    }

    let (fine_spec, fine_state) = finals.last().unwrap().clone();
    let mut rows = Vec::new();
    for (idx, &hbar) in plan.hbar_list[..plan.hbar_list.len() - 1]
        .iter()
        .enumerate()
    {
        let (coarse_spec, coarse_state) = &finals[idx];
        let p = (hbar / fine_spec.spacing()).round() as i64;
        let (ref_u, ref_du) = restrict(&fine_state, &fine_spec, coarse_spec, p);
        let d_u = l2_diff(&coarse_state.u, &ref_u);
        let d_du = l2_diff(&coarse_state.du, &ref_du);
        let d_total = d_u + d_du;
        let weight = hbar.powf(2.0 * alpha) * hbar.powf(-half_dim) * weight_factor;
        rows.push(ConvergenceRow {
            hbar,
            points_per_axis: coarse_spec.points_per_axis(),
            d_u,
            d_du,
            d_total,
            d_total_weighted: hbar.powf(half_dim) * d_total,
            normalized: if weight > 0.0 { d_total / weight } else { 0.0 },
        });
    }
    let (rate, weighted_rate) = fit_columns(&rows)?;
    Ok(ConvergenceReport {
        rows,
        rate,
        weighted_rate,
    })
}

/// Pull the fine solution back to the coarse site set (fine index = p * coarse).
fn restrict(
    fine: &EvolutionState,
    fine_spec: &LatticeSpec,
    coarse_spec: &LatticeSpec,
    p: i64,
) -> (GridFunction, GridFunction) {
    let mut u = GridFunction::zeros(*coarse_spec);
    let mut du = GridFunction::zeros(*coarse_spec);
    let dim = coarse_spec.dim();
    let mut fine_idx = vec![0i64; dim];
    coarse_spec.for_each_site(|flat, signed, _| {
        for (f, &s) in fine_idx.iter_mut().zip(signed) {
            *f = s * p;
        }
        let src = fine_spec.flat_index(&fine_idx);
        u.values_mut()[flat] = fine.u.values()[src];
        du.values_mut()[flat] = fine.du.values()[src];
    });
    (u, du)
}
