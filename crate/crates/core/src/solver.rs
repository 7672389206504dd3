//! Time evolution of u_tt + h^{-2a}(-L_h)^a u + m(k) u = f(t, k).
//!
//! In Fourier space each mode obeys v'' + beta^2 v = g + fhat with
//! beta^2 = h^{-2a} sigma(theta) (+ m when the mass is constant and can be
//! folded into beta). The constant-mass propagator advances every mode by the
//! exact rotation
//!
//!   v(t+dt)  = cos(beta dt) v + sin(beta dt)/beta v' + (1-cos(beta dt))/beta^2 fhat
//!   v'(t+dt) = -beta sin(beta dt) v + cos(beta dt) v' + sin(beta dt)/beta fhat
//!
//! with the forcing frozen at the step midpoint, so an unforced step
//! conserves the modal energy |v'|^2 + beta^2 |v|^2 to round-off and there is
//! no step-size restriction of any kind. Variable mass goes through Strang
//! splitting: half-kick with -m u + f, exact massless rotation, half-kick;
//! formally second order, time-reversible, again with no CFL constraint
//! (the free flow is exact in Fourier space and the kicks are diagonal).
//!
//! The energy functional is
//!
//!   E(t) = ||u_t||^2 + ||h^{-a}(-L_h)^{a/2} u||^2 + ||m^{1/2} u||^2,
//!
//! and every forced run is monitored against
//! sqrt(E(t)) <= sqrt(E(0)) + int_0^t ||f(s)|| ds, the integral accumulated
//! with the same midpoint rule the stepping uses, which makes the inequality
//! exact for the discrete trajectory rather than a discretization claim.

use num_complex::Complex64;

use crate::coefficients::FractionalOrder;
use crate::error::{Error, Result};
use crate::laplacian::apply_spectral;
use crate::lattice::{same_spec, GridFunction, LatticeSpec, LpNorm, SpectralFunction};

/// Nonnegative mass profile with cached sup norm.
#[derive(Debug, Clone)]
pub struct MassField {
    spec: LatticeSpec,
    values: Vec<f64>,
    sup_norm: f64,
}

impl MassField {
    pub fn from_values(spec: LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.site_count() {
            return Err(Error::InvalidLattice(format!(
                "mass value count {} does not match {} sites",
                values.len(),
                spec.site_count()
            )));
        }
        let mut sup = 0.0f64;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if v < 0.0 {
                return Err(Error::InvalidValue {
                    name: "mass",
                    message: format!("negative entry {v} at flat index {i}"),
                });
            }
            sup = sup.max(v);
        }
        Ok(Self {
            spec,
            values,
            sup_norm: sup,
        })
    }

    pub fn constant(spec: LatticeSpec, m: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidValue {
                name: "mass",
                message: format!("must be a nonnegative finite real, got {m}"),
            });
        }
        Ok(Self {
            spec,
            values: vec![m; spec.site_count()],
            sup_norm: m,
        })
    }

    pub fn from_fn(spec: LatticeSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = vec![0.0; spec.site_count()];
        spec.for_each_site(|flat, _signed, coords| values[flat] = f(coords));
        Self::from_values(spec, values)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Some(m) when every entry equals the first one bit-exactly.
    pub fn as_constant(&self) -> Option<f64> {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first).then_some(first)
    }
}

/// Right-hand side f(t, k): absent, or time samples on a uniform grid with
/// piecewise-linear interpolation in t.
#[derive(Debug, Clone)]
pub enum Forcing {
    Zero,
    Sampled(SampledForcing),
}

#[derive(Debug, Clone)]
pub struct SampledForcing {
    spec: LatticeSpec,
    t_start: f64,
    t_end: f64,
    samples: Vec<GridFunction>,
}

impl SampledForcing {
    pub fn new(samples: Vec<GridFunction>, t_start: f64, t_end: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidValue {
                name: "forcing",
                message: "needs at least two time samples".into(),
            });
        }
        if !(t_end > t_start) {
            return Err(Error::InvalidValue {
                name: "forcing",
                message: format!("time grid [{t_start}, {t_end}] is empty"),
            });
        }
        let spec = *samples[0].spec();
        for s in &samples[1..] {
            same_spec(&spec, s.spec(), "forcing samples")?;
        }
        Ok(Self {
            spec,
            t_start,
            t_end,
            samples,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn time_span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn samples(&self) -> &[GridFunction] {
        &self.samples
    }

    /// Piecewise-linear value at t, clamped to the sampled span.
    pub fn eval(&self, t: f64) -> GridFunction {
        let nseg = self.samples.len() - 1;
        let pos = (t - self.t_start) / (self.t_end - self.t_start) * nseg as f64;
        let pos = pos.clamp(0.0, nseg as f64);
        let seg = (pos.floor() as usize).min(nseg - 1);
        let w = pos - seg as f64;
        let mut out = self.samples[seg].clone();
        out.scale(Complex64::new(1.0 - w, 0.0));
        out.add_scaled(&self.samples[seg + 1], Complex64::new(w, 0.0))
            .expect("forcing samples share a spec");
        out
    }
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    pub fn eval(&self, t: f64) -> Option<GridFunction> {
        match self {
            Forcing::Zero => None,
            Forcing::Sampled(s) => Some(s.eval(t)),
        }
    }
}

/// State (u, u_t) at one instant.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub time: f64,
    pub u: GridFunction,
    pub du: GridFunction,
}

impl EvolutionState {
    pub fn new(time: f64, u: GridFunction, du: GridFunction) -> Result<Self> {
        same_spec(u.spec(), du.spec(), "evolution state")?;
        if !time.is_finite() {
            return Err(Error::InvalidValue {
                name: "time",
                message: format!("non-finite {time}"),
            });
        }
        Ok(Self { time, u, du })
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.u.spec()
    }
}

/// Mode frequencies beta(theta) = sqrt(h^{-2a} sigma(theta) + m) over the
/// dual grid, for a constant mass m folded into the rotation.
#[derive(Debug, Clone)]
pub struct PropagatorModes {
    spec: LatticeSpec,
    order: FractionalOrder,
    mass_const: f64,
    beta: Vec<f64>,
}

impl PropagatorModes {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn mass_const(&self) -> f64 {
        self.mass_const
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

pub fn build_propagator(
    spec: &LatticeSpec,
    order: FractionalOrder,
    mass_const: f64,
) -> Result<PropagatorModes> {
    if !(mass_const >= 0.0) || !mass_const.is_finite() {
        return Err(Error::InvalidValue {
            name: "mass",
            message: format!("must be a nonnegative finite real, got {mass_const}"),
        });
    }
    let symbol = crate::laplacian::symbol_field(spec, order, true);
    let beta = symbol
        .values()
        .iter()
        .map(|&s| (s + mass_const).sqrt())
        .collect();
    Ok(PropagatorModes {
        spec: *spec,
        order,
        mass_const,
        beta,
    })
}

/// Rotation kernels (cos, sin(x)/beta, (1-cos x)/beta^2) with the beta -> 0
/// modes series-stabilized below |beta dt| = 1e-6.
fn modal_kernels(beta: f64, dt: f64) -> (f64, f64, f64) {
    let x = beta * dt;
    let c = x.cos();
    if x.abs() < 1e-6 {
        let x2 = x * x;
        let sinc = dt * (1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0);
        let q = dt * dt * (0.5 - x2 / 24.0 + x2 * x2 / 720.0 - x2 * x2 * x2 / 40320.0);
        (c, sinc, q)
    } else {
        let half = (0.5 * x).sin();
        (c, x.sin() / beta, 2.0 * half * half / (beta * beta))
    }
}

/// One exact constant-mass step of any size (dt may be negative: the modal
/// rotations form a group and reverse exactly).
pub fn propagate_exact(
    state: &EvolutionState,
    propagator: &PropagatorModes,
    dt: f64,
    forcing: &Forcing,
) -> Result<EvolutionState> {
    same_spec(state.spec(), &propagator.spec, "propagate_exact")?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::TimeStep(format!(
            "dt must be finite and nonzero, got {dt}"
        )));
    }
    let mut v = state.u.forward_transform();
    let mut dv = state.du.forward_transform();
    let fhat: Option<SpectralFunction> = match forcing.eval(state.time + 0.5 * dt) {
        Some(f) => {
            same_spec(state.spec(), f.spec(), "forcing")?;
            Some(f.forward_transform())
        }
        None => None,
    };
    for (i, &beta) in propagator.beta.iter().enumerate() {
        let (c, sinc, q) = modal_kernels(beta, dt);
        let vi = v.values()[i];
        let dvi = dv.values()[i];
        let f = fhat.as_ref().map_or(Complex64::ZERO, |fh| fh.values()[i]);
        v.values_mut()[i] = c * vi + sinc * dvi + q * f;
        dv.values_mut()[i] = -beta * (beta * dt).sin() * vi + c * dvi + sinc * f;
    }
    EvolutionState::new(
        state.time + dt,
        v.inverse_transform(),
        dv.inverse_transform(),
    )
}

/// One Strang step for variable mass: half-kick, exact massless rotation,
/// half-kick, with the forcing frozen at the step midpoint.
pub fn step_strang(
    state: &EvolutionState,
    order: FractionalOrder,
    mass: &MassField,
    dt: f64,
    forcing: &Forcing,
) -> Result<EvolutionState> {
    let free = build_propagator(state.spec(), order, 0.0)?;
    step_strang_with(state, &free, mass, dt, forcing)
}

fn step_strang_with(
    state: &EvolutionState,
    free: &PropagatorModes,
    mass: &MassField,
    dt: f64,
    forcing: &Forcing,
) -> Result<EvolutionState> {
    same_spec(state.spec(), mass.spec(), "step_strang mass")?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::TimeStep(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let f_mid = forcing.eval(state.time + 0.5 * dt);
    if let Some(f) = &f_mid {
        same_spec(state.spec(), f.spec(), "forcing")?;
    }
    let kick = |u: &GridFunction, du: &mut GridFunction, h: f64| {
        for ((d, &uu), &m) in du
            .values_mut()
            .iter_mut()
            .zip(u.values())
            .zip(mass.values())
        {
            *d -= h * m * uu;
        }
        if let Some(f) = &f_mid {
            for (d, &ff) in du.values_mut().iter_mut().zip(f.values()) {
                *d += h * ff;
            }
        }
    };
    let mut u = state.u.clone();
    let mut du = state.du.clone();
    kick(&u, &mut du, 0.5 * dt);
    let rotated = propagate_exact(
        &EvolutionState::new(state.time, u, du)?,
        free,
        dt,
        &Forcing::Zero,
    )?;
    u = rotated.u;
    du = rotated.du;
    kick(&u, &mut du, 0.5 * dt);
    EvolutionState::new(state.time + dt, u, du)
}

/// Energy parts at one instant.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRecord {
    pub time: f64,
    pub kinetic: f64,
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// E(t) = ||u_t||^2 + ||h^{-a}(-L_h)^{a/2} u||^2 + ||m^{1/2} u||^2.
pub fn energy(
    state: &EvolutionState,
    order: FractionalOrder,
    mass: &MassField,
) -> Result<EnergyRecord> {
    same_spec(state.spec(), mass.spec(), "energy")?;
    let kinetic = state.du.norm(LpNorm::Two).powi(2);
    let half = apply_spectral(&state.u, order, 0.5, true);
    let dirichlet = half.norm(LpNorm::Two).powi(2);
    let potential: f64 = state
        .u
        .values()
        .iter()
        .zip(mass.values())
        .map(|(u, &m)| m * u.norm_sqr())
        .sum();
    Ok(EnergyRecord {
        time: state.time,
        kinetic,
        dirichlet,
        potential,
        total: kinetic + dirichlet + potential,
    })
}

/// Solve parameters: exponent, horizon, step, recording cadence.
#[derive(Debug, Clone, Copy)]
pub struct SolveParams {
    pub order: FractionalOrder,
    pub time_horizon: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl SolveParams {
    /// Default stepping: dt = T/1024, record every 16 steps.
    pub fn with_defaults(order: FractionalOrder, time_horizon: f64) -> Self {
        Self {
            order,
            time_horizon,
            dt: time_horizon / 1024.0,
            record_every: 16,
        }
    }
}

/// Recorded trajectory: states, energies and the running energy bound
/// sqrt(E(0)) + sum dt ||f(t_mid)|| at the same instants.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub order: FractionalOrder,
    pub times: Vec<f64>,
    pub states: Vec<EvolutionState>,
    pub energies: Vec<EnergyRecord>,
    pub sqrt_energy_bounds: Vec<f64>,
    /// Midpoint-rule value of int_0^T ||f||^2 dt.
    pub forcing_l2_sq: f64,
}

pub fn solve(
    u0: &GridFunction,
    u1: &GridFunction,
    mass: &MassField,
    forcing: &Forcing,
    params: &SolveParams,
) -> Result<SolutionTrace> {
    same_spec(u0.spec(), u1.spec(), "initial data")?;
    same_spec(u0.spec(), mass.spec(), "mass")?;
    let t_end = params.time_horizon;
    if let Forcing::Sampled(s) = forcing {
        same_spec(u0.spec(), s.spec(), "forcing")?;
        let (t0, t1) = s.time_span();
        let tol = 1e-9 * t_end.max(1.0);
        if t0 > tol || t1 < t_end - tol {
            return Err(Error::TimeStep(format!(
                "forcing samples span [{t0}, {t1}] but the solve runs over [0, {t_end}]"
            )));
        }
    }
    let dt = params.dt;
    if !(dt > 0.0) || !dt.is_finite() || !(t_end > 0.0) {
        return Err(Error::TimeStep(format!(
            "need dt > 0 and T > 0, got dt = {dt}, T = {t_end}"
        )));
    }
    let steps_f = t_end / dt;
    let steps = steps_f.round() as usize;
    if steps == 0 || (steps as f64 * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::TimeStep(format!(
            "dt = {dt} does not divide T = {t_end} within round-off"
        )));
    }
    if params.record_every == 0 {
        return Err(Error::TimeStep("record_every must be >= 1".into()));
    }

    let exact_mass = mass.as_constant();
    let propagator = match exact_mass {
        Some(m) => build_propagator(u0.spec(), params.order, m)?,
        None => build_propagator(u0.spec(), params.order, 0.0)?,
    };

    let mut state = EvolutionState::new(0.0, u0.clone(), u1.clone())?;
    let mut trace = SolutionTrace {
        order: params.order,
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
        sqrt_energy_bounds: Vec::new(),
        forcing_l2_sq: 0.0,
    };
    let e0 = energy(&state, params.order, mass)?;
    let mut bound = e0.total.sqrt();
    let record = |state: &EvolutionState, bound: f64, trace: &mut SolutionTrace| -> Result<()> {
        trace.times.push(state.time);
        trace.states.push(state.clone());
        trace.energies.push(energy(state, params.order, mass)?);
        trace.sqrt_energy_bounds.push(bound);
        Ok(())
    };
    record(&state, bound, &mut trace)?;

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        if let Some(f) = forcing.eval(t_mid) {
            let fn2 = f.norm(LpNorm::Two);
            bound += dt * fn2;
            trace.forcing_l2_sq += dt * fn2 * fn2;
        }
        state = match exact_mass {
            Some(_) => propagate_exact(&state, &propagator, dt, forcing)?,
            None => step_strang_with(&state, &propagator, mass, dt, forcing)?,
        };
        state.time = (step + 1) as f64 * dt;
        if (step + 1) % params.record_every == 0 || step + 1 == steps {
            record(&state, bound, &mut trace)?;
        }
    }
    Ok(trace)
}

/// Ratio diagnostics for the a-priori estimate: for each recorded time,
/// (||u(t)||^2 + ||u_t(t)||^2) divided by the data bracket
/// (1 + ||m||_inf) [ (h^{-2a} + ||m||_inf) ||u0||^2 + ||u1||^2 + ||f||^2_{L2} ].
/// The implied constant is the maximum; it is reported, never asserted
/// against a fixed value.
#[derive(Debug, Clone)]
pub struct AprioriReport {
    pub ratios: Vec<(f64, f64)>,
    pub implied_constant: f64,
    pub rhs_bracket: f64,
}

pub fn apriori_report(trace: &SolutionTrace, mass: &MassField) -> AprioriReport {
    let alpha = trace.order.alpha();
    let initial = &trace.states[0];
    let h = initial.spec().spacing();
    let sup = mass.sup_norm();
    let u0_sq = initial.u.norm(LpNorm::Two).powi(2);
    let u1_sq = initial.du.norm(LpNorm::Two).powi(2);
    let bracket =
        (1.0 + sup) * ((h.powf(-2.0 * alpha) + sup) * u0_sq + u1_sq + trace.forcing_l2_sq);
    let mut ratios = Vec::with_capacity(trace.states.len());
    let mut worst = 0.0f64;
    for s in &trace.states {
        let lhs = s.u.norm(LpNorm::Two).powi(2) + s.du.norm(LpNorm::Two).powi(2);
        let r = if bracket > 0.0 { lhs / bracket } else { 0.0 };
        worst = worst.max(r);
        ratios.push((s.time, r));
    }
    AprioriReport {
        ratios,
        implied_constant: worst,
        rhs_bracket: bracket,
    }
}
