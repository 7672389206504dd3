//! JSON run configurations: parsing, path-addressed validation with error
//! accumulation, default filling, and normalized echoes for the manifest.
//!
//! Validation collects every problem before reporting (an empty `solve`
//! config lists all of its missing fields at once), rejects unknown keys,
//! and enforces the physical ranges: hbar > 0, N even, 0 < alpha <= 1,
//! m >= 0, T > 0, dt > 0.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::CliError;

pub struct Validator {
    errors: Vec<String>,
}

impl Validator {
    pub fn new() -> Self {
        Self { errors: Vec::new() }
    }

    pub fn fail(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(self.errors))
        }
    }

    fn reject_unknown(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.fail(&format!("{path}{key}"), "unknown key");
            }
        }
    }

    fn f64_at(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        match obj.get(key) {
            Some(Value::Number(n)) => n.as_f64(),
            Some(_) => {
                self.fail(&format!("{path}{key}"), "must be a number");
                None
            }
            None => {
                self.fail(&format!("{path}{key}"), "required field missing");
                None
            }
        }
    }

    fn f64_opt(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        match obj.get(key) {
            Some(Value::Number(n)) => n.as_f64(),
            Some(_) => {
                self.fail(&format!("{path}{key}"), "must be a number");
                None
            }
            None => None,
        }
    }

    fn usize_at(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<usize> {
        match obj.get(key) {
            Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64().map(|v| v as usize),
            Some(_) => {
                self.fail(&format!("{path}{key}"), "must be a nonnegative integer");
                None
            }
            None => {
                self.fail(&format!("{path}{key}"), "required field missing");
                None
            }
        }
    }

    fn usize_opt(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<usize> {
        match obj.get(key) {
            Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64().map(|v| v as usize),
            Some(_) => {
                self.fail(&format!("{path}{key}"), "must be a nonnegative integer");
                None
            }
            None => None,
        }
    }

    fn check_alpha(&mut self, path: &str, alpha: Option<f64>) -> Option<f64> {
        let a = alpha?;
        if !(a > 0.0 && a <= 1.0) {
            self.fail(path, format!("must lie in (0, 1], got {a}"));
            return None;
        }
        Some(a)
    }

    fn check_positive(&mut self, path: &str, v: Option<f64>) -> Option<f64> {
        let x = v?;
        if !(x > 0.0) || !x.is_finite() {
            self.fail(path, format!("must be positive and finite, got {x}"));
            return None;
        }
        Some(x)
    }

    fn check_even_points(&mut self, path: &str, v: Option<usize>) -> Option<usize> {
        let n = v?;
        if n < 2 || n % 2 != 0 {
            self.fail(
                path,
                format!("points per axis must be even and >= 2 (Nyquist-symmetric grid), got {n}"),
            );
            return None;
        }
        Some(n)
    }
}

pub fn load_json(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::invalid(format!("config {}: not valid JSON: {e}", path.display()))
    })?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::invalid(format!(
            "config {}: top level must be a JSON object",
            path.display()
        ))),
    }
}

/// Resolve a config-referenced file relative to the config's directory.
pub fn resolve_path(config_path: Option<&Path>, raw: &str) -> PathBuf {
    let p = PathBuf::from(raw);
    if p.is_absolute() {
        return p;
    }
    match config_path.and_then(|c| c.parent()) {
        Some(dir) => dir.join(p),
        None => p,
    }
}

// ---------------------------------------------------------------------------
// coeffs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CoeffsConfig {
    pub alpha: f64,
    pub dim: usize,
    pub radius: usize,
    pub quad_points: usize,
    pub seed: u64,
}

impl CoeffsConfig {
    pub fn echo(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "dim": self.dim,
            "radius": self.radius,
            "quad_points": self.quad_points,
            "seed": self.seed,
        })
    }
}

pub fn validate_coeffs(obj: &Map<String, Value>) -> Result<CoeffsConfig, CliError> {
    let mut v = Validator::new();
    v.reject_unknown(
        obj,
        "",
        &["alpha", "dim", "radius", "quad_points", "seed", "version"],
    );
    let alpha = v.f64_at(obj, "", "alpha");
    let alpha = v.check_alpha("alpha", alpha);
    let dim = v.usize_at(obj, "", "dim").filter(|&d| {
        if d == 0 || d > 3 {
            v.fail("dim", format!("must be 1..=3, got {d}"));
            false
        } else {
            true
        }
    });
    let radius = v.usize_at(obj, "", "radius").filter(|&r| {
        if r == 0 {
            v.fail("radius", "must be >= 1");
            false
        } else {
            true
        }
    });
    let quad_points = v.usize_opt(obj, "", "quad_points");
    if let Some(m) = quad_points {
        if m < 64 || !m.is_power_of_two() {
            v.fail(
                "quad_points",
                format!("must be a power of two >= 64, got {m}"),
            );
        }
    }
    let seed = v.usize_opt(obj, "", "seed").unwrap_or(0) as u64;
    let dim_v = dim.unwrap_or(1);
    let cfg = CoeffsConfig {
        alpha: alpha.unwrap_or(0.5),
        dim: dim_v,
        radius: radius.unwrap_or(1),
        quad_points: quad_points.unwrap_or_else(|| latfkg::default_quad_points(dim_v)),
        seed,
    };
    v.finish()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// symbol-gap
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SymbolGapConfig {
    pub alpha: f64,
    pub hbar: f64,
    pub dim: usize,
    pub points: usize,
    pub seed: u64,
}

impl SymbolGapConfig {
    pub fn echo(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "hbar": self.hbar,
            "n": self.dim,
            "N": self.points,
            "seed": self.seed,
        })
    }
}

pub fn validate_symbol_gap(obj: &Map<String, Value>) -> Result<SymbolGapConfig, CliError> {
    let mut v = Validator::new();
    v.reject_unknown(obj, "", &["alpha", "hbar", "n", "N", "seed", "version"]);
    let alpha = v.f64_at(obj, "", "alpha");
    let alpha = v.check_alpha("alpha", alpha);
    let hbar = v.f64_at(obj, "", "hbar");
    let hbar = v.check_positive("hbar", hbar);
    let dim = v.usize_at(obj, "", "n").filter(|&d| {
        if d == 0 || d > 3 {
            v.fail("n", format!("must be 1..=3, got {d}"));
            false
        } else {
            true
        }
    });
    let points = v.usize_at(obj, "", "N");
    let points = v.check_even_points("N", points);
    let seed = v.usize_opt(obj, "", "seed").unwrap_or(0) as u64;
    let cfg = SymbolGapConfig {
        alpha: alpha.unwrap_or(0.5),
        hbar: hbar.unwrap_or(0.1),
        dim: dim.unwrap_or(1),
        points: points.unwrap_or(64),
        seed,
    };
    v.finish()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// solve / energy shared pieces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum MassConfig {
    Const(f64),
    File(PathBuf),
}

fn validate_mass(
    v: &mut Validator,
    obj: &Map<String, Value>,
    path: &str,
    config_path: Option<&Path>,
) -> Option<(MassConfig, Value)> {
    let raw = match obj.get("mass") {
        Some(m) => m,
        None => {
            v.fail(&format!("{path}mass"), "required field missing");
            return None;
        }
    };
    let m = match raw {
        Value::Object(m) => m,
        _ => {
            v.fail(
                &format!("{path}mass"),
                "must be an object with 'const' or 'file'",
            );
            return None;
        }
    };
    v.reject_unknown(m, &format!("{path}mass."), &["const", "file"]);
    match (m.get("const"), m.get("file")) {
        (Some(Value::Number(c)), None) => {
            let c = c.as_f64().unwrap_or(-1.0);
            if c < 0.0 || !c.is_finite() {
                v.fail(
                    &format!("{path}mass.const"),
                    format!("must be >= 0, got {c}"),
                );
                None
            } else {
                Some((MassConfig::Const(c), raw.clone()))
            }
        }
        (None, Some(Value::String(f))) => {
            Some((MassConfig::File(resolve_path(config_path, f)), raw.clone()))
        }
        _ => {
            v.fail(
                &format!("{path}mass"),
                "must contain exactly one of numeric 'const' or string 'file'",
            );
            None
        }
    }
}

#[derive(Debug, Clone)]
pub enum DataConfig {
    File(PathBuf),
    Gaussian {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
    Planewave {
        mode: Vec<i64>,
    },
    Random {
        scale: f64,
    },
    Zero,
}

fn validate_data(
    v: &mut Validator,
    obj: &Map<String, Value>,
    key: &str,
    dim: usize,
    config_path: Option<&Path>,
) -> Option<(DataConfig, Value)> {
    let raw = match obj.get(key) {
        Some(r) => r,
        None => {
            v.fail(key, "required field missing");
            return None;
        }
    };
    let m = match raw {
        Value::String(s) if s == "zero" => return Some((DataConfig::Zero, raw.clone())),
        Value::Object(m) => m,
        _ => {
            v.fail(
                key,
                "must be \"zero\" or an object with 'file' or 'builtin'",
            );
            return None;
        }
    };
    v.reject_unknown(m, &format!("{key}."), &["file", "builtin"]);
    match (m.get("file"), m.get("builtin")) {
        (Some(Value::String(f)), None) => {
            Some((DataConfig::File(resolve_path(config_path, f)), raw.clone()))
        }
        (None, Some(Value::Object(b))) => {
            v.reject_unknown(
                b,
                &format!("{key}.builtin."),
                &["gaussian", "planewave", "random"],
            );
            if b.len() != 1 {
                v.fail(
                    &format!("{key}.builtin"),
                    "must contain exactly one of 'gaussian', 'planewave', 'random'",
                );
                return None;
            }
            if let Some(Value::Object(g)) = b.get("gaussian") {
                v.reject_unknown(
                    g,
                    &format!("{key}.builtin.gaussian."),
                    &["amplitude", "width", "center"],
                );
                let amplitude = v
                    .f64_opt(g, &format!("{key}.builtin.gaussian."), "amplitude")
                    .unwrap_or(1.0);
                let width = v
                    .f64_opt(g, &format!("{key}.builtin.gaussian."), "width")
                    .unwrap_or(1.0);
                if !(width > 0.0) {
                    v.fail(&format!("{key}.builtin.gaussian.width"), "must be positive");
                }
                let center = match g.get("center") {
                    None => vec![0.0; dim],
                    Some(Value::Array(a)) if a.len() == dim => {
                        a.iter().map(|x| x.as_f64().unwrap_or(0.0)).collect()
                    }
                    Some(_) => {
                        v.fail(
                            &format!("{key}.builtin.gaussian.center"),
                            format!("must be an array of {dim} numbers"),
                        );
                        vec![0.0; dim]
                    }
                };
                return Some((
                    DataConfig::Gaussian {
                        amplitude,
                        width,
                        center,
                    },
                    raw.clone(),
                ));
            }
            if let Some(Value::Object(p)) = b.get("planewave") {
                v.reject_unknown(p, &format!("{key}.builtin.planewave."), &["mode"]);
                let mode = match p.get("mode") {
                    Some(Value::Array(a)) if a.len() == dim => {
                        a.iter().map(|x| x.as_i64().unwrap_or(0)).collect()
                    }
                    _ => {
                        v.fail(
                            &format!("{key}.builtin.planewave.mode"),
                            format!("must be an array of {dim} integers"),
                        );
                        vec![0; dim]
                    }
                };
                return Some((DataConfig::Planewave { mode }, raw.clone()));
            }
            if let Some(Value::Object(r)) = b.get("random") {
                v.reject_unknown(r, &format!("{key}.builtin.random."), &["scale"]);
                let scale = v
                    .f64_opt(r, &format!("{key}.builtin.random."), "scale")
                    .unwrap_or(1.0);
                return Some((DataConfig::Random { scale }, raw.clone()));
            }
            v.fail(&format!("{key}.builtin"), "builtin entry must be an object");
            None
        }
        _ => {
            v.fail(key, "must contain exactly one of 'file' or 'builtin'");
            None
        }
    }
}

#[derive(Debug, Clone)]
pub enum ForcingConfig {
    Zero,
    File(PathBuf),
}

fn validate_forcing(
    v: &mut Validator,
    obj: &Map<String, Value>,
    config_path: Option<&Path>,
) -> (ForcingConfig, Value) {
    match obj.get("forcing") {
        None => (ForcingConfig::Zero, json!("zero")),
        Some(Value::String(s)) if s == "zero" => (ForcingConfig::Zero, json!("zero")),
        Some(raw @ Value::Object(m)) => {
            v.reject_unknown(m, "forcing.", &["file"]);
            match m.get("file") {
                Some(Value::String(f)) => (
                    ForcingConfig::File(resolve_path(config_path, f)),
                    raw.clone(),
                ),
                _ => {
                    v.fail("forcing.file", "required string field");
                    (ForcingConfig::Zero, json!("zero"))
                }
            }
        }
        Some(_) => {
            v.fail("forcing", "must be \"zero\" or {\"file\": ...}");
            (ForcingConfig::Zero, json!("zero"))
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub dim: usize,
    pub points: usize,
    pub hbar: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    pub mass: MassConfig,
    pub forcing: ForcingConfig,
    pub u0: DataConfig,
    pub u1: DataConfig,
    pub seed: u64,
    pub echo: Value,
}

pub fn validate_solve(
    obj: &Map<String, Value>,
    config_path: Option<&Path>,
) -> Result<SolveConfig, CliError> {
    let mut v = Validator::new();
    v.reject_unknown(
        obj,
        "",
        &[
            "n",
            "N",
            "hbar",
            "alpha",
            "T",
            "dt",
            "record_every",
            "mass",
            "forcing",
            "u0",
            "u1",
            "seed",
            "version",
        ],
    );
    let dim = v.usize_at(obj, "", "n").filter(|&d| {
        if d == 0 || d > 3 {
            v.fail("n", format!("must be 1..=3, got {d}"));
            false
        } else {
            true
        }
    });
    let points = v.usize_at(obj, "", "N");
    let points = v.check_even_points("N", points);
    let hbar = v.f64_at(obj, "", "hbar");
    let hbar = v.check_positive("hbar", hbar);
    let alpha = v.f64_at(obj, "", "alpha");
    let alpha = v.check_alpha("alpha", alpha);
    let t_end = v.f64_at(obj, "", "T");
    let t_end = v.check_positive("T", t_end);
    let dt = v.f64_opt(obj, "", "dt");
    if let Some(d) = dt {
        if !(d > 0.0) || !d.is_finite() {
            v.fail("dt", format!("must be positive, got {d}"));
        }
    }
    let record_every = v.usize_opt(obj, "", "record_every");
    if record_every == Some(0) {
        v.fail("record_every", "must be >= 1");
    }
    let dim_v = dim.unwrap_or(1);
    let mass = validate_mass(&mut v, obj, "", config_path);
    let forcing = validate_forcing(&mut v, obj, config_path);
    let u0 = validate_data(&mut v, obj, "u0", dim_v, config_path);
    let u1 = validate_data(&mut v, obj, "u1", dim_v, config_path);
    let seed = v.usize_opt(obj, "", "seed").unwrap_or(0) as u64;

    let t_v = t_end.unwrap_or(1.0);
    let dt_v = dt.unwrap_or(t_v / 1024.0);
    let record_v = record_every.unwrap_or(16);
    let steps = (t_v / dt_v).round();
    if steps < 1.0 || (steps * dt_v - t_v).abs() > 1e-9 * t_v.max(1.0) {
        v.fail(
            "dt",
            format!("must divide T within round-off ({dt_v} vs T = {t_v})"),
        );
    }

    let (mass_cfg, mass_echo) = match mass {
        Some((m, e)) => (m, e),
        None => (MassConfig::Const(0.0), json!(null)),
    };
    let (forcing_cfg, forcing_echo) = forcing;
    let (u0_cfg, u0_echo) = match u0 {
        Some(x) => x,
        None => (DataConfig::Zero, json!(null)),
    };
    let (u1_cfg, u1_echo) = match u1 {
        Some(x) => x,
        None => (DataConfig::Zero, json!(null)),
    };
    let echo = json!({
        "n": dim_v,
        "N": points.unwrap_or(0),
        "hbar": hbar.unwrap_or(0.0),
        "alpha": alpha.unwrap_or(0.0),
        "T": t_v,
        "dt": dt_v,
        "record_every": record_v,
        "mass": mass_echo,
        "forcing": forcing_echo,
        "u0": u0_echo,
        "u1": u1_echo,
        "seed": seed,
    });
    let cfg = SolveConfig {
        dim: dim_v,
        points: points.unwrap_or(2),
        hbar: hbar.unwrap_or(1.0),
        alpha: alpha.unwrap_or(0.5),
        t_end: t_v,
        dt: dt_v,
        record_every: record_v,
        mass: mass_cfg,
        forcing: forcing_cfg,
        u0: u0_cfg,
        u1: u1_cfg,
        seed,
        echo,
    };
    v.finish()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EnergyConfig {
    pub dim: usize,
    pub points: usize,
    pub hbar: f64,
    pub alpha: f64,
    pub mass: MassConfig,
    pub u_file: PathBuf,
    pub du_file: PathBuf,
    pub seed: u64,
    pub echo: Value,
}

pub fn validate_energy(
    obj: &Map<String, Value>,
    config_path: Option<&Path>,
) -> Result<EnergyConfig, CliError> {
    let mut v = Validator::new();
    v.reject_unknown(
        obj,
        "",
        &[
            "n", "N", "hbar", "alpha", "mass", "u", "du", "seed", "version",
        ],
    );
    let dim = v.usize_at(obj, "", "n").filter(|&d| d >= 1 && d <= 3);
    let points = v.usize_at(obj, "", "N");
    let points = v.check_even_points("N", points);
    let hbar = v.f64_at(obj, "", "hbar");
    let hbar = v.check_positive("hbar", hbar);
    let alpha = v.f64_at(obj, "", "alpha");
    let alpha = v.check_alpha("alpha", alpha);
    let mass = validate_mass(&mut v, obj, "", config_path);
    let file_at = |v: &mut Validator, key: &str| -> Option<PathBuf> {
        match obj.get(key) {
            Some(Value::Object(m)) => match m.get("file") {
                Some(Value::String(f)) => Some(resolve_path(config_path, f)),
                _ => {
                    v.fail(&format!("{key}.file"), "required string field");
                    None
                }
            },
            _ => {
                v.fail(key, "required object with 'file'");
                None
            }
        }
    };
    let u_file = file_at(&mut v, "u");
    let du_file = file_at(&mut v, "du");
    let seed = v.usize_opt(obj, "", "seed").unwrap_or(0) as u64;
    let (mass_cfg, mass_echo) = match mass {
        Some(x) => x,
        None => (MassConfig::Const(0.0), json!(null)),
    };
    let echo = json!({
        "n": dim.unwrap_or(1),
        "N": points.unwrap_or(0),
        "hbar": hbar.unwrap_or(0.0),
        "alpha": alpha.unwrap_or(0.0),
        "mass": mass_echo,
        "u": obj.get("u").cloned().unwrap_or(json!(null)),
        "du": obj.get("du").cloned().unwrap_or(json!(null)),
        "seed": seed,
    });
    let cfg = EnergyConfig {
        dim: dim.unwrap_or(1),
        points: points.unwrap_or(2),
        hbar: hbar.unwrap_or(1.0),
        alpha: alpha.unwrap_or(0.5),
        mass: mass_cfg,
        u_file: u_file.unwrap_or_default(),
        du_file: du_file.unwrap_or_default(),
        seed,
        echo,
    };
    v.finish()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum ProfileConfig {
    Gaussian {
        cutoff: f64,
        xi_points: usize,
        width0: f64,
        amp0: f64,
        width1: f64,
        amp1: f64,
        commensurate: bool,
    },
    SingleCell {
        cutoff: f64,
        xi_points: usize,
        amp0: f64,
        amp1: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum SweepMode {
    Exact,
    SelfReference,
}

#[derive(Debug, Clone)]
pub struct MassFnConfig {
    pub base: f64,
    pub bump_amplitude: f64,
    pub bump_width: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergeConfig {
    pub alpha: f64,
    pub dim: usize,
    pub mass_const: f64,
    pub t_end: f64,
    pub box_len: f64,
    pub hbar_list: Vec<f64>,
    pub profile: ProfileConfig,
    pub mode: SweepMode,
    pub steps: Option<usize>,
    pub mass_function: Option<MassFnConfig>,
    pub seed: u64,
    pub echo: Value,
}

pub fn validate_converge(obj: &Map<String, Value>) -> Result<ConvergeConfig, CliError> {
    let mut v = Validator::new();
    v.reject_unknown(
        obj,
        "",
        &[
            "alpha",
            "n",
            "mass_const",
            "T",
            "box_physical",
            "hbar_list",
            "profile",
            "mode",
            "steps",
            "mass_function",
            "seed",
            "version",
        ],
    );
    let alpha = v.f64_at(obj, "", "alpha");
    let alpha = v.check_alpha("alpha", alpha);
    let dim = v.usize_at(obj, "", "n").filter(|&d| {
        if d == 0 || d > 2 {
            v.fail("n", format!("sweeps support n in 1..=2, got {d}"));
            false
        } else {
            true
        }
    });
    let mass_const = v.f64_at(obj, "", "mass_const");
    if let Some(m) = mass_const {
        if m < 0.0 || !m.is_finite() {
            v.fail("mass_const", format!("must be >= 0, got {m}"));
        }
    }
    let t_end = v.f64_at(obj, "", "T");
    let t_end = v.check_positive("T", t_end);
    let box_len = v.f64_at(obj, "", "box_physical");
    let box_len = v.check_positive("box_physical", box_len);
    let hbar_list: Vec<f64> = match obj.get("hbar_list") {
        Some(Value::Array(a)) if a.len() >= 2 => {
            let mut out = Vec::new();
            for (i, x) in a.iter().enumerate() {
                match x.as_f64() {
                    Some(h) if h > 0.0 => out.push(h),
                    _ => v.fail(&format!("hbar_list[{i}]"), "must be a positive number"),
                }
            }
            out
        }
        Some(_) | None => {
            v.fail(
                "hbar_list",
                "required array of at least two positive numbers",
            );
            Vec::new()
        }
    };
    for w in hbar_list.windows(2) {
        if w[1] >= w[0] {
            v.fail("hbar_list", "must be strictly decreasing");
            break;
        }
    }
    let mode = match obj.get("mode") {
        None => SweepMode::Exact,
        Some(Value::String(s)) if s == "exact" => SweepMode::Exact,
        Some(Value::String(s)) if s == "self" => SweepMode::SelfReference,
        Some(_) => {
            v.fail("mode", "must be \"exact\" or \"self\"");
            SweepMode::Exact
        }
    };
    let steps = v.usize_opt(obj, "", "steps");
    if steps == Some(0) {
        v.fail("steps", "must be >= 1");
    }
    let profile = match obj.get("profile") {
        Some(Value::Object(p)) => {
            v.reject_unknown(
                p,
                "profile.",
                &[
                    "kind",
                    "cutoff",
                    "xi_points",
                    "width0",
                    "amp0",
                    "width1",
                    "amp1",
                    "commensurate",
                ],
            );
            let cutoff = v.f64_at(p, "profile.", "cutoff");
            let cutoff = v.check_positive("profile.cutoff", cutoff).unwrap_or(1.0);
            let xi_points = v.usize_opt(p, "profile.", "xi_points").unwrap_or(256);
            if xi_points < 2 || xi_points % 2 != 0 {
                v.fail(
                    "profile.xi_points",
                    format!("must be even and >= 2, got {xi_points}"),
                );
            }
            match p.get("kind") {
                Some(Value::String(k)) if k == "gaussian" => Some(ProfileConfig::Gaussian {
                    cutoff,
                    xi_points,
                    width0: v.f64_opt(p, "profile.", "width0").unwrap_or(0.35),
                    amp0: v.f64_opt(p, "profile.", "amp0").unwrap_or(1.0),
                    width1: v.f64_opt(p, "profile.", "width1").unwrap_or(0.28),
                    amp1: v.f64_opt(p, "profile.", "amp1").unwrap_or(0.6),
                    commensurate: p
                        .get("commensurate")
                        .and_then(Value::as_bool)
                        .unwrap_or(true),
                }),
                Some(Value::String(k)) if k == "single_cell" => Some(ProfileConfig::SingleCell {
                    cutoff,
                    xi_points,
                    amp0: v.f64_opt(p, "profile.", "amp0").unwrap_or(1.0),
                    amp1: v.f64_opt(p, "profile.", "amp1").unwrap_or(0.0),
                }),
                _ => {
                    v.fail("profile.kind", "must be \"gaussian\" or \"single_cell\"");
                    None
                }
            }
        }
        _ => {
            v.fail("profile", "required object");
            None
        }
    };
    let mass_function = match obj.get("mass_function") {
        None => None,
        Some(Value::Object(m)) => {
            v.reject_unknown(
                m,
                "mass_function.",
                &["base", "bump_amplitude", "bump_width"],
            );
            let base = v.f64_opt(m, "mass_function.", "base").unwrap_or(1.0);
            let amp = v
                .f64_opt(m, "mass_function.", "bump_amplitude")
                .unwrap_or(1.0);
            let width = v.f64_opt(m, "mass_function.", "bump_width").unwrap_or(1.0);
            if base < 0.0 || base + amp < 0.0 {
                v.fail("mass_function", "mass must stay nonnegative");
            }
            if !(width > 0.0) {
                v.fail("mass_function.bump_width", "must be positive");
            }
            Some(MassFnConfig {
                base,
                bump_amplitude: amp,
                bump_width: width,
            })
        }
        Some(_) => {
            v.fail("mass_function", "must be an object");
            None
        }
    };
    if matches!(mode, SweepMode::SelfReference) && mass_function.is_none() {
        v.fail("mass_function", "required in \"self\" mode");
    }
    let seed = v.usize_opt(obj, "", "seed").unwrap_or(0) as u64;
    let echo = {
        let mut e = obj.clone();
        e.insert("seed".into(), json!(seed));
        if !e.contains_key("mode") {
            e.insert("mode".into(), json!("exact"));
        }
        Value::Object(e)
    };
    let cfg = ConvergeConfig {
        alpha: alpha.unwrap_or(0.5),
        dim: dim.unwrap_or(1),
        mass_const: mass_const.unwrap_or(0.0),
        t_end: t_end.unwrap_or(1.0),
        box_len: box_len.unwrap_or(16.0),
        hbar_list,
        profile: profile.unwrap_or(ProfileConfig::SingleCell {
            cutoff: 1.0,
            xi_points: 16,
            amp0: 0.0,
            amp1: 0.0,
        }),
        mode,
        steps,
        mass_function,
        seed,
        echo,
    };
    v.finish()?;
    Ok(cfg)
}
