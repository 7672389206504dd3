//! Finite periodic truncation of the scaled lattice hZ^n and its Fourier pair.
//!
//! Sites per axis are k = h*j with j in {-N/2, ..., N/2-1}; the dual grid is
//! theta_m = m/(N*h) with m in the same signed range, inside the torus cell
//! [-1/(2h), 1/(2h)). The transform pair carries the h^{n/2} normalization
//!
//!   uhat(theta) = h^{n/2} sum_k u(k) e^{-2 pi i k.theta}
//!   u(k)        = h^{n/2} (N h)^{-n} sum_m uhat(theta_m) e^{2 pi i k.theta_m}
//!
//! so the discrete Plancherel identity
//!
//!   (N h)^{-n} sum_m |uhat(theta_m)|^2 = sum_j |u(h j)|^2
//!
//! holds exactly in exact arithmetic, not merely to truncation order. Norms
//! and inner products are plain unweighted site sums (no h^n measure factor).
//!
//! Storage is axis-major (axis 0 slowest), indices in signed order at all API
//! boundaries; FFT wrapping is internal.

use std::io::{BufRead, Write};
use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Geometry of the periodic box: dimension, spacing h, even points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    dim: usize,
    spacing: f64,
    points_per_axis: usize,
}

impl LatticeSpec {
    pub fn new(dim: usize, spacing: f64, points_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be >= 1".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "spacing must be a positive finite real, got {spacing}"
            )));
        }
        if points_per_axis < 2 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "points per axis must be even and >= 2, got {points_per_axis}"
            )));
        }
        let mut total: usize = 1;
        for _ in 0..dim {
            total = total.checked_mul(points_per_axis).ok_or_else(|| {
                Error::InvalidLattice(format!("site count {points_per_axis}^{dim} overflows"))
            })?;
        }
        if total > 1 << 28 {
            return Err(Error::InvalidLattice(format!(
                "site count {total} exceeds the supported budget"
            )));
        }
        Ok(Self {
            dim,
            spacing,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The semiclassical parameter h (lattice spacing).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Total number of sites N^n.
    pub fn site_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Dual grid step 1/(N h).
    pub fn dual_step(&self) -> f64 {
        1.0 / (self.points_per_axis as f64 * self.spacing)
    }

    /// Half width of the dual torus cell, 1/(2h).
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing
    }

    /// Signed index range per axis: -N/2 ..= N/2 - 1.
    pub fn signed_range(&self) -> std::ops::Range<i64> {
        let half = self.points_per_axis as i64 / 2;
        -half..half
    }

    /// Flat (axis-major) index of a signed multi-index.
    pub fn flat_index(&self, signed: &[i64]) -> usize {
        debug_assert_eq!(signed.len(), self.dim);
        let n = self.points_per_axis as i64;
        let half = n / 2;
        let mut flat = 0usize;
        for &s in signed {
            debug_assert!(s >= -half && s < half);
            flat = flat * self.points_per_axis + (s + half) as usize;
        }
        flat
    }

    /// Signed multi-index of a flat index.
    pub fn signed_index(&self, mut flat: usize, out: &mut [i64]) {
        let half = self.points_per_axis as i64 / 2;
        for axis in (0..self.dim).rev() {
            out[axis] = (flat % self.points_per_axis) as i64 - half;
            flat /= self.points_per_axis;
        }
    }

    /// Physical coordinates k = h*j of a signed multi-index.
    pub fn site_coords(&self, signed: &[i64], out: &mut [f64]) {
        for (o, &s) in out.iter_mut().zip(signed) {
            *o = self.spacing * s as f64;
        }
    }

    /// Dual coordinates theta_m = m/(N h) of a signed multi-index.
    pub fn dual_coords(&self, signed: &[i64], out: &mut [f64]) {
        let step = self.dual_step();
        for (o, &s) in out.iter_mut().zip(signed) {
            *o = step * s as f64;
        }
    }

    /// Visit every site: flat index, signed multi-index, physical coords.
    pub fn for_each_site(&self, mut f: impl FnMut(usize, &[i64], &[f64])) {
        let mut signed = vec![0i64; self.dim];
        let mut coords = vec![0.0; self.dim];
        for flat in 0..self.site_count() {
            self.signed_index(flat, &mut signed);
            self.site_coords(&signed, &mut coords);
            f(flat, &signed, &coords);
        }
    }

    /// Visit every dual point: flat index, signed multi-index, theta coords.
    pub fn for_each_dual(&self, mut f: impl FnMut(usize, &[i64], &[f64])) {
        let mut signed = vec![0i64; self.dim];
        let mut theta = vec![0.0; self.dim];
        for flat in 0..self.site_count() {
            self.signed_index(flat, &mut signed);
            self.dual_coords(&signed, &mut theta);
            f(flat, &signed, &theta);
        }
    }
}

impl std::fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hZ^{} (h = {}, N = {})",
            self.dim, self.spacing, self.points_per_axis
        )
    }
}

/// Which lp norm a site sum takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpNorm {
    One,
    Two,
    Sup,
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    Ok(())
}

/// Complex field on the lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: LatticeSpec,
    values: Vec<Complex64>,
}

/// Complex field on the dual grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    spec: LatticeSpec,
    values: Vec<Complex64>,
}

macro_rules! field_common {
    ($ty:ident) => {
        impl $ty {
            pub fn from_values(spec: LatticeSpec, values: Vec<Complex64>) -> Result<Self> {
                if values.len() != spec.site_count() {
                    return Err(Error::InvalidLattice(format!(
                        "value count {} does not match {} sites of {}",
                        values.len(),
                        spec.site_count(),
                        spec
                    )));
                }
                check_finite(&values)?;
                Ok(Self { spec, values })
            }

            pub fn zeros(spec: LatticeSpec) -> Self {
                Self {
                    spec,
                    values: vec![Complex64::ZERO; spec.site_count()],
                }
            }

            pub fn spec(&self) -> &LatticeSpec {
                &self.spec
            }

            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [Complex64] {
                &mut self.values
            }

            /// In-place self += scale * other.
            pub fn add_scaled(&mut self, other: &Self, scale: Complex64) -> Result<()> {
                same_spec(&self.spec, &other.spec, "add_scaled")?;
                for (a, b) in self.values.iter_mut().zip(&other.values) {
                    *a += scale * b;
                }
                Ok(())
            }

            pub fn scale(&mut self, factor: Complex64) {
                for v in &mut self.values {
                    *v *= factor;
                }
            }
        }
    };
}

field_common!(GridFunction);
field_common!(SpectralFunction);

pub(crate) fn same_spec(a: &LatticeSpec, b: &LatticeSpec, context: &str) -> Result<()> {
    if a != b {
        return Err(Error::SpecMismatch {
            context: format!("{context}: {a} vs {b}"),
        });
    }
    Ok(())
}

impl GridFunction {
    /// Field built from a closure of the physical coordinates.
    pub fn from_fn(spec: LatticeSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let mut values = vec![Complex64::ZERO; spec.site_count()];
        spec.for_each_site(|flat, _signed, coords| values[flat] = f(coords));
        Self { spec, values }
    }

    pub fn constant(spec: LatticeSpec, c: Complex64) -> Self {
        Self {
            spec,
            values: vec![c; spec.site_count()],
        }
    }

    /// Kronecker delta at k = 0.
    pub fn delta_at_origin(spec: LatticeSpec) -> Self {
        let mut g = Self::zeros(spec);
        let zero = vec![0i64; spec.dim()];
        let idx = spec.flat_index(&zero);
        g.values[idx] = Complex64::ONE;
        g
    }

    /// Plane wave e^{2 pi i k.theta_m} for a dual-grid multi-index m.
    pub fn plane_wave(spec: LatticeSpec, mode: &[i64]) -> Self {
        assert_eq!(mode.len(), spec.dim());
        let n = spec.points_per_axis() as f64;
        Self::from_fn_indexed(spec, |signed| {
            let phase: f64 = signed
                .iter()
                .zip(mode)
                .map(|(&j, &m)| j as f64 * m as f64 / n)
                .sum();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
        })
    }

    /// Field built from a closure of the signed integer multi-index.
    pub fn from_fn_indexed(spec: LatticeSpec, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let mut values = vec![Complex64::ZERO; spec.site_count()];
        spec.for_each_site(|flat, signed, _| values[flat] = f(signed));
        Self { spec, values }
    }

    /// Unweighted lp norm over sites, exactly as defined on the lattice.
    pub fn norm(&self, p: LpNorm) -> f64 {
        match p {
            LpNorm::One => self.values.iter().map(|v| v.norm()).sum(),
            LpNorm::Two => self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            LpNorm::Sup => self.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Forward transform: uhat(theta_m) = h^{n/2} sum_j u(h j) e^{-2 pi i j.m/N}.
    pub fn forward_transform(&self) -> SpectralFunction {
        let scale = self.spec.spacing().powf(self.spec.dim() as f64 / 2.0);
        let mut values = self.values.clone();
        dft_signed(&self.spec, &mut values, Direction::Forward);
        for v in &mut values {
            *v *= scale;
        }
        SpectralFunction {
            spec: self.spec,
            values,
        }
    }

    /// (u, v) = sum_k u(k) conj(v(k)).
    pub fn inner_product(&self, other: &GridFunction) -> Result<Complex64> {
        same_spec(&self.spec, &other.spec, "inner_product")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum())
    }
}

impl SpectralFunction {
    /// Inverse transform: u(h j) = h^{n/2} (N h)^{-n} sum_m v(theta_m) e^{2 pi i j.m/N}.
    pub fn inverse_transform(&self) -> GridFunction {
        let n = self.spec.dim() as f64;
        let h = self.spec.spacing();
        let npts = self.spec.points_per_axis() as f64;
        // h^{n/2} (N h)^{-n} = h^{-n/2} N^{-n}
        let scale = h.powf(-n / 2.0) * npts.powi(-(self.spec.dim() as i32));
        let mut values = self.values.clone();
        dft_signed(&self.spec, &mut values, Direction::Inverse);
        for v in &mut values {
            *v *= scale;
        }
        GridFunction {
            spec: self.spec,
            values,
        }
    }

    /// L^2(T_h^n) pairing as the exact Riemann sum (N h)^{-n} sum_m a conj(b).
    pub fn dual_inner_product(&self, other: &SpectralFunction) -> Result<Complex64> {
        same_spec(&self.spec, &other.spec, "dual_inner_product")?;
        let w = (self.spec.points_per_axis() as f64 * self.spec.spacing())
            .powi(-(self.spec.dim() as i32));
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * w)
    }

    /// Multiply pointwise by a real multiplier over the dual grid.
    pub fn apply_multiplier(&mut self, multiplier: &[f64]) {
        debug_assert_eq!(multiplier.len(), self.values.len());
        for (v, &m) in self.values.iter_mut().zip(multiplier) {
            *v *= m;
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Direction {
    Forward,
    Inverse,
}

// rustfft plans are immutable and shareable; cache them per (length, direction).
static PLAN_CACHE: Mutex<Option<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = Mutex::new(None);

fn plan_for(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let key = (len, matches!(dir, Direction::Forward));
    let mut guard = PLAN_CACHE.lock().unwrap();
    let cache = guard.get_or_insert_with(HashMap::new);
    cache
        .entry(key)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            match dir {
                Direction::Forward => planner.plan_fft_forward(len),
                Direction::Inverse => planner.plan_fft_inverse(len),
            }
        })
        .clone()
}

/// Unnormalized n-dimensional DFT in signed index order, in place.
///
/// Signed order differs from FFT order by an index rotation of N/2 per axis
/// (exact because e^{-2 pi i j m / N} only depends on j, m mod N), so no
/// phase factors are needed: rotate in, transform each axis, rotate out.
fn dft_signed(spec: &LatticeSpec, values: &mut [Complex64], dir: Direction) {
    let n = spec.points_per_axis();
    let dim = spec.dim();
    let plan = plan_for(n, dir);
    let mut scratch = vec![Complex64::ZERO; plan.get_inplace_scratch_len()];
    let mut line = vec![Complex64::ZERO; n];

    rotate_all_axes(values, n, dim);
    // Transform along each axis; lines along `axis` have stride N^(dim-1-axis).
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        let nblocks = values.len() / block;
        for b in 0..nblocks {
            for offset in 0..stride {
                let base = b * block + offset;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + i * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (i, slot) in line.iter().enumerate() {
                    values[base + i * stride] = *slot;
                }
            }
        }
    }
    rotate_all_axes(values, n, dim);
}

/// Rotate every axis by N/2 (its own inverse for even N).
fn rotate_all_axes(values: &mut [Complex64], n: usize, dim: usize) {
    let half = n / 2;
    let mut tmp = vec![Complex64::ZERO; values.len()];
    for (flat, v) in values.iter().enumerate() {
        let mut rest = flat;
        let mut target = 0usize;
        for axis in (0..dim).rev() {
            let idx = rest % n;
            rest /= n;
            let rotated = (idx + half) % n;
            target += rotated * n.pow((dim - 1 - axis) as u32);
        }
        tmp[target] = *v;
    }
    values.copy_from_slice(&tmp);
}

// ---------------------------------------------------------------------------
// CSV serialization: header "index_0,...,index_{n-1},re,im", one row per site,
// signed indices in axis-major order.
// ---------------------------------------------------------------------------

/// 17 significant digits: round-trips every f64 bit-exactly.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl GridFunction {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.spec.dim();
        let mut header = String::new();
        for axis in 0..dim {
            header.push_str(&format!("index_{axis},"));
        }
        header.push_str("re,im\n");
        w.write_all(header.as_bytes())?;
        let mut signed = vec![0i64; dim];
        for (flat, v) in self.values.iter().enumerate() {
            self.spec.signed_index(flat, &mut signed);
            let mut row = String::new();
            for s in &signed {
                row.push_str(&format!("{s},"));
            }
            row.push_str(&format_f64(v.re));
            row.push(',');
            row.push_str(&format_f64(v.im));
            row.push('\n');
            w.write_all(row.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(spec: LatticeSpec, r: R) -> Result<Self> {
        let dim = spec.dim();
        let mut values = vec![Complex64::ZERO; spec.site_count()];
        let mut seen = vec![false; spec.site_count()];
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let expected_header: String = (0..dim)
            .map(|a| format!("index_{a},"))
            .chain(std::iter::once("re,im".to_string()))
            .collect();
        if header.trim() != expected_header {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("expected header '{expected_header}', got '{header}'"),
            });
        }
        let half = spec.points_per_axis() as i64 / 2;
        let mut signed = vec![0i64; dim];
        for (lineno, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.trim().split(',').collect();
            if parts.len() != dim + 2 {
                return Err(Error::CsvParse {
                    line: lineno + 1,
                    message: format!("expected {} fields, got {}", dim + 2, parts.len()),
                });
            }
            for (axis, p) in parts[..dim].iter().enumerate() {
                let idx: i64 = p.parse().map_err(|e| Error::CsvParse {
                    line: lineno + 1,
                    message: format!("bad index: {e}"),
                })?;
                if idx < -half || idx >= half {
                    return Err(Error::CsvParse {
                        line: lineno + 1,
                        message: format!("index {idx} out of range [{}, {})", -half, half),
                    });
                }
                signed[axis] = idx;
            }
            let re: f64 = parts[dim].parse().map_err(|e| Error::CsvParse {
                line: lineno + 1,
                message: format!("bad re: {e}"),
            })?;
            let im: f64 = parts[dim + 1].parse().map_err(|e| Error::CsvParse {
                line: lineno + 1,
                message: format!("bad im: {e}"),
            })?;
            let flat = spec.flat_index(&signed);
            values[flat] = Complex64::new(re, im);
            seen[flat] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let mut idx = vec![0i64; dim];
            spec.signed_index(missing, &mut idx);
            return Err(Error::CsvParse {
                line: 0,
                message: format!("site {idx:?} missing from file"),
            });
        }
        GridFunction::from_values(spec, values)
    }
}
