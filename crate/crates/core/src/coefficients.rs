//! Fractional centered-difference weights a_j.
//!
//! The generating symbol on the unit frequency cell is
//! [sum_i 4 sin^2(pi theta_i)]^alpha, and
//!
//!   a_j = int_{[-1/2,1/2]^n} [sum_i 4 sin^2(pi theta_i)]^alpha cos(2 pi j.theta) dtheta.
//!
//! Two independent evaluation routes are kept deliberately separate:
//!
//! - periodic trapezoid quadrature with a Richardson step (the integrand is
//!   C^{0,2alpha} at theta = 0, so plain trapezoid converges like
//!   M^{-(1+2alpha)}; extrapolating with that known exponent removes the
//!   leading term);
//! - in one dimension, the Gamma-ratio closed form
//!   a_j = (-1)^j Gamma(2a+1) / (Gamma(a-j+1) Gamma(a+j+1)),
//!   evaluated through signed log-Gamma with reflection, with denominator
//!   poles mapped to exact zeros (integer alpha, |j| > alpha).
//!
//! For alpha = 1 the stencil degenerates to the classical discrete Laplacian
//! (2n at the center, -1 at nearest neighbors, 0 elsewhere).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, ln_gamma_signed};

/// Fractional exponent alpha in (0, 1]. alpha = 1 is admitted as the
/// classical-Laplacian degeneration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidValue {
                name: "alpha",
                message: format!("must lie in (0, 1], got {alpha}"),
            });
        }
        Ok(Self(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.0
    }
}

/// One quadrature result: the plain trapezoid value at the requested
/// resolution, the Richardson-extrapolated value, and the self-convergence
/// estimate |value(M) - value(M/2)|.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureValue {
    pub value: f64,
    pub refined: f64,
    pub error_estimate: f64,
}

/// Default quadrature resolution per axis for each dimension.
pub fn default_quad_points(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2 => 512,
        _ => 128,
    }
}

fn check_quad_points(m: usize) -> Result<()> {
    if m < 64 || !m.is_power_of_two() {
        return Err(Error::QuadPoints { got: m });
    }
    Ok(())
}

/// theta grid of the unit cell, -1/2 + p/M.
fn unit_cell(m: usize) -> Vec<f64> {
    (0..m).map(|p| -0.5 + p as f64 / m as f64).collect()
}

/// Plain tensor-trapezoid value of a_j at resolution M per axis.
///
/// The integrand is 1-periodic, so the trapezoid rule is the uniform mean
/// over M points per axis. Evenness of the symbol in every axis lets the
/// oscillating factor be taken as a product of cosines, which keeps the
/// result exactly real and exactly symmetric under j -> -j.
fn trapezoid_single(order: FractionalOrder, dim: usize, j: &[i64], m: usize) -> f64 {
    let alpha = order.alpha();
    let theta = unit_cell(m);
    let s: Vec<f64> = theta
        .iter()
        .map(|&t| 4.0 * (std::f64::consts::PI * t).sin().powi(2))
        .collect();
    let cos_tables: Vec<Vec<f64>> = j
        .iter()
        .map(|&ji| {
            theta
                .iter()
                .map(|&t| (2.0 * std::f64::consts::PI * ji as f64 * t).cos())
                .collect()
        })
        .collect();
    let mut acc = 0.0;
    let mut idx = vec![0usize; dim];
    loop {
        let base: f64 = idx.iter().map(|&p| s[p]).sum();
        let mut w = base.powf(alpha);
        for (axis, &p) in idx.iter().enumerate() {
            w *= cos_tables[axis][p];
        }
        acc += w;
        // odometer
        let mut axis = dim;
        loop {
            if axis == 0 {
                return acc / (m as f64).powi(dim as i32);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < m {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Quadrature value of a single coefficient with Richardson refinement.
///
/// `quad_points` must be a power of two >= 64.
pub fn coeff_quadrature(
    order: FractionalOrder,
    dim: usize,
    j: &[i64],
    quad_points: usize,
) -> Result<QuadratureValue> {
    check_quad_points(quad_points)?;
    if j.len() != dim {
        return Err(Error::InvalidValue {
            name: "j",
            message: format!("multi-index has {} entries for dim {}", j.len(), dim),
        });
    }
    let fine = trapezoid_single(order, dim, j, quad_points);
    let coarse = trapezoid_single(order, dim, j, quad_points / 2);
    Ok(QuadratureValue {
        value: fine,
        refined: richardson(order, fine, coarse),
        error_estimate: (fine - coarse).abs(),
    })
}

/// Extrapolate with the known convergence exponent 1 + 2 alpha.
fn richardson(order: FractionalOrder, fine: f64, coarse: f64) -> f64 {
    let rate = 1.0 + 2.0 * order.alpha();
    fine + (fine - coarse) / (2f64.powf(rate) - 1.0)
}

/// Closed-form 1D coefficient via signed log-Gamma.
///
/// Returns exactly 0 when alpha is an integer and |j| > alpha (the reciprocal
/// Gamma pole).
pub fn coeff_closed_form_1d(order: FractionalOrder, j: i64) -> f64 {
    let alpha = order.alpha();
    let ju = j.unsigned_abs();
    let jf = ju as f64;
    let lower = alpha - jf + 1.0;
    if lower <= 0.0 && lower.fract() == 0.0 {
        return 0.0;
    }
    let top = ln_gamma(2.0 * alpha + 1.0);
    let (l1, s1) = ln_gamma_signed(lower);
    let l2 = ln_gamma(alpha + jf + 1.0);
    let sign = if ju % 2 == 0 { 1.0 } else { -1.0 } * s1;
    sign * (top - l1 - l2).exp()
}

/// Truncated table of refined weights for ||j||_inf <= radius, with per-entry
/// quadrature self-estimates, their maximum, and the shell-maximum tail
/// estimate.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    order: FractionalOrder,
    dim: usize,
    radius: usize,
    /// Axis-major cube of side 2*radius+1, entry for offset j at
    /// position prod (j_i + radius).
    weights: Vec<f64>,
    errors: Vec<f64>,
    quad_error_estimate: f64,
    tail_estimate: f64,
}

impl CoefficientTable {
    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// Largest per-entry quadrature self-estimate.
    pub fn quad_error_estimate(&self) -> f64 {
        self.quad_error_estimate
    }

    /// max |a_j| over the outermost shell ||j||_inf = radius.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Weight of the offset j (each |j_i| <= radius).
    pub fn weight(&self, j: &[i64]) -> f64 {
        self.weights[self.cube_index(j)]
    }

    fn cube_index(&self, j: &[i64]) -> usize {
        debug_assert_eq!(j.len(), self.dim);
        let side = self.side();
        let r = self.radius as i64;
        let mut flat = 0usize;
        for &ji in j {
            debug_assert!(ji.abs() <= r);
            flat = flat * side + (ji + r) as usize;
        }
        flat
    }

    /// Visit every offset with its weight.
    pub fn for_each(&self, mut f: impl FnMut(&[i64], f64)) {
        let side = self.side();
        let r = self.radius as i64;
        let mut j = vec![0i64; self.dim];
        for (flat, &w) in self.weights.iter().enumerate() {
            let mut rest = flat;
            for axis in (0..self.dim).rev() {
                j[axis] = (rest % side) as i64 - r;
                rest /= side;
            }
            f(&j, w);
        }
    }

    /// Sum of all retained weights (the symbol at theta = 0 is zero, so this
    /// is minus the dropped tail).
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// All coefficients for one resolution, by shared tensor contraction: the
/// powf pass over the M^n grid is done once and reused for every j.
fn trapezoid_table(order: FractionalOrder, dim: usize, radius: usize, m: usize) -> Vec<f64> {
    let alpha = order.alpha();
    let theta = unit_cell(m);
    let s: Vec<f64> = theta
        .iter()
        .map(|&t| 4.0 * (std::f64::consts::PI * t).sin().powi(2))
        .collect();
    // cos(2 pi q theta_p) for q = 0..=radius
    let cos_t: Vec<Vec<f64>> = (0..=radius)
        .map(|q| {
            theta
                .iter()
                .map(|&t| (2.0 * std::f64::consts::PI * q as f64 * t).cos())
                .collect()
        })
        .collect();
    let rq = radius + 1;

    // W over the grid, then contract one axis at a time against the cosine
    // tables. After contracting axis d the array is indexed by
    // (remaining grid axes) x (q_d, ..., q_{dim-1}).
    let mut data: Vec<f64> = {
        let mut out = vec![0.0; m.pow(dim as u32)];
        let mut idx = vec![0usize; dim];
        for slot in out.iter_mut() {
            let base: f64 = idx.iter().map(|&p| s[p]).sum();
            *slot = base.powf(alpha);
            let mut axis = dim;
            while axis > 0 {
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < m {
                    break;
                }
                idx[axis] = 0;
            }
        }
        out
    };
    let mut grid_axes = dim; // leading axes still of length m
    let mut q_len = 1usize; // product of trailing q-axis lengths
    for _ in 0..dim {
        // contract the last grid axis (stride q_len, length m)
        let blocks = m.pow((grid_axes - 1) as u32);
        let mut next = vec![0.0; blocks * rq * q_len];
        for b in 0..blocks {
            for t in 0..q_len {
                let base = (b * m) * q_len + t;
                for (q, row) in cos_t.iter().enumerate() {
                    let mut acc = 0.0;
                    for (p, &c) in row.iter().enumerate() {
                        acc += data[base + p * q_len] * c;
                    }
                    next[(b * rq + q) * q_len + t] = acc;
                }
            }
        }
        data = next;
        grid_axes -= 1;
        q_len *= rq;
    }
    // data is now indexed by (q_0, ..., q_{dim-1}), each in 0..=radius;
    // mirror to the signed cube and normalize.
    let norm = (m as f64).powi(-(dim as i32));
    let side = 2 * radius + 1;
    let mut cube = vec![0.0; side.pow(dim as u32)];
    let r = radius as i64;
    let mut j = vec![0i64; dim];
    for (flat, slot) in cube.iter_mut().enumerate() {
        let mut rest = flat;
        for axis in (0..dim).rev() {
            j[axis] = (rest % side) as i64 - r;
            rest /= side;
        }
        let mut qflat = 0usize;
        for &ji in &j {
            qflat = qflat * rq + ji.unsigned_abs() as usize;
        }
        *slot = data[qflat] * norm;
    }
    cube
}

/// Assemble the truncated coefficient table with Richardson-refined entries.
pub fn build_table(
    order: FractionalOrder,
    dim: usize,
    radius: usize,
    quad_points: usize,
) -> Result<CoefficientTable> {
    check_quad_points(quad_points)?;
    if dim == 0 {
        return Err(Error::InvalidValue {
            name: "dim",
            message: "must be >= 1".into(),
        });
    }
    if radius == 0 {
        return Err(Error::InvalidValue {
            name: "radius",
            message: "must be >= 1".into(),
        });
    }
    let (fine, coarse) = rayon::join(
        || trapezoid_table(order, dim, radius, quad_points),
        || trapezoid_table(order, dim, radius, quad_points / 2),
    );
    let weights: Vec<f64> = fine
        .par_iter()
        .zip(coarse.par_iter())
        .map(|(&f, &c)| richardson(order, f, c))
        .collect();
    let errors: Vec<f64> = fine
        .iter()
        .zip(&coarse)
        .map(|(&f, &c)| (f - c).abs())
        .collect();
    let quad_error_estimate = errors.iter().cloned().fold(0.0, f64::max);

    let side = 2 * radius + 1;
    let r = radius as i64;
    let mut tail_estimate = 0.0f64;
    let mut center_idx = 0usize;
    let mut j = vec![0i64; dim];
    for (flat, &w) in weights.iter().enumerate() {
        let mut rest = flat;
        for axis in (0..dim).rev() {
            j[axis] = (rest % side) as i64 - r;
            rest /= side;
        }
        let inf = j.iter().map(|x| x.unsigned_abs()).max().unwrap() as usize;
        if inf == radius {
            tail_estimate = tail_estimate.max(w.abs());
        }
        if inf == 0 {
            center_idx = flat;
        }
    }

    let table = CoefficientTable {
        order,
        dim,
        radius,
        weights,
        errors,
        quad_error_estimate,
        tail_estimate,
    };
    // Structural sanity: positive center, non-positive off-center entries
    // within quadrature tolerance.
    if table.weights[center_idx] <= 0.0 {
        return Err(Error::InvalidValue {
            name: "table",
            message: "center weight not positive".into(),
        });
    }
    for (flat, &w) in table.weights.iter().enumerate() {
        if flat != center_idx && w > 1e-10 {
            return Err(Error::InvalidValue {
                name: "table",
                message: format!("off-center weight {w} above tolerance at flat {flat}"),
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_OVER_PI: f64 = 4.0 / std::f64::consts::PI;

    fn ord(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn order_range_enforced() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(-0.5).is_err());
        assert!(FractionalOrder::new(1.5).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0).is_ok());
        assert!(FractionalOrder::new(0.25).is_ok());
    }

    #[test]
    fn quad_points_validation() {
        assert!(coeff_quadrature(ord(0.5), 1, &[0], 32).is_err());
        assert!(coeff_quadrature(ord(0.5), 1, &[0], 100).is_err());
        assert!(coeff_quadrature(ord(0.5), 1, &[0], 64).is_ok());
    }

    #[test]
    fn alpha_one_degenerates_1d() {
        // 2 at the center, -1 at |j| = 1, 0 beyond.
        let expect = [2.0, -1.0, 0.0, 0.0];
        for (j, e) in expect.iter().enumerate() {
            let q = coeff_quadrature(ord(1.0), 1, &[j as i64], 256).unwrap();
            assert!((q.value - e).abs() < 1e-12, "j={j}: {} vs {e}", q.value);
            assert!((q.refined - e).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_one_degenerates_2d() {
        // 2n = 4 at the center, -1 at the four nearest neighbors, 0 at (1,1).
        let cases: [(&[i64], f64); 5] = [
            (&[0, 0], 4.0),
            (&[1, 0], -1.0),
            (&[0, -1], -1.0),
            (&[1, 1], 0.0),
            (&[2, 0], 0.0),
        ];
        for (j, e) in cases {
            let q = coeff_quadrature(ord(1.0), 2, j, 64).unwrap();
            assert!((q.value - e).abs() < 1e-12, "j={j:?}: {} vs {e}", q.value);
        }
    }

    #[test]
    fn closed_form_alpha_one() {
        assert!((coeff_closed_form_1d(ord(1.0), 0) - 2.0).abs() < 1e-14);
        assert!((coeff_closed_form_1d(ord(1.0), 1) + 1.0).abs() < 1e-14);
        assert_eq!(coeff_closed_form_1d(ord(1.0), 2), 0.0);
        assert_eq!(coeff_closed_form_1d(ord(1.0), 17), 0.0);
    }

    #[test]
    fn closed_form_alpha_half_known_values() {
        // Gamma(2)/Gamma(1.5)^2 = 4/pi and the next two ratios.
        let a0 = coeff_closed_form_1d(ord(0.5), 0);
        let a1 = coeff_closed_form_1d(ord(0.5), 1);
        let a2 = coeff_closed_form_1d(ord(0.5), 2);
        assert!((a0 - FOUR_OVER_PI).abs() < 1e-13);
        assert!((a1 + FOUR_OVER_PI / 3.0).abs() < 1e-13);
        assert!((a2 + FOUR_OVER_PI / 15.0).abs() < 1e-13);
        assert!((a0 - 1.2732395).abs() < 1e-6);
        assert!((a1 + 0.4244132).abs() < 1e-6);
        assert!((a2 + 0.0848826).abs() < 1e-6);
        // symmetry
        assert_eq!(a1, coeff_closed_form_1d(ord(0.5), -1));
    }

    #[test]
    fn quadrature_meets_closed_form() {
        // The two independent routes agree to <= 1e-8 after Richardson.
        for alpha in [0.25, 0.5, 0.75, 0.9] {
            for j in [0i64, 1, 2, 5, 20] {
                let cf = coeff_closed_form_1d(ord(alpha), j);
                let q = coeff_quadrature(ord(alpha), 1, &[j], 4096).unwrap();
                assert!(
                    (q.refined - cf).abs() <= 1e-8,
                    "alpha={alpha} j={j}: {} vs {cf}",
                    q.refined
                );
                assert!(q.error_estimate.is_finite());
            }
        }
    }

    #[test]
    fn quadrature_alpha_half_derived_values() {
        let q0 = coeff_quadrature(ord(0.5), 1, &[0], 4096).unwrap();
        let q1 = coeff_quadrature(ord(0.5), 1, &[1], 4096).unwrap();
        let q2 = coeff_quadrature(ord(0.5), 1, &[2], 4096).unwrap();
        assert!((q0.refined - FOUR_OVER_PI).abs() < 1e-8);
        assert!((q1.refined + FOUR_OVER_PI / 3.0).abs() < 1e-8);
        assert!((q2.refined + FOUR_OVER_PI / 15.0).abs() < 1e-8);
    }

    #[test]
    fn table_alpha_one_radius_three() {
        let t = build_table(ord(1.0), 1, 3, 256).unwrap();
        let expect = [0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0];
        for (w, e) in t.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-12);
        }
    }

    #[test]
    fn table_alpha_half_radius_two() {
        let t = build_table(ord(0.5), 1, 2, 4096).unwrap();
        let expect = [
            -FOUR_OVER_PI / 15.0,
            -FOUR_OVER_PI / 3.0,
            FOUR_OVER_PI,
            -FOUR_OVER_PI / 3.0,
            -FOUR_OVER_PI / 15.0,
        ];
        for (w, e) in t.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-8, "{w} vs {e}");
        }
        assert!(t.tail_estimate() > 0.0);
        assert!((t.tail_estimate() - FOUR_OVER_PI / 15.0).abs() < 1e-8);
    }

    #[test]
    fn table_symmetry_exact() {
        // cos-product quadrature makes a_j == a_{-j} bit-exact.
        let t = build_table(ord(0.7), 2, 3, 128).unwrap();
        t.for_each(|j, w| {
            let neg: Vec<i64> = j.iter().map(|x| -x).collect();
            assert_eq!(w, t.weight(&neg));
            let flip: Vec<i64> = vec![-j[0], j[1]];
            assert_eq!(w, t.weight(&flip));
        });
    }

    #[test]
    fn table_signs_and_tail_decay() {
        let t = build_table(ord(0.5), 1, 24, 4096).unwrap();
        let center = t.weight(&[0]);
        assert!(center > 0.0);
        t.for_each(|j, w| {
            if j[0] != 0 {
                assert!(w <= 1e-10);
            }
        });
        // shell maxima decrease with radius
        let t8 = build_table(ord(0.5), 1, 8, 4096).unwrap();
        let t16 = build_table(ord(0.5), 1, 16, 4096).unwrap();
        assert!(t8.tail_estimate() > t16.tail_estimate());
        assert!(t16.tail_estimate() > t.tail_estimate());
        // weight sum tends to zero as the radius grows (symbol vanishes at 0)
        assert!(t.weight_sum().abs() < t8.weight_sum().abs());
    }

    #[test]
    fn table_matches_single_coefficient_route() {
        // The shared-contraction table and the per-j quadrature are separate
        // code paths over the same sums.
        for (dim, m) in [(1usize, 256usize), (2, 64), (3, 64)] {
            let t = build_table(ord(0.6), dim, 2, m).unwrap();
            // same sums, different accumulation order: round-off only
            t.for_each(|j, w| {
                let q = coeff_quadrature(ord(0.6), dim, j, m).unwrap();
                assert!(
                    (q.refined - w).abs() <= 1e-11 * w.abs().max(1.0),
                    "dim={dim} j={j:?}: {} vs {w}",
                    q.refined
                );
            });
        }
    }

    #[test]
    fn empirical_decay_exponent() {
        // |a_j| ~ j^{-(1+2alpha)} in 1D; fit the exponent over j in [8, 24].
        for alpha in [0.5, 0.75] {
            let pts: Vec<(f64, f64)> = (8..=24)
                .map(|j| {
                    (
                        (j as f64).ln(),
                        coeff_closed_form_1d(ord(alpha), j).abs().ln(),
                    )
                })
                .collect();
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(
                (slope + 1.0 + 2.0 * alpha).abs() < 0.15,
                "alpha={alpha}: decay exponent {slope}"
            );
        }
    }
}
