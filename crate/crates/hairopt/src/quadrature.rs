//! Deterministic 2-D numerical integration over rectangle-shaped domains in
//! either polar (r, φ) or Cartesian (x, y) coordinates.
//!
//! The integrand is sampled on tensor-product Gauss-Legendre panels; the
//! panel grid is refined uniformly (doubling per level) until two successive
//! levels agree to the requested relative tolerance. No randomness, no
//! data-dependent subdivision: the same inputs always produce bit-identical
//! output.
//!
//! Note that the polar variant integrates with the plain measure dr dφ; the
//! caller includes the Jacobian r in the integrand where a true area/volume
//! integral is wanted.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("integral did not converge to rel_tol {target:e} within {refinements} refinements (last error estimate {achieved:e})")]
    NoConvergence { target: f64, achieved: f64, refinements: u32 },
    #[error("invalid integration domain: [{lo}, {hi}] on axis {axis}")]
    InvalidDomain { axis: &'static str, lo: f64, hi: f64 },
    #[error("rel_tol must satisfy 0 < rel_tol < 1e-2, got {value}")]
    InvalidTolerance { value: f64 },
    #[error("integrand produced a non-finite value")]
    NonFiniteIntegrand,
}

/// Refinement control: target relative error and the refinement budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub max_refinements: u32,
}

impl QuadSpec {
    pub fn new(rel_tol: f64, max_refinements: u32) -> Result<Self, QuadError> {
        if !(rel_tol.is_finite() && rel_tol > 0.0 && rel_tol < 1e-2) {
            return Err(QuadError::InvalidTolerance { value: rel_tol });
        }
        Ok(Self { rel_tol, max_refinements })
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_refinements: 20 }
    }
}

// 16-point Gauss-Legendre rule on [-1, 1]; positive nodes with weights,
// mirrored at evaluation time.
const GAUSS_16: [(f64, f64); 8] = [
    (9.50125098376374544e-02, 1.89450610455068585e-01),
    (2.81603550779258915e-01, 1.82603415044923612e-01),
    (4.58016777657227370e-01, 1.69156519395002619e-01),
    (6.17876244402643771e-01, 1.49595988816576764e-01),
    (7.55404408355002999e-01, 1.24628971255534030e-01),
    (8.65631202387831755e-01, 9.51585116824925914e-02),
    (9.44575023073232600e-01, 6.22535239386477063e-02),
    (9.89400934991649939e-01, 2.71524594117540374e-02),
];

const NODES_PER_PANEL: usize = 16;

// Results with magnitude below this are considered converged-at-zero.
const ABS_FLOOR: f64 = 1e-30;

fn fill_panel_nodes(lo: f64, width: f64, panel: usize, coords: &mut [f64], weights: &mut [f64]) {
    let a = lo + width * panel as f64;
    let center = a + 0.5 * width;
    let half = 0.5 * width;
    for (i, &(node, weight)) in GAUSS_16.iter().enumerate() {
        coords[2 * i] = center - half * node;
        coords[2 * i + 1] = center + half * node;
        weights[2 * i] = weight * half;
        weights[2 * i + 1] = weight * half;
    }
}

/// One uniform-panel pass: returns (integral, sum of |w·f|).
fn composite_pass<F>(f: &F, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, panels: u64) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    let wx = (x_hi - x_lo) / panels as f64;
    let wy = (y_hi - y_lo) / panels as f64;
    let mut xs = [0.0; NODES_PER_PANEL];
    let mut wxs = [0.0; NODES_PER_PANEL];
    let mut ys = [0.0; NODES_PER_PANEL];
    let mut wys = [0.0; NODES_PER_PANEL];
    let mut total = 0.0;
    let mut l1 = 0.0;
    for px in 0..panels {
        fill_panel_nodes(x_lo, wx, px as usize, &mut xs, &mut wxs);
        for py in 0..panels {
            fill_panel_nodes(y_lo, wy, py as usize, &mut ys, &mut wys);
            for i in 0..NODES_PER_PANEL {
                for j in 0..NODES_PER_PANEL {
                    let w = wxs[i] * wys[j];
                    let v = w * f(xs[i], ys[j]);
                    total += v;
                    l1 += v.abs();
                }
            }
        }
    }
    (total, l1)
}

fn integrate_2d<F>(
    f: F,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    q: &QuadSpec,
) -> Result<f64, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    QuadSpec::new(q.rel_tol, q.max_refinements)?;
    let (mut prev, _) = composite_pass(&f, x_lo, x_hi, y_lo, y_hi, 1);
    let mut last_err = f64::INFINITY;
    for level in 1..=q.max_refinements {
        let panels = 1u64 << level.min(30);
        let (cur, l1) = composite_pass(&f, x_lo, x_hi, y_lo, y_hi, panels);
        if !cur.is_finite() {
            return Err(QuadError::NonFiniteIntegrand);
        }
        let err = (cur - prev).abs();
        // Converged when the level-to-level change is within tolerance of the
        // current value, below the absolute floor, or at the roundoff noise
        // of the summation itself (n_evals · ε · Σ|w·f|).
        let n_evals = (panels as f64).powi(2) * (NODES_PER_PANEL * NODES_PER_PANEL) as f64;
        let roundoff = n_evals * f64::EPSILON * l1;
        let threshold = (q.rel_tol * cur.abs()).max(ABS_FLOOR).max(roundoff);
        if err <= threshold {
            return Ok(cur);
        }
        prev = cur;
        last_err = err;
    }
    Err(QuadError::NoConvergence {
        target: q.rel_tol,
        achieved: last_err,
        refinements: q.max_refinements,
    })
}

/// Integrate f(r, φ) dr dφ over [r_lo, r_hi] × [φ_lo, φ_hi].
pub fn integrate_polar<F>(
    f: F,
    r_lo: f64,
    r_hi: f64,
    phi_lo: f64,
    phi_hi: f64,
    q: &QuadSpec,
) -> Result<f64, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(r_lo.is_finite() && r_hi.is_finite() && r_lo >= 0.0 && r_hi > r_lo) {
        return Err(QuadError::InvalidDomain { axis: "r", lo: r_lo, hi: r_hi });
    }
    if !(phi_lo.is_finite() && phi_hi.is_finite() && phi_hi > phi_lo) {
        return Err(QuadError::InvalidDomain { axis: "phi", lo: phi_lo, hi: phi_hi });
    }
    integrate_2d(f, r_lo, r_hi, phi_lo, phi_hi, q)
}

/// Integrate f(x, y) dx dy over [x_lo, x_hi] × [y_lo, y_hi].
pub fn integrate_rect<F>(
    f: F,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    q: &QuadSpec,
) -> Result<f64, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
        return Err(QuadError::InvalidDomain { axis: "x", lo: x_lo, hi: x_hi });
    }
    if !(y_lo.is_finite() && y_hi.is_finite() && y_hi > y_lo) {
        return Err(QuadError::InvalidDomain { axis: "y", lo: y_lo, hi: y_hi });
    }
    integrate_2d(f, x_lo, x_hi, y_lo, y_hi, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn q() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn disk_area_with_jacobian_in_integrand() {
        let area = integrate_polar(|r, _| r, 0.0, 1.0, 0.0, 2.0 * PI, &q()).unwrap();
        assert!((area - PI).abs() / PI < 1e-10);
    }

    #[test]
    fn separable_polynomial_times_sine() {
        let r_max = 85e-6_f64;
        let v = integrate_polar(|r, phi| r * r * phi.sin(), 0.0, r_max, 0.0, PI, &q()).unwrap();
        let expected = 2.0 * r_max.powi(3) / 3.0;
        assert!((v - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn flat_capacitance_kernel() {
        let d_prime = 1.1467e-6_f64;
        let r_max = 85e-6_f64;
        let v = integrate_polar(|r, _| r / (d_prime * d_prime), 0.0, r_max, 0.0, PI, &q()).unwrap();
        let expected = PI * r_max * r_max / (2.0 * d_prime * d_prime);
        assert!((v - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn rect_basics() {
        let one = integrate_rect(|_, _| 1.0, 0.0, 1.0, 0.0, 1.0, &q()).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let xy = integrate_rect(|x, y| x * y, 0.0, 1.0, 0.0, 1.0, &q()).unwrap();
        assert!((xy - 0.25).abs() < 1e-12);
        let inv_sq = integrate_rect(|x, _| 1.0 / ((1.0 + x) * (1.0 + x)), 0.0, 1.0, 0.0, 1.0, &q()).unwrap();
        assert!((inv_sq - 0.5).abs() < 1e-11);
    }

    #[test]
    fn odd_integrand_over_full_disk_is_zero() {
        // sin φ over a full period cancels; the result must converge and sit
        // at roundoff scale rather than erroring out.
        let r_max = 85e-6_f64;
        let scale = r_max.powi(3) / 3.0;
        let v = integrate_polar(|r, phi| r * r * phi.sin(), 0.0, r_max, 0.0, 2.0 * PI, &q()).unwrap();
        assert!(v.abs() < 1e-10 * scale, "expected ~0, got {v:e}");
    }

    #[test]
    fn no_convergence_with_tiny_budget() {
        let spec = QuadSpec { rel_tol: 1e-10, max_refinements: 1 };
        let r = integrate_rect(|x, y| (1000.0 * x).sin() * (1000.0 * y).sin(), 0.0, 1.0, 0.0, 1.0, &spec);
        assert!(matches!(r, Err(QuadError::NoConvergence { refinements: 1, .. })));
    }

    #[test]
    fn domain_and_tolerance_validation() {
        assert!(matches!(
            integrate_polar(|_, _| 1.0, -1.0, 1.0, 0.0, 1.0, &q()),
            Err(QuadError::InvalidDomain { axis: "r", .. })
        ));
        assert!(matches!(
            integrate_polar(|_, _| 1.0, 0.0, 1.0, 1.0, 1.0, &q()),
            Err(QuadError::InvalidDomain { axis: "phi", .. })
        ));
        assert!(matches!(
            integrate_rect(|_, _| 1.0, 1.0, 0.0, 0.0, 1.0, &q()),
            Err(QuadError::InvalidDomain { axis: "x", .. })
        ));
        assert!(QuadSpec::new(0.0, 20).is_err());
        assert!(QuadSpec::new(1e-2, 20).is_err());
        assert!(QuadSpec::new(1e-10, 20).is_ok());
    }

    #[test]
    fn determinism_bit_exact() {
        let f = |r: f64, phi: f64| r * r / (1e-6 + r * phi.sin() * 1e-3);
        let a = integrate_polar(f, 0.0, 85e-6, 0.0, PI, &q()).unwrap();
        let b = integrate_polar(f, 0.0, 85e-6, 0.0, PI, &q()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
