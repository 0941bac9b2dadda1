//! Core metrics engine: capacitance C(α), the tilt sensitivity ∂C/∂α, and
//! the electrostatic-softening coefficient κ = ½·∂²C/∂α² for any
//! membrane / electrode-layout / curvature combination.
//!
//! Sensitivity and κ integrate the analytically differentiated integrands at
//! α = 0; a central-difference check ([`fd_check`]) is kept as an independent
//! derivative oracle. The published flat-membrane closed forms are preserved
//! verbatim in [`closed_form_flat`], separate from the quadrature path, so
//! comparison tables can be reproduced exactly as printed.
//!
//! Sign convention (fixed once, asserted in tests): α > 0 closes the gap over
//! the `PlusHalf` electrode, so its signed sensitivity is positive;
//! `MinusHalf` mirrors it.

use crate::curvature::{sag_fn, CurvatureError, CurvatureModel};
use crate::geometry::{
    ElectrodeLayout, GeometryError, MembraneSpec, Shape, VACUUM_PERMITTIVITY,
};
use crate::quadrature::{integrate_polar, integrate_rect, QuadError, QuadSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("gap collapses to {min_gap:e} m at r = {at_r:e} m; tilt too large for this geometry")]
    GapCollapse { min_gap: f64, at_r: f64 },
    #[error("operation is defined for circular membranes only")]
    ShapeMismatch,
    #[error("finite-difference step must be finite and > 0, got {value}")]
    InvalidStep { value: f64 },
    #[error("tilt angle must be finite, got {value}")]
    InvalidTilt { value: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// How a metrics bundle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Quadrature,
    ClosedFormAsPrinted,
}

/// Capacitance (F), signed sensitivity (F/rad), and softening coefficient
/// κ (F/rad²) of one electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorMetrics {
    pub capacitance: f64,
    pub sensitivity: f64,
    pub kappa: f64,
    pub method: Method,
}

/// Membrane tilt about the torsion axis, rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltState {
    pub alpha: f64,
}

impl TiltState {
    pub fn new(alpha: f64) -> Result<Self, MetricsError> {
        if !alpha.is_finite() {
            return Err(MetricsError::InvalidTilt { value: alpha });
        }
        Ok(Self { alpha })
    }

    pub fn level() -> Self {
        Self { alpha: 0.0 }
    }
}

struct Resolved {
    d_prime: f64,
    extent: f64,
    r0: f64,
    side_sign: f64,
    curv: CurvatureModel,
}

impl Resolved {
    fn empty_electrode(&self) -> bool {
        self.r0 >= self.extent
    }
}

fn resolve(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
) -> Result<Resolved, MetricsError> {
    layout.validate_for(spec)?;
    let extent = spec.extent();
    curv.validate_for_extent(extent)?;
    Ok(Resolved {
        d_prime: spec.effective_gap(),
        extent,
        r0: layout.r0,
        side_sign: layout.side.tilt_sign(),
        curv: *curv,
    })
}

/// Minimum resting-plus-tilt gap along the worst-case line (φ = π/2 for the
/// disk, the x axis for the rectangle) for closing rate `t` > 0. The gap is
/// convex in r, so the clamped critical point of the sag profile gives the
/// exact minimum.
fn min_gap(res: &Resolved, t: f64) -> (f64, f64) {
    let sag = sag_fn(res.curv, res.r0);
    let gap = |r: f64| res.d_prime - t * r + sag(r);
    let r_star = match res.curv {
        CurvatureModel::Flat => res.extent,
        CurvatureModel::Curved { radius, shift_to_electrode_edge, approx } => {
            let s_star = match approx {
                crate::curvature::SagApprox::Quadratic => t * radius,
                crate::curvature::SagApprox::ExactCircle => radius * t / (1.0 + t * t).sqrt(),
            };
            let unclamped = if shift_to_electrode_edge { res.r0 + s_star } else { s_star };
            unclamped.clamp(res.r0, res.extent)
        }
    };
    let candidates = [r_star, res.r0, res.extent];
    let mut best = (gap(candidates[0]), candidates[0]);
    for &r in &candidates[1..] {
        let g = gap(r);
        if g < best.0 {
            best = (g, r);
        }
    }
    best
}

fn check_tilt(res: &Resolved, alpha: f64) -> Result<(), MetricsError> {
    let t = res.side_sign * alpha;
    if t <= 0.0 {
        // the electrode only moves away from the substrate
        return Ok(());
    }
    let (g, at_r) = min_gap(res, t);
    if g <= 0.0 {
        return Err(MetricsError::GapCollapse { min_gap: g, at_r });
    }
    Ok(())
}

/// Electrode capacitance at tilt α under the parallel-plate approximation.
pub fn capacitance(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
    tilt: TiltState,
    quad: &QuadSpec,
) -> Result<f64, MetricsError> {
    let res = resolve(spec, layout, curv)?;
    if !tilt.alpha.is_finite() {
        return Err(MetricsError::InvalidTilt { value: tilt.alpha });
    }
    if res.empty_electrode() {
        return Ok(0.0);
    }
    check_tilt(&res, tilt.alpha)?;
    let sag = sag_fn(res.curv, res.r0);
    let t = res.side_sign * tilt.alpha;
    let d_prime = res.d_prime;
    let value = match spec.shape {
        Shape::Circular { radius } => integrate_polar(
            |r, phi| r / (d_prime - t * r * phi.sin() + sag(r)),
            res.r0,
            radius,
            0.0,
            PI,
            quad,
        )?,
        Shape::Rectangular { half_length, width } => integrate_rect(
            |x, _| 1.0 / (d_prime - t * x + sag(x)),
            res.r0,
            half_length,
            -0.5 * width,
            0.5 * width,
            quad,
        )?,
    };
    Ok(VACUUM_PERMITTIVITY * value)
}

/// Signed small-tilt sensitivity ∂C/∂α at α = 0, from the analytically
/// differentiated integrand. Positive for `PlusHalf`, negative for
/// `MinusHalf`; report the magnitude in user-facing output.
pub fn sensitivity(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
    quad: &QuadSpec,
) -> Result<f64, MetricsError> {
    let res = resolve(spec, layout, curv)?;
    if res.empty_electrode() {
        return Ok(0.0);
    }
    let sag = sag_fn(res.curv, res.r0);
    let d_prime = res.d_prime;
    let value = match spec.shape {
        Shape::Circular { radius } => integrate_polar(
            |r, phi| {
                let g = d_prime + sag(r);
                r * r * phi.sin() / (g * g)
            },
            res.r0,
            radius,
            0.0,
            PI,
            quad,
        )?,
        Shape::Rectangular { half_length, width } => integrate_rect(
            |x, _| {
                let g = d_prime + sag(x);
                x / (g * g)
            },
            res.r0,
            half_length,
            -0.5 * width,
            0.5 * width,
            quad,
        )?,
    };
    Ok(res.side_sign * VACUUM_PERMITTIVITY * value)
}

/// Electrostatic-softening coefficient κ = ½·∂²C/∂α² at α = 0. Always
/// positive for a nonempty electrode and identical on both halves.
pub fn ess_coefficient(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
    quad: &QuadSpec,
) -> Result<f64, MetricsError> {
    let res = resolve(spec, layout, curv)?;
    if res.empty_electrode() {
        return Ok(0.0);
    }
    let sag = sag_fn(res.curv, res.r0);
    let d_prime = res.d_prime;
    let value = match spec.shape {
        Shape::Circular { radius } => integrate_polar(
            |r, phi| {
                let s = phi.sin();
                let g = d_prime + sag(r);
                r * r * r * s * s / (g * g * g)
            },
            res.r0,
            radius,
            0.0,
            PI,
            quad,
        )?,
        Shape::Rectangular { half_length, width } => integrate_rect(
            |x, _| {
                let g = d_prime + sag(x);
                x * x / (g * g * g)
            },
            res.r0,
            half_length,
            -0.5 * width,
            0.5 * width,
            quad,
        )?,
    };
    Ok(VACUUM_PERMITTIVITY * value)
}

/// Full quadrature-path bundle at α = 0.
pub fn metrics(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
    quad: &QuadSpec,
) -> Result<SensorMetrics, MetricsError> {
    Ok(SensorMetrics {
        capacitance: capacitance(spec, layout, curv, TiltState::level(), quad)?,
        sensitivity: sensitivity(spec, layout, curv, quad)?,
        kappa: ess_coefficient(spec, layout, curv, quad)?,
        method: Method::Quadrature,
    })
}

/// The published flat-circular closed forms, evaluated verbatim:
/// |∂C/∂α| = (2/3)·πε₀R³/d′² and κ = ε₀πR⁴/(2d′³).
///
/// These differ from the direct integrals by factors of π and 4
/// respectively; they are kept as printed because published comparison
/// tables were generated from them. The capacitance slot carries the plain
/// half-disk parallel-plate value ε₀πR²/(2d′).
pub fn closed_form_flat(spec: &MembraneSpec) -> Result<SensorMetrics, MetricsError> {
    let radius = match spec.shape {
        Shape::Circular { radius } => radius,
        Shape::Rectangular { .. } => return Err(MetricsError::ShapeMismatch),
    };
    let d_prime = spec.effective_gap();
    let eps0 = VACUUM_PERMITTIVITY;
    Ok(SensorMetrics {
        capacitance: eps0 * PI * radius * radius / (2.0 * d_prime),
        sensitivity: (2.0 / 3.0) * PI * eps0 * radius.powi(3) / (d_prime * d_prime),
        kappa: eps0 * PI * radius.powi(4) / (2.0 * d_prime.powi(3)),
        method: Method::ClosedFormAsPrinted,
    })
}

/// Central-difference derivative oracle over [`capacitance`]:
/// returns ((C(h) − C(−h))/(2h), ½·(C(h) − 2C(0) + C(−h))/h²).
pub fn fd_check(
    spec: &MembraneSpec,
    layout: &ElectrodeLayout,
    curv: &CurvatureModel,
    h: f64,
    quad: &QuadSpec,
) -> Result<(f64, f64), MetricsError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(MetricsError::InvalidStep { value: h });
    }
    let c_plus = capacitance(spec, layout, curv, TiltState::new(h)?, quad)?;
    let c_minus = capacitance(spec, layout, curv, TiltState::new(-h)?, quad)?;
    let c_zero = capacitance(spec, layout, curv, TiltState::level(), quad)?;
    let d1 = (c_plus - c_minus) / (2.0 * h);
    let d2 = 0.5 * (c_plus - 2.0 * c_zero + c_minus) / (h * h);
    Ok((d1, d2))
}
