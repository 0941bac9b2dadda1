//! Stress-induced membrane sag.
//!
//! The resting membrane bows away from the substrate along the tilt
//! direction; the profile is a circular arc of radius `R_c` starting flat at
//! the hair base. A reduced electrode (electrode-less length r0) removes the
//! stress source over [0, r0], so by default the sag profile shifts outward
//! with the electrode edge: a(r - r0). The unshifted variant (sag profile of
//! the full electrode, merely cropped) stays selectable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("arc length {s} m exceeds radius of curvature {radius} m; circle profile undefined")]
    DomainError { s: f64, radius: f64 },
    #[error("edge lift must be strictly positive and finite, got {value}")]
    InvalidMeasurement { value: f64 },
    #[error("edge lift {lift} m must be smaller than the extent {extent} m")]
    LiftExceedsExtent { lift: f64, extent: f64 },
    #[error("radius of curvature must be strictly positive and finite, got {value}")]
    InvalidRadius { value: f64 },
    #[error("radius of curvature {radius} m must exceed the membrane extent {extent} m")]
    RadiusTooSmall { radius: f64, extent: f64 },
    #[error("position must be finite and >= 0, got {value}")]
    InvalidPosition { value: f64 },
}

/// Sag profile evaluation: the exact circle expression or its small-sag
/// quadratic approximation s²/(2 R_c).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SagApprox {
    ExactCircle,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurvatureModel {
    Flat,
    Curved {
        /// Radius of curvature R_c, m.
        radius: f64,
        /// Shift the sag onset to the electrode edge: a(r - r0) instead of a(r).
        shift_to_electrode_edge: bool,
        approx: SagApprox,
    },
}

/// Invert the exact circle profile: the R_c whose sag at `extent` equals
/// `edge_lift`. R_c = (extent² + lift²) / (2·lift).
pub fn calibrate_rc(edge_lift: f64, extent: f64) -> Result<f64, CurvatureError> {
    if !(edge_lift.is_finite() && edge_lift > 0.0) {
        return Err(CurvatureError::InvalidMeasurement { value: edge_lift });
    }
    if !(extent.is_finite() && extent > edge_lift) {
        return Err(CurvatureError::LiftExceedsExtent { lift: edge_lift, extent });
    }
    Ok((extent * extent + edge_lift * edge_lift) / (2.0 * edge_lift))
}

impl CurvatureModel {
    pub fn flat() -> Self {
        CurvatureModel::Flat
    }

    /// Curved model with the default reading: shifted sag, exact circle.
    pub fn curved(radius: f64) -> Result<Self, CurvatureError> {
        Self::curved_with(radius, true, SagApprox::ExactCircle)
    }

    pub fn curved_with(radius: f64, shift_to_electrode_edge: bool, approx: SagApprox) -> Result<Self, CurvatureError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CurvatureError::InvalidRadius { value: radius });
        }
        Ok(CurvatureModel::Curved { radius, shift_to_electrode_edge, approx })
    }

    /// Calibrate R_c from a measured edge lift and build the default model.
    pub fn from_edge_lift(edge_lift: f64, extent: f64) -> Result<Self, CurvatureError> {
        Self::curved(calibrate_rc(edge_lift, extent)?)
    }

    pub fn is_curved(&self) -> bool {
        matches!(self, CurvatureModel::Curved { .. })
    }

    /// The circle profile must cover the whole membrane: R_c > extent.
    pub fn validate_for_extent(&self, extent: f64) -> Result<(), CurvatureError> {
        if let CurvatureModel::Curved { radius, .. } = *self {
            if radius <= extent {
                return Err(CurvatureError::RadiusTooSmall { radius, extent });
            }
        }
        Ok(())
    }

    /// Extra gap added by the sag at position `r` for electrode-less length `r0`.
    pub fn extra_gap(&self, r: f64, r0: f64) -> Result<f64, CurvatureError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(CurvatureError::InvalidPosition { value: r });
        }
        if !(r0.is_finite() && r0 >= 0.0) {
            return Err(CurvatureError::InvalidPosition { value: r0 });
        }
        match *self {
            CurvatureModel::Flat => Ok(0.0),
            CurvatureModel::Curved { radius, shift_to_electrode_edge, approx } => {
                let s = if shift_to_electrode_edge { (r - r0).max(0.0) } else { r };
                sag(s, radius, approx)
            }
        }
    }
}

fn sag(s: f64, radius: f64, approx: SagApprox) -> Result<f64, CurvatureError> {
    match approx {
        SagApprox::ExactCircle => {
            if s > radius {
                return Err(CurvatureError::DomainError { s, radius });
            }
            let u = s / radius;
            Ok(radius * (1.0 - (1.0 - u * u).sqrt()))
        }
        SagApprox::Quadratic => Ok(s * s / (2.0 * radius)),
    }
}

/// Infallible sag evaluator for integrand hot paths. The caller must have
/// checked `validate_for_extent` so the circle expression stays defined.
pub(crate) fn sag_fn(model: CurvatureModel, r0: f64) -> impl Fn(f64) -> f64 + Sync + Copy {
    move |r: f64| match model {
        CurvatureModel::Flat => 0.0,
        CurvatureModel::Curved { radius, shift_to_electrode_edge, approx } => {
            let s = if shift_to_electrode_edge { (r - r0).max(0.0) } else { r };
            match approx {
                SagApprox::ExactCircle => {
                    let u = s / radius;
                    radius * (1.0 - (1.0 - u * u).max(0.0).sqrt())
                }
                SagApprox::Quadratic => s * s / (2.0 * radius),
            }
        }
    }
}
