//! Membrane geometry, material stack, and electrode layout.
//!
//! All lengths are in meters. Config-file inputs are given in micrometers
//! and converted once at the parsing boundary, so everything below this
//! module works in strict SI.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854187817e-12;

/// Default relative permittivity of the silicon nitride stack.
pub const DEFAULT_EPS_R: f64 = 7.5;

/// Alternative permittivity preset that makes the flat closed-form
/// sensitivity line up with the published comparison value.
pub const PAPER_CALIBRATED_EPS_R: f64 = 11.59;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositiveLength { name: &'static str, value: f64 },
    #[error("relative permittivity must be > 1 and finite, got {value}")]
    PermittivityOutOfRange { value: f64 },
    #[error("electrode-less length must be finite and >= 0, got {value}")]
    InvalidElectrodeLength { value: f64 },
    #[error("electrode-less length {r0} m exceeds membrane extent {extent} m")]
    ElectrodeExceedsMembrane { r0: f64, extent: f64 },
}

/// Membrane planform. The tilt axis passes through the center; for the
/// rectangular shape `half_length` runs along the tilt direction (from the
/// torsion axis to the membrane edge) and `width` along the axis itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Circular { radius: f64 },
    Rectangular { half_length: f64, width: f64 },
}

/// Geometry and material stack of one sensor membrane.
///
/// `gap_d` is the air gap between the electrodes, `t1` and `t2` the two
/// nitride layer thicknesses, `eps_r` the nitride relative permittivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneSpec {
    pub shape: Shape,
    pub gap_d: f64,
    pub t1: f64,
    pub t2: f64,
    pub eps_r: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(GeometryError::NonPositiveLength { name, value });
    }
    Ok(())
}

impl MembraneSpec {
    pub fn new(shape: Shape, gap_d: f64, t1: f64, t2: f64, eps_r: f64) -> Result<Self, GeometryError> {
        match shape {
            Shape::Circular { radius } => check_positive("radius", radius)?,
            Shape::Rectangular { half_length, width } => {
                check_positive("half_length", half_length)?;
                check_positive("width", width)?;
            }
        }
        check_positive("gap_d", gap_d)?;
        check_positive("t1", t1)?;
        check_positive("t2", t2)?;
        if !(eps_r.is_finite() && eps_r > 1.0) {
            return Err(GeometryError::PermittivityOutOfRange { value: eps_r });
        }
        Ok(Self { shape, gap_d, t1, t2, eps_r })
    }

    /// Default circular membrane: R = 85 µm, d = 1 µm, t1 = 1 µm, t2 = 0.1 µm.
    pub fn circular_default() -> Self {
        Self {
            shape: Shape::Circular { radius: 85e-6 },
            gap_d: 1e-6,
            t1: 1e-6,
            t2: 0.1e-6,
            eps_r: DEFAULT_EPS_R,
        }
    }

    /// Default rectangular membrane: half-length 85 µm, width 170 µm, same stack.
    pub fn rectangular_default() -> Self {
        Self {
            shape: Shape::Rectangular { half_length: 85e-6, width: 170e-6 },
            ..Self::circular_default()
        }
    }

    pub fn with_eps_r(self, eps_r: f64) -> Result<Self, GeometryError> {
        Self::new(self.shape, self.gap_d, self.t1, self.t2, eps_r)
    }

    /// Outer extent along the tilt direction: R for circular membranes,
    /// the half-length for rectangular ones.
    pub fn extent(&self) -> f64 {
        match self.shape {
            Shape::Circular { radius } => radius,
            Shape::Rectangular { half_length, .. } => half_length,
        }
    }

    /// Effective dielectric gap d' = d + (t1 + t2) / eps_r.
    pub fn effective_gap(&self) -> f64 {
        self.gap_d + (self.t1 + self.t2) / self.eps_r
    }
}

/// Which half-membrane electrode: `PlusHalf` covers φ ∈ [0, π] (x > 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    PlusHalf,
    MinusHalf,
}

impl Side {
    /// Sign of ∂C/∂α for this electrode under the fixed convention that
    /// α > 0 tips the PlusHalf electrode toward the substrate.
    pub fn tilt_sign(self) -> f64 {
        match self {
            Side::PlusHalf => 1.0,
            Side::MinusHalf => -1.0,
        }
    }
}

/// Electrode footprint on one half-membrane. `r0` is the electrode-less
/// length measured outward from the torsion axis; 0 means a full electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    pub r0: f64,
    pub side: Side,
}

impl ElectrodeLayout {
    pub fn new(r0: f64, side: Side) -> Result<Self, GeometryError> {
        if !(r0.is_finite() && r0 >= 0.0) {
            return Err(GeometryError::InvalidElectrodeLength { value: r0 });
        }
        Ok(Self { r0, side })
    }

    /// Full electrode (r0 = 0) on the given side.
    pub fn full(side: Side) -> Self {
        Self { r0: 0.0, side }
    }

    pub fn validate_for(&self, spec: &MembraneSpec) -> Result<(), GeometryError> {
        let extent = spec.extent();
        if self.r0 > extent {
            return Err(GeometryError::ElectrodeExceedsMembrane { r0: self.r0, extent });
        }
        Ok(())
    }
}
