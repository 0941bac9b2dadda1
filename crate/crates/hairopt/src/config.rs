//! JSON run-configuration: parsing, validation, and conversion to domain
//! types. Files carry lengths in µm and voltages in V; conversion to SI
//! happens here and nowhere else.
//!
//! Parsing is strict: unknown keys are rejected with the offending key path,
//! and every mutual-exclusion rule is checked before any computation runs.

use crate::curvature::{calibrate_rc, CurvatureModel, SagApprox};
use crate::geometry::{ElectrodeLayout, MembraneSpec, Shape, Side};
use crate::optimizer::SweepGrid;
use crate::quadrature::QuadSpec;
use crate::tuning::MechanicalParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

const UM: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("unit error at {path}: {reason}")]
    Unit { path: String, reason: String },
}

impl ConfigError {
    fn schema(path: &str, reason: impl Into<String>) -> Self {
        ConfigError::Schema { path: path.to_string(), reason: reason.into() }
    }

    fn unit(path: &str, reason: impl Into<String>) -> Self {
        ConfigError::Unit { path: path.to_string(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Circular,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembraneConfig {
    #[serde(default = "default_shape")]
    pub shape: ShapeKind,
    /// Circular radius, µm. Defaults to 85 for circular membranes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_um: Option<f64>,
    /// Rectangular half-length along the tilt direction, µm. Defaults to 85.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length_um: Option<f64>,
    /// Rectangular width along the torsion axis, µm. Defaults to 170.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_um: Option<f64>,
    #[serde(default = "default_gap_um")]
    pub gap_um: f64,
    #[serde(default = "default_t1_um")]
    pub t1_um: f64,
    #[serde(default = "default_t2_um")]
    pub t2_um: f64,
    #[serde(default = "default_eps_r")]
    pub eps_r: f64,
}

fn default_shape() -> ShapeKind {
    ShapeKind::Circular
}

fn default_gap_um() -> f64 {
    1.0
}

fn default_t1_um() -> f64 {
    1.0
}

fn default_t2_um() -> f64 {
    0.1
}

fn default_eps_r() -> f64 {
    crate::geometry::DEFAULT_EPS_R
}

impl Default for MembraneConfig {
    fn default() -> Self {
        Self {
            shape: default_shape(),
            radius_um: None,
            half_length_um: None,
            width_um: None,
            gap_um: default_gap_um(),
            t1_um: default_t1_um(),
            t2_um: default_t2_um(),
            eps_r: default_eps_r(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    Flat,
    Curved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SagApproxConfig {
    ExactCircle,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    #[serde(default = "default_mode")]
    pub mode: CurvatureMode,
    /// Measured extra gap at the membrane edge, µm. Curved mode only;
    /// mutually exclusive with `R_c_um`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_lift_um: Option<f64>,
    /// Radius of curvature, µm. Curved mode only.
    #[serde(default, rename = "R_c_um", skip_serializing_if = "Option::is_none")]
    pub r_c_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_to_electrode_edge: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<SagApproxConfig>,
}

fn default_mode() -> CurvatureMode {
    CurvatureMode::Flat
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            edge_lift_um: None,
            r_c_um: None,
            shift_to_electrode_edge: None,
            approx: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideConfig {
    PlusHalf,
    MinusHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    #[serde(default)]
    pub r0_um: f64,
    #[serde(default = "default_side")]
    pub side: SideConfig,
}

fn default_side() -> SideConfig {
    SideConfig::PlusHalf
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self { r0_um: 0.0, side: default_side() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub start_um: f64,
    /// Defaults to the membrane extent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_um: Option<f64>,
    #[serde(default = "default_step_um")]
    pub step_um: f64,
}

fn default_step_um() -> f64 {
    1.0
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { start_um: 0.0, stop_um: None, step_um: default_step_um() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    /// Moment of inertia, kg·m².
    #[serde(rename = "J")]
    pub inertia: f64,
    /// Zero-bias torsional stiffness, N·m/rad.
    #[serde(rename = "S0")]
    pub stiffness: f64,
    /// Torsional resistance, N·m·s/rad.
    #[serde(rename = "R_damp")]
    pub damping: f64,
    /// Bias points to evaluate, V.
    #[serde(rename = "U_list")]
    pub u_list: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    1e-10
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: default_rel_tol() }
    }
}

/// One full run description as read from a JSON file (lengths in µm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub membrane: MembraneConfig,
    #[serde(default)]
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningConfig>,
    #[serde(default)]
    pub quad: QuadConfig,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            membrane: MembraneConfig::default(),
            curvature: CurvatureConfig::default(),
            layout: LayoutConfig::default(),
            sweep: SweepConfig::default(),
            tuning: None,
            quad: QuadConfig::default(),
        }
    }
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| ConfigError::schema(&e.path().to_string(), e.inner().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serialize a config back to pretty JSON; `parse_config` round-trips it.
pub fn serialize_config(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serialization cannot fail")
}

fn require_positive(path: &str, value: f64) -> Result<(), ConfigError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ConfigError::unit(path, format!("length must be > 0 µm, got {value}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::schema(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        match self.membrane.shape {
            ShapeKind::Circular => {
                if self.membrane.half_length_um.is_some() || self.membrane.width_um.is_some() {
                    return Err(ConfigError::schema(
                        "membrane",
                        "half_length_um/width_um are rectangular-only keys",
                    ));
                }
            }
            ShapeKind::Rectangular => {
                if self.membrane.radius_um.is_some() {
                    return Err(ConfigError::schema(
                        "membrane",
                        "radius_um is a circular-only key",
                    ));
                }
            }
        }
        require_positive("membrane.gap_um", self.membrane.gap_um)?;
        require_positive("membrane.t1_um", self.membrane.t1_um)?;
        require_positive("membrane.t2_um", self.membrane.t2_um)?;
        if let Some(r) = self.membrane.radius_um {
            require_positive("membrane.radius_um", r)?;
        }
        if let Some(h) = self.membrane.half_length_um {
            require_positive("membrane.half_length_um", h)?;
        }
        if let Some(w) = self.membrane.width_um {
            require_positive("membrane.width_um", w)?;
        }
        if !(self.membrane.eps_r.is_finite() && self.membrane.eps_r > 1.0) {
            return Err(ConfigError::unit(
                "membrane.eps_r",
                format!("relative permittivity must be > 1, got {}", self.membrane.eps_r),
            ));
        }

        let c = &self.curvature;
        match c.mode {
            CurvatureMode::Flat => {
                if c.edge_lift_um.is_some() || c.r_c_um.is_some() {
                    return Err(ConfigError::schema(
                        "curvature",
                        "edge_lift_um/R_c_um require mode = \"curved\"",
                    ));
                }
                if c.shift_to_electrode_edge.is_some() || c.approx.is_some() {
                    return Err(ConfigError::schema(
                        "curvature",
                        "shift_to_electrode_edge/approx require mode = \"curved\"",
                    ));
                }
            }
            CurvatureMode::Curved => match (c.edge_lift_um, c.r_c_um) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::schema(
                        "curvature",
                        "edge_lift_um and R_c_um are mutually exclusive",
                    ));
                }
                (None, None) => {
                    return Err(ConfigError::schema(
                        "curvature",
                        "curved mode needs exactly one of edge_lift_um or R_c_um",
                    ));
                }
                (Some(lift), None) => require_positive("curvature.edge_lift_um", lift)?,
                (None, Some(rc)) => require_positive("curvature.R_c_um", rc)?,
            },
        }

        if !(self.layout.r0_um.is_finite() && self.layout.r0_um >= 0.0) {
            return Err(ConfigError::unit(
                "layout.r0_um",
                format!("r0 must be >= 0 µm, got {}", self.layout.r0_um),
            ));
        }
        if !(self.sweep.start_um.is_finite() && self.sweep.start_um >= 0.0) {
            return Err(ConfigError::unit("sweep.start_um", "start must be >= 0 µm"));
        }
        require_positive("sweep.step_um", self.sweep.step_um)?;
        if let Some(stop) = self.sweep.stop_um {
            if !(stop.is_finite() && stop > self.sweep.start_um) {
                return Err(ConfigError::unit("sweep.stop_um", "stop must exceed start"));
            }
        }
        if let Some(t) = &self.tuning {
            if !(t.inertia.is_finite() && t.inertia > 0.0) {
                return Err(ConfigError::unit("tuning.J", "moment of inertia must be > 0"));
            }
            if !(t.stiffness.is_finite() && t.stiffness > 0.0) {
                return Err(ConfigError::unit("tuning.S0", "stiffness must be > 0"));
            }
            if !(t.damping.is_finite() && t.damping >= 0.0) {
                return Err(ConfigError::unit("tuning.R_damp", "damping must be >= 0"));
            }
            if t.u_list.is_empty() {
                return Err(ConfigError::schema("tuning.U_list", "at least one bias point required"));
            }
            if let Some(bad) = t.u_list.iter().find(|u| !(u.is_finite() && **u >= 0.0)) {
                return Err(ConfigError::unit(
                    "tuning.U_list",
                    format!("bias voltages must be >= 0 V, got {bad}"),
                ));
            }
        }
        if !(self.quad.rel_tol.is_finite() && self.quad.rel_tol > 0.0 && self.quad.rel_tol < 1e-2) {
            return Err(ConfigError::unit(
                "quad.rel_tol",
                format!("rel_tol must satisfy 0 < rel_tol < 1e-2, got {}", self.quad.rel_tol),
            ));
        }
        Ok(())
    }

    pub fn membrane_spec(&self) -> Result<MembraneSpec, ConfigError> {
        let m = &self.membrane;
        let shape = match m.shape {
            ShapeKind::Circular => Shape::Circular { radius: m.radius_um.unwrap_or(85.0) * UM },
            ShapeKind::Rectangular => Shape::Rectangular {
                half_length: m.half_length_um.unwrap_or(85.0) * UM,
                width: m.width_um.unwrap_or(170.0) * UM,
            },
        };
        MembraneSpec::new(shape, m.gap_um * UM, m.t1_um * UM, m.t2_um * UM, m.eps_r)
            .map_err(|e| ConfigError::unit("membrane", e.to_string()))
    }

    pub fn curvature_model(&self, spec: &MembraneSpec) -> Result<CurvatureModel, ConfigError> {
        let c = &self.curvature;
        match c.mode {
            CurvatureMode::Flat => Ok(CurvatureModel::flat()),
            CurvatureMode::Curved => {
                let radius = match (c.edge_lift_um, c.r_c_um) {
                    (Some(lift), None) => calibrate_rc(lift * UM, spec.extent())
                        .map_err(|e| ConfigError::unit("curvature.edge_lift_um", e.to_string()))?,
                    (None, Some(rc)) => rc * UM,
                    _ => unreachable!("validated earlier"),
                };
                let approx = match c.approx.unwrap_or(SagApproxConfig::ExactCircle) {
                    SagApproxConfig::ExactCircle => SagApprox::ExactCircle,
                    SagApproxConfig::Quadratic => SagApprox::Quadratic,
                };
                let model = CurvatureModel::curved_with(
                    radius,
                    c.shift_to_electrode_edge.unwrap_or(true),
                    approx,
                )
                .map_err(|e| ConfigError::unit("curvature", e.to_string()))?;
                model
                    .validate_for_extent(spec.extent())
                    .map_err(|e| ConfigError::unit("curvature", e.to_string()))?;
                Ok(model)
            }
        }
    }

    pub fn electrode_layout(&self, spec: &MembraneSpec) -> Result<ElectrodeLayout, ConfigError> {
        let side = match self.layout.side {
            SideConfig::PlusHalf => Side::PlusHalf,
            SideConfig::MinusHalf => Side::MinusHalf,
        };
        let layout = ElectrodeLayout::new(self.layout.r0_um * UM, side)
            .map_err(|e| ConfigError::unit("layout.r0_um", e.to_string()))?;
        layout
            .validate_for(spec)
            .map_err(|e| ConfigError::unit("layout.r0_um", e.to_string()))?;
        Ok(layout)
    }

    pub fn sweep_grid(&self, spec: &MembraneSpec) -> Result<SweepGrid, ConfigError> {
        let stop = self.sweep.stop_um.map(|s| s * UM).unwrap_or_else(|| spec.extent());
        SweepGrid::from_range(self.sweep.start_um * UM, stop, self.sweep.step_um * UM)
            .map_err(|e| ConfigError::unit("sweep", e.to_string()))
    }

    pub fn quad_spec(&self) -> QuadSpec {
        QuadSpec { rel_tol: self.quad.rel_tol, ..QuadSpec::default() }
    }

    pub fn mechanical_params(&self) -> Result<Option<MechanicalParams>, ConfigError> {
        match &self.tuning {
            None => Ok(None),
            Some(t) => MechanicalParams::new(t.inertia, t.stiffness, t.damping)
                .map(Some)
                .map_err(|e| ConfigError::unit("tuning", e.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let spec = cfg.membrane_spec().unwrap();
        assert_eq!(spec.extent(), 85e-6);
        assert_eq!(spec.eps_r, 7.5);
        assert_eq!(cfg.curvature_model(&spec).unwrap(), CurvatureModel::flat());
        assert_eq!(cfg.sweep_grid(&spec).unwrap().points().len(), 86);
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        let err = parse_config(r#"{"membrane": {"radios_um": 85}}"#).unwrap_err();
        match err {
            ConfigError::Schema { path, reason } => {
                assert!(path.contains("membrane"), "path = {path}");
                assert!(reason.contains("radios_um"), "reason = {reason}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn curvature_mutual_exclusion() {
        let err = parse_config(
            r#"{"curvature": {"mode": "curved", "edge_lift_um": 3.0, "R_c_um": 1205.7}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
        let err = parse_config(r#"{"curvature": {"mode": "curved"}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
        let err = parse_config(r#"{"curvature": {"edge_lift_um": 3.0}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
    }

    #[test]
    fn edge_lift_calibrates_radius() {
        let cfg = parse_config(r#"{"curvature": {"mode": "curved", "edge_lift_um": 3.0}}"#).unwrap();
        let spec = cfg.membrane_spec().unwrap();
        match cfg.curvature_model(&spec).unwrap() {
            CurvatureModel::Curved { radius, shift_to_electrode_edge, approx } => {
                assert!((radius - 1.2057e-3).abs() / 1.2057e-3 < 1e-4);
                assert!(shift_to_electrode_edge);
                assert_eq!(approx, SagApprox::ExactCircle);
            }
            other => panic!("expected curved model, got {other:?}"),
        }
    }

    #[test]
    fn non_positive_lengths_are_unit_errors() {
        let err = parse_config(r#"{"membrane": {"gap_um": 0.0}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Unit { .. }));
        let err = parse_config(r#"{"membrane": {"gap_um": -1.0}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Unit { .. }));
    }

    #[test]
    fn shape_specific_keys_enforced() {
        let err = parse_config(r#"{"membrane": {"shape": "circular", "width_um": 170}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
        let err = parse_config(r#"{"membrane": {"shape": "rectangular", "radius_um": 85}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
        let cfg = parse_config(r#"{"membrane": {"shape": "rectangular"}}"#).unwrap();
        let spec = cfg.membrane_spec().unwrap();
        assert_eq!(spec.extent(), 85e-6);
        match spec.shape {
            Shape::Rectangular { width, .. } => assert_eq!(width, 170e-6),
            _ => panic!("expected rectangular"),
        }
    }

    #[test]
    fn schema_version_checked() {
        let err = parse_config(r#"{"schema_version": 2}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
    }

    #[test]
    fn tuning_validation() {
        let good = r#"{"tuning": {"J": 1e-16, "S0": 1e-9, "R_damp": 0.0, "U_list": [0.0, 0.5]}}"#;
        let cfg = parse_config(good).unwrap();
        assert!(cfg.mechanical_params().unwrap().is_some());
        let err = parse_config(r#"{"tuning": {"J": 1e-16, "S0": 1e-9, "R_damp": 0.0, "U_list": []}}"#)
            .unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
        let err = parse_config(r#"{"tuning": {"J": 0.0, "S0": 1e-9, "R_damp": 0.0, "U_list": [1.0]}}"#)
            .unwrap_err();
        assert!(matches!(err, ConfigError::Unit { .. }));
        // missing members of the tuning block are schema errors
        let err = parse_config(r#"{"tuning": {"J": 1e-16}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
    }

    #[test]
    fn round_trip_identity() {
        let samples = [
            "{}".to_string(),
            r#"{"curvature": {"mode": "curved", "edge_lift_um": 3.0}}"#.to_string(),
            r#"{
                "membrane": {"shape": "rectangular", "half_length_um": 90, "width_um": 200, "eps_r": 11.59},
                "curvature": {"mode": "curved", "R_c_um": 1205.7, "shift_to_electrode_edge": false, "approx": "quadratic"},
                "layout": {"r0_um": 30, "side": "minus_half"},
                "sweep": {"start_um": 0, "stop_um": 80, "step_um": 0.5},
                "tuning": {"J": 1e-16, "S0": 1e-9, "R_damp": 1e-13, "U_list": [0, 0.5, 1.0]},
                "quad": {"rel_tol": 1e-9}
            }"#
            .to_string(),
        ];
        for text in samples {
            let cfg = parse_config(&text).unwrap();
            let round = parse_config(&serialize_config(&cfg)).unwrap();
            assert_eq!(cfg, round);
        }
    }
}
