//! Design-exploration toolkit for capacitive hair-flow-sensor membranes.
//!
//! A tilting membrane over a conductive substrate forms a pair of
//! half-plate capacitors; this crate models the readout of that geometry
//! end to end:
//!
//! * [`geometry`] — membrane/electrode domain types and the effective
//!   dielectric gap d′ = d + (t1 + t2)/ε_r;
//! * [`quadrature`] — deterministic 2-D Gauss-Legendre panel integration,
//!   the numerical backbone for everything below;
//! * [`curvature`] — stress-induced sag profiles a(r) and calibration of
//!   the radius of curvature from a measured edge lift;
//! * [`capacitance`] — C(α), sensitivity ∂C/∂α, softening coefficient κ,
//!   the published flat closed forms, and a finite-difference oracle;
//! * [`tuning`] — electrostatic spring softening S_eff(U), resonance shift
//!   ω_eff(U), pull-in voltage, and the second-order frequency response;
//! * [`optimizer`] — electrode-less length sweeps, optimum refinement, and
//!   the flat/curved/reduced comparison report;
//! * [`config`] / [`commands`] — JSON run configs and the CLI command
//!   implementations (CSV and JSON emission).

pub mod capacitance;
pub mod commands;
pub mod config;
pub mod curvature;
pub mod geometry;
pub mod optimizer;
pub mod quadrature;
pub mod tuning;

pub use capacitance::{
    capacitance, closed_form_flat, ess_coefficient, fd_check, metrics, sensitivity, Method,
    MetricsError, SensorMetrics, TiltState,
};
pub use config::{parse_config, serialize_config, ConfigError, RunConfig};
pub use curvature::{calibrate_rc, CurvatureError, CurvatureModel, SagApprox};
pub use geometry::{
    ElectrodeLayout, GeometryError, MembraneSpec, Shape, Side, VACUUM_PERMITTIVITY,
};
pub use optimizer::{
    comparison_report, refine_optimum, sweep_r0, ComparisonReport, Objective, OptimError,
    SweepCurve, SweepGrid, SweepSample,
};
pub use quadrature::{integrate_polar, integrate_rect, QuadError, QuadSpec};
pub use tuning::{
    frequency_response, omega_eff, pull_in_voltage, s_eff, BiasPoint, MechanicalParams,
    TuningError,
};
