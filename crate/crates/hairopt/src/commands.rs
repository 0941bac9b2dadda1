//! Command implementations behind the CLI: each takes a parsed [`RunConfig`]
//! and renders its output document (JSON or CSV) as a string. All numeric
//! output is locale-independent with `.` decimal separators and LF line
//! endings; capacitance-like values print in exponent notation with nine
//! significant digits.

use crate::capacitance::{closed_form_flat, metrics, SensorMetrics};
use crate::config::{ConfigError, RunConfig};
use crate::optimizer::{comparison_report, sweep_r0, ComparisonReport, Objective};
use crate::tuning::{omega_eff, pull_in_voltage, s_eff, BiasPoint, TuningError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Computation(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Computation(_) => 3,
        }
    }

    /// Machine-readable error document for the diagnostic stream.
    pub fn to_json(&self) -> String {
        let kind = match self {
            CommandError::Config(ConfigError::Schema { .. }) => "schema",
            CommandError::Config(ConfigError::Unit { .. }) => "unit",
            CommandError::Computation(_) => "computation",
        };
        json!({ "error": kind, "message": self.to_string() }).to_string()
    }
}

fn compute_err(e: impl std::fmt::Display) -> CommandError {
    CommandError::Computation(e.to_string())
}

/// Nine significant digits in exponent notation.
fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Round to nine significant digits for JSON number output.
fn round_sig9(x: f64) -> f64 {
    fmt_sig9(x).parse().expect("formatted float parses back")
}

/// Micrometer value with trailing zeros trimmed.
fn fmt_um(meters: f64) -> String {
    let um = meters * 1e6;
    let s = format!("{um:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn metrics_json(m: &SensorMetrics) -> serde_json::Value {
    let method = match m.method {
        crate::capacitance::Method::Quadrature => "quadrature",
        crate::capacitance::Method::ClosedFormAsPrinted => "closed_form_as_printed",
    };
    json!({
        "method": method,
        "C_F": round_sig9(m.capacitance),
        "dCdalpha_F_per_rad": round_sig9(m.sensitivity),
        "kappa_F_per_rad2": round_sig9(m.kappa),
    })
}

/// Metrics of the configured electrode, quadrature path plus (for circular
/// membranes) the published closed forms, as a JSON document.
pub fn cmd_metrics(cfg: &RunConfig) -> Result<String, CommandError> {
    let spec = cfg.membrane_spec()?;
    let layout = cfg.electrode_layout(&spec)?;
    let curv = cfg.curvature_model(&spec)?;
    let quad = cfg.quad_spec();
    let m = metrics(&spec, &layout, &curv, &quad).map_err(compute_err)?;
    let printed = closed_form_flat(&spec).ok();
    let doc = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "quadrature": metrics_json(&m),
        "closed_form_as_printed": printed.map(|p| metrics_json(&p)),
    });
    Ok(serde_json::to_string_pretty(&doc).expect("json serialization") + "\n")
}

/// Electrode-less length sweep of the PlusHalf electrode as CSV.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CommandError> {
    let spec = cfg.membrane_spec()?;
    let curv = cfg.curvature_model(&spec)?;
    let grid = cfg.sweep_grid(&spec)?;
    let quad = cfg.quad_spec();
    let curve = sweep_r0(&spec, &curv, &grid, &quad).map_err(compute_err)?;
    let mut out = String::from("r0_um,C_F,dCdalpha_F_per_rad,kappa_F_per_rad2\n");
    for s in &curve.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_um(s.r0),
            fmt_sig9(s.metrics.capacitance),
            fmt_sig9(s.metrics.sensitivity),
            fmt_sig9(s.metrics.kappa),
        ));
    }
    Ok(out)
}

fn report_json(report: &ComparisonReport) -> serde_json::Value {
    let objective = match report.objective {
        Objective::Sensitivity => "sensitivity",
        Objective::Kappa => "kappa",
    };
    json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "objective": objective,
        "rows": {
            "flat": metrics_json(&report.flat),
            "curved": metrics_json(&report.curved),
            "reduced": metrics_json(&report.reduced),
            "flat_closed_form_as_printed": report.printed_flat.map(|p| metrics_json(&p)),
        },
        "reduced_r0_um": round_sig9(report.reduced_r0 * 1e6),
        "ratios": {
            "curved_over_flat_sensitivity": round_sig9(report.curved_over_flat_sensitivity()),
            "curved_over_flat_kappa": round_sig9(report.curved_over_flat_kappa()),
            "reduced_over_curved_sensitivity": round_sig9(report.reduced_over_curved_sensitivity()),
            "reduced_over_curved_kappa": round_sig9(report.reduced_over_curved_kappa()),
        },
    })
}

fn report_table(report: &ComparisonReport) -> String {
    let mut t = String::new();
    let row = |label: &str, m: &SensorMetrics| {
        format!(
            "{label:<34} {:>16} {:>16} {:>16}\n",
            fmt_sig9(m.capacitance),
            fmt_sig9(m.sensitivity.abs()),
            fmt_sig9(m.kappa),
        )
    };
    t.push_str(&format!(
        "{:<34} {:>16} {:>16} {:>16}\n",
        "membrane", "C [F]", "|dC/da| [F/rad]", "kappa [F/rad2]"
    ));
    t.push_str(&row("flat (quadrature)", &report.flat));
    t.push_str(&row("curved (quadrature)", &report.curved));
    t.push_str(&row(
        &format!("reduced electrode, r0 = {} um", fmt_um(report.reduced_r0)),
        &report.reduced,
    ));
    if let Some(printed) = &report.printed_flat {
        t.push_str(&row("flat (closed form, as printed)", printed));
    }
    t.push_str(&format!(
        "ratios: curved/flat = {:.4} (sens) {:.4} (kappa); reduced/curved = {:.4} (sens) {:.4} (kappa)\n",
        report.curved_over_flat_sensitivity(),
        report.curved_over_flat_kappa(),
        report.reduced_over_curved_sensitivity(),
        report.reduced_over_curved_kappa(),
    ));
    t
}

/// Flat/curved/reduced comparison: returns (JSON document, human table).
pub fn cmd_report(cfg: &RunConfig, objective: Objective) -> Result<(String, String), CommandError> {
    let spec = cfg.membrane_spec()?;
    let curv = cfg.curvature_model(&spec)?;
    let quad = cfg.quad_spec();
    let report = comparison_report(&spec, &curv, objective, &quad).map_err(compute_err)?;
    let doc = serde_json::to_string_pretty(&report_json(&report)).expect("json serialization") + "\n";
    Ok((doc, report_table(&report)))
}

/// Bias sweep: S_eff and ω_eff per configured bias point. κ comes from the
/// quadrature metrics of the configured sensor. Past-pull-in rows leave the
/// ω field empty and add a warning line for the diagnostic stream.
pub fn cmd_tune(cfg: &RunConfig) -> Result<(String, Vec<String>), CommandError> {
    let mech = cfg.mechanical_params()?.ok_or_else(|| {
        ConfigError::Schema {
            path: "tuning".into(),
            reason: "tuning parameters (J, S0, R_damp, U_list) are required for the tune command"
                .into(),
        }
    })?;
    let spec = cfg.membrane_spec()?;
    let layout = cfg.electrode_layout(&spec)?;
    let curv = cfg.curvature_model(&spec)?;
    let quad = cfg.quad_spec();
    let kappa = crate::capacitance::ess_coefficient(&spec, &layout, &curv, &quad).map_err(compute_err)?;

    let mut out = String::from("U_V,S_eff,omega_eff_rad_s\n");
    let mut warnings = Vec::new();
    let u_list = &cfg.tuning.as_ref().expect("checked above").u_list;
    for &u in u_list {
        let bias = BiasPoint::new(u).map_err(compute_err)?;
        let s = s_eff(&mech, kappa, bias);
        match omega_eff(&mech, kappa, bias) {
            Ok(w) => out.push_str(&format!("{u},{},{}\n", fmt_sig9(s), fmt_sig9(w))),
            Err(TuningError::PastPullIn { .. }) => {
                out.push_str(&format!("{u},{},\n", fmt_sig9(s)));
                let pull_in = pull_in_voltage(&mech, kappa).map_err(compute_err)?;
                warnings.push(
                    json!({
                        "warning": "past_pull_in",
                        "message": format!(
                            "U = {u} V exceeds the pull-in voltage {} V; omega_eff undefined",
                            fmt_sig9(pull_in)
                        ),
                    })
                    .to_string(),
                );
            }
            Err(e) => return Err(compute_err(e)),
        }
    }
    Ok((out, warnings))
}
