//! Electrode-less length sweeps, optimum refinement, and the
//! flat / curved / reduced-electrode comparison report.
//!
//! On a curved membrane, growing r0 first relieves sag (metrics improve),
//! then starves the electrode of area (metrics fall), so sensitivity and κ
//! each peak at an interior r0. Sweep samples are independent and evaluated
//! in parallel; results are merged in grid order, so output is deterministic.

use crate::capacitance::{closed_form_flat, metrics, MetricsError, SensorMetrics};
use crate::curvature::CurvatureModel;
use crate::geometry::{ElectrodeLayout, MembraneSpec, Side};
use crate::quadrature::QuadSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("sweep grid must be non-empty, finite, non-negative and strictly increasing")]
    InvalidGrid,
    #[error("invalid sweep range: start {start}, stop {stop}, step {step} (all m)")]
    InvalidRange { start: f64, stop: f64, step: f64 },
    #[error("grid point {max} m lies past the membrane extent {extent} m")]
    GridOutOfRange { max: f64, extent: f64 },
    #[error("bracket ({lo} m, {hi} m) is invalid for this membrane")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("metric is monotone on the bracket; the optimum sits on the boundary")]
    NotBracketed,
    #[error("metric evaluation failed at r0 = {r0} m: {source}")]
    Sample {
        r0: f64,
        #[source]
        source: MetricsError,
    },
}

/// Which metric an optimum refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    Sensitivity,
    Kappa,
}

/// Strictly increasing r0 sample positions, m.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    points: Vec<f64>,
}

impl SweepGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self, OptimError> {
        if points.is_empty() || !points.iter().all(|p| p.is_finite() && *p >= 0.0) {
            return Err(OptimError::InvalidGrid);
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OptimError::InvalidGrid);
        }
        Ok(Self { points })
    }

    /// Inclusive range start..=stop with uniform step. Accumulated rounding
    /// never pushes a point past `stop`.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self, OptimError> {
        let ok = start.is_finite() && stop.is_finite() && step.is_finite();
        if !ok || start < 0.0 || stop <= start || step <= 0.0 {
            return Err(OptimError::InvalidRange { start, stop, step });
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        let points = (0..=n)
            .map(|i| (start + i as f64 * step).min(stop))
            .collect();
        Self::from_points(points)
    }

    /// The default grid: 0 to the membrane extent in 1 µm steps.
    pub fn default_for(spec: &MembraneSpec) -> Self {
        Self::from_range(0.0, spec.extent(), 1e-6).expect("default grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// One sweep sample: the metrics bundle evaluated at `r0` (capacitance at
/// zero tilt, sensitivity and κ in the small-tilt limit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    pub r0: f64,
    pub metrics: SensorMetrics,
}

/// Sweep result with refined optima locations (m).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub samples: Vec<SweepSample>,
    pub argmax_sensitivity: f64,
    pub argmax_kappa: f64,
}

fn metric_value(
    spec: &MembraneSpec,
    curv: &CurvatureModel,
    r0: f64,
    objective: Objective,
    quad: &QuadSpec,
) -> Result<f64, OptimError> {
    let eval = || -> Result<f64, MetricsError> {
        let layout = ElectrodeLayout::new(r0, Side::PlusHalf)?;
        match objective {
            Objective::Sensitivity => {
                crate::capacitance::sensitivity(spec, &layout, curv, quad).map(f64::abs)
            }
            Objective::Kappa => crate::capacitance::ess_coefficient(spec, &layout, curv, quad),
        }
    };
    eval().map_err(|source| OptimError::Sample { r0, source })
}

/// Golden-section maximization of the chosen metric over `bracket`,
/// to an interval of 0.1 µm; returns the midpoint. Errors with
/// `NotBracketed` when the metric has no interior maximum there.
pub fn refine_optimum(
    spec: &MembraneSpec,
    curv: &CurvatureModel,
    objective: Objective,
    bracket: (f64, f64),
    quad: &QuadSpec,
) -> Result<f64, OptimError> {
    const TOL: f64 = 0.1e-6;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (lo, hi) = bracket;
    let valid = lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo && hi <= spec.extent();
    if !valid {
        return Err(OptimError::InvalidBracket { lo, hi });
    }
    let f = |r0: f64| metric_value(spec, curv, r0, objective, quad);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > TOL {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    let x_star = 0.5 * (a + b);
    let f_star = f(x_star)?;
    if f_star > f_lo && f_star > f_hi {
        Ok(x_star)
    } else {
        Err(OptimError::NotBracketed)
    }
}

fn grid_argmax<M: Fn(&SensorMetrics) -> f64>(samples: &[SweepSample], metric: M) -> usize {
    // strict comparison keeps the first (smallest-r0) sample on plateaus
    let mut best = 0;
    for (i, s) in samples.iter().enumerate() {
        if metric(&s.metrics) > metric(&samples[best].metrics) {
            best = i;
        }
    }
    best
}

fn refined_argmax(
    spec: &MembraneSpec,
    curv: &CurvatureModel,
    objective: Objective,
    samples: &[SweepSample],
    idx: usize,
    quad: &QuadSpec,
) -> Result<f64, OptimError> {
    if idx == 0 || idx + 1 == samples.len() {
        return Ok(samples[idx].r0);
    }
    let bracket = (samples[idx - 1].r0, samples[idx + 1].r0);
    match refine_optimum(spec, curv, objective, bracket, quad) {
        Ok(x) => Ok(x),
        Err(OptimError::NotBracketed) => Ok(samples[idx].r0),
        Err(e) => Err(e),
    }
}

/// Evaluate the quadrature-path metrics over the grid and locate both
/// optima. Samples run in parallel; ordering and values are deterministic.
pub fn sweep_r0(
    spec: &MembraneSpec,
    curv: &CurvatureModel,
    grid: &SweepGrid,
    quad: &QuadSpec,
) -> Result<SweepCurve, OptimError> {
    let extent = spec.extent();
    let max = *grid.points().last().expect("grid is non-empty");
    if max > extent {
        return Err(OptimError::GridOutOfRange { max, extent });
    }
    let samples: Vec<SweepSample> = grid
        .points()
        .par_iter()
        .map(|&r0| {
            let layout =
                ElectrodeLayout::new(r0, Side::PlusHalf).map_err(|e| OptimError::Sample {
                    r0,
                    source: e.into(),
                })?;
            let m = metrics(spec, &layout, curv, quad)
                .map_err(|source| OptimError::Sample { r0, source })?;
            Ok(SweepSample { r0, metrics: m })
        })
        .collect::<Result<_, OptimError>>()?;

    let i_s = grid_argmax(&samples, |m| m.sensitivity.abs());
    let i_k = grid_argmax(&samples, |m| m.kappa);
    let argmax_sensitivity = refined_argmax(spec, curv, Objective::Sensitivity, &samples, i_s, quad)?;
    let argmax_kappa = refined_argmax(spec, curv, Objective::Kappa, &samples, i_k, quad)?;
    Ok(SweepCurve { samples, argmax_sensitivity, argmax_kappa })
}

/// Flat / curved / reduced-electrode comparison. The reduced row sits at the
/// refined optimum of `objective` (the sweep uses the default 1 µm grid).
/// Ratio columns are always recomputed from the rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub flat: SensorMetrics,
    pub curved: SensorMetrics,
    pub reduced: SensorMetrics,
    /// r0 of the reduced row, m.
    pub reduced_r0: f64,
    pub objective: Objective,
    /// Published flat closed forms for reference; circular membranes only.
    pub printed_flat: Option<SensorMetrics>,
}

impl ComparisonReport {
    pub fn curved_over_flat_sensitivity(&self) -> f64 {
        self.curved.sensitivity.abs() / self.flat.sensitivity.abs()
    }

    pub fn curved_over_flat_kappa(&self) -> f64 {
        self.curved.kappa / self.flat.kappa
    }

    pub fn reduced_over_curved_sensitivity(&self) -> f64 {
        self.reduced.sensitivity.abs() / self.curved.sensitivity.abs()
    }

    pub fn reduced_over_curved_kappa(&self) -> f64 {
        self.reduced.kappa / self.curved.kappa
    }
}

pub fn comparison_report(
    spec: &MembraneSpec,
    curv: &CurvatureModel,
    objective: Objective,
    quad: &QuadSpec,
) -> Result<ComparisonReport, OptimError> {
    let full = ElectrodeLayout::full(Side::PlusHalf);
    let wrap = |source: MetricsError, r0: f64| OptimError::Sample { r0, source };
    let flat = metrics(spec, &full, &CurvatureModel::flat(), quad).map_err(|e| wrap(e, 0.0))?;
    let curved = metrics(spec, &full, curv, quad).map_err(|e| wrap(e, 0.0))?;

    let sweep = sweep_r0(spec, curv, &SweepGrid::default_for(spec), quad)?;
    let reduced_r0 = match objective {
        Objective::Sensitivity => sweep.argmax_sensitivity,
        Objective::Kappa => sweep.argmax_kappa,
    };
    let reduced_layout = ElectrodeLayout::new(reduced_r0, Side::PlusHalf)
        .map_err(|e| wrap(e.into(), reduced_r0))?;
    let reduced = metrics(spec, &reduced_layout, curv, quad).map_err(|e| wrap(e, reduced_r0))?;

    Ok(ComparisonReport {
        flat,
        curved,
        reduced,
        reduced_r0,
        objective,
        printed_flat: closed_form_flat(spec).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadSpec {
        QuadSpec::default()
    }

    fn circ() -> MembraneSpec {
        MembraneSpec::circular_default()
    }

    fn calibrated() -> CurvatureModel {
        CurvatureModel::from_edge_lift(3e-6, 85e-6).unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Sign changes of the discrete slope, ignoring exact plateaus.
    fn slope_sign_changes(values: &[f64]) -> usize {
        let mut changes = 0;
        let mut last_sign = 0i8;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            let sign = if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    changes += 1;
                }
                last_sign = sign;
            }
        }
        changes
    }

    #[test]
    fn grid_construction() {
        let g = SweepGrid::from_range(0.0, 85e-6, 1e-6).unwrap();
        assert_eq!(g.points().len(), 86);
        assert_eq!(g.points()[0], 0.0);
        assert!(*g.points().last().unwrap() <= 85e-6);
        assert!(SweepGrid::from_range(0.0, 0.0, 1e-6).is_err());
        assert!(SweepGrid::from_points(vec![1e-6, 1e-6]).is_err());
        assert!(SweepGrid::from_points(vec![]).is_err());
        assert!(SweepGrid::from_points(vec![-1e-6, 1e-6]).is_err());
    }

    #[test]
    fn flat_sweep_strictly_decreasing() {
        let spec = circ();
        let grid = SweepGrid::from_range(0.0, 85e-6, 5e-6).unwrap();
        let curve = sweep_r0(&spec, &CurvatureModel::flat(), &grid, &quad()).unwrap();
        for w in curve.samples.windows(2) {
            assert!(w[1].metrics.sensitivity.abs() < w[0].metrics.sensitivity.abs());
            assert!(w[1].metrics.kappa < w[0].metrics.kappa);
            assert!(w[1].metrics.capacitance < w[0].metrics.capacitance);
        }
        assert_eq!(curve.argmax_sensitivity, 0.0);
        assert_eq!(curve.argmax_kappa, 0.0);
    }

    #[test]
    fn curved_sweep_unimodal_with_interior_optima() {
        let spec = circ();
        let curve = sweep_r0(&spec, &calibrated(), &SweepGrid::default_for(&spec), &quad()).unwrap();
        let sens: Vec<f64> = curve.samples.iter().map(|s| s.metrics.sensitivity.abs()).collect();
        let kap: Vec<f64> = curve.samples.iter().map(|s| s.metrics.kappa).collect();
        assert_eq!(slope_sign_changes(&sens), 1);
        assert_eq!(slope_sign_changes(&kap), 1);
        // capacitance only ever shrinks as electrode is removed
        for w in curve.samples.windows(2) {
            assert!(w[1].metrics.capacitance < w[0].metrics.capacitance);
        }
        // refined optima, frozen against an independent reference computation
        assert!(curve.argmax_sensitivity > 50.8e-6 && curve.argmax_sensitivity < 51.0e-6,
            "argmax_sensitivity = {:e}", curve.argmax_sensitivity);
        assert!(curve.argmax_kappa > 58.9e-6 && curve.argmax_kappa < 59.12e-6,
            "argmax_kappa = {:e}", curve.argmax_kappa);
        assert!(curve.argmax_kappa >= curve.argmax_sensitivity);
    }

    #[test]
    fn rect_sweep_optima() {
        let spec = MembraneSpec::rectangular_default();
        let curve = sweep_r0(&spec, &calibrated(), &SweepGrid::default_for(&spec), &quad()).unwrap();
        assert!(rel_err(curve.argmax_sensitivity, 42.258e-6) < 3e-3,
            "rect argmax_sensitivity = {:e}", curve.argmax_sensitivity);
        assert!(rel_err(curve.argmax_kappa, 55.118e-6) < 3e-3,
            "rect argmax_kappa = {:e}", curve.argmax_kappa);
    }

    #[test]
    fn refine_reports_boundary_optima_as_not_bracketed() {
        let spec = circ();
        let flat = CurvatureModel::flat();
        assert!(matches!(
            refine_optimum(&spec, &flat, Objective::Sensitivity, (0.0, 85e-6), &quad()),
            Err(OptimError::NotBracketed)
        ));
        // monotone rising stretch of the curved metric
        assert!(matches!(
            refine_optimum(&spec, &calibrated(), Objective::Sensitivity, (0.0, 20e-6), &quad()),
            Err(OptimError::NotBracketed)
        ));
        assert!(matches!(
            refine_optimum(&spec, &flat, Objective::Kappa, (85e-6, 20e-6), &quad()),
            Err(OptimError::InvalidBracket { .. })
        ));
    }

    #[test]
    fn refine_locates_curved_optima() {
        let spec = circ();
        let s_opt = refine_optimum(&spec, &calibrated(), Objective::Sensitivity, (0.0, 85e-6), &quad()).unwrap();
        let k_opt = refine_optimum(&spec, &calibrated(), Objective::Kappa, (0.0, 85e-6), &quad()).unwrap();
        assert!(rel_err(s_opt, 50.901e-6) < 3e-3, "s_opt = {s_opt:e}");
        assert!(rel_err(k_opt, 59.011e-6) < 3e-3, "k_opt = {k_opt:e}");
    }

    #[test]
    fn report_ratios_match_independent_reference() {
        let spec = circ();
        let report = comparison_report(&spec, &calibrated(), Objective::Sensitivity, &quad()).unwrap();
        assert!(rel_err(report.curved_over_flat_sensitivity(), 0.202078) < 1e-4);
        assert!(rel_err(report.curved_over_flat_kappa(), 0.076533) < 1e-4);
        assert!(rel_err(report.reduced_over_curved_sensitivity(), 2.914946) < 2e-3);
        assert!(rel_err(report.reduced_over_curved_kappa(), 7.206567) < 5e-3);
        assert!(report.reduced_r0 > 50.8e-6 && report.reduced_r0 < 51.0e-6);
        assert!(report.printed_flat.is_some());
        // capacitance trade-off is visible across the rows
        assert!(report.flat.capacitance > report.curved.capacitance);
        assert!(report.curved.capacitance > report.reduced.capacitance);
    }

    #[test]
    fn report_objective_switch() {
        let spec = circ();
        let report = comparison_report(&spec, &calibrated(), Objective::Kappa, &quad()).unwrap();
        assert!(report.reduced_r0 > 58.9e-6 && report.reduced_r0 < 59.12e-6);
        assert!(rel_err(report.reduced_over_curved_kappa(), 7.672784) < 5e-3);
    }

    #[test]
    fn rect_report_has_no_printed_row() {
        let spec = MembraneSpec::rectangular_default();
        let report = comparison_report(&spec, &calibrated(), Objective::Sensitivity, &quad()).unwrap();
        assert!(report.printed_flat.is_none());
    }

    #[test]
    fn ratios_robust_to_effective_gap_rescale() {
        // ±10% d' via eps_r; ratio columns move by well under ±15%
        let base = circ();
        let base_report = comparison_report(&base, &calibrated(), Objective::Sensitivity, &quad()).unwrap();
        for d_prime in [1.032e-6, 1.2613e-6] {
            let spec = base.with_eps_r((base.t1 + base.t2) / (d_prime - base.gap_d)).unwrap();
            let report = comparison_report(&spec, &calibrated(), Objective::Sensitivity, &quad()).unwrap();
            assert!(rel_err(report.curved_over_flat_sensitivity(), base_report.curved_over_flat_sensitivity()) < 0.15);
            assert!(rel_err(report.curved_over_flat_kappa(), base_report.curved_over_flat_kappa()) < 0.15);
            assert!(rel_err(report.reduced_over_curved_sensitivity(), base_report.reduced_over_curved_sensitivity()) < 0.15);
            assert!(rel_err(report.reduced_over_curved_kappa(), base_report.reduced_over_curved_kappa()) < 0.15);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = circ();
        let grid = SweepGrid::from_range(0.0, 85e-6, 5e-6).unwrap();
        let a = sweep_r0(&spec, &calibrated(), &grid, &quad()).unwrap();
        let b = sweep_r0(&spec, &calibrated(), &grid, &quad()).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.metrics.capacitance.to_bits(), y.metrics.capacitance.to_bits());
            assert_eq!(x.metrics.sensitivity.to_bits(), y.metrics.sensitivity.to_bits());
            assert_eq!(x.metrics.kappa.to_bits(), y.metrics.kappa.to_bits());
        }
        assert_eq!(a.argmax_sensitivity.to_bits(), b.argmax_sensitivity.to_bits());
    }

    #[test]
    fn grid_past_extent_rejected() {
        let spec = circ();
        let grid = SweepGrid::from_points(vec![0.0, 90e-6]).unwrap();
        assert!(matches!(
            sweep_r0(&spec, &calibrated(), &grid, &quad()),
            Err(OptimError::GridOutOfRange { .. })
        ));
    }
}
