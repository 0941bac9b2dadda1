//! Electrostatic spring softening and resonance tuning.
//!
//! A DC bias U across the electrodes softens the torsional suspension,
//! S_eff = S₀ − U²κ, shifting the resonance ω_eff = ω₀·√(1 − (κ/S₀)·U²)
//! until pull-in at U = √(S₀/κ). The tilting hair itself is a plain
//! second-order mechanical system, so its frequency response is
//! H(ω) = 1/(S_eff − Jω² + iRω).
//!
//! No default mechanical parameters exist: J, S₀ and R must come from the
//! caller.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

// Relative slack on S_eff < 0 checks; U = pull_in_voltage() lands within a
// few ulps of zero effective stiffness rather than exactly on it.
const PULL_IN_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum TuningError {
    #[error("effective stiffness is negative at U = {voltage} V (past pull-in)")]
    PastPullIn { voltage: f64 },
    #[error("kappa must be > 0 for a finite pull-in voltage")]
    NoSoftening,
    #[error("undamped response diverges at the resonance frequency {omega} rad/s")]
    ResonanceSingular { omega: f64 },
    #[error("{name} must be {constraint}, got {value}")]
    InvalidParameter { name: &'static str, constraint: &'static str, value: f64 },
}

/// Inverted-pendulum parameters: moment of inertia J (kg·m²), zero-bias
/// torsional stiffness S₀ (N·m/rad), torsional resistance R (N·m·s/rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParams {
    pub inertia: f64,
    pub stiffness: f64,
    pub damping: f64,
}

impl MechanicalParams {
    pub fn new(inertia: f64, stiffness: f64, damping: f64) -> Result<Self, TuningError> {
        if !(inertia.is_finite() && inertia > 0.0) {
            return Err(TuningError::InvalidParameter {
                name: "J",
                constraint: "finite and > 0",
                value: inertia,
            });
        }
        if !(stiffness.is_finite() && stiffness > 0.0) {
            return Err(TuningError::InvalidParameter {
                name: "S0",
                constraint: "finite and > 0",
                value: stiffness,
            });
        }
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(TuningError::InvalidParameter {
                name: "R_damp",
                constraint: "finite and >= 0",
                value: damping,
            });
        }
        Ok(Self { inertia, stiffness, damping })
    }

    /// Unbiased resonance ω₀ = √(S₀/J), rad/s.
    pub fn omega_0(&self) -> f64 {
        (self.stiffness / self.inertia).sqrt()
    }
}

/// DC bias magnitude, V. Softening is even in the sign of the bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub voltage: f64,
}

impl BiasPoint {
    pub fn new(voltage: f64) -> Result<Self, TuningError> {
        if !(voltage.is_finite() && voltage >= 0.0) {
            return Err(TuningError::InvalidParameter {
                name: "U",
                constraint: "finite and >= 0",
                value: voltage,
            });
        }
        Ok(Self { voltage })
    }
}

/// Effective torsional stiffness S_eff = S₀ − U²κ. May be ≤ 0; the caller
/// decides what to do past pull-in.
pub fn s_eff(mech: &MechanicalParams, kappa: f64, bias: BiasPoint) -> f64 {
    mech.stiffness - bias.voltage * bias.voltage * kappa
}

/// Softened resonance ω_eff = ω₀·√(1 − (κ/S₀)·U²).
pub fn omega_eff(mech: &MechanicalParams, kappa: f64, bias: BiasPoint) -> Result<f64, TuningError> {
    let x = 1.0 - (kappa / mech.stiffness) * bias.voltage * bias.voltage;
    if x < -PULL_IN_SLACK {
        return Err(TuningError::PastPullIn { voltage: bias.voltage });
    }
    Ok(mech.omega_0() * x.max(0.0).sqrt())
}

/// Bias at which S_eff reaches zero: √(S₀/κ).
pub fn pull_in_voltage(mech: &MechanicalParams, kappa: f64) -> Result<f64, TuningError> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(TuningError::NoSoftening);
    }
    Ok((mech.stiffness / kappa).sqrt())
}

/// Complex tilt response per unit torque, H(ω) = 1/(S_eff − Jω² + iRω),
/// rad/(N·m). Magnitude and phase come off the returned complex value.
pub fn frequency_response(
    mech: &MechanicalParams,
    kappa: f64,
    bias: BiasPoint,
    omega: f64,
) -> Result<Complex64, TuningError> {
    let s = s_eff(mech, kappa, bias);
    if s < -PULL_IN_SLACK * mech.stiffness {
        return Err(TuningError::PastPullIn { voltage: bias.voltage });
    }
    let re = s - mech.inertia * omega * omega;
    let im = mech.damping * omega;
    if im == 0.0 && re.abs() <= 8.0 * f64::EPSILON * (s.abs() + mech.inertia * omega * omega) {
        return Err(TuningError::ResonanceSingular { omega });
    }
    Ok(Complex64::new(1.0, 0.0) / Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mech() -> MechanicalParams {
        MechanicalParams::new(1e-16, 1e-9, 0.0).unwrap()
    }

    const KAPPA: f64 = 4.89e-10;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn s_eff_hand_values() {
        let m = mech();
        assert_eq!(s_eff(&m, KAPPA, BiasPoint::new(0.0).unwrap()), 1e-9);
        let at_1v = s_eff(&m, KAPPA, BiasPoint::new(1.0).unwrap());
        assert!(rel_err(at_1v, 5.11e-10) < 1e-12);
        let u_pi = pull_in_voltage(&m, KAPPA).unwrap();
        assert!(s_eff(&m, KAPPA, BiasPoint::new(u_pi).unwrap()).abs() <= 1e-12 * m.stiffness);
    }

    #[test]
    fn omega_eff_two_forms_agree() {
        let m = mech();
        let u_pi = pull_in_voltage(&m, KAPPA).unwrap();
        for i in 0..100 {
            let u = BiasPoint::new(0.99 * u_pi * i as f64 / 99.0).unwrap();
            let via_ratio = omega_eff(&m, KAPPA, u).unwrap();
            let via_stiffness = (s_eff(&m, KAPPA, u) / m.inertia).sqrt();
            assert!(rel_err(via_ratio, via_stiffness) < 1e-12);
        }
        let at_1v = omega_eff(&m, KAPPA, BiasPoint::new(1.0).unwrap()).unwrap();
        assert!(rel_err(at_1v, (5.11e-10_f64 / 1e-16).sqrt()) < 1e-12);
    }

    #[test]
    fn omega_eff_special_points() {
        let m = mech();
        assert_eq!(omega_eff(&m, KAPPA, BiasPoint::new(0.0).unwrap()).unwrap(), m.omega_0());
        // (kappa/S0)·U² = 0.75 halves the resonance
        let m1 = MechanicalParams::new(1.0, 1.0, 0.0).unwrap();
        let half = omega_eff(&m1, 0.75, BiasPoint::new(1.0).unwrap()).unwrap();
        assert!(rel_err(half, 0.5 * m1.omega_0()) < 1e-12);
        // at pull-in the resonance vanishes
        let u_pi = pull_in_voltage(&m, KAPPA).unwrap();
        let w = omega_eff(&m, KAPPA, BiasPoint::new(u_pi).unwrap()).unwrap();
        assert!(w <= 1e-10 * m.omega_0());
        // clearly past pull-in errors out
        assert!(matches!(
            omega_eff(&m, KAPPA, BiasPoint::new(2.0 * u_pi).unwrap()),
            Err(TuningError::PastPullIn { .. })
        ));
    }

    #[test]
    fn omega_eff_strictly_decreasing_in_bias() {
        let m = mech();
        let u_pi = pull_in_voltage(&m, KAPPA).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let u = BiasPoint::new(0.999 * u_pi * i as f64 / 49.0).unwrap();
            let w = omega_eff(&m, KAPPA, u).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn pull_in_hand_value_and_monotonicity() {
        let m = mech();
        let u = pull_in_voltage(&m, KAPPA).unwrap();
        assert!(rel_err(u, 1.430) < 1e-3);
        assert!(rel_err(u, (1e-9_f64 / 4.89e-10).sqrt()) < 1e-15);
        assert!(pull_in_voltage(&m, 2.0 * KAPPA).unwrap() < u);
        assert!(matches!(pull_in_voltage(&m, 0.0), Err(TuningError::NoSoftening)));
    }

    #[test]
    fn static_compliance() {
        let m = mech();
        let bias = BiasPoint::new(1.0).unwrap();
        let h = frequency_response(&m, KAPPA, bias, 0.0).unwrap();
        assert!(rel_err(h.norm(), 1.0 / s_eff(&m, KAPPA, bias)) < 1e-12);
        assert_eq!(h.arg(), 0.0);
    }

    #[test]
    fn undamped_resonance_flagged_singular() {
        let m = mech();
        let bias = BiasPoint::new(1.0).unwrap();
        let w_eff = omega_eff(&m, KAPPA, bias).unwrap();
        assert!(matches!(
            frequency_response(&m, KAPPA, bias, w_eff),
            Err(TuningError::ResonanceSingular { .. })
        ));
        // with damping the response stays finite at resonance
        let damped = MechanicalParams::new(1e-16, 1e-9, 1e-13).unwrap();
        assert!(frequency_response(&damped, KAPPA, bias, w_eff).is_ok());
    }

    #[test]
    fn peak_location_matches_dense_scan() {
        let m = MechanicalParams::new(1e-16, 1e-9, 2e-13).unwrap();
        let bias = BiasPoint::new(0.5).unwrap();
        let s = s_eff(&m, KAPPA, bias);
        let w_eff = (s / m.inertia).sqrt();
        let predicted = (w_eff * w_eff - m.damping * m.damping / (2.0 * m.inertia * m.inertia)).sqrt();
        let mut best = (0.0, 0.0);
        let n = 200_000;
        for i in 0..=n {
            let w = 2.0 * w_eff * i as f64 / n as f64;
            let h = frequency_response(&m, KAPPA, bias, w).unwrap().norm();
            if h > best.1 {
                best = (w, h);
            }
        }
        let step = 2.0 * w_eff / n as f64;
        assert!((best.0 - predicted).abs() <= step, "peak {0:e} vs predicted {predicted:e}", best.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(MechanicalParams::new(0.0, 1e-9, 0.0).is_err());
        assert!(MechanicalParams::new(1e-16, -1e-9, 0.0).is_err());
        assert!(MechanicalParams::new(1e-16, 1e-9, -1.0).is_err());
        assert!(BiasPoint::new(-0.1).is_err());
        assert!(BiasPoint::new(f64::NAN).is_err());
    }
}
