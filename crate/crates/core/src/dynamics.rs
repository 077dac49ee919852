//! Nonlinear quarter-car plant.
//!
//! Positions are measured upward from the unloaded origin, so gravity shows up
//! explicitly in the force balance. Two plant configurations share the same
//! tire and spring laws:
//!
//! * active: a skyhook actuator `F_act = -b_s v_s + b_u v_u` acts between the masses,
//! * semi-active: an MR damper `F_shock = c_s dv + c_i d + f_d tanh(k_s dv + k_m d)`
//!   whose command `f_d` is bounded to `[f_min, f_max]`.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Argument of the cubic term in the suspension spring law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpringCubic {
    /// `k22 (z_s - z_u)^3`, the suspension travel.
    #[default]
    Travel,
    /// `k22 (z_u - z_g)^3`, the tire deflection, as the printed force law reads.
    TireDeflection,
}

/// Sign of the skyhook actuator and of the `c_o` relative-velocity terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Actuator and `c_o` terms oppose motion (energy-dissipating).
    #[default]
    Dissipative,
    /// Signs exactly as in the printed equations of motion. Both the active
    /// plant and the zero-command semi-active plant are unstable this way.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantMode {
    Active,
    SemiActive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuspensionParams {
    pub m_s: f64,
    pub m_u: f64,
    pub g: f64,
    pub k11: f64,
    pub k12: f64,
    pub k13: f64,
    pub k21: f64,
    pub k22: f64,
    pub c_o: f64,
    pub c_s: f64,
    pub c_i: f64,
    pub k_s: f64,
    pub k_m: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub b_s: f64,
    pub b_u: f64,
    pub spring_cubic: SpringCubic,
    pub sign_convention: SignConvention,
}

impl Default for SuspensionParams {
    fn default() -> Self {
        Self {
            m_s: 36.0,
            m_u: 240.0,
            g: 9.81,
            k11: 60063.0,
            k12: 42509.0,
            k13: 22875.0,
            k21: 15302.0,
            k22: 2728.0,
            c_o: 1400.0,
            c_s: 620.79,
            c_i: 810.78,
            k_s: 10.54,
            k_m: 13.76,
            f_min: 0.0,
            f_max: 350.0,
            b_s: 1335.0,
            b_u: 2607.0,
            spring_cubic: SpringCubic::Travel,
            sign_convention: SignConvention::Dissipative,
        }
    }
}

impl SuspensionParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.m_s > 0.0 && self.m_u > 0.0, || {
            format!("masses must be positive (m_s={}, m_u={})", self.m_s, self.m_u)
        })?;
        let coeffs = [
            ("k11", self.k11),
            ("k12", self.k12),
            ("k13", self.k13),
            ("k21", self.k21),
            ("k22", self.k22),
            ("c_o", self.c_o),
            ("c_s", self.c_s),
            ("c_i", self.c_i),
            ("k_s", self.k_s),
            ("k_m", self.k_m),
            ("b_s", self.b_s),
            ("b_u", self.b_u),
        ];
        for (name, v) in coeffs {
            ensure(v.is_finite() && v >= 0.0, || format!("{name} must be >= 0, got {v}"))?;
        }
        ensure(self.g.is_finite(), || "g must be finite".into())?;
        ensure(0.0 <= self.f_min && self.f_min <= self.f_max, || {
            format!("need 0 <= f_min <= f_max, got [{}, {}]", self.f_min, self.f_max)
        })
    }

    pub fn clamp_command(&self, f_d: f64) -> f64 {
        f_d.clamp(self.f_min, self.f_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub z_s: f64,
    pub v_s: f64,
    pub z_u: f64,
    pub v_u: f64,
}

impl VehicleState {
    pub fn new(z_s: f64, v_s: f64, z_u: f64, v_u: f64) -> Self {
        Self { z_s, v_s, z_u, v_u }
    }

    pub fn travel(&self) -> f64 {
        self.z_s - self.z_u
    }

    pub fn is_finite(&self) -> bool {
        self.z_s.is_finite() && self.v_s.is_finite() && self.z_u.is_finite() && self.v_u.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.z_s
            .abs()
            .max(self.v_s.abs())
            .max(self.z_u.abs())
            .max(self.v_u.abs())
    }
}

impl Add for VehicleState {
    type Output = VehicleState;

    fn add(self, o: VehicleState) -> VehicleState {
        VehicleState::new(self.z_s + o.z_s, self.v_s + o.v_s, self.z_u + o.z_u, self.v_u + o.v_u)
    }
}

impl Mul<f64> for VehicleState {
    type Output = VehicleState;

    fn mul(self, k: f64) -> VehicleState {
        VehicleState::new(self.z_s * k, self.v_s * k, self.z_u * k, self.v_u * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub f_tire: f64,
    pub f_spring: f64,
    /// `F_shock` in semi-active mode, `F_actuator` in active mode.
    pub f_damper: f64,
}

/// `k11 δ + k12 δ² − k13 δ³` with `δ = z_u − z_g`.
pub fn tire_force(p: &SuspensionParams, z_u: f64, z_g: f64) -> f64 {
    let d = z_u - z_g;
    p.k11 * d + p.k12 * d * d - p.k13 * d * d * d
}

/// `k21 d + k22 d³` with `d = z_s − z_u`.
pub fn spring_force(p: &SuspensionParams, z_s: f64, z_u: f64) -> f64 {
    let d = z_s - z_u;
    p.k21 * d + p.k22 * d * d * d
}

/// Spring force honoring [`SuspensionParams::spring_cubic`].
pub fn spring_force_with_road(p: &SuspensionParams, z_s: f64, z_u: f64, z_g: f64) -> f64 {
    match p.spring_cubic {
        SpringCubic::Travel => spring_force(p, z_s, z_u),
        SpringCubic::TireDeflection => {
            let t = z_u - z_g;
            p.k21 * (z_s - z_u) + p.k22 * t * t * t
        }
    }
}

pub fn shock_force(p: &SuspensionParams, rel_vel: f64, rel_disp: f64, f_d: f64) -> Result<f64> {
    if !(p.f_min..=p.f_max).contains(&f_d) {
        return Err(Error::DamperOutOfBounds {
            f_d,
            f_min: p.f_min,
            f_max: p.f_max,
        });
    }
    Ok(shock_force_unchecked(p, rel_vel, rel_disp, f_d))
}

#[inline]
fn shock_force_unchecked(p: &SuspensionParams, rel_vel: f64, rel_disp: f64, f_d: f64) -> f64 {
    p.c_s * rel_vel + p.c_i * rel_disp + f_d * (p.k_s * rel_vel + p.k_m * rel_disp).tanh()
}

/// Skyhook actuator force `−b_s v_s + b_u v_u`.
pub fn actuator_force(p: &SuspensionParams, v_s: f64, v_u: f64) -> f64 {
    -p.b_s * v_s + p.b_u * v_u
}

pub fn forces(p: &SuspensionParams, s: &VehicleState, z_g: f64, mode: PlantMode, f_d: f64) -> Result<ForceBreakdown> {
    let f_damper = match mode {
        PlantMode::Active => actuator_force(p, s.v_s, s.v_u),
        PlantMode::SemiActive => shock_force(p, s.v_s - s.v_u, s.travel(), f_d)?,
    };
    Ok(ForceBreakdown {
        f_tire: tire_force(p, s.z_u, z_g),
        f_spring: spring_force_with_road(p, s.z_s, s.z_u, z_g),
        f_damper,
    })
}

/// State derivative `(v_s, a_s, v_u, a_u)` packed into a [`VehicleState`].
///
/// `f_d` is ignored in active mode.
pub fn derivatives(
    p: &SuspensionParams,
    s: &VehicleState,
    z_g: f64,
    mode: PlantMode,
    f_d: f64,
) -> Result<VehicleState> {
    if mode == PlantMode::SemiActive && !(p.f_min..=p.f_max).contains(&f_d) {
        return Err(Error::DamperOutOfBounds {
            f_d,
            f_min: p.f_min,
            f_max: p.f_max,
        });
    }
    derivatives_with_parallel(p, s, z_g, mode, f_d, 0.0)
}

/// Like [`derivatives`], with an extra unconstrained force `parallel` pushing the
/// masses apart (positive raises the sprung mass and lowers the unsprung mass).
/// The damper bound is not re-checked here.
pub fn derivatives_with_parallel(
    p: &SuspensionParams,
    s: &VehicleState,
    z_g: f64,
    mode: PlantMode,
    f_d: f64,
    parallel: f64,
) -> Result<VehicleState> {
    let dv = s.v_s - s.v_u;
    let f_tire = tire_force(p, s.z_u, z_g);
    let f_spring = spring_force_with_road(p, s.z_s, s.z_u, z_g);
    let (sprung, unsprung) = match (mode, p.sign_convention) {
        (PlantMode::Active, SignConvention::Printed) => {
            let f_act = actuator_force(p, s.v_s, s.v_u);
            (-f_spring - f_act + p.c_o * dv, f_spring + f_act - f_tire)
        }
        (PlantMode::Active, SignConvention::Dissipative) => {
            let f_act = actuator_force(p, s.v_s, s.v_u);
            (-f_spring + f_act - p.c_o * dv, f_spring - f_act - f_tire)
        }
        (PlantMode::SemiActive, SignConvention::Printed) => {
            let f_shock = shock_force_unchecked(p, dv, s.travel(), f_d);
            (
                -f_spring - f_shock + p.c_o * dv,
                f_spring + f_shock - f_tire - p.c_o * dv,
            )
        }
        (PlantMode::SemiActive, SignConvention::Dissipative) => {
            let f_shock = shock_force_unchecked(p, dv, s.travel(), f_d);
            (
                -f_spring - f_shock - p.c_o * dv,
                f_spring + f_shock - f_tire + p.c_o * dv,
            )
        }
    };
    let a_s = (sprung + parallel) / p.m_s - p.g;
    let a_u = (unsprung - parallel) / p.m_u - p.g;
    if !(a_s.is_finite() && a_u.is_finite()) {
        return Err(Error::NonFinite(format!(
            "plant accelerations (a_s={a_s}, a_u={a_u}) at state {s:?}, z_g={z_g}"
        )));
    }
    Ok(VehicleState::new(s.v_s, a_s, s.v_u, a_u))
}

/// Static equilibrium on a road at height `z_g` with zero damper command.
///
/// Solves the two force balances for the suspension travel and tire deflection
/// by Newton iteration; velocities are zero.
pub fn static_equilibrium(p: &SuspensionParams, mode: PlantMode, z_g: f64) -> Result<VehicleState> {
    p.validate()?;
    // Stiffness acting on the travel at rest: c_i only exists in the MR damper.
    let c_lin = match mode {
        PlantMode::Active => 0.0,
        PlantMode::SemiActive => p.c_i,
    };
    let weight = (p.m_s + p.m_u) * p.g;
    // unknowns: d = z_s - z_u, t = z_u - z_g
    let mut d = -p.m_s * p.g / (p.k21 + c_lin).max(1e-9);
    let mut t = -weight / p.k11.max(1e-9);
    for _ in 0..100 {
        let (fs, dfs_dd, dfs_dt) = match p.spring_cubic {
            SpringCubic::Travel => (p.k21 * d + p.k22 * d.powi(3), p.k21 + 3.0 * p.k22 * d * d, 0.0),
            SpringCubic::TireDeflection => (p.k21 * d + p.k22 * t.powi(3), p.k21, 3.0 * p.k22 * t * t),
        };
        // sprung: -m_s g - F_spring - c_lin d = 0 ; whole car: F_tire = -weight
        let r1 = p.m_s * p.g + fs + c_lin * d;
        let r2 = p.k11 * t + p.k12 * t * t - p.k13 * t.powi(3) + weight;
        let j11 = dfs_dd + c_lin;
        let j12 = dfs_dt;
        let j22 = p.k11 + 2.0 * p.k12 * t - 3.0 * p.k13 * t * t;
        let det = j11 * j22;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NonFinite("static equilibrium Jacobian".into()));
        }
        let dt_step = r2 / j22;
        let dd_step = (r1 - j12 * dt_step) / j11;
        d -= dd_step;
        t -= dt_step;
        if dd_step.abs() < 1e-16 && dt_step.abs() < 1e-16 {
            break;
        }
    }
    if !(d.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("static equilibrium".into()));
    }
    let z_u = z_g + t;
    Ok(VehicleState::new(z_u + d, 0.0, z_u, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> SuspensionParams {
        SuspensionParams::default()
    }

    #[test]
    fn tire_force_hand_values() {
        assert_eq!(tire_force(&p(), 0.0, 0.0), 0.0);
        assert_relative_eq!(tire_force(&p(), 0.01, 0.0), 604.858025, max_relative = 1e-12);
        assert_relative_eq!(tire_force(&p(), -0.01, 0.0), -596.356225, max_relative = 1e-12);
        // only the difference matters
        assert_relative_eq!(tire_force(&p(), 0.51, 0.5), 604.858025, max_relative = 1e-9);
    }

    #[test]
    fn spring_force_hand_values() {
        assert_eq!(spring_force(&p(), 0.0, 0.0), 0.0);
        assert_relative_eq!(spring_force(&p(), 0.1, 0.0), 1532.928, max_relative = 1e-12);
        for d in [-0.3, -0.01, 0.02, 0.7] {
            assert_eq!(spring_force(&p(), d, 0.0), -spring_force(&p(), -d, 0.0));
        }
    }

    #[test]
    fn spring_force_printed_cubic_uses_tire_deflection() {
        let mut q = p();
        q.spring_cubic = SpringCubic::TireDeflection;
        let f = spring_force_with_road(&q, 0.1, 0.0, -0.1);
        assert_relative_eq!(f, 15302.0 * 0.1 + 2728.0 * 0.001, max_relative = 1e-12);
        assert_relative_eq!(spring_force_with_road(&q, 0.1, 0.0, 0.0), 1530.2, max_relative = 1e-12);
    }

    #[test]
    fn shock_force_values_and_bounds() {
        assert_relative_eq!(shock_force(&p(), 0.1, 0.0, 0.0).unwrap(), 62.079, max_relative = 1e-12);
        assert_eq!(shock_force(&p(), 0.0, 0.0, 350.0).unwrap(), 0.0);
        assert!(matches!(
            shock_force(&p(), 0.0, 0.0, 350.5),
            Err(Error::DamperOutOfBounds { .. })
        ));
        assert!(shock_force(&p(), 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn actuator_force_values() {
        assert_eq!(actuator_force(&p(), 0.0, 0.0), 0.0);
        assert_eq!(actuator_force(&p(), 1.0, 0.0), -1335.0);
        assert_eq!(actuator_force(&p(), 0.0, 1.0), 2607.0);
    }

    #[test]
    fn zero_state_accelerates_at_minus_g() {
        for conv in [SignConvention::Dissipative, SignConvention::Printed] {
            let q = SuspensionParams {
                sign_convention: conv,
                ..p()
            };
            let d = derivatives(&q, &VehicleState::default(), 0.0, PlantMode::SemiActive, 0.0).unwrap();
            assert_relative_eq!(d.v_s, -9.81, max_relative = 1e-15);
            assert_relative_eq!(d.v_u, -9.81, max_relative = 1e-15);
        }
    }

    #[test]
    fn position_derivatives_are_velocities() {
        let s = VehicleState::new(0.01, -0.3, -0.02, 0.7);
        for mode in [PlantMode::Active, PlantMode::SemiActive] {
            let d = derivatives(&p(), &s, 0.005, mode, 100.0).unwrap();
            assert_eq!(d.z_s, s.v_s);
            assert_eq!(d.z_u, s.v_u);
        }
    }

    #[test]
    fn semi_active_degenerates_to_active_without_damper() {
        for conv in [SignConvention::Dissipative, SignConvention::Printed] {
            let semi = SuspensionParams {
                c_i: 0.0,
                c_s: 0.0,
                sign_convention: conv,
                ..p()
            };
            let act = SuspensionParams {
                b_s: 0.0,
                b_u: 0.0,
                ..semi
            };
            let s = VehicleState::new(0.013, 0.4, -0.021, -0.25);
            let a = derivatives(&semi, &s, 0.002, PlantMode::SemiActive, 0.0).unwrap();
            let b = derivatives(&act, &s, 0.002, PlantMode::Active, 123.0).unwrap();
            assert_eq!(a.v_s, b.v_s);
            // the unsprung balance differs only by the extra c_o term
            let extra = match conv {
                SignConvention::Printed => -semi.c_o * (s.v_s - s.v_u),
                SignConvention::Dissipative => semi.c_o * (s.v_s - s.v_u),
            };
            assert_relative_eq!(a.v_u - b.v_u, extra / semi.m_u, max_relative = 1e-12);
        }
    }

    #[test]
    fn semi_active_rejects_out_of_bounds_command() {
        let s = VehicleState::default();
        assert!(derivatives(&p(), &s, 0.0, PlantMode::SemiActive, 351.0).is_err());
        // ignored in active mode
        assert!(derivatives(&p(), &s, 0.0, PlantMode::Active, 351.0).is_ok());
    }

    #[test]
    fn nan_state_is_reported() {
        let s = VehicleState::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(
            derivatives(&p(), &s, 0.0, PlantMode::SemiActive, 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        for spring in [SpringCubic::Travel, SpringCubic::TireDeflection] {
            for mode in [PlantMode::Active, PlantMode::SemiActive] {
                for z_g in [0.0, 0.05] {
                    let q = SuspensionParams {
                        spring_cubic: spring,
                        ..p()
                    };
                    let eq = static_equilibrium(&q, mode, z_g).unwrap();
                    let d = derivatives(&q, &eq, z_g, mode, 0.0).unwrap();
                    assert!(d.v_s.abs() < 1e-9 && d.v_u.abs() < 1e-9, "{spring:?} {mode:?}: {d:?}");
                    assert!(eq.travel() < 0.0 && eq.z_u < z_g);
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(p().validate().is_ok());
        assert!(SuspensionParams {
            f_min: 10.0,
            f_max: 5.0,
            ..p()
        }
        .validate()
        .is_err());
        assert!(SuspensionParams { c_s: -1.0, ..p() }.validate().is_err());
        assert!(SuspensionParams { m_s: 0.0, ..p() }.validate().is_err());
    }
}
