//! Adaptive geometric flight controller: composite-error construction,
//! minimum-norm thrust allocation through the estimated configuration
//! matrix, the online adaptation law, the manual trimming rule, and
//! Lyapunov diagnostics.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::geom::{yaw_of, DMat, DVec, Vec3};
use crate::plant::{RigidState, ThrustCommand};
use crate::GRAVITY;

pub type Vec4 = Vector4<f64>;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let x = (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
        - std::f64::consts::PI;
    if x == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        x
    }
}

/// Controller gains. The lateral chain uses `(k, k_d, k_p)`, altitude uses
/// `k_z`, yaw uses `k_psi`; `K = diag(k_z, k_phi, k_theta, k_psi)` weights
/// the composite error in the control law and `lambda` is the diagonal
/// adaptation gain.
#[derive(Debug, Clone)]
pub struct Gains {
    pub k: f64,
    pub k_p: f64,
    pub k_d: f64,
    pub k_z: f64,
    pub k_phi: f64,
    pub k_theta: f64,
    pub k_psi: f64,
    pub lambda: Vec4,
}

impl Gains {
    /// Stock hover gains, shared by all platforms.
    pub fn hover() -> Self {
        Gains {
            k: 4.0,
            k_p: 8.0,
            k_d: 4.0,
            k_z: 2.0,
            k_phi: 9.0,
            k_theta: 9.0,
            k_psi: 9.0,
            lambda: Vec4::new(1.2e-2, 3.5e-2, 3.5e-2, 3.5e-3),
        }
    }

    /// Stock trajectory-tracking gains.
    pub fn trajectory() -> Self {
        Gains {
            k: 4.0,
            k_p: 8.0,
            k_d: 4.0,
            k_z: 2.0,
            k_phi: 10.0,
            k_theta: 10.0,
            k_psi: 10.0,
            lambda: Vec4::new(3.5e-2, 1.1e-1, 1.3e-1, 1.0e-2),
        }
    }

    /// All gains positive and the lateral chain Hurwitz (`k > k_p/k_d`).
    pub fn validate(&self) -> Result<()> {
        let positives = [
            self.k, self.k_p, self.k_d, self.k_z, self.k_phi, self.k_theta, self.k_psi,
        ];
        if positives.iter().any(|&g| !(g > 0.0)) || self.lambda.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::InvalidInput("controller gains must be positive".into()));
        }
        if !(self.k > self.k_p / self.k_d) {
            return Err(Error::InvalidInput(format!(
                "lateral gains unstable: need k > k_p/k_d, got {} <= {}",
                self.k,
                self.k_p / self.k_d
            )));
        }
        Ok(())
    }

    /// Composite-error weight `K = diag(k_z, k_phi, k_theta, k_psi)`.
    pub fn k_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vec4::new(self.k_z, self.k_phi, self.k_theta, self.k_psi))
    }
}

/// A flat-output setpoint: position with derivatives through jerk, and yaw.
#[derive(Debug, Clone, PartialEq)]
pub struct Setpoint {
    pub pos: Vec3,
    pub vel: Vec3,
    pub acc: Vec3,
    pub jerk: Vec3,
    pub yaw: f64,
}

impl Setpoint {
    /// Static hover at `pos`.
    pub fn hover_at(pos: Vec3) -> Self {
        Setpoint { pos, vel: Vec3::zeros(), acc: Vec3::zeros(), jerk: Vec3::zeros(), yaw: 0.0 }
    }
}

/// Composite error `s = [zdot; w] + h` and the lumped term `h`. The actual
/// acceleration is reconstructed from attitude under the constant-thrust
/// assumption rather than measured.
pub fn compute_s(state: &RigidState, sp: &Setpoint, gains: &Gains) -> Result<(Vec4, Vec4)> {
    let yaw = yaw_of(&state.rotation)?;
    let i_hat = state.rotation.i_hat();
    let j_hat = state.rotation.j_hat();
    let k_hat = state.rotation.k_hat();
    let g_vec = Vec3::new(0.0, 0.0, -GRAVITY);
    let p_ddot = GRAVITY * k_hat + g_vec;

    // diagonal gain ladder: lateral channels are 4th order, altitude 2nd
    let k3 = Vec3::new(1.0, 1.0, 0.0);
    let k2 = Vec3::new(gains.k, gains.k, 0.0);
    let k1 = Vec3::new(gains.k * gains.k_d, gains.k * gains.k_d, 1.0);
    let k0 = Vec3::new(gains.k * gains.k_p, gains.k * gains.k_p, gains.k_z);

    let p_r = k3.component_mul(&sp.jerk)
        - k2.component_mul(&(p_ddot - sp.acc))
        - k1.component_mul(&(state.velocity - sp.vel))
        - k0.component_mul(&(state.position - sp.pos));

    let h = Vec4::new(
        -sp.vel.z + gains.k_z * (state.position.z - sp.pos.z),
        p_r.dot(&j_hat) / GRAVITY,
        -p_r.dot(&i_hat) / GRAVITY,
        gains.k_psi * wrap_angle(yaw - sp.yaw),
    );
    let s = Vec4::new(state.velocity.z, state.omega.x, state.omega.y, state.omega.z) + h;
    Ok((s, h))
}

const ALLOC_COND_LIMIT: f64 = 1e10;

/// Minimum-norm right pseudoinverse of a full-rank wide matrix applied to a
/// wrench demand: `u = A^T (A A^T)^{-1} rhs`.
fn min_norm_solve(a_hat: &DMat, rhs: &Vec4) -> Result<DVec> {
    let sv = a_hat.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > smax / ALLOC_COND_LIMIT) {
        return Err(Error::SingularConfiguration);
    }
    let aat = a_hat * a_hat.transpose();
    let inv = aat.try_inverse().ok_or(Error::SingularConfiguration)?;
    let rhs_d = DVec::from_column_slice(rhs.as_slice());
    Ok(a_hat.transpose() * (inv * rhs_d))
}

/// Thrust allocation `u = A^T (A A^T)^{-1} (g_v - hdot - K s)` (unsaturated;
/// the plant clamps before application).
pub fn control_input(a_hat: &DMat, s: &Vec4, h_dot: &Vec4, gains: &Gains) -> Result<ThrustCommand> {
    let g_v = Vec4::new(GRAVITY, 0.0, 0.0, 0.0);
    let rhs = g_v - h_dot - gains.k_matrix() * s;
    Ok(ThrustCommand(min_norm_solve(a_hat, &rhs)?.as_slice().to_vec()))
}

/// Nominal pre-takeoff input: minimum-norm `u_0` with `A u_0 = [g,0,0,0]`.
/// Rejects configurations whose balanced hover would demand negative thrust.
pub fn nominal_input(a_hat: &DMat) -> Result<ThrustCommand> {
    let u0 = min_norm_solve(a_hat, &Vec4::new(GRAVITY, 0.0, 0.0, 0.0))?;
    let min_thrust = u0.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_thrust < -1e-9 {
        return Err(Error::InfeasibleTrim { min_thrust });
    }
    Ok(ThrustCommand(u0.as_slice().to_vec()))
}

/// Adaptation law `Ahat += Lambda s u^T dt`, applied with the saturated
/// input that actually reached the rotors. Returns false if the update
/// degraded the allocation rank (caller should warn, not abort).
pub fn adapt(a_hat: &mut DMat, s: &Vec4, u_applied: &ThrustCommand, lambda: &Vec4, dt: f64) -> bool {
    for i in 0..4 {
        for (j, uj) in u_applied.0.iter().enumerate() {
            a_hat[(i, j)] += lambda[i] * s[i] * uj * dt;
        }
    }
    let sv = a_hat.clone().svd(false, false).singular_values;
    sv.min() > sv.max() / ALLOC_COND_LIMIT
}

/// Manual trim: `axis` 1..=3 selects the roll/pitch/yaw row of `A`, which is
/// nudged elementwise by `-sign_input * delta * |entry|`.
pub fn trim_step(a_hat: &DMat, axis: usize, sign_input: f64, delta: f64) -> DMat {
    assert!((1..=3).contains(&axis), "trim axis must be 1..=3");
    assert!(delta >= 0.0, "trim step must be nonnegative");
    let mut out = a_hat.clone();
    for j in 0..out.ncols() {
        out[(axis, j)] -= sign_input.signum() * delta * out[(axis, j)].abs();
    }
    out
}

/// Tracking part of the Lyapunov function, `V_s = 1/2 s^T s`.
pub fn lyapunov_partial(s: &Vec4) -> f64 {
    0.5 * s.norm_squared()
}

/// Full Lyapunov value `V = V_s + 1/2 tr(Atilde^T Lambda^{-1} Atilde)`;
/// needs ground truth, so it is a simulation-only diagnostic.
pub fn lyapunov_full(s: &Vec4, a_hat: &DMat, a_true: &DMat, lambda: &Vec4) -> f64 {
    let mut trace = 0.0;
    for i in 0..4 {
        for j in 0..a_hat.ncols() {
            let e = a_hat[(i, j)] - a_true[(i, j)];
            trace += e * e / lambda[i];
        }
    }
    lyapunov_partial(s) + 0.5 * trace
}

/// Causal rate estimate for `h`: backward difference smoothed by a
/// single-pole low-pass. The first call has no history and returns zero.
#[derive(Debug, Clone)]
pub struct HRateFilter {
    cutoff_hz: f64,
    prev: Option<Vec4>,
    state: Vec4,
}

impl HRateFilter {
    pub fn new(cutoff_hz: f64) -> Self {
        HRateFilter { cutoff_hz, prev: None, state: Vec4::zeros() }
    }

    pub fn update(&mut self, h: &Vec4, dt: f64) -> Vec4 {
        let raw = match &self.prev {
            None => {
                self.prev = Some(*h);
                return Vec4::zeros();
            }
            Some(prev) => (h - prev) / dt,
        };
        self.prev = Some(*h);
        let alpha = dt / (dt + 1.0 / (2.0 * std::f64::consts::PI * self.cutoff_hz));
        self.state += alpha * (raw - self.state);
        self.state
    }
}

/// Default cutoff for the `h` rate filter, Hz.
pub const H_RATE_CUTOFF_HZ: f64 = 20.0;

/// One controller instance: the estimated configuration matrix, gains, the
/// `h` rate filter, and the latest diagnostics.
#[derive(Debug, Clone)]
pub struct Controller {
    pub gains: Gains,
    pub a_hat: DMat,
    h_filter: HRateFilter,
    dt_ctrl: f64,
    pub last_s: Vec4,
    pub last_h: Vec4,
    pub last_u: Vec<f64>,
}

impl Controller {
    pub fn new(gains: Gains, a_hat: DMat, dt_ctrl: f64) -> Result<Self> {
        gains.validate()?;
        if a_hat.nrows() != 4 || a_hat.ncols() < 4 {
            return Err(Error::InvalidInput("configuration matrix must be 4 x N, N >= 4".into()));
        }
        Ok(Controller {
            gains,
            a_hat,
            h_filter: HRateFilter::new(H_RATE_CUTOFF_HZ),
            dt_ctrl,
            last_s: Vec4::zeros(),
            last_h: Vec4::zeros(),
            last_u: Vec::new(),
        })
    }

    /// One control step: composite error, filtered `h` rate, allocation.
    pub fn step(&mut self, state: &RigidState, sp: &Setpoint) -> Result<ThrustCommand> {
        let (s, h) = compute_s(state, sp, &self.gains)?;
        let h_dot = self.h_filter.update(&h, self.dt_ctrl);
        let u = control_input(&self.a_hat, &s, &h_dot, &self.gains)?;
        self.last_s = s;
        self.last_h = h;
        self.last_u.clone_from(&u.0);
        Ok(u)
    }

    /// One adaptation step with the saturated, applied input. Returns false
    /// when the update degraded the allocation rank.
    pub fn adapt(&mut self, u_applied: &ThrustCommand, dt_adapt: f64) -> bool {
        adapt(&mut self.a_hat, &self.last_s, u_applied, &self.gains.lambda, dt_adapt)
    }
}

/// Controller debug-log CSV header:
/// `t,s1..s4,h1..h4,u1..uN,Vs,V,rankA` (V is empty when truth is unknown).
pub fn controller_log_header(n: usize) -> String {
    let mut h = String::from("t,s1,s2,s3,s4,h1,h2,h3,h4");
    for i in 1..=n {
        h.push_str(&format!(",u{i}"));
    }
    h.push_str(",Vs,V,rankA");
    h
}

/// One controller debug-log row.
pub fn controller_log_row(
    t: f64,
    s: &Vec4,
    h: &Vec4,
    u: &[f64],
    v_full: Option<f64>,
    rank_ok: bool,
) -> String {
    let mut row = format!(
        "{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
        t, s[0], s[1], s[2], s[3], h[0], h[1], h[2], h[3]
    );
    for ui in u {
        row.push_str(&format!(",{ui:.9}"));
    }
    row.push_str(&format!(",{:.9}", lyapunov_partial(s)));
    match v_full {
        Some(v) => row.push_str(&format!(",{v:.9}")),
        None => row.push(','),
    }
    row.push_str(&format!(",{}", if rank_ok { 4 } else { 3 }));
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RotationMatrix;
    use crate::vehicle::{assemble_vehicle, preset, Platform, VehicleTruth};
    use approx::assert_relative_eq;

    fn truth_of(p: Platform) -> VehicleTruth {
        let (payload, modules) = preset(p);
        assemble_vehicle(&payload, &modules).unwrap()
    }

    fn hover_state(pos: Vec3) -> RigidState {
        RigidState {
            position: pos,
            velocity: Vec3::zeros(),
            rotation: RotationMatrix::identity(),
            omega: Vec3::zeros(),
        }
    }

    #[test]
    fn s_vanishes_at_setpoint() {
        let sp = Setpoint::hover_at(Vec3::new(0.0, 0.0, 0.8));
        let (s, h) = compute_s(&hover_state(sp.pos), &sp, &Gains::hover()).unwrap();
        assert!(s.norm() < 1e-14, "s = {s:?}");
        assert!(h.norm() < 1e-14);
    }

    #[test]
    fn altitude_error_arithmetic() {
        let sp = Setpoint::hover_at(Vec3::new(0.0, 0.0, 0.8));
        let state = hover_state(Vec3::new(0.0, 0.0, 0.9));
        let (s, _) = compute_s(&state, &sp, &Gains::hover()).unwrap();
        assert_relative_eq!(s, Vec4::new(0.2, 0.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn yaw_error_arithmetic_and_wrap() {
        let sp = Setpoint::hover_at(Vec3::new(0.0, 0.0, 0.8));
        let mut state = hover_state(sp.pos);
        state.rotation = RotationMatrix::rot_z(0.1);
        let (s, _) = compute_s(&state, &sp, &Gains::hover()).unwrap();
        assert_relative_eq!(s[3], 0.9, epsilon = 1e-12);

        state.rotation = RotationMatrix::rot_z(0.1 + 2.0 * std::f64::consts::PI);
        let (s2, _) = compute_s(&state, &sp, &Gains::hover()).unwrap();
        assert_relative_eq!(s2[3], 0.9, epsilon = 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(0.3), 0.3);
        assert_relative_eq!(wrap_angle(-0.3), -0.3);
    }

    #[test]
    fn allocation_is_exact_for_full_rank_matrix() {
        let truth = truth_of(Platform::D);
        let gains = Gains::hover();
        let s = Vec4::new(0.1, -0.2, 0.05, 0.3);
        let h_dot = Vec4::new(0.01, 0.0, -0.02, 0.0);
        let u = control_input(&truth.a, &s, &h_dot, &gains).unwrap();
        let rhs = Vec4::new(GRAVITY, 0.0, 0.0, 0.0) - h_dot - gains.k_matrix() * s;
        let achieved = &truth.a * DVec::from_column_slice(&u.0);
        for i in 0..4 {
            assert_relative_eq!(achieved[i], rhs[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn hover_allocation_matches_weight_split() {
        let truth = truth_of(Platform::A);
        let u = nominal_input(&truth.a).unwrap();
        for ui in &u.0 {
            assert!((ui - 2.40).abs() < 0.02, "u = {ui}");
        }
        let c = truth_of(Platform::C);
        let u8 = nominal_input(&c.a).unwrap();
        for ui in &u8.0 {
            assert!((ui - 2.03).abs() < 0.02, "u = {ui}");
        }
    }

    #[test]
    fn nominal_input_scales_with_platform_size() {
        let a = truth_of(Platform::A);
        let c = truth_of(Platform::C);
        let ua = DVec::from_column_slice(&nominal_input(&a.a).unwrap().0);
        let uc = DVec::from_column_slice(&nominal_input(&c.a).unwrap().0);
        assert!(uc.norm() > ua.norm());
        // both satisfy A u = g_v exactly
        for (truth, u) in [(&a, &ua), (&c, &uc)] {
            let res = &truth.a * u - DVec::from_column_slice(&[GRAVITY, 0.0, 0.0, 0.0]);
            assert!(res.norm() < 1e-10);
        }
    }

    #[test]
    fn nominal_input_linearity_in_thrust_row() {
        let truth = truth_of(Platform::A);
        let mut doubled = truth.a.clone();
        for j in 0..doubled.ncols() {
            doubled[(0, j)] *= 2.0;
        }
        let u = nominal_input(&truth.a).unwrap();
        let u2 = nominal_input(&doubled).unwrap();
        for (a, b) in u.0.iter().zip(&u2.0) {
            assert_relative_eq!(b, &(a / 2.0), epsilon = 1e-6);
        }
    }

    #[test]
    fn orthonormal_rows_degenerate_to_transpose() {
        // A A^T = I when rows are orthonormal
        let mut a = DMat::zeros(4, 5);
        for i in 0..4 {
            a[(i, i)] = 1.0;
        }
        let gains = Gains::hover();
        let s = Vec4::new(0.2, -0.1, 0.3, 0.05);
        let h_dot = Vec4::zeros();
        let u = control_input(&a, &s, &h_dot, &gains).unwrap();
        let rhs = Vec4::new(GRAVITY, 0.0, 0.0, 0.0) - gains.k_matrix() * s;
        let expected = a.transpose() * DVec::from_column_slice(rhs.as_slice());
        for (x, y) in u.0.iter().zip(expected.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn rank_deficient_matrix_rejected() {
        let mut a = DMat::zeros(4, 4);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 1.0;
        a[(2, 2)] = 1.0; // yaw row all zero
        assert!(matches!(
            control_input(&a, &Vec4::zeros(), &Vec4::zeros(), &Gains::hover()),
            Err(Error::SingularConfiguration)
        ));
    }

    #[test]
    fn negative_hover_thrust_is_infeasible() {
        let mut a = DMat::identity(4, 4);
        a[(0, 0)] = -1.0;
        assert!(matches!(nominal_input(&a), Err(Error::InfeasibleTrim { .. })));
    }

    #[test]
    fn adapt_is_rank_one_in_s() {
        let truth = truth_of(Platform::A);
        let gains = Gains::hover();
        let dt = 1.0 / 25.0;

        // s = 0: no change
        let mut a0 = truth.a.clone();
        adapt(&mut a0, &Vec4::zeros(), &ThrustCommand::uniform(4, 2.4), &gains.lambda, dt);
        assert_eq!(a0, truth.a);

        // s along e1 with u = ones: only row 0 changes, by lambda_z*sigma*dt
        let sigma = 0.3;
        let mut a1 = truth.a.clone();
        adapt(&mut a1, &Vec4::new(sigma, 0.0, 0.0, 0.0), &ThrustCommand::uniform(4, 1.0), &gains.lambda, dt);
        for j in 0..4 {
            assert_relative_eq!(
                a1[(0, j)] - truth.a[(0, j)],
                gains.lambda[0] * sigma * dt,
                epsilon = 1e-15
            );
            for i in 1..4 {
                assert_eq!(a1[(i, j)], truth.a[(i, j)]);
            }
        }
    }

    #[test]
    fn two_adapt_steps_equal_one_combined() {
        let truth = truth_of(Platform::A);
        let lambda = Gains::hover().lambda;
        let s = Vec4::new(0.1, -0.2, 0.05, 0.3);
        let u = ThrustCommand(vec![2.0, 2.5, 2.2, 2.3]);
        let mut a_two = truth.a.clone();
        adapt(&mut a_two, &s, &u, &lambda, 0.02);
        adapt(&mut a_two, &s, &u, &lambda, 0.02);
        let mut a_one = truth.a.clone();
        adapt(&mut a_one, &s, &u, &lambda, 0.04);
        assert_relative_eq!(a_two, a_one, epsilon = 1e-14);
    }

    #[test]
    fn trim_formula_exact_elementwise() {
        let mut a = DMat::zeros(4, 2);
        a[(1, 0)] = 2.0;
        a[(1, 1)] = -3.0;
        a[(0, 0)] = 1.0;
        a[(0, 1)] = 1.0;

        let trimmed = trim_step(&a, 1, -1.0, 0.1);
        assert_relative_eq!(trimmed[(1, 0)], 2.2, epsilon = 1e-15);
        assert_relative_eq!(trimmed[(1, 1)], -2.7, epsilon = 1e-15);
        // other rows untouched
        assert_eq!(trimmed[(0, 0)], 1.0);
        assert_eq!(trimmed[(0, 1)], 1.0);

        // all-positive row with positive input scales by (1 - delta)
        let mut b = DMat::zeros(4, 3);
        for j in 0..3 {
            b[(2, j)] = 1.0 + j as f64;
        }
        let tb = trim_step(&b, 2, 1.0, 0.02);
        for j in 0..3 {
            assert_relative_eq!(tb[(2, j)], 0.98 * (1.0 + j as f64), epsilon = 1e-15);
        }

        // zero step is the identity
        assert_eq!(trim_step(&a, 3, 1.0, 0.0), a);
    }

    #[test]
    fn h_rate_startup_and_settling() {
        let dt = 1.0 / 150.0;
        let mut f = HRateFilter::new(H_RATE_CUTOFF_HZ);
        // first invocation: exactly zero
        assert_eq!(f.update(&Vec4::new(1.0, 0.0, 0.0, 0.0), dt), Vec4::zeros());
        // constant input: stays zero
        for _ in 0..50 {
            let y = f.update(&Vec4::new(1.0, 0.0, 0.0, 0.0), dt);
            assert!(y.norm() < 1e-12);
        }
        // linear ramp at rate c: converges to c within 2% after 10 taus
        let c = 0.7;
        let mut g = HRateFilter::new(H_RATE_CUTOFF_HZ);
        let tau = 1.0 / (2.0 * std::f64::consts::PI * H_RATE_CUTOFF_HZ);
        let steps = (10.0 * tau / dt).ceil() as usize + 1;
        let mut y = Vec4::zeros();
        for k in 0..steps {
            y = g.update(&Vec4::new(c * k as f64 * dt, 0.0, 0.0, 0.0), dt);
        }
        assert!((y[0] - c).abs() / c < 0.02, "settled to {}", y[0]);
    }

    #[test]
    fn lyapunov_values() {
        assert_eq!(lyapunov_partial(&Vec4::zeros()), 0.0);
        assert_eq!(lyapunov_partial(&Vec4::new(1.0, 0.0, 0.0, 0.0)), 0.5);
        let truth = truth_of(Platform::A);
        let lambda = Gains::hover().lambda;
        let s = Vec4::new(0.3, 0.1, -0.2, 0.0);
        assert_eq!(lyapunov_full(&s, &truth.a, &truth.a, &lambda), lyapunov_partial(&s));
        let mut perturbed = truth.a.clone();
        perturbed[(1, 0)] += 0.5;
        let v = lyapunov_full(&s, &perturbed, &truth.a, &lambda);
        assert!(v >= lyapunov_partial(&s));
        assert_relative_eq!(
            v - lyapunov_partial(&s),
            0.5 * 0.25 / lambda[1],
            epsilon = 1e-12
        );
    }

    #[test]
    fn unstable_gain_combo_rejected() {
        let mut g = Gains::hover();
        g.k = 1.0; // k <= k_p/k_d = 2
        assert!(g.validate().is_err());
        assert!(Gains::hover().validate().is_ok());
        assert!(Gains::trajectory().validate().is_ok());
    }

    #[test]
    fn controller_steps_toward_setpoint_demand() {
        // below the setpoint, the total demanded thrust exceeds hover thrust
        let truth = truth_of(Platform::A);
        let mut ctl = Controller::new(Gains::hover(), truth.a.clone(), 1.0 / 150.0).unwrap();
        let sp = Setpoint::hover_at(Vec3::new(0.0, 0.0, 0.8));
        let u = ctl.step(&hover_state(Vec3::new(0.0, 0.0, 0.4)), &sp).unwrap();
        let hover = nominal_input(&truth.a).unwrap();
        let total: f64 = u.0.iter().sum();
        let hover_total: f64 = hover.0.iter().sum();
        assert!(total > hover_total, "{total} <= {hover_total}");
    }
}
