//! Ground-truth rigid-body plant: full (unsimplified) dynamics of an
//! assembled vehicle under per-rotor thrust commands, actuator noise,
//! saturation, and a simple pre-liftoff ground clamp.

use nalgebra::UnitQuaternion;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::{integrate_rotation, RotationMatrix, Vec3};
use crate::vehicle::VehicleTruth;
use crate::GRAVITY;

/// Full simulation state: CM position/velocity in the inertial frame,
/// body-to-inertial rotation, and body angular velocity.
#[derive(Debug, Clone)]
pub struct RigidState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub rotation: RotationMatrix,
    pub omega: Vec3,
}

impl RigidState {
    /// At rest, level, on the ground at the origin.
    pub fn grounded() -> Self {
        RigidState {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            rotation: RotationMatrix::identity(),
            omega: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|x| x.is_finite())
            && self.velocity.iter().all(|x| x.is_finite())
            && self.rotation.matrix().iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
    }
}

/// Plant configuration knobs.
#[derive(Debug, Clone)]
pub struct PlantConfig {
    pub gravity: f64,
    /// Integration step, s.
    pub dt_sim: f64,
    /// Per-rotor additive thrust noise, N (standard deviation).
    pub thrust_noise_std: f64,
    /// Latency applied to position/yaw feedback, s (0 = none).
    pub feedback_delay: f64,
    pub rng_seed: u64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            gravity: GRAVITY,
            dt_sim: 1e-3,
            thrust_noise_std: 0.0,
            feedback_delay: 0.0,
            rng_seed: 0,
        }
    }
}

/// Per-rotor thrust commands, N. One entry per propelling module.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustCommand(pub Vec<f64>);

impl ThrustCommand {
    pub fn zeros(n: usize) -> Self {
        ThrustCommand(vec![0.0; n])
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        ThrustCommand(vec![value; n])
    }
}

/// Clamps every rotor command to its module's thrust range.
pub fn saturate(u: &ThrustCommand, truth: &VehicleTruth) -> ThrustCommand {
    ThrustCommand(
        u.0.iter()
            .zip(&truth.thrust_ranges)
            .map(|(&ui, &(lo, hi))| ui.clamp(lo, hi))
            .collect(),
    )
}

/// Total thrust and body torque `[T; tau] = A_u u`.
pub fn total_wrench(u: &ThrustCommand, truth: &VehicleTruth) -> (f64, Vec3) {
    let mut thrust = 0.0;
    let mut tau = Vec3::zeros();
    for (j, &ui) in u.0.iter().enumerate() {
        thrust += ui;
        tau += Vec3::new(truth.a_u[(1, j)], truth.a_u[(2, j)], truth.a_u[(3, j)]) * ui;
    }
    (thrust, tau)
}

/// Inertial CM acceleration for a given attitude and total thrust.
pub fn translational_accel(rotation: &RotationMatrix, thrust: f64, truth: &VehicleTruth, g: f64) -> Vec3 {
    (thrust / truth.total_mass) * rotation.k_hat() + Vec3::new(0.0, 0.0, -g)
}

/// Body angular acceleration under the full (gyroscopic) torque model,
/// `I wdot = tau - w x I w`. This is also the trim oracle's measurement.
pub fn angular_accel(omega: &Vec3, u: &ThrustCommand, truth: &VehicleTruth) -> Vec3 {
    let (_, tau) = total_wrench(u, truth);
    let inertia_inv = truth.inertia.try_inverse().expect("assembled inertia is SPD");
    inertia_inv * (tau - omega.cross(&(truth.inertia * omega)))
}

/// Total mechanical energy (translational + rotational + potential).
pub fn mechanical_energy(state: &RigidState, truth: &VehicleTruth, g: f64) -> f64 {
    0.5 * truth.total_mass * state.velocity.norm_squared()
        + 0.5 * state.omega.dot(&(truth.inertia * state.omega))
        + truth.total_mass * g * state.position.z
}

/// One RK4 step of the translational/rotational dynamics with the rotation
/// advanced on SO(3) by the exponential map. `u` must already be saturated;
/// `u_noisy` is the effective input after actuator noise.
fn rk4_step(state: &RigidState, u_noisy: &ThrustCommand, truth: &VehicleTruth, g: f64, dt: f64) -> RigidState {
    let (thrust, tau) = total_wrench(u_noisy, truth);
    let inertia_inv = truth.inertia.try_inverse().expect("assembled inertia is SPD");

    // derivative of (v, omega) at a stage; position feeds straight from v
    let deriv = |rot: &RotationMatrix, omega: &Vec3| -> (Vec3, Vec3) {
        let acc = translational_accel(rot, thrust, truth, g);
        let wdot = inertia_inv * (tau - omega.cross(&(truth.inertia * omega)));
        (acc, wdot)
    };
    let rot_at = |w: &Vec3, h: f64| integrate_rotation(&state.rotation, w, h);

    let (a1, wd1) = deriv(&state.rotation, &state.omega);
    let w2 = state.omega + 0.5 * dt * wd1;
    let (a2, wd2) = deriv(&rot_at(&state.omega, 0.5 * dt), &w2);
    let w3 = state.omega + 0.5 * dt * wd2;
    let (a3, wd3) = deriv(&rot_at(&w2, 0.5 * dt), &w3);
    let w4 = state.omega + dt * wd3;
    let (a4, wd4) = deriv(&rot_at(&w3, dt), &w4);

    let acc = (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0;
    let wdot = (wd1 + 2.0 * wd2 + 2.0 * wd3 + wd4) / 6.0;
    let omega_avg = (state.omega + 2.0 * w2 + 2.0 * w3 + w4) / 6.0;

    RigidState {
        position: state.position + state.velocity * dt + 0.5 * acc * dt * dt,
        velocity: state.velocity + acc * dt,
        rotation: integrate_rotation(&state.rotation, &omega_avg, dt),
        omega: state.omega + wdot * dt,
    }
}

/// A running simulation instance: owns its state, clock, and RNG.
pub struct Plant {
    pub truth: VehicleTruth,
    pub config: PlantConfig,
    pub state: RigidState,
    pub t: f64,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Plant {
    pub fn new(truth: VehicleTruth, config: PlantConfig, initial: RigidState) -> Self {
        let noise = if config.thrust_noise_std > 0.0 {
            Some(Normal::new(0.0, config.thrust_noise_std).expect("std >= 0"))
        } else {
            None
        };
        let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        Plant { truth, config, state: initial, t: 0.0, rng, noise }
    }

    /// Effective input after drawing per-rotor actuator noise.
    fn perturb(&mut self, u: &ThrustCommand) -> ThrustCommand {
        match &self.noise {
            None => u.clone(),
            Some(dist) => ThrustCommand(
                u.0.iter().map(|&ui| ui + dist.sample(&mut self.rng)).collect(),
            ),
        }
    }

    /// Advances the plant by one `dt_sim` under the (saturated) command `u`.
    pub fn step(&mut self, u: &ThrustCommand) -> Result<()> {
        let u_eff = self.perturb(u);
        let mut next = rk4_step(&self.state, &u_eff, &self.truth, self.config.gravity, self.config.dt_sim);

        // pre-liftoff ground clamp: no bounce, no tipping
        if next.position.z <= 0.0 {
            let (thrust, _) = total_wrench(&u_eff, &self.truth);
            let net_up = thrust * next.rotation.k_hat().z - self.truth.total_mass * self.config.gravity;
            if net_up <= 0.0 {
                next.position.z = 0.0;
                next.velocity.z = 0.0;
                next.omega = Vec3::zeros();
            }
        }

        self.t += self.config.dt_sim;
        if !next.is_finite() {
            return Err(Error::NonFiniteState { t: self.t });
        }
        self.state = next;
        Ok(())
    }

    /// Angular acceleration the vehicle would exhibit right now under `u`,
    /// ignoring the ground clamp (the trimming procedure's observable).
    pub fn would_be_angular_accel(&self, u: &ThrustCommand) -> Vec3 {
        angular_accel(&self.state.omega, u, &self.truth)
    }
}

/// Attitude as a unit quaternion `(w, x, y, z)` with `R = R(q)` in the
/// scalar-first Hamilton convention; used by the flight-log format.
pub fn rotation_to_quaternion(r: &RotationMatrix) -> [f64; 4] {
    let q = UnitQuaternion::from_matrix(r.matrix());
    [q.w, q.i, q.j, q.k]
}

/// Flight-log CSV header for an N-rotor vehicle:
/// `t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,u1..uN`.
pub fn flight_log_header(n: usize) -> String {
    let mut h = String::from("t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz");
    for i in 1..=n {
        h.push_str(&format!(",u{i}"));
    }
    h
}

/// One flight-log CSV row.
pub fn flight_log_row(t: f64, state: &RigidState, u: &ThrustCommand) -> String {
    let q = rotation_to_quaternion(&state.rotation);
    let mut row = format!(
        "{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
        t,
        state.position.x,
        state.position.y,
        state.position.z,
        state.velocity.x,
        state.velocity.y,
        state.velocity.z,
        q[0],
        q[1],
        q[2],
        q[3],
        state.omega.x,
        state.omega.y,
        state.omega.z,
    );
    for ui in &u.0 {
        row.push_str(&format!(",{ui:.9}"));
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{assemble_vehicle, preset, Platform};
    use approx::assert_relative_eq;

    fn platform_a() -> VehicleTruth {
        let (payload, modules) = preset(Platform::A);
        assemble_vehicle(&payload, &modules).unwrap()
    }

    #[test]
    fn saturation_clamps_and_is_idempotent() {
        let truth = platform_a();
        let u = ThrustCommand(vec![7.0, -1.0, 3.0, 6.5]);
        let s = saturate(&u, &truth);
        assert_eq!(s.0, vec![6.5, 0.0, 3.0, 6.5]);
        assert_eq!(saturate(&s, &truth), s);
    }

    #[test]
    fn zero_input_zero_wrench() {
        let truth = platform_a();
        let (thrust, tau) = total_wrench(&ThrustCommand::zeros(4), &truth);
        assert_eq!(thrust, 0.0);
        assert_eq!(tau, Vec3::zeros());
    }

    #[test]
    fn hover_input_balances_symmetric_platform() {
        let truth = platform_a();
        let per_rotor = truth.total_mass * GRAVITY / 4.0;
        let (thrust, tau) = total_wrench(&ThrustCommand::uniform(4, per_rotor), &truth);
        assert_relative_eq!(thrust, truth.total_mass * GRAVITY, epsilon = 1e-12);
        // row sums of A_u torque rows vanish for the symmetric layout
        assert!(tau.norm() < 1e-6, "tau = {tau:?}");
    }

    #[test]
    fn single_rotor_wrench_is_one_column() {
        let truth = platform_a();
        let mut u = ThrustCommand::zeros(4);
        u.0[0] = 2.5;
        let (thrust, tau) = total_wrench(&u, &truth);
        assert_relative_eq!(thrust, 2.5, epsilon = 1e-15);
        let r = truth.arms[0];
        let expected = Vec3::new(r.y, -r.x, truth.torque_ratios[0]) * 2.5;
        assert_relative_eq!(tau, expected, epsilon = 1e-12);
    }

    #[test]
    fn hover_equilibrium_is_stationary() {
        let truth = platform_a();
        let n = truth.n;
        let hover = ThrustCommand::uniform(n, truth.total_mass * GRAVITY / n as f64);
        let initial = RigidState {
            position: Vec3::new(0.0, 0.0, 1.0),
            ..RigidState::grounded()
        };
        let mut plant = Plant::new(truth, PlantConfig::default(), initial.clone());
        plant.step(&hover).unwrap();
        assert!((plant.state.position - initial.position).norm() < 1e-10);
        assert!(plant.state.velocity.norm() < 1e-10);
        assert!(plant.state.omega.norm() < 1e-10);
    }

    #[test]
    fn free_fall_acceleration() {
        let truth = platform_a();
        let initial = RigidState {
            position: Vec3::new(0.0, 0.0, 10.0),
            ..RigidState::grounded()
        };
        let mut plant = Plant::new(truth, PlantConfig::default(), initial);
        plant.step(&ThrustCommand::zeros(4)).unwrap();
        let dt = plant.config.dt_sim;
        assert_relative_eq!(plant.state.velocity.z, -GRAVITY * dt, epsilon = 1e-12);
    }

    #[test]
    fn constant_torque_single_axis_spinup() {
        // diagonalize the problem: point-mass quad with diagonal inertia
        let truth = {
            let (payload, modules) = preset(Platform::A);
            let mut t = assemble_vehicle(&payload, &modules).unwrap();
            t.inertia = crate::geom::Mat3::from_diagonal(&Vec3::new(7e-3, 7e-3, 1.3e-2));
            t
        };
        // thrust imbalance on the +-Y rotors produces roll torque only
        let tau_x = 0.02;
        let d = truth.arms[3].y;
        let delta = tau_x / (2.0 * d);
        let base = truth.total_mass * GRAVITY / 4.0;
        let u = ThrustCommand(vec![base, base - delta, base, base + delta]);
        let (_, tau) = total_wrench(&u, &truth);
        assert_relative_eq!(tau.x, tau_x, epsilon = 1e-12);

        let initial = RigidState {
            position: Vec3::new(0.0, 0.0, 5.0),
            ..RigidState::grounded()
        };
        let ixx = truth.inertia[(0, 0)];
        let mut plant = Plant::new(truth, PlantConfig::default(), initial);
        for _ in 0..100 {
            plant.step(&u).unwrap();
        }
        let expected = tau_x / ixx * 0.1;
        assert!((plant.state.omega.x - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn determinism_per_seed() {
        let truth = platform_a();
        let cfg = PlantConfig { thrust_noise_std: 0.05, rng_seed: 42, ..Default::default() };
        let initial = RigidState {
            position: Vec3::new(0.0, 0.0, 1.0),
            ..RigidState::grounded()
        };
        let hover = ThrustCommand::uniform(4, truth.total_mass * GRAVITY / 4.0);
        let run = |truth: VehicleTruth| {
            let mut plant = Plant::new(truth, cfg.clone(), initial.clone());
            for _ in 0..500 {
                plant.step(&hover).unwrap();
            }
            (plant.state.position, plant.state.omega)
        };
        let a = run(truth.clone());
        let b = run(truth);
        assert_eq!(a, b);
    }

    #[test]
    fn energy_conserved_without_input() {
        let truth = platform_a();
        let initial = RigidState {
            position: Vec3::new(0.0, 0.0, 50.0),
            velocity: Vec3::new(1.0, -0.5, 2.0),
            rotation: RotationMatrix::rot_x(0.3),
            omega: Vec3::new(1.2, -0.7, 2.0),
        };
        let e0 = mechanical_energy(&initial, &truth, GRAVITY);
        let mut plant = Plant::new(truth.clone(), PlantConfig::default(), initial);
        for _ in 0..1000 {
            plant.step(&ThrustCommand::zeros(4)).unwrap();
        }
        let e1 = mechanical_energy(&plant.state, &truth, GRAVITY);
        assert!((e1 - e0).abs() / e0.abs() < 1e-6, "drift {}", (e1 - e0) / e0);
    }

    #[test]
    fn near_hover_matches_simplified_model() {
        // for small omega, [zdd + g; wdot] agrees with A u within 1%
        let truth = platform_a();
        let n = truth.n;
        let base = truth.total_mass * GRAVITY / n as f64;
        let u = ThrustCommand(vec![base * 1.02, base * 0.99, base * 1.01, base * 0.98]);
        let state = RigidState {
            position: Vec3::new(0.0, 0.0, 1.0),
            velocity: Vec3::zeros(),
            rotation: RotationMatrix::rot_x(0.01),
            omega: Vec3::new(0.05, -0.03, 0.02),
        };
        let (thrust, _) = total_wrench(&u, &truth);
        let zdd = translational_accel(&state.rotation, thrust, &truth, GRAVITY).z;
        let wdot = angular_accel(&state.omega, &u, &truth);
        let mut predicted = [0.0; 4];
        for j in 0..n {
            for i in 0..4 {
                predicted[i] += truth.a[(i, j)] * u.0[j];
            }
        }
        let actual = [zdd + GRAVITY, wdot.x, wdot.y, wdot.z];
        let scale = predicted.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..4 {
            assert!(
                (actual[i] - predicted[i]).abs() <= 0.01 * scale,
                "component {i}: {} vs {}",
                actual[i],
                predicted[i]
            );
        }
    }

    #[test]
    fn ground_clamp_holds_vehicle_down() {
        let truth = platform_a();
        let mut plant = Plant::new(truth, PlantConfig::default(), RigidState::grounded());
        let weak = ThrustCommand::uniform(4, 0.5);
        for _ in 0..200 {
            plant.step(&weak).unwrap();
        }
        assert_eq!(plant.state.position.z, 0.0);
        assert_eq!(plant.state.omega, Vec3::zeros());
    }
}
