//! Scenario orchestration: calibration, scripted trimming, closed-loop
//! flight simulation at the published loop rates, windowed error metrics,
//! and log/report emission.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{
    control_input, controller_log_header, controller_log_row, lyapunov_full, lyapunov_partial,
    trim_step, Controller, Gains, Vec4,
};
use crate::error::{Error, Result};
use crate::estimation::{calibrate, CalibrationOptions, ConfigEstimate, EstimateReport};
use crate::geom::{yaw_of, DMat, RotationMatrix, Vec3};
use crate::imu::{
    simulate_calibration, write_calibration_csv, ExcitationConfig, ImuNoise,
};
use crate::plant::{
    angular_accel, flight_log_header, flight_log_row, saturate, Plant, PlantConfig, RigidState,
    ThrustCommand,
};
use crate::trajectory::{mission_plan, polynomial_segment, MissionConfig, Segment, TrajectoryPlan};
use crate::vehicle::{
    assemble_vehicle, hardware_list, preset, ModuleSpec, PayloadSpec, Platform, VehicleFile,
    VehicleTruth,
};

/// Flight-arena half-width, m; leaving the arena ends the flight.
pub const ARENA_HALF_WIDTH: f64 = 1.8;
/// Arena ceiling, m.
pub const ARENA_HEIGHT: f64 = 2.5;
/// A spin faster than this below [`LIFTOFF_ALTITUDE`] is a failed takeoff.
pub const CRASH_RATE: f64 = 2.0;
pub const LIFTOFF_ALTITUDE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Hover,
    Helix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GainProfile {
    Hover,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialA {
    /// Ground-truth configuration matrix (ideal-loop diagnostics).
    Truth,
    /// IMU calibration pipeline output.
    Pipeline,
}

/// A full experiment description; serializable as TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub platform: String,
    /// Vehicle description file; overrides the platform preset when set.
    pub vehicle: Option<String>,
    pub seed: u64,
    pub plan: PlanKind,
    /// Total flight time for the hover plan, s (the helix mission has a
    /// fixed stage layout).
    pub duration: f64,
    pub gains: GainProfile,
    pub adaptation: bool,
    pub initial_a: InitialA,
    pub calibration_noise: bool,
    pub calibration_rate: f64,
    pub calibration_duration: f64,
    pub trim: bool,
    pub trim_delta: f64,
    pub thrust_noise_std: f64,
    pub feedback_delay: f64,
    pub hover_height: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            platform: "A".into(),
            vehicle: None,
            seed: 0,
            plan: PlanKind::Hover,
            duration: 120.0,
            gains: GainProfile::Hover,
            adaptation: true,
            initial_a: InitialA::Pipeline,
            calibration_noise: true,
            calibration_rate: 50.0,
            calibration_duration: 8.0,
            trim: false,
            trim_delta: 0.02,
            thrust_noise_std: 0.05,
            feedback_delay: 0.0,
            hover_height: 0.8,
        }
    }
}

impl Scenario {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Signed mean, standard deviation, and mean magnitude of the per-axis
/// position error over one time window.
#[derive(Debug, Clone)]
pub struct WindowStats {
    pub start: f64,
    pub end: f64,
    pub mean: Vec3,
    pub std: Vec3,
    pub mean_abs: Vec3,
    pub samples: usize,
}

/// Per-axis statistics of `errors` over `start <= t <= end`.
pub fn window_stats(times: &[f64], errors: &[Vec3], start: f64, end: f64) -> Result<WindowStats> {
    let picked: Vec<&Vec3> = times
        .iter()
        .zip(errors)
        .filter(|(t, _)| (start..=end).contains(t))
        .map(|(_, e)| e)
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptyWindow { start, end });
    }
    let n = picked.len() as f64;
    let mean: Vec3 = picked.iter().copied().sum::<Vec3>() / n;
    let mut var = Vec3::zeros();
    let mut mean_abs = Vec3::zeros();
    for e in &picked {
        let d = *e - mean;
        var += d.component_mul(&d);
        mean_abs += e.abs();
    }
    Ok(WindowStats {
        start,
        end,
        mean,
        std: (var / n).map(f64::sqrt),
        mean_abs: mean_abs / n,
        samples: picked.len(),
    })
}

/// Outcome flags of a flight.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    /// Time at which the vehicle left the arena, if it did.
    pub arena_exit: Option<f64>,
    /// Time at which the vehicle hit the ground after takeoff, if it did.
    pub crashed: Option<f64>,
}

/// Everything a scenario run produces, beyond the files on disk.
#[derive(Debug, Clone)]
pub struct Report {
    pub platform: String,
    /// Early hover window (default 20-50 s), when reachable.
    pub early: Option<WindowStats>,
    /// Late hover window (default 50-110 s), when reachable.
    pub late: Option<WindowStats>,
    /// Helix-stage window for trajectory missions.
    pub helix: Option<WindowStats>,
    /// Partial Lyapunov value at each controller tick.
    pub vs_series: Vec<(f64, f64)>,
    /// Full Lyapunov value at each adaptation tick (simulation diagnostic).
    pub v_series: Vec<(f64, f64)>,
    /// Arm RMSE of the calibration against truth, m (pipeline runs only).
    pub calibration_arm_rmse: Option<f64>,
    /// Residual imbalance norms per trimming step, rad/s^2.
    pub trim_norms: Option<Vec<f64>>,
    pub flags: Flags,
    /// Duration actually simulated, s.
    pub simulated: f64,
}

/// Scripted replacement for manual RC trimming: reads the sign of the
/// angular acceleration the pre-liftoff plant would exhibit under the
/// nominal input, and nudges the corresponding rows until the imbalance
/// drops below `tol`. Returns the imbalance norm before every step plus
/// after the last.
pub fn scripted_trim(
    a_hat: &mut DMat,
    truth: &VehicleTruth,
    delta: f64,
    tol: f64,
    max_steps: usize,
) -> Result<Vec<f64>> {
    let gains = Gains::hover();
    // raw min-norm hover input; rotors that would be driven slightly
    // negative by a corrupted estimate just saturate at zero
    let imbalance = |a: &DMat| -> Result<Vec3> {
        let u0 = control_input(a, &Vec4::zeros(), &Vec4::zeros(), &gains)?;
        Ok(angular_accel(&Vec3::zeros(), &saturate(&u0, truth), truth))
    };
    let mut wdot = imbalance(a_hat)?;
    let mut norms = vec![wdot.norm()];
    // a fixed step leaves a residual of about delta * m g r / I, well above
    // any useful tolerance, so ease off whenever an input stops helping --
    // exactly what a pilot feeling out the trim does
    let mut step = delta;
    for _ in 0..max_steps {
        if wdot.norm() < tol {
            return Ok(norms);
        }
        // the corrective input opposes the observed rotation
        let mut candidate = a_hat.clone();
        for axis in 1..=3 {
            if wdot[axis - 1].abs() > tol / 3.0 {
                candidate = trim_step(&candidate, axis, -wdot[axis - 1].signum(), step);
            }
        }
        let wdot_new = imbalance(&candidate)?;
        if wdot_new.norm() < wdot.norm() {
            *a_hat = candidate;
            wdot = wdot_new;
            norms.push(wdot.norm());
        } else {
            step *= 0.5;
        }
    }
    if wdot.norm() < tol {
        return Ok(norms);
    }
    Err(Error::ScenarioFailed {
        phase: "trim".into(),
        reason: format!(
            "imbalance still {:.3} rad/s^2 after {max_steps} steps",
            norms.last().unwrap()
        ),
    })
}

/// Raw time series of one flight, used to build reports and logs.
pub struct FlightOutcome {
    pub times: Vec<f64>,
    pub errors: Vec<Vec3>,
    pub vs_series: Vec<(f64, f64)>,
    pub v_series: Vec<(f64, f64)>,
    pub flight_csv: String,
    pub controller_csv: String,
    pub setpoint_csv: String,
    pub flags: Flags,
    pub simulated: f64,
    pub final_a_hat: DMat,
}

const DT_CTRL: f64 = 1.0 / 150.0;
const DT_ADAPT: f64 = 1.0 / 25.0;
/// Flight/setpoint logs are decimated to this rate, Hz.
const LOG_RATE: f64 = 50.0;

/// Runs one closed-loop flight: plant at `cfg.dt_sim`, controller at 150 Hz,
/// adaptation at 25 Hz, optional feedback latency on position/velocity.
/// `airborne_after` is when ground contact stops being normal (crash
/// detection); `truth_for_v` enables the full-Lyapunov diagnostic.
pub fn run_flight(
    truth: &VehicleTruth,
    a_hat: DMat,
    gains: Gains,
    adaptation: bool,
    plan: &TrajectoryPlan,
    cfg: PlantConfig,
    airborne_after: f64,
) -> Result<FlightOutcome> {
    let n = truth.n;
    let dt = cfg.dt_sim;
    let delay = cfg.feedback_delay;
    let total = plan.total_duration();
    let steps = (total / dt).round() as usize;
    let log_every = (1.0 / (LOG_RATE * dt)).round().max(1.0) as usize;

    let start = plan.eval(0.0)?;
    let mut plant = Plant::new(
        truth.clone(),
        cfg,
        RigidState { position: start.pos, ..RigidState::grounded() },
    );
    let mut ctl = Controller::new(gains, a_hat, DT_CTRL)?;
    let mut u_applied = ThrustCommand::zeros(n);

    // (t, position, velocity, yaw): the radio-delayed measurements
    let mut delay_buf: VecDeque<(f64, Vec3, Vec3, f64)> = VecDeque::new();
    delay_buf.push_back((0.0, start.pos, Vec3::zeros(), 0.0));

    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut vs_series = Vec::new();
    let mut v_series = Vec::new();
    let mut flight_csv = flight_log_header(n) + "\n";
    let mut controller_csv = controller_log_header(n) + "\n";
    let mut setpoint_csv = String::from("t,pdx,pdy,pdz,yawd\n");
    let mut flags = Flags::default();

    let mut next_ctrl = 0.0;
    let mut next_adapt = 0.0;
    let mut simulated = 0.0;

    for k in 0..steps {
        let t = k as f64 * dt;
        let sp = plan.eval(t.min(total))?;

        if t + 1e-9 >= next_ctrl {
            // position/velocity/yaw come over the radio and may be stale;
            // roll/pitch attitude and body rates are onboard and current
            let fb = if delay > 0.0 {
                let want = t - delay;
                let mut picked = *delay_buf.front().unwrap();
                for entry in delay_buf.iter() {
                    if entry.0 <= want + 1e-12 {
                        picked = *entry;
                    } else {
                        break;
                    }
                }
                let yaw_now = yaw_of(&plant.state.rotation).unwrap_or(picked.3);
                RigidState {
                    position: picked.1,
                    velocity: picked.2,
                    rotation: RotationMatrix::rot_z(picked.3 - yaw_now)
                        * plant.state.rotation,
                    omega: plant.state.omega,
                }
            } else {
                plant.state.clone()
            };
            let u_raw = ctl.step(&fb, &sp)?;
            u_applied = saturate(&u_raw, truth);

            let mut rank_ok = true;
            let adapting = adaptation && t + 1e-9 >= next_adapt;
            if adapting {
                rank_ok = ctl.adapt(&u_applied, DT_ADAPT);
                next_adapt += DT_ADAPT;
                v_series.push((
                    t,
                    lyapunov_full(&ctl.last_s, &ctl.a_hat, &truth.a, &ctl.gains.lambda),
                ));
            }

            vs_series.push((t, lyapunov_partial(&ctl.last_s)));
            controller_csv.push_str(&controller_log_row(
                t,
                &ctl.last_s,
                &ctl.last_h,
                &ctl.last_u,
                v_series.last().filter(|(vt, _)| *vt == t).map(|(_, v)| *v),
                rank_ok,
            ));
            controller_csv.push('\n');
            next_ctrl += DT_CTRL;
        }

        if k % log_every == 0 {
            // the error series is sampled exactly at the log rows so every
            // report number is recomputable from the CSVs alone
            times.push(t);
            errors.push(plant.state.position - sp.pos);
            flight_csv.push_str(&flight_log_row(t, &plant.state, &u_applied));
            flight_csv.push('\n');
            setpoint_csv.push_str(&format!(
                "{t:.9},{:.9},{:.9},{:.9},{:.9}\n",
                sp.pos.x, sp.pos.y, sp.pos.z, sp.yaw
            ));
        }

        plant.step(&u_applied)?;
        simulated = t + dt;
        if delay > 0.0 {
            let yaw = yaw_of(&plant.state.rotation)
                .unwrap_or_else(|_| delay_buf.back().unwrap().3);
            delay_buf.push_back((simulated, plant.state.position, plant.state.velocity, yaw));
            while delay_buf.len() > 2 && delay_buf[1].0 <= simulated - delay - dt {
                delay_buf.pop_front();
            }
        }

        let st = &plant.state;
        if st.position.z < LIFTOFF_ALTITUDE && st.omega.norm() > CRASH_RATE {
            return Err(Error::ScenarioFailed {
                phase: "flight".into(),
                reason: format!(
                    "liftoff failure at t = {simulated:.2} s: |w| = {:.2} rad/s below {LIFTOFF_ALTITUDE} m",
                    st.omega.norm()
                ),
            });
        }
        if st.position.x.abs() > ARENA_HALF_WIDTH
            || st.position.y.abs() > ARENA_HALF_WIDTH
            || st.position.z > ARENA_HEIGHT
        {
            flags.arena_exit = Some(simulated);
            break;
        }
        if simulated > airborne_after && st.position.z <= 0.0 {
            flags.crashed = Some(simulated);
            break;
        }
    }

    Ok(FlightOutcome {
        times,
        errors,
        vs_series,
        v_series,
        flight_csv,
        controller_csv,
        setpoint_csv,
        flags,
        simulated,
        final_a_hat: ctl.a_hat,
    })
}

/// Builds the flight plan for a scenario.
pub fn scenario_plan(sc: &Scenario) -> Result<TrajectoryPlan> {
    let hover_pos = Vec3::new(0.0, 0.0, sc.hover_height);
    match sc.plan {
        PlanKind::Hover => {
            let takeoff = polynomial_segment(
                &crate::controller::Setpoint::hover_at(Vec3::zeros()),
                &crate::controller::Setpoint::hover_at(hover_pos),
                10.0,
            )?;
            let hover = Segment::Hover {
                pos: hover_pos,
                duration: (sc.duration - 10.0).max(1.0),
            };
            TrajectoryPlan::from_segments(vec![takeoff, hover])
        }
        PlanKind::Helix => mission_plan(&MissionConfig {
            hover_pos,
            ..MissionConfig::default()
        }),
    }
}

/// The helix stage's time window inside a helix-mission plan.
pub fn helix_window(plan: &TrajectoryPlan) -> Option<(f64, f64)> {
    for (i, seg) in plan.segments().iter().enumerate() {
        if matches!(seg, Segment::Helix { .. }) {
            let start = plan.segment_start(i);
            return Some((start, start + seg.duration()));
        }
    }
    None
}

/// Runs a scenario end to end: calibration (or truth shortcut), optional
/// scripted trimming, flight, metrics. Writes `calibration.csv`,
/// `estimate.toml`, `flight.csv`, `setpoint.csv`, `controller.csv`, and
/// `report.txt` into `out_dir` when given.
pub fn run_scenario(sc: &Scenario, out_dir: Option<&Path>) -> Result<Report> {
    run_scenario_full(sc, out_dir).map(|(report, _)| report)
}

/// [`run_scenario`], but also hands back the raw flight time series.
pub fn run_scenario_full(
    sc: &Scenario,
    out_dir: Option<&Path>,
) -> Result<(Report, FlightOutcome)> {
    let (payload, modules) = scenario_vehicle(sc)?;
    let truth = assemble_vehicle(&payload, &modules)?;
    let write = |name: &str, content: &str| -> Result<()> {
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    };

    // initial configuration-matrix estimate
    let mut calibration_arm_rmse = None;
    let mut a_hat = match sc.initial_a {
        InitialA::Truth => truth.a.clone(),
        InitialA::Pipeline => {
            let est = run_calibration(sc, &truth, &hardware_list(&modules), out_dir)
                .map_err(|e| match e {
                    e @ Error::ScenarioFailed { .. } => e,
                    e => Error::ScenarioFailed { phase: "calibration".into(), reason: e.to_string() },
                })?;
            let r_gc = truth.imu_positions_from_gc();
            let rmse = (est
                .arms
                .iter()
                .zip(&r_gc)
                .map(|(a, b)| (a - b).norm_squared())
                .sum::<f64>()
                / r_gc.len() as f64)
                .sqrt();
            calibration_arm_rmse = Some(rmse);
            est.a
        }
    };

    // optional scripted trimming on the pre-liftoff plant
    let trim_norms = if sc.trim {
        Some(scripted_trim(&mut a_hat, &truth, sc.trim_delta, 0.1, 50)?)
    } else {
        None
    };

    let plan = scenario_plan(sc)?;
    let gains = match sc.gains {
        GainProfile::Hover => Gains::hover(),
        GainProfile::Trajectory => Gains::trajectory(),
    };
    let cfg = PlantConfig {
        thrust_noise_std: sc.thrust_noise_std,
        feedback_delay: sc.feedback_delay,
        rng_seed: sc.seed,
        ..PlantConfig::default()
    };
    let outcome = run_flight(&truth, a_hat, gains, sc.adaptation, &plan, cfg, 12.0)?;

    let total = plan.total_duration();
    let stats = |lo: f64, hi: f64| window_stats(&outcome.times, &outcome.errors, lo, hi).ok();
    let report = Report {
        platform: sc.platform.clone(),
        early: stats(20.0, 50.0_f64.min(total)),
        late: stats(50.0, 110.0_f64.min(total)),
        helix: helix_window(&plan).and_then(|(lo, hi)| stats(lo, hi)),
        vs_series: outcome.vs_series.clone(),
        v_series: outcome.v_series.clone(),
        calibration_arm_rmse,
        trim_norms,
        flags: outcome.flags.clone(),
        simulated: outcome.simulated,
    };

    write("flight.csv", &outcome.flight_csv)?;
    write("setpoint.csv", &outcome.setpoint_csv)?;
    write("controller.csv", &outcome.controller_csv)?;
    write("report.txt", &render_report(&report))?;
    Ok((report, outcome))
}

/// The payload/module pair a scenario flies: the named preset, or the
/// referenced vehicle description file.
pub fn scenario_vehicle(sc: &Scenario) -> Result<(PayloadSpec, Vec<ModuleSpec>)> {
    match &sc.vehicle {
        Some(path) => VehicleFile::from_toml(&std::fs::read_to_string(path)?)?.to_parts(),
        None => {
            let platform: Platform = sc.platform.parse()?;
            Ok(preset(platform))
        }
    }
}

/// Runs just the calibration phase of a scenario: synthetic excitation,
/// estimation pipeline, optional `calibration.csv`/`estimate.toml` output.
pub fn run_calibration(
    sc: &Scenario,
    truth: &VehicleTruth,
    hardware: &[ModuleSpec],
    out_dir: Option<&Path>,
) -> Result<ConfigEstimate> {
    let ex = ExcitationConfig {
        duration: sc.calibration_duration,
        sample_rate: sc.calibration_rate,
        ..Default::default()
    };
    let noise = sc
        .calibration_noise
        .then(|| ImuNoise { seed: sc.seed, ..Default::default() });
    let data = simulate_calibration(truth, &ex, noise.as_ref());
    let opts = CalibrationOptions {
        cutoff_hz: if sc.calibration_noise { Some(4.0) } else { None },
        ..Default::default()
    };
    let est = calibrate(&data, hardware, &opts)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("calibration.csv"), write_calibration_csv(&data))?;
        std::fs::write(
            dir.join("estimate.toml"),
            EstimateReport::from_estimate(&est).to_toml()?,
        )?;
    }
    Ok(est)
}

/// Recomputes window statistics from a `flight.csv` / `setpoint.csv` pair
/// written by [`run_scenario`] (rows must line up one to one).
pub fn metrics_from_logs(
    flight_csv: &str,
    setpoint_csv: &str,
    start: f64,
    end: f64,
) -> Result<WindowStats> {
    let parse = |text: &str, n: usize| -> Result<Vec<Vec<f64>>> {
        text.lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let fields: Vec<f64> = l
                    .split(',')
                    .take(n)
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse(format!("bad log row {l:?}: {e}")))?;
                if fields.len() < n {
                    return Err(Error::Parse(format!("log row too short: {l:?}")));
                }
                Ok(fields)
            })
            .collect()
    };
    let flight = parse(flight_csv, 4)?;
    let setpoint = parse(setpoint_csv, 4)?;
    if flight.len() != setpoint.len() {
        return Err(Error::Parse(format!(
            "flight log has {} rows, setpoint log has {}",
            flight.len(),
            setpoint.len()
        )));
    }
    let mut times = Vec::with_capacity(flight.len());
    let mut errors = Vec::with_capacity(flight.len());
    for (f, s) in flight.iter().zip(&setpoint) {
        if (f[0] - s[0]).abs() > 1e-6 {
            return Err(Error::Parse(format!(
                "timestamp mismatch: flight {} vs setpoint {}",
                f[0], s[0]
            )));
        }
        times.push(f[0]);
        errors.push(Vec3::new(f[1] - s[1], f[2] - s[2], f[3] - s[3]));
    }
    window_stats(&times, &errors, start, end)
}

fn render_window(name: &str, w: &Option<WindowStats>) -> String {
    match w {
        None => format!("{name}: (no samples)\n"),
        Some(w) => format!(
            "{name} [{:.0}-{:.0} s, {} samples]\n  mean error (m):     {:+.4} {:+.4} {:+.4}\n  std (m):            {:.4} {:.4} {:.4}\n  mean |error| (m):   {:.4} {:.4} {:.4}\n",
            w.start, w.end, w.samples,
            w.mean.x, w.mean.y, w.mean.z,
            w.std.x, w.std.y, w.std.z,
            w.mean_abs.x, w.mean_abs.y, w.mean_abs.z,
        ),
    }
}

/// Human-readable summary; every number is recomputable from the CSVs.
pub fn render_report(r: &Report) -> String {
    let mut out = format!("platform {}\nsimulated {:.2} s\n", r.platform, r.simulated);
    if let Some(rmse) = r.calibration_arm_rmse {
        out.push_str(&format!("calibration arm RMSE: {:.4} m\n", rmse));
    }
    if let Some(norms) = &r.trim_norms {
        out.push_str(&format!(
            "trim: {} steps, imbalance {:.3} -> {:.3} rad/s^2\n",
            norms.len() - 1,
            norms.first().unwrap(),
            norms.last().unwrap()
        ));
    }
    out.push_str(&render_window("early window", &r.early));
    out.push_str(&render_window("late window", &r.late));
    if r.helix.is_some() {
        out.push_str(&render_window("helix stage", &r.helix));
    }
    if let Some((t, vs)) = r.vs_series.last() {
        out.push_str(&format!("final V_s at t = {t:.2} s: {vs:.6}\n"));
    }
    if let Some(t) = r.flags.arena_exit {
        out.push_str(&format!("ARENA EXIT at t = {t:.2} s\n"));
    }
    if let Some(t) = r.flags.crashed {
        out.push_str(&format!("CRASH at t = {t:.2} s\n"));
    }
    out
}
