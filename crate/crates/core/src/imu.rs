//! Synthetic multi-IMU measurements: rate-gyro and accelerometer samples for
//! every module of an assembled vehicle under a prescribed excitation motion,
//! plus the zero-phase low-pass filter used before calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::{skew, RotationMatrix, Vec3};
use crate::vehicle::VehicleTruth;
use crate::GRAVITY;

/// Rigid-body motion at one instant, everything an IMU model needs.
#[derive(Debug, Clone)]
pub struct MotionSample {
    /// Body-to-inertial rotation.
    pub rotation: RotationMatrix,
    /// Body angular velocity, rad/s.
    pub omega: Vec3,
    /// Body angular acceleration, rad/s^2.
    pub omega_dot: Vec3,
    /// Inertial acceleration of the vehicle CM, m/s^2.
    pub accel_cm: Vec3,
}

/// Ideal IMU output at `motion` for a sensor mounted at `r` (body frame,
/// relative to the CM) with module orientation `orient` (module to body).
/// Returns `(gyro, accel)` in the module frame; the accelerometer measures
/// specific force, so a static level sensor reads `+g` on its Z axis.
pub fn sample_imu(
    motion: &MotionSample,
    r: &Vec3,
    orient: &RotationMatrix,
) -> (Vec3, Vec3) {
    let gyro = orient.inverse_rotate(&motion.omega);
    let g_vec = Vec3::new(0.0, 0.0, -GRAVITY);
    let centrip = skew(&motion.omega) * skew(&motion.omega) + skew(&motion.omega_dot);
    let f_body = motion.rotation.inverse_rotate(&(motion.accel_cm - g_vec)) + centrip * r;
    (gyro, orient.inverse_rotate(&f_body))
}

/// Time series of one IMU's raw output.
#[derive(Debug, Clone)]
pub struct ImuSeries {
    pub gyro: Vec<Vec3>,
    pub accel: Vec<Vec3>,
}

/// Synchronized recordings of every IMU on the vehicle. Index 0 is the
/// control module; indices 1..=N are the propelling modules.
#[derive(Debug, Clone)]
pub struct CalibrationDataset {
    /// Sample spacing, s.
    pub dt: f64,
    pub series: Vec<ImuSeries>,
}

impl CalibrationDataset {
    pub fn len(&self) -> usize {
        self.series.first().map_or(0, |s| s.gyro.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sensor noise model: white Gaussian noise per axis, deterministic per seed.
#[derive(Debug, Clone)]
pub struct ImuNoise {
    /// Gyro noise standard deviation, rad/s.
    pub gyro_std: f64,
    /// Accelerometer noise standard deviation, m/s^2.
    pub accel_std: f64,
    pub seed: u64,
}

impl Default for ImuNoise {
    fn default() -> Self {
        // stands in for everything a consumer IMU gets wrong during a
        // hand-shaken recording (vibration, bias wander, misalignment),
        // sized so arm errors land at the few-centimeter level
        ImuNoise { gyro_std: 0.15, accel_std: 0.75, seed: 0 }
    }
}

/// Excitation profile for hand-shaken calibration: incommensurate sinusoidal
/// body rates on all three axes plus a translational wander of the CM, with
/// closed-form angular acceleration.
#[derive(Debug, Clone)]
pub struct ExcitationConfig {
    /// Recording length, s.
    pub duration: f64,
    /// Sample rate, Hz.
    pub sample_rate: f64,
    /// Per-axis rate amplitude, rad/s.
    pub rate_amp: Vec3,
    /// Per-axis rate frequency, Hz.
    pub rate_freq: Vec3,
    /// Translational acceleration amplitude, m/s^2.
    pub accel_amp: f64,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        ExcitationConfig {
            duration: 8.0,
            sample_rate: 50.0,
            rate_amp: Vec3::new(1.0, 0.9, 0.8),
            rate_freq: Vec3::new(0.3, 0.45, 0.7),
            accel_amp: 0.5,
        }
    }
}

impl ExcitationConfig {
    fn omega(&self, t: f64) -> Vec3 {
        let w = 2.0 * std::f64::consts::PI;
        Vec3::new(
            self.rate_amp.x * (w * self.rate_freq.x * t).sin(),
            self.rate_amp.y * (w * self.rate_freq.y * t + 0.7).sin(),
            self.rate_amp.z * (w * self.rate_freq.z * t + 1.9).sin(),
        )
    }

    fn omega_dot(&self, t: f64) -> Vec3 {
        let w = 2.0 * std::f64::consts::PI;
        Vec3::new(
            self.rate_amp.x * w * self.rate_freq.x * (w * self.rate_freq.x * t).cos(),
            self.rate_amp.y * w * self.rate_freq.y * (w * self.rate_freq.y * t + 0.7).cos(),
            self.rate_amp.z * w * self.rate_freq.z * (w * self.rate_freq.z * t + 1.9).cos(),
        )
    }

    fn accel_cm(&self, t: f64) -> Vec3 {
        let w = 2.0 * std::f64::consts::PI;
        Vec3::new(
            self.accel_amp * (w * 0.55 * t).sin(),
            self.accel_amp * (w * 0.35 * t + 0.4).sin(),
            self.accel_amp * (w * 0.25 * t + 1.1).sin(),
        )
    }
}

/// Generates the excitation motion as a uniformly sampled time series; the
/// attitude is integrated from the analytic rates.
pub fn excitation_motion(cfg: &ExcitationConfig) -> Vec<MotionSample> {
    let dt = 1.0 / cfg.sample_rate;
    let steps = (cfg.duration * cfg.sample_rate).round() as usize;
    let mut rotation = RotationMatrix::identity();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        out.push(MotionSample {
            rotation,
            omega: cfg.omega(t),
            omega_dot: cfg.omega_dot(t),
            accel_cm: cfg.accel_cm(t),
        });
        // midpoint rate for the attitude increment
        rotation = crate::geom::integrate_rotation(&rotation, &cfg.omega(t + 0.5 * dt), dt);
    }
    out
}

/// Records every IMU on `truth` through the excitation motion, optionally
/// corrupted by sensor noise.
pub fn simulate_calibration(
    truth: &VehicleTruth,
    cfg: &ExcitationConfig,
    noise: Option<&ImuNoise>,
) -> CalibrationDataset {
    let motion = excitation_motion(cfg);
    let mut series: Vec<ImuSeries> = (0..=truth.n)
        .map(|_| ImuSeries { gyro: Vec::with_capacity(motion.len()), accel: Vec::with_capacity(motion.len()) })
        .collect();
    for m in &motion {
        for i in 0..=truth.n {
            let (g, a) = sample_imu(m, &truth.imu_positions[i], &truth.module_orientations[i]);
            series[i].gyro.push(g);
            series[i].accel.push(a);
        }
    }
    if let Some(noise) = noise {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let gd = Normal::new(0.0, noise.gyro_std.max(f64::MIN_POSITIVE)).unwrap();
        let ad = Normal::new(0.0, noise.accel_std.max(f64::MIN_POSITIVE)).unwrap();
        for s in &mut series {
            for g in &mut s.gyro {
                *g += Vec3::new(gd.sample(&mut rng), gd.sample(&mut rng), gd.sample(&mut rng));
            }
            for a in &mut s.accel {
                *a += Vec3::new(ad.sample(&mut rng), ad.sample(&mut rng), ad.sample(&mut rng));
            }
        }
    }
    CalibrationDataset { dt: 1.0 / cfg.sample_rate, series }
}

/// Flags a recording whose rotational excitation is too weak on some axis
/// (RMS body rate below `min_rms`) for the arm/orientation solves to be
/// well conditioned.
pub fn poor_excitation_axes(dataset: &CalibrationDataset, min_rms: f64) -> Vec<usize> {
    let n = dataset.len();
    if n == 0 {
        return vec![0, 1, 2];
    }
    let gyro = &dataset.series[0].gyro;
    let mut sums = [0.0; 3];
    for g in gyro {
        for (ax, s) in sums.iter_mut().enumerate() {
            *s += g[ax] * g[ax];
        }
    }
    (0..3).filter(|&ax| (sums[ax] / n as f64).sqrt() < min_rms).collect()
}

/// Second-order Butterworth low-pass, applied forward and backward for zero
/// phase. Filter states are initialized to the steady-state response of the
/// first (respectively last) sample, so constant signals pass unchanged.
pub fn zero_phase_lowpass(signal: &[f64], cutoff_hz: f64, sample_rate: f64) -> Result<Vec<f64>> {
    let nyquist = 0.5 * sample_rate;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidCutoff { cutoff: cutoff_hz, nyquist });
    }
    if signal.len() < 2 {
        return Ok(signal.to_vec());
    }
    let k = (std::f64::consts::PI * cutoff_hz / sample_rate).tan();
    let norm = 1.0 / (1.0 + std::f64::consts::SQRT_2 * k + k * k);
    let b0 = k * k * norm;
    let b1 = 2.0 * b0;
    let b2 = b0;
    let a1 = 2.0 * (k * k - 1.0) * norm;
    let a2 = (1.0 - std::f64::consts::SQRT_2 * k + k * k) * norm;

    let pass = |x: &[f64]| -> Vec<f64> {
        // direct form II transposed with constant-input steady state
        let x0 = x[0];
        let mut z1 = (b1 - a1 + b2 - a2) * x0;
        let mut z2 = (b2 - a2) * x0;
        x.iter()
            .map(|&xi| {
                let y = b0 * xi + z1;
                z1 = b1 * xi - a1 * y + z2;
                z2 = b2 * xi - a2 * y;
                y
            })
            .collect()
    };

    let forward = pass(signal);
    let reversed: Vec<f64> = forward.into_iter().rev().collect();
    let mut out = pass(&reversed);
    out.reverse();
    Ok(out)
}

/// Applies [`zero_phase_lowpass`] to each axis of a vector time series.
pub fn lowpass_vec3(signal: &[Vec3], cutoff_hz: f64, sample_rate: f64) -> Result<Vec<Vec3>> {
    let mut axes = Vec::with_capacity(3);
    for ax in 0..3 {
        let scalar: Vec<f64> = signal.iter().map(|v| v[ax]).collect();
        axes.push(zero_phase_lowpass(&scalar, cutoff_hz, sample_rate)?);
    }
    Ok((0..signal.len())
        .map(|k| Vec3::new(axes[0][k], axes[1][k], axes[2][k]))
        .collect())
}

/// Calibration-log CSV header: `t,module_id,gx,gy,gz,ax,ay,az`.
pub const CALIBRATION_LOG_HEADER: &str = "t,module_id,gx,gy,gz,ax,ay,az";

/// Serializes a dataset as long-format CSV, one row per module per instant.
pub fn write_calibration_csv(dataset: &CalibrationDataset) -> String {
    let mut out = String::from(CALIBRATION_LOG_HEADER);
    out.push('\n');
    for k in 0..dataset.len() {
        let t = k as f64 * dataset.dt;
        for (i, s) in dataset.series.iter().enumerate() {
            let g = s.gyro[k];
            let a = s.accel[k];
            out.push_str(&format!(
                "{t:.9},{i},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}\n",
                g.x, g.y, g.z, a.x, a.y, a.z
            ));
        }
    }
    out
}

/// Parses the long-format calibration CSV back into a dataset.
pub fn read_calibration_csv(text: &str) -> Result<CalibrationDataset> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty calibration log".into()))?;
    if header.trim() != CALIBRATION_LOG_HEADER {
        return Err(Error::Parse(format!("unexpected calibration header: {header}")));
    }
    let mut series: Vec<ImuSeries> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse(format!("bad calibration row: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number: {s}")))
        };
        let t = parse(fields[0])?;
        let id: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad module id: {}", fields[1])))?;
        while series.len() <= id {
            series.push(ImuSeries { gyro: Vec::new(), accel: Vec::new() });
        }
        if id == 0 {
            times.push(t);
        }
        series[id].gyro.push(Vec3::new(parse(fields[2])?, parse(fields[3])?, parse(fields[4])?));
        series[id].accel.push(Vec3::new(parse(fields[5])?, parse(fields[6])?, parse(fields[7])?));
    }
    if series.is_empty() || times.len() < 2 {
        return Err(Error::Parse("calibration log too short".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    Ok(CalibrationDataset { dt, series })
}
