//! IMU-based configuration estimation: recovers total mass, module
//! orientations, moment arms, the inertia tensor, and finally the
//! configuration matrix of an assembled vehicle from synchronized
//! multi-IMU recordings — no geometry of the payload required.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    orthonormalize, skew, DMat, Mat3, RotationMatrix, Vec3, DEFAULT_COND_LIMIT,
};
use crate::imu::{lowpass_vec3, CalibrationDataset};
use crate::vehicle::{config_matrix_from_parts, shift_inertia, ModuleKind, ModuleSpec};

/// Assumed payload mass per propelling module, kg: the payload is sized to
/// the fleet, so its unknown mass is modeled as this share times N.
pub const PAYLOAD_SHARE_PER_MODULE: f64 = 0.050;

/// Tuning knobs for the calibration pipeline.
#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    /// Zero-phase low-pass cutoff applied to all raw channels, Hz
    /// (`None` disables filtering; use for clean synthetic data).
    pub cutoff_hz: Option<f64>,
    /// Payload mass assumed per propelling module, kg.
    pub payload_share: f64,
    /// Condition-number limit for the least-squares solves.
    pub cond_limit: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            cutoff_hz: Some(4.0),
            payload_share: PAYLOAD_SHARE_PER_MODULE,
            cond_limit: DEFAULT_COND_LIMIT,
        }
    }
}

/// Everything the flight controller needs to know about the vehicle, as
/// estimated from IMU data alone.
#[derive(Debug, Clone)]
pub struct ConfigEstimate {
    /// Estimated total mass, kg.
    pub mass: f64,
    /// Module-frame to body-frame rotations, all N+1 modules (index 0 is
    /// the control module and defines the body frame, so it is identity).
    pub orientations: Vec<RotationMatrix>,
    /// IMU positions relative to the geometric center, body frame, m.
    pub arms: Vec<Vec3>,
    /// Estimated inertia tensor about the GC, body frame, kg m^2.
    pub inertia: Mat3,
    /// Estimated thrust-to-wrench matrix, 4 x N.
    pub a_u: DMat,
    /// Estimated configuration matrix, 4 x N.
    pub a: DMat,
}

/// Total-mass estimate: known module masses plus an assumed payload share
/// per propelling module.
pub fn estimate_mass(hardware: &[ModuleSpec], payload_share: f64) -> f64 {
    let n = hardware.iter().filter(|m| m.kind == ModuleKind::Propelling).count();
    hardware.iter().map(|m| m.mass).sum::<f64>() + payload_share * n as f64
}

#[allow(clippy::type_complexity)]
fn filtered_channels(
    data: &CalibrationDataset,
    cutoff_hz: Option<f64>,
) -> Result<(Vec<Vec<Vec3>>, Vec<Vec<Vec3>>)> {
    let rate = 1.0 / data.dt;
    let mut gyro = Vec::with_capacity(data.series.len());
    let mut accel = Vec::with_capacity(data.series.len());
    for s in &data.series {
        match cutoff_hz {
            Some(fc) => {
                gyro.push(lowpass_vec3(&s.gyro, fc, rate)?);
                accel.push(lowpass_vec3(&s.accel, fc, rate)?);
            }
            None => {
                gyro.push(s.gyro.clone());
                accel.push(s.accel.clone());
            }
        }
    }
    Ok((gyro, accel))
}

/// Solves a small symmetric-positive-definite normal-equation system
/// `G x = b` per column, with a condition check reported in terms of the
/// original (unsquared) stacked problem.
fn solve_normal(g: &Mat3, rhs: &Mat3, cond_limit: f64) -> Result<Mat3> {
    let sv = g.svd(false, false).singular_values;
    let condition = (sv.max() / sv.min().max(f64::MIN_POSITIVE)).sqrt();
    if !(condition < cond_limit) {
        return Err(Error::RankDeficient { condition });
    }
    let inv = g.try_inverse().ok_or(Error::RankDeficient { condition })?;
    Ok(inv * rhs)
}

/// Solves `R_i w_i = w_0` over the whole recording for every module: the
/// nine entries of each rotation are found by linear least squares (via
/// accumulated normal equations, so the cost is linear in the recording
/// length) and the result is projected back onto SO(3).
pub fn estimate_orientations(
    gyro: &[Vec<Vec3>],
    cond_limit: f64,
) -> Result<Vec<RotationMatrix>> {
    let t = gyro[0].len();
    if t < 3 {
        return Err(Error::IllConditioned { duration: t as f64 });
    }
    let mut out = vec![RotationMatrix::identity()];
    for series in gyro.iter().skip(1) {
        // minimize sum ||R g - w0||^2: R (sum g g^T) = sum w0 g^T
        let mut m = Mat3::zeros();
        let mut n = Mat3::zeros();
        for (wi, w0) in series.iter().zip(&gyro[0]) {
            m += wi * wi.transpose();
            n += w0 * wi.transpose();
        }
        // R = N M^{-1}, solved transposed: M R^T = N^T
        let raw = solve_normal(&m, &n.transpose(), cond_limit)?.transpose();
        out.push(orthonormalize(&raw)?);
    }
    Ok(out)
}

/// Fleet-averaged body rates, one per sample.
pub fn mean_body_rates(gyro: &[Vec<Vec3>], orientations: &[RotationMatrix]) -> Vec<Vec3> {
    let t = gyro[0].len();
    let n1 = gyro.len() as f64;
    (0..t)
        .map(|k| {
            gyro.iter()
                .zip(orientations)
                .map(|(s, r)| r.rotate(&s[k]))
                .sum::<Vec3>()
                / n1
        })
        .collect()
}

/// Recovers each IMU's position relative to the geometric center by least
/// squares on `(w x w x + wdot x) r = R_i a_i - mean_j(R_j a_j)`; the
/// angular acceleration comes from central differences of the averaged rate.
pub fn estimate_arms(
    gyro: &[Vec<Vec3>],
    accel: &[Vec<Vec3>],
    orientations: &[RotationMatrix],
    dt: f64,
    cond_limit: f64,
) -> Result<Vec<Vec3>> {
    let t = gyro[0].len();
    if t < 3 {
        return Err(Error::IllConditioned { duration: t as f64 * dt });
    }
    let n1 = accel.len() as f64;
    let omega = mean_body_rates(gyro, orientations);

    // body-frame accelerometer readings and their fleet mean, per sample
    let body_accel: Vec<Vec<Vec3>> = accel
        .iter()
        .zip(orientations)
        .map(|(s, r)| s.iter().map(|a| r.rotate(a)).collect())
        .collect();
    let mean_accel: Vec<Vec3> = (0..t)
        .map(|k| body_accel.iter().map(|s| s[k]).sum::<Vec3>() / n1)
        .collect();

    // one shared coefficient block per interior sample; accumulate the
    // normal equations so the solve stays O(1) in the recording length
    let mut w_blocks = Vec::with_capacity(t - 2);
    let mut g = Mat3::zeros();
    for k in 1..t - 1 {
        let wdot = (omega[k + 1] - omega[k - 1]) / (2.0 * dt);
        let w = skew(&omega[k]) * skew(&omega[k]) + skew(&wdot);
        g += w.transpose() * w;
        w_blocks.push(w);
    }

    let mut arms = Vec::with_capacity(body_accel.len());
    for s in &body_accel {
        let mut rhs = Vec3::zeros();
        for (w, k) in w_blocks.iter().zip(1..t - 1) {
            rhs += w.transpose() * (s[k] - mean_accel[k]);
        }
        let rhs_mat = Mat3::from_columns(&[rhs, Vec3::zeros(), Vec3::zeros()]);
        let x = solve_normal(&g, &rhs_mat, cond_limit)?;
        arms.push(x.column(0).into());
    }
    Ok(arms)
}

/// Inertia tensor of an N-sided, infinitesimally thin, uniform-density
/// polygon of mass `mass` about the origin. Vertices may sit slightly out
/// of plane: they are projected onto the plane at their mean height, and
/// ordered by polar angle around their centroid before integration.
pub fn polygon_lamina_inertia(vertices: &[Vec3], mass: f64) -> Result<Mat3> {
    if vertices.len() < 3 {
        return Err(Error::DegeneratePolygon { area: 0.0 });
    }
    let z = vertices.iter().map(|v| v.z).sum::<f64>() / vertices.len() as f64;
    let cx = vertices.iter().map(|v| v.x).sum::<f64>() / vertices.len() as f64;
    let cy = vertices.iter().map(|v| v.y).sum::<f64>() / vertices.len() as f64;
    let mut pts: Vec<(f64, f64)> = vertices.iter().map(|v| (v.x, v.y)).collect();
    pts.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.partial_cmp(&tb).expect("finite angles")
    });

    // shoelace-style polygon moments about the origin
    let mut area2 = 0.0; // twice the signed area
    let mut sx = 0.0; // integral of x dA (x6)
    let mut sy = 0.0;
    let mut sxx = 0.0; // integral of x^2 dA (x12)
    let mut syy = 0.0;
    let mut sxy = 0.0; // integral of xy dA (x24)
    for i in 0..pts.len() {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % pts.len()];
        let c = x0 * y1 - x1 * y0;
        area2 += c;
        sx += (x0 + x1) * c;
        sy += (y0 + y1) * c;
        sxx += (x0 * x0 + x0 * x1 + x1 * x1) * c;
        syy += (y0 * y0 + y0 * y1 + y1 * y1) * c;
        sxy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * c;
    }
    let area = 0.5 * area2;
    if area.abs() < 1e-8 {
        return Err(Error::DegeneratePolygon { area: area.abs() });
    }
    let sigma = mass / area; // signed density cancels the signed moments
    let ixx2d = sigma * syy / 12.0; // mass-weighted integral of y^2
    let iyy2d = sigma * sxx / 12.0;
    let ixy2d = sigma * sxy / 24.0;
    let mx = sigma * sx / 6.0; // mass-weighted integral of x
    let my = sigma * sy / 6.0;

    Ok(Mat3::new(
        ixx2d + mass * z * z,
        -ixy2d,
        -z * mx,
        -ixy2d,
        iyy2d + mass * z * z,
        -z * my,
        -z * mx,
        -z * my,
        ixx2d + iyy2d,
    ))
}

/// Total inertia about the GC: per-module CAD inertias moved with the
/// parallel-axis theorem to their estimated positions, plus the thin-polygon
/// payload model spanned by the propelling modules.
pub fn estimate_inertia(
    arms: &[Vec3],
    orientations: &[RotationMatrix],
    hardware: &[ModuleSpec],
    payload_mass: f64,
) -> Result<Mat3> {
    let mut inertia = Mat3::zeros();
    let mut mounts = Vec::new();
    for ((r, rot), spec) in arms.iter().zip(orientations).zip(hardware) {
        let cm = r + rot.rotate(&spec.cm_offset);
        inertia += shift_inertia(&spec.inertia_local, rot, spec.mass, &cm);
        if spec.kind == ModuleKind::Propelling {
            mounts.push(*r);
        }
    }
    inertia += polygon_lamina_inertia(&mounts, payload_mass)?;
    Ok(inertia)
}

/// Builds the wrench and configuration matrices from estimated arms, known
/// spin directions, the mass estimate, and the inertia estimate.
pub fn estimate_config_matrix(
    mass: f64,
    inertia: &Mat3,
    arms: &[Vec3],
    hardware: &[ModuleSpec],
) -> Result<(DMat, DMat)> {
    let props: Vec<(usize, &ModuleSpec)> = hardware
        .iter()
        .enumerate()
        .filter(|(_, m)| m.kind == ModuleKind::Propelling)
        .collect();
    let mut a_u = DMat::zeros(4, props.len());
    for (j, (i, spec)) in props.iter().enumerate() {
        a_u[(0, j)] = 1.0;
        a_u[(1, j)] = arms[*i].y;
        a_u[(2, j)] = -arms[*i].x;
        a_u[(3, j)] = spec.torque_ratio;
    }
    let a = config_matrix_from_parts(mass, inertia, &a_u)?;
    Ok((a_u, a))
}

/// The full pipeline: mass, orientations, arms, inertia, configuration
/// matrix. `hardware` lists the known per-module hardware (control module
/// first, matching the dataset's module ordering); mount fields are unused.
pub fn calibrate(
    data: &CalibrationDataset,
    hardware: &[ModuleSpec],
    opts: &CalibrationOptions,
) -> Result<ConfigEstimate> {
    if data.series.len() != hardware.len() {
        return Err(Error::InvalidInput(format!(
            "dataset has {} modules, hardware list has {}",
            data.series.len(),
            hardware.len()
        )));
    }
    let (gyro, accel) = filtered_channels(data, opts.cutoff_hz)?;
    let mass = estimate_mass(hardware, opts.payload_share);
    let orientations = estimate_orientations(&gyro, opts.cond_limit)?;
    let arms = estimate_arms(&gyro, &accel, &orientations, data.dt, opts.cond_limit)?;
    let n = hardware.iter().filter(|m| m.kind == ModuleKind::Propelling).count();
    let inertia = estimate_inertia(&arms, &orientations, hardware, opts.payload_share * n as f64)?;
    let (a_u, a) = estimate_config_matrix(mass, &inertia, &arms, hardware)?;
    Ok(ConfigEstimate { mass, orientations, arms, inertia, a_u, a })
}

/// Serializable mirror of [`ConfigEstimate`] for the TOML report file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateReport {
    pub mass: f64,
    /// Row-major 3x3 rotations, one per module.
    pub orientations: Vec<Vec<f64>>,
    pub arms: Vec<[f64; 3]>,
    /// Row-major 3x3 inertia.
    pub inertia: Vec<f64>,
    /// Rows of the 4xN wrench matrix.
    pub a_u: Vec<Vec<f64>>,
    /// Rows of the 4xN configuration matrix.
    pub a: Vec<Vec<f64>>,
}

fn mat_rows(m: &DMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn rows_mat(rows: &[Vec<f64>]) -> Result<DMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows != 4 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("malformed matrix in estimate report".into()));
    }
    Ok(DMat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl EstimateReport {
    pub fn from_estimate(e: &ConfigEstimate) -> Self {
        EstimateReport {
            mass: e.mass,
            orientations: e
                .orientations
                .iter()
                .map(|r| r.matrix().transpose().as_slice().to_vec())
                .collect(),
            arms: e.arms.iter().map(|r| [r.x, r.y, r.z]).collect(),
            inertia: e.inertia.transpose().as_slice().to_vec(),
            a_u: mat_rows(&e.a_u),
            a: mat_rows(&e.a),
        }
    }

    pub fn to_estimate(&self) -> Result<ConfigEstimate> {
        let mat3 = |v: &[f64]| -> Result<Mat3> {
            if v.len() != 9 {
                return Err(Error::Parse("3x3 matrix needs 9 entries".into()));
            }
            Ok(Mat3::from_fn(|i, j| v[3 * i + j]))
        };
        let mut orientations = Vec::with_capacity(self.orientations.len());
        for r in &self.orientations {
            orientations.push(RotationMatrix::from_matrix(mat3(r)?)?);
        }
        Ok(ConfigEstimate {
            mass: self.mass,
            orientations,
            arms: self.arms.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect(),
            inertia: mat3(&self.inertia)?,
            a_u: rows_mat(&self.a_u)?,
            a: rows_mat(&self.a)?,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
