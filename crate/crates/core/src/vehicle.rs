//! Flight-module and payload descriptions, ground-truth vehicle assembly
//! (mass, CM, inertia, configuration matrix), and the six built-in platform
//! presets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geom::{DMat, Mat3, RotationMatrix, Vec3};

/// Relative rank threshold below which the configuration is singular.
pub const RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleKind {
    Control,
    Propelling,
}

/// One flight module: the control module or a propelling module, plus how it
/// is mounted on the payload.
///
/// The module frame is the IMU frame. For propelling modules the rotor axis
/// passes through the IMU (the IMU sits directly below the propeller), so the
/// mount position doubles as the rotor's lateral position. The module CM sits
/// at `cm_offset` from the IMU in the module frame (the battery end of the
/// elongated module body pulls the CM inboard of the rotor).
#[derive(Debug, Clone)]
pub struct ModuleSpec {
    pub kind: ModuleKind,
    /// Module mass, kg.
    pub mass: f64,
    /// Inertia about the module's own CM, module frame, kg m^2.
    pub inertia_local: Mat3,
    /// Module CM relative to the IMU, module frame, m.
    pub cm_offset: Vec3,
    /// Rotor hub relative to the IMU, module frame, m (zero lateral by design).
    pub rotor_offset_from_imu: Vec3,
    /// IMU position in the payload frame, m.
    pub mount_position: Vec3,
    /// Mount rotation about payload +Z, rad.
    pub mount_yaw: f64,
    /// [T_min, T_max] thrust limits, N (propelling modules only).
    pub thrust_range: (f64, f64),
    /// Drag-torque-to-thrust ratio c_i, m, signed by spin direction
    /// (zero for the control module).
    pub torque_ratio: f64,
}

impl ModuleSpec {
    /// Standard propelling-module hardware, unmounted.
    pub fn propelling_hardware() -> Self {
        ModuleSpec {
            kind: ModuleKind::Propelling,
            mass: 0.130,
            inertia_local: Mat3::new(
                5.02e-5, -1.22e-7, 3.17e-5, //
                -1.22e-7, 3.85e-4, 8.15e-8, //
                3.17e-5, 8.15e-8, 3.86e-4,
            ),
            cm_offset: Vec3::new(PROP_CM_OFFSET, 0.0, 0.0),
            rotor_offset_from_imu: Vec3::new(0.0, 0.0, 0.03),
            mount_position: Vec3::zeros(),
            mount_yaw: 0.0,
            thrust_range: (0.0, 6.5),
            torque_ratio: 0.016,
        }
    }

    /// Standard control-module hardware, unmounted.
    pub fn control_hardware() -> Self {
        ModuleSpec {
            kind: ModuleKind::Control,
            mass: 0.250,
            inertia_local: Mat3::new(
                2.76e-4, -3.86e-7, -1.59e-5, //
                -3.86e-7, 2.39e-4, -1.18e-5, //
                -1.59e-5, -1.18e-5, 2.32e-4,
            ),
            cm_offset: Vec3::zeros(),
            rotor_offset_from_imu: Vec3::zeros(),
            mount_position: Vec3::zeros(),
            mount_yaw: 0.0,
            thrust_range: (0.0, 0.0),
            torque_ratio: 0.0,
        }
    }

    /// Module-frame to payload-frame rotation (mount yaw about +Z only, so
    /// all rotor axes stay parallel to payload +Z).
    pub fn mount_rotation(&self) -> RotationMatrix {
        RotationMatrix::rot_z(self.mount_yaw)
    }

    /// Module CM in the payload frame.
    pub fn cm_in_payload(&self) -> Vec3 {
        self.mount_position + self.mount_rotation().rotate(&self.cm_offset)
    }

    /// Rotor hub in the payload frame.
    pub fn rotor_in_payload(&self) -> Vec3 {
        self.mount_position + self.mount_rotation().rotate(&self.rotor_offset_from_imu)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidInput("module mass must be positive".into()));
        }
        if !is_spd(&self.inertia_local, 0.0) {
            return Err(Error::InvalidInput(
                "module inertia must be symmetric positive definite".into(),
            ));
        }
        if self.kind == ModuleKind::Propelling {
            let (lo, hi) = self.thrust_range;
            if !(hi > lo && lo >= 0.0) {
                return Err(Error::InvalidInput("need T_max > T_min >= 0".into()));
            }
            if self.torque_ratio == 0.0 {
                return Err(Error::InvalidInput("propelling module needs |c_i| > 0".into()));
            }
        }
        Ok(())
    }
}

/// The rigid object being flown.
#[derive(Debug, Clone)]
pub struct PayloadSpec {
    /// Payload mass, kg.
    pub mass: f64,
    /// Inertia about the payload's own CM, payload frame, kg m^2.
    pub inertia: Mat3,
    /// Payload CM in the payload frame, m.
    pub cm_position: Vec3,
}

impl PayloadSpec {
    /// Uniform thin disc in the payload XY plane, centered at `cm`.
    pub fn disc(mass: f64, radius: f64, cm: Vec3) -> Self {
        let planar = 0.25 * mass * radius * radius;
        PayloadSpec {
            mass,
            inertia: Mat3::from_diagonal(&Vec3::new(planar, planar, 2.0 * planar)),
            cm_position: cm,
        }
    }

    /// Uniform box with side lengths (a, b, c), centered at `cm`.
    pub fn cuboid(mass: f64, a: f64, b: f64, c: f64, cm: Vec3) -> Self {
        let k = mass / 12.0;
        PayloadSpec {
            mass,
            inertia: Mat3::from_diagonal(&Vec3::new(
                k * (b * b + c * c),
                k * (a * a + c * c),
                k * (a * a + b * b),
            )),
            cm_position: cm,
        }
    }
}

/// Assembled ground-truth physics of one vehicle.
///
/// Everything is expressed in the body frame, which is the control-module IMU
/// frame with its origin moved to the vehicle CM. Index 0 of the per-IMU
/// vectors is the control module; indices 1..=N are the propelling modules in
/// mounting order.
#[derive(Debug, Clone)]
pub struct VehicleTruth {
    /// Number of propelling modules.
    pub n: usize,
    /// Total mass, kg.
    pub total_mass: f64,
    /// CM in the payload frame (diagnostic; body-frame quantities already
    /// account for it).
    pub cm: Vec3,
    /// Inertia about the CM, body frame, kg m^2.
    pub inertia: Mat3,
    /// Rotor positions relative to the CM, body frame, one per propelling
    /// module.
    pub arms: Vec<Vec3>,
    /// IMU positions relative to the CM, body frame, all N+1 modules.
    pub imu_positions: Vec<Vec3>,
    /// Module-frame to body-frame rotations, all N+1 modules
    /// (index 0 is the identity by construction).
    pub module_orientations: Vec<RotationMatrix>,
    /// Torque ratios c_i of the propelling modules, m.
    pub torque_ratios: Vec<f64>,
    /// Thrust limits of the propelling modules, N.
    pub thrust_ranges: Vec<(f64, f64)>,
    /// Thrust-to-wrench matrix, 4 x N.
    pub a_u: DMat,
    /// Configuration matrix A = blockdiag(m, I)^{-1} A_u, 4 x N.
    pub a: DMat,
}

impl VehicleTruth {
    /// Geometric center of all N+1 IMUs relative to the CM, body frame.
    pub fn gc(&self) -> Vec3 {
        self.imu_positions.iter().sum::<Vec3>() / (self.n + 1) as f64
    }

    /// IMU positions relative to the GC, body frame (what the calibration
    /// pipeline estimates).
    pub fn imu_positions_from_gc(&self) -> Vec<Vec3> {
        let gc = self.gc();
        self.imu_positions.iter().map(|p| p - gc).collect()
    }
}

fn is_spd(m: &Mat3, min_eig: f64) -> bool {
    if (m - m.transpose()).norm() > 1e-9 * (1.0 + m.norm()) {
        return false;
    }
    m.symmetric_eigenvalues().iter().all(|&e| e > min_eig)
}

/// Inertia of a point/rigid component about the vehicle CM:
/// rotated local tensor plus the parallel-axis shift for offset `d`.
pub fn shift_inertia(local: &Mat3, rot: &RotationMatrix, mass: f64, d: &Vec3) -> Mat3 {
    let rotated = rot.matrix() * local * rot.matrix().transpose();
    rotated + mass * (d.norm_squared() * Mat3::identity() - d * d.transpose())
}

/// Assembles the ground-truth vehicle from a payload and its mounted flight
/// modules.
///
/// Requires exactly one control module and N >= 4 propelling modules. The
/// body frame is aligned with the control-module IMU frame.
pub fn assemble_vehicle(payload: &PayloadSpec, modules: &[ModuleSpec]) -> Result<VehicleTruth> {
    if payload.mass < 0.0 || !is_spd(&payload.inertia, -1e-12) {
        return Err(Error::InvalidInput(
            "payload needs mass >= 0 and symmetric PSD inertia".into(),
        ));
    }
    let controls: Vec<&ModuleSpec> =
        modules.iter().filter(|m| m.kind == ModuleKind::Control).collect();
    let props: Vec<&ModuleSpec> =
        modules.iter().filter(|m| m.kind == ModuleKind::Propelling).collect();
    if controls.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "need exactly one control module, got {}",
            controls.len()
        )));
    }
    if props.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 propelling modules, got {}",
            props.len()
        )));
    }
    for m in modules {
        m.validate()?;
    }
    let control = controls[0];
    let n = props.len();

    // Total mass and CM in the payload frame.
    let module_mass: f64 = modules.iter().map(|m| m.mass).sum();
    let total_mass = module_mass + payload.mass;
    let cm = (modules.iter().map(|m| m.mass * m.cm_in_payload()).sum::<Vec3>()
        + payload.mass * payload.cm_position)
        / total_mass;

    // Body frame = control-module IMU frame; rotate payload-frame quantities.
    let body_from_payload = control.mount_rotation().transpose();
    let to_body = |v: &Vec3| body_from_payload.rotate(v);

    let mut inertia = shift_inertia(
        &payload.inertia,
        &RotationMatrix::identity(),
        payload.mass,
        &(payload.cm_position - cm),
    );
    for m in modules {
        inertia += shift_inertia(
            &m.inertia_local,
            &m.mount_rotation(),
            m.mass,
            &(m.cm_in_payload() - cm),
        );
    }
    // Rotate the CM-referenced tensor into the body frame.
    let rb = body_from_payload.matrix();
    inertia = rb * inertia * rb.transpose();

    let mut imu_positions = Vec::with_capacity(n + 1);
    let mut module_orientations = Vec::with_capacity(n + 1);
    imu_positions.push(to_body(&(control.mount_position - cm)));
    module_orientations.push(body_from_payload * control.mount_rotation());
    for m in &props {
        imu_positions.push(to_body(&(m.mount_position - cm)));
        module_orientations.push(body_from_payload * m.mount_rotation());
    }

    let arms: Vec<Vec3> = props.iter().map(|m| to_body(&(m.rotor_in_payload() - cm))).collect();
    let torque_ratios: Vec<f64> = props.iter().map(|m| m.torque_ratio).collect();
    let thrust_ranges: Vec<(f64, f64)> = props.iter().map(|m| m.thrust_range).collect();

    let a_u = build_a_u(&arms, &torque_ratios);
    let a = config_matrix_from_parts(total_mass, &inertia, &a_u)?;

    Ok(VehicleTruth {
        n,
        total_mass,
        cm,
        inertia,
        arms,
        imu_positions,
        module_orientations,
        torque_ratios,
        thrust_ranges,
        a_u,
        a,
    })
}

/// Thrust-to-wrench matrix with rows (ones; r_y; -r_x; c_i).
pub fn build_a_u(arms: &[Vec3], torque_ratios: &[f64]) -> DMat {
    let n = arms.len();
    let mut a_u = DMatrix::zeros(4, n);
    for (j, (r, c)) in arms.iter().zip(torque_ratios).enumerate() {
        a_u[(0, j)] = 1.0;
        a_u[(1, j)] = r.y;
        a_u[(2, j)] = -r.x;
        a_u[(3, j)] = *c;
    }
    a_u
}

/// A = blockdiag(m, I)^{-1} A_u, with a numeric rank-4 check.
pub fn config_matrix_from_parts(mass: f64, inertia: &Mat3, a_u: &DMat) -> Result<DMat> {
    let inertia_inv = inertia.try_inverse().ok_or(Error::SingularConfiguration)?;
    let mut a = a_u.clone();
    for j in 0..a.ncols() {
        a[(0, j)] /= mass;
        let tau = Vec3::new(a_u[(1, j)], a_u[(2, j)], a_u[(3, j)]);
        let w = inertia_inv * tau;
        a[(1, j)] = w.x;
        a[(2, j)] = w.y;
        a[(3, j)] = w.z;
    }
    let sv = a.clone().svd(false, false).singular_values;
    if sv.min() < RANK_TOL * sv.max() {
        return Err(Error::SingularConfiguration);
    }
    Ok(a)
}

/// Returns the configuration matrix of `truth`, re-deriving it from
/// `(m, I, A_u)` as a consistency check.
pub fn config_matrix(truth: &VehicleTruth) -> DMat {
    let recomputed = config_matrix_from_parts(truth.total_mass, &truth.inertia, &truth.a_u)
        .expect("assembled vehicle is full rank");
    debug_assert!((&recomputed - &truth.a).norm() <= 1e-12 * truth.a.norm().max(1.0));
    recomputed
}

/// CM offset of the standard propelling module: the battery end pulls the CM
/// inboard of the rotor along the module +X axis.
const PROP_CM_OFFSET: f64 = 0.055;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Platform {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Platform {
    pub const ALL: [Platform; 6] = [
        Platform::A,
        Platform::B,
        Platform::C,
        Platform::D,
        Platform::E,
        Platform::F,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Platform::A => "A",
            Platform::B => "B",
            Platform::C => "C",
            Platform::D => "D",
            Platform::E => "E",
            Platform::F => "F",
        }
    }
}

impl std::str::FromStr for Platform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Platform::A),
            "B" => Ok(Platform::B),
            "C" => Ok(Platform::C),
            "D" => Ok(Platform::D),
            "E" => Ok(Platform::E),
            "F" => Ok(Platform::F),
            other => Err(Error::InvalidInput(format!("unknown platform preset {other:?}"))),
        }
    }
}

/// Places one standard propelling module with its rotor at `rotor` (payload
/// frame) and the module long axis pointing back toward `(0, 0)`.
fn radial_module(rotor: Vec3, spin_ccw: bool) -> ModuleSpec {
    let mut m = ModuleSpec::propelling_hardware();
    let theta = rotor.y.atan2(rotor.x);
    m.mount_yaw = theta + std::f64::consts::PI;
    m.mount_position = rotor;
    m.torque_ratio = if spin_ccw { 0.016 } else { -0.016 };
    m
}

fn ring(radius: f64, angles_deg: &[f64], z: &[f64], spins: &[bool]) -> Vec<ModuleSpec> {
    angles_deg
        .iter()
        .zip(z)
        .zip(spins)
        .map(|((&a, &zi), &s)| {
            let t = a.to_radians();
            radial_module(Vec3::new(radius * t.cos(), radius * t.sin(), zi), s)
        })
        .collect()
}

fn placed(positions: &[(f64, f64, f64)], spins: &[bool]) -> Vec<ModuleSpec> {
    positions
        .iter()
        .zip(spins)
        .map(|(&(x, y, z), &s)| radial_module(Vec3::new(x, y, z), s))
        .collect()
}

/// Built-in module/payload layouts for the six reference platforms.
///
/// A, B, C are symmetric rings of 4, 6, 8 propelling modules; D is an
/// asymmetric quad; E and F are asymmetric with modules mounted at two
/// different heights. Arm lengths and payload discs are reconstructions
/// fitted to the published per-platform mass and configuration-matrix data;
/// exact mount coordinates were never published.
pub fn preset(platform: Platform) -> (PayloadSpec, Vec<ModuleSpec>) {
    let mut modules = vec![ModuleSpec::control_hardware()];
    let payload = match platform {
        Platform::A => {
            modules.extend(ring(
                0.190,
                &[0.0, -90.0, 180.0, 90.0],
                &[0.0; 4],
                &[true, false, true, false],
            ));
            PayloadSpec::disc(0.2075, 0.150, Vec3::zeros())
        }
        Platform::B => {
            modules.extend(ring(
                0.1932,
                &[180.0, 120.0, 60.0, 0.0, -60.0, -120.0],
                &[0.0; 6],
                &[true, false, true, false, true, false],
            ));
            PayloadSpec::disc(0.2353, 0.158, Vec3::zeros())
        }
        Platform::C => {
            modules.extend(ring(
                0.2337,
                &[90.0, 45.0, 0.0, -45.0, -90.0, -135.0, 180.0, 135.0],
                &[0.0; 8],
                &[true, false, true, false, true, false, true, false],
            ));
            PayloadSpec::disc(0.3613, 0.164, Vec3::zeros())
        }
        Platform::D => {
            modules.extend(placed(
                &[
                    (-0.082, -0.171, 0.0),
                    (-0.134, 0.169, 0.0),
                    (0.063, 0.136, 0.0),
                    (0.188, -0.052, 0.0),
                ],
                &[true, false, true, false],
            ));
            PayloadSpec::disc(0.2280, 0.140, Vec3::zeros())
        }
        Platform::E => {
            modules.extend(placed(
                &[
                    (-0.160, 0.002, 0.02),
                    (-0.077, 0.135, -0.02),
                    (0.076, 0.147, 0.02),
                    (0.163, 0.001, -0.02),
                    (0.078, -0.137, 0.02),
                    (-0.079, -0.148, -0.02),
                ],
                &[true, false, true, false, true, false],
            ));
            PayloadSpec::disc(0.3168, 0.150, Vec3::zeros())
        }
        Platform::F => {
            modules.extend(placed(
                &[
                    (-0.091, 0.179, 0.02),
                    (0.077, 0.177, -0.02),
                    (0.295, 0.064, 0.02),
                    (0.276, -0.140, -0.02),
                    (0.075, -0.160, 0.02),
                    (-0.094, -0.161, -0.02),
                    (-0.268, -0.139, 0.02),
                    (-0.293, 0.068, -0.02),
                ],
                &[true, false, true, false, true, false, true, false],
            ));
            PayloadSpec::cuboid(0.7912, 0.50, 0.20, 0.11, Vec3::zeros())
        }
    };
    (payload, modules)
}

/// Vehicle description file: payload properties plus the mount placement of
/// every module, assuming standard module hardware. Serialization is
/// deterministic, so serialize -> parse -> serialize is byte-identical.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VehicleFile {
    pub payload: PayloadSection,
    #[serde(rename = "module")]
    pub modules: Vec<ModuleSection>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PayloadSection {
    /// Payload mass, kg.
    pub mass: f64,
    /// Inertia about the payload CM, row-major, kg m^2.
    pub inertia: [f64; 9],
    /// Payload CM in the payload frame, m.
    pub cm: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModuleSection {
    /// "control" or "propelling".
    pub kind: String,
    /// IMU position in the payload frame, m.
    pub mount: [f64; 3],
    /// Mount rotation about payload +Z, rad.
    pub yaw: f64,
    /// Spin direction, "ccw" or "cw" (propelling modules only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spin: Option<String>,
    /// [T_min, T_max] override, N (propelling modules only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub thrust_range: Option<[f64; 2]>,
}

impl VehicleFile {
    pub fn from_parts(payload: &PayloadSpec, modules: &[ModuleSpec]) -> Self {
        let standard = ModuleSpec::propelling_hardware();
        VehicleFile {
            payload: PayloadSection {
                mass: payload.mass,
                inertia: payload.inertia.transpose().as_slice().try_into().unwrap(),
                cm: payload.cm_position.as_slice().try_into().unwrap(),
            },
            modules: modules
                .iter()
                .map(|m| ModuleSection {
                    kind: match m.kind {
                        ModuleKind::Control => "control".into(),
                        ModuleKind::Propelling => "propelling".into(),
                    },
                    mount: m.mount_position.as_slice().try_into().unwrap(),
                    yaw: m.mount_yaw,
                    spin: (m.kind == ModuleKind::Propelling)
                        .then(|| if m.torque_ratio >= 0.0 { "ccw".into() } else { "cw".into() }),
                    thrust_range: (m.kind == ModuleKind::Propelling
                        && m.thrust_range != standard.thrust_range)
                        .then_some([m.thrust_range.0, m.thrust_range.1]),
                })
                .collect(),
        }
    }

    /// Reconstitutes the payload and module specs, assuming standard hardware.
    pub fn to_parts(&self) -> Result<(PayloadSpec, Vec<ModuleSpec>)> {
        let payload = PayloadSpec {
            mass: self.payload.mass,
            inertia: Mat3::from_row_slice(&self.payload.inertia),
            cm_position: Vec3::from_row_slice(&self.payload.cm),
        };
        let mut modules = Vec::with_capacity(self.modules.len());
        for m in &self.modules {
            let mut spec = match m.kind.as_str() {
                "control" => ModuleSpec::control_hardware(),
                "propelling" => ModuleSpec::propelling_hardware(),
                other => {
                    return Err(Error::Parse(format!("unknown module kind {other:?}")));
                }
            };
            spec.mount_position = Vec3::from_row_slice(&m.mount);
            spec.mount_yaw = m.yaw;
            if spec.kind == ModuleKind::Propelling {
                match m.spin.as_deref() {
                    Some("ccw") => {}
                    Some("cw") => spec.torque_ratio = -spec.torque_ratio,
                    Some(other) => {
                        return Err(Error::Parse(format!("unknown spin {other:?}")));
                    }
                    None => {
                        return Err(Error::Parse("propelling module needs a spin".into()));
                    }
                }
                if let Some([lo, hi]) = m.thrust_range {
                    spec.thrust_range = (lo, hi);
                }
            }
            modules.push(spec);
        }
        Ok((payload, modules))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Hardware list for a preset in recording order (control module first),
/// with the mount placement cleared: this is exactly what the estimator is
/// allowed to know about the vehicle.
pub fn preset_hardware(platform: Platform) -> Vec<ModuleSpec> {
    let (_, modules) = preset(platform);
    hardware_list(&modules)
}

/// Same as [`preset_hardware`] for an arbitrary module list.
pub fn hardware_list(modules: &[ModuleSpec]) -> Vec<ModuleSpec> {
    let mut out: Vec<ModuleSpec> =
        modules.iter().filter(|m| m.kind == ModuleKind::Control).cloned().collect();
    out.extend(modules.iter().filter(|m| m.kind == ModuleKind::Propelling).cloned());
    for m in &mut out {
        m.mount_position = Vec3::zeros();
        m.mount_yaw = 0.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean_abs(row: nalgebra::RowDVector<f64>) -> f64 {
        row.iter().map(|x| x.abs()).sum::<f64>() / row.len() as f64
    }

    #[test]
    fn preset_masses_match_published_totals() {
        let expected = [
            (Platform::A, 0.9775),
            (Platform::B, 1.2653),
            (Platform::C, 1.6513),
            (Platform::D, 0.9980),
            (Platform::E, 1.3468),
            (Platform::F, 2.0812),
        ];
        for (p, m) in expected {
            let (payload, modules) = preset(p);
            let truth = assemble_vehicle(&payload, &modules).unwrap();
            assert_relative_eq!(truth.total_mass, m, epsilon = 1e-9);
        }
    }

    #[test]
    fn preset_module_counts() {
        for (p, n) in [
            (Platform::A, 4),
            (Platform::B, 6),
            (Platform::C, 8),
            (Platform::D, 4),
            (Platform::E, 6),
            (Platform::F, 8),
        ] {
            let (payload, modules) = preset(p);
            let truth = assemble_vehicle(&payload, &modules).unwrap();
            assert_eq!(truth.n, n);
        }
    }

    #[test]
    fn preset_f_payload_mass() {
        let (payload, _) = preset(Platform::F);
        assert_relative_eq!(payload.mass, 0.791, epsilon = 1e-3);
    }

    #[test]
    fn platform_a_matches_published_configuration_matrix() {
        // Published reference values, per row: 1/m = 1.02; roll/pitch arm
        // entries of mean magnitude 26.3; yaw entries of mean magnitude 1.18.
        let (payload, modules) = preset(Platform::A);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let a = config_matrix(&truth);
        for j in 0..4 {
            assert_relative_eq!(a[(0, j)], 1.0 / 0.9775, epsilon = 1e-9);
        }
        // rows 2 and 3 each have two dominant entries; pool their magnitudes
        let mut arm_entries: Vec<f64> = Vec::new();
        for i in 1..3 {
            for j in 0..4 {
                let v: f64 = a[(i, j)];
                if v.abs() > 1.0 {
                    arm_entries.push(v.abs());
                }
            }
        }
        assert_eq!(arm_entries.len(), 4);
        let arm_mean = arm_entries.iter().sum::<f64>() / 4.0;
        assert!((arm_mean - 26.3).abs() / 26.3 < 0.05, "arm rows mean {arm_mean}");
        let yaw_mean = mean_abs(a.row(3).into_owned());
        assert!((yaw_mean - 1.1825).abs() / 1.1825 < 0.05, "yaw row mean {yaw_mean}");
        // spin-direction signs alternate as published
        let signs: Vec<f64> = (0..4).map(|j| a[(3, j)].signum()).collect();
        assert_eq!(signs, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn platform_b_and_c_match_published_scale() {
        let (payload, modules) = preset(Platform::B);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let a = truth.a.clone();
        // dominant pitch entries (+-d arms along X): published 18.4
        assert!((a[(2, 0)].abs() - 18.4).abs() / 18.4 < 0.05, "B pitch {}", a[(2, 0)]);
        let yaw_mean = mean_abs(a.row(3).into_owned());
        assert!((yaw_mean - 0.81).abs() / 0.81 < 0.05, "B yaw mean {yaw_mean}");

        let (payload, modules) = preset(Platform::C);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let a = truth.a;
        assert!((a[(1, 0)].abs() - 11.1).abs() / 11.1 < 0.05, "C roll {}", a[(1, 0)]);
        let yaw_mean = mean_abs(a.row(3).into_owned());
        assert!((yaw_mean - 0.40).abs() / 0.40 < 0.05, "C yaw mean {yaw_mean}");
    }

    #[test]
    fn symmetric_point_masses_put_cm_at_origin() {
        let (_, modules) = preset(Platform::A);
        let payload = PayloadSpec::disc(0.0, 0.1, Vec3::zeros());
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        assert!(truth.cm.norm() < 1e-12, "cm = {:?}", truth.cm);
    }

    #[test]
    fn all_same_spin_is_singular() {
        let (payload, mut modules) = preset(Platform::A);
        for m in modules.iter_mut().filter(|m| m.kind == ModuleKind::Propelling) {
            m.torque_ratio = 0.016;
        }
        assert!(matches!(
            assemble_vehicle(&payload, &modules),
            Err(Error::SingularConfiguration)
        ));
    }

    #[test]
    fn parallel_axis_two_point_masses() {
        // two point-like modules at +-d on X: I_yy = I_zz = 2 m d^2 plus the
        // (negligible) local tensors
        let d = 0.3;
        let tiny = Mat3::identity() * 1e-12;
        let mk = |x: f64, c: f64| ModuleSpec {
            kind: ModuleKind::Propelling,
            mass: 0.5,
            inertia_local: tiny,
            cm_offset: Vec3::zeros(),
            rotor_offset_from_imu: Vec3::zeros(),
            mount_position: Vec3::new(x, 0.0, 0.0),
            mount_yaw: 0.0,
            thrust_range: (0.0, 5.0),
            torque_ratio: c,
        };
        let mut modules = vec![ModuleSpec::control_hardware()];
        // control module is massless-ish here so the analytic answer is clean
        modules[0].mass = 1e-9;
        modules[0].inertia_local = tiny;
        // opposite rotors share a spin direction, as on a conventional quad
        modules.push(mk(d, 0.016));
        modules.push(mk(-d, 0.016));
        let mut m3 = mk(0.0, -0.016);
        m3.mount_position = Vec3::new(0.0, d, 0.0);
        let mut m4 = mk(0.0, -0.016);
        m4.mount_position = Vec3::new(0.0, -d, 0.0);
        modules.push(m3);
        modules.push(m4);
        let payload = PayloadSpec::disc(0.0, 0.1, Vec3::zeros());
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        // modules on the X axis contribute m d^2 each to I_yy
        let expected = 2.0 * 0.5 * d * d;
        assert_relative_eq!(truth.inertia[(1, 1)], expected, epsilon = 1e-6);
    }

    #[test]
    fn translation_invariance_of_assembled_physics() {
        let (payload, modules) = preset(Platform::D);
        let offset = Vec3::new(0.37, -0.21, 0.05);
        let mut shifted_payload = payload.clone();
        shifted_payload.cm_position += offset;
        let shifted: Vec<ModuleSpec> = modules
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.mount_position += offset;
                m
            })
            .collect();
        let t0 = assemble_vehicle(&payload, &modules).unwrap();
        let t1 = assemble_vehicle(&shifted_payload, &shifted).unwrap();
        assert_relative_eq!(t1.inertia, t0.inertia, epsilon = 1e-12);
        assert!((&t1.a - &t0.a).norm() < 1e-9 * t0.a.norm());
        for (a, b) in t0.arms.iter().zip(&t1.arms) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn a_u_rows_are_exactly_arm_components() {
        let (payload, modules) = preset(Platform::E);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        for (j, r) in truth.arms.iter().enumerate() {
            assert_eq!(truth.a_u[(1, j)], r.y);
            assert_eq!(truth.a_u[(2, j)], -r.x);
        }
    }

    #[test]
    fn config_matrix_linearity_in_mass() {
        let (payload, modules) = preset(Platform::A);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let doubled =
            config_matrix_from_parts(2.0 * truth.total_mass, &truth.inertia, &truth.a_u).unwrap();
        for j in 0..truth.n {
            assert_relative_eq!(doubled[(0, j)], truth.a[(0, j)] / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn config_matrix_matches_elementwise_construction() {
        let (payload, modules) = preset(Platform::B);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let inertia_inv = truth.inertia.try_inverse().unwrap();
        for j in 0..truth.n {
            assert_relative_eq!(truth.a[(0, j)], 1.0 / truth.total_mass, epsilon = 1e-15);
            let tau =
                Vec3::new(truth.arms[j].y, -truth.arms[j].x, truth.torque_ratios[j]);
            let w = inertia_inv * tau;
            assert_relative_eq!(truth.a[(1, j)], w.x, epsilon = 1e-13);
            assert_relative_eq!(truth.a[(2, j)], w.y, epsilon = 1e-13);
            assert_relative_eq!(truth.a[(3, j)], w.z, epsilon = 1e-13);
        }
    }

    #[test]
    fn vehicle_file_round_trip_is_byte_identical() {
        for p in Platform::ALL {
            let (payload, modules) = preset(p);
            let text = VehicleFile::from_parts(&payload, &modules).to_toml().unwrap();
            let again = VehicleFile::from_toml(&text).unwrap().to_toml().unwrap();
            assert_eq!(text, again, "platform {}", p.name());
        }
    }

    #[test]
    fn vehicle_file_reconstitutes_the_same_vehicle() {
        let (payload, modules) = preset(Platform::E);
        let truth = assemble_vehicle(&payload, &modules).unwrap();
        let text = VehicleFile::from_parts(&payload, &modules).to_toml().unwrap();
        let (payload2, modules2) = VehicleFile::from_toml(&text).unwrap().to_parts().unwrap();
        let truth2 = assemble_vehicle(&payload2, &modules2).unwrap();
        assert_relative_eq!(truth.total_mass, truth2.total_mass, epsilon = 1e-15);
        assert_relative_eq!((truth.a.clone() - truth2.a.clone()).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((truth.inertia - truth2.inertia).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn vehicle_file_rejects_unknown_kind_and_missing_spin() {
        let bad = "[payload]\nmass = 1.0\ninertia = [1,0,0, 0,1,0, 0,0,1]\ncm = [0,0,0]\n\n[[module]]\nkind = \"thruster\"\nmount = [0,0,0]\nyaw = 0.0\n";
        assert!(VehicleFile::from_toml(bad).unwrap().to_parts().is_err());
        let no_spin = "[payload]\nmass = 1.0\ninertia = [1,0,0, 0,1,0, 0,0,1]\ncm = [0,0,0]\n\n[[module]]\nkind = \"propelling\"\nmount = [0.2,0,0]\nyaw = 0.0\n";
        assert!(VehicleFile::from_toml(no_spin).unwrap().to_parts().is_err());
    }

    #[test]
    fn all_presets_assemble_full_rank() {
        for p in Platform::ALL {
            let (payload, modules) = preset(p);
            let truth = assemble_vehicle(&payload, &modules).unwrap();
            let sv = truth.a.clone().svd(false, false).singular_values;
            assert!(sv.min() > RANK_TOL * sv.max(), "platform {} rank deficient", p.name());
        }
    }
}
