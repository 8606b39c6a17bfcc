//! Time-parameterized setpoint generation: static hover, degree-9
//! polynomial transitions with prescribed endpoint derivatives, and an
//! analytic helix, chained into plans with C3 continuity at the joints.

use crate::controller::Setpoint;
use crate::error::{Error, Result};
use crate::geom::{DMat, DVec, Vec3};

/// One piece of a plan, evaluated on local time `0..=duration`.
#[derive(Debug, Clone)]
pub enum Segment {
    Hover { pos: Vec3, duration: f64 },
    /// Per-axis degree-9 coefficients, constant term first.
    Polynomial { coeffs: [[f64; 10]; 3], duration: f64 },
    Helix { center: Vec3, radius: f64, omega: f64, phase: f64, climb: f64, duration: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Hover { duration, .. }
            | Segment::Polynomial { duration, .. }
            | Segment::Helix { duration, .. } => *duration,
        }
    }

    /// Setpoint at local time `t` (yaw is zero throughout).
    pub fn eval_local(&self, t: f64) -> Setpoint {
        match self {
            Segment::Hover { pos, .. } => Setpoint::hover_at(*pos),
            Segment::Polynomial { coeffs, .. } => {
                let mut d = [[0.0; 4]; 3];
                for ax in 0..3 {
                    d[ax] = eval_poly_derivs(&coeffs[ax], t);
                }
                Setpoint {
                    pos: Vec3::new(d[0][0], d[1][0], d[2][0]),
                    vel: Vec3::new(d[0][1], d[1][1], d[2][1]),
                    acc: Vec3::new(d[0][2], d[1][2], d[2][2]),
                    jerk: Vec3::new(d[0][3], d[1][3], d[2][3]),
                    yaw: 0.0,
                }
            }
            Segment::Helix { center, radius, omega, phase, climb, .. } => {
                let th = phase + omega * t;
                let (sin, cos) = th.sin_cos();
                let (r, w) = (*radius, *omega);
                Setpoint {
                    pos: center + Vec3::new(r * cos, r * sin, climb * t),
                    vel: Vec3::new(-r * w * sin, r * w * cos, *climb),
                    acc: Vec3::new(-r * w * w * cos, -r * w * w * sin, 0.0),
                    jerk: Vec3::new(r * w * w * w * sin, -r * w * w * w * cos, 0.0),
                    yaw: 0.0,
                }
            }
        }
    }

    pub fn start(&self) -> Setpoint {
        self.eval_local(0.0)
    }

    pub fn end(&self) -> Setpoint {
        self.eval_local(self.duration())
    }
}

/// Value, velocity, acceleration, jerk of a degree-9 polynomial at `t`.
fn eval_poly_derivs(c: &[f64; 10], t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (deriv, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in (deriv..10).rev() {
            let mut coef = c[i];
            for k in 0..deriv {
                coef *= (i - k) as f64;
            }
            acc = acc * t + coef;
        }
        *slot = acc;
    }
    out
}

/// Degree-9 polynomial segment matching position, velocity, acceleration,
/// and jerk at both ends, with snap pinned to zero there (ten conditions
/// for ten coefficients).
pub fn polynomial_segment(start: &Setpoint, end: &Setpoint, duration: f64) -> Result<Segment> {
    if duration < 1e-3 {
        return Err(Error::IllConditioned { duration });
    }
    let mut coeffs = [[0.0; 10]; 3];
    for ax in 0..3 {
        let b = DVec::from_column_slice(&[
            start.pos[ax],
            start.vel[ax],
            start.acc[ax],
            start.jerk[ax],
            0.0, // snap at t = 0
            end.pos[ax],
            end.vel[ax],
            end.acc[ax],
            end.jerk[ax],
            0.0, // snap at t = T
        ]);
        let mut m = DMat::zeros(10, 10);
        for deriv in 0..5 {
            // at t = 0 only one coefficient survives each derivative row
            let mut fact = 1.0;
            for k in 1..=deriv {
                fact *= k as f64;
            }
            m[(deriv, deriv)] = fact;
            // at t = T
            for i in deriv..10 {
                let mut coef = 1.0;
                for k in 0..deriv {
                    coef *= (i - k) as f64;
                }
                m[(5 + deriv, i)] = coef * duration.powi((i - deriv) as i32);
            }
        }
        let x = m.lu().solve(&b).ok_or(Error::IllConditioned { duration })?;
        for i in 0..10 {
            coeffs[ax][i] = x[i];
        }
    }
    Ok(Segment::Polynomial { coeffs, duration })
}

/// Analytic helix of given radius and period, starting on the +X side of
/// `center` unless a phase is supplied.
pub fn helix_segment(
    center: Vec3,
    radius: f64,
    period: f64,
    climb: f64,
    phase: f64,
    duration: f64,
) -> Result<Segment> {
    if !(radius > 0.0 && period > 0.0 && duration > 0.0) {
        return Err(Error::InvalidInput("helix needs positive radius, period, duration".into()));
    }
    let omega = 2.0 * std::f64::consts::PI / period;
    Ok(Segment::Helix { center, radius, omega, phase, climb, duration })
}

/// An ordered chain of segments. Joints must match through jerk.
#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    segments: Vec<Segment>,
    /// Cumulative start time of each segment.
    starts: Vec<f64>,
    total: f64,
}

const JOINT_TOL: f64 = 1e-6;

impl TrajectoryPlan {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("plan needs at least one segment".into()));
        }
        for pair in segments.windows(2) {
            let a = pair[0].end();
            let b = pair[1].start();
            let gap = (a.pos - b.pos).norm()
                + (a.vel - b.vel).norm()
                + (a.acc - b.acc).norm()
                + (a.jerk - b.jerk).norm();
            if gap > JOINT_TOL {
                return Err(Error::InvalidInput(format!(
                    "discontinuous joint (mismatch {gap:.2e})"
                )));
            }
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        for s in &segments {
            starts.push(t);
            t += s.duration();
        }
        Ok(TrajectoryPlan { segments, starts, total: t })
    }

    /// Constant hover for `duration`.
    pub fn hover(pos: Vec3, duration: f64) -> Self {
        TrajectoryPlan {
            segments: vec![Segment::Hover { pos, duration }],
            starts: vec![0.0],
            total: duration,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Absolute start time of segment `i`.
    pub fn segment_start(&self, i: usize) -> f64 {
        self.starts[i]
    }

    pub fn eval(&self, t: f64) -> Result<Setpoint> {
        if !(0.0..=self.total + 1e-12).contains(&t) {
            return Err(Error::OutOfRange { t, total: self.total });
        }
        let i = match self.starts.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        Ok(self.segments[i].eval_local(t - self.starts[i]))
    }
}

/// Standard flight mission: polynomial takeoff from rest on the ground to a
/// hover point, a settling hover, a blend onto a helix around that point,
/// the helix itself, and a blend back to hover. All joints are C3.
pub struct MissionConfig {
    pub start_pos: Vec3,
    pub hover_pos: Vec3,
    pub takeoff_duration: f64,
    pub hover_duration: f64,
    pub blend_duration: f64,
    pub helix_radius: f64,
    pub helix_period: f64,
    pub helix_climb: f64,
    pub helix_duration: f64,
    pub final_hover: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            start_pos: Vec3::zeros(),
            hover_pos: Vec3::new(0.0, 0.0, 0.8),
            takeoff_duration: 10.0,
            hover_duration: 10.0,
            blend_duration: 1.0,
            helix_radius: 0.5,
            helix_period: 10.0,
            helix_climb: 0.0,
            helix_duration: 30.0,
            final_hover: 10.0,
        }
    }
}

pub fn mission_plan(cfg: &MissionConfig) -> Result<TrajectoryPlan> {
    let hover_sp = Setpoint::hover_at(cfg.hover_pos);
    let takeoff = polynomial_segment(
        &Setpoint::hover_at(cfg.start_pos),
        &hover_sp,
        cfg.takeoff_duration,
    )?;
    let hover = Segment::Hover { pos: cfg.hover_pos, duration: cfg.hover_duration };
    let helix = helix_segment(
        cfg.hover_pos - Vec3::new(cfg.helix_radius, 0.0, 0.0),
        cfg.helix_radius,
        cfg.helix_period,
        cfg.helix_climb,
        0.0,
        cfg.helix_duration,
    )?;
    let blend_in = polynomial_segment(&hover_sp, &helix.start(), cfg.blend_duration)?;
    let blend_out = polynomial_segment(&helix.end(), &hover_sp, cfg.blend_duration)?;
    let settle = Segment::Hover { pos: cfg.hover_pos, duration: cfg.final_hover };
    TrajectoryPlan::from_segments(vec![takeoff, hover, blend_in, helix, blend_out, settle])
}
