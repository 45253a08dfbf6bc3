//! Residual and conservation checking: decides whether a curve, analytic or
//! sampled, satisfies its governing magnetic system.
//!
//! Residuals are measured in the Euclidean norm of the frame components of
//! ∇_t t − V ∧ t rather than the indefinite metric norm, so a discrepancy
//! that happens to be metric-null still registers.

use serde::{Deserialize, Serialize};

use crate::closedform::FamilySpec;
use crate::dynamics::{covariant_acceleration, first_integral, speed, CurveState, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{KillingId, ModelParams};
use crate::numeric::{fd4_first, fd4_second};
use crate::scalar::Real;

/// Default grid size for family checks.
pub const DEFAULT_GRID: usize = 1001;
/// Default tolerance when derivatives are analytic.
pub const DEFAULT_TOL_ANALYTIC: f64 = 1e-8;
/// Default tolerance when derivatives come from finite differences.
pub const DEFAULT_TOL_FINITE_DIFF: f64 = 1e-6;

/// Outcome of a residual/conservation check.
///
/// `pass` holds exactly when all three maxima are within `tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<T> {
    pub max_ode_residual: T,
    pub max_speed_drift: T,
    pub max_first_integral_drift: T,
    pub tol: T,
    pub pass: bool,
    pub per_sample: Vec<(T, T)>,
}

impl<T: Real> ResidualReport<T> {
    fn from_parts(residuals: Vec<(T, T)>, speeds: &[T], integrals: &[T], tol: T) -> Self {
        let max_ode_residual = residuals
            .iter()
            .map(|&(_, r)| r)
            .fold(T::zero(), |a, b| a.max(b));
        let drift = |vals: &[T]| -> T {
            let v0 = vals[0];
            vals.iter()
                .map(|&v| (v - v0).abs())
                .fold(T::zero(), |a, b| a.max(b))
        };
        let max_speed_drift = drift(speeds);
        let max_first_integral_drift = drift(integrals);
        let pass =
            max_ode_residual <= tol && max_speed_drift <= tol && max_first_integral_drift <= tol;
        Self {
            max_ode_residual,
            max_speed_drift,
            max_first_integral_drift,
            tol,
            pass,
            per_sample: residuals,
        }
    }
}

/// A curve with analytic position, velocity and acceleration; implemented by
/// the closed-form families.
pub trait AnalyticCurve<T> {
    fn state(&self, t: T) -> Result<CurveState<T>>;
    fn accel(&self, t: T) -> Result<[T; 3]>;
}

impl<T: Real> AnalyticCurve<T> for FamilySpec<T> {
    fn state(&self, t: T) -> Result<CurveState<T>> {
        self.eval(t)
    }

    fn accel(&self, t: T) -> Result<[T; 3]> {
        self.acceleration(t)
    }
}

/// Euclidean frame-norm of ∇_t t − V ∧ t at one state with known coordinate
/// second derivatives.
pub fn residual_at<T: Real>(
    p: &ModelParams<T>,
    k: KillingId,
    s: &CurveState<T>,
    acc: &[T; 3],
) -> T {
    let lhs = covariant_acceleration(p, s, acc);
    let rhs = p
        .killing_field(k, &s.pos)
        .cross(&p.frame_components(&s.pos, &s.vel));
    (lhs - rhs).norm()
}

/// Residual of an analytic curve at parameter `t`.
pub fn ode_residual<T: Real>(
    p: &ModelParams<T>,
    k: KillingId,
    curve: &dyn AnalyticCurve<T>,
    t: T,
) -> Result<T> {
    let s = curve.state(t)?;
    let acc = curve.accel(t)?;
    Ok(residual_at(p, k, &s, &acc))
}

/// Residual of a uniformly sampled trajectory at sample index `i`, with the
/// accelerations reconstructed by 4th-order central differences of the
/// sampled velocities. Needs two samples on each side.
pub fn ode_residual_fd<T: Real>(
    p: &ModelParams<T>,
    k: KillingId,
    traj: &Trajectory<T>,
    i: usize,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::GridTooCoarse { need: 5, got: n });
    }
    if i < 2 || i + 2 >= n {
        return Err(Error::GridTooCoarse { need: 5, got: 0 });
    }
    let h = uniform_spacing(traj)?;
    let s = &traj.samples[i];
    let v = |j: usize| {
        let w = &traj.samples[j].vel;
        [w.dx, w.dy, w.dz]
    };
    let (m2, m1, p1, p2) = (v(i - 2), v(i - 1), v(i + 1), v(i + 2));
    let acc = [
        fd4_first(m2[0], m1[0], p1[0], p2[0], h),
        fd4_first(m2[1], m1[1], p1[1], p2[1], h),
        fd4_first(m2[2], m1[2], p1[2], p2[2], h),
    ];
    Ok(residual_at(p, k, s, &acc))
}

/// Residual by 4th-order differences of the sampled positions alone; used
/// when velocities are not trusted. Exposed mainly for convergence studies.
pub fn position_residual_fd<T: Real>(
    p: &ModelParams<T>,
    k: KillingId,
    traj: &Trajectory<T>,
    i: usize,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 5 || i < 2 || i + 2 >= n {
        return Err(Error::GridTooCoarse { need: 5, got: n });
    }
    let h = uniform_spacing(traj)?;
    let q = |j: usize| {
        let w = &traj.samples[j].pos;
        [w.x, w.y, w.z]
    };
    let (m2, m1, p0, p1, p2) = (q(i - 2), q(i - 1), q(i), q(i + 1), q(i + 2));
    let vel = [
        fd4_first(m2[0], m1[0], p1[0], p2[0], h),
        fd4_first(m2[1], m1[1], p1[1], p2[1], h),
        fd4_first(m2[2], m1[2], p1[2], p2[2], h),
    ];
    let acc = [
        fd4_second(m2[0], m1[0], p0[0], p1[0], p2[0], h),
        fd4_second(m2[1], m1[1], p0[1], p1[1], p2[1], h),
        fd4_second(m2[2], m1[2], p0[2], p1[2], p2[2], h),
    ];
    let s = CurveState::new(
        traj.samples[i].t,
        traj.samples[i].pos,
        crate::geometry::CoordVelocity::new(vel[0], vel[1], vel[2]),
    );
    Ok(residual_at(p, k, &s, &acc))
}

fn uniform_spacing<T: Real>(traj: &Trajectory<T>) -> Result<T> {
    let h = traj.samples[1].t - traj.samples[0].t;
    let mut max_dev = T::zero();
    for w in traj.samples.windows(2) {
        let dev = ((w[1].t - w[0].t) - h).abs();
        if dev > max_dev {
            max_dev = dev;
        }
    }
    if max_dev > T::lit(1e-9) * h.max(T::one()) {
        return Err(Error::NonUniformGrid {
            max_dev: max_dev.as_f64(),
        });
    }
    Ok(h)
}

/// Checks a closed-form family on a uniform grid of `n` points over
/// [t0, t1]: analytic ODE residual, speed drift and first-integral drift
/// against `tol`.
pub fn check_family<T: Real>(
    spec: &FamilySpec<T>,
    t0: T,
    t1: T,
    n: usize,
    tol: T,
) -> Result<ResidualReport<T>> {
    if n < 2 || !(t1 > t0) {
        return Err(Error::Domain("need at least 2 grid points, t1 > t0".into()));
    }
    spec.validate()?;
    let p = spec.params()?;
    let k = spec.killing();
    let step = (t1 - t0) / T::from_usize(n - 1).unwrap();
    let mut residuals = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    let mut integrals = Vec::with_capacity(n);
    for i in 0..n {
        let t = t0 + step * T::from_usize(i).unwrap();
        let s = spec.eval(t)?;
        let acc = spec.acceleration(t)?;
        residuals.push((t, residual_at(&p, k, &s, &acc)));
        speeds.push(speed(&p, &s));
        integrals.push(first_integral(&p, k, &s));
    }
    Ok(ResidualReport::from_parts(
        residuals, &speeds, &integrals, tol,
    ))
}

/// Checks a uniformly sampled trajectory with finite-difference residuals at
/// the interior samples plus conservation drifts over all samples.
pub fn check_trajectory<T: Real>(traj: &Trajectory<T>, tol: T) -> Result<ResidualReport<T>> {
    let k = traj
        .killing
        .ok_or_else(|| Error::ParamMismatch("trajectory has no Killing attribution".into()))?;
    let p = &traj.params;
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::GridTooCoarse { need: 5, got: n });
    }
    uniform_spacing(traj)?;
    let mut residuals = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        residuals.push((traj.samples[i].t, ode_residual_fd(p, k, traj, i)?));
    }
    let speeds: Vec<T> = traj.samples.iter().map(|s| speed(p, s)).collect();
    let integrals: Vec<T> = traj
        .samples
        .iter()
        .map(|s| first_integral(p, k, s))
        .collect();
    Ok(ResidualReport::from_parts(
        residuals, &speeds, &integrals, tol,
    ))
}

/// Max Euclidean coordinate distance between a trajectory and a curve
/// evaluable at the trajectory's sample times.
pub fn compare<T: Real>(
    traj: &Trajectory<T>,
    curve: &dyn AnalyticCurve<T>,
    curve_params: &ModelParams<T>,
) -> Result<T> {
    if traj.params != *curve_params {
        return Err(Error::ParamMismatch(format!(
            "trajectory uses {:?}, curve uses {:?}",
            traj.params, curve_params
        )));
    }
    let mut max = T::zero();
    for s in &traj.samples {
        let want = curve.state(s.t)?;
        let d = ((s.pos.x - want.pos.x).powi(2)
            + (s.pos.y - want.pos.y).powi(2)
            + (s.pos.z - want.pos.z).powi(2))
        .sqrt();
        if d > max {
            max = d;
        }
    }
    Ok(max)
}

/// Max coordinate distance between trajectory `a`'s samples and trajectory
/// `b` interpolated at the same parameters; `b` must cover `a`'s range.
pub fn compare_trajectories<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    if a.params != b.params {
        return Err(Error::ParamMismatch(format!(
            "{:?} vs {:?}",
            a.params, b.params
        )));
    }
    let mut max = T::zero();
    for s in &a.samples {
        let other = b.sample_at(s.t).ok_or_else(|| {
            Error::Domain(format!("t = {} outside the reference trajectory", s.t))
        })?;
        let d = ((s.pos.x - other.pos.x).powi(2)
            + (s.pos.y - other.pos.y).powi(2)
            + (s.pos.z - other.pos.z).powi(2))
        .sqrt();
        if d > max {
            max = d;
        }
    }
    Ok(max)
}

/// Max drift of speed and of the first integral over a trajectory.
pub fn conservation_report<T: Real>(traj: &Trajectory<T>) -> Result<(T, T)> {
    let k = traj
        .killing
        .ok_or_else(|| Error::ParamMismatch("trajectory has no Killing attribution".into()))?;
    if traj.samples.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let p = &traj.params;
    let s0 = speed(p, &traj.samples[0]);
    let i0 = first_integral(p, k, &traj.samples[0]);
    let mut ds = T::zero();
    let mut di = T::zero();
    for s in &traj.samples {
        ds = ds.max((speed(p, s) - s0).abs());
        di = di.max((first_integral(p, k, s) - i0).abs());
    }
    Ok((ds, di))
}
