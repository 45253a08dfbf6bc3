//! The magnetic equation ∇_t t = V ∧ t as a first-order coordinate ODE,
//! with fixed-step RK4 and embedded RK45(DP) integration and the conserved
//! quantities (causal speed, per-field first integral).
//!
//! The frame-to-coordinate map is triangular in (z′ + x y′, y′, x′), so the
//! frame equation solves for the coordinate second derivatives in the order
//! y″, then x″, then z″; that triangular solve is the canonical right-hand
//! side used everywhere in this crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CoordPoint, CoordVelocity, FrameVector, KillingId, Metric, ModelParams};
use crate::scalar::Real;

/// Instantaneous state of a curve: parameter value, position, velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveState<T> {
    pub t: T,
    pub pos: CoordPoint<T>,
    pub vel: CoordVelocity<T>,
}

impl<T: Real> CurveState<T> {
    pub fn new(t: T, pos: CoordPoint<T>, vel: CoordVelocity<T>) -> Self {
        Self { t, pos, vel }
    }

    /// Packs into the flat [x, y, z, x′, y′, z′] layout the steppers use.
    fn to_array(self) -> [T; 6] {
        [
            self.pos.x,
            self.pos.y,
            self.pos.z,
            self.vel.dx,
            self.vel.dy,
            self.vel.dz,
        ]
    }

    fn from_array(t: T, y: &[T; 6]) -> Self {
        Self::new(
            t,
            CoordPoint::new(y[0], y[1], y[2]),
            CoordVelocity::new(y[3], y[4], y[5]),
        )
    }
}

/// How a trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationMeta {
    pub method: String,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub dt: Option<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

/// Immutable integration output; samples are strictly increasing in t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub params: ModelParams<T>,
    /// The Killing field the trajectory belongs to; `None` for trajectories
    /// driven by a custom force (geodesics, sign-flipped fields).
    pub killing: Option<KillingId>,
    pub samples: Vec<CurveState<T>>,
    pub meta: IntegrationMeta,
}

impl<T: Real> Trajectory<T> {
    pub fn first(&self) -> &CurveState<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &CurveState<T> {
        self.samples.last().expect("trajectory is nonempty")
    }

    /// State at an arbitrary parameter inside the sampled range, by cubic
    /// Hermite interpolation of the bracketing samples (positions and
    /// velocities are both stored, so the interpolant is O(h⁴) accurate).
    pub fn sample_at(&self, t: T) -> Option<CurveState<T>> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let idx = match self
            .samples
            .binary_search_by(|s| s.t.partial_cmp(&t).unwrap_or(core::cmp::Ordering::Less))
        {
            Ok(i) => return Some(self.samples[i]),
            Err(i) => i,
        };
        let a = &self.samples[idx - 1];
        let b = &self.samples[idx];
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        // Hermite basis on [0, 1].
        let h00 = T::two() * s3 - T::lit(3.0) * s2 + T::one();
        let h10 = s3 - T::two() * s2 + s;
        let h01 = -T::two() * s3 + T::lit(3.0) * s2;
        let h11 = s3 - s2;
        let interp = |pa: T, va: T, pb: T, vb: T| -> (T, T) {
            let pos = h00 * pa + h10 * h * va + h01 * pb + h11 * h * vb;
            // Basis derivatives in t (position terms carry 1/h).
            let d00 = (T::lit(6.0) * s2 - T::lit(6.0) * s) / h;
            let d10 = T::lit(3.0) * s2 - T::lit(4.0) * s + T::one();
            let d01 = (T::lit(6.0) * s - T::lit(6.0) * s2) / h;
            let d11 = T::lit(3.0) * s2 - T::two() * s;
            let vel = d00 * pa + d10 * va + d01 * pb + d11 * vb;
            (pos, vel)
        };
        let (x, dx) = interp(a.pos.x, a.vel.dx, b.pos.x, b.vel.dx);
        let (y, dy) = interp(a.pos.y, a.vel.dy, b.pos.y, b.vel.dy);
        let (z, dz) = interp(a.pos.z, a.vel.dz, b.pos.z, b.vel.dz);
        Some(CurveState::new(
            t,
            CoordPoint::new(x, y, z),
            CoordVelocity::new(dx, dy, dz),
        ))
    }
}

/// Stepper selection with its control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method<T> {
    FixedRk4 {
        dt: T,
    },
    EmbeddedRk45 {
        abs_tol: T,
        rel_tol: T,
        dt_min: T,
        dt_max: T,
    },
}

/// Integration request: stepper plus final parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub method: Method<T>,
    pub t_end: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn rk4(dt: T, t_end: T) -> Self {
        Self {
            method: Method::FixedRk4 { dt },
            t_end,
        }
    }

    /// Embedded RK45 with the default controls: abs_tol = rel_tol = 1e-10,
    /// dt ∈ [1e-12, 0.1].
    pub fn rk45_default(t_end: T) -> Self {
        Self::rk45(T::lit(1e-10), T::lit(1e-10), t_end)
    }

    pub fn rk45(abs_tol: T, rel_tol: T, t_end: T) -> Self {
        Self {
            method: Method::EmbeddedRk45 {
                abs_tol,
                rel_tol,
                dt_min: T::lit(1e-12),
                dt_max: T::lit(0.1),
            },
            t_end,
        }
    }

    fn validate(&self, t0: T) -> Result<()> {
        if !(self.t_end > t0) {
            return Err(Error::Domain(format!(
                "t_end must exceed the initial parameter: {} vs {}",
                self.t_end, t0
            )));
        }
        match self.method {
            Method::FixedRk4 { dt } => {
                if !(dt > T::zero()) {
                    return Err(Error::Domain(format!("dt must be positive, got {dt}")));
                }
            }
            Method::EmbeddedRk45 {
                abs_tol,
                rel_tol,
                dt_min,
                dt_max,
            } => {
                if !(abs_tol > T::zero()) || !(rel_tol > T::zero()) {
                    return Err(Error::Domain("tolerances must be positive".into()));
                }
                if !(dt_min > T::zero()) || !(dt_min <= dt_max) {
                    return Err(Error::Domain(
                        "step bounds must satisfy 0 < dt_min <= dt_max".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Frame components of the covariant acceleration ∇_t t along a curve with
/// the given coordinate second derivatives `acc` = (x″, y″, z″).
pub fn covariant_acceleration<T: Real>(
    p: &ModelParams<T>,
    s: &CurveState<T>,
    acc: &[T; 3],
) -> FrameVector<T> {
    let l = p.lambda;
    let x = s.pos.x;
    let (dx, dy) = (s.vel.dx, s.vel.dy);
    let (ddx, ddy, ddz) = (acc[0], acc[1], acc[2]);
    let twist = s.vel.dz + x * dy;
    let dtwist = ddz + dx * dy + x * ddy;
    match p.metric {
        Metric::G1 => FrameVector::new(dtwist, ddy + dx * twist, ddx / l + l * dy * twist),
        Metric::G2 => FrameVector::new(ddy - dx * twist, ddx / l + l * dy * twist, dtwist),
    }
}

/// Coordinate second derivatives solved from a frame force `w` standing on
/// the right-hand side of ∇_t t = w.
fn solve_acceleration<T: Real>(
    p: &ModelParams<T>,
    s: &CurveState<T>,
    w: &FrameVector<T>,
) -> [T; 3] {
    let l = p.lambda;
    let x = s.pos.x;
    let (dx, dy) = (s.vel.dx, s.vel.dy);
    let twist = s.vel.dz + x * dy;
    let (ddy, ddx) = match p.metric {
        Metric::G1 => (w.a2 - dx * twist, l * w.a3 - l * l * dy * twist),
        Metric::G2 => (w.a1 + dx * twist, l * w.a2 - l * l * dy * twist),
    };
    let dtwist = match p.metric {
        Metric::G1 => w.a1,
        Metric::G2 => w.a3,
    };
    let ddz = dtwist - dx * dy - x * ddy;
    [ddx, ddy, ddz]
}

/// Right-hand side of the first-order system for the V-magnetic equation:
/// returns (x′, y′, z′, x″, y″, z″).
pub fn lorentz_rhs<T: Real>(p: &ModelParams<T>, k: KillingId, s: &CurveState<T>) -> [T; 6] {
    let w = p
        .killing_field(k, &s.pos)
        .cross(&p.frame_components(&s.pos, &s.vel));
    let acc = solve_acceleration(p, s, &w);
    [s.vel.dx, s.vel.dy, s.vel.dz, acc[0], acc[1], acc[2]]
}

/// Causal speed g(γ′, γ′); constant along magnetic trajectories.
pub fn speed<T: Real>(p: &ModelParams<T>, s: &CurveState<T>) -> T {
    let f = p.frame_components(&s.pos, &s.vel);
    f.inner(&f)
}

/// The conserved first integral of the (metric, V) pair: the integrated
/// third equation of the corresponding system.
pub fn first_integral<T: Real>(p: &ModelParams<T>, k: KillingId, s: &CurveState<T>) -> T {
    let l = p.lambda;
    let (x, y) = (s.pos.x, s.pos.y);
    let twist = s.vel.dz + x * s.vel.dy;
    let half = T::half();
    match (p.metric, k) {
        (_, KillingId::V1) => twist,
        (Metric::G1, KillingId::V2) => twist - x / l,
        (Metric::G1, KillingId::V3) => twist + y,
        (Metric::G1, KillingId::V4) => twist - half * x * x / l + half * l * y * y,
        (Metric::G2, KillingId::V2) => twist + x / l,
        (Metric::G2, KillingId::V3) => twist - y,
        (Metric::G2, KillingId::V4) => twist + half * x * x / l + half * l * y * y,
    }
}

/// Integrates the V-magnetic equation from `init` to `cfg.t_end`.
pub fn integrate<T: Real>(
    p: &ModelParams<T>,
    k: KillingId,
    init: &CurveState<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let force = move |s: &CurveState<T>| {
        p.killing_field(k, &s.pos)
            .cross(&p.frame_components(&s.pos, &s.vel))
    };
    integrate_with(p, &force, Some(k), init, cfg)
}

/// Integrates ∇_t t = w(state) for an arbitrary frame force; `killing`
/// records the attribution when the force comes from a Killing field.
/// Passing a force of zero integrates geodesics.
pub fn integrate_with<T: Real>(
    p: &ModelParams<T>,
    force: &dyn Fn(&CurveState<T>) -> FrameVector<T>,
    killing: Option<KillingId>,
    init: &CurveState<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate(init.t)?;
    let rhs = |t: T, y: &[T; 6]| -> [T; 6] {
        let s = CurveState::from_array(t, y);
        let w = force(&s);
        let acc = solve_acceleration(p, &s, &w);
        [y[3], y[4], y[5], acc[0], acc[1], acc[2]]
    };
    let (samples, meta) = match cfg.method {
        Method::FixedRk4 { dt } => run_rk4(&rhs, init, cfg.t_end, dt)?,
        Method::EmbeddedRk45 {
            abs_tol,
            rel_tol,
            dt_min,
            dt_max,
        } => run_rk45(&rhs, init, cfg.t_end, abs_tol, rel_tol, dt_min, dt_max)?,
    };
    Ok(Trajectory {
        params: *p,
        killing,
        samples,
        meta,
    })
}

fn check_finite<T: Real>(t: T, y: &[T; 6]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t: t.as_f64() })
    }
}

fn rk4_step<T: Real>(rhs: &dyn Fn(T, &[T; 6]) -> [T; 6], t: T, y: &[T; 6], h: T) -> [T; 6] {
    let half = T::half();
    let k1 = rhs(t, y);
    let mut buf = [T::zero(); 6];
    for i in 0..6 {
        buf[i] = y[i] + half * h * k1[i];
    }
    let k2 = rhs(t + half * h, &buf);
    for i in 0..6 {
        buf[i] = y[i] + half * h * k2[i];
    }
    let k3 = rhs(t + half * h, &buf);
    for i in 0..6 {
        buf[i] = y[i] + h * k3[i];
    }
    let k4 = rhs(t + h, &buf);
    let sixth = T::lit(1.0 / 6.0);
    let mut out = [T::zero(); 6];
    for i in 0..6 {
        out[i] = y[i] + h * sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

type StepperOutput<T> = (Vec<CurveState<T>>, IntegrationMeta);

fn run_rk4<T: Real>(
    rhs: &dyn Fn(T, &[T; 6]) -> [T; 6],
    init: &CurveState<T>,
    t_end: T,
    dt: T,
) -> Result<StepperOutput<T>> {
    let mut t = init.t;
    let mut y = init.to_array();
    let mut samples = vec![*init];
    let mut accepted = 0usize;
    let sliver = dt * T::lit(1e-9);
    while t < t_end - sliver {
        // Absorb float accumulation into the final step so grids built from
        // a dt that divides the span stay uniform, and land on t_end exactly.
        let last = t + dt >= t_end - sliver;
        let h = if last { t_end - t } else { dt };
        y = rk4_step(rhs, t, &y, h);
        t = if last { t_end } else { t + h };
        check_finite(t, &y)?;
        samples.push(CurveState::from_array(t, &y));
        accepted += 1;
        if accepted > 50_000_000 {
            return Err(Error::Domain("fixed-step budget exhausted".into()));
        }
    }
    Ok((
        samples,
        IntegrationMeta {
            method: "rk4".into(),
            abs_tol: None,
            rel_tol: None,
            dt: Some(dt.as_f64()),
            steps_accepted: accepted,
            steps_rejected: 0,
        },
    ))
}

/// Dormand-Prince 5(4) with FSAL and standard step control.
#[allow(clippy::too_many_arguments)]
fn run_rk45<T: Real>(
    rhs: &dyn Fn(T, &[T; 6]) -> [T; 6],
    init: &CurveState<T>,
    t_end: T,
    abs_tol: T,
    rel_tol: T,
    dt_min: T,
    dt_max: T,
) -> Result<StepperOutput<T>> {
    let a: [[f64; 6]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
    ];
    let c: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
    let b5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    let e: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let at = |x: f64| T::lit(x);

    let mut t = init.t;
    let mut y = init.to_array();
    let mut samples = vec![*init];
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    let span = t_end - t;
    let mut h = dt_max.min(span * T::lit(1e-3)).max(dt_min);
    let mut k: [[T; 6]; 7] = [[T::zero(); 6]; 7];
    k[0] = rhs(t, &y);

    while t < t_end {
        let last = h >= t_end - t;
        h = h.min(t_end - t).min(dt_max);
        if h < dt_min {
            h = dt_min;
        }
        // Stage evaluations.
        for stage in 1..6 {
            let mut ys = [T::zero(); 6];
            for i in 0..6 {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let aij = a[stage][j];
                    if aij != 0.0 {
                        acc = acc + at(aij) * kj[i];
                    }
                }
                ys[i] = y[i] + h * acc;
            }
            k[stage] = rhs(t + at(c[stage]) * h, &ys);
        }
        // Fifth-order solution; its derivative is the seventh stage (FSAL).
        let mut y5 = [T::zero(); 6];
        for i in 0..6 {
            let mut acc = T::zero();
            for (j, kj) in k.iter().enumerate().take(6) {
                if b5[j] != 0.0 {
                    acc = acc + at(b5[j]) * kj[i];
                }
            }
            y5[i] = y[i] + h * acc;
        }
        // Land on t_end exactly when taking the clipped final step.
        let t_new = if last { t_end } else { t + h };
        if !y5.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { t: t_new.as_f64() });
        }
        k[6] = rhs(t_new, &y5);

        // Error estimate against the embedded fourth-order result.
        let mut err_sq = T::zero();
        for i in 0..6 {
            let mut de = T::zero();
            for (j, kj) in k.iter().enumerate() {
                if e[j] != 0.0 {
                    de = de + at(e[j]) * kj[i];
                }
            }
            let sc = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
            let r = h * de / sc;
            err_sq = err_sq + r * r;
        }
        let err = (err_sq / T::lit(6.0)).sqrt();

        if err <= T::one() || h <= dt_min {
            if err > T::one() {
                // Accepting at dt_min would silently degrade accuracy.
                return Err(Error::StepUnderflow { t: t.as_f64() });
            }
            t = t_new;
            y = y5;
            k[0] = k[6];
            samples.push(CurveState::from_array(t, &y));
            accepted += 1;
        } else {
            rejected += 1;
        }
        // Step-size update (order 5 ⇒ exponent 1/5), bounded growth/shrink.
        let factor = if err > T::zero() {
            (T::lit(0.9) * err.powf(T::lit(-0.2)))
                .max(T::lit(0.2))
                .min(T::lit(5.0))
        } else {
            T::lit(5.0)
        };
        h = (h * factor).min(dt_max);
        if h < dt_min && t < t_end {
            return Err(Error::StepUnderflow { t: t.as_f64() });
        }
        if accepted + rejected > 50_000_000 {
            return Err(Error::Domain("adaptive step budget exhausted".into()));
        }
    }
    Ok((
        samples,
        IntegrationMeta {
            method: "rk45".into(),
            abs_tol: Some(abs_tol.as_f64()),
            rel_tol: Some(rel_tol.as_f64()),
            dt: None,
            steps_accepted: accepted,
            steps_rejected: rejected,
        },
    ))
}
