//! Frames, metrics, connection tables, Lorentzian cross product and Killing
//! fields for the two non-flat left-invariant Lorentzian metrics on the
//! Heisenberg group H₃.
//!
//! Both metrics come with a global orthonormal frame {e₁, e₂, e₃} of
//! signature (+, +, −), e₃ timelike. Everything in this module is exact
//! pointwise algebra except [`ModelParams::killing_residual`], which
//! differentiates the metric numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which of the two non-flat metrics the model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// g₁ = −dx²/λ² + dy² + (x dy + dz)²
    G1,
    /// g₂ = dx²/λ² + dy² − (x dy + dz)²
    G2,
}

impl core::fmt::Display for Metric {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Metric::G1 => write!(f, "g1"),
            Metric::G2 => write!(f, "g2"),
        }
    }
}

/// Basis element of the Killing algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KillingId {
    V1,
    V2,
    V3,
    V4,
}

impl KillingId {
    pub const ALL: [KillingId; 4] = [KillingId::V1, KillingId::V2, KillingId::V3, KillingId::V4];
}

impl core::fmt::Display for KillingId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KillingId::V1 => write!(f, "V1"),
            KillingId::V2 => write!(f, "V2"),
            KillingId::V3 => write!(f, "V3"),
            KillingId::V4 => write!(f, "V4"),
        }
    }
}

/// Metric choice plus the positive parameter λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub metric: Metric,
    pub lambda: T,
}

/// Point in the global (x, y, z) chart on H₃.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoordPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Coordinate components of a tangent vector (equivalently, a coordinate
/// velocity x′, y′, z′).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoordVelocity<T> {
    pub dx: T,
    pub dy: T,
    pub dz: T,
}

/// Components of a tangent vector in the orthonormal frame {e₁, e₂, e₃}.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameVector<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
}

impl<T: Real> CoordPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Point shifted by `d` along coordinate axis 0, 1 or 2.
    fn offset(mut self, axis: usize, d: T) -> Self {
        match axis {
            0 => self.x = self.x + d,
            1 => self.y = self.y + d,
            _ => self.z = self.z + d,
        }
        self
    }
}

impl<T: Real> CoordVelocity<T> {
    pub fn new(dx: T, dy: T, dz: T) -> Self {
        Self { dx, dy, dz }
    }

    fn component(&self, axis: usize) -> T {
        match axis {
            0 => self.dx,
            1 => self.dy,
            _ => self.dz,
        }
    }
}

impl<T: Real> FrameVector<T> {
    pub fn new(a1: T, a2: T, a3: T) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Signature (+, +, −) inner product: a₁b₁ + a₂b₂ − a₃b₃.
    pub fn inner(&self, other: &Self) -> T {
        self.a1 * other.a1 + self.a2 * other.a2 - self.a3 * other.a3
    }

    /// Vector product adapted to the (+, +, −) signature. The component
    /// formula is pinned to the frame orientation for which
    /// ⟨a ∧ b, c⟩ equals the determinant with rows a, b, c.
    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.a2 * other.a3 - self.a3 * other.a2,
            self.a3 * other.a1 - self.a1 * other.a3,
            self.a2 * other.a1 - self.a1 * other.a2,
        )
    }

    /// Euclidean norm of the components. Used for residuals, where a
    /// metric-null discrepancy must still register as nonzero.
    pub fn norm(&self) -> T {
        (self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a1 * s, self.a2 * s, self.a3 * s)
    }
}

impl<T: Real> core::ops::Add for FrameVector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.a1 + rhs.a1, self.a2 + rhs.a2, self.a3 + rhs.a3)
    }
}

impl<T: Real> core::ops::Sub for FrameVector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a1 - rhs.a1, self.a2 - rhs.a2, self.a3 - rhs.a3)
    }
}

impl<T: Real> core::ops::Neg for FrameVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a1, -self.a2, -self.a3)
    }
}

impl<T: Real> ModelParams<T> {
    /// Validates λ > 0.
    pub fn new(metric: Metric, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { metric, lambda })
    }

    /// Frame components of a coordinate tangent vector at `pt`.
    ///
    /// g₁: (z′ + x y′, y′, x′/λ);  g₂: (y′, x′/λ, z′ + x y′).
    pub fn frame_components(&self, pt: &CoordPoint<T>, v: &CoordVelocity<T>) -> FrameVector<T> {
        let twist = v.dz + pt.x * v.dy;
        match self.metric {
            Metric::G1 => FrameVector::new(twist, v.dy, v.dx / self.lambda),
            Metric::G2 => FrameVector::new(v.dy, v.dx / self.lambda, twist),
        }
    }

    /// Coordinate components of a frame vector at `pt`; exact left inverse of
    /// [`Self::frame_components`].
    pub fn coord_components(&self, pt: &CoordPoint<T>, a: &FrameVector<T>) -> CoordVelocity<T> {
        match self.metric {
            Metric::G1 => CoordVelocity::new(self.lambda * a.a3, a.a2, a.a1 - pt.x * a.a2),
            Metric::G2 => CoordVelocity::new(self.lambda * a.a2, a.a1, a.a3 - pt.x * a.a1),
        }
    }

    /// Coordinate expression of the frame field e_i (i ∈ 1..=3) at `pt`.
    pub fn frame_basis_coords(&self, i: usize, pt: &CoordPoint<T>) -> Result<CoordVelocity<T>> {
        let l = self.lambda;
        let o = T::zero();
        let one = T::one();
        let res = match (self.metric, i) {
            (Metric::G1, 1) => CoordVelocity::new(o, o, one),
            (Metric::G1, 2) => CoordVelocity::new(o, one, -pt.x),
            (Metric::G1, 3) => CoordVelocity::new(l, o, o),
            (Metric::G2, 1) => CoordVelocity::new(o, one, -pt.x),
            (Metric::G2, 2) => CoordVelocity::new(l, o, o),
            (Metric::G2, 3) => CoordVelocity::new(o, o, one),
            _ => return Err(Error::FrameIndex { i, j: i }),
        };
        Ok(res)
    }

    /// Levi-Civita connection coefficient ∇_{e_i} e_j as a frame vector,
    /// from the fixed table; i, j are 1-based frame indices.
    ///
    /// The table is torsion-free and metric-compatible; in particular, for g₂
    /// the pair ∇₂e₃ = ∇₃e₂ = −(λ/2)e₁ is forced by [e₂, e₃] = 0 together
    /// with the covariant-acceleration formula this crate integrates.
    pub fn connection_coeff(&self, i: usize, j: usize) -> Result<FrameVector<T>> {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::FrameIndex { i, j });
        }
        let half_l = self.lambda * T::half();
        let e = |k: usize, sign: T| -> FrameVector<T> {
            let mut v = FrameVector::zero();
            match k {
                1 => v.a1 = sign * half_l,
                2 => v.a2 = sign * half_l,
                _ => v.a3 = sign * half_l,
            }
            v
        };
        let one = T::one();
        let res = match (self.metric, i, j) {
            (Metric::G1, 1, 2) | (Metric::G1, 2, 1) => e(3, one),
            (Metric::G1, 1, 3) | (Metric::G1, 3, 1) => e(2, one),
            (Metric::G1, 2, 3) => e(1, one),
            (Metric::G1, 3, 2) => e(1, -one),
            (Metric::G2, 1, 2) => e(3, one),
            (Metric::G2, 2, 1) => e(3, -one),
            (Metric::G2, 1, 3) | (Metric::G2, 3, 1) => e(2, one),
            (Metric::G2, 2, 3) | (Metric::G2, 3, 2) => e(1, -one),
            _ => FrameVector::zero(),
        };
        Ok(res)
    }

    /// Killing basis field V₁..V₄ at `pt`, in frame components.
    pub fn killing_field(&self, k: KillingId, pt: &CoordPoint<T>) -> FrameVector<T> {
        let l = self.lambda;
        let (x, y) = (pt.x, pt.y);
        let o = T::zero();
        let one = T::one();
        match self.metric {
            Metric::G1 => match k {
                KillingId::V1 => FrameVector::new(one, o, o),
                KillingId::V2 => FrameVector::new(x, one, o),
                KillingId::V3 => FrameVector::new(-l * y, o, one),
                KillingId::V4 => FrameVector::new(T::half() * (x * x - l * l * y * y), x, l * y),
            },
            Metric::G2 => match k {
                KillingId::V1 => FrameVector::new(o, o, one),
                KillingId::V2 => FrameVector::new(one, o, x),
                KillingId::V3 => FrameVector::new(o, one, -l * y),
                KillingId::V4 => FrameVector::new(x, -l * y, T::half() * (x * x + l * l * y * y)),
            },
        }
    }

    /// Killing basis field in coordinate components.
    pub fn killing_field_coords(&self, k: KillingId, pt: &CoordPoint<T>) -> CoordVelocity<T> {
        let f = self.killing_field(k, pt);
        self.coord_components(pt, &f)
    }

    /// Coordinate-basis matrix of the metric at `pt` (row-major, symmetric).
    pub fn metric_tensor(&self, pt: &CoordPoint<T>) -> [[T; 3]; 3] {
        let l2 = self.lambda * self.lambda;
        let x = pt.x;
        let o = T::zero();
        let one = T::one();
        match self.metric {
            Metric::G1 => [[-one / l2, o, o], [o, one + x * x, x], [o, x, one]],
            Metric::G2 => [[one / l2, o, o], [o, one - x * x, -x], [o, -x, -one]],
        }
    }

    /// Max |(L_V g)_{ij}| over coordinate pairs (i ≤ j) for the Killing basis
    /// field `k`, with partial derivatives of the metric and field components
    /// taken by central differences of step `h`. Near zero (up to roundoff
    /// amplified by 1/h) exactly when the field is Killing.
    pub fn killing_residual(&self, k: KillingId, pt: &CoordPoint<T>, h: T) -> Result<T> {
        let field = move |q: CoordPoint<T>| self.killing_field_coords(k, &q);
        self.lie_derivative_residual(&field, pt, h)
    }

    /// Same residual for an arbitrary coordinate vector field; used to verify
    /// that non-Killing fields are rejected.
    pub fn lie_derivative_residual(
        &self,
        field: &dyn Fn(CoordPoint<T>) -> CoordVelocity<T>,
        pt: &CoordPoint<T>,
        h: T,
    ) -> Result<T> {
        if !(h > T::zero()) {
            return Err(Error::Domain(format!("step h must be positive, got {h}")));
        }
        let two_h = T::two() * h;
        let g0 = self.metric_tensor(pt);
        let v0 = field(*pt);
        // Central differences of the metric and the field along each axis.
        let mut dg = [[[T::zero(); 3]; 3]; 3]; // dg[m][i][j] = ∂_m g_{ij}
        let mut dv = [[T::zero(); 3]; 3]; // dv[i][k] = ∂_i V^k
        for m in 0..3 {
            let gp = self.metric_tensor(&pt.offset(m, h));
            let gm = self.metric_tensor(&pt.offset(m, -h));
            let vp = field(pt.offset(m, h));
            let vm = field(pt.offset(m, -h));
            for i in 0..3 {
                for j in 0..3 {
                    dg[m][i][j] = (gp[i][j] - gm[i][j]) / two_h;
                }
                dv[m][i] = (vp.component(i) - vm.component(i)) / two_h;
            }
        }
        let v = [v0.dx, v0.dy, v0.dz];
        let mut max = T::zero();
        for i in 0..3 {
            for j in i..3 {
                let mut lie = T::zero();
                for k in 0..3 {
                    lie = lie + v[k] * dg[k][i][j] + g0[k][j] * dv[i][k] + g0[i][k] * dv[j][k];
                }
                if lie.abs() > max {
                    max = lie.abs();
                }
            }
        }
        Ok(max)
    }
}
