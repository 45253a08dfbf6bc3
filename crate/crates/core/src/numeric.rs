//! Shared numerical kernels: quadrature, root bracketing, difference stencils.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adaptive Simpson quadrature of a smooth integrand on [a, b].
///
/// Recursion bisects until the Richardson error estimate of each panel is
/// below its share of `tol`. Fails with `QuadratureFailure` if the recursion
/// depth limit is hit before the tolerance is met.
pub fn adaptive_simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::half();
    let fm = f(m);
    let whole = simpson_panel(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson_panel<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T> {
    let m = (a + b) * T::half();
    let lm = (a + m) * T::half();
    let rm = (m + b) * T::half();
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let err = (left + right - whole).abs() / T::lit(15.0);
    // Roundoff floor: panels cannot resolve below machine precision.
    let floor = T::epsilon() * (left.abs() + right.abs() + T::epsilon());
    if err <= tol.max(floor) || (b - a).abs() < T::epsilon() * T::lit(16.0) {
        return Ok(left + right + (left + right - whole) / T::lit(15.0));
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            requested: tol.as_f64(),
            achieved: err.as_f64(),
        });
    }
    let half_tol = tol * T::half();
    let l = simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?;
    Ok(l + r)
}

/// Bracketed root finding: secant proposals interleaved with bisection so
/// the bracket provably shrinks. Requires f(lo) and f(hi) of opposite sign.
pub fn bracketed_root<T: Real>(f: &dyn Fn(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::Domain(format!(
            "root not bracketed on [{}, {}]",
            a.as_f64(),
            b.as_f64()
        )));
    }
    for _ in 0..200 {
        // Secant proposal, clipped into the bracket.
        let mut m = if fb != fa {
            b - fb * (b - a) / (fb - fa)
        } else {
            (a + b) * T::half()
        };
        let mid = (a + b) * T::half();
        if !(m > a.min(b) && m < a.max(b)) {
            m = mid;
        }
        // Alternate with bisection so the bracket provably shrinks.
        if (b - a).abs() < tol {
            return Ok(mid);
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        // Force a bisection step when the secant stalls.
        let w = (b - a).abs();
        if w > (hi - lo).abs() * T::half().powi(2) {
            let c = (a + b) * T::half();
            let fc = f(c);
            if fc == T::zero() {
                return Ok(c);
            }
            if (fc > T::zero()) == (fa > T::zero()) {
                a = c;
                fa = fc;
            } else {
                b = c;
                fb = fc;
            }
        }
    }
    Ok((a + b) * T::half())
}

/// Five-point central first derivative (4th order) on a uniform grid.
pub fn fd4_first<T: Real>(fm2: T, fm1: T, fp1: T, fp2: T, h: T) -> T {
    (fm2 - T::lit(8.0) * fm1 + T::lit(8.0) * fp1 - fp2) / (T::lit(12.0) * h)
}

/// Five-point central second derivative (4th order) on a uniform grid.
pub fn fd4_second<T: Real>(fm2: T, fm1: T, f0: T, fp1: T, fp2: T, h: T) -> T {
    (-fm2 + T::lit(16.0) * fm1 - T::lit(30.0) * f0 + T::lit(16.0) * fp1 - fp2)
        / (T::lit(12.0) * h * h)
}

/// Cumulative integral of uniformly sampled values, 4th-order accurate.
///
/// Each interval is integrated with the cubic interpolatory rule through the
/// four nearest nodes, so every node receives a value. Grids shorter than 4
/// fall back to the trapezoid rule.
pub fn cumulative_integral<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + h * T::half() * (values[i - 1] + values[i]);
        }
        return out;
    }
    let c24 = T::lit(1.0 / 24.0);
    let (c9, c19, c5) = (T::lit(9.0), T::lit(19.0), T::lit(5.0));
    for i in 1..n {
        let panel = if i + 2 < n {
            c9 * values[i - 1] + c19 * values[i] - c5 * values[i + 1] + values[i + 2]
        } else {
            c9 * values[i] + c19 * values[i - 1] - c5 * values[i - 2] + values[i - 3]
        };
        out[i] = out[i - 1] + h * c24 * panel;
    }
    out
}
