//! Bracketing scalar root finder used for the implicit best responses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for the one-dimensional root finds behind `b3` and `b2`.
///
/// `bracket = None` lets the response system pick a default from the demand
/// curve (`[0, 10 A/B]` for linear demand).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolveConfig {
    pub bracket: Option<(f64, f64)>,
    /// Absolute tolerance on the root location.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self {
            bracket: None,
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl InnerSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!("root tolerance must be > 0, got {}", self.tol)));
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Argument(format!("empty root bracket [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Brent's method (inverse quadratic interpolation, secant and bisection
/// steps) on `[lo, hi]`. `f(lo)` and `f(hi)` must differ in sign.
pub fn brent<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        if !fb.is_finite() {
            return Err(Error::Evaluation {
                what: "root-find objective".into(),
                at: b,
            });
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
    })
}
