//! Scalar root finding: bisection for piecewise-smooth maps with kinks, and
//! Brent's method for the participation residual.

use crate::error::{Error, Result};

/// Bisection on a bracketing interval. `f_lo` and `f_hi` must have opposite
/// signs (either endpoint may be exactly zero). Iterates until the residual
/// satisfies `|f| <= ftol` or the interval collapses to machine width, and
/// returns the best midpoint.
pub fn bisect<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    ftol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut last_res = f_lo;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        last_res = f_mid;
        if f_mid == 0.0 || (hi - lo).abs() <= f64::EPSILON * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if f_mid.abs() <= ftol {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what,
        residual: last_res,
    })
}

/// Brent's method (inverse quadratic interpolation with bisection fallback)
/// on a sign-changing bracket `[a, b]`. Converges when `|f| <= ftol`; errors
/// if the bracket does not change sign or the iteration cap is exhausted.
pub fn brent<F>(f: F, a: f64, b: f64, ftol: f64, max_iter: usize, what: &'static str) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut xpre, mut xcur) = (a, b);
    let (mut fpre, mut fcur) = (f(xpre), f(xcur));

    if fpre == 0.0 || fpre.abs() <= ftol {
        return Ok(xpre);
    }
    if fcur == 0.0 || fcur.abs() <= ftol {
        return Ok(xcur);
    }
    if fpre.signum() == fcur.signum() {
        return Err(Error::Bracket {
            context: format!("{what}: endpoints do not change sign"),
            samples: vec![(xpre, fpre), (xcur, fcur)],
        });
    }

    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0, 0.0);
    // Interval tolerance only guards against stalling; the convergence
    // criterion is the residual.
    let xtol = 2e-15;

    for _ in 0..max_iter {
        if fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        if fcur.abs() <= ftol {
            return Ok(xcur);
        }
        let delta = 0.5 * (xtol + 4.0 * f64::EPSILON * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(xcur);
        }

        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // secant
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // inverse quadratic
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
    }
    Err(Error::NoConvergence {
        what,
        residual: fcur,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let f = |x: f64| x * x - 2.0;
        let root = bisect(f, 1.0, 2.0, f(1.0), 1e-12, 200, "sqrt2").unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn bisect_handles_descending_function() {
        let f = |x: f64| 1.0 - x;
        let root = bisect(f, 0.0, 3.0, f(0.0), 1e-13, 200, "desc").unwrap();
        assert!((root - 1.0).abs() < 1e-10);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| x.powi(3) - 2.0 * x - 5.0;
        let root = brent(f, 2.0, 3.0, 1e-13, 100, "cubic").unwrap();
        assert!((root - 2.0945514815423265).abs() < 1e-10);
    }

    #[test]
    fn brent_accepts_kinked_function() {
        let f = |x: f64| (x - 0.3).max(2.0 * (x - 0.3));
        let root = brent(f, -1.0, 1.0, 1e-13, 100, "kink").unwrap();
        assert!((root - 0.3).abs() < 1e-9);
    }

    #[test]
    fn brent_rejects_same_sign_bracket() {
        let err = brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100, "nosign").unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }
}
