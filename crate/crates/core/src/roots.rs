//! Bracketed scalar root finding for monotone functions.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 2000;
const MAX_POLISH: usize = 4;
const MAX_GROWTH: usize = 200;
const MAX_HYBRID: usize = 300;

/// Relative bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-13;

fn width_target(lo: f64, hi: f64) -> f64 {
    BISECTION_WIDTH * 1f64.max(lo.abs()).max(hi.abs())
}

/// Bisection to relative width `1e-13` followed by a guarded Newton polish.
///
/// `f` must change sign on `[lo, hi]`; `df` is its derivative. Polish steps
/// are only kept when they stay inside the final bracket and reduce `|f|`.
pub fn bisect_polish<F, D>(f: F, df: D, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let a_negative = fa < 0.0;
    for _ in 0..MAX_BISECTIONS {
        if b - a <= width_target(a, b) {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == a_negative {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for _ in 0..MAX_POLISH {
        let d = df(x);
        if !(d.is_finite() && d != 0.0) {
            break;
        }
        let y = x - fx / d;
        if !(y >= a && y <= b) {
            break;
        }
        let fy = f(y);
        if fy.abs() < fx.abs() {
            x = y;
            fx = fy;
        } else {
            break;
        }
    }
    Ok(x)
}

/// Safeguarded Newton iteration that always keeps a sign-change bracket.
///
/// `fdf` returns the value and derivative. Steps that leave the bracket or
/// fail to halve the previous step fall back to bisection.
pub fn newton_bracketed<F>(fdf: F, lo: f64, hi: f64, guess: Option<f64>) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    // orient so that f(a) < 0 < f(b) in the bookkeeping below
    let flip = fa > 0.0;
    let g = |x: f64| {
        let (v, d) = fdf(x);
        if flip {
            (-v, -d)
        } else {
            (v, d)
        }
    };
    let mut x = match guess {
        Some(x0) if x0 > a && x0 < b => x0,
        _ => 0.5 * (a + b),
    };
    let mut dx_old = b - a;
    let mut dx = dx_old;
    let (mut fx, mut dfx) = g(x);
    for _ in 0..MAX_HYBRID {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton_ok = dfx.is_finite() && dfx > 0.0 && {
            let y = x - fx / dfx;
            y > a && y < b && (2.0 * fx).abs() <= (dx_old * dfx).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (b - a);
            x = a + dx;
        }
        let tol = 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
        if dx.abs() <= tol || b - a <= 2.0 * tol {
            return Ok(x);
        }
        let next = g(x);
        fx = next.0;
        dfx = next.1;
    }
    Ok(x)
}

/// Grows `hi` geometrically away from `anchor` until `pred(hi)` holds.
pub fn grow_until<P>(anchor: f64, initial_step: f64, pred: P) -> Result<f64>
where
    P: Fn(f64) -> bool,
{
    let mut step = initial_step.abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_GROWTH {
        let x = anchor + step;
        if !x.is_finite() {
            break;
        }
        if pred(x) {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::BracketGrowth { start: anchor })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_polish_finds_sqrt2() {
        let r = bisect_polish(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn bisect_polish_rejects_missing_sign_change() {
        let e = bisect_polish(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::NoSignChange { .. }));
    }

    #[test]
    fn newton_bracketed_handles_decreasing_functions() {
        let r = newton_bracketed(|x| (1.0 - x.exp(), -x.exp()), -3.0, 5.0, None).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn newton_bracketed_survives_flat_derivative() {
        // cube root has an infinite-slope inverse at zero
        let r = newton_bracketed(|x| (x * x * x - 1e-12, 3.0 * x * x), -1.0, 1.0, Some(0.0)).unwrap();
        assert!((r - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn grow_until_doubles() {
        let hi = grow_until(0.0, 1.0, |x| x > 100.0).unwrap();
        assert_eq!(hi, 128.0);
    }
}
