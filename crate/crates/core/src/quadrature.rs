//! Adaptive Simpson quadrature.

pub const ABS_FLOOR: f64 = 1e-12;
pub const REL_TARGET: f64 = 1e-8;
pub const MAX_DEPTH: u32 = 40;

const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the Richardson error estimates over accepted panels.
    pub error_estimate: f64,
    /// False when some panel hit the depth cap before meeting its tolerance.
    pub converged: bool,
}

/// Adaptive Simpson on `[a, b]` with the default tolerances.
///
/// Reversed limits give the negated integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Quadrature {
    adaptive_simpson_with(f, a, b, ABS_FLOOR, REL_TARGET, MAX_DEPTH)
}

pub fn adaptive_simpson_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_floor: f64,
    rel: f64,
    max_depth: u32,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
        };
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    for i in 0..INITIAL_PANELS {
        let x0 = a + h * i as f64;
        let x2 = if i + 1 == INITIAL_PANELS { b } else { a + h * (i + 1) as f64 };
        let x1 = 0.5 * (x0 + x2);
        let (f0, f1, f2) = (f(x0), f(x1), f(x2));
        let s = simpson(x0, x2, f0, f1, f2);
        coarse += s;
        panels.push((x0, x2, f0, f1, f2, s));
    }
    let tol = abs_floor.max(rel * coarse.abs()) / INITIAL_PANELS as f64;
    let mut out = Quadrature {
        value: 0.0,
        error_estimate: 0.0,
        converged: true,
    };
    for (x0, x2, f0, f1, f2, s) in panels {
        recurse(&f, x0, x2, f0, f1, f2, s, tol, max_depth, &mut out);
    }
    out
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || !delta.is_finite() {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        return;
    }
    if depth == 0 || m <= a.min(b) || m >= a.max(b) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        out.converged = false;
        return;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}
