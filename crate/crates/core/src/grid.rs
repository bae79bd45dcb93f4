//! Uniform grids on [-1, 1], finite differences and interpolation.

use crate::error::{Error, Result};

/// `n` equally spaced nodes from -1 to 1 inclusive.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two nodes");
    let h = 2.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { 1.0 } else { -1.0 + h * i as f64 })
        .collect()
}

pub fn spacing(nodes: &[f64]) -> f64 {
    (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64
}

/// Second-order derivative on a uniform grid: central inside, three-point
/// one-sided at both ends.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "derivative needs at least three nodes");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Index `i` with `nodes[i] <= x <= nodes[i + 1]`, clamped to the grid.
fn interval_index(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    let h = spacing(nodes);
    let raw = ((x - nodes[0]) / h).floor();
    let mut i = if raw.is_nan() || raw < 0.0 { 0 } else { raw as usize };
    i = i.min(n - 2);
    // guard against rounding in the floor
    while i > 0 && x < nodes[i] {
        i -= 1;
    }
    while i + 2 < n && x > nodes[i + 1] {
        i += 1;
    }
    i
}

/// Local cubic Lagrange interpolation through the four nodes around `x`.
pub fn interpolate_cubic(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if n < 4 {
        let i = interval_index(nodes, x);
        let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
        return values[i] + t * (values[i + 1] - values[i]);
    }
    let i = interval_index(nodes, x);
    let start = i.saturating_sub(1).min(n - 4);
    let xs = &nodes[start..start + 4];
    let ys = &values[start..start + 4];
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += w * ys[j];
    }
    acc
}

/// Resamples a grid function onto new nodes by cubic interpolation.
pub fn resample(nodes: &[f64], values: &[f64], target: &[f64]) -> Vec<f64> {
    target
        .iter()
        .map(|&x| interpolate_cubic(nodes, values, x))
        .collect()
}

/// Piecewise-quadratic (Simpson-panel) interpolant of grid data, integrated
/// exactly over sub-windows.
///
/// Panels are node triples `(2m, 2m+1, 2m+2)`; with an even node count the
/// last interval reuses the final three nodes.
#[derive(Debug, Clone)]
pub struct SimpsonProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    h: f64,
    /// `prefix[i]` is the integral from `nodes[0]` to `nodes[i]`.
    prefix: Vec<f64>,
}

impl SimpsonProfile {
    pub fn new(nodes: &[f64], values: &[f64]) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Length {
                what: "profile values",
                got: values.len(),
                expected: nodes.len(),
            });
        }
        if nodes.len() < 3 {
            return Err(Error::Length {
                what: "profile nodes",
                got: nodes.len(),
                expected: 3,
            });
        }
        let h = spacing(nodes);
        let mut p = SimpsonProfile {
            nodes: nodes.to_vec(),
            values: values.to_vec(),
            h,
            prefix: vec![0.0; nodes.len()],
        };
        for i in 0..nodes.len() - 1 {
            let (ta, tb) = p.local_span(i);
            p.prefix[i + 1] = p.prefix[i] + p.panel_integral(i, ta, tb);
        }
        Ok(p)
    }

    fn panel_start(&self, interval: usize) -> usize {
        (2 * (interval / 2)).min(self.nodes.len() - 3)
    }

    /// Local coordinates of interval `i` relative to its panel centre.
    fn local_span(&self, i: usize) -> (f64, f64) {
        let j = self.panel_start(i);
        let ta = (i as f64) - (j as f64 + 1.0);
        (ta, ta + 1.0)
    }

    fn panel_integral(&self, interval: usize, ta: f64, tb: f64) -> f64 {
        let j = self.panel_start(interval);
        let (y0, y1, y2) = (self.values[j], self.values[j + 1], self.values[j + 2]);
        let b1 = 0.25 * (y2 - y0);
        let b2 = (y0 - 2.0 * y1 + y2) / 6.0;
        let anti = |t: f64| t * (y1 + t * (b1 + t * b2));
        self.h * (anti(tb) - anti(ta))
    }

    /// Interpolated value at `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let i = interval_index(&self.nodes, x);
        let j = self.panel_start(i);
        let t = (x - self.nodes[j + 1]) / self.h;
        let (y0, y1, y2) = (self.values[j], self.values[j + 1], self.values[j + 2]);
        y1 + 0.5 * (y2 - y0) * t + 0.5 * (y0 - 2.0 * y1 + y2) * t * t
    }

    /// Integral from the left end of the grid to `x`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let i = interval_index(&self.nodes, x);
        let j = self.panel_start(i);
        let (ta, _) = self.local_span(i);
        let tx = (x - self.nodes[j + 1]) / self.h;
        self.prefix[i] + self.panel_integral(i, ta, tx)
    }

    /// Integral over `[x1, x2]`.
    pub fn integral(&self, x1: f64, x2: f64) -> f64 {
        self.antiderivative(x2) - self.antiderivative(x1)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }
}
