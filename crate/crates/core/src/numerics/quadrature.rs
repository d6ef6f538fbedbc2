//! Composite Gauss-Legendre rules over a truncated output window.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes per Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 8;

/// How integrals over the output alphabet are discretized.
///
/// The window is `[min x_i - r*sigma, max x_i + r*sigma]` with
/// `r = truncation_radius`, split into equal panels of [`PANEL_ORDER`]
/// Gauss-Legendre nodes. `node_count` is rounded up to a whole number of
/// panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureScheme<T> {
    node_count: usize,
    truncation_radius: T,
}

impl<T: Real> Default for QuadratureScheme<T> {
    fn default() -> Self {
        Self {
            node_count: 2001,
            truncation_radius: T::lit(10.0),
        }
    }
}

impl<T: Real> QuadratureScheme<T> {
    pub fn new(node_count: usize, truncation_radius: T) -> Result<Self, T> {
        if node_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "node_count must be at least 2, got {node_count}"
            )));
        }
        if !(truncation_radius >= T::lit(6.0)) || !truncation_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "truncation_radius must be at least 6, got {truncation_radius:?}"
            )));
        }
        Ok(Self {
            node_count,
            truncation_radius,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn truncation_radius(&self) -> T {
        self.truncation_radius
    }

    pub fn panels(&self) -> usize {
        self.node_count.div_ceil(PANEL_ORDER)
    }

    /// Window covering `[lo, hi]` widened by `truncation_radius * sigma`.
    pub fn window(&self, lo: T, hi: T, sigma: T) -> (T, T) {
        let pad = self.truncation_radius * sigma;
        (lo - pad, hi + pad)
    }

    /// Composite rule on `[a, b]`.
    pub fn grid(&self, a: T, b: T) -> QuadratureGrid<T> {
        QuadratureGrid::composite(a, b, self.panels())
    }
}

/// Nodes (increasing) and weights of a concrete rule.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn composite(a: T, b: T, panels: usize) -> Self {
        let (gx, gw) = legendre_rule();
        let panels = panels.max(1);
        let h = (b - a) / T::from_usize(panels).unwrap();
        let half = h / T::lit(2.0);
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for k in 0..panels {
            // Edges from `a + k*h` keep the grid symmetric for symmetric windows.
            let left = a + h * T::from_usize(k).unwrap();
            let mid = left + half;
            for (x, w) in gx.iter().zip(gw) {
                nodes.push(mid + half * T::lit(*x));
                weights.push(half * T::lit(*w));
            }
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index range of nodes inside `[lo, hi]`.
    pub fn range(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        let start = self.nodes.partition_point(|y| *y < lo);
        let end = self.nodes.partition_point(|y| *y <= hi);
        start..end.max(start)
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (y, w)| acc + *w * f(*y))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial.
fn legendre_rule() -> &'static ([f64; PANEL_ORDER], [f64; PANEL_ORDER]) {
    static RULE: OnceLock<([f64; PANEL_ORDER], [f64; PANEL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_ORDER;
        let mut x = [0.0; PANEL_ORDER];
        let mut w = [0.0; PANEL_ORDER];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        (x, w)
    })
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
