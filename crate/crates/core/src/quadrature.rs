//! Gauss–Legendre rules used by the kernel oracle, the angular ACF and the
//! spectral-factor normalisation.

use std::num::NonZeroUsize;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n).expect("a Gauss–Legendre rule needs at least one node");
        let (nodes, weights) = gauss_quad::GaussLegendre::new(n).into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(node, weight)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            out.extend(self.mapped(lo, lo + h));
        }
        out
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        self.composite(a, b, panels).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}
