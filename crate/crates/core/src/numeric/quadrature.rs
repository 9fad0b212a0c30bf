use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::{Axis, NumericError};

pub const REFERENCE_NODES: usize = 48;
pub const MIN_NODES: usize = 4;

/// Node counts per axis. Periodic axes use the trapezoid rule, the others
/// Gauss–Legendre.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    nodes: Vec<usize>,
}

/// Nodes and weights along one axis.
#[derive(Clone, Debug)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureSpec {
    pub fn uniform(dimension: usize, n: usize) -> Result<Self, NumericError> {
        QuadratureSpec::per_axis(vec![n; dimension])
    }

    pub fn reference(dimension: usize) -> Self {
        QuadratureSpec { nodes: vec![REFERENCE_NODES; dimension] }
    }

    pub fn per_axis(nodes: Vec<usize>) -> Result<Self, NumericError> {
        if let Some(&n) = nodes.iter().find(|&&n| n < MIN_NODES) {
            return Err(NumericError::Quadrature(format!("need at least {MIN_NODES} nodes per axis, got {n}")));
        }
        Ok(QuadratureSpec { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Every node count doubled.
    pub fn refined(&self) -> Self {
        QuadratureSpec { nodes: self.nodes.iter().map(|n| 2 * n).collect() }
    }

    pub fn rules(&self, axes: &[Axis]) -> Result<Vec<AxisRule>, NumericError> {
        if axes.len() != self.nodes.len() {
            return Err(NumericError::Quadrature(format!(
                "quadrature has {} axes, manifold has {}",
                self.nodes.len(),
                axes.len()
            )));
        }
        Ok(axes.iter().zip(&self.nodes).map(|(a, &n)| axis_rule(a, n)).collect())
    }
}

fn axis_rule(axis: &Axis, n: usize) -> AxisRule {
    let len = axis.hi - axis.lo;
    if axis.periodic {
        let h = len / n as f64;
        AxisRule { nodes: (0..n).map(|k| axis.lo + h * k as f64).collect(), weights: vec![h; n] }
    } else {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("node count checked"));
        let (nodes, weights) =
            rule.as_node_weight_pairs().iter().map(|&(x, w)| (axis.lo + 0.5 * len * (x + 1.0), 0.5 * len * w)).unzip();
        AxisRule { nodes, weights }
    }
}
