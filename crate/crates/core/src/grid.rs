//! Gauss–Legendre confinement grids and uniform sampling grids.

use alloc::vec::Vec;

use crate::quad::gauss_legendre;
use crate::{Error, Result};

/// `2n+1` Gauss–Legendre nodes and weights on `[-l, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    half_length: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// The `(2·n_half + 1)`-point rule mapped to `[-l, l]`.
    pub fn gauss_legendre(n_half: usize, l: f64) -> Result<Self> {
        if n_half < 1 {
            return Err(Error::domain("n_half", n_half as f64, "n_half >= 1"));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::domain("half_length", l, "finite and > 0"));
        }
        let (x, w) = gauss_legendre(2 * n_half + 1)?;
        Ok(QuadratureGrid {
            half_length: l,
            nodes: x.iter().map(|v| v * l).collect(),
            weights: w.iter().map(|v| v * l).collect(),
        })
    }

    /// Build from explicit nodes and weights (used for tests and custom rules).
    pub fn from_parts(half_length: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Grid(
                "nodes and weights must be non-empty and equally long".into(),
            ));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Grid("weights must be positive".into()));
        }
        if nodes[0] < -half_length || nodes[nodes.len() - 1] > half_length {
            return Err(Error::Grid("nodes must lie inside [-l, l]".into()));
        }
        Ok(QuadratureGrid {
            half_length,
            nodes,
            weights,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node at exactly `q = 0`, if there is one.
    pub fn center_index(&self) -> Option<usize> {
        let n = self.len();
        if n % 2 == 1 && self.nodes[n / 2] == 0.0 {
            Some(n / 2)
        } else {
            None
        }
    }

    /// True when nodes and weights are exact mirror images about 0.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|k| self.nodes[k] == -self.nodes[n - 1 - k] && self.weights[k] == self.weights[n - 1 - k])
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `len` points `start, start + step, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, stop: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::domain("points", len as f64, "at least 2"));
        }
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(Error::domain("grid stop", stop, "finite and > start"));
        }
        Ok(UniformGrid {
            start,
            step: (stop - start) / (len - 1) as f64,
            len,
        })
    }

    /// `len` points symmetric about 0 on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, len: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::domain("half_width", half_width, "> 0"));
        }
        UniformGrid::new(-half_width, half_width, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        // symmetric grids get exact mirror points: x_i = -x_{n-1-i}
        let n1 = (self.len - 1) as f64;
        let i = i as f64;
        if self.is_symmetric() {
            let half = 0.5 * n1;
            (i - half) * self.step
        } else {
            self.start + i * self.step
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let stop = self.start + (self.len - 1) as f64 * self.step;
        (self.start + stop).abs() <= 1e-12 * stop.abs().max(self.start.abs())
    }

    /// Largest |x| on the grid.
    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.stop().abs())
    }

    /// Trapezoid weight of point `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len {
            0.5 * self.step
        } else {
            self.step
        }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_grid() {
        let g = QuadratureGrid::gauss_legendre(1, 1.0).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.center_index(), Some(1));
        assert!(g.is_mirror_symmetric());
    }

    #[test]
    fn uniform_symmetric_points_mirror() {
        let g = UniformGrid::symmetric(3.7, 1001).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.point(i), -g.point(g.len() - 1 - i));
        }
        assert_eq!(g.point(500), 0.0);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(QuadratureGrid::gauss_legendre(0, 1.0).is_err());
        assert!(QuadratureGrid::gauss_legendre(3, -1.0).is_err());
        assert!(UniformGrid::new(1.0, 0.0, 10).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
    }
}
