use crate::quad::GaussLegendre;
use std::f64::consts::{PI, TAU};

/// Gauss-Legendre nodes in `cos θ` times equispaced longitudes, exact for
/// spherical polynomials of degree `≤ degree`. Samples are laid out θ-major.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    degree: usize,
    /// `cos θ_i`, decreasing (θ increasing).
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    theta: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl QuadratureGrid {
    pub fn new(degree: usize) -> Self {
        Self::from_rule(degree, GaussLegendre::new(degree / 2 + 1))
    }

    /// Builds the grid from a precomputed `⌈(degree+1)/2⌉`-point rule.
    pub fn from_rule(degree: usize, rule: GaussLegendre) -> Self {
        assert_eq!(rule.len(), degree / 2 + 1, "rule size does not match degree");
        let cos_theta = rule.nodes;
        let sin_theta = cos_theta.iter().map(|&c| (1.0 - c * c).max(0.0).sqrt()).collect::<Vec<_>>();
        let theta = cos_theta.iter().zip(&sin_theta).map(|(&c, &s)| s.atan2(c)).collect();
        Self { degree, cos_theta, sin_theta, theta, weights: rule.weights, n_phi: degree + 1 }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn cos_theta(&self, i: usize) -> f64 {
        self.cos_theta[i]
    }

    pub fn sin_theta(&self, i: usize) -> f64 {
        self.sin_theta[i]
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    /// Gauss weight of row `i` (in `cos θ`).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Full surface weight of a sample in row `i`.
    pub fn area_weight(&self, i: usize) -> f64 {
        self.weights[i] * 2.0 * PI / self.n_phi as f64
    }

    /// `(θ, φ)` of every sample in storage order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta() {
            for j in 0..self.n_phi {
                out.push((self.theta[i], self.phi(j)));
            }
        }
        out
    }

    /// Evaluates `f(θ, φ)` on the grid.
    pub fn sample<T: Send, F: Fn(f64, f64) -> T + Sync + Send>(&self, f: F) -> Vec<T> {
        let n_phi = self.n_phi;
        crate::par::map_range(self.len(), |idx| {
            let (i, j) = (idx / n_phi, idx % n_phi);
            f(self.theta[i], self.phi(j))
        })
    }

    /// `∫_{S²} f dω` from grid samples.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples
            .chunks(self.n_phi)
            .enumerate()
            .map(|(i, row)| self.area_weight(i) * row.iter().sum::<f64>())
            .sum()
    }
}
