use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let order = NonZeroUsize::new(order.max(1)).unwrap();
    let rule = GaussLegendre::new(order);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// One axis of a tensor grid: composite Gauss–Legendre over equal panels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(lo: f64, hi: f64, order: usize, panels: usize) -> AxisRule {
        let (x, w) = gauss_legendre(order);
        let panels = panels.max(1);
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let half = 0.5 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + half * (xi + 1.0));
                weights.push(half * wi);
            }
        }
        AxisRule { nodes, weights }
    }
}

/// Tensor-product Gauss–Legendre grid over an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub domain: Vec<(f64, f64)>,
    pub axes: Vec<AxisRule>,
}

impl QuadratureGrid {
    /// `order` points per axis, one panel.
    pub fn new(domain: &[(f64, f64)], order: usize) -> Result<QuadratureGrid> {
        QuadratureGrid::composite(domain, &vec![order; domain.len()], &vec![1; domain.len()])
    }

    pub fn composite(domain: &[(f64, f64)], orders: &[usize], panels: &[usize]) -> Result<QuadratureGrid> {
        if orders.len() != domain.len() || panels.len() != domain.len() {
            return Err(Error::Config("quadrature: per-axis settings do not match dimension".into()));
        }
        for &(a, b) in domain {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::IntegrationDomain(format!("degenerate box edge ({a}, {b})")));
            }
        }
        if orders.contains(&0) {
            return Err(Error::Config("quadrature: order must be positive".into()));
        }
        let axes = domain
            .iter()
            .zip(orders.iter().zip(panels))
            .map(|(&(a, b), (&o, &p))| AxisRule::new(a, b, o, p))
            .collect();
        Ok(QuadratureGrid {
            domain: domain.to_vec(),
            axes,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.nodes.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node and weight number `idx` in row-major order (last axis fastest).
    pub fn node(&self, mut idx: usize) -> (Vec<f64>, f64) {
        let mut x = vec![0.0; self.dim()];
        let mut w = 1.0;
        for (d, axis) in self.axes.iter().enumerate().rev() {
            let m = axis.nodes.len();
            let i = idx % m;
            idx /= m;
            x[d] = axis.nodes[i];
            w *= axis.weights[i];
        }
        (x, w)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn box_volume(&self) -> f64 {
        self.domain.iter().map(|(a, b)| b - a).product()
    }

    /// Weighted sum of `f` over the nodes; values are computed in parallel
    /// and reduced with a fixed pairwise tree, so the result does not depend
    /// on the number of worker threads.
    pub fn integrate<T, F>(&self, f: F) -> Result<T>
    where
        T: Summable,
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        let samples: Vec<T> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let (x, w) = self.node(i);
                f(&x).weighted(w)
            })
            .collect();
        if let Some(bad) = samples.iter().position(|s| !s.is_finite_sample()) {
            let (x, _) = self.node(bad);
            return Err(Error::IntegrationDomain(format!("non-finite integrand at {x:?}")));
        }
        pairwise_sum(&samples).ok_or_else(|| Error::IntegrationDomain("empty quadrature grid".into()))
    }
}

/// Values that can be accumulated by the quadrature reduction.
pub trait Summable: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn weighted(self, w: f64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn is_finite_sample(&self) -> bool;
}

impl Summable for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn weighted(self, w: f64) -> f64 {
        self * w
    }
    fn plus(&self, other: &f64) -> f64 {
        self + other
    }
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
}

impl Summable for num_complex::Complex64 {
    fn zero_like(&self) -> Self {
        num_complex::Complex64::new(0.0, 0.0)
    }
    fn weighted(self, w: f64) -> Self {
        self * w
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Summable for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn weighted(self, w: f64) -> Self {
        self.into_iter().map(|x| x * w).collect()
    }
    fn plus(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn is_finite_sample(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl Summable for Vec<num_complex::Complex64> {
    fn zero_like(&self) -> Self {
        vec![num_complex::Complex64::new(0.0, 0.0); self.len()]
    }
    fn weighted(self, w: f64) -> Self {
        self.into_iter().map(|x| x * w).collect()
    }
    fn plus(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn is_finite_sample(&self) -> bool {
        self.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// Fixed-shape pairwise reduction; `None` for an empty slice.
pub fn pairwise_sum<T: Summable>(values: &[T]) -> Option<T> {
    fn tree<T: Summable>(v: &[T]) -> T {
        if v.len() == 1 {
            return v[0].clone();
        }
        let mid = v.len() / 2;
        tree(&v[..mid]).plus(&tree(&v[mid..]))
    }
    (!values.is_empty()).then(|| tree(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_box_volume() {
        let g = QuadratureGrid::new(&[(0.0, std::f64::consts::PI), (-1.0, 2.5)], 24).unwrap();
        let total: f64 = g.nodes().map(|(_, w)| w).sum();
        assert!((total - g.box_volume()).abs() < 1e-12);
        assert_eq!(g.len(), 24 * 24);
    }

    #[test]
    fn polynomial_exactness() {
        let g = QuadratureGrid::new(&[(0.0, 1.0)], 5).unwrap();
        let v = g.integrate(|x| x[0].powi(9)).unwrap();
        assert!((v - 0.1).abs() < 1e-14);
    }

    #[test]
    fn composite_panels_agree() {
        let a = QuadratureGrid::new(&[(0.0, 3.0)], 30).unwrap();
        let b = QuadratureGrid::composite(&[(0.0, 3.0)], &[10], &[6]).unwrap();
        let fa = a.integrate(|x| (5.0 * x[0]).sin()).unwrap();
        let fb = b.integrate(|x| (5.0 * x[0]).sin()).unwrap();
        assert!((fa - fb).abs() < 1e-12);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let g = QuadratureGrid::new(&[(0.0, 1.0)], 4).unwrap();
        assert!(matches!(g.integrate(|_| f64::NAN), Err(Error::IntegrationDomain(_))));
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(QuadratureGrid::new(&[(1.0, 1.0)], 4).is_err());
    }
}
