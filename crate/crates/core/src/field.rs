//! Fields over charts that report Taylor jets of their coefficients.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{Blades, Variance};
use crate::jet::Jet;

/// A point in a specific chart of a geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: usize,
    pub x: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: usize, x: Vec<f64>) -> ChartPoint {
        ChartPoint { chart, x }
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart {} @ {:?}", self.chart, self.x)
    }
}

/// Layout of the components reported by a [`JetField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Scalar,
    /// `2^n` blade coefficients indexed by mask.
    Blades(Variance),
    /// Full `n × n` matrix, row major.
    Tensor2,
    Components(usize),
}

impl Shape {
    pub fn len(&self, n: usize) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Blades(_) => 1 << n,
            Shape::Tensor2 => n * n,
            Shape::Components(m) => *m,
        }
    }
}

type Evaluator = Arc<dyn Fn(usize, &[f64], usize) -> Vec<Jet> + Send + Sync>;

/// A field whose evaluator returns the Taylor expansion of every component
/// at a point of a chart, truncated at a requested order.
#[derive(Clone)]
pub struct JetField {
    n: usize,
    shape: Shape,
    eval: Evaluator,
}

impl fmt::Debug for JetField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetField").field("n", &self.n).field("shape", &self.shape).finish()
    }
}

impl JetField {
    /// Field given by one closed-form formula per chart; each closure receives
    /// the coordinate jets and returns the component jets.
    pub fn from_charts<F>(n: usize, shape: Shape, per_chart: Vec<F>) -> JetField
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        let per_chart: Vec<F> = per_chart;
        let charts = Arc::new(per_chart);
        JetField {
            n,
            shape,
            eval: Arc::new(move |chart, x, order| {
                let vars = Jet::variables(x, order);
                let f = charts
                    .get(chart)
                    .unwrap_or_else(|| panic!("field has no formula for chart {chart}"));
                f(&vars)
            }),
        }
    }

    /// Same formula on every chart.
    pub fn uniform<F>(n: usize, shape: Shape, f: F) -> JetField
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        JetField {
            n,
            shape,
            eval: Arc::new(move |_, x, order| f(&Jet::variables(x, order))),
        }
    }

    /// Field defined directly by an evaluator `(chart, point, order) -> jets`.
    pub fn from_evaluator<F>(n: usize, shape: Shape, f: F) -> JetField
    where
        F: Fn(usize, &[f64], usize) -> Vec<Jet> + Send + Sync + 'static,
    {
        JetField {
            n,
            shape,
            eval: Arc::new(f),
        }
    }

    pub fn constant(n: usize, shape: Shape, values: Vec<f64>) -> JetField {
        JetField::uniform(n, shape, move |v| values.iter().map(|&c| v[0].constant_like(c)).collect())
    }

    pub fn zero(n: usize, shape: Shape) -> JetField {
        JetField::constant(n, shape, vec![0.0; shape.len(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn variance(&self) -> Option<Variance> {
        match self.shape {
            Shape::Blades(v) => Some(v),
            _ => None,
        }
    }

    pub fn taylor(&self, p: &ChartPoint, order: usize) -> Vec<Jet> {
        let out = (self.eval)(p.chart, &p.x, order);
        debug_assert_eq!(out.len(), self.shape.len(self.n));
        out
    }

    pub fn values(&self, p: &ChartPoint) -> Vec<f64> {
        self.taylor(p, 0).iter().map(Jet::value).collect()
    }

    pub fn value(&self, p: &ChartPoint) -> f64 {
        self.taylor(p, 0)[0].value()
    }

    pub fn gradients(&self, p: &ChartPoint) -> Vec<Vec<f64>> {
        self.taylor(p, 1).iter().map(Jet::gradient).collect()
    }

    pub fn hessians(&self, p: &ChartPoint) -> Vec<Vec<Vec<f64>>> {
        self.taylor(p, 2).iter().map(Jet::hessian).collect()
    }

    /// Blade jets; scalar fields are promoted to degree-0 blades.
    pub fn blades_taylor(&self, p: &ChartPoint, order: usize) -> Blades<Jet> {
        let comps = self.taylor(p, order);
        match self.shape {
            Shape::Blades(v) => Blades {
                n: self.n,
                variance: v,
                c: comps,
            },
            Shape::Scalar => Blades::scalar(self.n, Variance::Vector, comps.into_iter().next().unwrap()),
            _ => panic!("blades_taylor on a non-blade field"),
        }
    }

    pub fn blades_value(&self, p: &ChartPoint) -> Blades<f64> {
        self.blades_taylor(p, 0).values()
    }

    /// Reinterpret a scalar field as a degree-0 blade field of the given variance.
    pub fn as_blades(&self, variance: Variance) -> JetField {
        match self.shape {
            Shape::Blades(_) => self.clone(),
            Shape::Scalar => {
                let inner = self.clone();
                let n = self.n;
                JetField::from_evaluator(n, Shape::Blades(variance), move |chart, x, order| {
                    let s = (inner.eval)(chart, x, order).into_iter().next().unwrap();
                    let mut out = vec![s.zero_like(); 1 << n];
                    out[0] = s;
                    out
                })
            }
            _ => panic!("as_blades on a non-scalar, non-blade field"),
        }
    }

    /// Pointwise map over blade jets.
    pub fn map_blades<F>(&self, variance: Variance, f: F) -> JetField
    where
        F: Fn(Blades<Jet>) -> Blades<Jet> + Send + Sync + 'static,
    {
        let inner = self.clone();
        JetField::from_evaluator(self.n, Shape::Blades(variance), move |chart, x, order| {
            f(inner.blades_taylor(&ChartPoint::new(chart, x.to_vec()), order)).c
        })
    }

    /// Pointwise combination of two blade fields.
    pub fn zip_blades<F>(&self, other: &JetField, variance: Variance, f: F) -> JetField
    where
        F: Fn(Blades<Jet>, Blades<Jet>) -> Blades<Jet> + Send + Sync + 'static,
    {
        let a = self.clone();
        let b = other.clone();
        JetField::from_evaluator(self.n, Shape::Blades(variance), move |chart, x, order| {
            let p = ChartPoint::new(chart, x.to_vec());
            f(a.blades_taylor(&p, order), b.blades_taylor(&p, order)).c
        })
    }

    pub fn add(&self, other: &JetField) -> JetField {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &JetField) -> JetField {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, s: f64) -> JetField {
        let inner = self.clone();
        JetField::from_evaluator(self.n, self.shape, move |chart, x, order| {
            (inner.eval)(chart, x, order).iter().map(|j| j.scale(s)).collect()
        })
    }

    /// `a·self + b·other` componentwise (shapes must agree).
    pub fn lin_comb(&self, a: f64, other: &JetField, b: f64) -> JetField {
        assert_eq!(self.shape, other.shape, "lin_comb: shape mismatch");
        let f = self.clone();
        let g = other.clone();
        JetField::from_evaluator(self.n, self.shape, move |chart, x, order| {
            let u = (f.eval)(chart, x, order);
            let v = (g.eval)(chart, x, order);
            u.into_iter()
                .zip(v.iter())
                .map(|(mut p, q)| {
                    p = p.scale(a);
                    p.add_scaled(q, b);
                    p
                })
                .collect()
        })
    }

    /// Multiply every component by a scalar field.
    pub fn mul_scalar_field(&self, s: &JetField) -> JetField {
        assert_eq!(s.shape, Shape::Scalar);
        let f = self.clone();
        let s = s.clone();
        JetField::from_evaluator(self.n, self.shape, move |chart, x, order| {
            let w = (s.eval)(chart, x, order).into_iter().next().unwrap();
            (f.eval)(chart, x, order).iter().map(|j| j.mul_jet(&w)).collect()
        })
    }

    /// Check reported jets against central finite differences of the values.
    ///
    /// Returns the largest relative discrepancy over first and second
    /// derivatives, or an error if it exceeds `tolerance`. The reported
    /// Hessians must also be symmetric to `1e-9`.
    pub fn validate_jets(&self, p: &ChartPoint, step: f64, tolerance: f64) -> Result<f64> {
        let jets = self.taylor(p, 2);
        let val = |q: &[f64]| self.values(&ChartPoint::new(p.chart, q.to_vec()));
        let mut worst: f64 = 0.0;
        for (c, jet) in jets.iter().enumerate() {
            let g = jet.gradient();
            let h = jet.hessian();
            let scale = 1.0 + jet.value().abs();
            for i in 0..self.n {
                for j in 0..self.n {
                    if (h[i][j] - h[j][i]).abs() > 1e-9 * scale {
                        return Err(Error::InvalidOperand(format!("asymmetric Hessian in component {c}")));
                    }
                }
            }
            for i in 0..self.n {
                let mut xp = p.x.clone();
                let mut xm = p.x.clone();
                xp[i] += step;
                xm[i] -= step;
                let fp = val(&xp)[c];
                let fm = val(&xm)[c];
                let fd1 = (fp - fm) / (2.0 * step);
                let gscale = 1.0 + g[i].abs();
                worst = worst.max((fd1 - g[i]).abs() / gscale);
                let fdg: Vec<f64> = {
                    let gp = self.gradients(&ChartPoint::new(p.chart, xp.clone()))[c].clone();
                    let gm = self.gradients(&ChartPoint::new(p.chart, xm.clone()))[c].clone();
                    gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
                };
                for j in 0..self.n {
                    worst = worst.max((fdg[j] - h[i][j]).abs() / (1.0 + h[i][j].abs()));
                }
            }
        }
        if worst > tolerance {
            return Err(Error::InvalidOperand(format!(
                "jets inconsistent with finite differences: {worst:e} > {tolerance:e}"
            )));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_field_passes_validator() {
        let f = JetField::uniform(2, Shape::Components(2), |v| {
            vec![(&v[0] * &v[1]).sin(), v[0].exp().mul_jet(&v[1].cos())]
        });
        let worst = f.validate_jets(&ChartPoint::new(0, vec![0.3, 0.8]), 1e-4, 1e-5).unwrap();
        assert!(worst < 1e-5);
    }

    #[test]
    fn inconsistent_jets_are_rejected() {
        // value says x^2 but reports derivatives of x^3
        let bad = JetField::from_evaluator(1, Shape::Scalar, |_, x, order| {
            let v = Jet::variables(x, order);
            let mut j = v[0].powi(3);
            let val = x[0] * x[0];
            j = j.add_scalar(val - j.value());
            vec![j]
        });
        assert!(bad.validate_jets(&ChartPoint::new(0, vec![0.7]), 1e-4, 1e-5).is_err());
    }
}
