//! Charts, metrics, Levi-Civita data, volume forms and circle actions.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{pfaffian, Basis, Blades, GradedCoefficients, Variance};
use crate::field::{ChartPoint, JetField, Shape};
use crate::jet::Jet;
use crate::quadrature::QuadratureGrid;

/// Tolerance of the Killing check `Lie_X g = 0`.
pub const KILLING_TOLERANCE: f64 = 1e-8;
/// Largest admissible `g(X, X)` on a declared fixed locus.
pub const FIXED_LOCUS_TOLERANCE: f64 = 1e-12;
/// Smallest admissible normal-Hessian determinant on a fixed locus.
pub const MORSE_BOTT_TOLERANCE: f64 = 1e-10;
/// Tolerance of the equivariance check for maps `F`.
pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-8;
/// Default Gauss–Legendre points per axis.
pub const DEFAULT_QUADRATURE_ORDER: usize = 24;

type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JetMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// A coordinate chart: an open axis-aligned box.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub domain: Vec<(f64, f64)>,
    /// Per axis, whether the volume density vanishes on the lower and upper
    /// face (coordinate singularities such as the poles of a sphere).
    pub boundary_measure_vanishes: Vec<(bool, bool)>,
    /// `+1` if the coordinate frame is positively oriented.
    pub orientation: f64,
    ambient: Option<PointMap>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl Chart {
    pub fn new(name: impl Into<String>, domain: Vec<(f64, f64)>) -> Result<Chart> {
        for &(a, b) in &domain {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Config(format!("chart box edge ({a}, {b}) is degenerate")));
            }
        }
        let n = domain.len();
        Ok(Chart {
            name: name.into(),
            domain,
            boundary_measure_vanishes: vec![(false, false); n],
            orientation: 1.0,
            ambient: None,
        })
    }

    pub fn with_orientation(mut self, sign: f64) -> Chart {
        self.orientation = sign.signum();
        self
    }

    pub fn with_vanishing_faces(mut self, faces: Vec<(bool, bool)>) -> Chart {
        self.boundary_measure_vanishes = faces;
        self
    }

    /// Map to a common ambient space, used to identify points seen from
    /// different charts.
    pub fn with_ambient<F>(mut self, f: F) -> Chart
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.ambient = Some(Arc::new(f));
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, (a, b))| *v > *a && *v < *b)
    }

    pub fn ambient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.ambient.as_ref().map(|f| f(x))
    }
}

/// A parametrized piece of a positive-dimensional fixed locus.
#[derive(Clone)]
pub struct LocusPatch {
    pub name: String,
    pub chart: usize,
    /// Parameter box.
    pub domain: Vec<(f64, f64)>,
    param: JetMap,
}

impl fmt::Debug for LocusPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocusPatch")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .field("domain", &self.domain)
            .finish()
    }
}

impl LocusPatch {
    /// `param` maps parameter jets to chart-coordinate jets.
    pub fn new<F>(name: impl Into<String>, chart: usize, domain: Vec<(f64, f64)>, param: F) -> LocusPatch
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        LocusPatch {
            name: name.into(),
            chart,
            domain,
            param: Arc::new(param),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    /// Point and tangent vectors (chart components) at parameter `u`.
    pub fn sample(&self, u: &[f64]) -> LocusSample {
        let jets = (self.param)(&Jet::variables(u, 1));
        let point = ChartPoint::new(self.chart, jets.iter().map(Jet::value).collect());
        let tangents = (0..self.dim())
            .map(|a| jets.iter().map(|j| j.gradient()[a]).collect())
            .collect();
        LocusSample { point, tangents }
    }
}

/// A point on a fixed locus together with a basis of its tangent space.
#[derive(Clone, Debug)]
pub struct LocusSample {
    pub point: ChartPoint,
    pub tangents: Vec<Vec<f64>>,
}

/// Connected piece of the zero set of the action field.
#[derive(Clone, Debug)]
pub enum FixedLocus {
    Point(ChartPoint),
    Patch(LocusPatch),
}

impl FixedLocus {
    pub fn dim(&self) -> usize {
        match self {
            FixedLocus::Point(_) => 0,
            FixedLocus::Patch(p) => p.dim(),
        }
    }

    pub fn is_isolated(&self) -> bool {
        matches!(self, FixedLocus::Point(_))
    }

    pub fn name(&self) -> String {
        match self {
            FixedLocus::Point(p) => format!("{p}"),
            FixedLocus::Patch(p) => p.name.clone(),
        }
    }

    /// Points used to check the locus: the point itself, or a small
    /// parameter grid on a patch.
    pub fn check_samples(&self) -> Vec<LocusSample> {
        match self {
            FixedLocus::Point(p) => vec![LocusSample {
                point: p.clone(),
                tangents: vec![],
            }],
            FixedLocus::Patch(patch) => QuadratureGrid::new(&patch.domain, 3)
                .map(|g| g.nodes().map(|(u, _)| patch.sample(&u)).collect())
                .unwrap_or_default(),
        }
    }
}

/// Fundamental vector field of a circle action with its declared fixed loci.
#[derive(Clone, Debug)]
pub struct CircleAction {
    /// Degree-1 vector blade field.
    pub field: JetField,
    pub fixed_loci: Vec<FixedLocus>,
}

/// Normal Hessian of a function along a critical locus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalHessian {
    /// Hessian in a g-orthonormal frame of the normal space.
    pub matrix: Vec<Vec<f64>>,
    pub det: f64,
    /// Positive minus negative eigenvalues.
    pub signature: i32,
}

/// Weights of the linearized action at an isolated fixed point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Weights {
    /// `|λ_1| ≥ … ≥ |λ_m|`.
    pub magnitudes: Vec<f64>,
    /// Signed product `λ_1⋯λ_m`: Pfaffian of `∇X^♭` in an oriented
    /// orthonormal frame divided by `2^m`.
    pub product: f64,
}

/// A zero of the action field found numerically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Zero {
    pub point: ChartPoint,
    pub ambient: Option<Vec<f64>>,
    pub isolated: bool,
}

/// Compact oriented Riemannian manifold with a circle action, described by
/// a small atlas. One chart carries the quadrature; the others provide
/// regular coordinates around fixed loci.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub name: String,
    n: usize,
    charts: Vec<Chart>,
    metric: JetField,
    volume: JetField,
    action: CircleAction,
    integration_chart: usize,
    quadrature_order: usize,
}

impl Geometry {
    /// Build and validate: the metric must be positive definite at every
    /// quadrature node, the action Killing, and every declared fixed locus a
    /// zero of the action with nondegenerate normal Hessian.
    pub fn new(
        name: impl Into<String>,
        charts: Vec<Chart>,
        metric: JetField,
        action: CircleAction,
        integration_chart: usize,
    ) -> Result<Geometry> {
        let n = metric.n();
        if charts.is_empty() || charts.iter().any(|c| c.dim() != n) {
            return Err(Error::Config("charts must be nonempty and match the metric dimension".into()));
        }
        if integration_chart >= charts.len() {
            return Err(Error::Config("integration chart index out of range".into()));
        }
        if metric.shape() != Shape::Tensor2 || action.field.shape() != Shape::Blades(Variance::Vector) {
            return Err(Error::Config("metric must be a 2-tensor field and the action a vector field".into()));
        }
        let volume = metric_volume_field(&metric, &charts);
        let geom = Geometry {
            name: name.into(),
            n,
            charts,
            metric,
            volume,
            action,
            integration_chart,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        };
        geom.validate()?;
        Ok(geom)
    }

    fn validate(&self) -> Result<()> {
        let grid = self.integration_grid()?;
        for (x, _) in grid.nodes() {
            self.metric_checked(&ChartPoint::new(self.integration_chart, x))?;
        }
        let mut worst: f64 = 0.0;
        for p in self.sample_points(4) {
            self.metric_checked(&p)?;
            worst = worst.max(self.killing_residual(&p));
        }
        if worst > KILLING_TOLERANCE {
            return Err(Error::NonKillingField {
                residual: worst,
                tolerance: KILLING_TOLERANCE,
            });
        }
        for locus in &self.action.fixed_loci {
            for s in locus.check_samples() {
                let norm = self.action_norm_sq_at(&s.point);
                if norm > FIXED_LOCUS_TOLERANCE {
                    return Err(Error::precondition(
                        "fixed-locus",
                        format!("g(X,X) = {norm:e} at declared fixed point {}", s.point),
                    ));
                }
                self.hessian_normal(&s)?;
            }
        }
        Ok(())
    }

    /// Replace the volume form by an explicit top-degree form field.
    pub fn with_volume(mut self, volume: JetField) -> Result<Geometry> {
        if volume.shape() != Shape::Blades(Variance::Form) || volume.n() != self.n {
            return Err(Error::Config("volume must be a form field of matching dimension".into()));
        }
        self.volume = volume;
        Ok(self)
    }

    pub fn with_quadrature_order(mut self, order: usize) -> Result<Geometry> {
        if order == 0 {
            return Err(Error::Config("quadrature order must be positive".into()));
        }
        self.quadrature_order = order;
        let grid = self.integration_grid()?;
        for (x, _) in grid.nodes() {
            self.metric_checked(&ChartPoint::new(self.integration_chart, x))?;
        }
        Ok(self)
    }

    /// Same geometry with a different action (validated again).
    pub fn with_action(&self, action: CircleAction) -> Result<Geometry> {
        let mut g = self.clone();
        g.action = action;
        g.validate()?;
        Ok(g)
    }

    /// Reverse the orientation of every chart; the volume form is kept.
    pub fn with_flipped_orientation(&self) -> Geometry {
        let mut g = self.clone();
        for c in &mut g.charts {
            c.orientation = -c.orientation;
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &Chart {
        &self.charts[i]
    }

    pub fn metric(&self) -> &JetField {
        &self.metric
    }

    pub fn volume(&self) -> &JetField {
        &self.volume
    }

    pub fn action(&self) -> &CircleAction {
        &self.action
    }

    pub fn action_field(&self) -> &JetField {
        &self.action.field
    }

    pub fn fixed_loci(&self) -> &[FixedLocus] {
        &self.action.fixed_loci
    }

    pub fn integration_chart(&self) -> usize {
        self.integration_chart
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn integration_grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::new(&self.charts[self.integration_chart].domain, self.quadrature_order)
    }

    /// Gauss–Legendre sample points, `per_axis` per axis, in every chart.
    pub fn sample_points(&self, per_axis: usize) -> Vec<ChartPoint> {
        let mut out = Vec::new();
        for (c, chart) in self.charts.iter().enumerate() {
            let grid = QuadratureGrid::new(&chart.domain, per_axis).expect("chart boxes are validated");
            out.extend(grid.nodes().map(|(x, _)| ChartPoint::new(c, x)));
        }
        out
    }

    pub fn metric_matrix(&self, p: &ChartPoint) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.metric.values(p))
    }

    fn metric_checked(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let g = self.metric_matrix(p);
        let det = g.determinant();
        if !(det > 1e-14) || g.clone().cholesky().is_none() {
            return Err(Error::DegenerateMetric {
                at: format!("{p}"),
                det,
            });
        }
        Ok(g)
    }

    pub fn metric_inverse(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let g = self.metric_checked(p)?;
        Ok(g.cholesky().expect("checked positive definite").inverse())
    }

    /// `Γ[λ][μ][ν]`.
    pub fn christoffel(&self, p: &ChartPoint) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.n;
        let ginv = self.metric_inverse(p)?;
        let dg = self.metric.gradients(p);
        // dg[(r*n + s)][m] = ∂_m g_{rs}
        let d = |r: usize, s: usize, m: usize| dg[r * n + s][m];
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        for l in 0..n {
            for mu in 0..n {
                for nu in mu..n {
                    let mut acc = 0.0;
                    for rho in 0..n {
                        acc += ginv[(l, rho)] * (d(rho, nu, mu) + d(rho, mu, nu) - d(mu, nu, rho));
                    }
                    gamma[l][mu][nu] = 0.5 * acc;
                    gamma[l][nu][mu] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    }

    /// The geometry's volume form at `p`.
    pub fn volume_form(&self, p: &ChartPoint) -> Result<GradedCoefficients> {
        self.metric_checked(p)?;
        Ok(self.volume.blades_value(p).to_graded(self.n))
    }

    /// Top coefficient of the volume form.
    pub fn volume_coefficient(&self, p: &ChartPoint) -> f64 {
        self.volume.taylor(p, 0)[(1usize << self.n) - 1].value()
    }

    /// Top coefficient of the oriented Riemannian volume form `σ√det g`.
    pub fn metric_volume_coefficient(&self, p: &ChartPoint) -> f64 {
        self.charts[p.chart].orientation * self.metric_matrix(p).determinant().max(0.0).sqrt()
    }

    /// Action field components `X^i` as jets.
    pub fn action_jets(&self, p: &ChartPoint, order: usize) -> Vec<Jet> {
        vector_components(&self.action.field.blades_taylor(p, order))
    }

    pub fn action_vector(&self, p: &ChartPoint) -> Vec<f64> {
        self.action_jets(p, 0).iter().map(Jet::value).collect()
    }

    /// Metric dual `X^♭` as a 1-form field.
    pub fn action_flat(&self) -> JetField {
        let metric = self.metric.clone();
        let x = self.action.field.clone();
        let n = self.n;
        JetField::from_evaluator(n, Shape::Blades(Variance::Form), move |chart, pt, order| {
            let p = ChartPoint::new(chart, pt.to_vec());
            let g = metric.taylor(&p, order);
            let xs = vector_components(&x.blades_taylor(&p, order));
            let mut out = vec![xs[0].zero_like(); 1 << n];
            for nu in 0..n {
                let mut acc = xs[0].zero_like();
                for mu in 0..n {
                    acc += &g[nu * n + mu].mul_jet(&xs[mu]);
                }
                out[1 << nu] = acc;
            }
            out
        })
    }

    /// `g(X, X)` as a scalar field.
    pub fn action_norm_sq(&self) -> JetField {
        let metric = self.metric.clone();
        let x = self.action.field.clone();
        let n = self.n;
        JetField::from_evaluator(n, Shape::Scalar, move |chart, pt, order| {
            let p = ChartPoint::new(chart, pt.to_vec());
            let g = metric.taylor(&p, order);
            let xs = vector_components(&x.blades_taylor(&p, order));
            let mut acc = xs[0].zero_like();
            for i in 0..n {
                for j in 0..n {
                    acc += &g[i * n + j].mul_jet(&xs[i]).mul_jet(&xs[j]);
                }
            }
            vec![acc]
        })
    }

    pub fn action_norm_sq_at(&self, p: &ChartPoint) -> f64 {
        let g = self.metric_matrix(p);
        let x = DVector::from_vec(self.action_vector(p));
        (x.transpose() * g * &x)[(0, 0)]
    }

    /// Max-norm of `Lie_X g` at `p`.
    pub fn killing_residual(&self, p: &ChartPoint) -> f64 {
        let n = self.n;
        let g = self.metric.taylor(p, 1);
        let x = self.action_jets(p, 1);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut r = 0.0;
                for k in 0..n {
                    r += x[k].value() * g[i * n + j].gradient()[k]
                        + g[k * n + j].value() * x[k].gradient()[i]
                        + g[i * n + k].value() * x[k].gradient()[j];
                }
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Full matrix `N_{μν} = ∂_μ X^♭_ν − Γ^λ_{μν} X^♭_λ`.
    pub fn covariant_derivative_flat(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let n = self.n;
        let flat = vector_components(&self.action_flat().blades_taylor(p, 1));
        let gamma = self.christoffel(p)?;
        let mut m = DMatrix::zeros(n, n);
        for mu in 0..n {
            for nu in 0..n {
                let mut v = flat[nu].gradient()[mu];
                for l in 0..n {
                    v -= gamma[l][mu][nu] * flat[l].value();
                }
                m[(mu, nu)] = v;
            }
        }
        Ok(m)
    }

    /// `∇X^♭` as a 2-form, coefficient `N_{μν} − N_{νμ}` on `dx^μ∧dx^ν`.
    pub fn nabla_covector(&self, p: &ChartPoint) -> Result<GradedCoefficients> {
        let m = self.nabla_matrix(p)?;
        let basis = Basis::get(self.n);
        let coeffs = basis
            .grade(2)
            .iter()
            .map(|&mask| {
                let i = mask.trailing_zeros() as usize;
                let j = 31 - mask.leading_zeros() as usize;
                m[(i, j)]
            })
            .collect();
        GradedCoefficients::new(self.n, 2, Variance::Form, coeffs)
    }

    /// Skew matrix `B = N − Nᵀ` of `∇X^♭`, after checking that the symmetric
    /// part of `N` vanishes.
    pub fn nabla_matrix(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let nm = self.covariant_derivative_flat(p)?;
        let sym = (&nm + nm.transpose()) * 0.5;
        let residual = sym.amax();
        if residual > KILLING_TOLERANCE {
            return Err(Error::NonKillingField {
                residual,
                tolerance: KILLING_TOLERANCE,
            });
        }
        Ok(&nm - nm.transpose())
    }

    /// g-orthonormal frame `[tangent | normal]` obtained by Gram–Schmidt on
    /// the given tangents followed by the coordinate axes. The full frame is
    /// positively oriented.
    pub fn orthonormal_frame(&self, p: &ChartPoint, tangents: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let n = self.n;
        let g = self.metric_checked(p)?;
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
        let candidates = tangents
            .iter()
            .map(|t| DVector::from_vec(t.clone()))
            .chain((0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })));
        for (idx, mut v) in candidates.enumerate() {
            if frame.len() == n {
                break;
            }
            let norm0 = ip(&v, &v).sqrt();
            for e in &frame {
                let c = ip(e, &v);
                v -= e * c;
            }
            let norm = ip(&v, &v).sqrt();
            if norm <= 1e-8 * norm0.max(1e-300) {
                if idx < tangents.len() {
                    return Err(Error::InvalidOperand("locus tangents are linearly dependent".into()));
                }
                continue;
            }
            frame.push(v / norm);
        }
        let mut e = DMatrix::from_columns(&frame);
        if e.determinant() * self.charts[p.chart].orientation < 0.0 {
            let last = n - 1;
            let col = -e.column(last);
            e.set_column(last, &col);
        }
        Ok(e)
    }

    /// Weights of the action at an isolated fixed point.
    pub fn weights_at_fixed_point(&self, p: &ChartPoint) -> Result<Weights> {
        let n = self.n;
        if n % 2 == 1 {
            return Err(Error::NonIsolatedFixedPoint(format!("odd dimension {n} admits no isolated fixed point")));
        }
        let b = self.nabla_matrix(p)?;
        let e = self.orthonormal_frame(p, &[])?;
        let b_on = e.transpose() * b * &e;
        let pf = pfaffian(&b_on)?;
        let m = n / 2;
        let mut ev: Vec<f64> = (b_on.transpose() * &b_on).symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let magnitudes: Vec<f64> = (0..m).map(|i| 0.5 * ev[2 * i].max(0.0).sqrt()).collect();
        let smallest = magnitudes.last().copied().unwrap_or(0.0);
        if smallest <= 1e-8 {
            return Err(Error::NonIsolatedFixedPoint(format!(
                "linearized action degenerate at {p} (smallest weight {smallest:e})"
            )));
        }
        Ok(Weights {
            magnitudes,
            product: pf / 2f64.powi(m as i32),
        })
    }

    /// Normal Hessian of an arbitrary scalar field along a critical locus
    /// sample, without any sign requirement.
    pub fn normal_hessian_of(&self, f: &JetField, sample: &LocusSample) -> Result<NormalHessian> {
        let n = self.n;
        let d = sample.tangents.len();
        let h = f.hessians(&sample.point).remove(0);
        let h = DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let e = self.orthonormal_frame(&sample.point, &sample.tangents)?;
        let normal = e.columns(d, n - d).into_owned();
        let hn = normal.transpose() * h * &normal;
        let det = hn.determinant();
        let eig = hn.clone().symmetric_eigen().eigenvalues;
        let scale = eig.amax().max(1e-300);
        let signature = eig
            .iter()
            .map(|&l| {
                if l > 1e-12 * scale {
                    1
                } else if l < -1e-12 * scale {
                    -1
                } else {
                    0
                }
            })
            .sum();
        Ok(NormalHessian {
            matrix: (0..n - d).map(|i| (0..n - d).map(|j| hn[(i, j)]).collect()).collect(),
            det,
            signature,
        })
    }

    /// Normal Hessian of `g(X, X)` on a fixed locus; must be nondegenerate.
    pub fn hessian_normal(&self, sample: &LocusSample) -> Result<NormalHessian> {
        let h = self.normal_hessian_of(&self.action_norm_sq(), sample)?;
        if !(h.det >= MORSE_BOTT_TOLERANCE) {
            return Err(Error::MorseBottViolation { det: h.det });
        }
        Ok(h)
    }

    /// Riemannian density `√det(Jᵀ g J)` of a locus sample.
    pub fn locus_density(&self, sample: &LocusSample) -> Result<f64> {
        if sample.tangents.is_empty() {
            return Ok(1.0);
        }
        let g = self.metric_checked(&sample.point)?;
        let j = DMatrix::from_fn(self.n, sample.tangents.len(), |r, c| sample.tangents[c][r]);
        let det = (j.transpose() * g * &j).determinant();
        if !(det > 1e-14) {
            return Err(Error::DegenerateMetric {
                at: format!("locus at {}", sample.point),
                det,
            });
        }
        Ok(det.sqrt())
    }

    /// Raise all indices of a form with the inverse metric.
    pub fn sharp(&self, p: &ChartPoint, form: &Blades<f64>) -> Result<Blades<f64>> {
        let ginv = self.metric_inverse(p)?;
        let mut out = pushforward(&ginv, form);
        out.variance = Variance::Vector;
        Ok(out)
    }

    /// Multi-start damped Gauss–Newton on `X = 0` from quadrature nodes of
    /// every chart, deduplicated at distance `tolerance` (in the ambient
    /// space when a chart provides one).
    pub fn find_zeros(&self, tolerance: f64) -> Vec<Zero> {
        let mut found: Vec<Zero> = Vec::new();
        for (c, chart) in self.charts.iter().enumerate() {
            let grid = QuadratureGrid::new(&chart.domain, 5).expect("chart boxes are validated");
            for (seed, _) in grid.nodes() {
                let Some(z) = self.newton_zero(c, seed) else {
                    continue;
                };
                let duplicate = found.iter().any(|f| match (&f.ambient, &z.ambient) {
                    (Some(a), Some(b)) => dist(a, b) < tolerance,
                    _ => f.point.chart == z.point.chart && dist(&f.point.x, &z.point.x) < tolerance,
                });
                if !duplicate {
                    found.push(z);
                }
            }
        }
        found
    }

    fn newton_zero(&self, chart: usize, mut x: Vec<f64>) -> Option<Zero> {
        let n = self.n;
        let dom = &self.charts[chart];
        let eval = |x: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
            let jets = self.action_jets(&ChartPoint::new(chart, x.to_vec()), 1);
            let v = DVector::from_fn(n, |i, _| jets[i].value());
            let j = DMatrix::from_fn(n, n, |i, k| jets[i].gradient()[k]);
            (v, j)
        };
        for _ in 0..60 {
            let (v, j) = eval(&x);
            let r = v.amax();
            if r <= 1e-13 {
                let sv = j.clone().svd(false, false).singular_values;
                let smax = sv.amax();
                let rank = sv.iter().filter(|&&s| s > 1e-8 * smax.max(1.0)).count();
                let p = ChartPoint::new(chart, x);
                return Some(Zero {
                    ambient: dom.ambient(&p.x),
                    point: p,
                    isolated: rank == n,
                });
            }
            let step = j.svd(true, true).solve(&(-&v), 1e-10).ok()?;
            if step.amax() == 0.0 {
                return None;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
                if dom.contains(&trial) && eval(&trial).0.amax() < r {
                    x = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        None
    }
}

/// Default volume: `σ √det g` on the top blade.
fn metric_volume_field(metric: &JetField, charts: &[Chart]) -> JetField {
    let metric = metric.clone();
    let n = metric.n();
    let signs: Vec<f64> = charts.iter().map(|c| c.orientation).collect();
    JetField::from_evaluator(n, Shape::Blades(Variance::Form), move |chart, x, order| {
        let g = metric.taylor(&ChartPoint::new(chart, x.to_vec()), order);
        let det = jet_determinant(&g, n);
        let mut out = vec![det.zero_like(); 1 << n];
        out[(1 << n) - 1] = det.sqrt().scale(signs[chart]);
        out
    })
}

/// Degree-1 components of a vector blade.
pub fn vector_components(b: &Blades<Jet>) -> Vec<Jet> {
    (0..b.n).map(|i| b.c[1 << i].clone()).collect()
}

/// Determinant of an `n×n` jet matrix (row major) by elimination without
/// pivoting; intended for positive-definite matrices.
pub fn jet_determinant(m: &[Jet], n: usize) -> Jet {
    let mut a: Vec<Jet> = m.to_vec();
    let mut det = a[0].constant_like(1.0);
    for k in 0..n {
        let piv = a[k * n + k].clone();
        det = det.mul_jet(&piv);
        let inv = piv.recip();
        for i in k + 1..n {
            let f = a[i * n + k].mul_jet(&inv);
            for j in k..n {
                let t = f.mul_jet(&a[k * n + j]);
                a[i * n + j].add_scaled(&t, -1.0);
            }
        }
    }
    det
}

/// Inverse of an `n×n` jet matrix (row major) by Gauss–Jordan without
/// pivoting; intended for positive-definite matrices.
pub fn jet_inverse(m: &[Jet], n: usize) -> Vec<Jet> {
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|idx| m[0].constant_like(if idx / n == idx % n { 1.0 } else { 0.0 }))
        .collect();
    for k in 0..n {
        let r = a[k * n + k].recip();
        for j in 0..n {
            a[k * n + j] = a[k * n + j].mul_jet(&r);
            inv[k * n + j] = inv[k * n + j].mul_jet(&r);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i * n + k].clone();
            for j in 0..n {
                let ta = f.mul_jet(&a[k * n + j]);
                let ti = f.mul_jet(&inv[k * n + j]);
                a[i * n + j].add_scaled(&ta, -1.0);
                inv[i * n + j].add_scaled(&ti, -1.0);
            }
        }
    }
    inv
}

/// Induced action of a linear map on blades: `e_j ↦ Σ_i A_{ij} e_i`
/// extended multiplicatively.
pub fn pushforward(a: &DMatrix<f64>, b: &Blades<f64>) -> Blades<f64> {
    let n = b.n;
    let images: Vec<Blades<f64>> = (0..n)
        .map(|j| {
            let mut v = Blades::zeros(n, b.variance, &0.0);
            for i in 0..n {
                v.c[1 << i] = a[(i, j)];
            }
            v
        })
        .collect();
    let mut out = Blades::zeros(n, b.variance, &0.0);
    for (mask, &coef) in b.c.iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let mut term = Blades::scalar(n, b.variance, coef);
        for (j, img) in images.iter().enumerate() {
            if mask & (1 << j) != 0 {
                term = term.wedge(img);
            }
        }
        out.add_scaled(&term, 1.0);
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Circle-equivariant map `F: M → C^k` with `X(F^l) = i w_l F^l`.
#[derive(Clone, Debug)]
pub struct EquivariantMap {
    pub weights: Vec<i32>,
    /// `2k` real components `(Re F^1, Im F^1, Re F^2, …)`.
    pub map: JetField,
    pub zero_locus: Vec<FixedLocus>,
}

impl EquivariantMap {
    /// Validate equivariance at sample points of every chart.
    pub fn new(geom: &Geometry, weights: Vec<i32>, map: JetField, zero_locus: Vec<FixedLocus>) -> Result<EquivariantMap> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(Error::Config("weights must be nonzero integers".into()));
        }
        if map.shape() != Shape::Components(2 * weights.len()) {
            return Err(Error::Config("map must have 2k real components".into()));
        }
        let f = EquivariantMap {
            weights,
            map,
            zero_locus,
        };
        let residual = geom
            .sample_points(4)
            .iter()
            .map(|p| f.equivariance_residual(geom, p))
            .fold(0.0, f64::max);
        if residual > EQUIVARIANCE_TOLERANCE {
            return Err(Error::EquivarianceViolation { residual });
        }
        Ok(f)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Max-norm of `X(F^l) − i w_l F^l`.
    pub fn equivariance_residual(&self, geom: &Geometry, p: &ChartPoint) -> f64 {
        let x = geom.action_vector(p);
        let jets = self.map.taylor(p, 1);
        let xf = |c: usize| -> f64 { jets[c].gradient().iter().zip(&x).map(|(g, v)| g * v).sum() };
        let mut worst: f64 = 0.0;
        for (l, &w) in self.weights.iter().enumerate() {
            let (re, im) = (jets[2 * l].value(), jets[2 * l + 1].value());
            let w = w as f64;
            worst = worst.max((xf(2 * l) + w * im).abs()).max((xf(2 * l + 1) - w * re).abs());
        }
        worst
    }
}

/// Serializable summary of a geometry, used in reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub name: String,
    pub dim: usize,
    pub charts: Vec<String>,
    pub quadrature_order: usize,
    pub fixed_loci: Vec<String>,
}

impl Geometry {
    pub fn summary(&self) -> GeometrySummary {
        GeometrySummary {
            name: self.name.clone(),
            dim: self.n,
            charts: self.charts.iter().map(|c| c.name.clone()).collect(),
            quadrature_order: self.quadrature_order,
            fixed_loci: self.fixed_loci().iter().map(FixedLocus::name).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclidean_plane_rotation() -> Geometry {
        let chart = Chart::new("xy", vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let metric = JetField::constant(2, Shape::Tensor2, vec![1.0, 0.0, 0.0, 1.0]);
        let x = JetField::uniform(2, Shape::Blades(Variance::Vector), |v| {
            let z = v[0].zero_like();
            vec![z.clone(), -&v[1], v[0].clone(), z]
        });
        let action = CircleAction {
            field: x,
            fixed_loci: vec![FixedLocus::Point(ChartPoint::new(0, vec![0.0, 0.0]))],
        };
        Geometry::new("disc", vec![chart], metric, action, 0).unwrap()
    }

    #[test]
    fn euclidean_christoffel_vanishes() {
        let g = euclidean_plane_rotation();
        let gamma = g.christoffel(&ChartPoint::new(0, vec![0.3, -0.2])).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn rotation_weight_and_hessian() {
        let g = euclidean_plane_rotation();
        let p = ChartPoint::new(0, vec![0.0, 0.0]);
        let w = g.weights_at_fixed_point(&p).unwrap();
        assert!((w.magnitudes[0] - 1.0).abs() < 1e-12);
        assert!((w.product - 1.0).abs() < 1e-12);
        let h = g
            .hessian_normal(&LocusSample {
                point: p,
                tangents: vec![],
            })
            .unwrap();
        assert!((h.det - 4.0).abs() < 1e-12);
        assert_eq!(h.signature, 2);
    }

    #[test]
    fn flipped_orientation_flips_weight_product() {
        let g = euclidean_plane_rotation().with_flipped_orientation();
        let w = g.weights_at_fixed_point(&ChartPoint::new(0, vec![0.0, 0.0])).unwrap();
        assert!((w.product + 1.0).abs() < 1e-12);
    }

    #[test]
    fn find_zeros_on_disc() {
        let zs = euclidean_plane_rotation().find_zeros(1e-6);
        assert_eq!(zs.len(), 1);
        assert!(zs[0].isolated && zs[0].point.x.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn non_killing_field_rejected() {
        let chart = Chart::new("xy", vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let metric = JetField::constant(2, Shape::Tensor2, vec![1.0, 0.0, 0.0, 1.0]);
        let x = JetField::uniform(2, Shape::Blades(Variance::Vector), |v| {
            let z = v[0].zero_like();
            vec![z.clone(), v[0].clone(), z.clone(), z]
        });
        let action = CircleAction {
            field: x,
            fixed_loci: vec![],
        };
        let err = Geometry::new("dilation", vec![chart], metric, action, 0).unwrap_err();
        assert!(matches!(err, Error::NonKillingField { .. }));
    }

    #[test]
    fn jet_matrix_helpers() {
        let v = Jet::variables(&[0.4, 0.9], 2);
        let m = vec![
            v[0].exp(),
            v[1].clone() * 0.5,
            v[1].clone() * 0.5,
            v[0].mul_jet(&v[0]).add_scalar(2.0),
        ];
        let det = jet_determinant(&m, 2);
        let direct = m[0].mul_jet(&m[3]) - m[1].mul_jet(&m[2]);
        assert!(det.coeffs().iter().zip(direct.coeffs()).all(|(a, b)| (a - b).abs() < 1e-12));
        let inv = jet_inverse(&m, 2);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = m[0].zero_like();
                for k in 0..2 {
                    acc += &m[i * 2 + k].mul_jet(&inv[k * 2 + j]);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - target).abs() < 1e-12);
                assert!(acc.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn pushforward_of_top_form_is_determinant() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]);
        let mut top = Blades::zeros(2, Variance::Form, &0.0);
        top.c[3] = 1.0;
        let out = pushforward(&a, &top);
        assert!((out.c[3] - a.determinant()).abs() < 1e-14);
        let _ = PI;
    }
}
