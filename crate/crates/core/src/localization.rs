//! Localization evaluators: each computes a fixed-locus formula and the
//! direct integral it is supposed to reproduce.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bv::{exp_field, hamiltonian_residual, master_equation_residuals, EquivariantElement, MasterResiduals};
use crate::error::{Error, Result};
use crate::exterior::{pfaffian, Blades, Variance};
use crate::field::{ChartPoint, JetField};
use crate::geometry::{EquivariantMap, FixedLocus, Geometry, GeometrySummary, LocusSample, Weights};
use crate::quadrature::{closedness_residual, integrate_field, integrate_multivector, integrate_over_locus};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA: u32 = 1;
/// Closedness residual above which a report is flagged.
pub const CLOSEDNESS_TOLERANCE: f64 = 1e-8;
/// Tolerance of the master-equation and Hamiltonian residual checks.
pub const MASTER_TOLERANCE: f64 = 1e-8;
/// Singular-value threshold of the rank table.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Contribution of one fixed locus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocusContribution {
    pub locus: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Weights>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfaffian: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_det: Option<f64>,
    /// `⟨vol, P_{[2m]}⟩` at an isolated point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<f64>,
}

impl LocusContribution {
    fn new(locus: String, value: f64) -> LocusContribution {
        LocusContribution {
            locus,
            value,
            weights: None,
            pfaffian: None,
            hessian_det: None,
            pairing: None,
        }
    }
}

/// Convention and precondition diagnostics attached to a report.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest `|Δ_𝔤 P|` over sample points.
    pub closedness_residual: f64,
    pub closed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_residuals: Option<MasterResiduals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_table: Option<RankTable>,
    pub warnings: Vec<String>,
}

/// Both sides of a localization identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub schema: u32,
    pub evaluator: String,
    pub geometry: GeometrySummary,
    pub phi: f64,
    pub direct_value: f64,
    pub localized_value: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub per_locus_contributions: Vec<LocusContribution>,
    pub diagnostics: Diagnostics,
}

impl LocalizationReport {
    fn new(
        evaluator: &str,
        geom: &Geometry,
        phi: f64,
        direct: f64,
        contributions: Vec<LocusContribution>,
        diagnostics: Diagnostics,
    ) -> LocalizationReport {
        let localized: f64 = contributions.iter().map(|c| c.value).sum();
        let abs = (localized - direct).abs();
        let rel = if direct != 0.0 { abs / direct.abs() } else { abs };
        LocalizationReport {
            schema: REPORT_SCHEMA,
            evaluator: evaluator.to_string(),
            geometry: geom.summary(),
            phi,
            direct_value: direct,
            localized_value: localized,
            abs_residual: abs,
            rel_residual: rel,
            per_locus_contributions: contributions,
            diagnostics,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable summary table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "evaluator      {}", self.evaluator);
        let _ = writeln!(s, "geometry       {} (dim {})", self.geometry.name, self.geometry.dim);
        let _ = writeln!(s, "phi            {}", self.phi);
        let _ = writeln!(s, "direct         {:.15e}", self.direct_value);
        let _ = writeln!(s, "localized      {:.15e}", self.localized_value);
        let _ = writeln!(s, "abs residual   {:.3e}", self.abs_residual);
        let _ = writeln!(s, "rel residual   {:.3e}", self.rel_residual);
        let _ = writeln!(
            s,
            "closed         {} (residual {:.3e})",
            self.diagnostics.closed, self.diagnostics.closedness_residual
        );
        let _ = writeln!(s, "{:<28} {:>22} {:>12} {:>12}", "locus", "contribution", "weight", "hess det");
        for c in &self.per_locus_contributions {
            let w = c
                .weights
                .as_ref()
                .map(|w| format!("{:.6}", w.product))
                .unwrap_or_else(|| "-".into());
            let h = c.hessian_det.map(|d| format!("{d:.6}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:<28} {:>22.15e} {:>12} {:>12}", c.locus, c.value, w, h);
        }
        if let Some(table) = &self.diagnostics.rank_table {
            s.push_str(&table.to_table());
        }
        for w in &self.diagnostics.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn require_nontrivial_action(geom: &Geometry) -> Result<()> {
    let largest = geom
        .sample_points(3)
        .iter()
        .map(|p| geom.action_vector(p).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max);
    if largest == 0.0 {
        return Err(Error::WrongEvaluator(
            "the action field vanishes identically; every point is fixed".into(),
        ));
    }
    Ok(())
}

fn require_fixed_loci(geom: &Geometry, isolated: bool) -> Result<()> {
    require_nontrivial_action(geom)?;
    if geom.fixed_loci().is_empty() {
        return Err(Error::WrongEvaluator(format!(
            "{} has no fixed points; fixed-point formulas do not apply",
            geom.name
        )));
    }
    if isolated && !geom.fixed_loci().iter().all(FixedLocus::is_isolated) {
        return Err(Error::WrongEvaluator(
            "fixed locus is not discrete; use the Morse–Bott evaluator".into(),
        ));
    }
    if geom.dim() % 2 == 1 {
        return Err(Error::WrongEvaluator("odd-dimensional manifold".into()));
    }
    Ok(())
}

fn closedness(p: &JetField, geom: &Geometry, phi: f64) -> Diagnostics {
    let r = closedness_residual(p, geom, phi);
    let mut d = Diagnostics {
        closedness_residual: r,
        closed: r <= CLOSEDNESS_TOLERANCE,
        ..Default::default()
    };
    if !d.closed {
        d.warnings
            .push(format!("element is not equivariantly closed (|Δ_𝔤 P| = {r:.3e}); the identity need not hold"));
    }
    d
}

fn point_of(locus: &FixedLocus) -> &ChartPoint {
    match locus {
        FixedLocus::Point(p) => p,
        FixedLocus::Patch(_) => unreachable!("checked isolated"),
    }
}

/// `φ^{−m}`: the weights of the action `φX` are `φλ`. At `φ = 1` this is the
/// usual normalization of the fixed-point formulas.
fn phi_factor(phi: f64, m: usize) -> Result<f64> {
    if phi == 0.0 || !phi.is_finite() {
        return Err(Error::WrongEvaluator(format!(
            "fixed-point formulas need a finite nonzero φ, got {phi}"
        )));
    }
    Ok(phi.powi(-(m as i32)))
}

/// `⟨vol, P_{[n]}⟩` at a point.
fn top_pairing(p: &JetField, geom: &Geometry, at: &ChartPoint) -> f64 {
    let top = (1usize << geom.dim()) - 1;
    geom.volume_coefficient(at) * p.as_blades(Variance::Vector).blades_value(at).c[top]
}

/// `(−2π)^m Σ_p ⟨vol, P_{[2m]}⟩(p) / (φλ_1⋯φλ_m)(p)`.
pub fn berline_vergne_sum(p: &EquivariantElement, geom: &Geometry, phi: f64) -> Result<LocalizationReport> {
    require_fixed_loci(geom, true)?;
    let m = geom.dim() / 2;
    let scale = phi_factor(phi, m)?;
    let pf = p.at(phi);
    let diagnostics = closedness(&pf, geom, phi);
    let mut contributions = Vec::new();
    for locus in geom.fixed_loci() {
        let at = point_of(locus);
        let w = geom.weights_at_fixed_point(at)?;
        let pairing = top_pairing(&pf, geom, at);
        let mut c = LocusContribution::new(locus.name(), (-2.0 * PI).powi(m as i32) * scale * pairing / w.product);
        c.weights = Some(w);
        c.pairing = Some(pairing);
        contributions.push(c);
    }
    let direct = integrate_multivector(p, geom, phi)?;
    Ok(LocalizationReport::new("berline_vergne", geom, phi, direct, contributions, diagnostics))
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Per-sample integrand of the Morse–Bott formula:
/// `⟨β^m, P_{[2m]}⟩ ρ / √det H_N` with `ρ = vol / vol_g`.
fn morse_bott_integrand(
    beta: &Blades<f64>,
    hessian_det: f64,
    pf: &JetField,
    geom: &Geometry,
    sample: &LocusSample,
    m: usize,
) -> f64 {
    let mut power = Blades::scalar(geom.dim(), Variance::Form, 1.0);
    for _ in 0..m {
        power = power.wedge(beta);
    }
    let pm = pf.as_blades(Variance::Vector).blades_value(&sample.point).grade(2 * m);
    let rho = geom.volume_coefficient(&sample.point) / geom.metric_volume_coefficient(&sample.point);
    power.pair(&pm) * rho / hessian_det.sqrt()
}

fn nabla_blades(geom: &Geometry, at: &ChartPoint) -> Result<Blades<f64>> {
    let mut b = Blades::from_graded(&geom.nabla_covector(at)?);
    b.variance = Variance::Form;
    Ok(b)
}

/// `((−2π)^m/m!) ∫_{M_X} ⟨(∇X^♭)^m, P_{[2m]}⟩ ρ dA / √det Hess_N g(X,X)`
/// summed over the fixed loci, each of codimension `2m`, times `φ^{−m}`.
pub fn atiyah_bott_bv(p: &EquivariantElement, geom: &Geometry, phi: f64) -> Result<LocalizationReport> {
    require_fixed_loci(geom, false)?;
    let pf = p.at(phi);
    let diagnostics = closedness(&pf, geom, phi);
    let mut contributions = Vec::new();
    for locus in geom.fixed_loci() {
        let codim = geom.dim() - locus.dim();
        if codim % 2 == 1 {
            return Err(Error::WrongEvaluator(format!("locus {} has odd codimension", locus.name())));
        }
        let m = codim / 2;
        let scale = phi_factor(phi, m)?;
        let integrand = |s: &LocusSample| -> Result<f64> {
            let h = geom.hessian_normal(s)?;
            let beta = nabla_blades(geom, &s.point)?;
            Ok(morse_bott_integrand(&beta, h.det, &pf, geom, s, m))
        };
        let integral = integrate_over_locus(locus, integrand, geom, geom.quadrature_order())?;
        let mut c = LocusContribution::new(locus.name(), (-2.0 * PI).powi(m as i32) / factorial(m) * scale * integral);
        if let FixedLocus::Point(at) = locus {
            let s = LocusSample {
                point: at.clone(),
                tangents: vec![],
            };
            c.hessian_det = Some(geom.hessian_normal(&s)?.det);
            c.weights = geom.weights_at_fixed_point(at).ok();
        } else if let Some(s) = locus.check_samples().first() {
            c.hessian_det = Some(geom.hessian_normal(s)?.det);
        }
        contributions.push(c);
    }
    let direct = integrate_multivector(p, geom, phi)?;
    Ok(LocalizationReport::new("atiyah_bott", geom, phi, direct, contributions, diagnostics))
}

/// Evaluation mode of [`cohft_localize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohftMode {
    Discrete,
    Bott,
}

/// Complex derivatives `∂_a F^l` along the columns of `frame`.
fn map_derivatives(f: &EquivariantMap, at: &ChartPoint, frame: &DMatrix<f64>) -> Vec<Vec<Complex64>> {
    let grads = f.map.gradients(at);
    (0..f.k())
        .map(|l| {
            (0..frame.ncols())
                .map(|a| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for mu in 0..frame.nrows() {
                        re += frame[(mu, a)] * grads[2 * l][mu];
                        im += frame[(mu, a)] * grads[2 * l + 1][mu];
                    }
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect()
}

/// `Σ_l w_l Im(dF̄^l ∧ dF^l) = Σ_l 2 w_l dF^l_1 ∧ dF^l_2` as a 2-form.
fn map_two_form(f: &EquivariantMap, at: &ChartPoint, n: usize) -> Blades<f64> {
    let grads = f.map.gradients(at);
    let mut out = Blades::zeros(n, Variance::Form, &0.0);
    for (l, &w) in f.weights.iter().enumerate() {
        let mut d1 = Blades::zeros(n, Variance::Form, &0.0);
        let mut d2 = Blades::zeros(n, Variance::Form, &0.0);
        for mu in 0..n {
            d1.c[1 << mu] = grads[2 * l][mu];
            d2.c[1 << mu] = grads[2 * l + 1][mu];
        }
        out.add_scaled(&d1.wedge(&d2), 2.0 * w as f64);
    }
    out
}

/// `Σ_l w_l² |F^l|²` as a scalar field.
fn map_norm_sq(f: &EquivariantMap) -> JetField {
    let map = f.map.clone();
    let weights = f.weights.clone();
    JetField::from_evaluator(map.n(), crate::field::Shape::Scalar, move |chart, x, order| {
        let c = map.taylor(&ChartPoint::new(chart, x.to_vec()), order);
        let mut acc = c[0].zero_like();
        for (l, &w) in weights.iter().enumerate() {
            let w2 = (w * w) as f64;
            acc.add_scaled(&c[2 * l].mul_jet(&c[2 * l]), w2);
            acc.add_scaled(&c[2 * l + 1].mul_jet(&c[2 * l + 1]), w2);
        }
        vec![acc]
    })
}

/// Localization through an equivariant map `F` with isolated (discrete
/// mode) or Morse–Bott (Bott mode) zero locus.
pub fn cohft_localize(
    p: &EquivariantElement,
    f: &EquivariantMap,
    geom: &Geometry,
    phi: f64,
    mode: CohftMode,
) -> Result<LocalizationReport> {
    require_nontrivial_action(geom)?;
    let residual = geom
        .sample_points(4)
        .iter()
        .map(|q| f.equivariance_residual(geom, q))
        .fold(0.0, f64::max);
    if residual > crate::geometry::EQUIVARIANCE_TOLERANCE {
        return Err(Error::EquivarianceViolation { residual });
    }
    if f.zero_locus.is_empty() {
        return Err(Error::WrongEvaluator("the map has no declared zeros".into()));
    }
    let n = geom.dim();
    let pf = p.at(phi);
    let diagnostics = closedness(&pf, geom, phi);
    let mut contributions = Vec::new();
    match mode {
        CohftMode::Discrete => {
            let m = n / 2;
            let scale = phi_factor(phi, m)?;
            for locus in &f.zero_locus {
                let FixedLocus::Point(at) = locus else {
                    return Err(Error::WrongEvaluator(
                        "discrete mode needs isolated zeros; use bott mode".into(),
                    ));
                };
                let frame = geom.orthonormal_frame(at, &[])?;
                let d = map_derivatives(f, at, &frame);
                let mut im = DMatrix::<f64>::zeros(n, n);
                let mut re = DMatrix::<f64>::zeros(n, n);
                for (l, &w) in f.weights.iter().enumerate() {
                    let w = w as f64;
                    for a in 0..n {
                        for b in 0..n {
                            let z = d[l][a].conj() * d[l][b];
                            im[(a, b)] += w * z.im;
                            re[(a, b)] += w * w * z.re;
                        }
                    }
                }
                let pf_im = pfaffian(&im)?;
                let det_re = re.determinant();
                if !(det_re > 1e-14) {
                    return Err(Error::precondition(
                        "cohft-nondegenerate",
                        format!("Re-matrix degenerate at {at} (det {det_re:e})"),
                    ));
                }
                let pairing = top_pairing(&pf, geom, at);
                let value = (-2.0 * PI).powi(m as i32) * scale * pf_im / det_re.sqrt() * pairing;
                let mut c = LocusContribution::new(locus.name(), value);
                c.pfaffian = Some(pf_im);
                c.hessian_det = Some(det_re);
                c.pairing = Some(pairing);
                contributions.push(c);
            }
        }
        CohftMode::Bott => {
            let norm = map_norm_sq(f);
            for locus in &f.zero_locus {
                let codim = n - locus.dim();
                if codim % 2 == 1 {
                    return Err(Error::WrongEvaluator(format!("zero locus {} has odd codimension", locus.name())));
                }
                let m = codim / 2;
                let scale = phi_factor(phi, m)?;
                let integrand = |s: &LocusSample| -> Result<f64> {
                    let h = geom.normal_hessian_of(&norm, s)?;
                    if !(h.det >= crate::geometry::MORSE_BOTT_TOLERANCE) {
                        return Err(Error::MorseBottViolation { det: h.det });
                    }
                    let beta = map_two_form(f, &s.point, n);
                    Ok(morse_bott_integrand(&beta, h.det, &pf, geom, s, m))
                };
                let integral = integrate_over_locus(locus, integrand, geom, geom.quadrature_order())?;
                let mut c =
                    LocusContribution::new(locus.name(), (-2.0 * PI).powi(m as i32) / factorial(m) * scale * integral);
                if let Some(s) = locus.check_samples().first() {
                    c.hessian_det = Some(geom.normal_hessian_of(&norm, s)?.det);
                }
                contributions.push(c);
            }
        }
    }
    let direct = integrate_multivector(p, geom, phi)?;
    let name = match mode {
        CohftMode::Discrete => "cohft_discrete",
        CohftMode::Bott => "cohft_bott",
    };
    Ok(LocalizationReport::new(name, geom, phi, direct, contributions, diagnostics))
}

fn max_over_samples(geom: &Geometry, f: impl Fn(&ChartPoint) -> f64) -> f64 {
    geom.sample_points(3).iter().map(f).fold(0.0, f64::max)
}

/// Duistermaat–Heckman through the Poisson BV structure:
/// `((−2π)^m/m!) Σ_p e^{h(p)} ⟨vol, π^m⟩(p) / (λ_1⋯λ_m)(p)` against
/// `∫ e^h vol`.
pub fn dh_poisson(h: &JetField, pi: &JetField, geom: &Geometry) -> Result<LocalizationReport> {
    require_nontrivial_action(geom)?;
    let master = geom
        .sample_points(3)
        .iter()
        .map(|q| master_equation_residuals(h, pi, geom, q))
        .fold(MasterResiduals { r1: 0.0, r2: 0.0, r3: 0.0 }, |a, b| MasterResiduals {
            r1: a.r1.max(b.r1),
            r2: a.r2.max(b.r2),
            r3: a.r3.max(b.r3),
        });
    for (name, r) in [
        ("quantum master equation ΔS + ½{S,S} = 0", master.r1),
        ("ΔI_X + {S, I_X} = X", master.r2),
        ("{I_X, I_X} = 0", master.r3),
    ] {
        if r > MASTER_TOLERANCE {
            return Err(Error::precondition(name, format!("residual {r:.3e} exceeds {MASTER_TOLERANCE:e}")));
        }
    }
    let ham = max_over_samples(geom, |q| hamiltonian_residual(h, pi, geom, q));
    if ham > MASTER_TOLERANCE {
        return Err(Error::precondition(
            "X = Δπ + {h, π}",
            format!("residual {ham:.3e} exceeds {MASTER_TOLERANCE:e}"),
        ));
    }
    require_fixed_loci(geom, true)?;
    let m = geom.dim() / 2;
    let pi_b = pi.as_blades(Variance::Vector);
    let mut contributions = Vec::new();
    for locus in geom.fixed_loci() {
        let at = point_of(locus);
        let w = geom.weights_at_fixed_point(at)?;
        let piv = pi_b.blades_value(at);
        let mut power = Blades::scalar(geom.dim(), Variance::Vector, 1.0);
        for _ in 0..m {
            power = power.wedge(&piv);
        }
        let top = (1usize << geom.dim()) - 1;
        let pairing = geom.volume_coefficient(at) * power.c[top];
        let value = (-2.0 * PI).powi(m as i32) / factorial(m) * h.value(at).exp() * pairing / w.product;
        let mut c = LocusContribution::new(locus.name(), value);
        c.weights = Some(w);
        c.pairing = Some(pairing);
        contributions.push(c);
    }
    let direct = integrate_field(&exp_field(&h.as_blades(Variance::Vector)), geom)?;
    let diagnostics = Diagnostics {
        closedness_residual: master.max(),
        closed: true,
        master_residuals: Some(master),
        hamiltonian_residual: Some(ham),
        ..Default::default()
    };
    Ok(LocalizationReport::new("dh_poisson", geom, 1.0, direct, contributions, diagnostics))
}

/// One row of the rank table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankRow {
    pub locus: String,
    pub point: ChartPoint,
    pub rank: usize,
}

/// Ranks of `π` at the fixed points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
    pub max_rank: usize,
    /// Whether some fixed point has `rank π = dim M`.
    pub full_rank_somewhere: bool,
}

impl RankTable {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:>6}", "fixed point", "rank");
        for r in &self.rows {
            let _ = writeln!(s, "{:<28} {:>6}", r.locus, r.rank);
        }
        let _ = writeln!(s, "max rank {}; full rank attained: {}", self.max_rank, self.full_rank_somewhere);
        s
    }
}

/// Rank of the coefficient matrix of a bivector at a point.
pub fn bivector_rank(pi: &JetField, at: &ChartPoint) -> usize {
    let b = pi.as_blades(Variance::Vector).blades_value(at);
    let n = b.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = b.c[(1 << i) | (1 << j)];
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m.svd(false, false).singular_values.iter().filter(|&&s| s > RANK_THRESHOLD).count()
}

pub fn rank_at_fixed_points(pi: &JetField, geom: &Geometry) -> RankTable {
    let mut rows = Vec::new();
    for locus in geom.fixed_loci() {
        for s in locus.check_samples() {
            rows.push(RankRow {
                locus: locus.name(),
                rank: bivector_rank(pi, &s.point),
                point: s.point,
            });
        }
    }
    let max_rank = rows.iter().map(|r| r.rank).max().unwrap_or(0);
    RankTable {
        full_rank_somewhere: max_rank == geom.dim(),
        rows,
        max_rank,
    }
}

/// Outcome of the weight-containment check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightContainment {
    /// Distinct weight magnitudes of the action at its fixed points.
    pub action_weights: Vec<f64>,
    pub map_weights: Vec<i32>,
    pub contained: bool,
}

/// Whether every weight of the action at its (isolated) fixed points is
/// among the magnitudes of the map's weights.
pub fn weight_containment_check(f: &EquivariantMap, geom: &Geometry) -> Result<WeightContainment> {
    if !geom.fixed_loci().iter().all(FixedLocus::is_isolated) {
        return Err(Error::WrongEvaluator("weight containment needs a discrete fixed set".into()));
    }
    let mut lambda: Vec<f64> = Vec::new();
    for locus in geom.fixed_loci() {
        for w in geom.weights_at_fixed_point(point_of(locus))?.magnitudes {
            if !lambda.iter().any(|l| (l - w).abs() <= 1e-8 * w.max(1.0)) {
                lambda.push(w);
            }
        }
    }
    lambda.sort_by(f64::total_cmp);
    let contained = lambda
        .iter()
        .all(|l| f.weights.iter().any(|&w| ((w.abs() as f64) - l).abs() <= 1e-8 * l.max(1.0)));
    Ok(WeightContainment {
        action_weights: lambda,
        map_weights: f.weights.clone(),
        contained,
    })
}

/// One sample of the `φ` sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiSample {
    pub phi: f64,
    pub direct: f64,
    pub localized: f64,
    /// The fixed-point sum without the `φ^{−m}` from the weights of `φX`;
    /// it grows as `φ^m` through `P_{[2m]}`.
    pub unnormalized: f64,
}

/// The direct side only sees `P_{[0]}` and is `φ`-independent. On the
/// fixed-point side the `φ^m` carried by `P_{[2m]}` cancels against the
/// `φ^m` of the weights; the sweep records both sides of that cancellation.
pub fn phi_sweep(p: &EquivariantElement, geom: &Geometry, phis: &[f64]) -> Result<Vec<PhiSample>> {
    let m = geom.dim() / 2;
    phis.iter()
        .map(|&phi| {
            let r = berline_vergne_sum(p, geom, phi)?;
            Ok(PhiSample {
                phi,
                direct: r.direct_value,
                localized: r.localized_value,
                unnormalized: r.localized_value * phi.powi(m as i32),
            })
        })
        .collect()
}
