use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::QuadratureGrid;
use crate::bv::{contract_volume, de_rham_d, equivariant_delta_unchecked, EquivariantElement};
use crate::error::{Error, Result};
use crate::exterior::{Blades, Variance};
use crate::field::{ChartPoint, JetField};
use crate::geometry::{FixedLocus, Geometry, LocusSample};

/// Default absolute tolerance of quadrature-based comparisons.
pub const INTEGRATION_TOLERANCE: f64 = 1e-7;

/// `∫_M α` for a form field: the top coefficient over the integration chart,
/// signed by the chart orientation.
pub fn integrate_top_form(alpha: &JetField, geom: &Geometry) -> Result<f64> {
    integrate_top_form_on(alpha, geom, &geom.integration_grid()?)
}

pub fn integrate_top_form_on(alpha: &JetField, geom: &Geometry, grid: &QuadratureGrid) -> Result<f64> {
    let c = geom.integration_chart();
    let sigma = geom.chart(c).orientation;
    let top = (1usize << geom.dim()) - 1;
    grid.integrate(|x| sigma * alpha.taylor(&ChartPoint::new(c, x.to_vec()), 0)[top].value())
}

/// `∫_M P := ∫_M P ⌞ vol`; only the degree-0 part of `P` contributes.
pub fn integrate_multivector(p: &EquivariantElement, geom: &Geometry, phi: f64) -> Result<f64> {
    integrate_field(&p.at(phi), geom)
}

/// [`integrate_multivector`] for a `φ`-independent field.
pub fn integrate_field(p: &JetField, geom: &Geometry) -> Result<f64> {
    integrate_top_form(&contract_volume(p, geom.volume()), geom)
}

/// `∫_M f e^{itS} vol` by composite Gauss–Legendre with enough panels to
/// resolve the oscillation.
pub fn oscillatory_integral(s: &JetField, f: &JetField, geom: &Geometry, t: f64, order: usize) -> Result<Complex64> {
    let c = geom.integration_chart();
    let chart = geom.chart(c);
    let sigma = chart.orientation;
    let top = (1usize << geom.dim()) - 1;
    // variation of S along each axis bounds the number of oscillations
    let probe = QuadratureGrid::new(&chart.domain, 16)?;
    let mut panels = vec![1usize; geom.dim()];
    for (x, _) in probe.nodes() {
        let g = s.gradients(&ChartPoint::new(c, x))[0].clone();
        for (a, (lo, hi)) in chart.domain.iter().enumerate() {
            let osc = (t * g[a].abs() * (hi - lo) / (2.0 * PI)).ceil() as usize;
            panels[a] = panels[a].max(1 + osc / 2);
        }
    }
    let grid = QuadratureGrid::composite(&chart.domain, &vec![order; geom.dim()], &panels)?;
    let vol = geom.volume().clone();
    grid.integrate(|x| {
        let p = ChartPoint::new(c, x.to_vec());
        let phase = Complex64::new(0.0, t * s.value(&p)).exp();
        phase * (sigma * f.value(&p) * vol.taylor(&p, 0)[top].value())
    })
}

/// Shortest decimal that parses back to exactly `x`; exponent notation for
/// very small or very large magnitudes.
pub fn decimal(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && (a < 1e-4 || a >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Verdict of a localization-principle sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Closed,
    NonClosed,
}

/// `Z_γ[t](P)` over a grid of `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub t_values: Vec<f64>,
    /// `(Re Z, Im Z)` per `t`.
    pub z_values: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub verdict: Verdict,
    /// Largest `|Δ_𝔤 P|` over sample points.
    pub closedness_residual: f64,
    pub quadrature_order: usize,
    pub warnings: Vec<String>,
}

impl SweepResult {
    /// CSV with header `t,re_z,im_z` and round-trip decimal formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_z,im_z\n");
        for (t, (re, im)) in self.t_values.iter().zip(&self.z_values) {
            let _ = writeln!(out, "{},{},{}", decimal(*t), decimal(*re), decimal(*im));
        }
        out
    }

    /// Line plot of `Re Z` and `Im Z` against `t`.
    pub fn to_svg(&self, title: &str) -> String {
        let (w, h, m) = (640.0, 400.0, 50.0);
        let tmin = self.t_values.first().copied().unwrap_or(0.0);
        let tmax = self.t_values.last().copied().unwrap_or(1.0);
        let ys = self.z_values.iter().flat_map(|(a, b)| [*a, *b]);
        let (mut ymin, mut ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
        if !ymin.is_finite() {
            (ymin, ymax) = (0.0, 1.0);
        }
        let pad = ((ymax - ymin) * 0.05).max(1e-9 * ymax.abs().max(1.0));
        ymin -= pad;
        ymax += pad;
        let tspan = if tmax > tmin { tmax - tmin } else { 1.0 };
        let sx = |t: f64| m + (t - tmin) / tspan * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - ymin) / (ymax - ymin) * (h - 2.0 * m);
        let line = |pick: &dyn Fn(&(f64, f64)) -> f64| {
            self.t_values
                .iter()
                .zip(&self.z_values)
                .map(|(t, z)| format!("{:.2},{:.2}", sx(*t), sy(pick(z))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{m}" y="{}" font-family="sans-serif" font-size="14">{}</text>"#,
            m * 0.6,
            escape(title)
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="black" points="{m},{m} {m},{} {},{}"/>"#,
            h - m,
            w - m,
            h - m
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">t</text>"#,
            w - m + 8.0,
            h - m + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{ymax:.6e}</text>"#,
            m
        );
        let _ = writeln!(
            svg,
            r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{ymin:.6e}</text>"#,
            h - m
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            line(&|z| z.0)
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="darkorange" stroke-width="2" stroke-dasharray="6,3" points="{}"/>"#,
            line(&|z| z.1)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="steelblue">Re Z</text>"#,
            w - m - 80.0,
            m - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="darkorange">Im Z</text>"#,
            w - m - 40.0,
            m - 10.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Evenly spaced `t` grid on `[0, t_max]` with `steps + 1` points (a single
/// point `0` when `steps == 0`).
pub fn t_grid(t_max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

/// Quadrature order used for a sweep up to `t_max`: grows linearly in `t`.
pub fn sweep_order(base: usize, t_max: f64) -> usize {
    base + (3.0 * t_max.max(0.0)).ceil() as usize
}

/// Largest `|Δ_𝔤 P|` over sample points of every chart.
pub fn closedness_residual(p: &JetField, geom: &Geometry, phi: f64) -> f64 {
    let d = equivariant_delta_unchecked(p, geom, phi);
    geom.sample_points(4)
        .iter()
        .map(|q| d.values(q).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max)
}

/// `Z(t) = ∫_M [(P⌞vol) ∧ e^{it dγ}]_top e^{−itφ γ(X)}`.
pub fn z_gamma_sweep(
    p: &EquivariantElement,
    gamma: &JetField,
    geom: &Geometry,
    phi: f64,
    t_values: &[f64],
    tolerance: f64,
) -> Result<SweepResult> {
    if t_values.is_empty() || t_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("t grid must be nonempty and sorted".into()));
    }
    let n = geom.dim();
    let pf = p.at(phi);
    let closed = closedness_residual(&pf, geom, phi);
    let mut warnings = Vec::new();
    if closed > 1e-8 {
        warnings.push(format!("element is not equivariantly closed: |Δ_𝔤 P| up to {closed:.3e}"));
    }
    let t_max = t_values.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let order = sweep_order(geom.quadrature_order(), t_max);
    let c = geom.integration_chart();
    let chart = geom.chart(c);
    let grid = QuadratureGrid::new(&chart.domain, order)?;
    let sigma = chart.orientation;
    let top = (1usize << n) - 1;
    let density = contract_volume(&pf, geom.volume());
    let dgamma = de_rham_d(gamma);
    let t_owned = t_values.to_vec();
    let z: Vec<Complex64> = grid.integrate(|x| {
        let q = ChartPoint::new(c, x.to_vec());
        let a = density.blades_value(&q);
        let dg = dgamma.blades_value(&q);
        let gx: f64 = {
            let gv = gamma.blades_value(&q);
            let xv = geom.action_vector(&q);
            (0..n).map(|i| gv.c[1 << i] * xv[i]).sum()
        };
        // A_j = [(P⌞vol) ∧ (dγ)^j / j!]_top
        let mut coeffs = Vec::with_capacity(n / 2 + 1);
        let mut term: Blades<f64> = a;
        for j in 0..=n / 2 {
            if j > 0 {
                term = term.wedge(&dg).scale(1.0 / j as f64);
            }
            coeffs.push(sigma * term.c[top]);
        }
        t_owned
            .iter()
            .map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut it = Complex64::new(1.0, 0.0);
                for a in &coeffs {
                    acc += it * a;
                    it *= Complex64::new(0.0, t);
                }
                acc * Complex64::new(0.0, -t * phi * gx).exp()
            })
            .collect()
    })?;
    let z0 = z[0];
    let max_deviation = z.iter().map(|v| (v - z0).norm()).fold(0.0, f64::max);
    let verdict = if max_deviation <= 10.0 * tolerance {
        Verdict::Closed
    } else {
        Verdict::NonClosed
    };
    Ok(SweepResult {
        t_values: t_values.to_vec(),
        z_values: z.iter().map(|v| (v.re, v.im)).collect(),
        max_deviation,
        verdict,
        closedness_residual: closed,
        quadrature_order: order,
        warnings,
    })
}

/// `∫_locus integrand × (Riemannian density of the locus)`; isolated points
/// contribute the integrand value.
pub fn integrate_over_locus<F>(locus: &FixedLocus, integrand: F, geom: &Geometry, order: usize) -> Result<f64>
where
    F: Fn(&LocusSample) -> Result<f64> + Sync + Send,
{
    match locus {
        FixedLocus::Point(p) => integrand(&LocusSample {
            point: p.clone(),
            tangents: vec![],
        }),
        FixedLocus::Patch(patch) => {
            let grid = QuadratureGrid::new(&patch.domain, order)?;
            let failure = std::sync::Mutex::new(None);
            let total = grid.integrate(|u| {
                let s = patch.sample(u);
                match geom.locus_density(&s).and_then(|d| integrand(&s).map(|v| v * d)) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.lock().expect("poisoned").get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = failure.into_inner().expect("poisoned") {
                return Err(e);
            }
            Ok(total)
        }
    }
}

/// Leading-order stationary-phase approximation of `∫ f e^{itS} vol`:
/// `Σ_C (2π/t)^{k/2} e^{iπ sgn/4} ∫_C f e^{itS} ρ / |det Hess_N S|^{1/2}`
/// over the critical loci `C` of codimension `k`, where `ρ = vol / vol_g`.
pub fn stationary_phase_estimate(
    s: &JetField,
    f: &JetField,
    geom: &Geometry,
    crit: &[FixedLocus],
    t: f64,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Config("stationary phase needs t > 0".into()));
    }
    let n = geom.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for locus in crit {
        let codim = n - locus.dim();
        let mut signature = None;
        let sample_fn = |sample: &LocusSample| -> Result<(f64, f64, i32)> {
            let h = geom.normal_hessian_of(s, sample)?;
            if h.det.abs() < crate::geometry::MORSE_BOTT_TOLERANCE {
                return Err(Error::MorseBottViolation { det: h.det });
            }
            let rho = geom.volume_coefficient(&sample.point) / geom.metric_volume_coefficient(&sample.point);
            Ok((f.value(&sample.point) * rho / h.det.abs().sqrt(), s.value(&sample.point), h.signature))
        };
        for sample in locus.check_samples() {
            let (_, _, sg) = sample_fn(&sample)?;
            match signature {
                None => signature = Some(sg),
                Some(prev) if prev != sg => {
                    return Err(Error::MorseBottViolation { det: f64::NAN });
                }
                _ => {}
            }
        }
        let re = integrate_over_locus(
            locus,
            |smp| sample_fn(smp).map(|(a, sv, _)| a * (t * sv).cos()),
            geom,
            geom.quadrature_order(),
        )?;
        let im = integrate_over_locus(
            locus,
            |smp| sample_fn(smp).map(|(a, sv, _)| a * (t * sv).sin()),
            geom,
            geom.quadrature_order(),
        )?;
        let sgn = signature.unwrap_or(0) as f64;
        let prefactor = (2.0 * PI / t).powf(codim as f64 / 2.0) * Complex64::new(0.0, PI / 4.0 * sgn).exp();
        total += prefactor * Complex64::new(re, im);
    }
    Ok(total)
}

/// Vector-type blade field helper: the constant function `c`.
pub fn constant_function(n: usize, c: f64) -> JetField {
    JetField::constant(n, crate::field::Shape::Scalar, vec![c]).as_blades(Variance::Vector)
}
