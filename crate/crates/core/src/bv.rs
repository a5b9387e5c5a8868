//! De Rham differential, BV Laplacian, Schouten–Nijenhuis bracket and their
//! equivariant versions.
//!
//! Every operator maps [`JetField`]s to [`JetField`]s: asking for the result
//! at jet order `r` asks the inputs for order `r + 1` (or `r + 2` for
//! second-order operators) and differentiates exactly.
//!
//! Sign conventions. The bracket is normalized so that
//! `Δ(P∧Q) = ΔP∧Q + (−1)^{|P|} P∧ΔQ + (−1)^{|P|} {P,Q}` with
//! `Δ = vol⁻¹ ∘ d ∘ (⌞vol)`. With that normalization `{X, f} = −X(f)` and
//! `{X, Y} = −[X, Y]` for vector fields, and `Lie_X := {X, ·}` satisfies
//! `Δ_𝔤² = φ Lie_X`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exterior::{reversion_sign, wedge_sign, Blades, Variance};
use crate::field::{ChartPoint, JetField, Shape};
use crate::geometry::{vector_components, Geometry};
use crate::jet::Jet;

/// Tolerance of the invariant-volume check `div_vol X = 0`.
pub const INVARIANT_VOLUME_TOLERANCE: f64 = 1e-8;

fn top(n: usize) -> usize {
    (1usize << n) - 1
}

/// `dα` of blade jets at order `r + 1`, returned at order `r`.
pub fn d_blades(alpha: &Blades<Jet>) -> Blades<Jet> {
    let n = alpha.n;
    let order = alpha.template().order();
    assert!(order > 0, "de Rham d needs jets of positive order");
    let mut out = Blades::zeros(n, Variance::Form, &alpha.template().truncate(order - 1));
    for (mask, a) in alpha.c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let s = wedge_sign(1 << i, mask as u32);
            out.c[mask | (1 << i)].add_scaled(&a.partial(i), s);
        }
    }
    out
}

/// The multivector `P` with `P⌞vol = α`, for `vol = v · top`.
pub fn volume_inverse_blades(alpha: &Blades<Jet>, v: &Jet) -> Blades<Jet> {
    let n = alpha.n;
    let t = top(n) as u32;
    let inv = v.recip();
    let mut out = Blades::zeros(n, Variance::Vector, &alpha.template().mul_jet(&inv));
    for (mask, a) in alpha.c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let i = t & !(mask as u32);
        let s = reversion_sign(i.count_ones() as usize) * wedge_sign(i, mask as u32);
        out.c[i as usize] = a.mul_jet(&inv).scale(s);
    }
    out
}

fn left_xi_derivative(b: &Blades<Jet>, i: usize) -> Blades<Jet> {
    let mut out = Blades::zeros(b.n, b.variance, b.template());
    for (mask, c) in b.c.iter().enumerate() {
        if mask & (1 << i) == 0 || c.is_zero() {
            continue;
        }
        let below = (mask & ((1 << i) - 1)).count_ones();
        let s = if below % 2 == 0 { 1.0 } else { -1.0 };
        out.c[mask & !(1 << i)] = c.scale(s);
    }
    out
}

fn right_xi_derivative(b: &Blades<Jet>, i: usize) -> Blades<Jet> {
    let mut out = Blades::zeros(b.n, b.variance, b.template());
    for (mask, c) in b.c.iter().enumerate() {
        if mask & (1 << i) == 0 || c.is_zero() {
            continue;
        }
        let above = (mask >> (i + 1)).count_ones();
        let s = if above % 2 == 0 { 1.0 } else { -1.0 };
        out.c[mask & !(1 << i)] = c.scale(s);
    }
    out
}

/// Schouten bracket of blade jets at order `r + 1`, returned at order `r`:
/// `Σ_i (∂_i P)(∂⃗_{ξ_i} Q) − (P ∂⃖_{ξ_i})(∂_i Q)`.
pub fn schouten_blades(p: &Blades<Jet>, q: &Blades<Jet>) -> Blades<Jet> {
    let n = p.n;
    let order = p.template().order().min(q.template().order());
    assert!(order > 0, "Schouten bracket needs jets of positive order");
    let p = p.truncate(order);
    let q = q.truncate(order);
    let mut out = Blades::zeros(n, Variance::Vector, &p.template().truncate(order - 1));
    for i in 0..n {
        out.add_scaled(&p.partial(i).wedge(&left_xi_derivative(&q, i)), 1.0);
        out.add_scaled(&right_xi_derivative(&p, i).wedge(&q.partial(i)), -1.0);
    }
    out
}

/// De Rham differential of a form field.
pub fn de_rham_d(alpha: &JetField) -> JetField {
    let a = alpha.as_blades(Variance::Form);
    JetField::from_evaluator(a.n(), Shape::Blades(Variance::Form), move |chart, x, order| {
        d_blades(&a.blades_taylor(&ChartPoint::new(chart, x.to_vec()), order + 1)).c
    })
}

/// `P ⌞ vol`.
pub fn contract_volume(p: &JetField, vol: &JetField) -> JetField {
    let p = p.as_blades(Variance::Vector);
    p.zip_blades(vol, Variance::Form, |pb, vb| pb.left_contract(&vb))
}

/// Inverse of [`contract_volume`].
pub fn volume_inverse(alpha: &JetField, vol: &JetField) -> JetField {
    let a = alpha.as_blades(Variance::Form);
    let vol = vol.clone();
    let n = a.n();
    JetField::from_evaluator(n, Shape::Blades(Variance::Vector), move |chart, x, order| {
        let p = ChartPoint::new(chart, x.to_vec());
        let v = vol.taylor(&p, order).swap_remove(top(n));
        volume_inverse_blades(&a.blades_taylor(&p, order), &v).c
    })
}

/// BV Laplacian `Δ = vol⁻¹ ∘ d ∘ (⌞vol)` for an explicit volume form field.
pub fn bv_laplacian_with(p: &JetField, vol: &JetField) -> JetField {
    volume_inverse(&de_rham_d(&contract_volume(p, vol)), vol)
}

/// BV Laplacian with respect to the geometry's volume form.
pub fn bv_laplacian(p: &JetField, geom: &Geometry) -> JetField {
    bv_laplacian_with(p, geom.volume())
}

/// Schouten–Nijenhuis bracket of two multivector fields.
pub fn schouten(p: &JetField, q: &JetField) -> JetField {
    let p = p.as_blades(Variance::Vector);
    let q = q.as_blades(Variance::Vector);
    JetField::from_evaluator(p.n(), Shape::Blades(Variance::Vector), move |chart, x, order| {
        let pt = ChartPoint::new(chart, x.to_vec());
        schouten_blades(&p.blades_taylor(&pt, order + 1), &q.blades_taylor(&pt, order + 1)).c
    })
}

/// Pointwise wedge product of two blade (or scalar) fields.
pub fn wedge_fields(p: &JetField, q: &JetField) -> JetField {
    let variance = p.variance().or(q.variance()).unwrap_or(Variance::Vector);
    p.as_blades(variance)
        .zip_blades(&q.as_blades(variance), variance, |a, b| a.wedge(&b))
}

/// Pointwise exponential of a blade field (`e^{P_0} Σ_j P_+^j / j!`).
pub fn exp_field(p: &JetField) -> JetField {
    let variance = p.variance().unwrap_or(Variance::Vector);
    p.as_blades(variance).map_blades(variance, |b| b.exp())
}

/// Interior product `ι_X α` of a form field by the action field.
pub fn interior_action(alpha: &JetField, geom: &Geometry) -> JetField {
    contract_volume(geom.action_field(), alpha)
}

/// `Lie_X P := {X, P}` on multivector fields.
pub fn lie_multivector(p: &JetField, geom: &Geometry) -> JetField {
    schouten(geom.action_field(), p)
}

/// Cartan Lie derivative `L_X α = d ι_X α + ι_X dα` on forms.
pub fn lie_form(alpha: &JetField, geom: &Geometry) -> JetField {
    de_rham_d(&interior_action(alpha, geom)).add(&interior_action(&de_rham_d(alpha), geom))
}

type Family = Arc<dyn Fn(f64) -> JetField + Send + Sync>;

/// A field depending on the equivariant parameter `φ`, re-evaluated at any
/// numeric `φ`.
#[derive(Clone)]
pub struct EquivariantElement {
    n: usize,
    variance: Variance,
    family: Family,
}

impl fmt::Debug for EquivariantElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquivariantElement")
            .field("n", &self.n)
            .field("variance", &self.variance)
            .finish()
    }
}

impl EquivariantElement {
    pub fn new<F>(n: usize, variance: Variance, family: F) -> EquivariantElement
    where
        F: Fn(f64) -> JetField + Send + Sync + 'static,
    {
        EquivariantElement {
            n,
            variance,
            family: Arc::new(family),
        }
    }

    /// `φ`-independent element.
    pub fn constant(field: JetField, variance: Variance) -> EquivariantElement {
        let f = field.as_blades(variance);
        EquivariantElement::new(f.n(), variance, move |_| f.clone())
    }

    /// `e^{S + φ I}` for a scalar `S` and a multivector `I`.
    pub fn exp_of(s: &JetField, i: &JetField) -> EquivariantElement {
        let s = s.as_blades(Variance::Vector);
        let i = i.as_blades(Variance::Vector);
        EquivariantElement::new(s.n(), Variance::Vector, move |phi| exp_field(&s.lin_comb(1.0, &i, phi)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn at(&self, phi: f64) -> JetField {
        (self.family)(phi)
    }
}

/// Largest `|div_vol X|` over sample points of every chart.
pub fn divergence_of_action(geom: &Geometry) -> f64 {
    let div = bv_laplacian(geom.action_field(), geom);
    geom.sample_points(4)
        .iter()
        .map(|p| div.values(p)[0].abs())
        .fold(0.0, f64::max)
}

fn require_invariant_volume(geom: &Geometry) -> Result<()> {
    let residual = divergence_of_action(geom);
    if residual > INVARIANT_VOLUME_TOLERANCE {
        return Err(Error::InvariantVolumeViolation { residual });
    }
    Ok(())
}

/// `Δ_𝔤 P = ΔP − φ X∧P` at the given `φ`; the volume must be invariant.
pub fn equivariant_delta(p: &EquivariantElement, geom: &Geometry, phi: f64) -> Result<JetField> {
    require_invariant_volume(geom)?;
    Ok(equivariant_delta_unchecked(&p.at(phi), geom, phi))
}

/// `Δ_𝔤` on a fixed field, without the invariance check.
pub fn equivariant_delta_unchecked(p: &JetField, geom: &Geometry, phi: f64) -> JetField {
    bv_laplacian(p, geom).lin_comb(1.0, &wedge_fields(geom.action_field(), p), -phi)
}

/// `d_𝔤 α = dα − φ ι_X α`.
pub fn equivariant_d(alpha: &EquivariantElement, geom: &Geometry, phi: f64) -> Result<JetField> {
    require_invariant_volume(geom)?;
    Ok(equivariant_d_unchecked(&alpha.at(phi), geom, phi))
}

pub fn equivariant_d_unchecked(alpha: &JetField, geom: &Geometry, phi: f64) -> JetField {
    let a = alpha.as_blades(Variance::Form);
    de_rham_d(&a).lin_comb(1.0, &interior_action(&a, geom), -phi)
}

/// Residuals of `ΔS + ½{S,S} = 0`, `ΔI + {S,I} = X` and `{I,I} = 0`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MasterResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl MasterResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

pub fn master_equation_residuals(s: &JetField, i: &JetField, geom: &Geometry, p: &ChartPoint) -> MasterResiduals {
    let s = s.as_blades(Variance::Vector);
    let r1 = bv_laplacian(&s, geom).lin_comb(1.0, &schouten(&s, &s), 0.5);
    let r2 = bv_laplacian(i, geom)
        .add(&schouten(&s, i))
        .sub(geom.action_field());
    let r3 = schouten(i, i);
    let norm = |f: &JetField| f.values(p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    MasterResiduals {
        r1: norm(&r1),
        r2: norm(&r2),
        r3: norm(&r3),
    }
}

/// Modular vector field `Δ(π)` of a bivector.
pub fn modular_field(pi: &JetField, geom: &Geometry) -> JetField {
    bv_laplacian(pi, geom)
}

/// Max-norm of `X − Δ(π) − {h, π}` at `p`.
pub fn hamiltonian_residual(h: &JetField, pi: &JetField, geom: &Geometry, p: &ChartPoint) -> f64 {
    let r = geom
        .action_field()
        .sub(&modular_field(pi, geom))
        .sub(&schouten(&h.as_blades(Variance::Vector), pi));
    r.values(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Max-norm of `Lie_X π` at `p`; zero when the action is Poisson.
pub fn poisson_action_residual(pi: &JetField, geom: &Geometry, p: &ChartPoint) -> f64 {
    lie_multivector(pi, geom).values(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Divergence of a vector field as a scalar value, for diagnostics.
pub fn divergence_at(x: &JetField, geom: &Geometry, p: &ChartPoint) -> f64 {
    bv_laplacian(x, geom).values(p)[0]
}

/// Vector components of the action field at `p`, for diagnostics.
pub fn action_components(geom: &Geometry, p: &ChartPoint) -> Vec<f64> {
    vector_components(&geom.action_field().blades_taylor(p, 0))
        .iter()
        .map(Jet::value)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, CircleAction};

    fn plane() -> Geometry {
        let chart = Chart::new("xy", vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let metric = JetField::constant(2, Shape::Tensor2, vec![1.0, 0.0, 0.0, 1.0]);
        let x = JetField::uniform(2, Shape::Blades(Variance::Vector), |v| {
            let z = v[0].zero_like();
            vec![z.clone(), -&v[1], v[0].clone(), z]
        });
        Geometry::new("plane", vec![chart], metric, CircleAction { field: x, fixed_loci: vec![] }, 0).unwrap()
    }

    fn vector2(f: impl Fn(&[Jet]) -> [Jet; 2] + Send + Sync + 'static) -> JetField {
        JetField::uniform(2, Shape::Blades(Variance::Vector), move |v| {
            let [a, b] = f(v);
            vec![v[0].zero_like(), a, b, v[0].zero_like()]
        })
    }

    #[test]
    fn d_of_x_dy() {
        let a = JetField::uniform(2, Shape::Blades(Variance::Form), |v| {
            let z = v[0].zero_like();
            vec![z.clone(), z.clone(), v[0].clone(), z]
        });
        let da = de_rham_d(&a).values(&ChartPoint::new(0, vec![0.2, 0.5]));
        assert_eq!(da, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn divergence_of_radial_field() {
        let g = plane();
        let x = vector2(|v| [v[0].clone(), v[0].zero_like()]);
        let d = bv_laplacian(&x, &g).values(&ChartPoint::new(0, vec![0.3, -0.1]));
        assert!((d[0] - 1.0).abs() < 1e-14);
        assert!(d[1..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn bracket_of_vector_fields_is_minus_lie_bracket() {
        // {x∂_y, y∂_x} = −[x∂_y, y∂_x] = −(x∂_x − y∂_y)
        let a = vector2(|v| [v[0].zero_like(), v[0].clone()]);
        let b = vector2(|v| [v[1].clone(), v[0].zero_like()]);
        let p = ChartPoint::new(0, vec![0.7, -0.4]);
        let r = schouten(&a, &b).values(&p);
        assert!((r[1] + 0.7).abs() < 1e-14 && (r[2] - (-0.4)).abs() < 1e-14);
    }

    #[test]
    fn bracket_with_function_is_minus_derivative() {
        let x = vector2(|v| [v[1].clone(), v[0].mul_jet(&v[0])]);
        let f = JetField::uniform(2, Shape::Scalar, |v| vec![v[0].sin().mul_jet(&v[1])]);
        let p = ChartPoint::new(0, vec![0.3, 0.8]);
        let r = schouten(&x, &f).values(&p)[0];
        let xf = 0.8 * (0.3f64.cos() * 0.8) + 0.09 * 0.3f64.sin();
        assert!((r + xf).abs() < 1e-14);
    }

    #[test]
    fn equivariant_delta_of_one() {
        let g = plane();
        let one = EquivariantElement::constant(JetField::constant(2, Shape::Scalar, vec![1.0]), Variance::Vector);
        let p = ChartPoint::new(0, vec![0.4, 0.1]);
        let r = equivariant_delta(&one, &g, 2.0).unwrap().values(&p);
        assert!((r[1] - 2.0 * 0.1).abs() < 1e-14 && (r[2] + 2.0 * 0.4).abs() < 1e-14);
    }

    #[test]
    fn scalar_master_equation_is_trivial() {
        let g = plane();
        let s = JetField::uniform(2, Shape::Scalar, |v| vec![v[0].mul_jet(&v[1]).exp()]);
        let zero = JetField::zero(2, Shape::Blades(Variance::Vector));
        let r = master_equation_residuals(&s, &zero, &g, &ChartPoint::new(0, vec![0.2, 0.3]));
        assert_eq!(r.r1, 0.0);
    }
}
