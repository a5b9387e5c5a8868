//! Built-in geometries with closed-form jets and known answers.
//!
//! The unit sphere uses a spherical integration chart `(θ, φ)` whose poles
//! sit on measure-zero faces, plus two projection charts `(x, y)` around the
//! poles where the action field has regular coordinates and the fixed-point
//! data (weights, Hessians) are evaluated.

use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bv::EquivariantElement;
use crate::error::{Error, Result};
use crate::exterior::Variance;
use crate::field::{ChartPoint, JetField, Shape};
use crate::geometry::{
    Chart, CircleAction, EquivariantMap, FixedLocus, Geometry, LocusPatch, DEFAULT_QUADRATURE_ORDER,
};
use crate::jet::Jet;

/// Half-width of the pole charts' coordinate box.
pub const POLE_CHART_RADIUS: f64 = 0.7;

/// Which evaluator a catalog entry is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    BerlineVergne,
    AtiyahBott,
    CohftDiscrete,
    CohftBott,
    DhPoisson,
    RankTable,
    WeightContainment,
    Sweep,
}

impl Evaluator {
    pub const ALL: [Evaluator; 8] = [
        Evaluator::BerlineVergne,
        Evaluator::AtiyahBott,
        Evaluator::CohftDiscrete,
        Evaluator::CohftBott,
        Evaluator::DhPoisson,
        Evaluator::RankTable,
        Evaluator::WeightContainment,
        Evaluator::Sweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Evaluator::BerlineVergne => "berline_vergne",
            Evaluator::AtiyahBott => "atiyah_bott",
            Evaluator::CohftDiscrete => "cohft_discrete",
            Evaluator::CohftBott => "cohft_bott",
            Evaluator::DhPoisson => "dh_poisson",
            Evaluator::RankTable => "rank_table",
            Evaluator::WeightContainment => "weight_containment",
            Evaluator::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Evaluator> {
        Evaluator::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Registry metadata of an entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub evaluators: Vec<Evaluator>,
    /// Expected direct integral at default parameters.
    pub expected: Option<f64>,
    pub provenance: &'static str,
    /// Whether the entry's main element is equivariantly closed.
    pub closed: bool,
}

/// Build parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogParams {
    /// Action speed multiplier `k` (`X = k ∂_φ`).
    pub k: i32,
    pub quadrature_order: usize,
}

impl Default for CatalogParams {
    fn default() -> Self {
        CatalogParams {
            k: 1,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }
}

/// JSON geometry descriptor: a registry id plus build parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDescriptor {
    pub entry: String,
    #[serde(default)]
    pub params: CatalogParams,
}

impl GeometryDescriptor {
    pub fn from_json(text: &str) -> Result<GeometryDescriptor> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("geometry descriptor: {e}")))
    }

    pub fn build(&self) -> Result<Instance> {
        build(&self.entry, &self.params)
    }
}

/// A built entry: geometry, fields and expectations.
#[derive(Clone, Debug)]
pub struct Instance {
    pub entry: CatalogEntry,
    pub params: CatalogParams,
    pub geometry: Geometry,
    /// Hamiltonian / height function `h`.
    pub h: Option<JetField>,
    /// Poisson bivector `π` (the `I_X` of the master equations).
    pub pi: Option<JetField>,
    /// The element fed to the localization evaluators.
    pub p: EquivariantElement,
    /// Element used as a non-closed negative control in sweeps.
    pub negative_control: Option<EquivariantElement>,
    /// 1-form `γ` for the sweep (defaults to `X^♭`).
    pub gamma: JetField,
    pub map: Option<EquivariantMap>,
    pub expected_direct: Option<f64>,
}

/// `2π(e − e⁻¹)`, the integral of `e^{cos θ}` over the unit sphere.
pub fn sphere_dh_value() -> f64 {
    2.0 * PI * (E - 1.0 / E)
}

/// Modified Bessel function `I_0(x)` by its power series.
fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= (x / 2.0).powi(2) / (k * k) as f64;
        sum += term;
    }
    sum
}

pub fn registry() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "sphere_dh",
            description: "unit S², X = k∂_φ, h = cos θ, π = k ω⁻¹, vol = ω",
            evaluators: vec![
                Evaluator::BerlineVergne,
                Evaluator::AtiyahBott,
                Evaluator::DhPoisson,
                Evaluator::RankTable,
                Evaluator::Sweep,
            ],
            expected: Some(sphere_dh_value()),
            provenance: "∫ e^{cos θ} sin θ dθ dφ = 2π(e − e⁻¹)",
            closed: true,
        },
        CatalogEntry {
            id: "sphere_cohft",
            description: "unit S² with F = x + iy of weight k",
            evaluators: vec![
                Evaluator::CohftDiscrete,
                Evaluator::CohftBott,
                Evaluator::BerlineVergne,
                Evaluator::AtiyahBott,
                Evaluator::WeightContainment,
            ],
            expected: Some(sphere_dh_value()),
            provenance: "same integrand as sphere_dh",
            closed: true,
        },
        CatalogEntry {
            id: "s2xs2_bott",
            description: "S²×S², action on the first factor, fixed locus {N,S}×S²",
            evaluators: vec![Evaluator::AtiyahBott, Evaluator::Sweep],
            expected: Some(sphere_dh_value() * 4.0 * PI),
            provenance: "product of the sphere integral and the area 4π",
            closed: true,
        },
        CatalogEntry {
            id: "free_control",
            description: "flat torus, free action X = k∂_x, non-closed P' = e^{cos y}",
            evaluators: vec![Evaluator::Sweep],
            expected: Some(4.0 * PI * PI * bessel_i0(1.0)),
            provenance: "∫ e^{cos y} dx dy = 4π² I₀(1)",
            closed: false,
        },
        CatalogEntry {
            id: "degenerate_pi",
            description: "unit S² with π scaled by (1 + cos θ)/2, vanishing at the south pole",
            evaluators: vec![Evaluator::RankTable],
            expected: Some(sphere_dh_value()),
            provenance: "same integrand as sphere_dh",
            closed: false,
        },
    ]
}

pub fn entry(id: &str) -> Result<CatalogEntry> {
    registry()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// Entries supporting `evaluator`.
pub fn filter(evaluator: Evaluator) -> Vec<CatalogEntry> {
    registry()
        .into_iter()
        .filter(|e| e.evaluators.contains(&evaluator))
        .collect()
}

pub fn build(id: &str, params: &CatalogParams) -> Result<Instance> {
    let entry = entry(id)?;
    if params.quadrature_order == 0 {
        return Err(Error::Config("quadrature order must be positive".into()));
    }
    let mut inst = match id {
        "sphere_dh" => sphere_instance(entry, params, PiScale::Uniform)?,
        "sphere_cohft" => {
            let mut inst = sphere_instance(entry, params, PiScale::Uniform)?;
            inst.map = Some(sphere_map(&inst.geometry, params.k)?);
            inst
        }
        "degenerate_pi" => sphere_instance(entry, params, PiScale::VanishingAtSouth)?,
        "s2xs2_bott" => s2xs2_instance(entry, params)?,
        "free_control" => torus_instance(entry, params)?,
        _ => unreachable!("registry and builder disagree"),
    };
    inst.geometry = inst.geometry.with_quadrature_order(params.quadrature_order)?;
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Unit sphere

fn zero(v: &[Jet]) -> Jet {
    v[0].zero_like()
}

/// `z = ±√(1 − x² − y²)` on a pole chart.
fn pole_height(v: &[Jet], sign: f64) -> Jet {
    let r2 = v[0].mul_jet(&v[0]) + v[1].mul_jet(&v[1]);
    (-r2).add_scalar(1.0).sqrt().scale(sign)
}

/// Chart 0: spherical; chart 1: north pole; chart 2: south pole.
const POLE_SIGNS: [f64; 2] = [1.0, -1.0];

fn sphere_charts() -> Result<Vec<Chart>> {
    let r = POLE_CHART_RADIUS;
    let spherical = Chart::new("spherical", vec![(0.0, PI), (0.0, 2.0 * PI)])?
        .with_vanishing_faces(vec![(true, true), (false, false)])
        .with_ambient(|x| vec![x[0].sin() * x[1].cos(), x[0].sin() * x[1].sin(), x[0].cos()]);
    let mut charts = vec![spherical];
    for (name, sign) in [("north", POLE_SIGNS[0]), ("south", POLE_SIGNS[1])] {
        charts.push(
            Chart::new(name, vec![(-r, r), (-r, r)])?
                .with_orientation(sign)
                .with_ambient(move |x| vec![x[0], x[1], sign * (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt()]),
        );
    }
    Ok(charts)
}

/// Round metric components in the chart `c` (spherical or pole).
fn sphere_metric_jets(c: usize, v: &[Jet]) -> Vec<Jet> {
    if c == 0 {
        let s = v[0].sin();
        vec![v[0].constant_like(1.0), zero(v), zero(v), s.mul_jet(&s)]
    } else {
        let z2 = (v[0].mul_jet(&v[0]) + v[1].mul_jet(&v[1])).scale(-1.0).add_scalar(1.0);
        let inv = z2.recip();
        let xx = v[0].mul_jet(&v[0]).mul_jet(&inv);
        let xy = v[0].mul_jet(&v[1]).mul_jet(&inv);
        let yy = v[1].mul_jet(&v[1]).mul_jet(&inv);
        vec![xx.add_scalar(1.0), xy.clone(), xy, yy.add_scalar(1.0)]
    }
}

/// Rotation `k ∂_φ` as vector components.
fn sphere_action_jets(c: usize, v: &[Jet], k: f64) -> [Jet; 2] {
    if c == 0 {
        [zero(v), v[0].constant_like(k)]
    } else {
        [v[1].scale(-k), v[0].scale(k)]
    }
}

fn sphere_height_jet(c: usize, v: &[Jet]) -> Jet {
    if c == 0 {
        v[0].cos()
    } else {
        pole_height(v, POLE_SIGNS[c - 1])
    }
}

/// `π^{12}` of `k ω⁻¹` in chart `c`.
fn sphere_pi_jet(c: usize, v: &[Jet], k: f64) -> Jet {
    if c == 0 {
        v[0].sin().recip().scale(-k)
    } else {
        // −σ k |z| = −k z
        pole_height(v, POLE_SIGNS[c - 1]).scale(-k)
    }
}

fn per_chart<F>(n: usize, shape: Shape, charts: usize, f: F) -> JetField
where
    F: Fn(usize, &[Jet]) -> Vec<Jet> + Send + Sync + 'static,
{
    let f = std::sync::Arc::new(f);
    JetField::from_charts(
        n,
        shape,
        (0..charts)
            .map(|c| {
                let f = f.clone();
                move |v: &[Jet]| f(c, v)
            })
            .collect(),
    )
}

fn vector2(a: Jet, b: Jet) -> Vec<Jet> {
    let z = a.zero_like();
    vec![z.clone(), a, b, z]
}

fn bivector2(c: Jet) -> Vec<Jet> {
    let z = c.zero_like();
    vec![z.clone(), z.clone(), z, c]
}

#[derive(Clone, Copy)]
enum PiScale {
    Uniform,
    VanishingAtSouth,
}

fn sphere_geometry(k: i32) -> Result<Geometry> {
    let kf = k as f64;
    let metric = per_chart(2, Shape::Tensor2, 3, sphere_metric_jets);
    let action = per_chart(2, Shape::Blades(Variance::Vector), 3, move |c, v| {
        let [a, b] = sphere_action_jets(c, v, kf);
        vector2(a, b)
    });
    let fixed_loci = if k == 0 {
        vec![]
    } else {
        vec![
            FixedLocus::Point(ChartPoint::new(1, vec![0.0, 0.0])),
            FixedLocus::Point(ChartPoint::new(2, vec![0.0, 0.0])),
        ]
    };
    let name = if k == 1 { "S2".to_string() } else { format!("S2 (k={k})") };
    Geometry::new(
        name,
        sphere_charts()?,
        metric,
        CircleAction {
            field: action,
            fixed_loci,
        },
        0,
    )
}

/// Height function `h = cos θ` on the unit sphere.
pub fn sphere_height() -> JetField {
    per_chart(2, Shape::Scalar, 3, |c, v| vec![sphere_height_jet(c, v)])
}

fn sphere_instance(entry: CatalogEntry, params: &CatalogParams, scale: PiScale) -> Result<Instance> {
    let k = params.k as f64;
    let geometry = sphere_geometry(params.k)?;
    let h = sphere_height();
    let pi = per_chart(2, Shape::Blades(Variance::Vector), 3, move |c, v| {
        let base = sphere_pi_jet(c, v, k);
        let c = match scale {
            PiScale::Uniform => base,
            PiScale::VanishingAtSouth => base.mul_jet(&sphere_height_jet(c, v).add_scalar(1.0).scale(0.5)),
        };
        bivector2(c)
    });
    let p = EquivariantElement::exp_of(&h, &pi);
    let negative_control = Some(EquivariantElement::constant(crate::bv::exp_field(&h), Variance::Vector));
    let gamma = geometry.action_flat();
    Ok(Instance {
        expected_direct: entry.expected,
        entry,
        params: params.clone(),
        geometry,
        h: Some(h),
        pi: Some(pi),
        p,
        negative_control,
        gamma,
        map: None,
    })
}

/// `F = x + iy`, equivariant of weight `k` for `X = k ∂_φ`.
fn sphere_map(geom: &Geometry, k: i32) -> Result<EquivariantMap> {
    let map = per_chart(2, Shape::Components(2), 3, |c, v| {
        if c == 0 {
            let s = v[0].sin();
            vec![s.mul_jet(&v[1].cos()), s.mul_jet(&v[1].sin())]
        } else {
            vec![v[0].clone(), v[1].clone()]
        }
    });
    EquivariantMap::new(geom, vec![k], map, geom.fixed_loci().to_vec())
}

/// Equivariant map on the sphere with explicit weights, for weight-mismatch
/// checks: `F = x + iy` declared with weight `w`.
pub fn sphere_map_with_weight(geom: &Geometry, w: i32) -> Result<EquivariantMap> {
    sphere_map(geom, w)
}

// ---------------------------------------------------------------------------
// S² × S²

fn s2xs2_instance(entry: CatalogEntry, params: &CatalogParams) -> Result<Instance> {
    let k = params.k as f64;
    let sphere = sphere_charts()?;
    let second = &sphere[0];
    let mut charts = Vec::new();
    for first in &sphere {
        let mut domain = first.domain.clone();
        domain.extend(second.domain.iter().copied());
        let mut faces = first.boundary_measure_vanishes.clone();
        faces.extend(second.boundary_measure_vanishes.iter().copied());
        let (a, b) = (first.clone(), second.clone());
        charts.push(
            Chart::new(format!("{}×spherical", first.name), domain)?
                .with_orientation(first.orientation)
                .with_vanishing_faces(faces)
                .with_ambient(move |x| {
                    let mut out = a.ambient(&x[..2]).expect("sphere charts carry ambient maps");
                    out.extend(b.ambient(&x[2..]).expect("sphere charts carry ambient maps"));
                    out
                }),
        );
    }
    let metric = per_chart(4, Shape::Tensor2, 3, |c, v| {
        let g1 = sphere_metric_jets(c, &v[..2]);
        let g2 = sphere_metric_jets(0, &v[2..]);
        let mut g = vec![zero(v); 16];
        for i in 0..2 {
            for j in 0..2 {
                g[i * 4 + j] = g1[i * 2 + j].clone();
                g[(i + 2) * 4 + j + 2] = g2[i * 2 + j].clone();
            }
        }
        g
    });
    let action = per_chart(4, Shape::Blades(Variance::Vector), 3, move |c, v| {
        let [a, b] = sphere_action_jets(c, &v[..2], k);
        let mut out = vec![zero(v); 16];
        out[1] = a;
        out[2] = b;
        out
    });
    let fixed_loci = ["N×S²", "S×S²"]
        .iter()
        .enumerate()
        .map(|(i, name)| {
            FixedLocus::Patch(LocusPatch::new(*name, i + 1, vec![(0.0, PI), (0.0, 2.0 * PI)], |u| {
                vec![u[0].zero_like(), u[0].zero_like(), u[0].clone(), u[1].clone()]
            }))
        })
        .collect();
    let geometry = Geometry::new(
        "S2xS2",
        charts,
        metric,
        CircleAction {
            field: action,
            fixed_loci,
        },
        0,
    )?;
    let h = per_chart(4, Shape::Scalar, 3, |c, v| vec![sphere_height_jet(c, &v[..2])]);
    let pi = per_chart(4, Shape::Blades(Variance::Vector), 3, move |c, v| {
        let mut out = vec![zero(v); 16];
        out[3] = sphere_pi_jet(c, &v[..2], k);
        out
    });
    let p = EquivariantElement::exp_of(&h, &pi);
    let negative_control = Some(EquivariantElement::constant(crate::bv::exp_field(&h), Variance::Vector));
    let gamma = geometry.action_flat();
    Ok(Instance {
        expected_direct: entry.expected,
        entry,
        params: params.clone(),
        geometry,
        h: Some(h),
        pi: Some(pi),
        p,
        negative_control,
        gamma,
        map: None,
    })
}

// ---------------------------------------------------------------------------
// Flat torus with a free action

fn torus_instance(entry: CatalogEntry, params: &CatalogParams) -> Result<Instance> {
    let k = params.k as f64;
    let chart = Chart::new("torus", vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)])?;
    let metric = JetField::constant(2, Shape::Tensor2, vec![1.0, 0.0, 0.0, 1.0]);
    let action = JetField::constant(2, Shape::Blades(Variance::Vector), vec![0.0, k, 0.0, 0.0]);
    let geometry = Geometry::new(
        "T2",
        vec![chart],
        metric,
        CircleAction {
            field: action,
            fixed_loci: vec![],
        },
        0,
    )?;
    let f = JetField::uniform(2, Shape::Scalar, |v| vec![v[1].cos()]);
    let p = EquivariantElement::constant(crate::bv::exp_field(&f), Variance::Vector);
    let gamma = geometry.action_flat();
    Ok(Instance {
        expected_direct: entry.expected,
        entry,
        params: params.clone(),
        geometry,
        h: Some(f),
        pi: None,
        p: p.clone(),
        negative_control: Some(p),
        gamma,
        map: None,
    })
}

// ---------------------------------------------------------------------------
// Stationary-phase fixtures

/// Phase, amplitude and critical loci of an oscillatory integral
/// `∫ f e^{itS} vol`.
#[derive(Clone, Debug)]
pub struct PhaseCase {
    pub name: &'static str,
    pub geometry: Geometry,
    pub phase: JetField,
    pub amplitude: JetField,
    pub critical: Vec<FixedLocus>,
}

/// Fresnel integral `∫ e^{−itx²/2} w(x) dx` on `(−4, 4)` with the smooth
/// cutoff `w = exp(−x⁴/16)` carried by the metric `w²`.
pub fn fresnel_case() -> Result<PhaseCase> {
    let chart = Chart::new("line", vec![(-4.0, 4.0)])?;
    let metric = JetField::uniform(1, Shape::Tensor2, |v| {
        let x2 = v[0].mul_jet(&v[0]);
        vec![x2.mul_jet(&x2).scale(-2.0 / 16.0).exp()]
    });
    let action = JetField::zero(1, Shape::Blades(Variance::Vector));
    let geometry = Geometry::new(
        "line",
        vec![chart],
        metric,
        CircleAction {
            field: action,
            fixed_loci: vec![],
        },
        0,
    )?;
    Ok(PhaseCase {
        name: "fresnel",
        geometry,
        phase: JetField::uniform(1, Shape::Scalar, |v| vec![v[0].mul_jet(&v[0]).scale(-0.5)]),
        amplitude: JetField::constant(1, Shape::Scalar, vec![1.0]),
        critical: vec![FixedLocus::Point(ChartPoint::new(0, vec![0.0]))],
    })
}

/// `∫_{S²} e^{it g(X,X)} vol` for `X = k∂_φ`: critical at the poles
/// (minimum) and along the equator (maximum).
pub fn sphere_phase_case(k: i32) -> Result<PhaseCase> {
    let geometry = sphere_geometry(k)?;
    let phase = geometry.action_norm_sq();
    let critical = vec![
        FixedLocus::Point(ChartPoint::new(1, vec![0.0, 0.0])),
        FixedLocus::Point(ChartPoint::new(2, vec![0.0, 0.0])),
        FixedLocus::Patch(LocusPatch::new("equator", 0, vec![(0.0, 2.0 * PI)], |u| {
            vec![u[0].constant_like(PI / 2.0), u[0].clone()]
        })),
    ];
    Ok(PhaseCase {
        name: "sphere_norm",
        geometry,
        phase,
        amplitude: JetField::constant(2, Shape::Scalar, vec![1.0]),
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_five_entries() {
        assert_eq!(registry().len(), 5);
        assert!(matches!(build("nope", &CatalogParams::default()), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn descriptor_parses_with_defaults() {
        let d = GeometryDescriptor::from_json(r#"{"entry": "sphere_dh", "params": {"k": 2}}"#).unwrap();
        assert_eq!(d.params.k, 2);
        assert_eq!(d.params.quadrature_order, DEFAULT_QUADRATURE_ORDER);
        assert!(GeometryDescriptor::from_json(r#"{"entry": "sphere_dh", "bogus": 1}"#).is_err());
    }

    #[test]
    fn every_entry_builds() {
        for e in registry() {
            build(e.id, &CatalogParams::default()).unwrap_or_else(|err| panic!("{}: {err}", e.id));
        }
    }

    #[test]
    fn bessel_series() {
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    }
}
