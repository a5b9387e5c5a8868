//! Build a geometry from scratch: a flat disk-shaped chart with the rotation
//! `−y∂_x + x∂_y`, a Gaussian amplitude, and the equivariant identities
//! `Δ_𝔤² = φ Lie_X` and `d_𝔤² = −φ L_X` checked pointwise.

use bvloc::bv::{equivariant_d_unchecked, equivariant_delta_unchecked, lie_form, lie_multivector};
use bvloc::exterior::Variance;
use bvloc::field::{ChartPoint, JetField, Shape};
use bvloc::geometry::{Chart, CircleAction, FixedLocus, Geometry};

fn main() -> bvloc::Result<()> {
    let chart = Chart::new("plane", vec![(-3.0, 3.0), (-3.0, 3.0)])?;
    let metric = JetField::constant(2, Shape::Tensor2, vec![1.0, 0.0, 0.0, 1.0]);
    let rotation = JetField::uniform(2, Shape::Blades(Variance::Vector), |v| {
        vec![v[0].zero_like(), -&v[1], v[0].clone(), v[0].zero_like()]
    });
    let geom = Geometry::new(
        "plane",
        vec![chart],
        metric,
        CircleAction {
            field: rotation,
            fixed_loci: vec![FixedLocus::Point(ChartPoint::new(0, vec![0.0, 0.0]))],
        },
        0,
    )?;
    println!("weights at the origin: {:?}", geom.weights_at_fixed_point(&ChartPoint::new(0, vec![0.0, 0.0]))?);

    // a non-invariant multivector e^{−x²} (1 + y ∂_x∧∂_y) and 1-form x dy
    let p = JetField::uniform(2, Shape::Blades(Variance::Vector), |v| {
        let g = v[0].mul_jet(&v[0]).scale(-1.0).exp();
        vec![g.clone(), v[0].zero_like(), v[0].zero_like(), g.mul_jet(&v[1])]
    });
    let a = JetField::uniform(2, Shape::Blades(Variance::Form), |v| {
        vec![v[0].zero_like(), v[0].zero_like(), v[0].clone(), v[0].zero_like()]
    });
    let at = ChartPoint::new(0, vec![0.4, -1.1]);
    for phi in [0.5, 1.0, 2.0] {
        let dd = equivariant_delta_unchecked(&equivariant_delta_unchecked(&p, &geom, phi), &geom, phi);
        let r1 = dd.sub(&lie_multivector(&p, &geom).scale(phi)).values(&at);
        let d2 = equivariant_d_unchecked(&equivariant_d_unchecked(&a, &geom, phi), &geom, phi);
        let r2 = d2.add(&lie_form(&a, &geom).scale(phi)).values(&at);
        let m = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        println!("φ = {phi}: |Δ_𝔤² − φLie_X| = {:.2e}, |d_𝔤² + φL_X| = {:.2e}", m(r1), m(r2));
    }
    Ok(())
}
