//! BV Laplacian, Schouten bracket and the generator identity on a plane with
//! a non-constant volume form, all from exact Taylor jets.

use bvloc::bv::{bv_laplacian_with, de_rham_d, contract_volume, schouten, wedge_fields};
use bvloc::exterior::Variance;
use bvloc::field::{ChartPoint, JetField, Shape};

fn main() {
    // vol = e^{x y} dx∧dy
    let vol = JetField::uniform(2, Shape::Blades(Variance::Form), |v| {
        let z = v[0].zero_like();
        vec![z.clone(), z.clone(), z, v[0].mul_jet(&v[1]).exp()]
    });
    let vector = |f: fn(&[bvloc::jet::Jet]) -> [bvloc::jet::Jet; 2]| {
        JetField::uniform(2, Shape::Blades(Variance::Vector), move |v| {
            let [a, b] = f(v);
            vec![v[0].zero_like(), a, b, v[0].zero_like()]
        })
    };
    let x = vector(|v| [v[0].zero_like(), v[0].clone()]); // x ∂_y
    let y = vector(|v| [v[1].clone(), v[0].zero_like()]); // y ∂_x
    let p = ChartPoint::new(0, vec![0.3, -0.7]);

    println!("{{x∂_y, y∂_x}} = {:?}  (= −[x∂_y, y∂_x] = −x∂_x + y∂_y)", &schouten(&x, &y).values(&p)[1..3]);
    println!("Δ(x∂_y) = div_vol(x∂_y) = {:.6}  (expected x² = {:.6})", bv_laplacian_with(&x, &vol).values(&p)[0], 0.09);

    // Δ(X∧Y) = ΔX∧Y − X∧ΔY − {X,Y}
    let lhs = bv_laplacian_with(&wedge_fields(&x, &y), &vol);
    let rhs = wedge_fields(&bv_laplacian_with(&x, &vol), &y)
        .sub(&wedge_fields(&x, &bv_laplacian_with(&y, &vol)))
        .sub(&schouten(&x, &y));
    let r = lhs.sub(&rhs).values(&p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("generator identity residual {r:.3e}");

    let dd = bv_laplacian_with(&bv_laplacian_with(&wedge_fields(&x, &y), &vol), &vol);
    println!("Δ²(X∧Y) residual {:.3e}", dd.values(&p).iter().fold(0.0f64, |m, v| m.max(v.abs())));

    // d(P⌞vol) = (ΔP)⌞vol
    let lhs = de_rham_d(&contract_volume(&x, &vol));
    let rhs = contract_volume(&bv_laplacian_with(&x, &vol), &vol);
    println!("duality residual {:.3e}", lhs.sub(&rhs).values(&p).iter().fold(0.0f64, |m, v| m.max(v.abs())));
}
