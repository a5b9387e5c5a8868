//! Localization through the equivariant map `F = x + iy` on the sphere in
//! discrete and Morse–Bott mode, plus the weight-containment check.

use bvloc::catalog::{self, CatalogParams};
use bvloc::localization::{cohft_localize, weight_containment_check, CohftMode};

fn main() -> bvloc::Result<()> {
    for k in [1, 2] {
        let inst = catalog::build("sphere_cohft", &CatalogParams { k, ..Default::default() })?;
        let f = inst.map.as_ref().expect("sphere_cohft carries a map");
        for mode in [CohftMode::Discrete, CohftMode::Bott] {
            let r = cohft_localize(&inst.p, f, &inst.geometry, 1.0, mode)?;
            println!("k = {k} {mode:?}: localized {:.15}, rel residual {:.2e}", r.localized_value, r.rel_residual);
            for c in &r.per_locus_contributions {
                println!("    {:<24} {:>22.15}  pf {:?}", c.locus, c.value, c.pfaffian);
            }
        }
        let w = weight_containment_check(f, &inst.geometry)?;
        println!("    Λ_X = {:?} ⊆ {:?}: {}", w.action_weights, w.map_weights, w.contained);
    }

    // declaring the wrong weight breaks equivariance and is rejected
    let inst = catalog::build("sphere_cohft", &CatalogParams::default())?;
    match catalog::sphere_map_with_weight(&inst.geometry, 2) {
        Err(e) => println!("weight 2 on the k = 1 action: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
