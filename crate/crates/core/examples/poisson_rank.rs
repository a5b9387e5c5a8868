//! Rank of the Poisson bivector at the fixed points, for the symplectic
//! sphere and for a bivector vanishing at the south pole; the degenerate one
//! also fails the master equation, so the Poisson localization refuses it.

use bvloc::catalog::{self, CatalogParams};
use bvloc::localization::{dh_poisson, rank_at_fixed_points};

fn main() -> bvloc::Result<()> {
    for id in ["sphere_dh", "degenerate_pi"] {
        let inst = catalog::build(id, &CatalogParams::default())?;
        let pi = inst.pi.as_ref().expect("entry has a bivector");
        println!("{id}\n{}", rank_at_fixed_points(pi, &inst.geometry).to_table());
        let h = inst.h.as_ref().expect("entry has a Hamiltonian");
        match dh_poisson(h, pi, &inst.geometry) {
            Ok(r) => println!("dh_poisson rel residual {:.2e}\n", r.rel_residual),
            Err(e) => println!("dh_poisson: {e}\n"),
        }
    }
    Ok(())
}
