//! Leading-order stationary phase against direct oscillatory quadrature, for
//! a Fresnel integral and for the phase `g(X, X)` on the sphere, whose
//! critical set is the two poles plus the equator.

use bvloc::catalog;
use bvloc::quadrature::{oscillatory_integral, stationary_phase_estimate};

fn main() -> bvloc::Result<()> {
    for case in [catalog::fresnel_case()?, catalog::sphere_phase_case(1)?] {
        println!("{}", case.name);
        for t in [12.5, 25.0, 50.0, 100.0] {
            let est = stationary_phase_estimate(&case.phase, &case.amplitude, &case.geometry, &case.critical, t)?;
            let direct = oscillatory_integral(&case.phase, &case.amplitude, &case.geometry, t, 24)?;
            println!("  t = {t:>5}: |estimate/direct − 1| = {:.3e}", (est / direct - 1.0).norm());
        }
    }
    Ok(())
}
