//! `Z(t) = ∫ (P⌞vol) e^{it d_𝔤 γ}` over `t ∈ [0, 5]`: flat for the
//! equivariantly closed `e^{h + φπ}`, varying for the control `e^h`. Writes
//! CSV and SVG files to the system temp directory.

use bvloc::catalog::{self, CatalogParams};
use bvloc::quadrature::{t_grid, z_gamma_sweep};

fn main() -> bvloc::Result<()> {
    let inst = catalog::build("sphere_dh", &CatalogParams::default())?;
    let ts = t_grid(5.0, 20);
    let closed = z_gamma_sweep(&inst.p, &inst.gamma, &inst.geometry, 1.0, &ts, 1e-7)?;
    let control = inst.negative_control.as_ref().expect("sphere_dh has a control");
    let open = z_gamma_sweep(control, &inst.gamma, &inst.geometry, 1.0, &ts, 1e-7)?;
    println!("closed:  max |Z(t) − Z(0)| = {:.3e}  verdict {:?}", closed.max_deviation, closed.verdict);
    println!("control: max |Z(t) − Z(0)| = {:.3e}  verdict {:?}", open.max_deviation, open.verdict);
    print!("{}", open.to_csv().lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("\n...");

    let dir = std::env::temp_dir();
    std::fs::write(dir.join("bvloc_sweep_closed.svg"), closed.to_svg("Z(t), e^{h+φπ}"))?;
    std::fs::write(dir.join("bvloc_sweep_control.svg"), open.to_svg("Z(t), e^h"))?;
    std::fs::write(dir.join("bvloc_sweep_control.csv"), open.to_csv())?;
    println!("plots written to {}", dir.display());
    Ok(())
}
