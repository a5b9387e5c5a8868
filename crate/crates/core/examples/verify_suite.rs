//! Run the invariant suites programmatically, optionally restricted to some
//! modules (`cargo run --example verify_suite -- bv_calculus catalog`).

use bvloc::verify::{self, Module, VerifyOptions};

fn main() -> bvloc::Result<()> {
    let modules: Vec<Module> = std::env::args().skip(1).filter_map(|a| Module::parse(&a)).collect();
    let report = verify::run(&VerifyOptions {
        modules,
        ..Default::default()
    })?;
    print!("{}", report.to_table());
    for (criterion, ok) in report.criteria() {
        println!("criterion {criterion}: {}", if ok { "pass" } else { "FAIL" });
    }
    Ok(())
}
