//! End-to-end pipeline on a horoconvex function: horoconvexity, normalization,
//! torus metric, bilipschitz bracketing and the polyhedral comparison metric.
//!
//! cargo run --release --example cusp_report > report.json

use std::f64::consts::TAU;

use horocusp::geodesic::DistanceOptions;
use horocusp::harness::{assemble_cusp_report, CuspOptions};
use horocusp::horoconvex::PeriodicFunction;
use horocusp::lattice::Lattice;

fn main() -> horocusp::Result<()> {
    let lattice = Lattice::square(TAU)?;
    let u = PeriodicFunction::from_planar_fn(lattice, [64, 64], |x| 0.3 + x.x().cos() / 20.0)?;
    let opts = CuspOptions {
        k: 4,
        distance: DistanceOptions::default().with_grid_step(lattice.cell_diameter() / 64.0),
        refinement: true,
        ..Default::default()
    };
    let a = assemble_cusp_report(&u, &opts)?;
    for c in &a.report.checks {
        eprintln!("[{}] {}", if c.pass { "pass" } else { "FAIL" }, c.description);
    }
    eprintln!("u(0): raw {} -> shifted {}", a.raw_u0, a.shifted_u0);
    println!("{}", horocusp::report::to_json_string(&a.report)?);
    Ok(())
}
