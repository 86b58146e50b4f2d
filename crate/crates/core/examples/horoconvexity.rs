//! Midpoint-convexity classification of `cos(x1)/20` and `cos(x1)`.
//!
//! cargo run --release --example horoconvexity

use std::f64::consts::TAU;

use horocusp::horoconvex::{is_horoconvex, HoroconvexityOptions, PeriodicFunction};
use horocusp::lattice::Lattice;

fn main() -> horocusp::Result<()> {
    let lattice = Lattice::square(TAU)?;
    for amplitude in [0.05, 1.0] {
        let u = PeriodicFunction::from_planar_fn(lattice, [256, 256], |x| amplitude * x.x().cos())?;
        let r = is_horoconvex(&u, &HoroconvexityOptions::default());
        println!(
            "u = {amplitude} cos(x1): horoconvex = {}, worst slack = {:.3e}, {} triples, {} pairs",
            r.passed, r.worst_violation, r.triples_checked, r.pairs_checked
        );
        if let Some([p, m, q]) = r.witness {
            println!("  witness p = {:?}, midpoint = {:?}, q = {:?}", p.0, m.0, q.0);
        }
    }

    // adding a constant keeps horoconvexity; scaling up eventually breaks it
    let base = PeriodicFunction::from_planar_fn(lattice, [128, 128], |x| x.x().cos() / 20.0)?;
    println!("cos/20 + 0.5 passes: {}", base.add_constant(0.5).passes_default_check());
    for lambda in [2.0, 5.0, 10.0, 20.0] {
        println!("{lambda} * cos/20 passes: {}", base.scaled(lambda).passes_default_check());
    }
    Ok(())
}
