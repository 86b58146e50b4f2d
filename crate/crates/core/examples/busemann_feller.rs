//! Raising the horograph by at most `delta` increases distances by at most
//! `2 delta`: `d_u <= d_v + 2 delta` for `u <= v <= u + delta`.
//!
//! cargo run --release --example busemann_feller

use std::f64::consts::TAU;

use horocusp::geodesic::DistanceOptions;
use horocusp::harness::{busemann_feller_check, DEFAULT_SEED};
use horocusp::horoconvex::PeriodicFunction;
use horocusp::lattice::Lattice;

fn main() -> horocusp::Result<()> {
    let u = PeriodicFunction::from_planar_fn(Lattice::square(TAU)?, [64, 64], |x| x.x().cos() / 20.0)?;
    let opts = DistanceOptions::default().with_grid_step(u.lattice().cell_diameter() / 64.0);
    for eps in [0.1, 0.5, 1.0] {
        let r = busemann_feller_check(&u, &u.add_constant(eps), 20, &opts, DEFAULT_SEED)?;
        let worst = r.checks.iter().map(|c| c.measured).fold(f64::NEG_INFINITY, f64::max);
        println!("eps = {eps}: max d_u - d_v - tol = {worst:.6} <= {:.1}: {}", 2.0 * eps, r.passed());
    }
    Ok(())
}
