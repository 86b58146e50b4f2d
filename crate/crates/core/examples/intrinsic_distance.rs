//! Induced distance on the horograph of `cos(x1)/20`, with the certified
//! lower bound and the witness curve.
//!
//! cargo run --release --example intrinsic_distance > witness.csv

use std::f64::consts::TAU;

use horocusp::geodesic::{intrinsic_distance, DistanceOptions};
use horocusp::horoconvex::PeriodicFunction;
use horocusp::lattice::Lattice;
use horocusp::planar::Vec2;
use horocusp::quotient::quotient_distance;

fn main() -> horocusp::Result<()> {
    let u = PeriodicFunction::from_planar_fn(Lattice::square(TAU)?, [64, 64], |x| x.x().cos() / 20.0)?;
    let opts = DistanceOptions::default();
    let (x, y) = (Vec2::new(0.1, 0.2), Vec2::new(3.3, 3.0));

    let r = intrinsic_distance(&u, x, y, &opts)?;
    eprintln!("d_u(x, y)       = {:.12}", r.value);
    eprintln!("lower bound     = {:.12}", r.lower_bound);
    eprintln!("straight chord  = {:.12}", r.straight_value);
    eprintln!("graph path      = {:.12} (grid step {:.4})", r.graph_value, r.grid_step);
    eprintln!("witness         = {} vertices", r.witness.vertices().len());

    // the quotient distance may use another lift of y
    let far = y + Vec2::new(TAU, 0.0);
    let q = quotient_distance(&u, x, far, &opts)?;
    eprintln!("quotient d      = {:.12} via translate {:?}", q.distance.value, q.translate.coeffs);

    r.witness.write_csv(&u, opts.quad_tol, std::io::stdout())
}
