//! Polyhedral CBB(-1) metrics: cone curvatures, Gauss-Bonnet, and the
//! comparison triangulation of a horograph metric.
//!
//! cargo run --release --example cone_metric

use std::f64::consts::TAU;

use horocusp::geodesic::DistanceOptions;
use horocusp::horoconvex::PeriodicFunction;
use horocusp::lattice::Lattice;
use horocusp::polyhedral::{comparison_replace, cone_metric, is_cbb, triangle_angles, TorusTriangulation};

fn main() -> horocusp::Result<()> {
    let a = triangle_angles(1.0, 1.0, 1.0)?;
    println!("equilateral l = 1: angle = {:.12}", a[0]);

    let one = cone_metric(&TorusTriangulation::one_vertex([1.0; 3])?)?;
    println!(
        "one-vertex torus: k = {:.12}, area = {:.12}, slack = {:.1e}",
        one.curvatures[0], one.area, one.gauss_bonnet_slack
    );

    let u = PeriodicFunction::from_planar_fn(Lattice::square(TAU)?, [64, 64], |x| x.x().cos() / 20.0)?;
    let opts = DistanceOptions::default().with_grid_step(u.lattice().cell_diameter() / 64.0);
    for k in [2, 4, 8] {
        let c = cone_metric(&comparison_replace(&u, k, &opts)?)?;
        let kmin = c.curvatures.iter().copied().fold(f64::INFINITY, f64::min);
        println!(
            "cos/20, k = {k}: area = {:.6}, sum k_v = {:.6}, min k_v = {:.6}, CBB = {}",
            c.area,
            c.total_curvature(),
            kmin,
            is_cbb(&c, false).is_cbb
        );
    }
    println!("{}", horocusp::report::to_json_string(&TorusTriangulation::one_vertex([1.0, 1.0, 1.2])?)?);
    Ok(())
}
