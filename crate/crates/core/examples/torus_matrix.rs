//! Distance matrix of the torus metric on a uniform sample, with its metric
//! validation, for the flat torus and a perturbed one.
//!
//! cargo run --release --example torus_matrix

use horocusp::geodesic::DistanceOptions;
use horocusp::horoconvex::{Builtin, PeriodicFunction};
use horocusp::lattice::Lattice;
use horocusp::quotient::{distance_matrix, metric_discrepancy, uniform_sample};

fn main() -> horocusp::Result<()> {
    let lattice = Lattice::unit();
    let opts = DistanceOptions::default().with_grid_step(1.0 / 64.0);
    let sample = uniform_sample(&lattice, 4);

    let flat = PeriodicFunction::constant(lattice, [16, 16], 0.0)?;
    let m0 = distance_matrix(&flat, &sample, &opts)?;
    println!("flat: diameter = {:.9} (sqrt(2)/2 = {:.9})", m0.diameter(), 0.5f64.sqrt());

    let bumpy = Builtin::Random {
        seed: 7,
        amplitude: 0.004,
        max_frequency: 2,
        lattice,
        resolution: [64, 64],
        offset: 0.0,
    }
    .build()?;
    println!("random perturbation horoconvex: {}", bumpy.passes_default_check());
    let m1 = distance_matrix(&bumpy, &sample, &opts)?;
    println!("perturbed: diameter = {:.9}", m1.diameter());
    println!("raw validation: {:?}", m1.meta.raw_validation);
    println!("closed validation passes: {}", m1.meta.validation.passed());
    println!("sup |m_flat - m_perturbed| = {:.3e}", metric_discrepancy(&m0, &m1, None, None)?);

    m1.write_csv(std::io::stdout())
}
