//! Convergence of torus metrics along `u_n = u + c/n` and along a lattice
//! perturbation `L_n -> L`; prints the discrepancy series as CSV.
//!
//! cargo run --release --example convergence > series.csv

use horocusp::geodesic::DistanceOptions;
use horocusp::harness::{convergence_experiment, SequenceSpec};
use horocusp::horoconvex::PeriodicFunction;
use horocusp::lattice::Lattice;
use horocusp::planar::Vec2;

fn main() -> horocusp::Result<()> {
    let u = PeriodicFunction::constant(Lattice::unit(), [8, 8], 0.0)?;
    let opts = DistanceOptions::default().with_grid_step(1.0 / 32.0);

    let seq = SequenceSpec { decay_factor: 4.0, ..SequenceSpec::perturbed([Vec2::new(0.5, 0.0), Vec2::new(0.0, 0.25)]) };
    let out = convergence_experiment(&u, &seq, 4, 8, &opts)?;
    for c in &out.report.checks {
        eprintln!("{}: measured {:.6} bound {:.6} pass {}", c.description, c.measured, c.bound, c.pass);
    }

    let shift = convergence_experiment(&u, &SequenceSpec::shift(0.1), 4, 8, &opts)?;
    eprintln!("shift sequence passes: {}", shift.report.passed());

    out.report.write_series_csv(std::io::stdout())
}
