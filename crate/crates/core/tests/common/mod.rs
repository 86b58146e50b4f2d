#![allow(dead_code)]

use std::f64::consts::TAU;

use horocusp::geodesic::DistanceOptions;
use horocusp::horoconvex::{Builtin, PeriodicFunction};
use horocusp::lattice::Lattice;

pub fn two_pi() -> Lattice {
    Lattice::square(TAU).unwrap()
}

pub fn cos20(res: usize) -> PeriodicFunction {
    Builtin::Cosine { amplitude: 0.05, lattice: two_pi(), resolution: [res, res], offset: 0.0 }
        .build()
        .unwrap()
}

pub fn random_perturbation(seed: u64) -> PeriodicFunction {
    let u = Builtin::Random {
        seed,
        amplitude: 0.002,
        max_frequency: 2,
        lattice: Lattice::unit(),
        resolution: [32, 32],
        offset: 0.0,
    }
    .build()
    .unwrap();
    assert!(u.passes_default_check(), "perturbation {seed} is not horoconvex");
    u
}

/// Named horoconvex test functions.
pub fn corpus() -> Vec<(String, PeriodicFunction)> {
    let mut out = vec![
        ("zero".to_string(), PeriodicFunction::constant(Lattice::unit(), [8, 8], 0.0).unwrap()),
        ("const 0.7".to_string(), PeriodicFunction::constant(Lattice::unit(), [8, 8], 0.7).unwrap()),
        ("const -0.4".to_string(), PeriodicFunction::constant(Lattice::unit(), [8, 8], -0.4).unwrap()),
        ("cos/20".to_string(), cos20(64)),
        ("cos/20 + 0.3".to_string(), cos20(64).add_constant(0.3)),
    ];
    for seed in [1, 2, 3] {
        out.push((format!("random {seed}"), random_perturbation(seed)));
    }
    out
}

/// Options used for sampled distance checks: cell diameter / 64.
pub fn opts_for(u: &PeriodicFunction) -> DistanceOptions {
    DistanceOptions::default().with_grid_step(u.lattice().cell_diameter() / 64.0)
}
