//! Lattice reduction and morphisms between lattices.
//!
//! cargo run --example lattice_morphism

use horocusp::lattice::Lattice;
use horocusp::planar::Vec2;

fn main() -> horocusp::Result<()> {
    let l = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.3, 0.9))?;
    let m = Lattice::new(Vec2::new(1.1, 0.1), Vec2::new(0.2, 1.0))?;
    let x = Vec2::new(2.7, -1.4);
    let r = l.reduce(x);
    println!("{:?} = {:?} + translate {:?}", x.0, r.representative.0, r.coeffs);

    let phi = l.morphism_to(&m);
    for k in [[1, 0], [0, 1], [2, -3]] {
        println!("phi({:?}) = {:?} = {:?}", k, phi.apply(l.translate(k)).0, m.translate(k).0);
    }
    println!("cell areas: {} -> {}", l.cell_area(), m.cell_area());
    for t in l.translates_within(1.2) {
        println!("  {:?} |v| = {:.4}", t.coeffs, t.vector.norm());
    }
    Ok(())
}
