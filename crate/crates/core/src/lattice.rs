//! Rank-2 translation lattices acting on the horosphere chart.
//!
//! A [`Lattice`] stands for the parabolic group fixing the point at infinity,
//! acting on `R^2` by translations. Everything that has to be exact (periodic
//! evaluation, reduction to the fundamental domain) is done in lattice
//! coordinates `(alpha, beta)` with `x = alpha * a + beta * b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::{LinearMap, Vec2};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice {
    a: Vec2,
    b: Vec2,
    /// Planar point -> lattice coordinates.
    to_coords: LinearMap,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    a: [f64; 2],
    b: [f64; 2],
}

impl TryFrom<LatticeRepr> for Lattice {
    type Error = Error;
    fn try_from(r: LatticeRepr) -> Result<Self> {
        Lattice::new(Vec2(r.a), Vec2(r.b))
    }
}

impl From<Lattice> for LatticeRepr {
    fn from(l: Lattice) -> Self {
        LatticeRepr { a: l.a.0, b: l.b.0 }
    }
}

/// A lattice vector `k * a + k' * b` together with its integer coefficients.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeVector {
    pub coeffs: [i64; 2],
    pub vector: Vec2,
}

/// Result of [`Lattice::reduce`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Reduced {
    /// Representative in the half-open fundamental parallelogram.
    pub representative: Vec2,
    /// Lattice coordinates of the representative, each in `[0, 1)`.
    pub coords: [f64; 2],
    /// Integer coefficients `(k, k')` of the removed translation.
    pub coeffs: [i64; 2],
}

impl Lattice {
    pub fn new(a: Vec2, b: Vec2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Input("lattice vectors must be finite".into()));
        }
        let det = a.cross(b);
        if !(det.abs() > 1e-12 * a.norm() * b.norm()) {
            return Err(Error::Input(format!(
                "lattice vectors {:?} and {:?} are not linearly independent",
                a.0, b.0
            )));
        }
        let to_coords = LinearMap::from_columns(a, b)
            .inverse()
            .ok_or_else(|| Error::Input("singular lattice basis".into()))?;
        Ok(Lattice { a, b, to_coords })
    }

    /// The square lattice generated by `(side, 0)` and `(0, side)`.
    pub fn square(side: f64) -> Result<Self> {
        Lattice::new(Vec2::new(side, 0.0), Vec2::new(0.0, side))
    }

    pub fn unit() -> Self {
        Lattice::square(1.0).expect("unit lattice is valid")
    }

    pub fn a(&self) -> Vec2 {
        self.a
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    /// The basis matrix with columns `a` and `b`.
    pub fn basis(&self) -> LinearMap {
        LinearMap::from_columns(self.a, self.b)
    }

    /// Planar point -> lattice coordinates.
    pub fn coords_map(&self) -> &LinearMap {
        &self.to_coords
    }

    #[inline]
    pub fn to_coords(&self, x: Vec2) -> [f64; 2] {
        self.to_coords.apply(x).0
    }

    #[inline]
    pub fn point(&self, alpha: f64, beta: f64) -> Vec2 {
        self.a * alpha + self.b * beta
    }

    #[inline]
    pub fn translate(&self, coeffs: [i64; 2]) -> Vec2 {
        self.point(coeffs[0] as f64, coeffs[1] as f64)
    }

    /// Reduces lattice coordinates into `[0, 1)^2`.
    #[inline]
    pub fn reduce_coords(coords: [f64; 2]) -> ([f64; 2], [i64; 2]) {
        let mut frac = [0.0; 2];
        let mut k = [0i64; 2];
        for i in 0..2 {
            let fl = coords[i].floor();
            let mut f = coords[i] - fl;
            let mut ki = fl as i64;
            // rounding of tiny negative coordinates lands exactly on 1
            if f >= 1.0 {
                f = 0.0;
                ki += 1;
            }
            frac[i] = f;
            k[i] = ki;
        }
        (frac, k)
    }

    /// Fundamental-domain representative of `x` and the removed translation.
    pub fn reduce(&self, x: Vec2) -> Reduced {
        let (coords, coeffs) = Lattice::reduce_coords(self.to_coords(x));
        Reduced {
            representative: self.point(coords[0], coords[1]),
            coords,
            coeffs,
        }
    }

    /// All lattice vectors of Euclidean norm at most `r`, zero included,
    /// sorted by norm and then by coefficients.
    pub fn translates_within(&self, r: f64) -> Vec<LatticeVector> {
        if !(r >= 0.0) {
            return Vec::new();
        }
        let det = self.a.cross(self.b).abs();
        let kmax = (r * self.b.norm() / det).floor() as i64 + 1;
        let lmax = (r * self.a.norm() / det).floor() as i64 + 1;
        let mut out = Vec::new();
        for k in -kmax..=kmax {
            for l in -lmax..=lmax {
                let v = self.translate([k, l]);
                if v.norm() <= r {
                    out.push(LatticeVector { coeffs: [k, l], vector: v });
                }
            }
        }
        out.sort_by(|p, q| {
            p.vector
                .norm()
                .total_cmp(&q.vector.norm())
                .then(p.coeffs.cmp(&q.coeffs))
        });
        out
    }

    /// Area of a fundamental parallelogram.
    pub fn cell_area(&self) -> f64 {
        self.a.cross(self.b).abs()
    }

    /// Euclidean diameter of the fundamental parallelogram.
    pub fn cell_diameter(&self) -> f64 {
        (self.a + self.b).norm().max((self.a - self.b).norm())
    }

    /// The linear map sending `self.a` to `other.a` and `self.b` to `other.b`.
    pub fn morphism_to(&self, other: &Lattice) -> LinearMap {
        other.basis().compose(&self.to_coords)
    }

    /// Image of the lattice under a linear map.
    pub fn mapped(&self, m: &LinearMap) -> Result<Lattice> {
        Lattice::new(m.apply(self.a), m.apply(self.b))
    }

    /// Euclidean distance on the flat torus `R^2 / lattice`.
    pub fn flat_torus_distance(&self, p: Vec2, q: Vec2) -> f64 {
        let d = self.reduce(q - p).representative;
        let mut best = f64::INFINITY;
        // the closest translate of a reduced vector is among the 3x3 neighbours
        // as long as the basis is not too skewed; widen for skewed bases
        let span = (self.cell_diameter() * self.cell_diameter() / self.cell_area()).ceil() as i64 + 1;
        for k in -span..=span {
            for l in -span..=span {
                best = best.min((d + self.translate([k, l])).norm());
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dependent_vectors() {
        assert!(Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)).is_err());
        assert!(Lattice::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn reduce_unit_lattice() {
        let l = Lattice::unit();
        let r = l.reduce(Vec2::new(2.5, -0.25));
        assert_eq!(r.representative, Vec2::new(0.5, 0.75));
        assert_eq!(r.coeffs, [2, -1]);
        let inside = l.reduce(Vec2::new(0.25, 0.5));
        assert_eq!(inside.representative, Vec2::new(0.25, 0.5));
        assert_eq!(inside.coeffs, [0, 0]);
    }

    #[test]
    fn reduce_never_returns_one() {
        let (c, k) = Lattice::reduce_coords([-1e-18, 0.0]);
        assert_eq!(c, [0.0, 0.0]);
        assert_eq!(k, [0, 0]);
    }

    #[test]
    fn translates_small_radii() {
        let l = Lattice::unit();
        assert_eq!(l.translates_within(0.0).len(), 1);
        let t = l.translates_within(1.0);
        assert_eq!(t.len(), 5);
        assert_eq!(t[0].coeffs, [0, 0]);
    }

    #[test]
    fn translates_match_brute_force() {
        let l = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.5, 0.9)).unwrap();
        let got: Vec<[i64; 2]> = l.translates_within(2.0).iter().map(|v| v.coeffs).collect();
        let mut brute = Vec::new();
        for k in -10i64..=10 {
            for m in -10i64..=10 {
                let v = Vec2::new(k as f64 + 0.5 * m as f64, 0.9 * m as f64);
                if v.norm() <= 2.0 {
                    brute.push([k, m]);
                }
            }
        }
        let mut sorted = got.clone();
        sorted.sort();
        brute.sort();
        assert_eq!(sorted, brute);
    }

    #[test]
    fn cell_areas() {
        assert_eq!(Lattice::unit().cell_area(), 1.0);
        let l = Lattice::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 3.0)).unwrap();
        assert_eq!(l.cell_area(), 6.0);
        let s = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.5, 0.9)).unwrap();
        assert!((s.cell_area() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn morphisms() {
        let u = Lattice::unit();
        let id = u.morphism_to(&u);
        assert_eq!(id, LinearMap::IDENTITY);
        let l = Lattice::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 3.0)).unwrap();
        assert_eq!(u.morphism_to(&l), LinearMap([[2.0, 0.0], [0.0, 3.0]]));
    }

    #[test]
    fn flat_torus_distance_wraps() {
        let l = Lattice::unit();
        let d = l.flat_torus_distance(Vec2::new(0.1, 0.0), Vec2::new(0.9, 0.0));
        assert!((d - 0.2).abs() < 1e-12);
        let diag = l.flat_torus_distance(Vec2::ZERO, Vec2::new(0.5, 0.5));
        assert!((diag - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let l: Lattice = serde_json::from_str(r#"{"a": [1.0, 0.0], "b": [0.5, 0.9]}"#).unwrap();
        assert_eq!(l.b(), Vec2::new(0.5, 0.9));
        assert!(serde_json::from_str::<Lattice>(r#"{"a": [1, 0], "b": [2, 0]}"#).is_err());
    }
}
