//! Quotient metric on the torus `R^2 / lattice`.
//!
//! `m(p, q)` is the minimum of `d_u(x, y + gamma)` over lattice vectors
//! `gamma`, with `x`, `y` the reduced representatives. The candidate set is
//! finite: a translate can only win if its lifted end point lies within the
//! chordal window of the zero-translate distance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{intrinsic_distance, window_margin, DistanceOptions, DistanceResult};
use crate::halfspace::chordal_lower_bound;
use crate::horoconvex::PeriodicFunction;
use crate::lattice::{Lattice, LatticeVector};
use crate::planar::{LinearMap, Vec2};
use crate::report::fmt_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientDistance {
    pub distance: DistanceResult,
    /// Translate applied to the second representative by the minimizer.
    pub translate: LatticeVector,
    pub search_radius: f64,
    /// Number of translates for which a full search was run.
    pub searched: usize,
}

/// Certified lower bound for `d_u(x, z)`: the larger of the chordal distance
/// and `e^{min u} |x - z|`.
pub fn distance_lower_bound(u: &PeriodicFunction, x: Vec2, z: Vec2) -> f64 {
    chordal_lower_bound(u, x, z).max(u.min_value().exp() * (x - z).norm())
}

pub fn quotient_distance(
    u: &PeriodicFunction,
    p: Vec2,
    q: Vec2,
    opts: &DistanceOptions,
) -> Result<QuotientDistance> {
    let lat = u.lattice();
    let x = lat.reduce(p).representative;
    let y = lat.reduce(q).representative;
    let zero = LatticeVector { coeffs: [0, 0], vector: Vec2::ZERO };
    let (cp, cq) = (lat.to_coords(p), lat.to_coords(q));
    let same = (0..2).all(|i| {
        let d = cq[i] - cp[i];
        (d - d.round()).abs() <= 1e-12 * (1.0 + cp[i].abs().max(cq[i].abs()))
    });
    let y = if same { x } else { y };
    let direct = intrinsic_distance(u, x, y, opts)?;
    if x == y {
        return Ok(QuotientDistance { distance: direct, translate: zero, search_radius: 0.0, searched: 1 });
    }
    let radius = (x - y).norm() + window_margin(u, direct.value);
    let mut candidates: Vec<(f64, LatticeVector)> = lat
        .translates_within(radius)
        .into_iter()
        .filter(|t| t.coeffs != [0, 0])
        .map(|t| (distance_lower_bound(u, x, y + t.vector), t))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.coeffs.cmp(&b.1.coeffs)));

    let mut best = (direct, zero);
    let mut searched = 1;
    for (lb, t) in candidates {
        if lb >= best.0.value {
            break;
        }
        let r = intrinsic_distance(u, x, y + t.vector, opts)?;
        searched += 1;
        if r.value < best.0.value {
            best = (r, t);
        }
    }
    Ok(QuotientDistance { distance: best.0, translate: best.1, search_radius: radius, searched })
}

/// `k x k` points `(i / k) a + (j / k) b`, row `i` major.
pub fn uniform_sample(lattice: &Lattice, k: usize) -> Vec<Vec2> {
    (0..k)
        .flat_map(|i| (0..k).map(move |j| lattice.point(i as f64 / k as f64, j as f64 / k as f64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValidation {
    pub symmetric: bool,
    pub zero_diagonal: bool,
    pub nonnegative: bool,
    /// Largest `d(i, k) - d(i, j) - d(j, k) - slack(d(i, k))` over triples, or 0.
    pub max_triangle_excess: f64,
    pub triangle_violations: usize,
}

impl MetricValidation {
    pub fn passed(&self) -> bool {
        self.symmetric && self.zero_diagonal && self.nonnegative && self.triangle_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub grid_step: f64,
    pub quad_tol: f64,
    pub refine_iters: usize,
    /// Metric axioms of the raw pairwise values.
    pub raw_validation: MetricValidation,
    /// Entries lowered by shortcutting through another sample point.
    pub closure_tightened: usize,
    pub max_tightening: f64,
    /// Metric axioms after closure.
    pub validation: MetricValidation,
    /// Pairs are sampled; sup over all pairs of the torus is not certified.
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusDistanceMatrix {
    pub lattice: Lattice,
    pub points: Vec<Vec2>,
    pub values: Vec<Vec<f64>>,
    pub meta: MatrixMeta,
}

impl TorusDistanceMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Checks symmetry, zero diagonal and the triangle inequality with slack
    /// `slack(d)` on the longest side.
    pub fn validate(&self, slack: impl Fn(f64) -> f64) -> MetricValidation {
        validate_values(&self.values, slack)
    }

    /// Index of a sample point equal to `p` modulo the lattice.
    pub fn index_of(&self, p: Vec2) -> Option<usize> {
        let c = Lattice::reduce_coords(self.lattice.to_coords(p)).0;
        self.points.iter().position(|&q| {
            let d = Lattice::reduce_coords(self.lattice.to_coords(q)).0;
            (0..2).all(|i| {
                let e = (c[i] - d[i]).abs();
                e.min(1.0 - e) <= 1e-9
            })
        })
    }

    /// CSV with one row per point: `index, x1, x2, d_0, ..., d_{n-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string(), "x1".into(), "x2".into()];
        header.extend((0..self.len()).map(|j| format!("d{j}")));
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![i.to_string(), fmt_f64(p.x()), fmt_f64(p.y())];
            row.extend(self.values[i].iter().map(|&v| fmt_f64(v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn validate_values(values: &[Vec<f64>], slack: impl Fn(f64) -> f64) -> MetricValidation {
    let n = values.len();
    let mut v = MetricValidation {
        symmetric: true,
        zero_diagonal: true,
        nonnegative: true,
        max_triangle_excess: 0.0,
        triangle_violations: 0,
    };
    for i in 0..n {
        v.zero_diagonal &= values[i][i] == 0.0;
        for j in 0..n {
            v.symmetric &= values[i][j] == values[j][i];
            v.nonnegative &= values[i][j] >= 0.0;
        }
    }
    for i in 0..n {
        for k in 0..n {
            let dik = values[i][k];
            let s = slack(dik);
            for j in 0..n {
                let excess = dik - values[i][j] - values[j][k] - s;
                if excess > 0.0 {
                    v.triangle_violations += 1;
                    v.max_triangle_excess = v.max_triangle_excess.max(excess);
                }
            }
        }
    }
    v
}

/// All pairwise quotient distances over `sample`.
///
/// Each entry is the length of an actual curve, so shortcutting through a
/// third sample point (concatenating witnesses) still gives a valid upper
/// estimate; the matrix is closed under such shortcuts, which makes the
/// triangle inequality hold exactly. Raw and closed validations are both kept.
pub fn distance_matrix(
    u: &PeriodicFunction,
    sample: &[Vec2],
    opts: &DistanceOptions,
) -> Result<TorusDistanceMatrix> {
    if sample.is_empty() {
        return Err(Error::Input("sample must contain at least one point".into()));
    }
    opts.validate()?;
    let lat = *u.lattice();
    let points: Vec<Vec2> = sample.iter().map(|&p| lat.reduce(p).representative).collect();
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| quotient_distance(u, points[i], points[j], opts).map(|r| r.distance.value))
        .collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        values[i][j] = d;
        values[j][i] = d;
    }
    let slack = |d: f64| 2.0 * opts.tol_num(d);
    let raw_validation = validate_values(&values, slack);

    let raw = values.clone();
    for k in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                let via = values[i][k] + values[k][j];
                if via < values[i][j] {
                    values[i][j] = via;
                    values[j][i] = via;
                }
            }
        }
    }
    let mut tightened = 0;
    let mut max_tightening = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let t = raw[i][j] - values[i][j];
            if t > 0.0 {
                tightened += 1;
                max_tightening = max_tightening.max(t);
            }
        }
    }
    let validation = validate_values(&values, slack);

    Ok(TorusDistanceMatrix {
        lattice: lat,
        points,
        values,
        meta: MatrixMeta {
            grid_step: opts.resolved_grid_step(u),
            quad_tol: opts.quad_tol,
            refine_iters: opts.refine_iters,
            raw_validation,
            closure_tightened: tightened,
            max_tightening,
            validation,
            note: "sampled pairs only; the uniform distance over all torus pairs is not certified".into(),
        },
    })
}

/// `sup |m1(p, q) - m2(map p, map q)|` over sampled pairs of `m1`.
///
/// Mapped points missing from `m2` are recomputed with `recompute` when given.
pub fn metric_discrepancy(
    m1: &TorusDistanceMatrix,
    m2: &TorusDistanceMatrix,
    map: Option<&LinearMap>,
    recompute: Option<(&PeriodicFunction, &DistanceOptions)>,
) -> Result<f64> {
    let map = match map {
        Some(m) => *m,
        None if m1.lattice == m2.lattice => LinearMap::IDENTITY,
        None => {
            return Err(Error::Input(
                "matrices live on different lattices; a lattice morphism is required".into(),
            ))
        }
    };
    let mapped: Vec<Vec2> = m1.points.iter().map(|&p| map.apply(p)).collect();
    let idx: Vec<Option<usize>> = mapped.iter().map(|&p| m2.index_of(p)).collect();
    if idx.iter().any(Option::is_none) && recompute.is_none() {
        return Err(Error::Input("mapped sample points are missing from the second matrix".into()));
    }
    let n = m1.len();
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let other = match (idx[i], idx[j]) {
                (Some(a), Some(b)) => m2.values[a][b],
                _ => {
                    let (u, opts) = recompute.expect("checked above");
                    quotient_distance(u, mapped[i], mapped[j], opts)?.distance.value
                }
            };
            sup = sup.max((m1.values[i][j] - other).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(c: f64) -> PeriodicFunction {
        PeriodicFunction::constant(Lattice::unit(), [4, 4], c).unwrap()
    }

    fn opts(h: f64) -> DistanceOptions {
        DistanceOptions::default().with_grid_step(h)
    }

    #[test]
    fn same_point_is_zero() {
        let r = quotient_distance(&flat(0.0), Vec2::new(0.3, 0.4), Vec2::new(1.3, -0.6), &opts(1.0 / 64.0)).unwrap();
        assert_eq!(r.distance.value, 0.0);
    }

    #[test]
    fn wrap_around_translate_wins() {
        let r = quotient_distance(&flat(0.0), Vec2::new(0.1, 0.0), Vec2::new(0.9, 0.0), &opts(1.0 / 64.0)).unwrap();
        assert!((r.distance.value - 0.2).abs() < 1e-3);
        assert_eq!(r.translate.coeffs, [-1, 0]);
    }

    #[test]
    fn single_point_matrix() {
        let m = distance_matrix(&flat(0.0), &[Vec2::new(0.2, 0.2)], &opts(0.05)).unwrap();
        assert_eq!(m.values, vec![vec![0.0]]);
        assert!(distance_matrix(&flat(0.0), &[], &opts(0.05)).is_err());
    }

    #[test]
    fn flat_matrix_matches_closed_form() {
        let lat = Lattice::unit();
        let sample = uniform_sample(&lat, 4);
        let m = distance_matrix(&flat(0.0), &sample, &opts(1.0 / 32.0)).unwrap();
        for i in 0..m.len() {
            for j in 0..m.len() {
                // closed form: min over the 9 neighbouring translates
                let mut best = f64::INFINITY;
                for k in -1..=1 {
                    for l in -1..=1 {
                        best = best.min((sample[j] - sample[i] + lat.translate([k, l])).norm());
                    }
                }
                assert!((m.values[i][j] - best).abs() < 2e-3, "{i} {j}");
            }
        }
        assert!(m.meta.validation.passed());
    }

    #[test]
    fn shifted_sample_gives_same_matrix() {
        let lat = Lattice::unit();
        let u = flat(0.1);
        let sample = uniform_sample(&lat, 3);
        let shifted: Vec<Vec2> = sample.iter().map(|&p| p + lat.translate([2, -1])).collect();
        let a = distance_matrix(&u, &sample, &opts(1.0 / 32.0)).unwrap();
        let b = distance_matrix(&u, &shifted, &opts(1.0 / 32.0)).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert!((a.values[i][j] - b.values[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn discrepancy_cases() {
        let lat = Lattice::unit();
        let sample = uniform_sample(&lat, 3);
        let a = distance_matrix(&flat(0.0), &sample, &opts(1.0 / 32.0)).unwrap();
        assert_eq!(metric_discrepancy(&a, &a, None, None).unwrap(), 0.0);
        let b = distance_matrix(&flat(0.1), &sample, &opts(1.0 / 32.0)).unwrap();
        let d = metric_discrepancy(&a, &b, None, None).unwrap();
        let expect = (0.1f64.exp() - 1.0) * a.diameter();
        assert!((d - expect).abs() < 5e-3, "{d} vs {expect}");

        let other = Lattice::square(2.0).unwrap();
        let c = distance_matrix(&flat(0.0).transported(other), &uniform_sample(&other, 3), &opts(1.0 / 16.0)).unwrap();
        assert!(metric_discrepancy(&a, &c, None, None).is_err());
        let map = lat.morphism_to(&other);
        let d = metric_discrepancy(&a, &c, Some(&map), None).unwrap();
        assert!((d - a.diameter()).abs() < 5e-3);
    }

    #[test]
    fn discrepancy_recomputes_missing_points() {
        let lat = Lattice::unit();
        let u = flat(0.0);
        let a = distance_matrix(&u, &uniform_sample(&lat, 2), &opts(1.0 / 32.0)).unwrap();
        let b = distance_matrix(&u, &[Vec2::ZERO], &opts(1.0 / 32.0)).unwrap();
        let o = opts(1.0 / 32.0);
        assert!(metric_discrepancy(&a, &b, None, None).is_err());
        let d = metric_discrepancy(&a, &b, None, Some((&u, &o))).unwrap();
        assert!(d < 1e-9);
    }
}
