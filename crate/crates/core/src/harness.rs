//! Experiments: bilipschitz constants, the Busemann-Feller comparison,
//! convergence of torus metrics, and the end-to-end cusp assembly.
//!
//! Every experiment returns an [`ExperimentReport`], a list of
//! `measured <= bound` checks plus optional series, and is deterministic given
//! its inputs and seed.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geodesic::{intrinsic_distance, DistanceOptions};
use crate::halfspace::chordal_lower_bound;
use crate::horoconvex::{is_horoconvex, HoroconvexityOptions, HoroconvexityReport, PeriodicFunction};
use crate::lattice::Lattice;
use crate::planar::Vec2;
use crate::polyhedral::{cone_distance_matrix, cone_metric, comparison_replace, is_cbb, CbbReport, ConeMetric, LENIENT_CBB_TOL};
use crate::quotient::{distance_matrix, metric_discrepancy, uniform_sample, TorusDistanceMatrix};
use crate::report::fmt_f64;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `measured <= bound` (so NaN fails).
    pub fn new(description: impl Into<String>, bound: f64, measured: f64) -> Check {
        Check { description: description.into(), bound, measured, pass: measured <= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    /// SHA-256 of the canonical JSON of the inputs.
    pub inputs_digest: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, inputs_digest: String, seed: u64) -> Self {
        ExperimentReport {
            name: name.into(),
            inputs_digest,
            seed,
            checks: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, description: impl Into<String>, bound: f64, measured: f64) -> &Check {
        self.checks.push(Check::new(description, bound, measured));
        self.checks.last().expect("just pushed")
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// One row per `n`, one column per series; missing entries are empty.
    pub fn write_series_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string()];
        header.extend(self.series.iter().map(|s| s.name.clone()));
        w.write_record(&header)?;
        let mut ns: Vec<usize> = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            let mut row = vec![n.to_string()];
            for s in &self.series {
                row.push(s.points.iter().find(|p| p.0 == n).map(|p| fmt_f64(p.1)).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Hex SHA-256 of the JSON encoding of `inputs`.
pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> Result<String> {
    let bytes = serde_json::to_vec(inputs)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Axis-aligned rectangle in the plane.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Result<Rect> {
        if !(min.is_finite() && max.is_finite() && max.x() > min.x() && max.y() > min.y()) {
            return Err(Error::Input(format!("degenerate rectangle {:?} .. {:?}", min.0, max.0)));
        }
        Ok(Rect { min, max })
    }

    /// Bounding box of the fundamental parallelogram.
    pub fn fundamental(lattice: &Lattice) -> Rect {
        let corners = [Vec2::ZERO, lattice.a(), lattice.b(), lattice.a() + lattice.b()];
        let lo = |k: usize| corners.iter().map(|c| c.0[k]).fold(f64::INFINITY, f64::min);
        let hi = |k: usize| corners.iter().map(|c| c.0[k]).fold(f64::NEG_INFINITY, f64::max);
        Rect { min: Vec2::new(lo(0), lo(1)), max: Vec2::new(hi(0), hi(1)) }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec2 {
        Vec2::new(
            rng.gen_range(self.min.x()..self.max.x()),
            rng.gen_range(self.min.y()..self.max.y()),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipConstants {
    pub lambda1: f64,
    pub lambda2: f64,
    pub validation: ExperimentReport,
}

pub const BILIP_VALIDATION_PAIRS: usize = 200;

/// Constants with `lambda1 |x - y| <= d_u(x, y) <= lambda2 |x - y|` on `k`.
///
/// `lambda2` is the supremum of the length density, so every straight segment
/// obeys the upper bound; `lambda1` is the smallest chordal-to-Euclidean ratio
/// over near pairs on a grid of `k`, capped by `e^{min u}`. Both are then
/// checked against random distance computations in `k`.
pub fn bilip_constants(
    u: &PeriodicFunction,
    k: Rect,
    opts: &DistanceOptions,
    pairs: usize,
    seed: u64,
) -> Result<BilipConstants> {
    let k = Rect::new(k.min, k.max)?;
    opts.validate()?;
    let lambda2 = u.max_length_density() * (1.0 + 2.0 * opts.quad_tol);

    let n = 32;
    let step = Vec2::new((k.max.x() - k.min.x()) / n as f64, (k.max.y() - k.min.y()) / n as f64);
    let eps = 1e-3 * step.norm();
    let mut ratio = u.min_value().exp();
    for i in 0..=n {
        for j in 0..=n {
            let x = Vec2::new(k.min.x() + i as f64 * step.x(), k.min.y() + j as f64 * step.y());
            for dir in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.6, 0.8)] {
                let y = x + dir * eps;
                ratio = ratio.min(chordal_lower_bound(u, x, y) / eps);
            }
        }
    }
    let lambda1 = ratio.max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(Vec2, Vec2)> = (0..pairs).map(|_| (k.sample(&mut rng), k.sample(&mut rng))).collect();
    let dists: Vec<f64> = points
        .par_iter()
        .map(|&(x, y)| intrinsic_distance(u, x, y, opts).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::NEG_INFINITY;
    for (&(x, y), &d) in points.iter().zip(&dists) {
        let e = (x - y).norm();
        low = low.max(lambda1 * e - d - opts.tol_num(d));
        high = high.max(d - lambda2 * e - opts.tol_num(d));
    }
    let mut report = ExperimentReport::new(
        "bilip_constants",
        digest(&(u, k, opts, pairs))?,
        seed,
    );
    if pairs > 0 {
        report.check("max over pairs of lambda1 |x-y| - d_u - tol_num", 0.0, low);
        report.check("max over pairs of d_u - lambda2 |x-y| - tol_num", 0.0, high);
    }
    report.notes.push(format!("lambda1 = {}, lambda2 = {}", fmt_f64(lambda1), fmt_f64(lambda2)));
    Ok(BilipConstants { lambda1, lambda2, validation: report })
}

/// `d_u <= d_v + 2 delta` for `u <= v` with `delta = max(v - u)`, on `pairs`
/// random pairs of the fundamental domain.
pub fn busemann_feller_check(
    u: &PeriodicFunction,
    v: &PeriodicFunction,
    pairs: usize,
    opts: &DistanceOptions,
    seed: u64,
) -> Result<ExperimentReport> {
    if u.lattice() != v.lattice() || u.resolution() != v.resolution() {
        return Err(Error::Input("u and v must share lattice and resolution".into()));
    }
    opts.validate()?;
    let [_, nb] = u.resolution();
    let mut delta = 0.0f64;
    for (idx, (a, b)) in u.samples().iter().zip(v.samples()).enumerate() {
        if a > b {
            return Err(Error::Input(format!(
                "u <= v fails at node ({}, {}): u = {a}, v = {b}",
                idx / nb,
                idx % nb
            )));
        }
        delta = delta.max(b - a);
    }
    let lat = *u.lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(Vec2, Vec2)> = (0..pairs)
        .map(|_| {
            let x = lat.point(rng.gen(), rng.gen());
            let y = lat.point(rng.gen(), rng.gen());
            (x, y)
        })
        .collect();
    let values: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(x, y)| {
            let du = intrinsic_distance(u, x, y, opts)?.value;
            let dv = intrinsic_distance(v, x, y, opts)?.value;
            Ok((du, dv))
        })
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("busemann_feller", digest(&(u, v, pairs, opts))?, seed);
    for (k, &(du, dv)) in values.iter().enumerate() {
        report.check(
            format!("pair {k}: d_u - d_v - tol_num <= 2 delta"),
            2.0 * delta,
            du - dv - opts.tol_num(du.max(dv)),
        );
    }
    report.notes.push(format!("delta = {}", fmt_f64(delta)));
    Ok(report)
}

/// How the approximating sequence `(u_n, L_n)` is generated from the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    /// `u_n = u + shift / n`.
    #[serde(default)]
    pub shift: f64,
    /// `L_n` has basis `a + p_a / n, b + p_b / n`.
    #[serde(default)]
    pub perturbation: Option<[Vec2; 2]>,
    /// Require `D_N <= D_1 / decay_factor`.
    #[serde(default = "one")]
    pub decay_factor: f64,
    /// Optional absolute bound on `D_N`.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for SequenceSpec {
    fn default() -> Self {
        SequenceSpec { shift: 0.0, perturbation: None, decay_factor: 1.0, threshold: None }
    }
}

impl SequenceSpec {
    pub fn shift(c: f64) -> Self {
        SequenceSpec { shift: c, ..Default::default() }
    }

    pub fn perturbed(p: [Vec2; 2]) -> Self {
        SequenceSpec { perturbation: Some(p), ..Default::default() }
    }

    /// `(u_n, L_n)` for `n >= 1`.
    pub fn term(&self, u: &PeriodicFunction, n: usize) -> Result<PeriodicFunction> {
        let t = 1.0 / n as f64;
        let lat = *u.lattice();
        let un = match self.perturbation {
            Some([pa, pb]) => u.transported(Lattice::new(lat.a() + pa * t, lat.b() + pb * t)?),
            None => u.clone(),
        };
        Ok(un.add_constant(self.shift * t))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOutcome {
    pub report: ExperimentReport,
    pub target: TorusDistanceMatrix,
}

/// Discrepancies `D_n` between the torus matrices of `(u_n, L_n)` and of the
/// target on a `k x k` sample, compared through the lattice morphism
/// `phi_n: L -> L_n`, for `n = 1..=n_max`.
///
/// Series: `discrepancy` (`D_n`) and `phi_displacement`
/// (`max over the sample of d_{u_n}(phi_n x, x)`). Checks: `D_N <= D_1 /
/// decay_factor`, the optional threshold, and for pure shifts
/// `D_n <= 2 |shift| / n + tol_num`.
pub fn convergence_experiment(
    u: &PeriodicFunction,
    seq: &SequenceSpec,
    k: usize,
    n_max: usize,
    opts: &DistanceOptions,
) -> Result<ConvergenceOutcome> {
    if k == 0 || n_max == 0 {
        return Err(Error::Input("k and n_max must be positive".into()));
    }
    if !(seq.decay_factor > 0.0) || !seq.shift.is_finite() {
        return Err(Error::Input("decay_factor must be positive and shift finite".into()));
    }
    opts.validate()?;
    let lat = *u.lattice();
    let sample = uniform_sample(&lat, k);
    let target = distance_matrix(u, &sample, opts)?;
    let slack = 2.0 * opts.tol_num(target.diameter());

    let mut discrepancy = Vec::with_capacity(n_max);
    let mut displacement = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let un = seq.term(u, n)?;
        let phi = lat.morphism_to(un.lattice());
        let mn = distance_matrix(&un, &uniform_sample(un.lattice(), k), opts)?;
        discrepancy.push((n, metric_discrepancy(&target, &mn, Some(&phi), Some((&un, opts)))?));
        let disp = sample
            .par_iter()
            .map(|&x| intrinsic_distance(&un, phi.apply(x), x, opts).map(|r| r.value))
            .collect::<Result<Vec<f64>>>()?;
        displacement.push((n, disp.into_iter().fold(0.0, f64::max)));
    }

    let mut report = ExperimentReport::new(
        "convergence",
        digest(&(u, seq, k, n_max, opts))?,
        0,
    );
    if seq.perturbation.is_none() {
        for &(n, d) in &discrepancy {
            report.check(format!("D_{n} <= 2|shift|/n + tol_num"), 2.0 * seq.shift.abs() / n as f64 + slack, d);
        }
    }
    let d1 = discrepancy[0].1;
    let dn = discrepancy[n_max - 1].1;
    if n_max > 1 {
        report.check(
            format!("D_{n_max} <= D_1 / {}", seq.decay_factor),
            d1 / seq.decay_factor,
            dn,
        );
    }
    if let Some(t) = seq.threshold {
        report.check(format!("D_{n_max} <= threshold"), t, dn);
    }
    report.series.push(Series { name: "discrepancy".into(), points: discrepancy });
    report.series.push(Series { name: "phi_displacement".into(), points: displacement });
    report.notes.push("discrepancies are over sampled pairs only".into());
    Ok(ConvergenceOutcome { report, target })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspOptions {
    pub k: usize,
    pub distance: DistanceOptions,
    pub horoconvexity: HoroconvexityOptions,
    pub seed: u64,
    pub bilip_pairs: usize,
    /// Also compare cone-metric distances at `k` and `2k` with the matrix.
    #[serde(default)]
    pub refinement: bool,
}

impl Default for CuspOptions {
    fn default() -> Self {
        CuspOptions {
            k: 8,
            distance: DistanceOptions::default(),
            horoconvexity: HoroconvexityOptions::default(),
            seed: DEFAULT_SEED,
            bilip_pairs: BILIP_VALIDATION_PAIRS,
            refinement: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspAssembly {
    pub report: ExperimentReport,
    pub horoconvexity: HoroconvexityReport,
    /// `u(0)` before normalization.
    pub raw_u0: f64,
    /// `u(0)` after normalization (zero up to rounding).
    pub shifted_u0: f64,
    pub matrix: Option<TorusDistanceMatrix>,
    pub bilip: Option<BilipConstants>,
    pub cone: Option<ConeMetric>,
    pub cbb: Option<CbbReport>,
    /// True when the pipeline stopped at the horoconvexity check.
    pub halted: bool,
}

/// Horoconvexity check, normalization `u(0) = 0`, torus distance matrix,
/// bilipschitz bracketing of the diameter, and the polyhedral comparison
/// metric with its CBB and Gauss-Bonnet checks.
pub fn assemble_cusp_report(u: &PeriodicFunction, opts: &CuspOptions) -> Result<CuspAssembly> {
    if opts.k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    opts.distance.validate()?;
    let mut report = ExperimentReport::new("cusp_report", digest(&(u, opts))?, opts.seed);

    let horo = is_horoconvex(u, &opts.horoconvexity);
    report.check("horoconvexity: -(worst midpoint slack)", horo.tolerance, -horo.worst_violation);
    let raw_u0 = u.eval(Vec2::ZERO);
    if !horo.passed {
        if let Some(w) = horo.witness {
            report.notes.push(format!(
                "not horoconvex; witness p = ({}, {}), midpoint = ({}, {}), q = ({}, {})",
                fmt_f64(w[0].x()), fmt_f64(w[0].y()),
                fmt_f64(w[1].x()), fmt_f64(w[1].y()),
                fmt_f64(w[2].x()), fmt_f64(w[2].y()),
            ));
        }
        return Ok(CuspAssembly {
            report,
            horoconvexity: horo,
            raw_u0,
            shifted_u0: raw_u0,
            matrix: None,
            bilip: None,
            cone: None,
            cbb: None,
            halted: true,
        });
    }

    let (shifted, _) = u.normalized();
    let shifted_u0 = shifted.eval(Vec2::ZERO);
    report.check("|u(0)| after normalization", 1e-12, shifted_u0.abs());

    let lat = *u.lattice();
    let matrix = distance_matrix(&shifted, &uniform_sample(&lat, opts.k), &opts.distance)?;
    let raw = &matrix.meta.raw_validation;
    report.notes.push(format!(
        "raw pairwise values: {} triangle violations beyond 2 tol_num (max excess {}), {} entries tightened by closure",
        raw.triangle_violations,
        fmt_f64(raw.max_triangle_excess),
        matrix.meta.closure_tightened
    ));
    let v = &matrix.meta.validation;
    report.check("matrix: symmetric, zero diagonal, non-negative (0 = yes)", 0.0, if v.symmetric && v.zero_diagonal && v.nonnegative { 0.0 } else { 1.0 });
    report.check("matrix: triangle violations", 0.0, v.triangle_violations as f64);

    let bilip = bilip_constants(&shifted, Rect::fundamental(&lat), &opts.distance, opts.bilip_pairs, opts.seed)?;
    for c in &bilip.validation.checks {
        report.checks.push(Check { description: format!("bilip: {}", c.description), ..c.clone() });
    }
    let flat = uniform_sample(&lat, opts.k);
    let mut flat_diam = 0.0f64;
    for &p in &flat {
        for &q in &flat {
            flat_diam = flat_diam.max(lat.flat_torus_distance(p, q));
        }
    }
    let diam = matrix.diameter();
    let tol = opts.distance.tol_num(diam);
    report.check("lambda1 * flat diameter - diameter", tol, bilip.lambda1 * flat_diam - diam);
    report.check("diameter - lambda2 * flat diameter", tol, diam - bilip.lambda2 * flat_diam);
    report.notes.push(format!("diameter = {}", fmt_f64(diam)));

    let tri = comparison_replace(&shifted, opts.k, &opts.distance)?;
    let cone = cone_metric(&tri)?;
    report.check("Gauss-Bonnet: |sum k_v - area| / (1 + area)", 1e-9, cone.gauss_bonnet_slack / (1.0 + cone.area));
    let min_k = cone.curvatures.iter().copied().fold(f64::INFINITY, f64::min);
    report.check("CBB(-1): -min k_v", LENIENT_CBB_TOL, -min_k);
    let cbb = is_cbb(&cone, false);
    report.notes.push(format!("max |k_v| = {}", fmt_f64(cone.max_abs_curvature())));

    if opts.refinement {
        let mut points = vec![(opts.k, metric_discrepancy(&matrix, &cone_distance_matrix(&cone)?, None, None)?)];
        let fine = cone_metric(&comparison_replace(&shifted, 2 * opts.k, &opts.distance)?)?;
        let fine_m = cone_distance_matrix(&fine)?;
        points.push((2 * opts.k, metric_discrepancy(&matrix, &fine_m, None, None)?));
        report.series.push(Series { name: "cone_vs_torus_discrepancy".into(), points });
    }

    Ok(CuspAssembly {
        report,
        horoconvexity: horo,
        raw_u0,
        shifted_u0,
        matrix: Some(matrix),
        bilip: Some(bilip),
        cone: Some(cone),
        cbb: Some(cbb),
        halted: false,
    })
}
