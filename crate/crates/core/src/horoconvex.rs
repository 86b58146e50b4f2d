//! Lattice-periodic candidate horoconvex functions.
//!
//! A function `u` on the horosphere chart is horoconvex when
//! `F(x) = e^{-2u(x)} + |x|^2` is convex; equivalently its horograph (the graph
//! of `e^{-u}` in the upper half-space) bounds a convex region of `H^3`.
//! Functions are stored as samples on a uniform grid of the fundamental
//! parallelogram and interpolated linearly on a fixed triangulation of each
//! grid cell, which makes evaluation exactly periodic.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::planar::Vec2;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct PeriodicFunction {
    lattice: Lattice,
    resolution: [usize; 2],
    /// `samples[i * n_b + j]` is the value at `(i / n_a) a + (j / n_b) b`.
    samples: Vec<f64>,
    min: f64,
    max: f64,
    horoconvex: OnceLock<bool>,
}

impl PartialEq for PeriodicFunction {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.resolution == other.resolution
            && self.samples == other.samples
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    lattice: Lattice,
    resolution: [usize; 2],
    samples: Vec<Vec<f64>>,
}

impl TryFrom<FunctionRepr> for PeriodicFunction {
    type Error = Error;
    fn try_from(r: FunctionRepr) -> Result<Self> {
        let [na, nb] = r.resolution;
        if r.samples.len() != na || r.samples.iter().any(|row| row.len() != nb) {
            return Err(Error::Input(format!(
                "samples must be a {na} x {nb} array (rows along a)"
            )));
        }
        PeriodicFunction::new(r.lattice, r.resolution, r.samples.concat())
    }
}

impl From<PeriodicFunction> for FunctionRepr {
    fn from(u: PeriodicFunction) -> Self {
        FunctionRepr {
            lattice: u.lattice,
            resolution: u.resolution,
            samples: u.samples.chunks(u.resolution[1]).map(<[f64]>::to_vec).collect(),
        }
    }
}

/// One triangle of the interpolation mesh, with the gradient of `u` on it.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrianglePiece {
    /// `2 * (i * n_b + j) + upper`, with `(i, j)` the cell in the fundamental domain.
    pub index: usize,
    pub gradient: Vec2,
}

/// Value of `G = -e^{-2u(x)} grad u(x)` together with a boundary flag.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SupportGradient {
    pub gradient: Vec2,
    pub triangle: usize,
    /// The query lies on an edge or vertex of the interpolation mesh; the
    /// lowest-indexed incident triangle was used.
    pub on_boundary: bool,
}

impl PeriodicFunction {
    pub fn new(lattice: Lattice, resolution: [usize; 2], samples: Vec<f64>) -> Result<Self> {
        let [na, nb] = resolution;
        if na < 2 || nb < 2 {
            return Err(Error::Input(format!(
                "resolution must be at least 2 per axis, got {na} x {nb}"
            )));
        }
        if samples.len() != na * nb {
            return Err(Error::Input(format!(
                "expected {} samples, got {}",
                na * nb,
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite sample at ({}, {})",
                pos / nb,
                pos % nb
            )));
        }
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(PeriodicFunction {
            lattice,
            resolution,
            samples,
            min,
            max,
            horoconvex: OnceLock::new(),
        })
    }

    /// Samples `f(alpha, beta)` on the grid, with `(alpha, beta)` lattice coordinates.
    pub fn from_lattice_fn(
        lattice: Lattice,
        resolution: [usize; 2],
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let [na, nb] = resolution;
        if na < 2 || nb < 2 {
            return Err(Error::Input(format!(
                "resolution must be at least 2 per axis, got {na} x {nb}"
            )));
        }
        let mut samples = Vec::with_capacity(na * nb);
        for i in 0..na {
            for j in 0..nb {
                samples.push(f(i as f64 / na as f64, j as f64 / nb as f64));
            }
        }
        PeriodicFunction::new(lattice, resolution, samples)
    }

    /// Samples a planar function `f(x)`; `f` should itself be periodic.
    pub fn from_planar_fn(
        lattice: Lattice,
        resolution: [usize; 2],
        mut f: impl FnMut(Vec2) -> f64,
    ) -> Result<Self> {
        PeriodicFunction::from_lattice_fn(lattice, resolution, |al, be| f(lattice.point(al, be)))
    }

    pub fn constant(lattice: Lattice, resolution: [usize; 2], c: f64) -> Result<Self> {
        PeriodicFunction::from_lattice_fn(lattice, resolution, |_, _| c)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn resolution(&self) -> [usize; 2] {
        self.resolution
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn sample(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.resolution[1] + j]
    }

    /// Sample at integer node indices, wrapped periodically.
    #[inline]
    pub fn node_value(&self, i: i64, j: i64) -> f64 {
        let [na, nb] = self.resolution;
        self.sample(i.rem_euclid(na as i64) as usize, j.rem_euclid(nb as i64) as usize)
    }

    /// Planar position of node `(i, j)` of the (unbounded) sample grid.
    pub fn node_position(&self, i: i64, j: i64) -> Vec2 {
        let [na, nb] = self.resolution;
        self.lattice.point(i as f64 / na as f64, j as f64 / nb as f64)
    }

    pub fn min_value(&self) -> f64 {
        self.min
    }

    pub fn max_value(&self) -> f64 {
        self.max
    }

    /// Value of `u` at a planar point.
    #[inline]
    pub fn eval(&self, x: Vec2) -> f64 {
        self.eval_coords(self.lattice.to_coords(x))
    }

    /// Value of `u` at a point given in lattice coordinates.
    #[inline]
    pub fn eval_coords(&self, coords: [f64; 2]) -> f64 {
        let (f, _) = Lattice::reduce_coords(coords);
        let (i, fi, j, fj) = self.cell_of(f);
        self.interpolate(i, fi, j, fj)
    }

    /// Grid cell and local offsets of reduced lattice coordinates.
    #[inline]
    fn cell_of(&self, f: [f64; 2]) -> (usize, f64, usize, f64) {
        let [na, nb] = self.resolution;
        let gi = f[0] * na as f64;
        let gj = f[1] * nb as f64;
        let (mut i, mut fi) = (gi.floor() as usize, gi - gi.floor());
        let (mut j, mut fj) = (gj.floor() as usize, gj - gj.floor());
        if i >= na {
            i = na - 1;
            fi = 1.0;
        }
        if j >= nb {
            j = nb - 1;
            fj = 1.0;
        }
        (i, fi, j, fj)
    }

    #[inline]
    fn corners(&self, i: usize, j: usize) -> [f64; 4] {
        let [na, nb] = self.resolution;
        let i1 = if i + 1 == na { 0 } else { i + 1 };
        let j1 = if j + 1 == nb { 0 } else { j + 1 };
        [
            self.sample(i, j),
            self.sample(i1, j),
            self.sample(i, j1),
            self.sample(i1, j1),
        ]
    }

    #[inline]
    fn interpolate(&self, i: usize, fi: f64, j: usize, fj: f64) -> f64 {
        let [u00, u10, u01, u11] = self.corners(i, j);
        if fi >= fj {
            u00 + fi * (u10 - u00) + fj * (u11 - u10)
        } else {
            u00 + fj * (u01 - u00) + fi * (u11 - u01)
        }
    }

    /// Planar gradient of `u` on triangle `upper` of cell `(i, j)`.
    fn triangle_gradient(&self, i: usize, j: usize, upper: bool) -> Vec2 {
        let [u00, u10, u01, u11] = self.corners(i, j);
        let (di, dj) = if upper {
            (u11 - u01, u01 - u00)
        } else {
            (u10 - u00, u11 - u10)
        };
        let [na, nb] = self.resolution;
        let m = self.lattice.coords_map().0;
        // d(alpha)/dx is the first row of the coordinate map
        Vec2::new(m[0][0], m[0][1]) * (di * na as f64) + Vec2::new(m[1][0], m[1][1]) * (dj * nb as f64)
    }

    /// All triangles of the fundamental domain with their gradients.
    pub fn triangles(&self) -> impl Iterator<Item = TrianglePiece> + '_ {
        let [na, nb] = self.resolution;
        (0..na).flat_map(move |i| {
            (0..nb).flat_map(move |j| {
                [false, true].into_iter().map(move |upper| TrianglePiece {
                    index: 2 * (i * nb + j) + upper as usize,
                    gradient: self.triangle_gradient(i, j, upper),
                })
            })
        })
    }

    /// Largest gradient norm of the interpolant, a global Lipschitz constant.
    pub fn lipschitz_constant(&self) -> f64 {
        self.triangles().map(|t| t.gradient.norm()).fold(0.0, f64::max)
    }

    /// Largest value over triangles of `sqrt(e^{2 max u} + |grad u|^2)`.
    ///
    /// Bounds the integrand of the length functional per unit Euclidean speed.
    pub fn max_length_density(&self) -> f64 {
        let [na, nb] = self.resolution;
        let mut best = 0.0f64;
        for i in 0..na {
            for j in 0..nb {
                let c = self.corners(i, j);
                let lower_max = c[0].max(c[1]).max(c[3]);
                let upper_max = c[0].max(c[2]).max(c[3]);
                for (upper, umax) in [(false, lower_max), (true, upper_max)] {
                    let g = self.triangle_gradient(i, j, upper);
                    best = best.max(((2.0 * umax).exp() + g.norm_sq()).sqrt());
                }
            }
        }
        best
    }

    /// `F(x) = e^{-2u(x)} + |x|^2`, with `u` evaluated periodically and the
    /// quadratic term at the raw point.
    #[inline]
    pub fn f_value(&self, x: Vec2) -> f64 {
        (-2.0 * self.eval(x)).exp() + x.norm_sq()
    }

    /// `G = -e^{-2u(x)} grad u(x)`, the vector of the support inequality.
    pub fn support_gradient(&self, x: Vec2) -> SupportGradient {
        let [na, nb] = self.resolution;
        let c = self.lattice.to_coords(x);
        let (f, _) = Lattice::reduce_coords(c);
        let gi = f[0] * na as f64;
        let gj = f[1] * nb as f64;
        let (i0, fi0, j0, fj0) = self.cell_of(f);
        let on_boundary = fi0 == 0.0 || fj0 == 0.0 || fi0 == fj0 || fi0 == 1.0 || fj0 == 1.0;

        let mut best: Option<(usize, usize, usize, bool)> = None;
        let cand_i: Vec<i64> = if fi0 == 0.0 { vec![i0 as i64 - 1, i0 as i64] } else { vec![i0 as i64] };
        let cand_j: Vec<i64> = if fj0 == 0.0 { vec![j0 as i64 - 1, j0 as i64] } else { vec![j0 as i64] };
        for &ci in &cand_i {
            for &cj in &cand_j {
                let li = gi - ci as f64;
                let lj = gj - cj as f64;
                let wi = ci.rem_euclid(na as i64) as usize;
                let wj = cj.rem_euclid(nb as i64) as usize;
                for upper in [false, true] {
                    let inside = if upper { lj >= li } else { li >= lj };
                    if !inside {
                        continue;
                    }
                    let index = 2 * (wi * nb + wj) + upper as usize;
                    if best.map_or(true, |b| index < b.0) {
                        best = Some((index, wi, wj, upper));
                    }
                }
            }
        }
        let (index, wi, wj, upper) = best.expect("every point lies in some triangle");
        let grad = self.triangle_gradient(wi, wj, upper);
        let w = (-2.0 * self.interpolate(i0, fi0, j0, fj0)).exp();
        SupportGradient {
            gradient: grad * (-w),
            triangle: index,
            on_boundary,
        }
    }

    /// `u + eps`.
    pub fn add_constant(&self, eps: f64) -> PeriodicFunction {
        self.map_samples(|v| v + eps)
    }

    /// `lambda * u`.
    pub fn scaled(&self, lambda: f64) -> PeriodicFunction {
        self.map_samples(|v| lambda * v)
    }

    fn map_samples(&self, f: impl Fn(f64) -> f64) -> PeriodicFunction {
        PeriodicFunction::new(
            self.lattice,
            self.resolution,
            self.samples.iter().map(|&v| f(v)).collect(),
        )
        .expect("mapped samples stay valid")
    }

    /// The same samples carried to another lattice, i.e. `u o M^{-1}` for the
    /// linear map `M` sending this lattice to `lattice`.
    pub fn transported(&self, lattice: Lattice) -> PeriodicFunction {
        PeriodicFunction::new(lattice, self.resolution, self.samples.clone())
            .expect("samples already validated")
    }

    /// Shift so that `u(0) = 0`; returns the shifted function and the raw `u(0)`.
    pub fn normalized(&self) -> (PeriodicFunction, f64) {
        let u0 = self.eval(Vec2::ZERO);
        (self.add_constant(-u0), u0)
    }

    /// Cached result of [`is_horoconvex`] with default options.
    pub fn passes_default_check(&self) -> bool {
        *self
            .horoconvex
            .get_or_init(|| is_horoconvex(self, &HoroconvexityOptions::default()).passed)
    }
}

/// Options of the midpoint-convexity checker.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroconvexityOptions {
    /// Absolute slack; `None` selects `1e-9 * (1 + max |F|)` over the window.
    pub tolerance: Option<f64>,
    /// Number of fundamental cells per direction in the checked window.
    pub window_cells: usize,
    /// Cap on the node subset used for the all-pairs test.
    pub max_pair_nodes: usize,
}

impl Default for HoroconvexityOptions {
    fn default() -> Self {
        HoroconvexityOptions {
            tolerance: None,
            window_cells: 3,
            max_pair_nodes: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroconvexityReport {
    pub passed: bool,
    /// Most negative value of `(F(p) + F(q)) / 2 - F((p + q) / 2)`, or 0.
    pub worst_violation: f64,
    /// `[p, (p + q) / 2, q]` achieving the worst slack, translated so that the
    /// midpoint lies in the fundamental domain.
    pub witness: Option<[Vec2; 3]>,
    pub tolerance: f64,
    pub window_cells: usize,
    pub triples_checked: u64,
    pub pairs_checked: u64,
}

/// Midpoint-convexity test of `F = e^{-2u} + |x|^2` over a window of cells.
///
/// The checked set consists of collinear node triples along `a`, `b`,
/// `a + b` and `a - b` at every step in a geometric ladder, plus all pairs
/// of a uniform node subset. The result certifies convexity only at the
/// sampling resolution.
pub fn is_horoconvex(u: &PeriodicFunction, opts: &HoroconvexityOptions) -> HoroconvexityReport {
    let [na, nb] = u.resolution();
    let w = opts.window_cells.max(1);
    let (ext_a, ext_b) = (w * na, w * nb);
    let (lo_a, lo_b) = (-((ext_a / 2) as i64), -((ext_b / 2) as i64));
    let (ca, cb) = (ext_a + 1, ext_b + 1);

    let mut f = vec![0.0; ca * cb];
    let mut max_f = 0.0f64;
    for ia in 0..ca {
        for ib in 0..cb {
            let (i, j) = (lo_a + ia as i64, lo_b + ib as i64);
            let v = (-2.0 * u.node_value(i, j)).exp() + u.node_position(i, j).norm_sq();
            max_f = max_f.max(v.abs());
            f[ia * cb + ib] = v;
        }
    }
    let tol = opts.tolerance.unwrap_or(1e-9 * (1.0 + max_f));

    let mut worst = 0.0f64;
    let mut witness: Option<([i64; 2], [i64; 2])> = None;
    let mut triples = 0u64;

    // 1, 2, 3, 4, 6, 8, 12, ...
    let mut steps = Vec::new();
    let mut s = 1usize;
    while s <= ext_a.max(ext_b) / 2 {
        steps.push(s);
        if s.is_power_of_two() && s >= 2 {
            let mid = s + s / 2;
            if mid <= ext_a.max(ext_b) / 2 {
                steps.push(mid);
            }
        }
        s *= 2;
    }

    for dir in [[1i64, 0], [0, 1], [1, 1], [1, -1]] {
        for &m in &steps {
            let (da, db) = (dir[0] * m as i64, dir[1] * m as i64);
            let (ra, rb) = (da.unsigned_abs() as usize, db.unsigned_abs() as usize);
            if 2 * ra > ext_a || 2 * rb > ext_b {
                continue;
            }
            for ia in ra..ca - ra {
                for ib in rb..cb - rb {
                    let c = ia * cb + ib;
                    let p = ((ia as i64 - da) as usize) * cb + (ib as i64 - db) as usize;
                    let q = ((ia as i64 + da) as usize) * cb + (ib as i64 + db) as usize;
                    let slack = 0.5 * (f[p] + f[q]) - f[c];
                    triples += 1;
                    if slack < worst {
                        worst = slack;
                        let center = [lo_a + ia as i64, lo_b + ib as i64];
                        witness = Some(([center[0] - da, center[1] - db], [center[0] + da, center[1] + db]));
                    }
                }
            }
        }
    }

    let node_count = ca * cb;
    let stride = ((node_count as f64 / opts.max_pair_nodes.max(2) as f64).sqrt().ceil() as i64).max(1);
    let hi_a = lo_a + ext_a as i64;
    let hi_b = lo_b + ext_b as i64;
    let sub: Vec<[i64; 2]> = {
        let axis = |lo: i64, hi: i64| -> Vec<i64> {
            let start = lo.div_euclid(stride) * stride;
            (0..)
                .map(|k| start + k * stride)
                .take_while(|&v| v <= hi)
                .filter(|&v| v >= lo)
                .collect()
        };
        let (xa, xb) = (axis(lo_a, hi_a), axis(lo_b, hi_b));
        xa.iter().flat_map(|&i| xb.iter().map(move |&j| [i, j])).collect()
    };
    let fnode = |n: [i64; 2]| f[((n[0] - lo_a) as usize) * cb + (n[1] - lo_b) as usize];
    let mut pairs = 0u64;
    for (k, &p) in sub.iter().enumerate() {
        for &q in &sub[k + 1..] {
            let mid = (u.node_position(p[0], p[1]) + u.node_position(q[0], q[1])) * 0.5;
            let slack = 0.5 * (fnode(p) + fnode(q)) - u.f_value(mid);
            pairs += 1;
            if slack < worst {
                worst = slack;
                witness = Some((p, q));
            }
        }
    }

    let witness = witness.map(|(p, q)| {
        let pp = u.node_position(p[0], p[1]);
        let qq = u.node_position(q[0], q[1]);
        let mid = (pp + qq) * 0.5;
        let shift = -u.lattice().translate(u.lattice().reduce(mid).coeffs);
        [pp + shift, mid + shift, qq + shift]
    });

    HoroconvexityReport {
        passed: worst >= -tol,
        worst_violation: worst,
        witness,
        tolerance: tol,
        window_cells: w,
        triples_checked: triples,
        pairs_checked: pairs,
    }
}

/// Midpoint slack of `F` at a witness triple, recomputed from `f_value`.
pub fn midpoint_slack(u: &PeriodicFunction, p: Vec2, q: Vec2) -> f64 {
    0.5 * (u.f_value(p) + u.f_value(q)) - u.f_value((p + q) * 0.5)
}

/// One Fourier mode `amplitude * cos(2 pi (k0 alpha + k1 beta) + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub k: [i32; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Generators for the test corpus; all carry explicit lattice and resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    /// `u = value`.
    Constant {
        value: f64,
        lattice: Lattice,
        resolution: [usize; 2],
    },
    /// `u = amplitude * cos(2 pi alpha)`; on the lattice `(2 pi, 0), (0, 2 pi)`
    /// this is `amplitude * cos(x_1)`.
    Cosine {
        amplitude: f64,
        lattice: Lattice,
        resolution: [usize; 2],
        #[serde(default)]
        offset: f64,
    },
    /// `u = offset + sum of modes`.
    Fourier {
        modes: Vec<FourierMode>,
        lattice: Lattice,
        resolution: [usize; 2],
        #[serde(default)]
        offset: f64,
    },
    /// Random low-frequency modes with total amplitude `amplitude`.
    Random {
        seed: u64,
        amplitude: f64,
        max_frequency: i32,
        lattice: Lattice,
        resolution: [usize; 2],
        #[serde(default)]
        offset: f64,
    },
}

impl Builtin {
    pub fn build(&self) -> Result<PeriodicFunction> {
        match self {
            Builtin::Constant { value, lattice, resolution } => {
                PeriodicFunction::constant(*lattice, *resolution, *value)
            }
            Builtin::Cosine { amplitude, lattice, resolution, offset } => {
                PeriodicFunction::from_lattice_fn(*lattice, *resolution, |al, _| {
                    offset + amplitude * (TAU * al).cos()
                })
            }
            Builtin::Fourier { modes, lattice, resolution, offset } => {
                build_fourier(modes, *lattice, *resolution, *offset)
            }
            Builtin::Random { seed, amplitude, max_frequency, lattice, resolution, offset } => {
                let modes = random_modes(*seed, *amplitude, *max_frequency)?;
                build_fourier(&modes, *lattice, *resolution, *offset)
            }
        }
    }
}

fn build_fourier(
    modes: &[FourierMode],
    lattice: Lattice,
    resolution: [usize; 2],
    offset: f64,
) -> Result<PeriodicFunction> {
    PeriodicFunction::from_lattice_fn(lattice, resolution, |al, be| {
        offset
            + modes
                .iter()
                .map(|m| m.amplitude * (TAU * (m.k[0] as f64 * al + m.k[1] as f64 * be) + m.phase).cos())
                .sum::<f64>()
    })
}

/// Modes with frequencies in `[-max_frequency, max_frequency]^2 \ {0}` whose
/// amplitudes sum to `amplitude`.
pub fn random_modes(seed: u64, amplitude: f64, max_frequency: i32) -> Result<Vec<FourierMode>> {
    if max_frequency < 1 {
        return Err(Error::Input("max_frequency must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=4);
    let mut modes: Vec<FourierMode> = (0..count)
        .map(|_| {
            let mut k = [0, 0];
            while k == [0, 0] {
                k = [
                    rng.gen_range(-max_frequency..=max_frequency),
                    rng.gen_range(-max_frequency..=max_frequency),
                ];
            }
            FourierMode {
                k,
                amplitude: rng.gen_range(0.2..1.0),
                phase: rng.gen_range(0.0..TAU),
            }
        })
        .collect();
    let total: f64 = modes.iter().map(|m| m.amplitude).sum();
    for m in &mut modes {
        m.amplitude *= amplitude / total;
    }
    Ok(modes)
}

/// A function file: either explicit samples or a builtin generator.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSource {
    Explicit(PeriodicFunction),
    Builtin(Builtin),
}

impl FunctionSource {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        match value.get("builtin") {
            Some(serde_json::Value::String(name)) => {
                if !["constant", "cosine", "fourier", "random"].contains(&name.as_str()) {
                    return Err(Error::Input(format!("unknown builtin generator '{name}'")));
                }
                Ok(FunctionSource::Builtin(serde_json::from_value(value)?))
            }
            Some(other) => Err(Error::Input(format!("builtin must be a string, got {other}"))),
            None => Ok(FunctionSource::Explicit(serde_json::from_value(value)?)),
        }
    }

    pub fn build(&self) -> Result<PeriodicFunction> {
        match self {
            FunctionSource::Explicit(u) => Ok(u.clone()),
            FunctionSource::Builtin(b) => b.build(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_pi_lattice() -> Lattice {
        Lattice::square(TAU).unwrap()
    }

    fn cosine(amplitude: f64, n: usize) -> PeriodicFunction {
        Builtin::Cosine {
            amplitude,
            lattice: two_pi_lattice(),
            resolution: [n, n],
            offset: 0.0,
        }
        .build()
        .unwrap()
    }

    #[test]
    fn rejects_small_resolution_and_nan() {
        assert!(PeriodicFunction::constant(Lattice::unit(), [1, 4], 0.0).is_err());
        assert!(PeriodicFunction::new(Lattice::unit(), [2, 2], vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(PeriodicFunction::new(Lattice::unit(), [2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn constant_everywhere() {
        let u = PeriodicFunction::constant(Lattice::unit(), [3, 5], 0.7).unwrap();
        for x in [Vec2::new(0.3, -7.1), Vec2::new(1e3, 2.0), Vec2::ZERO] {
            assert_eq!(u.eval(x), 0.7);
        }
    }

    #[test]
    fn nodes_and_barycenters() {
        let u = PeriodicFunction::new(Lattice::unit(), [2, 2], vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        // node (1, 1) sits at (0.5, 0.5)
        assert_eq!(u.eval(Vec2::new(0.5, 0.5)), 5.0);
        assert_eq!(u.eval(Vec2::new(0.5, 0.0)), 3.0);
        // lower triangle of cell (0,0): nodes (0,0), (1,0), (1,1)
        let bary = Vec2::new(0.5 * 2.0 / 3.0, 0.5 / 3.0);
        assert!((u.eval(bary) - (1.0 + 3.0 + 5.0) / 3.0).abs() < 1e-14);
        // upper triangle: nodes (0,0), (0,1), (1,1)
        let bary = Vec2::new(0.5 / 3.0, 0.5 * 2.0 / 3.0);
        assert!((u.eval(bary) - (1.0 + 2.0 + 5.0) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn f_value_examples() {
        let zero = PeriodicFunction::constant(Lattice::unit(), [4, 4], 0.0).unwrap();
        assert_eq!(zero.f_value(Vec2::ZERO), 1.0);
        assert_eq!(zero.f_value(Vec2::new(3.0, 4.0)), 26.0);
        let c = cosine(0.05, 256);
        let v = c.f_value(Vec2::new(PI, 0.0));
        // e^{0.1} + pi^2
        assert!((v - 10.974_775_319_165).abs() < 1e-9, "{v}");
    }

    #[test]
    fn zero_is_horoconvex() {
        let u = PeriodicFunction::constant(Lattice::unit(), [8, 8], 0.0).unwrap();
        let r = is_horoconvex(&u, &HoroconvexityOptions::default());
        assert!(r.passed);
        assert!(r.worst_violation >= -r.tolerance);
    }

    #[test]
    fn cosine_examples() {
        let good = is_horoconvex(&cosine(0.05, 256), &HoroconvexityOptions::default());
        assert!(good.passed, "{good:?}");
        let bad = is_horoconvex(&cosine(1.0, 256), &HoroconvexityOptions::default());
        assert!(!bad.passed);
        let w = bad.witness.unwrap();
        assert!((w[1].x() - PI).abs() < 0.2, "{w:?}");
        // d^2/dt^2 (e^{-2 cos t} + t^2) at pi
        let second = (2.0f64).exp() * (4.0 * 0.0 + 2.0 * -1.0) + 2.0;
        assert!((second - (2.0 - 2.0 * (2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn witness_is_genuine() {
        let u = cosine(1.0, 64);
        let r = is_horoconvex(&u, &HoroconvexityOptions::default());
        let [p, m, q] = r.witness.unwrap();
        assert!(((p + q) * 0.5 - m).norm() < 1e-12);
        assert!(midpoint_slack(&u, p, q) < -r.tolerance);
    }

    #[test]
    fn scaling_is_not_closed() {
        let u = cosine(0.05, 128);
        assert!(is_horoconvex(&u, &HoroconvexityOptions::default()).passed);
        assert!(!is_horoconvex(&u.scaled(40.0), &HoroconvexityOptions::default()).passed);
    }

    #[test]
    fn add_constant_zero_is_identity() {
        let u = cosine(0.05, 32);
        assert_eq!(u.add_constant(0.0), u);
        let one = PeriodicFunction::constant(Lattice::unit(), [4, 4], 0.0).unwrap().add_constant(1.0);
        assert!(one.samples().iter().all(|&v| v == 1.0));
        assert!(is_horoconvex(&cosine(0.05, 128).add_constant(0.3), &HoroconvexityOptions::default()).passed);
    }

    #[test]
    fn support_gradient_cases() {
        let c = PeriodicFunction::constant(Lattice::unit(), [4, 4], 2.0).unwrap();
        assert_eq!(c.support_gradient(Vec2::new(0.3, 0.1)).gradient, Vec2::ZERO);

        // linear in x_1 on the cell around the query
        let lin = PeriodicFunction::from_lattice_fn(Lattice::unit(), [4, 4], |al, _| {
            [0.0, 0.1, 0.2, 0.1][(al * 4.0).round() as usize % 4]
        })
        .unwrap();
        let x = Vec2::new(0.3, 0.05);
        let g = lin.support_gradient(x);
        let expect = -(-2.0 * lin.eval(x)).exp() * 0.4;
        assert!((g.gradient.x() - expect).abs() < 1e-12 && g.gradient.y().abs() < 1e-12);
        assert!(!g.on_boundary);

        let cos = cosine(0.05, 256);
        let g = cos.support_gradient(Vec2::new(PI / 2.0 + 1e-3, 1e-3 * 0.37));
        assert!((g.gradient.x() - 0.05).abs() < 1e-3, "{g:?}");
        assert!(g.gradient.y().abs() < 1e-9);
    }

    #[test]
    fn support_gradient_on_edges_picks_lowest_triangle() {
        let u = PeriodicFunction::from_lattice_fn(Lattice::unit(), [4, 4], |a, b| a * a + b).unwrap();
        let diag = u.support_gradient(Vec2::new(0.125, 0.125));
        assert!(diag.on_boundary);
        assert_eq!(diag.triangle, 0);
        let node = u.support_gradient(Vec2::new(0.25, 0.25));
        assert!(node.on_boundary);
        assert_eq!(node.triangle, 0);
    }

    #[test]
    fn builtin_files() {
        let src = FunctionSource::from_json_str(
            r#"{"builtin": "cosine", "amplitude": 0.05,
                "lattice": {"a": [6.283185307179586, 0], "b": [0, 6.283185307179586]},
                "resolution": [16, 16]}"#,
        )
        .unwrap();
        let u = src.build().unwrap();
        assert!((u.eval(Vec2::ZERO) - 0.05).abs() < 1e-15);
        let err = FunctionSource::from_json_str(
            r#"{"builtin": "sawtooth", "lattice": {"a": [1, 0], "b": [0, 1]}, "resolution": [4, 4]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sawtooth"));
        let explicit = FunctionSource::from_json_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(explicit.build().unwrap(), u);
    }

    #[test]
    fn normalization_shifts_origin_value() {
        let u = cosine(0.05, 16).add_constant(0.4);
        let (n, raw) = u.normalized();
        assert!((raw - 0.45).abs() < 1e-15);
        assert_eq!(n.eval(Vec2::ZERO), 0.0);
    }
}
