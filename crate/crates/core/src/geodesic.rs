//! Induced intrinsic metric on the horograph.
//!
//! A planar curve `c` lifts to `c_u = (c, e^{-u o c})` on the horograph and has
//! length `L_u(c) = int (e^{2u(c)} |c'|^2 + ((u o c)')^2)^{1/2}`. The distance
//! `d_u(x, y)` is the infimum of `L_u` over curves joining `x` and `y`.
//!
//! [`intrinsic_distance`] computes an upper estimate of `d_u` with a witness
//! polyline in three stages: A* search on a 16-neighbour grid graph (edge
//! weight = `L_u` of the straight edge), shortcutting of the graph path, and
//! coarse-to-fine relaxation of a polyline resampled from it. The reported
//! value is the adaptive-quadrature length of the witness, never more than
//! the straight chord, and is sandwiched below by the chordal distance in
//! `H^3` between the lifted end points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfspace::{chordal_lower_bound, hyp_distance_parts};
use crate::horoconvex::PeriodicFunction;
use crate::planar::Vec2;
use crate::quadrature::adaptive_simpson;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    vertices: Vec<Vec2>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("a polyline needs at least one vertex".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite polyline vertex".into()));
        }
        Ok(Polyline { vertices })
    }

    pub fn point(p: Vec2) -> Self {
        Polyline { vertices: vec![p] }
    }

    pub fn segment(p: Vec2, q: Vec2) -> Self {
        Polyline { vertices: vec![p, q] }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn first(&self) -> Vec2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Vec2 {
        *self.vertices.last().expect("non-empty")
    }

    pub fn euclidean_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn reversed(&self) -> Polyline {
        let mut v = self.vertices.clone();
        v.reverse();
        Polyline { vertices: v }
    }

    pub fn translated(&self, t: Vec2) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|&v| v + t).collect(),
        }
    }

    /// Concatenation; the first vertex of `other` must equal our last one.
    pub fn concat(&self, other: &Polyline) -> Polyline {
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        Polyline { vertices: v }
    }

    /// Writes `s, x1, x2, u, e^{-u}` rows, `s` being the cumulative length.
    pub fn write_csv<W: Write>(&self, u: &PeriodicFunction, quad_tol: f64, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "x1", "x2", "u", "exp_minus_u"])?;
        let mut seg = SegmentIntegrator::new(u, quad_tol);
        let mut s = 0.0;
        for (k, &v) in self.vertices.iter().enumerate() {
            if k > 0 {
                s += seg.length(self.vertices[k - 1], v);
            }
            let uv = u.eval(v);
            w.write_record([s, v.x(), v.y(), uv, (-uv).exp()].map(crate::report::fmt_f64))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Length of straight segments under `L_u`, with reusable scratch space.
///
/// A segment is cut where it crosses the interpolation mesh; `u` is affine on
/// each piece and the smooth integrand is integrated adaptively, or, in
/// [`SegmentIntegrator::exact`] mode, through its closed-form antiderivative.
pub struct SegmentIntegrator<'a> {
    u: &'a PeriodicFunction,
    quad_tol: f64,
    exact: bool,
    params: Vec<f64>,
}

impl<'a> SegmentIntegrator<'a> {
    pub fn new(u: &'a PeriodicFunction, quad_tol: f64) -> Self {
        SegmentIntegrator {
            u,
            quad_tol,
            exact: false,
            params: Vec::with_capacity(64),
        }
    }

    /// Closed-form integration of each affine piece, exact up to rounding.
    pub fn exact(u: &'a PeriodicFunction) -> Self {
        SegmentIntegrator {
            u,
            quad_tol: 0.0,
            exact: true,
            params: Vec::with_capacity(64),
        }
    }

    pub fn length(&mut self, p: Vec2, q: Vec2) -> f64 {
        let l = (q - p).norm();
        if l == 0.0 {
            return 0.0;
        }
        let [na, nb] = self.u.resolution();
        let lat = self.u.lattice();
        let cp = lat.to_coords(p);
        let cq = lat.to_coords(q);
        let gp = [cp[0] * na as f64, cp[1] * nb as f64];
        let gq = [cq[0] * na as f64, cq[1] * nb as f64];

        self.params.clear();
        self.params.push(0.0);
        for (v0, v1) in [(gp[0], gq[0]), (gp[1], gq[1]), (gp[0] - gp[1], gq[0] - gq[1])] {
            if v0 == v1 {
                continue;
            }
            let (lo, hi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
            let mut k = lo.floor() + 1.0;
            while k < hi {
                let s = (k - v0) / (v1 - v0);
                if s > 0.0 && s < 1.0 {
                    self.params.push(s);
                }
                k += 1.0;
            }
        }
        self.params.push(1.0);
        self.params.sort_unstable_by(f64::total_cmp);

        let l2 = l * l;
        let at = |s: f64| [cp[0] + (cq[0] - cp[0]) * s, cp[1] + (cq[1] - cp[1]) * s];
        let mut total = 0.0;
        let mut sa = self.params[0];
        let mut ua = self.u.eval_coords(at(sa));
        for k in 1..self.params.len() {
            let sb = self.params[k];
            if sb - sa <= 1e-15 {
                continue;
            }
            let ub = self.u.eval_coords(at(sb));
            if self.exact {
                total += affine_piece_length(l, ua, ub, sb - sa);
                sa = sb;
                ua = ub;
                continue;
            }
            let g = (ub - ua) / (sb - sa);
            let g2 = g * g;
            let density = |s: f64| ((2.0 * (ua + g * (s - sa))).exp() * l2 + g2).sqrt();
            let fa = ((2.0 * ua).exp() * l2 + g2).sqrt();
            let fb = ((2.0 * ub).exp() * l2 + g2).sqrt();
            total += adaptive_simpson(density, sa, sb, fa, fb, self.quad_tol);
            sa = sb;
            ua = ub;
        }
        total
    }
}

/// `int_0^d (l^2 e^{2u(s)} + g^2)^{1/2} ds` for `u` affine from `ua` to `ub`
/// with slope `g = (ub - ua) / d`.
///
/// With `a = l^2 e^{2 ua}` the antiderivative of `(a e^{2gs} + g^2)^{1/2}` is
/// `(w + |g| (g s - ln(w + |g|))) / g`, `w` being the integrand; both terms
/// are rearranged to stay accurate as `g -> 0`.
fn affine_piece_length(l: f64, ua: f64, ub: f64, d: f64) -> f64 {
    let g = (ub - ua) / d;
    let ea = l * ua.exp();
    if g == 0.0 {
        return ea * d;
    }
    let b = g.abs();
    let wa = ea.hypot(b);
    let wb = (l * ub.exp()).hypot(b);
    let a = ea * ea;
    let t1 = a * (2.0 * g * d).exp_m1() / (g * (wa + wb));
    let t2 = b * d - g.signum() * ((wb - wa) / (wa + b)).ln_1p();
    t1 + t2
}

/// `L_u(c)` of a polyline; zero for a single vertex.
pub fn curve_length(u: &PeriodicFunction, c: &Polyline, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::Input(format!("quad_tol must be positive, got {quad_tol}")));
    }
    let mut seg = SegmentIntegrator::new(u, quad_tol);
    Ok(c.vertices.windows(2).map(|w| seg.length(w[0], w[1])).sum())
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Grid step of the search graph; `None` uses the cell diameter / 128.
    pub grid_step: Option<f64>,
    /// Maximum number of relaxation sweeps on the finest level.
    pub refine_iters: usize,
    /// Relative tolerance of the length quadrature.
    pub quad_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            grid_step: None,
            refine_iters: 20,
            quad_tol: 1e-9,
        }
    }
}

impl DistanceOptions {
    pub fn with_grid_step(mut self, h: f64) -> Self {
        self.grid_step = Some(h);
        self
    }

    pub fn resolved_grid_step(&self, u: &PeriodicFunction) -> f64 {
        self.grid_step
            .unwrap_or_else(|| u.lattice().cell_diameter() / 128.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.grid_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Input(format!("grid_step must be positive, got {h}")));
            }
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(Error::Input(format!("quad_tol must lie in (0, 1), got {}", self.quad_tol)));
        }
        Ok(())
    }

    /// Numerical slack for inequality checks on values of size `value`.
    pub fn tol_num(&self, value: f64) -> f64 {
        2.0 * self.quad_tol * value.abs() + 1e-9
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub witness: Polyline,
    /// Chordal `H^3` distance of the lifted end points.
    pub lower_bound: f64,
    pub grid_step: f64,
    pub refine_iters: usize,
    pub quad_tol: f64,
    /// Length of the raw graph path.
    pub graph_value: f64,
    /// `L_u` of the straight segment.
    pub straight_value: f64,
    /// Coordinate-descent sweeps actually run.
    pub sweeps: usize,
    /// Set when `u` does not pass the default horoconvexity check.
    pub warning: Option<String>,
}

impl DistanceResult {
    fn trivial(x: Vec2, opts: &DistanceOptions, h: f64, warning: Option<String>) -> Self {
        DistanceResult {
            value: 0.0,
            witness: Polyline::point(x),
            lower_bound: 0.0,
            grid_step: h,
            refine_iters: opts.refine_iters,
            quad_tol: opts.quad_tol,
            graph_value: 0.0,
            straight_value: 0.0,
            sweeps: 0,
            warning,
        }
    }
}

/// Window margin from the chordal estimate: a curve of `L_u`-length at most
/// `bound` starting at `x` stays within this Euclidean distance of `x`.
pub fn window_margin(u: &PeriodicFunction, bound: f64) -> f64 {
    std::f64::consts::SQRT_2 * (-u.min_value()).exp() * (bound.cosh() - 1.0).max(0.0).sqrt()
}

/// Upper estimate of `d_u(x, y)` with a witness polyline.
pub fn intrinsic_distance(
    u: &PeriodicFunction,
    x: Vec2,
    y: Vec2,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    opts.validate()?;
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Input("non-finite end point".into()));
    }
    let h = opts.resolved_grid_step(u);
    let warning = (!u.passes_default_check())
        .then(|| "function fails the horoconvexity check; convex-surface bounds are not guaranteed".to_string());
    if x == y {
        return Ok(DistanceResult::trivial(x, opts, h, warning));
    }
    // symmetric by construction: always search from the lexicographically smaller end
    let swap = (y.x(), y.y()) < (x.x(), x.y());
    let (src, dst) = if swap { (y, x) } else { (x, y) };
    let mut r = search_and_refine(u, src, dst, h, opts)?;
    if swap {
        r.witness = r.witness.reversed();
    }
    r.warning = warning;
    Ok(r)
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    f: f64,
    node: (i32, i32),
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then lexicographic node order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const STENCIL: [(i32, i32); 16] = [
    (1, 0), (0, 1), (-1, 0), (0, -1),
    (1, 1), (-1, 1), (-1, -1), (1, -1),
    (2, 1), (1, 2), (-1, 2), (-2, 1),
    (-2, -1), (-1, -2), (1, -2), (2, -1),
];

const TARGET: (i32, i32) = (i32::MAX, i32::MAX);

struct NodeState {
    g: f64,
    pred: Option<(i32, i32)>,
    closed: bool,
    height: f64,
}

fn search_and_refine(
    u: &PeriodicFunction,
    x: Vec2,
    y: Vec2,
    h: f64,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    let mut quad = SegmentIntegrator::new(u, opts.quad_tol);
    let mut seg = SegmentIntegrator::exact(u);
    let straight = quad.length(x, y);
    let lower = chordal_lower_bound(u, x, y);

    let margin = window_margin(u, straight);
    let lo = Vec2::new(x.x().min(y.x()) - margin, x.y().min(y.y()) - margin);
    let hi = Vec2::new(x.x().max(y.x()) + margin, x.y().max(y.y()) + margin);
    let bound = |v: f64| -> Result<i32> {
        if v.abs() > i32::MAX as f64 / 4.0 || !v.is_finite() {
            Err(Error::Input("search window too large for the grid step".into()))
        } else {
            Ok(v as i32)
        }
    };
    let imin = bound(((lo.x() - x.x()) / h).floor())?;
    let imax = bound(((hi.x() - x.x()) / h).ceil())?;
    let jmin = bound(((lo.y() - x.y()) / h).floor())?;
    let jmax = bound(((hi.y() - x.y()) / h).ceil())?;
    if imin > imax || jmin > jmax {
        return Err(Error::Input("empty search window".into()));
    }
    let pos = |n: (i32, i32)| -> Vec2 {
        if n == TARGET {
            y
        } else {
            x + Vec2::new(n.0 as f64 * h, n.1 as f64 * h)
        }
    };

    let flat_rate = u.min_value().exp();
    let y_height = (-u.eval(y)).exp();
    let heuristic = |p: Vec2, s: f64| -> f64 {
        hyp_distance_parts(p, s, y, y_height).max(flat_rate * (p - y).norm())
    };
    let link_radius = 2.5 * h;
    let near_target = |p: Vec2| (p - y).norm() <= link_radius;

    let mut nodes: FxHashMap<(i32, i32), NodeState> = FxHashMap::default();
    let mut heap = BinaryHeap::new();
    let s0 = (-u.eval(x)).exp();
    nodes.insert((0, 0), NodeState { g: 0.0, pred: None, closed: false, height: s0 });
    heap.push(Entry { f: heuristic(x, s0), node: (0, 0) });

    let in_window = |n: (i32, i32)| n.0 >= imin && n.0 <= imax && n.1 >= jmin && n.1 <= jmax;
    let mut reached = false;
    while let Some(Entry { node, .. }) = heap.pop() {
        let state = nodes.get_mut(&node).expect("queued nodes are stored");
        if state.closed {
            continue;
        }
        state.closed = true;
        if node == TARGET {
            reached = true;
            break;
        }
        let g = state.g;
        let p = pos(node);
        let relax = |nodes: &mut FxHashMap<(i32, i32), NodeState>,
                         heap: &mut BinaryHeap<Entry>,
                         next: (i32, i32),
                         w: f64| {
            let ng = g + w;
            let q = pos(next);
            match nodes.get_mut(&next) {
                Some(s) if s.closed => {}
                Some(s) => {
                    if ng < s.g {
                        s.g = ng;
                        s.pred = Some(node);
                        heap.push(Entry { f: ng + heuristic(q, s.height), node: next });
                    } else if ng == s.g && s.pred.map_or(true, |pr| node < pr) {
                        s.pred = Some(node);
                    }
                }
                None => {
                    let height = if next == TARGET { y_height } else { (-u.eval(q)).exp() };
                    nodes.insert(next, NodeState { g: ng, pred: Some(node), closed: false, height });
                    heap.push(Entry { f: ng + heuristic(q, height), node: next });
                }
            }
        };
        for (di, dj) in STENCIL {
            let next = (node.0 + di, node.1 + dj);
            if !in_window(next) || nodes.get(&next).is_some_and(|s| s.closed) {
                continue;
            }
            let w = seg.length(p, pos(next));
            relax(&mut nodes, &mut heap, next, w);
        }
        if near_target(p) {
            let w = seg.length(p, y);
            relax(&mut nodes, &mut heap, TARGET, w);
        }
    }
    if !reached {
        return Err(Error::Input("target not reachable inside the search window".into()));
    }

    let mut path = vec![y];
    let mut cur = nodes[&TARGET].pred;
    while let Some(n) = cur {
        path.push(pos(n));
        cur = nodes[&n].pred;
    }
    path.reverse();
    let graph_value = nodes[&TARGET].g;
    drop(nodes);

    let (_, verts, sweeps) = refine(&mut seg, path, h, opts);
    let refined: f64 = verts.windows(2).map(|w| quad.length(w[0], w[1])).sum();
    let (value, witness) = if straight <= refined { (straight, vec![x, y]) } else { (refined, verts) };

    Ok(DistanceResult {
        value,
        witness: Polyline { vertices: witness },
        lower_bound: lower,
        grid_step: h,
        refine_iters: opts.refine_iters,
        quad_tol: opts.quad_tol,
        graph_value,
        straight_value: straight,
        sweeps,
        warning: None,
    })
}

/// Shortcuts the graph path (or takes the straight chord when that is
/// shorter) and relaxes it coarse-to-fine; never returns anything longer than
/// the seed. Returns (length, path, sweeps).
fn refine(
    seg: &mut SegmentIntegrator<'_>,
    path: Vec<Vec2>,
    h: f64,
    opts: &DistanceOptions,
) -> (f64, Vec<Vec2>, usize) {
    let kept = shortcut(seg, &path);
    let chord = vec![path[0], *path.last().expect("non-empty path")];
    let kept_len: f64 = kept.windows(2).map(|w| seg.length(w[0], w[1])).sum();
    let chord_len = seg.length(chord[0], chord[1]);
    let (seed, seed_len) = if kept.len() > 2 && chord_len < kept_len { (chord, chord_len) } else { (kept, kept_len) };
    let (len, verts, sweeps) = relax_multilevel(seg, &seed, h, opts);
    if len <= seed_len {
        (len, verts, sweeps)
    } else {
        (seed_len, seed, sweeps)
    }
}

/// Greedy shortcutting with doubling look-ahead; never lengthens the path.
fn shortcut(seg: &mut SegmentIntegrator<'_>, path: &[Vec2]) -> Vec<Vec2> {
    let mut prefix = vec![0.0; path.len()];
    for k in 1..path.len() {
        prefix[k] = prefix[k - 1] + seg.length(path[k - 1], path[k]);
    }
    let last = path.len() - 1;
    let mut kept = vec![path[0]];
    let mut i = 0;
    while i < last {
        let mut best = i + 1;
        let mut step = 2;
        loop {
            let j = (i + step).min(last);
            if j <= best {
                break;
            }
            if seg.length(path[i], path[j]) <= prefix[j] - prefix[i] {
                best = j;
                if j == last {
                    break;
                }
                step *= 2;
            } else {
                break;
            }
        }
        kept.push(path[best]);
        i = best;
    }
    kept
}

const COARSE_SWEEPS: usize = 50;
const MAX_SEGMENTS: usize = 1 << 14;
const GOLDEN_STEPS: usize = 14;

/// Minimizer estimate of `phi` on `[-radius, radius]` given `phi(0) = f0`:
/// a parabolic step from three probes, falling back to golden-section search
/// when the probes are not convex or the step does not improve (near kinks of
/// `u`). Returns the step and `phi` there.
fn line_search(
    phi: &mut impl FnMut(f64) -> (f64, f64, f64),
    f0: f64,
    radius: f64,
) -> (f64, (f64, f64, f64)) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let delta = 0.1 * radius;
    let vm = phi(-delta);
    let vp = phi(delta);
    let (fm, fp) = (vm.0, vp.0);
    let curv = fm - 2.0 * f0 + fp;
    let mut best = if fm < fp { (-delta, vm) } else { (delta, vp) };
    if curv > 0.0 {
        let t = 0.5 * delta * (fm - fp) / curv;
        if t.abs() <= radius {
            let v = phi(t);
            if v.0 < best.1 .0 {
                best = (t, v);
            }
            if v.0 < f0 && v.0 <= fm.min(fp) {
                return best;
            }
        }
    }
    if curv > 0.0 {
        // convex probes and no gain from the parabola: at a minimum up to
        // the probe spacing
        return best;
    }
    // bracket around the best probe
    let (mut lo, mut hi) = if best.1 .0 < f0 {
        (best.0 - delta, best.0 + delta)
    } else {
        (-delta, delta)
    };
    if best.1 .0 < f0 && (fm < f0) != (fp < f0) && curv <= 0.0 {
        // concave probes: the minimum may lie far out
        lo = lo.min(-radius).max(-radius);
        hi = hi.max(radius).min(radius);
        if fm < fp { hi = 0.0 } else { lo = 0.0 }
    }
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut vc = phi(c);
    let mut vd = phi(d);
    for _ in 0..GOLDEN_STEPS {
        if vc.0 < vd.0 {
            hi = d;
            d = c;
            vd = vc;
            c = hi - INV_PHI * (hi - lo);
            vc = phi(c);
        } else {
            lo = c;
            c = d;
            vc = vd;
            d = lo + INV_PHI * (hi - lo);
            vd = phi(d);
        }
    }
    for (t, v) in [(c, vc), (d, vd)] {
        if v.0 < best.1 .0 {
            best = (t, v);
        }
    }
    best
}

/// `m + 1` points equally spaced in arc length along `path`.
fn resample(path: &[Vec2], m: usize) -> Vec<Vec2> {
    let cum: Vec<f64> = std::iter::once(0.0)
        .chain(path.windows(2).scan(0.0, |acc, w| {
            *acc += (w[1] - w[0]).norm();
            Some(*acc)
        }))
        .collect();
    let total = *cum.last().expect("non-empty path");
    let mut out = Vec::with_capacity(m + 1);
    let mut k = 0;
    for i in 0..=m {
        let s = total * i as f64 / m as f64;
        while k + 2 < cum.len() && cum[k + 1] < s {
            k += 1;
        }
        let span = cum[k + 1] - cum[k];
        let t = if span > 0.0 { ((s - cum[k]) / span).clamp(0.0, 1.0) } else { 0.0 };
        out.push(path[k].lerp(path[k + 1], t));
    }
    out[0] = path[0];
    out[m] = *path.last().expect("non-empty path");
    out
}

/// Nested iteration: level `j` has `2^j` segments, starting from the shorter
/// of the seed resampled at that level and the previous level with every
/// segment halved, relaxed with move radius `max(spacing / 2, h)`. Stops at
/// the first level with spacing at most `h`.
fn relax_multilevel(
    seg: &mut SegmentIntegrator<'_>,
    seed: &[Vec2],
    h: f64,
    opts: &DistanceOptions,
) -> (f64, Vec<Vec2>, usize) {
    // u is affine on triangles; its kinks run along a, b and a + b
    let lat = *seg.u.lattice();
    let dirs = [lat.a(), lat.b(), lat.a() + lat.b()].map(|d| d * (1.0 / d.norm()));
    let total: f64 = seed.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let lengths = |seg: &mut SegmentIntegrator<'_>, v: &[Vec2]| -> Vec<f64> {
        v.windows(2).map(|w| seg.length(w[0], w[1])).collect()
    };
    let mut current: Option<(Vec<Vec2>, Vec<f64>)> = None;
    let mut sweeps = 0;
    let mut m = 1;
    loop {
        m *= 2;
        let spacing = total / m as f64;
        let last = spacing <= h || m >= MAX_SEGMENTS;
        let resampled = resample(seed, m);
        let resampled_lens = lengths(seg, &resampled);
        let (mut verts, mut lens) = match current.take() {
            Some((v, l)) => {
                let mut finer = Vec::with_capacity(2 * v.len());
                let mut finer_lens = Vec::with_capacity(2 * l.len());
                for w in v.windows(2) {
                    let mid = w[0].lerp(w[1], 0.5);
                    finer.extend([w[0], mid]);
                    finer_lens.extend([seg.length(w[0], mid), seg.length(mid, w[1])]);
                }
                finer.push(*v.last().expect("non-empty"));
                if finer_lens.iter().sum::<f64>() <= resampled_lens.iter().sum::<f64>() {
                    (finer, finer_lens)
                } else {
                    (resampled, resampled_lens)
                }
            }
            None => (resampled, resampled_lens),
        };
        let radius = (0.5 * spacing).max(h);
        let max_sweeps = if last { opts.refine_iters } else { COARSE_SWEEPS };
        // coarse levels only bend the path; the kink directions matter once
        // the spacing is down to the mesh scale
        let level_dirs: &[Vec2] = if last { &dirs } else { &[] };
        sweeps += relax(seg, &mut verts, &mut lens, level_dirs, radius, max_sweeps, opts.quad_tol);
        if last {
            return (lens.iter().sum(), verts, sweeps);
        }
        current = Some((verts, lens));
    }
}

/// Cyclic descent: each interior vertex is moved by a line search within
/// `radius` along each of `dirs` and along the local normal of the path,
/// accepted only if it shortens the two adjacent segments. Returns the number of sweeps run.
fn relax(
    seg: &mut SegmentIntegrator<'_>,
    verts: &mut [Vec2],
    lens: &mut [f64],
    dirs: &[Vec2],
    radius: f64,
    max_sweeps: usize,
    rel_tol: f64,
) -> usize {
    let mut total: f64 = lens.iter().sum();
    let mut sweeps = 0;
    for _ in 0..max_sweeps {
        sweeps += 1;
        let before = total;
        for k in 1..verts.len().saturating_sub(1) {
            let (prev, next) = (verts[k - 1], verts[k + 1]);
            let chord = next - prev;
            let normal = Vec2::new(-chord.y(), chord.x()) * (1.0 / chord.norm().max(f64::MIN_POSITIVE));
            for &dir in dirs.iter().chain(std::iter::once(&normal)) {
                let base = verts[k];
                let current = lens[k - 1] + lens[k];
                let mut eval = |t: f64| -> (f64, f64, f64) {
                    let p = base + dir * t;
                    let a = seg.length(prev, p);
                    let b = seg.length(p, next);
                    (a + b, a, b)
                };
                let (t, (cand, a, b)) = line_search(&mut eval, current, radius);
                if cand < current {
                    verts[k] = base + dir * t;
                    lens[k - 1] = a;
                    lens[k] = b;
                }
            }
        }
        total = lens.iter().sum();
        if before - total <= rel_tol * total {
            break;
        }
    }
    sweeps
}
