//! Polyhedral CBB(-1) metrics on the torus.
//!
//! A [`TorusTriangulation`] carries combinatorics and edge lengths; replacing
//! each face by the hyperbolic triangle with the same side lengths gives a
//! [`ConeMetric`]: constant curvature -1 away from the vertices, with cone
//! curvature `k_v = 2 pi - (total angle at v)` at each vertex. For a torus,
//! Gauss-Bonnet reads `area = sum k_v`, and the metric is CBB(-1) iff every
//! `k_v` is non-negative.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{intrinsic_distance, DistanceOptions};
use crate::horoconvex::PeriodicFunction;
use crate::lattice::Lattice;
use crate::planar::Vec2;
use crate::quotient::{MatrixMeta, MetricValidation, TorusDistanceMatrix};

/// Curvatures at most this far from zero count as zero.
pub const ZERO_CURVATURE_TOL: f64 = 1e-12;
/// Lenient CBB test: curvatures down to `-LENIENT_CBB_TOL` are accepted.
pub const LENIENT_CBB_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub ends: [usize; 2],
    pub length: f64,
}

/// A face with its vertices and edges; `edges[k]` joins `vertices[k]` and
/// `vertices[(k + 1) % 3]`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub vertices: [usize; 3],
    pub edges: [usize; 3],
}

/// Planar positions of the vertices, when the triangulation comes from a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub lattice: Lattice,
    pub positions: Vec<Vec2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusTriangulation {
    vertex_count: usize,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    embedding: Option<Embedding>,
}

impl TorusTriangulation {
    /// Validates genus-1 combinatorics and strict triangle inequalities.
    pub fn new(vertex_count: usize, edges: Vec<Edge>, faces: Vec<Face>) -> Result<Self> {
        let (v, e, f) = (vertex_count as i64, edges.len() as i64, faces.len() as i64);
        if v == 0 || f == 0 {
            return Err(Error::Input("empty triangulation".into()));
        }
        if v - e + f != 0 || 2 * e != 3 * f {
            return Err(Error::Input(format!(
                "not a torus triangulation: V - E + F = {} and 2E - 3F = {}",
                v - e + f,
                2 * e - 3 * f
            )));
        }
        for (k, edge) in edges.iter().enumerate() {
            if edge.ends.iter().any(|&x| x >= vertex_count) {
                return Err(Error::Input(format!("edge {k} references a missing vertex")));
            }
            if !(edge.length > 0.0 && edge.length.is_finite()) {
                return Err(Error::Input(format!("edge {k} has non-positive length {}", edge.length)));
            }
        }
        let mut uses = vec![0usize; edges.len()];
        for (fi, face) in faces.iter().enumerate() {
            for s in 0..3 {
                let e = *edges.get(face.edges[s]).ok_or_else(|| {
                    Error::Input(format!("face {fi} references a missing edge"))
                })?;
                uses[face.edges[s]] += 1;
                let (a, b) = (face.vertices[s], face.vertices[(s + 1) % 3]);
                if !(e.ends == [a, b] || e.ends == [b, a]) {
                    return Err(Error::Input(format!(
                        "face {fi}: edge {} does not join vertices {a} and {b}",
                        face.edges[s]
                    )));
                }
            }
        }
        if let Some(k) = uses.iter().position(|&n| n != 2) {
            return Err(Error::Input(format!(
                "edge {k} bounds {} faces instead of 2",
                uses[k]
            )));
        }
        let t = TorusTriangulation { vertex_count, edges, faces, embedding: None };
        for fi in 0..t.faces.len() {
            let [a, b, c] = t.face_lengths(fi);
            check_triangle(a, b, c).map_err(|detail| Error::DegenerateTriangle { face: Some(fi), detail })?;
        }
        Ok(t)
    }

    /// Builds edges from vertex pairs; only valid when no two edges share
    /// both end points.
    pub fn from_vertex_pairs(
        vertex_count: usize,
        faces: &[[usize; 3]],
        lengths: &BTreeMap<(usize, usize), f64>,
    ) -> Result<Self> {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut out = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for s in 0..3 {
                let (a, b) = (f[s], f[(s + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = match ids.get(&key) {
                    Some(&id) => id,
                    None => {
                        let length = *lengths.get(&key).ok_or_else(|| {
                            Error::Input(format!("face {fi}: no length for edge {}-{}", key.0, key.1))
                        })?;
                        edges.push(Edge { ends: [key.0, key.1], length });
                        ids.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                fe[s] = id;
            }
            out.push(Face { vertices: *f, edges: fe });
        }
        TorusTriangulation::new(vertex_count, edges, out)
    }

    /// The `k x k` grid torus: vertex `(i, j)` has index `i * k + j`, and each
    /// square is cut along the diagonal from `(i, j)` to `(i + 1, j + 1)`.
    /// `length(kind, i, j)` gives the length of the edge of `kind` (0 along
    /// `a`, 1 along `b`, 2 diagonal) starting at `(i, j)`.
    pub fn grid(k: usize, mut length: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("grid size must be positive".into()));
        }
        let vid = |i: usize, j: usize| (i % k) * k + (j % k);
        let eid = |kind: usize, i: usize, j: usize| 3 * vid(i, j) + kind;
        let mut edges = Vec::with_capacity(3 * k * k);
        for i in 0..k {
            for j in 0..k {
                edges.push(Edge { ends: [vid(i, j), vid(i + 1, j)], length: length(0, i, j) });
                edges.push(Edge { ends: [vid(i, j), vid(i, j + 1)], length: length(1, i, j) });
                edges.push(Edge { ends: [vid(i, j), vid(i + 1, j + 1)], length: length(2, i, j) });
            }
        }
        let mut faces = Vec::with_capacity(2 * k * k);
        for i in 0..k {
            for j in 0..k {
                faces.push(Face {
                    vertices: [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)],
                    edges: [eid(0, i, j), eid(1, i + 1, j), eid(2, i, j)],
                });
                faces.push(Face {
                    vertices: [vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)],
                    edges: [eid(2, i, j), eid(0, i, j + 1), eid(1, i, j)],
                });
            }
        }
        TorusTriangulation::new(k * k, edges, faces)
    }

    /// The one-vertex torus: two triangles glued along three edges.
    pub fn one_vertex(lengths: [f64; 3]) -> Result<Self> {
        TorusTriangulation::grid(1, |kind, _, _| lengths[kind])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Result<Self> {
        if embedding.positions.len() != self.vertex_count {
            return Err(Error::Input("embedding needs one position per vertex".into()));
        }
        self.embedding = Some(embedding);
        Ok(self)
    }

    /// Copy with new edge lengths (same combinatorics).
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::Input("one length per edge required".into()));
        }
        let edges = self
            .edges
            .iter()
            .zip(lengths)
            .map(|(e, &l)| Edge { ends: e.ends, length: l })
            .collect();
        let mut t = TorusTriangulation::new(self.vertex_count, edges, self.faces.clone())?;
        t.embedding = self.embedding.clone();
        Ok(t)
    }

    /// Lengths of the sides opposite each vertex slot of face `fi`.
    pub fn face_lengths(&self, fi: usize) -> [f64; 3] {
        let f = &self.faces[fi];
        // side opposite slot s joins slots s+1 and s+2, i.e. edges[(s + 1) % 3]
        [
            self.edges[f.edges[1]].length,
            self.edges[f.edges[2]].length,
            self.edges[f.edges[0]].length,
        ]
    }

    /// True when no two edges join the same pair of vertices.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.edges.iter().all(|e| {
            let (a, b) = (e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1]));
            a != b && seen.insert((a, b))
        })
    }
}

/// On-disk form. Simple triangulations use `lengths` keyed by `"i-j"`;
/// multigraphs (a vertex pair joined by several edges) use `face_edges`
/// (edge ids per face, in the order `i-j, j-k, k-i`) with `edge_lengths`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationFile {
    pub vertices: usize,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_edges: Option<Vec<[usize; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Embedding>,
}

impl TryFrom<TriangulationFile> for TorusTriangulation {
    type Error = Error;
    fn try_from(file: TriangulationFile) -> Result<Self> {
        let t = match (&file.lengths, &file.face_edges, &file.edge_lengths) {
            (Some(map), None, None) => {
                let mut lengths = BTreeMap::new();
                for (key, &l) in map {
                    let (a, b) = key
                        .split_once('-')
                        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                        .ok_or_else(|| Error::Input(format!("bad edge key '{key}', expected \"i-j\"")))?;
                    lengths.insert((a.min(b), a.max(b)), l);
                }
                TorusTriangulation::from_vertex_pairs(file.vertices, &file.faces, &lengths)?
            }
            (None, Some(fe), Some(el)) => {
                if fe.len() != file.faces.len() {
                    return Err(Error::Input("face_edges needs one entry per face".into()));
                }
                let mut ends: Vec<Option<[usize; 2]>> = vec![None; el.len()];
                for (f, ids) in file.faces.iter().zip(fe) {
                    for s in 0..3 {
                        let slot = ends
                            .get_mut(ids[s])
                            .ok_or_else(|| Error::Input(format!("edge id {} out of range", ids[s])))?;
                        slot.get_or_insert([f[s], f[(s + 1) % 3]]);
                    }
                }
                let edges = ends
                    .iter()
                    .zip(el)
                    .enumerate()
                    .map(|(k, (e, &l))| {
                        e.map(|ends| Edge { ends, length: l })
                            .ok_or_else(|| Error::Input(format!("edge {k} is not used by any face")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let faces = file
                    .faces
                    .iter()
                    .zip(fe)
                    .map(|(v, e)| Face { vertices: *v, edges: *e })
                    .collect();
                TorusTriangulation::new(file.vertices, edges, faces)?
            }
            _ => {
                return Err(Error::Input(
                    "give either 'lengths' or both 'face_edges' and 'edge_lengths'".into(),
                ))
            }
        };
        match file.embedding {
            Some(e) => t.with_embedding(e),
            None => Ok(t),
        }
    }
}

impl From<&TorusTriangulation> for TriangulationFile {
    fn from(t: &TorusTriangulation) -> Self {
        let faces = t.faces.iter().map(|f| f.vertices).collect();
        let embedding = t.embedding.clone();
        if t.is_simple() {
            let lengths = t
                .edges
                .iter()
                .map(|e| {
                    let (a, b) = (e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1]));
                    (format!("{a}-{b}"), e.length)
                })
                .collect();
            TriangulationFile { vertices: t.vertex_count, faces, lengths: Some(lengths), face_edges: None, edge_lengths: None, embedding }
        } else {
            TriangulationFile {
                vertices: t.vertex_count,
                faces,
                lengths: None,
                face_edges: Some(t.faces.iter().map(|f| f.edges).collect()),
                edge_lengths: Some(t.edges.iter().map(|e| e.length).collect()),
                embedding,
            }
        }
    }
}

impl Serialize for TorusTriangulation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TriangulationFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusTriangulation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TriangulationFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

fn check_triangle(l1: f64, l2: f64, l3: f64) -> std::result::Result<(), String> {
    let named = [(l1, l2, l3, "l1 < l2 + l3"), (l2, l3, l1, "l2 < l3 + l1"), (l3, l1, l2, "l3 < l1 + l2")];
    for (a, b, c, what) in named {
        if !(a > 0.0) || !(a < b + c) {
            return Err(format!("violates {what} with lengths ({l1}, {l2}, {l3})"));
        }
    }
    Ok(())
}

/// Angles of the hyperbolic triangle with side lengths `l1, l2, l3`; the
/// angle at index `i` is opposite side `l_i`.
///
/// Uses the half-angle form
/// `tan(alpha/2)^2 = sinh(s - l2) sinh(s - l3) / (sinh s sinh(s - l1))`,
/// which stays accurate in the Euclidean limit of tiny triangles.
pub fn triangle_angles(l1: f64, l2: f64, l3: f64) -> Result<[f64; 3]> {
    check_triangle(l1, l2, l3).map_err(|detail| Error::DegenerateTriangle { face: None, detail })?;
    let s = 0.5 * (l1 + l2 + l3);
    let sh = [s - l1, s - l2, s - l3].map(f64::sinh);
    let shs = s.sinh();
    let angle = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        2.0 * (sh[j] * sh[k]).sqrt().atan2((shs * sh[i]).sqrt())
    };
    Ok([angle(0), angle(1), angle(2)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeMetric {
    pub triangulation: TorusTriangulation,
    /// Angle at each vertex slot of each face.
    pub corner_angles: Vec<[f64; 3]>,
    /// `2 pi -` total angle, per vertex.
    pub curvatures: Vec<f64>,
    /// `pi -` angle sum, per face.
    pub face_areas: Vec<f64>,
    pub area: f64,
    /// `|sum k_v - area|`.
    pub gauss_bonnet_slack: f64,
}

impl ConeMetric {
    pub fn total_curvature(&self) -> f64 {
        self.curvatures.iter().sum()
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.curvatures.iter().map(|k| k.abs()).fold(0.0, f64::max)
    }

    /// `|sum k_v - area| <= 1e-9 (1 + area)`.
    pub fn satisfies_gauss_bonnet(&self) -> bool {
        self.gauss_bonnet_slack <= 1e-9 * (1.0 + self.area)
    }
}

/// Replaces every face by its hyperbolic comparison triangle.
pub fn cone_metric(t: &TorusTriangulation) -> Result<ConeMetric> {
    let corner_angles: Vec<[f64; 3]> = (0..t.faces.len())
        .map(|fi| {
            let [a, b, c] = t.face_lengths(fi);
            triangle_angles(a, b, c).map_err(|e| match e {
                Error::DegenerateTriangle { detail, .. } => Error::DegenerateTriangle { face: Some(fi), detail },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let mut angle_sums = vec![0.0; t.vertex_count];
    let mut face_areas = Vec::with_capacity(t.faces.len());
    for (f, angles) in t.faces.iter().zip(&corner_angles) {
        for s in 0..3 {
            angle_sums[f.vertices[s]] += angles[s];
        }
        let area = PI - angles.iter().sum::<f64>();
        face_areas.push(area);
    }
    if let Some(fi) = face_areas.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::DegenerateTriangle {
            face: Some(fi),
            detail: format!("non-positive area {}", face_areas[fi]),
        });
    }
    let curvatures: Vec<f64> = angle_sums.iter().map(|s| 2.0 * PI - s).collect();
    let area: f64 = face_areas.iter().sum();
    let slack = (curvatures.iter().sum::<f64>() - area).abs();
    Ok(ConeMetric {
        triangulation: t.clone(),
        corner_angles,
        curvatures,
        face_areas,
        area,
        gauss_bonnet_slack: slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbbReport {
    pub is_cbb: bool,
    pub strict: bool,
    /// Offending vertices with their curvature.
    pub offending: Vec<(usize, f64)>,
}

/// Non-negative cone curvature at every vertex.
///
/// Strict mode demands `k_v > 1e-12` everywhere (every vertex a genuine cone
/// point); lenient mode accepts `k_v >= -1e-9`.
pub fn is_cbb(c: &ConeMetric, strict: bool) -> CbbReport {
    let offending: Vec<(usize, f64)> = c
        .curvatures
        .iter()
        .enumerate()
        .filter(|&(_, &k)| if strict { k <= ZERO_CURVATURE_TOL } else { k < -LENIENT_CBB_TOL })
        .map(|(v, &k)| (v, k))
        .collect();
    CbbReport { is_cbb: offending.is_empty(), strict, offending }
}

/// Grid triangulation of the torus with each edge measured as `d_u` along its
/// own homotopy class: from `p(i, j)` to `p(i, j)` plus the edge's lattice
/// displacement, not the quotient minimum.
pub fn comparison_replace(
    u: &PeriodicFunction,
    k: usize,
    opts: &DistanceOptions,
) -> Result<TorusTriangulation> {
    if k == 0 {
        return Err(Error::Input("sample grid must be at least 1 x 1".into()));
    }
    let lat = *u.lattice();
    let kf = k as f64;
    let pos = |i: usize, j: usize| lat.point(i as f64 / kf, j as f64 / kf);
    let disp = [lat.a() * (1.0 / kf), lat.b() * (1.0 / kf), (lat.a() + lat.b()) * (1.0 / kf)];
    let jobs: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|i| (0..k).flat_map(move |j| (0..3).map(move |kind| (i, j, kind))))
        .collect();
    let lengths: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j, kind)| {
            let p = pos(i, j);
            intrinsic_distance(u, p, p + disp[kind], opts).map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    let t = TorusTriangulation::grid(k, |kind, i, j| lengths[3 * (i * k + j) + kind]).map_err(|e| match e {
        Error::DegenerateTriangle { face, detail } => Error::DegenerateTriangle {
            face,
            detail: format!("{detail}; measured lengths are too coarse, try a larger k or a finer grid_step"),
        },
        other => other,
    })?;
    let positions = (0..k).flat_map(|i| (0..k).map(move |j| pos(i, j))).collect();
    t.with_embedding(Embedding { lattice: lat, positions })
}

/// Hyperbolic law of cosines: third side opposite angle `theta`.
fn opposite_side(a: f64, b: f64, theta: f64) -> f64 {
    let c = a.cosh() * b.cosh() - a.sinh() * b.sinh() * theta.cos();
    c.max(1.0).acosh()
}

/// Approximate intrinsic distances between the vertices of a cone metric.
///
/// Dijkstra on the graph of vertices and edge midpoints; two nodes are joined
/// when they lie on the boundary of a common face, with the exact hyperbolic
/// distance inside that face.
pub fn cone_vertex_distances(c: &ConeMetric) -> Vec<Vec<f64>> {
    let t = &c.triangulation;
    let nv = t.vertex_count;
    let n = nv + t.edges.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut link = |a: usize, b: usize, w: f64| {
        adj[a].push((b, w));
        adj[b].push((a, w));
    };
    for (ei, e) in t.edges.iter().enumerate() {
        link(e.ends[0], nv + ei, 0.5 * e.length);
        link(e.ends[1], nv + ei, 0.5 * e.length);
    }
    for (f, angles) in t.faces.iter().zip(&c.corner_angles) {
        for s in 0..3 {
            // corner at slot s lies between edges[s] (to s+1) and edges[s+2] (to s+2)
            let (e_out, e_in) = (f.edges[s], f.edges[(s + 2) % 3]);
            let (lo, li) = (t.edges[e_out].length, t.edges[e_in].length);
            link(nv + e_out, nv + e_in, opposite_side(0.5 * lo, 0.5 * li, angles[s]));
            // vertex s to the midpoint of the opposite edge, through corner s+1
            let opp = f.edges[(s + 1) % 3];
            let l_opp = t.edges[opp].length;
            link(f.vertices[s], nv + opp, opposite_side(lo, 0.5 * l_opp, angles[(s + 1) % 3]));
        }
    }
    (0..nv)
        .map(|src| {
            let mut dist = vec![f64::INFINITY; n];
            let mut heap = BinaryHeap::new();
            dist[src] = 0.0;
            heap.push(Reverse((OrdF64(0.0), src)));
            while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &(w, len) in &adj[v] {
                    let nd = d + len;
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(Reverse((OrdF64(nd), w)));
                    }
                }
            }
            dist.truncate(nv);
            dist
        })
        .collect()
}

#[derive(Copy, Clone, PartialEq, PartialOrd)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Vertex distance matrix of an embedded cone metric, as a torus matrix.
pub fn cone_distance_matrix(c: &ConeMetric) -> Result<TorusDistanceMatrix> {
    let emb = c
        .triangulation
        .embedding()
        .ok_or_else(|| Error::Input("cone metric has no planar embedding".into()))?;
    let values = cone_vertex_distances(c);
    let ok = MetricValidation {
        symmetric: true,
        zero_diagonal: true,
        nonnegative: true,
        max_triangle_excess: 0.0,
        triangle_violations: 0,
    };
    let mut m = TorusDistanceMatrix {
        lattice: emb.lattice,
        points: emb.positions.clone(),
        values,
        meta: MatrixMeta {
            grid_step: 0.0,
            quad_tol: 0.0,
            refine_iters: 0,
            raw_validation: ok.clone(),
            closure_tightened: 0,
            max_tightening: 0.0,
            validation: ok,
            note: "graph distances on the midpoint-subdivided triangulation; approximate".into(),
        },
    };
    // Dijkstra sums in different orders; symmetrize
    let n = m.len();
    for i in 0..n {
        for j in i + 1..n {
            let v = m.values[i][j].min(m.values[j][i]);
            m.values[i][j] = v;
            m.values[j][i] = v;
        }
    }
    m.meta.validation = m.validate(|d| 1e-12 * (1.0 + d));
    m.meta.raw_validation = m.meta.validation.clone();
    Ok(m)
}
