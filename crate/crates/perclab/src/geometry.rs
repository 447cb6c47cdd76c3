//! Compact subsets of R^d used by the harness: finite point clouds and
//! polygonal sets (finite unions of segments meeting only at endpoints),
//! with the Euclidean Hausdorff metric between them.
//!
//! A polygonal set with no segments denotes the degenerate set {origin}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positional tolerance for endpoint coincidence and validity checks.
const GEOM_EPS: f64 = 1e-9;
/// Refinement tolerance for segment-to-polygonal-set suprema.
const SUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        Segment { a, b }
    }

    pub fn length2(&self) -> f64 {
        dist2(&self.a, &self.b)
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(&x, &y)| x + t * (y - x)).collect()
    }
}

/// A finite nonempty set of points in R^d, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || coords.is_empty() || coords.len() % d != 0 {
            return Err(Error::EmptySet);
        }
        Ok(PointCloud { d, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().ok_or(Error::EmptySet)?.len();
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(d, coords)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }
}

/// Finitely many closed segments intersecting one another only at
/// endpoints, as a connected set. No segments means {origin}.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalSet {
    d: usize,
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct OmegaSetFile {
    version: String,
    dimension: usize,
    segments: Vec<[Vec<f64>; 2]>,
}

pub const OMEGA_SET_VERSION: &str = "omega-set/1";

impl PolygonalSet {
    /// The degenerate set {origin} in R^d.
    pub fn origin_point(d: usize) -> Self {
        PolygonalSet { d, segments: Vec::new() }
    }

    /// Validates: consistent dimension, no zero-length segments, pairwise
    /// interior-disjointness, connectivity.
    pub fn new(d: usize, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Ok(PolygonalSet { d, segments });
        }
        for s in &segments {
            if s.a.len() != d || s.b.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.a.len().max(s.b.len()) });
            }
            if s.length2().sqrt() <= GEOM_EPS {
                return Err(Error::InvalidPolygonalSet(format!(
                    "zero-length segment at {:?}",
                    s.a
                )));
            }
        }
        for i in 0..segments.len() {
            for j in (i + 1)..segments.len() {
                if !interiors_disjoint(&segments[i], &segments[j]) {
                    return Err(Error::InvalidPolygonalSet(format!(
                        "segments {i} and {j} intersect away from shared endpoints"
                    )));
                }
            }
        }
        if !segments_connected(&segments) {
            return Err(Error::InvalidPolygonalSet("segment union is disconnected".into()));
        }
        Ok(PolygonalSet { d, segments })
    }

    /// Skip validation. For internal metric computations on optimizer
    /// outputs, which may touch degenerately at tied optima.
    pub(crate) fn unchecked(d: usize, segments: Vec<Segment>) -> Self {
        PolygonalSet { d, segments }
    }

    /// Like `new`, and additionally requires origin membership
    /// (the set must be an element of Omega).
    pub fn omega(d: usize, segments: Vec<Segment>) -> Result<Self> {
        let set = PolygonalSet::new(d, segments)?;
        if !set.contains_origin() {
            return Err(Error::InvalidPolygonalSet("set does not contain the origin".into()));
        }
        Ok(set)
    }

    /// Single segment from the origin to `b`.
    pub fn segment_from_origin(b: Vec<f64>) -> Result<Self> {
        let d = b.len();
        PolygonalSet::omega(d, vec![Segment::new(vec![0.0; d], b)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_degenerate_point(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn contains_origin(&self) -> bool {
        let origin = vec![0.0; self.d];
        dist_point_poly(&origin, self) <= GEOM_EPS
    }

    /// Endpoints of all segments (with duplicates merged exactly).
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut push = |p: &[f64]| {
            if !out.iter().any(|q| q.as_slice() == p) {
                out.push(p.to_vec());
            }
        };
        if self.segments.is_empty() {
            push(&vec![0.0; self.d]);
        }
        for s in &self.segments {
            push(&s.a);
            push(&s.b);
        }
        out
    }

    /// Maximum Euclidean norm over the set.
    pub fn max_norm(&self) -> f64 {
        self.vertices()
            .iter()
            .map(|v| dot(v, v).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let file = OmegaSetFile {
            version: OMEGA_SET_VERSION.to_string(),
            dimension: self.d,
            segments: self
                .segments
                .iter()
                .map(|s| [s.a.clone(), s.b.clone()])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("omega-set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OmegaSetFile = serde_json::from_str(text)?;
        if file.version != OMEGA_SET_VERSION {
            return Err(Error::InvalidPolygonalSet(format!(
                "unsupported version {:?}",
                file.version
            )));
        }
        PolygonalSet::new(
            file.dimension,
            file.segments.into_iter().map(|[a, b]| Segment::new(a, b)).collect(),
        )
    }
}

/// Either kind of compact set, by reference. Clusters enter as the point
/// cloud of their vertices.
#[derive(Clone, Copy)]
pub enum MetricSet<'a> {
    Cloud(&'a PointCloud),
    Poly(&'a PolygonalSet),
}

impl<'a> From<&'a PointCloud> for MetricSet<'a> {
    fn from(c: &'a PointCloud) -> Self {
        MetricSet::Cloud(c)
    }
}

impl<'a> From<&'a PolygonalSet> for MetricSet<'a> {
    fn from(p: &'a PolygonalSet) -> Self {
        MetricSet::Poly(p)
    }
}

// ---- primitive distances -------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Distance from point `p` to the closed segment [a, b].
pub fn dist_point_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let len2 = dist2(a, b);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let mut t = 0.0;
    for i in 0..p.len() {
        t += (p[i] - a[i]) * (b[i] - a[i]);
    }
    t = (t / len2).clamp(0.0, 1.0);
    let q: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect();
    dist(p, &q)
}

pub fn dist_point_cloud(p: &[f64], cloud: &PointCloud) -> f64 {
    cloud.points().map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min).sqrt()
}

pub fn dist_point_poly(p: &[f64], poly: &PolygonalSet) -> f64 {
    if poly.segments.is_empty() {
        let origin = vec![0.0; poly.d];
        return dist(p, &origin);
    }
    poly.segments
        .iter()
        .map(|s| dist_point_segment(p, &s.a, &s.b))
        .fold(f64::INFINITY, f64::min)
}

pub fn dist_point_set(p: &[f64], set: MetricSet<'_>) -> f64 {
    match set {
        MetricSet::Cloud(c) => dist_point_cloud(p, c),
        MetricSet::Poly(s) => dist_point_poly(p, s),
    }
}

/// Is `q` in the open epsilon-neighborhood of `x`? Strict inequality.
pub fn epsilon_neighborhood_contains<'a>(x: impl Into<MetricSet<'a>>, eps: f64, q: &[f64]) -> bool {
    debug_assert!(eps > 0.0);
    dist_point_set(q, x.into()) < eps
}

/// sup over the segment [a, b] of the distance to a point cloud.
/// Exact: between consecutive nearest-point switches the distance is
/// convex, so the supremum is attained at a switch point or an endpoint.
/// Switch points solve |x(t)-v_i| = |x(t)-v_j|, linear in t.
fn sup_segment_to_cloud(a: &[f64], b: &[f64], cloud: &PointCloud) -> f64 {
    let u: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| y - x).collect();
    let mut ts = vec![0.0, 1.0];
    let k = cloud.len();
    for i in 0..k {
        for j in (i + 1)..k {
            let vi = cloud.point(i);
            let vj = cloud.point(j);
            let w: Vec<f64> = vi.iter().zip(vj).map(|(&x, &y)| y - x).collect();
            let uw = dot(&u, &w);
            if uw.abs() < 1e-300 {
                continue;
            }
            let t = (dot(vj, vj) - dot(vi, vi) - 2.0 * dot(a, &w)) / (2.0 * uw);
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    let mut best = 0.0f64;
    let mut x = vec![0.0; a.len()];
    for &t in &ts {
        for i in 0..a.len() {
            x[i] = a[i] + t * u[i];
        }
        let d = dist_point_cloud(&x, cloud);
        best = best.max(d);
    }
    best
}

/// sup over the segment [a, b] of the distance to a polygonal set,
/// by adaptive bisection. The distance to each target segment is convex
/// along [a, b], so max(endpoint values) bounds each piece from above;
/// the minimum of those bounds certifies the interval.
fn sup_segment_to_poly(a: &[f64], b: &[f64], poly: &PolygonalSet) -> f64 {
    if poly.segments.is_empty() {
        let origin = vec![0.0; poly.d];
        // distance to a single point is convex along the segment
        return dist(a, &origin).max(dist(b, &origin));
    }
    let eval_all = |t: f64, out: &mut Vec<f64>| {
        let x: Vec<f64> = a.iter().zip(b).map(|(&p, &q)| p + t * (q - p)).collect();
        out.clear();
        out.extend(poly.segments.iter().map(|s| dist_point_segment(&x, &s.a, &s.b)));
    };
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut g0 = Vec::new();
    let mut g1 = Vec::new();
    eval_all(0.0, &mut g0);
    eval_all(1.0, &mut g1);
    let mut best = min_of(&g0).max(min_of(&g1));
    let mut stack = vec![(0.0f64, 1.0f64, g0, g1)];
    let mut gm = Vec::new();
    while let Some((t0, t1, lo, hi)) = stack.pop() {
        let ub = lo
            .iter()
            .zip(&hi)
            .map(|(&x, &y)| x.max(y))
            .fold(f64::INFINITY, f64::min);
        if ub <= best + SUP_TOL {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        eval_all(tm, &mut gm);
        best = best.max(min_of(&gm));
        stack.push((t0, tm, lo, gm.clone()));
        stack.push((tm, t1, gm.clone(), hi));
    }
    best
}

fn directed_hausdorff(x: MetricSet<'_>, y: MetricSet<'_>) -> f64 {
    match x {
        MetricSet::Cloud(c) => c
            .points()
            .map(|p| dist_point_set(p, y))
            .fold(0.0, f64::max),
        MetricSet::Poly(s) => {
            if s.segments.is_empty() {
                let origin = vec![0.0; s.d];
                return dist_point_set(&origin, y);
            }
            s.segments
                .iter()
                .map(|seg| match y {
                    MetricSet::Cloud(c) => sup_segment_to_cloud(&seg.a, &seg.b, c),
                    MetricSet::Poly(t) => sup_segment_to_poly(&seg.a, &seg.b, t),
                })
                .fold(0.0, f64::max)
        }
    }
}

/// Hausdorff distance between two nonempty compact sets.
pub fn hausdorff_distance<'a>(
    x: impl Into<MetricSet<'a>>,
    y: impl Into<MetricSet<'a>>,
) -> f64 {
    let (x, y) = (x.into(), y.into());
    directed_hausdorff(x, y).max(directed_hausdorff(y, x))
}

// ---- polygonal set validity ----------------------------------------------

/// Closest pair of parameters between two segments (standard clamped
/// quadratic), returning (s, t, distance).
fn segment_closest(p: &Segment, q: &Segment) -> (f64, f64, f64) {
    let d1: Vec<f64> = p.b.iter().zip(&p.a).map(|(&x, &y)| x - y).collect();
    let d2: Vec<f64> = q.b.iter().zip(&q.a).map(|(&x, &y)| x - y).collect();
    let r: Vec<f64> = p.a.iter().zip(&q.a).map(|(&x, &y)| x - y).collect();
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let c = dot(&d1, &r);
    let b = dot(&d1, &d2);
    let denom = a * e - b * b;
    let mut s = if denom.abs() > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if e > 1e-300 { (b * s + f) / e } else { 0.0 };
    if t < 0.0 {
        t = 0.0;
        s = if a > 1e-300 { (-c / a).clamp(0.0, 1.0) } else { 0.0 };
    } else if t > 1.0 {
        t = 1.0;
        s = if a > 1e-300 { ((b - c) / a).clamp(0.0, 1.0) } else { 0.0 };
    }
    let ps = p.point_at(s);
    let qt = q.point_at(t);
    (s, t, dist(&ps, &qt))
}

fn interiors_disjoint(p: &Segment, q: &Segment) -> bool {
    let (s, t, d) = segment_closest(p, q);
    if d > GEOM_EPS {
        return true;
    }
    // Collinear overlap of positive length?
    let contacts = [
        dist(&p.a, &q.a) <= GEOM_EPS || dist(&p.a, &q.b) <= GEOM_EPS,
        dist(&p.b, &q.a) <= GEOM_EPS || dist(&p.b, &q.b) <= GEOM_EPS,
    ];
    let pa_on_q = dist_point_segment(&p.a, &q.a, &q.b) <= GEOM_EPS;
    let pb_on_q = dist_point_segment(&p.b, &q.a, &q.b) <= GEOM_EPS;
    let qa_on_p = dist_point_segment(&q.a, &p.a, &p.b) <= GEOM_EPS;
    let qb_on_p = dist_point_segment(&q.b, &p.a, &p.b) <= GEOM_EPS;
    let on_counts = [pa_on_q, pb_on_q, qa_on_p, qb_on_p].iter().filter(|&&x| x).count();
    if on_counts > 2 || (contacts[0] && contacts[1]) {
        // more contact than a single shared endpoint
        return false;
    }
    // single point contact: must be an endpoint of both
    let contact = p.point_at(s);
    let _ = t;
    let endpoint_of_p = dist(&contact, &p.a) <= GEOM_EPS || dist(&contact, &p.b) <= GEOM_EPS;
    let endpoint_of_q = dist(&contact, &q.a) <= GEOM_EPS || dist(&contact, &q.b) <= GEOM_EPS;
    endpoint_of_p && endpoint_of_q
}

fn segments_connected(segments: &[Segment]) -> bool {
    let n = segments.len();
    if n <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (si, sj) = (&segments[i], &segments[j]);
            let touching = dist(&si.a, &sj.a) <= GEOM_EPS
                || dist(&si.a, &sj.b) <= GEOM_EPS
                || dist(&si.b, &sj.a) <= GEOM_EPS
                || dist(&si.b, &sj.b) <= GEOM_EPS;
            if touching {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == root)
}

// ---- simplification --------------------------------------------------------

/// Coarsen a connected origin-containing polygonal set: merge near-collinear
/// chains while keeping the Hausdorff distance to the input at most `tol`
/// and never increasing total length (under any norm). The origin stays a
/// segment endpoint.
pub fn simplify(s: &PolygonalSet, tol: f64) -> Result<PolygonalSet> {
    if !s.contains_origin() {
        return Err(Error::InvalidPolygonalSet("simplify requires an origin-containing set".into()));
    }
    if s.segments.is_empty() {
        return Ok(s.clone());
    }
    let d = s.d;
    let origin = vec![0.0; d];

    // vertex table with exact-coincidence merging
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let vid = |p: &[f64], verts: &mut Vec<Vec<f64>>| -> usize {
        if let Some(i) = verts.iter().position(|q| dist(q, p) <= GEOM_EPS) {
            i
        } else {
            verts.push(p.to_vec());
            verts.len() - 1
        }
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for seg in &s.segments {
        // split at the origin if it sits in a segment interior
        let on_this = dist_point_segment(&origin, &seg.a, &seg.b) <= GEOM_EPS;
        let at_end = dist(&origin, &seg.a) <= GEOM_EPS || dist(&origin, &seg.b) <= GEOM_EPS;
        if on_this && !at_end {
            let ia = vid(&seg.a, &mut verts);
            let io = vid(&origin, &mut verts);
            let ib = vid(&seg.b, &mut verts);
            edges.push((ia, io));
            edges.push((io, ib));
        } else {
            let ia = vid(&seg.a, &mut verts);
            let ib = vid(&seg.b, &mut verts);
            edges.push((ia, ib));
        }
    }
    let nv = verts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let origin_id = verts
        .iter()
        .position(|v| dist(v, &origin) <= GEOM_EPS)
        .expect("origin is a vertex after splitting");

    let mut essential = vec![false; nv];
    for v in 0..nv {
        if adj[v].len() != 2 {
            essential[v] = true;
        }
    }
    essential[origin_id] = true;

    // walk maximal chains between essential vertices
    let mut visited_edge = std::collections::HashSet::new();
    let edge_id = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut out_segments: Vec<Segment> = Vec::new();
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for start in 0..nv {
        if !essential[start] {
            continue;
        }
        for &next in &adj[start] {
            if visited_edge.contains(&edge_id(start, next)) {
                continue;
            }
            let mut chain = vec![start];
            let mut prev = start;
            let mut cur = next;
            visited_edge.insert(edge_id(prev, cur));
            loop {
                chain.push(cur);
                if essential[cur] {
                    break;
                }
                let nxt = *adj[cur].iter().find(|&&w| w != prev).expect("degree-2 chain");
                visited_edge.insert(edge_id(cur, nxt));
                prev = cur;
                cur = nxt;
            }
            chains.push(chain);
        }
    }
    // pure cycles of degree-2 vertices (no essential vertex on them)
    for &(a, b) in &edges {
        if !visited_edge.contains(&edge_id(a, b)) {
            let mut chain = vec![a];
            let mut prev = a;
            let mut cur = b;
            visited_edge.insert(edge_id(prev, cur));
            while cur != a {
                chain.push(cur);
                let nxt = *adj[cur].iter().find(|&&w| w != prev).expect("cycle walk");
                visited_edge.insert(edge_id(cur, nxt));
                prev = cur;
                cur = nxt;
            }
            chain.push(a);
            // keep the two extreme vertices so the loop stays a loop
            let far = (1..chain.len() - 1)
                .max_by(|&i, &j| {
                    let di = dist(&verts[chain[i]], &verts[a]);
                    let dj = dist(&verts[chain[j]], &verts[a]);
                    di.partial_cmp(&dj).unwrap()
                })
                .unwrap();
            chains.push(chain[..=far].to_vec());
            chains.push(chain[far..].to_vec());
        }
    }

    for chain in &chains {
        let pts: Vec<&[f64]> = chain.iter().map(|&i| verts[i].as_slice()).collect();
        let keep = douglas_peucker(&pts, tol);
        for w in keep.windows(2) {
            let (a, b) = (pts[w[0]], pts[w[1]]);
            if dist(a, b) > GEOM_EPS {
                out_segments.push(Segment::new(a.to_vec(), b.to_vec()));
            }
        }
    }
    PolygonalSet::omega(d, out_segments)
}

/// Indices of retained points; both endpoints always kept. Deterministic
/// (first max-deviation vertex splits).
fn douglas_peucker(pts: &[&[f64]], tol: f64) -> Vec<usize> {
    let mut keep = vec![0, pts.len() - 1];
    let mut stack = vec![(0usize, pts.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let mut max_dev = 0.0;
        let mut arg = lo + 1;
        for i in (lo + 1)..hi {
            let dev = dist_point_segment(pts[i], pts[lo], pts[hi]);
            if dev > max_dev {
                max_dev = dev;
                arg = i;
            }
        }
        if max_dev > tol {
            keep.push(arg);
            stack.push((lo, arg));
            stack.push((arg, hi));
        }
    }
    keep.sort_unstable();
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(pts: &[&[f64]]) -> PointCloud {
        PointCloud::from_points(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_and_single_pair() {
        let a = cloud(&[&[0.0, 0.0]]);
        let b = cloud(&[&[3.0, 4.0]]);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        assert!((hausdorff_distance(&a, &b) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn segment_vs_its_endpoints() {
        let seg = PolygonalSet::omega(
            2,
            vec![Segment::new(vec![0.0, 0.0], vec![1.0, 0.0])],
        )
        .unwrap();
        let ends = cloud(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let d = hausdorff_distance(&seg, &ends);
        assert!((d - 0.5).abs() < 1e-9, "midpoint realizes the max, got {d}");
    }

    #[test]
    fn epsilon_neighborhood_is_strict() {
        let x = cloud(&[&[0.0, 0.0]]);
        assert!(epsilon_neighborhood_contains(&x, 1.0, &[0.999, 0.0]));
        assert!(!epsilon_neighborhood_contains(&x, 1.0, &[1.0, 0.0]));
        let seg = PolygonalSet::new(2, vec![Segment::new(vec![0.0, 0.0], vec![2.0, 0.0])]).unwrap();
        assert!(epsilon_neighborhood_contains(&seg, 0.5, &[1.0, 0.4]));
    }

    #[test]
    fn poly_poly_distance() {
        let a = PolygonalSet::new(2, vec![Segment::new(vec![0.0, 0.0], vec![1.0, 0.0])]).unwrap();
        let b = PolygonalSet::new(2, vec![Segment::new(vec![0.0, 0.3], vec![1.0, 0.3])]).unwrap();
        let d = hausdorff_distance(&a, &b);
        assert!((d - 0.3).abs() < 1e-8, "parallel segments, got {d}");
        // L against its horizontal arm: farthest point is the top of the vertical arm
        let ell = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let arm = PolygonalSet::new(2, vec![Segment::new(vec![0.0, 0.0], vec![1.0, 0.0])]).unwrap();
        let d = hausdorff_distance(&ell, &arm);
        assert!((d - 1.0).abs() < 1e-8, "got {d}");
    }

    #[test]
    fn degenerate_origin_set() {
        let pt = PolygonalSet::origin_point(2);
        assert!(pt.contains_origin());
        let c = cloud(&[&[0.0, 1.0]]);
        assert!((hausdorff_distance(&pt, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_interior_crossings() {
        // X crossing
        let r = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![-1.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![0.0, -1.0], vec![0.0, 1.0]),
            ],
        );
        assert!(r.is_err());
        // T junction
        let r = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![-1.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![0.0, 0.0], vec![0.0, 1.0]),
            ],
        );
        assert!(r.is_err());
        // collinear overlap
        let r = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![2.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![3.0, 0.0]),
            ],
        );
        assert!(r.is_err());
        // shared endpoint is fine
        let r = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            ],
        );
        assert!(r.is_ok());
    }

    #[test]
    fn validation_rejects_disconnected() {
        let r = PolygonalSet::new(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![5.0, 5.0], vec![6.0, 5.0]),
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn simplify_collinear_chain() {
        // 1000 collinear vertices along the unit segment
        let mut segs = Vec::new();
        let k = 1000;
        for i in 0..k {
            let x0 = i as f64 / k as f64;
            let x1 = (i + 1) as f64 / k as f64;
            segs.push(Segment::new(vec![x0, 0.0], vec![x1, 0.0]));
        }
        let s = PolygonalSet::omega(2, segs).unwrap();
        let out = simplify(&s, 0.01).unwrap();
        assert_eq!(out.segments().len(), 1);
        let seg = &out.segments()[0];
        let ends: Vec<&[f64]> = vec![&seg.a, &seg.b];
        assert!(ends.iter().any(|e| dist(e, &[0.0, 0.0]) < 1e-12));
        assert!(ends.iter().any(|e| dist(e, &[1.0, 0.0]) < 1e-12));
    }

    #[test]
    fn simplify_keeps_genuine_corners_and_is_idempotent() {
        let s = PolygonalSet::omega(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let once = simplify(&s, 0.01).unwrap();
        assert_eq!(once.segments().len(), 2);
        let twice = simplify(&once, 0.01).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn simplify_removes_micro_kink_and_shortens() {
        use crate::gauge::NormModel;
        // L with a 1e-6 kink in the middle of the horizontal arm
        let s = PolygonalSet::omega(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![0.5, 1e-6]),
                Segment::new(vec![0.5, 1e-6], vec![1.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let gauge = NormModel::euclidean(2);
        let before = gauge.length_of(&s);
        let out = simplify(&s, 0.01).unwrap();
        assert_eq!(out.segments().len(), 2);
        let after = gauge.length_of(&out);
        assert!(after < before, "length must strictly decrease: {after} vs {before}");
        assert!(hausdorff_distance(&s, &out) <= 0.01 + 1e-9);
        // origin remains an endpoint
        assert!(out
            .segments()
            .iter()
            .any(|seg| dist(&seg.a, &[0.0, 0.0]) < 1e-12 || dist(&seg.b, &[0.0, 0.0]) < 1e-12));
    }

    #[test]
    fn omega_set_json_roundtrip() {
        let s = PolygonalSet::omega(
            2,
            vec![
                Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]),
                Segment::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let text = s.to_json();
        assert!(text.contains("omega-set/1"));
        let back = PolygonalSet::from_json(&text).unwrap();
        assert_eq!(s, back);
    }
}
