//! Convex gauges standing in for the correlation norm.
//!
//! A measured norm is stored as a symmetric convex polytope: boundary
//! samples are closed under the hyperoctahedral group (coordinate
//! permutations and sign flips, the lattice symmetries), hulled, and
//! evaluated through the facet representation
//! `N(u) = max_f <n_f, u>`.  Homogeneity and the triangle inequality hold
//! by construction; symmetry holds exactly because the facet set itself
//! is closed under the (exact) group action.
//!
//! Analytic gauges (euclidean, l1, linf, weighted-l2) are bundled so the
//! downstream modules can be exercised without Monte Carlo.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{dot, PolygonalSet};

pub const CORR_NORM_VERSION: &str = "corr-norm/1";

/// Summary of where a measured model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProvenance {
    pub master_seed: u64,
    pub replicates: u64,
    pub scales: Vec<u32>,
    pub p: f64,
    pub directions: Vec<Vec<f64>>,
    pub slopes: Vec<f64>,
    pub intercepts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum GaugeKind {
    Euclidean,
    L1,
    LInf,
    WeightedL2 { weights: Vec<f64> },
    Hull { vertices: Vec<Vec<f64>>, facets: Vec<Vec<f64>> },
}

/// A convex gauge on R^d: positively homogeneous, subadditive, symmetric,
/// positive away from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NormModel {
    d: usize,
    kind: GaugeKind,
    provenance: Option<NormProvenance>,
}

impl NormModel {
    pub fn euclidean(d: usize) -> Self {
        NormModel { d, kind: GaugeKind::Euclidean, provenance: None }
    }

    pub fn l1(d: usize) -> Self {
        NormModel { d, kind: GaugeKind::L1, provenance: None }
    }

    pub fn linf(d: usize) -> Self {
        NormModel { d, kind: GaugeKind::LInf, provenance: None }
    }

    pub fn weighted_l2(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidGauge("weighted-l2 needs positive weights".into()));
        }
        Ok(NormModel { d: weights.len(), kind: GaugeKind::WeightedL2 { weights }, provenance: None })
    }

    /// Bundled synthetic gauges by name.
    pub fn synthetic(name: &str, d: usize) -> Result<Self> {
        match name {
            "euclidean" => Ok(NormModel::euclidean(d)),
            "l1" => Ok(NormModel::l1(d)),
            "linf" => Ok(NormModel::linf(d)),
            "weighted-l2" => NormModel::weighted_l2((1..=d).map(|i| i as f64).collect()),
            other => Err(Error::InvalidGauge(format!("unknown synthetic gauge {other:?}"))),
        }
    }

    /// Build a polytope gauge from boundary samples of the unit ball.
    /// The samples are closed under the hyperoctahedral group before
    /// hulling; at least d linearly independent directions are required.
    pub fn from_boundary_points(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        // rank guard on the raw input: symmetry closure would make any
        // single nonzero direction span R^d, which is not informative
        if rank(&points, d) < d {
            return Err(Error::InvalidGauge(format!(
                "need at least {d} linearly independent directions"
            )));
        }
        let closed = close_under_hyperoctahedral(d, &points)?;
        let (mut vertices, facets) = match d {
            2 => hull_2d(&closed)?,
            _ => hull_nd(d, &closed)?,
        };
        // canonical vertex order so equal models serialize identically
        vertices.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let facets = close_facets(d, facets);
        let model = NormModel { d, kind: GaugeKind::Hull { vertices, facets }, provenance: None };
        // every sample must lie in the unit ball of the gauge
        for p in &closed {
            let g = model.evaluate(p);
            if g > 1.0 + 1e-9 {
                return Err(Error::InvalidGauge(format!(
                    "hull construction failed: sample {p:?} has gauge {g}"
                )));
            }
        }
        Ok(model)
    }

    /// Rebuild a model from a stored vertex list, keeping the list
    /// verbatim so serialization round-trips byte-identically.
    fn from_stored_hull(d: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if rank(&vertices, d) < d {
            return Err(Error::InvalidGauge("stored hull vertices are rank-deficient".into()));
        }
        let (_, facets) = match d {
            2 => hull_2d(&vertices)?,
            _ => hull_nd(d, &vertices)?,
        };
        let facets = close_facets(d, facets);
        Ok(NormModel { d, kind: GaugeKind::Hull { vertices, facets }, provenance: None })
    }

    pub fn with_provenance(mut self, prov: NormProvenance) -> Self {
        self.provenance = Some(prov);
        self
    }

    pub fn provenance(&self) -> Option<&NormProvenance> {
        self.provenance.as_ref()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Hull models are piecewise linear; euclidean and weighted-l2 are
    /// smooth away from the origin.
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, GaugeKind::Euclidean | GaugeKind::WeightedL2 { .. })
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, GaugeKind::Euclidean)
    }

    /// Weights when this is a weighted-l2 gauge; lets callers reduce to
    /// the euclidean case by rescaling coordinates.
    pub fn weighted_l2_weights(&self) -> Option<&[f64]> {
        match &self.kind {
            GaugeKind::WeightedL2 { weights } => Some(weights),
            _ => None,
        }
    }

    /// Gauge value inf{t > 0 : u/t in unit ball}.
    pub fn evaluate(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.d);
        match &self.kind {
            GaugeKind::Euclidean => dot(u, u).sqrt(),
            GaugeKind::L1 => u.iter().map(|x| x.abs()).sum(),
            GaugeKind::LInf => u.iter().map(|x| x.abs()).fold(0.0, f64::max),
            GaugeKind::WeightedL2 { weights } => {
                u.iter().zip(weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
            }
            GaugeKind::Hull { facets, .. } => {
                facets.iter().map(|f| dot(f, u)).fold(0.0, f64::max)
            }
        }
    }

    /// A subgradient of the gauge at `u` (any supporting functional).
    pub fn subgradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.evaluate(u);
        if n <= 0.0 {
            return vec![0.0; self.d];
        }
        match &self.kind {
            GaugeKind::Euclidean => u.iter().map(|x| x / n).collect(),
            GaugeKind::L1 => u.iter().map(|x| x.signum() * f64::from(*x != 0.0)).collect(),
            GaugeKind::LInf => {
                let mut g = vec![0.0; self.d];
                let mut best = 0.0;
                let mut arg = 0;
                for (i, x) in u.iter().enumerate() {
                    if x.abs() > best {
                        best = x.abs();
                        arg = i;
                    }
                }
                g[arg] = u[arg].signum();
                g
            }
            GaugeKind::WeightedL2 { weights } => {
                u.iter().zip(weights).map(|(x, w)| w * x / n).collect()
            }
            GaugeKind::Hull { facets, .. } => {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (i, f) in facets.iter().enumerate() {
                    let v = dot(f, u);
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                facets[arg].clone()
            }
        }
    }

    /// Sum of gauge lengths of the segments of a polygonal set.
    pub fn length_of(&self, s: &PolygonalSet) -> f64 {
        s.segments()
            .iter()
            .map(|seg| {
                let w: Vec<f64> = seg.b.iter().zip(&seg.a).map(|(&b, &a)| b - a).collect();
                self.evaluate(&w)
            })
            .sum()
    }

    /// Vertices of the unit ball boundary, for plotting and serialization.
    /// Analytic gauges return a dense sampled polygon in d = 2.
    pub fn unit_ball_vertices(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            GaugeKind::Hull { vertices, .. } => vertices.clone(),
            _ => {
                if self.d == 2 {
                    let m = 128;
                    (0..m)
                        .map(|i| {
                            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                            let u = [th.cos(), th.sin()];
                            let g = self.evaluate(&u);
                            vec![u[0] / g, u[1] / g]
                        })
                        .collect()
                } else {
                    Vec::new()
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GaugeKind::Euclidean => "euclidean",
            GaugeKind::L1 => "l1",
            GaugeKind::LInf => "linf",
            GaugeKind::WeightedL2 { .. } => "weighted-l2",
            GaugeKind::Hull { .. } => "hull",
        }
    }

    pub fn to_json(&self) -> String {
        let file = CorrNormFile {
            version: CORR_NORM_VERSION.to_string(),
            dimension: self.d,
            kind: self.kind_name().to_string(),
            weights: match &self.kind {
                GaugeKind::WeightedL2 { weights } => Some(weights.clone()),
                _ => None,
            },
            hull_vertices: match &self.kind {
                GaugeKind::Hull { vertices, .. } => Some(vertices.clone()),
                _ => None,
            },
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).expect("norm model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CorrNormFile = serde_json::from_str(text)?;
        if file.version != CORR_NORM_VERSION {
            return Err(Error::InvalidGauge(format!("unsupported version {:?}", file.version)));
        }
        let model = match file.kind.as_str() {
            "hull" => {
                let vertices = file
                    .hull_vertices
                    .ok_or_else(|| Error::InvalidGauge("hull model without vertices".into()))?;
                NormModel::from_stored_hull(file.dimension, vertices)?
            }
            "weighted-l2" => NormModel::weighted_l2(
                file.weights
                    .ok_or_else(|| Error::InvalidGauge("weighted-l2 without weights".into()))?,
            )?,
            name => NormModel::synthetic(name, file.dimension)?,
        };
        Ok(match file.provenance {
            Some(p) => model.with_provenance(p),
            None => model,
        })
    }

    /// Content hash of the serialized model.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CorrNormFile {
    version: String,
    dimension: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hull_vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<NormProvenance>,
}

// ---- hyperoctahedral group -------------------------------------------------

/// All signed permutation images of `v`. Exact floating-point operations.
pub fn hyperoctahedral_images(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    permute(&mut idx, 0, &mut perms);
    let mut out = Vec::with_capacity(perms.len() << d);
    for perm in &perms {
        for signs in 0..(1u32 << d) {
            let mut w = vec![0.0; d];
            for i in 0..d {
                let x = v[perm[i]];
                w[i] = if signs >> i & 1 == 1 { -x } else { x };
            }
            out.push(w);
        }
    }
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, out);
        idx.swap(k, i);
    }
}

fn close_under_hyperoctahedral(d: usize, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        if dot(p, p) == 0.0 {
            return Err(Error::InvalidGauge("boundary sample at the origin".into()));
        }
        for img in hyperoctahedral_images(p) {
            if !out.iter().any(|q| q == &img) {
                out.push(img);
            }
        }
    }
    Ok(out)
}

fn close_facets(d: usize, facets: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for f in &facets {
        for img in hyperoctahedral_images(f) {
            if !out.iter().any(|q| q == &img) {
                out.push(img);
            }
        }
    }
    let _ = d;
    out
}

fn rank(points: &[Vec<f64>], d: usize) -> usize {
    // Gram-Schmidt rank over the sample directions
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let mut v = p.clone();
        for b in &basis {
            let c = dot(&v, b);
            for i in 0..d {
                v[i] -= c * b[i];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            for x in v.iter_mut() {
                *x /= n;
            }
            basis.push(v);
            if basis.len() == d {
                break;
            }
        }
    }
    basis.len()
}

// ---- hulls ------------------------------------------------------------------

/// Monotone-chain hull in the plane; facet normals solve <n, a> = <n, b> = 1.
fn hull_2d(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // drop ulp-level duplicates (trig closures of symmetric angles)
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let hull: Vec<(f64, f64)> = lower.into_iter().chain(upper).collect();
    if hull.len() < 3 {
        return Err(Error::InvalidGauge("degenerate planar hull".into()));
    }
    let mut facets = Vec::with_capacity(hull.len());
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        if (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12 {
            continue; // residual near-duplicate, no facet between
        }
        let det = a.0 * b.1 - a.1 * b.0;
        if det.abs() < 1e-14 {
            return Err(Error::InvalidGauge("hull edge collinear with the origin".into()));
        }
        // solve [ax ay; bx by] n = [1; 1]
        let nx = (b.1 - a.1) / det;
        let ny = (a.0 - b.0) / det;
        facets.push(vec![nx, ny]);
    }
    Ok((hull.into_iter().map(|(x, y)| vec![x, y]).collect(), facets))
}

const HULL_ND_POINT_CAP: usize = 160;

/// Brute-force facet enumeration for d >= 3: every d-subset whose
/// supporting hyperplane <n, x> = 1 bounds all samples is a facet.
fn hull_nd(d: usize, points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let m = points.len();
    if m > HULL_ND_POINT_CAP {
        return Err(Error::InvalidGauge(format!(
            "too many boundary samples for d = {d} hulling ({m} > {HULL_ND_POINT_CAP}); use fewer directions"
        )));
    }
    let mut facets: Vec<Vec<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..d).collect();
    let mut on_hull = vec![false; m];
    loop {
        if let Some(n) = solve_unit_plane(d, points, &subset) {
            let max = points.iter().map(|p| dot(&n, p)).fold(f64::NEG_INFINITY, f64::max);
            if max <= 1.0 + 1e-9 {
                let key_exists = facets.iter().any(|f| dist_inf(f, &n) < 1e-9);
                if !key_exists {
                    facets.push(n);
                    for &i in &subset {
                        on_hull[i] = true;
                    }
                }
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                let vertices: Vec<Vec<f64>> = points
                    .iter()
                    .zip(&on_hull)
                    .filter(|(_, &h)| h)
                    .map(|(p, _)| p.clone())
                    .collect();
                if facets.is_empty() {
                    return Err(Error::InvalidGauge("no facets found; degenerate samples".into()));
                }
                return Ok((vertices, facets));
            }
            i -= 1;
            if subset[i] != i + m - d {
                subset[i] += 1;
                for j in (i + 1)..d {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solve <n, p_i> = 1 for the d chosen points (Gaussian elimination).
fn solve_unit_plane(d: usize, points: &[Vec<f64>], subset: &[usize]) -> Option<Vec<f64>> {
    let mut a = vec![vec![0.0; d + 1]; d];
    for (r, &i) in subset.iter().enumerate() {
        a[r][..d].copy_from_slice(&points[i]);
        a[r][d] = 1.0;
    }
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        let scale = a[col][col];
        for x in a[col].iter_mut() {
            *x /= scale;
        }
        for r in 0..d {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in 0..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..d).map(|i| a[i][d]).collect())
}
