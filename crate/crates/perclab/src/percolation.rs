//! Bernoulli bond configurations and origin clusters.
//!
//! Two sampling paths produce identical results: `sample_configuration`
//! materializes every edge of the region, while `ClusterSampler` grows
//! the origin cluster lazily, querying only edges adjacent to the
//! frontier.  Both draw each edge's coin from the same counter-based
//! stream, so they agree bond-for-bond.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::lattice::{Edge, LatticeConfig, Region};
use crate::rng::ReplicateStream;

/// One sampled bond configuration on a region.
#[derive(Debug, Clone)]
pub struct BondConfiguration {
    pub config: LatticeConfig,
    region: Region,
    edges: Vec<Edge>,
    open: Vec<bool>,
}

impl BondConfiguration {
    pub fn new(config: LatticeConfig, open_mask: impl Fn(Edge, u64) -> bool) -> Self {
        let region = config.region();
        let edges = region.edges();
        let open = edges.iter().map(|&e| open_mask(e, region.edge_key(e))).collect();
        BondConfiguration { config, region, edges, open }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn open_flags(&self) -> &[bool] {
        &self.open
    }

    pub fn open_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().zip(&self.open).filter(|(_, &o)| o).map(|(&e, _)| e)
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// Canonical serialized ids of the open edges.
    pub fn open_edge_ids(&self) -> Vec<String> {
        self.open_edges().map(|e| self.region.edge_id(e)).collect()
    }

    /// Build from an explicit list of open edges given by endpoint coordinates.
    /// Each pair must join adjacent in-region sites.
    pub fn from_open_edges(config: LatticeConfig, open: &[(Vec<i64>, Vec<i64>)]) -> Result<Self> {
        let region = config.region();
        let mut flags = vec![false; region.edges().len()];
        let edges = region.edges();
        for (a, b) in open {
            let (lo_pt, hi_pt, axis) = canonical_pair(a, b)?;
            let site = region
                .site_index(&lo_pt)
                .ok_or_else(|| Error::TargetOutsideBox(lo_pt.iter().map(|&c| c as f64).collect()))?;
            if region.site_index(&hi_pt).is_none() {
                return Err(Error::TargetOutsideBox(hi_pt.iter().map(|&c| c as f64).collect()));
            }
            let edge = Edge { site, axis };
            let idx = edges
                .iter()
                .position(|&e| e == edge)
                .expect("edge of adjacent in-region sites is enumerated");
            flags[idx] = true;
        }
        Ok(BondConfiguration { config, region, edges, open: flags })
    }
}

fn canonical_pair(a: &[i64], b: &[i64]) -> Result<(Vec<i64>, Vec<i64>, u8)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let mut diff_axis = None;
    for i in 0..a.len() {
        match (a[i] - b[i]).abs() {
            0 => {}
            1 if diff_axis.is_none() => diff_axis = Some(i),
            _ => return Err(Error::InvalidConfig(format!("{a:?}-{b:?} is not a lattice edge"))),
        }
    }
    let axis = diff_axis
        .ok_or_else(|| Error::InvalidConfig(format!("{a:?}-{b:?} is not a lattice edge")))? as u8;
    if a[axis as usize] < b[axis as usize] {
        Ok((a.to_vec(), b.to_vec(), axis))
    } else {
        Ok((b.to_vec(), a.to_vec(), axis))
    }
}

/// Sample one Bernoulli bond configuration. Deterministic in
/// (config, master_seed, replicate); edges are independent coins.
pub fn sample_configuration(
    config: &LatticeConfig,
    master_seed: u64,
    replicate: u64,
) -> Result<BondConfiguration> {
    config.validate()?;
    config.require_subcritical()?;
    let stream = ReplicateStream::new(master_seed, replicate);
    let p = config.p;
    Ok(BondConfiguration::new(config.clone(), |_, key| stream.coin(key, p)))
}

/// The origin-containing open cluster, rescaled by 1/n.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub d: usize,
    pub n: u32,
    /// Integer (unscaled) site coordinates, flattened, origin first.
    pub sites: Vec<i64>,
    /// Induced open edges: canonical lower endpoint (unscaled) plus axis.
    pub edges: Vec<(Vec<i64>, u8)>,
    pub touches_boundary: bool,
}

impl Cluster {
    pub fn vertex_count(&self) -> usize {
        self.sites.len() / self.d
    }

    pub fn site(&self, i: usize) -> &[i64] {
        &self.sites[i * self.d..(i + 1) * self.d]
    }

    pub fn contains_site(&self, coords: &[i64]) -> bool {
        (0..self.vertex_count()).any(|i| self.site(i) == coords)
    }

    /// Rescaled vertex coordinates (the cluster as an element of Omega,
    /// represented by its vertex set).
    pub fn point_cloud(&self) -> PointCloud {
        let n = self.n as f64;
        let coords: Vec<f64> = self.sites.iter().map(|&c| c as f64 / n).collect();
        PointCloud::new(self.d, coords).expect("cluster is nonempty")
    }
}

/// Grows origin clusters lazily with reusable scratch buffers.
pub struct ClusterSampler {
    config: LatticeConfig,
    region: Region,
    edge_keys: Vec<u64>,
    stamp: Vec<u64>,
    epoch: u64,
    queue: Vec<u32>,
    sites_buf: Vec<u32>,
    edges_buf: Vec<Edge>,
    touches: bool,
    origin: u32,
}

impl ClusterSampler {
    pub fn new(config: LatticeConfig) -> Result<Self> {
        config.validate()?;
        config.require_subcritical()?;
        let region = config.region();
        let origin = region
            .origin_site()
            .ok_or_else(|| Error::InvalidConfig("origin not inside region".into()))?;
        let d = region.d();
        let nsites = region.site_count() as usize;
        let mut edge_keys = vec![0u64; nsites * d];
        for site in 0..nsites as u32 {
            for axis in 0..d {
                if region.neighbor(site, axis, 1).is_some() {
                    edge_keys[site as usize * d + axis] = region.edge_key(Edge { site, axis: axis as u8 });
                }
            }
        }
        Ok(ClusterSampler {
            config,
            region,
            edge_keys,
            stamp: vec![0; nsites],
            epoch: 0,
            queue: Vec::new(),
            sites_buf: Vec::new(),
            edges_buf: Vec::new(),
            touches: false,
            origin,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    /// Grow the origin cluster for one replicate. The result is readable
    /// through `sites()`, `open_edges()`, `touches_boundary()` until the
    /// next call.
    pub fn grow(&mut self, stream: &ReplicateStream) {
        let d = self.region.d();
        let p = self.config.p;
        self.epoch += 1;
        self.queue.clear();
        self.sites_buf.clear();
        self.edges_buf.clear();
        self.stamp[self.origin as usize] = self.epoch;
        self.queue.push(self.origin);
        self.sites_buf.push(self.origin);
        self.touches = self.region.on_boundary(self.origin);
        let mut head = 0;
        while head < self.queue.len() {
            let s = self.queue[head];
            head += 1;
            for axis in 0..d {
                for dir in [1i8, -1] {
                    let Some(t) = self.region.neighbor(s, axis, dir) else { continue };
                    let canon = if dir > 0 { s } else { t };
                    let key = self.edge_keys[canon as usize * d + axis];
                    if !stream.coin(key, p) {
                        continue;
                    }
                    if dir > 0 {
                        self.edges_buf.push(Edge { site: canon, axis: axis as u8 });
                    }
                    if self.stamp[t as usize] != self.epoch {
                        self.stamp[t as usize] = self.epoch;
                        self.queue.push(t);
                        self.sites_buf.push(t);
                        self.touches |= self.region.on_boundary(t);
                    }
                }
            }
        }
    }

    /// Grow open components from the given start sites instead of the
    /// origin, optionally restricted to an allowed-site mask. Used for
    /// connection events whose paths need not touch the origin cluster.
    pub fn grow_from(&mut self, stream: &ReplicateStream, starts: &[u32], allowed: Option<&[bool]>) {
        let d = self.region.d();
        let p = self.config.p;
        let ok = |site: u32| allowed.map_or(true, |a| a[site as usize]);
        self.epoch += 1;
        self.queue.clear();
        self.sites_buf.clear();
        self.edges_buf.clear();
        self.touches = false;
        for &s in starts {
            if ok(s) && self.stamp[s as usize] != self.epoch {
                self.stamp[s as usize] = self.epoch;
                self.queue.push(s);
                self.sites_buf.push(s);
                self.touches |= self.region.on_boundary(s);
            }
        }
        let mut head = 0;
        while head < self.queue.len() {
            let s = self.queue[head];
            head += 1;
            for axis in 0..d {
                for dir in [1i8, -1] {
                    let Some(t) = self.region.neighbor(s, axis, dir) else { continue };
                    if !ok(t) || self.stamp[t as usize] == self.epoch {
                        continue;
                    }
                    let canon = if dir > 0 { s } else { t };
                    let key = self.edge_keys[canon as usize * d + axis];
                    if !stream.coin(key, p) {
                        continue;
                    }
                    self.stamp[t as usize] = self.epoch;
                    self.queue.push(t);
                    self.sites_buf.push(t);
                    self.touches |= self.region.on_boundary(t);
                }
            }
        }
    }

    pub fn sites(&self) -> &[u32] {
        &self.sites_buf
    }

    pub fn touches_boundary(&self) -> bool {
        self.touches
    }

    pub fn contains(&self, site: u32) -> bool {
        self.stamp[site as usize] == self.epoch
    }

    /// Materialize the current grown cluster.
    pub fn to_cluster(&self) -> Cluster {
        let d = self.region.d();
        let mut sites = Vec::with_capacity(self.sites_buf.len() * d);
        let mut buf = vec![0i64; d];
        for &s in &self.sites_buf {
            self.region.coords_into(s, &mut buf);
            sites.extend_from_slice(&buf);
        }
        let mut edges = Vec::with_capacity(self.edges_buf.len());
        for &e in &self.edges_buf {
            edges.push((self.region.coords(e.site), e.axis));
        }
        edges.sort();
        Cluster { d, n: self.config.n, sites, edges, touches_boundary: self.touches }
    }
}

/// Connected component of the origin under the open edges, rescaled by 1/n.
pub fn extract_origin_cluster(bc: &BondConfiguration) -> Cluster {
    let region = bc.region();
    let d = region.d();
    let nsites = region.site_count() as usize;
    // adjacency flags: site*d+axis = open edge toward +axis
    let mut open_flag = vec![false; nsites * d];
    for e in bc.open_edges() {
        open_flag[e.site as usize * d + e.axis as usize] = true;
    }
    let origin = region.origin_site().expect("origin in region");
    let mut visited = vec![false; nsites];
    let mut queue = vec![origin];
    visited[origin as usize] = true;
    let mut head = 0;
    let mut touches = region.on_boundary(origin);
    let mut cluster_sites = vec![origin];
    while head < queue.len() {
        let s = queue[head];
        head += 1;
        for axis in 0..d {
            for dir in [1i8, -1] {
                let Some(t) = region.neighbor(s, axis, dir) else { continue };
                let canon = if dir > 0 { s } else { t };
                if !open_flag[canon as usize * d + axis] {
                    continue;
                }
                if !visited[t as usize] {
                    visited[t as usize] = true;
                    queue.push(t);
                    cluster_sites.push(t);
                    touches |= region.on_boundary(t);
                }
            }
        }
    }
    let mut sites = Vec::with_capacity(cluster_sites.len() * d);
    let mut buf = vec![0i64; d];
    for &s in &cluster_sites {
        region.coords_into(s, &mut buf);
        sites.extend_from_slice(&buf);
    }
    let mut edges = Vec::new();
    for e in bc.open_edges() {
        let other = region.neighbor(e.site, e.axis as usize, 1).expect("edge endpoint");
        if visited[e.site as usize] && visited[other as usize] {
            edges.push((region.coords(e.site), e.axis));
        }
    }
    edges.sort();
    Cluster { d, n: bc.config.n, sites, edges, touches_boundary: touches }
}
