//! Exhaustive probability oracle on tiny regions.
//!
//! Enumerates all 2^E bond configurations, records how many satisfy an
//! event at each open-edge count, and evaluates probabilities either in
//! f64 or in exact rational arithmetic.  The census is independent of p,
//! so one enumeration serves every p and every inequality check.
//!
//! Increasing-event inequalities (FKG, BK, monotonicity, finite-scale
//! superadditivity) are theorems for these measures; checking them in
//! exact arithmetic verifies the implementation, not the mathematics.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::event::EventSpec;
use crate::geometry::{dist_point_poly, hausdorff_distance, PointCloud, PolygonalSet};
use crate::lattice::{round_to_site, LatticeConfig, Region};

/// 2^24 configurations keep a full enumeration around a second.
pub const ENUMERATION_EDGE_CAP: usize = 24;
/// Site masks are u64.
pub const ENUMERATION_SITE_CAP: usize = 64;

/// Satisfying-configuration counts, binned by number of open edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCensus {
    pub edge_count: usize,
    pub counts_by_open: Vec<u64>,
}

impl EventCensus {
    pub fn empty(edge_count: usize) -> Self {
        EventCensus { edge_count, counts_by_open: vec![0; edge_count + 1] }
    }

    pub fn satisfying_configs(&self) -> u64 {
        self.counts_by_open.iter().sum()
    }

    /// P(event) = sum_k counts[k] p^k (1-p)^(E-k).
    pub fn probability(&self, p: f64) -> f64 {
        let e = self.edge_count;
        let q = 1.0 - p;
        let mut p_pow = vec![1.0; e + 1];
        let mut q_pow = vec![1.0; e + 1];
        for i in 1..=e {
            p_pow[i] = p_pow[i - 1] * p;
            q_pow[i] = q_pow[i - 1] * q;
        }
        self.counts_by_open
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * p_pow[k] * q_pow[e - k])
            .sum()
    }

    /// Exact rational probability at an exactly-representable p.
    pub fn probability_rational(&self, p: f64) -> BigRational {
        let p = BigRational::from_float(p).expect("finite p");
        let q = BigRational::one() - &p;
        let e = self.edge_count;
        let mut total = BigRational::zero();
        let mut p_pow = BigRational::one();
        let mut p_pows = Vec::with_capacity(e + 1);
        for _ in 0..=e {
            p_pows.push(p_pow.clone());
            p_pow *= &p;
        }
        let mut q_pow = BigRational::one();
        let mut q_pows = Vec::with_capacity(e + 1);
        for _ in 0..=e {
            q_pows.push(q_pow.clone());
            q_pow *= &q;
        }
        for (k, &c) in self.counts_by_open.iter().enumerate() {
            if c != 0 {
                total += BigRational::from(BigInt::from(c)) * &p_pows[k] * &q_pows[e - k];
            }
        }
        total
    }
}

/// Region graph prepared for bitmask enumeration.
struct OracleInstance {
    region: Region,
    endpoints: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    origin: u32,
    d: usize,
    n: u32,
}

impl OracleInstance {
    fn new(config: &LatticeConfig) -> Result<Self> {
        config.validate()?;
        let region = config.region();
        let edges = region.edges();
        if edges.len() > ENUMERATION_EDGE_CAP {
            return Err(Error::EnumerationCap { edges: edges.len(), cap: ENUMERATION_EDGE_CAP });
        }
        let sites = region.site_count() as usize;
        if sites > ENUMERATION_SITE_CAP {
            return Err(Error::SiteCap { sites, cap: ENUMERATION_SITE_CAP });
        }
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); sites];
        for (i, e) in edges.iter().enumerate() {
            let a = e.site;
            let b = region.neighbor(a, e.axis as usize, 1).expect("edge endpoint");
            endpoints.push((a, b));
            adj[a as usize].push((i as u32, b));
            adj[b as usize].push((i as u32, a));
        }
        let origin = region
            .origin_site()
            .ok_or_else(|| Error::InvalidConfig("origin not inside region".into()))?;
        Ok(OracleInstance { region, endpoints, adj, origin, d: config.d, n: config.n })
    }

    fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    /// Site mask of the component containing `start`, restricted to
    /// `allowed` sites, under the open-edge mask.
    fn component(&self, open: u32, start: u32, allowed: u64) -> u64 {
        if allowed >> start & 1 == 0 {
            return 0;
        }
        let mut seen = 1u64 << start;
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for &(ei, t) in &self.adj[s as usize] {
                if open >> ei & 1 == 1 && allowed >> t & 1 == 1 && seen >> t & 1 == 0 {
                    seen |= 1 << t;
                    stack.push(t);
                }
            }
        }
        seen
    }

    fn scaled_coords(&self, site_mask: u64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut buf = vec![0i64; self.d];
        for s in 0..self.region.site_count() as u32 {
            if site_mask >> s & 1 == 1 {
                self.region.coords_into(s, &mut buf);
                out.extend(buf.iter().map(|&c| c as f64 / self.n as f64));
            }
        }
        out
    }
}

/// Compiled event working over open-edge masks.
enum MaskEvent {
    Points { sites: Vec<u32> },
    Hausdorff { set: PolygonalSet, epsilon: f64, memo: HashMap<u64, bool> },
    Corridor { a: u32, b: u32, allowed: u64 },
    Crossing { sources: Vec<u32>, target: u64 },
}

impl MaskEvent {
    fn compile(inst: &OracleInstance, spec: &EventSpec) -> Result<Self> {
        let region = &inst.region;
        let n = inst.n;
        let d = inst.d;
        let site_of = |u: &[f64]| -> Result<u32> {
            let coords = round_to_site(u, n);
            region.site_index(&coords).ok_or_else(|| Error::TargetOutsideBox(u.to_vec()))
        };
        let scaled = |s: u32, buf: &mut Vec<i64>, x: &mut Vec<f64>| {
            region.coords_into(s, buf);
            for i in 0..d {
                x[i] = buf[i] as f64 / n as f64;
            }
        };
        Ok(match spec {
            EventSpec::PointInCluster { target } => MaskEvent::Points { sites: vec![site_of(target)?] },
            EventSpec::PointsInCluster { targets } => MaskEvent::Points {
                sites: targets.iter().map(|t| site_of(t)).collect::<Result<Vec<_>>>()?,
            },
            EventSpec::HausdorffBall { set, epsilon } => MaskEvent::Hausdorff {
                set: set.clone(),
                epsilon: *epsilon,
                memo: HashMap::new(),
            },
            EventSpec::CorridorConnection { a, b, corridor, epsilon } => {
                let mut allowed = 0u64;
                let mut buf = vec![0i64; d];
                let mut x = vec![0.0; d];
                for s in 0..region.site_count() as u32 {
                    scaled(s, &mut buf, &mut x);
                    if dist_point_poly(&x, corridor) <= *epsilon {
                        allowed |= 1 << s;
                    }
                }
                MaskEvent::Corridor { a: site_of(a)?, b: site_of(b)?, allowed }
            }
            EventSpec::RegionCrossing { set, epsilon } => {
                let mut sources = Vec::new();
                let mut target = 0u64;
                let mut buf = vec![0i64; d];
                let mut x = vec![0.0; d];
                for s in 0..region.site_count() as u32 {
                    scaled(s, &mut buf, &mut x);
                    let dist = dist_point_poly(&x, set);
                    if dist >= epsilon / 2.0 {
                        sources.push(s);
                    }
                    if dist < epsilon / 4.0 {
                        target |= 1 << s;
                    }
                }
                MaskEvent::Crossing { sources, target }
            }
        })
    }

    fn eval(&mut self, inst: &OracleInstance, open: u32) -> bool {
        match self {
            MaskEvent::Points { sites } => {
                let comp = inst.component(open, inst.origin, u64::MAX);
                sites.iter().all(|&s| comp >> s & 1 == 1)
            }
            MaskEvent::Hausdorff { set, epsilon, memo } => {
                let comp = inst.component(open, inst.origin, u64::MAX);
                if let Some(&hit) = memo.get(&comp) {
                    return hit;
                }
                let coords = inst.scaled_coords(comp);
                let cloud = PointCloud::new(inst.d, coords).expect("origin component nonempty");
                let hit = hausdorff_distance(set as &PolygonalSet, &cloud) < *epsilon;
                memo.insert(comp, hit);
                hit
            }
            MaskEvent::Corridor { a, b, allowed } => {
                let comp = inst.component(open, *a, *allowed);
                comp >> *b & 1 == 1
            }
            MaskEvent::Crossing { sources, target } => {
                let mut seen = 0u64;
                for &s in sources.iter() {
                    if seen >> s & 1 == 1 {
                        continue;
                    }
                    let comp = inst.component(open, s, u64::MAX);
                    if comp & *target != 0 {
                        return true;
                    }
                    seen |= comp;
                }
                false
            }
        }
    }
}

/// Census of configurations satisfying each event, in one enumeration pass.
/// The final entry is the census of the intersection of all events.
pub fn joint_census(config: &LatticeConfig, events: &[&EventSpec]) -> Result<Vec<EventCensus>> {
    let inst = OracleInstance::new(config)?;
    let e = inst.edge_count();
    let mut compiled: Vec<MaskEvent> =
        events.iter().map(|s| MaskEvent::compile(&inst, s)).collect::<Result<_>>()?;
    let mut censuses = vec![EventCensus::empty(e); events.len() + 1];
    for open in 0..(1u64 << e) as u64 {
        let open = open as u32;
        let k = open.count_ones() as usize;
        let mut all = true;
        for (i, ev) in compiled.iter_mut().enumerate() {
            let hit = ev.eval(&inst, open);
            if hit {
                censuses[i].counts_by_open[k] += 1;
            } else {
                all = false;
            }
        }
        if all {
            censuses[events.len()].counts_by_open[k] += 1;
        }
    }
    Ok(censuses)
}

pub fn event_census(config: &LatticeConfig, event: &EventSpec) -> Result<EventCensus> {
    Ok(joint_census(config, &[event])?.into_iter().next().expect("one census"))
}

/// Exact probability by exhaustive enumeration at the config's p.
pub fn exact_event_probability(config: &LatticeConfig, event: &EventSpec) -> Result<f64> {
    Ok(event_census(config, event)?.probability(config.p))
}

/// Harris/FKG inequality, exact: P(A and B) >= P(A) P(B) for increasing
/// events. Returns the two sides as rationals for inspection.
pub fn fkg_check(
    config: &LatticeConfig,
    a: &EventSpec,
    b: &EventSpec,
) -> Result<(bool, BigRational, BigRational)> {
    if !a.is_increasing() || !b.is_increasing() {
        return Err(Error::InvalidConfig("FKG check requires increasing events".into()));
    }
    let censuses = joint_census(config, &[a, b])?;
    let pa = censuses[0].probability_rational(config.p);
    let pb = censuses[1].probability_rational(config.p);
    let pab = censuses[2].probability_rational(config.p);
    let rhs = pa * pb;
    Ok((pab >= rhs, pab, rhs))
}

/// A connection event usable as a BK witness: source, sink, allowed sites.
struct PathEvent {
    s: u32,
    t: u32,
    allowed: u64,
}

fn as_path_event(inst: &OracleInstance, spec: &EventSpec) -> Result<PathEvent> {
    let compiled = MaskEvent::compile(inst, spec)?;
    match compiled {
        MaskEvent::Points { sites } if sites.len() == 1 => {
            Ok(PathEvent { s: inst.origin, t: sites[0], allowed: u64::MAX })
        }
        MaskEvent::Corridor { a, b, allowed } => Ok(PathEvent { s: a, t: b, allowed }),
        _ => Err(Error::InvalidConfig(
            "BK composition needs single-pair connection events".into(),
        )),
    }
}

/// Census of the disjoint occurrence A o B of two connection events:
/// configurations with edge-disjoint open witnesses for both. Witnesses
/// for A are enumerated as simple paths; B must then hold with those
/// edges removed.
pub fn disjoint_occurrence_census(
    config: &LatticeConfig,
    a: &EventSpec,
    b: &EventSpec,
) -> Result<EventCensus> {
    let inst = OracleInstance::new(config)?;
    let ea = as_path_event(&inst, a)?;
    let eb = as_path_event(&inst, b)?;
    let e = inst.edge_count();
    let mut census = EventCensus::empty(e);
    for open in 0..(1u64 << e) {
        let open = open as u32;
        // quick reject: A o B implies both A and B
        let comp_a = inst.component(open, ea.s, ea.allowed);
        if comp_a >> ea.t & 1 == 0 {
            continue;
        }
        let comp_b = inst.component(open, eb.s, eb.allowed);
        if comp_b >> eb.t & 1 == 0 {
            continue;
        }
        if disjointly_occurs(&inst, open, &ea, &eb) {
            census.counts_by_open[open.count_ones() as usize] += 1;
        }
    }
    Ok(census)
}

/// BK inequality, exact: P(A o B) <= P(A) P(B).
pub fn bk_check(
    config: &LatticeConfig,
    a: &EventSpec,
    b: &EventSpec,
) -> Result<(bool, BigRational, BigRational)> {
    let censuses = joint_census(config, &[a, b])?;
    let pa = censuses[0].probability_rational(config.p);
    let pb = censuses[1].probability_rational(config.p);
    let pab = disjoint_occurrence_census(config, a, b)?.probability_rational(config.p);
    let rhs = pa * pb;
    Ok((pab <= rhs, pab, rhs))
}

fn disjointly_occurs(inst: &OracleInstance, open: u32, a: &PathEvent, b: &PathEvent) -> bool {
    // DFS over simple paths from a.s to a.t using open allowed edges;
    // for each witness path, check B in the remaining edges.
    fn dfs(
        inst: &OracleInstance,
        open: u32,
        a: &PathEvent,
        b: &PathEvent,
        site: u32,
        visited: u64,
        used_edges: u32,
    ) -> bool {
        if site == a.t {
            let rest = open & !used_edges;
            let comp = inst.component(rest, b.s, b.allowed);
            return comp >> b.t & 1 == 1;
        }
        for &(ei, t) in &inst.adj[site as usize] {
            if open >> ei & 1 == 0 || a.allowed >> t & 1 == 0 || visited >> t & 1 == 1 {
                continue;
            }
            if dfs(inst, open, a, b, t, visited | 1 << t, used_edges | 1 << ei) {
                return true;
            }
        }
        false
    }
    if a.allowed >> a.s & 1 == 0 {
        return false;
    }
    dfs(inst, open, a, b, a.s, 1 << a.s, 0)
}

/// Convenience: the probability of reaching `target` on the 4-edge unit
/// square used throughout the documentation: p + (1-p) p^3 for the
/// neighbor across one edge.
pub fn unit_square_config(p: f64) -> LatticeConfig {
    LatticeConfig::new(2, 1, p, 1)
        .and_then(|c| c.with_window(vec![0, 0], vec![1, 1]))
        .expect("static config is valid")
}
