//! Percolation events on a finite region.
//!
//! Cluster events (point containment, Hausdorff balls) are functions of
//! the origin cluster; connection events (corridor connections, region
//! crossings) are functions of the whole configuration and are evaluated
//! by growing components from their own sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dist_point_poly, hausdorff_distance, PointCloud, PolygonalSet,
};
use crate::lattice::{round_to_site, LatticeConfig, Region};
use crate::percolation::ClusterSampler;
use crate::rng::ReplicateStream;

/// Event specification in rescaled (real) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum EventSpec {
    /// u_n lies in the origin cluster.
    PointInCluster { target: Vec<f64> },
    /// Every a^i_n lies in the origin cluster.
    PointsInCluster { targets: Vec<Vec<f64>> },
    /// The origin cluster is within Hausdorff distance < epsilon of the set.
    HausdorffBall { set: PolygonalSet, epsilon: f64 },
    /// a_n and b_n are joined by an open path whose vertices stay within
    /// distance <= epsilon of the corridor set.
    CorridorConnection { a: Vec<f64>, b: Vec<f64>, corridor: PolygonalSet, epsilon: f64 },
    /// Some open path runs from outside B_{eps/2}(set) into B_{eps/4}(set).
    RegionCrossing { set: PolygonalSet, epsilon: f64 },
}

impl EventSpec {
    /// Increasing events are preserved by opening more edges.
    pub fn is_increasing(&self) -> bool {
        !matches!(self, EventSpec::HausdorffBall { .. })
    }

    pub fn label(&self) -> String {
        match self {
            EventSpec::PointInCluster { target } => format!("point-in-cluster{target:?}"),
            EventSpec::PointsInCluster { targets } => {
                format!("points-in-cluster[{}]", targets.len())
            }
            EventSpec::HausdorffBall { epsilon, .. } => format!("hausdorff-ball(eps={epsilon})"),
            EventSpec::CorridorConnection { epsilon, .. } => {
                format!("corridor-connection(eps={epsilon})")
            }
            EventSpec::RegionCrossing { epsilon, .. } => format!("region-crossing(eps={epsilon})"),
        }
    }
}

/// Serializable description of an event for manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventDescription {
    pub kind: String,
    pub detail: String,
}

impl From<&EventSpec> for EventDescription {
    fn from(e: &EventSpec) -> Self {
        let kind = match e {
            EventSpec::PointInCluster { .. } => "point-in-cluster",
            EventSpec::PointsInCluster { .. } => "points-in-cluster",
            EventSpec::HausdorffBall { .. } => "hausdorff-ball",
            EventSpec::CorridorConnection { .. } => "corridor-connection",
            EventSpec::RegionCrossing { .. } => "region-crossing",
        };
        EventDescription { kind: kind.into(), detail: e.label() }
    }
}

pub struct EventOutcome {
    pub hit: bool,
    pub touched_boundary: bool,
}

/// Precomputed evaluator for one (config, event) pair, driving a
/// `ClusterSampler` replicate by replicate.
pub struct EventEvaluator {
    region: Region,
    n: u32,
    kind: EvalKind,
    coord_buf: Vec<f64>,
}

enum EvalKind {
    Points { sites: Vec<u32> },
    Hausdorff { set: PolygonalSet, epsilon: f64 },
    Corridor { a: u32, b: u32, allowed: Vec<bool> },
    Crossing { sources: Vec<u32>, target: Vec<bool> },
}

fn site_of(region: &Region, u: &[f64], n: u32) -> Result<u32> {
    let coords = round_to_site(u, n);
    region
        .site_index(&coords)
        .ok_or_else(|| Error::TargetOutsideBox(u.to_vec()))
}

impl EventEvaluator {
    pub fn new(config: &LatticeConfig, spec: &EventSpec) -> Result<Self> {
        let region = config.region();
        let n = config.n;
        let d = config.d;
        let scale = n as f64;
        let kind = match spec {
            EventSpec::PointInCluster { target } => {
                EvalKind::Points { sites: vec![site_of(&region, target, n)?] }
            }
            EventSpec::PointsInCluster { targets } => {
                let sites = targets
                    .iter()
                    .map(|t| site_of(&region, t, n))
                    .collect::<Result<Vec<_>>>()?;
                EvalKind::Points { sites }
            }
            EventSpec::HausdorffBall { set, epsilon } => {
                if *epsilon <= 0.0 {
                    return Err(Error::InvalidConfig("epsilon must be positive".into()));
                }
                if set.d() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: set.d() });
                }
                EvalKind::Hausdorff { set: set.clone(), epsilon: *epsilon }
            }
            EventSpec::CorridorConnection { a, b, corridor, epsilon } => {
                if *epsilon <= 0.0 {
                    return Err(Error::InvalidConfig("epsilon must be positive".into()));
                }
                let a = site_of(&region, a, n)?;
                let b = site_of(&region, b, n)?;
                let mut allowed = vec![false; region.site_count() as usize];
                let mut buf = vec![0i64; d];
                let mut x = vec![0.0; d];
                for s in 0..region.site_count() as u32 {
                    region.coords_into(s, &mut buf);
                    for i in 0..d {
                        x[i] = buf[i] as f64 / scale;
                    }
                    // closed corridor: vertices at distance <= epsilon
                    allowed[s as usize] = dist_point_poly(&x, corridor) <= *epsilon;
                }
                if !allowed[a as usize] || !allowed[b as usize] {
                    return Err(Error::InvalidConfig(
                        "corridor endpoints fall outside their own corridor".into(),
                    ));
                }
                EvalKind::Corridor { a, b, allowed }
            }
            EventSpec::RegionCrossing { set, epsilon } => {
                if *epsilon <= 0.0 {
                    return Err(Error::InvalidConfig("epsilon must be positive".into()));
                }
                let mut sources = Vec::new();
                let mut target = vec![false; region.site_count() as usize];
                let mut buf = vec![0i64; d];
                let mut x = vec![0.0; d];
                for s in 0..region.site_count() as u32 {
                    region.coords_into(s, &mut buf);
                    for i in 0..d {
                        x[i] = buf[i] as f64 / scale;
                    }
                    let dist = dist_point_poly(&x, set);
                    if dist >= epsilon / 2.0 {
                        sources.push(s);
                    }
                    target[s as usize] = dist < epsilon / 4.0;
                }
                EvalKind::Crossing { sources, target }
            }
        };
        Ok(EventEvaluator { region, n, kind, coord_buf: Vec::new() })
    }

    /// Evaluate the event for one replicate.
    pub fn evaluate(
        &mut self,
        sampler: &mut ClusterSampler,
        stream: &ReplicateStream,
    ) -> EventOutcome {
        match &self.kind {
            EvalKind::Points { sites } => {
                sampler.grow(stream);
                let hit = sites.iter().all(|&s| sampler.contains(s));
                EventOutcome { hit, touched_boundary: sampler.touches_boundary() }
            }
            EvalKind::Hausdorff { set, epsilon } => {
                sampler.grow(stream);
                let d = self.region.d();
                let scale = self.n as f64;
                self.coord_buf.clear();
                let mut buf = vec![0i64; d];
                let mut inside = true;
                for &s in sampler.sites() {
                    self.region.coords_into(s, &mut buf);
                    let start = self.coord_buf.len();
                    for i in 0..d {
                        self.coord_buf.push(buf[i] as f64 / scale);
                    }
                    // directed cluster -> set must stay strictly below epsilon
                    if dist_point_poly(&self.coord_buf[start..start + d], set) >= *epsilon {
                        inside = false;
                        break;
                    }
                }
                let hit = inside && {
                    let cloud = PointCloud::new(d, self.coord_buf.clone())
                        .expect("cluster is nonempty");
                    hausdorff_distance(set, &cloud) < *epsilon
                };
                EventOutcome { hit, touched_boundary: sampler.touches_boundary() }
            }
            EvalKind::Corridor { a, b, allowed } => {
                sampler.grow_from(stream, &[*a], Some(allowed));
                EventOutcome {
                    hit: sampler.contains(*b),
                    touched_boundary: sampler.touches_boundary(),
                }
            }
            EvalKind::Crossing { sources, target } => {
                sampler.grow_from(stream, sources, None);
                let hit = sampler.sites().iter().any(|&s| target[s as usize]);
                EventOutcome { hit, touched_boundary: sampler.touches_boundary() }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Segment;

    fn cfg(p: f64, r: i32, n: u32) -> LatticeConfig {
        LatticeConfig::new(2, n, p, r).unwrap()
    }

    #[test]
    fn point_event_validates_targets() {
        let config = cfg(0.3, 2, 1);
        let ev = EventSpec::PointInCluster { target: vec![5.0, 0.0] };
        assert!(EventEvaluator::new(&config, &ev).is_err());
        let ev = EventSpec::PointInCluster { target: vec![1.2, 0.4] };
        assert!(EventEvaluator::new(&config, &ev).is_ok());
    }

    #[test]
    fn origin_is_always_hit() {
        let config = cfg(0.2, 2, 1);
        let ev = EventSpec::PointInCluster { target: vec![0.0, 0.0] };
        let mut eval = EventEvaluator::new(&config, &ev).unwrap();
        let mut sampler = ClusterSampler::new(config).unwrap();
        for rep in 0..50 {
            let stream = ReplicateStream::new(1, rep);
            assert!(eval.evaluate(&mut sampler, &stream).hit);
        }
    }

    #[test]
    fn corridor_restricts_paths() {
        // p = 1 with the gate disabled: everything is open, but a
        // zero-width corridor only admits the straight path.
        let mut config = cfg(1.0, 3, 1);
        config.p_c_override = Some(1.5);
        let corridor =
            PolygonalSet::new(2, vec![Segment::new(vec![0.0, 0.0], vec![2.0, 0.0])]).unwrap();
        let ev = EventSpec::CorridorConnection {
            a: vec![0.0, 0.0],
            b: vec![2.0, 0.0],
            corridor: corridor.clone(),
            epsilon: 0.2,
        };
        let mut eval = EventEvaluator::new(&config, &ev).unwrap();
        let mut sampler = ClusterSampler::new(config.clone()).unwrap();
        let stream = ReplicateStream::new(3, 0);
        assert!(eval.evaluate(&mut sampler, &stream).hit);
        // with p = 0 nothing connects
        let config0 = cfg(0.0, 3, 1);
        let ev0 = EventSpec::CorridorConnection {
            a: vec![0.0, 0.0],
            b: vec![2.0, 0.0],
            corridor,
            epsilon: 0.2,
        };
        let mut eval0 = EventEvaluator::new(&config0, &ev0).unwrap();
        let mut sampler0 = ClusterSampler::new(config0).unwrap();
        assert!(!eval0.evaluate(&mut sampler0, &stream).hit);
    }

    #[test]
    fn hausdorff_ball_is_not_increasing() {
        let ev = EventSpec::HausdorffBall {
            set: PolygonalSet::origin_point(2),
            epsilon: 0.5,
        };
        assert!(!ev.is_increasing());
        assert!(EventSpec::PointInCluster { target: vec![1.0, 0.0] }.is_increasing());
    }

    #[test]
    fn hausdorff_ball_around_origin() {
        // p = 0: the cluster is exactly {0}, delta = 0 < any epsilon
        let config = cfg(0.0, 2, 2);
        let ev = EventSpec::HausdorffBall { set: PolygonalSet::origin_point(2), epsilon: 0.25 };
        let mut eval = EventEvaluator::new(&config, &ev).unwrap();
        let mut sampler = ClusterSampler::new(config).unwrap();
        let stream = ReplicateStream::new(5, 0);
        assert!(eval.evaluate(&mut sampler, &stream).hit);
    }
}
