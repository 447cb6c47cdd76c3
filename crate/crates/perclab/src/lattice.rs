//! Finite pieces of the rescaled lattice (1/n)Z^d.
//!
//! All site coordinates are stored as integers (unscaled); a site `x`
//! represents the point `x / n` of the rescaled lattice.  A region is a
//! rectangular window of sites; the default region for a config is the
//! centered box `[-R, R]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::mix64;

/// Conservative subcriticality bounds per dimension.
/// d = 2 is exactly known; higher d uses a deliberately safe default.
pub fn p_c_bound(d: usize) -> f64 {
    if d == 2 {
        0.5
    } else {
        0.2
    }
}

/// Round each coordinate of `u` to the nearest multiple of 1/n,
/// ties toward +infinity. Returns rescaled coordinates.
pub fn round_to_lattice(u: &[f64], n: u32) -> Vec<f64> {
    round_to_site(u, n)
        .into_iter()
        .map(|c| c as f64 / n as f64)
        .collect()
}

/// Integer (unscaled) coordinates of the rounded point.
pub fn round_to_site(u: &[f64], n: u32) -> Vec<i64> {
    u.iter().map(|&x| (x * n as f64 + 0.5).floor() as i64).collect()
}

/// Bernoulli bond percolation parameters on a finite region of (1/n)Z^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub d: usize,
    /// Lattice spacing is 1/n.
    pub n: u32,
    /// Bond probability.
    pub p: f64,
    /// Sites with all integer coordinates in [-box_radius, box_radius] are in play.
    pub box_radius: i32,
    /// Optional explicit rectangular window (integer coords, inclusive),
    /// overriding the centered box. Used for small oracle instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(Vec<i64>, Vec<i64>)>,
    /// Override for the subcriticality gate; None uses `p_c_bound(d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c_override: Option<f64>,
}

impl LatticeConfig {
    pub fn new(d: usize, n: u32, p: f64, box_radius: i32) -> Result<Self> {
        let cfg = LatticeConfig { d, n, p, box_radius, window: None, p_c_override: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window(mut self, lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != self.d || hi.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: lo.len().max(hi.len()) });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidConfig("window has lo > hi".into()));
        }
        self.window = Some((lo, hi));
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidConfig(format!("d = {} but d >= 2 is required", self.d)));
        }
        if self.n < 1 {
            return Err(Error::InvalidConfig("n >= 1 required".into()));
        }
        if !(0.0..=1.0).contains(&self.p) || self.p.is_nan() {
            return Err(Error::InvalidConfig(format!("p = {} outside [0, 1]", self.p)));
        }
        if self.box_radius < 1 {
            return Err(Error::InvalidConfig("box_radius >= 1 required".into()));
        }
        Ok(())
    }

    pub fn p_c(&self) -> f64 {
        self.p_c_override.unwrap_or_else(|| p_c_bound(self.d))
    }

    /// Sampling constructors must run strictly below the configured p_c bound.
    /// Exact-oracle calls carry no such gate.
    pub fn require_subcritical(&self) -> Result<()> {
        if self.p >= self.p_c() {
            return Err(Error::Supercritical { p: self.p, bound: self.p_c(), d: self.d });
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        match &self.window {
            Some((lo, hi)) => Region::new(lo.clone(), hi.clone()),
            None => {
                let r = self.box_radius as i64;
                Region::new(vec![-r; self.d], vec![r; self.d])
            }
        }
    }
}

/// Canonical edge: from `site` one step in +axis direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub site: u32,
    pub axis: u8,
}

/// A rectangular window of lattice sites with mixed-radix site indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    extent: Vec<i64>,
    strides: Vec<u64>,
    site_count: u64,
}

impl Region {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        let extent: Vec<i64> = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).collect();
        let mut strides = vec![0u64; lo.len()];
        let mut acc = 1u64;
        for (s, e) in strides.iter_mut().zip(&extent) {
            *s = acc;
            acc = acc.checked_mul(*e as u64).expect("region too large");
        }
        Region { lo, hi, extent, strides, site_count: acc }
    }

    pub fn d(&self) -> usize {
        self.lo.len()
    }

    pub fn site_count(&self) -> u64 {
        self.site_count
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.d()
            && coords.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (l, h))| c >= l && c <= h)
    }

    pub fn site_index(&self, coords: &[i64]) -> Option<u32> {
        if !self.contains(coords) {
            return None;
        }
        let mut idx = 0u64;
        for i in 0..self.d() {
            idx += (coords[i] - self.lo[i]) as u64 * self.strides[i];
        }
        Some(idx as u32)
    }

    pub fn coords(&self, site: u32) -> Vec<i64> {
        let mut buf = vec![0i64; self.d()];
        self.coords_into(site, &mut buf);
        buf
    }

    pub fn coords_into(&self, site: u32, buf: &mut [i64]) {
        let mut rem = site as u64;
        for i in 0..self.d() {
            buf[i] = self.lo[i] + (rem % self.extent[i] as u64) as i64;
            rem /= self.extent[i] as u64;
        }
    }

    /// Neighbor one step along `axis` in direction `dir` (+1/-1), if in region.
    pub fn neighbor(&self, site: u32, axis: usize, dir: i8) -> Option<u32> {
        let s = site as u64;
        let pos = (s / self.strides[axis]) % self.extent[axis] as u64;
        if dir > 0 {
            if (pos as i64) + 1 >= self.extent[axis] {
                None
            } else {
                Some((s + self.strides[axis]) as u32)
            }
        } else if pos == 0 {
            None
        } else {
            Some((s - self.strides[axis]) as u32)
        }
    }

    /// True if the site has some coordinate at the region bound.
    pub fn on_boundary(&self, site: u32) -> bool {
        let mut rem = site as u64;
        for i in 0..self.d() {
            let pos = (rem % self.extent[i] as u64) as i64;
            if pos == 0 || pos == self.extent[i] - 1 {
                return true;
            }
            rem /= self.extent[i] as u64;
        }
        false
    }

    /// All edges of the region in a fixed deterministic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for site in 0..self.site_count as u32 {
            for axis in 0..self.d() {
                if self.neighbor(site, axis, 1).is_some() {
                    out.push(Edge { site, axis: axis as u8 });
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let mut total = 0u64;
        for axis in 0..self.d() {
            let mut prod = 1u64;
            for i in 0..self.d() {
                let e = self.extent[i] as u64;
                prod *= if i == axis { e - 1 } else { e };
            }
            total += prod;
        }
        total as usize
    }

    /// Counter key for the RNG: a hash of the canonical (unscaled)
    /// endpoint coordinates and axis. Independent of region placement,
    /// so nested regions agree on shared edges.
    pub fn edge_key(&self, edge: Edge) -> u64 {
        let mut buf = [0i64; 8];
        let d = self.d();
        self.coords_into(edge.site, &mut buf[..d]);
        // chain with a mix between every absorbed word: small integers
        // (axes, coordinates) must never cancel one another
        let mut h = mix64(0xedce_caf0_0d15_ea5e ^ (edge.axis as u64 + 1));
        for &c in &buf[..d] {
            h = mix64(h ^ (c as u64));
        }
        h
    }

    /// Serialize an edge as "x1,y1[,z1..]-x2,y2[,z2..]" in integer coordinates.
    pub fn edge_id(&self, edge: Edge) -> String {
        let a = self.coords(edge.site);
        let mut b = a.clone();
        b[edge.axis as usize] += 1;
        let fmt = |v: &[i64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        format!("{}-{}", fmt(&a), fmt(&b))
    }

    pub fn origin_site(&self) -> Option<u32> {
        self.site_index(&vec![0; self.d()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_examples() {
        assert_eq!(round_to_lattice(&[0.0, 0.0], 7), vec![0.0, 0.0]);
        assert_eq!(round_to_lattice(&[0.26, -0.9], 2), vec![0.5, -1.0]);
        // ties toward +inf per coordinate
        assert_eq!(round_to_lattice(&[0.25, 0.25], 2), vec![0.5, 0.5]);
        assert_eq!(round_to_lattice(&[-0.25], 2), vec![0.0]);
    }

    #[test]
    fn rounding_error_bound() {
        let mut rng = crate::rng::SeqRng::new(3);
        for _ in 0..1000 {
            let n = 1 + (rng.below(9)) as u32;
            let u: Vec<f64> = (0..3).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let r = round_to_lattice(&u, n);
            for (a, b) in u.iter().zip(&r) {
                assert!((a - b).abs() <= 0.5 / n as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn box_region_counts() {
        // d=2, R=1: 3x3 sites, 12 edges
        let cfg = LatticeConfig::new(2, 1, 0.3, 1).unwrap();
        let reg = cfg.region();
        assert_eq!(reg.site_count(), 9);
        assert_eq!(reg.edge_count(), 12);
        assert_eq!(reg.edges().len(), 12);
        // unit square window: 4 edges
        let cfg = LatticeConfig::new(2, 1, 0.3, 1)
            .unwrap()
            .with_window(vec![0, 0], vec![1, 1])
            .unwrap();
        assert_eq!(cfg.region().edge_count(), 4);
    }

    #[test]
    fn neighbors_and_boundary() {
        let reg = Region::new(vec![-1, -1], vec![1, 1]);
        let origin = reg.origin_site().unwrap();
        assert!(!reg.on_boundary(origin));
        let right = reg.neighbor(origin, 0, 1).unwrap();
        assert_eq!(reg.coords(right), vec![1, 0]);
        assert!(reg.on_boundary(right));
        assert_eq!(reg.neighbor(right, 0, 1), None);
    }

    #[test]
    fn edge_ids_and_keys_are_canonical() {
        let reg = Region::new(vec![0, 0], vec![1, 1]);
        let edges = reg.edges();
        let ids: Vec<String> = edges.iter().map(|&e| reg.edge_id(e)).collect();
        assert!(ids.contains(&"0,0-1,0".to_string()));
        assert!(ids.contains(&"0,0-0,1".to_string()));
        // keys agree across differently-placed regions
        let big = Region::new(vec![-2, -2], vec![2, 2]);
        for &e in &edges {
            let coords = reg.coords(e.site);
            let be = Edge { site: big.site_index(&coords).unwrap(), axis: e.axis };
            assert_eq!(reg.edge_key(e), big.edge_key(be));
        }
    }

    #[test]
    fn edge_keys_are_pairwise_distinct() {
        for region in [Region::new(vec![-2, -2], vec![2, 2]), Region::new(vec![-1, -1, -1], vec![1, 1, 1])] {
            let edges = region.edges();
            let mut keys: Vec<u64> = edges.iter().map(|&e| region.edge_key(e)).collect();
            keys.sort_unstable();
            let before = keys.len();
            keys.dedup();
            assert_eq!(keys.len(), before, "edge key collision in {region:?}");
        }
    }

    #[test]
    fn config_gates() {
        assert!(LatticeConfig::new(1, 1, 0.3, 1).is_err());
        assert!(LatticeConfig::new(2, 1, 1.2, 1).is_err());
        let cfg = LatticeConfig::new(2, 1, 0.6, 1).unwrap();
        assert!(cfg.require_subcritical().is_err());
        let cfg = LatticeConfig::new(3, 1, 0.3, 1).unwrap();
        assert!(cfg.require_subcritical().is_err()); // d>=3 bound is 0.2
        let mut cfg = LatticeConfig::new(3, 1, 0.3, 1).unwrap();
        cfg.p_c_override = Some(0.35);
        assert!(cfg.require_subcritical().is_ok());
    }
}
