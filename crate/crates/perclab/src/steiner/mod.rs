//! Correlation-norm Steiner trees: enumerate topologies, optimize
//! Steiner-point positions under a convex gauge, return every minimal
//! tree up to the tie tolerance.

mod optimize;
mod topology;

pub use optimize::{optimize_positions, optimize_positions_from, OptimizeOptions, SteinerTree};
pub use topology::{enumerate_topologies, SteinerTopology, MAX_TERMINALS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::NormModel;
use crate::geometry::{dist, hausdorff_distance};

/// Relative tie tolerance: polytope gauges tie generically, so all trees
/// within this factor of the minimum are returned.
pub const TIE_RELATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SteinerSolution {
    /// Minimal trees (deduplicated, within tie tolerance of the minimum).
    pub trees: Vec<SteinerTree>,
    pub min_length: f64,
    /// Topologies whose optimization did not converge in budget.
    pub flagged_topologies: usize,
}

/// Solve for all correlation-norm Steiner trees spanning the origin and
/// `points`. Terminals are the origin followed by the given points.
pub fn solve_steiner(
    points: &[Vec<f64>],
    gauge: &NormModel,
    opts: OptimizeOptions,
) -> Result<SteinerSolution> {
    let d = gauge.d();
    if points.is_empty() {
        return Err(Error::Steiner("need at least one point besides the origin".into()));
    }
    let mut terminals = vec![vec![0.0; d]];
    terminals.extend(points.iter().cloned());
    for t in &terminals {
        if t.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: t.len() });
        }
    }
    for i in 0..terminals.len() {
        for j in (i + 1)..terminals.len() {
            if dist(&terminals[i], &terminals[j]) < 1e-12 {
                return Err(Error::Steiner(format!("terminals {i} and {j} coincide")));
            }
        }
    }
    let m = terminals.len();
    let catalog = enumerate_topologies(m)?;
    let mut candidates = Vec::with_capacity(catalog.len());
    let mut flagged = 0usize;

    #[cfg(feature = "parallel")]
    let optimized: Vec<Result<SteinerTree>> = {
        use rayon::prelude::*;
        catalog
            .par_iter()
            .map(|t| optimize_positions(t, &terminals, gauge, opts))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let optimized: Vec<Result<SteinerTree>> = catalog
        .iter()
        .map(|t| optimize_positions(t, &terminals, gauge, opts))
        .collect();

    for tree in optimized {
        let tree = tree?;
        if !tree.converged {
            flagged += 1;
        }
        candidates.push(tree);
    }
    if candidates.iter().all(|t| !t.converged) {
        return Err(Error::Steiner("no topology optimization converged".into()));
    }

    let min_length = candidates
        .iter()
        .filter(|t| t.converged)
        .map(|t| t.length)
        .fold(f64::INFINITY, f64::min);
    let tie = min_length * TIE_RELATIVE_TOL + 1e-12;
    let mut tied: Vec<SteinerTree> = candidates
        .into_iter()
        .filter(|t| t.converged && t.length <= min_length + tie)
        .collect();

    // deduplicate by Hausdorff distance between induced sets
    let dedup_eps = opts.tol.max(1e-7);
    let mut kept: Vec<SteinerTree> = Vec::new();
    tied.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    for tree in tied {
        let set = tree.induced_set();
        let duplicate = kept
            .iter()
            .any(|k| hausdorff_distance(&k.induced_set(), &set) < dedup_eps);
        if !duplicate {
            kept.push(tree);
        }
    }
    Ok(SteinerSolution { trees: kept, min_length, flagged_topologies: flagged })
}

pub const STEINER_VERSION: &str = "steiner/1";

#[derive(Serialize, Deserialize)]
struct SteinerFile {
    version: String,
    gauge_fingerprint: String,
    min_length: f64,
    trees: Vec<SteinerTreeRecord>,
}

#[derive(Serialize, Deserialize)]
struct SteinerTreeRecord {
    length: f64,
    topology_edges: Vec<(usize, usize)>,
    steiner_points: Vec<Vec<f64>>,
    /// The induced set in omega-set/1 form (parsed JSON object).
    set: serde_json::Value,
}

impl SteinerSolution {
    pub fn to_json(&self, gauge: &NormModel) -> String {
        let trees = self
            .trees
            .iter()
            .map(|t| SteinerTreeRecord {
                length: t.length,
                topology_edges: t.topology.edges.clone(),
                steiner_points: t.steiner_coords.clone(),
                set: serde_json::from_str(&t.induced_set().to_json()).expect("valid json"),
            })
            .collect();
        let file = SteinerFile {
            version: STEINER_VERSION.to_string(),
            gauge_fingerprint: gauge.fingerprint(),
            min_length: self.min_length,
            trees,
        };
        serde_json::to_string_pretty(&file).expect("steiner solution serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT3: f64 = 1.7320508075688772;

    fn euclid() -> NormModel {
        NormModel::euclidean(2)
    }

    #[test]
    fn two_terminals_is_the_segment() {
        let sol = solve_steiner(&[vec![3.0, 4.0]], &euclid(), OptimizeOptions::default()).unwrap();
        assert_eq!(sol.trees.len(), 1);
        assert_eq!(sol.trees[0].length, 5.0, "two-terminal length is exact");
        // under any gauge: length = gauge of the difference
        let l1 = NormModel::l1(2);
        let sol = solve_steiner(&[vec![3.0, 4.0]], &l1, OptimizeOptions::default()).unwrap();
        assert_eq!(sol.trees[0].length, 7.0);
    }

    #[test]
    fn equilateral_triangle_fermat_point() {
        // origin at a vertex; unit side
        let pts = vec![vec![1.0, 0.0], vec![0.5, SQRT3 / 2.0]];
        let sol = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        assert!(
            (sol.min_length - SQRT3).abs() < 1e-6,
            "fermat total {} vs sqrt(3)",
            sol.min_length
        );
        assert_eq!(sol.trees.len(), 1);
        let tree = &sol.trees[0];
        assert_eq!(tree.effective_steiner_points, 1);
        // steiner point at the centroid
        let c = [0.5, SQRT3 / 6.0];
        let s = &tree.steiner_coords[0];
        assert!(dist(s, &c) < 1e-5, "steiner point {s:?} vs centroid {c:?}");
    }

    #[test]
    fn unit_square_two_tied_trees() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let sol = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        assert!(
            (sol.min_length - (1.0 + SQRT3)).abs() < 1e-6,
            "square SMT length {} vs 1+sqrt(3)",
            sol.min_length
        );
        assert_eq!(sol.trees.len(), 2, "two full topologies tie by symmetry");
        for t in &sol.trees {
            assert_eq!(t.effective_steiner_points, 2);
            assert!(t.min_steiner_degree >= 3);
        }
    }

    #[test]
    fn collinear_terminals_collapse_the_steiner_point() {
        let pts = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let sol = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        assert!((sol.min_length - 2.0).abs() < 1e-9);
        for t in &sol.trees {
            assert_eq!(t.effective_steiner_points, 0, "steiner point must collapse");
        }
    }

    #[test]
    fn distinct_terminals_required() {
        assert!(solve_steiner(
            &[vec![1.0, 0.0], vec![1.0, 0.0]],
            &euclid(),
            OptimizeOptions::default()
        )
        .is_err());
        assert!(solve_steiner(&[vec![0.0, 0.0]], &euclid(), OptimizeOptions::default()).is_err());
        assert!(solve_steiner(&[], &euclid(), OptimizeOptions::default()).is_err());
    }

    #[test]
    fn scaling_equivariance_power_of_two_exact() {
        let pts = vec![vec![1.0, 0.0], vec![0.5, SQRT3 / 2.0]];
        let scaled: Vec<Vec<f64>> =
            pts.iter().map(|p| p.iter().map(|x| 2.0 * x).collect()).collect();
        let a = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        let b = solve_steiner(&scaled, &euclid(), OptimizeOptions::default()).unwrap();
        assert_eq!(
            (2.0 * a.min_length).to_bits(),
            b.min_length.to_bits(),
            "doubling terminals doubles the length bit-exactly"
        );
    }

    #[test]
    fn scaling_equivariance_general_factor() {
        let pts = vec![vec![1.0, 0.0], vec![0.2, 0.9]];
        let t = 3.0;
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| t * x).collect()).collect();
        let a = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        let b = solve_steiner(&scaled, &euclid(), OptimizeOptions::default()).unwrap();
        assert!((t * a.min_length - b.min_length).abs() < 1e-7);
    }

    #[test]
    fn symmetry_equivariance_maps_solution_set() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let base = solve_steiner(&pts, &euclid(), OptimizeOptions::default()).unwrap();
        // reflect through the diagonal: (x, y) -> (y, x) fixes the square
        let reflected: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[1], p[0]]).collect();
        let refl = solve_steiner(&reflected, &euclid(), OptimizeOptions::default()).unwrap();
        assert_eq!(base.trees.len(), refl.trees.len());
        for t in &base.trees {
            let imaged: Vec<crate::geometry::Segment> = t
                .segments
                .iter()
                .map(|s| crate::geometry::Segment::new(vec![s.a[1], s.a[0]], vec![s.b[1], s.b[0]]))
                .collect();
            let imaged_set = crate::geometry::PolygonalSet::unchecked(2, imaged);
            let matched = refl
                .trees
                .iter()
                .any(|r| hausdorff_distance(&r.induced_set(), &imaged_set) < 1e-6);
            assert!(matched, "reflected tree not found in reflected solution");
        }
    }

    #[test]
    fn degree_bound_over_random_instances() {
        let mut rng = crate::rng::SeqRng::new(31);
        for _ in 0..8 {
            let k = 2 + (rng.below(3) as usize); // 2..=4 extra points
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| vec![rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)])
                .collect();
            let sol = match solve_steiner(&pts, &euclid(), OptimizeOptions::default()) {
                Ok(s) => s,
                Err(_) => continue, // coincident random points
            };
            let m = k + 1;
            for t in &sol.trees {
                assert!(t.effective_steiner_points <= m - 2);
                assert!(t.min_steiner_degree >= 3, "degree {} in {t:?}", t.min_steiner_degree);
            }
        }
    }

    #[test]
    fn restarts_agree_on_convex_objective() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let terminals: Vec<Vec<f64>> = std::iter::once(vec![0.0, 0.0]).chain(pts).collect();
        let catalog = enumerate_topologies(4).unwrap();
        let full = catalog.iter().find(|t| t.is_full()).unwrap();
        let opts = OptimizeOptions::default();
        let mut rng = crate::rng::SeqRng::new(77);
        let mut lengths = Vec::new();
        for _ in 0..10 {
            let start: Vec<Vec<f64>> = (0..full.steiner_points)
                .map(|_| vec![rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)])
                .collect();
            let tree = optimize_positions_from(full, &terminals, &euclid(), opts, &start).unwrap();
            lengths.push(tree.length);
        }
        let min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max - min <= 10.0 * opts.tol, "restart spread {} too wide", max - min);
    }

    #[test]
    fn weighted_l2_reduces_to_scaled_euclidean() {
        let gauge = NormModel::weighted_l2(vec![4.0, 1.0]).unwrap();
        // two terminals: exact length = sqrt(4 dx^2 + dy^2)
        let sol = solve_steiner(&[vec![1.0, 1.0]], &gauge, OptimizeOptions::default()).unwrap();
        assert!((sol.min_length - 5.0f64.sqrt()).abs() < 1e-12);
        // triangle under weighted gauge still solves cleanly
        let pts = vec![vec![1.0, 0.0], vec![0.5, 0.9]];
        let sol = solve_steiner(&pts, &gauge, OptimizeOptions::default()).unwrap();
        assert!(sol.trees.iter().all(|t| t.converged));
    }

    #[test]
    fn solution_serializes() {
        let sol = solve_steiner(&[vec![1.0, 0.0]], &euclid(), OptimizeOptions::default()).unwrap();
        let text = sol.to_json(&euclid());
        assert!(text.contains(STEINER_VERSION));
        assert!(text.contains("omega-set/1"));
    }
}
