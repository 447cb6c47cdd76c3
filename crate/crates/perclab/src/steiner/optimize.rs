//! Steiner-point placement for a fixed topology.
//!
//! The objective sum_edges N(x_u - x_v) is convex in the Steiner
//! coordinates, so any descent that converges is globally correct for
//! the topology. Subgradient descent with diminishing steps from the
//! terminal centroid does the coarse work; smooth gauges are then
//! polished by cyclic Weiszfeld solves of the local Fermat problems,
//! and every gauge gets a final compass sweep with geometrically
//! shrinking steps.

use crate::error::{Error, Result};
use crate::gauge::NormModel;
use crate::geometry::{dist, PolygonalSet, Segment};

use super::topology::SteinerTopology;

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// First-order tolerance on the objective.
    pub tol: f64,
    /// Overall budget in objective/subgradient evaluations.
    pub max_iters: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { tol: 1e-9, max_iters: 100_000 }
    }
}

/// An optimized tree for one topology.
#[derive(Debug, Clone)]
pub struct SteinerTree {
    pub topology: SteinerTopology,
    /// Terminal coordinates in node order 0..m.
    pub terminals: Vec<Vec<f64>>,
    /// Steiner coordinates in node order m..m+s.
    pub steiner_coords: Vec<Vec<f64>>,
    /// Geometric edges after collapsing coincident nodes.
    pub segments: Vec<Segment>,
    /// Steiner points surviving the collapse.
    pub effective_steiner_points: usize,
    /// Minimum degree among surviving Steiner points (3 at clean optima).
    pub min_steiner_degree: usize,
    pub length: f64,
    pub converged: bool,
}

impl SteinerTree {
    /// The tree as a polygonal set (validation skipped: tied optima under
    /// polytope gauges may touch degenerately).
    pub fn induced_set(&self) -> PolygonalSet {
        PolygonalSet::unchecked(self.terminals[0].len(), self.segments.clone())
    }
}

pub fn optimize_positions(
    topology: &SteinerTopology,
    terminals: &[Vec<f64>],
    gauge: &NormModel,
    opts: OptimizeOptions,
) -> Result<SteinerTree> {
    let d = gauge.d();
    let centroid: Vec<f64> = (0..d)
        .map(|i| terminals.iter().map(|t| t[i]).sum::<f64>() / terminals.len() as f64)
        .collect();
    let start = vec![centroid; topology.steiner_points];
    optimize_positions_from(topology, terminals, gauge, opts, &start)
}

pub fn optimize_positions_from(
    topology: &SteinerTopology,
    terminals: &[Vec<f64>],
    gauge: &NormModel,
    opts: OptimizeOptions,
    start: &[Vec<f64>],
) -> Result<SteinerTree> {
    let m = topology.terminals;
    let s = topology.steiner_points;
    let d = gauge.d();
    if terminals.len() != m {
        return Err(Error::Steiner(format!("topology wants {m} terminals, got {}", terminals.len())));
    }
    if start.len() != s {
        return Err(Error::Steiner("start positions must match steiner count".into()));
    }
    for t in terminals.iter().chain(start.iter()) {
        if t.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: t.len() });
        }
    }

    // weighted-l2 reduces to euclidean by rescaling coordinates
    if let Some(weights) = gauge.weighted_l2_weights() {
        let scale: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let fwd = |p: &Vec<f64>| -> Vec<f64> {
            p.iter().zip(&scale).map(|(x, s)| x * s).collect()
        };
        let terminals_t: Vec<Vec<f64>> = terminals.iter().map(fwd).collect();
        let start_t: Vec<Vec<f64>> = start.iter().map(fwd).collect();
        let euclid = NormModel::euclidean(d);
        let solved = optimize_positions_from(topology, &terminals_t, &euclid, opts, &start_t)?;
        let steiner_back: Vec<Vec<f64>> = solved
            .steiner_coords
            .iter()
            .map(|p| p.iter().zip(&scale).map(|(x, s)| x / s).collect())
            .collect();
        let diam = bounding_diameter(terminals).max(1e-12);
        return Ok(assemble(
            topology,
            terminals,
            steiner_back,
            gauge,
            opts.tol,
            diam,
            solved.converged,
        ));
    }

    let mut x: Vec<f64> = start.iter().flat_map(|p| p.iter().copied()).collect();
    let mut budget = opts.max_iters as i64;
    let diam = bounding_diameter(terminals).max(1e-12);

    let pos = |x: &[f64], node: usize, terminals: &[Vec<f64>]| -> Vec<f64> {
        if node < m {
            terminals[node].clone()
        } else {
            let o = (node - m) * d;
            x[o..o + d].to_vec()
        }
    };
    let objective = |x: &[f64]| -> f64 {
        let mut total = 0.0;
        let mut w = vec![0.0; d];
        for &(a, b) in &topology.edges {
            let pa = pos(x, a, terminals);
            let pb = pos(x, b, terminals);
            for i in 0..d {
                w[i] = pa[i] - pb[i];
            }
            total += gauge.evaluate(&w);
        }
        total
    };

    let mut converged = true;
    if s > 0 {
        // phase 1: subgradient descent with diminishing steps
        let step0 = 0.25 * diam;
        let mut best = x.clone();
        let mut best_obj = objective(&x);
        let mut stall = 0usize;
        let sub_iters = (opts.max_iters / 10).clamp(200, 20_000);
        let mut grad = vec![0.0; s * d];
        let mut w = vec![0.0; d];
        for k in 1..=sub_iters {
            budget -= 1;
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &(a, b) in &topology.edges {
                let pa = pos(&x, a, terminals);
                let pb = pos(&x, b, terminals);
                for i in 0..d {
                    w[i] = pa[i] - pb[i];
                }
                let g = gauge.subgradient(&w);
                if a >= m {
                    let o = (a - m) * d;
                    for i in 0..d {
                        grad[o + i] += g[i];
                    }
                }
                if b >= m {
                    let o = (b - m) * d;
                    for i in 0..d {
                        grad[o + i] -= g[i];
                    }
                }
            }
            let step = step0 / (k as f64).sqrt();
            for (xi, gi) in x.iter_mut().zip(&grad) {
                *xi -= step * gi;
            }
            let obj = objective(&x);
            if obj < best_obj - 1e-15 {
                best_obj = obj;
                best = x.clone();
                stall = 0;
            } else {
                stall += 1;
                if stall > 300 {
                    break;
                }
            }
        }
        x = best;

        // phase 2: cyclic Weiszfeld polish (euclidean; weighted-l2 was
        // reduced to euclidean above)
        if gauge.is_euclidean() {
            let mut prev = objective(&x);
            for _ in 0..400 {
                budget -= 1;
                for node in m..m + s {
                    let neighbors: Vec<Vec<f64>> = topology
                        .edges
                        .iter()
                        .filter_map(|&(a, b)| {
                            if a == node {
                                Some(pos(&x, b, terminals))
                            } else if b == node {
                                Some(pos(&x, a, terminals))
                            } else {
                                None
                            }
                        })
                        .collect();
                    let o = (node - m) * d;
                    let solved = fermat_point(gauge, &neighbors, &x[o..o + d]);
                    x[o..o + d].copy_from_slice(&solved);
                }
                let obj = objective(&x);
                if prev - obj < opts.tol * 1e-3 {
                    break;
                }
                prev = obj;
            }
        }

        // phase 3: compass sweeps with shrinking steps, every gauge
        let dirs = compass_directions(d);
        let mut h = 0.25 * diam;
        let h_min = (opts.tol * 1e-3).max(1e-13) * diam;
        let mut cur = objective(&x);
        while h > h_min && budget > 0 {
            let mut improved = false;
            for node in 0..s {
                for dir in &dirs {
                    budget -= 1;
                    let mut cand = x.clone();
                    for i in 0..d {
                        cand[node * d + i] += h * dir[i];
                    }
                    let obj = objective(&cand);
                    if obj < cur - 1e-15 {
                        x = cand;
                        cur = obj;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        converged = budget > 0;
    }

    let steiner_coords: Vec<Vec<f64>> =
        (0..s).map(|i| x[i * d..(i + 1) * d].to_vec()).collect();
    Ok(assemble(topology, terminals, steiner_coords, gauge, opts.tol, diam, converged))
}

fn bounding_diameter(points: &[Vec<f64>]) -> f64 {
    let d = points[0].len();
    let mut span2 = 0.0;
    for i in 0..d {
        let lo = points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
        span2 += (hi - lo) * (hi - lo);
    }
    span2.sqrt()
}

fn compass_directions(d: usize) -> Vec<Vec<f64>> {
    // all sign patterns over {-1, 0, 1}^d except zero
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 1..total {
        let mut c = code;
        let mut v = vec![0.0; d];
        for item in v.iter_mut() {
            *item = match c % 3 {
                0 => 0.0,
                1 => 1.0,
                _ => -1.0,
            };
            c /= 3;
        }
        if v.iter().any(|&x| x != 0.0) {
            out.push(v);
        }
    }
    out
}

/// Local Fermat point of `neighbors` under a smooth gauge, warm-started
/// at `x0`. Euclidean (and transformed weighted-l2) use Weiszfeld with
/// the standard vertex-optimality check.
fn fermat_point(gauge: &NormModel, neighbors: &[Vec<f64>], x0: &[f64]) -> Vec<f64> {
    let d = x0.len();
    // vertex check: the optimum sits at neighbor y iff the pull of the
    // others has gauge-dual norm <= 1; for the euclidean case the dual
    // norm is euclidean
    for (j, y) in neighbors.iter().enumerate() {
        let mut pull = vec![0.0; d];
        let mut singular = false;
        for (k, z) in neighbors.iter().enumerate() {
            if k == j {
                continue;
            }
            let w: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
            let n = gauge.evaluate(&w);
            if n < 1e-14 {
                singular = true;
                break;
            }
            let g = gauge.subgradient(&w);
            for i in 0..d {
                pull[i] += g[i];
            }
        }
        if !singular {
            let pull_norm = dist(&pull, &vec![0.0; d]);
            if pull_norm <= 1.0 + 1e-12 {
                return y.clone();
            }
        }
    }
    // Weiszfeld iteration
    let mut x = x0.to_vec();
    for _ in 0..200 {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut stuck = false;
        for y in neighbors {
            let dj = dist(&x, y);
            if dj < 1e-14 {
                stuck = true;
                break;
            }
            for i in 0..d {
                num[i] += y[i] / dj;
            }
            den += 1.0 / dj;
        }
        if stuck || den == 0.0 {
            break;
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let moved = dist(&next, &x);
        x = next;
        if moved < 1e-15 {
            break;
        }
    }
    x
}

/// Collapse coincident nodes, rebuild the geometric edge list, and
/// measure the result.
fn assemble(
    topology: &SteinerTopology,
    terminals: &[Vec<f64>],
    steiner_coords: Vec<Vec<f64>>,
    gauge: &NormModel,
    tol: f64,
    diam: f64,
    converged: bool,
) -> SteinerTree {
    let m = topology.terminals;
    let s = topology.steiner_points;
    let d = terminals[0].len();
    let n_nodes = m + s;
    let position = |node: usize| -> &[f64] {
        if node < m {
            &terminals[node]
        } else {
            &steiner_coords[node - m]
        }
    };
    let eps = (10.0 * tol).max(1e-8) * diam.max(1.0);

    // union-find with terminal-preferring representatives
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &(a, b) in &topology.edges {
        if dist(position(a), position(b)) <= eps {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                continue;
            }
            // keep the terminal (lowest index wins among terminals)
            if ra < rb {
                parent[rb] = ra;
            } else {
                parent[ra] = rb;
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &topology.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            continue;
        }
        let e = (ra.min(rb), ra.max(rb));
        if !edges.contains(&e) {
            edges.push(e);
        }
    }
    // drop dangling steiner representatives
    loop {
        let mut removed = false;
        for node in m..n_nodes {
            if find(&mut parent, node) != node {
                continue;
            }
            let deg = edges.iter().filter(|&&(a, b)| a == node || b == node).count();
            if deg == 1 {
                edges.retain(|&(a, b)| a != node && b != node);
                parent[node] = usize::MAX - 1; // tombstone
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    let live_steiner: Vec<usize> = (m..n_nodes)
        .filter(|&v| parent[v] != usize::MAX - 1 && find(&mut parent, v) == v)
        .collect();
    let min_deg = live_steiner
        .iter()
        .map(|&v| edges.iter().filter(|&&(a, b)| a == v || b == v).count())
        .min()
        .unwrap_or(3);

    let mut segments = Vec::with_capacity(edges.len());
    let mut length = 0.0;
    let mut w = vec![0.0; d];
    for &(a, b) in &edges {
        let pa = position(a).to_vec();
        let pb = position(b).to_vec();
        for i in 0..d {
            w[i] = pa[i] - pb[i];
        }
        length += gauge.evaluate(&w);
        segments.push(Segment::new(pa, pb));
    }
    SteinerTree {
        topology: topology.clone(),
        terminals: terminals.to_vec(),
        steiner_coords,
        segments,
        effective_steiner_points: live_steiner.len(),
        min_steiner_degree: min_deg,
        length,
        converged,
    }
}
