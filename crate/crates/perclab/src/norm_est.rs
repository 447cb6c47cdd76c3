//! Correlation-norm estimation from multi-scale connection probabilities.
//!
//! For a unit direction e, the per-scale negative log connection
//! probabilities -log P(u_n in C_n) are fitted to the affine model
//! slope * n + intercept by weighted least squares; the slope estimates
//! ||e|| and the negated intercept estimates the log of the uniform
//! constant in front of the exponential decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    estimate_event_probability_with, BoundaryPolicy, EstimateWithCI, Z_95,
};
use crate::event::EventSpec;
use crate::gauge::{NormModel, NormProvenance};
use crate::lattice::{round_to_site, LatticeConfig};
use crate::oracle;
use crate::rng::mix64;

/// One scale of a direction measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub n: u32,
    pub estimate: EstimateWithCI,
    pub neg_log_p: f64,
    /// Wilson bounds pushed through -log (monotone decreasing transform).
    pub neg_log_ci: (f64, f64),
    pub boundary_touch_fraction: f64,
}

/// Affine fit of -log P against n for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub direction: Vec<f64>,
    pub per_scale: Vec<ScalePoint>,
    /// Estimated gauge value of the direction.
    pub slope: f64,
    /// Estimated -log alpha of the uniform bound.
    pub intercept: f64,
}

/// Weighted least squares for y = slope x + intercept.
/// Points are (x, y, weight); needs two distinct x values.
pub fn weighted_affine_fit(points: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if sw <= 0.0 || points.len() < 2 {
        return Err(Error::FitFailed("need at least two weighted points".into()));
    }
    let sx: f64 = points.iter().map(|p| p.2 * p.0).sum();
    let sy: f64 = points.iter().map(|p| p.2 * p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.2 * p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * p.0 * p.1).sum();
    let det = sw * sxx - sx * sx;
    if det.abs() < 1e-12 * sw * sxx.max(1.0) {
        return Err(Error::FitFailed("degenerate abscissas".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    Ok((slope, intercept))
}

fn require_unit(e: &[f64]) -> Result<()> {
    let n2: f64 = e.iter().map(|x| x * x).sum();
    if (n2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "direction must be a Euclidean unit vector, |e| = {}",
            n2.sqrt()
        )));
    }
    Ok(())
}

/// Box radius so the target sits at no more than 2/3 of it.
fn auto_radius(target: &[i64]) -> i32 {
    let m = target.iter().map(|c| c.abs()).max().unwrap_or(0) as f64;
    ((1.5 * m).ceil() as i32).max(2)
}

/// Fit per-scale points (n, -log p, ci) to the affine model, weighting by
/// inverse squared CI width.
pub fn fit_rate(direction: &[f64], per_scale: Vec<ScalePoint>) -> Result<RateFit> {
    if per_scale.len() < 3 {
        return Err(Error::FitFailed(format!(
            "only {} scales with hits; need at least 3",
            per_scale.len()
        )));
    }
    let pts: Vec<(f64, f64, f64)> = per_scale
        .iter()
        .map(|s| {
            let width = (s.neg_log_ci.1 - s.neg_log_ci.0).max(1e-12);
            (s.n as f64, s.neg_log_p, 1.0 / (width * width))
        })
        .collect();
    let (slope, intercept) = weighted_affine_fit(&pts)?;
    Ok(RateFit { direction: direction.to_vec(), per_scale, slope, intercept })
}

/// Measure P(u_n in C_n) across scales for the unit direction `e` and fit
/// the decay rate. Boxes are auto-sized per scale; boundary-touching
/// samples count as hits (truncation only loses paths), and the touch
/// fraction is reported per scale.
pub fn measure_direction(
    template: &LatticeConfig,
    e: &[f64],
    scales: &[u32],
    replicates: u64,
    master_seed: u64,
) -> Result<RateFit> {
    require_unit(e)?;
    if e.len() != template.d {
        return Err(Error::DimensionMismatch { expected: template.d, got: e.len() });
    }
    let mut distinct = scales.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitFailed("need at least 3 distinct scales".into()));
    }
    template.require_subcritical()?;
    let mut per_scale = Vec::new();
    for &n in &distinct {
        let target = round_to_site(e, n);
        let mut config = LatticeConfig::new(template.d, n, template.p, auto_radius(&target))?;
        config.p_c_override = template.p_c_override;
        let event = EventSpec::PointInCluster { target: e.to_vec() };
        let sub_seed = direction_scale_seed(master_seed, e, n);
        let report = estimate_event_probability_with(
            &config,
            &event,
            replicates,
            sub_seed,
            Z_95,
            BoundaryPolicy::TouchCountsAsHit,
        )?;
        if report.estimate.hits == 0 {
            continue; // dropped; never fabricate a rate
        }
        let est = report.estimate;
        per_scale.push(ScalePoint {
            n,
            estimate: est,
            neg_log_p: -est.value.ln(),
            neg_log_ci: (-est.ci_high.ln(), -est.ci_low.ln()),
            boundary_touch_fraction: report.boundary_touch_fraction,
        });
    }
    fit_rate(e, per_scale)
}

fn direction_scale_seed(master: u64, e: &[f64], n: u32) -> u64 {
    let mut h = mix64(master ^ 0x6e6f_726d_2d65_7374);
    for &x in e {
        h = mix64(h ^ x.to_bits());
    }
    mix64(h ^ n as u64)
}

/// Default measurement directions: symmetry-orbit representatives.
/// d = 2: 32 unit vectors spanning the first octant [0, pi/4]; their
/// closure under the lattice symmetries covers the circle. d = 3: the
/// axis, face-diagonal and corner-diagonal classes, whose closure is the
/// usual 26-vector star.
pub fn default_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        2 => {
            let m = 32;
            (0..m)
                .map(|k| {
                    let th = std::f64::consts::FRAC_PI_4 * k as f64 / (m - 1) as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect()
        }
        3 => {
            let s2 = std::f64::consts::FRAC_1_SQRT_2;
            let s3 = 1.0 / 3.0f64.sqrt();
            vec![vec![1.0, 0.0, 0.0], vec![s2, s2, 0.0], vec![s3, s3, s3]]
        }
        _ => {
            let mut dirs: Vec<Vec<f64>> = Vec::new();
            for i in 0..d {
                let mut v = vec![0.0; d];
                v[i] = 1.0;
                dirs.push(v);
            }
            dirs.push(vec![1.0 / (d as f64).sqrt(); d]);
            dirs
        }
    }
}

/// Place e/slope(e) on the estimated unit-ball boundary for every fitted
/// direction, close under the lattice symmetries, and hull.
pub fn build_norm_model(fits: &[RateFit]) -> Result<NormModel> {
    let d = fits
        .first()
        .map(|f| f.direction.len())
        .ok_or_else(|| Error::InvalidGauge("no fits provided".into()))?;
    let mut points = Vec::with_capacity(fits.len());
    for f in fits {
        if f.slope <= 0.0 {
            return Err(Error::InvalidGauge(format!(
                "nonpositive slope {} for direction {:?}",
                f.slope, f.direction
            )));
        }
        points.push(f.direction.iter().map(|x| x / f.slope).collect());
    }
    let model = NormModel::from_boundary_points(d, points)?;
    let prov = NormProvenance {
        master_seed: 0,
        replicates: fits[0].per_scale.first().map_or(0, |s| s.estimate.replicates),
        scales: fits[0].per_scale.iter().map(|s| s.n).collect(),
        p: 0.0,
        directions: fits.iter().map(|f| f.direction.clone()).collect(),
        slopes: fits.iter().map(|f| f.slope).collect(),
        intercepts: fits.iter().map(|f| f.intercept).collect(),
    };
    Ok(model.with_provenance(prov))
}

/// Outcome of the finite-scale superadditivity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityCheck {
    pub rate_n: f64,
    pub rate_2n: f64,
    pub holds: bool,
}

/// Exact finite-scale consequence of concatenation:
/// -(1/2n) log P_2n <= -(1/n) log P_n when the scale-2n instance uses the
/// proportionally doubled window. Both probabilities come from the
/// enumeration oracle. Returns None when either probability is zero
/// (vacuous), e.g. at p = 0.
pub fn norm_upper_bound_check(
    config: &LatticeConfig,
    u: &[f64],
) -> Result<Option<SuperadditivityCheck>> {
    let n = config.n;
    let event = EventSpec::PointInCluster { target: u.to_vec() };
    let p_n = oracle::exact_event_probability(config, &event)?;

    let mut doubled = config.clone();
    doubled.n = 2 * n;
    doubled.box_radius = config.box_radius * 2;
    if let Some((lo, hi)) = &config.window {
        doubled.window =
            Some((lo.iter().map(|c| 2 * c).collect(), hi.iter().map(|c| 2 * c).collect()));
    }
    let p_2n = oracle::exact_event_probability(&doubled, &event)?;

    if p_n <= 0.0 || p_2n <= 0.0 {
        return Ok(None);
    }
    let rate_n = -p_n.ln() / n as f64;
    let rate_2n = -p_2n.ln() / (2 * n) as f64;
    Ok(Some(SuperadditivityCheck { rate_n, rate_2n, holds: rate_2n <= rate_n + 1e-12 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D chain window [0, n] x {0}: the only open path is the straight
    /// chain, so P(u_n in C_n) = p^n exactly.
    fn chain_config(p: f64, n: u32) -> LatticeConfig {
        LatticeConfig::new(2, n, p, n as i32 + 1)
            .unwrap()
            .with_window(vec![0, 0], vec![n as i64, 0])
            .unwrap()
    }

    #[test]
    fn forced_path_fit_recovers_minus_log_p() {
        let p = 0.3f64;
        let mut per_scale = Vec::new();
        for n in [1u32, 2, 3] {
            let config = chain_config(p, n);
            let event = EventSpec::PointInCluster { target: vec![1.0, 0.0] };
            let exact = oracle::exact_event_probability(&config, &event).unwrap();
            assert!((exact - p.powi(n as i32)).abs() < 1e-15, "p^n closed form");
            per_scale.push(ScalePoint {
                n,
                estimate: EstimateWithCI::from_hits(1, 1, Z_95),
                neg_log_p: -exact.ln(),
                neg_log_ci: (-exact.ln() - 0.5, -exact.ln() + 0.5),
                boundary_touch_fraction: 0.0,
            });
        }
        let fit = fit_rate(&[1.0, 0.0], per_scale).unwrap();
        assert!((fit.slope - (-p.ln())).abs() < 1e-9, "slope {} vs {}", fit.slope, -p.ln());
        assert!(fit.intercept.abs() < 1e-9, "intercept {}", fit.intercept);
    }

    #[test]
    fn fit_matches_hand_computed_least_squares() {
        // oracle-exact probabilities on small windows at n = 1, 2, 3
        let p = 0.3f64;
        let mut ys = Vec::new();
        for n in [1u32, 2, 3] {
            let config = LatticeConfig::new(2, n, p, n as i32 + 1)
                .unwrap()
                .with_window(vec![0, -1], vec![n as i64, 1])
                .unwrap();
            let event = EventSpec::PointInCluster { target: vec![1.0, 0.0] };
            let exact = oracle::exact_event_probability(&config, &event).unwrap();
            ys.push(-exact.ln());
        }
        let pts: Vec<(f64, f64, f64)> =
            ys.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y, 1.0)).collect();
        let (slope, intercept) = weighted_affine_fit(&pts).unwrap();
        // independent normal-equation solve
        let n = 3.0;
        let sx = 6.0;
        let sxx = 14.0;
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = ys.iter().enumerate().map(|(i, &y)| (i + 1) as f64 * y).sum();
        let slope_ref = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept_ref = (sy - slope_ref * sx) / n;
        assert!((slope - slope_ref).abs() < 1e-12);
        assert!((intercept - intercept_ref).abs() < 1e-12);
    }

    #[test]
    fn measure_direction_rejects_non_unit() {
        let template = LatticeConfig::new(2, 1, 0.3, 2).unwrap();
        let err = measure_direction(&template, &[0.0, 0.0], &[1, 2, 3], 100, 1);
        assert!(err.is_err());
        let err = measure_direction(&template, &[1.0, 1.0], &[1, 2, 3], 100, 1);
        assert!(err.is_err());
    }

    #[test]
    fn measure_direction_needs_three_scales() {
        let template = LatticeConfig::new(2, 1, 0.3, 2).unwrap();
        assert!(measure_direction(&template, &[1.0, 0.0], &[1, 2], 100, 1).is_err());
    }

    #[test]
    fn measure_direction_dominates_corridor_oracle() {
        let template = LatticeConfig::new(2, 1, 0.3, 2).unwrap();
        let fit = measure_direction(&template, &[1.0, 0.0], &[1, 2, 3], 40_000, 2024).unwrap();
        assert!(fit.slope > 0.0);
        assert_eq!(fit.per_scale.len(), 3);
        // the box probability dominates the exact probability on any
        // sub-window (monotonicity in the region), so each per-scale
        // -log estimate must sit below the corridor-window value
        for point in &fit.per_scale {
            let n = point.n;
            let config = LatticeConfig::new(2, n, 0.3, n as i32 + 2)
                .unwrap()
                .with_window(vec![0, -1], vec![n as i64, 1])
                .unwrap();
            let event = EventSpec::PointInCluster { target: vec![1.0, 0.0] };
            let corridor_p = oracle::exact_event_probability(&config, &event).unwrap();
            assert!(
                point.estimate.ci_high >= corridor_p,
                "n={n}: box estimate {:?} below corridor-exact {corridor_p}",
                point.estimate
            );
        }
    }

    #[test]
    fn build_model_from_l1_fits() {
        let mk = |dir: Vec<f64>, slope: f64| RateFit {
            direction: dir,
            per_scale: vec![],
            slope,
            intercept: 0.0,
        };
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let fits = vec![
            mk(vec![1.0, 0.0], 1.0),
            mk(vec![0.0, 1.0], 1.0),
            mk(vec![s2, s2], 2.0 * s2),
        ];
        let model = build_norm_model(&fits).unwrap();
        for u in [[1.0f64, 0.0], [0.5, 0.5], [0.3, -0.6]] {
            let expect = u[0].abs() + u[1].abs();
            assert!((model.evaluate(&u) - expect).abs() < 1e-12, "{u:?}");
        }
    }

    #[test]
    fn build_model_rejects_bad_slopes_and_rank() {
        let mk = |dir: Vec<f64>, slope: f64| RateFit {
            direction: dir,
            per_scale: vec![],
            slope,
            intercept: 0.0,
        };
        let err =
            build_norm_model(&[mk(vec![1.0, 0.0], 1.0), mk(vec![0.0, 1.0], -0.2)]).unwrap_err();
        assert!(err.to_string().contains("slope"));
        assert!(build_norm_model(&[mk(vec![1.0, 0.0], 1.0)]).is_err());
    }

    #[test]
    fn euclidean_reconstruction_within_half_percent() {
        let m = 64;
        let fits: Vec<RateFit> = (0..m)
            .map(|k| {
                let th = std::f64::consts::FRAC_PI_4 * k as f64 / (m - 1) as f64;
                RateFit {
                    direction: vec![th.cos(), th.sin()],
                    per_scale: vec![],
                    slope: 1.0,
                    intercept: 0.0,
                }
            })
            .collect();
        let model = build_norm_model(&fits).unwrap();
        let mut rng = crate::rng::SeqRng::new(99);
        for _ in 0..1000 {
            let u = [rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
            let n2 = (u[0] * u[0] + u[1] * u[1]).sqrt();
            if n2 < 1e-3 {
                continue;
            }
            let rel = (model.evaluate(&u) - n2).abs() / n2;
            assert!(rel < 0.005, "relative gauge error {rel}");
        }
    }

    #[test]
    fn superadditivity_forced_path_is_equality() {
        let config = chain_config(0.3, 1);
        let check = norm_upper_bound_check(&config, &[1.0, 0.0]).unwrap().unwrap();
        assert!(check.holds);
        assert!((check.rate_n - check.rate_2n).abs() < 1e-12, "p^n family is exactly affine");
        assert!((check.rate_n - (-0.3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn superadditivity_unit_square_family() {
        let config = LatticeConfig::new(2, 1, 0.3, 1)
            .unwrap()
            .with_window(vec![0, 0], vec![1, 1])
            .unwrap();
        let check = norm_upper_bound_check(&config, &[1.0, 0.0]).unwrap().unwrap();
        assert!(check.holds, "{check:?}");
    }

    #[test]
    fn superadditivity_vacuous_at_p_zero() {
        let config = chain_config(0.0, 1);
        assert!(norm_upper_bound_check(&config, &[1.0, 0.0]).unwrap().is_none());
    }

    #[test]
    fn slope_decreases_as_p_increases() {
        let mut slopes = Vec::new();
        for &p in &[0.1, 0.2, 0.3] {
            let template = LatticeConfig::new(2, 1, p, 2).unwrap();
            let fit = measure_direction(&template, &[1.0, 0.0], &[1, 2, 3], 30_000, 7).unwrap();
            slopes.push(fit.slope);
        }
        assert!(slopes[0] > slopes[1] && slopes[1] > slopes[2], "{slopes:?}");
    }
}
