//! Picard iteration on the hierarchical map, the Hardy-Rogers error bounds,
//! sampled contraction estimates and second-order checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{try_diff1, DiffConfig, OutputTriple};
use crate::response::{m1, MapMode, ResponseSystem};

pub type Matrix3 = [[f64; 3]; 3];

/// Constants of the Hardy-Rogers inequality
/// `M1(Sx, Su) <= k1 M1(x, u) + k2 M2S(x, u) + k3 M3S(x, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyRogersConstants {
    k1: f64,
    k2: f64,
    k3: f64,
}

impl HardyRogersConstants {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        let sum = k1 + 2.0 * k2 + 2.0 * k3;
        let nonneg = k1 >= 0.0 && k2 >= 0.0 && k3 >= 0.0;
        if !nonneg || !(sum < 1.0) {
            return Err(Error::InvalidConstants { sum });
        }
        Ok(Self { k1, k2, k3 })
    }

    /// Banach contraction with rate `alpha`.
    pub fn banach(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0)
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }

    /// `k = (k1 + k2 + k3) / (1 - k2 - k3)`.
    pub fn rate(&self) -> f64 {
        (self.k1 + self.k2 + self.k3) / (1.0 - self.k2 - self.k3)
    }
}

pub fn hr_rate(k: &HardyRogersConstants) -> f64 {
    k.rate()
}

/// `k^n / (1 - k) * M1(x1, x0)`.
pub fn a_priori_bound(k: f64, n: usize, d01: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    k.powi(n as i32) / (1.0 - k) * d01
}

/// `k / (1 - k) * M1(xn, x_{n-1})`.
pub fn a_posteriori_bound(k: f64, dn: f64) -> f64 {
    k / (1.0 - k) * dn
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Stop once an `M1` step is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Declare divergence once an iterate is farther than this from the start.
    pub divergence_radius: f64,
    /// Declare divergence after this many consecutive growing steps.
    pub growth_window: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1_000_000,
            divergence_radius: 1e12,
            growth_window: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterationStatus {
    Converged,
    Diverged,
    MaxIter,
}

/// Picard sequence `p_{n+1} = S(p_n)`; `step_m1[i] = m1(points[i + 1], points[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub points: Vec<OutputTriple>,
    pub step_m1: Vec<f64>,
    pub status: IterationStatus,
    pub iterations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> OutputTriple {
        *self.points.last().expect("trace holds the start point")
    }

    pub fn converged(&self) -> bool {
        self.status == IterationStatus::Converged
    }
}

pub fn picard_iterate(
    sys: &ResponseSystem,
    start: OutputTriple,
    opts: &PicardOptions,
) -> Result<IterationTrace> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Argument(
            "Picard iteration needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    if !start.is_finite() {
        return Err(Error::Argument(format!("start point {start} is not finite")));
    }
    let mut points = vec![start];
    let mut step_m1 = Vec::new();
    let mut current = start;
    let mut growing = 0usize;
    let mut status = IterationStatus::MaxIter;

    for iteration in 0..opts.max_iter {
        let next = sys
            .hierarchical_map(current)
            .map_err(|e| Error::AtIterate {
                iteration,
                point: current,
                source: Box::new(e),
            })?;
        let step = m1(next, current);
        if let Some(&prev) = step_m1.last() {
            growing = if step > prev { growing + 1 } else { 0 };
        }
        points.push(next);
        step_m1.push(step);
        current = next;

        if step <= opts.tol {
            status = IterationStatus::Converged;
            break;
        }
        if !step.is_finite()
            || m1(next, start) > opts.divergence_radius
            || (opts.growth_window > 0 && growing >= opts.growth_window)
        {
            status = IterationStatus::Diverged;
            break;
        }
    }
    Ok(IterationTrace {
        iterations: step_m1.len(),
        points,
        step_m1,
        status,
    })
}

/// Axis-aligned sampling region `[lo, hi]` (coordinate-wise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: OutputTriple,
    pub hi: OutputTriple,
}

impl SampleBox {
    pub fn new(lo: OutputTriple, hi: OutputTriple) -> Result<Self> {
        let ok = lo.is_finite()
            && hi.is_finite()
            && lo.x <= hi.x
            && lo.y <= hi.y
            && lo.z <= hi.z;
        if !ok {
            return Err(Error::Argument(format!("empty sampling box {lo} .. {hi}")));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^3`.
    pub fn cube(lo: f64, hi: f64) -> Result<Self> {
        Self::new(OutputTriple::splat(lo), OutputTriple::splat(hi))
    }

    pub fn center(&self) -> OutputTriple {
        OutputTriple::new(
            0.5 * (self.lo.x + self.hi.x),
            0.5 * (self.lo.y + self.hi.y),
            0.5 * (self.lo.z + self.hi.z),
        )
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> OutputTriple {
        let pick = |lo: f64, hi: f64, rng: &mut R| {
            if hi > lo {
                rng.gen_range(lo..=hi)
            } else {
                lo
            }
        };
        OutputTriple::new(
            pick(self.lo.x, self.hi.x, rng),
            pick(self.lo.y, self.hi.y, rng),
            pick(self.lo.z, self.hi.z, rng),
        )
    }
}

/// Empirical contraction certificate for `S` over a sampling box. This is a
/// sampled estimate, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Largest `m1(S(a), S(b)) / m1(a, b)` over all sampled pairs.
    pub alpha_hat: f64,
    /// `l1`-induced norm (max column sum) of the Jacobian at each sample.
    pub jac_l1_norms: Vec<f64>,
    pub reference_point: OutputTriple,
    /// Spectral radius of the Jacobian at `reference_point`.
    pub spectral_radius: f64,
    pub certified: bool,
    /// `max(alpha_hat, max jac_l1_norms)`, the rate to feed the error bounds.
    pub rate_bound: f64,
}

pub fn estimate_contraction(
    sys: &ResponseSystem,
    region: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if samples < 2 {
        return Err(Error::Argument(format!(
            "contraction estimate needs at least 2 samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<OutputTriple> = (0..samples).map(|_| region.sample(&mut rng)).collect();
    let cfg = *sys.diff();

    let evaluated: Vec<(OutputTriple, f64)> = points
        .par_iter()
        .map(|&p| {
            let image = sys.hierarchical_map(p)?;
            let jac = jacobian3(sys, p, &cfg)?;
            Ok((image, l1_norm(&jac)))
        })
        .collect::<Result<_>>()?;

    let mut alpha_hat = 0.0f64;
    for i in 0..samples {
        for j in (i + 1)..samples {
            let d = m1(points[i], points[j]);
            if d > 0.0 {
                alpha_hat = alpha_hat.max(m1(evaluated[i].0, evaluated[j].0) / d);
            }
        }
    }
    let jac_l1_norms: Vec<f64> = evaluated.iter().map(|e| e.1).collect();
    let max_jac = jac_l1_norms.iter().copied().fold(0.0, f64::max);
    let reference_point = region.center();
    let spectral_radius = spectral_radius3(&jacobian3(sys, reference_point, &cfg)?);
    Ok(ContractionReport {
        alpha_hat,
        certified: alpha_hat < 1.0 && jac_l1_norms.iter().all(|&n| n < 1.0),
        rate_bound: alpha_hat.max(max_jac),
        jac_l1_norms,
        reference_point,
        spectral_radius,
    })
}

/// Central-difference Jacobian of `S` at `p`; `J[i][j] = dS_i / dp_j`.
pub fn jacobian3(sys: &ResponseSystem, p: OutputTriple, cfg: &DiffConfig) -> Result<Matrix3> {
    let base = p.to_array();
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let h = cfg.step(1, base[j]);
        let plus = sys.hierarchical_map(p.with(j, base[j] + h))?.to_array();
        let minus = sys.hierarchical_map(p.with(j, base[j] - h))?.to_array();
        for i in 0..3 {
            jac[i][j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Operator norm induced by `l1`, i.e. the largest absolute column sum.
pub fn l1_norm(m: &Matrix3) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue modulus of a 3x3 matrix from its characteristic cubic.
pub fn spectral_radius3(m: &Matrix3) -> f64 {
    eigenvalues3(m)
        .iter()
        .map(|&(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

/// Eigenvalues as `(re, im)` pairs, computed in closed form.
pub fn eigenvalues3(m: &Matrix3) -> [(f64, f64); 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // lambda^3 + a lambda^2 + b lambda + c
    cubic_roots(-tr, minors, -det)
}

fn cubic_roots(a: f64, b: f64, c: f64) -> [(f64, f64); 3] {
    let poly = |t: f64| ((t + a) * t + b) * t + c;
    let dpoly = |t: f64| (3.0 * t + 2.0 * a) * t + b;
    let polish = |mut t: f64| {
        let mut best = poly(t).abs();
        for _ in 0..60 {
            let d = dpoly(t);
            if d == 0.0 {
                break;
            }
            let cand = t - poly(t) / d;
            let val = poly(cand).abs();
            if !(val < best) {
                break;
            }
            t = cand;
            best = val;
        }
        t
    };

    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = 0.25 * q * q + p * p * p / 27.0;

    if disc < 0.0 {
        // three distinct real roots
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        let roots = [0.0, 1.0, 2.0].map(|k| polish(r * (phi - k * two_pi_3).cos() - shift));
        return roots.map(|t| (t, 0.0));
    }
    let sq = disc.sqrt();
    let u = (-0.5 * q + sq).cbrt();
    let v = (-0.5 * q - sq).cbrt();
    let real = polish(u + v - shift);
    // deflate: lambda^2 + (a + real) lambda + (b + (a + real) real)
    let bb = a + real;
    let cc = b + bb * real;
    let qd = bb * bb - 4.0 * cc;
    if qd >= 0.0 {
        let s = qd.sqrt();
        let t1 = -0.5 * (bb + s.copysign(bb));
        let t2 = if t1 != 0.0 { cc / t1 } else { -bb - t1 };
        [(real, 0.0), (polish(t1), 0.0), (polish(t2), 0.0)]
    } else {
        let re = -0.5 * bb;
        let im = 0.5 * (-qd).sqrt();
        [(real, 0.0), (re, im), (re, -im)]
    }
}

/// Second-order terms at a candidate equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocReport {
    pub d2_follower: f64,
    pub d2_middle: f64,
    pub d2_leader: f64,
    pub all_negative: bool,
}

impl SocReport {
    fn new(d2_leader: f64, d2_middle: f64, d2_follower: f64) -> Self {
        Self {
            d2_follower,
            d2_middle,
            d2_leader,
            all_negative: d2_follower < 0.0 && d2_middle < 0.0 && d2_leader < 0.0,
        }
    }

    pub fn max(&self) -> f64 {
        self.d2_follower.max(self.d2_middle).max(self.d2_leader)
    }
}

/// Second derivatives of each firm's objective at `p`: `d2Pi3/dz2`,
/// `d2Phi2/dy2` and `d2Phi1/dx2` for the hierarchical maps, own second
/// partials for Cournot, and `dF_i/dx_i - 1` for explicit affine maps.
pub fn verify_second_order(sys: &ResponseSystem, p: OutputTriple) -> Result<SocReport> {
    let cfg = *sys.diff();
    match sys.mode() {
        MapMode::ReducedHierarchical => {
            let follower = sys.foc3_dz(p)?;
            let (_, middle) = sys.foc2_partials(p.x, p.y)?;
            let leader = try_diff1(|t| sys.foc1(t), p.x, &cfg)?;
            Ok(SocReport::new(leader, middle, follower))
        }
        MapMode::Cournot => {
            let market = sys.market().expect("Cournot systems carry a market");
            let a = p.to_array();
            Ok(SocReport::new(
                market.profit_curvature(0, &a, &cfg)?,
                market.profit_curvature(1, &a, &cfg)?,
                market.profit_curvature(2, &a, &cfg)?,
            ))
        }
        MapMode::DerivativePlusIdentity => {
            let g = sys.gain();
            let follower = sys.foc3_dz(p)?;
            let middle = (try_diff1(|t| sys.f2(p.with(1, t)), p.y, &cfg)? - 1.0) / g;
            let leader = (try_diff1(|t| sys.f1(p.with(0, t)), p.x, &cfg)? - 1.0) / g;
            Ok(SocReport::new(leader, middle, follower))
        }
        MapMode::ExplicitLinear => {
            let m = sys.affine().expect("explicit systems carry a map").matrix;
            Ok(SocReport::new(m[0][0] - 1.0, m[1][1] - 1.0, m[2][2] - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::response::AffineMap;

    #[test]
    fn hr_rate_examples() {
        let k = HardyRogersConstants::new(0.5, 0.0, 0.0).unwrap();
        assert_eq!(hr_rate(&k), 0.5);
        let k = HardyRogersConstants::new(0.0, 0.2, 0.0).unwrap();
        assert!((k.rate() - 0.25).abs() < 1e-15);
        let k = HardyRogersConstants::new(0.2, 0.2, 0.19).unwrap();
        assert!((k.rate() - 0.59 / 0.61).abs() < 1e-15);
    }

    #[test]
    fn hr_constants_validated() {
        assert!(matches!(
            HardyRogersConstants::new(0.5, 0.25, 0.0),
            Err(Error::InvalidConstants { .. })
        ));
        assert!(HardyRogersConstants::new(-0.1, 0.0, 0.0).is_err());
        assert!(HardyRogersConstants::banach(1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(a_priori_bound(0.5, 3, 8.0), 2.0);
        let k = 414.0 / 420.0;
        let post = a_posteriori_bound(k, 1e-6);
        assert!((post - 6.9e-5).abs() < 1e-7, "{post}");
        assert_eq!(a_priori_bound(0.0, 4, 3.0), 0.0);
        assert_eq!(a_posteriori_bound(0.0, 3.0), 0.0);
    }

    #[test]
    fn picard_from_fixed_point_stops_at_once() {
        let sys = presets::example_affine();
        let t = picard_iterate(&sys, presets::EXAMPLE_STACKELBERG, &PicardOptions::default())
            .unwrap();
        assert_eq!(t.status, IterationStatus::Converged);
        assert!(t.iterations <= 1);
    }

    #[test]
    fn picard_trace_invariants() {
        let sys = presets::example_affine();
        let t = picard_iterate(&sys, OutputTriple::ZERO, &PicardOptions::default()).unwrap();
        assert!(t.converged());
        assert_eq!(t.points.len(), t.step_m1.len() + 1);
        for (i, s) in t.step_m1.iter().enumerate() {
            assert_eq!(*s, m1(t.points[i + 1], t.points[i]));
        }
        assert!(*t.step_m1.last().unwrap() <= 1e-8);
        assert!(m1(t.last(), presets::EXAMPLE_STACKELBERG) < 1e-6);
    }

    #[test]
    fn picard_reports_divergence_and_max_iter() {
        let t = picard_iterate(
            &presets::divergent_system(),
            OutputTriple::splat(1.0),
            &PicardOptions::default(),
        )
        .unwrap();
        assert_eq!(t.status, IterationStatus::Diverged);
        assert!(t.iterations < 200);

        let slow = ResponseSystem::explicit_linear(
            AffineMap::new([[0.999, 0.0, 0.0], [0.0, 0.999, 0.0], [0.0, 0.0, 0.999]], [1.0; 3])
                .unwrap(),
        );
        let opts = PicardOptions {
            max_iter: 10,
            ..Default::default()
        };
        let t = picard_iterate(&slow, OutputTriple::ZERO, &opts).unwrap();
        assert_eq!(t.status, IterationStatus::MaxIter);
        assert_eq!(t.iterations, 10);
    }

    #[test]
    fn growth_window_flags_slow_blowup() {
        // rate 1.01: stays inside the radius for a long time but every step grows
        let sys = ResponseSystem::explicit_linear(
            AffineMap::new([[1.01, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [1.0, 0.0, 0.0])
                .unwrap(),
        );
        let t = picard_iterate(&sys, OutputTriple::ZERO, &PicardOptions::default()).unwrap();
        assert_eq!(t.status, IterationStatus::Diverged);
        assert_eq!(t.iterations, 51);
    }

    #[test]
    fn picard_attaches_failing_iterate() {
        let sys = presets::example_reduced()
            .with_inner(crate::InnerSolveConfig {
                bracket: Some((0.0, 1.0)),
                ..Default::default()
            })
            .unwrap();
        let err = picard_iterate(&sys, OutputTriple::ZERO, &PicardOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AtIterate { iteration: 0, .. }), "{err}");
    }

    #[test]
    fn jacobian_examples() {
        let cfg = DiffConfig::default();
        let div = presets::divergent_system();
        let j = jacobian3(&div, OutputTriple::splat(3.0), &cfg).unwrap();
        let want = presets::divergent_map().matrix;
        for i in 0..3 {
            for k in 0..3 {
                assert!((j[i][k] - want[i][k]).abs() < 1e-6, "J[{i}][{k}]");
            }
        }
        let ex = presets::example_reduced();
        let j = jacobian3(&ex, presets::EXAMPLE_STACKELBERG, &cfg).unwrap();
        assert!((j[0][0] - 379.0 / 420.0).abs() < 1e-6);
        assert!((j[1][1] - 53.0 / 60.0).abs() < 1e-6);
        assert!((j[2][2] - 17.0 / 20.0).abs() < 1e-6);

        let id = ResponseSystem::explicit_linear(
            AffineMap::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3]).unwrap(),
        );
        let j = jacobian3(&id, OutputTriple::new(2.0, -1.0, 5.0), &cfg).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let e = if i == k { 1.0 } else { 0.0 };
                assert!((j[i][k] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spectral_radius_examples() {
        let div = presets::divergent_map().matrix;
        assert!((spectral_radius3(&div) - 2990591.0 / 722420.0).abs() < 1e-10);
        let ex = presets::example_affine_map().matrix;
        assert!((spectral_radius3(&ex) - 379.0 / 420.0).abs() < 1e-12);
        assert_eq!(spectral_radius3(&[[0.0; 3]; 3]), 0.0);
    }

    #[test]
    fn spectral_radius_of_rotation_and_general_matrices() {
        // rotation by 90 degrees in the xy-plane, scaled: eigenvalues 2i, -2i, 0.5
        let m = [[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.5]];
        assert!((spectral_radius3(&m) - 2.0).abs() < 1e-12);
        // symmetric matrix with eigenvalues 1, 2, 4
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 4.0]];
        let mut ev: Vec<f64> = eigenvalues3(&m).iter().map(|e| e.0).collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([1.0, 3.0, 4.0]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn contraction_examples() {
        let region = SampleBox::cube(0.0, 3e5).unwrap();
        let div = estimate_contraction(&presets::divergent_system(), &region, 16, 1).unwrap();
        assert!(!div.certified);
        assert!(div.spectral_radius > 4.13);

        let constant = ResponseSystem::explicit_linear(
            AffineMap::new([[0.0; 3]; 3], [1.0, 2.0, 3.0]).unwrap(),
        );
        let c = estimate_contraction(&constant, &region, 8, 3).unwrap();
        assert_eq!(c.alpha_hat, 0.0);
        assert!(c.certified);

        assert!(estimate_contraction(&constant, &region, 1, 3).is_err());
    }

    #[test]
    fn contraction_is_deterministic_per_seed() {
        let region = SampleBox::cube(0.0, 3e5).unwrap();
        let sys = presets::example_affine();
        let a = estimate_contraction(&sys, &region, 12, 42).unwrap();
        let b = estimate_contraction(&sys, &region, 12, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn soc_examples() {
        let r = verify_second_order(&presets::example_reduced(), presets::EXAMPLE_STACKELBERG)
            .unwrap();
        assert!((r.d2_follower + 3.0 / 20.0).abs() < 1e-6);
        assert!((r.d2_middle + 7.0 / 60.0).abs() < 1e-6);
        assert!((r.d2_leader + 41.0 / 420.0).abs() < 1e-6);
        assert!(r.all_negative);

        let c = verify_second_order(&presets::example_cournot(), presets::EXAMPLE_COURNOT).unwrap();
        for v in [c.d2_follower, c.d2_middle, c.d2_leader] {
            assert!((v + 3.0 / 20.0).abs() < 1e-9);
        }

        // constant price and linear cost: every payoff is linear in own output
        let flat = crate::MarketSpec::symmetric(
            3,
            crate::DemandSpec::Custom(crate::SmoothFn::new("flat", |_| 10.0)),
            crate::CostSpec::Linear(1.0),
        )
        .unwrap();
        let sys = ResponseSystem::cournot(flat).unwrap();
        let d = verify_second_order(&sys, OutputTriple::splat(1.0)).unwrap();
        assert!(!d.all_negative);
    }
}
