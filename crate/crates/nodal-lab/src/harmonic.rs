//! Harmonic-function sandbox on the unit ball.
//!
//! Harmonic polynomials with closed-form evaluation: real/imaginary parts
//! of `(x+iy)^k` in the plane, an explicit real solid-harmonic basis up to
//! degree 3 in space. The sandbox measures mean-value volume bounds and
//! runs the dyadic growth dichotomy that upgrades the crude `1/M` positive
//! volume estimate toward a power of the growth.

use serde::{Deserialize, Serialize};

use crate::geometry::MAX_DIM;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// One basis term: `coefficient * basis(degree, index)`.
///
/// n=2: index 0 is `Re (x+iy)^degree`, index 1 is `Im (x+iy)^degree`.
/// n=3: index is the order `m in -degree..=degree` of the real solid
/// harmonic of that degree (supported degrees 0..=3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub degree: u32,
    pub coefficient: f64,
    pub index: i32,
}

/// A harmonic polynomial on `R^n`, `n` in `{2, 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSample {
    n: usize,
    terms: Vec<HarmonicTerm>,
}

/// Grid resolution per axis used for measurements over the unit ball.
fn default_resolution(n: usize) -> usize {
    match n {
        2 => 513,
        _ => 129,
    }
}

/// Resolution of the local grids inside the dyadic iteration.
const LEVEL_RESOLUTION: usize = 129;

pub fn make_harmonic(n: usize, terms: Vec<HarmonicTerm>) -> Result<HarmonicSample> {
    if n != 2 && n != 3 {
        return Err(Error::DimensionOutOfRange(n));
    }
    for t in &terms {
        let valid = match n {
            2 => t.index == 0 || (t.index == 1 && t.degree >= 1),
            _ => t.degree <= 3 && t.index.unsigned_abs() <= t.degree,
        };
        if !valid {
            return Err(Error::InvalidBasisIndex {
                degree: t.degree,
                index: t.index,
            });
        }
    }
    Ok(HarmonicSample { n, terms })
}

/// `Re (x+iy)^k` as a sandbox sample.
pub fn plane_power_re(k: u32) -> HarmonicSample {
    HarmonicSample {
        n: 2,
        terms: vec![HarmonicTerm {
            degree: k,
            coefficient: 1.0,
            index: 0,
        }],
    }
}

pub fn constant_one(n: usize) -> HarmonicSample {
    HarmonicSample {
        n,
        terms: vec![HarmonicTerm {
            degree: 0,
            coefficient: 1.0,
            index: 0,
        }],
    }
}

/// Seeded Gaussian coefficients over every basis element of degree <=
/// `max_degree`, in (degree, index) order.
pub fn random_harmonic(n: usize, max_degree: u32, seed: u64) -> Result<HarmonicSample> {
    if n != 2 && n != 3 {
        return Err(Error::DimensionOutOfRange(n));
    }
    if n == 3 && max_degree > 3 {
        return Err(Error::InvalidBasisIndex {
            degree: max_degree,
            index: 0,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut terms = Vec::new();
    for degree in 0..=max_degree {
        let indices: Vec<i32> = match n {
            2 => {
                if degree == 0 {
                    vec![0]
                } else {
                    vec![0, 1]
                }
            }
            _ => (-(degree as i32)..=degree as i32).collect(),
        };
        for index in indices {
            terms.push(HarmonicTerm {
                degree,
                coefficient: rng.next_gaussian(),
                index,
            });
        }
    }
    Ok(HarmonicSample { n, terms })
}

impl HarmonicSample {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree).max().unwrap_or(0)
    }

    pub fn evaluate(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.n);
        let mut sum = 0.0;
        for t in &self.terms {
            sum += t.coefficient * basis_value(self.n, t.degree, t.index, p);
        }
        sum
    }

    /// Rescale so that `u(0) = 1`; errors when `u(0) <= 0`.
    pub fn normalized_at_origin(&self) -> Result<HarmonicSample> {
        let origin = [0.0; MAX_DIM];
        let v0 = self.evaluate(&origin[..self.n]);
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::NonPositiveAtOrigin);
        }
        let terms = self
            .terms
            .iter()
            .map(|t| HarmonicTerm {
                degree: t.degree,
                coefficient: t.coefficient / v0,
                index: t.index,
            })
            .collect();
        Ok(HarmonicSample { n: self.n, terms })
    }
}

fn basis_value(n: usize, degree: u32, index: i32, p: &[f64]) -> f64 {
    match n {
        2 => {
            // (x + iy)^degree by repeated complex multiplication
            let (x, y) = (p[0], p[1]);
            let mut re = 1.0;
            let mut im = 0.0;
            for _ in 0..degree {
                let nre = re * x - im * y;
                im = re * y + im * x;
                re = nre;
            }
            if index == 0 {
                re
            } else {
                im
            }
        }
        _ => solid_harmonic(degree, index, p[0], p[1], p[2]),
    }
}

/// Real solid harmonics, unnormalized, degrees 0..=3.
fn solid_harmonic(degree: u32, m: i32, x: f64, y: f64, z: f64) -> f64 {
    match (degree, m) {
        (0, 0) => 1.0,
        (1, -1) => y,
        (1, 0) => z,
        (1, 1) => x,
        (2, -2) => x * y,
        (2, -1) => y * z,
        (2, 0) => 2.0 * z * z - x * x - y * y,
        (2, 1) => x * z,
        (2, 2) => x * x - y * y,
        (3, -3) => y * (3.0 * x * x - y * y),
        (3, -2) => x * y * z,
        (3, -1) => y * (4.0 * z * z - x * x - y * y),
        (3, 0) => z * (2.0 * z * z - 3.0 * x * x - 3.0 * y * y),
        (3, 1) => x * (4.0 * z * z - x * x - y * y),
        (3, 2) => z * (x * x - y * y),
        (3, 3) => x * (x * x - 3.0 * y * y),
        _ => panic!("unsupported solid harmonic ({degree}, {m})"),
    }
}

/// Scan a cube `[center - r, center + r]^n` masked to the ball of radius
/// `r`, tracking the signed max, the max of |u|, the argmax point, and the
/// positive-volume count.
struct BallScan {
    sup_signed: f64,
    sup_abs: f64,
    argmax_signed: Vec<f64>,
    vol_pos: f64,
}

fn scan_ball(u: &HarmonicSample, center: &[f64], r: f64, res: usize) -> BallScan {
    let n = u.n();
    let h = 2.0 * r / (res - 1) as f64;
    let mut sup_signed = f64::NEG_INFINITY;
    let mut sup_abs = 0.0f64;
    let mut argmax_signed = center.to_vec();
    let mut argmax_abs = center.to_vec();
    let mut pos_count = 0usize;

    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    'outer: loop {
        let mut dist_sq = 0.0;
        for a in 0..n {
            let x = center[a] - r + idx[a] as f64 * h;
            point[a] = x;
            let d = x - center[a];
            dist_sq += d * d;
        }
        if dist_sq.sqrt() <= r {
            let v = u.evaluate(&point);
            if v > sup_signed {
                sup_signed = v;
                argmax_signed.copy_from_slice(&point);
            }
            if v.abs() > sup_abs {
                sup_abs = v.abs();
                argmax_abs.copy_from_slice(&point);
            }
            if v > 0.0 {
                pos_count += 1;
            }
        }
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < res {
                continue 'outer;
            }
            idx[a] = 0;
            if a == 0 {
                break 'outer;
            }
        }
    }

    // one 3^n half-spacing refinement around each argmax
    let refine = |anchor: &[f64], best: &mut f64, track_abs: bool| {
        let mut offsets: Vec<Vec<f64>> = vec![vec![0.0; n]];
        for a in 0..n {
            let mut next = Vec::with_capacity(offsets.len() * 3);
            for o in &offsets {
                for d in [-h / 2.0, 0.0, h / 2.0] {
                    let mut oo = o.clone();
                    oo[a] = d;
                    next.push(oo);
                }
            }
            offsets = next;
        }
        for off in &offsets {
            let mut q = anchor.to_vec();
            let mut dist_sq = 0.0;
            for a in 0..n {
                q[a] += off[a];
                let d = q[a] - center[a];
                dist_sq += d * d;
            }
            if dist_sq.sqrt() <= r {
                let v = u.evaluate(&q);
                if track_abs {
                    *best = best.max(v.abs());
                } else if v > *best {
                    *best = v;
                }
            }
        }
    };
    refine(&argmax_signed.clone(), &mut sup_signed, false);
    refine(&argmax_abs.clone(), &mut sup_abs, true);

    BallScan {
        sup_signed,
        sup_abs,
        argmax_signed,
        vol_pos: pos_count as f64 * h.powi(n as i32),
    }
}

/// Volume of the unit n-ball.
fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Growth of `|u|` over the unit ball against its half ball.
pub fn growth_over_unit_ball(u: &HarmonicSample) -> f64 {
    let n = u.n();
    let center = vec![0.0; n];
    let res = default_resolution(n);
    let full = scan_ball(u, &center, 1.0, res).sup_abs;
    let half = scan_ball(u, &center, 0.5, res).sup_abs;
    (full / half).ln()
}

/// Fraction of the unit ball where `u > 0`.
pub fn positive_volume_fraction(u: &HarmonicSample) -> f64 {
    let n = u.n();
    let center = vec![0.0; n];
    let res = default_resolution(n);
    scan_ball(u, &center, 1.0, res).vol_pos / unit_ball_volume(n)
}

/// Mean-value volume check for a sample positive at the origin.
#[derive(Debug, Clone)]
pub struct MeanValueReport {
    pub vol_pos: f64,
    pub m_sup: f64,
    /// `Vol(B_1) / M`: the certified lower bound on the positive volume.
    pub bound: f64,
    pub pass: bool,
}

/// After normalizing `u(0) = 1`, the mean value property forces
/// `vol({u>0}) * sup u >= Vol(B_1)`; the check allows 2% quadrature slack.
pub fn mean_value_check(u: &HarmonicSample) -> Result<MeanValueReport> {
    let u = u.normalized_at_origin()?;
    let n = u.n();
    let center = vec![0.0; n];
    let scan = scan_ball(&u, &center, 1.0, default_resolution(n));
    let m_sup = scan.sup_signed.max(1.0); // u(0) = 1 is attained
    let vol = unit_ball_volume(n);
    Ok(MeanValueReport {
        vol_pos: scan.vol_pos,
        m_sup,
        bound: vol / m_sup,
        pass: scan.vol_pos * m_sup >= vol * 0.98,
    })
}

/// One level of the dyadic growth dichotomy.
#[derive(Debug, Clone)]
pub struct IterationLevel {
    pub level: u32,
    pub center: Vec<f64>,
    /// Radius of the ball carried into this level (`2^-level`).
    pub radius: f64,
    pub value_at_center: f64,
    pub sup_half: f64,
    pub threshold: f64,
    pub concluded: bool,
    /// Measured volume of `{u>0}` inside the half ball of this level.
    pub vol_pos_half: f64,
    /// Mean-value certificate from this level:
    /// `Vol(B_half) * u(center) / sup_half`.
    pub certified: f64,
}

/// Full dichotomy transcript.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub levels: Vec<IterationLevel>,
    pub resolved: bool,
    /// Largest mean-value certificate over all levels (absolute volume).
    pub best_bound: f64,
    /// `best_bound / Vol(B_1)`.
    pub best_fraction: f64,
    pub m_sup: f64,
    /// Growth of `|u|` over `(B_1, B_{1/2})`.
    pub beta: f64,
    pub vol_pos_fraction: f64,
    /// Reference decays for the scatter comparison: `beta_eff^-(n-1)` and
    /// `beta_eff^-n` with the log-2 floor.
    pub decay_beta_n1: f64,
    pub decay_beta_n: f64,
}

/// Run the dyadic dichotomy: at scale `2^-j`, either the recentred sup is
/// below `u(center) * M^(2^-(j+1))` and the mean-value argument concludes,
/// or the iteration recurses on a ball around the violating boundary point.
pub fn iteration_experiment(u: &HarmonicSample, depth: u32) -> Result<IterationReport> {
    if depth > 6 {
        return Err(Error::Inconsistent("iteration depth capped at 6".into()));
    }
    let u = u.normalized_at_origin()?;
    let n = u.n();
    let origin = vec![0.0; n];
    let top = scan_ball(&u, &origin, 1.0, default_resolution(n));
    let m_sup = top.sup_signed.max(1.0);
    let vol_b1 = unit_ball_volume(n);

    let mut levels = Vec::new();
    let mut resolved = false;
    let mut best_bound = 0.0f64;
    let mut center = origin.clone();
    let mut value = 1.0f64;
    let mut radius = 1.0f64;

    for level in 0..=depth {
        let rho = radius / 2.0;
        let scan = scan_ball(&u, &center, rho, LEVEL_RESOLUTION);
        let sup_half = scan.sup_signed.max(value);
        let threshold = value * m_sup.powf(rho);
        let certified = unit_ball_volume(n) * rho.powi(n as i32) * value / sup_half;
        let concluded = sup_half <= threshold;
        levels.push(IterationLevel {
            level,
            center: center.clone(),
            radius,
            value_at_center: value,
            sup_half,
            threshold,
            concluded,
            vol_pos_half: scan.vol_pos,
            certified,
        });
        best_bound = best_bound.max(certified);
        if concluded {
            resolved = true;
            break;
        }
        // recurse on the ball around the violating near-boundary point
        center = scan.argmax_signed.clone();
        value = scan.sup_signed;
        radius = rho;
    }

    let beta = (top.sup_abs / scan_ball(&u, &origin, 0.5, default_resolution(n)).sup_abs).ln();
    let beta_eff = beta.max(crate::growth::BETA_FLOOR);
    Ok(IterationReport {
        levels,
        resolved,
        best_bound,
        best_fraction: best_bound / vol_b1,
        m_sup,
        beta,
        vol_pos_fraction: top.vol_pos / vol_b1,
        decay_beta_n1: beta_eff.powi(-(n as i32 - 1)),
        decay_beta_n: beta_eff.powi(-(n as i32)),
    })
}

/// Finite-difference Laplacian of a sample at a point (testing hook).
pub fn fd_laplacian(u: &HarmonicSample, p: &[f64], h: f64) -> f64 {
    let n = u.n();
    let mut acc = 0.0;
    let center = u.evaluate(p);
    let mut q = p.to_vec();
    for a in 0..n {
        q[a] = p[a] + h;
        let up = u.evaluate(&q);
        q[a] = p[a] - h;
        let dn = u.evaluate(&q);
        q[a] = p[a];
        acc += (up + dn - 2.0 * center) / (h * h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn plane_power_matches_polar_form() {
        let u = plane_power_re(3);
        for (r, theta) in [(0.5, 0.3), (0.9, 2.0), (1.0, -1.1)] {
            let p = [r * f64::cos(theta), r * f64::sin(theta)];
            let expect = r.powi(3) * f64::cos(3.0 * theta);
            assert!((u.evaluate(&p) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_sample_mean_value() {
        let u = constant_one(2);
        let report = mean_value_check(&u).unwrap();
        assert!((report.m_sup - 1.0).abs() < 1e-12);
        assert!((report.vol_pos - PI).abs() < 0.02 * PI);
        assert!(report.pass);
    }

    #[test]
    fn linear_sample_mean_value() {
        // u = 1 + x: M = 2 at (1, 0), positive on the whole disk
        let u = make_harmonic(
            2,
            vec![
                HarmonicTerm { degree: 0, coefficient: 1.0, index: 0 },
                HarmonicTerm { degree: 1, coefficient: 1.0, index: 0 },
            ],
        )
        .unwrap();
        let report = mean_value_check(&u).unwrap();
        assert!((report.m_sup - 2.0).abs() < 1e-9, "M {}", report.m_sup);
        assert!((report.vol_pos - PI).abs() < 0.02 * PI);
        assert!(report.pass);
    }

    #[test]
    fn wiggly_sample_mean_value_passes() {
        let u = make_harmonic(
            2,
            vec![
                HarmonicTerm { degree: 0, coefficient: 1.0, index: 0 },
                HarmonicTerm { degree: 4, coefficient: 10.0, index: 0 },
            ],
        )
        .unwrap();
        let report = mean_value_check(&u).unwrap();
        assert!(report.pass, "vol_pos {} M {}", report.vol_pos, report.m_sup);
    }

    #[test]
    fn nonpositive_origin_rejected() {
        let u = plane_power_re(2); // u(0) = 0
        assert!(matches!(
            mean_value_check(&u),
            Err(Error::NonPositiveAtOrigin)
        ));
    }

    #[test]
    fn all_bases_are_harmonic_by_finite_differences() {
        let mut rng = crate::rng::SplitMix64::new(23);
        for n in [2usize, 3] {
            let max_degree = if n == 2 { 8 } else { 3 };
            let u = random_harmonic(n, max_degree, 99).unwrap();
            let center = vec![0.0; n];
            let sup = scan_ball(&u, &center, 1.0, 65).sup_abs;
            let deg = u.max_degree() as f64;
            let tol = 1e-6 * (deg * deg * sup).max(1.0);
            for _ in 0..100 {
                let p: Vec<f64> = (0..n).map(|_| (rng.next_f64() - 0.5) * 1.2).collect();
                let lap = fd_laplacian(&u, &p, 1e-4);
                assert!(lap.abs() < tol, "n={n}: laplacian {lap} tol {tol}");
            }
        }
    }

    #[test]
    fn growth_of_plane_powers_is_k_log_two() {
        for k in 1..=6u32 {
            let beta = growth_over_unit_ball(&plane_power_re(k));
            let expect = k as f64 * std::f64::consts::LN_2;
            assert!(
                (beta - expect).abs() < 0.01 * expect,
                "k={k}: beta {beta} vs {expect}"
            );
            let frac = positive_volume_fraction(&plane_power_re(k));
            assert!((frac - 0.5).abs() < 0.02 * 0.5 + 0.01, "k={k}: frac {frac}");
        }
    }

    #[test]
    fn iteration_on_constant_terminates_at_level_zero() {
        let report = iteration_experiment(&constant_one(2), 6).unwrap();
        assert!(report.resolved);
        assert_eq!(report.levels.len(), 1);
        assert!(report.levels[0].concluded);
        assert!((report.m_sup - 1.0).abs() < 1e-12);
        assert!((report.vol_pos_fraction - 1.0).abs() < 0.02);
    }

    #[test]
    fn iteration_on_shifted_plane_power() {
        // u = Re z^k + eps, normalized at the origin
        for k in [2u32, 4] {
            let u = make_harmonic(
                2,
                vec![
                    HarmonicTerm { degree: 0, coefficient: 1e-3, index: 0 },
                    HarmonicTerm { degree: k, coefficient: 1.0, index: 0 },
                ],
            )
            .unwrap();
            let report = iteration_experiment(&u, 6).unwrap();
            let expect_beta = k as f64 * std::f64::consts::LN_2;
            assert!(
                (report.beta - expect_beta).abs() < 0.05 * expect_beta,
                "beta {} vs {}",
                report.beta,
                expect_beta
            );
            assert!((report.vol_pos_fraction - 0.5).abs() < 0.03);
            assert!(report.best_fraction <= 0.5 + 0.02);
            assert!(report.best_bound > 0.0);
        }
    }

    #[test]
    fn ensemble_scatter_sits_above_its_own_floor() {
        let mut count = 0u32;
        let mut seed = 0u64;
        let mut c_min = f64::INFINITY;
        let mut points = Vec::new();
        while count < 50 {
            let u = random_harmonic(2, 8, seed).unwrap();
            seed += 1;
            let origin = [0.0, 0.0];
            if u.evaluate(&origin) <= 0.0 {
                continue;
            }
            count += 1;
            let report = iteration_experiment(&u, 6).unwrap();
            let beta_eff = report.beta.max(crate::growth::BETA_FLOOR);
            let c = report.vol_pos_fraction * beta_eff;
            c_min = c_min.min(c);
            points.push((beta_eff, report.vol_pos_fraction));
        }
        assert!(c_min > 0.0);
        for (beta_eff, frac) in points {
            assert!(frac >= c_min / beta_eff - 1e-12);
        }
    }

    #[test]
    fn invalid_bases_rejected() {
        assert!(make_harmonic(
            2,
            vec![HarmonicTerm { degree: 0, coefficient: 1.0, index: 1 }]
        )
        .is_err());
        assert!(make_harmonic(
            3,
            vec![HarmonicTerm { degree: 4, coefficient: 1.0, index: 0 }]
        )
        .is_err());
        assert!(make_harmonic(
            3,
            vec![HarmonicTerm { degree: 2, coefficient: 1.0, index: 3 }]
        )
        .is_err());
    }
}
