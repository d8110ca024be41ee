//! Growth of eigenfunctions over metric balls and the growth-vs-volume
//! statistics collected on packed wavelength balls.
//!
//! The growth of a field over a ball `B` is `log(sup_B |phi| / sup_{B/2}
//! |phi|)` with the concentric half-radius ball. Sups are estimated as the
//! grid maximum plus one 3^n-point local subdivision around the argmax
//! (half-spacing offsets, closed-form mode evaluation) when the sampled
//! mode is available; both sups use the same estimator so the bias largely
//! cancels in the ratio.

use crate::geometry::{ball_volume, points_in_ball, Ball, DomainKind, ScalarField, MAX_DIM};
use crate::modes::{self, EigenMode};
use crate::nodal::{ball_vanishes, sign_volumes, BallPack};
use crate::{Error, Result};

/// Floor applied to beta inside positivity products; below this the
/// product statistic degenerates while the volume ratio saturates at one.
pub const BETA_FLOOR: f64 = std::f64::consts::LN_2;

/// Growth measurement over one ball.
#[derive(Debug, Clone)]
pub struct GrowthRecord {
    pub ball: Ball,
    pub beta: f64,
    pub sup_full: f64,
    pub sup_half: f64,
    pub vanishing: bool,
}

/// Sup of `|phi|` over the grid points of a ball, refined once around the
/// argmax when the closed-form mode is available.
pub fn sup_abs_in_ball(
    field: &ScalarField,
    mode: Option<&EigenMode>,
    ball: &Ball,
) -> Result<f64> {
    let grid = field.grid();
    let idx = points_in_ball(grid, ball)?;
    let values = field.values();
    let mut best = 0.0f64;
    let mut best_flat = None;
    for &i in &idx {
        let v = values[i].abs();
        if v > best || best_flat.is_none() {
            best = v;
            best_flat = Some(i);
        }
    }
    let (Some(mode), Some(flat)) = (mode, best_flat) else {
        return Ok(best);
    };

    // one local subdivision: 3^n half-spacing offsets, kept inside the ball
    let n = grid.n();
    let domain = grid.domain();
    let mut base = [0.0; MAX_DIM];
    grid.point_into(flat, &mut base[..n]);
    let mut offsets: Vec<[f64; MAX_DIM]> = vec![[0.0; MAX_DIM]];
    for a in 0..n {
        let h2 = grid.spacing(a) / 2.0;
        let mut next = Vec::with_capacity(offsets.len() * 3);
        for o in &offsets {
            for d in [-h2, 0.0, h2] {
                let mut oo = *o;
                oo[a] = d;
                next.push(oo);
            }
        }
        offsets = next;
    }
    let mut point = [0.0; MAX_DIM];
    for off in &offsets {
        for a in 0..n {
            point[a] = domain.wrap_coord(a, base[a] + off[a]);
        }
        if domain.kind() == DomainKind::BoxDirichlet && !domain.contains(&point[..n]) {
            continue;
        }
        if domain.distance(&point[..n], &ball.center) > ball.radius {
            continue;
        }
        best = best.max(modes::evaluate_unchecked(mode, &point[..n]).abs());
    }
    Ok(best)
}

/// Sup of `|phi|` over the whole grid, with the same one-step refinement.
pub fn sup_abs_global(field: &ScalarField, mode: Option<&EigenMode>) -> f64 {
    let grid = field.grid();
    let values = field.values();
    let mut best = 0.0f64;
    let mut best_flat = 0usize;
    for (i, v) in values.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            best_flat = i;
        }
    }
    let Some(mode) = mode else { return best };
    let n = grid.n();
    let domain = grid.domain();
    let mut base = [0.0; MAX_DIM];
    grid.point_into(best_flat, &mut base[..n]);
    let mut offsets: Vec<[f64; MAX_DIM]> = vec![[0.0; MAX_DIM]];
    for a in 0..n {
        let h2 = grid.spacing(a) / 2.0;
        let mut next = Vec::with_capacity(offsets.len() * 3);
        for o in &offsets {
            for d in [-h2, 0.0, h2] {
                let mut oo = *o;
                oo[a] = d;
                next.push(oo);
            }
        }
        offsets = next;
    }
    let mut point = [0.0; MAX_DIM];
    for off in &offsets {
        for a in 0..n {
            point[a] = domain.wrap_coord(a, base[a] + off[a]);
        }
        if domain.kind() == DomainKind::BoxDirichlet && !domain.contains(&point[..n]) {
            continue;
        }
        best = best.max(modes::evaluate_unchecked(mode, &point[..n]).abs());
    }
    best
}

/// Growth (doubling quantity) of a field over a ball.
pub fn growth_beta(
    field: &ScalarField,
    mode: Option<&EigenMode>,
    ball: &Ball,
) -> Result<GrowthRecord> {
    let sup_half = sup_abs_in_ball(field, mode, &ball.half())?;
    if sup_half == 0.0 {
        return Err(Error::ZeroHalfBall);
    }
    // every half-ball witness point also lies in the full ball
    let sup_full = sup_abs_in_ball(field, mode, ball)?.max(sup_half);
    let beta = (sup_full / sup_half).ln();
    let vanishing = ball_vanishes(field, ball)?;
    Ok(GrowthRecord {
        ball: ball.clone(),
        beta,
        sup_full,
        sup_half,
        vanishing,
    })
}

/// Growth-bound statistic over a ball pack.
#[derive(Debug, Clone)]
pub struct DfBoundReport {
    pub max_beta: f64,
    /// `max_beta / sqrt(lambda)` -- the measured constant of the growth
    /// bound; reported, never asserted.
    pub ratio: f64,
}

pub fn df_bound_ratio(
    field: &ScalarField,
    mode: &EigenMode,
    pack: &BallPack,
) -> Result<DfBoundReport> {
    if pack.balls.is_empty() {
        return Err(Error::EmptyBallPack);
    }
    let lambda = mode.lambda();
    if lambda <= 0.0 {
        return Err(Error::Inconsistent("growth ratio needs lambda > 0".into()));
    }
    let mut max_beta = 0.0f64;
    for ball in &pack.balls {
        let rec = growth_beta(field, Some(mode), ball)?;
        max_beta = max_beta.max(rec.beta);
    }
    Ok(DfBoundReport {
        max_beta,
        ratio: max_beta / lambda.sqrt(),
    })
}

/// Positivity/negativity volume ratios against the growth of the ball.
#[derive(Debug, Clone)]
pub struct PositivityRecord {
    pub ratio_pos: f64,
    pub ratio_neg: f64,
    pub beta: f64,
    pub beta_eff: f64,
    /// `ratio_pos * beta_eff^(n-1)`: the empirical lower-constant candidate.
    pub product_pos: f64,
    pub product_neg: f64,
}

/// Measure the sign-volume ratios of a vanishing ball together with its
/// growth. Errors when the ball does not satisfy the vanishing condition.
pub fn positivity_bound_record(
    field: &ScalarField,
    mode: Option<&EigenMode>,
    ball: &Ball,
) -> Result<PositivityRecord> {
    if !ball_vanishes(field, ball)? {
        return Err(Error::NonVanishingBall);
    }
    let domain = field.grid().domain();
    let n = domain.n();
    let (vol_pos, vol_neg) = sign_volumes(field, ball)?;
    let vol = ball_volume(ball, domain)?;
    let rec = growth_beta(field, mode, ball)?;
    let beta_eff = rec.beta.max(BETA_FLOOR);
    let power = beta_eff.powi(n as i32 - 1);
    Ok(PositivityRecord {
        ratio_pos: vol_pos / vol,
        ratio_neg: vol_neg / vol,
        beta: rec.beta,
        beta_eff,
        product_pos: (vol_pos / vol) * power,
        product_neg: (vol_neg / vol) * power,
    })
}
