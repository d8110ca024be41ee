//! Flat model geometries: periodic boxes (tori) and Dirichlet boxes, with
//! regular sampling grids, metric balls, and the small measure-theoretic
//! toolbox shared by every other module.
//!
//! Torus distances are computed with the wrap-around metric: the per-axis
//! displacement is reduced to `[-side/2, side/2]` before the Euclidean norm
//! is taken. Balls on a Dirichlet box must lie entirely inside the box;
//! balls on a torus wrap freely.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Highest supported dimension.
pub const MAX_DIM: usize = 4;

/// Volume of the unit n-ball, n = 1..=4.
const UNIT_BALL_VOLUME: [f64; 4] = [
    2.0,
    std::f64::consts::PI,
    4.0 * std::f64::consts::PI / 3.0,
    std::f64::consts::PI * std::f64::consts::PI / 2.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    /// `[0, side]^n` with zero boundary condition.
    #[serde(rename = "box-dirichlet")]
    BoxDirichlet,
    /// Periodic box `R^n / (sides * Z^n)`.
    #[serde(rename = "torus")]
    Torus,
}

/// A flat model geometry: dimension, side lengths, boundary behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    kind: DomainKind,
    sides: Vec<f64>,
}

impl Domain {
    /// Build a domain. `sides = None` picks the canonical lengths:
    /// `2*pi` per axis for tori, `pi` per axis for Dirichlet boxes.
    pub fn new(kind: DomainKind, n: usize, sides: Option<&[f64]>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange(n));
        }
        let sides = match sides {
            Some(s) => {
                if s.len() != n {
                    return Err(Error::Inconsistent(format!(
                        "expected {n} side lengths, got {}",
                        s.len()
                    )));
                }
                if s.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                    return Err(Error::NonPositiveSide);
                }
                s.to_vec()
            }
            None => vec![Self::canonical_side(kind); n],
        };
        Ok(Domain { kind, sides })
    }

    pub fn torus(n: usize) -> Result<Self> {
        Self::new(DomainKind::Torus, n, None)
    }

    pub fn dirichlet_box(n: usize) -> Result<Self> {
        Self::new(DomainKind::BoxDirichlet, n, None)
    }

    pub fn canonical_side(kind: DomainKind) -> f64 {
        match kind {
            DomainKind::Torus => 2.0 * std::f64::consts::PI,
            DomainKind::BoxDirichlet => std::f64::consts::PI,
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.sides[axis]
    }

    pub fn min_side(&self) -> f64 {
        self.sides.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Catalog modes assume the canonical sides; see [`Self::new`].
    pub fn has_canonical_sides(&self) -> bool {
        let c = Self::canonical_side(self.kind);
        self.sides.iter().all(|&s| (s - c).abs() <= 1e-12 * c)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        match self.kind {
            DomainKind::Torus => point.len() == self.n(),
            DomainKind::BoxDirichlet => {
                point.len() == self.n()
                    && point.iter().zip(&self.sides).all(|(&x, &s)| x >= 0.0 && x <= s)
            }
        }
    }

    /// Reduce a coordinate to the fundamental cell (torus only).
    pub fn wrap_coord(&self, axis: usize, x: f64) -> f64 {
        match self.kind {
            DomainKind::Torus => x.rem_euclid(self.sides[axis]),
            DomainKind::BoxDirichlet => x,
        }
    }

    /// Shortest displacement from `from` to `to`, component by component.
    pub fn displacement_into(&self, from: &[f64], to: &[f64], out: &mut [f64]) {
        for a in 0..self.n() {
            let mut d = to[a] - from[a];
            if self.kind == DomainKind::Torus {
                let s = self.sides[a];
                d = d.rem_euclid(s);
                if d > s / 2.0 {
                    d -= s;
                }
            }
            out[a] = d;
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut d = [0.0; MAX_DIM];
        self.displacement_into(a, b, &mut d[..self.n()]);
        d[..self.n()].iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A regular grid over a domain: `resolution` samples per axis.
///
/// On a torus the grid covers one period without repeating the seam
/// (`h = side/resolution`); on a box it includes both endpoints
/// (`h = side/(resolution-1)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    domain: Domain,
    resolution: usize,
}

impl GridSpec {
    pub const MIN_RESOLUTION: usize = 4;

    pub fn new(domain: Domain, resolution: usize) -> Result<Self> {
        if resolution < Self::MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall {
                got: resolution,
                min: Self::MIN_RESOLUTION,
            });
        }
        Ok(GridSpec { domain, resolution })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        match self.domain.kind() {
            DomainKind::Torus => self.domain.side(axis) / self.resolution as f64,
            DomainKind::BoxDirichlet => self.domain.side(axis) / (self.resolution - 1) as f64,
        }
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.n()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    /// Product measure of one grid cell, `prod_a h_a`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.n()).map(|a| self.spacing(a)).product()
    }

    pub fn point_count(&self) -> usize {
        self.resolution.pow(self.n() as u32)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    /// Row-major strides, axis 0 slowest.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let n = self.n();
        let mut s = [0usize; MAX_DIM];
        let mut acc = 1usize;
        for a in (0..n).rev() {
            s[a] = acc;
            acc *= self.resolution;
        }
        s
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let strides = self.strides();
        multi.iter().zip(strides.iter()).map(|(&i, &s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.n();
        for a in (0..n).rev() {
            out[a] = flat % self.resolution;
            flat /= self.resolution;
        }
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let n = self.n();
        let mut idx = [0usize; MAX_DIM];
        self.multi_index(flat, &mut idx[..n]);
        for a in 0..n {
            out[a] = self.coord(a, idx[a]);
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n()];
        self.point_into(flat, &mut p);
        p
    }

    /// Whether a multi-index touches the box boundary (always false on tori).
    pub fn is_boundary(&self, multi: &[usize]) -> bool {
        match self.domain.kind() {
            DomainKind::Torus => false,
            DomainKind::BoxDirichlet => multi
                .iter()
                .any(|&i| i == 0 || i == self.resolution - 1),
        }
    }
}

/// A metric ball. `half()` is the concentric ball of half the radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius }
    }

    pub fn half(&self) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius / 2.0,
        }
    }
}

/// Check that a ball is admissible for a domain: the center must lie inside,
/// and on a Dirichlet box the whole ball must fit (balls never straddle the
/// boundary; on tori they wrap freely).
pub fn validate_ball(domain: &Domain, ball: &Ball) -> Result<()> {
    if ball.center.len() != domain.n() {
        return Err(Error::Inconsistent(
            "ball center dimension differs from domain".into(),
        ));
    }
    if !domain.contains(&ball.center) {
        return Err(Error::CenterOutsideDomain);
    }
    if domain.kind() == DomainKind::BoxDirichlet {
        for a in 0..domain.n() {
            if ball.center[a] - ball.radius < 0.0 || ball.center[a] + ball.radius > domain.side(a)
            {
                return Err(Error::BallOutsideDomain);
            }
        }
    }
    Ok(())
}

/// Exact Euclidean volume of an n-ball embedded in the domain.
/// On a torus the radius must stay below half the shortest side so the ball
/// does not overlap itself.
pub fn ball_volume(ball: &Ball, domain: &Domain) -> Result<f64> {
    let n = domain.n();
    if ball.radius >= domain.min_side() / 2.0 {
        return Err(Error::RadiusTooLarge(ball.radius));
    }
    Ok(UNIT_BALL_VOLUME[n - 1] * ball.radius.powi(n as i32))
}

/// Surface measure of the sphere of radius `r` in dimension `n` (the
/// boundary of the n-ball): `2` for n=1 (counting measure of two points),
/// `2*pi*r`, `4*pi*r^2`, `2*pi^2*r^3`.
pub fn sphere_area(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI * r,
        3 => 4.0 * std::f64::consts::PI * r * r,
        4 => 2.0 * std::f64::consts::PI * std::f64::consts::PI * r * r * r,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Grid indices whose point lies within the ball (torus metric where
/// applicable), in ascending flat order.
pub fn points_in_ball(grid: &GridSpec, ball: &Ball) -> Result<Vec<usize>> {
    let domain = grid.domain();
    if ball.center.len() != domain.n() {
        return Err(Error::Inconsistent(
            "ball center dimension differs from grid".into(),
        ));
    }
    if !domain.contains(&ball.center) {
        return Err(Error::CenterOutsideDomain);
    }
    let n = domain.n();
    let res = grid.resolution();
    let strides = grid.strides();

    // Candidate index windows per axis, then an exact distance filter.
    let mut windows: Vec<Vec<usize>> = Vec::with_capacity(n);
    for a in 0..n {
        let h = grid.spacing(a);
        let lo = ((ball.center[a] - ball.radius) / h).floor() as i64;
        let hi = ((ball.center[a] + ball.radius) / h).ceil() as i64;
        let mut idx: Vec<usize> = Vec::new();
        match domain.kind() {
            DomainKind::Torus => {
                if (hi - lo + 1) as usize >= res {
                    idx.extend(0..res);
                } else {
                    for i in lo..=hi {
                        idx.push(i.rem_euclid(res as i64) as usize);
                    }
                    idx.sort_unstable();
                    idx.dedup();
                }
            }
            DomainKind::BoxDirichlet => {
                let lo = lo.max(0) as usize;
                let hi = (hi.max(0) as usize).min(res - 1);
                idx.extend(lo..=hi);
            }
        }
        windows.push(idx);
    }

    let mut out = Vec::new();
    let mut cursor = vec![0usize; n];
    let mut point = [0.0; MAX_DIM];
    'outer: loop {
        let mut flat = 0usize;
        for a in 0..n {
            let i = windows[a][cursor[a]];
            flat += i * strides[a];
            point[a] = grid.coord(a, i);
        }
        if domain.distance(&point[..n], &ball.center) <= ball.radius {
            out.push(flat);
        }
        // odometer increment over the windows
        for a in (0..n).rev() {
            cursor[a] += 1;
            if cursor[a] < windows[a].len() {
                continue 'outer;
            }
            cursor[a] = 0;
            if a == 0 {
                break 'outer;
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Samples of a scalar function on a grid, row-major in axis order.
/// Immutable after construction; the sup of `|values|` is cached because
/// per-ball measurements consult it constantly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    max_abs: f64,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.point_count() {
            return Err(Error::Inconsistent(format!(
                "field length {} does not match grid point count {}",
                values.len(),
                grid.point_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconsistent("field contains non-finite values".into()));
        }
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(ScalarField {
            grid,
            values,
            max_abs,
        })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let len = grid.point_count();
        ScalarField {
            grid,
            values: vec![value; len],
            max_abs: value.abs(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }
}
