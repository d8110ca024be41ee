//! L^p norms by grid quadrature, the piecewise spectral-cluster exponent
//! `delta(p)` and its Sobolev counterpart in exact rational arithmetic, the
//! Hoelder chain between L^1, L^2 and L^p, the L^1 floor and gradient sup
//! statistics, and the integral identity
//! `lambda * int |phi| = 2 * int_{phi=0} |grad phi|` on closed geometries.
//!
//! Quadrature weights: uniform `h^n` on tori (exact for low-degree
//! trigonometric polynomials), tensor trapezoid weights on boxes. All
//! reductions run on the fixed deterministic tree.

use num_rational::Rational64;

use crate::geometry::{DomainKind, GridSpec, ScalarField, MAX_DIM};
use crate::growth::sup_abs_global;
use crate::modes::{self, EigenMode};
use crate::nodal::{MeshCells, NodalMesh};
use crate::parallel;
use crate::{Error, Result};

/// A measured norm.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub p: f64,
    pub norm: f64,
    /// Whether the underlying mode was normalized to unit L^2 beforehand.
    pub normalized: bool,
}

/// Per-axis quadrature weights (spacing times the trapezoid end factor).
fn axis_weights(grid: &GridSpec) -> Vec<Vec<f64>> {
    let res = grid.resolution();
    (0..grid.n())
        .map(|a| {
            let h = grid.spacing(a);
            (0..res)
                .map(|i| match grid.domain().kind() {
                    DomainKind::Torus => h,
                    DomainKind::BoxDirichlet => {
                        if i == 0 || i == res - 1 {
                            h / 2.0
                        } else {
                            h
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Quadrature of `f(value) * weight` over the grid.
fn quadrature<F>(field: &ScalarField, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = field.grid();
    let n = grid.n();
    let res = grid.resolution();
    let weights = axis_weights(grid);
    let values = field.values();
    parallel::tree_sum_by(values.len(), &|flat| {
        let mut w = 1.0;
        let mut rest = flat;
        for a in (0..n).rev() {
            w *= weights[a][rest % res];
            rest /= res;
        }
        f(values[flat]) * w
    })
}

/// L^p norm of a sampled field; `p = infinity` uses the sup estimator
/// shared with the growth module.
pub fn lp_norm(field: &ScalarField, p: f64, mode: Option<&EigenMode>) -> Result<NormReport> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::ExponentOutOfRange(format!("{p}")));
    }
    let norm = if p.is_infinite() {
        sup_abs_global(field, mode)
    } else if p == 1.0 {
        quadrature(field, |v| v.abs())
    } else if p == 2.0 {
        quadrature(field, |v| v * v).sqrt()
    } else {
        quadrature(field, |v| v.abs().powf(p)).powf(1.0 / p)
    };
    Ok(NormReport {
        p,
        norm,
        normalized: false,
    })
}

/// A Lebesgue exponent for the exact rational formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValue {
    Finite(Rational64),
    Infinity,
}

impl PValue {
    pub fn from_integer(p: i64) -> Self {
        PValue::Finite(Rational64::from_integer(p))
    }
}

fn ratio(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// The kink exponent `p* = 2(n+1)/(n-1)`.
pub fn sogge_kink(n: i64) -> Rational64 {
    ratio(2 * (n + 1), n - 1)
}

/// Piecewise spectral-cluster exponent:
/// `(n-1)/4 * (1/2 - 1/p)` up to the kink, `n/2 * (1/2 - 1/p) - 1/4` above.
pub fn sogge_delta(n: i64, p: PValue) -> Result<Rational64> {
    if n < 2 {
        return Err(Error::DimensionOutOfRange(n.max(0) as usize));
    }
    match p {
        PValue::Infinity => Ok(ratio(n, 4) - ratio(1, 4)),
        PValue::Finite(p) => {
            if p < ratio(2, 1) {
                return Err(Error::ExponentOutOfRange(p.to_string()));
            }
            let half_gap = ratio(1, 2) - p.recip();
            if p <= sogge_kink(n) {
                Ok(ratio(n - 1, 4) * half_gap)
            } else {
                Ok(ratio(n, 2) * half_gap - ratio(1, 4))
            }
        }
    }
}

/// Sobolev comparison exponent `n/2 * (1/2 - 1/p)`.
pub fn sobolev_exponent(n: i64, p: PValue) -> Result<Rational64> {
    if n < 2 {
        return Err(Error::DimensionOutOfRange(n.max(0) as usize));
    }
    match p {
        PValue::Infinity => Ok(ratio(n, 4)),
        PValue::Finite(p) => {
            if p < ratio(2, 1) {
                return Err(Error::ExponentOutOfRange(p.to_string()));
            }
            Ok(ratio(n, 2) * (ratio(1, 2) - p.recip()))
        }
    }
}

/// Floating-point `delta(p)` for measured ratios.
pub fn sogge_delta_f64(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    if p.is_infinite() {
        return (nf - 1.0) / 4.0;
    }
    let kink = 2.0 * (nf + 1.0) / (nf - 1.0);
    let half_gap = 0.5 - 1.0 / p;
    if p <= kink {
        (nf - 1.0) / 4.0 * half_gap
    } else {
        nf / 2.0 * half_gap - 0.25
    }
}

/// Measured constant `||phi||_p / (||phi||_2 * lambda^delta(p))`.
pub fn sogge_ratio(mode: &EigenMode, field: &ScalarField, p: f64) -> Result<f64> {
    let lambda = mode.lambda();
    if lambda <= 0.0 {
        return Err(Error::Inconsistent(
            "spectral ratio is undefined at lambda = 0".into(),
        ));
    }
    let np = lp_norm(field, p, Some(mode))?.norm;
    let n2 = lp_norm(field, 2.0, Some(mode))?.norm;
    let delta = sogge_delta_f64(mode.domain().n(), p);
    Ok(np / (n2 * lambda.powf(delta)))
}

/// Hoelder chain report: `||phi||_2^2 <= ||phi||_1^((p-2)/(p-1)) *
/// ||phi||_p^(p/(p-1))`, exact at the discrete level.
#[derive(Debug, Clone)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn holder_chain_check(field: &ScalarField, p: f64) -> Result<HolderReport> {
    if p.is_nan() || p <= 2.0 {
        return Err(Error::ExponentOutOfRange(format!("{p}")));
    }
    let n1 = lp_norm(field, 1.0, None)?.norm;
    let n2 = lp_norm(field, 2.0, None)?.norm;
    let np = lp_norm(field, p, None)?.norm;
    let lhs = n2 * n2;
    let rhs = n1.powf((p - 2.0) / (p - 1.0)) * np.powf(p / (p - 1.0));
    Ok(HolderReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// L^1 floor report for a unit-L^2 mode: `l1 >= C * lambda^(-(n-1)/8)`.
#[derive(Debug, Clone)]
pub struct L1FloorReport {
    pub l1: f64,
    pub floor: f64,
    pub ratio: f64,
}

pub fn l1_lower_check(mode: &EigenMode, grid: &GridSpec) -> Result<L1FloorReport> {
    let lambda = mode.lambda();
    if lambda <= 0.0 {
        return Err(Error::Inconsistent("L^1 floor needs lambda > 0".into()));
    }
    let normalized = mode.clone().normalized();
    let field = modes::sample(&normalized, grid)?;
    let l1 = lp_norm(&field, 1.0, Some(&normalized))?.norm;
    let n = mode.domain().n() as f64;
    let floor = lambda.powf(-(n - 1.0) / 8.0);
    Ok(L1FloorReport {
        l1,
        floor,
        ratio: l1 / floor,
    })
}

/// Gradient sup report for a unit-L^2 mode against `lambda^((n+1)/4)`.
#[derive(Debug, Clone)]
pub struct GradSupReport {
    pub sup_grad: f64,
    pub scale: f64,
    pub ratio: f64,
}

pub fn grad_sup_ratio(mode: &EigenMode, grid: &GridSpec) -> Result<GradSupReport> {
    let lambda = mode.lambda();
    if lambda <= 0.0 {
        return Err(Error::Inconsistent("gradient bound needs lambda > 0".into()));
    }
    let normalized = mode.clone().normalized();
    let gfield = modes::sample_gradient_norm(&normalized, grid)?;
    // refine around the grid argmax with the closed-form gradient norm
    let mut sup = 0.0f64;
    let mut arg = 0usize;
    for (i, v) in gfield.values().iter().enumerate() {
        if *v > sup {
            sup = *v;
            arg = i;
        }
    }
    let n = grid.n();
    let domain = grid.domain();
    let mut base = [0.0; MAX_DIM];
    grid.point_into(arg, &mut base[..n]);
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
        sup = sup.max(modes::gradient_norm_at(&normalized, &point[..n]));
    }
    let scale = lambda.powf((n as f64 + 1.0) / 4.0);
    Ok(GradSupReport {
        sup_grad: sup,
        scale,
        ratio: sup / scale,
    })
}

/// Both sides of the nodal integral identity.
#[derive(Debug, Clone)]
pub struct DongReport {
    /// `lambda * int |phi|`
    pub lhs: f64,
    /// `2 * int_{phi=0} |grad phi|`
    pub rhs: f64,
    pub rel_err: f64,
}

/// Check `lambda * int_M |phi| = 2 * int_{phi=0} |grad phi|` for a closed
/// geometry. The gradient on mesh cells is evaluated from the closed form
/// at cell centroids, removing one discretization error source.
pub fn dong_identity(mode: &EigenMode, field: &ScalarField, mesh: &NodalMesh) -> Result<DongReport> {
    let grid = field.grid();
    if grid.domain() != mode.domain() || mesh.domain() != grid.domain() {
        return Err(Error::GridMismatch);
    }
    if mesh.resolution() != grid.resolution() {
        return Err(Error::GridMismatch);
    }
    if grid.domain().kind() != DomainKind::Torus {
        return Err(Error::Inconsistent(
            "the nodal integral identity is stated for closed geometries".into(),
        ));
    }
    let lambda = mode.lambda();
    if lambda == 0.0 && !mesh.is_empty() {
        return Err(Error::Inconsistent(
            "lambda = 0 with a nonempty nodal mesh".into(),
        ));
    }

    let lhs = lambda * quadrature(field, |v| v.abs());
    let rhs = 2.0 * gradient_flux(mode, mesh);
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
    Ok(DongReport { lhs, rhs, rel_err })
}

fn gradient_flux(mode: &EigenMode, mesh: &NodalMesh) -> f64 {
    match mesh.cells() {
        MeshCells::Segments(segs) => parallel::tree_sum_by(segs.len(), &|i| {
            let s = &segs[i];
            let centroid = [
                0.5 * (s[0][0] + s[1][0]),
                0.5 * (s[0][1] + s[1][1]),
            ];
            let len = ((s[1][0] - s[0][0]).powi(2) + (s[1][1] - s[0][1]).powi(2)).sqrt();
            modes::gradient_norm_at(mode, &centroid) * len
        }),
        MeshCells::Triangles(tris) => parallel::tree_sum_by(tris.len(), &|i| {
            let t = &tris[i];
            let centroid = [
                (t[0][0] + t[1][0] + t[2][0]) / 3.0,
                (t[0][1] + t[1][1] + t[2][1]) / 3.0,
                (t[0][2] + t[1][2] + t[2][2]) / 3.0,
            ];
            let u = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
            let v = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
            let cx = u[1] * v[2] - u[2] * v[1];
            let cy = u[2] * v[0] - u[0] * v[2];
            let cz = u[0] * v[1] - u[1] * v[0];
            let area = 0.5 * (cx * cx + cy * cy + cz * cz).sqrt();
            modes::gradient_norm_at(mode, &centroid) * area
        }),
    }
}
