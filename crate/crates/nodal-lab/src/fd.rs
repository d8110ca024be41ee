//! Independent finite-difference eigensolver.
//!
//! The operator is the matrix-free second-order (2n+1)-point stencil for
//! `-laplacian_h` with periodic wrap on tori and zero-Dirichlet closure on
//! boxes. Eigenpairs come from shifted inverse power iteration with
//! conjugate-gradient inner solves; on tori the constant mode is deflated so
//! small shifts reach the first nonzero eigenvalue. The solver exists to
//! cross-validate the analytic catalog, so it reports its own residual
//! rather than assuming convergence.

use crate::geometry::{DomainKind, GridSpec, ScalarField, MAX_DIM};
use crate::modes::{self, EigenMode};
use crate::parallel;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Matrix-free `-laplacian_h` on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: GridSpec,
    /// per-axis flat-index deltas for the +1 / -1 neighbors; `None` encodes
    /// a missing neighbor outside a Dirichlet box (value 0)
    plus: Vec<Vec<Option<isize>>>,
    minus: Vec<Vec<Option<isize>>>,
    inv_h2: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let res = grid.resolution();
        let strides = grid.strides();
        let wrap = grid.domain().kind() == DomainKind::Torus;
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for &stride in strides.iter().take(n) {
            let s = stride as isize;
            let mut pa = Vec::with_capacity(res);
            let mut ma = Vec::with_capacity(res);
            for i in 0..res {
                pa.push(if i + 1 < res {
                    Some(s)
                } else if wrap {
                    Some(-((res - 1) as isize) * s)
                } else {
                    None
                });
                ma.push(if i > 0 {
                    Some(-s)
                } else if wrap {
                    Some(((res - 1) as isize) * s)
                } else {
                    None
                });
            }
            plus.push(pa);
            minus.push(ma);
        }
        let inv_h2 = (0..n).map(|a| 1.0 / (grid.spacing(a) * grid.spacing(a))).collect();
        DiscreteOperator {
            grid,
            plus,
            minus,
            inv_h2,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `out = -laplacian_h(u)` with zero closure outside a Dirichlet box.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        let res = self.grid.resolution();
        debug_assert_eq!(u.len(), self.grid.point_count());
        debug_assert_eq!(out.len(), u.len());

        // Borrow everything the closure needs up front.
        let plus = &self.plus;
        let minus = &self.minus;
        let inv_h2 = &self.inv_h2;
        let u_ref = u;
        parallel::for_each_chunk_mut(out, res, |row, slice| {
            let mut idx = [0usize; MAX_DIM];
            let mut rest = row;
            for a in (0..n.saturating_sub(1)).rev() {
                idx[a] = rest % res;
                rest /= res;
            }
            let base = row * res;
            for (j, o) in slice.iter_mut().enumerate() {
                idx[n - 1] = j;
                let flat = base + j;
                let center = u_ref[flat];
                let mut acc = 0.0;
                for a in 0..n {
                    let up = match plus[a][idx[a]] {
                        Some(d) => u_ref[(flat as isize + d) as usize],
                        None => 0.0,
                    };
                    let dn = match minus[a][idx[a]] {
                        Some(d) => u_ref[(flat as isize + d) as usize],
                        None => 0.0,
                    };
                    acc += (2.0 * center - up - dn) * inv_h2[a];
                }
                *o = acc;
            }
        });
    }

    pub fn apply_alloc(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply(u, &mut out);
        out
    }

    /// Project onto the solver subspace: zero the boundary ring on boxes,
    /// remove the mean (constant mode) on tori.
    pub fn project(&self, u: &mut [f64]) {
        match self.grid.domain().kind() {
            DomainKind::Torus => {
                let mean = parallel::tree_sum(u) / u.len() as f64;
                for v in u.iter_mut() {
                    *v -= mean;
                }
            }
            DomainKind::BoxDirichlet => {
                let n = self.grid.n();
                let mut idx = [0usize; MAX_DIM];
                for (flat, value) in u.iter_mut().enumerate() {
                    self.grid.multi_index(flat, &mut idx[..n]);
                    if self.grid.is_boundary(&idx[..n]) {
                        *value = 0.0;
                    }
                }
            }
        }
    }
}

/// An eigenpair estimate with its measured residual.
#[derive(Debug, Clone)]
pub struct EigenpairEstimate {
    pub lambda_hat: f64,
    pub field: ScalarField,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Cross-validation report against a catalog mode.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub lambda_rel_err: f64,
    pub subspace_angle: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    parallel::tree_sum_by(a.len(), &|i| a[i] * b[i])
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradient on the shifted system `(A - shift) x = b`, restricted
/// to the operator's solver subspace. Returns the iteration count.
fn cg_solve(
    op: &DiscreteOperator,
    shift: f64,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let len = b.len();
    let mut r = b.to_vec();
    x.fill(0.0);
    let mut p = r.clone();
    let mut ap = vec![0.0; len];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(0);
    }
    let mut rs_old = dot(&r, &r);
    for it in 0..max_iter {
        op.apply(&p, &mut ap);
        for i in 0..len {
            ap[i] -= shift * p[i];
        }
        op.project(&mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Inconsistent(format!(
                "shifted system is not positive definite (p.Ap = {pap:.3e}); \
                 move the shift below the target eigenvalue"
            )));
        }
        let alpha = rs_old / pap;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() <= rel_tol * b_norm {
            return Ok(it + 1);
        }
        let beta = rs_new / rs_old;
        for i in 0..len {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    Ok(max_iter)
}

/// Shifted inverse power iteration; stops when successive Rayleigh quotients
/// differ by less than `tol`. Returns the estimate nearest the shift.
pub fn solve_eigenpair(
    op: &DiscreteOperator,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EigenpairEstimate> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Inconsistent("tolerance must be positive".into()));
    }
    let len = op.grid().point_count();
    let mut rng = SplitMix64::new(0x6e6f_6461_6c5f_6664); // fixed solver seed
    let mut v: Vec<f64> = (0..len).map(|_| rng.next_f64() - 0.5).collect();
    op.project(&mut v);
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }

    let cg_tol = 1e-8;
    let cg_max = 40 * (len as f64).sqrt() as usize + 200;
    let mut w = vec![0.0; len];
    let mut av = vec![0.0; len];
    let mut rq_prev = f64::INFINITY;
    let mut rq = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        cg_solve(op, shift, &v, &mut w, cg_tol, cg_max)?;
        op.project(&mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return Err(Error::Inconsistent("inverse iteration collapsed to zero".into()));
        }
        for i in 0..len {
            v[i] = w[i] / nw;
        }
        op.apply(&v, &mut av);
        op.project(&mut av);
        rq = dot(&v, &av);
        if (rq - rq_prev).abs() < tol {
            converged = true;
            break;
        }
        rq_prev = rq;
    }

    let mut resid = vec![0.0; len];
    op.apply(&v, &mut resid);
    op.project(&mut resid);
    for i in 0..len {
        resid[i] -= rq * v[i];
    }
    let residual_norm = norm(&resid); // v has unit coefficient norm

    // store the field with unit discrete L2 norm
    let weight = op.grid().cell_volume().sqrt();
    let scale = 1.0 / (norm(&v) * weight);
    let field_values: Vec<f64> = v.iter().map(|x| x * scale).collect();
    let field = ScalarField::new(op.grid().clone(), field_values)?;

    Ok(EigenpairEstimate {
        lambda_hat: rq,
        field,
        residual_norm,
        converged,
        iterations,
    })
}

/// Discrete eigenvalue of the stencil for a separable frequency vector:
/// `sum_a (2 - 2 cos(k_a h_a)) / h_a^2`.
pub fn discrete_eigenvalue(grid: &GridSpec, freq: &[i64]) -> f64 {
    (0..grid.n())
        .map(|a| {
            let h = grid.spacing(a);
            (2.0 - 2.0 * (freq[a] as f64 * h).cos()) / (h * h)
        })
        .sum()
}

/// Compare a solver estimate against the sampled eigenspace of a catalog
/// mode: relative eigenvalue error and the angle between the estimated
/// field and the eigenspace span.
pub fn validate_against_catalog(
    estimate: &EigenpairEstimate,
    mode: &EigenMode,
) -> Result<ValidationReport> {
    let grid = estimate.field.grid();
    if grid.domain() != mode.domain() {
        return Err(Error::GridMismatch);
    }
    let lambda = mode.lambda();
    if lambda <= 0.0 {
        return Err(Error::Inconsistent(
            "catalog validation needs a positive eigenvalue".into(),
        ));
    }
    let lambda_rel_err = (estimate.lambda_hat - lambda).abs() / lambda;

    // Orthonormal basis of the sampled eigenspace (modified Gram-Schmidt).
    let basis_modes = modes::eigenspace_modes(mode.domain(), lambda as u64)?;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for bm in &basis_modes {
        let mut s = modes::sample(bm, grid)?.values().to_vec();
        for q in &basis {
            let c = dot(&s, q);
            for i in 0..s.len() {
                s[i] -= c * q[i];
            }
        }
        let ns = norm(&s);
        if ns > 1e-10 {
            for x in s.iter_mut() {
                *x /= ns;
            }
            basis.push(s);
        }
    }
    let v = estimate.field.values();
    let nv = norm(v);
    let mut proj_sq = 0.0;
    for q in &basis {
        let c = dot(v, q) / nv;
        proj_sq += c * c;
    }
    let cosine = proj_sq.sqrt().min(1.0);
    Ok(ValidationReport {
        lambda_rel_err,
        subspace_angle: cosine.acos(),
    })
}
