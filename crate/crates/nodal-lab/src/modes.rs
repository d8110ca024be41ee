//! Exact eigenfunctions on the canonical flat geometries.
//!
//! An [`EigenMode`] is a finite sum of separable terms
//! `amp * prod_a trig(k_a x_a)` with integer frequencies and per-axis
//! sin/cos selectors. Every term satisfies `sum k_a^2 = lambda`, so the
//! eigen-equation `laplacian(phi) + lambda*phi = 0` holds analytically and
//! values, gradients and L^2 norms all have closed forms. Random waves are
//! seeded Gaussian superpositions over a full eigenspace of the torus.
//!
//! Catalog modes require the canonical side lengths (`2*pi` torus, `pi`
//! Dirichlet box); that convention keeps every eigenvalue an integer sum of
//! squares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, DomainKind, GridSpec, ScalarField, MAX_DIM};
use crate::parallel;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "sin")]
    Sin,
    #[serde(rename = "cos")]
    Cos,
}

/// One separable term `amplitude * prod_a trig_a(freq_a * x_a)`.
///
/// Canonical form: all frequencies nonnegative, and any zero-frequency axis
/// carries a cosine factor (a zero-frequency sine would kill the term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub amplitude: f64,
    pub freq: Vec<i64>,
    pub phases: Vec<Phase>,
}

/// An exact eigenfunction: eigenvalue plus separable terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    domain: Domain,
    lambda: f64,
    terms: Vec<ModeTerm>,
    l2_norm: f64,
    seed: Option<u64>,
}

/// External JSON shape for a mode: `{kind, n, sides, lambda, terms[], seed?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDescriptor {
    pub kind: DomainKind,
    pub n: usize,
    pub sides: Vec<f64>,
    pub lambda: f64,
    pub terms: Vec<ModeTerm>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl From<&EigenMode> for ModeDescriptor {
    fn from(mode: &EigenMode) -> Self {
        ModeDescriptor {
            kind: mode.domain.kind(),
            n: mode.domain.n(),
            sides: mode.domain.sides().to_vec(),
            lambda: mode.lambda,
            terms: mode.terms.clone(),
            seed: mode.seed,
        }
    }
}

impl ModeDescriptor {
    pub fn into_mode(self) -> Result<EigenMode> {
        let domain = Domain::new(self.kind, self.n, Some(&self.sides))?;
        EigenMode::from_terms(domain, self.terms, self.seed)
    }
}

/// One eigenvalue of the canonical domain with its exact multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub lambda: u64,
    pub multiplicity: usize,
    pub representatives: Vec<Vec<i64>>,
}

impl EigenMode {
    /// Assemble a mode from raw terms, canonicalizing and validating them.
    pub fn from_terms(domain: Domain, raw: Vec<ModeTerm>, seed: Option<u64>) -> Result<Self> {
        if !domain.has_canonical_sides() {
            return Err(Error::NonCanonicalSides);
        }
        let n = domain.n();
        let mut merged: BTreeMap<(Vec<i64>, Vec<Phase>), f64> = BTreeMap::new();
        let mut lambda: Option<i64> = None;
        for term in raw {
            if term.freq.len() != n || term.phases.len() != n {
                return Err(Error::InvalidFrequency);
            }
            let mut freq = Vec::with_capacity(n);
            let mut phases = Vec::with_capacity(n);
            let mut amp = term.amplitude;
            let mut dead = false;
            for a in 0..n {
                let k = term.freq[a];
                let mut phase = term.phases[a];
                if domain.kind() == DomainKind::BoxDirichlet {
                    if phase == Phase::Cos {
                        return Err(Error::CosineOnDirichletBox);
                    }
                    if k < 1 {
                        return Err(Error::InvalidFrequency);
                    }
                }
                if k == 0 && phase == Phase::Sin {
                    dead = true; // sin(0 x) == 0
                }
                let mag = k.abs();
                if k < 0 && phase == Phase::Sin {
                    amp = -amp; // sin(-k x) = -sin(k x)
                }
                if mag == 0 {
                    phase = Phase::Cos;
                }
                freq.push(mag);
                phases.push(phase);
            }
            if dead || amp == 0.0 {
                continue;
            }
            let term_lambda: i64 = freq.iter().map(|k| k * k).sum();
            match lambda {
                None => lambda = Some(term_lambda),
                Some(l) if l != term_lambda => {
                    return Err(Error::Inconsistent(
                        "terms with different eigenvalues in one mode".into(),
                    ))
                }
                _ => {}
            }
            *merged.entry((freq, phases)).or_insert(0.0) += amp;
        }
        let terms: Vec<ModeTerm> = merged
            .into_iter()
            .filter(|&(_, amp)| amp != 0.0)
            .map(|((freq, phases), amplitude)| ModeTerm {
                amplitude,
                freq,
                phases,
            })
            .collect();
        let lambda = match (lambda, terms.is_empty()) {
            (Some(l), false) => l as f64,
            _ => {
                return Err(Error::Inconsistent(
                    "mode has no surviving terms".into(),
                ))
            }
        };
        let l2_norm = closed_form_l2(&domain, &terms);
        Ok(EigenMode {
            domain,
            lambda,
            terms,
            l2_norm,
            seed,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn terms(&self) -> &[ModeTerm] {
        &self.terms
    }

    /// Closed-form L^2 norm over the whole domain.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Largest frequency magnitude appearing in any term.
    pub fn max_freq(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.freq.iter().cloned())
            .max()
            .unwrap_or(0)
    }

    /// Rescale so the closed-form L^2 norm equals one.
    pub fn normalized(mut self) -> Self {
        if self.l2_norm > 0.0 {
            let inv = 1.0 / self.l2_norm;
            for t in &mut self.terms {
                t.amplitude *= inv;
            }
            self.l2_norm = 1.0;
        }
        self
    }

    /// Upper bound `sum |amplitudes|` on `sup |phi|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }
}

fn trig(phase: Phase, k: i64, x: f64) -> f64 {
    let arg = k as f64 * x;
    match phase {
        Phase::Sin => arg.sin(),
        Phase::Cos => arg.cos(),
    }
}

fn trig_derivative(phase: Phase, k: i64, x: f64) -> f64 {
    let kf = k as f64;
    let arg = kf * x;
    match phase {
        Phase::Sin => kf * arg.cos(),
        Phase::Cos => -kf * arg.sin(),
    }
}

fn closed_form_l2(domain: &Domain, terms: &[ModeTerm]) -> f64 {
    // Canonical terms are pairwise orthogonal, so the square norm is the sum
    // of per-term products of one-dimensional integrals.
    let mut sq = 0.0;
    for t in terms {
        let mut factor = t.amplitude * t.amplitude;
        for a in 0..domain.n() {
            let side = domain.side(a);
            factor *= if t.freq[a] == 0 { side } else { side / 2.0 };
        }
        sq += factor;
    }
    sq.sqrt()
}

/// Point evaluation of a mode.
pub fn evaluate(mode: &EigenMode, point: &[f64]) -> Result<f64> {
    let domain = mode.domain();
    if point.len() != domain.n() {
        return Err(Error::Inconsistent("point dimension mismatch".into()));
    }
    if !domain.contains(point) {
        return Err(Error::PointOutsideDomain);
    }
    Ok(evaluate_unchecked(mode, point))
}

pub(crate) fn evaluate_unchecked(mode: &EigenMode, point: &[f64]) -> f64 {
    let mut sum = 0.0;
    for t in &mode.terms {
        let mut prod = t.amplitude;
        for ((&phase, &k), &x) in t.phases.iter().zip(&t.freq).zip(point) {
            prod *= trig(phase, k, x);
        }
        sum += prod;
    }
    sum
}

/// Closed-form gradient of a mode.
pub fn evaluate_gradient(mode: &EigenMode, point: &[f64]) -> Result<Vec<f64>> {
    let domain = mode.domain();
    if point.len() != domain.n() {
        return Err(Error::Inconsistent("point dimension mismatch".into()));
    }
    if !domain.contains(point) {
        return Err(Error::PointOutsideDomain);
    }
    let mut grad = vec![0.0; domain.n()];
    evaluate_gradient_into(mode, point, &mut grad);
    Ok(grad)
}

pub(crate) fn evaluate_gradient_into(mode: &EigenMode, point: &[f64], grad: &mut [f64]) {
    let n = mode.domain.n();
    grad[..n].fill(0.0);
    for t in &mode.terms {
        // per-axis factor values and derivatives
        let mut vals = [0.0; MAX_DIM];
        let mut ders = [0.0; MAX_DIM];
        for (a, ((&phase, &k), &x)) in t.phases.iter().zip(&t.freq).zip(point).enumerate() {
            vals[a] = trig(phase, k, x);
            ders[a] = trig_derivative(phase, k, x);
        }
        for (c, g) in grad[..n].iter_mut().enumerate() {
            let mut prod = t.amplitude;
            for a in 0..n {
                prod *= if a == c { ders[a] } else { vals[a] };
            }
            *g += prod;
        }
    }
}

pub(crate) fn gradient_norm_at(mode: &EigenMode, point: &[f64]) -> f64 {
    let mut grad = [0.0; MAX_DIM];
    let n = mode.domain.n();
    evaluate_gradient_into(mode, point, &mut grad[..n]);
    grad[..n].iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Build the separable mode `prod_a trig(k_a x_a)` with unit amplitude.
pub fn make_mode(domain: &Domain, freq: &[i64], phases: &[Phase]) -> Result<EigenMode> {
    EigenMode::from_terms(
        domain.clone(),
        vec![ModeTerm {
            amplitude: 1.0,
            freq: freq.to_vec(),
            phases: phases.to_vec(),
        }],
        None,
    )
}

/// Convenience: all-sin separable mode, cos on zero-frequency axes.
pub fn make_sin_mode(domain: &Domain, freq: &[i64]) -> Result<EigenMode> {
    let phases: Vec<Phase> = freq
        .iter()
        .map(|&k| if k == 0 { Phase::Cos } else { Phase::Sin })
        .collect();
    make_mode(domain, freq, &phases)
}

/// Integer lattice vectors with `|k|^2 = lambda` (torus eigenspace).
pub fn torus_lattice_points(n: usize, lambda: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let bound = (lambda as f64).sqrt() as i64 + 1;
    let mut k = vec![-bound; n];
    loop {
        let norm: i64 = k.iter().map(|x| x * x).sum();
        if norm as u64 == lambda {
            out.push(k.clone());
        }
        let mut a = n;
        loop {
            if a == 0 {
                out.sort();
                return out;
            }
            a -= 1;
            k[a] += 1;
            if k[a] <= bound {
                break;
            }
            k[a] = -bound;
        }
    }
}

/// Positive lattice vectors with `|k|^2 = lambda` (Dirichlet box eigenspace).
pub fn box_lattice_points(n: usize, lambda: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let bound = (lambda as f64).sqrt() as i64 + 1;
    let mut k = vec![1i64; n];
    if lambda == 0 {
        return out;
    }
    loop {
        let norm: i64 = k.iter().map(|x| x * x).sum();
        if norm as u64 == lambda {
            out.push(k.clone());
        }
        let mut a = n;
        loop {
            if a == 0 {
                out.sort();
                return out;
            }
            a -= 1;
            k[a] += 1;
            if k[a] <= bound {
                break;
            }
            k[a] = 1;
        }
    }
}

/// All eigenvalues up to `lambda_max`, ascending, with exact multiplicities.
pub fn enumerate_eigenvalues(domain: &Domain, lambda_max: f64) -> Result<Vec<EigenvalueEntry>> {
    if !domain.has_canonical_sides() {
        return Err(Error::NonCanonicalSides);
    }
    if lambda_max < 0.0 {
        return Err(Error::Inconsistent("lambda_max must be nonnegative".into()));
    }
    let n = domain.n();
    let cap = lambda_max.floor() as u64;
    let mut buckets: BTreeMap<u64, Vec<Vec<i64>>> = BTreeMap::new();
    let bound = (cap as f64).sqrt() as i64 + 1;
    let (lo, hi) = match domain.kind() {
        DomainKind::Torus => (-bound, bound),
        DomainKind::BoxDirichlet => (1, bound),
    };
    if lo > hi {
        return Ok(Vec::new());
    }
    let mut k = vec![lo; n];
    loop {
        let norm: i64 = k.iter().map(|x| x * x).sum();
        if (norm as u64) <= cap {
            buckets.entry(norm as u64).or_default().push(k.clone());
        }
        let mut a = n;
        loop {
            if a == 0 {
                return Ok(buckets
                    .into_iter()
                    .map(|(lambda, mut reps)| {
                        reps.sort();
                        EigenvalueEntry {
                            lambda,
                            multiplicity: reps.len(),
                            representatives: reps,
                        }
                    })
                    .collect());
            }
            a -= 1;
            k[a] += 1;
            if k[a] <= hi {
                break;
            }
            k[a] = lo;
        }
    }
}

/// Expand `a*cos(k.x) + b*sin(k.x)` into canonical separable terms.
///
/// Writing the plane wave as `Re[(a - i b) e^{i k.x}]` and distributing the
/// per-axis factors `cos(k_a x_a) + i sin(k_a x_a)` gives one term per
/// choice of sine axes; the surviving real coefficient is `a, b, -a, -b`
/// according to the number of sine factors mod 4.
fn expand_plane_wave(k: &[i64], a: f64, b: f64, out: &mut Vec<ModeTerm>) {
    let n = k.len();
    let coeff_cycle = [a, b, -a, -b];
    // iterate over subsets of sine axes; zero-frequency axes are cos-only
    let free: Vec<usize> = (0..n).filter(|&i| k[i] != 0).collect();
    for mask in 0..(1u32 << free.len()) {
        let mut phases = vec![Phase::Cos; n];
        let mut sines = 0usize;
        let mut sign = 1.0;
        for (bit, &axis) in free.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                phases[axis] = Phase::Sin;
                sines += 1;
                if k[axis] < 0 {
                    sign = -sign; // sin(-|k| x) = -sin(|k| x)
                }
            }
        }
        let amplitude = coeff_cycle[sines % 4] * sign;
        if amplitude == 0.0 {
            continue;
        }
        out.push(ModeTerm {
            amplitude,
            freq: k.iter().map(|x| x.abs()).collect(),
            phases,
        });
    }
}

/// Seeded random superposition over the full torus eigenspace of `lambda`,
/// normalized to unit L^2 norm.
///
/// For each `{k, -k}` pair of lattice vectors (lexicographic half-lattice
/// order) two standard normals are drawn, one for the cosine and one for the
/// sine component; the zero vector draws a single coefficient. The draw
/// order is part of the reproducibility contract.
pub fn make_random_wave(domain: &Domain, lambda: u64, seed: u64) -> Result<EigenMode> {
    if domain.kind() != DomainKind::Torus {
        return Err(Error::Inconsistent(
            "random waves are defined on the torus".into(),
        ));
    }
    if !domain.has_canonical_sides() {
        return Err(Error::NonCanonicalSides);
    }
    let lattice = torus_lattice_points(domain.n(), lambda);
    if lattice.is_empty() {
        return Err(Error::NotAnEigenvalue(lambda));
    }
    let mut half: Vec<Vec<i64>> = lattice
        .into_iter()
        .filter(|k|

            match k.iter().find(|&&x| x != 0) {
                Some(&first) => first > 0,
                None => true, // zero vector pairs with itself
            })
        .collect();
    half.sort();

    let mut rng = SplitMix64::new(seed);
    let mut raw = Vec::new();
    for k in &half {
        let is_zero = k.iter().all(|&x| x == 0);
        let a = rng.next_gaussian();
        let b = if is_zero { 0.0 } else { rng.next_gaussian() };
        expand_plane_wave(k, a, b, &mut raw);
    }
    Ok(EigenMode::from_terms(domain.clone(), raw, Some(seed))?.normalized())
}

/// A canonical basis of the eigenspace of `lambda`: separable products with
/// nonnegative frequencies and every sin/cos phase choice (cos forced on
/// zero-frequency axes).
pub fn eigenspace_modes(domain: &Domain, lambda: u64) -> Result<Vec<EigenMode>> {
    let n = domain.n();
    let canonical: Vec<Vec<i64>> = match domain.kind() {
        DomainKind::Torus => torus_lattice_points(n, lambda)
            .into_iter()
            .filter(|k| k.iter().all(|&x| x >= 0))
            .collect(),
        DomainKind::BoxDirichlet => box_lattice_points(n, lambda),
    };
    if canonical.is_empty() {
        return Err(Error::NotAnEigenvalue(lambda));
    }
    let mut out = Vec::new();
    for k in canonical {
        let free: Vec<usize> = (0..n)
            .filter(|&a| k[a] != 0 && domain.kind() == DomainKind::Torus)
            .collect();
        for mask in 0..(1u32 << free.len()) {
            let mut phases: Vec<Phase> = k
                .iter()
                .map(|&x| if x == 0 { Phase::Cos } else { Phase::Sin })
                .collect();
            for (bit, &axis) in free.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    phases[axis] = Phase::Cos;
                }
            }
            out.push(make_mode(domain, &k, &phases)?);
        }
    }
    Ok(out)
}

/// Sample a mode on a grid (parallel policy from the build features).
pub fn sample(mode: &EigenMode, grid: &GridSpec) -> Result<ScalarField> {
    sample_impl(mode, grid, false)
}

/// Sequential reference sampler; bit-identical to [`sample`].
pub fn sample_seq(mode: &EigenMode, grid: &GridSpec) -> Result<ScalarField> {
    sample_impl(mode, grid, true)
}

fn sample_impl(mode: &EigenMode, grid: &GridSpec, force_seq: bool) -> Result<ScalarField> {
    if grid.domain() != mode.domain() {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let res = grid.resolution();
    let count = grid.point_count();

    // Per-term per-axis lookup tables turn each sample into a handful of
    // multiplies regardless of the frequency.
    let tables: Vec<Vec<Vec<f64>>> = mode
        .terms
        .iter()
        .map(|t| {
            (0..n)
                .map(|a| {
                    (0..res)
                        .map(|i| trig(t.phases[a], t.freq[a], grid.coord(a, i)))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; count];
    let rows = count / res;
    let fill = |row: usize, slice: &mut [f64]| {
        let mut idx = [0usize; MAX_DIM];
        // decompose row into the leading n-1 indices
        let mut rest = row;
        for a in (0..n.saturating_sub(1)).rev() {
            idx[a] = rest % res;
            rest /= res;
        }
        for (t, term) in mode.terms.iter().enumerate() {
            let mut prefix = term.amplitude;
            for a in 0..n - 1 {
                prefix *= tables[t][a][idx[a]];
            }
            let last = &tables[t][n - 1];
            for (j, v) in slice.iter_mut().enumerate() {
                *v += prefix * last[j];
            }
        }
    };
    let _ = rows;
    if force_seq {
        parallel::for_each_chunk_mut_seq(&mut values, res, fill);
    } else {
        parallel::for_each_chunk_mut(&mut values, res, fill);
    }
    ScalarField::new(grid.clone(), values)
}

/// Sample `|grad phi|` on a grid from the closed-form gradient.
pub fn sample_gradient_norm(mode: &EigenMode, grid: &GridSpec) -> Result<ScalarField> {
    if grid.domain() != mode.domain() {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let res = grid.resolution();
    let count = grid.point_count();

    // tables[t][a] = factor values, dtables[t][a] = factor derivatives
    let mut tables = Vec::with_capacity(mode.terms.len());
    let mut dtables = Vec::with_capacity(mode.terms.len());
    for t in &mode.terms {
        let mut per_axis = Vec::with_capacity(n);
        let mut per_axis_d = Vec::with_capacity(n);
        for a in 0..n {
            per_axis.push(
                (0..res)
                    .map(|i| trig(t.phases[a], t.freq[a], grid.coord(a, i)))
                    .collect::<Vec<f64>>(),
            );
            per_axis_d.push(
                (0..res)
                    .map(|i| trig_derivative(t.phases[a], t.freq[a], grid.coord(a, i)))
                    .collect::<Vec<f64>>(),
            );
        }
        tables.push(per_axis);
        dtables.push(per_axis_d);
    }

    let mut values = vec![0.0; count];
    parallel::for_each_chunk_mut(&mut values, res, |row, slice| {
        let mut idx = [0usize; MAX_DIM];
        let mut rest = row;
        for a in (0..n.saturating_sub(1)).rev() {
            idx[a] = rest % res;
            rest /= res;
        }
        let mut comp = vec![0.0; res];
        for c in 0..n {
            comp.fill(0.0);
            for (t, term) in mode.terms.iter().enumerate() {
                let mut prefix = term.amplitude;
                for a in 0..n - 1 {
                    prefix *= if a == c {
                        dtables[t][a][idx[a]]
                    } else {
                        tables[t][a][idx[a]]
                    };
                }
                let last = if c == n - 1 {
                    &dtables[t][n - 1]
                } else {
                    &tables[t][n - 1]
                };
                for (j, v) in comp.iter_mut().enumerate() {
                    *v += prefix * last[j];
                }
            }
            for (j, v) in slice.iter_mut().enumerate() {
                *v += comp[j] * comp[j];
            }
        }
        for v in slice.iter_mut() {
            *v = v.sqrt();
        }
    });
    ScalarField::new(grid.clone(), values)
}

/// Maximum over interior grid points of `|laplacian_h(phi) + lambda*phi|`
/// with the second-order stencil; expected `O(h^2 lambda^2) * sup|phi|`.
pub fn laplacian_residual(mode: &EigenMode, grid: &GridSpec) -> Result<f64> {
    let max_k = mode.max_freq().max(1) as usize;
    if grid.resolution() < 8 * max_k {
        return Err(Error::GridTooCoarse(format!(
            "need >= 8 samples per wavelength: resolution {} < {}",
            grid.resolution(),
            8 * max_k
        )));
    }
    let field = sample(mode, grid)?;
    let op = crate::fd::DiscreteOperator::new(grid.clone());
    let mut out = vec![0.0; field.values().len()];
    op.apply(field.values(), &mut out);
    // out = -laplacian_h(phi); residual = lambda*phi - out
    let n = grid.n();
    let mut max_resid = 0.0f64;
    let mut idx = [0usize; MAX_DIM];
    for (i, (&v, &av)) in field.values().iter().zip(out.iter()).enumerate() {
        grid.multi_index(i, &mut idx[..n]);
        if grid.is_boundary(&idx[..n]) {
            continue;
        }
        max_resid = max_resid.max((mode.lambda * v - av).abs());
    }
    Ok(max_resid)
}
