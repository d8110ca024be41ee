//! Acceptance suite: one test per criterion, each asserting its stated
//! tolerance and printing a PASS line with the elapsed time.
//!
//! The random-wave ensemble (lambda in {25, 100, 400, 900}, seeds 1..=5,
//! 32 samples per wavelength) is computed once and shared by the scaling
//! criteria. Run with `--nocapture` to see the per-criterion lines.

use std::sync::OnceLock;
use std::time::Instant;

use num_rational::Rational64;

use nodal_lab::exponents::exponent_table;
use nodal_lab::fd::{solve_eigenpair, validate_against_catalog, DiscreteOperator};
use nodal_lab::geometry::{Ball, Domain, GridSpec, ScalarField};
use nodal_lab::growth::growth_beta;
use nodal_lab::harmonic::{
    growth_over_unit_ball, mean_value_check, plane_power_re, positive_volume_fraction,
    random_harmonic,
};
use nodal_lab::modes::{make_sin_mode, sample};
use nodal_lab::nodal::extract_nodal_set;
use nodal_lab::norms::{
    dong_identity, holder_chain_check, sobolev_exponent, sogge_delta, sogge_kink, PValue,
};
use nodal_lab::report::write_report_csv;
use nodal_lab::rng::SplitMix64;
use nodal_lab::sweep::{run_sweep, SweepConfig, SweepReport};

fn ratio(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn t2() -> Domain {
    Domain::torus(2).unwrap()
}

static ENSEMBLE: OnceLock<SweepReport> = OnceLock::new();

fn ensemble() -> &'static SweepReport {
    ENSEMBLE.get_or_init(|| {
        let config = SweepConfig::random_waves(vec![25, 100, 400, 900], vec![1, 2, 3, 4, 5]);
        let report = run_sweep(&config).expect("ensemble sweep");
        assert!(
            report.rows.iter().all(|r| r.error.is_none()),
            "ensemble rows failed: {:?}",
            report
                .rows
                .iter()
                .filter_map(|r| r.error.clone())
                .collect::<Vec<_>>()
        );
        report
    })
}

fn fitted_slope(report: &SweepReport, quantity: &str) -> f64 {
    report
        .fits
        .iter()
        .find(|f| f.quantity == quantity)
        .unwrap_or_else(|| panic!("no fit for {quantity}"))
        .slope
}

fn pass(label: &str, t0: Instant) {
    println!("criterion {label}: PASS ({:.2} s)", t0.elapsed().as_secs_f64());
}

#[test]
fn criterion_01_exponent_tables() {
    let t0 = Instant::now();
    for n in 2..=6i64 {
        let t = exponent_table(n).unwrap();
        assert_eq!(t.growth_volume, ratio(3 - n, 2) - ratio(1, 2 * n), "n={n}");
        assert_eq!(t.l2_concentration, ratio(3 - n, 4), "n={n}");
        assert_eq!(t.integral_identity, ratio(7 - 3 * n, 8), "n={n}");
        assert_eq!(
            t.local_density,
            -ratio((n - 1) * (n - 1), 2 * n),
            "n={n}"
        );
        assert!(t.chain_identities_hold(), "chain identities at n={n}");
    }
    let t2d = exponent_table(2).unwrap();
    assert_eq!(t2d.growth_volume, ratio(1, 4));
    assert!(t2d.growth_volume > ratio(0, 1));
    assert!(t2d.l2_concentration > ratio(0, 1));
    assert!(t2d.integral_identity > ratio(0, 1));
    let t3d = exponent_table(3).unwrap();
    assert_eq!(t3d.l2_concentration, ratio(0, 1));
    pass("01 (exponent tables)", t0);
}

#[test]
fn criterion_02_dong_identity() {
    let t0 = Instant::now();
    for a in 1..=8i64 {
        let mode = make_sin_mode(&t2(), &[a, 0]).unwrap();
        let res = 32 * a as usize; // 32 samples per wavelength
        let grid = GridSpec::new(t2(), res).unwrap();
        let field = sample(&mode, &grid).unwrap();
        let mesh = extract_nodal_set(&field).unwrap();
        let r = dong_identity(&mode, &field, &mesh).unwrap();
        let closed_form = 8.0 * std::f64::consts::PI * (a * a) as f64;
        assert!(r.rel_err < 0.01, "a={a}: rel_err {}", r.rel_err);
        assert!(
            (r.lhs - closed_form).abs() / closed_form < 0.01,
            "a={a}: lhs {} vs {closed_form}",
            r.lhs
        );
        assert!(
            (r.rhs - closed_form).abs() / closed_form < 0.01,
            "a={a}: rhs {} vs {closed_form}",
            r.rhs
        );
    }
    // doubling the resolution cuts the error by at least 2.5x
    let mode = make_sin_mode(&t2(), &[2, 0]).unwrap();
    let mut errs = Vec::new();
    for res in [64usize, 128] {
        let grid = GridSpec::new(t2(), res).unwrap();
        let field = sample(&mode, &grid).unwrap();
        let mesh = extract_nodal_set(&field).unwrap();
        errs.push(dong_identity(&mode, &field, &mesh).unwrap().rel_err);
    }
    let factor = errs[0] / errs[1];
    assert!(factor >= 2.5, "error drop factor {factor}");
    pass("02 (integral identity)", t0);
}

#[test]
fn criterion_03_nodal_measure_and_yau_scaling() {
    let t0 = Instant::now();
    // closed-form oracle: 4 + 6 coordinate circles of length 2*pi
    let mode = make_sin_mode(&t2(), &[2, 3]).unwrap();
    let grid = GridSpec::new(t2(), 256).unwrap();
    let field = sample(&mode, &grid).unwrap();
    let mesh = extract_nodal_set(&field).unwrap();
    let expect = 20.0 * std::f64::consts::PI;
    let rel = (mesh.total_measure() - expect).abs() / expect;
    assert!(rel < 0.01, "measure {} rel {rel}", mesh.total_measure());

    // random-wave scaling across two decades of lambda
    let slope = fitted_slope(ensemble(), "nodal_measure");
    assert!(
        (slope - 0.5).abs() <= 0.05,
        "nodal measure slope {slope} not within 0.5 +- 0.05"
    );
    pass("03 (nodal measure + scaling)", t0);
}

#[test]
fn criterion_04_growth_bound() {
    let t0 = Instant::now();
    let slope = fitted_slope(ensemble(), "max_beta");
    assert!(slope <= 0.6, "max beta slope {slope} exceeds 0.6");

    // nonnegativity and scale invariance on 1000 random (field, ball) pairs
    let grid = GridSpec::new(t2(), 16).unwrap();
    let mut rng = SplitMix64::new(0xACCE97);
    let side = 2.0 * std::f64::consts::PI;
    for _ in 0..1000 {
        let values: Vec<f64> = (0..grid.point_count())
            .map(|_| rng.next_gaussian())
            .collect();
        let field = ScalarField::new(grid.clone(), values).unwrap();
        let ball = Ball::new(
            vec![rng.next_f64() * side, rng.next_f64() * side],
            0.5 + rng.next_f64() * 2.0,
        );
        let base = growth_beta(&field, None, &ball).unwrap().beta;
        assert!(base >= 0.0, "negative beta {base}");
        for scale in [1e-6, 1e6] {
            let scaled = ScalarField::new(
                grid.clone(),
                field.values().iter().map(|v| v * scale).collect(),
            )
            .unwrap();
            let b = growth_beta(&scaled, None, &ball).unwrap().beta;
            assert!(
                (b - base).abs() <= 1e-12,
                "scale {scale}: beta moved {b} vs {base}"
            );
        }
    }
    pass("04 (growth bound)", t0);
}

#[test]
fn criterion_05_positivity_bound() {
    let t0 = Instant::now();
    let report = ensemble();
    let min_product_at = |lambda: u64| -> f64 {
        report
            .rows
            .iter()
            .filter(|r| r.lambda == lambda)
            .filter_map(|r| r.metrics.as_ref()?.min_pos_product)
            .fold(f64::INFINITY, f64::min)
    };
    let m100 = min_product_at(100);
    let m400 = min_product_at(400);
    assert!(m100 > 0.0 && m100.is_finite(), "m100 {m100}");
    assert!(m400 > 0.0 && m400.is_finite(), "m400 {m400}");
    let spread = (m400 / m100).max(m100 / m400);
    assert!(
        spread <= 2.0,
        "positivity product drifts: m100 {m100}, m400 {m400}, spread {spread}"
    );
    pass("05 (positivity bound)", t0);
}

#[test]
fn criterion_06_delta_formula() {
    let t0 = Instant::now();
    for n in 2..=6i64 {
        // both branches agree exactly at the kink
        let kink = sogge_kink(n);
        let below = ratio(n - 1, 4) * (ratio(1, 2) - kink.recip());
        let above = ratio(n, 2) * (ratio(1, 2) - kink.recip()) - ratio(1, 4);
        assert_eq!(below, above, "kink mismatch at n={n}");
        assert_eq!(sogge_delta(n, PValue::Finite(kink)).unwrap(), below);
        assert_eq!(
            sogge_delta(n, PValue::from_integer(2)).unwrap(),
            ratio(0, 1)
        );
        // monotone in p, strictly below the Sobolev exponent for p > 2
        let mut prev = ratio(-1, 1);
        for num in 4..=80 {
            let p = PValue::Finite(ratio(num, 2));
            let d = sogge_delta(n, p).unwrap();
            assert!(d >= prev, "monotone at n={n}");
            prev = d;
            if num > 4 {
                assert!(sobolev_exponent(n, p).unwrap() > d, "domination at n={n}");
            }
        }
        assert!(sobolev_exponent(n, PValue::Infinity).unwrap() > sogge_delta(n, PValue::Infinity).unwrap());
    }
    pass("06 (delta formula)", t0);
}

#[test]
fn criterion_07_holder_chain() {
    let t0 = Instant::now();
    let grid = GridSpec::new(t2(), 16).unwrap();
    let mut rng = SplitMix64::new(0x601d);
    for _ in 0..100 {
        let values: Vec<f64> = (0..grid.point_count())
            .map(|_| rng.next_gaussian() * 3.0)
            .collect();
        let field = ScalarField::new(grid.clone(), values).unwrap();
        for p in [3.0, 6.0, 10.0] {
            let r = holder_chain_check(&field, p).unwrap();
            assert!(r.pass, "random field violated the chain at p={p}");
        }
    }
    // catalog modes
    let g = GridSpec::new(t2(), 96).unwrap();
    for freq in [[1i64, 0], [2, 3], [3, 1]] {
        let mode = make_sin_mode(&t2(), &freq).unwrap();
        let field = sample(&mode, &g).unwrap();
        for p in [3.0, 6.0, 10.0] {
            let r = holder_chain_check(&field, p).unwrap();
            assert!(r.pass, "mode {freq:?} violated the chain at p={p}");
        }
    }
    // equality for constants
    let ones = ScalarField::constant(grid, 2.5);
    for p in [3.0, 6.0, 10.0] {
        let r = holder_chain_check(&ones, p).unwrap();
        assert!(r.pass && (r.lhs - r.rhs).abs() <= 1e-9 * r.rhs);
    }
    pass("07 (hoelder chain)", t0);
}

#[test]
fn criterion_08_gradient_and_l1_exponents() {
    let t0 = Instant::now();
    let grad_slope = fitted_slope(ensemble(), "grad_sup");
    assert!(
        grad_slope <= 0.75 + 0.05,
        "gradient sup slope {grad_slope} exceeds (n+1)/4 + 0.05"
    );
    let l1_slope = fitted_slope(ensemble(), "l1_norm");
    assert!(
        l1_slope >= -0.125 - 0.05,
        "l1 slope {l1_slope} below -(n-1)/8 - 0.05"
    );
    pass("08 (gradient + L1 exponents)", t0);
}

#[test]
fn criterion_09_fd_cross_validation() {
    let t0 = Instant::now();
    let grid = GridSpec::new(t2(), 64).unwrap();
    let op = DiscreteOperator::new(grid);
    let est = solve_eigenpair(&op, 0.9, 1e-10, 60).unwrap();
    assert!(est.converged);
    let mode = make_sin_mode(&t2(), &[1, 0]).unwrap();
    let report = validate_against_catalog(&est, &mode).unwrap();
    assert!(report.lambda_rel_err < 5e-3, "torus rel err {}", report.lambda_rel_err);
    assert!(report.subspace_angle < 0.05, "torus angle {}", report.subspace_angle);

    let b = Domain::dirichlet_box(2).unwrap();
    let grid = GridSpec::new(b.clone(), 65).unwrap();
    let op = DiscreteOperator::new(grid);
    let est = solve_eigenpair(&op, 1.8, 1e-10, 60).unwrap();
    assert!(est.converged);
    let mode = make_sin_mode(&b, &[1, 1]).unwrap();
    let report = validate_against_catalog(&est, &mode).unwrap();
    assert!(report.lambda_rel_err < 5e-3, "box rel err {}", report.lambda_rel_err);
    assert!(report.subspace_angle < 0.05, "box angle {}", report.subspace_angle);
    pass("09 (fd cross-validation)", t0);
}

#[test]
fn criterion_10_harmonic_sandbox() {
    let t0 = Instant::now();
    for k in 1..=6u32 {
        let u = plane_power_re(k);
        let beta = growth_over_unit_ball(&u);
        let expect = k as f64 * std::f64::consts::LN_2;
        assert!(
            (beta - expect).abs() <= 0.01 * expect,
            "k={k}: beta {beta} vs {expect}"
        );
        let frac = positive_volume_fraction(&u);
        assert!(
            (frac - 0.5).abs() <= 0.02,
            "k={k}: positive fraction {frac}"
        );
    }
    // mean-value check over a 50-sample ensemble positive at the origin
    let mut done = 0u32;
    let mut seed = 0u64;
    while done < 50 {
        let u = random_harmonic(2, 8, seed).unwrap();
        seed += 1;
        if u.evaluate(&[0.0, 0.0]) <= 0.0 {
            continue;
        }
        done += 1;
        let report = mean_value_check(&u).unwrap();
        assert!(
            report.pass,
            "seed {}: vol_pos {} M {}",
            seed - 1,
            report.vol_pos,
            report.m_sup
        );
    }
    pass("10 (harmonic sandbox)", t0);
}

#[test]
fn criterion_11_sweep_determinism() {
    let t0 = Instant::now();
    let mut config = SweepConfig::random_waves(vec![25, 100], vec![1, 2, 3]);
    config.samples_per_wavelength = 16;
    let mut first = Vec::new();
    write_report_csv(&run_sweep(&config).unwrap(), &mut first).unwrap();
    let mut second = Vec::new();
    write_report_csv(&run_sweep(&config).unwrap(), &mut second).unwrap();
    assert_eq!(first, second, "sweep CSV bytes differ between runs");
    assert!(!first.is_empty());
    pass("11 (sweep determinism)", t0);
}
