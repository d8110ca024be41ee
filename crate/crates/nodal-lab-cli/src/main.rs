//! Command-line surface for the nodal-set laboratory.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when a numerical check
//! fails under `--strict`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nodal_lab::exponents::exponent_table;
use nodal_lab::fit::fit_power_law;
use nodal_lab::geometry::{Domain, DomainKind, GridSpec};
use nodal_lab::growth::{df_bound_ratio, growth_beta, positivity_bound_record};
use nodal_lab::harmonic::{
    iteration_experiment, mean_value_check, plane_power_re, random_harmonic,
    growth_over_unit_ball, positive_volume_fraction,
};
use nodal_lab::modes::{
    enumerate_eigenvalues, make_random_wave, make_sin_mode, sample, EigenMode, ModeDescriptor,
};
use nodal_lab::nodal::{
    extract_nodal_set, pack_nodal_balls_from_mesh, write_mesh_csv, write_mesh_gnuplot,
};
use nodal_lab::norms::{dong_identity, holder_chain_check, lp_norm, sogge_ratio};
use nodal_lab::report::{emit_report, write_report_csv, ReportFormat};
use nodal_lab::sweep::{resolution_for, run_sweep, SweepConfig};
use nodal_lab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nodal-lab",
    version,
    about = "Nodal sets of Laplace eigenfunctions on flat geometries: \
             build modes, extract and measure zero sets, check growth and \
             norm bounds, sweep eigenvalues, fit power laws"
)]
struct Cli {
    /// Seed for random waves and ensembles.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Grid resolution per axis (default: 32 samples per wavelength).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format where a file is written.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Exit with code 2 when a checked inequality fails.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Torus,
    Box,
}

impl KindArg {
    fn to_kind(self) -> DomainKind {
        match self {
            KindArg::Torus => DomainKind::Torus,
            KindArg::Box => DomainKind::BoxDirichlet,
        }
    }
}

#[derive(Args)]
struct ModeArgs {
    /// Separable sin-mode frequencies, comma separated (e.g. 2,3).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    freq: Option<Vec<i64>>,
    /// Random-wave eigenvalue (torus only; combined with --seed).
    #[arg(long)]
    lambda: Option<u64>,
    #[arg(long, value_enum, default_value_t = KindArg::Torus)]
    kind: KindArg,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
}

impl ModeArgs {
    fn build(&self, seed: u64) -> Result<EigenMode> {
        let domain = Domain::new(self.kind.to_kind(), self.n, None)?;
        match (&self.freq, self.lambda) {
            (Some(freq), None) => make_sin_mode(&domain, freq),
            (None, Some(lambda)) => make_random_wave(&domain, lambda, seed),
            _ => Err(Error::InvalidConfig(
                "pass exactly one of --freq or --lambda".into(),
            )),
        }
    }

    fn grid(&self, mode: &EigenMode, resolution: Option<usize>) -> Result<GridSpec> {
        let res = match resolution {
            Some(r) => r,
            None => {
                let lambda = mode.lambda().max(1.0) as u64;
                resolution_for(mode.domain(), lambda, 32, 1024).0
            }
        };
        GridSpec::new(mode.domain().clone(), res)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate eigenvalues with exact multiplicities.
    Modes {
        #[arg(long, value_enum, default_value_t = KindArg::Torus)]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        lambda_max: u64,
    },
    /// Sample a mode on a grid and export the field.
    Field {
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Extract the nodal set and measure it.
    Nodal {
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Pack wavelength balls on the nodal set and measure growth.
    Growth {
        #[command(flatten)]
        mode: ModeArgs,
        /// Ball radius coefficient: radius = coeff / sqrt(lambda).
        #[arg(long, default_value_t = 1.0)]
        radius_coeff: f64,
    },
    /// Check the integral identity lambda*int|phi| = 2*int_nodal |grad phi|.
    Dong {
        #[command(flatten)]
        mode: ModeArgs,
        /// Relative-error tolerance used with --strict.
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// L^p norms, spectral-cluster ratio and the Hoelder chain.
    Norms {
        #[command(flatten)]
        mode: ModeArgs,
        /// Lebesgue exponent for the ratio and chain checks.
        #[arg(long, default_value_t = 6.0)]
        p: f64,
    },
    /// Print the exact exponent table(s).
    Exponents {
        /// Dimension; omitted prints n = 2..6.
        n: Option<i64>,
    },
    /// Harmonic sandbox: growth, positive volume, mean value, iteration.
    Harmonic {
        /// Measure Re (x+iy)^k.
        #[arg(long)]
        re_degree: Option<u32>,
        /// Run a seeded ensemble of this size instead.
        #[arg(long)]
        ensemble: Option<u32>,
        #[arg(long, default_value_t = 8)]
        max_degree: u32,
        #[arg(long, default_value_t = 5)]
        depth: u32,
    },
    /// Run a sweep from a JSON config.
    Sweep { config: PathBuf },
    /// Fit a power law to two columns of a CSV file.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "lambda")]
        x: String,
        #[arg(long, default_value = "nodal_measure")]
        y: String,
    },
}

fn write_out(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Modes {
            kind,
            n,
            lambda_max,
        } => {
            let domain = Domain::new(kind.to_kind(), *n, None)?;
            let entries = enumerate_eigenvalues(&domain, *lambda_max as f64)?;
            match cli.format.parse::<ReportFormat>()? {
                ReportFormat::Json => {
                    let bytes = serde_json::to_vec_pretty(&entries)?;
                    write_out(&cli.out, &bytes)?;
                }
                _ => {
                    let mut buf = Vec::new();
                    writeln!(buf, "lambda,multiplicity")?;
                    for e in &entries {
                        writeln!(buf, "{},{}", e.lambda, e.multiplicity)?;
                    }
                    write_out(&cli.out, &buf)?;
                }
            }
            Ok(0)
        }
        Command::Field { mode } => {
            let m = mode.build(cli.seed)?;
            let grid = mode.grid(&m, cli.resolution)?;
            let field = sample(&m, &grid)?;
            match cli.format.parse::<ReportFormat>()? {
                ReportFormat::Json => {
                    let doc = serde_json::json!({
                        "descriptor": ModeDescriptor::from(&m),
                        "resolution": grid.resolution(),
                        "values": field.values(),
                    });
                    write_out(&cli.out, &serde_json::to_vec_pretty(&doc)?)?;
                }
                _ => {
                    let n = grid.n();
                    let mut buf = Vec::new();
                    let header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
                    writeln!(buf, "{},value", header.join(","))?;
                    let mut point = vec![0.0; n];
                    for (i, v) in field.values().iter().enumerate() {
                        grid.point_into(i, &mut point);
                        let coords: Vec<String> =
                            point.iter().map(|x| format!("{x:e}")).collect();
                        writeln!(buf, "{},{v:e}", coords.join(","))?;
                    }
                    write_out(&cli.out, &buf)?;
                }
            }
            eprintln!(
                "lambda {} resolution {} sup |phi| <= {:e}",
                m.lambda(),
                grid.resolution(),
                m.amplitude_sum()
            );
            Ok(0)
        }
        Command::Nodal { mode } => {
            let m = mode.build(cli.seed)?;
            let grid = mode.grid(&m, cli.resolution)?;
            let field = sample(&m, &grid)?;
            let mesh = extract_nodal_set(&field)?;
            println!(
                "lambda {} resolution {} cells {} total_measure {:.6}",
                m.lambda(),
                grid.resolution(),
                mesh.cell_count(),
                mesh.total_measure()
            );
            if let Some(out) = &cli.out {
                let mut buf = Vec::new();
                match cli.format.parse::<ReportFormat>()? {
                    ReportFormat::Gnuplot => write_mesh_gnuplot(&mesh, &mut buf)?,
                    _ => write_mesh_csv(&mesh, &mut buf)?,
                }
                std::fs::write(out, &buf)?;
                println!("wrote {}", out.display());
            }
            Ok(0)
        }
        Command::Growth { mode, radius_coeff } => {
            let m = mode.build(cli.seed)?;
            let grid = mode.grid(&m, cli.resolution)?;
            let field = sample(&m, &grid)?;
            let mesh = extract_nodal_set(&field)?;
            let pack = pack_nodal_balls_from_mesh(&field, &mesh, m.lambda(), *radius_coeff)?;
            let df = df_bound_ratio(&field, &m, &pack)?;
            let mut min_product = f64::INFINITY;
            let mut vanishing = 0usize;
            let mut buf = Vec::new();
            writeln!(buf, "center,radius,beta,vanishing,ratio_pos,product_pos")?;
            for ball in &pack.balls {
                let rec = growth_beta(&field, Some(&m), ball)?;
                let (ratio_pos, product_pos) = if rec.vanishing {
                    vanishing += 1;
                    let p = positivity_bound_record(&field, Some(&m), ball)?;
                    min_product = min_product.min(p.product_pos.min(p.product_neg));
                    (format!("{:e}", p.ratio_pos), format!("{:e}", p.product_pos))
                } else {
                    (String::new(), String::new())
                };
                let center: Vec<String> =
                    ball.center.iter().map(|x| format!("{x:.4}")).collect();
                writeln!(
                    buf,
                    "({}),{:e},{:e},{},{},{}",
                    center.join(" "),
                    ball.radius,
                    rec.beta,
                    rec.vanishing,
                    ratio_pos,
                    product_pos
                )?;
            }
            println!(
                "lambda {} balls {} vanishing {} max_beta {:.6} growth_ratio {:.6} min_pos_product {:.6}",
                m.lambda(),
                pack.count(),
                vanishing,
                df.max_beta,
                df.ratio,
                min_product
            );
            if let Some(out) = &cli.out {
                std::fs::write(out, &buf)?;
                println!("wrote {}", out.display());
            }
            Ok(0)
        }
        Command::Dong { mode, tol } => {
            let m = mode.build(cli.seed)?;
            let grid = mode.grid(&m, cli.resolution)?;
            let field = sample(&m, &grid)?;
            let mesh = extract_nodal_set(&field)?;
            let report = dong_identity(&m, &field, &mesh)?;
            println!(
                "lambda {} lhs {:.6} rhs {:.6} rel_err {:.3e}",
                m.lambda(),
                report.lhs,
                report.rhs,
                report.rel_err
            );
            if cli.strict && report.rel_err > *tol {
                eprintln!("integral identity off by {:.3e} > {tol:.3e}", report.rel_err);
                return Ok(2);
            }
            Ok(0)
        }
        Command::Norms { mode, p } => {
            let m = mode.build(cli.seed)?;
            let grid = mode.grid(&m, cli.resolution)?;
            let field = sample(&m, &grid)?;
            for q in [1.0, 2.0, *p, f64::INFINITY] {
                let r = lp_norm(&field, q, Some(&m))?;
                println!("L^{q:<4} = {:.8}", r.norm);
            }
            if m.lambda() > 0.0 {
                let ratio = sogge_ratio(&m, &field, *p)?;
                println!("cluster ratio (p={p}) = {ratio:.8}");
            }
            let holder = holder_chain_check(&field, *p)?;
            println!(
                "hoelder chain: lhs {:.8} <= rhs {:.8} -> {}",
                holder.lhs,
                holder.rhs,
                if holder.pass { "ok" } else { "VIOLATED" }
            );
            if cli.strict && !holder.pass {
                return Ok(2);
            }
            Ok(0)
        }
        Command::Exponents { n } => {
            let dims: Vec<i64> = match n {
                Some(n) => vec![*n],
                None => (2..=6).collect(),
            };
            match cli.format.parse::<ReportFormat>()? {
                ReportFormat::Json => {
                    let docs: Vec<serde_json::Value> = dims
                        .iter()
                        .map(|&d| exponent_table(d).map(|t| t.to_json()))
                        .collect::<Result<_>>()?;
                    write_out(&cli.out, &serde_json::to_vec_pretty(&docs)?)?;
                }
                _ => {
                    let mut buf = Vec::new();
                    for &d in &dims {
                        let table = exponent_table(d)?;
                        if !table.chain_identities_hold() {
                            return Err(Error::Inconsistent(
                                "exponent chain identities failed".into(),
                            ));
                        }
                        write!(buf, "{table}")?;
                    }
                    write_out(&cli.out, &buf)?;
                }
            }
            Ok(0)
        }
        Command::Harmonic {
            re_degree,
            ensemble,
            max_degree,
            depth,
        } => {
            if let Some(k) = re_degree {
                let u = plane_power_re(*k);
                let beta = growth_over_unit_ball(&u);
                let frac = positive_volume_fraction(&u);
                println!(
                    "Re z^{k}: beta {:.6} (k log 2 = {:.6}) positive fraction {:.4}",
                    beta,
                    *k as f64 * std::f64::consts::LN_2,
                    frac
                );
                return Ok(0);
            }
            if let Some(count) = ensemble {
                let mut passes = 0u32;
                let mut done = 0u32;
                let mut seed = cli.seed;
                let mut min_c = f64::INFINITY;
                while done < *count {
                    let u = random_harmonic(2, *max_degree, seed)?;
                    seed += 1;
                    if u.evaluate(&[0.0, 0.0]) <= 0.0 {
                        continue;
                    }
                    done += 1;
                    let mv = mean_value_check(&u)?;
                    if mv.pass {
                        passes += 1;
                    }
                    let it = iteration_experiment(&u, *depth)?;
                    let beta_eff = it.beta.max(std::f64::consts::LN_2);
                    min_c = min_c.min(it.vol_pos_fraction * beta_eff);
                }
                println!(
                    "ensemble {done}: mean-value pass {passes}/{done}, min fraction*beta_eff {min_c:.6}"
                );
                return Ok(if passes == done { 0 } else { 2 });
            }
            Err(Error::InvalidConfig(
                "pass --re-degree <k> or --ensemble <count>".into(),
            ))
        }
        Command::Sweep { config } => {
            let text = std::fs::read_to_string(config)?;
            let mut cfg: SweepConfig = serde_json::from_str(&text)?;
            if let Some(out) = &cli.out {
                cfg.output_dir = Some(out.clone());
            }
            let report = run_sweep(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.fits {
                println!(
                    "fit {}: slope {:.4} intercept {:.4} r2 {:.4}",
                    f.quantity, f.slope, f.intercept, f.r2
                );
            }
            match &cfg.output_dir {
                Some(dir) => {
                    for path in emit_report(&report, dir)? {
                        println!("wrote {}", path.display());
                    }
                }
                None => {
                    let mut buf = Vec::new();
                    write_report_csv(&report, &mut buf)?;
                    std::io::stdout().write_all(&buf)?;
                }
            }
            Ok(0)
        }
        Command::Fit { csv, x, y } => {
            let text = std::fs::read_to_string(csv)?;
            let mut lines = text.lines();
            let header = lines
                .next()
                .ok_or_else(|| Error::InvalidConfig("empty csv".into()))?;
            let cols: Vec<&str> = header.split(',').collect();
            let xi = cols
                .iter()
                .position(|c| c == x)
                .ok_or_else(|| Error::InvalidConfig(format!("no column {x:?}")))?;
            let yi = cols
                .iter()
                .position(|c| c == y)
                .ok_or_else(|| Error::InvalidConfig(format!("no column {y:?}")))?;
            let mut points = Vec::new();
            for line in lines {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() <= xi.max(yi) {
                    continue;
                }
                if let (Ok(px), Ok(py)) =
                    (fields[xi].parse::<f64>(), fields[yi].parse::<f64>())
                {
                    if px > 0.0 && py > 0.0 {
                        points.push((px, py));
                    }
                }
            }
            let fit = fit_power_law(&points)?;
            println!(
                "{} ~ {}^{:.6}: slope {:.6} intercept {:.6} r2 {:.6} ({} points)",
                y,
                x,
                fit.slope,
                fit.slope,
                fit.intercept,
                fit.r2,
                points.len()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
