use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dr_subspace::ell2::{self, BlockModel, GrowthTable};
use dr_subspace::experiments::{self, Criterion, ExperimentConfig};
use dr_subspace::two_lines::{self, PlaneConfig, SurfaceQuantity};
use dr_subspace::{
    rate_report, verify_identities, Method, Quantity, RunOptions, StoppingRule, Subspace,
    SubspacePair, TraceDetail, Vector,
};
use nalgebra::Vector2;

mod svg;

use svg::{Plot, Series};

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Douglas-Rachford and alternating projections on pairs of subspaces.
#[derive(Parser, Debug)]
#[command(name = "drsub", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// `svg` also renders plots next to the data files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the operator identities on random pairs and print the residuals.
    Identities {
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Measured operator-norm decay against the Friedrichs-cosine rates.
    Rates {
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 15)]
        n_max: usize,
    },
    /// Run DR or MAP and write the per-step trace.
    Iterate(IterateArgs),
    /// Two lines in the plane: decay curves and angle/step surfaces.
    TwoLines {
        #[arg(long, default_value_t = 1)]
        theta_num: u32,
        #[arg(long, default_value_t = 17)]
        theta_den: u32,
        #[arg(long, default_value_t = 100)]
        n: u32,
        /// Points in the surface angle grid.
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Growth tables showing convergence without a linear rate.
    Ell2Demo {
        #[arg(long, default_value_t = 2000)]
        blocks: usize,
        #[arg(long, default_value_t = 0.95)]
        gamma: f64,
        #[arg(long, default_value_t = 5000)]
        n_max: usize,
    },
    /// Randomized DR-versus-MAP iteration counts with per-angle medians.
    Bench {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 10.0)]
        start_norm: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        #[arg(long, default_value_t = 32)]
        bins: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dr,
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    TrueError,
    MaxDistance,
    Count,
}

#[derive(Args, Debug)]
struct IterateArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Dr)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = RuleArg::TrueError)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Step count for `--rule count`.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    /// Ambient dimension of the random pair.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = 10.0)]
    start_norm: f64,
    /// Use two lines at angle pi*num/den with x0 = e_0 instead of a random pair.
    #[arg(long, requires = "theta_den")]
    theta_num: Option<u32>,
    #[arg(long, requires = "theta_num")]
    theta_den: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let common = cli.common;
    fs::create_dir_all(&common.out).map_err(|e| format!("{}: {e}", common.out.display()))?;
    match cli.command {
        Command::Identities { dim, pairs, n_max } => identities(&common, dim, pairs, n_max),
        Command::Rates { dim, n_max } => rates(&common, dim, n_max),
        Command::Iterate(args) => iterate(&common, &args),
        Command::TwoLines {
            theta_num,
            theta_den,
            n,
            grid,
        } => two_lines_cmd(&common, theta_num, theta_den, n, grid),
        Command::Ell2Demo {
            blocks,
            gamma,
            n_max,
        } => ell2_demo(&common, blocks, gamma, n_max),
        Command::Bench {
            pairs,
            starts,
            dim,
            epsilon,
            start_norm,
            cap,
            bins,
        } => {
            let config = ExperimentConfig {
                num_pairs: pairs,
                starts_per_pair: starts,
                epsilon,
                start_norm,
                cap,
                bins,
                seed: common.seed,
                ..ExperimentConfig::for_dimension(dim)
            };
            bench(&common, &config)
        }
    }
}

fn write(common: &Common, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = common.out.join(name);
    fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(path)
}

fn write_svg(common: &Common, name: &str, svg: impl FnOnce() -> String) -> CliResult<()> {
    if common.format == Format::Svg {
        write(common, name, &svg())?;
    }
    Ok(())
}

fn random_pairs(seed: u64, dim: usize, count: usize) -> CliResult<Vec<(Subspace, Subspace)>> {
    let config = ExperimentConfig {
        seed,
        ..ExperimentConfig::for_dimension(dim)
    };
    let mut rng = config.rng();
    (0..count)
        .map(|_| Ok(experiments::random_subspace_pair(&config, &mut rng)?))
        .collect()
}

fn identities(common: &Common, dim: usize, pairs: usize, n_max: usize) -> CliResult<()> {
    let mut text = String::new();
    let mut worst = 0.0f64;
    for (k, (u, v)) in random_pairs(common.seed, dim, pairs)?.iter().enumerate() {
        let report = verify_identities(u, v, n_max)?;
        worst = worst.max(report.max_residual());
        writeln!(text, "pair {k}: dim U = {}, dim V = {}", u.dim(), v.dim())?;
        writeln!(text, "{report}")?;
    }
    writeln!(text, "max residual = {worst:e}")?;
    print!("{text}");
    write(common, "identities.txt", &text)?;
    Ok(())
}

fn rates(common: &Common, dim: usize, n_max: usize) -> CliResult<()> {
    let (u, v) = random_pairs(common.seed, dim, 1)?.remove(0);
    let report = rate_report(&u, &v, n_max)?;
    let mut csv = String::from("n,quantity,measured,predicted\n");
    for r in &report.rows {
        writeln!(csv, "{},{},{},{}", r.n, r.quantity, r.measured, r.predicted)?;
    }
    write(common, "rates.csv", &csv)?;
    println!("friedrichs_cos = {}", report.c_f);
    println!("max_relative_error = {:e}", report.max_relative_error);
    write_svg(common, "rates.svg", || {
        let series = Quantity::ALL
            .iter()
            .map(|&q| {
                let pts = report.series(q).map(|r| (r.n as f64, r.measured)).collect();
                Series::line(q.tag(), pts)
            })
            .collect();
        Plot {
            title: format!("operator norms, c_F = {:.4}", report.c_f),
            x_label: "n".into(),
            y_label: "norm".into(),
            log_y: true,
            series,
        }
        .render()
    })
}

fn iterate(common: &Common, args: &IterateArgs) -> CliResult<()> {
    let (pair, x0) = match (args.theta_num, args.theta_den) {
        (Some(num), Some(den)) => {
            let (u, v) = PlaneConfig::from_pi_fraction(num, den)?.lines();
            (SubspacePair::new(u, v)?, Vector::from_vec(vec![1.0, 0.0]))
        }
        _ => {
            let config = ExperimentConfig {
                seed: common.seed,
                ..ExperimentConfig::for_dimension(args.dim)
            };
            let mut rng = config.rng();
            let (u, v) = experiments::random_subspace_pair(&config, &mut rng)?;
            let x0 = experiments::random_start(args.dim, args.start_norm, &mut rng)?;
            (SubspacePair::new(u, v)?, x0)
        }
    };
    let rule = match args.rule {
        RuleArg::TrueError => StoppingRule::TrueError(args.epsilon),
        RuleArg::MaxDistance => StoppingRule::MaxDistance(args.epsilon),
        RuleArg::Count => StoppingRule::FixedCount(args.count),
    };
    let opts = RunOptions {
        cap: args.cap,
        detail: TraceDetail::Scalars,
    };
    let trace = match args.method {
        MethodArg::Dr => pair.run_dr(&x0, rule, &opts)?,
        MethodArg::Map => pair.run_map(&x0, rule, &opts)?,
    };
    let mut csv = String::from(
        "n,iterate_norm,iterate_error,shadow_u_error,shadow_v_error,true_error,dist_u,dist_v\n",
    );
    for s in &trace.steps {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s.n,
            s.iterate_norm,
            s.iterate_error,
            s.shadow_u_error,
            s.shadow_v_error,
            s.true_error,
            s.dist_u,
            s.dist_v
        )?;
    }
    write(common, "trace.csv", &csv)?;
    println!(
        "{} stopped after {} iterations ({}), friedrichs_cos = {}",
        trace.method,
        trace.iterations(),
        trace.terminated_by,
        trace.friedrichs_cos
    );
    write_svg(common, "trace.svg", || {
        let pts = |f: fn(&dr_subspace::StepRecord) -> f64| {
            trace.steps.iter().map(|s| (s.n as f64, f(s))).collect()
        };
        Plot {
            title: format!("{} trace", trace.method),
            x_label: "n".into(),
            y_label: "error".into(),
            log_y: true,
            series: vec![
                Series::line("true error", pts(|s| s.true_error)),
                Series::line("dist to U", pts(|s| s.dist_u)),
                Series::line("dist to V", pts(|s| s.dist_v)),
            ],
        }
        .render()
    })
}

fn two_lines_cmd(common: &Common, num: u32, den: u32, n: u32, grid: usize) -> CliResult<()> {
    let cfg = PlaneConfig::from_pi_fraction(num, den)?;
    if grid < 2 {
        return Err("surface grid needs at least two points".into());
    }
    let curves = two_lines::figure_curves(&cfg, &Vector2::new(1.0, 0.0), n);
    let mut dat = String::from("# n dr shadow map\n");
    for (k, norms) in &curves {
        writeln!(
            dat,
            "{k} {:e} {:e} {:e}",
            norms.dr_norm, norms.shadow_norm, norms.map_norm
        )?;
    }
    write(common, "two_lines.dat", &dat)?;
    write_svg(common, "two_lines.svg", || {
        let pick = |f: fn(&two_lines::LineNorms) -> f64| {
            curves.iter().map(|(k, c)| (*k as f64, f(c))).collect()
        };
        Plot {
            title: format!("two lines, theta = {num}pi/{den}"),
            x_label: "n".into(),
            y_label: "norm".into(),
            log_y: true,
            series: vec![
                Series::line("|T^n x|", pick(|c| c.dr_norm)),
                Series::line("|P_U T^n x|", pick(|c| c.shadow_norm)),
                Series::line("|(P_V P_U)^n x|", pick(|c| c.map_norm)),
            ],
        }
        .render()
    })?;

    let t_grid: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let n_grid: Vec<u32> = (1..=n.max(1)).collect();
    for (quantity, stem) in [
        (SurfaceQuantity::Dr, "surface_dr"),
        (SurfaceQuantity::Map, "surface_map"),
        (SurfaceQuantity::Shadow, "surface_shadow"),
    ] {
        let points = two_lines::figure_surface(&t_grid, &n_grid, quantity)?;
        let mut buf = Vec::new();
        two_lines::write_surface(&mut buf, quantity, &points)?;
        write(common, &format!("{stem}.dat"), &String::from_utf8(buf)?)?;
        write_svg(common, &format!("{stem}.svg"), || {
            let cells: Vec<(f64, f64, f64)> =
                points.iter().map(|p| (p.t, p.n as f64, p.value)).collect();
            svg::heatmap(
                &format!("{quantity}, theta = (pi/2) t^3"),
                "t",
                "n",
                &cells,
                t_grid.len(),
                n_grid.len(),
            )
        })?;
    }
    Ok(())
}

fn growth_plot(title: &str, table: &GrowthTable) -> String {
    let measured = table.rows.iter().map(|r| (r.n as f64, r.scaled)).collect();
    let bound = table
        .rows
        .iter()
        .filter_map(|r| r.bound.map(|b| (r.n as f64, b)))
        .collect();
    Plot {
        title: title.into(),
        x_label: "n".into(),
        y_label: "gamma^-n norm".into(),
        log_y: true,
        series: vec![
            Series::line("measured", measured),
            Series::line("bound", bound),
        ],
    }
    .render()
}

fn ell2_demo(common: &Common, blocks: usize, gamma: f64, n_max: usize) -> CliResult<()> {
    let model = BlockModel::canonical(blocks)?;
    let x0 = ell2::canonical_start(blocks);
    let operator = ell2::sublinearity_certificate(&model, &x0, gamma, n_max)?;
    let shadow = ell2::shadow_sublinearity(&model, gamma, n_max)?;
    for (name, table, title) in [
        ("ell2_operator", &operator, "gamma^-n |T^n x|"),
        ("ell2_shadow", &shadow, "gamma^-n |P_U T^n x|"),
    ] {
        let mut buf = Vec::new();
        table.write_columns(&mut buf)?;
        write(common, &format!("{name}.dat"), &String::from_utf8(buf)?)?;
        write_svg(common, &format!("{name}.svg"), || growth_plot(title, table))?;
        let crossing = table
            .first_exceeding(1e3)
            .map_or_else(|| "never".to_string(), |n| n.to_string());
        println!(
            "{name}: witness block {} (cos {}), ratio {}, exceeds 1e3 at n = {crossing}",
            table.witness, table.witness_cos, table.ratio
        );
    }
    Ok(())
}

fn bench(common: &Common, config: &ExperimentConfig) -> CliResult<()> {
    let records = experiments::run_benchmark(config)?;
    let medians = experiments::aggregate_median(&records, config.bins)?;
    experiments::emit_csv(&common.out.join("bench_records.csv"), &records)?;
    experiments::emit_medians_csv(&common.out.join("bench_medians.csv"), &medians)?;
    let capped = records.iter().filter(|r| r.capped).count();
    println!("{} records, {capped} capped", records.len());
    for (criterion, stem) in [
        (Criterion::TrueError, "true_error"),
        (Criterion::MaxDistance, "max_distance"),
    ] {
        let pick = |method: Method| {
            records
                .iter()
                .filter(|r| r.method == method && r.criterion == criterion)
                .map(|r| (r.friedrichs_angle, r.iterations as f64))
                .collect()
        };
        write_svg(common, &format!("bench_scatter_{stem}.svg"), || {
            Plot {
                title: format!("iterations, {criterion}"),
                x_label: "Friedrichs angle".into(),
                y_label: "iterations".into(),
                log_y: true,
                series: vec![
                    Series::markers("DR", pick(Method::Dr)),
                    Series::markers("MAP", pick(Method::Map)),
                ],
            }
            .render()
        })?;
        let median_of = |method: Method| {
            medians
                .iter()
                .filter(|m| m.method == method && m.criterion == criterion)
                .map(|m| ((m.angle_lo + m.angle_hi) / 2.0, m.median_iterations))
                .collect()
        };
        write_svg(common, &format!("bench_medians_{stem}.svg"), || {
            Plot {
                title: format!("median iterations, {criterion}"),
                x_label: "Friedrichs angle".into(),
                y_label: "median iterations".into(),
                log_y: true,
                series: vec![
                    Series::line("DR", median_of(Method::Dr)),
                    Series::line("MAP", median_of(Method::Map)),
                ],
            }
            .render()
        })?;
    }
    Ok(())
}
