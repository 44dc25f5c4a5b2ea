mod report;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use powassign::disk_cover::{build_coreset, lift_cover, solve_coreset, CoverConfig};
use powassign::energy_tsp::{approx_tour_on, build_mst, gap_instance};
use powassign::multicast::{
    build_multicast_coreset, lift_ranges, solve_multicast, witness_tree, MulticastInstance,
};
use powassign::oracles::{exact_disk_cover, exact_multicast, exact_tsp, OracleBudget};
use powassign::{pointfile, with_threads, Error, Point, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use report::{ratio, Report, Timings};
use svg::Canvas;

#[derive(Parser)]
#[command(
    name = "powassign",
    version,
    about = "Energy-efficient power assignment for wireless stations"
)]
struct Cli {
    /// Worker threads for the solvers; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave wall-clock timings out of the report.
    #[arg(long, global = true)]
    no_timings: bool,
    /// Write the report (or generated points) here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover all stations with at most k disks of minimum total energy.
    Cover(CoverArgs),
    /// Reach the receivers from the source within k hops.
    Multicast(MulticastArgs),
    /// Tour through all stations minimising the sum of powered edge lengths.
    Tsp(TspArgs),
    /// Uniform random points in the unit cube.
    Gen(GenArgs),
}

#[derive(Args)]
struct Energy {
    /// Power gradient of the energy model |pq|^alpha.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
}

#[derive(Args)]
struct CoverArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    energy: Energy,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Number of stations that may stay uncovered.
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    /// Centers restricted to stations (the default).
    #[arg(long, conflicts_with = "non_discrete")]
    discrete: bool,
    /// Centers anywhere in the plane.
    #[arg(long)]
    non_discrete: bool,
    /// Also run the exact oracle and report the ratio.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct MulticastArgs {
    input: PathBuf,
    #[arg(long)]
    source: usize,
    /// Comma-separated station indices.
    #[arg(long, value_delimiter = ',', required = true)]
    receivers: Vec<usize>,
    /// Hop bound.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    energy: Energy,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Restrict sender ranges to a geometric ladder.
    #[arg(long)]
    ladder: bool,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct TspArgs {
    #[arg(required_unless_present = "gap", conflicts_with = "gap")]
    input: Option<PathBuf>,
    /// Use N unit-spaced collinear points instead of a file.
    #[arg(long, value_name = "N")]
    gap: Option<usize>,
    #[command(flatten)]
    energy: Energy,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A message and the process exit code: 2 for bad input or usage, 3 for
/// configurations the solvers refuse.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsupported(_)
            | Error::UnsupportedDimension { .. }
            | Error::BudgetExceeded { .. }
            | Error::TimeLimit(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn read_points(path: &Path) -> Result<PointSet, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    pointfile::parse(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn point_json(p: &Point) -> Value {
    json!(p.coords())
}

fn run_cover(args: &CoverArgs) -> Result<Report, Failure> {
    let ps = read_points(&args.input)?;
    let mut cfg =
        CoverConfig::new(args.k, args.energy.alpha, args.epsilon).with_outliers(args.outliers);
    if args.non_discrete {
        cfg = cfg.non_discrete();
    }
    cfg.validate()?;

    let mut timings = Timings::default();
    let coreset = timings.time("coreset", || build_coreset(&ps, &cfg))?;
    let (on_coreset, stats) = timings.time("solve", || solve_coreset(&coreset, &cfg))?;
    let cover = timings.time("lift", || lift_cover(&on_coreset, &coreset, cfg.alpha));

    let balls: Vec<Value> = cover
        .balls
        .iter()
        .map(|b| json!({"center": point_json(&b.center), "radius": b.radius}))
        .collect();
    let mut result = json!({
        "balls": balls,
        "cost": cover.cost,
        "uncovered": cover.uncovered,
        "coreset_size": coreset.reps.len(),
        "grid_delta": coreset.delta(),
        "opt_estimate": coreset.opt_estimate,
    });
    if args.exact {
        let opt = timings.time("exact", || {
            exact_disk_cover(
                &ps,
                cfg.k,
                cfg.outliers,
                cfg.alpha,
                cfg.discrete,
                &OracleBudget::cover(),
            )
        })?;
        result["opt_cost"] = json!(opt.cost);
        result["ratio_vs_opt"] = ratio(cover.cost, opt.cost);
    }
    if let Some(path) = &args.svg {
        let mut canvas = Canvas::fit(&ps)?;
        for b in &cover.balls {
            canvas.circle(&b.center, b.radius, "ball");
        }
        for (i, p) in ps.iter().enumerate() {
            let class = if cover.uncovered.contains(&i) {
                "uncovered"
            } else {
                "station"
            };
            canvas.station(p, class);
        }
        write_file(path, &canvas.finish())?;
    }
    Ok(Report {
        problem: "cover",
        parameters: json!({
            "input": args.input.display().to_string(),
            "k": args.k,
            "alpha": args.energy.alpha,
            "epsilon": args.epsilon,
            "outliers": args.outliers,
            "discrete": cfg.discrete,
            "exact": args.exact,
        }),
        result,
        counts: json!({
            "coreset_size": coreset.reps.len(),
            "candidates": stats.candidates,
            "nodes": stats.nodes,
        }),
        timings,
    })
}

fn run_multicast(args: &MulticastArgs) -> Result<Report, Failure> {
    let ps = read_points(&args.input)?;
    let inst = MulticastInstance::new(
        ps,
        args.source,
        &args.receivers,
        args.k,
        args.energy.alpha,
        args.epsilon,
    )?;

    let mut timings = Timings::default();
    let cs = timings.time("coreset", || build_multicast_coreset(&inst))?;
    let (on_coreset, stats) = timings.time("solve", || solve_multicast(&cs, args.ladder))?;
    let ranges = timings.time("lift", || lift_ranges(&on_coreset, &cs));
    let tree = witness_tree(&ranges, &inst).ok_or_else(|| Failure {
        code: 3,
        message: "lifted assignment does not reach every receiver".into(),
    })?;

    let senders: Vec<Value> = ranges
        .senders()
        .into_iter()
        .map(|i| json!({"index": i, "range": ranges.ranges[i]}))
        .collect();
    let mut result = json!({
        "ranges": senders,
        "cost": ranges.cost,
        "tree_edges": tree,
        "coreset_size": cs.reps.len(),
        "delta": cs.delta(),
        "scale": cs.scale,
        "ladder": args.ladder,
    });
    if args.exact {
        let opt = timings.time("exact", || {
            exact_multicast(&inst, &OracleBudget::multicast())
        })?;
        result["opt_cost"] = json!(opt.cost);
        result["ratio_vs_opt"] = ratio(ranges.cost, opt.cost);
    }
    if let Some(path) = &args.svg {
        let pts = inst.stations.points();
        let mut canvas = Canvas::fit(&inst.stations)?;
        for i in ranges.senders() {
            canvas.circle(&pts[i], ranges.ranges[i], "range");
        }
        for &(p, q) in &tree {
            canvas.polyline(&[&pts[p], &pts[q]], "edge");
        }
        for (i, p) in pts.iter().enumerate() {
            let class = if i == inst.source {
                "source"
            } else if inst.receivers.contains(&i) {
                "receiver"
            } else {
                "station"
            };
            canvas.station(p, class);
        }
        write_file(path, &canvas.finish())?;
    }
    Ok(Report {
        problem: "multicast",
        parameters: json!({
            "input": args.input.display().to_string(),
            "source": args.source,
            "receivers": inst.receivers,
            "k": args.k,
            "alpha": args.energy.alpha,
            "epsilon": args.epsilon,
            "ladder": args.ladder,
            "exact": args.exact,
        }),
        result,
        counts: json!({
            "coreset_size": cs.reps.len(),
            "candidate_ranges": stats.candidate_ranges,
            "ladder_rungs": stats.ladder_rungs,
            "nodes": stats.nodes,
        }),
        timings,
    })
}

fn run_tsp(args: &TspArgs) -> Result<Report, Failure> {
    let ps = match (&args.gap, &args.input) {
        (Some(n), _) => gap_instance(*n)?,
        (None, Some(path)) => read_points(path)?,
        (None, None) => unreachable!("clap requires an input or --gap"),
    };
    let alpha = args.energy.alpha;
    let mut timings = Timings::default();
    let tree = timings.time("mst", || build_mst(&ps, alpha, 0))?;
    let tour = timings.time("paths", || approx_tour_on(&tree, &ps, alpha))?;
    let mut result = json!({
        "order": tour.order,
        "cost": tour.cost,
        "mst_cost": tree.weight,
        "ratio_vs_mst": ratio(tour.cost, tree.weight),
    });
    if args.exact {
        let opt = timings.time("exact", || exact_tsp(&ps, alpha, &OracleBudget::tsp()))?;
        result["opt_cost"] = json!(opt.cost);
        result["ratio_vs_opt"] = ratio(tour.cost, opt.cost);
    }
    if let Some(path) = &args.svg {
        let pts = ps.points();
        let mut canvas = Canvas::fit(&ps)?;
        let mut closed: Vec<&Point> = tour.order.iter().map(|&i| &pts[i]).collect();
        closed.push(&pts[tour.order[0]]);
        canvas.polyline(&closed, "tour");
        for p in pts {
            canvas.station(p, "station");
        }
        write_file(path, &canvas.finish())?;
    }
    Ok(Report {
        problem: "tsp",
        parameters: json!({
            "input": args.input.as_ref().map(|p| p.display().to_string()),
            "gap": args.gap,
            "alpha": alpha,
            "exact": args.exact,
        }),
        result,
        counts: json!({"points": ps.len(), "mst_edges": tree.edges().len()}),
        timings,
    })
}

fn generate(args: &GenArgs) -> Result<String, Failure> {
    if args.n == 0 || args.dim == 0 {
        return Err(Failure {
            code: 2,
            message: "--n and --dim must be positive".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let points = (0..args.n)
        .map(|_| Point::new((0..args.dim).map(|_| rng.gen::<f64>()).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pointfile::format(&PointSet::new(points)?))
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let report = match &cli.command {
        Command::Cover(a) => run_cover(a)?,
        Command::Multicast(a) => run_multicast(a)?,
        Command::Tsp(a) => run_tsp(a)?,
        Command::Gen(a) => return generate(a),
    };
    let json = report.to_json(!cli.no_timings);
    Ok(serde_json::to_string_pretty(&json).expect("JSON values serialize") + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.threads {
        Some(n) => with_threads(n, || execute(&cli)),
        None => execute(&cli),
    };
    let text = match outcome {
        Ok(text) => text,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(f) = write_file(path, &text) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
