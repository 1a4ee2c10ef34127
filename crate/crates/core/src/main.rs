use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pentaheat_core::basin::{render, RenderConfig};
use pentaheat_core::charts::heat_map_xy;
use pentaheat_core::cohomology::REFERENCE_MATRIX;
use pentaheat_core::degrees::{degree_growth, topological_degree, MAX_GROWTH_N};
use pentaheat_core::pentagon::{
    convergence_table, distance_to_regular, heat_step, normalize, parse_polygons, random_convex_pentagon,
    regular_class_f64, Polygon,
};
use pentaheat_core::poly::Rational;
use pentaheat_core::report::{check_ids, verify, MatrixPerturbation, Overall, Status, VerifyOptions};

/// Overrides the worker count of the global thread pool.
const THREADS_ENV: &str = "PENTAHEAT_THREADS";

#[derive(Parser)]
#[command(name = "pentaheat", version, about = "Exact checks and pictures for the projective heat map on pentagons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in order and emit a certificate.
    Verify {
        /// Certificate path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the preimage-count sampling.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Check id to mark as assumed instead of running (repeatable).
        #[arg(long = "skip", value_name = "CHECK_ID")]
        skip: Vec<String>,
        /// Number of random targets for the preimage count.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Largest iterate in the degree-growth check.
        #[arg(long, default_value_t = 3)]
        growth_n: u32,
        /// Test hook: add DELTA to entry (ROW, COL) of the computed matrix.
        #[arg(long, num_args = 3, value_names = ["ROW", "COL", "DELTA"], allow_negative_numbers = true, hide = true)]
        perturb_matrix: Option<Vec<i64>>,
    },
    /// Count preimages of random rational targets and print the root tables.
    Topdeg {
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Bidegrees of the iterates next to the matrix predictions.
    Compose {
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Iterate pentagons and report convergence to the regular class.
    Polygon {
        /// File of `x y z` rows, blank line between polygons; `-` reads stdin.
        #[arg(conflicts_with = "random_convex", required_unless_present = "random_convex")]
        input: Option<PathBuf>,
        /// Generate N random convex pentagons instead of reading a file.
        #[arg(long, value_name = "N")]
        random_convex: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Also print the first K exact iterates of every polygon.
        #[arg(long, value_name = "K", default_value_t = 0)]
        steps: usize,
    },
    /// Basin picture on a rectangle of the (x, y) plane.
    Render {
        #[arg(long, num_args = 4, value_names = ["XMIN", "XMAX", "YMIN", "YMAX"], allow_negative_numbers = true)]
        region: Option<Vec<f64>>,
        /// Image size as WIDTHxHEIGHT.
        #[arg(long, default_value = "512x512")]
        size: String,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Output file; the extension picks P6 `.ppm` or `.png`.
        #[arg(long, default_value = "basin.ppm")]
        out: PathBuf,
    },
}

/// Bad input discovered after parsing; exits like a clap usage error.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(code) => code,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| usage(format!("{THREADS_ENV}={raw} is not a thread count")))?;
    if n == 0 {
        return Err(usage(format!("{THREADS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Verify { out, seed, skip, samples, growth_n, perturb_matrix } => {
            cmd_verify(out, seed, skip, samples, growth_n, perturb_matrix)
        }
        Command::Topdeg { samples, seed } => cmd_topdeg(samples, seed),
        Command::Compose { n } => cmd_compose(n),
        Command::Polygon { input, random_convex, seed, tol, max_iter, steps } => {
            cmd_polygon(input, random_convex, seed, tol, max_iter, steps)
        }
        Command::Render { region, size, max_iter, tol, threads, out } => {
            cmd_render(region, &size, max_iter, tol, threads, out)
        }
    }
}

fn cmd_verify(
    out: Option<PathBuf>,
    seed: u64,
    skip: Vec<String>,
    samples: usize,
    growth_n: u32,
    perturb: Option<Vec<i64>>,
) -> Result<ExitCode> {
    let perturb = match perturb.as_deref() {
        None => None,
        Some(&[r, c, d]) if r >= 0 && c >= 0 => Some(MatrixPerturbation { row: r as usize, col: c as usize, delta: d }),
        Some(_) => return Err(usage("matrix perturbation takes ROW COL DELTA with nonnegative indices")),
    };
    let opts = VerifyOptions { seed, samples, skip: skip.into_iter().collect::<BTreeSet<_>>(), growth_n, perturb };
    if let Err(e) = opts.validate() {
        let ids: Vec<&str> = check_ids().collect();
        return Err(usage(format!("{e} (check ids: {})", ids.join(", "))));
    }
    let cert = verify(&opts)?;
    for c in &cert.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Assumed => "assumed",
            Status::NotRun => "not run",
        };
        eprintln!("{:<20} {:<8} {}", c.id, status, c.anchor);
    }
    let json = cert.to_json();
    match &out {
        Some(path) => std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    match (&cert.overall, &cert.failed_check) {
        (Overall::Pass, _) => {
            eprintln!(
                "overall: pass (lambda1 = {}, lambda2 = {})",
                cert.summary.lambda1.as_deref().unwrap_or("?"),
                cert.summary.lambda2.as_deref().unwrap_or("?"),
            );
            Ok(ExitCode::SUCCESS)
        }
        (Overall::Fail, failed) => {
            let id = failed.as_deref().unwrap_or("?");
            let anchor = cert.record(id).map(|r| r.anchor.as_str()).unwrap_or("");
            eprintln!("overall: fail at check `{id}` ({anchor})");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_topdeg(samples: usize, seed: u64) -> Result<ExitCode> {
    if samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let td = topological_degree(&heat_map_xy(), samples, seed)?;
    let r = &td.reference;
    println!(
        "reference target ({}, {}): eliminant degree {}, {} distinct roots, {} preimages",
        r.target[0], r.target[1], r.resultant_degree, r.eliminant_roots, r.count
    );
    for ev in &td.resampled {
        println!("resampled: sample {} target ({}, {}): {}", ev.sample, ev.target[0], ev.target[1], ev.reason);
    }
    for (i, s) in td.samples.iter().enumerate() {
        println!(
            "sample {i}: target ({}, {})  resultant degree {}  eliminant roots {}  candidates {}  spurious {}",
            s.target[0], s.target[1], s.resultant_degree, s.eliminant_roots, s.candidates, s.spurious
        );
        println!("  {:>3}  {:>40}  {:>40}", "#", "x", "y");
        for (k, [x, y]) in s.preimages.iter().enumerate() {
            println!("  {:>3}  {:>40}  {:>40}", k + 1, complex_text(*x), complex_text(*y));
        }
        println!("  count {}  max residual {:.3e}", s.count, s.max_residual);
    }
    match td.degree {
        Some(d) => {
            println!("topological degree: {d} (seed {seed}, {samples} samples)");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("samples disagree on the preimage count");
            Ok(ExitCode::from(1))
        }
    }
}

fn complex_text((re, im): (f64, f64)) -> String {
    format!("{re:+.12e} {im:+.12e}i")
}

fn cmd_compose(n: u32) -> Result<ExitCode> {
    if n == 0 || n > MAX_GROWTH_N {
        return Err(usage(format!("--n must lie in 1..={MAX_GROWTH_N}")));
    }
    let rows = degree_growth(n, &REFERENCE_MATRIX)?;
    println!("{:>2}  {:>10}  {:>10}  {:>10}  {:>6}", "n", "bidegree", "predicted", "unreduced", "ratio");
    for r in &rows {
        let pair = |(a, b): (i64, i64)| format!("({a},{b})");
        let ratio = r.ratio.map(|q| format!("{q:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>2}  {:>10}  {:>10}  {:>10}  {:>6}{}",
            r.n,
            pair((r.symbolic.0 as i64, r.symbolic.1 as i64)),
            pair(r.predicted),
            pair((r.unreduced.0 as i64, r.unreduced.1 as i64)),
            ratio,
            if r.agrees() { "" } else { "  MISMATCH" }
        );
    }
    Ok(if rows.iter().all(|r| r.agrees()) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_polygon(
    input: Option<PathBuf>,
    random: Option<usize>,
    seed: u64,
    tol: f64,
    max_iter: usize,
    steps: usize,
) -> Result<ExitCode> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    let polys: Vec<Polygon<Rational>> = match (input, random) {
        (_, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| random_convex_pentagon(&mut rng)).collect()
        }
        (Some(path), None) => {
            let text = if path.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
                s
            } else {
                std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?
            };
            parse_polygons(&text).map_err(|e| usage(e.to_string()))?
        }
        (None, None) => return Err(usage("give an input file or --random-convex N")),
    };
    for (i, p) in polys.iter().enumerate().filter(|_| steps > 0) {
        println!("polygon {i}:");
        let mut cur = p.clone();
        for k in 1..=steps {
            cur = match heat_step(&cur) {
                Ok(next) => next,
                Err(e) => {
                    println!("  step {k}: {e}");
                    break;
                }
            };
            println!("  step {k}:");
            for line in cur.to_string().lines() {
                println!("    {line}");
            }
        }
    }
    let pentagons: Vec<(usize, &Polygon<Rational>)> = polys.iter().enumerate().filter(|(_, p)| p.len() == 5).collect();
    let batch: Vec<Polygon<Rational>> = pentagons.iter().map(|(_, p)| (*p).clone()).collect();
    let table = convergence_table(&batch, tol, max_iter);
    let (rx, ry) = regular_class_f64();
    println!("regular class: ({rx:.12}, {ry:.12})");
    println!("{:>5}  {:>10}  {:>12}  status", "index", "iterations", "initial dist");
    let mut all_ok = true;
    for ((index, p), row) in pentagons.iter().zip(&table) {
        let d0 = normalize(*p).map(|q| distance_to_regular(&q)).unwrap_or(f64::INFINITY);
        let status = match (&row.iterations, &row.error) {
            (Some(_), _) => "converged".to_string(),
            (None, Some(e)) => e.clone(),
            (None, None) => "no verdict".to_string(),
        };
        all_ok &= row.iterations.is_some();
        let its = row.iterations.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        println!("{index:>5}  {its:>10}  {d0:>12.3e}  {status}");
    }
    for (i, p) in polys.iter().enumerate().filter(|(_, p)| p.len() != 5) {
        println!("{i:>5}  {:>10}  {:>12}  {}-gon, convergence is measured for pentagons only", "-", "-", p.len());
    }
    let converged = table.iter().filter(|r| r.iterations.is_some()).count();
    println!("converged: {converged}/{} within {tol:e} in at most {max_iter} iterations", table.len());
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_render(
    region: Option<Vec<f64>>,
    size: &str,
    max_iter: Option<usize>,
    tol: Option<f64>,
    threads: Option<usize>,
    out: PathBuf,
) -> Result<ExitCode> {
    let mut cfg = RenderConfig::default();
    if let Some(r) = region {
        cfg.region = [r[0], r[1], r[2], r[3]];
    }
    let (w, h) = size.split_once(['x', 'X']).ok_or_else(|| usage(format!("--size {size}: expected WIDTHxHEIGHT")))?;
    cfg.width = w.parse().map_err(|_| usage(format!("--size {size}: bad width")))?;
    cfg.height = h.parse().map_err(|_| usage(format!("--size {size}: bad height")))?;
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    cfg.threads = threads;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let ext = out.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
    if !matches!(ext.as_deref(), Some("ppm") | Some("png")) {
        bail!(usage(format!("{}: output must end in .ppm or .png", out.display())));
    }
    let img = render(&cfg)?;
    img.save(&out).with_context(|| format!("writing {}", out.display()))?;
    let [basin, non_basin, guarded] = img.counts();
    println!(
        "wrote {} ({}x{}): basin {basin}, non-basin {non_basin}, guarded {guarded}",
        out.display(),
        cfg.width,
        cfg.height
    );
    Ok(ExitCode::SUCCESS)
}
