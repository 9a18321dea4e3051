use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epstein_core::calculus::{BaseMetric, ConformalMetric, Field};
use epstein_core::epstein::epstein_surface;
use epstein_core::foliation::{energy, extremal_length, gardiner_residual, SlopeFoliation, TorusModulus};
use epstein_core::schwarzian::schwarzian_derivative;
use epstein_core::Complex64;
use epstein_lab::fixtures::{disk, fuchsian_disk, named_map, random_metric, square_at, MAP_NAMES};
use epstein_lab::problem::solve_command;
use epstein_lab::suites::{DEFAULT_GRID, DEFAULT_TOL};
use epstein_lab::{grid_csv, obj, resolve_seed, run_suite, LabError, Result, SuiteConfig};

#[derive(Parser)]
#[command(name = "epstein-lab", version, about = "Epstein surfaces, data at infinity and their verification suites")]
struct Cli {
    /// Seed for pseudo-random test families (overrides EPSTEIN_LAB_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: schwarzian, epstein, duality,
    /// conformal-change, weingarten, foliation or all.
    Verify {
        suite: String,
        /// Coarse-level nodes per axis; the fine level halves the spacing.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Constant C in the discretization tolerance C·dx².
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the Epstein surface of a metric as an OBJ mesh.
    Epstein {
        /// flat, fuchsian, poincare, spherical, random, or a node table
        /// (CSV `i,j,x,y,value`) holding the log-factor u of e^{2u}|dz|².
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 81)]
        grid: usize,
    },
    /// Solve a Monge-Ampère problem file; writes u.csv, surface.obj and
    /// report.json.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Extremal length, energy and Gardiner residual of a slope foliation
    /// on a flat torus, as CSV.
    Foliation {
        /// Modulus, e.g. "2i" or "0.3+1.1i".
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        /// Slope p/q of the closed leaves p + qτ.
        #[arg(long, allow_hyphen_values = true)]
        slope: String,
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
    },
    /// Sample the Schwarzian derivative of a named map as CSV.
    Schwarzian {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Chart centre; the chart is the square of half-width 0.4 around it.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
    },
}

fn parse_complex(s: &str) -> Result<Complex64> {
    s.trim().replace(' ', "").parse().map_err(|_| LabError::Config(format!("cannot parse complex number {s:?}")))
}

fn parse_slope(s: &str) -> Result<(i64, i64)> {
    let bad = || LabError::Config(format!("slope must look like p/q, got {s:?}"));
    let (p, q) = s.split_once('/').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

fn builtin_metric(name: &str, grid: usize, seed: u64) -> Result<Option<ConformalMetric>> {
    let m = match name {
        "flat" => ConformalMetric::flat(Field::constant(&square_at(grid, -0.5, -0.5, 0.5)?, 0.0)),
        "random" => random_metric(&square_at(grid, -0.4, -0.4, 0.4)?, seed),
        "fuchsian" => fuchsian_disk(&disk(grid, 0.8)?)?,
        "poincare" => ConformalMetric::of_base(&disk(grid, 0.8)?, BaseMetric::DiskHyperbolic)?,
        "spherical" => ConformalMetric::of_base(&disk(grid, 0.8)?, BaseMetric::Spherical)?,
        _ => return Ok(None),
    };
    Ok(Some(m))
}

fn run(cli: Cli) -> Result<bool> {
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Command::Verify { suite, grid, tol, out } => {
            let report = run_suite(&suite, &SuiteConfig { grid, tol, seed })?;
            for c in &report.checks {
                let order = c.convergence_order.map(|o| format!("  order {o:.2}")).unwrap_or_default();
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<44} {:.3e} < {:.3e}{order}", c.name, c.residual, c.tolerance);
            }
            println!("{}: {}", report.suite, if report.pass { "pass" } else { "FAIL" });
            if let Some(path) = out {
                std::fs::write(&path, report.to_json()).map_err(|e| LabError::io(&path, e))?;
            }
            Ok(report.pass)
        }
        Command::Epstein { metric, out, grid } => {
            if grid < 9 {
                return Err(LabError::Config("grid must be at least 9".into()));
            }
            let h = match builtin_metric(&metric, grid, seed)? {
                Some(h) => h,
                None if Path::new(&metric).exists() => ConformalMetric::flat(grid_csv::read_scalar(Path::new(&metric))?),
                None => {
                    return Err(LabError::Config(format!(
                        "unknown metric {metric:?}: use flat, fuchsian, poincare, spherical, random or a CSV path"
                    )))
                }
            };
            let mesh = obj::write_obj(&out, &epstein_surface(&h)?)?;
            println!("wrote {} vertices and {} faces to {}", mesh.vertices.len(), mesh.faces.len(), out.display());
            Ok(true)
        }
        Command::Solve { problem, out_dir } => {
            let report = solve_command(&problem, &out_dir)?;
            for c in &report.checks.checks {
                println!("{}  {:<24} {:.3e} < {:.3e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.residual, c.tolerance);
            }
            println!("newton steps: {}, wrote {}", report.newton_trace.len() - 1, out_dir.display());
            Ok(report.checks.pass)
        }
        Command::Foliation { tau, slope, weight } => {
            let t = TorusModulus::new(parse_complex(&tau)?).map_err(|e| LabError::Config(e.to_string()))?;
            let (p, q) = parse_slope(&slope)?;
            let f = SlopeFoliation::new(p, q, weight).map_err(|e| LabError::Config(e.to_string()))?;
            let g = gardiner_residual(&f, &t, Complex64::new(0.0, 1.0), 1e-4)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let tau = t.tau();
            let row = [
                p.to_string(),
                q.to_string(),
                weight.to_string(),
                format!("{}{:+}i", tau.re, tau.im),
                format!("{:.15e}", extremal_length(&f, &t)),
                format!("{:.15e}", energy(&f, &t)),
                format!("{g:.3e}"),
            ];
            let io = |e: csv::Error| LabError::Csv { path: "<stdout>".into(), source: e };
            w.write_record(["p", "q", "w", "tau", "ext", "E", "gardiner_residual"]).map_err(io)?;
            w.write_record(&row).map_err(io)?;
            w.flush().map_err(|e| LabError::io("<stdout>", e))?;
            Ok(true)
        }
        Command::Schwarzian { map, grid, center } => {
            let f = named_map(&map)
                .ok_or_else(|| LabError::Config(format!("unknown map {map:?}; known: {}", MAP_NAMES.join(", "))))?;
            let default_center = if matches!(map.as_str(), "log" | "square") { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            let c0 = center.as_deref().map(parse_complex).transpose()?.unwrap_or(default_center);
            let chart = square_at(grid.max(5), c0.re - 0.4, c0.im - 0.4, 0.4)?;
            let s = schwarzian_derivative(&f, &chart)?;
            let io = |e: csv::Error| LabError::Csv { path: "<stdout>".into(), source: e };
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["x", "y", "re", "im"]).map_err(io)?;
            for n in chart.active_nodes() {
                let (z, v) = (chart.z(n), s.values().get(n));
                w.write_record([z.re, z.im, v.re, v.im].map(|x| format!("{x:.15e}"))).map_err(io)?;
            }
            w.flush().map_err(|e| LabError::io("<stdout>", e))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
