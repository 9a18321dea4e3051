//! Monge-Ampère problem files and the `solve` pipeline.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use epstein_core::calculus::{ConformalMetric, Field, GridChart};
use epstein_core::epstein::{epstein_surface, infinity_data_of_metric, InfinityData};
use epstein_core::linalg::Sym2;
use epstein_core::weingarten::{
    ma_newton_solve, verify_solution_geometrically, GeometricReport, MaProblem, MaSolution, NewtonConfig,
    WeingartenCoeffs,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fixtures::scalar;
use crate::report::{Check, SuiteReport};
use crate::suites::{constant_solution, eta, QUADRATIC_FLOOR};
use crate::{grid_csv, obj};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// (a, b, c) of aK_e + bH + c = 0.
    pub coeffs: [f64; 3],
    pub base: BaseSpec,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    #[serde(default)]
    pub newton: NewtonSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    /// I* = e^{2(offset + perturbation·η)}|dz|²/(2y²), η = sin 3x cos 2y,
    /// with II* its own Epstein data; Dirichlet data is the exact solution.
    Fuchsian {
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        perturbation: f64,
    },
    /// I* = |dz|², II* = λ|dz|².
    Umbilic { lambda: f64 },
    /// I* = e^{2f}|dz|² with f read from a node table, II* its own Epstein
    /// data; Dirichlet data from a second table (zero when absent).
    File {
        log_factor: PathBuf,
        #[serde(default)]
        boundary: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub nodes: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Flat torus instead of a Dirichlet rectangle (umbilic bases only).
    #[serde(default)]
    pub periodic: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NewtonSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    30
}

impl Default for NewtonSpec {
    fn default() -> Self {
        NewtonSpec { tol: default_tol(), max_iter: default_max_iter() }
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| LabError::Json { path: path.to_path_buf(), source })
}

fn config(why: impl std::fmt::Display) -> LabError {
    LabError::Config(why.to_string())
}

fn chart_of(spec: &Option<ChartSpec>) -> Result<Arc<GridChart>> {
    let s = spec.as_ref().ok_or_else(|| config("this base needs a `chart`"))?;
    let chart = if s.periodic {
        GridChart::torus(s.nodes, s.nodes, s.x[0], s.y[0], s.x[1] - s.x[0], s.y[1] - s.y[0])
    } else {
        GridChart::rect(s.nodes, s.nodes, s.x, s.y)
    };
    chart.map(Arc::new).map_err(config)
}

/// Builds the core problem; paths in the file are relative to `dir`.
pub fn build_problem(file: &ProblemFile, dir: &Path) -> Result<MaProblem> {
    let [a, b, c] = file.coeffs;
    let co = WeingartenCoeffs::new(a, b, c).map_err(config)?;
    let (base, boundary) = match &file.base {
        BaseSpec::Fuchsian { offset, perturbation } => {
            let chart = chart_of(&file.chart)?;
            if chart.origin().1 <= 0.0 {
                return Err(config("the Fuchsian base needs a chart in the upper half-plane"));
            }
            let (r, e) = (*offset, *perturbation);
            let f = scalar(&chart, |x, y| -(2f64.sqrt() * y).ln() + r + e * eta(x, y));
            let uc = constant_solution(&co).unwrap_or(0.0);
            let exact = scalar(&chart, |x, y| uc - r - e * eta(x, y));
            (infinity_data_of_metric(&ConformalMetric::flat(f))?, Some(exact))
        }
        BaseSpec::Umbilic { lambda } => {
            let chart = chart_of(&file.chart)?;
            if !(*lambda > 0.0) {
                return Err(config("lambda must be positive"));
            }
            let base = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::scalar(*lambda)))?;
            let periodic = file.chart.as_ref().is_some_and(|c| c.periodic);
            let boundary = (!periodic).then(|| Field::constant(&chart, umbilic_constant(&co, *lambda)));
            (base, boundary)
        }
        BaseSpec::File { log_factor, boundary } => {
            if file.chart.is_some() {
                return Err(config("a file base takes its chart from the log-factor table"));
            }
            let f = grid_csv::read_scalar(&dir.join(log_factor))?;
            let chart = f.chart().clone();
            let b = match boundary {
                Some(p) => {
                    let b = grid_csv::read_scalar(&dir.join(p))?;
                    if b.chart().as_ref() != chart.as_ref() {
                        return Err(config("boundary table does not match the log-factor chart"));
                    }
                    Field::new(chart.clone(), b.values().to_vec())?
                }
                None => Field::constant(&chart, 0.0),
            };
            (infinity_data_of_metric(&ConformalMetric::flat(f))?, Some(b))
        }
    };
    MaProblem::new_unchecked(base, co, boundary).map_err(|e| match e {
        epstein_core::Error::InvalidInput(_) | epstein_core::Error::DegenerateFrontCoefficients => config(e),
        other => other.into(),
    })
}

/// u solving det(α λe^{−2u}E + (c−a)E) = β, or 0 when there is none.
fn umbilic_constant(co: &WeingartenCoeffs, lambda: f64) -> f64 {
    let beta = co.beta();
    if beta < 0.0 {
        return 0.0;
    }
    // α s + (c − a) = ±√β with s = λe^{−2u} > 0
    [beta.sqrt(), -beta.sqrt()]
        .into_iter()
        .map(|r| (r - (co.c - co.a)) / co.alpha())
        .filter(|&s| s > 0.0)
        .map(|s| 0.5 * (lambda / s).ln())
        .fold(None, |m: Option<f64>, u| Some(m.map_or(u, |v| v.max(u))))
        .unwrap_or(0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometrySummary {
    pub weingarten_sup: f64,
    pub mean_curvature_sup: f64,
    /// Only for constant-K_e coefficients.
    pub ke_defect_sup: Option<f64>,
    pub tame_margin: f64,
    pub projective_defect: f64,
}

impl From<GeometricReport> for GeometrySummary {
    fn from(g: GeometricReport) -> Self {
        GeometrySummary {
            weingarten_sup: g.weingarten_sup,
            mean_curvature_sup: g.mean_curvature_sup,
            ke_defect_sup: (!g.ke_defect_sup.is_nan()).then_some(g.ke_defect_sup),
            tame_margin: g.tame_margin,
            projective_defect: g.projective_defect,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub coeffs: [f64; 3],
    pub nodes: usize,
    pub newton_trace: Vec<f64>,
    /// max r_{k+1}/r_k² over steps with r_k < 0.1 that stay above the
    /// round-off floor.
    pub quadratic_constant: Option<f64>,
    pub positivity_certificate: f64,
    pub kernel_pinned: bool,
    pub admissibility: [f64; 2],
    pub geometry: GeometrySummary,
    #[serde(flatten)]
    pub checks: SuiteReport,
}

/// Geometric closure tolerance on the reconstructed surface.
pub const CLOSURE_TOL: f64 = 1e-3;

pub fn summarize(p: &MaProblem, sol: &MaSolution, tol: f64) -> Result<SolveReport> {
    let geo = verify_solution_geometrically(sol, p)?;
    let mut checks = vec![
        Check::new("newton_final_residual", "Monge-Ampère residual on the unknown nodes", sol.final_residual(), tol),
        Check::new("weingarten_closure", "|aK_e + bH + c| on the reconstructed surface", geo.weingarten_sup, CLOSURE_TOL),
        Check::new("tameness", "principal curvatures in (−1, 1) (reported as −margin)", -geo.tame_margin, 0.0),
    ];
    if !geo.ke_defect_sup.is_nan() {
        checks.push(Check::new("ke_defect", "|K_e − k| on the reconstructed surface", geo.ke_defect_sup, CLOSURE_TOL));
    }
    let co = p.coeffs();
    Ok(SolveReport {
        coeffs: [co.a, co.b, co.c],
        nodes: p.chart().active_nodes().count(),
        newton_trace: sol.newton_trace.clone(),
        quadratic_constant: sol.quadratic_constant(1e-1, QUADRATIC_FLOOR),
        positivity_certificate: sol.positivity_certificate,
        kernel_pinned: sol.kernel_pinned,
        admissibility: p.admissibility().into(),
        geometry: geo.into(),
        checks: SuiteReport::new("solve", checks),
    })
}

/// Solves, then writes `u.csv`, `surface.obj` and `report.json` into
/// `out_dir`.
pub fn solve_command(problem: &Path, out_dir: &Path) -> Result<SolveReport> {
    let file = load_problem(problem)?;
    let dir = problem.parent().unwrap_or(Path::new("."));
    let p = build_problem(&file, dir)?;
    let cfg = NewtonConfig { tol: file.newton.tol, max_iter: file.newton.max_iter, ..NewtonConfig::default() };
    let sol = ma_newton_solve(&p, &cfg)?;
    let report = summarize(&p, &sol, file.newton.tol)?;
    std::fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    grid_csv::write_scalar(&out_dir.join("u.csv"), &sol.u)?;
    let h = ConformalMetric::flat(p.base().conformal_istar()?.u().zip_map(&sol.u, |a, b| a + b)?);
    obj::write_obj(&out_dir.join("surface.obj"), &epstein_surface(&h)?)?;
    let path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(&report).expect("reports serialize");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| LabError::io(&path, e))?;
    Ok(report)
}
