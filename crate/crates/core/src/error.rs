use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::weingarten::MaSolution;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Fields or data defined on different charts were combined.
    ChartMismatch,
    InvalidChart(&'static str),
    InvalidInput(&'static str),
    /// A node that needs a derivative has no usable stencil.
    MaskTooSparse { node: usize },
    DegenerateMetric { node: usize },
    CriticalPoint { z: Complex64 },
    UnsupportedDimension(usize),
    DegenerateFrame,
    NoRealRoot,
    SingularEnvelope { nodes: Vec<usize> },
    DegenerateSurface { node: usize },
    EigenvalueMinusOne { node: usize },
    SingularDictionary { node: usize },
    DegenerateFrontCoefficients,
    NotElliptic,
    BaseNotAdmissible { codazzi: f64, gauss: f64 },
    NewtonDiverged { trace: Vec<f64> },
    PositivityLost(Box<MaSolution>),
    LinearSolveFailed { residual: f64 },
    ZeroDifferential { node: usize },
    StepTooLarge,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ChartMismatch => write!(f, "fields live on different charts"),
            Error::InvalidChart(why) => write!(f, "invalid chart: {why}"),
            Error::InvalidInput(why) => write!(f, "invalid input: {why}"),
            Error::MaskTooSparse { node } => write!(f, "node {node} has no finite-difference stencil"),
            Error::DegenerateMetric { node } => write!(f, "metric is not positive definite at node {node}"),
            Error::CriticalPoint { z } => write!(f, "map has a critical point near z = {z}"),
            Error::UnsupportedDimension(d) => write!(f, "dimension {d} is not supported"),
            Error::DegenerateFrame => write!(f, "horosphere frame is linearly dependent"),
            Error::NoRealRoot => write!(f, "envelope equation has no admissible root"),
            Error::SingularEnvelope { nodes } => {
                write!(f, "envelope is singular at {} node(s)", nodes.len())
            }
            Error::DegenerateSurface { node } => write!(f, "induced metric degenerates at node {node}"),
            Error::EigenvalueMinusOne { node } => write!(f, "E + B is singular at node {node}"),
            Error::SingularDictionary { node } => write!(f, "E + B* is singular at node {node}"),
            Error::DegenerateFrontCoefficients => {
                write!(f, "a - b + c = 0: use the trace condition instead of the determinant equation")
            }
            Error::NotElliptic => write!(f, "coefficients are not elliptic (b^2 - 4ac <= 0)"),
            Error::BaseNotAdmissible { codazzi, gauss } => write!(
                f,
                "base data is not admissible (codazzi residual {codazzi:.3e}, gauss residual {gauss:.3e})"
            ),
            Error::NewtonDiverged { trace } => {
                write!(f, "Newton iteration failed after {} step(s)", trace.len())
            }
            Error::PositivityLost(sol) => write!(
                f,
                "solution found but II* + Bbar is not positive definite (min eigenvalue {:.3e})",
                sol.positivity_certificate
            ),
            Error::LinearSolveFailed { residual } => {
                write!(f, "linear solver stalled at relative residual {residual:.3e}")
            }
            Error::ZeroDifferential { node } => write!(f, "quadratic differential vanishes at node {node}"),
            Error::StepTooLarge => write!(f, "finite-difference step leaves the upper half-plane"),
        }
    }
}

impl core::error::Error for Error {}
