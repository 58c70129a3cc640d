use serde::Serialize;
use thiserror::Error;

use crate::grid::NodeIndex;

/// Nodes listed in an error are truncated to this many entries.
pub const MAX_REPORTED_NODES: usize = 32;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed GFIELD data at line {line}: {msg}")]
    Gfield { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("form is not closed: scaled residual {residual:.3e} exceeds {tol:.3e}")]
    NotClosed { residual: f64, tol: f64, nodes: Vec<NodeIndex> },
    #[error("area-angle violation: |J| >= 1 at {} node(s)", nodes.len())]
    AreaAngleViolation { nodes: Vec<NodeIndex> },
    #[error("input is not minimal: scaled residual {residual:.3e} exceeds {tol:.3e}")]
    NotMinimal { residual: f64, tol: f64, nodes: Vec<NodeIndex> },
    #[error("input is not maximal: scaled residual {residual:.3e} exceeds {tol:.3e}")]
    NotMaximal { residual: f64, tol: f64, nodes: Vec<NodeIndex> },
    #[error("graph is not spacelike at {} node(s)", nodes.len())]
    NotSpacelike { nodes: Vec<NodeIndex> },

    #[error("parameter constraint violated: {0}")]
    ParamConstraintViolation(String),
    #[error("angle quotient denominator vanishes at {} node(s)", nodes.len())]
    DenominatorVanishes { nodes: Vec<NodeIndex> },
    #[error("split quotient |phi| >= 1 at {} node(s)", nodes.len())]
    PhiOutOfRange { nodes: Vec<NodeIndex> },

    #[error("degenerate hyperplane fit: only {valid} of {total} nodes usable")]
    DegenerateFit { valid: usize, total: usize },
    #[error("not unimodular: max |det D2F - 1| = {residual:.3e} exceeds {tol:.3e}")]
    NotUnimodular { residual: f64, tol: f64, nodes: Vec<NodeIndex> },
    #[error("F_xx + F_yy changes sign")]
    SignChange { nodes: Vec<NodeIndex> },

    #[error("chart Jacobian not above 2 at {} node(s)", nodes.len())]
    JacobianBoundViolation { nodes: Vec<NodeIndex> },
    #[error("Newton inversion diverged for {} target node(s)", nodes.len())]
    NewtonDiverged { nodes: Vec<NodeIndex> },
    #[error("target outside the chart image at {} node(s)", nodes.len())]
    TargetOutsideImage { nodes: Vec<NodeIndex> },

    #[error("unknown catalog surface `{0}`")]
    UnknownSurface(String),
    #[error("domain not admissible for {name}: {reason}")]
    DomainNotAdmissible { name: String, reason: String },

    #[error("solver hit the iteration cap ({iterations}) with update {update:.3e}")]
    MaxIterations { iterations: usize, update: f64 },
    #[error("solver diverged at outer step {iteration}")]
    Diverged { iteration: usize },
    #[error("spacelike margin unreachable at outer step {iteration}")]
    SpacelikeUnreachable { iteration: usize },
}

impl Error {
    /// Stable upper-case name used on the command line and in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDomain(_) => "INVALID_DOMAIN",
            Error::InvalidField(_) => "INVALID_FIELD",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::Gfield { .. } => "GFIELD_FORMAT",
            Error::Io(_) => "IO",
            Error::NotClosed { .. } => "NOT_CLOSED",
            Error::AreaAngleViolation { .. } => "AREA_ANGLE_VIOLATION",
            Error::NotMinimal { .. } => "NOT_MINIMAL",
            Error::NotMaximal { .. } => "NOT_MAXIMAL",
            Error::NotSpacelike { .. } => "NOT_SPACELIKE",
            Error::ParamConstraintViolation(_) => "PARAM_CONSTRAINT_VIOLATION",
            Error::DenominatorVanishes { .. } => "DENOMINATOR_VANISHES",
            Error::PhiOutOfRange { .. } => "PHI_OUT_OF_RANGE",
            Error::DegenerateFit { .. } => "DEGENERATE_FIT",
            Error::NotUnimodular { .. } => "NOT_UNIMODULAR",
            Error::SignChange { .. } => "SIGN_CHANGE",
            Error::JacobianBoundViolation { .. } => "JACOBIAN_BOUND_VIOLATION",
            Error::NewtonDiverged { .. } => "NEWTON_DIVERGED",
            Error::TargetOutsideImage { .. } => "TARGET_OUTSIDE_IMAGE",
            Error::UnknownSurface(_) => "UNKNOWN_SURFACE",
            Error::DomainNotAdmissible { .. } => "DOMAIN_NOT_ADMISSIBLE",
            Error::MaxIterations { .. } => "MAX_ITERATIONS",
            Error::Diverged { .. } => "DIVERGED",
            Error::SpacelikeUnreachable { .. } => "SPACELIKE_UNREACHABLE",
        }
    }

    /// Offending node indices, when the error is pointwise.
    pub fn nodes(&self) -> &[NodeIndex] {
        match self {
            Error::NotClosed { nodes, .. }
            | Error::AreaAngleViolation { nodes }
            | Error::NotMinimal { nodes, .. }
            | Error::NotMaximal { nodes, .. }
            | Error::NotSpacelike { nodes }
            | Error::DenominatorVanishes { nodes }
            | Error::PhiOutOfRange { nodes }
            | Error::NotUnimodular { nodes, .. }
            | Error::SignChange { nodes }
            | Error::JacobianBoundViolation { nodes }
            | Error::NewtonDiverged { nodes }
            | Error::TargetOutsideImage { nodes } => nodes,
            _ => &[],
        }
    }

    /// True for errors caused by bad user input rather than failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDomain(_)
                | Error::InvalidField(_)
                | Error::ShapeMismatch(_)
                | Error::Gfield { .. }
                | Error::Io(_)
                | Error::UnknownSurface(_)
                | Error::ParamConstraintViolation(_)
                | Error::DomainNotAdmissible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal, pointwise condition attached to a computed quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub count: usize,
    pub nodes: Vec<NodeIndex>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    SplitNotSpacelike,
    AreaAngleViolation,
    NotSpacelike,
}

impl Diagnostic {
    pub(crate) fn from_nodes(code: DiagnosticCode, nodes: Vec<NodeIndex>) -> Option<Self> {
        if nodes.is_empty() {
            return None;
        }
        let count = nodes.len();
        Some(Diagnostic { code, count, nodes: truncate_nodes(nodes) })
    }
}

pub(crate) fn truncate_nodes(mut nodes: Vec<NodeIndex>) -> Vec<NodeIndex> {
    nodes.truncate(MAX_REPORTED_NODES);
    nodes
}
