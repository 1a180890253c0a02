use std::fmt;

use symred::catalog::CatalogError;
use symred::expr::{ExprError, ParseError};
use symred::invariance::InvarianceError;
use symred::jet::JetError;
use symred::numerics::NumericsError;
use symred::pdecheck::PdeError;
use symred::reduction::ReductionError;

/// A failure with a stable code. Input problems exit with 2, computational
/// failures with 1.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }

    pub fn exit_code(&self) -> u8 {
        match self.code {
            "usage" | "parse-error" | "unknown-id" | "parameter-conflict" | "missing-parameter"
            | "inexact-parameter" | "not-admitted" | "io" => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR {}: {}", self.code, self.message)
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        let code = match &e {
            ExprError::DivisionByZero(_) | ExprError::Pole(..) => "pole",
            ExprError::Unbound(_) => "missing-parameter",
            ExprError::Domain(_) => "validity",
            ExprError::DuplicateBinding(_) => "parameter-conflict",
            ExprError::Unsupported(_) => "unsupported",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Expr { source, .. } => source.into(),
            other => CliError::new("parse-error", other.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        let code = match &e {
            CatalogError::UnknownId { .. } => "unknown-id",
            _ => "parse-error",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<JetError> for CliError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Expr(x) => x.into(),
            other => CliError::new("unsupported", other.to_string()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Expr(x) => x.into(),
            other => CliError::new("reduction", other.to_string()),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        let code = match &e {
            NumericsError::ValidityViolation(_) => "validity",
            NumericsError::Missing(_) => "missing-parameter",
            NumericsError::Conflict { .. } => "parameter-conflict",
            NumericsError::Expr(x) => return x.clone().into(),
            NumericsError::Integrate(_) => "integration",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        let code = match &e {
            PdeError::Grid(_) => "usage",
            PdeError::PoleOnGrid { .. } => "pole",
            PdeError::ValidityViolation(_) | PdeError::NegativeU { .. } => "validity",
            PdeError::BackwardDiffusion { .. } => "ill-posed",
            PdeError::Numerics(n) => return n.clone().into(),
            PdeError::Expr(x) => return x.clone().into(),
        };
        CliError::new(code, e.to_string())
    }
}

impl From<InvarianceError> for CliError {
    fn from(e: InvarianceError) -> Self {
        let code = match &e {
            InvarianceError::TooFewSamples { .. } | InvarianceError::NoGenerators => "usage",
            InvarianceError::DependentGenerators { .. } => "dependent-generators",
            InvarianceError::DegenerateSampling { .. } => "sampling",
            InvarianceError::Expr(x) => return x.clone().into(),
        };
        CliError::new(code, e.to_string())
    }
}
