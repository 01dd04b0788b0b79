//! End-to-end compilation entry points shared by the command line and the
//! HTTP service, so both produce identical bytes.

use std::fmt;
use std::str::FromStr;

use crate::frame::{validate_model, Diagnostic, Model};
use crate::rdb::{parse_ddl, render_sql, schema_to_frames, to_schema, RdbError};
use crate::svg::{render_svg, SvgError};
use crate::uml::{render_uml_text, to_uml, UmlError};
use crate::xml::serialize_model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Uml,
    Sql,
    Svg,
    Xml,
}

impl Target {
    pub const ALL: [Target; 4] = [Self::Uml, Self::Sql, Self::Svg, Self::Xml];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uml => "uml",
            Self::Sql => "sql",
            Self::Svg => "svg",
            Self::Xml => "xml",
        }
    }

    pub fn media_type(self) -> &'static str {
        match self {
            Self::Svg => "image/svg+xml",
            Self::Xml => "application/xml",
            Self::Uml | Self::Sql => "text/plain; charset=utf-8",
        }
    }

    /// Whether the target requires a model without diagnostics.
    pub fn needs_valid_model(self) -> bool {
        matches!(self, Self::Uml | Self::Sql)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown target {s:?} (expected uml, sql, svg or xml)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("model has {} validation diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Uml(UmlError),
    #[error(transparent)]
    Rdb(RdbError),
    #[error(transparent)]
    Svg(#[from] SvgError),
}

impl From<UmlError> for CompileError {
    fn from(e: UmlError) -> Self {
        match e {
            UmlError::InvalidModel(d) => Self::Invalid(d),
            other => Self::Uml(other),
        }
    }
}

impl From<RdbError> for CompileError {
    fn from(e: RdbError) -> Self {
        match e {
            RdbError::Uml(u) => u.into(),
            other => Self::Rdb(other),
        }
    }
}

/// Compiles a model to the requested artifact text.
pub fn compile(m: &Model, target: Target) -> Result<String, CompileError> {
    if target.needs_valid_model() {
        let diagnostics = validate_model(m);
        if !diagnostics.is_empty() {
            return Err(CompileError::Invalid(diagnostics));
        }
    }
    match target {
        Target::Uml => Ok(render_uml_text(&to_uml(m)?)),
        Target::Sql => Ok(render_sql(&to_schema(&to_uml(m)?)?)?),
        Target::Svg => Ok(render_svg(m)?),
        Target::Xml => Ok(serialize_model(m)),
    }
}

/// DDL text → canonical `.cmx` text.
pub fn reverse_sql(ddl: &str) -> Result<String, RdbError> {
    let schema = parse_ddl(ddl)?;
    Ok(serialize_model(&schema_to_frames(&schema)?))
}
