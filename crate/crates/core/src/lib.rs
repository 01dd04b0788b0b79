//! Frame-based conceptual modeling.
//!
//! A [`Model`] is a semantic network of primary concepts, constants, typed
//! variables and predicate nodes connected by type arcs and role arcs, with
//! frames grouping elements into knowledge units. This crate validates and
//! evaluates such models, stores them in the `.cmx` XML record format, and
//! compiles them forward to UML class models and relational schemas and
//! back again.

pub mod frame;
#[cfg(any(test, feature = "gen"))]
pub mod gen;
pub mod iso;
pub mod pipeline;
pub mod rdb;
pub mod svg;
pub mod uml;
pub mod xml;

pub use frame::{
    evaluate, instantiate, is_template, roles_of, validate_model, Arc, ArcKind, Binding,
    ConceptDef, ConstantNode, Diagnostic, DiagnosticCode, ElementId, ElementKind, Frame,
    FrameError, Interpretation, Model, PredicateKind, PredicateNode, Role, VariableNode,
};
pub use iso::frame_isomorphic;
pub use pipeline::{compile, CompileError, Target};
pub use rdb::{parse_ddl, render_sql, schema_to_frames, to_schema, RelationalSchema};
pub use svg::render_svg;
pub use uml::{from_uml, render_uml_text, to_uml, UmlModel};
pub use xml::{parse_model, serialize_model, Geometry, XmlElementRecord};
