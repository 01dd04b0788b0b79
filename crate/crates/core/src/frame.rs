//! The frame metamodel: concepts, constants, typed variables, predicates,
//! type and role arcs, frames, plus structural validation, variable binding
//! and evaluation against a finite interpretation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::xml::Geometry;

/// Identifier of a model element. Ids share a single namespace across all
/// element kinds; `0` is the "no link" sentinel of the storage format and is
/// never a valid id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(NonZeroU32);

impl ElementId {
    pub fn new(value: u32) -> Option<Self> {
        NonZeroU32::new(value).map(Self)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A primary concept: a sort interpreted as a set of individuals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptDef {
    pub id: ElementId,
    pub name: String,
}

/// A named individual of a primary concept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantNode {
    pub id: ElementId,
    pub name: String,
    pub concept: ElementId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableNode {
    pub id: ElementId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Event,
    Function,
    Characteristic,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 3] = [Self::Event, Self::Function, Self::Characteristic];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Event => "event",
            Self::Function => "function",
            Self::Characteristic => "characteristic",
        }
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredicateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

/// A predicate symbol node; its arguments hang off outgoing role arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateNode {
    pub id: ElementId,
    pub name: String,
    pub kind: PredicateKind,
}

/// Event frame argument roles.
///
/// | short | long        | meaning                                   |
/// |-------|-------------|-------------------------------------------|
/// | `a`   | agent       | action initiator (actor)                  |
/// | `o`   | object      | action addressee                          |
/// | `s`   | source      | addressee location before the event       |
/// | `d`   | destination | addressee location after the event        |
/// | `r`   | result      | action result                             |
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Agent,
    Object,
    Source,
    Destination,
    Result,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Self::Agent,
        Self::Object,
        Self::Source,
        Self::Destination,
        Self::Result,
    ];

    pub fn short(self) -> &'static str {
        match self {
            Self::Agent => "a",
            Self::Object => "o",
            Self::Source => "s",
            Self::Destination => "d",
            Self::Result => "r",
        }
    }

    pub fn long(self) -> &'static str {
        match self {
            Self::Agent => "agent",
            Self::Object => "object",
            Self::Source => "source",
            Self::Destination => "destination",
            Self::Result => "result",
        }
    }

    pub fn meaning(self) -> &'static str {
        match self {
            Self::Agent => "Action initiator (actor)",
            Self::Object => "Action addressee",
            Self::Source => "Action addressee location before the event",
            Self::Destination => "Action addressee location after the event",
            Self::Result => "Action result",
        }
    }

    pub fn from_short(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.short() == s)
    }

    pub fn from_long(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.long() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.long())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcKind {
    /// The "t"-arc from a variable to one of its types.
    Type,
    Role(Role),
}

impl ArcKind {
    /// The letter drawn on the arc.
    pub fn marker(self) -> &'static str {
        match self {
            Self::Type => "t",
            Self::Role(role) => role.short(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub id: ElementId,
    pub kind: ArcKind,
    pub source: ElementId,
    pub target: ElementId,
}

/// A knowledge unit grouping nodes, arcs and (for compound frames) other
/// frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub id: ElementId,
    pub name: String,
    pub members: BTreeSet<ElementId>,
    pub simple: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Concept,
    Constant,
    Variable,
    Predicate(PredicateKind),
    Arc,
    Frame,
}

impl ElementKind {
    fn describe(self) -> &'static str {
        match self {
            Self::Concept => "concept",
            Self::Constant => "constant",
            Self::Variable => "variable",
            Self::Predicate(_) => "predicate",
            Self::Arc => "arc",
            Self::Frame => "frame",
        }
    }
}

/// The complete element graph plus per-element storage attributes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub concepts: Vec<ConceptDef>,
    pub constants: Vec<ConstantNode>,
    pub variables: Vec<VariableNode>,
    pub predicates: Vec<PredicateNode>,
    pub arcs: Vec<Arc>,
    pub frames: Vec<Frame>,
    pub geometry: BTreeMap<ElementId, Geometry>,
    /// Free-text descriptions; absent entries read as "No Description".
    pub descriptions: BTreeMap<ElementId, String>,
    /// Unrecognized child fields of stored records, kept verbatim.
    pub extra_fields: BTreeMap<ElementId, Vec<String>>,
}

pub const DEFAULT_DESCRIPTION: &str = "No Description";

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.element_count() == 0
    }

    pub fn element_count(&self) -> usize {
        self.concepts.len()
            + self.constants.len()
            + self.variables.len()
            + self.predicates.len()
            + self.arcs.len()
            + self.frames.len()
    }

    pub fn node_count(&self) -> usize {
        self.concepts.len() + self.constants.len() + self.variables.len() + self.predicates.len()
    }

    /// Every element id with its kind, in collection order. Duplicated ids
    /// appear once per occurrence.
    pub fn elements(&self) -> impl Iterator<Item = (ElementId, ElementKind)> + '_ {
        let concepts = self.concepts.iter().map(|c| (c.id, ElementKind::Concept));
        let constants = self.constants.iter().map(|c| (c.id, ElementKind::Constant));
        let variables = self.variables.iter().map(|v| (v.id, ElementKind::Variable));
        let predicates = self
            .predicates
            .iter()
            .map(|p| (p.id, ElementKind::Predicate(p.kind)));
        let arcs = self.arcs.iter().map(|a| (a.id, ElementKind::Arc));
        let frames = self.frames.iter().map(|f| (f.id, ElementKind::Frame));
        concepts
            .chain(constants)
            .chain(variables)
            .chain(predicates)
            .chain(arcs)
            .chain(frames)
    }

    pub fn kind_of(&self, id: ElementId) -> Option<ElementKind> {
        self.elements().find(|(e, _)| *e == id).map(|(_, k)| k)
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.kind_of(id).is_some()
    }

    pub fn concept(&self, id: ElementId) -> Option<&ConceptDef> {
        self.concepts.iter().find(|c| c.id == id)
    }

    pub fn concept_named(&self, name: &str) -> Option<&ConceptDef> {
        self.concepts.iter().find(|c| c.name == name)
    }

    pub fn constant(&self, id: ElementId) -> Option<&ConstantNode> {
        self.constants.iter().find(|c| c.id == id)
    }

    pub fn variable(&self, id: ElementId) -> Option<&VariableNode> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn predicate(&self, id: ElementId) -> Option<&PredicateNode> {
        self.predicates.iter().find(|p| p.id == id)
    }

    pub fn frame(&self, id: ElementId) -> Option<&Frame> {
        self.frames.iter().find(|f| f.id == id)
    }

    /// Display name of a node, frame or arc marker.
    pub fn name_of(&self, id: ElementId) -> Option<&str> {
        if let Some(c) = self.concept(id) {
            return Some(&c.name);
        }
        if let Some(c) = self.constant(id) {
            return Some(&c.name);
        }
        if let Some(v) = self.variable(id) {
            return Some(&v.name);
        }
        if let Some(p) = self.predicate(id) {
            return Some(&p.name);
        }
        if let Some(f) = self.frame(id) {
            return Some(&f.name);
        }
        self.arcs
            .iter()
            .find(|a| a.id == id)
            .map(|a| a.kind.marker())
    }

    pub fn description(&self, id: ElementId) -> &str {
        self.descriptions
            .get(&id)
            .map(String::as_str)
            .unwrap_or(DEFAULT_DESCRIPTION)
    }

    /// Targets of the type arcs leaving `variable`, in arc order.
    pub fn types_of(&self, variable: ElementId) -> Vec<ElementId> {
        self.arcs
            .iter()
            .filter(|a| a.kind == ArcKind::Type && a.source == variable)
            .map(|a| a.target)
            .collect()
    }

    /// Role arcs leaving `predicate`, in arc order.
    pub fn role_arcs(&self, predicate: ElementId) -> impl Iterator<Item = (Role, &Arc)> + '_ {
        self.arcs.iter().filter_map(move |a| match a.kind {
            ArcKind::Role(role) if a.source == predicate => Some((role, a)),
            _ => None,
        })
    }

    /// Concepts an argument node ranges over: a variable's types or a
    /// constant's concept.
    pub fn argument_concepts(&self, argument: ElementId) -> Vec<ElementId> {
        if let Some(c) = self.constant(argument) {
            return vec![c.concept];
        }
        self.types_of(argument)
    }

    /// Members of `frame`, including members of nested frames.
    pub fn frame_members_deep(&self, frame: ElementId) -> BTreeSet<ElementId> {
        let mut out = BTreeSet::new();
        let mut visited = BTreeSet::new();
        let mut stack = vec![frame];
        while let Some(f) = stack.pop() {
            if !visited.insert(f) {
                continue;
            }
            let Some(frame) = self.frame(f) else { continue };
            for &member in &frame.members {
                out.insert(member);
                if self.frame(member).is_some() {
                    stack.push(member);
                }
            }
        }
        out
    }

    /// The smallest unused id.
    pub fn next_id(&self) -> ElementId {
        let max = self.elements().map(|(id, _)| id.get()).max().unwrap_or(0);
        ElementId::new(max + 1).expect("id space exhausted")
    }

    pub fn add_concept(&mut self, name: impl Into<String>) -> ElementId {
        let id = self.next_id();
        self.concepts.push(ConceptDef { id, name: name.into() });
        id
    }

    pub fn add_constant(&mut self, name: impl Into<String>, concept: ElementId) -> ElementId {
        let id = self.next_id();
        self.constants.push(ConstantNode {
            id,
            name: name.into(),
            concept,
        });
        id
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> ElementId {
        let id = self.next_id();
        self.variables.push(VariableNode { id, name: name.into() });
        id
    }

    pub fn add_predicate(&mut self, name: impl Into<String>, kind: PredicateKind) -> ElementId {
        let id = self.next_id();
        self.predicates.push(PredicateNode {
            id,
            name: name.into(),
            kind,
        });
        id
    }

    pub fn add_arc(&mut self, kind: ArcKind, source: ElementId, target: ElementId) -> ElementId {
        let id = self.next_id();
        self.arcs.push(Arc {
            id,
            kind,
            source,
            target,
        });
        id
    }

    pub fn add_frame(
        &mut self,
        name: impl Into<String>,
        members: impl IntoIterator<Item = ElementId>,
        simple: bool,
    ) -> ElementId {
        let id = self.next_id();
        self.frames.push(Frame {
            id,
            name: name.into(),
            members: members.into_iter().collect(),
            simple,
        });
        id
    }
}

/// Validation finding codes. Variant order is the lexicographic order of
/// the code names, which the derived `Ord` relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    BadArcEndpoints,
    DanglingArc,
    DuplicateConcept,
    DuplicateId,
    DuplicateRole,
    EmptyPredicate,
    FunctionResultArity,
    NonsimpleMarkedSimple,
    SelfArc,
    UntypedVariable,
}

impl DiagnosticCode {
    pub const ALL: [DiagnosticCode; 10] = [
        Self::BadArcEndpoints,
        Self::DanglingArc,
        Self::DuplicateConcept,
        Self::DuplicateId,
        Self::DuplicateRole,
        Self::EmptyPredicate,
        Self::FunctionResultArity,
        Self::NonsimpleMarkedSimple,
        Self::SelfArc,
        Self::UntypedVariable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::BadArcEndpoints => "BAD_ARC_ENDPOINTS",
            Self::DanglingArc => "DANGLING_ARC",
            Self::DuplicateConcept => "DUPLICATE_CONCEPT",
            Self::DuplicateId => "DUPLICATE_ID",
            Self::DuplicateRole => "DUPLICATE_ROLE",
            Self::EmptyPredicate => "EMPTY_PREDICATE",
            Self::FunctionResultArity => "FUNCTION_RESULT_ARITY",
            Self::NonsimpleMarkedSimple => "NONSIMPLE_MARKED_SIMPLE",
            Self::SelfArc => "SELF_ARC",
            Self::UntypedVariable => "UNTYPED_VARIABLE",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub subject: ElementId,
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.code, self.subject, self.message)
    }
}

/// Checks every structural invariant of `m`. The result is sorted by
/// subject id, then code name; an empty list means the model is valid.
pub fn validate_model(m: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |subject: ElementId, code: DiagnosticCode, message: String| {
        out.push(Diagnostic {
            subject,
            code,
            message,
        })
    };

    // First occurrence wins when ids collide.
    let mut kinds: HashMap<ElementId, ElementKind> = HashMap::new();
    let mut counts: BTreeMap<ElementId, usize> = BTreeMap::new();
    for (id, kind) in m.elements() {
        kinds.entry(id).or_insert(kind);
        *counts.entry(id).or_default() += 1;
    }
    for (&id, &n) in &counts {
        if n > 1 {
            push(
                id,
                DiagnosticCode::DuplicateId,
                format!("id {id} is used by {n} elements"),
            );
        }
    }

    let mut concept_names: HashMap<&str, ElementId> = HashMap::new();
    for c in &m.concepts {
        match concept_names.get(c.name.as_str()) {
            Some(first) => push(
                c.id,
                DiagnosticCode::DuplicateConcept,
                format!("concept name {:?} already declared by {first}", c.name),
            ),
            None => {
                concept_names.insert(&c.name, c.id);
            }
        }
    }

    for c in &m.constants {
        match kinds.get(&c.concept) {
            None => push(
                c.id,
                DiagnosticCode::DanglingArc,
                format!("constant {:?} is typed by missing element {}", c.name, c.concept),
            ),
            Some(ElementKind::Concept) => {}
            Some(other) => push(
                c.id,
                DiagnosticCode::BadArcEndpoints,
                format!(
                    "constant {:?} is typed by {} {}, not a concept",
                    c.name,
                    other.describe(),
                    c.concept
                ),
            ),
        }
    }

    for v in &m.variables {
        if !m.arcs.iter().any(|a| a.kind == ArcKind::Type && a.source == v.id) {
            push(
                v.id,
                DiagnosticCode::UntypedVariable,
                format!("variable {:?} has no type arc", v.name),
            );
        }
    }

    for a in &m.arcs {
        let source = kinds.get(&a.source).copied();
        let target = kinds.get(&a.target).copied();
        if source.is_none() || target.is_none() {
            let missing: Vec<String> = [(a.source, source), (a.target, target)]
                .iter()
                .filter(|(_, k)| k.is_none())
                .map(|(id, _)| id.to_string())
                .collect();
            push(
                a.id,
                DiagnosticCode::DanglingArc,
                format!("arc endpoint(s) {} do not exist", missing.join(", ")),
            );
            continue;
        }
        if a.source == a.target {
            push(
                a.id,
                DiagnosticCode::SelfArc,
                format!("arc starts and ends at {}", a.source),
            );
            continue;
        }
        let (source, target) = (source.unwrap(), target.unwrap());
        let ok = match a.kind {
            ArcKind::Type => {
                source == ElementKind::Variable && target == ElementKind::Concept
            }
            ArcKind::Role(_) => {
                matches!(source, ElementKind::Predicate(_))
                    && matches!(target, ElementKind::Variable | ElementKind::Constant)
            }
        };
        if !ok {
            let expected = match a.kind {
                ArcKind::Type => "variable -> concept",
                ArcKind::Role(_) => "predicate -> variable|constant",
            };
            push(
                a.id,
                DiagnosticCode::BadArcEndpoints,
                format!(
                    "{:?} arc runs {} -> {}, expected {expected}",
                    a.kind.marker(),
                    source.describe(),
                    target.describe()
                ),
            );
        }
    }

    for p in &m.predicates {
        let mut per_role: BTreeMap<Role, usize> = BTreeMap::new();
        for (role, _) in m.role_arcs(p.id) {
            *per_role.entry(role).or_default() += 1;
        }
        if per_role.is_empty() {
            push(
                p.id,
                DiagnosticCode::EmptyPredicate,
                format!("predicate {:?} has no role arcs", p.name),
            );
        }
        for (role, &n) in &per_role {
            if n > 1 {
                push(
                    p.id,
                    DiagnosticCode::DuplicateRole,
                    format!("predicate {:?} has {n} {role} arcs", p.name),
                );
            }
        }
        if p.kind == PredicateKind::Function {
            let results = per_role.get(&Role::Result).copied().unwrap_or(0);
            if results != 1 {
                push(
                    p.id,
                    DiagnosticCode::FunctionResultArity,
                    format!(
                        "function {:?} has {results} result arcs, expected exactly 1",
                        p.name
                    ),
                );
            }
        }
    }

    for f in &m.frames {
        for &member in &f.members {
            match kinds.get(&member) {
                None => push(
                    f.id,
                    DiagnosticCode::DanglingArc,
                    format!("frame {:?} lists missing member {member}", f.name),
                ),
                Some(ElementKind::Frame) if f.simple => push(
                    f.id,
                    DiagnosticCode::NonsimpleMarkedSimple,
                    format!("simple frame {:?} contains frame {member}", f.name),
                ),
                Some(_) => {}
            }
        }
    }

    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("no frame with id {0}")]
    NotFound(ElementId),
    #[error("variable {name:?} ({variable}) has no assignment")]
    PartialBinding { variable: ElementId, name: String },
    #[error("variable {name:?} ({variable}) expects {expected:?} but was bound to a {actual} constant")]
    TypeMismatch {
        variable: ElementId,
        name: String,
        expected: Vec<String>,
        actual: String,
    },
    #[error("element {0} is bound as a value but is not a constant")]
    NotAConstant(ElementId),
    #[error("frame still contains variable argument {0}")]
    NotFullyInstantiated(ElementId),
    #[error("constant {name:?} ({constant}) has no instance in the interpretation")]
    UnboundConstant { constant: ElementId, name: String },
    #[error("role arc {0} targets neither a variable nor a constant")]
    BadArgument(ElementId),
}

/// Assignment of constants to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    pub assignments: BTreeMap<ElementId, ElementId>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, variable: ElementId, constant: ElementId) -> Self {
        self.assignments.insert(variable, constant);
        self
    }
}

/// One fact: which instance fills each role.
pub type FactTuple = BTreeMap<Role, String>;

/// Finite extensional interpretation of a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub concept_extents: BTreeMap<ElementId, BTreeSet<String>>,
    pub constant_instances: BTreeMap<ElementId, String>,
    pub facts: BTreeMap<String, BTreeSet<FactTuple>>,
}

/// Problems found by [`Interpretation::check`]. These are warnings: an
/// interpretation carrying them can still be used for evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InterpretationWarning {
    /// `constant_instances[c]` lies outside the extent of c's concept.
    InstanceOutsideExtent { constant: ElementId, instance: String },
    /// A fact for `predicate` uses a role no predicate of that name declares.
    UndeclaredRole { predicate: String, role: Role },
    /// Two facts of a function agree on every non-result role but not on
    /// the result.
    NotFunctional { predicate: String, arguments: FactTuple },
}

impl fmt::Display for InterpretationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InstanceOutsideExtent { constant, instance } => {
                write!(f, "constant {constant} maps to {instance:?} outside its concept's extent")
            }
            Self::UndeclaredRole { predicate, role } => {
                write!(f, "fact for {predicate:?} uses undeclared role {role}")
            }
            Self::NotFunctional { predicate, arguments } => {
                write!(f, "function {predicate:?} has several results for {arguments:?}")
            }
        }
    }
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_fact<I, S>(&mut self, predicate: &str, tuple: I)
    where
        I: IntoIterator<Item = (Role, S)>,
        S: Into<String>,
    {
        self.facts
            .entry(predicate.to_owned())
            .or_default()
            .insert(tuple.into_iter().map(|(r, s)| (r, s.into())).collect());
    }

    pub fn check(&self, m: &Model) -> Vec<InterpretationWarning> {
        let mut out = Vec::new();
        for c in &m.constants {
            let Some(instance) = self.constant_instances.get(&c.id) else { continue };
            let inside = self
                .concept_extents
                .get(&c.concept)
                .is_some_and(|extent| extent.contains(instance));
            if !inside {
                out.push(InterpretationWarning::InstanceOutsideExtent {
                    constant: c.id,
                    instance: instance.clone(),
                });
            }
        }
        for (name, tuples) in &self.facts {
            let predicates: Vec<&PredicateNode> =
                m.predicates.iter().filter(|p| &p.name == name).collect();
            let declared: BTreeSet<Role> = predicates
                .iter()
                .flat_map(|p| m.role_arcs(p.id).map(|(r, _)| r))
                .collect();
            let used: BTreeSet<Role> = tuples.iter().flat_map(|t| t.keys().copied()).collect();
            for role in used.difference(&declared) {
                out.push(InterpretationWarning::UndeclaredRole {
                    predicate: name.clone(),
                    role: *role,
                });
            }
            if predicates.iter().any(|p| p.kind == PredicateKind::Function) {
                let mut results: BTreeMap<FactTuple, BTreeSet<Option<&String>>> = BTreeMap::new();
                for t in tuples {
                    let mut args = t.clone();
                    args.remove(&Role::Result);
                    results.entry(args).or_default().insert(t.get(&Role::Result));
                }
                for (arguments, rs) in results {
                    if rs.len() > 1 {
                        out.push(InterpretationWarning::NotFunctional {
                            predicate: name.clone(),
                            arguments,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Predicates inside `frame` (nested frames included), by id.
fn frame_predicates(m: &Model, frame: ElementId) -> Result<Vec<&PredicateNode>, FrameError> {
    if m.frame(frame).is_none() {
        return Err(FrameError::NotFound(frame));
    }
    let members = m.frame_members_deep(frame);
    let mut preds: Vec<&PredicateNode> = m
        .predicates
        .iter()
        .filter(|p| members.contains(&p.id))
        .collect();
    preds.sort_by_key(|p| p.id);
    Ok(preds)
}

/// Whether `frame` is still a template: some predicate argument inside it
/// is a variable.
pub fn is_template(m: &Model, frame: ElementId) -> Result<bool, FrameError> {
    Ok(first_variable_argument(m, frame)?.is_some())
}

fn first_variable_argument(m: &Model, frame: ElementId) -> Result<Option<ElementId>, FrameError> {
    for p in frame_predicates(m, frame)? {
        for (_, arc) in m.role_arcs(p.id) {
            if m.variable(arc.target).is_some() {
                return Ok(Some(arc.target));
            }
        }
    }
    Ok(None)
}

/// Substitutes constants for the variable arguments of `frame`'s predicates.
///
/// Every variable argument must be bound, and bound to a constant whose
/// concept is one of the variable's types. Only role arcs leaving the
/// frame's predicates are retargeted; the variables themselves and their
/// type arcs stay in the model.
pub fn instantiate(m: &Model, frame: ElementId, b: &Binding) -> Result<Model, FrameError> {
    let preds = frame_predicates(m, frame)?;
    let pred_ids: BTreeSet<ElementId> = preds.iter().map(|p| p.id).collect();

    let arguments: BTreeSet<ElementId> = preds
        .iter()
        .flat_map(|p| m.role_arcs(p.id).map(|(_, a)| a.target))
        .filter(|t| m.variable(*t).is_some())
        .collect();

    for &var in &arguments {
        let name = m.variable(var).map(|v| v.name.clone()).unwrap_or_default();
        let Some(&value) = b.assignments.get(&var) else {
            return Err(FrameError::PartialBinding { variable: var, name });
        };
        let constant = m.constant(value).ok_or(FrameError::NotAConstant(value))?;
        let types = m.types_of(var);
        if !types.contains(&constant.concept) {
            let concept_name = |id: ElementId| {
                m.concept(id)
                    .map(|c| c.name.clone())
                    .unwrap_or_else(|| id.to_string())
            };
            return Err(FrameError::TypeMismatch {
                variable: var,
                name,
                expected: types.into_iter().map(concept_name).collect(),
                actual: concept_name(constant.concept),
            });
        }
    }

    let mut out = m.clone();
    for arc in &mut out.arcs {
        if matches!(arc.kind, ArcKind::Role(_)) && pred_ids.contains(&arc.source) {
            if let Some(&value) = b.assignments.get(&arc.target) {
                if arguments.contains(&arc.target) {
                    arc.target = value;
                }
            }
        }
    }
    Ok(out)
}

/// Truth value of a ground frame: every predicate's role tuple must be a
/// fact of the interpretation. A frame without predicates is true.
pub fn evaluate(m: &Model, frame: ElementId, i: &Interpretation) -> Result<bool, FrameError> {
    if let Some(var) = first_variable_argument(m, frame)? {
        return Err(FrameError::NotFullyInstantiated(var));
    }
    let mut all = true;
    for p in frame_predicates(m, frame)? {
        let mut tuple = FactTuple::new();
        for (role, arc) in m.role_arcs(p.id) {
            let constant = m
                .constant(arc.target)
                .ok_or(FrameError::BadArgument(arc.id))?;
            let instance = i.constant_instances.get(&constant.id).ok_or_else(|| {
                FrameError::UnboundConstant {
                    constant: constant.id,
                    name: constant.name.clone(),
                }
            })?;
            tuple.insert(role, instance.clone());
        }
        // Keep scanning so unbound constants surface even after a false conjunct.
        all &= i.facts.get(&p.name).is_some_and(|facts| facts.contains(&tuple));
    }
    Ok(all)
}

/// Role → argument mapping induced by `p`'s role arcs.
pub fn roles_of(p: &PredicateNode, m: &Model) -> BTreeMap<Role, ElementId> {
    m.role_arcs(p.id).map(|(role, a)| (role, a.target)).collect()
}
