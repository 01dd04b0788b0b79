//! Frame model ⇄ UML class model.
//!
//! Forward mapping: every concept becomes a plain classifier, every
//! predicate a classifier stereotyped by its kind, and every role arc a
//! directed association from the predicate's classifier to each concept
//! its argument ranges over, named with the role's long denotation.
//! Constants become instances. A characteristic predicate with a single
//! non-result argument folds into an attribute of that argument's
//! classifier instead.
//!
//! The reverse mapping rebuilds predicates with one fresh variable per role,
//! named `<role>_<n>`, laid out on a fixed grid.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::frame::{
    validate_model, ArcKind, Diagnostic, ElementId, Model, PredicateKind, Role,
};
use crate::xml::{Geometry, DEFAULT_HEIGHT, DEFAULT_WIDTH};

/// Horizontal and vertical pitch of the reverse-mapping layout grid.
pub const GRID_PITCH_X: i64 = 200;
pub const GRID_PITCH_Y: i64 = 120;
pub const GRID_COLUMNS: usize = 6;
const GRID_ORIGIN: i64 = 20;

/// Type name of a folded characteristic without a result argument.
pub const DEFAULT_ATTRIBUTE_TYPE: &str = "string";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmlModel {
    pub classifiers: Vec<Classifier>,
    pub associations: Vec<Association>,
    pub instances: Vec<Instance>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classifier {
    pub name: String,
    /// `None` for plain classes, otherwise the predicate kind.
    pub stereotype: Option<PredicateKind>,
    pub attributes: Vec<Attribute>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub type_name: String,
    /// Set when the attribute stands for a folded characteristic predicate.
    pub folded: Option<FoldedCharacteristic>,
}

/// What is needed to unfold an attribute back into a predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldedCharacteristic {
    /// Role of the argument ranging over the owning classifier.
    pub role: Role,
    /// Whether a result argument exists (its concept is the attribute type).
    pub has_result: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Association {
    pub source: String,
    pub target: String,
    /// Long role denotation, e.g. `agent`.
    pub role: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub classifier: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UmlError {
    #[error("model has {} validation diagnostic(s)", .0.len())]
    InvalidModel(Vec<Diagnostic>),
    #[error("name {0:?} is used by more than one classifier")]
    NameCollision(String),
    #[error("association role {0:?} is not one of agent, object, source, destination, result")]
    UnknownRole(String),
    #[error("{0:?} does not name a classifier")]
    UnknownClassifier(String),
    #[error("association source {0:?} is not a stereotyped classifier")]
    PlainAssociationSource(String),
    #[error("stereotyped classifier {0:?} cannot carry attributes")]
    AttributeOnPredicate(String),
}

impl UmlModel {
    pub fn classifier(&self, name: &str) -> Option<&Classifier> {
        self.classifiers.iter().find(|c| c.name == name)
    }

    /// Checks the structural invariants: unique classifier names, known
    /// association endpoints and roles, instances of plain classifiers.
    pub fn check(&self) -> Result<(), UmlError> {
        let mut names = HashSet::new();
        for c in &self.classifiers {
            if !names.insert(c.name.as_str()) {
                return Err(UmlError::NameCollision(c.name.clone()));
            }
            if c.stereotype.is_some() && !c.attributes.is_empty() {
                return Err(UmlError::AttributeOnPredicate(c.name.clone()));
            }
        }
        for a in &self.associations {
            let source = self
                .classifier(&a.source)
                .ok_or_else(|| UmlError::UnknownClassifier(a.source.clone()))?;
            if source.stereotype.is_none() {
                return Err(UmlError::PlainAssociationSource(a.source.clone()));
            }
            if self.classifier(&a.target).is_none() {
                return Err(UmlError::UnknownClassifier(a.target.clone()));
            }
            if Role::from_long(&a.role).is_none() {
                return Err(UmlError::UnknownRole(a.role.clone()));
            }
        }
        for i in &self.instances {
            if self.classifier(&i.classifier).is_none() {
                return Err(UmlError::UnknownClassifier(i.classifier.clone()));
            }
        }
        Ok(())
    }
}

/// Argument shape of a characteristic that folds into an attribute:
/// (owner concept, role, optional result concept).
fn fold_shape(m: &Model, predicate: ElementId) -> Option<(ElementId, Role, Option<ElementId>)> {
    let mut owner = None;
    let mut result = None;
    for (role, arc) in m.role_arcs(predicate) {
        let concepts = distinct(m.argument_concepts(arc.target));
        let [concept] = concepts.as_slice() else { return None };
        if role == Role::Result {
            if result.replace(*concept).is_some() {
                return None;
            }
        } else if owner.replace((*concept, role)).is_some() {
            return None;
        }
    }
    owner.map(|(concept, role)| (concept, role, result))
}

fn distinct(ids: Vec<ElementId>) -> Vec<ElementId> {
    let mut seen = BTreeSet::new();
    ids.into_iter().filter(|id| seen.insert(*id)).collect()
}

/// Translates a valid model into a UML class model.
pub fn to_uml(m: &Model) -> Result<UmlModel, UmlError> {
    let diagnostics = validate_model(m);
    if !diagnostics.is_empty() {
        return Err(UmlError::InvalidModel(diagnostics));
    }
    let mut names = HashSet::new();
    for name in m
        .concepts
        .iter()
        .map(|c| &c.name)
        .chain(m.predicates.iter().map(|p| &p.name))
    {
        if !names.insert(name.as_str()) {
            return Err(UmlError::NameCollision(name.clone()));
        }
    }
    let concept_name = |id: ElementId| m.concept(id).expect("validated").name.clone();

    let mut u = UmlModel::default();
    for c in &m.concepts {
        u.classifiers.push(Classifier {
            name: c.name.clone(),
            stereotype: None,
            attributes: Vec::new(),
        });
    }
    for p in &m.predicates {
        if p.kind == PredicateKind::Characteristic {
            if let Some((owner, role, result)) = fold_shape(m, p.id) {
                let owner = concept_name(owner);
                let attribute = Attribute {
                    name: p.name.clone(),
                    type_name: result.map_or_else(|| DEFAULT_ATTRIBUTE_TYPE.to_owned(), concept_name),
                    folded: Some(FoldedCharacteristic {
                        role,
                        has_result: result.is_some(),
                    }),
                };
                let class = u
                    .classifiers
                    .iter_mut()
                    .find(|c| c.name == owner)
                    .expect("concept classifier exists");
                class.attributes.push(attribute);
                continue;
            }
        }
        u.classifiers.push(Classifier {
            name: p.name.clone(),
            stereotype: Some(p.kind),
            attributes: Vec::new(),
        });
        for (role, arc) in m.role_arcs(p.id) {
            for concept in distinct(m.argument_concepts(arc.target)) {
                u.associations.push(Association {
                    source: p.name.clone(),
                    target: concept_name(concept),
                    role: role.long().to_owned(),
                });
            }
        }
    }
    for c in &m.constants {
        u.instances.push(Instance {
            name: c.name.clone(),
            classifier: concept_name(c.concept),
        });
    }
    Ok(u)
}

fn plantuml_name(name: &str) -> String {
    let bare = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if bare {
        name.to_owned()
    } else {
        format!("\"{}\"", name.replace('"', "'").replace(['\n', '\r'], " "))
    }
}

/// Renders a PlantUML class diagram. Classifiers are sorted by name,
/// associations by (source, role, target), instances by (classifier, name).
pub fn render_uml_text(u: &UmlModel) -> String {
    let mut out = String::from("@startuml\n");
    let mut classifiers: Vec<&Classifier> = u.classifiers.iter().collect();
    classifiers.sort_by(|a, b| a.name.cmp(&b.name));
    for c in classifiers {
        let _ = write!(out, "class {}", plantuml_name(&c.name));
        if let Some(kind) = c.stereotype {
            let _ = write!(out, " <<{kind}>>");
        }
        if c.attributes.is_empty() {
            out.push('\n');
            continue;
        }
        out.push_str(" {\n");
        let mut attributes: Vec<&Attribute> = c.attributes.iter().collect();
        attributes.sort_by(|a, b| a.name.cmp(&b.name));
        for a in attributes {
            let _ = write!(out, "  {} : {}", a.name.replace('\n', " "), a.type_name.replace('\n', " "));
            if let Some(fold) = a.folded {
                let _ = write!(out, " <<characteristic {}>>", fold.role);
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    let mut instances: Vec<&Instance> = u.instances.iter().collect();
    instances.sort_by(|a, b| (&a.classifier, &a.name).cmp(&(&b.classifier, &b.name)));
    for (n, i) in instances.into_iter().enumerate() {
        let label = format!("{} : {}", i.name, i.classifier).replace('"', "'").replace(['\n', '\r'], " ");
        let _ = writeln!(out, "object \"{label}\" as instance_{}", n + 1);
    }
    let mut associations: Vec<&Association> = u.associations.iter().collect();
    associations.sort_by(|a, b| (&a.source, &a.role, &a.target).cmp(&(&b.source, &b.role, &b.target)));
    for a in associations {
        let _ = writeln!(
            out,
            "{} --> {} : {}",
            plantuml_name(&a.source),
            plantuml_name(&a.target),
            a.role
        );
    }
    out.push_str("@enduml\n");
    out
}

/// Incremental model construction with grid layout, shared with the
/// relational reverse mapping.
struct Synth {
    model: Model,
    placed: usize,
    role_counters: BTreeMap<Role, usize>,
}

impl Synth {
    fn new() -> Self {
        Self {
            model: Model::new(),
            placed: 0,
            role_counters: BTreeMap::new(),
        }
    }

    fn place(&mut self, id: ElementId) {
        let col = (self.placed % GRID_COLUMNS) as i64;
        let row = (self.placed / GRID_COLUMNS) as i64;
        self.placed += 1;
        self.model.geometry.insert(
            id,
            Geometry::new(
                GRID_ORIGIN + col * GRID_PITCH_X,
                GRID_ORIGIN + row * GRID_PITCH_Y,
                DEFAULT_WIDTH,
                DEFAULT_HEIGHT,
            ),
        );
    }

    fn variable_for(&mut self, role: Role) -> ElementId {
        let n = self.role_counters.entry(role).or_insert(0);
        *n += 1;
        let name = format!("{}_{}", role.long(), n);
        let id = self.model.add_variable(name);
        self.place(id);
        id
    }

    /// Adds a predicate whose arguments are fresh variables, one per role,
    /// each typed by the listed concepts, and wraps it in a simple frame.
    fn predicate(&mut self, name: &str, kind: PredicateKind, roles: &BTreeMap<Role, Vec<ElementId>>) {
        let p = self.model.add_predicate(name, kind);
        self.place(p);
        let mut members = vec![p];
        for (&role, concepts) in roles {
            let v = self.variable_for(role);
            members.push(v);
            for &c in concepts {
                members.push(self.model.add_arc(ArcKind::Type, v, c));
            }
            members.push(self.model.add_arc(ArcKind::Role(role), p, v));
        }
        self.model.add_frame(name, members, true);
    }
}

/// Rebuilds a frame model from a UML class model.
pub fn from_uml(u: &UmlModel) -> Result<Model, UmlError> {
    u.check()?;
    let mut s = Synth::new();
    let mut concepts: BTreeMap<&str, ElementId> = BTreeMap::new();
    for c in u.classifiers.iter().filter(|c| c.stereotype.is_none()) {
        let id = s.model.add_concept(&c.name);
        s.place(id);
        concepts.insert(&c.name, id);
    }
    let concept = |name: &str| -> Result<ElementId, UmlError> {
        concepts
            .get(name)
            .copied()
            .ok_or_else(|| UmlError::UnknownClassifier(name.to_owned()))
    };
    for i in &u.instances {
        let c = concept(&i.classifier)?;
        let id = s.model.add_constant(&i.name, c);
        s.place(id);
    }
    for c in &u.classifiers {
        let Some(kind) = c.stereotype else { continue };
        let mut roles: BTreeMap<Role, Vec<ElementId>> = BTreeMap::new();
        for a in u.associations.iter().filter(|a| a.source == c.name) {
            let role = Role::from_long(&a.role).ok_or_else(|| UmlError::UnknownRole(a.role.clone()))?;
            let target = concept(&a.target)?;
            let types = roles.entry(role).or_default();
            if !types.contains(&target) {
                types.push(target);
            }
        }
        s.predicate(&c.name, kind, &roles);
    }
    for c in u.classifiers.iter().filter(|c| c.stereotype.is_none()) {
        let owner = concept(&c.name)?;
        for a in &c.attributes {
            // Attributes without a fold tag read as an object characteristic.
            let fold = a.folded.unwrap_or(FoldedCharacteristic {
                role: Role::Object,
                has_result: concepts.contains_key(a.type_name.as_str()),
            });
            let mut roles = BTreeMap::from([(fold.role, vec![owner])]);
            if fold.has_result {
                roles.entry(Role::Result).or_default().push(concept(&a.type_name)?);
            }
            s.predicate(&a.name, PredicateKind::Characteristic, &roles);
        }
    }
    Ok(s.model)
}
