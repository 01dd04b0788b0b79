//! Frame isomorphism: model equality up to element ids, variable names,
//! layout and frame grouping.
//!
//! Two models are frame-isomorphic when they declare the same multiset of
//! concept names, the same constants with the same typings, and the same
//! predicates (name and kind) with identical role → concept signatures.
//! Whether an argument is a variable or a constant does not matter; only
//! the concepts it ranges over do.

use std::collections::{BTreeMap, BTreeSet};

use crate::frame::{ArcKind, ElementId, Model, PredicateKind, Role};

/// Role → set of concept names.
pub type RoleSignature = BTreeMap<Role, BTreeSet<String>>;

/// Canonical, id-free summary of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub concepts: Vec<String>,
    pub constants: Vec<(String, String)>,
    pub predicates: Vec<(String, PredicateKind, RoleSignature)>,
}

const UNRESOLVED: &str = "?";

pub fn signature(m: &Model) -> Signature {
    let concept_name = |id: ElementId| -> String {
        m.concepts
            .iter()
            .find(|c| c.id == id)
            .map_or_else(|| UNRESOLVED.to_owned(), |c| c.name.clone())
    };

    let mut concepts: Vec<String> = m.concepts.iter().map(|c| c.name.clone()).collect();
    concepts.sort();

    let mut constants: Vec<(String, String)> = m
        .constants
        .iter()
        .map(|c| (c.name.clone(), concept_name(c.concept)))
        .collect();
    constants.sort();

    let mut predicates = Vec::new();
    for p in &m.predicates {
        let mut roles = RoleSignature::new();
        for arc in &m.arcs {
            let ArcKind::Role(role) = arc.kind else { continue };
            if arc.source != p.id {
                continue;
            }
            let entry = roles.entry(role).or_default();
            if let Some(c) = m.constants.iter().find(|c| c.id == arc.target) {
                entry.insert(concept_name(c.concept));
            } else {
                for t in &m.arcs {
                    if t.kind == ArcKind::Type && t.source == arc.target {
                        entry.insert(concept_name(t.target));
                    }
                }
            }
        }
        predicates.push((p.name.clone(), p.kind, roles));
    }
    predicates.sort();

    Signature {
        concepts,
        constants,
        predicates,
    }
}

pub fn frame_isomorphic(a: &Model, b: &Model) -> bool {
    signature(a) == signature(b)
}

/// A short description of the first difference, for test failure output.
pub fn explain_difference(a: &Model, b: &Model) -> Option<String> {
    let (sa, sb) = (signature(a), signature(b));
    if sa.concepts != sb.concepts {
        return Some(format!("concepts differ: {:?} vs {:?}", sa.concepts, sb.concepts));
    }
    if sa.constants != sb.constants {
        return Some(format!("constants differ: {:?} vs {:?}", sa.constants, sb.constants));
    }
    if sa.predicates != sb.predicates {
        for (x, y) in sa.predicates.iter().zip(&sb.predicates) {
            if x != y {
                return Some(format!("predicates differ: {x:?} vs {y:?}"));
            }
        }
        return Some(format!(
            "predicate counts differ: {} vs {}",
            sa.predicates.len(),
            sb.predicates.len()
        ));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Model {
        let mut m = Model::new();
        let a = m.add_concept("A");
        let p = m.add_predicate("p", PredicateKind::Event);
        let v = m.add_variable("v");
        m.add_arc(ArcKind::Type, v, a);
        m.add_arc(ArcKind::Role(Role::Agent), p, v);
        m
    }

    #[test]
    fn ignores_ids_names_of_variables_and_layout() {
        let mut m = Model::new();
        let p = m.add_predicate("p", PredicateKind::Event);
        let v = m.add_variable("renamed");
        let a = m.add_concept("A");
        m.add_arc(ArcKind::Role(Role::Agent), p, v);
        m.add_arc(ArcKind::Type, v, a);
        m.geometry.insert(v, crate::xml::Geometry::at(5, 5));
        assert!(frame_isomorphic(&base(), &m));
        assert_eq!(explain_difference(&base(), &m), None);
    }

    #[test]
    fn constant_argument_counts_as_its_concept() {
        let mut m = Model::new();
        let a = m.add_concept("A");
        let p = m.add_predicate("p", PredicateKind::Event);
        let k = m.add_constant("k", a);
        m.add_arc(ArcKind::Role(Role::Agent), p, k);
        let mut b = base();
        b.add_constant("k", b.concepts[0].id);
        assert!(frame_isomorphic(&m, &b));
    }

    #[test]
    fn detects_role_kind_and_concept_changes() {
        let mut m = base();
        m.arcs[1].kind = ArcKind::Role(Role::Object);
        assert!(!frame_isomorphic(&base(), &m));

        let mut m = base();
        m.predicates[0].kind = PredicateKind::Function;
        assert!(!frame_isomorphic(&base(), &m));

        let mut m = base();
        m.concepts[0].name = "B".into();
        assert!(explain_difference(&base(), &m).unwrap().starts_with("concepts"));
    }
}
