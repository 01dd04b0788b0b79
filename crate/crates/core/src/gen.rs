//! Random model generators for property and acceptance tests.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::frame::{
    ArcKind, Binding, ElementId, Interpretation, Model, PredicateKind, Role,
};
use crate::xml::Geometry;

const CONCEPT_NAMES: [&str; 12] = [
    "MANAGER", "CANDIDATE", "EMPLOYER", "Person", "Company", "City", "Order Item",
    "Department", "ProjectPhase", "Skill", "naïve-Set", "Vehicle",
];

const PREDICATE_NAMES: [&str; 10] = [
    "supply", "hire", "move", "produce", "owns", "rate of", "assigned to", "TransferDeal",
    "sells", "grade",
];

#[derive(Clone, Debug)]
pub struct ValidModelConfig {
    pub max_concepts: usize,
    pub max_constants_per_concept: usize,
    pub max_predicates: usize,
    pub max_roles: usize,
    /// Allow variables with two type arcs.
    pub multi_typed: bool,
}

impl Default for ValidModelConfig {
    fn default() -> Self {
        Self {
            max_concepts: 6,
            max_constants_per_concept: 3,
            max_predicates: 4,
            max_roles: 5,
            multi_typed: false,
        }
    }
}

fn random_geometry(rng: &mut impl Rng) -> Geometry {
    Geometry::new(
        rng.random_range(-50..=1200),
        rng.random_range(-50..=900),
        rng.random_range(20..=160),
        rng.random_range(20..=90),
    )
}

/// A valid model: unique concept and predicate names, every variable typed,
/// each predicate wrapped with its variables and arcs in a simple frame.
pub fn valid_model(rng: &mut impl Rng, cfg: &ValidModelConfig) -> Model {
    let mut m = Model::new();
    let n_concepts = rng.random_range(1..=cfg.max_concepts.min(CONCEPT_NAMES.len()));
    let concept_names: Vec<&str> = CONCEPT_NAMES.choose_multiple(rng, n_concepts).copied().collect();
    let mut concepts = Vec::new();
    for name in concept_names {
        let id = m.add_concept(name);
        m.geometry.insert(id, random_geometry(rng));
        concepts.push(id);
    }
    let mut constants = Vec::new();
    for (ci, &c) in concepts.iter().enumerate() {
        for k in 0..rng.random_range(0..=cfg.max_constants_per_concept) {
            let name = if rng.random_bool(0.1) {
                format!("O'Neil {k}")
            } else {
                format!("K{ci}_{k}")
            };
            let id = m.add_constant(name, c);
            m.geometry.insert(id, random_geometry(rng));
            constants.push(id);
        }
    }

    let n_predicates = rng.random_range(0..=cfg.max_predicates.min(PREDICATE_NAMES.len()));
    let names: Vec<&str> = PREDICATE_NAMES.choose_multiple(rng, n_predicates).copied().collect();
    for name in names {
        let kind = *PredicateKind::ALL.choose(rng).unwrap();
        let mut roles: Vec<Role> = match kind {
            PredicateKind::Function => {
                let mut others: Vec<Role> = Role::ALL[..4].to_vec();
                others.shuffle(rng);
                let k = rng.random_range(0..cfg.max_roles.clamp(1, 5));
                let mut roles = others[..k.min(4)].to_vec();
                roles.push(Role::Result);
                roles
            }
            PredicateKind::Characteristic if rng.random_bool(0.5) => {
                // Foldable shape: one argument plus an optional result.
                let mut roles = vec![*Role::ALL[..4].choose(rng).unwrap()];
                if rng.random_bool(0.5) && cfg.max_roles > 1 {
                    roles.push(Role::Result);
                }
                roles
            }
            _ => {
                let mut all = Role::ALL.to_vec();
                all.shuffle(rng);
                let k = rng.random_range(1..=cfg.max_roles.clamp(1, 5));
                all.truncate(k);
                all
            }
        };
        roles.sort();

        let p = m.add_predicate(name, kind);
        m.geometry.insert(p, random_geometry(rng));
        let mut members = vec![p];
        for role in roles {
            let argument = if !constants.is_empty() && rng.random_bool(0.25) {
                *constants.choose(rng).unwrap()
            } else {
                let v = m.add_variable(format!("v{}", m.variables.len() + 1));
                m.geometry.insert(v, random_geometry(rng));
                members.push(v);
                let n_types = if cfg.multi_typed && concepts.len() > 1 && rng.random_bool(0.3) {
                    2
                } else {
                    1
                };
                for &c in concepts.choose_multiple(rng, n_types) {
                    members.push(m.add_arc(ArcKind::Type, v, c));
                }
                v
            };
            members.push(m.add_arc(ArcKind::Role(role), p, argument));
        }
        m.add_frame(name, members, true);
    }
    m
}

const AWKWARD: [&str; 10] = [
    "", "plain", "with space", "A & B", "<tag>", "quote \" and '", "Ünïcödé", "multi\nline",
    "tab\there", "cr\r",
];

const EXTRA_FIELDS: [&str; 3] = [
    "<Color>red</Color>",
    r#"<Tag kind="x"/>"#,
    "<Note>a &amp; b</Note>",
];

fn awkward_string(rng: &mut impl Rng) -> String {
    let mut s = (*AWKWARD.choose(rng).unwrap()).to_owned();
    if rng.random_bool(0.5) {
        s.push_str(&rng.random_range(0..1000).to_string());
    }
    s
}

/// An arbitrary, possibly invalid model exercising every storage feature:
/// dangling references, nested frames, geometry on any element,
/// descriptions with markup, unknown fields. Frame membership follows the
/// storage convention (each node in at most one frame, arcs with the frame
/// of their source node).
pub fn storage_model(rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    let n = rng.random_range(0..=24u32);
    let mut frames_so_far: Vec<ElementId> = Vec::new();
    let mut owner_of_node: Vec<(ElementId, ElementId)> = Vec::new();
    for raw in 1..=n {
        let id = ElementId::new(raw).unwrap();
        let any_id = |rng: &mut dyn rand::RngCore| ElementId::new(rng.random_range(1..=n + 3)).unwrap();
        match rng.random_range(0..7) {
            0 => m.concepts.push(crate::frame::ConceptDef { id, name: awkward_string(rng) }),
            1 => m.constants.push(crate::frame::ConstantNode {
                id,
                name: awkward_string(rng),
                concept: any_id(rng),
            }),
            2 => m.variables.push(crate::frame::VariableNode { id, name: awkward_string(rng) }),
            3 => m.predicates.push(crate::frame::PredicateNode {
                id,
                name: awkward_string(rng),
                kind: *PredicateKind::ALL.choose(rng).unwrap(),
            }),
            4 | 5 => {
                let kind = if rng.random_bool(0.3) {
                    ArcKind::Type
                } else {
                    ArcKind::Role(*Role::ALL.choose(rng).unwrap())
                };
                m.arcs.push(crate::frame::Arc {
                    id,
                    kind,
                    source: any_id(rng),
                    target: any_id(rng),
                });
            }
            _ => {
                m.frames.push(crate::frame::Frame {
                    id,
                    name: awkward_string(rng),
                    members: BTreeSet::new(),
                    simple: rng.random_bool(0.5),
                });
                if let Some(&parent) = frames_so_far.choose(rng) {
                    if rng.random_bool(0.5) {
                        owner_of_node.push((parent, id));
                    }
                }
                frames_so_far.push(id);
            }
        }
        if rng.random_bool(0.6) {
            m.geometry.insert(id, random_geometry(rng));
        }
        if rng.random_bool(0.4) {
            m.descriptions.insert(id, awkward_string(rng));
        }
        if rng.random_bool(0.1) {
            let k = rng.random_range(1..=2);
            let fields = EXTRA_FIELDS.choose_multiple(rng, k).map(|s| s.to_string()).collect();
            m.extra_fields.insert(id, fields);
        }
    }
    if !frames_so_far.is_empty() {
        let nodes: Vec<ElementId> = m
            .concepts
            .iter()
            .map(|c| c.id)
            .chain(m.constants.iter().map(|c| c.id))
            .chain(m.variables.iter().map(|v| v.id))
            .chain(m.predicates.iter().map(|p| p.id))
            .collect();
        for node in nodes {
            if rng.random_bool(0.5) {
                owner_of_node.push((*frames_so_far.choose(rng).unwrap(), node));
            }
        }
    }
    let arc_members: Vec<(ElementId, ElementId)> = m
        .arcs
        .iter()
        .filter_map(|a| {
            owner_of_node
                .iter()
                .find(|(_, node)| *node == a.source && m.frame(a.source).is_none())
                .map(|(owner, _)| (*owner, a.id))
        })
        .collect();
    for (owner, member) in owner_of_node.into_iter().chain(arc_members) {
        m.frames
            .iter_mut()
            .find(|f| f.id == owner)
            .unwrap()
            .members
            .insert(member);
    }
    m
}

/// A small evaluation scenario: one simple frame of up to three predicates
/// over variables and constants, a type-correct full binding, and an
/// interpretation whose facts sometimes contain the bound tuples.
pub struct EvaluationCase {
    pub model: Model,
    pub frame: ElementId,
    pub binding: Binding,
    pub interpretation: Interpretation,
}

pub fn evaluation_case(rng: &mut impl Rng) -> EvaluationCase {
    let mut m = Model::new();
    let mut i = Interpretation::new();
    let n_concepts = rng.random_range(1..=5);
    let mut concepts = Vec::new();
    let mut constants_of: Vec<Vec<ElementId>> = Vec::new();
    let mut instances_of: Vec<Vec<String>> = Vec::new();
    for ci in 0..n_concepts {
        let c = m.add_concept(format!("D{ci}"));
        concepts.push(c);
        let n_inst = rng.random_range(1..=4);
        let instances: Vec<String> = (0..n_inst).map(|k| format!("d{ci}.{k}")).collect();
        i.concept_extents.insert(c, instances.iter().cloned().collect());
        let mut consts = Vec::new();
        for (k, inst) in instances.iter().enumerate() {
            if k == 0 || rng.random_bool(0.7) {
                let k_id = m.add_constant(format!("K{ci}_{k}"), c);
                i.constant_instances.insert(k_id, inst.clone());
                consts.push(k_id);
            }
        }
        constants_of.push(consts);
        instances_of.push(instances);
    }
    let all_instances: Vec<String> = instances_of.iter().flatten().cloned().collect();

    let mut binding = Binding::new();
    let mut members = Vec::new();
    let n_preds = rng.random_range(1..=3);
    let names = ["p", "q", "r"];
    for _ in 0..n_preds {
        let name = *names.choose(rng).unwrap();
        let kind = if rng.random_bool(0.8) {
            PredicateKind::Event
        } else {
            PredicateKind::Characteristic
        };
        let p = m.add_predicate(name, kind);
        members.push(p);
        let mut roles = Role::ALL.to_vec();
        roles.shuffle(rng);
        roles.truncate(rng.random_range(1..=3));
        for role in roles {
            let ci = rng.random_range(0..concepts.len());
            let argument = if rng.random_bool(0.3) {
                *constants_of[ci].choose(rng).unwrap()
            } else {
                let v = m.add_variable(format!("x{}", m.variables.len()));
                members.push(v);
                members.push(m.add_arc(ArcKind::Type, v, concepts[ci]));
                let mut choices = constants_of[ci].clone();
                if concepts.len() > 1 && rng.random_bool(0.2) {
                    let cj = (ci + 1) % concepts.len();
                    members.push(m.add_arc(ArcKind::Type, v, concepts[cj]));
                    choices.extend(&constants_of[cj]);
                }
                binding = binding.bind(v, *choices.choose(rng).unwrap());
                v
            };
            members.push(m.add_arc(ArcKind::Role(role), p, argument));
        }
    }
    let frame = m.add_frame("scenario", members, true);

    // Facts: random tuples over the declared roles, plus the bound tuple of
    // a predicate about half the time.
    for p in m.predicates.clone() {
        let roles: Vec<Role> = m.role_arcs(p.id).map(|(r, _)| r).collect();
        for _ in 0..rng.random_range(0..=3) {
            let tuple = roles
                .iter()
                .map(|r| (*r, all_instances.choose(rng).unwrap().clone()));
            i.add_fact(&p.name, tuple);
        }
        if rng.random_bool(0.5) {
            let tuple: Vec<(Role, String)> = m
                .role_arcs(p.id)
                .map(|(r, a)| {
                    let constant = binding.assignments.get(&a.target).copied().unwrap_or(a.target);
                    (r, i.constant_instances[&constant].clone())
                })
                .collect();
            i.add_fact(&p.name, tuple);
        }
    }
    EvaluationCase {
        model: m,
        frame,
        binding,
        interpretation: i,
    }
}
