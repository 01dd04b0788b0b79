use std::collections::BTreeMap;

use conceptforge_core::gen::{evaluation_case, storage_model, valid_model, ValidModelConfig};
use conceptforge_core::iso::explain_difference;
use conceptforge_core::pipeline::reverse_sql;
use conceptforge_core::{
    evaluate, from_uml, instantiate, parse_ddl, parse_model, render_sql, render_svg,
    render_uml_text, serialize_model, to_schema, to_uml, validate_model, ArcKind, Model, Role,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pipeline_config() -> ValidModelConfig {
    ValidModelConfig::default()
}

fn multi_typed_config() -> ValidModelConfig {
    ValidModelConfig {
        multi_typed: true,
        ..ValidModelConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn storage_models_round_trip(seed in any::<u64>()) {
        let m = storage_model(&mut rng(seed));
        let text = serialize_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn valid_models_round_trip_through_xml(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &multi_typed_config());
        prop_assert_eq!(validate_model(&m), vec![]);
        let back = parse_model(&serialize_model(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn validation_is_sorted_and_survives_storage(seed in any::<u64>()) {
        let m = storage_model(&mut rng(seed));
        let d = validate_model(&m);
        let mut sorted = d.clone();
        sorted.sort();
        prop_assert_eq!(&d, &sorted);
        let back = parse_model(&serialize_model(&m)).unwrap();
        prop_assert_eq!(validate_model(&back), d);
    }

    #[test]
    fn uml_round_trip_is_isomorphic(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &multi_typed_config());
        let u = to_uml(&m).unwrap();
        prop_assert!(u.check().is_ok());
        let back = from_uml(&u).unwrap();
        prop_assert_eq!(validate_model(&back), vec![]);
        prop_assert!(explain_difference(&m, &back).is_none(), "{:?}", explain_difference(&m, &back));
        // Second trip is a fixed point on the UML side.
        prop_assert_eq!(render_uml_text(&to_uml(&back).unwrap()), render_uml_text(&u));
    }

    #[test]
    fn uml_never_invents_roles(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &multi_typed_config());
        let u = to_uml(&m).unwrap();
        for a in &u.associations {
            prop_assert!(Role::ALL.iter().any(|r| r.long() == a.role));
        }
    }

    #[test]
    fn full_pipeline_is_isomorphic(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &pipeline_config());
        let sql = render_sql(&to_schema(&to_uml(&m).unwrap()).unwrap()).unwrap();
        let back = parse_model(&reverse_sql(&sql).unwrap()).unwrap();
        prop_assert!(explain_difference(&m, &back).is_none(), "{:?}\n{}", explain_difference(&m, &back), sql);
    }

    #[test]
    fn ddl_text_is_a_fixed_point(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &pipeline_config());
        let schema = to_schema(&to_uml(&m).unwrap()).unwrap();
        let sql = render_sql(&schema).unwrap();
        let parsed = parse_ddl(&sql).unwrap();
        prop_assert_eq!(&parsed, &schema);
        prop_assert_eq!(render_sql(&parsed).unwrap(), sql);
    }

    #[test]
    fn svg_draws_every_node_and_arc(seed in any::<u64>()) {
        let m = valid_model(&mut rng(seed), &multi_typed_config());
        let svg = render_svg(&m).unwrap();
        prop_assert_eq!(svg.matches("<line ").count(), m.arcs.len());
        let shapes = svg.matches("<rect ").count() + svg.matches("<ellipse ").count();
        prop_assert_eq!(shapes, m.node_count());
    }
}

/// Tuple of instance names a predicate asserts once `binding` is applied,
/// read straight off the arcs of the template model.
fn expected_tuple(
    m: &Model,
    predicate: conceptforge_core::ElementId,
    case: &conceptforge_core::gen::EvaluationCase,
) -> BTreeMap<Role, String> {
    let mut tuple = BTreeMap::new();
    for arc in &m.arcs {
        let ArcKind::Role(role) = arc.kind else { continue };
        if arc.source != predicate {
            continue;
        }
        let constant = case
            .binding
            .assignments
            .get(&arc.target)
            .copied()
            .unwrap_or(arc.target);
        tuple.insert(role, case.interpretation.constant_instances[&constant].clone());
    }
    tuple
}

#[test]
fn evaluation_agrees_with_brute_force() {
    let mut truths = 0;
    for seed in 0..1000u64 {
        let case = evaluation_case(&mut rng(seed));
        let m = &case.model;
        let ground = instantiate(m, case.frame, &case.binding).unwrap();
        let got = evaluate(&ground, case.frame, &case.interpretation).unwrap();

        let mut expected = true;
        for p in &m.predicates {
            let tuple = expected_tuple(m, p.id, &case);
            let found = case
                .interpretation
                .facts
                .iter()
                .filter(|(name, _)| **name == p.name)
                .flat_map(|(_, tuples)| tuples)
                .any(|t| *t == tuple);
            expected &= found;
        }
        assert_eq!(got, expected, "seed {seed}");
        truths += usize::from(got);
    }
    assert!(truths > 50 && truths < 950, "degenerate sample: {truths} true");
}
