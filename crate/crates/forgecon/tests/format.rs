mod common;

use common::read_fixture;
use forgecon::core::instgen::{generate, GenSpec};
use forgecon::core::{baseline_no_consolidation, solve, SolveConfig};
use forgecon::format::{
    load_instance, load_solution, save_instance, save_solution, FormatError, SolutionRecord,
};
use proptest::prelude::*;

fn schema_path(err: FormatError) -> String {
    match err {
        FormatError::Schema { path, .. } => path,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_instances_round_trip(
        parts in 1usize..40,
        forgings in 1usize..15,
        options in 1usize..4,
        seed in any::<u64>(),
        fixed in 0.5f64..5.0,
    ) {
        let mut spec = GenSpec::new(parts, forgings, seed);
        spec.options_per_part = options.min(forgings);
        spec.multipliers.forging_fixed_cost = fixed;
        let inst = generate(&spec).unwrap();
        let text = save_instance(&inst).unwrap();
        prop_assert_eq!(&load_instance(&text).unwrap(), &inst);
        prop_assert_eq!(save_instance(&load_instance(&text).unwrap()).unwrap(), text);
    }
}

#[test]
fn hand_written_fixture_evaluates_to_7000() {
    let inst = load_instance(&read_fixture("one_part.toml")).unwrap();
    let base = baseline_no_consolidation(&inst);
    assert_eq!(base.costs.machining, 3200.0);
    assert_eq!(base.costs.forging, 3500.0);
    assert_eq!(base.costs.inventory, 300.0);
    assert_eq!(base.costs.total, 7000.0);
}

#[test]
fn missing_sections_are_named() {
    let text = read_fixture("one_part.toml");
    let start = text.find("[[forgings]]").unwrap();
    let end = text.find("[[parts]]").unwrap();
    let no_forgings = format!("{}{}", &text[..start], &text[end..]);
    assert_eq!(
        schema_path(load_instance(&no_forgings).unwrap_err()),
        "forgings"
    );

    let no_id = text.replacen("[[parts]]\nid = 1\n", "[[parts]]\n", 1);
    assert_eq!(
        schema_path(load_instance(&no_id).unwrap_err()),
        "parts[0].id"
    );
}

#[test]
fn unknown_fields_are_rejected() {
    let text = read_fixture("one_part.toml")
        .replace("unit_cost = 10\n", "unit_cost = 10\ncolour = \"red\"\n");
    let err = load_instance(&text).unwrap_err();
    let message = err.to_string();
    assert_eq!(schema_path(err), "forgings[0].colour");
    assert!(message.contains("colour"));
}

#[test]
fn wrong_types_and_values_are_located() {
    let text = read_fixture("one_part.toml");
    let bad_type = text.replace("order_quantity = 100", "order_quantity = \"many\"");
    assert_eq!(
        schema_path(load_instance(&bad_type).unwrap_err()),
        "parts[0].order_quantity"
    );

    let bad_ratio = text.replace("units_per_part = \"1\"", "units_per_part = \"1/0\"");
    assert_eq!(
        schema_path(load_instance(&bad_ratio).unwrap_err()),
        "parts[0].options[0].units_per_part"
    );

    let bad_tier = text.replacen(
        "{ threshold = \"250\", discount = 0.05 }",
        "{ threshold = \"250\", discount = 1.5 }",
        1,
    );
    match load_instance(&bad_tier).unwrap_err() {
        FormatError::Invalid { path, .. } => assert_eq!(path, "forgings[0].discounts"),
        other => panic!("{other:?}"),
    }

    let dangling = text.replace("forging = 1\n", "forging = 7\n");
    assert!(matches!(
        load_instance(&dangling),
        Err(FormatError::Invalid { .. })
    ));

    let version = text.replace("forgecon.instance.v1", "forgecon.instance.v9");
    assert!(matches!(
        load_instance(&version),
        Err(FormatError::Version { .. })
    ));

    assert!(matches!(
        load_instance("parts = [[["),
        Err(FormatError::Syntax(_))
    ));
}

#[test]
fn solutions_round_trip_with_and_without_statistics() {
    let inst = generate(&GenSpec::new(30, 12, 3)).unwrap();
    let result = solve(&inst, &SolveConfig::default()).unwrap();
    let record = SolutionRecord::from(&result);
    let text = save_solution(&record).unwrap();
    assert_eq!(load_solution(&text).unwrap(), record);

    let bare = SolutionRecord::bare(baseline_no_consolidation(&inst));
    let text = save_solution(&bare).unwrap();
    assert_eq!(load_solution(&text).unwrap(), bare);
}
