use knotforge::invariants::KnotTable;
use knotforge::workbench::*;

fn shape_a(twists: u32) -> TemplateSpec {
    TemplateSpec::new(Shape::A, vec![twists], 1, Orientation { rotation: 1, reflect: false }, [0, 1, 2, 3]).unwrap()
}

#[test]
fn three_half_twists_give_the_trefoil() {
    let table = KnotTable::builtin();
    let r = realize_diagram(&shape_a(3), &[false, false, false]).unwrap();
    let c = reduce_and_classify(r.diagram(), &table, &CrossingBudget::default()).unwrap();
    assert_eq!(c.crossing_count, 3);
    assert_eq!(c.candidates, ["3_1"]);
}

#[test]
fn two_half_twists_give_a_link() {
    assert_eq!(realize_diagram(&shape_a(2), &[true, false]).unwrap_err(), WorkbenchError::NotAKnot { components: 2 });
}

#[test]
fn one_half_twist_gives_the_unknot() {
    let table = KnotTable::builtin();
    let r = realize_diagram(&shape_a(1), &[true]).unwrap();
    let c = reduce_and_classify(r.diagram(), &table, &CrossingBudget::default()).unwrap();
    assert!(c.crossing_count <= 1);
    assert!(c.candidates.is_empty());
}

#[test]
fn shape_b_with_pattern_17_reaches_the_figure_eight() {
    let table = KnotTable::builtin();
    let budget = CrossingBudget::default();
    let found = enumerate_templates_for(&budget, &[17]).into_iter().filter(|t| t.shape == Shape::B).any(|t| {
        let n = t.n_sign_bits();
        (0u32..1 << n).any(|mask| {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            realize_diagram(&t, &bits)
                .ok()
                .and_then(|r| reduce_and_classify(r.diagram(), &table, &budget).ok())
                .is_some_and(|c| c.candidates.iter().any(|n| n == "4_1"))
        })
    });
    assert!(found);
}

#[test]
fn untwisted_trivial_pattern_count() {
    let budget = CrossingBudget { per_pair_max: 0, ..Default::default() };
    let t = enumerate_templates_for(&budget, &[1]);
    // two shapes, two distinct placements of the pattern, one height class
    assert_eq!(t.len(), 4);
    assert!(t.iter().all(|t| t.twist_counts.iter().all(|&k| k == 0)));
}

#[test]
fn enumeration_is_deterministic_and_duplicate_free() {
    let b = CrossingBudget::default();
    let a = enumerate_templates(&b);
    assert_eq!(a, enumerate_templates(&b));
    let mut s = a.clone();
    s.sort();
    s.dedup();
    assert_eq!(s.len(), a.len());
}

#[test]
fn switching_crossings_matches_fresh_realization() {
    let budget = CrossingBudget::default();
    let mut checked = 0;
    for (i, t) in enumerate_templates(&budget).into_iter().enumerate().filter(|(i, _)| i % 37 == 0) {
        let n = t.n_sign_bits();
        let mask = (i as u32).wrapping_mul(2654435761) >> 7;
        let bits: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
        let base_spec = TemplateSpec { height_order: [0, 1, 2, 3], ..t.clone() };
        let Ok(base) = realize_diagram(&base_spec, &vec![false; n]) else { continue };
        let fresh = realize_diagram(&t, &bits).unwrap();
        let switch: Vec<usize> = base
            .origins
            .iter()
            .enumerate()
            .filter(|(_, o)| match **o {
                CrossingOrigin::Pattern(a, b) => t.height_order[a as usize] < t.height_order[b as usize],
                CrossingOrigin::Twist(m) => bits[m],
            })
            .map(|(c, _)| c)
            .collect();
        assert_eq!(base.diagram().switch_crossings(&switch).canonical(), fresh.diagram().canonical(), "{t:?}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn census_is_deterministic_on_a_subset() {
    let table = KnotTable::builtin();
    let b = CrossingBudget::default();
    let a = census_for(&b, &table, &[1, 3, 17]);
    assert_eq!(a, census_for(&b, &table, &[1, 3, 17]));
    assert!(a.types.contains_key("3_1"));
}

#[test]
fn bound_rules_reproduce_the_table() {
    let table = KnotTable::builtin();
    let inputs: Vec<BoundRuleInput> = table.entries().iter().map(BoundRuleInput::from).collect();
    let rows = table_bounds(&inputs).unwrap();
    for (row, e) in rows.iter().zip(table.entries()) {
        assert_eq!((row.lo, row.hi), (e.table_range.lo, e.table_range.hi), "{}", e.name);
        assert_eq!(row.exact.is_some(), e.table_range.lo == e.table_range.hi, "{}", e.name);
    }
}
