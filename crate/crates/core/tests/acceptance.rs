//! One line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::TAU;
use std::time::Instant;

use knotforge::curves::{sample_polygon, straighten_subarc, PolygonalKnot, SampleMode, SubarcSpec};
use knotforge::diagram::{extract, KnotDiagram};
use knotforge::directional::{
    bridge_count_polygonal, milnor_average_check, random_directions, sphere_search, torus_superbridge_index,
    total_curvature, SearchMode, SearchOptions, SmoothProfile,
};
use knotforge::fixtures;
use knotforge::geom::Vec3;
use knotforge::invariants::{alexander_polynomial, determinant, KnotTable, LaurentPoly};
use knotforge::secants::{common_axis_roots, quadrisecants, PluckerLine};
use knotforge::workbench::{self, census, realize_diagram, BoundRuleInput, CrossingBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn torus_formula() -> Outcome {
    let cases = [((2, 3), 3), ((2, 5), 4), ((2, 7), 4), ((2, 9), 4), ((3, 4), 4), ((3, 5), 5)];
    let got: Vec<i64> = cases.iter().map(|&((p, q), _)| torus_superbridge_index(p, q).unwrap()).collect();
    check(cases.iter().zip(&got).all(|(c, g)| c.1 == *g), format!("{got:?}"))
}

fn fig8_superbridge() -> Outcome {
    let knot = fixtures::fig8_trig::<f64>();
    let profile = SmoothProfile::new(&knot, 4096).map_err(|e| e.to_string())?;
    let r = sphere_search(&profile, SearchMode::Max, 20000, 42, SearchOptions::default()).map_err(|e| e.to_string())?;
    let top = *r.histogram.keys().max().unwrap();
    check(r.best_value == 3 && top <= 3, format!("best {} histogram {:?}", r.best_value, r.histogram))
}

fn z_axis_quadrisecant() -> Outcome {
    let knot = fixtures::fig8_poly::<f64>();
    let roots: Vec<f64> = common_axis_roots(&knot).map_err(|e| e.to_string())?.iter().map(|r| r.to_f64()).collect();
    let want = [0.1, 0.25, 0.5, 0.84];
    let roots_ok = roots.len() == 4 && roots.iter().zip(want).all(|(r, w)| (r - w).abs() < 1e-9);
    let poly = sample_polygon(&knot, 2000, SampleMode::Uniform).map_err(|e| e.to_string())?;
    let report = quadrisecants(&poly);
    let z = PluckerLine::from_point_dir(Vec3::zero(), Vec3::from_f64(0.0, 0.0, 1.0)).unwrap();
    let best = report.secants.iter().map(|s| s.line.angle_to(&z)).fold(f64::INFINITY, f64::min);
    check(
        roots_ok && best < 1e-3,
        format!("roots {roots:?}, {} secants, closest to z-axis {best:.2e} rad", report.secants.len()),
    )
}

fn milnor_identity() -> Outcome {
    let sq = fixtures::square::<f64>();
    let k_sq = total_curvature(&sq).map_err(|e| e.to_string())?;
    let a = milnor_average_check(&sq, 50000, 42).map_err(|e| e.to_string())?;
    let b = milnor_average_check(&fixtures::trefoil_polygon::<f64>(), 50000, 42).map_err(|e| e.to_string())?;
    check(
        k_sq == TAU && a.discrepancy < 0.05 && b.discrepancy < 0.05,
        format!(
            "kappa(square) = {k_sq}, square {:.4} vs {:.4}, trefoil {:.4} vs {:.4}",
            a.avg_bv, a.curvature_over_2pi, b.avg_bv, b.curvature_over_2pi
        ),
    )
}

fn straightening_monotone() -> Outcome {
    let knots: Vec<PolygonalKnot<f64>> = vec![
        fixtures::trefoil_polygon(),
        fixtures::figure_eight_polygon(),
        sample_polygon(&fixtures::fig8_trig(), 60, SampleMode::Uniform).unwrap(),
        sample_polygon(&fixtures::torus(2, 5).unwrap(), 80, SampleMode::Uniform).unwrap(),
        sample_polygon(&fixtures::torus(3, 4).unwrap(), 90, SampleMode::Arclength).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut trials, mut violations) = (0, 0);
    while trials < 1000 {
        let k = &knots[rng.gen_range(0..knots.len())];
        let n = k.len();
        let start = rng.gen_range(0..n);
        let span = rng.gen_range(2..=(n - 3).min(n / 2));
        let Ok(s) = straighten_subarc(k, SubarcSpec { start, end: (start + span) % n }) else { continue };
        let v = random_directions::<f64>(1, rng.gen()).remove(0);
        let (Ok(before), Ok(after)) = (bridge_count_polygonal(k, &v), bridge_count_polygonal(&s.knot, &v)) else {
            continue;
        };
        trials += 1;
        violations += (after.value > before.value) as usize;
    }
    check(violations == 0, format!("{trials} trials, {violations} violations"))
}

fn diagram_oracle() -> Outcome {
    let cases = [
        ("trefoil", fixtures::trefoil_polygon::<f64>(), LaurentPoly::from_symmetric(vec![1, -1, 1]), 3),
        ("figure-eight", fixtures::figure_eight_polygon(), LaurentPoly::from_symmetric(vec![-1, 3, -1]), 5),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, knot, want, det) in cases {
        let mut good = 0;
        for (i, v) in random_directions::<f64>(8, 7).iter().enumerate() {
            let Ok((pd, _)) = extract(&knot, v, i as u64) else { continue };
            let d = &pd.diagram;
            if alexander_polynomial::<i64>(d).ok() == Some(want.clone()) && determinant(d).ok() == Some(det) {
                good += 1;
            }
        }
        ok &= good >= 5;
        notes.push(format!("{name} {good}/8 directions"));
    }
    check(ok, notes.join(", "))
}

fn r2_invariance() -> Outcome {
    let mut diagrams: Vec<KnotDiagram> = Vec::new();
    let polys = [
        fixtures::trefoil_polygon::<f64>(),
        fixtures::figure_eight_polygon(),
        sample_polygon(&fixtures::torus(2, 5).unwrap(), 120, SampleMode::Uniform).unwrap(),
        sample_polygon(&fixtures::fig8_trig(), 200, SampleMode::Uniform).unwrap(),
    ];
    for k in &polys {
        for (i, v) in random_directions::<f64>(10, 11).iter().enumerate() {
            if let Ok((pd, _)) = extract(k, v, i as u64) {
                diagrams.push(pd.diagram);
            }
        }
    }
    let budget = CrossingBudget::default();
    for (i, t) in workbench::enumerate_templates(&budget).iter().enumerate().filter(|(i, _)| i % 29 == 0) {
        let bits: Vec<bool> = (0..t.n_sign_bits()).map(|k| (i >> k) & 1 == 1).collect();
        if let Ok(r) = realize_diagram(t, &bits) {
            diagrams.push(r.projected.diagram);
        }
    }
    let (mut moves, mut broken, mut stuck) = (0, 0, 0);
    for d in &diagrams {
        let a = alexander_polynomial::<i64>(d).map_err(|e| e.to_string())?;
        for c in d.find_crescents().into_iter().filter(|c| !c.alternating) {
            let e = d.eliminate_crescent(&c).map_err(|e| e.to_string())?;
            moves += 1;
            broken += (alexander_polynomial::<i64>(&e).ok() != Some(a.clone())) as usize;
        }
        let r = d.reduce_crescents();
        stuck += (r.find_crescents().iter().any(|c| !c.alternating)
            || alexander_polynomial::<i64>(&r).ok() != Some(a.clone())) as usize;
    }
    check(
        moves > 0 && broken == 0 && stuck == 0,
        format!("{} diagrams, {moves} moves, {broken} changed the polynomial, {stuck} bad fixed points", diagrams.len()),
    )
}

fn table_reproduction() -> Outcome {
    let table = KnotTable::builtin();
    let inputs: Vec<BoundRuleInput> = table.entries().iter().map(BoundRuleInput::from).collect();
    let rows = workbench::table_bounds(&inputs).map_err(|e| e.to_string())?;
    let mismatched: Vec<&str> = rows
        .iter()
        .zip(table.entries())
        .filter(|(r, e)| (r.lo, r.hi) != (e.table_range.lo, e.table_range.hi) || r.exact.is_some() != (r.lo == r.hi))
        .map(|(r, _)| r.name.as_str())
        .collect();
    let exact = rows.iter().filter(|r| r.exact.is_some()).count();
    let new_ok = ["7_5", "7_6", "7_7"].iter().all(|n| rows.iter().any(|r| r.name == *n && r.exact == Some(4)));
    check(
        mismatched.is_empty() && exact == 18 && new_ok,
        format!("{} rows, {exact} exact, mismatches {mismatched:?}", rows.len()),
    )
}

fn census_properties() -> Outcome {
    let table = KnotTable::builtin();
    let budget = CrossingBudget::default();
    let a = census(&budget, &table);
    let b = census(&budget, &table);
    let names = a.identified_names();
    let outside: Vec<&String> = names
        .iter()
        .filter(|n| table.get(n).map_or(true, |e| !e.two_bridge || e.crossing_number > 9))
        .collect();
    let ok = a == b
        && names.iter().any(|n| n == "3_1")
        && names.iter().any(|n| n == "4_1")
        && outside.is_empty()
        && names.len() <= 47
        && a.max_pre_crossings <= 12
        && a.budget_exceeded == 0;
    check(
        ok,
        format!(
            "{} templates, {} realizations, {} types, {} unidentified, max pre {} / reduced {}, {} over budget, outside {outside:?}",
            a.templates,
            a.realizations,
            names.len(),
            a.unidentified,
            a.max_pre_crossings,
            a.max_reduced_crossings,
            a.budget_exceeded
        ),
    )
}

fn quadrisecant_existence() -> Outcome {
    let t = quadrisecants(&fixtures::trefoil_polygon::<f64>()).secants.len();
    let c = quadrisecants(&fixtures::regular_polygon::<f64>(20)).secants.len();
    check(t > 0 && c == 0, format!("trefoil {t}, convex 20-gon {c}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("torus formula", torus_formula),
        ("figure-eight superbridge", fig8_superbridge),
        ("z-axis quadrisecant", z_axis_quadrisecant),
        ("Milnor identity", milnor_identity),
        ("straightening monotonicity", straightening_monotone),
        ("diagram invariants", diagram_oracle),
        ("R2 invariance", r2_invariance),
        ("table reproduction", table_reproduction),
        ("census properties", census_properties),
        ("quadrisecant existence", quadrisecant_existence),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let r = f();
        let secs = t0.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d} ({secs:.1}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
