//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use cutrx::calculus::Calculus;
use cutrx::catalog;
use cutrx::classifier::{
    classify_calculus, generic_expansion, principal_reduction_witness, ClassCase, OverallClass,
    SubstitutionProperty,
};
use cutrx::engine::{
    classify_distribution, distribution_cut_tree, enumerate_distributions, Engine,
};
use cutrx::formula::{Formula, Label, LabelledFormula, Sequent};
use cutrx::kernel::{check, check_deduction, cut_measures, Proof};
use cutrx::search::{compose_random_cut, random_proof, RandomProofParams};

fn pass(n: usize, what: &str) {
    println!("criterion {n}: PASS - {what}");
}

// -------------------------------------------------------------------------
// 1. Classification golden suite

/// Expected per-connective verdicts, in the order: leftable, rightable,
/// weakly leftable, weakly rightable, inverse leftable, inverse rightable,
/// left-invertible, right-invertible.
struct Golden {
    conn: &'static str,
    props: [bool; 8],
    case: Option<u8>,
}

fn golden(conn: &'static str, props: [u8; 8], case: Option<u8>) -> Golden {
    Golden {
        conn,
        props: props.map(|b| b == 1),
        case,
    }
}

#[test]
fn criterion_1_classification_golden() {
    use OverallClass::*;
    let all = [1, 1, 1, 1, 1, 1, 1, 1];
    let inv_only_m = [0, 1, 0, 1, 0, 1, 1, 1]; // Maehara/G3-style case 1
    let inv_only_bi = [0, 0, 0, 0, 0, 0, 1, 1]; // BiInt-style case 1
    let box4 = [0, 0, 1, 0, 0, 1, 0, 0];
    let table: Vec<(&str, OverallClass, bool, bool, Vec<Golden>)> = vec![
        (
            "LK",
            Class1,
            true,
            true,
            vec![
                golden("bot", all, Some(1)),
                golden("and", all, Some(1)),
                golden("or", all, Some(1)),
                golden("imp", all, Some(1)),
            ],
        ),
        (
            "Maehara",
            Class1,
            false,
            true,
            vec![
                golden("bot", inv_only_m, Some(1)),
                golden("and", inv_only_m, Some(1)),
                golden("or", inv_only_m, Some(1)),
                golden("imp", [0, 1, 1, 1, 0, 1, 0, 1], Some(3)),
            ],
        ),
        (
            "BiInt",
            Class2,
            false,
            false,
            vec![
                golden("bot", inv_only_bi, Some(1)),
                golden("and", inv_only_bi, Some(1)),
                golden("or", inv_only_bi, Some(1)),
                golden("imp", [0, 0, 1, 0, 0, 1, 0, 0], Some(4)),
                golden("coimp", [0, 0, 0, 1, 1, 0, 0, 0], Some(5)),
            ],
        ),
        (
            "S5",
            Class2,
            true,
            true,
            vec![
                golden("bot", all, Some(1)),
                golden("and", all, Some(1)),
                golden("or", all, Some(1)),
                golden("imp", all, Some(1)),
                golden("neg", all, Some(1)),
                golden("box", box4, Some(4)),
            ],
        ),
        (
            "S5multi3",
            Class2,
            true,
            true,
            vec![
                golden("bot", all, Some(1)),
                golden("and", all, Some(1)),
                golden("or", all, Some(1)),
                golden("imp", all, Some(1)),
                golden("neg", all, Some(1)),
                golden("box1", box4, Some(4)),
                golden("box2", box4, Some(4)),
                golden("box3", box4, Some(4)),
            ],
        ),
        (
            "G4",
            Class2,
            false,
            true,
            vec![
                golden("bot", inv_only_m, Some(1)),
                golden("and", inv_only_m, Some(1)),
                golden("or", inv_only_m, Some(1)),
                golden("imp", [0, 1, 1, 1, 0, 1, 0, 1], Some(3)),
                golden("box", box4, Some(4)),
            ],
        ),
        (
            "BiIntS5",
            Class2,
            false,
            false,
            vec![
                golden("bot", inv_only_bi, Some(1)),
                golden("and", inv_only_bi, Some(1)),
                golden("or", inv_only_bi, Some(1)),
                golden("imp", [0, 0, 1, 0, 0, 1, 0, 0], Some(4)),
                golden("coimp", [0, 0, 0, 1, 1, 0, 0, 0], Some(5)),
                golden("box", box4, Some(4)),
            ],
        ),
        (
            "G3",
            Neither,
            false,
            true,
            vec![
                golden("bot", inv_only_m, Some(1)),
                golden("and", inv_only_m, Some(1)),
                golden("or", inv_only_m, Some(1)),
                golden("imp", [0, 1, 1, 1, 0, 1, 0, 1], Some(3)),
                golden("box", [0, 0, 0, 0, 0, 1, 0, 0], None),
            ],
        ),
    ];
    let props = [
        SubstitutionProperty::Leftable,
        SubstitutionProperty::Rightable,
        SubstitutionProperty::WeaklyLeftable,
        SubstitutionProperty::WeaklyRightable,
        SubstitutionProperty::InverseLeftable,
        SubstitutionProperty::InverseRightable,
    ];
    for (name, overall, left_vars, right_vars, conns) in &table {
        let calc = catalog::builtin(name).unwrap();
        let report = classify_calculus(&calc).unwrap();
        assert_eq!(report.overall, *overall, "{name}");
        assert_eq!(
            report.leftable_variables.holds(),
            *left_vars,
            "{name} leftable vars"
        );
        assert_eq!(
            report.rightable_variables.holds(),
            *right_vars,
            "{name} rightable vars"
        );
        assert_eq!(report.connectives.len(), conns.len(), "{name}");
        for g in conns {
            let c = report
                .connective(g.conn)
                .unwrap_or_else(|| panic!("{name}/{}", g.conn));
            for (k, prop) in props.iter().enumerate() {
                assert_eq!(
                    c.property(*prop).holds(),
                    g.props[k],
                    "{name}/{} {}",
                    g.conn,
                    prop.name()
                );
            }
            assert_eq!(
                c.left_invertible.holds(),
                g.props[6],
                "{name}/{} invL",
                g.conn
            );
            assert_eq!(
                c.right_invertible.holds(),
                g.props[7],
                "{name}/{} invR",
                g.conn
            );
            assert_eq!(
                c.class_case.map(ClassCase::number),
                g.case,
                "{name}/{} case",
                g.conn
            );
            assert!(c.axiom_expansion, "{name}/{}", g.conn);
            assert!(c.principal_reductions, "{name}/{}", g.conn);
        }
    }
    pass(
        1,
        "all eight catalog calculi classify to the expected verdicts",
    );
}

// -------------------------------------------------------------------------
// 2. Golden transformations

#[test]
fn criterion_2_golden_transformations() {
    for name in ["s5-nonanalytic", "biint-fig2"] {
        let calc = catalog::builtin(catalog::proof_calculus(name).unwrap()).unwrap();
        let pf = catalog::example_proof(name).unwrap();
        let engine = Engine::new(&calc);
        let start = Instant::now();
        let (out, steps) = engine.restrict(&pf).unwrap();
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 5.0, "{name} took {elapsed:?}");
        assert!(check(&calc, &out).is_empty(), "{name}");
        assert!(out.is_locally_analytic(), "{name}");
        assert_eq!(out.conclusion, pf.conclusion, "{name}");
        assert!(!steps.is_empty());
        if name == "biint-fig2" {
            // The transformed proof cuts on q, the critical context of the
            // right implication inference.
            let q = Formula::var("q");
            let has_q_cut = out
                .cut_paths()
                .iter()
                .any(|p| cut_measures(&out, p).unwrap().formula == q);
            assert!(has_q_cut, "no cut on the critical-context formula");
        }
    }
    pass(
        2,
        "catalog restrictions terminate quickly and match the expected shape",
    );
}

// -------------------------------------------------------------------------
// Corpus shared by criteria 3 and 4

fn corpus_item(calc: &Calculus, seed: u64) -> Proof {
    for body in [12, 8, 5, 3] {
        let pf = compose_random_cut(calc, seed, body, true);
        if pf.node_count() <= 40 {
            return pf;
        }
    }
    panic!("could not fit a corpus proof under 40 nodes for seed {seed}");
}

fn corpus() -> Vec<(Calculus, Proof)> {
    let mut out = Vec::new();
    for name in ["LK", "S5", "BiInt"] {
        let calc = catalog::builtin(name).unwrap();
        for seed in 0..100u64 {
            let pf = corpus_item(&calc, seed);
            assert!(pf.node_count() <= 40);
            assert!(check(&calc, &pf).is_empty(), "{name} seed {seed}");
            let info = pf.cut_info().unwrap();
            assert!(!info.analytic);
            for child in &pf.children {
                assert!(child.is_locally_analytic());
            }
            out.push((calc.clone(), pf));
        }
    }
    out
}

#[test]
fn criterion_3_single_step_reduction_suite() {
    let mut failures = 0;
    let items = corpus();
    assert_eq!(items.len(), 300);
    for (calc, pf) in &items {
        let engine = Engine::new(calc);
        let info = pf.cut_info().unwrap();
        match engine.reduce_once(pf) {
            Err(e) => {
                eprintln!("{}: {e}", calc.name);
                failures += 1;
            }
            Ok(outcome) => {
                if !check(calc, &outcome.proof).is_empty()
                    || outcome.proof.conclusion != pf.conclusion
                    || !outcome.proof.is_dr_reduced(info.degree, info.rank)
                {
                    failures += 1;
                }
            }
        }
    }
    assert_eq!(failures, 0);
    pass(3, "reduce_once is (d,r)-reducing on all 300 corpus proofs");
}

#[test]
fn criterion_4_main_loop_suite() {
    let start = Instant::now();
    let items = corpus();
    for (calc, pf) in &items {
        let engine = Engine::new(calc);
        let (out, steps) = engine.restrict(pf).unwrap();
        assert!(out.is_locally_analytic(), "{}", calc.name);
        assert_eq!(out.conclusion, pf.conclusion, "{}", calc.name);
        assert!(check(calc, &out).is_empty(), "{}", calc.name);
        // Strictly decreasing step measures: every step nested inside a
        // clearing recursion is lexicographically below its bound.
        for step in &steps {
            if let Some(bound) = step.bound {
                assert!(
                    (step.degree, step.rank) < bound,
                    "{}: step {} measure ({}, {}) not below {bound:?}",
                    calc.name,
                    step.index,
                    step.degree,
                    step.rank
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "main loop suite took {elapsed:?}");
    pass(
        4,
        "restrict terminates with decreasing measures on all 300 corpus proofs",
    );
}

// -------------------------------------------------------------------------
// 5. Cut elimination

#[test]
fn criterion_5_cut_elimination_suite() {
    for name in ["LK", "Maehara"] {
        let calc = catalog::builtin(name).unwrap();
        let engine = Engine::new(&calc);
        for seed in 0..100u64 {
            // Mix analytic and non-analytic final cuts; bodies also carry
            // analytic cuts of their own.
            let pf = compose_random_cut(&calc, seed, 14, seed % 2 == 0);
            let (out, _) = engine
                .eliminate(&pf)
                .unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
            assert!(out.is_cut_free(), "{name} seed {seed}");
            assert!(check(&calc, &out).is_empty(), "{name} seed {seed}");
            assert_eq!(out.conclusion, pf.conclusion, "{name} seed {seed}");
        }
    }
    pass(
        5,
        "eliminate yields checked cut-free proofs on 200 LK and Maehara inputs",
    );
}

// -------------------------------------------------------------------------
// 6. Inversion suite

#[test]
fn criterion_6_inversion_suite() {
    let mut done = 0;
    for name in ["LK", "BiInt"] {
        let calc = catalog::builtin(name).unwrap();
        let engine = Engine::new(&calc);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let invertible: Vec<(String, Label)> = calc
            .connectives
            .iter()
            .flat_map(|c| [(c.name.clone(), Label::L), (c.name.clone(), Label::R)])
            .filter(|(c, side)| {
                cutrx::classifier::check_invertibility(&calc, c, *side)
                    .unwrap()
                    .holds()
            })
            .collect();
        for seed in 0..50u64 {
            let (conn, side) = invertible[rng.gen_range(0..invertible.len())].clone();
            let arity = calc.table()[&conn];
            let formula = Formula::app(
                conn.clone(),
                (0..arity).map(|_| Formula::var("p")).collect(),
            );
            let target = LabelledFormula::new(side, formula.clone());
            // Build an input containing the target occurrence: either an
            // identity expansion, a weakened-in occurrence, or a proof
            // ending in a multicut on the target formula.
            let pf = match seed % 3 {
                0 => cutrx::classifier::axiom_expansion_proof(&calc, &formula).unwrap(),
                1 => {
                    let body = random_proof(
                        &calc,
                        &RandomProofParams {
                            target_nodes: 12,
                            seed,
                            ..Default::default()
                        },
                    );
                    Proof::weaken_to(body.clone(), body.conclusion.with(target.clone()))
                }
                _ => {
                    let exp = cutrx::classifier::axiom_expansion_proof(&calc, &formula).unwrap();
                    Proof::mcut(exp.clone(), exp, formula.clone(), 1, 1)
                }
            };
            assert!(check(&calc, &pf).is_empty());
            let nodes = pf.node_count();
            let cut_free = pf.is_cut_free();
            let outs = engine.invert_formula(&pf, &target).unwrap();
            for out in outs {
                assert!(check(&calc, &out).is_empty(), "{name} seed {seed}");
                assert!(out.node_count() <= nodes, "{name} seed {seed} grew");
                if cut_free {
                    assert!(out.is_cut_free(), "{name} seed {seed}");
                }
            }
            done += 1;
        }
    }
    assert_eq!(done, 100);
    pass(
        6,
        "invert is size-preserving and checked on 100 generated inputs",
    );
}

// -------------------------------------------------------------------------
// 7. Claim 1 brute force

#[test]
fn criterion_7_distribution_brute_force() {
    for n in 0usize..=3 {
        let f: Vec<Formula> = (0..n).map(|i| Formula::var(format!("f{i}"))).collect();
        let tree = distribution_cut_tree(&f);
        assert_eq!(tree.open_leaf_paths().len(), 1 << n);
        for path in tree.cut_paths() {
            assert!(f.contains(&cut_measures(&tree, &path).unwrap().formula));
        }
    }
    // 1000 random context families: every distribution is matching or
    // orthogonal.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(0..=3usize);
        let f: Vec<Formula> = (0..n).map(|i| Formula::var(format!("f{i}"))).collect();
        let contexts: Vec<Sequent> = (0..rng.gen_range(1..=3))
            .map(|_| {
                (0..rng.gen_range(0..=4))
                    .filter_map(|_| {
                        if f.is_empty() {
                            None
                        } else {
                            let formula = f[rng.gen_range(0..f.len())].clone();
                            let label = if rng.gen_bool(0.5) {
                                Label::L
                            } else {
                                Label::R
                            };
                            Some(LabelledFormula::new(label, formula))
                        }
                    })
                    .collect()
            })
            .collect();
        for d in enumerate_distributions(&f) {
            assert!(
                classify_distribution(&d, &contexts).is_some(),
                "uncovered distribution {d:?} for contexts {contexts:?}"
            );
        }
    }
    pass(
        7,
        "distribution trees have 2^|F| leaves and every labelling is covered",
    );
}

// -------------------------------------------------------------------------
// 8. Witnesses

#[test]
fn criterion_8_witnesses() {
    for name in catalog::calculus_names() {
        let calc = catalog::builtin(name).unwrap();
        for conn in &calc.connectives {
            let start = Instant::now();
            let expansion = generic_expansion(&calc, &conn.name)
                .unwrap_or_else(|| panic!("{name}/{}: no expansion", conn.name));
            assert!(check(&calc, &expansion).is_empty());
            assert!(expansion.is_cut_free());
            assert!(
                start.elapsed().as_secs_f64() < 1.0,
                "{name}/{} expansion",
                conn.name
            );
            let left = calc.left_rule(&conn.name).unwrap().templates.len();
            let right = calc.right_rule(&conn.name).unwrap().templates.len();
            for lt in 0..left {
                for rt in 0..right {
                    let start = Instant::now();
                    let w = principal_reduction_witness(&calc, &conn.name, lt, rt)
                        .unwrap()
                        .unwrap_or_else(|| panic!("{name}/{}: no witness", conn.name));
                    assert!(check_deduction(&calc, &w).is_empty());
                    assert!(w.conclusion.is_empty());
                    assert!(
                        start.elapsed().as_secs_f64() < 1.0,
                        "{name}/{} witness",
                        conn.name
                    );
                }
            }
        }
    }
    pass(
        8,
        "expansion and principal-pair witnesses exist for every catalog connective",
    );
}
