//! Property tests for the syntactic core: grammar round trips, flip and
//! substitution laws, pattern-match stability, subsumption completeness,
//! measure monotonicity, and checker robustness under mutation.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cutrx::calculus::{ContextPattern, ContextRestriction};
use cutrx::catalog;
use cutrx::formula::{flip_set, Formula, Label, LabelledFormula, Sequent};
use cutrx::kernel::{check, Proof, Rule};
use cutrx::search::{random_proof, RandomProofParams};

fn lk_table() -> cutrx::formula::ConnectiveTable {
    catalog::builtin("LK").unwrap().table().clone()
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let var = prop_oneof![Just("p"), Just("q"), Just("r"), Just("x1")]
        .prop_map(|v| Formula::var(v.to_string()));
    var.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            Just(Formula::app("bot", vec![])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::app("and", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::app("or", vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::app("imp", vec![a, b])),
        ]
    })
}

fn arb_labelled() -> impl Strategy<Value = LabelledFormula> {
    (prop_oneof![Just(Label::L), Just(Label::R)], arb_formula())
        .prop_map(|(l, f)| LabelledFormula::new(l, f))
}

fn arb_pattern() -> impl Strategy<Value = ContextPattern> {
    (
        prop_oneof![Just(Label::L), Just(Label::R)],
        prop_oneof![
            Just(None),
            Just(Some("and".to_string())),
            Just(Some("imp".to_string())),
            Just(Some("bot".to_string())),
        ],
    )
        .prop_map(|(label, conn)| ContextPattern { label, conn })
}

fn arb_restriction() -> impl Strategy<Value = ContextRestriction> {
    prop_oneof![
        Just(ContextRestriction::Unrestricted),
        proptest::collection::vec(arb_pattern(), 1..4).prop_map(ContextRestriction::patterns),
    ]
}

/// The probe family: variables plus one generic formula per connective,
/// under both labels. Complete for the pattern grammar.
fn probe_family() -> Vec<LabelledFormula> {
    let mut out = Vec::new();
    let mut formulas = vec![Formula::var("z")];
    for (conn, arity) in [("and", 2), ("or", 2), ("imp", 2), ("bot", 0)] {
        formulas.push(Formula::app(
            conn,
            (0..arity).map(|_| Formula::var("z")).collect(),
        ));
    }
    for f in formulas {
        out.push(LabelledFormula::left(f.clone()));
        out.push(LabelledFormula::right(f));
    }
    out
}

proptest! {
    #[test]
    fn parse_format_round_trip(f in arb_formula()) {
        let table = lk_table();
        let text = f.to_string();
        let back = Formula::parse(&text, &table).unwrap();
        prop_assert_eq!(f, back);
    }

    #[test]
    fn size_positive_and_monotone(f in arb_formula()) {
        prop_assert!(f.size() >= 1);
        for sub in f.proper_subformulas() {
            prop_assert!(sub.size() < f.size());
            prop_assert!(sub.is_subformula_of(&f));
        }
    }

    #[test]
    fn flip_involution(lf in arb_labelled()) {
        prop_assert_eq!(lf.flip().flip(), lf.clone());
        let set = std::collections::BTreeSet::from([lf]);
        prop_assert_eq!(flip_set(&flip_set(&set)), set);
    }

    #[test]
    fn substitution_is_homomorphic(f in arb_formula(), g in arb_formula()) {
        // Substitution commutes with connective application.
        let wrapped = Formula::app("and", vec![f.clone(), Formula::var("q")]);
        let actual = wrapped.substitute("p", &g);
        let expected = Formula::app(
            "and",
            vec![f.substitute("p", &g), Formula::var("q").substitute("p", &g)],
        );
        prop_assert_eq!(actual, expected);
    }

    #[test]
    fn matches_stable_under_substitution(
        r in arb_restriction(),
        lf in arb_labelled(),
        g in arb_formula()
    ) {
        // If a labelled formula matches, every uniform substitution
        // instance still matches.
        if r.matches(&lf) {
            for var in ["p", "q"] {
                let inst = LabelledFormula::new(lf.label, lf.formula.substitute(var, &g));
                prop_assert!(r.matches(&inst));
            }
        }
    }

    #[test]
    fn subsumption_agrees_with_probe_family(a in arb_restriction(), b in arb_restriction()) {
        let pattern_wise = a.contained_in(&b);
        let probed = probe_family()
            .iter()
            .all(|x| !a.matches(x) || b.matches(x));
        prop_assert_eq!(pattern_wise, probed);
    }

    #[test]
    fn sequent_round_trip(items in proptest::collection::vec(arb_labelled(), 0..6)) {
        let table = lk_table();
        let s = Sequent::new(items);
        let back = Sequent::parse(&s.to_string(), &table).unwrap();
        prop_assert_eq!(&s, &back);
        // Occurrence order is stable, not just the multiset.
        prop_assert_eq!(s.items(), back.items());
    }
}

#[test]
fn dr_reduced_monotone() {
    let calc = catalog::builtin("LK").unwrap();
    for seed in 0..40u64 {
        let pf = cutrx::search::compose_random_cut(&calc, seed, 14, seed % 2 == 0);
        for d in 0..6 {
            for r in 1..20 {
                if pf.is_dr_reduced(d, r) {
                    assert!(pf.is_dr_reduced(d + 1, r), "seed {seed} d {d} r {r}");
                    assert!(pf.is_dr_reduced(d, r + 1), "seed {seed} d {d} r {r}");
                }
            }
        }
    }
}

/// Single-node mutation fuzz: any mutation of a valid proof is either still
/// accepted or rejected with at least one located diagnostic; the checker
/// never panics.
#[test]
fn checker_survives_mutations() {
    let calc = catalog::builtin("S5").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut proofs: Vec<Proof> = catalog::proof_names()
        .iter()
        .filter(|n| catalog::proof_calculus(n).unwrap() == "S5")
        .map(|n| catalog::example_proof(n).unwrap())
        .collect();
    for seed in 0..20 {
        proofs.push(random_proof(
            &calc,
            &RandomProofParams {
                target_nodes: 15,
                seed,
                allow_analytic_cuts: true,
                ..Default::default()
            },
        ));
    }
    let replacement = Formula::app("box", vec![Formula::var("q")]);
    for pf in &proofs {
        assert!(check(&calc, pf).is_empty());
        for _ in 0..30 {
            let mut mutant = pf.clone();
            mutate(&mut mutant, &mut rng, &replacement);
            let diags = check(&calc, &mutant);
            if mutant != *pf {
                // Either still valid or rejected with located errors; both
                // are fine, panics are not.
                for d in &diags {
                    assert!(mutant.at(&d.path).is_some(), "diagnostic path dangles");
                }
            } else {
                assert!(diags.is_empty());
            }
        }
    }
}

fn mutate(pf: &mut Proof, rng: &mut ChaCha8Rng, replacement: &Formula) {
    // Walk to a random node.
    let mut node: &mut Proof = pf;
    loop {
        let n = node.children.len();
        if n == 0 || rng.gen_bool(0.4) {
            break;
        }
        let i = rng.gen_range(0..n);
        node = &mut node.children[i];
    }
    match rng.gen_range(0..4) {
        // Replace one occurrence's formula.
        0 => {
            if !node.conclusion.is_empty() {
                let pos = rng.gen_range(0..node.conclusion.len());
                let mut items = node.conclusion.items().to_vec();
                items[pos] = LabelledFormula::new(items[pos].label, replacement.clone());
                node.conclusion = Sequent::new(items);
            }
        }
        // Drop an occurrence.
        1 => {
            if !node.conclusion.is_empty() {
                let pos = rng.gen_range(0..node.conclusion.len());
                node.conclusion = node.conclusion.without_positions(&[pos]);
            }
        }
        // Duplicate an occurrence.
        2 => {
            if !node.conclusion.is_empty() {
                let pos = rng.gen_range(0..node.conclusion.len());
                node.conclusion = node.conclusion.with(node.conclusion.at(pos).clone());
            }
        }
        // Bump a multicut multiplicity.
        _ => {
            if let Rule::Multicut { p, q, .. } = &mut node.rule {
                if rng.gen_bool(0.5) {
                    *p += 1;
                } else {
                    *q += 1;
                }
            }
        }
    }
}
