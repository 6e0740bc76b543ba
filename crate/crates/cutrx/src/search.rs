//! Bounded backward proof search and random proof generation: the
//! test-corpus factory and the backend for identity expansion.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{instantiate, Calculus};
use crate::formula::{Formula, Label, LabelledFormula, Sequent};
use crate::kernel::{Proof, Rule};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Bound on the number of rule applications along a branch.
    pub depth: usize,
    pub allow_analytic_cuts: bool,
    pub allow_arbitrary_cuts: bool,
    /// Extra cut-formula candidates; analytic candidates are drawn from the
    /// goal's subformulas when analytic cuts are enabled.
    pub cut_pool: Vec<Formula>,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions {
            depth: 8,
            allow_analytic_cuts: false,
            allow_arbitrary_cuts: false,
            cut_pool: Vec::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("premise lacks the required cut occurrences: {0}")]
    Multiplicity(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Identity expansion

/// Cut-free goal-directed search used for identity expansion: applies
/// logical rules to compound occurrences only, so every premise is smaller
/// in the multiset order on formula sizes and the search terminates without
/// a depth bound.
pub fn expand_sequent(calc: &Calculus, goal: &Sequent) -> Option<Proof> {
    let mut memo = HashMap::new();
    expand_rec(calc, goal, &mut memo)
}

fn expand_rec(
    calc: &Calculus,
    goal: &Sequent,
    memo: &mut HashMap<Vec<LabelledFormula>, Option<Proof>>,
) -> Option<Proof> {
    if let Some(pf) = close_initial(goal) {
        return Some(pf);
    }
    let key = goal.canonical();
    if let Some(cached) = memo.get(&key) {
        return cached.clone();
    }
    memo.insert(key.clone(), None);
    let mut first_seen = std::collections::BTreeSet::new();
    for pos in 0..goal.len() {
        let lf = goal.at(pos).clone();
        if !first_seen.insert(lf.clone()) {
            continue;
        }
        let Some(head) = lf.formula.head() else {
            continue;
        };
        let Ok(rule) = calc.rule_for(head, lf.label) else {
            continue;
        };
        let context = goal.without_positions(&[pos]);
        'template: for tidx in 0..rule.templates.len() {
            let Ok(inst) = instantiate(rule, &lf.formula, tidx, &context) else {
                continue;
            };
            let mut children = Vec::with_capacity(inst.premises.len());
            for premise in &inst.premises {
                match expand_rec(calc, premise, memo) {
                    Some(p) => children.push(Proof::weaken_to(p, premise.clone())),
                    None => continue 'template,
                }
            }
            let pf = Proof {
                conclusion: inst.conclusion,
                rule: Rule::Simple {
                    rule_id: rule.id.clone(),
                    principal: lf.formula.clone(),
                    template: tidx,
                },
                children,
            };
            memo.insert(key, Some(pf.clone()));
            return Some(pf);
        }
    }
    None
}

fn close_initial(goal: &Sequent) -> Option<Proof> {
    for lf in goal.items() {
        if let Formula::Var(x) = &lf.formula {
            if lf.label == Label::L
                && goal.count(&LabelledFormula::right(Formula::Var(x.clone()))) >= 1
            {
                return Some(Proof::weaken_to(Proof::initial(x.clone()), goal.clone()));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Bounded backward search

struct MemoEntry {
    proof: Option<Proof>,
    failed_at: usize,
}

/// Backward search within the depth bound. Goals are kept
/// contraction-normal (as support sets); the returned proof of the original
/// multiset goal re-inserts weakenings where needed.
pub fn prove(calc: &Calculus, goal: &Sequent, opts: &SearchOptions) -> Option<Proof> {
    let mut memo: HashMap<Vec<LabelledFormula>, MemoEntry> = HashMap::new();
    let set_goal: Sequent = goal.support().into_iter().collect();
    let sub = prove_set(calc, &set_goal, opts.depth, opts, &mut memo)?;
    Some(Proof::weaken_to(sub, goal.clone()))
}

fn prove_set(
    calc: &Calculus,
    goal: &Sequent,
    depth: usize,
    opts: &SearchOptions,
    memo: &mut HashMap<Vec<LabelledFormula>, MemoEntry>,
) -> Option<Proof> {
    if let Some(pf) = close_initial(goal) {
        return Some(pf);
    }
    if depth == 0 {
        return None;
    }
    let key = goal.canonical();
    if let Some(entry) = memo.get(&key) {
        if let Some(pf) = &entry.proof {
            return Some(pf.clone());
        }
        if entry.failed_at >= depth {
            return None;
        }
    }
    // Simple rules on every distinct compound occurrence.
    for pos in 0..goal.len() {
        let lf = goal.at(pos).clone();
        let Some(head) = lf.formula.head() else {
            continue;
        };
        let Ok(rule) = calc.rule_for(head, lf.label) else {
            continue;
        };
        let context = goal.without_positions(&[pos]);
        'template: for tidx in 0..rule.templates.len() {
            let Ok(inst) = instantiate(rule, &lf.formula, tidx, &context) else {
                continue;
            };
            let mut children = Vec::with_capacity(inst.premises.len());
            for premise in &inst.premises {
                let set_premise: Sequent = premise.support().into_iter().collect();
                match prove_set(calc, &set_premise, depth - 1, opts, memo) {
                    Some(p) => children.push(Proof::weaken_to(p, premise.clone())),
                    None => continue 'template,
                }
            }
            let pf = Proof {
                conclusion: inst.conclusion,
                rule: Rule::Simple {
                    rule_id: rule.id.clone(),
                    principal: lf.formula.clone(),
                    template: tidx,
                },
                children,
            };
            memo.entry(key)
                .or_insert(MemoEntry {
                    proof: None,
                    failed_at: 0,
                })
                .proof = Some(pf.clone());
            return Some(pf);
        }
    }
    // Cuts from the candidate pool.
    if opts.allow_analytic_cuts || opts.allow_arbitrary_cuts {
        let mut pool = opts.cut_pool.clone();
        if opts.allow_analytic_cuts {
            for lf in goal.items() {
                pool.extend(lf.formula.subformulas());
            }
        }
        pool.sort();
        pool.dedup();
        for c in pool {
            let left_goal: Sequent = goal
                .with(LabelledFormula::right(c.clone()))
                .support()
                .into_iter()
                .collect();
            let right_goal: Sequent = goal
                .with(LabelledFormula::left(c.clone()))
                .support()
                .into_iter()
                .collect();
            let Some(left) = prove_set(calc, &left_goal, depth - 1, opts, memo) else {
                continue;
            };
            let Some(right) = prove_set(calc, &right_goal, depth - 1, opts, memo) else {
                continue;
            };
            let left = Proof::weaken_to(left, goal.with(LabelledFormula::right(c.clone())));
            let right = Proof::weaken_to(right, goal.with(LabelledFormula::left(c.clone())));
            let cut = Proof::mcut(left, right, c, 1, 1);
            let pf = Proof::contract_to(cut, goal.clone());
            memo.entry(key)
                .or_insert(MemoEntry {
                    proof: None,
                    failed_at: 0,
                })
                .proof = Some(pf.clone());
            return Some(pf);
        }
    }
    let entry = memo.entry(key).or_insert(MemoEntry {
        proof: None,
        failed_at: 0,
    });
    entry.failed_at = entry.failed_at.max(depth);
    None
}

// ---------------------------------------------------------------------------
// Random generation

#[derive(Debug, Clone)]
pub struct RandomProofParams {
    pub target_nodes: usize,
    pub seed: u64,
    pub allow_analytic_cuts: bool,
    pub allow_arbitrary_cuts: bool,
}

impl Default for RandomProofParams {
    fn default() -> RandomProofParams {
        RandomProofParams {
            target_nodes: 20,
            seed: 0,
            allow_analytic_cuts: false,
            allow_arbitrary_cuts: false,
        }
    }
}

const VAR_POOL: [&str; 4] = ["p", "q", "r", "s"];

fn random_var(rng: &mut ChaCha8Rng) -> Formula {
    Formula::var(VAR_POOL[rng.gen_range(0..VAR_POOL.len())])
}

fn random_formula(calc: &Calculus, rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        return random_var(rng);
    }
    let conn = &calc.connectives[rng.gen_range(0..calc.connectives.len())];
    let args = (0..conn.arity)
        .map(|_| random_formula(calc, rng, depth - 1))
        .collect();
    Formula::app(conn.name.clone(), args)
}

/// Grow a valid proof bottom-up from an initial sequent by weakenings,
/// contractions, rule applications on freshly chosen principal formulas,
/// and (optionally) cuts. Deterministic per seed.
pub fn random_proof(calc: &Calculus, params: &RandomProofParams) -> Proof {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    random_proof_with(calc, &mut rng, params.target_nodes, params)
}

fn random_proof_with(
    calc: &Calculus,
    rng: &mut ChaCha8Rng,
    target: usize,
    params: &RandomProofParams,
) -> Proof {
    let mut pf = Proof::initial(random_var(rng).to_string());
    while pf.node_count() < target {
        match rng.gen_range(0..10) {
            // Weaken a random labelled formula in.
            0..=2 => {
                let label = if rng.gen_bool(0.5) {
                    Label::L
                } else {
                    Label::R
                };
                let lf = LabelledFormula::new(label, random_formula(calc, rng, 2));
                pf = Proof::weaken_to(pf.clone(), pf.conclusion.with(lf));
            }
            // Contract away one duplicate occurrence.
            3 => {
                let dups: Vec<usize> = (0..pf.conclusion.len())
                    .filter(|&i| pf.conclusion.count(pf.conclusion.at(i)) >= 2)
                    .collect();
                if let Some(&pos) = dups.first() {
                    let target_seq = pf.conclusion.without_positions(&[pos]);
                    pf = Proof::contract_to(pf, target_seq);
                }
            }
            // Apply a simple rule with the whole endsequent as context.
            4..=7 => {
                let rule = &calc.rules[rng.gen_range(0..calc.rules.len())];
                let context = pf.conclusion.clone();
                if context.items().iter().all(|lf| rule.context.matches(lf)) {
                    let arity = calc.table()[&rule.connective];
                    let principal = Formula::app(
                        rule.connective.clone(),
                        (0..arity).map(|_| random_formula(calc, rng, 1)).collect(),
                    );
                    let tidx = rng.gen_range(0..rule.templates.len());
                    if let Ok(inst) = instantiate(rule, &principal, tidx, &context) {
                        let children: Vec<Proof> = inst
                            .premises
                            .iter()
                            .map(|premise| Proof::weaken_to(pf.clone(), premise.clone()))
                            .collect();
                        pf = Proof {
                            conclusion: inst.conclusion,
                            rule: Rule::Simple {
                                rule_id: rule.id.clone(),
                                principal,
                                template: tidx,
                            },
                            children,
                        };
                    }
                }
            }
            // Cut against a fresh random subproof.
            _ => {
                if !(params.allow_analytic_cuts || params.allow_arbitrary_cuts) {
                    continue;
                }
                let c = if params.allow_arbitrary_cuts && rng.gen_bool(0.3) {
                    random_formula(calc, rng, 2)
                } else {
                    // Analytic: a subformula of the current endsequent.
                    let subs: Vec<Formula> = pf
                        .conclusion
                        .items()
                        .iter()
                        .flat_map(|lf| lf.formula.subformulas())
                        .collect();
                    if subs.is_empty() {
                        continue;
                    }
                    subs[rng.gen_range(0..subs.len())].clone()
                };
                let budget = (target / 4).max(2);
                let other = random_proof_with(calc, rng, budget, params);
                let left = Proof::weaken_to(
                    pf.clone(),
                    pf.conclusion.with(LabelledFormula::right(c.clone())),
                );
                let right = Proof::weaken_to(
                    other.clone(),
                    other.conclusion.with(LabelledFormula::left(c.clone())),
                );
                pf = Proof::mcut(left, right, c, 1, 1);
            }
        }
    }
    pf
}

/// Join two proofs with a multicut on `c` with multiplicities `p`, `q`.
pub fn compose_cut(
    left: Proof,
    right: Proof,
    c: Formula,
    p: usize,
    q: usize,
) -> Result<Proof, SearchError> {
    let rf = LabelledFormula::right(c.clone());
    let lf = LabelledFormula::left(c.clone());
    if left.conclusion.count(&rf) < p || p == 0 {
        return Err(SearchError::Multiplicity(format!(
            "left endsequent {} lacks {p} occurrences of {rf}",
            left.conclusion
        )));
    }
    if right.conclusion.count(&lf) < q || q == 0 {
        return Err(SearchError::Multiplicity(format!(
            "right endsequent {} lacks {q} occurrences of {lf}",
            right.conclusion
        )));
    }
    Ok(Proof::mcut(left, right, c, p, q))
}

/// Build a locally analytic proof whose final inference is one multicut.
/// With `force_nonanalytic`, the cut formula mentions a fresh variable that
/// occurs nowhere else, so the final cut cannot be analytic.
pub fn compose_random_cut(
    calc: &Calculus,
    seed: u64,
    body_nodes: usize,
    force_nonanalytic: bool,
) -> Proof {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RandomProofParams {
        target_nodes: body_nodes / 2,
        seed,
        allow_analytic_cuts: true,
        allow_arbitrary_cuts: false,
    };
    let left_body = random_proof_with(calc, &mut rng, params.target_nodes.max(2), &params);
    let right_body = random_proof_with(calc, &mut rng, params.target_nodes.max(2), &params);
    let c = if force_nonanalytic {
        // The variable pool never contains `w`, so any formula built from it
        // is fresh for both bodies.
        let fresh = Formula::var("w");
        if rng.gen_bool(0.2) {
            fresh
        } else {
            let conns: Vec<_> = calc.connectives.iter().filter(|c| c.arity >= 1).collect();
            if conns.is_empty() {
                fresh
            } else {
                let conn = conns[rng.gen_range(0..conns.len())];
                let mut args = vec![fresh];
                for _ in 1..conn.arity {
                    args.push(random_var(&mut rng));
                }
                Formula::app(conn.name.clone(), args)
            }
        }
    } else {
        random_formula(calc, &mut rng, 2)
    };
    let p = rng.gen_range(1..=2);
    let q = rng.gen_range(1..=2);
    let left = attach_cut_occurrences(calc, &mut rng, left_body, &c, Label::R, p);
    let right = attach_cut_occurrences(calc, &mut rng, right_body, &c, Label::L, q);
    Proof::mcut(left, right, c, p, q)
}

/// Extend `body` so its endsequent carries `count` occurrences of the cut
/// formula on `side`. When possible (and the coin says so) one occurrence
/// is introduced by its logical rule so the later reductions see principal
/// critical inferences, preferably not at the root; the rest are weakened
/// in.
fn attach_cut_occurrences(
    calc: &Calculus,
    rng: &mut ChaCha8Rng,
    body: Proof,
    c: &Formula,
    side: Label,
    count: usize,
) -> Proof {
    let lf = LabelledFormula::new(side, c.clone());
    let mut pf = body;
    let mut remaining = count;
    if remaining > 0 && rng.gen_bool(0.7) {
        if let Some(wrapped) = principal_wrap(calc, rng, &pf, c, side) {
            pf = wrapped;
            remaining -= 1;
            // Sink the fresh critical inference below some weakenings, so
            // the reductions have a bottom part to work through.
            for _ in 0..rng.gen_range(0..=2) {
                let label = if rng.gen_bool(0.5) {
                    Label::L
                } else {
                    Label::R
                };
                let extra = LabelledFormula::new(label, random_var(rng));
                pf = Proof::weaken_to(pf.clone(), pf.conclusion.with(extra));
            }
        }
    }
    for _ in 0..remaining {
        pf = Proof::weaken_to(pf.clone(), pf.conclusion.with(lf.clone()));
    }
    pf
}

/// Apply the rule introducing `side:c`. When the current endsequent fails
/// the rule's context restriction, retry on a freshly expanded identity
/// pair that satisfies it, joined back to the body with an analytic cut.
fn principal_wrap(
    calc: &Calculus,
    rng: &mut ChaCha8Rng,
    body: &Proof,
    c: &Formula,
    side: Label,
) -> Option<Proof> {
    let head = c.head()?;
    let rule = calc.rule_for(head, side).ok()?;
    let tidx = rng.gen_range(0..rule.templates.len());
    let context = body.conclusion.clone();
    if context.items().iter().all(|x| rule.context.matches(x)) {
        let inst = instantiate(rule, c, tidx, &context).ok()?;
        let children: Vec<Proof> = inst
            .premises
            .iter()
            .map(|premise| Proof::weaken_to(body.clone(), premise.clone()))
            .collect();
        return Some(Proof {
            conclusion: inst.conclusion,
            rule: Rule::Simple {
                rule_id: rule.id.clone(),
                principal: c.clone(),
                template: tidx,
            },
            children,
        });
    }
    // Build a fresh admissible base: an identity pair that satisfies the
    // restriction if one exists, otherwise a provable admissible sequent
    // found by bounded search. Either way, pad with admissible context.
    let mut base = match admissible_pair_formula(calc, &rule.context) {
        Some(g) => expand_sequent(
            calc,
            &Sequent::new(vec![
                LabelledFormula::left(g.clone()),
                LabelledFormula::right(g.clone()),
            ]),
        )?,
        None => provable_admissible_base(calc, rng, &rule.context)?,
    };
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(extra) = random_admissible(calc, rng, &rule.context) {
            base = Proof::weaken_to(base.clone(), base.conclusion.with(extra));
        }
    }
    let inst = instantiate(rule, c, tidx, &base.conclusion).ok()?;
    let children: Vec<Proof> = inst
        .premises
        .iter()
        .map(|premise| Proof::weaken_to(base.clone(), premise.clone()))
        .collect();
    let wrapped = Proof {
        conclusion: inst.conclusion,
        rule: Rule::Simple {
            rule_id: rule.id.clone(),
            principal: c.clone(),
            template: tidx,
        },
        children,
    };
    // Keep the body's endsequent around by weakening it in above the wrap.
    Some(Proof::weaken_to(
        wrapped.clone(),
        wrapped.conclusion.union(&body.conclusion),
    ))
}

/// A formula whose left and right identity occurrences both satisfy the
/// restriction: tried over a variable and one generic formula per
/// connective.
fn admissible_pair_formula(
    calc: &Calculus,
    restriction: &crate::calculus::ContextRestriction,
) -> Option<Formula> {
    let mut candidates = vec![Formula::var("v")];
    for conn in &calc.connectives {
        candidates.push(Formula::app(
            conn.name.clone(),
            (0..conn.arity).map(|_| Formula::var("v")).collect(),
        ));
    }
    candidates.into_iter().find(|g| {
        restriction.matches(&LabelledFormula::left(g.clone()))
            && restriction.matches(&LabelledFormula::right(g.clone()))
    })
}

/// A proof of a small provable sequent that fits inside the restriction,
/// found by bounded cut-free search over a handful of random goals.
fn provable_admissible_base(
    calc: &Calculus,
    rng: &mut ChaCha8Rng,
    restriction: &crate::calculus::ContextRestriction,
) -> Option<Proof> {
    let opts = SearchOptions {
        depth: 4,
        ..Default::default()
    };
    for _ in 0..6 {
        let mut items = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            items.push(random_admissible(calc, rng, restriction)?);
        }
        // Bias towards refutable constants, which make short left-only
        // goals provable.
        for conn in &calc.connectives {
            if conn.arity == 0 {
                let lf = LabelledFormula::left(Formula::app(conn.name.clone(), Vec::new()));
                if restriction.matches(&lf) && rng.gen_bool(0.7) {
                    items.push(lf);
                }
            }
        }
        let goal = Sequent::new(items);
        if let Some(pf) = prove(calc, &goal, &opts) {
            return Some(pf);
        }
    }
    None
}

/// One random labelled formula inside the denoted set of the restriction.
fn random_admissible(
    calc: &Calculus,
    rng: &mut ChaCha8Rng,
    restriction: &crate::calculus::ContextRestriction,
) -> Option<LabelledFormula> {
    use crate::calculus::ContextRestriction;
    match restriction {
        ContextRestriction::Unrestricted => {
            let label = if rng.gen_bool(0.5) {
                Label::L
            } else {
                Label::R
            };
            Some(LabelledFormula::new(label, random_formula(calc, rng, 1)))
        }
        ContextRestriction::Patterns(pats) => {
            if pats.is_empty() {
                return None;
            }
            let pat = &pats[rng.gen_range(0..pats.len())];
            let formula = match &pat.conn {
                None => random_formula(calc, rng, 1),
                Some(conn) => {
                    let arity = calc.table()[conn];
                    Formula::app(conn.clone(), (0..arity).map(|_| random_var(rng)).collect())
                }
            };
            Some(LabelledFormula::new(pat.label, formula))
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus files

fn fnv64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Emit one proof file per seed plus a manifest listing seed, calculus,
/// node count and a digest of the serialized proof.
pub fn write_corpus(
    calc: &Calculus,
    dir: &Path,
    count: usize,
    base_seed: u64,
    params: &RandomProofParams,
) -> Result<(), SearchError> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = std::fs::File::create(dir.join("manifest.txt"))?;
    for i in 0..count {
        let seed = base_seed + i as u64;
        let pf = random_proof(
            calc,
            &RandomProofParams {
                seed,
                ..params.clone()
            },
        );
        let text = crate::kernel::serialize_proof(&pf);
        std::fs::write(dir.join(format!("proof_{seed}.proof")), &text)?;
        writeln!(
            manifest,
            "{seed} {} {} {:016x}",
            calc.name,
            pf.node_count(),
            fnv64(&text)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::kernel::check;

    /// Truth-table oracle for the LK language over a single variable `p`.
    fn eval(f: &Formula, p: bool) -> bool {
        match f {
            Formula::Var(_) => p,
            Formula::App(c, args) => match c.as_str() {
                "bot" => false,
                "and" => eval(&args[0], p) && eval(&args[1], p),
                "or" => eval(&args[0], p) || eval(&args[1], p),
                "imp" => !eval(&args[0], p) || eval(&args[1], p),
                other => panic!("unexpected connective {other}"),
            },
        }
    }

    fn sequent_valid(s: &Sequent) -> bool {
        [false, true].iter().all(|&p| {
            s.items().iter().any(|lf| match lf.label {
                Label::L => !eval(&lf.formula, p),
                Label::R => eval(&lf.formula, p),
            })
        })
    }

    #[test]
    fn proves_excluded_middle_variant() {
        let lk = catalog::builtin("LK").unwrap();
        let goal = Sequent::parse("(seq (r (or p (imp p bot))))", lk.table()).unwrap();
        assert!(sequent_valid(&goal));
        let pf = prove(
            &lk,
            &goal,
            &SearchOptions {
                depth: 6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(check(&lk, &pf).is_empty());
        assert!(pf.is_cut_free());
        assert_eq!(pf.conclusion, goal);
    }

    #[test]
    fn empty_sequent_unprovable_at_depth() {
        for name in ["LK", "S5", "BiInt"] {
            let calc = catalog::builtin(name).unwrap();
            let opts = SearchOptions {
                depth: 8,
                ..Default::default()
            };
            assert!(prove(&calc, &Sequent::empty(), &opts).is_none(), "{name}");
        }
    }

    #[test]
    fn trivial_goal_initial() {
        let lk = catalog::builtin("LK").unwrap();
        let goal = Sequent::parse("(seq (l p) (r p))", lk.table()).unwrap();
        let pf = prove(
            &lk,
            &goal,
            &SearchOptions {
                depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(pf.node_count(), 1);
    }

    #[test]
    fn depth_monotone() {
        let lk = catalog::builtin("LK").unwrap();
        let goal = Sequent::parse("(seq (r (or p (imp p bot))))", lk.table()).unwrap();
        let at = |d: usize| {
            prove(
                &lk,
                &goal,
                &SearchOptions {
                    depth: d,
                    ..Default::default()
                },
            )
            .is_some()
        };
        let first = (1..10).find(|&d| at(d)).unwrap();
        for d in first..12 {
            assert!(at(d), "depth {d}");
        }
    }

    #[test]
    fn random_proofs_are_valid_and_deterministic() {
        for name in ["LK", "S5", "BiInt"] {
            let calc = catalog::builtin(name).unwrap();
            for seed in 0..25 {
                let params = RandomProofParams {
                    target_nodes: 20,
                    seed,
                    allow_analytic_cuts: true,
                    allow_arbitrary_cuts: false,
                };
                let pf = random_proof(&calc, &params);
                assert!(check(&calc, &pf).is_empty(), "{name} seed {seed}");
                assert!(pf.is_locally_analytic(), "{name} seed {seed}");
                let again = random_proof(&calc, &params);
                assert_eq!(pf, again);
            }
        }
    }

    #[test]
    fn cut_moves_use_the_pool() {
        // A calculus whose constant has zero-premise rules on both sides is
        // inconsistent, but only through a cut: the empty sequent has no
        // rule moves at all, so the pool cut is the one way to close it.
        let zz = crate::calculus::Calculus::parse(
            "(calculus ZZ (connectives (zz 0)) (consistency unknown) \
             (rule zz_l left zz (context any) (templates (premises))) \
             (rule zz_r right zz (context any) (templates (premises))))",
        )
        .unwrap();
        let pool = vec![Formula::app("zz", vec![])];
        let without = SearchOptions { depth: 8, ..Default::default() };
        assert!(prove(&zz, &Sequent::empty(), &without).is_none());
        let with = SearchOptions {
            depth: 2,
            allow_arbitrary_cuts: true,
            cut_pool: pool,
            ..Default::default()
        };
        let pf = prove(&zz, &Sequent::empty(), &with).unwrap();
        assert!(check(&zz, &pf).is_empty());
        assert!(pf.conclusion.is_empty());
        assert_eq!(pf.cut_paths().len(), 1);
    }

    #[test]
    fn compose_cut_examples() {
        let lk = catalog::builtin("LK").unwrap();
        let f = Formula::parse("(and p q)", lk.table()).unwrap();
        let expansion = expand_sequent(
            &lk,
            &Sequent::new(vec![
                LabelledFormula::left(f.clone()),
                LabelledFormula::right(f.clone()),
            ]),
        )
        .unwrap();
        let pf = compose_cut(expansion.clone(), expansion.clone(), f.clone(), 1, 1).unwrap();
        assert!(check(&lk, &pf).is_empty());
        assert_eq!(pf.cut_paths().len(), 1);
        // Multiplicity precondition.
        assert!(compose_cut(expansion.clone(), expansion, Formula::var("z"), 1, 1).is_err());
    }

    #[test]
    fn corpus_files_and_manifest() {
        let calc = catalog::builtin("LK").unwrap();
        let dir = std::env::temp_dir().join(format!("cutrx-corpus-{}", std::process::id()));
        let params = RandomProofParams {
            target_nodes: 12,
            allow_analytic_cuts: true,
            ..Default::default()
        };
        write_corpus(&calc, &dir, 3, 500, &params).unwrap();
        let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
        assert_eq!(manifest.lines().count(), 3);
        for line in manifest.lines() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(fields.len(), 4);
            assert_eq!(fields[1], "LK");
            let seed: u64 = fields[0].parse().unwrap();
            let text = std::fs::read_to_string(dir.join(format!("proof_{seed}.proof"))).unwrap();
            let pf = crate::kernel::parse_proof(&text, &calc).unwrap();
            assert!(check(&calc, &pf).is_empty());
            assert_eq!(pf.node_count().to_string(), fields[2]);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn composed_nonanalytic_cuts() {
        for name in ["LK", "S5", "BiInt"] {
            let calc = catalog::builtin(name).unwrap();
            for seed in 0..20 {
                let pf = compose_random_cut(&calc, seed, 16, true);
                assert!(check(&calc, &pf).is_empty(), "{name} seed {seed}");
                let info = pf.cut_info().unwrap();
                assert!(!info.analytic, "{name} seed {seed}");
                for child in &pf.children {
                    assert!(child.is_locally_analytic());
                }
            }
        }
    }
}
