//! Proof trees, the independent checker, the ancestor relation, and cut
//! measures.
//!
//! Occurrence bookkeeping is canonical: where the calculus allows any
//! injective (weakening) or surjective (contraction) ancestry map, the
//! kernel synthesizes the map pairing equal labelled formulas in occurrence
//! order, and accepts explicit maps that satisfy the same invariants.
//! Equal labelled formulas are interchangeable throughout, so every
//! canonical choice below is as good as any other.

use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::{instantiate, Calculus};
use crate::formula::{is_valid_variable, Formula, LabelledFormula, ParseError, Sequent};
use crate::sexp::{self, Sexp};

pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Initial sequent `l:x, r:x` on a variable.
    Initial {
        var: String,
    },
    /// Open leaf: a hypothesis of a deduction.
    Open,
    Weakening {
        map: Option<Vec<(usize, usize)>>,
    },
    Contraction {
        map: Option<Vec<(usize, usize)>>,
    },
    /// Multicut with `p` right and `q` left occurrences of the cut formula.
    Multicut {
        formula: Formula,
        p: usize,
        q: usize,
    },
    Simple {
        rule_id: String,
        principal: Formula,
        template: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub children: Vec<Proof>,
}

impl Proof {
    pub fn initial(var: impl Into<String>) -> Proof {
        let var = var.into();
        let conclusion = Sequent::new(vec![
            LabelledFormula::left(Formula::Var(var.clone())),
            LabelledFormula::right(Formula::Var(var.clone())),
        ]);
        Proof {
            conclusion,
            rule: Rule::Initial { var },
            children: Vec::new(),
        }
    }

    pub fn open(conclusion: Sequent) -> Proof {
        Proof {
            conclusion,
            rule: Rule::Open,
            children: Vec::new(),
        }
    }

    /// Weaken `child` up to `target`; no node is added when the sequents
    /// are already equal as multisets.
    pub fn weaken_to(child: Proof, target: Sequent) -> Proof {
        if child.conclusion == target {
            return child;
        }
        debug_assert!(target.is_superset_of(&child.conclusion));
        Proof {
            conclusion: target,
            rule: Rule::Weakening { map: None },
            children: vec![child],
        }
    }

    /// Contract `child` down to `target`; skipped when already equal.
    pub fn contract_to(child: Proof, target: Sequent) -> Proof {
        if child.conclusion == target {
            return child;
        }
        debug_assert!(target.is_contraction_of(&child.conclusion));
        Proof {
            conclusion: target,
            rule: Rule::Contraction { map: None },
            children: vec![child],
        }
    }

    /// Cut `left` against `right` on `formula` with multiplicities `p`, `q`.
    /// The conclusion lays out the left context first, then the right.
    pub fn mcut(left: Proof, right: Proof, formula: Formula, p: usize, q: usize) -> Proof {
        let rf = LabelledFormula::right(formula.clone());
        let lf = LabelledFormula::left(formula.clone());
        let left_cut = occurrence_positions(&left.conclusion, &rf, p);
        let right_cut = occurrence_positions(&right.conclusion, &lf, q);
        let conclusion = left
            .conclusion
            .without_positions(&left_cut)
            .union(&right.conclusion.without_positions(&right_cut));
        Proof {
            conclusion,
            rule: Rule::Multicut { formula, p, q },
            children: vec![left, right],
        }
    }

    /// Apply a simple rule to the given children via `instantiate`.
    pub fn simple(
        calc: &Calculus,
        rule_id: &str,
        principal: &Formula,
        template: usize,
        context: &Sequent,
        children: Vec<Proof>,
    ) -> Result<Proof, String> {
        let rule = calc.rule(rule_id).map_err(|e| e.to_string())?;
        let inst = instantiate(rule, principal, template, context).map_err(|e| e.to_string())?;
        if children.len() != inst.premises.len() {
            return Err(format!(
                "rule `{rule_id}` needs {} premises, got {}",
                inst.premises.len(),
                children.len()
            ));
        }
        for (child, premise) in children.iter().zip(&inst.premises) {
            if &child.conclusion != premise {
                return Err(format!(
                    "rule `{rule_id}` premise mismatch: expected {premise}, got {}",
                    child.conclusion
                ));
            }
        }
        Ok(Proof {
            conclusion: inst.conclusion,
            rule: Rule::Simple {
                rule_id: rule_id.to_string(),
                principal: principal.clone(),
                template,
            },
            children,
        })
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Proof::node_count).sum::<usize>()
    }

    pub fn at(&self, path: &[usize]) -> Option<&Proof> {
        let mut node = self;
        for &i in path {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    pub fn replace_at(&self, path: &[usize], new: Proof) -> Proof {
        match path.split_first() {
            None => new,
            Some((&i, rest)) => {
                let mut out = self.clone();
                out.children[i] = out.children[i].replace_at(rest, new);
                out
            }
        }
    }

    pub fn is_multicut(&self) -> bool {
        matches!(self.rule, Rule::Multicut { .. })
    }

    pub fn has_open_leaves(&self) -> bool {
        matches!(self.rule, Rule::Open) || self.children.iter().any(Proof::has_open_leaves)
    }

    /// Open leaves in left-to-right order, as paths.
    pub fn open_leaf_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        collect_open(self, &mut Vec::new(), &mut out);
        return out;

        fn collect_open(node: &Proof, path: &mut Path, out: &mut Vec<Path>) {
            if matches!(node.rule, Rule::Open) {
                out.push(path.clone());
            }
            for (i, child) in node.children.iter().enumerate() {
                path.push(i);
                collect_open(child, path, out);
                path.pop();
            }
        }
    }

    pub fn cut_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        collect_cuts(self, &mut Vec::new(), &mut out);
        return out;

        fn collect_cuts(node: &Proof, path: &mut Path, out: &mut Vec<Path>) {
            if node.is_multicut() {
                out.push(path.clone());
            }
            for (i, child) in node.children.iter().enumerate() {
                path.push(i);
                collect_cuts(child, path, out);
                path.pop();
            }
        }
    }

    pub fn is_cut_free(&self) -> bool {
        !self.is_multicut() && self.children.iter().all(Proof::is_cut_free)
    }

    /// Measures of this node, which must be a multicut.
    pub fn cut_info(&self) -> Option<CutInfo> {
        match &self.rule {
            Rule::Multicut { formula, p, q } => {
                let rank = self.children.iter().map(Proof::node_count).sum();
                let analytic = self
                    .conclusion
                    .items()
                    .iter()
                    .any(|lf| formula.is_subformula_of(&lf.formula));
                Some(CutInfo {
                    formula: formula.clone(),
                    p: *p,
                    q: *q,
                    degree: formula.size(),
                    rank,
                    analytic,
                })
            }
            _ => None,
        }
    }

    pub fn is_locally_analytic(&self) -> bool {
        self.cut_info().map_or(true, |info| info.analytic)
            && self.children.iter().all(Proof::is_locally_analytic)
    }

    /// All three clauses of the (d, r)-reduced property.
    pub fn is_dr_reduced(&self, d: usize, r: usize) -> bool {
        return walk(self, d, r, false);

        fn walk(node: &Proof, d: usize, r: usize, below_nonanalytic: bool) -> bool {
            let mut below = below_nonanalytic;
            if let Some(info) = node.cut_info() {
                if !info.analytic {
                    if info.degree > d {
                        return false;
                    }
                    if info.degree == d && (info.rank >= r || below_nonanalytic) {
                        return false;
                    }
                    below = true;
                }
            }
            node.children.iter().all(|c| walk(c, d, r, below))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutInfo {
    pub formula: Formula,
    pub p: usize,
    pub q: usize,
    pub degree: usize,
    pub rank: usize,
    pub analytic: bool,
}

/// Measures of the multicut at `path`.
pub fn cut_measures(pf: &Proof, path: &[usize]) -> Result<CutInfo, String> {
    pf.at(path)
        .ok_or_else(|| format!("no node at {path:?}"))?
        .cut_info()
        .ok_or_else(|| format!("node at {path:?} is not a multicut"))
}

pub fn is_analytic(pf: &Proof, path: &[usize]) -> Result<bool, String> {
    Ok(cut_measures(pf, path)?.analytic)
}

/// The canonical choice of `count` occurrences equal to `lf`: the last ones
/// in position order, leaving earlier occurrences to the context.
pub fn occurrence_positions(seq: &Sequent, lf: &LabelledFormula, count: usize) -> Vec<usize> {
    let all = seq.positions_of(lf);
    assert!(
        all.len() >= count,
        "sequent {seq} has fewer than {count} occurrences of {lf}"
    );
    all[all.len() - count..].to_vec()
}

/// The canonical principal occurrence of a simple-rule node: the last
/// occurrence of the principal labelled formula.
pub fn principal_position(calc: &Calculus, node: &Proof) -> Result<usize, String> {
    match &node.rule {
        Rule::Simple {
            rule_id, principal, ..
        } => {
            let rule = calc.rule(rule_id).map_err(|e| e.to_string())?;
            let lf = rule.principal(principal.clone());
            let positions = node.conclusion.positions_of(&lf);
            positions
                .last()
                .copied()
                .ok_or_else(|| format!("principal {lf} missing from {}", node.conclusion))
        }
        _ => Err("not a simple rule node".into()),
    }
}

/// Pair each item of `sub` with the first unused equal item of `sup`,
/// skipping `sup` positions in `reserved`. `None` if some item has no match.
fn canonical_injection(
    sub: &[LabelledFormula],
    sup: &[LabelledFormula],
    reserved: &[usize],
    used: &mut Vec<bool>,
) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(sub.len());
    for lf in sub {
        let pos = (0..sup.len()).find(|&j| !used[j] && !reserved.contains(&j) && &sup[j] == lf)?;
        used[pos] = true;
        out.push(pos);
    }
    Some(out)
}

/// Per child, the immediate-ancestor map: premise position to conclusion
/// position, `None` for cut-formula occurrences.
pub fn ancestry(calc: &Calculus, node: &Proof) -> Result<Vec<Vec<Option<usize>>>, String> {
    match &node.rule {
        Rule::Initial { .. } | Rule::Open => Ok(Vec::new()),
        Rule::Weakening { map } => {
            let child = &node.children[0].conclusion;
            let entries = match map {
                Some(m) => m.clone(),
                None => {
                    let mut used = vec![false; node.conclusion.len()];
                    let images =
                        canonical_injection(child.items(), node.conclusion.items(), &[], &mut used)
                            .ok_or("weakening premise exceeds conclusion")?;
                    images.iter().enumerate().map(|(i, &j)| (i, j)).collect()
                }
            };
            let mut out = vec![None; child.len()];
            for (i, j) in entries {
                out[i] = Some(j);
            }
            if out.iter().any(Option::is_none) {
                return Err("weakening map not total".into());
            }
            Ok(vec![out])
        }
        Rule::Contraction { map } => {
            let child = &node.children[0].conclusion;
            let entries = match map {
                Some(m) => m.clone(),
                None => {
                    canonical_contraction(child, &node.conclusion).ok_or("not a contraction")?
                }
            };
            let mut out = vec![None; child.len()];
            for (i, j) in entries {
                out[i] = Some(j);
            }
            if out.iter().any(Option::is_none) {
                return Err("contraction map not total".into());
            }
            Ok(vec![out])
        }
        Rule::Multicut { formula, p, q } => {
            let left = &node.children[0].conclusion;
            let right = &node.children[1].conclusion;
            let rf = LabelledFormula::right(formula.clone());
            let lf = LabelledFormula::left(formula.clone());
            if left.count(&rf) < *p || right.count(&lf) < *q {
                return Err("premises lack the multicut occurrences".into());
            }
            let left_cut = occurrence_positions(left, &rf, *p);
            let right_cut = occurrence_positions(right, &lf, *q);
            let mut used = vec![false; node.conclusion.len()];
            let mut left_map = vec![None; left.len()];
            let left_ctx: Vec<usize> = (0..left.len()).filter(|i| !left_cut.contains(i)).collect();
            let items: Vec<LabelledFormula> =
                left_ctx.iter().map(|&i| left.at(i).clone()).collect();
            let images = canonical_injection(&items, node.conclusion.items(), &[], &mut used)
                .ok_or("multicut context missing from conclusion")?;
            for (k, &i) in left_ctx.iter().enumerate() {
                left_map[i] = Some(images[k]);
            }
            let mut right_map = vec![None; right.len()];
            let right_ctx: Vec<usize> = (0..right.len())
                .filter(|i| !right_cut.contains(i))
                .collect();
            let items: Vec<LabelledFormula> =
                right_ctx.iter().map(|&i| right.at(i).clone()).collect();
            let images = canonical_injection(&items, node.conclusion.items(), &[], &mut used)
                .ok_or("multicut context missing from conclusion")?;
            for (k, &i) in right_ctx.iter().enumerate() {
                right_map[i] = Some(images[k]);
            }
            Ok(vec![left_map, right_map])
        }
        Rule::Simple { .. } => {
            let principal_pos = principal_position(calc, node)?;
            let mut out = Vec::with_capacity(node.children.len());
            for child in &node.children {
                let mut used = vec![false; node.conclusion.len()];
                let mut cmap = vec![None; child.conclusion.len()];
                for (i, lf) in child.conclusion.items().iter().enumerate() {
                    let image = (0..node.conclusion.len())
                        .find(|&j| !used[j] && j != principal_pos && node.conclusion.at(j) == lf);
                    match image {
                        Some(j) => {
                            used[j] = true;
                            cmap[i] = Some(j);
                        }
                        // Auxiliary occurrence: ancestor of the principal.
                        None => cmap[i] = Some(principal_pos),
                    }
                }
                out.push(cmap);
            }
            Ok(out)
        }
    }
}

/// Canonical surjective map for a contraction: the k-th premise occurrence
/// of a formula goes to the k-th conclusion occurrence, overflow to the last.
fn canonical_contraction(premise: &Sequent, conclusion: &Sequent) -> Option<Vec<(usize, usize)>> {
    if !conclusion.is_contraction_of(premise) {
        return None;
    }
    let mut out = Vec::with_capacity(premise.len());
    for lf in premise.support() {
        let from = premise.positions_of(&lf);
        let to = conclusion.positions_of(&lf);
        for (k, &i) in from.iter().enumerate() {
            out.push((i, to[k.min(to.len() - 1)]));
        }
    }
    out.sort();
    Some(out)
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: Path,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn new(path: &[usize], code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            path: path.to_vec(),
            code,
            message: message.into(),
        }
    }
}

pub fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        ".".to_string()
    } else {
        path.iter().map(|i| format!(".{i}")).collect()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ERROR {} {} {}",
            format_path(&self.path),
            self.code,
            self.message
        )
    }
}

/// Check a proof: every node a valid instance and no open leaves.
pub fn check(calc: &Calculus, pf: &Proof) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    validate(calc, pf, &mut Vec::new(), false, &mut out);
    out
}

/// Check a deduction: open leaves are allowed.
pub fn check_deduction(calc: &Calculus, pf: &Proof) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    validate(calc, pf, &mut Vec::new(), true, &mut out);
    out
}

fn expect_children(node: &Proof, n: usize, path: &[usize], out: &mut Vec<Diagnostic>) -> bool {
    if node.children.len() != n {
        out.push(Diagnostic::new(
            path,
            "premises",
            format!("expected {n} premises, got {}", node.children.len()),
        ));
        false
    } else {
        true
    }
}

fn validate(
    calc: &Calculus,
    node: &Proof,
    path: &mut Path,
    allow_open: bool,
    out: &mut Vec<Diagnostic>,
) {
    match &node.rule {
        Rule::Initial { var } => {
            expect_children(node, 0, path, out);
            if !is_valid_variable(var) || calc.is_connective(var) {
                out.push(Diagnostic::new(
                    path,
                    "initial",
                    format!("`{var}` is not a variable"),
                ));
            } else {
                let expected = Sequent::new(vec![
                    LabelledFormula::left(Formula::Var(var.clone())),
                    LabelledFormula::right(Formula::Var(var.clone())),
                ]);
                if node.conclusion != expected {
                    out.push(Diagnostic::new(
                        path,
                        "initial",
                        format!(
                            "conclusion {} is not the initial sequent on `{var}`",
                            node.conclusion
                        ),
                    ));
                }
            }
        }
        Rule::Open => {
            expect_children(node, 0, path, out);
            if !allow_open {
                out.push(Diagnostic::new(path, "open-leaf", "open leaf in a proof"));
            }
        }
        Rule::Weakening { map } => {
            if expect_children(node, 1, path, out) {
                let premise = &node.children[0].conclusion;
                match map {
                    None => {
                        if !node.conclusion.is_superset_of(premise) {
                            out.push(Diagnostic::new(
                                path,
                                "weakening",
                                format!("{} does not include premise {premise}", node.conclusion),
                            ));
                        }
                    }
                    Some(m) => {
                        if let Err(msg) =
                            validate_map(m, premise, &node.conclusion, MapKind::Injective)
                        {
                            out.push(Diagnostic::new(path, "map", msg));
                        }
                    }
                }
            }
        }
        Rule::Contraction { map } => {
            if expect_children(node, 1, path, out) {
                let premise = &node.children[0].conclusion;
                match map {
                    None => {
                        if !node.conclusion.is_contraction_of(premise) {
                            out.push(Diagnostic::new(
                                path,
                                "contraction",
                                format!("{} is not a contraction of {premise}", node.conclusion),
                            ));
                        }
                    }
                    Some(m) => {
                        if let Err(msg) =
                            validate_map(m, premise, &node.conclusion, MapKind::Surjective)
                        {
                            out.push(Diagnostic::new(path, "map", msg));
                        }
                    }
                }
            }
        }
        Rule::Multicut { formula, p, q } => {
            if expect_children(node, 2, path, out) {
                if *p == 0 || *q == 0 {
                    out.push(Diagnostic::new(
                        path,
                        "multicut",
                        "multiplicities must be nonzero",
                    ));
                } else {
                    let left = &node.children[0].conclusion;
                    let right = &node.children[1].conclusion;
                    let rf = LabelledFormula::right(formula.clone());
                    let lf = LabelledFormula::left(formula.clone());
                    if left.count(&rf) < *p {
                        out.push(Diagnostic::new(
                            path,
                            "multicut",
                            format!("left premise lacks {p} occurrences of {rf}"),
                        ));
                    } else if right.count(&lf) < *q {
                        out.push(Diagnostic::new(
                            path,
                            "multicut",
                            format!("right premise lacks {q} occurrences of {lf}"),
                        ));
                    } else {
                        let expected = left
                            .minus(&Sequent::new(vec![rf; *p]))
                            .unwrap()
                            .union(&right.minus(&Sequent::new(vec![lf; *q])).unwrap());
                        if node.conclusion != expected {
                            out.push(Diagnostic::new(
                                path,
                                "multicut",
                                format!("conclusion {} should be {expected}", node.conclusion),
                            ));
                        }
                    }
                }
            }
        }
        Rule::Simple {
            rule_id,
            principal,
            template,
        } => match calc.rule(rule_id) {
            Err(e) => out.push(Diagnostic::new(path, "rule-unknown", e.to_string())),
            Ok(rule) => {
                let principal_lf = rule.principal(principal.clone());
                let positions = node.conclusion.positions_of(&principal_lf);
                match positions.last() {
                    None => out.push(Diagnostic::new(
                        path,
                        "principal",
                        format!(
                            "conclusion {} lacks principal {principal_lf}",
                            node.conclusion
                        ),
                    )),
                    Some(&pos) => {
                        let context = node.conclusion.without_positions(&[pos]);
                        match instantiate(rule, principal, *template, &context) {
                            Err(e) => out.push(Diagnostic::new(path, "context", e.to_string())),
                            Ok(inst) => {
                                if expect_children(node, inst.premises.len(), path, out) {
                                    for (i, (child, premise)) in
                                        node.children.iter().zip(&inst.premises).enumerate()
                                    {
                                        if &child.conclusion != premise {
                                            out.push(Diagnostic::new(
                                                path,
                                                "premise-mismatch",
                                                format!(
                                                    "premise {i} is {}, rule requires {premise}",
                                                    child.conclusion
                                                ),
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        },
    }
    for (i, child) in node.children.iter().enumerate() {
        path.push(i);
        validate(calc, child, path, allow_open, out);
        path.pop();
    }
}

enum MapKind {
    Injective,
    Surjective,
}

fn validate_map(
    map: &[(usize, usize)],
    premise: &Sequent,
    conclusion: &Sequent,
    kind: MapKind,
) -> Result<(), String> {
    let mut seen_premise = vec![false; premise.len()];
    let mut seen_conclusion = vec![false; conclusion.len()];
    for &(i, j) in map {
        if i >= premise.len() || j >= conclusion.len() {
            return Err(format!("map entry ({i} {j}) out of range"));
        }
        if seen_premise[i] {
            return Err(format!("premise occurrence {i} mapped twice"));
        }
        seen_premise[i] = true;
        if premise.at(i) != conclusion.at(j) {
            return Err(format!(
                "map entry ({i} {j}) does not preserve the labelled formula"
            ));
        }
        match kind {
            MapKind::Injective => {
                if seen_conclusion[j] {
                    return Err(format!(
                        "conclusion occurrence {j} hit twice by injective map"
                    ));
                }
                seen_conclusion[j] = true;
            }
            MapKind::Surjective => seen_conclusion[j] = true,
        }
    }
    if !seen_premise.iter().all(|&b| b) {
        return Err("map is not total on the premise".into());
    }
    if matches!(kind, MapKind::Surjective) && !seen_conclusion.iter().all(|&b| b) {
        return Err("contraction map is not surjective".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ancestor marking

/// Marked occurrence positions for a subtree, mirroring its shape.
#[derive(Debug, Clone)]
pub struct Marking {
    pub marked: Vec<usize>,
    pub children: Vec<Marking>,
}

impl Marking {
    pub fn is_marked(&self, pos: usize) -> bool {
        self.marked.contains(&pos)
    }
}

/// Propagate a set of marked occurrences in `sub`'s conclusion upward
/// through the immediate-ancestor relation.
pub fn mark_ancestors(calc: &Calculus, sub: &Proof, marked: Vec<usize>) -> Result<Marking, String> {
    let maps = ancestry(calc, sub)?;
    let mut children = Vec::with_capacity(sub.children.len());
    for (child, cmap) in sub.children.iter().zip(&maps) {
        let child_marked: Vec<usize> = (0..cmap.len())
            .filter(|&i| cmap[i].map_or(false, |j| marked.contains(&j)))
            .collect();
        children.push(mark_ancestors(calc, child, child_marked)?);
    }
    Ok(Marking { marked, children })
}

/// The ancestor occurrences of the cut formulas of the multicut at
/// `cut_path`, for every node above the cut. Keys are paths from the root
/// of `pf`; values are marked positions in that node's conclusion.
pub fn multicut_ancestors(
    calc: &Calculus,
    pf: &Proof,
    cut_path: &[usize],
) -> Result<BTreeMap<Path, Vec<usize>>, String> {
    let cut = pf
        .at(cut_path)
        .ok_or_else(|| format!("no node at {cut_path:?}"))?;
    let (formula, p, q) = match &cut.rule {
        Rule::Multicut { formula, p, q } => (formula.clone(), *p, *q),
        _ => return Err("not a multicut".into()),
    };
    let rf = LabelledFormula::right(formula.clone());
    let lf = LabelledFormula::left(formula);
    if cut.children[0].conclusion.count(&rf) < p || cut.children[1].conclusion.count(&lf) < q {
        return Err("premises lack the multicut occurrences".into());
    }
    let left_marked = occurrence_positions(&cut.children[0].conclusion, &rf, p);
    let right_marked = occurrence_positions(&cut.children[1].conclusion, &lf, q);
    let mut out = BTreeMap::new();
    for (idx, marked) in [(0usize, left_marked), (1usize, right_marked)] {
        let marking = mark_ancestors(calc, &cut.children[idx], marked)?;
        let mut base = cut_path.to_vec();
        base.push(idx);
        flatten(&marking, &mut base, &mut out);
    }
    return Ok(out);

    fn flatten(m: &Marking, path: &mut Path, out: &mut BTreeMap<Path, Vec<usize>>) {
        out.insert(path.clone(), m.marked.clone());
        for (i, child) in m.children.iter().enumerate() {
            path.push(i);
            flatten(child, path, out);
            path.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Mirroring

/// Flip every label in the proof; multicut premises swap. The result is a
/// proof in the mirrored calculus.
pub fn mirror_proof(pf: &Proof) -> Proof {
    let conclusion: Sequent = pf
        .conclusion
        .items()
        .iter()
        .map(LabelledFormula::flip)
        .collect();
    match &pf.rule {
        Rule::Multicut { formula, p, q } => {
            let mut children: Vec<Proof> = pf.children.iter().map(mirror_proof).collect();
            children.swap(0, 1);
            Proof {
                conclusion,
                rule: Rule::Multicut {
                    formula: formula.clone(),
                    p: *q,
                    q: *p,
                },
                children,
            }
        }
        rule => Proof {
            conclusion,
            rule: rule.clone(),
            children: pf.children.iter().map(mirror_proof).collect(),
        },
    }
}

// ---------------------------------------------------------------------------
// Text format

pub fn parse_proof(text: &str, calc: &Calculus) -> Result<Proof, ParseError> {
    let s = sexp::parse_single(text)?;
    proof_from_sexp(&s, calc)
}

pub fn proof_from_sexp(s: &Sexp, calc: &Calculus) -> Result<Proof, ParseError> {
    let items = s
        .tagged("node")
        .ok_or_else(|| ParseError::Malformed(format!("expected `(node ...)`, got `{s}`")))?;
    if items.len() < 2 {
        return Err(ParseError::Malformed(
            "node needs a sequent and a rule".into(),
        ));
    }
    let conclusion = Sequent::from_sexp(&items[0], calc.table())?;
    let children: Vec<Proof> = items[2..]
        .iter()
        .map(|c| proof_from_sexp(c, calc))
        .collect::<Result<_, _>>()?;
    let by = items[1]
        .list()
        .ok_or_else(|| ParseError::Malformed(format!("bad rule `{}`", items[1])))?;
    let head = by.first().and_then(Sexp::atom).unwrap_or("");
    let expect = |n: usize| -> Result<(), ParseError> {
        if children.len() != n {
            Err(ParseError::Malformed(format!(
                "`{head}` node must have {n} children"
            )))
        } else {
            Ok(())
        }
    };
    let rule = match head {
        "id" => {
            expect(0)?;
            let var = by
                .get(1)
                .and_then(Sexp::atom)
                .ok_or_else(|| ParseError::Malformed("`(id VAR)` needs a variable".into()))?;
            Rule::Initial {
                var: var.to_string(),
            }
        }
        "open" => {
            expect(0)?;
            Rule::Open
        }
        "weak" | "contr" => {
            expect(1)?;
            let map = match by.get(1) {
                None => None,
                Some(m) => Some(parse_map(m)?),
            };
            if let Some(m) = &map {
                let kind = if head == "weak" {
                    MapKind::Injective
                } else {
                    MapKind::Surjective
                };
                validate_map(m, &children[0].conclusion, &conclusion, kind)
                    .map_err(ParseError::Malformed)?;
            }
            if head == "weak" {
                Rule::Weakening { map }
            } else {
                Rule::Contraction { map }
            }
        }
        "mcut" => {
            expect(2)?;
            if by.len() != 4 {
                return Err(ParseError::Malformed(
                    "`(mcut FORMULA P Q)` expected".into(),
                ));
            }
            let formula = Formula::from_sexp(&by[1], calc.table())?;
            let p = parse_usize(&by[2])?;
            let q = parse_usize(&by[3])?;
            Rule::Multicut { formula, p, q }
        }
        "rule" => {
            if by.len() != 4 {
                return Err(ParseError::Malformed(
                    "`(rule ID PRINCIPAL TEMPLATEIDX)` expected".into(),
                ));
            }
            let rule_id = by[1]
                .atom()
                .ok_or_else(|| ParseError::Malformed("rule id must be an atom".into()))?;
            let principal = Formula::from_sexp(&by[2], calc.table())?;
            let template = parse_usize(&by[3])?;
            Rule::Simple {
                rule_id: rule_id.to_string(),
                principal,
                template,
            }
        }
        other => {
            return Err(ParseError::Malformed(format!(
                "unknown rule form `{other}`"
            )))
        }
    };
    Ok(Proof {
        conclusion,
        rule,
        children,
    })
}

fn parse_usize(s: &Sexp) -> Result<usize, ParseError> {
    s.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| ParseError::Malformed(format!("expected a number, got `{s}`")))
}

fn parse_map(s: &Sexp) -> Result<Vec<(usize, usize)>, ParseError> {
    let items = s
        .tagged("map")
        .ok_or_else(|| ParseError::Malformed(format!("expected `(map ...)`, got `{s}`")))?;
    let mut out = Vec::new();
    for pair in items {
        let parts = pair
            .list()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| ParseError::Malformed(format!("bad map entry `{pair}`")))?;
        out.push((parse_usize(&parts[0])?, parse_usize(&parts[1])?));
    }
    Ok(out)
}

pub fn serialize_proof(pf: &Proof) -> String {
    let mut out = String::new();
    write_node(pf, 0, &mut out);
    out.push('\n');
    return out;

    fn write_node(node: &Proof, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let by = match &node.rule {
            Rule::Initial { var } => format!("(id {var})"),
            Rule::Open => "(open)".to_string(),
            Rule::Weakening { map } => format_mapped("weak", map),
            Rule::Contraction { map } => format_mapped("contr", map),
            Rule::Multicut { formula, p, q } => format!("(mcut {formula} {p} {q})"),
            Rule::Simple {
                rule_id,
                principal,
                template,
            } => {
                format!("(rule {rule_id} {principal} {template})")
            }
        };
        out.push_str(&format!("{pad}(node {} {by}", node.conclusion));
        for child in &node.children {
            out.push('\n');
            write_node(child, indent + 1, out);
        }
        out.push(')');
    }

    fn format_mapped(head: &str, map: &Option<Vec<(usize, usize)>>) -> String {
        match map {
            None => format!("({head})"),
            Some(m) => {
                let entries: Vec<String> = m.iter().map(|(i, j)| format!("({i} {j})")).collect();
                format!("({head} (map {}))", entries.join(" "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn lk() -> Calculus {
        catalog::builtin("LK").unwrap()
    }

    fn s5() -> Calculus {
        catalog::builtin("S5").unwrap()
    }

    fn seq(text: &str, calc: &Calculus) -> Sequent {
        Sequent::parse(text, calc.table()).unwrap()
    }

    #[test]
    fn single_initial_checks() {
        let pf = Proof::initial("p");
        assert!(check(&lk(), &pf).is_empty());
        assert_eq!(pf.conclusion, seq("(seq (l p) (r p))", &lk()));
    }

    #[test]
    fn s5_example_proof_checks_and_is_analytic() {
        let calc = s5();
        let pf = catalog::example_proof("s5-analytic").unwrap();
        assert!(check(&calc, &pf).is_empty());
        let info = pf.cut_info().unwrap();
        assert!(info.analytic);
        assert_eq!(info.degree, 3);
    }

    #[test]
    fn mutated_context_is_located() {
        let calc = s5();
        let mut pf = catalog::example_proof("s5-analytic").unwrap();
        // Replace the boxed context formula of the outer 5 inference by a
        // non-boxed one, in both the node and its subtree.
        let table = calc.table().clone();
        let bad = Formula::parse("q", &table).unwrap();
        fn patch(node: &mut Proof, from: &Formula, to: &Formula) {
            let items: Vec<LabelledFormula> = node
                .conclusion
                .items()
                .iter()
                .map(|lf| {
                    if lf.formula == *from {
                        LabelledFormula::new(lf.label, to.clone())
                    } else {
                        lf.clone()
                    }
                })
                .collect();
            node.conclusion = Sequent::new(items);
            for c in &mut node.children {
                patch(c, from, to);
            }
        }
        let boxed = Formula::parse("(box (neg p))", &table).unwrap();
        patch(&mut pf.children[0], &boxed, &bad);
        let diags = check(&calc, &pf);
        assert!(!diags.is_empty());
        assert!(diags
            .iter()
            .any(|d| d.code == "context" || d.code == "multicut"));
    }

    #[test]
    fn measures_examples() {
        let calc = lk();
        // Cut whose premises are two initial sequents has rank 2.
        let cut = Proof::mcut(
            Proof::initial("p"),
            Proof::initial("p"),
            Formula::var("p"),
            1,
            1,
        );
        assert!(check(&calc, &cut).is_empty());
        let info = cut.cut_info().unwrap();
        assert_eq!(info.rank, 2);
        assert_eq!(info.degree, 1);
        assert!(info.degree >= 1 && info.rank >= 2);
        let boxneg = Formula::parse("(box (neg p))", s5().table()).unwrap();
        assert_eq!(boxneg.size(), 3);
    }

    #[test]
    fn dr_reduced_examples() {
        let calc = s5();
        let cut_free = catalog::example_proof("s5-analytic").unwrap().children[0].clone();
        assert!(cut_free.is_cut_free());
        for d in 0..4 {
            for r in 1..5 {
                assert!(cut_free.is_dr_reduced(d, r));
            }
        }
        // One non-analytic cut: degree 2, some rank. Built by composing two
        // checker-valid proofs; measured with cut_measures as oracle.
        let pf = catalog::example_proof("s5-nonanalytic").unwrap();
        assert!(check(&calc, &pf).is_empty());
        let info = cut_measures(&pf, &[]).unwrap();
        assert!(!info.analytic);
        assert_eq!(info.degree, 2);
        assert!(pf.is_dr_reduced(info.degree, info.rank + 1));
        assert!(!pf.is_dr_reduced(info.degree, info.rank));
        assert!(!pf.is_dr_reduced(info.degree - 1, 100));
        // Monotone in both parameters.
        assert!(pf.is_dr_reduced(info.degree + 1, info.rank));
        assert!(pf.is_dr_reduced(info.degree, info.rank + 5));
    }

    #[test]
    fn ancestors_reach_principal_t() {
        // In the s5-analytic proof the right-premise trace of the cut
        // formula reaches the box_t inference where it is principal; above
        // it the marked occurrence is the auxiliary, per the immediate
        // ancestor relation.
        let calc = s5();
        let pf = catalog::example_proof("s5-analytic").unwrap();
        let map = multicut_ancestors(&calc, &pf, &[]).unwrap();
        let t_node = pf.at(&[1]).unwrap();
        assert!(matches!(&t_node.rule, Rule::Simple { rule_id, .. } if rule_id == "box_t"));
        let marked = &map[&vec![1usize]];
        assert_eq!(marked, &vec![principal_position(&calc, t_node).unwrap()]);
        // Above box_t, the trace continues through the auxiliary neg p.
        let above = &map[&vec![1usize, 0]];
        let aux = Formula::parse("(neg p)", calc.table()).unwrap();
        assert_eq!(above.len(), 1);
        assert_eq!(
            pf.at(&[1, 0]).unwrap().conclusion.at(above[0]),
            &LabelledFormula::left(aux)
        );
    }

    #[test]
    fn ancestors_end_at_weakening() {
        let calc = s5();
        let pf = catalog::example_proof("s5-nonanalytic").unwrap();
        let map = multicut_ancestors(&calc, &pf, &[]).unwrap();
        // Left premise: the cut occurrence is context of box_5, then enters
        // the weakening and vanishes.
        assert_eq!(map[&vec![0usize]].len(), 1);
        assert_eq!(map[&vec![0usize, 0]].len(), 1);
        assert_eq!(map[&vec![0usize, 0, 0]].len(), 0);
    }

    #[test]
    fn biint_fig2_ancestor_reaches_imp_r() {
        let calc = catalog::builtin("BiInt").unwrap();
        let pf = catalog::example_proof("biint-fig2").unwrap();
        let map = multicut_ancestors(&calc, &pf, &[]).unwrap();
        assert_eq!(map[&vec![0usize]].len(), 1);
        // The occurrence is principal at the imp_r node under the weakening.
        let imp_r = pf.at(&[0, 0]).unwrap();
        assert!(matches!(&imp_r.rule, Rule::Simple { rule_id, .. } if rule_id == "imp_r"));
        assert_eq!(
            map[&vec![0usize, 0]],
            vec![principal_position(&calc, imp_r).unwrap()]
        );
        // Above it the two auxiliary occurrences carry the trace.
        assert_eq!(map[&vec![0usize, 0, 0]].len(), 2);
    }

    #[test]
    fn round_trip_catalog_proofs() {
        for name in catalog::proof_names() {
            let calc = catalog::builtin(catalog::proof_calculus(name).unwrap()).unwrap();
            let pf = catalog::example_proof(name).unwrap();
            let text = serialize_proof(&pf);
            let back = parse_proof(&text, &calc).unwrap();
            assert_eq!(pf, back, "{name}");
        }
    }

    #[test]
    fn explicit_maps() {
        let calc = lk();
        // Canonical contraction map accepted.
        let text = "(node (seq (l p) (r p)) (contr (map (0 0) (1 1) (2 1)))\
                    (node (seq (l p) (r p) (r p)) (weak)\
                    (node (seq (l p) (r p)) (id p))))";
        let pf = parse_proof(text, &calc).unwrap();
        assert!(check(&calc, &pf).is_empty());
        // Non-surjective contraction map rejected at parse time.
        let bad = "(node (seq (l p) (r p)) (contr (map (0 0) (1 0) (2 0)))\
                   (node (seq (l p) (r p) (r p)) (weak)\
                   (node (seq (l p) (r p)) (id p))))";
        assert!(parse_proof(bad, &calc).is_err());
        // Omitted map: canonical one accepted by check.
        let auto = "(node (seq (l p) (r p)) (contr)\
                    (node (seq (l p) (r p) (r p)) (weak)\
                    (node (seq (l p) (r p)) (id p))))";
        let pf = parse_proof(auto, &calc).unwrap();
        assert!(check(&calc, &pf).is_empty());
    }

    #[test]
    fn mirror_involution_on_proofs() {
        for name in catalog::proof_names() {
            let pf = catalog::example_proof(name).unwrap();
            assert_eq!(mirror_proof(&mirror_proof(&pf)), pf);
        }
    }

    #[test]
    fn mirrored_proofs_check_in_mirrored_calculus() {
        for name in catalog::proof_names() {
            let calc = catalog::builtin(catalog::proof_calculus(name).unwrap()).unwrap();
            let pf = catalog::example_proof(name).unwrap();
            let diags = check_deduction(&calc.mirror(), &mirror_proof(&pf));
            assert!(diags.is_empty(), "{name}: {diags:?}");
        }
    }
}
