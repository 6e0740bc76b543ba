//! Syntactic classification of calculi: substitution properties,
//! invertibility and variable-property checks, principal-pair witnesses,
//! identity expansion, and the class 1 / class 2 verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::calculus::{Calculus, CalculusError, Consistency, ContextRestriction};
use crate::formula::{Formula, Label, LabelledFormula, Sequent};
use crate::kernel::{Proof, Rule};
use crate::search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubstitutionProperty {
    Leftable,
    Rightable,
    WeaklyLeftable,
    WeaklyRightable,
    InverseLeftable,
    InverseRightable,
}

pub const ALL_PROPERTIES: [SubstitutionProperty; 6] = [
    SubstitutionProperty::Leftable,
    SubstitutionProperty::Rightable,
    SubstitutionProperty::WeaklyLeftable,
    SubstitutionProperty::WeaklyRightable,
    SubstitutionProperty::InverseLeftable,
    SubstitutionProperty::InverseRightable,
];

impl SubstitutionProperty {
    pub fn name(self) -> &'static str {
        match self {
            SubstitutionProperty::Leftable => "leftable",
            SubstitutionProperty::Rightable => "rightable",
            SubstitutionProperty::WeaklyLeftable => "weakly-leftable",
            SubstitutionProperty::WeaklyRightable => "weakly-rightable",
            SubstitutionProperty::InverseLeftable => "inverse-leftable",
            SubstitutionProperty::InverseRightable => "inverse-rightable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// Fails, witnessed by the named rule.
    Fails(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Decide one substitution property of `conn` by quantifying over all
/// simple rules of the calculus.
pub fn check_substitution_property(
    calc: &Calculus,
    conn: &str,
    prop: SubstitutionProperty,
) -> Result<Verdict, CalculusError> {
    use SubstitutionProperty::*;
    if !calc.is_connective(conn) {
        return Err(CalculusError::UnknownConnective(conn.to_string()));
    }
    let (label, required): (Label, Option<ContextRestriction>) = match prop {
        Leftable => (Label::L, None),
        Rightable => (Label::R, None),
        WeaklyLeftable => (Label::L, Some(calc.right_rule(conn)?.context.clone())),
        WeaklyRightable => (Label::R, Some(calc.left_rule(conn)?.context.clone())),
        InverseLeftable => (Label::L, Some(calc.left_rule(conn)?.context.flipped())),
        InverseRightable => (Label::R, Some(calc.right_rule(conn)?.context.flipped())),
    };
    for rule in &calc.rules {
        if !rule.context.admits_principal(label, conn) {
            continue;
        }
        let ok = match &required {
            None => rule.context.is_unrestricted(),
            Some(set) => set.contained_in(&rule.context),
        };
        if !ok {
            return Ok(Verdict::Fails(rule.id.clone()));
        }
    }
    Ok(Verdict::Holds)
}

/// Sufficient conditions for invertibility of `conn` on `side`: the side's
/// schema has a unique template, and wherever the connective may occur in a
/// rule's context, that context also admits every auxiliary slot.
pub fn check_invertibility(
    calc: &Calculus,
    conn: &str,
    side: Label,
) -> Result<Verdict, CalculusError> {
    let schema = calc.rule_for(conn, side)?;
    if schema.templates.len() != 1 {
        return Ok(Verdict::Fails(schema.id.clone()));
    }
    let slot_patterns = slot_restriction(&schema.templates[0]);
    for rule in &calc.rules {
        if !rule.context.admits_principal(side, conn) {
            continue;
        }
        if !slot_patterns.contained_in(&rule.context) {
            return Ok(Verdict::Fails(rule.id.clone()));
        }
    }
    Ok(Verdict::Holds)
}

/// The pattern set an auxiliary template denotes: arguments are arbitrary,
/// so each slot with label λ contributes the pattern (λ, any).
fn slot_restriction(template: &crate::calculus::PremiseTemplate) -> ContextRestriction {
    let pats = template
        .premises
        .iter()
        .flatten()
        .map(|slot| crate::calculus::ContextPattern {
            label: slot.label,
            conn: None,
        })
        .collect();
    ContextRestriction::patterns(pats)
}

/// Leftable (resp. rightable) variables: any rule whose context admits a
/// variable on the given side must be unrestricted.
pub fn check_variable_property(calc: &Calculus, side: Label) -> Verdict {
    for rule in &calc.rules {
        if rule.context.admits_variable(side) && !rule.context.is_unrestricted() {
            return Verdict::Fails(rule.id.clone());
        }
    }
    Verdict::Holds
}

// ---------------------------------------------------------------------------
// Principal case reductions

/// Slot atom for the i-th argument (1-based) of the principal connective.
fn slot_atom(arg: usize) -> Formula {
    Formula::var(format!("a{arg}"))
}

fn template_hypotheses(template: &crate::calculus::PremiseTemplate) -> Vec<Sequent> {
    template
        .premises
        .iter()
        .map(|slots| {
            slots
                .iter()
                .map(|s| LabelledFormula::new(s.label, slot_atom(s.arg)))
                .collect()
        })
        .collect()
}

/// A derivation of the empty sequent from the auxiliary premise multisets
/// of a left/right template pair, using only weakening, contraction and
/// multicut. Hypotheses appear as open leaves, in the order: left-rule
/// premises, then right-rule premises, over slot atoms `a1..an`.
///
/// Found by saturating the hypothesis supports under the resolution move
/// "cut all copies on one atom, then contract to support", which decides
/// structural-rules-only derivability of the empty sequent.
pub fn principal_reduction_witness(
    calc: &Calculus,
    conn: &str,
    left_template: usize,
    right_template: usize,
) -> Result<Option<Proof>, CalculusError> {
    let left = calc.left_rule(conn)?;
    let right = calc.right_rule(conn)?;
    let lt = left
        .templates
        .get(left_template)
        .ok_or_else(|| CalculusError::UnknownRule(format!("{}[{left_template}]", left.id)))?;
    let rt = right
        .templates
        .get(right_template)
        .ok_or_else(|| CalculusError::UnknownRule(format!("{}[{right_template}]", right.id)))?;
    let mut hypotheses = template_hypotheses(lt);
    hypotheses.extend(template_hypotheses(rt));
    Ok(derive_empty(&hypotheses))
}

/// Saturation state: each derived clause remembers how it was obtained.
#[derive(Clone)]
enum Derived {
    Hypothesis(usize),
    Resolved {
        atom: Formula,
        left: usize,
        right: usize,
    },
}

fn derive_empty(hypotheses: &[Sequent]) -> Option<Proof> {
    // Clauses are support sets.
    let mut clauses: Vec<(Vec<LabelledFormula>, Derived)> = Vec::new();
    let mut seen: std::collections::BTreeSet<Vec<LabelledFormula>> =
        std::collections::BTreeSet::new();
    for (i, h) in hypotheses.iter().enumerate() {
        let mut supp: Vec<LabelledFormula> = h.support();
        supp.sort();
        if seen.insert(supp.clone()) {
            clauses.push((supp, Derived::Hypothesis(i)));
        }
    }
    let empty_index = loop {
        if let Some(i) = clauses.iter().position(|(c, _)| c.is_empty()) {
            break i;
        }
        let mut added = false;
        'outer: for i in 0..clauses.len() {
            for j in 0..clauses.len() {
                for lf in clauses[i].0.clone() {
                    if lf.label != Label::R {
                        continue;
                    }
                    let partner = lf.flip();
                    if !clauses[j].0.contains(&partner) {
                        continue;
                    }
                    let mut resolvent: Vec<LabelledFormula> = clauses[i]
                        .0
                        .iter()
                        .filter(|x| **x != lf)
                        .chain(clauses[j].0.iter().filter(|x| **x != partner))
                        .cloned()
                        .collect();
                    resolvent.sort();
                    resolvent.dedup();
                    if seen.insert(resolvent.clone()) {
                        clauses.push((
                            resolvent,
                            Derived::Resolved {
                                atom: lf.formula.clone(),
                                left: i,
                                right: j,
                            },
                        ));
                        added = true;
                        break 'outer;
                    }
                }
            }
        }
        if !added {
            return None;
        }
    };
    Some(reconstruct(hypotheses, &clauses, empty_index))
}

/// Turn the resolution derivation back into a structural deduction: each
/// hypothesis leaf is contracted to its support, each resolution step is a
/// maximal multicut followed by a contraction to the support.
fn reconstruct(
    hypotheses: &[Sequent],
    clauses: &[(Vec<LabelledFormula>, Derived)],
    index: usize,
) -> Proof {
    let (clause, how) = &clauses[index];
    let target: Sequent = clause.iter().cloned().collect();
    match how {
        Derived::Hypothesis(i) => Proof::contract_to(Proof::open(hypotheses[*i].clone()), target),
        Derived::Resolved { atom, left, right } => {
            let lp = reconstruct(hypotheses, clauses, *left);
            let rp = reconstruct(hypotheses, clauses, *right);
            let p = lp.conclusion.count(&LabelledFormula::right(atom.clone()));
            let q = rp.conclusion.count(&LabelledFormula::left(atom.clone()));
            let cut = Proof::mcut(lp, rp, atom.clone(), p, q);
            Proof::contract_to(cut, target)
        }
    }
}

// ---------------------------------------------------------------------------
// Axiom expansion

/// Cut-free proof of `l:f, r:f`, or `None` when the bounded search fails.
///
/// Variables close immediately; a compound formula reuses the generic
/// per-connective expansion (over fresh argument variables) with the actual
/// arguments substituted, recursively repairing the leaves. Soundness of
/// the substitution step rests on schemas being closed under uniform
/// substitution.
pub fn axiom_expansion_proof(calc: &Calculus, f: &Formula) -> Option<Proof> {
    let mut generic = BTreeMap::new();
    expansion_rec(calc, f, &mut generic)
}

fn generic_args(arity: usize) -> Vec<Formula> {
    (1..=arity).map(|i| Formula::var(format!("g{i}"))).collect()
}

/// Cut-free proof of `l:c(g1..gn), r:c(g1..gn)` over fresh variables.
pub fn generic_expansion(calc: &Calculus, conn: &str) -> Option<Proof> {
    let arity = *calc.table().get(conn)?;
    let f = Formula::app(conn.to_string(), generic_args(arity));
    let goal = Sequent::new(vec![
        LabelledFormula::left(f.clone()),
        LabelledFormula::right(f),
    ]);
    search::expand_sequent(calc, &goal)
}

fn expansion_rec(
    calc: &Calculus,
    f: &Formula,
    generic: &mut BTreeMap<String, Option<Proof>>,
) -> Option<Proof> {
    match f {
        Formula::Var(x) => Some(Proof::initial(x.clone())),
        Formula::App(conn, args) => {
            let template = generic
                .entry(conn.clone())
                .or_insert_with(|| generic_expansion(calc, conn))
                .clone()?;
            let map: BTreeMap<String, Formula> = (1..=args.len())
                .map(|i| (format!("g{i}"), args[i - 1].clone()))
                .collect();
            substitute_expansion(calc, &template, &map, generic)
        }
    }
}

/// Substitute the generic argument variables and rebuild: substituted
/// initial sequents become recursive expansions.
fn substitute_expansion(
    calc: &Calculus,
    node: &Proof,
    map: &BTreeMap<String, Formula>,
    generic: &mut BTreeMap<String, Option<Proof>>,
) -> Option<Proof> {
    if let Rule::Initial { var } = &node.rule {
        return match map.get(var) {
            None => Some(node.clone()),
            Some(g) => expansion_rec(calc, g, generic),
        };
    }
    let conclusion: Sequent = node
        .conclusion
        .items()
        .iter()
        .map(|lf| LabelledFormula::new(lf.label, lf.formula.substitute_map(map)))
        .collect();
    let rule = match &node.rule {
        Rule::Simple {
            rule_id,
            principal,
            template,
        } => Rule::Simple {
            rule_id: rule_id.clone(),
            principal: principal.substitute_map(map),
            template: *template,
        },
        Rule::Multicut { formula, p, q } => Rule::Multicut {
            formula: formula.substitute_map(map),
            p: *p,
            q: *q,
        },
        other => other.clone(),
    };
    let children = node
        .children
        .iter()
        .map(|c| substitute_expansion(calc, c, map, generic))
        .collect::<Option<Vec<_>>>()?;
    Some(Proof {
        conclusion,
        rule,
        children,
    })
}

// ---------------------------------------------------------------------------
// Classes

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassCase {
    /// Case 1: left- and right-invertible.
    Invertible,
    /// Case 2: leftable and weakly rightable.
    LeftableWeaklyRightable,
    /// Case 3: rightable and weakly leftable.
    RightableWeaklyLeftable,
    /// Case 4: weakly leftable and inverse rightable.
    WeaklyLeftableInverseRightable,
    /// Case 5: weakly rightable and inverse leftable.
    WeaklyRightableInverseLeftable,
}

impl ClassCase {
    pub fn number(self) -> u8 {
        match self {
            ClassCase::Invertible => 1,
            ClassCase::LeftableWeaklyRightable => 2,
            ClassCase::RightableWeaklyLeftable => 3,
            ClassCase::WeaklyLeftableInverseRightable => 4,
            ClassCase::WeaklyRightableInverseLeftable => 5,
        }
    }

    pub fn is_class1(self) -> bool {
        self.number() <= 3
    }
}

/// Classify a connective: the five cases are tried in numeric order, so a
/// connective that admits several reductions is dispatched to the one that
/// shrinks cuts rather than one introducing analytic cuts.
pub fn classify_connective(
    calc: &Calculus,
    conn: &str,
) -> Result<Option<ClassCase>, CalculusError> {
    use SubstitutionProperty::*;
    let prop = |p| check_substitution_property(calc, conn, p).map(|v| v.holds());
    let inv = |s| check_invertibility(calc, conn, s).map(|v| v.holds());
    if inv(Label::L)? && inv(Label::R)? {
        return Ok(Some(ClassCase::Invertible));
    }
    if prop(Leftable)? && prop(WeaklyRightable)? {
        return Ok(Some(ClassCase::LeftableWeaklyRightable));
    }
    if prop(Rightable)? && prop(WeaklyLeftable)? {
        return Ok(Some(ClassCase::RightableWeaklyLeftable));
    }
    if prop(WeaklyLeftable)? && prop(InverseRightable)? {
        return Ok(Some(ClassCase::WeaklyLeftableInverseRightable));
    }
    if prop(WeaklyRightable)? && prop(InverseLeftable)? {
        return Ok(Some(ClassCase::WeaklyRightableInverseLeftable));
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverallClass {
    Class1,
    Class2,
    Neither,
}

impl OverallClass {
    pub fn name(self) -> &'static str {
        match self {
            OverallClass::Class1 => "class-1",
            OverallClass::Class2 => "class-2",
            OverallClass::Neither => "none",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConnectiveReport {
    pub name: String,
    pub properties: Vec<(SubstitutionProperty, Verdict)>,
    pub left_invertible: Verdict,
    pub right_invertible: Verdict,
    pub class_case: Option<ClassCase>,
    /// Identity expansion certified on a generic instance.
    pub axiom_expansion: bool,
    /// Principal case reductions found for every template pair.
    pub principal_reductions: bool,
}

impl ConnectiveReport {
    pub fn property(&self, prop: SubstitutionProperty) -> &Verdict {
        &self.properties.iter().find(|(p, _)| *p == prop).unwrap().1
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub calculus: String,
    pub connectives: Vec<ConnectiveReport>,
    pub leftable_variables: Verdict,
    pub rightable_variables: Verdict,
    pub consistency: Consistency,
    pub class1: bool,
    pub class2: bool,
    pub overall: OverallClass,
}

impl ClassificationReport {
    pub fn connective(&self, name: &str) -> Option<&ConnectiveReport> {
        self.connectives.iter().find(|c| c.name == name)
    }
}

pub fn classify_calculus(calc: &Calculus) -> Result<ClassificationReport, CalculusError> {
    let mut connectives = Vec::new();
    for conn in &calc.connectives {
        let properties = ALL_PROPERTIES
            .iter()
            .map(|&p| Ok((p, check_substitution_property(calc, &conn.name, p)?)))
            .collect::<Result<Vec<_>, CalculusError>>()?;
        let left_invertible = check_invertibility(calc, &conn.name, Label::L)?;
        let right_invertible = check_invertibility(calc, &conn.name, Label::R)?;
        let class_case = classify_connective(calc, &conn.name)?;
        let axiom_expansion = generic_expansion(calc, &conn.name).is_some();
        let left = calc.left_rule(&conn.name)?;
        let right = calc.right_rule(&conn.name)?;
        let mut principal_reductions = true;
        for lt in 0..left.templates.len() {
            for rt in 0..right.templates.len() {
                if principal_reduction_witness(calc, &conn.name, lt, rt)?.is_none() {
                    principal_reductions = false;
                }
            }
        }
        connectives.push(ConnectiveReport {
            name: conn.name.clone(),
            properties,
            left_invertible,
            right_invertible,
            class_case,
            axiom_expansion,
            principal_reductions,
        });
    }
    let leftable_variables = check_variable_property(calc, Label::L);
    let rightable_variables = check_variable_property(calc, Label::R);
    let basics = connectives
        .iter()
        .all(|c| c.axiom_expansion && c.principal_reductions);
    let class1 = basics
        && (leftable_variables.holds() || rightable_variables.holds())
        && connectives
            .iter()
            .all(|c| c.class_case.map_or(false, ClassCase::is_class1));
    let class2 = basics
        && calc.consistency == Consistency::Assumed
        && connectives.iter().all(|c| c.class_case.is_some());
    let overall = if class1 {
        OverallClass::Class1
    } else if class2 {
        OverallClass::Class2
    } else {
        OverallClass::Neither
    };
    Ok(ClassificationReport {
        calculus: calc.name.clone(),
        connectives,
        leftable_variables,
        rightable_variables,
        consistency: calc.consistency,
        class1,
        class2,
        overall,
    })
}

// ---------------------------------------------------------------------------
// Report serialization

fn verdict_sexp(v: &Verdict) -> String {
    match v {
        Verdict::Holds => "holds".to_string(),
        Verdict::Fails(rule) => format!("fails {rule}"),
    }
}

impl ClassificationReport {
    pub fn to_sexp(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "(report {}", self.calculus);
        for c in &self.connectives {
            let _ = writeln!(out, "  (connective {}", c.name);
            for (p, v) in &c.properties {
                let _ = writeln!(out, "    (prop {} {})", p.name(), verdict_sexp(v));
            }
            let _ = writeln!(
                out,
                "    (prop left-invertible {})",
                verdict_sexp(&c.left_invertible)
            );
            let _ = writeln!(
                out,
                "    (prop right-invertible {})",
                verdict_sexp(&c.right_invertible)
            );
            let _ = writeln!(
                out,
                "    (axiom-expansion {})",
                if c.axiom_expansion { "ok" } else { "none" }
            );
            let _ = writeln!(
                out,
                "    (principal-reductions {})",
                if c.principal_reductions { "ok" } else { "none" }
            );
            let _ = match c.class_case {
                Some(case) => writeln!(
                    out,
                    "    (class {} case {}))",
                    if case.is_class1() { 1 } else { 2 },
                    case.number()
                ),
                None => writeln!(out, "    (class none))"),
            };
        }
        let _ = writeln!(
            out,
            "  (variables left {})",
            verdict_sexp(&self.leftable_variables)
        );
        let _ = writeln!(
            out,
            "  (variables right {})",
            verdict_sexp(&self.rightable_variables)
        );
        let _ = writeln!(
            out,
            "  (consistency {})",
            match self.consistency {
                Consistency::Assumed => "assumed",
                Consistency::Unknown => "unknown",
            }
        );
        let _ = writeln!(out, "  (calculus-class {}))", self.overall.name());
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "calculus {}: {}", self.calculus, self.overall.name());
        let _ = writeln!(
            out,
            "{:<8} {:<5} {:<5} {:<6} {:<6} {:<6} {:<6} {:<6} {:<6} {:<5} {:<5} class",
            "conn", "L", "R", "wL", "wR", "iL", "iR", "invL", "invR", "exp", "pcr"
        );
        let mark = |v: &Verdict| if v.holds() { "yes" } else { "no" };
        for c in &self.connectives {
            let _ = writeln!(
                out,
                "{:<8} {:<5} {:<5} {:<6} {:<6} {:<6} {:<6} {:<6} {:<6} {:<5} {:<5} {}",
                c.name,
                mark(c.property(SubstitutionProperty::Leftable)),
                mark(c.property(SubstitutionProperty::Rightable)),
                mark(c.property(SubstitutionProperty::WeaklyLeftable)),
                mark(c.property(SubstitutionProperty::WeaklyRightable)),
                mark(c.property(SubstitutionProperty::InverseLeftable)),
                mark(c.property(SubstitutionProperty::InverseRightable)),
                mark(&c.left_invertible),
                mark(&c.right_invertible),
                if c.axiom_expansion { "yes" } else { "no" },
                if c.principal_reductions { "yes" } else { "no" },
                match c.class_case {
                    Some(case) => format!("case {}", case.number()),
                    None => "none".to_string(),
                }
            );
        }
        let _ = writeln!(
            out,
            "variables: leftable {} / rightable {}; consistency {}",
            if self.leftable_variables.holds() {
                "yes"
            } else {
                "no"
            },
            if self.rightable_variables.holds() {
                "yes"
            } else {
                "no"
            },
            match self.consistency {
                Consistency::Assumed => "assumed",
                Consistency::Unknown => "unknown",
            }
        );
        out
    }
}
