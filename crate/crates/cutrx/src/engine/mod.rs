//! The cut-restriction engine: the single-cut reduction step, the
//! restriction loop, and full cut-elimination for class 1 calculi.


mod analytic;
mod invert;
mod transform;

pub use analytic::{
    classify_distribution, distribution_cut_tree, enumerate_distributions, DistributionKind,
};
pub use transform::remove_redundant_cuts;

use std::cell::{OnceCell, RefCell};
use std::collections::BTreeMap;

use crate::calculus::{Calculus, CalculusError};
use crate::classifier::{self, check_variable_property, classify_connective, ClassCase};
use crate::formula::{Formula, Label, LabelledFormula, Sequent};
use crate::kernel::{self, check, mirror_proof, occurrence_positions, CutInfo, Path, Proof, Rule};

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Abort threshold for the distribution tree (number of leaves).
    pub max_leaves: usize,
    /// Safety cap on reduction steps; termination is guaranteed, so hitting
    /// this indicates a bug.
    pub max_steps: usize,
}

impl Default for EngineOptions {
    fn default() -> EngineOptions {
        EngineOptions {
            max_leaves: 1 << 16,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("calculus is not class 2: {0}")]
    NotClass2(String),
    #[error("calculus is not class 1: {0}")]
    NotClass1(String),
    #[error("connective `{0}` is not class 2")]
    Unclassified(String),
    #[error("inconsistency detected: renaming requires a nonempty conclusion")]
    Inconsistency,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("substitution violates a context restriction at {path}: {detail}")]
    Substitution { path: String, detail: String },
    #[error("input proof is invalid: {0}")]
    Invalid(String),
    #[error("distribution tree needs 2^{f} leaves, over the limit {max}")]
    LeafBudget { f: usize, max: usize },
    #[error("step budget {0} exceeded; this indicates an engine bug")]
    StepBudget(usize),
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

impl EngineError {
    /// CLI exit code class: 1 verification negative, 3 internal assertion.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::NotClass2(_)
            | EngineError::NotClass1(_)
            | EngineError::Unclassified(_)
            | EngineError::Inconsistency
            | EngineError::Precondition(_)
            | EngineError::Substitution { .. }
            | EngineError::Invalid(_)
            | EngineError::Calculus(_) => 1,
            EngineError::LeafBudget { .. }
            | EngineError::StepBudget(_)
            | EngineError::Internal(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionName {
    Principal,
    Inversion,
    AntecedentShift,
    SuccedentShift,
    Renaming,
    AnalyticCutLeft,
    AnalyticCutRight,
}

impl ReductionName {
    pub fn as_str(self) -> &'static str {
        match self {
            ReductionName::Principal => "principal",
            ReductionName::Inversion => "inversion",
            ReductionName::AntecedentShift => "antecedent-shift",
            ReductionName::SuccedentShift => "succedent-shift",
            ReductionName::Renaming => "renaming",
            ReductionName::AnalyticCutLeft => "analytic-cut-left",
            ReductionName::AnalyticCutRight => "analytic-cut-right",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub proof: Proof,
    pub name: ReductionName,
    /// Measures of the consumed cut.
    pub degree: usize,
    pub rank: usize,
    /// Size of the critical-context formula set, for analytic cutting.
    pub f_len: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    pub index: usize,
    pub name: ReductionName,
    pub degree: usize,
    pub rank: usize,
    /// Non-analytic multicuts remaining in the reduced subproof.
    pub cuts: usize,
    pub f_len: Option<usize>,
    /// The enclosing reduction's measure; steps nested inside a clearing
    /// recursion must measure strictly below it.
    pub bound: Option<(usize, usize)>,
}

impl StepInfo {
    pub fn trace_line(&self) -> String {
        format!(
            "STEP {} {} degree={} rank={} cuts={}",
            self.index,
            self.name.as_str(),
            self.degree,
            self.rank,
            self.cuts
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Restrict,
    Eliminate,
}

/// The last multicut of a proof, split into its parts.
pub(crate) struct CutParts {
    pub formula: Formula,
    pub p: usize,
    pub q: usize,
    pub gamma: Proof,
    pub delta: Proof,
    /// Left context: the left endsequent minus the cut occurrences.
    pub gamma_ctx: Sequent,
    pub delta_ctx: Sequent,
    pub endsequent: Sequent,
    pub info: CutInfo,
}

pub(crate) fn cut_parts(pf: &Proof) -> Result<CutParts, EngineError> {
    let info = pf
        .cut_info()
        .ok_or_else(|| EngineError::Precondition("final inference is not a multicut".into()))?;
    let (formula, p, q) = match &pf.rule {
        Rule::Multicut { formula, p, q } => (formula.clone(), *p, *q),
        _ => unreachable!(),
    };
    let gamma = pf.children[0].clone();
    let delta = pf.children[1].clone();
    let rf = LabelledFormula::right(formula.clone());
    let lf = LabelledFormula::left(formula.clone());
    if gamma.conclusion.count(&rf) < p || delta.conclusion.count(&lf) < q {
        return Err(EngineError::Precondition(
            "premises lack the multicut occurrences".into(),
        ));
    }
    let gamma_cut = occurrence_positions(&gamma.conclusion, &rf, p);
    let delta_cut = occurrence_positions(&delta.conclusion, &lf, q);
    let gamma_ctx = gamma.conclusion.without_positions(&gamma_cut);
    let delta_ctx = delta.conclusion.without_positions(&delta_cut);
    Ok(CutParts {
        formula,
        p,
        q,
        gamma,
        delta,
        gamma_ctx,
        delta_ctx,
        endsequent: pf.conclusion.clone(),
        info,
    })
}

pub struct Engine {
    calc: Calculus,
    opts: EngineOptions,
    expansions: RefCell<BTreeMap<Formula, Proof>>,
    witnesses: RefCell<BTreeMap<(String, usize, usize), Option<Proof>>>,
    mirrored: OnceCell<Box<Engine>>,
}

impl Engine {
    pub fn new(calc: &Calculus) -> Engine {
        Engine::with_options(calc, EngineOptions::default())
    }

    pub fn with_options(calc: &Calculus, opts: EngineOptions) -> Engine {
        Engine {
            calc: calc.clone(),
            opts,
            expansions: RefCell::new(BTreeMap::new()),
            witnesses: RefCell::new(BTreeMap::new()),
            mirrored: OnceCell::new(),
        }
    }

    pub fn calculus(&self) -> &Calculus {
        &self.calc
    }

    fn mirror_engine(&self) -> &Engine {
        self.mirrored
            .get_or_init(|| Box::new(Engine::with_options(&self.calc.mirror(), self.opts.clone())))
    }

    /// Cut-free proof of `l:f, r:f`, cached per formula.
    pub(crate) fn expansion(&self, f: &Formula) -> Result<Proof, EngineError> {
        if let Some(pf) = self.expansions.borrow().get(f) {
            return Ok(pf.clone());
        }
        let pf = classifier::axiom_expansion_proof(&self.calc, f)
            .ok_or_else(|| EngineError::Precondition(format!("no axiom expansion for `{f}`")))?;
        self.expansions.borrow_mut().insert(f.clone(), pf.clone());
        Ok(pf)
    }

    /// Structural witness for the template pair, cached.
    pub(crate) fn witness(
        &self,
        conn: &str,
        left_template: usize,
        right_template: usize,
    ) -> Result<Proof, EngineError> {
        let key = (conn.to_string(), left_template, right_template);
        if let Some(cached) = self.witnesses.borrow().get(&key) {
            return cached.clone().ok_or_else(|| {
                EngineError::Precondition(format!("no principal case reduction for `{conn}`"))
            });
        }
        let w = classifier::principal_reduction_witness(
            &self.calc,
            conn,
            left_template,
            right_template,
        )?;
        self.witnesses.borrow_mut().insert(key, w.clone());
        w.ok_or_else(|| {
            EngineError::Precondition(format!("no principal case reduction for `{conn}`"))
        })
    }

    // -----------------------------------------------------------------
    // Public operations

    /// Invert the first occurrence equal to the occurrence at `position` in
    /// the endsequent, returning one proof per premise of the (unique)
    /// template of the matching rule.
    pub fn invert(&self, pf: &Proof, position: usize) -> Result<Vec<Proof>, EngineError> {
        if position >= pf.conclusion.len() {
            return Err(EngineError::Precondition(format!(
                "no occurrence {position}"
            )));
        }
        let target = pf.conclusion.at(position).clone();
        self.invert_formula(pf, &target)
    }

    pub fn invert_formula(
        &self,
        pf: &Proof,
        target: &LabelledFormula,
    ) -> Result<Vec<Proof>, EngineError> {
        let conn = target
            .formula
            .head()
            .ok_or_else(|| EngineError::Precondition("variables have no inversion".to_string()))?;
        let verdict = classifier::check_invertibility(&self.calc, conn, target.label)?;
        if !verdict.holds() {
            return Err(EngineError::Precondition(format!(
                "`{conn}` is not {}-invertible",
                target.label
            )));
        }
        if pf.has_open_leaves() {
            return Err(EngineError::Precondition(
                "cannot invert a deduction".into(),
            ));
        }
        match target.label {
            Label::L => self.invert_left_all(pf, &target.formula),
            Label::R => {
                let mirrored = self
                    .mirror_engine()
                    .invert_left_all(&mirror_proof(pf), &target.formula)?;
                Ok(mirrored.iter().map(mirror_proof).collect())
            }
        }
    }

    /// One reduction step on a proof whose final inference is its
    /// only non-analytic multicut.
    pub fn reduce_once(&self, pf: &Proof) -> Result<ReductionOutcome, EngineError> {
        let parts = cut_parts(pf)?;
        if parts.info.analytic {
            return Err(EngineError::Precondition(
                "final multicut is analytic".into(),
            ));
        }
        for child in &pf.children {
            if !child.is_locally_analytic() {
                return Err(EngineError::Precondition(
                    "premise subproofs must be locally analytic".into(),
                ));
            }
        }
        self.reduce_dispatch(pf, parts, Mode::Restrict)
    }

    /// Rewrite every non-analytic multicut, yielding a locally analytic
    /// proof of the same endsequent. Requires a class 2 calculus.
    pub fn restrict(&self, pf: &Proof) -> Result<(Proof, Vec<StepInfo>), EngineError> {
        let report = classifier::classify_calculus(&self.calc)?;
        if !report.class2 {
            return Err(EngineError::NotClass2(describe_failure(&report)));
        }
        self.run_loop(pf, Mode::Restrict)
    }

    /// Remove every multicut. Requires a class 1 calculus.
    pub fn eliminate(&self, pf: &Proof) -> Result<(Proof, Vec<StepInfo>), EngineError> {
        let report = classifier::classify_calculus(&self.calc)?;
        if !report.class1 {
            return Err(EngineError::NotClass1(describe_failure(&report)));
        }
        self.run_loop(pf, Mode::Eliminate)
    }

    fn run_loop(&self, pf: &Proof, mode: Mode) -> Result<(Proof, Vec<StepInfo>), EngineError> {
        let diags = check(&self.calc, pf);
        if !diags.is_empty() {
            return Err(EngineError::Invalid(
                diags
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        let mut current = pf.clone();
        let mut steps = Vec::new();
        while let Some(path) = find_uppermost(&current, mode) {
            let sub = current.at(&path).unwrap().clone();
            let cleared = self.clear(sub, &mut steps, None, mode)?;
            current = current.replace_at(&path, cleared);
        }
        let done = match mode {
            Mode::Restrict => current.is_locally_analytic(),
            Mode::Eliminate => current.is_cut_free(),
        };
        if !done {
            return Err(EngineError::Internal(
                "loop finished with cuts remaining".into(),
            ));
        }
        if current.conclusion != pf.conclusion {
            return Err(EngineError::Internal("endsequent changed".into()));
        }
        let diags = check(&self.calc, &current);
        if !diags.is_empty() {
            return Err(EngineError::Internal(format!(
                "output fails the checker: {}",
                diags[0]
            )));
        }
        Ok((current, steps))
    }

    /// Reduce the cut at the root of `beta` and recursively clear every cut
    /// the reduction introduced. The recursion realizes the lexicographic
    /// (degree, rank) induction: each nested cut must measure strictly
    /// below the bound inherited from the enclosing reduction.
    fn clear(
        &self,
        beta: Proof,
        steps: &mut Vec<StepInfo>,
        bound: Option<(usize, usize)>,
        mode: Mode,
    ) -> Result<Proof, EngineError> {
        let info = beta
            .cut_info()
            .ok_or_else(|| EngineError::Internal("clear called off a multicut".into()))?;
        if let Some((bd, br)) = bound {
            if (info.degree, info.rank) >= (bd, br) {
                return Err(EngineError::Internal(format!(
                    "measure ({}, {}) did not decrease below ({bd}, {br})",
                    info.degree, info.rank
                )));
            }
        }
        if steps.len() >= self.opts.max_steps {
            return Err(EngineError::StepBudget(self.opts.max_steps));
        }
        let parts = cut_parts(&beta)?;
        let outcome = self.reduce_dispatch(&beta, parts, mode)?;
        steps.push(StepInfo {
            index: steps.len() + 1,
            name: outcome.name,
            degree: outcome.degree,
            rank: outcome.rank,
            cuts: count_nonanalytic(&outcome.proof),
            f_len: outcome.f_len,
            bound,
        });
        let mut out = outcome.proof;
        while let Some(path) = find_uppermost(&out, mode) {
            let sub = out.at(&path).unwrap().clone();
            let cleared = self.clear(sub, steps, Some((info.degree, info.rank)), mode)?;
            out = out.replace_at(&path, cleared);
        }
        Ok(out)
    }

    fn reduce_dispatch(
        &self,
        pf: &Proof,
        parts: CutParts,
        mode: Mode,
    ) -> Result<ReductionOutcome, EngineError> {
        let degree = parts.info.degree;
        let rank = parts.info.rank;
        let mut f_len = None;
        let (name, proof) = match &parts.formula {
            Formula::Var(_) => match mode {
                Mode::Restrict => (ReductionName::Renaming, self.renaming(pf, &parts)?),
                Mode::Eliminate => self.eliminate_variable_cut(pf, &parts)?,
            },
            Formula::App(conn, _) => {
                let g_principal =
                    rule_introduces(&self.calc, &parts.gamma, Label::R, &parts.formula);
                let d_principal =
                    rule_introduces(&self.calc, &parts.delta, Label::L, &parts.formula);
                if g_principal && d_principal {
                    (ReductionName::Principal, self.principal_reduction(&parts)?)
                } else {
                    match classify_connective(&self.calc, conn)? {
                        None => return Err(EngineError::Unclassified(conn.clone())),
                        Some(ClassCase::Invertible) => (
                            ReductionName::Inversion,
                            self.reduction_by_inversion(&parts)?,
                        ),
                        Some(ClassCase::LeftableWeaklyRightable) => {
                            if !d_principal {
                                (
                                    ReductionName::AntecedentShift,
                                    self.antecedent_shift(&parts)?,
                                )
                            } else {
                                (ReductionName::SuccedentShift, self.succedent_shift(pf)?)
                            }
                        }
                        Some(ClassCase::RightableWeaklyLeftable) => {
                            if !g_principal {
                                (ReductionName::SuccedentShift, self.succedent_shift(pf)?)
                            } else {
                                (
                                    ReductionName::AntecedentShift,
                                    self.antecedent_shift(&parts)?,
                                )
                            }
                        }
                        Some(ClassCase::WeaklyLeftableInverseRightable) => {
                            if mode == Mode::Eliminate {
                                return Err(EngineError::NotClass1(format!(
                                    "`{conn}` needs analytic cutting"
                                )));
                            }
                            let (proof, f) = self.analytic_cut_left(&parts)?;
                            f_len = Some(f);
                            (ReductionName::AnalyticCutLeft, proof)
                        }
                        Some(ClassCase::WeaklyRightableInverseLeftable) => {
                            if mode == Mode::Eliminate {
                                return Err(EngineError::NotClass1(format!(
                                    "`{conn}` needs analytic cutting"
                                )));
                            }
                            let (proof, f) = self.analytic_cut_right(pf)?;
                            f_len = Some(f);
                            (ReductionName::AnalyticCutRight, proof)
                        }
                    }
                }
            }
        };
        // Per-step verification: the output is a valid proof of the same
        // endsequent, and every cut it introduced measures below the input.
        if proof.conclusion != parts.endsequent {
            return Err(EngineError::Internal(format!(
                "{} changed the endsequent",
                name.as_str()
            )));
        }
        let diags = check(&self.calc, &proof);
        if !diags.is_empty() {
            return Err(EngineError::Internal(format!(
                "{} produced an invalid proof: {}",
                name.as_str(),
                diags[0]
            )));
        }
        let measures_ok = match mode {
            Mode::Restrict => proof.is_dr_reduced(degree, rank),
            Mode::Eliminate => proof.cut_paths().iter().all(|p| {
                let info = kernel::cut_measures(&proof, p).unwrap();
                (info.degree, info.rank) < (degree, rank)
            }),
        };
        if !measures_ok {
            return Err(EngineError::Internal(format!(
                "{} did not reduce the cut measure",
                name.as_str()
            )));
        }
        Ok(ReductionOutcome {
            proof,
            name,
            degree,
            rank,
            f_len,
        })
    }

    fn eliminate_variable_cut(
        &self,
        pf: &Proof,
        parts: &CutParts,
    ) -> Result<(ReductionName, Proof), EngineError> {
        let rightable = check_variable_property(&self.calc, Label::R).holds();
        let leftable = check_variable_property(&self.calc, Label::L).holds();
        if rightable {
            if matches!(parts.gamma.rule, Rule::Initial { .. }) {
                // The left premise is an initial sequent: drop the cut.
                let out = Proof::contract_to(parts.delta.clone(), parts.endsequent.clone());
                Ok((ReductionName::SuccedentShift, out))
            } else {
                Ok((ReductionName::SuccedentShift, self.succedent_shift(pf)?))
            }
        } else if leftable {
            if matches!(parts.delta.rule, Rule::Initial { .. }) {
                let out = Proof::contract_to(parts.gamma.clone(), parts.endsequent.clone());
                Ok((ReductionName::AntecedentShift, out))
            } else {
                Ok((
                    ReductionName::AntecedentShift,
                    self.antecedent_shift(parts)?,
                ))
            }
        } else {
            Err(EngineError::NotClass1(
                "variable cuts need leftable or rightable variables".into(),
            ))
        }
    }

    fn succedent_shift(&self, pf: &Proof) -> Result<Proof, EngineError> {
        let mirrored = mirror_proof(pf);
        let me = self.mirror_engine();
        let parts = cut_parts(&mirrored)?;
        let out = me.antecedent_shift(&parts)?;
        Ok(mirror_proof(&out))
    }

    fn analytic_cut_right(&self, pf: &Proof) -> Result<(Proof, usize), EngineError> {
        let mirrored = mirror_proof(pf);
        let me = self.mirror_engine();
        let parts = cut_parts(&mirrored)?;
        let (out, f) = me.analytic_cut_left(&parts)?;
        Ok((mirror_proof(&out), f))
    }
}

/// Does the subproof's last rule introduce `side:formula` as one of the cut
/// occurrences? Simple-rule principal occurrences are canonical (the last
/// equal occurrence), which always lies among the canonical cut positions.
fn rule_introduces(calc: &Calculus, sub: &Proof, side: Label, formula: &Formula) -> bool {
    match &sub.rule {
        Rule::Simple {
            rule_id, principal, ..
        } => match calc.rule(rule_id) {
            Ok(rule) => rule.side == side && principal == formula,
            Err(_) => false,
        },
        _ => false,
    }
}

fn find_uppermost(pf: &Proof, mode: Mode) -> Option<Path> {
    let mut path = Vec::new();
    return rec(pf, &mut path, mode);

    fn rec(node: &Proof, path: &mut Path, mode: Mode) -> Option<Path> {
        for (i, child) in node.children.iter().enumerate() {
            path.push(i);
            if let Some(found) = rec(child, path, mode) {
                return Some(found);
            }
            path.pop();
        }
        let hit = match mode {
            Mode::Restrict => node.cut_info().map_or(false, |i| !i.analytic),
            Mode::Eliminate => node.is_multicut(),
        };
        if hit {
            Some(path.clone())
        } else {
            None
        }
    }
}

fn count_nonanalytic(pf: &Proof) -> usize {
    pf.cut_paths()
        .iter()
        .filter(|p| !kernel::cut_measures(pf, p).unwrap().analytic)
        .count()
}

fn describe_failure(report: &crate::classifier::ClassificationReport) -> String {
    let mut reasons = Vec::new();
    for c in &report.connectives {
        if c.class_case.is_none() {
            reasons.push(format!("connective `{}` satisfies no class case", c.name));
        }
        if !c.axiom_expansion {
            reasons.push(format!("no axiom expansion for `{}`", c.name));
        }
        if !c.principal_reductions {
            reasons.push(format!("no principal case reduction for `{}`", c.name));
        }
    }
    if reasons.is_empty() {
        reasons.push(format!("calculus classified as {}", report.overall.name()));
    }
    reasons.join("; ")
}
