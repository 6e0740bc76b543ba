//! Analytic cutting on the left, and the distribution-tree machinery it
//! assembles: the cut is traded for cuts on the critical-context formulas,
//! which are subformulas of the conclusion or proper subformulas of the cut
//! formula. The right-handed version runs on the mirrored calculus.


use crate::formula::{Formula, Label, LabelledFormula, Sequent};
use crate::kernel::Proof;

use super::transform::{
    close_leaves, premise_marking, remove_redundant_cuts, split_critical, Critical,
};
use super::{cut_parts, CutParts, Engine, EngineError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributionKind {
    /// Contains the whole support of the i-th critical context.
    Matching(usize),
    /// Contains, for every critical context, a flipped representative.
    Orthogonal(Vec<LabelledFormula>),
}

/// All 2^|F| ways of labelling the formulas of `f`.
pub fn enumerate_distributions(f: &[Formula]) -> Vec<Vec<LabelledFormula>> {
    let mut out = Vec::with_capacity(1 << f.len());
    let mut current = Vec::with_capacity(f.len());
    rec(f, &mut current, &mut out);
    return out;

    fn rec(f: &[Formula], current: &mut Vec<LabelledFormula>, out: &mut Vec<Vec<LabelledFormula>>) {
        match f.first() {
            None => out.push(current.clone()),
            Some(head) => {
                for label in [Label::R, Label::L] {
                    current.push(LabelledFormula::new(label, head.clone()));
                    rec(&f[1..], current, out);
                    current.pop();
                }
            }
        }
    }
}

/// Assign a distribution to a family: matching (smallest index first) or
/// orthogonal, with the representative subset chosen from each context's
/// first occurrence whose flip lies in the distribution.
pub fn classify_distribution(
    distribution: &[LabelledFormula],
    contexts: &[Sequent],
) -> Option<DistributionKind> {
    for (i, ctx) in contexts.iter().enumerate() {
        if ctx.support().iter().all(|lf| distribution.contains(lf)) {
            return Some(DistributionKind::Matching(i));
        }
    }
    let mut witness = Vec::new();
    for ctx in contexts {
        let found = ctx
            .items()
            .iter()
            .find(|lf| distribution.contains(&lf.flip()))?;
        witness.push(found.flip());
    }
    witness.sort();
    witness.dedup();
    Some(DistributionKind::Orthogonal(witness))
}

/// The bare cut-tree skeleton: a deduction of the empty sequent from the
/// 2^|F| distributions of `f` (as open leaves), whose only multicuts are on
/// formulas of `f`.
pub fn distribution_cut_tree(f: &[Formula]) -> Proof {
    let base = Sequent::empty();
    build_distribution_tree(&base, f, &mut |d| {
        Ok(Proof::open(d.iter().cloned().collect()))
    })
    .expect("open-leaf skeleton cannot fail")
}

/// Build the tree of single-multicuts over `f` in order; the leaf provider
/// returns a proof of `base ∪ D` for each distribution `D`, and each cut is
/// followed by a contraction folding the duplicated base.
pub(crate) fn build_distribution_tree(
    base: &Sequent,
    f: &[Formula],
    leaf: &mut impl FnMut(&[LabelledFormula]) -> Result<Proof, EngineError>,
) -> Result<Proof, EngineError> {
    let mut current = Vec::with_capacity(f.len());
    return rec(base, f, 0, &mut current, leaf);

    fn rec(
        base: &Sequent,
        f: &[Formula],
        idx: usize,
        current: &mut Vec<LabelledFormula>,
        leaf: &mut impl FnMut(&[LabelledFormula]) -> Result<Proof, EngineError>,
    ) -> Result<Proof, EngineError> {
        let target: Sequent = base.items().iter().chain(current.iter()).cloned().collect();
        if idx == f.len() {
            let pf = leaf(current)?;
            if pf.conclusion != target {
                return Err(EngineError::Internal(format!(
                    "distribution leaf concludes {}, wanted {target}",
                    pf.conclusion
                )));
            }
            return Ok(pf);
        }
        current.push(LabelledFormula::right(f[idx].clone()));
        let left = rec(base, f, idx + 1, current, leaf)?;
        current.pop();
        current.push(LabelledFormula::left(f[idx].clone()));
        let right = rec(base, f, idx + 1, current, leaf)?;
        current.pop();
        let cut = Proof::mcut(left, right, f[idx].clone(), 1, 1);
        Ok(Proof::contract_to(cut, target))
    }
}

impl Engine {
    /// Analytic cutting on the left (weakly leftable + inverse rightable):
    /// steps (a)-(e). Returns the proof and |F| for the step trace.
    pub(crate) fn analytic_cut_left(
        &self,
        parts: &CutParts,
    ) -> Result<(Proof, usize), EngineError> {
        let c = parts.formula.clone();
        let conn = c
            .head()
            .expect("analytic cutting needs a compound cut formula")
            .to_string();
        // (a) Remove redundant cuts in both premises; endsequents are
        // preserved, so the cut parts stay aligned.
        let cleaned = Proof::mcut(
            remove_redundant_cuts(&parts.gamma),
            remove_redundant_cuts(&parts.delta),
            c.clone(),
            parts.p,
            parts.q,
        );
        let parts = cut_parts(&cleaned)?;
        // (b) Trace the ancestors and split both premises at the critical
        // inferences.
        let g_marking = premise_marking(self, &parts, Label::R)?;
        let d_marking = premise_marking(self, &parts, Label::L)?;
        let (g_bottom, g_bottom_marking, g_crits) =
            split_critical(self, &parts.gamma, &g_marking, Label::R, &conn)?;
        let (d_bottom, d_bottom_marking, d_crits) =
            split_critical(self, &parts.delta, &d_marking, Label::L, &conn)?;

        // Degenerate premises: every ancestor was introduced by weakening,
        // so erasing the ancestors closes that side outright.
        if g_crits.is_empty() {
            let erased = self.substitute_ancestors(&parts.gamma, &g_marking, &Sequent::empty())?;
            return Ok((Proof::weaken_to(erased, parts.endsequent.clone()), 0));
        }
        if d_crits.is_empty() {
            let erased = self.substitute_ancestors(&parts.delta, &d_marking, &Sequent::empty())?;
            return Ok((Proof::weaken_to(erased, parts.endsequent.clone()), 0));
        }

        // Degenerate critical context: substitute the empty context into
        // the right bottom part and close with the principal pairs.
        if let Some(i0) = g_crits.iter().position(|crit| crit.context.is_empty()) {
            let bot = self.substitute_ancestors(&d_bottom, &d_bottom_marking, &Sequent::empty())?;
            let closed = close_leaves(&bot, &mut |j, leaf| {
                let top = self.build_top_pair(&c, &d_crits[j], &g_crits[i0])?;
                Ok(Proof::weaken_to(top, leaf.clone()))
            })?;
            return Ok((Proof::weaken_to(closed, parts.endsequent.clone()), 0));
        }

        // F: the critical-context formulas, labels stripped, in serialized
        // order. Each must be bounded by the conclusion or the cut formula.
        let mut f: Vec<Formula> = g_crits
            .iter()
            .flat_map(|crit| crit.context.items().iter().map(|lf| lf.formula.clone()))
            .collect();
        f.sort_by_key(|x| (x.to_string(), x.clone()));
        f.dedup();
        for a in &f {
            let in_gamma = parts
                .gamma_ctx
                .items()
                .iter()
                .any(|lf| a.is_subformula_of(&lf.formula));
            if !in_gamma && !a.is_proper_subformula_of(&c) {
                return Err(EngineError::Internal(format!(
                    "critical-context formula {a} escapes both the conclusion and the cut formula"
                )));
            }
        }
        if f.len() >= usize::BITS as usize || (1usize << f.len()) > self.opts.max_leaves {
            return Err(EngineError::LeafBudget {
                f: f.len(),
                max: self.opts.max_leaves,
            });
        }

        // Right family, built lazily per matching index i: the right
        // bottom part with the i-th critical context substituted in, closed
        // by the principal pairs.
        let mut right_family: Vec<Option<Proof>> = vec![None; g_crits.len()];
        let mut right_for = |i: usize,
                             engine: &Engine,
                             d_bottom: &Proof,
                             d_bottom_marking: &crate::kernel::Marking,
                             d_crits: &[Critical],
                             g_crits: &[Critical]|
         -> Result<Proof, EngineError> {
            if right_family[i].is_none() {
                let gamma_i = &g_crits[i].context;
                let bot = engine.substitute_ancestors(d_bottom, d_bottom_marking, gamma_i)?;
                let closed = close_leaves(&bot, &mut |j, leaf| {
                    let top = engine.build_top_pair(&c, &d_crits[j], &g_crits[i])?;
                    Ok(Proof::weaken_to(top, leaf.clone()))
                })?;
                right_family[i] = Some(closed);
            }
            Ok(right_family[i].clone().unwrap())
        };

        let contexts: Vec<Sequent> = g_crits.iter().map(|cr| cr.context.clone()).collect();
        let base = parts.endsequent.clone();
        let f_len = f.len();
        let out = build_distribution_tree(&base, &f, &mut |d| {
            match classify_distribution(d, &contexts) {
                Some(DistributionKind::Matching(i)) => {
                    // bot(δ)[Γ_i/C], contracted to the support and weakened
                    // into the distribution.
                    let proof =
                        right_for(i, self, &d_bottom, &d_bottom_marking, &d_crits, &g_crits)?;
                    let gamma_i = &g_crits[i].context;
                    let support: Sequent = gamma_i.support().into_iter().collect();
                    let mid = parts.delta_ctx.union(&support);
                    let contracted = Proof::contract_to(proof, mid);
                    let target: Sequent = base.items().iter().chain(d.iter()).cloned().collect();
                    Ok(Proof::weaken_to(contracted, target))
                }
                Some(DistributionKind::Orthogonal(witness)) => {
                    // bot(γ)[E/C] with the leaves closed by axiom expansion
                    // on the chosen representative pairs.
                    let e: Sequent = witness.iter().cloned().collect();
                    let bot = self.substitute_ancestors(&g_bottom, &g_bottom_marking, &e)?;
                    let closed = close_leaves(&bot, &mut |i, leaf| {
                        let choice = g_crits[i]
                            .context
                            .items()
                            .iter()
                            .find(|lf| e.count(&lf.flip()) > 0)
                            .ok_or_else(|| {
                                EngineError::Internal(
                                    "orthogonal witness lost its representative".into(),
                                )
                            })?;
                        let expansion = self.expansion(&choice.formula)?;
                        Ok(Proof::weaken_to(expansion, leaf.clone()))
                    })?;
                    let contracted = Proof::contract_to(closed, parts.gamma_ctx.union(&e));
                    let target: Sequent = base.items().iter().chain(d.iter()).cloned().collect();
                    Ok(Proof::weaken_to(contracted, target))
                }
                None => Err(EngineError::Internal(format!(
                    "uncovered distribution {:?}",
                    d.iter().map(|lf| lf.to_string()).collect::<Vec<_>>()
                ))),
            }
        })?;
        Ok((out, f_len))
    }
}
