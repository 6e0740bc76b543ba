//! Proof transformations shared by the reductions: redundant-cut removal,
//! ancestor substitution, witness pasting, the principal-pair closure, the
//! shifts, renaming, and reduction by inversion.

use std::collections::BTreeMap;

use crate::calculus::instantiate_aux;
use crate::formula::{Formula, Label, LabelledFormula, Sequent};
use crate::kernel::{
    ancestry, format_path, mark_ancestors, occurrence_positions, principal_position, Marking,
    Proof, Rule,
};

use super::{CutParts, Engine, EngineError};

/// Replace every redundant multicut (one whose cut formula occurs in its
/// own conclusion) by a contraction and a weakening over the premise that
/// carries the matching label. Node conclusions are preserved and node
/// counts never grow, so ranks of the remaining cuts do not increase.
pub fn remove_redundant_cuts(pf: &Proof) -> Proof {
    let children: Vec<Proof> = pf.children.iter().map(remove_redundant_cuts).collect();
    if let Rule::Multicut { formula, p, q } = &pf.rule {
        let left_lf = LabelledFormula::left(formula.clone());
        let right_lf = LabelledFormula::right(formula.clone());
        if pf.conclusion.count(&left_lf) > 0 {
            // Keep the right premise, which carries the l-occurrences.
            let keep = children[1].clone();
            let ctx = keep.conclusion.without_positions(&occurrence_positions(
                &keep.conclusion,
                &left_lf,
                *q,
            ));
            return rebuild_redundant(keep, ctx, left_lf, pf.conclusion.clone());
        }
        if pf.conclusion.count(&right_lf) > 0 {
            let keep = children[0].clone();
            let ctx = keep.conclusion.without_positions(&occurrence_positions(
                &keep.conclusion,
                &right_lf,
                *p,
            ));
            return rebuild_redundant(keep, ctx, right_lf, pf.conclusion.clone());
        }
    }
    Proof {
        conclusion: pf.conclusion.clone(),
        rule: pf.rule.clone(),
        children,
    }
}

fn rebuild_redundant(
    keep: Proof,
    ctx: Sequent,
    cut_lf: LabelledFormula,
    conclusion: Sequent,
) -> Proof {
    // Contract the premise's cut occurrences down to one copy when the
    // conclusion can absorb it, otherwise down to the context alone.
    let with_one = ctx.with(cut_lf);
    let target = if conclusion.is_superset_of(&with_one) {
        with_one
    } else {
        ctx
    };
    Proof::weaken_to(Proof::contract_to(keep, target), conclusion)
}

impl Engine {
    /// Replace every marked ancestor occurrence by `gamma`, rebuilding the
    /// deduction per the substitution lemma. Fails if a marked occurrence
    /// is principal in a simple rule, sits in an initial sequent, or if
    /// `gamma` violates a context restriction on the path.
    pub fn substitute_ancestors(
        &self,
        node: &Proof,
        marking: &Marking,
        gamma: &Sequent,
    ) -> Result<Proof, EngineError> {
        self.substitute_rec(node, marking, gamma, &mut Vec::new())
    }

    fn substitute_rec(
        &self,
        node: &Proof,
        marking: &Marking,
        gamma: &Sequent,
        path: &mut Vec<usize>,
    ) -> Result<Proof, EngineError> {
        let k = marking.marked.len();
        if k == 0 && node.children.is_empty() {
            return Ok(node.clone());
        }
        let conclusion = node
            .conclusion
            .without_positions(&marking.marked)
            .union(&gamma.power(k));
        let rule = match &node.rule {
            Rule::Initial { .. } => {
                if k > 0 {
                    return Err(EngineError::Precondition(format!(
                        "marked occurrence inside an initial sequent at {}",
                        format_path(path)
                    )));
                }
                return Ok(node.clone());
            }
            Rule::Open => return Ok(Proof::open(conclusion)),
            Rule::Weakening { .. } => Rule::Weakening { map: None },
            Rule::Contraction { .. } => Rule::Contraction { map: None },
            Rule::Multicut { formula, p, q } => Rule::Multicut {
                formula: formula.clone(),
                p: *p,
                q: *q,
            },
            Rule::Simple {
                rule_id,
                principal,
                template,
            } => {
                let rule = self.calc.rule(rule_id)?;
                if k > 0 {
                    let ppos =
                        principal_position(&self.calc, node).map_err(EngineError::Internal)?;
                    if marking.is_marked(ppos) {
                        return Err(EngineError::Precondition(format!(
                            "marked occurrence is principal at {}",
                            format_path(path)
                        )));
                    }
                    for lf in gamma.items() {
                        if !rule.context.matches(lf) {
                            return Err(EngineError::Substitution {
                                path: format_path(path),
                                detail: format!(
                                    "{lf} is outside the context restriction of `{rule_id}`"
                                ),
                            });
                        }
                    }
                }
                Rule::Simple {
                    rule_id: rule_id.clone(),
                    principal: principal.clone(),
                    template: *template,
                }
            }
        };
        let mut children = Vec::with_capacity(node.children.len());
        for (i, (child, cm)) in node.children.iter().zip(&marking.children).enumerate() {
            path.push(i);
            children.push(self.substitute_rec(child, cm, gamma, path)?);
            path.pop();
        }
        Ok(Proof {
            conclusion,
            rule,
            children,
        })
    }

    /// Paste a structural witness (over slot atoms) onto hypothesis proofs
    /// that each carry the shared context `ctx`. Multicuts pick up a
    /// contraction to merge the duplicated context.
    pub(crate) fn paste_witness(
        &self,
        witness: &Proof,
        subst: &BTreeMap<String, Formula>,
        ctx: &Sequent,
        hyps: &[(Sequent, Proof)],
    ) -> Result<Proof, EngineError> {
        let conclusion: Sequent = witness
            .conclusion
            .items()
            .iter()
            .map(|lf| LabelledFormula::new(lf.label, lf.formula.substitute_map(subst)))
            .collect();
        let target = ctx.union(&conclusion);
        match &witness.rule {
            Rule::Open => {
                let (_, proof) =
                    hyps.iter()
                        .find(|(hyp, _)| *hyp == conclusion)
                        .ok_or_else(|| {
                            EngineError::Internal(format!("no hypothesis proof for {conclusion}"))
                        })?;
                if proof.conclusion != target {
                    return Err(EngineError::Internal(format!(
                        "hypothesis proof concludes {}, wanted {target}",
                        proof.conclusion
                    )));
                }
                Ok(proof.clone())
            }
            Rule::Weakening { .. } => {
                let child = self.paste_witness(&witness.children[0], subst, ctx, hyps)?;
                Ok(Proof::weaken_to(child, target))
            }
            Rule::Contraction { .. } => {
                let child = self.paste_witness(&witness.children[0], subst, ctx, hyps)?;
                Ok(Proof::contract_to(child, target))
            }
            Rule::Multicut { formula, p, q } => {
                let left = self.paste_witness(&witness.children[0], subst, ctx, hyps)?;
                let right = self.paste_witness(&witness.children[1], subst, ctx, hyps)?;
                let cut = Proof::mcut(left, right, formula.substitute_map(subst), *p, *q);
                Ok(Proof::contract_to(cut, target))
            }
            other => Err(EngineError::Internal(format!(
                "witness contains a non-structural rule {other:?}"
            ))),
        }
    }
}

/// One critical inference, seen from the reduction: its unmarked context,
/// the count of additional marked context occurrences, the template it
/// used, its premise subproofs, and the full subproof it roots.
#[derive(Debug, Clone)]
pub(crate) struct Critical {
    pub context: Sequent,
    pub extra: usize,
    pub template: usize,
    pub premises: Vec<Proof>,
    pub full: Proof,
}

impl Engine {
    /// Close the principal pair of a right-side critical (from the left cut
    /// premise) and a left-side critical (from the right premise) into a
    /// proof of their joined contexts, following the principal-reduction
    /// construction: each premise is closed by a rank-reduced multicut on
    /// the cut formula (or a weakening when the side has no residual
    /// ancestors), then the structural witness stitches the premises
    /// together with cuts on the auxiliary formulas.
    pub(crate) fn build_top_pair(
        &self,
        c: &Formula,
        left_crit: &Critical,
        right_crit: &Critical,
    ) -> Result<Proof, EngineError> {
        let conn = c
            .head()
            .expect("principal pair needs a compound cut formula");
        let left_rule = self.calc.left_rule(conn)?;
        let right_rule = self.calc.right_rule(conn)?;
        let ctx = right_crit.context.union(&left_crit.context);
        let mut hyps: Vec<(Sequent, Proof)> = Vec::new();
        for (n, slots) in left_rule.templates[left_crit.template]
            .premises
            .iter()
            .enumerate()
        {
            let aux = instantiate_aux(slots, c);
            let target = ctx.union(&aux);
            let closed = if left_crit.extra > 0 {
                let cut = Proof::mcut(
                    right_crit.full.clone(),
                    left_crit.premises[n].clone(),
                    c.clone(),
                    right_crit.extra + 1,
                    left_crit.extra,
                );
                Proof::weaken_to(cut, target.clone())
            } else {
                Proof::weaken_to(left_crit.premises[n].clone(), target.clone())
            };
            hyps.push((aux, closed));
        }
        for (m, slots) in right_rule.templates[right_crit.template]
            .premises
            .iter()
            .enumerate()
        {
            let aux = instantiate_aux(slots, c);
            let target = ctx.union(&aux);
            let closed = if right_crit.extra > 0 {
                let cut = Proof::mcut(
                    right_crit.premises[m].clone(),
                    left_crit.full.clone(),
                    c.clone(),
                    right_crit.extra,
                    left_crit.extra + 1,
                );
                Proof::weaken_to(cut, target.clone())
            } else {
                Proof::weaken_to(right_crit.premises[m].clone(), target.clone())
            };
            hyps.push((aux, closed));
        }
        let witness = self.witness(conn, left_crit.template, right_crit.template)?;
        let map: BTreeMap<String, Formula> = c
            .args()
            .iter()
            .enumerate()
            .map(|(i, arg)| (format!("a{}", i + 1), arg.clone()))
            .collect();
        self.paste_witness(&witness, &map, &ctx, &hyps)
    }

    pub(crate) fn critical_from_root(
        &self,
        sub: &Proof,
        ctx: Sequent,
        multiplicity: usize,
    ) -> Result<Critical, EngineError> {
        match &sub.rule {
            Rule::Simple { template, .. } => Ok(Critical {
                context: ctx,
                extra: multiplicity - 1,
                template: *template,
                premises: sub.children.clone(),
                full: sub.clone(),
            }),
            other => Err(EngineError::Internal(format!(
                "expected a principal simple rule, found {other:?}"
            ))),
        }
    }

    /// Principal reduction: the cut formula is principal immediately above
    /// on both sides, so the whole premises act as their own critical
    /// inferences and the pair closure concludes the endsequent directly.
    pub(crate) fn principal_reduction(&self, parts: &CutParts) -> Result<Proof, EngineError> {
        let right_crit = self.critical_from_root(&parts.gamma, parts.gamma_ctx.clone(), parts.p)?;
        let left_crit = self.critical_from_root(&parts.delta, parts.delta_ctx.clone(), parts.q)?;
        self.build_top_pair(&parts.formula, &left_crit, &right_crit)
    }

    /// Antecedent shift: no ancestor of the cut is principal in the last
    /// rule of the right premise; the left context is substituted through
    /// that rule and the cut moves above it, rank-reduced.
    pub(crate) fn antecedent_shift(&self, parts: &CutParts) -> Result<Proof, EngineError> {
        let c = &parts.formula;
        let lf = LabelledFormula::left(c.clone());
        let delta = &parts.delta;
        let marked = occurrence_positions(&delta.conclusion, &lf, parts.q);
        // Special case: the right premise ends in another multicut on C.
        if let Rule::Multicut { formula, q: s, .. } = &delta.rule {
            if formula == c {
                let maps = ancestry(&self.calc, delta).map_err(EngineError::Internal)?;
                let into_right = maps[1]
                    .iter()
                    .filter(|img| img.map_or(false, |j| marked.contains(&j)))
                    .count();
                let keep = delta.children[1].clone();
                let cut = Proof::mcut(
                    parts.gamma.clone(),
                    keep,
                    c.clone(),
                    parts.p,
                    s + into_right,
                );
                return Ok(Proof::weaken_to(cut, parts.endsequent.clone()));
            }
        }
        let maps = ancestry(&self.calc, delta).map_err(EngineError::Internal)?;
        // For a simple last rule, the substitution must respect its context
        // restriction; the classified substitution property guarantees it,
        // and it is re-checked here.
        if let Rule::Simple { rule_id, .. } = &delta.rule {
            let rule = self.calc.rule(rule_id)?;
            for x in parts.gamma_ctx.items() {
                if !rule.context.matches(x) {
                    return Err(EngineError::Substitution {
                        path: ".1".into(),
                        detail: format!("{x} is outside the context restriction of `{rule_id}`"),
                    });
                }
            }
            let ppos = principal_position(&self.calc, delta).map_err(EngineError::Internal)?;
            if marked.contains(&ppos) {
                return Err(EngineError::Precondition(
                    "antecedent shift with a principal ancestor".into(),
                ));
            }
        }
        let mut children = Vec::with_capacity(delta.children.len());
        for (i, child) in delta.children.iter().enumerate() {
            let child_marked: Vec<usize> = (0..maps[i].len())
                .filter(|&k| maps[i][k].map_or(false, |j| marked.contains(&j)))
                .collect();
            let q_i = child_marked.len();
            if q_i == 0 {
                children.push(child.clone());
            } else {
                let residue = child.conclusion.without_positions(&child_marked);
                let cut = Proof::mcut(parts.gamma.clone(), child.clone(), c.clone(), parts.p, q_i);
                let target = residue.union(&parts.gamma_ctx.power(q_i));
                children.push(Proof::weaken_to(cut, target));
            }
        }
        let rule = match &delta.rule {
            Rule::Weakening { .. } => Rule::Weakening { map: None },
            Rule::Contraction { .. } => Rule::Contraction { map: None },
            other => other.clone(),
        };
        let conclusion = delta
            .conclusion
            .without_positions(&marked)
            .union(&parts.gamma_ctx.power(parts.q));
        let shifted = Proof {
            conclusion,
            rule,
            children,
        };
        Ok(Proof::contract_to(shifted, parts.endsequent.clone()))
    }

    /// Renaming of variables: substitute the least subformula of the
    /// conclusion for the cut variable, making the cut analytic; initial
    /// sequents on the renamed variable get an axiom expansion.
    pub(crate) fn renaming(&self, pf: &Proof, parts: &CutParts) -> Result<Proof, EngineError> {
        let var = match &parts.formula {
            Formula::Var(x) => x.clone(),
            _ => unreachable!("renaming dispatched on a compound cut formula"),
        };
        let mut pool: Vec<Formula> = parts
            .endsequent
            .items()
            .iter()
            .flat_map(|lf| lf.formula.subformulas())
            .collect();
        pool.sort_by_key(|f| (f.size(), f.to_string()));
        pool.dedup();
        let replacement = pool.first().cloned().ok_or(EngineError::Inconsistency)?;
        self.substitute_proof(pf, &var, &replacement)
    }

    fn substitute_proof(&self, node: &Proof, var: &str, g: &Formula) -> Result<Proof, EngineError> {
        if let Rule::Initial { var: y } = &node.rule {
            if y == var {
                return self.expansion(g);
            }
            return Ok(node.clone());
        }
        let conclusion: Sequent = node
            .conclusion
            .items()
            .iter()
            .map(|lf| LabelledFormula::new(lf.label, lf.formula.substitute(var, g)))
            .collect();
        let rule = match &node.rule {
            Rule::Multicut { formula, p, q } => Rule::Multicut {
                formula: formula.substitute(var, g),
                p: *p,
                q: *q,
            },
            Rule::Simple {
                rule_id,
                principal,
                template,
            } => Rule::Simple {
                rule_id: rule_id.clone(),
                principal: principal.substitute(var, g),
                template: *template,
            },
            other => other.clone(),
        };
        let children = node
            .children
            .iter()
            .map(|c| self.substitute_proof(c, var, g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Proof {
            conclusion,
            rule,
            children,
        })
    }

    /// Reduction by inversion: both sides invertible; invert the extended
    /// premises and stitch them with the structural witness. Every new cut
    /// is on a proper subformula of the cut formula.
    pub(crate) fn reduction_by_inversion(&self, parts: &CutParts) -> Result<Proof, EngineError> {
        let c = &parts.formula;
        let conn = c.head().expect("inversion needs a compound cut formula");
        let rf = LabelledFormula::right(c.clone());
        let lf = LabelledFormula::left(c.clone());
        let gamma = Proof::weaken_to(
            Proof::contract_to(parts.gamma.clone(), parts.gamma_ctx.with(rf.clone())),
            parts.endsequent.with(rf.clone()),
        );
        let delta = Proof::weaken_to(
            Proof::contract_to(parts.delta.clone(), parts.delta_ctx.with(lf.clone())),
            parts.endsequent.with(lf.clone()),
        );
        let right_inverted = self.invert_formula(&gamma, &rf)?;
        let left_inverted = self.invert_formula(&delta, &lf)?;
        let left_rule = self.calc.left_rule(conn)?;
        let right_rule = self.calc.right_rule(conn)?;
        let mut hyps = Vec::new();
        for (n, slots) in left_rule.templates[0].premises.iter().enumerate() {
            hyps.push((instantiate_aux(slots, c), left_inverted[n].clone()));
        }
        for (m, slots) in right_rule.templates[0].premises.iter().enumerate() {
            hyps.push((instantiate_aux(slots, c), right_inverted[m].clone()));
        }
        let witness = self.witness(conn, 0, 0)?;
        let map: BTreeMap<String, Formula> = c
            .args()
            .iter()
            .enumerate()
            .map(|(i, arg)| (format!("a{}", i + 1), arg.clone()))
            .collect();
        let out = self.paste_witness(&witness, &map, &parts.endsequent, &hyps)?;
        Ok(out)
    }
}

/// Split a cut premise into its bottom part and critical inferences: the
/// lowermost nodes whose principal occurrence is a marked ancestor become
/// open leaves; everything above them is captured in `Critical` records in
/// leaf order.
pub(crate) fn split_critical(
    engine: &Engine,
    sub: &Proof,
    marking: &Marking,
    side: Label,
    conn: &str,
) -> Result<(Proof, Marking, Vec<Critical>), EngineError> {
    let mut crits = Vec::new();
    let (bottom, bottom_marking) = split_rec(engine, sub, marking, side, conn, &mut crits)?;
    return Ok((bottom, bottom_marking, crits));

    fn split_rec(
        engine: &Engine,
        node: &Proof,
        marking: &Marking,
        side: Label,
        conn: &str,
        crits: &mut Vec<Critical>,
    ) -> Result<(Proof, Marking), EngineError> {
        if let Rule::Simple {
            rule_id, template, ..
        } = &node.rule
        {
            let ppos = principal_position(&engine.calc, node).map_err(EngineError::Internal)?;
            if marking.is_marked(ppos) {
                let rule = engine.calc.rule(rule_id)?;
                if rule.side != side || rule.connective != conn {
                    return Err(EngineError::Internal(format!(
                        "marked principal under unexpected rule `{rule_id}`"
                    )));
                }
                crits.push(Critical {
                    context: node.conclusion.without_positions(&marking.marked),
                    extra: marking.marked.len() - 1,
                    template: *template,
                    premises: node.children.clone(),
                    full: node.clone(),
                });
                return Ok((
                    Proof::open(node.conclusion.clone()),
                    Marking {
                        marked: marking.marked.clone(),
                        children: Vec::new(),
                    },
                ));
            }
        }
        let mut children = Vec::with_capacity(node.children.len());
        let mut mark_children = Vec::with_capacity(node.children.len());
        for (child, cm) in node.children.iter().zip(&marking.children) {
            let (c, m) = split_rec(engine, child, cm, side, conn, crits)?;
            children.push(c);
            mark_children.push(m);
        }
        Ok((
            Proof {
                conclusion: node.conclusion.clone(),
                rule: node.rule.clone(),
                children,
            },
            Marking {
                marked: marking.marked.clone(),
                children: mark_children,
            },
        ))
    }
}

/// Replace the open leaves of a deduction, in left-to-right order, with
/// proofs supplied per leaf index; each must conclude exactly the leaf
/// sequent.
pub(crate) fn close_leaves(
    ded: &Proof,
    provider: &mut impl FnMut(usize, &Sequent) -> Result<Proof, EngineError>,
) -> Result<Proof, EngineError> {
    let mut index = 0;
    return rec(ded, provider, &mut index);

    fn rec(
        node: &Proof,
        provider: &mut impl FnMut(usize, &Sequent) -> Result<Proof, EngineError>,
        index: &mut usize,
    ) -> Result<Proof, EngineError> {
        if matches!(node.rule, Rule::Open) {
            let i = *index;
            *index += 1;
            let pf = provider(i, &node.conclusion)?;
            if pf.conclusion != node.conclusion {
                return Err(EngineError::Internal(format!(
                    "leaf {i} closed with {}, wanted {}",
                    pf.conclusion, node.conclusion
                )));
            }
            return Ok(pf);
        }
        let children = node
            .children
            .iter()
            .map(|c| rec(c, provider, index))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Proof {
            conclusion: node.conclusion.clone(),
            rule: node.rule.clone(),
            children,
        })
    }
}

/// Marked positions of the cut occurrences at the root of each premise.
pub(crate) fn premise_marking(
    engine: &Engine,
    parts: &CutParts,
    side: Label,
) -> Result<Marking, EngineError> {
    let (sub, lf, count) = match side {
        Label::R => (
            &parts.gamma,
            LabelledFormula::right(parts.formula.clone()),
            parts.p,
        ),
        Label::L => (
            &parts.delta,
            LabelledFormula::left(parts.formula.clone()),
            parts.q,
        ),
    };
    let marked = occurrence_positions(&sub.conclusion, &lf, count);
    mark_ancestors(&engine.calc, sub, marked).map_err(EngineError::Internal)
}
