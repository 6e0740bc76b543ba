//! Size-preserving left inversion, by induction on the node count: a
//! multicut on the inverted formula is dropped in favour of its right
//! premise, a principal occurrence returns the matching premise subproof,
//! and anything else pushes the inversion through the last rule via the
//! substitution lemma. Right inversion runs on the mirrored calculus.

use crate::calculus::instantiate_aux;
use crate::formula::Label;
use crate::formula::{Formula, LabelledFormula};
use crate::kernel::{ancestry, Proof, Rule};

use super::{Engine, EngineError};

impl Engine {
    /// One proof of `Γ, Λ_m` per premise of the unique left template, given
    /// a proof of `Γ, l:C`. Node counts never grow; cut-free inputs give
    /// cut-free outputs.
    pub(crate) fn invert_left_all(
        &self,
        pf: &Proof,
        c: &Formula,
    ) -> Result<Vec<Proof>, EngineError> {
        let conn = c.head().expect("inversion target must be compound");
        let rule = self.calc.left_rule(conn)?;
        if rule.templates.len() != 1 {
            return Err(EngineError::Precondition(format!(
                "`{}` does not have a unique template",
                rule.id
            )));
        }
        (0..rule.templates[0].premises.len())
            .map(|m| self.invert_left_m(pf, c, m))
            .collect()
    }

    fn invert_left_m(&self, pf: &Proof, c: &Formula, m: usize) -> Result<Proof, EngineError> {
        let target = LabelledFormula::left(c.clone());
        let pos =
            *pf.conclusion.positions_of(&target).first().ok_or_else(|| {
                EngineError::Internal(format!("no occurrence of {target} to invert"))
            })?;
        let conn = c.head().unwrap();
        let rule = self.calc.left_rule(conn)?;
        let aux = instantiate_aux(&rule.templates[0].premises[m], c);
        let result_target = pf.conclusion.without_positions(&[pos]).union(&aux);
        match &pf.rule {
            Rule::Initial { .. } => Err(EngineError::Internal(
                "compound formula inside an initial sequent".into(),
            )),
            Rule::Open => Err(EngineError::Precondition(
                "cannot invert an open deduction".into(),
            )),
            // Case: the last rule is a multicut on C itself. The premise
            // carrying the left cut occurrences absorbs the inversion and
            // the other premise is discarded.
            Rule::Multicut { formula, q, .. } if formula == c => {
                let maps = ancestry(&self.calc, pf).map_err(EngineError::Internal)?;
                let into_right = maps[1].iter().any(|img| *img == Some(pos));
                let k = q + usize::from(into_right);
                let mut cur = pf.children[1].clone();
                for _ in 0..k {
                    cur = self.invert_left_m(&cur, c, m)?;
                }
                // cur proves (right premise - k l:C occurrences), aux^k.
                let base = cur.conclusion.minus(&aux.power(k)).ok_or_else(|| {
                    EngineError::Internal("inversion lost auxiliary occurrences".into())
                })?;
                let contracted = Proof::contract_to(cur, base.union(&aux));
                Ok(Proof::weaken_to(contracted, result_target))
            }
            // Case: the target is principal. By template uniqueness the
            // premise subproof for index m is exactly the inversion.
            Rule::Simple {
                rule_id, principal, ..
            } if is_left_rule_for(self, rule_id, conn) && principal == c => {
                Ok(pf.children[m].clone())
            }
            // Case: push through the last rule.
            _ => {
                let maps = ancestry(&self.calc, pf).map_err(EngineError::Internal)?;
                if let Rule::Simple { rule_id, .. } = &pf.rule {
                    let rule = self.calc.rule(rule_id)?;
                    for lf in aux.items() {
                        if !rule.context.matches(lf) {
                            return Err(EngineError::Substitution {
                                path: ".".into(),
                                detail: format!(
                                    "auxiliary {lf} violates the context restriction of `{rule_id}`"
                                ),
                            });
                        }
                    }
                }
                let mut children = Vec::with_capacity(pf.children.len());
                for (i, child) in pf.children.iter().enumerate() {
                    let k_i = maps[i].iter().filter(|img| **img == Some(pos)).count();
                    let mut cur = child.clone();
                    for _ in 0..k_i {
                        cur = self.invert_left_m(&cur, c, m)?;
                    }
                    children.push(cur);
                }
                let rule = match &pf.rule {
                    Rule::Weakening { .. } => Rule::Weakening { map: None },
                    Rule::Contraction { .. } => Rule::Contraction { map: None },
                    other => other.clone(),
                };
                Ok(Proof {
                    conclusion: result_target,
                    rule,
                    children,
                })
            }
        }
    }
}

fn is_left_rule_for(engine: &Engine, rule_id: &str, conn: &str) -> bool {
    engine
        .calc
        .rule(rule_id)
        .map(|r| r.side == Label::L && r.connective == conn)
        .unwrap_or(false)
}
