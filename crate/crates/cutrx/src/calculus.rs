//! Declarative calculi: simple rule schemas with context restrictions.
//!
//! A rule schema pins down the usual two-dimensional figure "premises Γ,Λ_m over
//! conclusion Γ,C°" by listing, per premise, which immediate arguments of
//! the principal formula appear and with which label. The context
//! restriction is a pattern set over `{Any, Conn(c)}`, which covers every
//! calculus shipped here while keeping subsumption decidable by direct
//! pattern comparison.

use std::collections::BTreeMap;
use std::fmt;

use crate::formula::{
    is_valid_variable, Connective, ConnectiveTable, Formula, Label, LabelledFormula, ParseError,
    Sequent,
};
use crate::sexp::{self, Sexp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternShape {
    /// Any formula.
    Any,
    /// Any formula whose principal connective is the named one.
    Conn(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ContextPattern {
    pub label: Label,
    /// `None` is "any formula"; `Some(c)` requires principal connective `c`.
    pub conn: Option<String>,
}

impl ContextPattern {
    pub fn matches(&self, lf: &LabelledFormula) -> bool {
        self.label == lf.label
            && match &self.conn {
                None => true,
                Some(c) => lf.formula.head() == Some(c.as_str()),
            }
    }

    /// Pattern-wise coverage: `(lab, Conn c) ⊑ (lab, Any)` and reflexivity.
    fn covered_by(&self, other: &ContextPattern) -> bool {
        self.label == other.label && (other.conn.is_none() || self.conn == other.conn)
    }

    fn flipped(&self) -> ContextPattern {
        ContextPattern {
            label: self.label.flip(),
            conn: self.conn.clone(),
        }
    }
}

impl fmt::Display for ContextPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.conn {
            None => write!(f, "({} any)", self.label),
            Some(c) => write!(f, "({} conn {c})", self.label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextRestriction {
    Unrestricted,
    Patterns(Vec<ContextPattern>),
}

impl ContextRestriction {
    /// Normalize on construction: drop patterns covered by a wider one,
    /// dedup, sort, and collapse to `Unrestricted` when the set denotes all
    /// labelled formulas. This keeps pattern-wise subsumption exact.
    pub fn patterns(mut pats: Vec<ContextPattern>) -> ContextRestriction {
        pats.sort();
        pats.dedup();
        let any_l = pats.iter().any(|p| p.label == Label::L && p.conn.is_none());
        let any_r = pats.iter().any(|p| p.label == Label::R && p.conn.is_none());
        if any_l && any_r {
            return ContextRestriction::Unrestricted;
        }
        pats.retain(|p| {
            p.conn.is_none() || !(p.label == Label::L && any_l || p.label == Label::R && any_r)
        });
        ContextRestriction::Patterns(pats)
    }

    pub fn is_unrestricted(&self) -> bool {
        matches!(self, ContextRestriction::Unrestricted)
    }

    /// Is `lf` in the denoted set?
    pub fn matches(&self, lf: &LabelledFormula) -> bool {
        match self {
            ContextRestriction::Unrestricted => true,
            ContextRestriction::Patterns(pats) => pats.iter().any(|p| p.matches(lf)),
        }
    }

    /// Set containment of denotations, decided pattern-wise.
    pub fn contained_in(&self, other: &ContextRestriction) -> bool {
        match (self, other) {
            (_, ContextRestriction::Unrestricted) => true,
            (ContextRestriction::Unrestricted, ContextRestriction::Patterns(_)) => false,
            (ContextRestriction::Patterns(a), ContextRestriction::Patterns(b)) => {
                a.iter().all(|p| b.iter().any(|q| p.covered_by(q)))
            }
        }
    }

    /// Does some formula with the given label and principal connective lie
    /// in the denoted set?
    pub fn admits_principal(&self, label: Label, conn: &str) -> bool {
        match self {
            ContextRestriction::Unrestricted => true,
            ContextRestriction::Patterns(pats) => pats
                .iter()
                .any(|p| p.label == label && p.conn.as_deref().map_or(true, |c| c == conn)),
        }
    }

    /// Does some variable with the given label lie in the denoted set?
    pub fn admits_variable(&self, label: Label) -> bool {
        match self {
            ContextRestriction::Unrestricted => true,
            ContextRestriction::Patterns(pats) => {
                pats.iter().any(|p| p.label == label && p.conn.is_none())
            }
        }
    }

    /// The label-inverted set.
    pub fn flipped(&self) -> ContextRestriction {
        match self {
            ContextRestriction::Unrestricted => ContextRestriction::Unrestricted,
            ContextRestriction::Patterns(pats) => {
                ContextRestriction::patterns(pats.iter().map(ContextPattern::flipped).collect())
            }
        }
    }

    fn from_sexp(s: &Sexp, table: &ConnectiveTable) -> Result<ContextRestriction, ParseError> {
        let items = s
            .tagged("context")
            .ok_or_else(|| ParseError::Malformed(format!("expected `(context ...)`, got `{s}`")))?;
        if items.len() == 1 && items[0].atom() == Some("any") {
            return Ok(ContextRestriction::Unrestricted);
        }
        if items.is_empty() {
            return Err(ParseError::Malformed("empty context restriction".into()));
        }
        let mut pats = Vec::new();
        for item in items {
            let parts = item
                .list()
                .ok_or_else(|| ParseError::Malformed(format!("bad context pattern `{item}`")))?;
            let label = Label::parse(
                parts
                    .first()
                    .and_then(Sexp::atom)
                    .ok_or_else(|| ParseError::Malformed(format!("bad pattern `{item}`")))?,
            )?;
            match parts.len() {
                2 if parts[1].atom() == Some("any") => {
                    pats.push(ContextPattern { label, conn: None })
                }
                3 if parts[1].atom() == Some("conn") => {
                    let name = parts[2]
                        .atom()
                        .ok_or_else(|| ParseError::Malformed(format!("bad pattern `{item}`")))?;
                    if !table.contains_key(name) {
                        return Err(ParseError::UnknownConnective(name.to_string()));
                    }
                    pats.push(ContextPattern {
                        label,
                        conn: Some(name.to_string()),
                    });
                }
                _ => return Err(ParseError::Malformed(format!("bad pattern `{item}`"))),
            }
        }
        Ok(ContextRestriction::patterns(pats))
    }
}

impl fmt::Display for ContextRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextRestriction::Unrestricted => write!(f, "(context any)"),
            ContextRestriction::Patterns(pats) => {
                write!(f, "(context")?;
                for p in pats {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One auxiliary slot: the argument at `arg` (1-based) carries `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseSlot {
    pub label: Label,
    pub arg: usize,
}

/// One alternative of a rule: the list of premises, each a multiset of slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseTemplate {
    pub premises: Vec<Vec<PremiseSlot>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub id: String,
    pub side: Label,
    pub connective: String,
    pub templates: Vec<PremiseTemplate>,
    pub context: ContextRestriction,
}

impl RuleSchema {
    /// The labelled principal formula this rule introduces.
    pub fn principal(&self, formula: Formula) -> LabelledFormula {
        LabelledFormula::new(self.side, formula)
    }

    fn mirrored(&self) -> RuleSchema {
        RuleSchema {
            id: self.id.clone(),
            side: self.side.flip(),
            connective: self.connective.clone(),
            templates: self
                .templates
                .iter()
                .map(|t| PremiseTemplate {
                    premises: t
                        .premises
                        .iter()
                        .map(|p| {
                            p.iter()
                                .map(|s| PremiseSlot {
                                    label: s.label.flip(),
                                    arg: s.arg,
                                })
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            context: self.context.flipped(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Assumed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalculusError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("duplicate connective `{0}`")]
    DuplicateConnective(String),
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("connective `{conn}` has no {side} rule")]
    MissingRule { conn: String, side: String },
    #[error("connective `{conn}` has more than one {side} rule")]
    ExtraRule { conn: String, side: String },
    #[error("rule `{rule}` refers to argument {arg} of `{conn}` (arity {arity})")]
    BadArgIndex {
        rule: String,
        conn: String,
        arg: usize,
        arity: usize,
    },
    #[error("rule `{0}` has no templates")]
    NoTemplates(String),
    #[error("unknown rule id `{0}`")]
    UnknownRule(String),
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calculus {
    pub name: String,
    pub connectives: Vec<Connective>,
    pub rules: Vec<RuleSchema>,
    pub consistency: Consistency,
    table: ConnectiveTable,
    rule_ids: BTreeMap<String, usize>,
    left_of: BTreeMap<String, usize>,
    right_of: BTreeMap<String, usize>,
}

impl Calculus {
    pub fn build(
        name: String,
        connectives: Vec<Connective>,
        rules: Vec<RuleSchema>,
        consistency: Consistency,
    ) -> Result<Calculus, CalculusError> {
        let mut table = ConnectiveTable::new();
        for c in &connectives {
            if table.insert(c.name.clone(), c.arity).is_some() {
                return Err(CalculusError::DuplicateConnective(c.name.clone()));
            }
        }
        let mut rule_ids = BTreeMap::new();
        let mut left_of = BTreeMap::new();
        let mut right_of = BTreeMap::new();
        for (idx, rule) in rules.iter().enumerate() {
            if rule_ids.insert(rule.id.clone(), idx).is_some() {
                return Err(CalculusError::DuplicateRule(rule.id.clone()));
            }
            let arity = *table
                .get(&rule.connective)
                .ok_or_else(|| CalculusError::UnknownConnective(rule.connective.clone()))?;
            if rule.templates.is_empty() {
                return Err(CalculusError::NoTemplates(rule.id.clone()));
            }
            for template in &rule.templates {
                for premise in &template.premises {
                    for slot in premise {
                        if slot.arg == 0 || slot.arg > arity {
                            return Err(CalculusError::BadArgIndex {
                                rule: rule.id.clone(),
                                conn: rule.connective.clone(),
                                arg: slot.arg,
                                arity,
                            });
                        }
                    }
                }
            }
            let slot_map = match rule.side {
                Label::L => &mut left_of,
                Label::R => &mut right_of,
            };
            if slot_map.insert(rule.connective.clone(), idx).is_some() {
                return Err(CalculusError::ExtraRule {
                    conn: rule.connective.clone(),
                    side: if rule.side == Label::L {
                        "left"
                    } else {
                        "right"
                    }
                    .into(),
                });
            }
        }
        for c in &connectives {
            if !left_of.contains_key(&c.name) {
                return Err(CalculusError::MissingRule {
                    conn: c.name.clone(),
                    side: "left".into(),
                });
            }
            if !right_of.contains_key(&c.name) {
                return Err(CalculusError::MissingRule {
                    conn: c.name.clone(),
                    side: "right".into(),
                });
            }
        }
        Ok(Calculus {
            name,
            connectives,
            rules,
            consistency,
            table,
            rule_ids,
            left_of,
            right_of,
        })
    }

    pub fn table(&self) -> &ConnectiveTable {
        &self.table
    }

    pub fn is_connective(&self, name: &str) -> bool {
        self.table.contains_key(name)
    }

    pub fn rule(&self, id: &str) -> Result<&RuleSchema, CalculusError> {
        self.rule_ids
            .get(id)
            .map(|&i| &self.rules[i])
            .ok_or_else(|| CalculusError::UnknownRule(id.to_string()))
    }

    pub fn rule_for(&self, conn: &str, side: Label) -> Result<&RuleSchema, CalculusError> {
        let map = match side {
            Label::L => &self.left_of,
            Label::R => &self.right_of,
        };
        map.get(conn)
            .map(|&i| &self.rules[i])
            .ok_or_else(|| CalculusError::UnknownConnective(conn.to_string()))
    }

    pub fn left_rule(&self, conn: &str) -> Result<&RuleSchema, CalculusError> {
        self.rule_for(conn, Label::L)
    }

    pub fn right_rule(&self, conn: &str) -> Result<&RuleSchema, CalculusError> {
        self.rule_for(conn, Label::R)
    }

    /// The calculus with every label inverted: left rules become right rules
    /// with flipped contexts and slots, under the same ids. Substitution
    /// properties mirror accordingly, which lets the right-handed engine
    /// transformations reuse the left-handed ones.
    pub fn mirror(&self) -> Calculus {
        Calculus::build(
            self.name.clone(),
            self.connectives.clone(),
            self.rules.iter().map(RuleSchema::mirrored).collect(),
            self.consistency,
        )
        .expect("mirror of a valid calculus is valid")
    }

    pub fn parse(text: &str) -> Result<Calculus, CalculusError> {
        let s = sexp::parse_single(text).map_err(ParseError::from)?;
        Calculus::from_sexp(&s)
    }

    pub fn from_sexp(s: &Sexp) -> Result<Calculus, CalculusError> {
        let items = s
            .tagged("calculus")
            .ok_or_else(|| ParseError::Malformed(format!("expected `(calculus ...)`")))?;
        if items.len() < 3 {
            return Err(ParseError::Malformed(
                "calculus needs name, connectives, consistency".into(),
            )
            .into());
        }
        let name = items[0]
            .atom()
            .ok_or_else(|| ParseError::Malformed("calculus name must be an atom".into()))?
            .to_string();
        let conn_items = items[1]
            .tagged("connectives")
            .ok_or_else(|| ParseError::Malformed("expected `(connectives ...)`".into()))?;
        let mut connectives = Vec::new();
        for c in conn_items {
            let parts = c
                .list()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| ParseError::Malformed(format!("bad connective `{c}`")))?;
            let cname = parts[0]
                .atom()
                .ok_or_else(|| ParseError::Malformed(format!("bad connective `{c}`")))?;
            if !is_valid_variable(cname) {
                return Err(ParseError::Malformed(format!(
                    "connective name `{cname}` must be a lowercase identifier"
                ))
                .into());
            }
            let arity: usize = parts[1]
                .atom()
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| ParseError::Malformed(format!("bad arity in `{c}`")))?;
            connectives.push(Connective {
                name: cname.to_string(),
                arity,
            });
        }
        let mut table = ConnectiveTable::new();
        for c in &connectives {
            table.insert(c.name.clone(), c.arity);
        }
        let cons_items = items[2]
            .tagged("consistency")
            .ok_or_else(|| ParseError::Malformed("expected `(consistency ...)`".into()))?;
        let consistency = match cons_items.first().and_then(Sexp::atom) {
            Some("assumed") => Consistency::Assumed,
            Some("unknown") => Consistency::Unknown,
            _ => {
                return Err(
                    ParseError::Malformed("consistency must be assumed|unknown".into()).into(),
                )
            }
        };
        let mut rules = Vec::new();
        for r in &items[3..] {
            rules.push(parse_rule(r, &table)?);
        }
        Calculus::build(name, connectives, rules, consistency)
    }
}

fn parse_rule(s: &Sexp, table: &ConnectiveTable) -> Result<RuleSchema, CalculusError> {
    let items = s
        .tagged("rule")
        .ok_or_else(|| ParseError::Malformed(format!("expected `(rule ...)`, got `{s}`")))?;
    if items.len() != 5 {
        return Err(ParseError::Malformed(format!("rule needs 5 fields: `{s}`")).into());
    }
    let id = items[0]
        .atom()
        .ok_or_else(|| ParseError::Malformed("rule id must be an atom".into()))?
        .to_string();
    let side = match items[1].atom() {
        Some("left") => Label::L,
        Some("right") => Label::R,
        _ => {
            return Err(
                ParseError::Malformed(format!("rule `{id}`: side must be left|right")).into(),
            )
        }
    };
    let connective = items[2]
        .atom()
        .ok_or_else(|| ParseError::Malformed(format!("rule `{id}`: bad connective")))?
        .to_string();
    if !table.contains_key(&connective) {
        return Err(CalculusError::UnknownConnective(connective));
    }
    let context = ContextRestriction::from_sexp(&items[3], table)?;
    let template_items = items[4]
        .tagged("templates")
        .ok_or_else(|| ParseError::Malformed(format!("rule `{id}`: expected `(templates ...)`")))?;
    if template_items.is_empty() {
        return Err(CalculusError::NoTemplates(id));
    }
    let mut templates = Vec::new();
    for t in template_items {
        let premise_items = t.tagged("premises").ok_or_else(|| {
            ParseError::Malformed(format!("rule `{id}`: expected `(premises ...)`"))
        })?;
        let mut premises = Vec::new();
        for p in premise_items {
            let slot_items = p.tagged("premise").ok_or_else(|| {
                ParseError::Malformed(format!("rule `{id}`: expected `(premise ...)`"))
            })?;
            let mut slots = Vec::new();
            for slot in slot_items {
                let parts = slot
                    .list()
                    .filter(|p| p.len() == 3 && p[1].atom() == Some("arg"))
                    .ok_or_else(|| {
                        ParseError::Malformed(format!("rule `{id}`: bad slot `{slot}`"))
                    })?;
                let label = Label::parse(parts[0].atom().unwrap_or("")).map_err(|_| {
                    ParseError::Malformed(format!("rule `{id}`: bad slot `{slot}`"))
                })?;
                let arg: usize = parts[2]
                    .atom()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| {
                        ParseError::Malformed(format!("rule `{id}`: bad slot `{slot}`"))
                    })?;
                slots.push(PremiseSlot { label, arg });
            }
            premises.push(slots);
        }
        templates.push(PremiseTemplate { premises });
    }
    Ok(RuleSchema {
        id,
        side,
        connective,
        templates,
        context,
    })
}

/// A fully instantiated application of a simple rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule_id: String,
    pub template_idx: usize,
    pub principal: LabelledFormula,
    pub context: Sequent,
    pub premises: Vec<Sequent>,
    pub conclusion: Sequent,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstantiateError {
    #[error("rule `{rule}` is for `{expected}` but principal formula has head `{got}`")]
    ConnectiveMismatch {
        rule: String,
        expected: String,
        got: String,
    },
    #[error("rule `{rule}` has no template {idx}")]
    BadTemplate { rule: String, idx: usize },
    #[error("context occurrence {position} `{formula}` violates the restriction of `{rule}`")]
    ContextViolation {
        rule: String,
        position: usize,
        formula: String,
    },
}

/// Build the instance of `rule` on `principal` with the given context.
///
/// Premises lay the context occurrences first (in order) and append the
/// auxiliary formulas; the conclusion appends the principal formula.
pub fn instantiate(
    rule: &RuleSchema,
    principal: &Formula,
    template_idx: usize,
    context: &Sequent,
) -> Result<RuleInstance, InstantiateError> {
    let got = principal.head().unwrap_or("variable");
    if got != rule.connective {
        return Err(InstantiateError::ConnectiveMismatch {
            rule: rule.id.clone(),
            expected: rule.connective.clone(),
            got: got.to_string(),
        });
    }
    let template =
        rule.templates
            .get(template_idx)
            .ok_or_else(|| InstantiateError::BadTemplate {
                rule: rule.id.clone(),
                idx: template_idx,
            })?;
    for (position, lf) in context.items().iter().enumerate() {
        if !rule.context.matches(lf) {
            return Err(InstantiateError::ContextViolation {
                rule: rule.id.clone(),
                position,
                formula: lf.to_string(),
            });
        }
    }
    let args = principal.args();
    let premises = template
        .premises
        .iter()
        .map(|slots| {
            let aux: Sequent = slots
                .iter()
                .map(|s| LabelledFormula::new(s.label, args[s.arg - 1].clone()))
                .collect();
            context.union(&aux)
        })
        .collect();
    let principal_lf = rule.principal(principal.clone());
    Ok(RuleInstance {
        rule_id: rule.id.clone(),
        template_idx,
        principal: principal_lf.clone(),
        context: context.clone(),
        premises,
        conclusion: context.with(principal_lf),
    })
}

/// Instantiate a premise template on a concrete principal formula.
pub fn instantiate_aux(slots: &[PremiseSlot], principal: &Formula) -> Sequent {
    let args = principal.args();
    slots
        .iter()
        .map(|s| LabelledFormula::new(s.label, args[s.arg - 1].clone()))
        .collect()
}
