//! Formulas, labelled formulas and sequents.
//!
//! A sequent is stored as an ordered list of labelled formulas; the list
//! position of an entry is its occurrence identity, which is what ancestor
//! tracking hangs on to. Equality (and hashing) is multiset equality, so
//! proofs may permute occurrences freely.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::sexp::{self, Sexp};

/// A connective declaration: a name together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connective {
    pub name: String,
    pub arity: usize,
}

/// Connective name -> arity, for parsing and validation.
pub type ConnectiveTable = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    App(String, Vec<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
    #[error("connective `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid variable name `{0}`")]
    BadVariable(String),
    #[error("{0}")]
    Malformed(String),
}

impl From<sexp::SexpError> for ParseError {
    fn from(e: sexp::SexpError) -> Self {
        ParseError::Syntax(e.to_string())
    }
}

pub fn is_valid_variable(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn app(conn: impl Into<String>, args: Vec<Formula>) -> Formula {
        Formula::App(conn.into(), args)
    }

    /// The principal (outermost) connective, if any.
    pub fn head(&self) -> Option<&str> {
        match self {
            Formula::Var(_) => None,
            Formula::App(c, _) => Some(c),
        }
    }

    pub fn args(&self) -> &[Formula] {
        match self {
            Formula::Var(_) => &[],
            Formula::App(_, args) => args,
        }
    }

    /// Number of symbols: every variable and connective occurrence counts 1.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) => 1,
            Formula::App(_, args) => 1 + args.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// The reflexive subformula set.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.insert(self.clone()) {
            for arg in self.args() {
                arg.collect_subformulas(out);
            }
        }
    }

    pub fn proper_subformulas(&self) -> BTreeSet<Formula> {
        let mut out = self.subformulas();
        out.remove(self);
        out
    }

    pub fn is_subformula_of(&self, other: &Formula) -> bool {
        if self == other {
            return true;
        }
        other.args().iter().any(|arg| self.is_subformula_of(arg))
    }

    pub fn is_proper_subformula_of(&self, other: &Formula) -> bool {
        self != other && self.is_subformula_of(other)
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self {
            Formula::Var(x) => x == var,
            Formula::App(_, args) => args.iter().any(|a| a.contains_var(var)),
        }
    }

    /// Replace every occurrence of `var` by `g`.
    pub fn substitute(&self, var: &str, g: &Formula) -> Formula {
        match self {
            Formula::Var(x) if x == var => g.clone(),
            Formula::Var(_) => self.clone(),
            Formula::App(c, args) => Formula::App(
                c.clone(),
                args.iter().map(|a| a.substitute(var, g)).collect(),
            ),
        }
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_map(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            Formula::App(c, args) => Formula::App(
                c.clone(),
                args.iter().map(|a| a.substitute_map(map)).collect(),
            ),
        }
    }

    pub fn parse(text: &str, table: &ConnectiveTable) -> Result<Formula, ParseError> {
        Formula::from_sexp(&sexp::parse_single(text)?, table)
    }

    pub fn from_sexp(s: &Sexp, table: &ConnectiveTable) -> Result<Formula, ParseError> {
        match s {
            Sexp::Atom(a) => {
                if let Some(&arity) = table.get(a) {
                    if arity != 0 {
                        return Err(ParseError::Arity {
                            name: a.clone(),
                            expected: arity,
                            got: 0,
                        });
                    }
                    Ok(Formula::App(a.clone(), Vec::new()))
                } else if is_valid_variable(a) {
                    Ok(Formula::Var(a.clone()))
                } else {
                    Err(ParseError::BadVariable(a.clone()))
                }
            }
            Sexp::List(items) => {
                let head = items
                    .first()
                    .and_then(Sexp::atom)
                    .ok_or_else(|| ParseError::Malformed(format!("bad formula `{s}`")))?;
                let &arity = table
                    .get(head)
                    .ok_or_else(|| ParseError::UnknownConnective(head.to_string()))?;
                let args = &items[1..];
                if args.len() != arity {
                    return Err(ParseError::Arity {
                        name: head.to_string(),
                        expected: arity,
                        got: args.len(),
                    });
                }
                Ok(Formula::App(
                    head.to_string(),
                    args.iter()
                        .map(|a| Formula::from_sexp(a, table))
                        .collect::<Result<_, _>>()?,
                ))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(x) => write!(f, "{x}"),
            Formula::App(c, args) if args.is_empty() => write!(f, "{c}"),
            Formula::App(c, args) => {
                write!(f, "({c}")?;
                for arg in args {
                    write!(f, " {arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    L,
    R,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::L => Label::R,
            Label::R => Label::L,
        }
    }

    pub fn parse(text: &str) -> Result<Label, ParseError> {
        match text {
            "l" => Ok(Label::L),
            "r" => Ok(Label::R),
            other => Err(ParseError::Malformed(format!("bad label `{other}`"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::L => write!(f, "l"),
            Label::R => write!(f, "r"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledFormula {
    pub label: Label,
    pub formula: Formula,
}

impl LabelledFormula {
    pub fn new(label: Label, formula: Formula) -> LabelledFormula {
        LabelledFormula { label, formula }
    }

    pub fn left(formula: Formula) -> LabelledFormula {
        LabelledFormula::new(Label::L, formula)
    }

    pub fn right(formula: Formula) -> LabelledFormula {
        LabelledFormula::new(Label::R, formula)
    }

    /// Invert the label, keeping the formula.
    pub fn flip(&self) -> LabelledFormula {
        LabelledFormula::new(self.label.flip(), self.formula.clone())
    }

    pub fn from_sexp(s: &Sexp, table: &ConnectiveTable) -> Result<LabelledFormula, ParseError> {
        let items = s
            .list()
            .filter(|items| items.len() == 2)
            .ok_or_else(|| ParseError::Malformed(format!("bad labelled formula `{s}`")))?;
        let label = Label::parse(
            items[0]
                .atom()
                .ok_or_else(|| ParseError::Malformed(format!("bad label in `{s}`")))?,
        )?;
        Ok(LabelledFormula::new(
            label,
            Formula::from_sexp(&items[1], table)?,
        ))
    }
}

impl fmt::Display for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.label, self.formula)
    }
}

/// Invert the labels of every element of a set.
pub fn flip_set(set: &BTreeSet<LabelledFormula>) -> BTreeSet<LabelledFormula> {
    set.iter().map(LabelledFormula::flip).collect()
}

/// An occurrence-indexed multiset of labelled formulas.
///
/// Positions in the underlying vector identify occurrences; equality and
/// hashing are order-insensitive.
#[derive(Debug, Clone, Eq)]
pub struct Sequent(Vec<LabelledFormula>);

impl Sequent {
    pub fn new(items: Vec<LabelledFormula>) -> Sequent {
        Sequent(items)
    }

    pub fn empty() -> Sequent {
        Sequent(Vec::new())
    }

    pub fn items(&self) -> &[LabelledFormula] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, pos: usize) -> &LabelledFormula {
        &self.0[pos]
    }

    /// Multiset union, keeping `self`'s occurrences first.
    pub fn union(&self, other: &Sequent) -> Sequent {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        Sequent(items)
    }

    pub fn with(&self, lf: LabelledFormula) -> Sequent {
        let mut items = self.0.clone();
        items.push(lf);
        Sequent(items)
    }

    /// The p-fold union of `self` with itself; `power(0)` is empty.
    pub fn power(&self, p: usize) -> Sequent {
        let mut items = Vec::with_capacity(self.0.len() * p);
        for _ in 0..p {
            items.extend(self.0.iter().cloned());
        }
        Sequent(items)
    }

    pub fn count(&self, lf: &LabelledFormula) -> usize {
        self.0.iter().filter(|x| *x == lf).count()
    }

    pub fn positions_of(&self, lf: &LabelledFormula) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| &self.0[i] == lf).collect()
    }

    /// Elements occurring at least once, in first-occurrence order.
    pub fn support(&self) -> Vec<LabelledFormula> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for lf in &self.0 {
            if seen.insert(lf.clone()) {
                out.push(lf.clone());
            }
        }
        out
    }

    pub fn support_set(&self) -> BTreeSet<LabelledFormula> {
        self.0.iter().cloned().collect()
    }

    pub fn without_positions(&self, positions: &[usize]) -> Sequent {
        let drop: BTreeSet<usize> = positions.iter().copied().collect();
        Sequent(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, lf)| lf.clone())
                .collect(),
        )
    }

    /// Multiset difference; `None` if `other` is not a sub-multiset.
    pub fn minus(&self, other: &Sequent) -> Option<Sequent> {
        let mut remaining = self.0.clone();
        for lf in &other.0 {
            let pos = remaining.iter().position(|x| x == lf)?;
            remaining.remove(pos);
        }
        Some(Sequent(remaining))
    }

    pub fn is_superset_of(&self, other: &Sequent) -> bool {
        self.minus(other).is_some()
    }

    /// True iff `self` is a contraction of `premise`: same support, and no
    /// element occurs more often in `self` than in `premise`.
    pub fn is_contraction_of(&self, premise: &Sequent) -> bool {
        self.support_set() == premise.support_set()
            && self
                .support()
                .iter()
                .all(|lf| self.count(lf) <= premise.count(lf))
    }

    pub fn canonical(&self) -> Vec<LabelledFormula> {
        let mut items = self.0.clone();
        items.sort();
        items
    }

    pub fn parse(text: &str, table: &ConnectiveTable) -> Result<Sequent, ParseError> {
        Sequent::from_sexp(&sexp::parse_single(text)?, table)
    }

    pub fn from_sexp(s: &Sexp, table: &ConnectiveTable) -> Result<Sequent, ParseError> {
        let items = s
            .tagged("seq")
            .ok_or_else(|| ParseError::Malformed(format!("expected `(seq ...)`, got `{s}`")))?;
        Ok(Sequent(
            items
                .iter()
                .map(|i| LabelledFormula::from_sexp(i, table))
                .collect::<Result<_, _>>()?,
        ))
    }
}

impl PartialEq for Sequent {
    fn eq(&self, other: &Sequent) -> bool {
        self.0.len() == other.0.len() && self.canonical() == other.canonical()
    }
}

impl std::hash::Hash for Sequent {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(seq")?;
        for lf in &self.0 {
            write!(f, " {lf}")?;
        }
        write!(f, ")")
    }
}

impl FromIterator<LabelledFormula> for Sequent {
    fn from_iter<T: IntoIterator<Item = LabelledFormula>>(iter: T) -> Sequent {
        Sequent(iter.into_iter().collect())
    }
}
