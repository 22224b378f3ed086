//! CNF data model and evaluation semantics.
//!
//! Variables are 1-based. A [`Clause`] holds at most one literal per variable,
//! which is what makes the clause/variable matrix in [`dense`] well defined.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod dense;
pub mod dimacs;
pub mod render;

pub use dense::{DenseEncoding, Orientation};
pub use dimacs::{parse_dimacs, serialize_dimacs, ParseError, ParseMode};
pub use render::{render_image, Palette, Raster};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("variable {var} out of range 1..={num_vars}")]
    VariableOutOfRange { var: u32, num_vars: usize },
    #[error("variable {0} occurs more than once in a clause")]
    RepeatedVariable(u32),
    #[error("assignment has {got} values, formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("invalid dense cell value {value} at ({row}, {col})")]
    InvalidCell { row: usize, col: usize, value: i8 },
    #[error("dense grid has {got} cells, expected {rows}x{cols}")]
    GridShape { rows: usize, cols: usize, got: usize },
}

/// A variable or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    /// # Panics
    ///
    /// If `var == 0`.
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, positive }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, true)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, false)
    }

    /// Signed DIMACS form: `+v` or `-v`. Returns `None` for 0.
    pub fn from_dimacs(code: i64) -> Option<Self> {
        if code == 0 || code.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Literal::new(code.unsigned_abs() as u32, code > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    #[inline]
    pub fn var(self) -> u32 {
        self.var
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Cell value in the dense encoding: `+1` or `-1`.
    #[inline]
    pub fn sign(self) -> i8 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    #[must_use]
    pub fn negated(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }

    /// True when the literal is satisfied by `value` assigned to its variable.
    #[inline]
    pub fn agrees(self, value: bool) -> bool {
        self.positive == value
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

/// A disjunction of literals over pairwise-distinct variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(lits: Vec<Literal>) -> Result<Self, CnfError> {
        for (i, a) in lits.iter().enumerate() {
            if lits[..i].iter().any(|b| b.var == a.var) {
                return Err(CnfError::RepeatedVariable(a.var));
            }
        }
        Ok(Clause { lits })
    }

    /// Caller guarantees distinct variables (checked in debug builds).
    pub(crate) fn from_distinct(lits: Vec<Literal>) -> Self {
        debug_assert!(Clause::new(lits.clone()).is_ok());
        Clause { lits }
    }

    pub fn from_dimacs(codes: &[i64]) -> Result<Self, CnfError> {
        let lits = codes
            .iter()
            .map(|&c| Literal::from_dimacs(c).ok_or(CnfError::ZeroVariable))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.lits.iter().any(|l| l.var == var)
    }

    pub fn literal_of(&self, var: u32) -> Option<Literal> {
        self.lits.iter().copied().find(|l| l.var == var)
    }

    /// Satisfied by `alpha`? `alpha[j - 1]` is the value of variable `j`.
    #[inline]
    pub fn is_satisfied_by(&self, alpha: &[bool]) -> bool {
        self.lits.iter().any(|l| l.agrees(alpha[l.var as usize - 1]))
    }

    /// Literals sorted by variable index; useful for order-insensitive comparison.
    pub fn sorted(&self) -> Clause {
        let mut lits = self.lits.clone();
        lits.sort_by_key(|l| l.var);
        Clause { lits }
    }

    pub fn into_literals(self) -> Vec<Literal> {
        self.lits
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Conjunction of clauses over `num_vars` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for c in &clauses {
            for l in c.literals() {
                if l.var as usize > num_vars {
                    return Err(CnfError::VariableOutOfRange { var: l.var, num_vars });
                }
            }
        }
        Ok(Cnf { num_vars, clauses })
    }

    pub(crate) fn from_checked(num_vars: usize, clauses: Vec<Clause>) -> Self {
        debug_assert!(Cnf::new(num_vars, clauses.clone()).is_ok());
        Cnf { num_vars, clauses }
    }

    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses.iter().map(|c| Clause::from_dimacs(c)).collect::<Result<Vec<_>, _>>()?;
        Cnf::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// Conjoin `other`'s clauses after ours. Variable counts must match.
    pub fn conjoin(mut self, other: Cnf) -> Cnf {
        assert_eq!(self.num_vars, other.num_vars, "conjoined formulas must share variables");
        self.clauses.extend(other.clauses);
        self
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn count_positive(&self) -> usize {
        self.clauses.iter().flat_map(|c| c.literals()).filter(|l| l.is_positive()).count()
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Truth values indexed by variable: `values()[j - 1]` is variable `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of 1-based variable `var`.
    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(v: Vec<bool>) -> Self {
        Assignment(v)
    }
}

/// Evaluate `cnf` under `alpha`. The empty conjunction is true; an empty clause is false.
pub fn evaluate(cnf: &Cnf, alpha: &Assignment) -> Result<bool, CnfError> {
    if alpha.len() != cnf.num_vars {
        return Err(CnfError::AssignmentLength { expected: cnf.num_vars, got: alpha.len() });
    }
    Ok(cnf.clauses.iter().all(|c| c.is_satisfied_by(&alpha.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "UNSAT")]
    Unsat,
    #[serde(rename = "SAT")]
    Sat,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sat => "SAT",
            Label::Unsat => "UNSAT",
        }
    }

    /// Byte used by the packed dataset format.
    pub fn to_byte(self) -> u8 {
        match self {
            Label::Unsat => 0,
            Label::Sat => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Label::Unsat),
            1 => Some(Label::Sat),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "SAT" | "sat" | "1" => Ok(Label::Sat),
            "UNSAT" | "unsat" | "0" => Ok(Label::Unsat),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Certificate carried alongside a generated formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    Assignment(Assignment),
    Bloom(crate::unsat_gen::BloomTrace),
    /// Generated with trace recording switched off.
    Unrecorded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledProblem {
    pub cnf: Cnf,
    pub label: Label,
    pub witness: Witness,
}

impl LabeledProblem {
    /// For SAT problems, checks the witness assignment. UNSAT problems carry
    /// no cheap certificate check here; see [`crate::unsat_gen::BloomTrace::replay`].
    pub fn witness_holds(&self) -> Option<bool> {
        match (&self.label, &self.witness) {
            (Label::Sat, Witness::Assignment(a)) => Some(evaluate(&self.cnf, a).unwrap_or(false)),
            _ => None,
        }
    }
}
