//! DIMACS CNF reader and writer.
//!
//! Clause and literal order are preserved in both directions. The writer emits
//! one `p cnf` header and one `0`-terminated line per clause, nothing else.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, Cnf, CnfError, Literal};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Declared variable and clause counts must match the body.
    #[default]
    Strict,
    /// Tolerate count mismatches, a missing final `0`, and a trailing `%` section.
    Lenient,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: missing `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header: {msg}")]
    BadHeader { line: usize, msg: String },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: invalid token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("line {line}: {source}")]
    BadClause { line: usize, source: CnfError },
    #[error("line {line}: last clause not terminated by 0")]
    Unterminated { line: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MissingHeader { line }
            | ParseError::BadHeader { line, .. }
            | ParseError::DuplicateHeader { line }
            | ParseError::BadToken { line, .. }
            | ParseError::LiteralOutOfRange { line, .. }
            | ParseError::BadClause { line, .. }
            | ParseError::Unterminated { line } => Some(*line),
            ParseError::ClauseCount { .. } => None,
        }
    }
}

pub fn parse_dimacs(text: &str, mode: ParseMode) -> Result<Cnf, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut clause_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            if mode == ParseMode::Lenient {
                break;
            }
            return Err(ParseError::BadToken { line, token: "%".into() });
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::MissingHeader { line });
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| ParseError::BadToken { line, token: tok.to_string() })?;
            if lit == 0 {
                let clause = Clause::from_dimacs(&current).map_err(|source| ParseError::BadClause { line, source })?;
                clauses.push(clause);
                current.clear();
                continue;
            }
            if mode == ParseMode::Strict && lit.unsigned_abs() as usize > num_vars {
                return Err(ParseError::LiteralOutOfRange { line, lit, num_vars });
            }
            if current.is_empty() {
                clause_line = line;
            }
            current.push(lit);
        }
    }

    let Some((declared_vars, declared_clauses)) = header else {
        return Err(ParseError::MissingHeader { line: last_line.max(1) });
    };
    if !current.is_empty() {
        if mode == ParseMode::Strict {
            return Err(ParseError::Unterminated { line: clause_line });
        }
        let clause =
            Clause::from_dimacs(&current).map_err(|source| ParseError::BadClause { line: clause_line, source })?;
        clauses.push(clause);
    }
    if mode == ParseMode::Strict && clauses.len() != declared_clauses {
        return Err(ParseError::ClauseCount { declared: declared_clauses, found: clauses.len() });
    }
    let num_vars =
        clauses.iter().flat_map(|c| c.literals()).map(|l| l.var() as usize).max().unwrap_or(0).max(declared_vars);
    Ok(Cnf::from_checked(num_vars, clauses))
}

fn parse_header(line_text: &str, line: usize) -> Result<(usize, usize), ParseError> {
    let mut it = line_text.split_whitespace();
    let bad = |msg: &str| ParseError::BadHeader { line, msg: msg.to_string() };
    if it.next() != Some("p") {
        return Err(bad("expected `p`"));
    }
    if it.next() != Some("cnf") {
        return Err(bad("expected format `cnf`"));
    }
    let v = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("variable count"))?;
    let m = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("clause count"))?;
    if it.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    Ok((v, m))
}

pub fn serialize_dimacs(cnf: &Cnf) -> String {
    let mut out = String::with_capacity(16 + cnf.num_literals() * 4 + cnf.num_clauses() * 2);
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.num_clauses()).unwrap();
    for c in cnf.clauses() {
        for l in c.literals() {
            write!(out, "{} ", Literal::to_dimacs(*l)).unwrap();
        }
        out.push_str("0\n");
    }
    out
}
