//! Exhaustive ground truth: satisfiability, implication, resolution steps, and
//! recovering an assignment from a yes/no satisfiability oracle.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, Cnf, Literal};

pub const MAX_BRUTE_FORCE_VARS: usize = 26;
pub const MAX_IMPLICATION_VARS: usize = 20;

/// Blocks of 64 assignments scanned sequentially before handing out to rayon.
const PAR_BLOCKS: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceeds the exhaustive-search cap of {cap}")]
    Capacity { vars: usize, cap: usize },
    #[error("pivot x{0} does not occur positively in one clause and negatively in the other")]
    PivotNotComplementary(u32),
    #[error("oracle rejects the input formula")]
    InputRejected,
    #[error("oracle is inconsistent: both branches of x{var} are unsatisfiable")]
    OracleFault { var: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Satisfiable(Assignment),
    Unsatisfiable,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleResult::Satisfiable(_))
    }
}

/// Lane masks for the six low-order bits of a 64-assignment block.
const LANES: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// A clause split into its in-block part and its block-index part.
///
/// Assignment number `a` sets `x_j` to bit `v - j` of `a`, so counting upward
/// walks assignments in lexicographic order with `x1` most significant. The
/// low six bits are the lane within a block, the rest are the block index.
struct Compiled {
    low: u64,
    high_pos: u64,
    high_neg: u64,
}

struct Table {
    clauses: Vec<Compiled>,
    blocks: u64,
    valid: u64,
}

impl Table {
    fn new(f: &Cnf, v: usize) -> Self {
        let low_vars = v.min(6);
        let clauses = f
            .clauses()
            .iter()
            .map(|c| {
                let mut k = Compiled { low: 0, high_pos: 0, high_neg: 0 };
                for l in c.literals() {
                    let bit = v - l.var() as usize;
                    if bit < 6 {
                        k.low |= if l.is_positive() { LANES[bit] } else { !LANES[bit] };
                    } else if l.is_positive() {
                        k.high_pos |= 1 << (bit - 6);
                    } else {
                        k.high_neg |= 1 << (bit - 6);
                    }
                }
                k
            })
            .collect();
        let blocks = 1u64 << (v - low_vars);
        let valid = if low_vars == 6 { u64::MAX } else { (1u64 << (1 << low_vars)) - 1 };
        Table { clauses, blocks, valid }
    }

    /// Bit `lane` is set iff assignment `block * 64 + lane` satisfies every clause.
    fn word(&self, block: u64) -> u64 {
        let mut w = self.valid;
        for c in &self.clauses {
            if block & c.high_pos != 0 || !block & c.high_neg != 0 {
                continue;
            }
            w &= c.low;
            if w == 0 {
                break;
            }
        }
        w
    }
}

fn assignment_from_index(a: u64, v: usize) -> Assignment {
    Assignment::new((1..=v).map(|j| a >> (v - j) & 1 == 1).collect())
}

fn first_block<F: Fn(u64) -> bool + Sync>(blocks: u64, hit: F) -> Option<u64> {
    if blocks <= PAR_BLOCKS {
        (0..blocks).find(|&b| hit(b))
    } else {
        (0..blocks).into_par_iter().find_first(|&b| hit(b))
    }
}

/// Scans all `2^v` assignments and returns the lexicographically first model.
pub fn brute_force_sat(f: &Cnf) -> Result<OracleResult, OracleError> {
    let v = f.num_vars();
    if v > MAX_BRUTE_FORCE_VARS {
        return Err(OracleError::Capacity { vars: v, cap: MAX_BRUTE_FORCE_VARS });
    }
    let t = Table::new(f, v);
    Ok(match first_block(t.blocks, |b| t.word(b) != 0) {
        Some(b) => {
            let lane = t.word(b).trailing_zeros() as u64;
            OracleResult::Satisfiable(assignment_from_index(b * 64 + lane, v))
        }
        None => OracleResult::Unsatisfiable,
    })
}

pub fn is_satisfiable(f: &Cnf) -> Result<bool, OracleError> {
    brute_force_sat(f).map(|r| r.is_sat())
}

/// True iff every model of `f` is a model of `g`, over the larger variable set.
pub fn check_implication(f: &Cnf, g: &Cnf) -> Result<bool, OracleError> {
    let v = f.num_vars().max(g.num_vars());
    if v > MAX_IMPLICATION_VARS {
        return Err(OracleError::Capacity { vars: v, cap: MAX_IMPLICATION_VARS });
    }
    let tf = Table::new(f, v);
    let tg = Table::new(g, v);
    Ok(first_block(tf.blocks, |b| {
        let wf = tf.word(b);
        wf != 0 && wf & !tg.word(b) != 0
    })
    .is_none())
}

/// True iff `resolvent` is exactly the resolution of `c1` and `c2` on `pivot`.
pub fn resolution_step_check(c1: &Clause, c2: &Clause, pivot: u32, resolvent: &Clause) -> Result<bool, OracleError> {
    let (p1, p2) = (c1.literal_of(pivot), c2.literal_of(pivot));
    match (p1, p2) {
        (Some(a), Some(b)) if a.is_positive() != b.is_positive() => {}
        _ => return Err(OracleError::PivotNotComplementary(pivot)),
    }
    let expected: BTreeSet<Literal> =
        c1.literals().iter().chain(c2.literals()).copied().filter(|l| l.var() != pivot).collect();
    let got: BTreeSet<Literal> = resolvent.literals().iter().copied().collect();
    Ok(expected == got)
}

/// Substitute `var := value`, dropping satisfied clauses and falsified literals.
fn substitute(f: &Cnf, var: u32, value: bool) -> Cnf {
    let clauses = f
        .clauses()
        .iter()
        .filter(|c| c.literal_of(var).is_none_or(|l| l.is_positive() != value))
        .map(|c| Clause::from_distinct(c.literals().iter().copied().filter(|l| l.var() != var).collect()))
        .collect();
    Cnf::from_checked(f.num_vars(), clauses)
}

/// Recovers a model through `v` calls to a satisfiability oracle.
///
/// For each `x_k` in turn the oracle is asked about the residual with
/// `x_k := 1`; a yes fixes the value, a no fixes `x_k := 0`. Once the residual
/// is empty the remaining variables are set to 0, though the oracle is still
/// consulted so the call count stays fixed. A contradiction is blamed on the
/// input if the oracle has never answered yes, and on the oracle otherwise.
pub fn extract_assignment<O>(f: &Cnf, mut oracle: O) -> Result<Assignment, OracleError>
where
    O: FnMut(&Cnf) -> bool,
{
    let v = f.num_vars();
    let mut residual = f.clone();
    let mut values = Vec::with_capacity(v);
    let mut accepted_any = false;
    for k in 1..=v as u32 {
        let was_empty = residual.num_clauses() == 0;
        let one = substitute(&residual, k, true);
        let yes = oracle(&one);
        accepted_any |= yes;
        if was_empty {
            values.push(false);
            continue;
        }
        if yes && !one.has_empty_clause() {
            values.push(true);
            residual = one;
            continue;
        }
        let zero = substitute(&residual, k, false);
        if zero.has_empty_clause() {
            return Err(if accepted_any { OracleError::OracleFault { var: k } } else { OracleError::InputRejected });
        }
        values.push(false);
        residual = zero;
    }
    if residual.has_empty_clause() {
        return Err(OracleError::InputRejected);
    }
    Ok(Assignment::new(values))
}
