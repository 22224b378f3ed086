//! Unsatisfiable instance generation by backward resolution ("blooming").
//!
//! Generation starts from complementary unit pairs `(x) ∧ (¬x)` and repeatedly
//! replaces selected clauses `C` by two children `(A ∨ y) ∧ (B ∨ ¬y)` where `y`
//! is a variable not in `C` and every literal of `C` lands in `A`, `B`, or both.
//! Resolving the children on `y` gives back `C`, so each round only makes the
//! core stronger and it stays unsatisfiable. The core is then padded with
//! arbitrary clauses up to the requested size.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clause_gen::{in_blocks, RandomClauseSampler};
use crate::cnf::{Assignment, Clause, Cnf, Label, LabeledProblem, Literal, Witness};
use crate::rand_dist::{BloomSampler, BoolSampler, CountSampler, DistributionSpec, IndexSampler, RngState};
use crate::sat_gen::SatGenConfig;
use crate::GenError;

/// Bloom choice values: carry to the positive child, the negative child, or both.
pub const CARRY_POS: u8 = 0;
pub const CARRY_NEG: u8 = 1;
pub const CARRY_BOTH: u8 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsatGenConfig {
    pub n: usize,
    pub m: usize,
    pub init_size: usize,
    /// Maximum bloom rounds; `None` runs until the size or full-clause guard trips.
    pub depth: Option<usize>,
    /// `Bernoulli { p }` includes each clause independently (resampled if none is
    /// picked); `UniformIndex` picks exactly one clause uniformly.
    pub down_clause: DistributionSpec,
    pub vars: DistributionSpec,
    pub lits_clause: DistributionSpec,
    pub polarities: DistributionSpec,
    pub bloom: DistributionSpec,
    pub record_trace: bool,
}

impl UnsatGenConfig {
    fn base(n: usize, m: usize) -> Self {
        UnsatGenConfig {
            n,
            m,
            init_size: 1,
            depth: Some(0),
            down_clause: DistributionSpec::Bernoulli { p: 1.0 },
            vars: DistributionSpec::uniform_vars(),
            lits_clause: DistributionSpec::NormalClipped { mean: 4.5, std: 1.0, lo: 1.0, hi: 1024.0 },
            polarities: DistributionSpec::Bernoulli { p: 0.5 },
            bloom: DistributionSpec::BloomWeights { w0: 0.48, w1: 0.48, w2: 0.02 },
            record_trace: true,
        }
    }

    /// A few rounds, each blooming about half of the clauses.
    pub fn shallow(n: usize, m: usize) -> Self {
        UnsatGenConfig { depth: Some(3), down_clause: DistributionSpec::Bernoulli { p: 0.5 }, ..Self::base(n, m) }
    }

    /// Bloom every clause until the core would outgrow `m`.
    pub fn deep(n: usize, m: usize) -> Self {
        UnsatGenConfig { depth: None, down_clause: DistributionSpec::Bernoulli { p: 1.0 }, ..Self::base(n, m) }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidConfig("n must be at least 1".into()));
        }
        if self.init_size == 0 {
            return Err(GenError::InvalidConfig("init_size must be at least 1".into()));
        }
        if 2 * self.init_size > self.m {
            return Err(GenError::InvalidConfig(format!(
                "2 * init_size ({}) exceeds m ({})",
                2 * self.init_size,
                self.m
            )));
        }
        self.samplers().map(|_| ())
    }

    fn samplers(&self) -> Result<UnsatSamplers, GenError> {
        let select = match self.down_clause {
            DistributionSpec::Bernoulli { p } if p > 0.0 => Selector::Each(BoolSampler::new(&self.down_clause)?),
            DistributionSpec::Bernoulli { .. } => {
                return Err(GenError::InvalidConfig("down_clause probability must be positive".into()))
            }
            DistributionSpec::UniformIndex { .. } => Selector::One,
            ref other => return Err(GenError::InvalidConfig(format!("down_clause cannot be {}", other.kind_name()))),
        };
        Ok(UnsatSamplers {
            select,
            tail: RandomClauseSampler {
                vars: IndexSampler::new(&self.vars, self.n)?,
                lits: CountSampler::new(&self.lits_clause)?,
                polarities: BoolSampler::new(&self.polarities)?,
            },
            bloom: BloomSampler::new(&self.bloom)?,
        })
    }
}

#[derive(Clone, Debug)]
enum Selector {
    Each(BoolSampler),
    One,
}

#[derive(Clone, Debug)]
struct UnsatSamplers {
    select: Selector,
    tail: RandomClauseSampler,
    bloom: BloomSampler,
}

impl Selector {
    fn select(&self, len: usize, rng: &mut RngState) -> Vec<bool> {
        match self {
            Selector::One => {
                let i = rng.random_range(0..len);
                (0..len).map(|j| j == i).collect()
            }
            Selector::Each(b) => loop {
                let mask: Vec<bool> = (0..len).map(|_| b.sample(rng)).collect();
                if mask.iter().any(|&x| x) {
                    break mask;
                }
            },
        }
    }
}

/// How one parent clause was split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BloomStep {
    pub cut_var: u32,
    /// One choice per parent literal, in the parent's literal order.
    pub choices: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BloomRound {
    /// Indices (into the core before this round) of the bloomed clauses, ascending.
    pub selected: Vec<usize>,
    /// One step per selected clause, same order.
    pub steps: Vec<BloomStep>,
}

/// Everything needed to rebuild the unsatisfiable core of a generated formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BloomTrace {
    pub num_vars: usize,
    /// Variable of each initial `(x) ∧ (¬x)` pair.
    pub init_vars: Vec<u32>,
    pub rounds: Vec<BloomRound>,
    /// The core is the first `core_size` clauses of the formula.
    pub core_size: usize,
    /// Hidden assignment of a satisfiable tail, when one was used.
    pub tail_witness: Option<Assignment>,
}

impl BloomTrace {
    pub fn replay(&self) -> Result<Cnf, GenError> {
        self.replay_with(|_, _, _, _| {})
    }

    /// Replays the core and calls `visit(parent, pos_child, neg_child, cut_var)`
    /// for every split.
    pub fn replay_with<F>(&self, mut visit: F) -> Result<Cnf, GenError>
    where
        F: FnMut(&Clause, &Clause, &Clause, u32),
    {
        let mut core = initial_core(&self.init_vars);
        for round in &self.rounds {
            if round.selected.len() != round.steps.len() || round.selected.iter().any(|&i| i >= core.len()) {
                return Err(GenError::BadTrace("round selection does not match the core".into()));
            }
            let mut mask = vec![false; core.len()];
            for &i in &round.selected {
                mask[i] = true;
            }
            let mut next = Vec::with_capacity(core.len() + round.selected.len());
            for (&i, step) in round.selected.iter().zip(&round.steps) {
                let parent = &core[i];
                if parent.contains_var(step.cut_var) || step.choices.len() != parent.len() {
                    return Err(GenError::BadTrace(format!("step on clause {i} is inconsistent")));
                }
                let (pos, neg) = bloom_clause(parent, step.cut_var, &step.choices);
                visit(parent, &pos, &neg, step.cut_var);
                next.push(pos);
                next.push(neg);
            }
            next.extend(core.iter().zip(&mask).filter(|(_, &sel)| !sel).map(|(c, _)| c.clone()));
            core = next;
        }
        if core.len() != self.core_size {
            return Err(GenError::BadTrace(format!("replayed {} clauses, trace says {}", core.len(), self.core_size)));
        }
        Cnf::new(self.num_vars, core).map_err(GenError::Cnf)
    }
}

fn initial_core(vars: &[u32]) -> Vec<Clause> {
    vars.iter()
        .flat_map(|&v| [Clause::from_distinct(vec![Literal::pos(v)]), Clause::from_distinct(vec![Literal::neg(v)])])
        .collect()
}

/// Split `parent` on the fresh variable `cut`; returns `(A ∨ cut, B ∨ ¬cut)`.
pub fn bloom_clause(parent: &Clause, cut: u32, choices: &[u8]) -> (Clause, Clause) {
    debug_assert!(!parent.contains_var(cut));
    let mut pos = Vec::with_capacity(parent.len() + 1);
    let mut neg = Vec::with_capacity(parent.len() + 1);
    for (&l, &ch) in parent.literals().iter().zip(choices) {
        if ch == CARRY_POS || ch == CARRY_BOTH {
            pos.push(l);
        }
        if ch == CARRY_NEG || ch == CARRY_BOTH {
            neg.push(l);
        }
    }
    pos.push(Literal::pos(cut));
    neg.push(Literal::neg(cut));
    (Clause::from_distinct(pos), Clause::from_distinct(neg))
}

fn bloom_all(
    clauses: &[&Clause],
    n: usize,
    vars: &IndexSampler,
    bloom: &BloomSampler,
    rng: &mut RngState,
) -> Result<Vec<(Clause, Clause, BloomStep)>, GenError> {
    if let Some(i) = clauses.iter().position(|c| c.len() >= n) {
        return Err(GenError::FullClause { index: i });
    }
    Ok(in_blocks(clauses.len(), rng, |r, i| {
        let parent = clauses[i];
        let cut = vars.sample_where(r, |v| !parent.contains_var(v as u32)).expect("clause is not full") as u32;
        let choices: Vec<u8> = (0..parent.len()).map(|_| bloom.sample(r)).collect();
        let (pos, neg) = bloom_clause(parent, cut, &choices);
        (pos, neg, BloomStep { cut_var: cut, choices })
    }))
}

/// One parallel backward-resolution step over every clause of `prob`.
///
/// Clause `i` becomes output clauses `2i` (positive cut) and `2i + 1`
/// (negative cut). Fails if any clause already uses every variable.
pub fn res_search(
    prob: &Cnf,
    vars: &DistributionSpec,
    bloom: &DistributionSpec,
    rng: &mut RngState,
) -> Result<Cnf, GenError> {
    Ok(res_search_traced(prob, vars, bloom, rng)?.0)
}

/// [`res_search`] that also returns the step taken for each input clause.
pub fn res_search_traced(
    prob: &Cnf,
    vars: &DistributionSpec,
    bloom: &DistributionSpec,
    rng: &mut RngState,
) -> Result<(Cnf, Vec<BloomStep>), GenError> {
    let n = prob.num_vars();
    let vars = IndexSampler::new(vars, n)?;
    let bloom = BloomSampler::new(bloom)?;
    let refs: Vec<&Clause> = prob.clauses().iter().collect();
    let out = bloom_all(&refs, n, &vars, &bloom, rng)?;
    let mut clauses = Vec::with_capacity(2 * out.len());
    let mut steps = Vec::with_capacity(out.len());
    for (p, q, s) in out {
        clauses.push(p);
        clauses.push(q);
        steps.push(s);
    }
    Ok((Cnf::from_checked(n, clauses), steps))
}

fn bloom_core(cfg: &UnsatGenConfig, s: &UnsatSamplers, rng: &mut RngState) -> (Vec<Clause>, BloomTrace) {
    let n = cfg.n;
    let vars = &s.tail.vars;
    let init_vars: Vec<u32> = (0..cfg.init_size).map(|_| vars.sample(rng) as u32).collect();
    let mut core = initial_core(&init_vars);
    let mut rounds = Vec::new();
    let mut iter = 0usize;
    while cfg.depth.is_none_or(|d| iter < d) {
        iter += 1;
        if 2 * core.len() > cfg.m || core.iter().any(|c| c.len() >= n) {
            break;
        }
        let mask = s.select.select(core.len(), rng);
        let selected: Vec<&Clause> = core.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| c).collect();
        let bloomed = bloom_all(&selected, n, vars, &s.bloom, rng).expect("guard excludes full clauses");
        let mut next = Vec::with_capacity(core.len() + bloomed.len());
        let mut steps = Vec::with_capacity(bloomed.len());
        for (p, q, step) in bloomed {
            next.push(p);
            next.push(q);
            steps.push(step);
        }
        next.extend(core.iter().zip(&mask).filter(|(_, &m)| !m).map(|(c, _)| c.clone()));
        if cfg.record_trace {
            let selected_idx = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
            rounds.push(BloomRound { selected: selected_idx, steps });
        }
        core = next;
    }
    let trace = BloomTrace { num_vars: n, init_vars, rounds, core_size: core.len(), tail_witness: None };
    (core, trace)
}

fn finish(cfg: &UnsatGenConfig, clauses: Vec<Clause>, trace: BloomTrace) -> LabeledProblem {
    let witness = if cfg.record_trace { Witness::Bloom(trace) } else { Witness::Unrecorded };
    LabeledProblem { cnf: Cnf::from_checked(cfg.n, clauses), label: Label::Unsat, witness }
}

/// Bloomed core followed by `m - core` random clauses; exactly `m` clauses.
pub fn generate_unsat(cfg: &UnsatGenConfig, rng: &mut RngState) -> Result<LabeledProblem, GenError> {
    cfg.validate()?;
    let s = cfg.samplers()?;
    let (mut clauses, trace) = bloom_core(cfg, &s, rng);
    let needed = cfg.m.saturating_sub(clauses.len());
    clauses.extend(s.tail.clauses(needed, rng));
    Ok(finish(cfg, clauses, trace))
}

/// Like [`generate_unsat`], but the padding satisfies a hidden assignment drawn
/// the way [`crate::sat_gen::generate_sat`] draws it. `sat_cfg.m` is ignored.
pub fn unsat_with_sat_tail(
    cfg: &UnsatGenConfig,
    sat_cfg: &SatGenConfig,
    rng: &mut RngState,
) -> Result<LabeledProblem, GenError> {
    cfg.validate()?;
    if sat_cfg.n != cfg.n {
        return Err(GenError::InvalidConfig(format!("SAT tail has n={}, core has n={}", sat_cfg.n, cfg.n)));
    }
    let s = cfg.samplers()?;
    let sat = sat_cfg.samplers()?;
    let (mut clauses, mut trace) = bloom_core(cfg, &s, rng);
    let needed = cfg.m.saturating_sub(clauses.len());
    let asst = sat.assignment(rng);
    clauses.extend(sat.clauses(&asst, needed, rng));
    trace.tail_witness = Some(asst);
    Ok(finish(cfg, clauses, trace))
}
