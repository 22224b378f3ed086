//! Satisfiable instance generation from a hidden assignment, plus the
//! satisfiability-preserving cover transformations.
//!
//! A hidden assignment is drawn first. Each clause then gets a set of distinct
//! variables and one bias sequence with at least one 1; positions marked 1
//! take the polarity that agrees with the assignment, positions marked 0 the
//! opposite. Every clause therefore contains an agreeing literal and the
//! assignment is a witness by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clause_gen::in_blocks;
use crate::cnf::{Assignment, Clause, Cnf, Label, LabeledProblem, Literal, Witness};
use crate::rand_dist::{BiasSampler, BoolSampler, CountSampler, DistributionSpec, IndexSampler, RngState};
use crate::GenError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatGenConfig {
    pub n: usize,
    pub m: usize,
    pub vars: DistributionSpec,
    pub lits_clause: DistributionSpec,
    pub polarities: DistributionSpec,
    pub polarity_bias: DistributionSpec,
}

impl SatGenConfig {
    /// Uniform variables, constant clause width `k`, fair polarities, uniform bias.
    pub fn uniform(n: usize, m: usize, k: usize) -> Self {
        SatGenConfig {
            n,
            m,
            vars: DistributionSpec::uniform_vars(),
            lits_clause: DistributionSpec::constant(k as i64),
            polarities: DistributionSpec::Bernoulli { p: 0.5 },
            polarity_bias: DistributionSpec::UniformNonZeroBias,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 || self.m == 0 {
            return Err(GenError::InvalidConfig(format!("need n >= 1 and m >= 1, got n={} m={}", self.n, self.m)));
        }
        self.samplers().map(|_| ())
    }

    pub(crate) fn samplers(&self) -> Result<SatSamplers, GenError> {
        Ok(SatSamplers {
            vars: IndexSampler::new(&self.vars, self.n)?,
            lits: CountSampler::new(&self.lits_clause)?,
            polarities: BoolSampler::new(&self.polarities)?,
            bias: BiasSampler::new(&self.polarity_bias)?,
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SatSamplers {
    pub vars: IndexSampler,
    pub lits: CountSampler,
    pub polarities: BoolSampler,
    pub bias: BiasSampler,
}

impl SatSamplers {
    pub fn assignment(&self, rng: &mut RngState) -> Assignment {
        Assignment::new((0..self.vars.n()).map(|_| self.polarities.sample(rng)).collect())
    }

    fn clause(&self, asst: &Assignment, rng: &mut RngState) -> Clause {
        let n = self.vars.n();
        let k = self.lits.sample_clamped(n, rng);
        let idx = self.vars.sample_unique(k, rng).expect("k is clamped to n");
        // one bias sequence per clause
        let seq = self.bias.sample(k, rng).expect("k >= 1");
        clause_from_bias(&idx, &seq, asst)
    }

    /// `count` clauses satisfied by `asst`.
    pub fn clauses(&self, asst: &Assignment, count: usize, rng: &mut RngState) -> Vec<Clause> {
        in_blocks(count, rng, |r, _| self.clause(asst, r))
    }
}

/// Literal `j` agrees with `asst` where `seq[j]` is set and disagrees otherwise.
pub fn clause_from_bias(indices: &[usize], seq: &[bool], asst: &Assignment) -> Clause {
    assert_eq!(indices.len(), seq.len());
    let lits = indices
        .iter()
        .zip(seq)
        .map(|(&v, &agree)| {
            let value = asst.value(v as u32);
            Literal::new(v as u32, if agree { value } else { !value })
        })
        .collect();
    Clause::from_distinct(lits)
}

pub fn generate_sat(cfg: &SatGenConfig, rng: &mut RngState) -> Result<LabeledProblem, GenError> {
    cfg.validate()?;
    let s = cfg.samplers()?;
    let asst = s.assignment(rng);
    let clauses = s.clauses(&asst, cfg.m, rng);
    Ok(LabeledProblem { cnf: Cnf::from_checked(cfg.n, clauses), label: Label::Sat, witness: Witness::Assignment(asst) })
}

fn check_cover_input(cnf: &Cnf, alpha: &Assignment) -> Result<(), GenError> {
    if alpha.len() != cnf.num_vars() {
        return Err(GenError::Cnf(crate::cnf::CnfError::AssignmentLength {
            expected: cnf.num_vars(),
            got: alpha.len(),
        }));
    }
    if let Some(i) = cnf.clauses().iter().position(Clause::is_empty) {
        return Err(GenError::EmptyClause { index: i });
    }
    Ok(())
}

/// Re-draw every clause's polarities against `alpha`, keeping its variables.
pub fn sat_cover(cnf: &Cnf, alpha: &Assignment, bias: &DistributionSpec, rng: &mut RngState) -> Result<Cnf, GenError> {
    check_cover_input(cnf, alpha)?;
    let bias = BiasSampler::new(bias)?;
    let clauses = cnf
        .clauses()
        .iter()
        .map(|c| {
            let idx: Vec<usize> = c.literals().iter().map(|l| l.var() as usize).collect();
            let seq = bias.sample(idx.len(), rng).expect("nonempty clause");
            clause_from_bias(&idx, &seq, alpha)
        })
        .collect();
    Ok(Cnf::from_checked(cnf.num_vars(), clauses))
}

/// Result of [`biased_sat_cover`] with bookkeeping on polarity changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasedCover {
    pub cnf: Cnf,
    /// Clauses whose chosen literal had to be inverted.
    pub changed: usize,
    /// Changes balanced by inverting another literal of the same clause.
    pub compensated: usize,
    /// Changes in unit clauses (no other literal to invert).
    pub unit_changes: usize,
}

impl BiasedCover {
    /// Changes that left the positive-literal count shifted.
    pub fn uncompensated(&self) -> usize {
        self.changed - self.compensated
    }
}

/// Pick one literal per clause and make it agree with `alpha`.
///
/// With `flip`, every change in a clause of length ≥ 2 is balanced by
/// inverting another literal of that clause whose polarity equals the chosen
/// literal's new polarity, so the clause's positive/negative counts are
/// unchanged. A clause with no such literal is left unbalanced and counted.
pub fn biased_sat_cover(
    cnf: &Cnf,
    alpha: &Assignment,
    flip: bool,
    rng: &mut RngState,
) -> Result<BiasedCover, GenError> {
    check_cover_input(cnf, alpha)?;
    let mut changed = 0;
    let mut compensated = 0;
    let mut unit_changes = 0;
    let clauses = cnf
        .clauses()
        .iter()
        .map(|c| {
            let mut lits = c.literals().to_vec();
            let chosen = rng.random_range(0..lits.len());
            let anchor = lits[chosen];
            if anchor.agrees(alpha.value(anchor.var())) {
                return Clause::from_distinct(lits);
            }
            lits[chosen] = anchor.negated();
            changed += 1;
            if lits.len() == 1 {
                unit_changes += 1;
            } else if flip {
                let new_pol = lits[chosen].is_positive();
                let eligible: Vec<usize> =
                    (0..lits.len()).filter(|&j| j != chosen && lits[j].is_positive() == new_pol).collect();
                if !eligible.is_empty() {
                    let j = eligible[rng.random_range(0..eligible.len())];
                    lits[j] = lits[j].negated();
                    compensated += 1;
                }
            }
            Clause::from_distinct(lits)
        })
        .collect();
    Ok(BiasedCover { cnf: Cnf::from_checked(cnf.num_vars(), clauses), changed, compensated, unit_changes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::evaluate;
    use crate::testutil::arb_nonempty_cnf;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn degenerate_single_variable() {
        let mut cfg = SatGenConfig::uniform(1, 1, 1);
        cfg.polarities = DistributionSpec::Bernoulli { p: 1.0 };
        let p = generate_sat(&cfg, &mut RngState::new(0, 0)).unwrap();
        assert_eq!(p.cnf, Cnf::from_dimacs_clauses(1, &[&[1]]).unwrap());
        assert_eq!(p.witness, Witness::Assignment(Assignment::new(vec![true])));
        assert_eq!(p.label, Label::Sat);
    }

    #[test]
    fn bias_trace() {
        let asst = Assignment::new(vec![true, true]);
        let c = clause_from_bias(&[1, 2], &[true, false], &asst);
        assert_eq!(c, Clause::from_dimacs(&[1, -2]).unwrap());
    }

    #[test]
    fn shape_and_witness() {
        let cfg = SatGenConfig {
            n: 15,
            m: 64,
            vars: DistributionSpec::uniform_vars(),
            lits_clause: DistributionSpec::NormalClipped { mean: 4.5, std: 1.0, lo: 1.0, hi: 64.0 },
            polarities: DistributionSpec::Bernoulli { p: 0.5 },
            polarity_bias: DistributionSpec::UniformNonZeroBias,
        };
        let mut rng = RngState::new(42, 0);
        for _ in 0..10_000 {
            let p = generate_sat(&cfg, &mut rng).unwrap();
            assert_eq!(p.cnf.num_clauses(), 64);
            assert_eq!(p.cnf.num_vars(), 15);
            assert_eq!(p.witness_holds(), Some(true));
        }
    }

    #[test]
    fn lits_clamped_into_range() {
        let mut cfg = SatGenConfig::uniform(3, 50, 10);
        let p = generate_sat(&cfg, &mut RngState::new(1, 1)).unwrap();
        assert!(p.cnf.clauses().iter().all(|c| c.len() == 3));
        cfg.lits_clause = DistributionSpec::constant(-4);
        let p = generate_sat(&cfg, &mut RngState::new(1, 1)).unwrap();
        assert!(p.cnf.clauses().iter().all(|c| c.len() == 1));
    }

    #[test]
    fn large_parallel_generation_is_deterministic() {
        let cfg = SatGenConfig::uniform(1500, 16_500, 5);
        let a = generate_sat(&cfg, &mut RngState::new(3, 9)).unwrap();
        let b = generate_sat(&cfg, &mut RngState::new(3, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.witness_holds(), Some(true));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SatGenConfig::uniform(0, 1, 1);
        assert!(matches!(generate_sat(&cfg, &mut RngState::new(0, 0)), Err(GenError::InvalidConfig(_))));
        cfg.n = 2;
        cfg.polarity_bias = DistributionSpec::Bernoulli { p: 0.5 };
        assert!(matches!(generate_sat(&cfg, &mut RngState::new(0, 0)), Err(GenError::Sample(_))));
    }

    #[test]
    fn cover_unit_clause() {
        let f = Cnf::from_dimacs_clauses(1, &[&[-1]]).unwrap();
        let alpha = Assignment::new(vec![true]);
        let out = sat_cover(&f, &alpha, &DistributionSpec::UniformNonZeroBias, &mut RngState::new(0, 0)).unwrap();
        assert_eq!(out, Cnf::from_dimacs_clauses(1, &[&[1]]).unwrap());
    }

    #[test]
    fn cover_rejects_empty_clause() {
        let f = Cnf::new(2, vec![Clause::from_dimacs(&[1]).unwrap(), Clause::empty()]).unwrap();
        let alpha = Assignment::new(vec![true, true]);
        let mut rng = RngState::new(0, 0);
        assert_eq!(
            sat_cover(&f, &alpha, &DistributionSpec::UniformNonZeroBias, &mut rng),
            Err(GenError::EmptyClause { index: 1 })
        );
        assert_eq!(biased_sat_cover(&f, &alpha, true, &mut rng), Err(GenError::EmptyClause { index: 1 }));
    }

    #[test]
    fn biased_cover_keeps_agreeing_clause() {
        let f = Cnf::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let alpha = Assignment::new(vec![true, true]);
        for s in 0..20 {
            let out = biased_sat_cover(&f, &alpha, true, &mut RngState::new(s, 0)).unwrap();
            assert_eq!(out.cnf, f);
            assert_eq!(out.changed, 0);
        }
    }

    #[test]
    fn biased_cover_flip_forced() {
        // (¬x1 ∨ x2), alpha = (1, 0): find a seed choosing literal 1
        let f = Cnf::from_dimacs_clauses(2, &[&[-1, 2]]).unwrap();
        let alpha = Assignment::new(vec![true, false]);
        let mut seen = false;
        for s in 0..64 {
            let out = biased_sat_cover(&f, &alpha, true, &mut RngState::new(s, 0)).unwrap();
            if out.cnf == Cnf::from_dimacs_clauses(2, &[&[1, -2]]).unwrap() {
                assert_eq!(out.cnf.count_positive(), 1);
                assert_eq!((out.changed, out.compensated), (1, 1));
                seen = true;
            } else {
                // chose literal 2, which already agrees
                assert_eq!(out.cnf, f);
            }
        }
        assert!(seen);
    }

    proptest! {
        #[test]
        fn cover_preserves_support_and_satisfies(f in arb_nonempty_cnf(15, 30), seed in any::<u64>()) {
            let mut rng = RngState::new(seed, 0);
            let alpha = Assignment::new((0..f.num_vars()).map(|_| rng.random()).collect());
            let out = sat_cover(&f, &alpha, &DistributionSpec::UniformNonZeroBias, &mut rng).unwrap();
            prop_assert_eq!(out.to_dense().support(), f.to_dense().support());
            prop_assert!(evaluate(&out, &alpha).unwrap());
        }

        #[test]
        fn biased_cover_properties(f in arb_nonempty_cnf(15, 30), seed in any::<u64>(), flip in any::<bool>()) {
            let mut rng = RngState::new(seed, 1);
            let alpha = Assignment::new((0..f.num_vars()).map(|_| rng.random()).collect());
            let out = biased_sat_cover(&f, &alpha, flip, &mut rng).unwrap();
            prop_assert_eq!(out.cnf.to_dense().support(), f.to_dense().support());
            prop_assert!(evaluate(&out.cnf, &alpha).unwrap());
            if flip && out.uncompensated() == 0 {
                prop_assert_eq!(out.cnf.count_positive(), f.count_positive());
            }
            if !flip {
                prop_assert_eq!(out.compensated, 0);
            }
            // per clause: at most the chosen literal and one partner change
            for (a, b) in f.clauses().iter().zip(out.cnf.clauses()) {
                let diffs = a.literals().iter().zip(b.literals()).filter(|(x, y)| x != y).count();
                let cap = if flip { 2 } else { 1 };
                prop_assert!(diffs <= cap);
            }
        }
    }
}
