//! Block-parallel clause production shared by the generators.
//!
//! Clauses are produced in fixed-size blocks, each with its own child stream
//! keyed off the caller's RNG. Output is therefore identical whether blocks run
//! on one thread or many.

use rayon::prelude::*;

use crate::cnf::{Clause, Literal};
use crate::rand_dist::{BoolSampler, CountSampler, IndexSampler, RngState};

pub const CLAUSE_BLOCK: usize = 256;
/// Below this many clauses blocks run on the calling thread.
const PAR_THRESHOLD: usize = 8 * CLAUSE_BLOCK;

/// Produce `count` items; item `i` is made by `make(rng_of_its_block, i)`.
pub(crate) fn in_blocks<T, F>(count: usize, rng: &mut RngState, make: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngState, usize) -> T + Sync,
{
    let key = rng.fork_key();
    let n_blocks = count.div_ceil(CLAUSE_BLOCK);
    let block = |b: usize| {
        let mut r = RngState::child(key, b as u64);
        let end = ((b + 1) * CLAUSE_BLOCK).min(count);
        (b * CLAUSE_BLOCK..end).map(|i| make(&mut r, i)).collect::<Vec<T>>()
    };
    if count >= PAR_THRESHOLD {
        (0..n_blocks).into_par_iter().map(block).flatten().collect()
    } else {
        (0..n_blocks).flat_map(block).collect()
    }
}

/// Samplers for clauses with independently drawn polarities.
#[derive(Clone, Debug)]
pub struct RandomClauseSampler {
    pub vars: IndexSampler,
    pub lits: CountSampler,
    pub polarities: BoolSampler,
}

impl RandomClauseSampler {
    pub fn clause(&self, rng: &mut RngState) -> Clause {
        let n = self.vars.n();
        let k = self.lits.sample_clamped(n, rng);
        let idx = self.vars.sample_unique(k, rng).expect("k is clamped to n");
        let lits = idx.into_iter().map(|v| Literal::new(v as u32, self.polarities.sample(rng))).collect();
        Clause::from_distinct(lits)
    }

    pub fn clauses(&self, count: usize, rng: &mut RngState) -> Vec<Clause> {
        in_blocks(count, rng, |r, _| self.clause(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_output_is_independent_of_threading() {
        let mut a = RngState::new(1, 0);
        let mut b = RngState::new(1, 0);
        let count = PAR_THRESHOLD + 17;
        let par: Vec<u64> = in_blocks(count, &mut a, |r, i| rand::RngCore::next_u64(r) ^ i as u64);
        // same blocks, forced sequential
        let key = b.fork_key();
        let mut seq = Vec::new();
        for blk in 0..count.div_ceil(CLAUSE_BLOCK) {
            let mut r = RngState::child(key, blk as u64);
            for i in blk * CLAUSE_BLOCK..((blk + 1) * CLAUSE_BLOCK).min(count) {
                seq.push(rand::RngCore::next_u64(&mut r) ^ i as u64);
            }
        }
        assert_eq!(par, seq);
    }

    #[test]
    fn zero_count() {
        let mut r = RngState::new(0, 0);
        let v: Vec<u8> = in_blocks(0, &mut r, |_, _| 0);
        assert!(v.is_empty());
    }
}
