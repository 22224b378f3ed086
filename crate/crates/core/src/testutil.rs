//! Shared proptest strategies for unit tests.

use proptest::prelude::*;

use crate::cnf::{Clause, Cnf, Literal};

/// Clause over distinct variables drawn from `1..=n`, possibly empty.
pub fn arb_clause(n: usize, min_len: usize) -> impl Strategy<Value = Clause> {
    proptest::sample::subsequence((1..=n as u32).collect::<Vec<_>>(), min_len.min(n)..=n)
        .prop_shuffle()
        .prop_flat_map(|vars| {
            let k = vars.len();
            (Just(vars), proptest::collection::vec(any::<bool>(), k))
        })
        .prop_map(|(vars, pols)| {
            Clause::new(vars.into_iter().zip(pols).map(|(v, p)| Literal::new(v, p)).collect()).unwrap()
        })
}

pub fn arb_cnf(max_vars: usize, max_clauses: usize) -> impl Strategy<Value = Cnf> {
    (1..=max_vars).prop_flat_map(move |n| {
        proptest::collection::vec(arb_clause(n, 0), 0..=max_clauses).prop_map(move |cs| Cnf::new(n, cs).unwrap())
    })
}

/// Formulas with no empty clauses.
pub fn arb_nonempty_cnf(max_vars: usize, max_clauses: usize) -> impl Strategy<Value = Cnf> {
    (1..=max_vars).prop_flat_map(move |n| {
        proptest::collection::vec(arb_clause(n, 1), 0..=max_clauses).prop_map(move |cs| Cnf::new(n, cs).unwrap())
    })
}
