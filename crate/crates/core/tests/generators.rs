use std::collections::BTreeSet;

use proptest::prelude::*;
use rayon::prelude::*;

use satforge::cnf::{Clause, Cnf, Label, Literal, Witness};
use satforge::oracle::{brute_force_sat, check_implication, resolution_step_check};
use satforge::pipeline::{GeneratorMixConfig, MixSampler};
use satforge::rand_dist::{BoolSampler, CountSampler, DistributionSpec, IndexSampler};
use satforge::sat_gen::biased_sat_cover;
use satforge::unsat_gen::{generate_unsat, res_search, UnsatGenConfig};
use satforge::{Assignment, RandomClauseSampler, RngState};

type Core = Vec<Clause>;

fn canonical(clauses: &[Clause]) -> Core {
    let mut v: Vec<Clause> = clauses.iter().map(Clause::sorted).collect();
    v.sort();
    v
}

/// Every way to replace one clause `C` by `(A ∨ x), (B ∨ ¬x)` with `A ∪ B = C`
/// and `x` a variable outside `C`.
fn backward_steps(core: &Core, n: u32) -> Vec<Core> {
    let mut out = Vec::new();
    for (i, c) in core.iter().enumerate() {
        let lits = c.literals();
        for x in (1..=n).filter(|&x| !c.contains_var(x)) {
            for code in 0..3usize.pow(lits.len() as u32) {
                let (mut a, mut b) = (vec![Literal::pos(x)], vec![Literal::neg(x)]);
                let mut k = code;
                for &l in lits {
                    match k % 3 {
                        0 => a.push(l),
                        1 => b.push(l),
                        _ => {
                            a.push(l);
                            b.push(l);
                        }
                    }
                    k /= 3;
                }
                let mut next = core.clone();
                next[i] = Clause::new(a).unwrap();
                next.push(Clause::new(b).unwrap());
                out.push(canonical(&next));
            }
        }
    }
    out
}

#[test]
fn one_clause_per_round_reaches_every_two_step_core() {
    let n = 3u32;
    let mut want: BTreeSet<Core> = BTreeSet::new();
    let mut frontier: BTreeSet<Core> = BTreeSet::new();
    for a in 1..=n {
        for b in 1..=n {
            frontier.insert(canonical(&[
                Clause::new(vec![Literal::pos(a)]).unwrap(),
                Clause::new(vec![Literal::neg(a)]).unwrap(),
                Clause::new(vec![Literal::pos(b)]).unwrap(),
                Clause::new(vec![Literal::neg(b)]).unwrap(),
            ]));
        }
    }
    for _ in 0..=2 {
        want.extend(frontier.iter().cloned());
        frontier = frontier.iter().flat_map(|c| backward_steps(c, n)).collect();
    }

    let mut got: BTreeSet<Core> = BTreeSet::new();
    for (depth, samples) in [(0usize, 5_000u64), (1, 50_000), (2, 500_000)] {
        let cfg = UnsatGenConfig {
            init_size: 2,
            depth: Some(depth),
            down_clause: DistributionSpec::UniformIndex { low: 0, high: 0 },
            bloom: DistributionSpec::BloomWeights { w0: 1.0, w1: 1.0, w2: 1.0 },
            ..UnsatGenConfig::shallow(n as usize, 12)
        };
        let cores: BTreeSet<Core> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let p = generate_unsat(&cfg, &mut RngState::new(31, i)).unwrap();
                let Witness::Bloom(t) = &p.witness else { unreachable!() };
                canonical(&p.cnf.clauses()[..t.core_size])
            })
            .collect();
        got.extend(cores);
    }
    let missing = want.difference(&got).count();
    let extra = got.difference(&want).count();
    assert_eq!((missing, extra), (0, 0), "{} enumerated cores", want.len());
}

#[test]
fn bloom_traces_are_valid_resolution_steps() {
    let mut rng = RngState::new(32, 0);
    let mut steps = 0;
    for i in 0..1000 {
        let n = 3 + i % 30;
        let cfg = if i % 2 == 0 { UnsatGenConfig::shallow(n, 6 * n) } else { UnsatGenConfig::deep(n, 6 * n) };
        let p = generate_unsat(&cfg, &mut rng).unwrap();
        let Witness::Bloom(t) = &p.witness else { unreachable!() };
        t.replay_with(|parent, pos, neg, cut| {
            assert!(resolution_step_check(pos, neg, cut, parent).unwrap(), "{pos} {neg} -> {parent}");
            steps += 1;
        })
        .unwrap();
    }
    assert!(steps > 1000);
}

#[test]
fn biased_cover_agreement_counts() {
    // uniform polarities, width 3: after one forced agreement per clause the
    // number of agreeing literals is 1, 2, 3 with probability 1/4, 1/2, 1/4
    let n = 10;
    let sampler = RandomClauseSampler {
        vars: IndexSampler::new(&DistributionSpec::uniform_vars(), n).unwrap(),
        lits: CountSampler::new(&DistributionSpec::constant(3)).unwrap(),
        polarities: BoolSampler::new(&DistributionSpec::Bernoulli { p: 0.5 }).unwrap(),
    };
    let mut rng = RngState::new(33, 0);
    let mut counts = [0usize; 4];
    for _ in 0..1000 {
        let f = Cnf::new(n, sampler.clauses(200, &mut rng)).unwrap();
        let alpha = Assignment::new((0..n).map(|j| j % 3 == 0).collect());
        let cover = biased_sat_cover(&f, &alpha, false, &mut rng).unwrap();
        for c in cover.cnf.clauses() {
            counts[c.literals().iter().filter(|l| l.agrees(alpha.value(l.var()))).count()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    assert_eq!(counts[0], 0);
    for (got, want) in freq[1..].iter().zip([0.25, 0.5, 0.25]) {
        assert!((got - want).abs() < 0.01, "{freq:?}");
    }
}

#[test]
fn mix_labels_agree_with_brute_force() {
    let mix = MixSampler::new(&GeneratorMixConfig::default()).unwrap();
    let bad: Vec<u64> = (0..5000u64)
        .into_par_iter()
        .filter(|&i| {
            let s = mix.sample(&mut RngState::new(34, i)).unwrap();
            let sat = brute_force_sat(&s.problem.cnf).unwrap().is_sat();
            sat != (s.problem.label == Label::Sat)
        })
        .collect();
    assert!(bad.is_empty(), "streams {bad:?}");
}

fn open_formula() -> impl Strategy<Value = Cnf> {
    (2usize..=7, any::<u64>(), 1usize..=6).prop_map(|(n, seed, m)| {
        let s = RandomClauseSampler {
            vars: IndexSampler::new(&DistributionSpec::uniform_vars(), n).unwrap(),
            lits: CountSampler::new(&DistributionSpec::UniformIndex { low: 1, high: n as i64 - 1 }).unwrap(),
            polarities: BoolSampler::new(&DistributionSpec::Bernoulli { p: 0.5 }).unwrap(),
        };
        Cnf::new(n, s.clauses(m, &mut RngState::new(seed, 0))).unwrap()
    })
}

proptest! {
    #[test]
    fn res_search_output_implies_input(f in open_formula(), seed in any::<u64>()) {
        let bloom = DistributionSpec::BloomWeights { w0: 1.0, w1: 1.0, w2: 1.0 };
        let out = res_search(&f, &DistributionSpec::uniform_vars(), &bloom, &mut RngState::new(seed, 1)).unwrap();
        prop_assert_eq!(out.num_clauses(), 2 * f.num_clauses());
        prop_assert!(check_implication(&out, &f).unwrap());
    }
}
