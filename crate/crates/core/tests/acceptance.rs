//! Acceptance suite. Runs each criterion at full scale and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use satforge::cnf::{evaluate, parse_dimacs, serialize_dimacs, Clause, Cnf, Label, ParseMode, Witness};
use satforge::oracle::{brute_force_sat, check_implication, extract_assignment, OracleResult};
use satforge::pipeline::{benchmark_throughput, GeneratorMixConfig, GeneratorOption as G, MixSampler};
use satforge::rand_dist::{BoolSampler, CountSampler, DistributionSpec, IndexSampler};
use satforge::sat_gen::{generate_sat, SatGenConfig};
use satforge::unsat_gen::res_search;
use satforge::{RandomClauseSampler, RngState};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mix() -> MixSampler {
    MixSampler::new(&GeneratorMixConfig::default()).unwrap()
}

fn sat_soundness() -> Outcome {
    let mix = mix();
    let total = 10_000u64;
    let failures: Vec<String> = (0..total)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = RngState::new(101, i);
            let option = if i % 2 == 0 { G::UniformBias } else { G::UniformBiasShift };
            let p = match mix.sample_with(option, &mut rng) {
                Ok(p) => p,
                Err(e) => return Some(format!("#{i}: {e}")),
            };
            let Witness::Assignment(a) = &p.witness else { return Some(format!("#{i}: no witness")) };
            let witness_ok = evaluate(&p.cnf, a).unwrap_or(false);
            let brute_ok = brute_force_sat(&p.cnf).map(|r| r.is_sat()).unwrap_or(false);
            (!(witness_ok && brute_ok && p.label == Label::Sat)).then(|| format!("#{i}: {}", p.cnf))
        })
        .collect();
    ensure(failures.is_empty(), || format!("{} failures, first {}", failures.len(), failures[0]))?;
    Ok(format!("{total}/{total} witnessed and brute-force SAT"))
}

fn unsat_soundness() -> Outcome {
    let mix = mix();
    let options = [G::ShallowBloom, G::DeepBloom, G::ShallowBloomShift, G::DeepBloomShift];
    let tails = [G::SatShallowBloomShift, G::SatDeepBloomShift];
    let jobs: Vec<(u64, G)> = (0..2000u64)
        .map(|i| (i, options[i as usize % 4]))
        .chain((2000..2500u64).map(|i| (i, tails[i as usize % 2])))
        .collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(i, option)| {
            let p = match mix.sample_with(option, &mut RngState::new(202, i)) {
                Ok(p) => p,
                Err(e) => return Some(format!("#{i}: {e}")),
            };
            let unsat = brute_force_sat(&p.cnf) == Ok(OracleResult::Unsatisfiable);
            (!(unsat && p.label == Label::Unsat)).then(|| format!("#{i} ({option}): {}", p.cnf))
        })
        .collect();
    ensure(failures.is_empty(), || format!("{} failures, first {}", failures.len(), failures[0]))?;
    Ok(format!("{}/{} brute-force UNSAT (2000 core + 500 SAT-tail)", jobs.len(), jobs.len()))
}

/// A formula over `n` variables whose clauses all leave at least one variable unused.
fn open_formula(n: usize, m: usize, rng: &mut RngState) -> Cnf {
    let s = RandomClauseSampler {
        vars: IndexSampler::new(&DistributionSpec::uniform_vars(), n).unwrap(),
        lits: CountSampler::new(&DistributionSpec::UniformIndex { low: 1, high: n as i64 - 1 }).unwrap(),
        polarities: BoolSampler::new(&DistributionSpec::Bernoulli { p: 0.5 }).unwrap(),
    };
    Cnf::new(n, s.clauses(m, rng)).unwrap()
}

fn resolution_inversion() -> Outcome {
    let blooms = [
        DistributionSpec::BloomWeights { w0: 0.48, w1: 0.48, w2: 0.02 },
        DistributionSpec::BloomWeights { w0: 0.5, w1: 0.3, w2: 0.2 },
        DistributionSpec::BloomWeights { w0: 1.0, w1: 1.0, w2: 1.0 },
    ];
    let results: Vec<Result<usize, String>> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngState::new(303, i);
            let n = 2 + (i % 9) as usize;
            let f = open_formula(n, 1 + (i % 6) as usize, &mut rng);
            let out = res_search(&f, &DistributionSpec::uniform_vars(), &blooms[i as usize % 3], &mut rng)
                .map_err(|e| format!("#{i}: {e}"))?;
            for (j, c) in f.clauses().iter().enumerate() {
                let pair = Cnf::new(n, out.clauses()[2 * j..2 * j + 2].to_vec()).unwrap();
                let parent = Cnf::new(n, vec![c.clone()]).unwrap();
                if !check_implication(&pair, &parent).unwrap() {
                    return Err(format!("#{i} clause {j}: {pair} does not imply {parent}"));
                }
            }
            Ok(f.num_clauses())
        })
        .collect();
    let mut pairs = 0;
    for r in results {
        pairs += r?;
    }
    Ok(format!("1000 steps, {pairs} child pairs each imply their parent"))
}

fn canonical(f: &Cnf) -> Vec<Clause> {
    f.clauses().iter().map(Clause::sorted).collect()
}

fn tiny_support() -> Outcome {
    // all ordered pairs of 2-literal clauses over 3 variables, kept if satisfiable
    let mut clauses = Vec::new();
    for a in 1..=3i64 {
        for b in a + 1..=3 {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                clauses.push(Clause::from_dimacs(&[sa * a, sb * b]).unwrap());
            }
        }
    }
    let mut satisfiable = BTreeSet::new();
    let mut unsatisfiable = BTreeSet::new();
    for c1 in &clauses {
        for c2 in &clauses {
            let f = Cnf::new(3, vec![c1.clone(), c2.clone()]).unwrap();
            if brute_force_sat(&f).unwrap().is_sat() {
                satisfiable.insert(canonical(&f));
            } else {
                unsatisfiable.insert(canonical(&f));
            }
        }
    }
    let cfg = SatGenConfig::uniform(3, 2, 2);
    let mut rng = RngState::new(404, 0);
    let mut seen = BTreeSet::new();
    for _ in 0..200_000 {
        seen.insert(canonical(&generate_sat(&cfg, &mut rng).unwrap().cnf));
    }
    let bad = seen.intersection(&unsatisfiable).count();
    ensure(bad == 0, || format!("{bad} unsatisfiable formulas generated"))?;
    ensure(seen == satisfiable, || {
        format!(
            "support {} vs enumerated {}: {} missing, {} extra",
            seen.len(),
            satisfiable.len(),
            satisfiable.difference(&seen).count(),
            seen.difference(&satisfiable).count()
        )
    })?;
    Ok(format!("support = all {} satisfiable formulas, 0 unsatisfiable", satisfiable.len()))
}

fn gen_mix_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |sub: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_satforge"))
            .args(["gen-mix", "--seed", "2024", "--count", "1000", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        std::fs::read(out.join("dataset.satf")).map_err(|e| e.to_string())
    };
    let a = run("a")?;
    let b = run("b")?;
    ensure(a == b, || "packed outputs differ".into())?;
    let count = u32::from_le_bytes(a[8..12].try_into().unwrap());
    ensure(count == 1000, || format!("header says {count} records"))?;
    Ok(format!("two runs byte-identical ({} bytes)", a.len()))
}

fn dimacs_round_trip() -> Outcome {
    let mix = mix();
    let mut rng = RngState::new(606, 0);
    for i in 0..1000 {
        let f = mix.sample(&mut rng).map_err(|e| e.to_string())?.problem.cnf;
        let back = parse_dimacs(&serialize_dimacs(&f), ParseMode::Strict).map_err(|e| format!("#{i}: {e}"))?;
        ensure(back == f, || format!("#{i}: round trip changed {f}"))?;
    }
    Ok("1000/1000 formulas identical after serialize + parse".into())
}

fn self_reduction() -> Outcome {
    let cfg = GeneratorMixConfig::default();
    let b = &cfg.base;
    let mut rng = RngState::new(707, 0);
    for i in 0..200 {
        let n = 4 + i % 12;
        let sat = SatGenConfig {
            n,
            m: ((4.27 * n as f64).round()) as usize,
            vars: b.vars.clone(),
            lits_clause: b.lits_clause.clone(),
            polarities: b.polarities.clone(),
            polarity_bias: b.polarity_bias.clone(),
        };
        let f = generate_sat(&sat, &mut rng).unwrap().cnf;
        let mut calls = 0;
        let a = extract_assignment(&f, |g| {
            calls += 1;
            brute_force_sat(g).unwrap().is_sat()
        })
        .map_err(|e| format!("#{i}: {e}"))?;
        ensure(evaluate(&f, &a).unwrap(), || format!("#{i}: extracted assignment fails {f}"))?;
        ensure(calls == n, || format!("#{i}: {calls} oracle calls for {n} variables"))?;
    }
    Ok("200/200 extracted assignments satisfy, exactly v oracle calls each".into())
}

fn throughput() -> Outcome {
    let cfg = GeneratorMixConfig::default();
    let workers = rayon::current_num_threads();
    let small = benchmark_throughput(&cfg, 15, 64, Duration::from_secs(3), workers).map_err(|e| e.to_string())?;
    let large = benchmark_throughput(&cfg, 1500, 16_500, Duration::from_secs(3), workers).map_err(|e| e.to_string())?;
    ensure(small.problems > 0 && large.problems > 0, || "no problems generated".into())?;
    ensure(small.problems_per_sec > 100.0, || format!("n=15 at {:.1} p/s", small.problems_per_sec))?;
    Ok(format!(
        "n=15: {:.0} p/s, n=1500: {:.1} p/s, slowdown {:.2}x ({} workers; GPU reference 530 / 128 p/s)",
        small.problems_per_sec,
        large.problems_per_sec,
        small.problems_per_sec / large.problems_per_sec,
        workers
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("SAT soundness", sat_soundness),
        ("UNSAT soundness", unsat_soundness),
        ("resolution inversion", resolution_inversion),
        ("tiny-scale support equality", tiny_support),
        ("gen-mix determinism", gen_mix_determinism),
        ("DIMACS round trip", dimacs_round_trip),
        ("oracle self-reduction", self_reduction),
        ("throughput benchmark", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS [{}] {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{}] {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
