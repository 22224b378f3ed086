//! Wall-clock generation throughput at a fixed problem shape.

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::config::GeneratorMixConfig;
use crate::rand_dist::{DistributionSpec, RngState};
use crate::sat_gen::{generate_sat, SatGenConfig};
use crate::unsat_gen::{generate_unsat, UnsatGenConfig};
use crate::GenError;

/// Published GPU figures at comparable shapes; context only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub n: usize,
    pub problems_per_sec: f64,
    pub hardware: &'static str,
}

pub const REFERENCE_ROWS: [ReferenceRow; 2] = [
    ReferenceRow { n: 15, problems_per_sec: 530.0, hardware: "GPU (not this hardware)" },
    ReferenceRow { n: 1500, problems_per_sec: 128.0, hardware: "GPU (not this hardware)" },
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub m: usize,
    pub workers: usize,
    pub elapsed_secs: f64,
    pub problems: u64,
    pub problems_per_sec: f64,
    pub cells_per_sec: f64,
    pub reference: Vec<ReferenceRow>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shape        n={} m={}", self.n, self.m)?;
        writeln!(f, "workers      {}", self.workers)?;
        writeln!(f, "elapsed      {:.3} s", self.elapsed_secs)?;
        writeln!(f, "problems     {}", self.problems)?;
        writeln!(f, "problems/s   {:.1}", self.problems_per_sec)?;
        writeln!(f, "cells/s      {:.3e}", self.cells_per_sec)?;
        for r in &self.reference {
            writeln!(f, "reference    n={:<5} {:>6.1} problems/s  [{}]", r.n, r.problems_per_sec, r.hardware)?;
        }
        Ok(())
    }
}

/// Alternates SAT and UNSAT generation (base distributions, dense encoding
/// included) on `workers` threads until `duration` elapses.
pub fn benchmark_throughput(
    cfg: &GeneratorMixConfig,
    n: usize,
    m: usize,
    duration: Duration,
    workers: usize,
) -> Result<BenchReport, GenError> {
    let workers = workers.max(1);
    let sat = SatGenConfig {
        n,
        m,
        vars: cfg.base.vars.clone(),
        lits_clause: cfg.base.lits_clause.clone(),
        polarities: cfg.base.polarities.clone(),
        polarity_bias: cfg.base.polarity_bias.clone(),
    };
    let unsat = UnsatGenConfig {
        n,
        m,
        init_size: cfg.init_size.min(m / 2).max(1),
        depth: cfg.shallow.depth,
        down_clause: DistributionSpec::Bernoulli { p: cfg.shallow.down_clause },
        vars: cfg.base.vars.clone(),
        lits_clause: cfg.base.lits_clause.clone(),
        polarities: cfg.base.polarities.clone(),
        bloom: cfg.base.bloom.clone(),
        record_trace: false,
    };
    sat.validate()?;
    unsat.validate()?;
    let empty = BenchReport {
        n,
        m,
        workers,
        elapsed_secs: 0.0,
        problems: 0,
        problems_per_sec: 0.0,
        cells_per_sec: 0.0,
        reference: REFERENCE_ROWS.to_vec(),
    };
    if duration.is_zero() {
        return Ok(empty);
    }

    let stop = AtomicBool::new(false);
    let problems = AtomicU64::new(0);
    let cells = AtomicU64::new(0);
    let start = Instant::now();
    thread::scope(|s| {
        for w in 0..workers {
            let (stop, problems, cells, sat, unsat) = (&stop, &problems, &cells, &sat, &unsat);
            s.spawn(move || {
                let mut rng = RngState::new(cfg.seed, w as u64);
                let mut i = 0u64;
                while !stop.load(Ordering::Relaxed) {
                    let p =
                        if i.is_multiple_of(2) { generate_sat(sat, &mut rng) } else { generate_unsat(unsat, &mut rng) }
                            .expect("configs validated");
                    let enc = p.cnf.to_dense();
                    problems.fetch_add(1, Ordering::Relaxed);
                    cells.fetch_add(enc.cells().len() as u64, Ordering::Relaxed);
                    i += 1;
                }
            });
        }
        thread::sleep(duration);
        stop.store(true, Ordering::Relaxed);
    });
    let elapsed = start.elapsed().as_secs_f64();
    let problems = problems.into_inner();
    let cells = cells.into_inner();
    Ok(BenchReport {
        elapsed_secs: elapsed,
        problems,
        problems_per_sec: problems as f64 / elapsed,
        cells_per_sec: cells as f64 / elapsed,
        ..empty
    })
}
