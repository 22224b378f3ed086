//! Drawing labeled problems from a weighted mix of generator options.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, DistributionSet, GeneratorMixConfig, GeneratorOption, WeightedDist, MIN_VARS};
use crate::clause_gen::RandomClauseSampler;
use crate::cnf::{Assignment, Cnf, DenseEncoding, Label, LabeledProblem, Orientation, Witness};
use crate::rand_dist::{sample_clause_count, BoolSampler, Categorical, CountSampler, IndexSampler, RngState};
use crate::sat_gen::{biased_sat_cover, generate_sat, sat_cover, SatGenConfig};
use crate::unsat_gen::{generate_unsat, unsat_with_sat_tail, UnsatGenConfig};
use crate::GenError;

/// Records generated per parallel chunk when streaming.
const CHUNK: usize = 1024;

#[derive(Clone, Debug)]
struct WeightedList<T> {
    items: Vec<T>,
    pick: Categorical,
}

impl<T: Clone> WeightedList<T> {
    fn new(items: Vec<T>, weights: &[f64]) -> Result<Self, ConfigError> {
        let pick = Categorical::new(weights).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(WeightedList { items, pick })
    }

    fn sample(&self, rng: &mut RngState) -> T {
        self.items[self.pick.sample(rng)].clone()
    }
}

fn dist_list(list: &[WeightedDist]) -> Result<WeightedList<crate::DistributionSpec>, ConfigError> {
    let weights: Vec<f64> = list.iter().map(|w| w.weight).collect();
    WeightedList::new(list.iter().map(|w| w.dist.clone()).collect(), &weights)
}

/// A validated mix, ready to sample from.
#[derive(Clone, Debug)]
pub struct MixSampler {
    cfg: GeneratorMixConfig,
    sat: Option<WeightedList<GeneratorOption>>,
    unsat: Option<WeightedList<GeneratorOption>>,
    shift: [WeightedList<crate::DistributionSpec>; 5],
}

/// One mix draw together with the option that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct MixSample {
    pub problem: LabeledProblem,
    pub option: GeneratorOption,
}

fn option_list(list: &[super::config::WeightedOption]) -> Result<Option<WeightedList<GeneratorOption>>, ConfigError> {
    if list.iter().all(|o| o.weight == 0.0) {
        return Ok(None);
    }
    let weights: Vec<f64> = list.iter().map(|o| o.weight).collect();
    WeightedList::new(list.iter().map(|o| o.option).collect(), &weights).map(Some)
}

impl MixSampler {
    pub fn new(cfg: &GeneratorMixConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let s = &cfg.shift;
        Ok(MixSampler {
            cfg: cfg.clone(),
            sat: option_list(&cfg.sat_options)?,
            unsat: option_list(&cfg.unsat_options)?,
            shift: [
                dist_list(&s.vars)?,
                dist_list(&s.lits_clause)?,
                dist_list(&s.polarities)?,
                dist_list(&s.polarity_bias)?,
                dist_list(&s.bloom)?,
            ],
        })
    }

    pub fn config(&self) -> &GeneratorMixConfig {
        &self.cfg
    }

    /// Class first, then an option within the class.
    pub fn sample_option(&self, rng: &mut RngState) -> GeneratorOption {
        let sat = match (&self.sat, &self.unsat) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            _ => rng.random_bool(self.cfg.sat_fraction),
        };
        let list = if sat { &self.sat } else { &self.unsat };
        list.as_ref().expect("validated").sample(rng)
    }

    fn shifted(&self, rng: &mut RngState) -> DistributionSet {
        let [vars, lits, pols, bias, bloom] = &self.shift;
        DistributionSet {
            vars: vars.sample(rng),
            lits_clause: lits.sample(rng),
            polarities: pols.sample(rng),
            polarity_bias: bias.sample(rng),
            bloom: bloom.sample(rng),
        }
    }

    pub fn sample(&self, rng: &mut RngState) -> Result<MixSample, GenError> {
        let option = self.sample_option(rng);
        let problem = self.sample_with(option, rng)?;
        Ok(MixSample { problem, option })
    }

    /// Run one specific option with freshly drawn `n`, `m`, and distributions.
    pub fn sample_with(&self, option: GeneratorOption, rng: &mut RngState) -> Result<LabeledProblem, GenError> {
        let d = if option.shifted() { self.shifted(rng) } else { self.cfg.base.clone() };
        let n = rng.random_range(MIN_VARS..=self.cfg.max_vars);
        let m = sample_clause_count(self.cfg.ratio_for(&d.vars, &d.lits_clause), n, rng);
        let sat_cfg = SatGenConfig {
            n,
            m,
            vars: d.vars.clone(),
            lits_clause: d.lits_clause.clone(),
            polarities: d.polarities.clone(),
            polarity_bias: d.polarity_bias.clone(),
        };
        let shallow = self.unsat_cfg(n, m, &d, false);
        let deep = self.unsat_cfg(n, m, &d, true);
        use GeneratorOption as G;
        match option {
            G::UniformBias | G::UniformBiasShift => generate_sat(&sat_cfg, rng),
            G::BiasedCoverFlip | G::RandomBiasedCoverFlipShift => {
                let f = random_formula(&sat_cfg, rng)?;
                biased(f, &sat_cfg, true, rng)
            }
            G::BiasedCoverNoflip | G::RandomBiasedCoverNoflipShift => {
                let f = random_formula(&sat_cfg, rng)?;
                biased(f, &sat_cfg, false, rng)
            }
            G::RandomUniformBiasShift => {
                let f = random_formula(&sat_cfg, rng)?;
                covered(f, &sat_cfg, rng)
            }
            G::UnsatUniformBiasShift => {
                let f = generate_unsat(&shallow, rng)?.cnf;
                covered(f, &sat_cfg, rng)
            }
            G::UnsatBiasedCoverFlipShift | G::UnsatBiasedCoverNoflipShift => {
                let f = generate_unsat(&shallow, rng)?.cnf;
                biased(f, &sat_cfg, option == G::UnsatBiasedCoverFlipShift, rng)
            }
            G::SatBiasedCoverFlipShift => {
                let f = generate_sat(&sat_cfg, rng)?.cnf;
                biased(f, &sat_cfg, true, rng)
            }
            G::ShallowBloom | G::ShallowBloomShift => generate_unsat(&shallow, rng),
            G::DeepBloom | G::DeepBloomShift => generate_unsat(&deep, rng),
            G::SatShallowBloomShift => unsat_with_sat_tail(&shallow, &sat_cfg, rng),
            G::SatDeepBloomShift => unsat_with_sat_tail(&deep, &sat_cfg, rng),
        }
    }

    fn unsat_cfg(&self, n: usize, m: usize, d: &DistributionSet, deep: bool) -> UnsatGenConfig {
        let preset = if deep { &self.cfg.deep } else { &self.cfg.shallow };
        UnsatGenConfig {
            n,
            m,
            init_size: self.cfg.init_size.min(m / 2).max(1),
            depth: preset.depth,
            down_clause: crate::DistributionSpec::Bernoulli { p: preset.down_clause },
            vars: d.vars.clone(),
            lits_clause: d.lits_clause.clone(),
            polarities: d.polarities.clone(),
            bloom: d.bloom.clone(),
            record_trace: false,
        }
    }
}

fn random_formula(cfg: &SatGenConfig, rng: &mut RngState) -> Result<Cnf, GenError> {
    let sampler = RandomClauseSampler {
        vars: IndexSampler::new(&cfg.vars, cfg.n)?,
        lits: CountSampler::new(&cfg.lits_clause)?,
        polarities: BoolSampler::new(&cfg.polarities)?,
    };
    Ok(Cnf::new(cfg.n, sampler.clauses(cfg.m, rng))?)
}

fn hidden_assignment(cfg: &SatGenConfig, rng: &mut RngState) -> Result<Assignment, GenError> {
    let p = BoolSampler::new(&cfg.polarities)?;
    Ok(Assignment::new((0..cfg.n).map(|_| p.sample(rng)).collect()))
}

fn sat_problem(cnf: Cnf, alpha: Assignment) -> LabeledProblem {
    LabeledProblem { cnf, label: Label::Sat, witness: Witness::Assignment(alpha) }
}

fn covered(f: Cnf, cfg: &SatGenConfig, rng: &mut RngState) -> Result<LabeledProblem, GenError> {
    let alpha = hidden_assignment(cfg, rng)?;
    let cnf = sat_cover(&f, &alpha, &cfg.polarity_bias, rng)?;
    Ok(sat_problem(cnf, alpha))
}

fn biased(f: Cnf, cfg: &SatGenConfig, flip: bool, rng: &mut RngState) -> Result<LabeledProblem, GenError> {
    let alpha = hidden_assignment(cfg, rng)?;
    let cnf = biased_sat_cover(&f, &alpha, flip, rng)?.cnf;
    Ok(sat_problem(cnf, alpha))
}

/// One dataset row: the dense matrix plus where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub encoding: DenseEncoding,
    pub label: Label,
    pub n: usize,
    pub m: usize,
    pub option_id: u8,
    pub seed: u64,
    pub stream: u64,
}

impl DatasetRecord {
    pub fn from_problem(p: &LabeledProblem, option: GeneratorOption, seed: u64, stream: u64) -> Self {
        DatasetRecord {
            encoding: p.cnf.to_dense(),
            label: p.label,
            n: p.cnf.num_vars(),
            m: p.cnf.num_clauses(),
            option_id: option.id(),
            seed,
            stream,
        }
    }

    pub fn to_cnf(&self) -> Cnf {
        Cnf::from_dense(&self.encoding)
    }
}

/// Record `stream` of the dataset seeded with `seed`.
pub fn generate_record(mix: &MixSampler, seed: u64, stream: u64) -> Result<DatasetRecord, GenError> {
    let mut rng = RngState::new(seed, stream);
    let s = mix.sample(&mut rng)?;
    Ok(DatasetRecord::from_problem(&s.problem, s.option, seed, stream))
}

/// Records `0..count` in stream order; generated in parallel.
pub fn generate_records(mix: &MixSampler, seed: u64, count: usize) -> Result<Vec<DatasetRecord>, GenError> {
    let mut out = Vec::with_capacity(count);
    for_each_record(mix, seed, count, |r| {
        out.push(r);
        Ok::<_, GenError>(())
    })?;
    Ok(out)
}

/// Streams records to `sink` in stream order, generating a chunk at a time.
pub fn for_each_record<F, E>(mix: &MixSampler, seed: u64, count: usize, mut sink: F) -> Result<(), E>
where
    F: FnMut(DatasetRecord) -> Result<(), E>,
    E: From<GenError>,
{
    let mut start = 0;
    while start < count {
        let end = (start + CHUNK).min(count);
        let chunk: Result<Vec<_>, GenError> =
            (start..end).into_par_iter().map(|i| generate_record(mix, seed, i as u64)).collect();
        for r in chunk? {
            sink(r)?;
        }
        start = end;
    }
    Ok(())
}

/// Shape limits for fixed-size batches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub batch_size: usize,
    /// Every record is padded with zero columns to this width.
    pub max_vars: usize,
    pub max_clauses: usize,
    pub orientation: Orientation,
}

impl BatchSpec {
    pub fn fits(&self, n: usize, m: usize) -> bool {
        n <= self.max_vars && m <= self.max_clauses
    }

    /// Zero-pads the columns of `enc` to `max_vars`; `None` if it exceeds a cap.
    pub fn pad(&self, enc: &DenseEncoding) -> Option<DenseEncoding> {
        if !self.fits(enc.cols(), enc.rows()) {
            return None;
        }
        let mut cells = Vec::with_capacity(enc.rows() * self.max_vars);
        for i in 0..enc.rows() {
            cells.extend_from_slice(enc.row(i));
            cells.resize((i + 1) * self.max_vars, 0);
        }
        Some(DenseEncoding::from_cells(enc.rows(), self.max_vars, cells).expect("shape is consistent"))
    }

    /// Groups fitting records into batches of `batch_size`, padded, with the
    /// number of records skipped for exceeding a cap.
    pub fn batches(&self, records: &[DatasetRecord]) -> (Vec<Vec<DenseEncoding>>, usize) {
        let mut skipped = 0;
        let mut padded = Vec::new();
        for r in records {
            match self.pad(&r.encoding) {
                Some(e) => padded.push(e),
                None => skipped += 1,
            }
        }
        let size = self.batch_size.max(1);
        (padded.chunks(size).map(|c| c.to_vec()).collect(), skipped)
    }
}
