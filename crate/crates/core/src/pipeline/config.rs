//! Generator-mix configuration: option weights, the distributions drawn under
//! distribution shift, and clause-to-variable ratios.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rand_dist::{ClauseRatioSpec, DistributionSpec};

/// Smallest variable count drawn by the mix.
pub const MIN_VARS: usize = 4;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Every generator option the mix knows about. The numeric id is stable and
/// is what the packed format stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorOption {
    UniformBias,
    BiasedCoverFlip,
    BiasedCoverNoflip,
    RandomUniformBiasShift,
    UnsatUniformBiasShift,
    UniformBiasShift,
    RandomBiasedCoverFlipShift,
    RandomBiasedCoverNoflipShift,
    UnsatBiasedCoverFlipShift,
    UnsatBiasedCoverNoflipShift,
    SatBiasedCoverFlipShift,
    ShallowBloom,
    DeepBloom,
    ShallowBloomShift,
    DeepBloomShift,
    SatShallowBloomShift,
    SatDeepBloomShift,
}

impl GeneratorOption {
    pub const ALL: [GeneratorOption; 17] = [
        GeneratorOption::UniformBias,
        GeneratorOption::BiasedCoverFlip,
        GeneratorOption::BiasedCoverNoflip,
        GeneratorOption::RandomUniformBiasShift,
        GeneratorOption::UnsatUniformBiasShift,
        GeneratorOption::UniformBiasShift,
        GeneratorOption::RandomBiasedCoverFlipShift,
        GeneratorOption::RandomBiasedCoverNoflipShift,
        GeneratorOption::UnsatBiasedCoverFlipShift,
        GeneratorOption::UnsatBiasedCoverNoflipShift,
        GeneratorOption::SatBiasedCoverFlipShift,
        GeneratorOption::ShallowBloom,
        GeneratorOption::DeepBloom,
        GeneratorOption::ShallowBloomShift,
        GeneratorOption::DeepBloomShift,
        GeneratorOption::SatShallowBloomShift,
        GeneratorOption::SatDeepBloomShift,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn produces_sat(self) -> bool {
        self.id() <= GeneratorOption::SatBiasedCoverFlipShift.id()
    }

    /// Whether the option redraws its distributions from the shift tables.
    pub fn shifted(self) -> bool {
        !matches!(
            self,
            GeneratorOption::UniformBias
                | GeneratorOption::BiasedCoverFlip
                | GeneratorOption::BiasedCoverNoflip
                | GeneratorOption::ShallowBloom
                | GeneratorOption::DeepBloom
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GeneratorOption::UniformBias => "uniform_bias",
            GeneratorOption::BiasedCoverFlip => "biased_cover_flip",
            GeneratorOption::BiasedCoverNoflip => "biased_cover_noflip",
            GeneratorOption::RandomUniformBiasShift => "random_uniform_bias_shift",
            GeneratorOption::UnsatUniformBiasShift => "unsat_uniform_bias_shift",
            GeneratorOption::UniformBiasShift => "uniform_bias_shift",
            GeneratorOption::RandomBiasedCoverFlipShift => "random_biased_cover_flip_shift",
            GeneratorOption::RandomBiasedCoverNoflipShift => "random_biased_cover_noflip_shift",
            GeneratorOption::UnsatBiasedCoverFlipShift => "unsat_biased_cover_flip_shift",
            GeneratorOption::UnsatBiasedCoverNoflipShift => "unsat_biased_cover_noflip_shift",
            GeneratorOption::SatBiasedCoverFlipShift => "sat_biased_cover_flip_shift",
            GeneratorOption::ShallowBloom => "shallow_bloom",
            GeneratorOption::DeepBloom => "deep_bloom",
            GeneratorOption::ShallowBloomShift => "shallow_bloom_shift",
            GeneratorOption::DeepBloomShift => "deep_bloom_shift",
            GeneratorOption::SatShallowBloomShift => "sat_shallow_bloom_shift",
            GeneratorOption::SatDeepBloomShift => "sat_deep_bloom_shift",
        }
    }
}

impl fmt::Display for GeneratorOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedOption {
    pub option: GeneratorOption,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedDist {
    pub weight: f64,
    pub dist: DistributionSpec,
}

/// The distributions one generated problem is drawn with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSet {
    pub vars: DistributionSpec,
    pub lits_clause: DistributionSpec,
    pub polarities: DistributionSpec,
    pub polarity_bias: DistributionSpec,
    pub bloom: DistributionSpec,
}

/// Weighted alternatives for each role, used by shifted options.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftTables {
    pub vars: Vec<WeightedDist>,
    pub lits_clause: Vec<WeightedDist>,
    pub polarities: Vec<WeightedDist>,
    pub polarity_bias: Vec<WeightedDist>,
    pub bloom: Vec<WeightedDist>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseRatioTable {
    /// Uniform variables with uniformly mixed clause widths.
    pub uniform_mixed: ClauseRatioSpec,
    /// Power-law variable distributions.
    pub power_law: ClauseRatioSpec,
    pub other: ClauseRatioSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloomPreset {
    /// Omitted means no round limit.
    pub depth: Option<usize>,
    /// Per-clause probability of being bloomed in a round.
    pub down_clause: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorMixConfig {
    pub seed: u64,
    pub max_vars: usize,
    /// Probability of drawing a SAT option.
    pub sat_fraction: f64,
    /// Number of complementary unit pairs an UNSAT core starts from.
    pub init_size: usize,
    pub shallow: BloomPreset,
    pub deep: BloomPreset,
    pub sat_options: Vec<WeightedOption>,
    pub unsat_options: Vec<WeightedOption>,
    pub base: DistributionSet,
    pub shift: ShiftTables,
    pub clause_ratio: ClauseRatioTable,
}

fn wd(weight: f64, dist: DistributionSpec) -> WeightedDist {
    WeightedDist { weight, dist }
}

fn wo(option: GeneratorOption, weight: f64) -> WeightedOption {
    WeightedOption { option, weight }
}

fn ratio(mean: f64) -> ClauseRatioSpec {
    ClauseRatioSpec { mean, std: 1.0, clip: (2.0, 11.0) }
}

pub fn normal_lits() -> DistributionSpec {
    DistributionSpec::NormalClipped { mean: 4.5, std: 1.0, lo: 1.0, hi: 1024.0 }
}

impl Default for DistributionSet {
    fn default() -> Self {
        DistributionSet {
            vars: DistributionSpec::uniform_vars(),
            lits_clause: normal_lits(),
            polarities: DistributionSpec::Bernoulli { p: 0.5 },
            polarity_bias: DistributionSpec::UniformNonZeroBias,
            bloom: DistributionSpec::BloomWeights { w0: 0.48, w1: 0.48, w2: 0.02 },
        }
    }
}

impl Default for GeneratorMixConfig {
    fn default() -> Self {
        use DistributionSpec as D;
        use GeneratorOption as G;
        GeneratorMixConfig {
            seed: 0,
            max_vars: 20,
            sat_fraction: 0.5,
            init_size: 2,
            shallow: BloomPreset { depth: Some(3), down_clause: 0.5 },
            deep: BloomPreset { depth: None, down_clause: 1.0 },
            sat_options: vec![
                wo(G::UniformBias, 41.0),
                wo(G::BiasedCoverFlip, 1.0),
                wo(G::BiasedCoverNoflip, 1.0),
                wo(G::RandomUniformBiasShift, 5.0),
                wo(G::UnsatUniformBiasShift, 5.0),
                wo(G::UniformBiasShift, 20.0),
                wo(G::RandomBiasedCoverFlipShift, 5.0),
                wo(G::RandomBiasedCoverNoflipShift, 5.0),
                wo(G::UnsatBiasedCoverFlipShift, 6.0),
                wo(G::UnsatBiasedCoverNoflipShift, 6.0),
                wo(G::SatBiasedCoverFlipShift, 5.0),
            ],
            unsat_options: vec![
                wo(G::ShallowBloom, 43.0),
                wo(G::DeepBloom, 10.0),
                wo(G::ShallowBloomShift, 31.0),
                wo(G::DeepBloomShift, 5.0),
                wo(G::SatShallowBloomShift, 10.0),
                wo(G::SatDeepBloomShift, 1.0),
            ],
            base: DistributionSet::default(),
            shift: ShiftTables {
                vars: vec![
                    wd(70.0, D::uniform_vars()),
                    wd(20.0, D::Pareto { shape: 1.16, scale: 2.0 }),
                    wd(0.0, D::PowerLaw { beta: 2.6 }),
                    wd(10.0, D::LogNormal { mu: 10.0, sigma: 2.0 }),
                ],
                lits_clause: vec![wd(90.0, normal_lits()), wd(10.0, D::UniformIndex { low: 3, high: 7 })],
                polarities: vec![
                    wd(80.0, D::Bernoulli { p: 0.5 }),
                    wd(10.0, D::Bernoulli { p: 0.3 }),
                    wd(10.0, D::Bernoulli { p: 0.7 }),
                ],
                polarity_bias: vec![wd(100.0, D::UniformNonZeroBias), wd(0.0, D::KMinusOneBias)],
                bloom: vec![
                    wd(85.0, D::BloomWeights { w0: 0.48, w1: 0.48, w2: 0.02 }),
                    wd(15.0, D::BloomWeights { w0: 0.5, w1: 0.3, w2: 0.2 }),
                ],
            },
            clause_ratio: ClauseRatioTable { uniform_mixed: ratio(4.27), power_law: ratio(3.71), other: ratio(4.27) },
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

fn check_option_weights(list: &[WeightedOption], want_sat: bool, what: &str) -> Result<(), ConfigError> {
    for o in list {
        if o.option.produces_sat() != want_sat {
            return invalid(format!("{} listed under {what}", o.option));
        }
        if !(o.weight.is_finite() && o.weight >= 0.0) {
            return invalid(format!("{what}: weight of {} must be finite and non-negative", o.option));
        }
    }
    Ok(())
}

fn check_dist_weights(list: &[WeightedDist], what: &str) -> Result<(), ConfigError> {
    if list.is_empty() || list.iter().all(|w| w.weight == 0.0) {
        return invalid(format!("shift.{what} needs a positive weight"));
    }
    for w in list {
        if !(w.weight.is_finite() && w.weight >= 0.0) {
            return invalid(format!("shift.{what}: weights must be finite and non-negative"));
        }
        w.dist.validate().map_err(|e| ConfigError::Invalid(format!("shift.{what}: {e}")))?;
    }
    Ok(())
}

impl GeneratorMixConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: GeneratorMixConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_vars < MIN_VARS {
            return invalid(format!("max_vars must be at least {MIN_VARS}"));
        }
        if !(0.0..=1.0).contains(&self.sat_fraction) {
            return invalid("sat_fraction must lie in [0, 1]");
        }
        if self.init_size == 0 {
            return invalid("init_size must be at least 1");
        }
        for (name, p) in [("shallow", &self.shallow), ("deep", &self.deep)] {
            if !(p.down_clause > 0.0 && p.down_clause <= 1.0) {
                return invalid(format!("{name}.down_clause must lie in (0, 1]"));
            }
        }
        check_option_weights(&self.sat_options, true, "sat_options")?;
        check_option_weights(&self.unsat_options, false, "unsat_options")?;
        let sat_total: f64 = self.sat_options.iter().map(|o| o.weight).sum();
        let unsat_total: f64 = self.unsat_options.iter().map(|o| o.weight).sum();
        if self.sat_fraction > 0.0 && sat_total <= 0.0 {
            return invalid("sat_fraction is positive but no SAT option has weight");
        }
        if self.sat_fraction < 1.0 && unsat_total <= 0.0 {
            return invalid("sat_fraction is below 1 but no UNSAT option has weight");
        }
        let b = &self.base;
        for (what, d) in [
            ("vars", &b.vars),
            ("lits_clause", &b.lits_clause),
            ("polarities", &b.polarities),
            ("polarity_bias", &b.polarity_bias),
            ("bloom", &b.bloom),
        ] {
            d.validate().map_err(|e| ConfigError::Invalid(format!("base.{what}: {e}")))?;
        }
        let s = &self.shift;
        check_dist_weights(&s.vars, "vars")?;
        check_dist_weights(&s.lits_clause, "lits_clause")?;
        check_dist_weights(&s.polarities, "polarities")?;
        check_dist_weights(&s.polarity_bias, "polarity_bias")?;
        check_dist_weights(&s.bloom, "bloom")?;
        for r in [&self.clause_ratio.uniform_mixed, &self.clause_ratio.power_law, &self.clause_ratio.other] {
            r.validate().map_err(|e| ConfigError::Invalid(format!("clause_ratio: {e}")))?;
            if r.clip.0 <= 0.0 {
                return invalid("clause_ratio clip must be positive");
            }
        }
        Ok(())
    }

    /// The ratio row that applies to a problem drawn with `vars` and `lits`.
    pub fn ratio_for(&self, vars: &DistributionSpec, lits: &DistributionSpec) -> &ClauseRatioSpec {
        let uniform_vars = matches!(vars, DistributionSpec::UniformIndex { .. });
        let mixed_width = matches!(lits, DistributionSpec::UniformIndex { low, high } if low < high);
        if matches!(vars, DistributionSpec::PowerLaw { .. }) {
            &self.clause_ratio.power_law
        } else if uniform_vars && mixed_width {
            &self.clause_ratio.uniform_mixed
        } else {
            &self.clause_ratio.other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED: &str = include_str!("../../config/default.toml");

    #[test]
    fn shipped_config_matches_default() {
        let cfg = GeneratorMixConfig::from_toml(SHIPPED).unwrap();
        assert_eq!(cfg, GeneratorMixConfig::default());
    }

    #[test]
    fn default_round_trips() {
        let cfg = GeneratorMixConfig::default();
        assert_eq!(GeneratorMixConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn table_weights_sum_to_100() {
        let cfg = GeneratorMixConfig::default();
        let s: f64 = cfg.sat_options.iter().map(|o| o.weight).sum();
        let u: f64 = cfg.unsat_options.iter().map(|o| o.weight).sum();
        assert_eq!((s, u), (100.0, 100.0));
        for list in
            [&cfg.shift.vars, &cfg.shift.lits_clause, &cfg.shift.polarities, &cfg.shift.polarity_bias, &cfg.shift.bloom]
        {
            assert_eq!(list.iter().map(|w| w.weight).sum::<f64>(), 100.0);
        }
    }

    #[test]
    fn option_ids_are_stable() {
        for (i, o) in GeneratorOption::ALL.iter().enumerate() {
            assert_eq!(o.id() as usize, i);
            assert_eq!(GeneratorOption::from_id(i as u8), Some(*o));
        }
        assert_eq!(GeneratorOption::from_id(17), None);
        assert_eq!(GeneratorOption::ALL.iter().filter(|o| o.produces_sat()).count(), 11);
    }

    #[test]
    fn unknown_option_is_a_load_error() {
        let text = SHIPPED.replace("\"shallow_bloom\"", "\"frege_bloom\"");
        assert!(matches!(GeneratorMixConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn misplaced_option_rejected() {
        let mut cfg = GeneratorMixConfig::default();
        cfg.sat_options.push(WeightedOption { option: GeneratorOption::DeepBloom, weight: 1.0 });
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn small_max_vars_rejected() {
        let cfg = GeneratorMixConfig { max_vars: 3, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn ratio_rows() {
        let cfg = GeneratorMixConfig::default();
        let mixed = DistributionSpec::UniformIndex { low: 3, high: 7 };
        assert_eq!(cfg.ratio_for(&DistributionSpec::uniform_vars(), &mixed).mean, 4.27);
        assert_eq!(cfg.ratio_for(&DistributionSpec::PowerLaw { beta: 2.6 }, &mixed).mean, 3.71);
        assert!(std::ptr::eq(
            cfg.ratio_for(&DistributionSpec::uniform_vars(), &normal_lits()),
            &cfg.clause_ratio.other
        ));
    }
}
