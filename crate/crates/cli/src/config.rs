//! Stage configuration: built-in defaults, an optional TOML config file,
//! and command-line overrides, resolved in that order and then validated.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;
use vcontract_core::field::{is_prime_u64, DEFAULT_MODULUS};
use vcontract_core::minimizer::Strategy;

/// Scheduling strategy as spelled on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Lpt,
    RoundRobin,
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyName::Lpt => "lpt",
            StrategyName::RoundRobin => "round-robin",
        })
    }
}

impl From<StrategyName> for Strategy {
    fn from(name: StrategyName) -> Strategy {
        match name {
            StrategyName::Lpt => Strategy::Lpt,
            StrategyName::RoundRobin => Strategy::RoundRobin,
        }
    }
}

/// Fully resolved configuration shared by every pipeline stage.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Machine word width of the contract in bits.
    pub bit_width: u32,
    /// Prime modulus of the circuit field.
    pub field_modulus: u64,
    /// Upper bound on total unrolled iterations per loop.
    pub max_unroll: u32,
    /// Worker threads for the minimizer.
    pub cores: usize,
    /// Submodule scheduling strategy.
    pub minimize_strategy: StrategyName,
    /// Largest single script push in bytes.
    pub max_push: usize,
    /// Largest serialized script in bytes.
    pub max_script: usize,
    /// Seed for key-generation randomness; a fixed seed makes every
    /// artifact byte-reproducible.
    pub rng_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bit_width: 16,
            field_modulus: DEFAULT_MODULUS,
            max_unroll: 1024,
            cores: 1,
            minimize_strategy: StrategyName::Lpt,
            max_push: 520,
            max_script: 1461,
            rng_seed: 1,
        }
    }
}

/// Config-file schema: every key optional, unknown keys rejected so typos
/// surface instead of silently keeping a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bit_width: Option<u32>,
    field_modulus: Option<u64>,
    max_unroll: Option<u32>,
    cores: Option<usize>,
    minimize_strategy: Option<StrategyName>,
    max_push: Option<usize>,
    max_script: Option<usize>,
    rng_seed: Option<u64>,
}

/// Command-line overrides. Every flag mirrors a [`PipelineConfig`] field
/// and beats both the defaults and the config file.
#[derive(Debug, Default, clap::Args)]
pub struct ConfigArgs {
    /// TOML config file applied over the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Machine word width of the contract in bits.
    #[arg(long, alias = "bitwidth", global = true, value_name = "BITS")]
    pub bit_width: Option<u32>,
    /// Prime modulus of the circuit field.
    #[arg(long, global = true, value_name = "PRIME")]
    pub field_modulus: Option<u64>,
    /// Upper bound on total unrolled iterations per loop.
    #[arg(long, global = true, value_name = "N")]
    pub max_unroll: Option<u32>,
    /// Worker threads for the minimizer.
    #[arg(long, global = true, value_name = "N")]
    pub cores: Option<usize>,
    /// Submodule scheduling strategy.
    #[arg(long, alias = "strategy", global = true, value_enum, value_name = "NAME")]
    pub minimize_strategy: Option<StrategyName>,
    /// Largest single script push in bytes.
    #[arg(long, global = true, value_name = "BYTES")]
    pub max_push: Option<usize>,
    /// Largest serialized script in bytes.
    #[arg(long, global = true, value_name = "BYTES")]
    pub max_script: Option<usize>,
    /// Seed for key-generation randomness.
    #[arg(long, global = true, value_name = "SEED")]
    pub rng_seed: Option<u64>,
}

impl ConfigArgs {
    /// Resolves defaults -> config file -> flags and validates the result.
    pub fn resolve(&self) -> Result<PipelineConfig, String> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let file: FileConfig = toml::from_str(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            apply(&mut cfg, &file);
        }
        let flags = FileConfig {
            bit_width: self.bit_width,
            field_modulus: self.field_modulus,
            max_unroll: self.max_unroll,
            cores: self.cores,
            minimize_strategy: self.minimize_strategy,
            max_push: self.max_push,
            max_script: self.max_script,
            rng_seed: self.rng_seed,
        };
        apply(&mut cfg, &flags);
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn apply(cfg: &mut PipelineConfig, over: &FileConfig) {
    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = over.$field {
                cfg.$field = v;
            }
        };
    }
    take!(bit_width);
    take!(field_modulus);
    take!(max_unroll);
    take!(cores);
    take!(minimize_strategy);
    take!(max_push);
    take!(max_script);
    take!(rng_seed);
}

fn validate(cfg: &PipelineConfig) -> Result<(), String> {
    let limits: [(&str, u64); 5] = [
        ("bit_width", cfg.bit_width as u64),
        ("max_unroll", cfg.max_unroll as u64),
        ("cores", cfg.cores as u64),
        ("max_push", cfg.max_push as u64),
        ("max_script", cfg.max_script as u64),
    ];
    for (name, value) in limits {
        if value == 0 {
            return Err(format!("{name} must be positive"));
        }
    }
    if !is_prime_u64(cfg.field_modulus) {
        return Err(format!("field_modulus {} is not prime", cfg.field_modulus));
    }
    // Products of two bit_width-wide values must stay below the modulus,
    // otherwise field reduction would silently change contract arithmetic.
    let product_range =
        (cfg.bit_width <= 31).then(|| 1u64 << (2 * cfg.bit_width));
    if product_range.is_none_or(|r| r >= cfg.field_modulus) {
        return Err(format!(
            "2^(2*bit_width) must be below field_modulus: bit_width {} is too wide for modulus {}",
            cfg.bit_width, cfg.field_modulus
        ));
    }
    Ok(())
}
