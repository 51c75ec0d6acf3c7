//! Config-file loading and flag precedence.

use std::path::{Path, PathBuf};

use anyhow::Context;
use couplab_core::harness::{EngineChoice, ExperimentConfig, Format, PaddedGrid};
use couplab_core::Error;
use serde::Deserialize;

use crate::Common;

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub t: Option<usize>,
    pub p: Option<u32>,
    pub delta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<toml::Value>,
    pub engine: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub grid_n: Option<Vec<usize>>,
    pub grid_k: Option<Vec<usize>>,
    pub grid_t: Option<Vec<usize>>,
    pub grid_p: Option<Vec<u32>>,
}

/// Settings after merging the config file with command-line flags.
#[derive(Debug, Clone)]
pub struct Overrides {
    pub base: ExperimentConfig,
    pub samples: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub grid: Option<PaddedGrid>,
}

fn parse_format(s: &str) -> Result<Format, Error> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(Error::Config(format!("unknown format `{other}` (expected csv or json)"))),
    }
}

fn parse_engine(s: &str) -> Result<EngineChoice, Error> {
    match s {
        "categorical" => Ok(EngineChoice::Categorical),
        "statevec" => Ok(EngineChoice::Statevec),
        other => Err(Error::Config(format!("unknown engine `{other}` (expected categorical or statevec)"))),
    }
}

pub fn grid_override(base: &PaddedGrid, c: &Common) -> Option<PaddedGrid> {
    if c.grid_n.is_none() && c.grid_k.is_none() && c.grid_t.is_none() && c.grid_p.is_none() {
        return None;
    }
    Some(PaddedGrid {
        ns: c.grid_n.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| base.ns.clone()),
        ks: c.grid_k.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| base.ks.clone()),
        ts: c.grid_t.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| base.ts.clone()),
        ps: c.grid_p.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| base.ps.clone()),
    })
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())).into())
    }

    fn samples_string(&self) -> Result<Option<String>, Error> {
        match &self.samples {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(v.to_string())),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Error::Config(format!("samples must be a count or a range string, got {other}"))),
        }
    }

    /// Flags in `c` win over file values.
    pub fn merge(self, c: &Common) -> Result<Overrides, Error> {
        let defaults = ExperimentConfig::default();
        let engine = match c.engine.as_deref().or(self.engine.as_deref()) {
            Some(e) => parse_engine(e)?,
            None => defaults.engine,
        };
        let format = match c.format.as_deref().or(self.format.as_deref()) {
            Some(f) => parse_format(f)?,
            None => Format::Csv,
        };
        let file_grid = if self.grid_n.is_some() || self.grid_k.is_some() || self.grid_t.is_some() || self.grid_p.is_some() {
            let d = PaddedGrid::default();
            Some(PaddedGrid {
                ns: self.grid_n.clone().unwrap_or(d.ns),
                ks: self.grid_k.clone().unwrap_or(d.ks),
                ts: self.grid_t.clone().unwrap_or(d.ts),
                ps: self.grid_p.clone().unwrap_or(d.ps),
            })
        } else {
            None
        };
        let grid = match &file_grid {
            Some(g) => grid_override(g, c).or(file_grid.clone()),
            None => grid_override(&PaddedGrid::default(), c),
        };
        let samples = match &c.samples {
            Some(s) => Some(s.clone()),
            None => self.samples_string()?,
        };
        Ok(Overrides {
            base: ExperimentConfig {
                n: c.n.or(self.n),
                k: c.k.or(self.k),
                l: c.l.or(self.l),
                t: c.t.or(self.t),
                p: c.p.or(self.p),
                delta: c.delta.or(self.delta).unwrap_or(defaults.delta),
                trials: c.trials.or(self.trials).unwrap_or(defaults.trials),
                seed: c.seed.or(self.seed).unwrap_or(defaults.seed),
                samples: None,
                engine,
                trajectories: c.trajectories.is_some(),
            },
            samples,
            out: c.out.clone().or(self.out),
            format,
            grid,
        })
    }
}

impl Overrides {
    /// `--samples` as a single count.
    pub fn samples_count(&self) -> Result<Option<usize>, Error> {
        self.samples
            .as_deref()
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("--samples must be a count, got `{s}`"))))
            .transpose()
    }

    pub fn experiment(&self, samples: Option<usize>) -> Result<ExperimentConfig, Error> {
        Ok(ExperimentConfig { samples, ..self.base.clone() })
    }
}
