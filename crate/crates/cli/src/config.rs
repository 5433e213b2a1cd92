use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use search_collusion::{Error, IntegrationConfig, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntList {
    One(u32),
    Many(Vec<u32>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RealList {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

/// Keys accepted in a `--config` JSON file; command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub firms: Option<IntList>,
    pub shoppers: Option<f64>,
    pub search_cost: Option<RealList>,
    pub valuation: Option<f64>,
    pub grid: Option<usize>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Error> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("invalid config {}: {e}", path.display())))
    }
}

/// `"3..10"` (inclusive), `"2,3,5"` or `"4"`.
pub fn parse_int_list(text: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::InvalidParameter(format!("cannot parse firm list {text:?}"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| bad())?;
        let hi: u32 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

pub fn parse_real_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse number list {text:?}")))
        })
        .collect()
}

impl IntList {
    pub fn resolve(&self) -> Result<Vec<u32>, Error> {
        match self {
            IntList::One(n) => Ok(vec![*n]),
            IntList::Many(v) => Ok(v.clone()),
            IntList::Text(t) => parse_int_list(t),
        }
    }
}

impl RealList {
    pub fn resolve(&self) -> Result<Vec<f64>, Error> {
        match self {
            RealList::One(x) => Ok(vec![*x]),
            RealList::Many(v) => Ok(v.clone()),
            RealList::Text(t) => parse_real_list(t),
        }
    }
}

pub fn firms(flag: Option<&str>, file: &FileConfig, default: &[u32]) -> Result<Vec<u32>, Error> {
    let list = match (flag, &file.firms) {
        (Some(f), _) => parse_int_list(f)?,
        (None, Some(f)) => f.resolve()?,
        (None, None) => default.to_vec(),
    };
    if list.is_empty() {
        return Err(Error::InvalidParameter("empty firm list".into()));
    }
    Ok(list)
}

pub fn search_costs(
    flag: Option<&str>,
    file: &FileConfig,
    default: &[f64],
) -> Result<Vec<f64>, Error> {
    let list = match (flag, &file.search_cost) {
        (Some(f), _) => parse_real_list(f)?,
        (None, Some(f)) => f.resolve()?,
        (None, None) => default.to_vec(),
    };
    if list.is_empty() {
        return Err(Error::InvalidParameter("empty search-cost list".into()));
    }
    Ok(list)
}

pub fn integration(
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    file: &FileConfig,
) -> Result<IntegrationConfig, Error> {
    let base = IntegrationConfig::default();
    base.with_tolerances(
        abs_tol.or(file.abs_tol).unwrap_or(base.abs_tol),
        rel_tol.or(file.rel_tol).unwrap_or(base.rel_tol),
    )
}

/// Everything a sweep needs, validated before any computation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_firms: Vec<u32>,
    pub search_costs: Vec<f64>,
    pub valuation: f64,
    pub grid_points: usize,
    pub integration: IntegrationConfig,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {}",
                self.grid_points
            )));
        }
        for &n in &self.n_firms {
            for &s in &self.search_costs {
                MarketParams::new(n, 0.5, s, self.valuation)?;
            }
        }
        self.integration.validate()
    }
}
