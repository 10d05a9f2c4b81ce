//! Run specification: network config file parsing, sweep axes, overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use blockline_core::{NetworkConfig, SimConfig};

use crate::error::{CliError, CliResult};

/// Subcommand being executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Estimate,
    Simulate,
    Delay,
    Compare,
    Sweep,
}

/// One sweep axis: a parameter name and the values to visit.
/// Valid parameters: `m` (uniform buffer size in packets), `K` (block
/// size), `eps` (uniform erasure on all links), `eps_<i>` (erasure of link
/// `i`, 1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

/// The network portion of a config file. Buffers are given either in
/// blocks or in packets (which must be positive multiples of the block
/// size); exactly one of the two forms must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub erasures: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_blocks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_packets: Option<Vec<usize>>,
    pub block_size: usize,
}

impl NetworkFile {
    pub fn resolve(&self) -> CliResult<NetworkConfig> {
        let cfg = match (&self.buffer_blocks, &self.buffer_packets) {
            (Some(blocks), None) => {
                NetworkConfig::new(self.erasures.clone(), blocks.clone(), self.block_size)
            }
            (None, Some(packets)) => NetworkConfig::from_packets(
                self.erasures.clone(),
                packets.clone(),
                self.block_size,
            ),
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either buffer_blocks or buffer_packets, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "missing buffer_blocks or buffer_packets".into(),
                ))
            }
        };
        cfg.map_err(CliError::from)
    }
}

/// Top-level config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileConfig {
    #[serde(flatten)]
    pub network: NetworkFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

/// A fully resolved run: what to do, on which network, with what settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: Command,
    pub network: NetworkFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    pub out_dir: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub tail_tol: f64,
    pub gauss_seidel: bool,
}

impl RunSpec {
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunSpec serializes")
    }

    /// Inverse of [`RunSpec::emit`]; `parse(emit(spec)) == spec`.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn parse(json: &str) -> CliResult<RunSpec> {
        let spec: RunSpec =
            serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.network.resolve()?;
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        if let Some(axis) = &self.sweep {
            validate_axis(&self.network, axis)?;
        }
        let tol_ok = self.tol > 0.0 && self.tail_tol > 0.0 && self.tail_tol < 1.0;
        if !tol_ok {
            return Err(CliError::Config(format!(
                "tolerances out of range (tol {}, tail_tol {})",
                self.tol, self.tail_tol
            )));
        }
        Ok(())
    }
}

pub fn load_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg: FileConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.network.resolve()?;
    if let Some(sim) = &cfg.sim {
        sim.validate()?;
    }
    if let Some(axis) = &cfg.sweep {
        validate_axis(&cfg.network, axis)?;
    }
    Ok(cfg)
}

fn validate_axis(network: &NetworkFile, axis: &SweepAxis) -> CliResult<()> {
    if axis.values.is_empty() {
        return Err(CliError::Config("sweep values must be non-empty".into()));
    }
    for &value in &axis.values {
        apply_axis(network, axis, value)?;
    }
    Ok(())
}

/// Instantiate the swept network at one axis value.
pub fn apply_axis(network: &NetworkFile, axis: &SweepAxis, value: f64) -> CliResult<NetworkConfig> {
    let h = network.erasures.len();
    let base = network.resolve()?;
    let as_count = |value: f64, what: &str| -> CliResult<usize> {
        if value < 1.0 || value.fract() != 0.0 {
            Err(CliError::Config(format!(
                "sweep value {value} is not a positive integer {what}"
            )))
        } else {
            Ok(value as usize)
        }
    };
    match axis.param.as_str() {
        "m" => {
            let m = as_count(value, "buffer size in packets")?;
            NetworkConfig::from_packets(
                base.erasures.clone(),
                vec![m; h - 1],
                base.block_size,
            )
            .map_err(CliError::from)
        }
        "K" => {
            let k = as_count(value, "block size")?;
            match (&network.buffer_packets, &network.buffer_blocks) {
                // Packet-sized buffers stay fixed; K must divide them.
                (Some(packets), _) => {
                    NetworkConfig::from_packets(base.erasures.clone(), packets.clone(), k)
                        .map_err(CliError::from)
                }
                // Block counts stay fixed; buffer grows with K.
                (None, Some(blocks)) => {
                    NetworkConfig::new(base.erasures.clone(), blocks.clone(), k)
                        .map_err(CliError::from)
                }
                (None, None) => unreachable!("resolve() checked"),
            }
        }
        "eps" => NetworkConfig::new(vec![value; h], base.buffer_blocks.clone(), base.block_size)
            .map_err(CliError::from),
        other => {
            if let Some(link) = other.strip_prefix("eps_") {
                let link: usize = link.parse().map_err(|_| {
                    CliError::Config(format!("unknown sweep parameter {other}"))
                })?;
                if link == 0 || link > h {
                    return Err(CliError::Config(format!(
                        "sweep link index {link} outside 1..={h}"
                    )));
                }
                let mut erasures = base.erasures.clone();
                erasures[link - 1] = value;
                NetworkConfig::new(erasures, base.buffer_blocks.clone(), base.block_size)
                    .map_err(CliError::from)
            } else {
                Err(CliError::Config(format!(
                    "unknown sweep parameter {other} (expected m, K, eps, or eps_<link>)"
                )))
            }
        }
    }
}
