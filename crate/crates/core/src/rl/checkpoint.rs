use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Layer, Mlp};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerData {
    /// One row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub format_version: u32,
    pub layer_widths: Vec<usize>,
    pub layers: Vec<LayerData>,
}

impl NetworkCheckpoint {
    pub fn from_mlp(net: &Mlp) -> Self {
        NetworkCheckpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            layer_widths: net.widths(),
            layers: net
                .layers
                .iter()
                .map(|l| LayerData {
                    weights: l.weights.chunks(l.inputs).map(<[f64]>::to_vec).collect(),
                    biases: l.biases.clone(),
                })
                .collect(),
        }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        if self.layer_widths.len() != self.layers.len() + 1 {
            return Err(Error::Checkpoint("layer count does not match widths".into()));
        }
        let layers = self
            .layers
            .iter()
            .zip(self.layer_widths.windows(2))
            .map(|(data, w)| {
                let (inputs, outputs) = (w[0], w[1]);
                if data.weights.len() != outputs
                    || data.weights.iter().any(|r| r.len() != inputs)
                    || data.biases.len() != outputs
                {
                    return Err(Error::Checkpoint(format!(
                        "layer shape does not match {inputs}x{outputs}"
                    )));
                }
                Ok(Layer {
                    inputs,
                    outputs,
                    weights: data.weights.concat(),
                    biases: data.biases.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mlp { layers })
    }
}

/// Saved policy networks of one trained agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub format_version: u32,
    pub scheme: String,
    pub k_outage: usize,
    pub k_ttt: usize,
    pub networks: BTreeMap<String, NetworkCheckpoint>,
}

impl AgentCheckpoint {
    pub fn new(scheme: &str, k_outage: usize, k_ttt: usize) -> Self {
        AgentCheckpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            scheme: scheme.to_string(),
            k_outage,
            k_ttt,
            networks: BTreeMap::new(),
        }
    }

    pub fn with_network(mut self, name: &str, net: &Mlp) -> Self {
        self.networks
            .insert(name.to_string(), NetworkCheckpoint::from_mlp(net));
        self
    }

    pub fn network(&self, name: &str) -> Result<Mlp> {
        self.networks
            .get(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing network '{name}'")))?
            .to_mlp()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: AgentCheckpoint = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "checkpoint".into(),
            source,
        })?;
        if ck.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                ck.format_version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
