//! Versioned JSON weight file shared by the trainer, the quantizer and the
//! hardware evaluator.
//!
//! ```json
//! {
//!   "version": 1,
//!   "topology": [784, 500, 300, 128, 10],
//!   "layers": [
//!     { "inputs": 784, "outputs": 500, "w_max": 0.93,
//!       "weights": [/* inputs × outputs, row-major */],
//!       "bias": [/* outputs */],
//!       "levels": [/* optional, signed -31..=31 */],
//!       "bias_levels": [/* optional */] }
//!   ],
//!   "training": { "seed": 7, "epochs": 10, ... }
//! }
//! ```

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crossbar::{self, WeightLevel};
use crate::error::{Error, Result};
use crate::memristor::LEVELS;
use crate::network::{QuantizedLayer, Topology};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub inputs: usize,
    pub outputs: usize,
    pub w_max: f64,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_levels: Option<Vec<i8>>,
}

impl LayerRecord {
    fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.bias)
            .fold(0.0_f64, |m, &w| m.max(f64::from(w).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f32,
    pub batch: usize,
    pub momentum: f32,
    #[serde(default)]
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub version: u32,
    pub topology: Topology,
    pub layers: Vec<LayerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingMeta>,
}

impl WeightFile {
    pub fn validate(&self) -> Result<()> {
        let shape_err = |msg: String| Error::parse("weight file", msg);
        let shapes: Vec<_> = self.topology.layer_shapes().collect();
        if shapes.len() != self.layers.len() {
            return Err(shape_err(format!(
                "topology {} implies {} layers, file has {}",
                self.topology,
                shapes.len(),
                self.layers.len()
            )));
        }
        for (idx, ((n, m), layer)) in shapes.iter().zip(&self.layers).enumerate() {
            if layer.inputs != *n || layer.outputs != *m {
                return Err(shape_err(format!(
                    "layer {idx} is {}×{}, topology says {n}×{m}",
                    layer.inputs, layer.outputs
                )));
            }
            if layer.weights.len() != n * m || layer.bias.len() != *m {
                return Err(shape_err(format!(
                    "layer {idx} holds {} weights and {} biases for a {n}×{m} layer",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            if !(layer.w_max > 0.0) {
                return Err(shape_err(format!("layer {idx} has w_max {}", layer.w_max)));
            }
            if layer
                .weights
                .iter()
                .chain(&layer.bias)
                .any(|w| !w.is_finite())
            {
                return Err(shape_err(format!(
                    "layer {idx} contains non-finite weights"
                )));
            }
            match (&layer.levels, &layer.bias_levels) {
                (None, None) => {}
                (Some(l), Some(b)) => {
                    if l.len() != n * m || b.len() != *m {
                        return Err(shape_err(format!(
                            "layer {idx} level arrays do not match its shape"
                        )));
                    }
                    let limit = LEVELS as i8;
                    if l.iter().chain(b).any(|v| !(-limit..=limit).contains(v)) {
                        return Err(shape_err(format!(
                            "layer {idx} has levels outside ±{LEVELS}"
                        )));
                    }
                }
                _ => {
                    return Err(shape_err(format!(
                        "layer {idx} must carry both weight and bias levels or neither"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn is_quantized(&self) -> bool {
        self.layers.iter().all(|l| l.levels.is_some())
    }

    /// Quantized layers for network construction.
    pub fn quantized_layers(&self) -> Result<Vec<QuantizedLayer>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(idx, l)| {
                let (Some(levels), Some(bias_levels)) = (&l.levels, &l.bias_levels) else {
                    return Err(Error::Argument(format!(
                        "layer {idx} has no quantized levels; run `quantize` first"
                    )));
                };
                let conv = |v: &[i8]| {
                    v.iter()
                        .map(|&x| WeightLevel::from_signed(x))
                        .collect::<Result<Vec<_>>>()
                };
                Ok(QuantizedLayer {
                    inputs: l.inputs,
                    outputs: l.outputs,
                    levels: conv(levels)?,
                    bias_levels: conv(bias_levels)?,
                    w_max: l.w_max,
                })
            })
            .collect()
    }

    /// Float network with every weight replaced by its dequantized level.
    pub fn dequantized(&self) -> Result<WeightFile> {
        let mut out = self.clone();
        for (layer, q) in out.layers.iter_mut().zip(self.quantized_layers()?) {
            layer.weights = q
                .levels
                .iter()
                .map(|l| l.dequantize(q.w_max) as f32)
                .collect();
            layer.bias = q
                .bias_levels
                .iter()
                .map(|l| l.dequantize(q.w_max) as f32)
                .collect();
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::parse("weight file", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(
            serde_json::from_str(text).map_err(|e| Error::parse("weight file", e.to_string()))?,
        )
    }

    fn from_value(value: serde_json::Value) -> Result<Self> {
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::parse("weight file", "missing numeric `version` field"))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::UnsupportedVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let wf: WeightFile = serde_json::from_value(value)
            .map_err(|e| Error::parse("weight file", e.to_string()))?;
        wf.validate()?;
        Ok(wf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        Self::from_value(value)
    }
}

/// Fill in 31-level quantization for every layer, with `w_max` set to the
/// layer's largest weight or bias magnitude.
pub fn quantize_weights(wf: &WeightFile) -> Result<WeightFile> {
    let mut out = wf.clone();
    for (idx, layer) in out.layers.iter_mut().enumerate() {
        let max = layer.max_abs();
        layer.w_max = if max > 0.0 {
            max
        } else {
            log::warn!("layer {idx} is all zeros; using w_max = 1");
            1.0
        };
        let q = |w: &f32| -> Result<i8> {
            Ok(crossbar::quantize_weight(f64::from(*w), layer.w_max)?.signed())
        };
        layer.levels = Some(layer.weights.iter().map(q).collect::<Result<_>>()?);
        layer.bias_levels = Some(layer.bias.iter().map(q).collect::<Result<_>>()?);
    }
    Ok(out)
}
