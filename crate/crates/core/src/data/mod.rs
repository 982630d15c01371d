//! Datasets, offline training and the portable weight-file format.

mod cifar;
mod idx;
mod train;
mod weights;

pub use cifar::{load_cifar10_grayscale, parse_cifar10_grayscale, CIFAR_RECORD_BYTES};
pub use idx::{load_mnist, parse_idx_images, parse_idx_labels};
pub use train::{float_accuracy, train_mlp, Hyper, TrainReport};
pub use weights::{quantize_weights, LayerRecord, TrainingMeta, WeightFile, FORMAT_VERSION};

use crate::error::{Error, Result};

/// Flat samples with features in `[0, 1]` and integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    width: usize,
    classes: usize,
    features: Vec<f32>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(width: usize, classes: usize, features: Vec<f32>, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || features.len() != width * labels.len() {
            return Err(Error::Argument(format!(
                "{} features do not split into {} samples of width {width}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| usize::from(l) >= classes) {
            return Err(Error::Range(format!("label {bad} outside 0..{classes}")));
        }
        if let Some(bad) = features.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Range(format!("feature {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            classes,
            features,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sample(&self, i: usize) -> (&[f32], u8) {
        (
            &self.features[i * self.width..(i + 1) * self.width],
            self.labels[i],
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f32], u8)> + '_ {
        self.features
            .chunks_exact(self.width)
            .zip(self.labels.iter().copied())
    }

    /// First `n` samples (all of them if `n` exceeds the length).
    pub fn take(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            width: self.width,
            classes: self.classes,
            features: self.features[..n * self.width].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    /// Concatenate datasets of the same width and class count.
    pub fn concat(parts: Vec<Dataset>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Argument("nothing to concatenate".into()))?;
        for part in iter {
            if part.width != out.width || part.classes != out.classes {
                return Err(Error::Argument(
                    "datasets differ in width or classes".into(),
                ));
            }
            out.features.extend(part.features);
            out.labels.extend(part.labels);
        }
        Ok(out)
    }
}
