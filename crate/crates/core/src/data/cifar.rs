//! CIFAR-10 binary batches, converted to luminance on load.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

const PLANE: usize = 32 * 32;
/// One label byte followed by the R, G and B planes.
pub const CIFAR_RECORD_BYTES: usize = 1 + 3 * PLANE;

pub fn parse_cifar10_grayscale(bytes: &[u8], context: &str) -> Result<Dataset> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD_BYTES) {
        return Err(Error::parse(
            context,
            format!(
                "{} bytes is not a whole number of {CIFAR_RECORD_BYTES}-byte records",
                bytes.len()
            ),
        ));
    }
    let count = bytes.len() / CIFAR_RECORD_BYTES;
    let mut features = Vec::with_capacity(count * PLANE);
    let mut labels = Vec::with_capacity(count);
    for (i, record) in bytes.chunks_exact(CIFAR_RECORD_BYTES).enumerate() {
        let label = record[0];
        if label > 9 {
            return Err(Error::Range(format!(
                "{context}: record {i} has label {label}"
            )));
        }
        labels.push(label);
        let (r, rest) = record[1..].split_at(PLANE);
        let (g, b) = rest.split_at(PLANE);
        features.extend(r.iter().zip(g).zip(b).map(|((&r, &g), &b)| {
            let y = (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)) / 255.0;
            y.min(1.0) as f32
        }));
    }
    Dataset::new(PLANE, 10, features, labels)
}

pub fn load_cifar10_grayscale<P: AsRef<Path>>(batches: &[P]) -> Result<Dataset> {
    let parts = batches
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            parse_cifar10_grayscale(&bytes, &p.display().to_string())
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::concat(parts)
}
