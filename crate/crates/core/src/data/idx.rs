//! MNIST IDX files: big-endian headers followed by unsigned bytes.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    context: &'a str,
}

impl<'a> Reader<'a> {
    fn u32_be(&mut self) -> Result<u32> {
        let end = self.pos + 4;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::parse(self.context, "truncated header"))?;
        self.pos = end;
        Ok(u32::from_be_bytes(chunk.try_into().unwrap()))
    }

    fn body(&self, expected: usize) -> Result<&'a [u8]> {
        let rest = &self.bytes[self.pos..];
        if rest.len() < expected {
            return Err(Error::parse(
                self.context,
                format!("truncated body: {} of {expected} bytes", rest.len()),
            ));
        }
        if rest.len() > expected {
            return Err(Error::parse(
                self.context,
                format!(
                    "{} trailing bytes after the declared data",
                    rest.len() - expected
                ),
            ));
        }
        Ok(rest)
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let magic = self.u32_be()?;
        if magic != expected {
            return Err(Error::parse(
                self.context,
                format!("magic {magic:#010x}, expected {expected:#010x}"),
            ));
        }
        Ok(())
    }
}

/// Parse an IDX3 image file into `(width, pixels / 255)`.
pub fn parse_idx_images(bytes: &[u8], context: &str) -> Result<(usize, Vec<f32>)> {
    let mut r = Reader {
        bytes,
        pos: 0,
        context,
    };
    r.magic(IMAGE_MAGIC)?;
    let count = r.u32_be()? as usize;
    let rows = r.u32_be()? as usize;
    let cols = r.u32_be()? as usize;
    let width = rows * cols;
    let body = r.body(count * width)?;
    Ok((width, body.iter().map(|&b| f32::from(b) / 255.0).collect()))
}

pub fn parse_idx_labels(bytes: &[u8], context: &str) -> Result<Vec<u8>> {
    let mut r = Reader {
        bytes,
        pos: 0,
        context,
    };
    r.magic(LABEL_MAGIC)?;
    let count = r.u32_be()? as usize;
    Ok(r.body(count)?.to_vec())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_mnist(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let (images, labels) = (images.as_ref(), labels.as_ref());
    let (width, pixels) = parse_idx_images(&read(images)?, &images.display().to_string())?;
    let labels_ctx = labels.display().to_string();
    let labels = parse_idx_labels(&read(labels)?, &labels_ctx)?;
    if width == 0 || pixels.len() / width != labels.len() {
        return Err(Error::parse(
            labels_ctx,
            format!(
                "{} labels for {} images",
                labels.len(),
                pixels.len().checked_div(width).unwrap_or(0)
            ),
        ));
    }
    Dataset::new(width, 10, pixels, labels)
}
