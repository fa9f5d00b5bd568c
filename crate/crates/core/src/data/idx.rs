//! IDX container format used by the MNIST distribution.
//!
//! Layout: a 4-byte big-endian magic (`0x00000803` for u8 rank-3 image
//! tensors, `0x00000801` for u8 rank-1 label vectors), one big-endian `u32`
//! per dimension, then the unsigned-byte payload. Files may be gzip-wrapped.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

/// Reads a file, transparently inflating it when it starts with the gzip magic.
pub fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::format(path, format!("corrupt gzip stream: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| {
            Error::format(
                path,
                format!(
                    "truncated header at byte offset {}: need {} bytes",
                    bytes.len(),
                    offset + 4
                ),
            )
        })
}

fn check_magic(found: u32, expected: u32, path: &Path) -> Result<()> {
    if found == expected {
        return Ok(());
    }
    let hint = match found {
        IMAGE_MAGIC => " (this is an image file)",
        LABEL_MAGIC => " (this is a label file)",
        _ => "",
    };
    Err(Error::format(
        path,
        format!("bad magic number 0x{found:08x}, expected 0x{expected:08x}{hint}"),
    ))
}

fn check_payload(bytes: &[u8], header: usize, payload: usize, path: &Path) -> Result<()> {
    let expected = header + payload;
    if bytes.len() < expected {
        return Err(Error::format(
            path,
            format!(
                "truncated at byte offset {}: header declares {expected} bytes",
                bytes.len()
            ),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(
            path,
            format!(
                "{} trailing bytes after byte offset {expected}",
                bytes.len() - expected
            ),
        ));
    }
    Ok(())
}

pub fn parse_images(bytes: &[u8], path: &Path) -> Result<IdxImages> {
    check_magic(read_u32(bytes, 0, path)?, IMAGE_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    let rows = read_u32(bytes, 8, path)? as usize;
    let cols = read_u32(bytes, 12, path)? as usize;
    check_payload(bytes, 16, count * rows * cols, path)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    check_magic(read_u32(bytes, 0, path)?, LABEL_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    check_payload(bytes, 8, count, path)?;
    Ok(bytes[8..].to_vec())
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGE_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
