//! `data fetch` / `data verify`.

use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::data::idx::{parse_images, parse_labels, read_maybe_gzip};
use crate::data::{locate, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS};
use crate::error::{Error, Result};

/// Download locations tried in order; each serves `<name>.gz`.
pub const MIRRORS: [&str; 2] = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
];

/// SHA-256 of each file's uncompressed contents.
pub const CHECKSUMS: [(&str, &str); 4] = [
    (TRAIN_IMAGES, "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"),
    (TRAIN_LABELS, "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"),
    (TEST_IMAGES, "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"),
    (TEST_LABELS, "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"),
];

pub const TRAIN_COUNT: usize = 60_000;
pub const TEST_COUNT: usize = 10_000;
pub const SIDE: usize = 28;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn expected_checksum(name: &str) -> &'static str {
    CHECKSUMS.iter().find(|(n, _)| *n == name).map(|(_, h)| *h).expect("known file")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSummary {
    pub images: usize,
    pub labels: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Checks one image/label pair: magic numbers, dimensions, counts and checksums.
pub fn verify_pair(dir: &Path, images: &str, labels: &str, count: usize, check_sums: bool) -> Result<SplitSummary> {
    let img_path = locate(dir, images)?;
    let lbl_path = locate(dir, labels)?;
    let img_bytes = read_maybe_gzip(&img_path)?;
    let lbl_bytes = read_maybe_gzip(&lbl_path)?;
    let img = parse_images(&img_bytes, &img_path)?;
    let lbl = parse_labels(&lbl_bytes, &lbl_path)?;
    if img.rows != SIDE || img.cols != SIDE {
        return Err(Error::format(
            &img_path,
            format!("images are {}x{}, expected {SIDE}x{SIDE}", img.rows, img.cols),
        ));
    }
    if img.count != count {
        return Err(Error::format(&img_path, format!("{} images, expected {count}", img.count)));
    }
    if lbl.len() != count {
        return Err(Error::format(&lbl_path, format!("{} labels, expected {count}", lbl.len())));
    }
    if check_sums {
        for (path, bytes, name) in [(&img_path, &img_bytes, images), (&lbl_path, &lbl_bytes, labels)] {
            let got = sha256_hex(bytes);
            if got != expected_checksum(name) {
                return Err(Error::Data(format!(
                    "checksum mismatch for {}: got {got}, expected {}",
                    path.display(),
                    expected_checksum(name)
                )));
            }
        }
    }
    Ok(SplitSummary {
        images: img.count,
        labels: lbl.len(),
        rows: img.rows,
        cols: img.cols,
    })
}

/// Verifies both splits; returns the (train, test) summaries.
pub fn verify_dir(dir: &Path) -> Result<(SplitSummary, SplitSummary)> {
    Ok((
        verify_pair(dir, TRAIN_IMAGES, TRAIN_LABELS, TRAIN_COUNT, true)?,
        verify_pair(dir, TEST_IMAGES, TEST_LABELS, TEST_COUNT, true)?,
    ))
}

fn file_is_valid(dir: &Path, name: &str) -> bool {
    locate(dir, name)
        .and_then(|p| read_maybe_gzip(&p))
        .is_ok_and(|bytes| sha256_hex(&bytes) == expected_checksum(name))
}

fn download(url: &str) -> std::result::Result<Vec<u8>, String> {
    let mut response = ureq::get(url).call().map_err(|e| e.to_string())?;
    let mut body = Vec::new();
    response
        .body_mut()
        .as_reader()
        .read_to_end(&mut body)
        .map_err(|e| e.to_string())?;
    Ok(body)
}

/// Downloads any missing or corrupt file into `dir` as `<name>.gz` and
/// checks it against the recorded checksum. Returns the paths written.
pub fn fetch(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, expected) in CHECKSUMS {
        if file_is_valid(dir, name) {
            log::info!("{name} already present");
            continue;
        }
        let target = dir.join(format!("{name}.gz"));
        let mut errors = Vec::new();
        let mut done = false;
        for mirror in MIRRORS {
            let url = format!("{mirror}{name}.gz");
            log::info!("downloading {url}");
            let body = match download(&url) {
                Ok(b) => b,
                Err(e) => {
                    errors.push(format!("{url}: {e}"));
                    continue;
                }
            };
            let tmp = dir.join(format!("{name}.gz.part"));
            std::fs::write(&tmp, &body).map_err(|e| Error::io(&tmp, e))?;
            let contents = read_maybe_gzip(&tmp)?;
            let got = sha256_hex(&contents);
            if got != expected {
                let _ = std::fs::remove_file(&tmp);
                errors.push(format!("{url}: checksum mismatch (got {got})"));
                continue;
            }
            std::fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
            written.push(target.clone());
            done = true;
            break;
        }
        if !done {
            return Err(Error::Data(format!("could not fetch {name}: {}", errors.join("; "))));
        }
    }
    Ok(written)
}
