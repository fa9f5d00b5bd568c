use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::data::idx::{self, IdxImages};
use crate::data::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded;

/// Images scaled to `[0, 1]`, one sample per row, with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(images: Matrix, labels: Vec<u8>) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(Error::Consistency(format!(
                "{} images but {} labels",
                images.rows(),
                labels.len()
            )));
        }
        if let Some(bad) = images
            .as_slice()
            .iter()
            .find(|&&x| !(0.0..=1.0).contains(&x))
        {
            return Err(Error::Input(format!("pixel value {bad} outside [0, 1]")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| usize::from(l) >= NUM_CLASSES) {
            return Err(Error::Input(format!(
                "label {bad} outside 0..{NUM_CLASSES}"
            )));
        }
        Ok(Self { images, labels })
    }

    pub fn from_idx(images: &IdxImages, labels: Vec<u8>) -> Result<Self> {
        if images.count != labels.len() {
            return Err(Error::Consistency(format!(
                "image file holds {} samples, label file {}",
                images.count,
                labels.len()
            )));
        }
        let width = images.rows * images.cols;
        let data = images.pixels.iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::new(Matrix::from_vec(images.count, width, data)?, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn images(&self) -> &Matrix {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn input_width(&self) -> usize {
        self.images.cols()
    }

    /// Copies the given samples into a batch matrix and label vector.
    pub fn gather(&self, indices: &[usize]) -> (Matrix, Vec<u8>) {
        let images = self.images.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        (images, labels)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let (images, labels) = self.gather(indices);
        Dataset { images, labels }
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for &l in &self.labels {
            counts[usize::from(l)] += 1;
        }
        counts
    }

    /// Seeded stratified sample of `n` rows without replacement.
    ///
    /// Per-class quotas are `n · count_c / N` rounded by largest remainder
    /// (ties to the lower class), so they sum to exactly `n`. Selected rows
    /// keep their original relative order.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::Input("subsample size must be positive".into()));
        }
        if n > self.len() {
            return Err(Error::Input(format!(
                "cannot subsample {n} of {} samples",
                self.len()
            )));
        }
        let counts = self.class_counts();
        let total = self.len();
        let mut quotas = [0usize; NUM_CLASSES];
        let mut remainders = Vec::with_capacity(NUM_CLASSES);
        for c in 0..NUM_CLASSES {
            let scaled = n * counts[c];
            quotas[c] = scaled / total;
            remainders.push((scaled % total, c));
        }
        let mut missing = n - quotas.iter().sum::<usize>();
        remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, c) in &remainders {
            if missing == 0 {
                break;
            }
            if quotas[c] < counts[c] {
                quotas[c] += 1;
                missing -= 1;
            }
        }

        let mut rng = seeded(seed, 0);
        let mut chosen = Vec::with_capacity(n);
        for (c, &quota) in quotas.iter().enumerate() {
            let mut pool: Vec<usize> = (0..total)
                .filter(|&i| usize::from(self.labels[i]) == c)
                .collect();
            pool.shuffle(&mut rng);
            chosen.extend_from_slice(&pool[..quota]);
        }
        chosen.sort_unstable();
        Ok(self.subset(&chosen))
    }
}

/// Train and test splits as distributed (60 000 / 10 000 samples).
#[derive(Debug, Clone)]
pub struct Mnist {
    pub train: Dataset,
    pub test: Dataset,
}

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Finds `name` or `name.gz` inside `dir`.
pub fn locate(dir: &Path, name: &str) -> Result<PathBuf> {
    let raw = dir.join(name);
    if raw.is_file() {
        return Ok(raw);
    }
    let gz = dir.join(format!("{name}.gz"));
    if gz.is_file() {
        return Ok(gz);
    }
    Err(Error::Data(format!(
        "missing MNIST file {} (or .gz)",
        raw.display()
    )))
}

/// Loads a paired image/label IDX file set.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = idx::parse_images(&idx::read_maybe_gzip(images_path)?, images_path)?;
    let labels = idx::parse_labels(&idx::read_maybe_gzip(labels_path)?, labels_path)?;
    Dataset::from_idx(&images, labels)
}

pub fn load_mnist(dir: &Path) -> Result<Mnist> {
    let train = load_idx(&locate(dir, TRAIN_IMAGES)?, &locate(dir, TRAIN_LABELS)?)?;
    let test = load_idx(&locate(dir, TEST_IMAGES)?, &locate(dir, TEST_LABELS)?)?;
    Ok(Mnist { train, test })
}
