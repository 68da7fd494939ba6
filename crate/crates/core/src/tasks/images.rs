//! Two-class image pipeline: grayscale loading, bilinear resampling and the
//! real parts of the lowest spatial-frequency DFT bins.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::Standardizer;

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {height} x {width} image",
                pixels.len()
            )));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let pixels = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Self { height, width, pixels }
    }

    pub fn at(&self, h: usize, w: usize) -> f64 {
        self.pixels[h * self.width + w]
    }

    pub fn mirrored_horizontally(&self) -> Self {
        Self::from_fn(self.height, self.width, |h, w| self.at(h, self.width - 1 - w))
    }
}

/// Decodes any supported raster (PGM/PPM/PNG) and averages color channels.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let err = |reason: String| Error::Image {
        path: path.to_path_buf(),
        reason,
    };
    let decoded = image::open(path).map_err(|e| err(format!("unreadable image: {e}")))?;
    let rgb = decoded.to_rgb32f();
    let (w, h) = rgb.dimensions();
    let pixels: Vec<f64> = rgb
        .pixels()
        .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / 3.0)
        .collect();
    GrayImage::new(h as usize, w as usize, pixels)
        .map_err(|_| err(format!("decoded size {w} x {h} does not match its pixel data")))
}

/// Images with binary labels; `class_names[0]` is label `false`.
#[derive(Debug, Clone)]
pub struct LabeledImages {
    pub images: Vec<GrayImage>,
    pub labels: Vec<bool>,
    pub class_names: [String; 2],
}

/// Loads `root/<class>/<image>`; exactly two class subdirectories, sorted by
/// name, each holding at least two images.
pub fn load_class_dirs(root: &Path) -> Result<LabeledImages> {
    let list = |dir: &Path| -> Result<Vec<PathBuf>> {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        Ok(entries)
    };
    let classes: Vec<PathBuf> = list(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if classes.len() != 2 {
        return Err(Error::Image {
            path: root.to_path_buf(),
            reason: format!("expected exactly 2 class subdirectories, found {}", classes.len()),
        });
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (label, dir) in classes.iter().enumerate() {
        let files: Vec<PathBuf> = list(dir)?.into_iter().filter(|p| p.is_file()).collect();
        if files.len() < 2 {
            return Err(Error::EmptyClass(format!(
                "{} holds {} image(s), need at least 2",
                dir.display(),
                files.len()
            )));
        }
        for f in files {
            images.push(load_image(&f)?);
            labels.push(label == 1);
        }
    }
    let name = |p: &PathBuf| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LabeledImages {
        images,
        labels,
        class_names: [name(&classes[0]), name(&classes[1])],
    })
}

/// Spatial modes `(kx, ky)` of the synthetic fields. The first five carry
/// the class signal and are exactly the modes behind the eight lowest bins.
const SYNTHETIC_MODES: [(i64, i64); 7] = [(0, 0), (1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2)];
const SIGNAL_PATTERN: [f64; 5] = [1.0, -1.0, 1.0, -1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticImageConfig {
    pub per_class: usize,
    /// [height, width] of the generated fields.
    pub size: [usize; 2],
    pub seed: u64,
    /// Half the distance between class mean spectra, in units of the
    /// per-mode coefficient standard deviation.
    pub class_separation: f64,
    pub pixel_noise: f64,
}

impl Default for SyntheticImageConfig {
    fn default() -> Self {
        Self {
            per_class: 2000,
            size: [32, 32],
            seed: 0,
            class_separation: 2.5,
            pixel_noise: 0.5,
        }
    }
}

/// Low-frequency Gaussian random fields whose mean spectrum depends on the
/// class: each mode gets cosine and sine coefficients drawn from
/// `N(±δ·v_k, 1)` and `N(0, 1)`, plus white pixel noise.
///
/// Images alternate class 0, class 1, ...; each image draws from its own
/// ChaCha stream.
pub fn synthetic_images(cfg: &SyntheticImageConfig) -> Result<LabeledImages> {
    let [h, w] = cfg.size;
    if h < 3 || w < 3 || cfg.per_class < 2 {
        return Err(Error::InvalidParameter(format!(
            "synthetic images need size >= 3 x 3 and >= 2 per class, got {h} x {w}, {}",
            cfg.per_class
        )));
    }
    let norm = SIGNAL_PATTERN.iter().map(|v| v * v).sum::<f64>().sqrt();
    let delta = cfg.class_separation / norm;
    let count = 2 * cfg.per_class;
    let images: Vec<GrayImage> = (0..count)
        .into_par_iter()
        .map(|i| {
            let positive = i % 2 == 1;
            let sign = if positive { -1.0 } else { 1.0 };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let coeffs: Vec<(f64, f64)> = SYNTHETIC_MODES
                .iter()
                .enumerate()
                .map(|(m, _)| {
                    let mean = SIGNAL_PATTERN.get(m).map_or(0.0, |v| sign * delta * v);
                    (mean + draw(), draw())
                })
                .collect();
            let noise: Vec<f64> = (0..h * w).map(|_| cfg.pixel_noise * draw()).collect();
            GrayImage::from_fn(h, w, |r, c| {
                let field: f64 = SYNTHETIC_MODES
                    .iter()
                    .zip(&coeffs)
                    .map(|(&(kx, ky), &(a, b))| {
                        let theta = 2.0 * PI * (kx as f64 * r as f64 / h as f64 + ky as f64 * c as f64 / w as f64);
                        a * theta.cos() + b * theta.sin()
                    })
                    .sum();
                field + noise[r * w + c]
            })
        })
        .collect();
    let labels = (0..count).map(|i| i % 2 == 1).collect();
    Ok(LabeledImages {
        images,
        labels,
        class_names: ["class0".into(), "class1".into()],
    })
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
pub fn resample_bilinear(img: &GrayImage, height: usize, width: usize) -> GrayImage {
    if img.height == height && img.width == width {
        return img.clone();
    }
    let src_coord = |dst: usize, out: usize, inp: usize| -> (usize, usize, f64) {
        let s = ((dst as f64 + 0.5) * inp as f64 / out as f64 - 0.5).clamp(0.0, (inp - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(inp - 1);
        (i0, i1, s - i0 as f64)
    };
    let rows: Vec<_> = (0..height).map(|r| src_coord(r, height, img.height)).collect();
    let cols: Vec<_> = (0..width).map(|c| src_coord(c, width, img.width)).collect();
    GrayImage::from_fn(height, width, |r, c| {
        let (r0, r1, fr) = rows[r];
        let (c0, c1, fc) = cols[c];
        let top = img.at(r0, c0) * (1.0 - fc) + img.at(r0, c1) * fc;
        let bottom = img.at(r1, c0) * (1.0 - fc) + img.at(r1, c1) * fc;
        top * (1.0 - fr) + bottom * fr
    })
}

/// Signed DFT frequency of index `k` on an axis of length `len`:
/// `[0, 1, .., ceil(len/2) - 1, -floor(len/2), .., -1]`.
pub fn signed_frequency(k: usize, len: usize) -> i64 {
    if k < len.div_ceil(2) {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

/// The `n_freq` lowest DFT bins of an `H × W` image ordered by
/// `fx² + fy²`, ties broken by `(fx, fy)`.
#[derive(Debug, Clone)]
pub struct FrequencySelector {
    height: usize,
    width: usize,
    bins: Vec<(i64, i64)>,
    row_twiddles: Vec<Vec<Complex64>>,
    col_twiddles: Vec<(i64, Vec<Complex64>)>,
}

impl FrequencySelector {
    pub fn new(height: usize, width: usize, n_freq: usize) -> Result<Self> {
        if n_freq == 0 || n_freq > height * width {
            return Err(Error::InvalidParameter(format!(
                "n_freq must be in 1..={} for a {height} x {width} image, got {n_freq}",
                height * width
            )));
        }
        let mut all: Vec<(i64, i64)> = (0..height)
            .flat_map(|h| (0..width).map(move |w| (signed_frequency(h, height), signed_frequency(w, width))))
            .collect();
        all.sort_by_key(|&(fx, fy)| (fx * fx + fy * fy, fx, fy));
        all.truncate(n_freq);

        let twiddle = |f: i64, len: usize| -> Vec<Complex64> {
            (0..len)
                .map(|i| {
                    // reduce f*i mod len so the phase argument stays small
                    let k = (f * i as i64).rem_euclid(len as i64);
                    Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)
                })
                .collect()
        };
        let row_twiddles = all.iter().map(|&(fx, _)| twiddle(fx, height)).collect();
        let mut fys: Vec<i64> = all.iter().map(|b| b.1).collect();
        fys.sort_unstable();
        fys.dedup();
        let col_twiddles = fys.into_iter().map(|fy| (fy, twiddle(fy, width))).collect();
        Ok(Self {
            height,
            width,
            bins: all,
            row_twiddles,
            col_twiddles,
        })
    }

    pub fn bins(&self) -> &[(i64, i64)] {
        &self.bins
    }

    /// Complex DFT `F(fx, fy) = Σ x[h, w] e^{-2πi(fx h/H + fy w/W)}` at the
    /// selected bins, computed separably (rows first).
    pub fn transform(&self, img: &GrayImage) -> Result<Vec<Complex64>> {
        if img.height != self.height || img.width != self.width {
            return Err(Error::DimensionMismatch(format!(
                "image is {} x {}, selector expects {} x {}",
                img.height, img.width, self.height, self.width
            )));
        }
        // partial[fy][h] = Σ_w x[h, w] e^{-2πi fy w / W}
        let partial: Vec<(i64, Vec<Complex64>)> = self
            .col_twiddles
            .iter()
            .map(|(fy, tw)| {
                let rows = (0..self.height)
                    .map(|h| {
                        let row = &img.pixels[h * self.width..(h + 1) * self.width];
                        row.iter().zip(tw).map(|(&x, &t)| t * x).sum()
                    })
                    .collect();
                (*fy, rows)
            })
            .collect();
        Ok(self
            .bins
            .iter()
            .zip(&self.row_twiddles)
            .map(|(&(_, fy), tw)| {
                let rows = &partial.iter().find(|(f, _)| *f == fy).expect("fy precomputed").1;
                rows.iter().zip(tw).map(|(r, t)| r * t).sum()
            })
            .collect())
    }

    pub fn real_parts(&self, img: &GrayImage) -> Result<Vec<f64>> {
        Ok(self.transform(img)?.into_iter().map(|z| z.re).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImagePipelineConfig {
    /// [height, width] after resampling.
    pub image_size: [usize; 2],
    pub n_freq: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub shuffle_seed: u64,
}

impl Default for ImagePipelineConfig {
    fn default() -> Self {
        Self {
            image_size: [299, 299],
            n_freq: 8,
            train_count: 3200,
            test_count: 800,
            shuffle_seed: 0,
        }
    }
}

/// Standardized frequency features split into train and test rows.
#[derive(Debug, Clone)]
pub struct ImageDataset {
    pub train_x: DMatrix<f64>,
    pub train_y: Vec<bool>,
    pub test_x: DMatrix<f64>,
    pub test_y: Vec<bool>,
    pub bins: Vec<(i64, i64)>,
    pub class_names: [String; 2],
}

/// Shuffles with `shuffle_seed`, takes `train_count` then `test_count`
/// images, extracts the real parts of the lowest `n_freq` bins of each
/// resampled image and standardizes columns with training statistics.
pub fn preprocess_images(data: &LabeledImages, cfg: &ImagePipelineConfig) -> Result<ImageDataset> {
    let [h, w] = cfg.image_size;
    let selector = FrequencySelector::new(h, w, cfg.n_freq)?;
    let needed = cfg.train_count + cfg.test_count;
    if cfg.train_count < 2 || cfg.test_count < 1 {
        return Err(Error::InvalidParameter("need at least 2 training and 1 test image".into()));
    }
    if data.images.len() < needed {
        return Err(Error::InvalidParameter(format!(
            "{} images available, the split needs {needed}",
            data.images.len()
        )));
    }
    for (class, name) in data.class_names.iter().enumerate() {
        if !data.labels.contains(&(class == 1)) {
            return Err(Error::EmptyClass(name.clone()));
        }
    }
    let mut order: Vec<usize> = (0..data.images.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.shuffle_seed));
    order.truncate(needed);

    let rows: Vec<Vec<f64>> = order
        .par_iter()
        .map(|&i| selector.real_parts(&resample_bilinear(&data.images[i], h, w)))
        .collect::<Result<_>>()?;
    let raw = DMatrix::from_fn(needed, cfg.n_freq, |r, c| rows[r][c]);
    let train_raw = raw.rows(0, cfg.train_count).into_owned();
    let standardizer = Standardizer::fit(&train_raw)?;
    let scaled = DMatrix::from_fn(needed, cfg.n_freq, |r, c| {
        (raw[(r, c)] - standardizer.means[c]) / standardizer.scales[c]
    });
    let labels: Vec<bool> = order.iter().map(|&i| data.labels[i]).collect();
    Ok(ImageDataset {
        train_x: scaled.rows(0, cfg.train_count).into_owned(),
        train_y: labels[..cfg.train_count].to_vec(),
        test_x: scaled.rows(cfg.train_count, cfg.test_count).into_owned(),
        test_y: labels[cfg.train_count..].to_vec(),
        bins: selector.bins().to_vec(),
        class_names: data.class_names.clone(),
    })
}
