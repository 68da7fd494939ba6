//! Benchmark data generators and the end-to-end task runner.

pub mod images;
pub mod lorenz;
pub mod narma;
pub mod pipeline;

pub use images::{
    load_class_dirs, load_image, preprocess_images, resample_bilinear, synthetic_images, FrequencySelector,
    GrayImage, ImageDataset, ImagePipelineConfig, LabeledImages, SyntheticImageConfig,
};
pub use lorenz::{gen_lorenz, LorenzConfig};
pub use narma::{gen_narma10, narma10_response, Narma10Config, NarmaSeries};
pub use pipeline::{reference_values, run_task, ExperimentReport, InputNormalizer, Metrics, Predictions, Readout};

pub use crate::config::ClassifyConfig;
