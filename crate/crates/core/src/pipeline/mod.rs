//! Sampling, augmentation, normalization and export of the two network
//! inputs: frequency-stream coefficient grids and temporal-stream motion grids.

pub mod augment;
pub mod export;
pub mod normalize;
pub mod sample;
mod streams;

pub use augment::{
    crop_jitter, crop_jitter_with, hflip_dct, hflip_mv, mv_grid, rasterize_mv, test_expand,
};
pub use export::{export, import, write_atomic, ExportMeta, TensorRecord};
pub use normalize::{normalize_mv, BandStats};
pub use sample::{sample_positions, uniform_sample, SampleMode, SampleSpec, StreamKind};
pub use streams::{frequency_tensors, temporal_tensors, StreamTensors};
