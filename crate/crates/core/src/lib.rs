//! Compressed-domain video toolkit.
//!
//! A small MPEG-style codec ([`codec`]), a partial decoder that recovers DCT
//! coefficients and motion vectors without reconstructing pixels
//! ([`partial_decode`]), and the data path of a two-stream action
//! recognition model: frequency band selection ([`fbs`]), sampling and
//! augmentation ([`pipeline`]), FLOPs accounting ([`flops`]) and score
//! averaging with late fusion ([`fusion`]).
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix the
//! precision used by the toolkit itself.

pub mod bench;
pub mod bitio;
pub mod codec;
pub mod demo;
pub mod error;
pub mod fbs;
pub mod flops;
pub mod fusion;
pub mod partial_decode;
pub mod pipeline;
pub mod probe;
pub mod report;
pub mod scalar;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Orthonormal 8x8 DCT in double precision.
pub type Dct = codec::Dct8<f64>;
pub type DctF32 = codec::Dct8<f32>;
pub type Tensor3F32 = tensor::Tensor3<f32>;
pub type ScoreVectorF32 = fusion::ScoreVector<f32>;
pub type ScoreVectorF64 = fusion::ScoreVector<f64>;
pub type ToyClassifierF32 = fusion::ToyClassifier<f32>;
pub type ToyClassifierF64 = fusion::ToyClassifier<f64>;
