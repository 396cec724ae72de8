//! Toy MPEG-style codec: I/P groups of pictures, 4:2:0 macroblocks, 8×8 DCT,
//! flat quantization, zigzag + run-length + Huffman entropy coding, and
//! exhaustive-search motion compensation with differential vectors.

pub mod dct;
mod decoder;
mod encoder;
pub mod format;
mod frame;
pub mod motion;
pub mod quant;
mod recon;
pub mod y4m;
pub mod zigzag;

pub use dct::{dct8x8_forward, dct8x8_inverse, Block, Dct8};
pub use decoder::{decode_video_full, decode_video_timed, DecodeTiming};
pub use encoder::{encode_video, encode_video_traced, EncodedStream, EncoderConfig};
pub use format::{FrameHeader, FrameKind, StreamHeader, Tables};
pub use frame::{max_abs_diff, mse, psnr, Frame, Plane, RawVideo};
pub use motion::{
    diff_code_mv, diff_decode_mv, intra_cost, motion_compensate, motion_estimate, MotionVector,
    MvField, MB_SIZE,
};
pub use quant::{dequantize, quantize, QuantConfig};
pub use recon::{
    compose_frame, reconstruct_frame, residual_planes, CodedFrame, CodedMacroblock, ResidualPlanes,
};
pub use zigzag::{inverse_zigzag, zigzag};
