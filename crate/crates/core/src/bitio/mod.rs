//! Bit-level I/O and the two lossless coders: run-length and canonical Huffman.

mod bits;
mod huffman;
mod rle;

pub use bits::{BitReader, BitWriter};
pub use huffman::{
    build_huffman, huffman_decode, huffman_encode, HuffmanTable, Symbol, MAX_CODE_LEN,
};
pub use rle::{
    block_symbols, magnitude_bits, magnitude_from_bits, magnitude_size, read_block, rle_decode,
    rle_encode, write_block, RleSequence, BLOCK_LEN, EOB, MAX_SIZE,
};
