//! File formats: NDT tensors, binary PGM images and frame sequences.

pub mod frames;
pub mod ndt;
pub mod pgm;
