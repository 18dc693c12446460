//! Image-based crack extraction.
//!
//! The stage mirrors the contour-image workflow: flag under-coordinated
//! (surface) atoms, splat them into a grayscale raster, binarize and
//! median-filter, thin to a one-pixel skeleton and measure the crack length
//! along it. Everything here is a pure function over value inputs; one
//! raster is processed at a time so peak memory is bounded by the image,
//! not the trajectory.

mod filter;
mod raster;
mod skeleton;

pub use filter::{binarize_median, coordination_filter, CoordinationParams};
pub use raster::{rasterize, ContourRaster, RasterError};
pub use skeleton::{
    crack_length, mask_extent, skeletonize, BinaryGrid, CrackSkeleton, MouthEdge, SkeletonError,
    SkeletonParams,
};
