//! Multi-scale fatigue crack propagation toolkit.
//!
//! The crate is organized around four stages that chain into one pipeline:
//!
//! 1. [`md`] — a toy-scale molecular dynamics engine that cyclically loads a
//!    BCC iron plate with a pre-crack and emits per-cycle stress samples and
//!    contour rasters.
//! 2. [`vision`] — image-based crack extraction: coordination filtering,
//!    rasterization, binarization/median filtering and Zhang–Suen
//!    skeletonization, yielding a measured crack length per frame.
//! 3. [`paris`] — converts (cycle, crack length, tip stress) samples into
//!    (ΔK, da/dN) points and fits the Paris-law constants C and m by
//!    log-log regression.
//! 4. [`xfem`] — a 2D linear-elastic XFEM solver with Heaviside and
//!    crack-tip enrichment that propagates a macroscopic fatigue crack via
//!    the maximum circumferential stress criterion and Paris-law cycle
//!    counting.
//!
//! [`pipeline`] orchestrates the full micro-to-macro flow behind a single
//! reproducible configuration.

pub mod md;
pub mod paris;
pub mod pipeline;
pub mod vision;
pub mod xfem;
