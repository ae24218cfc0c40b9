//! UV texture retargeting between different mesh UV layouts.
//!
//! The pipeline has two stages. Stage 1 rasterizes every corresponded
//! target triangle in target UV space and records, per covered pixel,
//! the source UV coordinate obtained by barycentric interpolation
//! ([`sampling::build_sampling_map`]). Stage 2 applies that map as a
//! single resampling pass over the source texture ([`transfer::apply`]).
//! The per-triangle affine warp in [`baseline`] is the conventional
//! approach kept for speed/quality comparison.

pub mod baseline;
pub mod cache;
pub mod corr;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod mesh;
pub mod metrics;
pub mod sampling;
pub mod texture;
pub mod transfer;

pub use corr::CorrespondenceMap;
pub use error::{Error, Result};
pub use geom::{BaryCoords, Triangle2D, Vec2};
pub use mesh::UvMesh;
pub use metrics::MetricsReport;
pub use sampling::SamplingMap;
pub use texture::Texture;
pub use transfer::BlendSettings;
