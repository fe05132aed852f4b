//! 2D sound-soft obstacle scattering laboratory.
//!
//! Synthesizes far-field data for collections of smooth scatterers with a
//! Nyström-discretized combined-field integral equation, and implements two
//! linear-sampling indicator functions (Colton–Kirsch and Kirsch) together
//! with the Tikhonov sweeps used to probe the ill-posedness of the far-field
//! equation.

pub mod farfield;
pub mod forward;
pub mod geometry;
pub mod linalg;
pub mod sampling;
pub mod special;
pub mod stream;

pub use farfield::{ApertureSpec, Directions, FarFieldMatrix, FarFieldSvd, NoiseSpec, Provenance};
pub use forward::{FarFieldSample, ForwardOperator, ForwardSolution};
pub use geometry::{BoundaryCurve, DirectionGrid, SamplingGrid, Scatterer};
pub use sampling::{IndicatorField, IndicatorValue, MinimaReport, RhsVector, TikhonovSweep, Variant};
