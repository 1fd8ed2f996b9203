//! Renormalization numerics for multimodal interval maps.
//!
//! Maps of type N are compositions `f = f_{N−1} ∘ … ∘ f_0` of even unimodal
//! maps of `[−1, 1]` fixing `−1`. The crate evaluates such maps and their
//! fibered extensions, builds nests of nice intervals, detects and applies
//! renormalization, manipulates renormalization combinatorics, tunes
//! quadratic-family parameters to prescribed combinatorics and measures a
//! few complex-analytic quantities.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod affine;
pub mod boxmap;
pub mod combinatorics;
pub mod complex;
pub mod error;
pub mod map;
pub mod nest;
pub mod real;
pub mod renorm;
pub mod roots;
pub mod settings;
pub mod tuner;

pub use affine::AffineMap;
pub use boxmap::{extend, Chain, ExtendedMap, FiberInterval, FiberPoint};
pub use error::{Error, Result};
pub use map::{build_quadratic_family, critical_orbit, validate, MultimodalMap, UnimodalFactor};
pub use real::{DoubleDouble, Real};
pub use combinatorics::{CombinatorialData, Combinatorics};
pub use renorm::{renorm_tower, renormalize, PeriodicInterval, RenormResult, Tower};
pub use settings::Settings;
