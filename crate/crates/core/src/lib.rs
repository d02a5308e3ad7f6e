//! Counting functions, Riesz means, Weyl asymptotics, sharp bounds and sum rules for the
//! Laplacian and its powers on spheres, hemispheres and compact rank-one symmetric spaces.
//!
//! Every quantity can be evaluated on an exact rational path and on a binary64 path.

pub mod acceptance;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod riesz;
pub mod scan;
pub mod spaces;
pub mod sumrules;
pub mod weyl;

pub use error::{Error, Result};
pub use riesz::{PrefixSums, Quantity, Spectrum, SpectrumQuery, Variant};
pub use spaces::{energy_level, EnergyLevel, Family, Space};
pub use weyl::{ExpansionEval, SemiclassicalConstant};
