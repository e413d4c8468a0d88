//! Free-particle propagation behind an n-slit grating: exact wave field, Bohmian
//! trajectories, straight-line momentum-distribution paths and momentum statistics.

pub mod beamgrating;
pub mod bohm;
pub mod error;
pub mod mdmodel;
pub mod momstats;
pub mod special;
pub mod wavefield;

pub use error::{Error, Result};
