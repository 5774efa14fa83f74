//! Pickup-and-delivery routing with time windows on time-dependent networks.
//!
//! Each vehicle is routed by a forward dynamic program over a
//! state-space-time network whose vertices carry the set of onboard
//! passengers. A Lagrangian outer loop prices passenger pickups so that the
//! per-vehicle problems can be solved independently, and a repair step turns
//! each relaxed solution into a feasible schedule.

pub mod dp;
pub mod error;
pub mod io;
pub mod lr;
pub mod network;
pub mod reduce;
pub mod setpart;
pub mod sst;
pub mod states;

pub use error::{Error, Result};
