//! Tile-set compiler and self-assembly simulator for recursively defined
//! patterns.
//!
//! Patterns ([`pattern`]) compile into rectilinear tile systems
//! ([`tileset::construct_kl`]), which transform into compact
//! error-resilient systems with the same number of tile types
//! ([`tileset::construct_er`]). Both can be grown error-free ([`atam`]) or
//! under kinetic attach/detach dynamics ([`ktam`]), and checked for the
//! glue identities and error-forcing property ([`verify`]).

pub mod atam;
pub mod cli;
pub mod io;
pub mod ktam;
pub mod pattern;
pub mod tileset;
pub mod tuple;
pub mod verify;
