//! Photon statistics of a driven linear cavity coupled to a spinning
//! optomechanical resonator.
//!
//! Three routes compute the zero-delay correlation `g²(0)` of the driven
//! cavity: the Lindblad master equation ([`master`]), linearized quantum
//! fluctuations around the mean field ([`fluct`]), and the weak-drive
//! wavefunction ansatz ([`weakdrive`]). Frequencies are expressed in units of
//! the driven cavity linewidth `κ_L` throughout.
//!
//! The crate is `no_std` and needs only an allocator.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod fluct;
pub mod linalg;
pub mod master;
pub mod model;
pub mod poly;
pub mod quad;
pub mod weakdrive;
