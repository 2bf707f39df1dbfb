//! Numerical primitives shared by the randomness battery.

pub mod gf2;
pub mod lfsr;
pub mod special;

pub use gf2::{gf2_rank, rank_probability, Gf2Matrix};
pub use lfsr::{berlekamp_massey, berlekamp_massey_range};
pub use special::{erf, erfc, igam_p, igamc_q, ln_gamma, normal_cdf, DomainError};
