//! Secure multicarrier ISAC simulation library.
//!
//! Implements sensing-guided friendly jamming for MIMO-OFDM integrated
//! sensing and communication links: null-space jamming beam design,
//! closed-form and nonparametric angular Fisher information with CRLB
//! screening, small encoder/decoder networks (dense and tensor-train),
//! and seeded Monte Carlo evaluation of secrecy rate and BLER.

pub mod channel;
pub mod numerics;
pub mod rates;
pub mod rng;
pub mod waveform;

pub use numerics::CMat;
pub use rng::SeedStream;
