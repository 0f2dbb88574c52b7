//! Link-level Monte Carlo simulator for buffer-aided cooperative MIMO relay
//! networks.
//!
//! Amplify-and-forward relays with `N` antennas store received symbol groups
//! in FIFO buffers. In every slot the strongest eligible source-relay or
//! relay-destination link is used, relays forward with an Alamouti code
//! weighted by a diagonal code vector, and the destination runs exhaustive
//! ML detection. The code vector can be fixed, random, or adapted by a
//! decision-directed stochastic-gradient rule with power normalization.
//!
//! The math is generic over the real scalar ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`, which is what the
//! sweeps and the CLI use.

pub mod adapt;
pub mod channel;
pub mod cli;
pub mod detection;
pub mod engine;
pub mod error;
pub mod numerics;
pub mod relaying;
pub mod selection;
pub mod stc;

pub use channel::RngStream;
pub use engine::{
    noise_variance_from_snr, run_packet, run_sweep, BerRecord, PacketOutcome, PersistV, SchemeKind,
    TrialConfig,
};
pub use error::{Error, Result};
pub use numerics::Scalar;

/// Complex sample in double precision.
pub type Complex = num_complex::Complex<f64>;
pub type ComplexMatrix = numerics::ComplexMatrix<f64>;
pub type CodeVector = stc::CodeVector<f64>;
pub type StcBlock = stc::StcBlock<f64>;
pub type EquivalentModel = stc::EquivalentModel<f64>;
pub type NoiseSpec = channel::NoiseSpec<f64>;
pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type PowerConfig = engine::PowerConfig<f64>;
pub type AdaptState = adapt::AdaptState<f64>;
pub type RelayBuffer = relaying::RelayBuffer<f64>;
pub type BufferEntry = relaying::BufferEntry<f64>;
pub type Constellation = detection::Constellation<f64>;
pub type DetectionResult = detection::DetectionResult<f64>;
pub type LinkSnr = selection::LinkSnr<f64>;
pub type SelectionDecision = selection::SelectionDecision<f64>;
pub type PacketRunner = engine::PacketRunner<f64>;
