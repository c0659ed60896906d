//! Private mean estimation where every client discloses a single bit of its
//! fixed-point value, optionally under randomized response.

pub mod baselines;
pub mod codec;
pub mod error;
pub mod estimators;
pub mod privacy;
pub mod protocol;
pub mod sampling;
pub mod simharness;
pub mod stats;

pub use codec::{BitVector, FixedPointCodec, SignedMode};
pub use error::{Error, Result};
pub use privacy::{PrivacyMeter, RandomizedResponse};
pub use protocol::{BitPushing, MeanOutcome, ProtocolConfig};
pub use sampling::SamplingDistribution;
pub use stats::BitStatistics;
