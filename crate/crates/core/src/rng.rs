//! Seeded random streams.
//!
//! A single episode seed fans out into independent ChaCha8 streams, one per
//! purpose. Overriding one source of randomness (for example fixing every skill
//! to 1.0) leaves the draws of every other stream untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Skills,
    Elasticities,
    Parameters,
    Shocks,
    Employment,
    InitialActions,
    /// Per-agent policy stream, keyed by the agent's global index.
    Policy(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Skills => 1,
            Stream::Elasticities => 2,
            Stream::Parameters => 3,
            Stream::Shocks => 4,
            Stream::Employment => 5,
            Stream::InitialActions => 6,
            Stream::Policy(agent) => 1 << 32 | u64::from(agent),
        }
    }
}

pub fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose.id());
    rng
}
