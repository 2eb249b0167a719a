//! User and content space: catalog generation, popularity over a content's
//! lifetime, per-cluster request arrivals and the popularity predictor used
//! by push replication.

mod catalog;
mod predictor;
mod requests;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use self::catalog::{build_catalog, popularity_at, zipf_weights, Content, ContentId, PopularityProfile};
pub use self::predictor::PopularityPredictor;
pub use self::requests::{next_request, pick_weighted, RequestDraw, RequestProcess};

/// Deterministic generator used for every draw in a run. ChaCha has integer
/// state only, so a seed reproduces the same sequence on every platform.
pub type SimRng = ChaCha8Rng;

/// Independent draw sequences within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Content sizes.
    Catalog,
    /// Publish times and lifetimes.
    Lifecycle,
    /// Arrivals and content picks of one client cluster.
    Cluster(usize),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Catalog => 1,
            Stream::Lifecycle => 2,
            Stream::Cluster(i) => 1024 + i as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
