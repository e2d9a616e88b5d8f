//! Content library with rank-based popularity and per-user request draws.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Finite content library. Popularity is non-increasing in content index
/// (index 0 is the most popular content).
#[derive(Debug, Clone, PartialEq)]
pub struct ContentLibrary {
    pub count: usize,
    /// Size of every content in bits.
    pub size_bits: f64,
    pub zipf_gamma: f64,
    pub popularity: Vec<f64>,
}

impl ContentLibrary {
    pub fn new(count: usize, size_bits: f64, zipf_gamma: f64) -> Result<Self> {
        if !(size_bits > 0.0) {
            return Err(Error::Domain("content size must be positive".into()));
        }
        let popularity = zipf_popularity(count, zipf_gamma)?;
        Ok(ContentLibrary {
            count,
            size_bits,
            zipf_gamma,
            popularity,
        })
    }
}

/// Rank-based popularity: item `i` (1-based rank) gets weight `1 / i^gamma`,
/// normalized to sum to one. `gamma = 0` is uniform.
pub fn zipf_popularity(count: usize, gamma: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("library must hold at least one content".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::Domain("zipf gamma must be >= 0".into()));
    }
    let weights: Vec<f64> = (1..=count).map(|i| (i as f64).powf(-gamma)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// One requested content per user, fixed for the whole replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestAssignment {
    content_of: Vec<usize>,
}

impl RequestAssignment {
    pub fn new(content_of: Vec<usize>, content_count: usize) -> Result<Self> {
        if content_of.iter().any(|&f| f >= content_count) {
            return Err(Error::Domain("request points past the library".into()));
        }
        Ok(RequestAssignment { content_of })
    }

    pub fn requested(&self, user: usize) -> usize {
        self.content_of[user]
    }

    pub fn user_count(&self) -> usize {
        self.content_of.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.content_of
    }
}

/// Draw one content per user, i.i.d. from the library popularity.
/// Deterministic for a given seed.
pub fn generate_requests(
    library: &ContentLibrary,
    user_count: usize,
    seed: u64,
) -> Result<RequestAssignment> {
    if user_count == 0 {
        return Err(Error::Domain("need at least one user".into()));
    }
    let mut cumulative = Vec::with_capacity(library.count);
    let mut acc = 0.0;
    for &p in &library.popularity {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = stream_rng(seed, Stream::Requests);
    let content_of = (0..user_count)
        .map(|_| {
            let u: f64 = rng.random();
            // partition_point returns the first index with cumulative > u
            cumulative
                .partition_point(|&c| c <= u)
                .min(library.count - 1)
        })
        .collect();
    RequestAssignment::new(content_of, library.count)
}
