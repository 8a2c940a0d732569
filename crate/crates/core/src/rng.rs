use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent RNG streams derived from one experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Synthetic = 1,
    Split = 2,
    Init = 3,
    Shuffle = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
