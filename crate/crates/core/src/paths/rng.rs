//! Random stream contract.
//!
//! Every path is drawn from ChaCha20 (`rand_chacha` 0.3) keyed by
//! `seed_from_u64(seed)`. ChaCha is counter-based, so the stream id selects an
//! independent sequence under the same key: path `i` of an ensemble uses
//! stream `2i` for its large jumps and `2i + 1` for its small-jump component.
//! The output therefore depends only on `(seed, path index)`, never on how
//! paths are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Generator identity recorded in every output file.
pub const RNG_NAME: &str = "chacha20:rand_chacha-0.3:seed_from_u64:stream=2*path_index+component";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Large = 0,
    Small = 1,
}

pub fn stream(seed: u64, path_index: u64, component: Component) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 * path_index + component as u64);
    rng
}

/// Uniform draw on the open interval `(0, 1)` with 53 random bits.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Fair random sign.
pub fn sign<R: RngCore + ?Sized>(rng: &mut R) -> i8 {
    if rng.next_u64() & 1 == 0 {
        1
    } else {
        -1
    }
}
