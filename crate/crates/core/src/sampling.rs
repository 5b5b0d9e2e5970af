//! Reproducible random streams and multinomial shot sampling.
//!
//! Every random draw in the library comes from a ChaCha stream keyed by a user
//! seed plus a path of stream indices, so trial `j` of a batch can be replayed
//! without replaying trials `0..j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Shots drawn per independent stream when sampling large counts.
pub const SHOTS_PER_BLOCK: u64 = 1 << 20;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a parent seed and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p.wrapping_add(1))))
}

pub fn path_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    stream_rng(derive_seed(seed, path), 0)
}

/// One multinomial draw of `shots` trials over `probs` (renormalised).
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let ratio = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, ratio)
            .expect("ratio clamped to [0,1]")
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

/// Multinomial counts for `shots` draws, split into blocks with independent streams
/// and merged by summation.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64, path: &[u64]) -> Vec<u64> {
    let mut total = vec![0u64; probs.len()];
    let blocks = shots.div_ceil(SHOTS_PER_BLOCK);
    for b in 0..blocks {
        let n = SHOTS_PER_BLOCK.min(shots - b * SHOTS_PER_BLOCK);
        let mut block_path = path.to_vec();
        block_path.push(b);
        let mut rng = path_rng(seed, &block_path);
        for (t, k) in total.iter_mut().zip(multinomial(&mut rng, n, probs)) {
            *t += k;
        }
    }
    total
}

/// Bernoulli draw with probability clamped to `[0, 1]`.
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p.clamp(0.0, 1.0)
}

/// Index drawn from nonnegative weights.
pub fn weighted_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}
