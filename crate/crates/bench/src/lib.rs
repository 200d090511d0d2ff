//! Seeded input generators shared by the benchmarks.

use rand::distr::{Distribution, weighted::WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randstream::analysis::seeded_coin;
use randstream::CoinSymbol;

pub fn coin_input(p: f64, n: usize, seed: u64) -> Vec<CoinSymbol> {
    seeded_coin(p, seed).expect("p in [0, 1]").take(n).collect()
}

/// `n` faces drawn with the given relative weights.
pub fn die_input(weights: &[f64], n: usize, seed: u64) -> Vec<u32> {
    let dist = WeightedIndex::new(weights).expect("positive weights");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.sample(&mut rng) as u32).collect()
}

/// A path of `n` states from state 0; `matrix[i]` holds the relative
/// weights of the successors of state `i`.
pub fn markov_path(matrix: &[Vec<f64>], n: usize, seed: u64) -> Vec<u32> {
    let rows: Vec<WeightedIndex<f64>> = matrix
        .iter()
        .map(|row| WeightedIndex::new(row).expect("positive weights"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = 0;
    (0..n)
        .map(|_| {
            let current = state;
            state = rows[current as usize].sample(&mut rng) as u32;
            current
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(coin_input(0.3, 100, 4), coin_input(0.3, 100, 4));
        let faces = die_input(&[1.0, 0.0, 2.0], 1000, 1);
        assert!(faces.iter().all(|&f| f != 1));
        let path = markov_path(&[vec![0.0, 1.0], vec![1.0, 0.0]], 6, 2);
        assert_eq!(path, [0, 1, 0, 1, 0, 1]);
    }
}
