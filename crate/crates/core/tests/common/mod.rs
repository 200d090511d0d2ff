#![allow(dead_code)]

use proptest::prelude::*;
use randstream::{CoinSymbol, NodeLabel, TraceNode};

/// Symbol sequences from a coin whose bias is itself drawn per case, so that
/// long concordant runs show up as often as balanced ones.
pub fn coin_seq(max_len: usize) -> impl Strategy<Value = Vec<CoinSymbol>> {
    (1u32..10).prop_flat_map(move |w| {
        prop::collection::vec(
            prop::bool::weighted(f64::from(w) / 10.0).prop_map(CoinSymbol::from_bit),
            0..=max_len,
        )
    })
}

pub fn all_seqs(len: usize) -> impl Iterator<Item = Vec<CoinSymbol>> {
    (0u32..1 << len).map(move |v| (0..len).map(|i| CoinSymbol::from_bit(v >> i & 1 == 1)).collect())
}

pub fn seq(s: &str) -> Vec<CoinSymbol> {
    CoinSymbol::parse_seq(s).unwrap()
}

/// Offline model of the node that sees `stream`: split it into pairs, send
/// one symbol per pair left and one per concordant pair right, and log the
/// discordant pairs. A discordant final pair stays as a held label since no
/// later symbol arrives to release it.
pub fn model(stream: &[CoinSymbol], depth: u32, limit: Option<u32>) -> TraceNode {
    use CoinSymbol::{H, T};
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut log = Vec::new();
    for pair in stream.chunks_exact(2) {
        match (pair[0], pair[1]) {
            (H, H) => {
                left.push(T);
                right.push(H);
            }
            (T, T) => {
                left.push(T);
                right.push(T);
            }
            (H, T) => {
                left.push(H);
                log.push(true);
            }
            (T, H) => {
                left.push(H);
                log.push(false);
            }
        }
    }
    let label = if stream.len() % 2 == 1 {
        NodeLabel::from(stream[stream.len() - 1])
    } else {
        match stream.len().checked_sub(2).map(|i| (stream[i], stream[i + 1])) {
            Some((H, T)) => {
                log.pop();
                NodeLabel::One
            }
            Some((T, H)) => {
                log.pop();
                NodeLabel::Zero
            }
            _ => NodeLabel::Phi,
        }
    };
    let has_children = stream.len() >= 2 && limit.is_none_or(|d| depth < d);
    TraceNode {
        label,
        log,
        children: has_children.then(|| {
            Box::new([model(&left, depth + 1, limit), model(&right, depth + 1, limit)])
        }),
    }
}
