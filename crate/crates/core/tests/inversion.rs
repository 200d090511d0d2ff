mod common;

use std::collections::BTreeMap;

use common::{all_seqs, coin_seq, seq};
use proptest::prelude::*;
use randstream::inversion::{equivalent, flip_and_rebuild, reconstruct, trace_of, InversionError};
use randstream::{CoinSymbol, ExtractorSession, NodePath, TraceBundle};

fn heads(x: &[CoinSymbol]) -> usize {
    x.iter().filter(|s| s.is_heads()).count()
}

/// Every way of rewriting the logs of `bundle` with the same lengths.
fn all_flips(bundle: &TraceBundle) -> Vec<BTreeMap<NodePath, Vec<bool>>> {
    let logs = bundle.logs();
    let total: usize = logs.values().map(Vec::len).sum();
    (0u64..1 << total)
        .map(|mut v| {
            logs.iter()
                .map(|(path, log)| {
                    let new: Vec<bool> = log
                        .iter()
                        .map(|_| {
                            let bit = v & 1 == 1;
                            v >>= 1;
                            bit
                        })
                        .collect();
                    (path.clone(), new)
                })
                .collect()
        })
        .collect()
}

fn check_flip(x: &[CoinSymbol], flip: &BTreeMap<NodePath, Vec<bool>>) -> Result<(), TestCaseError> {
    let bundle = trace_of(x);
    let y = flip_and_rebuild(&bundle, flip).unwrap();
    prop_assert_eq!(y.len(), x.len());
    prop_assert_eq!(heads(&y), heads(x));
    prop_assert_eq!(y.last(), x.last());
    prop_assert!(equivalent(x, &y));
    prop_assert_eq!(&trace_of(&y).logs(), flip);
    Ok(())
}

proptest! {
    #[test]
    fn round_trip(x in coin_seq(2000)) {
        prop_assert_eq!(reconstruct(&trace_of(&x)).unwrap(), x);
    }

    #[test]
    fn random_flip_is_a_permutation(x in coin_seq(300), seed in any::<u64>()) {
        let bundle = trace_of(&x);
        let mut state = seed;
        let flip: BTreeMap<_, _> = bundle
            .logs()
            .into_iter()
            .map(|(path, log)| {
                let new = log
                    .iter()
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        state >> 63 == 1
                    })
                    .collect();
                (path, new)
            })
            .collect();
        check_flip(&x, &flip)?;
    }

    #[test]
    fn limited_bundles_invert_until_the_limit_is_reached(x in coin_seq(40), d in 1u32..5) {
        let mut s = ExtractorSession::new(Some(d));
        s.feed_all(x.iter().copied());
        let result = reconstruct(&s.snapshot_trace());
        if s.tree().max_depth() < d {
            prop_assert_eq!(result.unwrap(), x);
        } else {
            prop_assert_eq!(result, Err(InversionError::DepthLimited(d)));
        }
    }
}

#[test]
fn round_trip_exhaustive() {
    for len in 0..=10 {
        for x in all_seqs(len) {
            assert_eq!(reconstruct(&trace_of(&x)).unwrap(), x);
        }
    }
}

#[test]
fn every_flip_is_a_permutation_exhaustive() {
    let mut flips = 0;
    for len in 0..=8 {
        for x in all_seqs(len) {
            for flip in all_flips(&trace_of(&x)) {
                check_flip(&x, &flip).unwrap();
                flips += 1;
            }
        }
    }
    assert!(flips > 511);
}

#[test]
fn equivalence_classes_partition_by_flips() {
    // Within one length, the inputs equivalent to x are exactly its flips.
    for x in all_seqs(8) {
        let bundle = trace_of(&x);
        let mut from_flips: Vec<_> = all_flips(&bundle)
            .iter()
            .map(|f| flip_and_rebuild(&bundle, f).unwrap())
            .collect();
        from_flips.sort();
        let mut class: Vec<_> = all_seqs(8).filter(|y| equivalent(&x, y)).collect();
        class.sort();
        assert_eq!(from_flips, class);
    }
}

#[test]
fn worked_flip() {
    let bundle = trace_of(&seq("HTTTHT"));
    let flip = BTreeMap::from([(NodePath::root().left(), vec![false])]);
    assert_eq!(flip_and_rebuild(&bundle, &flip).unwrap(), seq("TTHTHT"));
    assert!(equivalent(&seq("HTTTHT"), &seq("TTHTHT")));
    assert!(!equivalent(&seq("HH"), &seq("HT")));
}
