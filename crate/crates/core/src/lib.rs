//! Streaming randomness extraction.
//!
//! The central object is the *status tree*: a binary tree of labeled nodes
//! that turns tosses of a coin with unknown bias into a stream of unbiased,
//! independent bits. Bits can be requested one at a time; each request reads
//! only as many tosses as it needs.
//!
//! * [`coin`] holds the status-tree extractor for two-symbol sources.
//! * [`dice`] generalizes it to `m`-sided dice through a binarization forest.
//! * [`markov`] feeds per-state exit streams of a Markov chain into dice
//!   extractors.
//! * [`baselines`] has von Neumann's pairwise scheme for comparison.
//! * [`analysis`] evaluates the expected efficiency and processing cost of
//!   depth-limited extractors, and runs seeded simulations.
//! * [`inversion`] reconstructs inputs from status trees, which is the
//!   machinery behind the uniformity argument.
//! * [`oracle`] checks uniformity of the first `k` output bits by exact
//!   enumeration in rational arithmetic.

pub mod analysis;
pub mod baselines;
pub mod bits;
pub mod coin;
pub mod dice;
pub mod inversion;
pub mod markov;
pub mod oracle;

pub use bits::{bits_to_string, pack_msb_first, parse_bits};
pub use coin::{
    extract_bits, extract_with, node_update, CoinSymbol, ExtractError, Extraction, Extractor,
    ExtractorSession, NodeLabel,
    NodeUpdate, StatusTree, StepOutput, TraceNode,
};
pub use dice::{binarize, prefix_stream, BinarizationForest, DiceError, DieFace};
pub use inversion::{NodePath, TraceBundle};
pub use oracle::ExactProb;
pub use markov::{exit_stream, MarkovError, MarkovSession};
