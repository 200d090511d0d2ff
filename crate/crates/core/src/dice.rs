//! Extraction from an `m`-sided die.
//!
//! Each face is written in fixed-width binary, most significant bit first,
//! with 1 as `H` and 0 as `T`. The `i`-th bit of a face is a toss in the coin
//! stream indexed by the face's first `i` bits (its *prefix*). Each prefix
//! stream gets its own status tree; a face is processed top-down along its
//! prefix path and the emitted bits join a single output stream in that
//! order.

use thiserror::Error;

use crate::coin::{CoinSymbol, Extractor, ExtractorSession, StepOutput};

/// Largest supported alphabet.
pub const MAX_ALPHABET: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiceError {
    #[error("alphabet size {0} is outside 2..={MAX_ALPHABET}")]
    InvalidAlphabet(u32),
    #[error("face {value} is outside 0..{m}")]
    FaceOutOfRange { value: u32, m: u32 },
    #[error("face belongs to a {face_m}-sided die, extractor expects {m}")]
    AlphabetMismatch { face_m: u32, m: u32 },
}

fn check_alphabet(m: u32) -> Result<(), DiceError> {
    if (2..=MAX_ALPHABET).contains(&m) {
        Ok(())
    } else {
        Err(DiceError::InvalidAlphabet(m))
    }
}

/// Bits per face: `ceil(log2 m)`.
pub fn width(m: u32) -> u32 {
    u32::BITS - (m - 1).leading_zeros()
}

/// A face of an `m`-sided die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DieFace {
    value: u32,
    m: u32,
}

impl DieFace {
    pub fn new(value: u32, m: u32) -> Result<Self, DiceError> {
        check_alphabet(m)?;
        if value >= m {
            return Err(DiceError::FaceOutOfRange { value, m });
        }
        Ok(DieFace { value, m })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn m(self) -> u32 {
        self.m
    }
}

/// Fixed-width binary form of `face`, most significant bit first.
pub fn binarize(face: DieFace) -> Vec<CoinSymbol> {
    let w = width(face.m);
    (0..w)
        .rev()
        .map(|shift| CoinSymbol::from_bit((face.value >> shift) & 1 == 1))
        .collect()
}

/// Parses a digit string such as `"012112210"` into faces. Only valid for
/// `m <= 10`.
pub fn parse_digits(s: &str, m: u32) -> Result<Vec<DieFace>, DiceError> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            let value = c.to_digit(10).unwrap_or(u32::MAX);
            DieFace::new(value, m)
        })
        .collect()
}

/// The coin stream seen by the binarization node at `prefix`: for every face
/// whose binary form starts with `prefix`, the bit that follows it.
pub fn prefix_stream(faces: &[DieFace], prefix: &[CoinSymbol]) -> Vec<CoinSymbol> {
    faces
        .iter()
        .filter_map(|&f| {
            let bits = binarize(f);
            (bits.len() > prefix.len() && bits.starts_with(prefix)).then(|| bits[prefix.len()])
        })
        .collect()
}

fn slot(prefix_len: usize, prefix_value: usize) -> usize {
    (1usize << prefix_len) - 1 + prefix_value
}

fn prefix_of(slot: usize) -> Vec<CoinSymbol> {
    let len = (usize::BITS - (slot + 1).leading_zeros() - 1) as usize;
    let value = slot + 1 - (1 << len);
    (0..len)
        .rev()
        .map(|shift| CoinSymbol::from_bit((value >> shift) & 1 == 1))
        .collect()
}

/// One status-tree extractor per binarization prefix, created on first use.
#[derive(Debug, Clone)]
pub struct BinarizationForest {
    m: u32,
    width: u32,
    depth_limit: Option<u32>,
    trees: Vec<Option<ExtractorSession>>,
    symbols_consumed: u64,
    messages: u64,
    output: Vec<bool>,
}

impl BinarizationForest {
    pub fn new(m: u32, depth_limit: Option<u32>) -> Result<Self, DiceError> {
        check_alphabet(m)?;
        Ok(BinarizationForest {
            m,
            width: width(m),
            depth_limit,
            trees: Vec::new(),
            symbols_consumed: 0,
            messages: 0,
            output: Vec::new(),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn depth_limit(&self) -> Option<u32> {
        self.depth_limit
    }

    pub fn face(&self, value: u32) -> Result<DieFace, DiceError> {
        DieFace::new(value, self.m)
    }

    pub fn process_face(&mut self, face: DieFace) -> Result<StepOutput, DiceError> {
        let start = self.output.len();
        let messages_processed = self.feed(face)?;
        Ok(StepOutput {
            bits: self.output[start..].to_vec(),
            messages_processed,
        })
    }

    /// Processes `face` without copying out the new bits; returns the number
    /// of status-tree deliveries.
    pub fn feed(&mut self, face: DieFace) -> Result<u64, DiceError> {
        if face.m != self.m {
            return Err(DiceError::AlphabetMismatch { face_m: face.m, m: self.m });
        }
        let mut messages = 0;
        let mut prefix = 0usize;
        for i in 0..self.width {
            let bit = (face.value >> (self.width - 1 - i)) & 1 == 1;
            let idx = slot(i as usize, prefix);
            if idx >= self.trees.len() {
                self.trees.resize_with(idx + 1, || None);
            }
            let depth_limit = self.depth_limit;
            let tree = self.trees[idx].get_or_insert_with(|| ExtractorSession::new(depth_limit));
            let before = tree.bits_emitted();
            messages += tree.feed(CoinSymbol::from_bit(bit));
            self.output.extend_from_slice(&tree.output()[before..]);
            prefix = (prefix << 1) | usize::from(bit);
        }
        self.symbols_consumed += 1;
        self.messages += messages;
        Ok(messages)
    }

    /// The extractor for `prefix`, if any face has reached it.
    pub fn tree(&self, prefix: &[CoinSymbol]) -> Option<&ExtractorSession> {
        if prefix.len() >= self.width as usize {
            return None;
        }
        let value = prefix
            .iter()
            .fold(0usize, |acc, s| (acc << 1) | usize::from(s.is_heads()));
        self.trees.get(slot(prefix.len(), value))?.as_ref()
    }

    /// Prefixes that currently have an extractor, shortest first.
    pub fn prefixes(&self) -> Vec<Vec<CoinSymbol>> {
        self.trees
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(i, _)| prefix_of(i))
            .collect()
    }

    pub fn output(&self) -> &[bool] {
        &self.output
    }

    pub fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }

    pub fn messages_processed(&self) -> u64 {
        self.messages
    }
}

impl Extractor for BinarizationForest {
    type Symbol = u32;
    type Error = DiceError;

    fn process(&mut self, value: u32) -> Result<StepOutput, DiceError> {
        let face = self.face(value)?;
        self.process_face(face)
    }

    fn output(&self) -> &[bool] {
        &self.output
    }

    fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits_to_string;

    fn faces(s: &str, m: u32) -> Vec<DieFace> {
        parse_digits(s, m).unwrap()
    }

    fn bin(v: u32, m: u32) -> String {
        CoinSymbol::seq_to_string(&binarize(DieFace::new(v, m).unwrap()))
    }

    #[test]
    fn widths() {
        assert_eq!(width(2), 1);
        assert_eq!(width(3), 2);
        assert_eq!(width(4), 2);
        assert_eq!(width(5), 3);
        assert_eq!(width(8), 3);
        assert_eq!(width(9), 4);
    }

    #[test]
    fn binarization_examples() {
        assert_eq!(bin(0, 3), "TT");
        assert_eq!(bin(1, 3), "TH");
        assert_eq!(bin(2, 3), "HT");
        assert_eq!(bin(0, 2), "T");
        assert_eq!(bin(1, 2), "H");
        assert_eq!(bin(5, 8), "HTH");
    }

    #[test]
    fn face_validation() {
        assert_eq!(DieFace::new(3, 3), Err(DiceError::FaceOutOfRange { value: 3, m: 3 }));
        assert_eq!(DieFace::new(0, 1), Err(DiceError::InvalidAlphabet(1)));
        assert!(BinarizationForest::new(1, None).is_err());
        let mut forest = BinarizationForest::new(3, None).unwrap();
        let other = DieFace::new(0, 4).unwrap();
        assert!(matches!(forest.process_face(other), Err(DiceError::AlphabetMismatch { .. })));
    }

    #[test]
    fn prefix_streams_of_worked_example() {
        let x = faces("012112210", 3);
        let h = CoinSymbol::H;
        let t = CoinSymbol::T;
        assert_eq!(CoinSymbol::seq_to_string(&prefix_stream(&x, &[])), "TTHTTHHTT");
        assert_eq!(CoinSymbol::seq_to_string(&prefix_stream(&x, &[t])), "THHHHT");
        assert_eq!(CoinSymbol::seq_to_string(&prefix_stream(&x, &[h])), "TTT");
    }

    #[test]
    fn worked_dice_trace() {
        let mut forest = BinarizationForest::new(3, None).unwrap();
        let per_face: Vec<String> = faces("012112210", 3)
            .into_iter()
            .map(|f| bits_to_string(&forest.process_face(f).unwrap().bits))
            .collect();
        // First bit from the prefix-T tree at face 4, second from the root
        // tree at face 5; face 9 emits from the root tree before the T tree.
        assert_eq!(per_face, ["", "", "", "0", "1", "0", "0", "", "11"]);
        assert_eq!(bits_to_string(forest.output()), "010011");
    }

    #[test]
    fn lazily_created_trees() {
        let mut forest = BinarizationForest::new(3, None).unwrap();
        forest.process(0).unwrap();
        assert_eq!(forest.prefixes(), vec![vec![], vec![CoinSymbol::T]]);
        forest.process(2).unwrap();
        assert_eq!(forest.prefixes().len(), 3);
        assert_eq!(prefix_of(0), vec![]);
        assert_eq!(prefix_of(4), vec![CoinSymbol::T, CoinSymbol::H]);
    }

    #[test]
    fn two_sided_die_is_a_coin() {
        let input = [1u32, 0, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1];
        let mut forest = BinarizationForest::new(2, None).unwrap();
        let mut coin = ExtractorSession::unlimited();
        for &v in &input {
            forest.process(v).unwrap();
            coin.feed(CoinSymbol::from_bit(v == 1));
        }
        assert_eq!(forest.output(), coin.output());
    }
}
