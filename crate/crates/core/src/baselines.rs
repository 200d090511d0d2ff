//! Von Neumann's pairwise debiasing, as a reference point.

use std::convert::Infallible;

use crate::coin::{CoinSymbol, Extractor, StepOutput};

/// Streaming von Neumann extractor: consecutive disjoint pairs, `HT` gives 1,
/// `TH` gives 0, equal pairs give nothing. The bit is emitted as soon as the
/// pair completes.
#[derive(Debug, Clone, Default)]
pub struct VonNeumann {
    held: Option<CoinSymbol>,
    symbols_consumed: u64,
    output: Vec<bool>,
}

impl VonNeumann {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, symbol: CoinSymbol) -> Option<bool> {
        self.symbols_consumed += 1;
        let bit = match self.held.take() {
            None => {
                self.held = Some(symbol);
                None
            }
            Some(first) if first == symbol => None,
            Some(first) => Some(first.is_heads()),
        };
        self.output.extend(bit);
        bit
    }
}

impl Extractor for VonNeumann {
    type Symbol = CoinSymbol;
    type Error = Infallible;

    fn process(&mut self, symbol: CoinSymbol) -> Result<StepOutput, Infallible> {
        Ok(StepOutput {
            bits: self.push(symbol).into_iter().collect(),
            messages_processed: 1,
        })
    }

    fn output(&self) -> &[bool] {
        &self.output
    }

    fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }
}

/// Batch form of [`VonNeumann`]. A trailing odd symbol is ignored.
pub fn von_neumann(input: &[CoinSymbol]) -> Vec<bool> {
    input
        .chunks_exact(2)
        .filter(|pair| pair[0] != pair[1])
        .map(|pair| pair[0].is_heads())
        .collect()
}
