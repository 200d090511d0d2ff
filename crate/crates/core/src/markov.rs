//! Extraction from a Markov chain with unknown transition probabilities.
//!
//! The states that follow each visit to state `s` (the *exits* of `s`) form
//! an i.i.d. stream, so each state gets its own dice extractor over the state
//! alphabet. The most recent exit of every state is held back as *pending*
//! and only delivered once the next exit of that state arrives. States are
//! the integers `0..m`.

use thiserror::Error;

use crate::coin::{Extractor, StepOutput};
use crate::dice::{BinarizationForest, DiceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkovError {
    #[error("state {state} is not one of the {m} declared states")]
    UnknownState { state: u32, m: u32 },
    #[error(transparent)]
    Dice(#[from] DiceError),
}

#[derive(Debug, Clone)]
pub struct MarkovSession {
    m: u32,
    forests: Vec<BinarizationForest>,
    pending: Vec<Option<u32>>,
    delivered: Vec<Vec<u32>>,
    prev: Option<u32>,
    symbols_consumed: u64,
    messages: u64,
    output: Vec<bool>,
}

impl MarkovSession {
    /// A session over `m` states; `depth_limit` applies to every status tree.
    pub fn new(m: u32, depth_limit: Option<u32>) -> Result<Self, MarkovError> {
        let forests = (0..m)
            .map(|_| BinarizationForest::new(m, depth_limit))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| DiceError::InvalidAlphabet(m))?;
        Ok(MarkovSession {
            m,
            forests,
            pending: vec![None; m as usize],
            delivered: vec![Vec::new(); m as usize],
            prev: None,
            symbols_consumed: 0,
            messages: 0,
            output: Vec::new(),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn process_state(&mut self, state: u32) -> Result<StepOutput, MarkovError> {
        if state >= self.m {
            return Err(MarkovError::UnknownState { state, m: self.m });
        }
        let start = self.output.len();
        let mut messages = 1;
        if let Some(prev) = self.prev {
            let i = prev as usize;
            if let Some(exit) = self.pending[i] {
                let forest = &mut self.forests[i];
                let before = forest.output().len();
                messages += forest.feed(forest.face(exit)?)?;
                self.output.extend_from_slice(&forest.output()[before..]);
                self.delivered[i].push(exit);
            }
            self.pending[i] = Some(state);
        }
        self.prev = Some(state);
        self.symbols_consumed += 1;
        self.messages += messages;
        Ok(StepOutput {
            bits: self.output[start..].to_vec(),
            messages_processed: messages,
        })
    }

    /// The exit of `state` held back from its extractor.
    pub fn pending(&self, state: u32) -> Option<u32> {
        self.pending.get(state as usize).copied().flatten()
    }

    /// Exits of `state` delivered to its extractor so far, in order.
    pub fn delivered(&self, state: u32) -> &[u32] {
        &self.delivered[state as usize]
    }

    pub fn forest(&self, state: u32) -> &BinarizationForest {
        &self.forests[state as usize]
    }

    /// The last state read.
    pub fn prev(&self) -> Option<u32> {
        self.prev
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

impl Extractor for MarkovSession {
    type Symbol = u32;
    type Error = MarkovError;

    fn process(&mut self, state: u32) -> Result<StepOutput, MarkovError> {
        self.process_state(state)
    }

    fn output(&self) -> &[bool] {
        &self.output
    }

    fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }
}

/// The states that immediately follow each occurrence of `state` in `path`.
pub fn exit_stream(path: &[u32], state: u32) -> Vec<u32> {
    path.windows(2)
        .filter(|w| w[0] == state)
        .map(|w| w[1])
        .collect()
}
