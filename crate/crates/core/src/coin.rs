//! The status-tree extractor for two-symbol sources.
//!
//! Every node of a [`StatusTree`] holds one [`NodeLabel`]. A node that
//! receives a symbol updates its label through [`node_update`] and may emit a
//! bit or forward derived symbols to its two children. The root receives the
//! raw input. Processing one input symbol runs depth-first from the root: a
//! node's left message is delivered (and fully propagated) before its right
//! message.
//!
//! With a depth limit `d`, nodes at depth `d` still update their labels and
//! emit bits, but the symbols they would forward are dropped and no deeper
//! nodes are ever created.

use std::convert::Infallible;
use std::fmt;

use thiserror::Error;

use crate::inversion::{NodePath, TraceBundle};

/// One toss of a two-sided coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoinSymbol {
    H,
    T,
}

impl CoinSymbol {
    /// Case-insensitive parse of `H`/`T`.
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'H' | 'h' => Some(CoinSymbol::H),
            'T' | 't' => Some(CoinSymbol::T),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            CoinSymbol::H => 'H',
            CoinSymbol::T => 'T',
        }
    }

    /// Bit 1 maps to `H`, bit 0 to `T`.
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            CoinSymbol::H
        } else {
            CoinSymbol::T
        }
    }

    pub fn is_heads(self) -> bool {
        self == CoinSymbol::H
    }

    /// Parses a string such as `"HTTTHT"`. Whitespace is skipped; the error
    /// carries the byte offset of the first offending character.
    pub fn parse_seq(s: &str) -> Result<Vec<CoinSymbol>, usize> {
        s.char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| CoinSymbol::from_char(c).ok_or(i))
            .collect()
    }

    pub fn seq_to_string(seq: &[CoinSymbol]) -> String {
        seq.iter().map(|s| s.as_char()).collect()
    }
}

impl fmt::Display for CoinSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// The state stored at a status-tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    /// Empty; every node starts here.
    Phi,
    /// Holding an unpaired `H`.
    H,
    /// Holding an unpaired `T`.
    T,
    /// Holding a 0 that is emitted on the next received symbol.
    Zero,
    /// Holding a 1 that is emitted on the next received symbol.
    One,
}

impl NodeLabel {
    pub fn as_char(self) -> char {
        match self {
            NodeLabel::Phi => 'φ',
            NodeLabel::H => 'H',
            NodeLabel::T => 'T',
            NodeLabel::Zero => '0',
            NodeLabel::One => '1',
        }
    }

    /// The held bit, for `Zero`/`One`.
    pub fn pending_bit(self) -> Option<bool> {
        match self {
            NodeLabel::Zero => Some(false),
            NodeLabel::One => Some(true),
            _ => None,
        }
    }

    /// The held symbol, for `H`/`T`.
    pub fn held_symbol(self) -> Option<CoinSymbol> {
        match self {
            NodeLabel::H => Some(CoinSymbol::H),
            NodeLabel::T => Some(CoinSymbol::T),
            _ => None,
        }
    }
}

impl From<CoinSymbol> for NodeLabel {
    fn from(s: CoinSymbol) -> Self {
        match s {
            CoinSymbol::H => NodeLabel::H,
            CoinSymbol::T => NodeLabel::T,
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Result of delivering one symbol to one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeUpdate {
    pub label: NodeLabel,
    pub emit: Option<bool>,
    pub left: Option<CoinSymbol>,
    pub right: Option<CoinSymbol>,
}

/// The node transition table.
///
/// | label | incoming | new label | emit | left | right |
/// |-------|----------|-----------|------|------|-------|
/// | φ     | y        | y         |      |      |       |
/// | 0     | y        | y         | 0    |      |       |
/// | 1     | y        | y         | 1    |      |       |
/// | H     | H        | φ         |      | T    | H     |
/// | T     | T        | φ         |      | T    | T     |
/// | H     | T        | 1         |      | H    |       |
/// | T     | H        | 0         |      | H    |       |
pub const fn node_update(label: NodeLabel, incoming: CoinSymbol) -> NodeUpdate {
    use CoinSymbol as S;
    use NodeLabel as L;

    let stored = match incoming {
        S::H => L::H,
        S::T => L::T,
    };
    let (label, emit, left, right) = match (label, incoming) {
        (L::Phi, _) => (stored, None, None, None),
        (L::Zero, _) => (stored, Some(false), None, None),
        (L::One, _) => (stored, Some(true), None, None),
        (L::H, S::H) => (L::Phi, None, Some(S::T), Some(S::H)),
        (L::T, S::T) => (L::Phi, None, Some(S::T), Some(S::T)),
        (L::H, S::T) => (L::One, None, Some(S::H), None),
        (L::T, S::H) => (L::Zero, None, Some(S::H), None),
    };
    NodeUpdate {
        label,
        emit,
        left,
        right,
    }
}

#[derive(Debug, Clone)]
struct Node {
    label: NodeLabel,
    /// Arena index of the left child; the right child is the next slot.
    children: Option<u32>,
    depth: u32,
    log: Vec<bool>,
}

impl Node {
    fn new(depth: u32) -> Self {
        Node {
            label: NodeLabel::Phi,
            children: None,
            depth,
            log: Vec::new(),
        }
    }
}

/// A status tree, stored as an arena. Nodes are never removed.
#[derive(Debug, Clone)]
pub struct StatusTree {
    nodes: Vec<Node>,
    depth_limit: Option<u32>,
    pending: Vec<(u32, CoinSymbol)>,
}

impl StatusTree {
    pub fn new(depth_limit: Option<u32>) -> Self {
        StatusTree {
            nodes: vec![Node::new(0)],
            depth_limit,
            pending: Vec::new(),
        }
    }

    pub fn depth_limit(&self) -> Option<u32> {
        self.depth_limit
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Depth of the deepest node (the root has depth 0).
    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn root_label(&self) -> NodeLabel {
        self.nodes[0].label
    }

    /// Delivers `symbol` to the root and propagates until no messages remain.
    /// Emitted bits are appended to `out`. Returns the number of deliveries,
    /// counting the input symbol itself.
    pub fn feed(&mut self, symbol: CoinSymbol, out: &mut Vec<bool>) -> u64 {
        let mut deliveries = 0;
        self.pending.push((0, symbol));
        while let Some((idx, sym)) = self.pending.pop() {
            deliveries += 1;
            let node = &mut self.nodes[idx as usize];
            let update = node_update(node.label, sym);
            node.label = update.label;
            if let Some(bit) = update.emit {
                node.log.push(bit);
                out.push(bit);
            }
            let Some(left) = update.left else { continue };
            if self.depth_limit.is_some_and(|d| node.depth >= d) {
                continue;
            }
            let first = match node.children {
                Some(first) => first,
                None => {
                    let depth = node.depth + 1;
                    let first = self.nodes.len() as u32;
                    self.nodes[idx as usize].children = Some(first);
                    self.nodes.push(Node::new(depth));
                    self.nodes.push(Node::new(depth));
                    first
                }
            };
            if let Some(right) = update.right {
                self.pending.push((first + 1, right));
            }
            self.pending.push((first, left));
        }
        deliveries
    }

    /// Structural copy of the tree with labels and per-node bit logs.
    pub fn snapshot(&self) -> TraceNode {
        self.snapshot_at(0)
    }

    fn snapshot_at(&self, idx: u32) -> TraceNode {
        let node = &self.nodes[idx as usize];
        TraceNode {
            label: node.label,
            log: node.log.clone(),
            children: node
                .children
                .map(|c| Box::new([self.snapshot_at(c), self.snapshot_at(c + 1)])),
        }
    }

    /// Visits every node with its root-relative path, parents before children.
    pub fn for_each_node(&self, mut f: impl FnMut(&NodePath, NodeLabel, &[bool])) {
        let mut stack = vec![(0u32, NodePath::root())];
        while let Some((idx, path)) = stack.pop() {
            let node = &self.nodes[idx as usize];
            f(&path, node.label, &node.log);
            if let Some(c) = node.children {
                stack.push((c + 1, path.right()));
                stack.push((c, path.left()));
            }
        }
    }

    /// Total number of bits emitted by all nodes.
    pub fn logged_bits(&self) -> usize {
        self.nodes.iter().map(|n| n.log.len()).sum()
    }
}

/// A read-only copy of one node and its subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub label: NodeLabel,
    /// Bits emitted by this node, in emission order.
    pub log: Vec<bool>,
    /// Left and right child, when the node has children.
    pub children: Option<Box<[TraceNode; 2]>>,
}

impl TraceNode {
    pub fn leaf(label: NodeLabel) -> Self {
        TraceNode {
            label,
            log: Vec::new(),
            children: None,
        }
    }

    /// The node at `path`, if present.
    pub fn get(&self, path: &NodePath) -> Option<&TraceNode> {
        path.branches().iter().try_fold(self, |node, &b| {
            node.children.as_ref().map(|c| &c[b as usize])
        })
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .as_ref()
            .map_or(0, |c| c[0].node_count() + c[1].node_count())
    }
}

/// Bits and work produced by processing one input symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutput {
    pub bits: Vec<bool>,
    /// Deliveries of a symbol to a node, including the input itself.
    pub messages_processed: u64,
}

/// A status tree together with the running output stream.
#[derive(Debug, Clone)]
pub struct ExtractorSession {
    tree: StatusTree,
    symbols_consumed: u64,
    messages: u64,
    output: Vec<bool>,
}

impl ExtractorSession {
    pub fn new(depth_limit: Option<u32>) -> Self {
        ExtractorSession {
            tree: StatusTree::new(depth_limit),
            symbols_consumed: 0,
            messages: 0,
            output: Vec::new(),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn process_symbol(&mut self, symbol: CoinSymbol) -> StepOutput {
        let start = self.output.len();
        let messages_processed = self.feed(symbol);
        StepOutput {
            bits: self.output[start..].to_vec(),
            messages_processed,
        }
    }

    /// Like [`process_symbol`](Self::process_symbol) without copying the new
    /// bits out; returns the delivery count.
    pub fn feed(&mut self, symbol: CoinSymbol) -> u64 {
        let n = self.tree.feed(symbol, &mut self.output);
        self.symbols_consumed += 1;
        self.messages += n;
        n
    }

    pub fn feed_all(&mut self, symbols: impl IntoIterator<Item = CoinSymbol>) {
        for s in symbols {
            self.feed(s);
        }
    }

    pub fn tree(&self) -> &StatusTree {
        &self.tree
    }

    pub fn output(&self) -> &[bool] {
        &self.output
    }

    pub fn bits_emitted(&self) -> usize {
        self.output.len()
    }

    pub fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }

    pub fn messages_processed(&self) -> u64 {
        self.messages
    }

    /// Read-only copy of the tree shape, labels and per-node logs.
    pub fn snapshot_trace(&self) -> TraceBundle {
        TraceBundle::new(self.tree.snapshot(), self.tree.depth_limit())
    }
}

impl Default for ExtractorSession {
    fn default() -> Self {
        Self::unlimited()
    }
}

/// A symbol-by-symbol bit extractor with an accumulated output stream.
pub trait Extractor {
    type Symbol: Copy;
    type Error: std::error::Error;

    fn process(&mut self, symbol: Self::Symbol) -> Result<StepOutput, Self::Error>;

    /// Every bit emitted so far.
    fn output(&self) -> &[bool];

    fn symbols_consumed(&self) -> u64;
}

impl Extractor for ExtractorSession {
    type Symbol = CoinSymbol;
    type Error = Infallible;

    fn process(&mut self, symbol: CoinSymbol) -> Result<StepOutput, Infallible> {
        Ok(self.process_symbol(symbol))
    }

    fn output(&self) -> &[bool] {
        &self.output
    }

    fn symbols_consumed(&self) -> u64 {
        self.symbols_consumed
    }
}

/// The first `k` bits of a stream and the number of symbols read for them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub bits: Vec<bool>,
    pub consumed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError<E> {
    #[error("source exhausted after {consumed} symbols with {} of {requested} bits", partial.len())]
    SourceExhausted {
        partial: Vec<bool>,
        consumed: u64,
        requested: usize,
    },
    #[error(transparent)]
    Extractor(E),
}

/// Feeds `source` into `extractor` until it has produced at least `k` new
/// bits and returns exactly the first `k` of them. Surplus bits from the
/// final symbol are dropped from the result (they stay in the extractor's
/// own output).
pub fn extract_with<E: Extractor>(
    extractor: &mut E,
    source: impl IntoIterator<Item = E::Symbol>,
    k: usize,
) -> Result<Extraction, ExtractError<E::Error>> {
    let start_bits = extractor.output().len();
    let start_symbols = extractor.symbols_consumed();
    let mut source = source.into_iter();
    while extractor.output().len() - start_bits < k {
        let Some(symbol) = source.next() else {
            return Err(ExtractError::SourceExhausted {
                partial: extractor.output()[start_bits..].to_vec(),
                consumed: extractor.symbols_consumed() - start_symbols,
                requested: k,
            });
        };
        extractor.process(symbol).map_err(ExtractError::Extractor)?;
    }
    Ok(Extraction {
        bits: extractor.output()[start_bits..start_bits + k].to_vec(),
        consumed: extractor.symbols_consumed() - start_symbols,
    })
}

/// Runs a fresh status-tree extractor over `source` until `k` bits exist.
pub fn extract_bits(
    source: impl IntoIterator<Item = CoinSymbol>,
    k: usize,
    depth_limit: Option<u32>,
) -> Result<Extraction, ExtractError<Infallible>> {
    extract_with(&mut ExtractorSession::new(depth_limit), source, k)
}
