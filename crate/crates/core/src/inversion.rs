//! Inverting the status tree.
//!
//! A status tree together with the bits each node emitted determines the
//! input uniquely ([`reconstruct`]). Replacing the logs with any other logs of
//! the same per-node lengths determines another input that yields the same
//! tree ([`flip_and_rebuild`]); that input is a permutation of the original
//! with the same last symbol, so it has the same probability under any i.i.d.
//! coin. This is the pairing behind the uniformity of the extractor output.
//!
//! Reconstruction needs the complete tree, so bundles taken from a
//! depth-limited extractor whose limit was reached are rejected.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::coin::{CoinSymbol, ExtractorSession, TraceNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Left = 0,
    Right = 1,
}

/// Root-relative address of a status-tree node.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(Vec<Branch>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn from_branches(branches: impl IntoIterator<Item = Branch>) -> Self {
        NodePath(branches.into_iter().collect())
    }

    pub fn left(&self) -> Self {
        self.child(Branch::Left)
    }

    pub fn right(&self) -> Self {
        self.child(Branch::Right)
    }

    pub fn child(&self, b: Branch) -> Self {
        let mut v = self.0.clone();
        v.push(b);
        NodePath(v)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        for b in &self.0 {
            write!(f, "{}", if *b == Branch::Left { 'L' } else { 'R' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InversionError {
    #[error("inconsistent bundle at node {path}: {reason}")]
    InconsistentBundle { path: NodePath, reason: String },
    #[error("log length mismatch at node {path}: expected {expected}, got {got}")]
    LengthMismatch {
        path: NodePath,
        expected: usize,
        got: usize,
    },
    #[error("no node at {0}")]
    UnknownNode(NodePath),
    #[error("tree was truncated at depth {0}; discarded messages cannot be recovered")]
    DepthLimited(u32),
}

/// A status-tree shape with labels and per-node bit logs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceBundle {
    pub root: TraceNode,
    pub depth_limit: Option<u32>,
}

impl TraceBundle {
    pub fn new(root: TraceNode, depth_limit: Option<u32>) -> Self {
        TraceBundle { root, depth_limit }
    }

    /// Every node's log keyed by its path.
    pub fn logs(&self) -> BTreeMap<NodePath, Vec<bool>> {
        let mut out = BTreeMap::new();
        walk(&self.root, NodePath::root(), &mut |path, node| {
            out.insert(path.clone(), node.log.clone());
        });
        out
    }

    fn max_depth(&self) -> usize {
        let mut depth = 0;
        walk(&self.root, NodePath::root(), &mut |path, _| {
            depth = depth.max(path.depth())
        });
        depth
    }
}

fn walk(node: &TraceNode, path: NodePath, f: &mut impl FnMut(&NodePath, &TraceNode)) {
    f(&path, node);
    if let Some(children) = &node.children {
        walk(&children[0], path.left(), f);
        walk(&children[1], path.right(), f);
    }
}

/// Recovers the unique input that produced `bundle`.
pub fn reconstruct(bundle: &TraceBundle) -> Result<Vec<CoinSymbol>, InversionError> {
    if let Some(d) = bundle.depth_limit {
        if bundle.max_depth() >= d as usize {
            return Err(InversionError::DepthLimited(d));
        }
    }
    rebuild(&bundle.root, &NodePath::root())
}

fn inconsistent(path: &NodePath, reason: impl Into<String>) -> InversionError {
    InversionError::InconsistentBundle {
        path: path.clone(),
        reason: reason.into(),
    }
}

fn rebuild(node: &TraceNode, path: &NodePath) -> Result<Vec<CoinSymbol>, InversionError> {
    let Some(children) = &node.children else {
        if !node.log.is_empty() || node.label.pending_bit().is_some() {
            return Err(inconsistent(path, "leaf has emitted or holds a bit"));
        }
        return Ok(node.label.held_symbol().into_iter().collect());
    };

    let left = rebuild(&children[0], &path.left())?;
    let right = rebuild(&children[1], &path.right())?;
    let mut own: Vec<bool> = node.log.clone();
    own.extend(node.label.pending_bit());

    if left.len() != own.len() + right.len() {
        return Err(inconsistent(
            path,
            format!(
                "left child received {} symbols but node has {} bits and right child {} symbols",
                left.len(),
                own.len(),
                right.len()
            ),
        ));
    }

    let mut bits = own.iter();
    let mut rights = right.iter();
    let mut input = Vec::with_capacity(2 * left.len() + 1);
    for sym in &left {
        match sym {
            CoinSymbol::H => {
                let bit = bits
                    .next()
                    .ok_or_else(|| inconsistent(path, "node bits exhausted"))?;
                if *bit {
                    input.extend([CoinSymbol::H, CoinSymbol::T]);
                } else {
                    input.extend([CoinSymbol::T, CoinSymbol::H]);
                }
            }
            CoinSymbol::T => {
                let r = rights
                    .next()
                    .ok_or_else(|| inconsistent(path, "right child symbols exhausted"))?;
                input.extend([*r, *r]);
            }
        }
    }
    if bits.next().is_some() || rights.next().is_some() {
        return Err(inconsistent(path, "node bits and right child out of step"));
    }
    input.extend(node.label.held_symbol());
    Ok(input)
}

/// Rebuilds the input whose trace has the same shape and labels as `bundle`
/// but the given logs. Nodes absent from `new_logs` keep their logs.
pub fn flip_and_rebuild(
    bundle: &TraceBundle,
    new_logs: &BTreeMap<NodePath, Vec<bool>>,
) -> Result<Vec<CoinSymbol>, InversionError> {
    let mut root = bundle.root.clone();
    for (path, log) in new_logs {
        let node = node_mut(&mut root, path).ok_or_else(|| InversionError::UnknownNode(path.clone()))?;
        if node.log.len() != log.len() {
            return Err(InversionError::LengthMismatch {
                path: path.clone(),
                expected: node.log.len(),
                got: log.len(),
            });
        }
        node.log.clone_from(log);
    }
    reconstruct(&TraceBundle::new(root, bundle.depth_limit))
}

fn node_mut<'a>(root: &'a mut TraceNode, path: &NodePath) -> Option<&'a mut TraceNode> {
    path.branches().iter().try_fold(root, |node, &b| {
        node.children.as_mut().map(|c| &mut c[b as usize])
    })
}

/// Two inputs are equivalent when they induce the same tree with the same
/// labels and every node emits the same number of bits.
pub fn equivalent(x: &[CoinSymbol], y: &[CoinSymbol]) -> bool {
    let trace = |input: &[CoinSymbol]| {
        let mut session = ExtractorSession::unlimited();
        session.feed_all(input.iter().copied());
        session.snapshot_trace().root
    };
    same_shape(&trace(x), &trace(y))
}

fn same_shape(a: &TraceNode, b: &TraceNode) -> bool {
    if a.label != b.label || a.log.len() != b.log.len() {
        return false;
    }
    match (&a.children, &b.children) {
        (None, None) => true,
        (Some(ca), Some(cb)) => same_shape(&ca[0], &cb[0]) && same_shape(&ca[1], &cb[1]),
        _ => false,
    }
}

/// Convenience: the trace of an unlimited extractor run over `input`.
pub fn trace_of(input: &[CoinSymbol]) -> TraceBundle {
    let mut session = ExtractorSession::unlimited();
    session.feed_all(input.iter().copied());
    session.snapshot_trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::parse_bits;
    use crate::coin::NodeLabel;

    fn seq(s: &str) -> Vec<CoinSymbol> {
        CoinSymbol::parse_seq(s).unwrap()
    }

    fn s(x: &[CoinSymbol]) -> String {
        CoinSymbol::seq_to_string(x)
    }

    #[test]
    fn reconstructs_worked_trace() {
        let bundle = trace_of(&seq("HTTTHT"));
        assert_eq!(s(&reconstruct(&bundle).unwrap()), "HTTTHT");
    }

    #[test]
    fn single_leaf_is_its_label() {
        let bundle = TraceBundle::new(TraceNode::leaf(NodeLabel::H), None);
        assert_eq!(s(&reconstruct(&bundle).unwrap()), "H");
        let bundle = TraceBundle::new(TraceNode::leaf(NodeLabel::Phi), None);
        assert!(reconstruct(&bundle).unwrap().is_empty());
    }

    #[test]
    fn flipping_second_level_bit() {
        let bundle = trace_of(&seq("HTTTHT"));
        let mut logs = BTreeMap::new();
        logs.insert(NodePath::root().left(), parse_bits("0").unwrap());
        assert_eq!(s(&flip_and_rebuild(&bundle, &logs).unwrap()), "TTHTHT");
    }

    #[test]
    fn identity_flip_is_original() {
        let x = seq("HTTHHTTTHTHHHT");
        let bundle = trace_of(&x);
        assert_eq!(flip_and_rebuild(&bundle, &bundle.logs()).unwrap(), x);
    }

    #[test]
    fn flip_rejects_length_change() {
        let bundle = trace_of(&seq("HTTTHT"));
        let mut logs = BTreeMap::new();
        logs.insert(NodePath::root(), parse_bits("10").unwrap());
        assert_eq!(
            flip_and_rebuild(&bundle, &logs),
            Err(InversionError::LengthMismatch { path: NodePath::root(), expected: 1, got: 2 })
        );
        let mut logs = BTreeMap::new();
        logs.insert(NodePath::root().left().left().left(), vec![]);
        assert!(matches!(flip_and_rebuild(&bundle, &logs), Err(InversionError::UnknownNode(_))));
    }

    #[test]
    fn inconsistent_lengths_are_reported_with_path() {
        let mut bundle = trace_of(&seq("HTTTHT"));
        bundle.root.log.push(true);
        match reconstruct(&bundle) {
            Err(InversionError::InconsistentBundle { path, .. }) => assert_eq!(path, NodePath::root()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_trees_are_rejected() {
        let mut session = ExtractorSession::new(Some(1));
        session.feed_all(seq("HTTTHTHH"));
        assert_eq!(reconstruct(&session.snapshot_trace()), Err(InversionError::DepthLimited(1)));
        // A limit that was never reached is harmless.
        let mut session = ExtractorSession::new(Some(5));
        session.feed_all(seq("HTTT"));
        assert_eq!(s(&reconstruct(&session.snapshot_trace()).unwrap()), "HTTT");
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&seq("HTTTHT"), &seq("TTHTHT")));
        assert!(equivalent(&seq("HTH"), &seq("HTH")));
        assert!(!equivalent(&seq("HH"), &seq("HT")));
    }

    #[test]
    fn path_display() {
        assert_eq!(NodePath::root().to_string(), "root");
        assert_eq!(NodePath::root().left().right().to_string(), "LR");
    }
}
