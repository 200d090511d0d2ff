//! Exact uniformity check by enumeration.
//!
//! Every input sequence up to a horizon `n_max` is enumerated depth-first.
//! Along each branch the extractor runs until it first holds `k` output bits;
//! that shortest prefix is a *stopping prefix* and its probability is added to
//! the mass of its first `k` bits. Branches that reach the horizon without `k`
//! bits contribute to the incomplete mass. All arithmetic is in exact
//! rationals, so the output is uniform iff all `2^k` masses are equal.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::bits::{bits_to_index, bits_to_string};
use crate::coin::{CoinSymbol, Extractor, ExtractorSession};
use crate::dice::BinarizationForest;
use crate::markov::MarkovSession;

/// Largest `k` the oracle accepts; the report holds `2^k` masses.
pub const MAX_K: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration would visit {leaves} leaves, above the cap of {cap} (use force to override)")]
    HorizonTooLarge { leaves: u128, cap: u128 },
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("bit count must be in 1..={MAX_K}, got {0}")]
    BadBitCount(usize),
    #[error("start state {start} is outside 0..{m}")]
    BadStart { start: u32, m: u32 },
}

/// An exact probability in `[0, 1]`, kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(numer: i64, denom: i64) -> Result<Self, OracleError> {
        if denom == 0 {
            return Err(OracleError::InvalidProbability(format!("{numer}/{denom}")));
        }
        Self::from_ratio(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self, OracleError> {
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(OracleError::InvalidProbability(r.to_string()));
        }
        Ok(ExactProb(r))
    }

    pub fn zero() -> Self {
        ExactProb(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactProb(BigRational::one())
    }

    pub fn complement(&self) -> Self {
        ExactProb(BigRational::one() - &self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl FromStr for ExactProb {
    type Err = OracleError;

    /// Accepts `a/b`, an integer, or a finite decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self, OracleError> {
        let bad = || OracleError::InvalidProbability(s.to_string());
        let s = s.trim();
        let r = if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        } else if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
            BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()))
        } else {
            BigRational::from_integer(s.parse().map_err(|_| bad())?)
        };
        Self::from_ratio(r).map_err(|_| bad())
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Add for &ExactProb {
    type Output = BigRational;
    fn add(self, rhs: Self) -> BigRational {
        &self.0 + &rhs.0
    }
}

impl Mul for &ExactProb {
    type Output = ExactProb;
    fn mul(self, rhs: Self) -> ExactProb {
        ExactProb(&self.0 * &rhs.0)
    }
}

/// Enumeration caps, counted in leaves of the full input tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Coin inputs: `2^n_max`. Default allows `n_max = 14`.
    pub coin_leaves: u128,
    /// Dice inputs: `m^n_max`. Default allows `m = 3, n_max = 8`.
    pub dice_leaves: u128,
    /// Markov paths from a fixed start: `m^(n_max - 1)`. Default allows a
    /// two-state chain with paths of length 10.
    pub markov_leaves: u128,
    /// Ignore the caps.
    pub force: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            coin_leaves: 1 << 14,
            dice_leaves: 3u128.pow(8),
            markov_leaves: 1 << 9,
            force: false,
        }
    }
}

impl Limits {
    pub fn forced() -> Self {
        Limits {
            force: true,
            ..Self::default()
        }
    }

    fn check(&self, leaves: u128, cap: u128) -> Result<(), OracleError> {
        if !self.force && leaves > cap {
            return Err(OracleError::HorizonTooLarge { leaves, cap });
        }
        Ok(())
    }
}

fn leaves(m: u32, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(m as u128))
}

/// Probability of each `k`-bit output prefix within the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityReport {
    pub k: usize,
    pub n_max: usize,
    /// `masses[i]` belongs to the `k`-bit word whose binary value is `i`.
    pub masses: Vec<ExactProb>,
    /// Probability of reaching the horizon with fewer than `k` bits.
    pub incomplete_mass: ExactProb,
    /// Number of distinct stopping prefixes with nonzero probability.
    pub stopping_prefixes: u64,
}

impl UniformityReport {
    fn empty(k: usize, n_max: usize) -> Self {
        UniformityReport {
            k,
            n_max,
            masses: vec![ExactProb::zero(); 1 << k],
            incomplete_mass: ExactProb::zero(),
            stopping_prefixes: 0,
        }
    }

    pub fn mass(&self, word: &[bool]) -> Option<&ExactProb> {
        (word.len() == self.k).then(|| &self.masses[bits_to_index(word)])
    }

    /// All `2^k` masses are exactly equal.
    pub fn is_uniform(&self) -> bool {
        self.masses.windows(2).all(|w| w[0] == w[1])
    }

    /// Sum of all masses and the incomplete mass; exactly one for any valid
    /// source.
    pub fn total(&self) -> BigRational {
        self.masses
            .iter()
            .fold(self.incomplete_mass.0.clone(), |acc, m| acc + &m.0)
    }

    pub fn words(&self) -> impl Iterator<Item = (String, &ExactProb)> {
        let k = self.k;
        self.masses.iter().enumerate().map(move |(i, m)| {
            let word: Vec<bool> = (0..k).rev().map(|s| (i >> s) & 1 == 1).collect();
            (bits_to_string(&word), m)
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("k = {}, n_max = {}\n", self.k, self.n_max);
        for (word, mass) in self.words() {
            out.push_str(&format!("  {word}: {mass}\n"));
        }
        out.push_str(&format!("  incomplete: {}\n", self.incomplete_mass));
        out.push_str(&format!("  stopping prefixes: {}\n", self.stopping_prefixes));
        out.push_str(if self.is_uniform() { "uniform: yes\n" } else { "uniform: no\n" });
        out
    }

    /// `output,mass` rows with exact fractions; the incomplete mass is the
    /// row labelled `incomplete`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("output,mass\n");
        for (word, mass) in self.words() {
            out.push_str(&format!("{word},{mass}\n"));
        }
        out.push_str(&format!("incomplete,{}\n", self.incomplete_mass));
        out
    }
}

/// One recorded stopping prefix and the first `k` bits it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingPrefix<S> {
    pub input: Vec<S>,
    pub bits: Vec<bool>,
}

struct Search<'a, E: Extractor, W> {
    k: usize,
    n_max: usize,
    branches: &'a W,
    report: UniformityReport,
    path: Vec<E::Symbol>,
    record: Option<Vec<StoppingPrefix<E::Symbol>>>,
}

impl<E, W> Search<'_, E, W>
where
    E: Extractor + Clone,
    W: Fn(&E) -> Vec<(E::Symbol, ExactProb)>,
{
    fn visit(&mut self, state: &E, weight: &ExactProb, depth: usize) {
        let out = state.output();
        if out.len() >= self.k {
            let word = &out[..self.k];
            let slot = &mut self.report.masses[bits_to_index(word)];
            *slot = ExactProb(&slot.0 + &weight.0);
            self.report.stopping_prefixes += 1;
            if let Some(rec) = &mut self.record {
                rec.push(StoppingPrefix {
                    input: self.path.clone(),
                    bits: word.to_vec(),
                });
            }
            return;
        }
        if depth == self.n_max {
            self.report.incomplete_mass = ExactProb(&self.report.incomplete_mass.0 + &weight.0);
            return;
        }
        for (symbol, p) in (self.branches)(state) {
            if p.is_zero() {
                continue;
            }
            let mut next = state.clone();
            if next.process(symbol).is_err() {
                continue;
            }
            self.path.push(symbol);
            self.visit(&next, &(weight * &p), depth + 1);
            self.path.pop();
        }
    }
}

fn run<E, W>(
    start: E,
    start_depth: usize,
    n_max: usize,
    k: usize,
    branches: &W,
    record: bool,
) -> (UniformityReport, Vec<StoppingPrefix<E::Symbol>>)
where
    E: Extractor + Clone,
    W: Fn(&E) -> Vec<(E::Symbol, ExactProb)>,
{
    let mut search = Search {
        k,
        n_max,
        branches,
        report: UniformityReport::empty(k, n_max),
        path: Vec::new(),
        record: record.then(Vec::new),
    };
    search.visit(&start, &ExactProb::one(), start_depth);
    (search.report, search.record.unwrap_or_default())
}

fn check_k(k: usize) -> Result<(), OracleError> {
    if (1..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(OracleError::BadBitCount(k))
    }
}

fn check_distribution(dist: &[ExactProb], what: &str) -> Result<(), OracleError> {
    let total = dist
        .iter()
        .fold(BigRational::zero(), |acc, p| acc + p.ratio());
    if !total.is_one() {
        return Err(OracleError::InvalidDistribution(format!("{what} sums to {total}")));
    }
    Ok(())
}

fn coin_branches(p: &ExactProb) -> impl Fn(&ExtractorSession) -> Vec<(CoinSymbol, ExactProb)> {
    let heads = p.clone();
    let tails = p.complement();
    move |_| vec![(CoinSymbol::H, heads.clone()), (CoinSymbol::T, tails.clone())]
}

/// Uniformity of the first `k` bits of the coin extractor with `P(H) = p`.
pub fn verify_coin(
    p: &ExactProb,
    depth: Option<u32>,
    n_max: usize,
    k: usize,
    limits: &Limits,
) -> Result<UniformityReport, OracleError> {
    check_k(k)?;
    limits.check(leaves(2, n_max), limits.coin_leaves)?;
    Ok(run(ExtractorSession::new(depth), 0, n_max, k, &coin_branches(p), false).0)
}

/// The stopping prefixes found by [`verify_coin`], in enumeration order.
pub fn coin_stopping_prefixes(
    p: &ExactProb,
    depth: Option<u32>,
    n_max: usize,
    k: usize,
    limits: &Limits,
) -> Result<Vec<StoppingPrefix<CoinSymbol>>, OracleError> {
    check_k(k)?;
    limits.check(leaves(2, n_max), limits.coin_leaves)?;
    Ok(run(ExtractorSession::new(depth), 0, n_max, k, &coin_branches(p), true).1)
}

/// Uniformity of the first `k` bits of the dice extractor for a die with face
/// probabilities `dist`.
pub fn verify_dice(
    dist: &[ExactProb],
    depth: Option<u32>,
    n_max: usize,
    k: usize,
    limits: &Limits,
) -> Result<UniformityReport, OracleError> {
    check_k(k)?;
    check_distribution(dist, "face distribution")?;
    let m = dist.len() as u32;
    let forest = BinarizationForest::new(m, depth)
        .map_err(|e| OracleError::InvalidDistribution(e.to_string()))?;
    limits.check(leaves(m, n_max), limits.dice_leaves)?;
    let faces: Vec<(u32, ExactProb)> = dist.iter().cloned().enumerate().map(|(i, p)| (i as u32, p)).collect();
    let branches = move |_: &BinarizationForest| faces.clone();
    Ok(run(forest, 0, n_max, k, &branches, false).0)
}

/// Uniformity of the first `k` bits of the Markov extractor over paths of
/// length `n_max` (including `start`) of the chain with transition matrix
/// `matrix`.
pub fn verify_markov(
    matrix: &[Vec<ExactProb>],
    start: u32,
    depth: Option<u32>,
    n_max: usize,
    k: usize,
    limits: &Limits,
) -> Result<UniformityReport, OracleError> {
    check_k(k)?;
    let m = matrix.len() as u32;
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != matrix.len() {
            return Err(OracleError::InvalidDistribution(format!(
                "row {i} has {} entries, expected {m}",
                row.len()
            )));
        }
        check_distribution(row, &format!("row {i}"))?;
    }
    if start >= m {
        return Err(OracleError::BadStart { start, m });
    }
    let mut session =
        MarkovSession::new(m, depth).map_err(|e| OracleError::InvalidDistribution(e.to_string()))?;
    limits.check(leaves(m, n_max.saturating_sub(1)), limits.markov_leaves)?;
    if n_max == 0 {
        let mut report = UniformityReport::empty(k, 0);
        report.incomplete_mass = ExactProb::one();
        return Ok(report);
    }
    session
        .process_state(start)
        .expect("start state is in range");
    let rows: Vec<Vec<(u32, ExactProb)>> = matrix
        .iter()
        .map(|row| row.iter().cloned().enumerate().map(|(j, p)| (j as u32, p)).collect())
        .collect();
    let branches = move |s: &MarkovSession| rows[s.prev().expect("start already read") as usize].clone();
    Ok(run(session, 1, n_max, k, &branches, false).0)
}
