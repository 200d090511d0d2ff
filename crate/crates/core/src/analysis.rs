//! Expected efficiency and processing cost of depth-limited extractors.
//!
//! Both quantities follow the same split of the input stream: a node that
//! receives a stream with `P(H) = p` passes half as many symbols to its left
//! child, with `P(H) = 2pq`, and `(p² + q²)/2` as many to its right child,
//! with `P(H) = p²/(p² + q²)`. So for a per-node contribution `c(p)`
//!
//! ```text
//! f_d(p) = c(p) + ½ f_{d-1}(p² + q²) + ½ (p² + q²) f_{d-1}(p² / (p² + q²))
//! f_0(p) = c(p)
//! ```
//!
//! With `c(p) = pq` this is the rate `ρ_d(p)` of output bits per input toss;
//! with `c(p) = 1` it is the expected number of node deliveries per toss.
//! The left-child argument may be replaced by `2pq` since `f_d(p) = f_d(1-p)`.

use std::collections::HashMap;

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coin::{CoinSymbol, ExtractorSession};

/// Depth rows of the reference tables.
pub const TABLE_DEPTHS: [u32; 9] = [0, 1, 2, 3, 4, 5, 7, 10, 15];
/// Probability columns of the reference tables.
pub const TABLE_PS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("probability {0} is outside [0, 1]")]
    Domain(f64),
    #[error("simulation needs 0 < p < 1, got {0}")]
    Degenerate(f64),
    #[error("requested bit count must be positive")]
    ZeroBits,
}

fn check_p(p: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AnalysisError::Domain(p))
    }
}

/// A coin with `P(H) = p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinModel {
    p: f64,
}

impl CoinModel {
    pub fn new(p: f64) -> Result<Self, AnalysisError> {
        check_p(p)?;
        Ok(CoinModel { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> f64 {
        1.0 - self.p
    }
}

/// Binary entropy in bits, with `0·log 0 = 0`.
pub fn entropy(p: f64) -> Result<f64, AnalysisError> {
    check_p(p)?;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Deepest `d` evaluated by the exact recursion. The number of distinct
/// arguments roughly doubles per level, so deeper requests are answered from
/// a grid instead.
pub const EXACT_MAX_DEPTH: u32 = 20;

/// Grid intervals for deep evaluations. Observed absolute error is below
/// `1e-7` for `ρ` and `1e-6` for the delivery count.
const GRID_INTERVALS: usize = 1 << 14;

fn fold(p: f64) -> f64 {
    if p > 0.5 {
        1.0 - p
    } else {
        p
    }
}

fn split(p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    let same = p * p + q * q;
    (same, p * p / same)
}

struct SplitRecursion<F> {
    contribution: F,
    memo: HashMap<(u64, u32), f64>,
}

impl<F: Fn(f64) -> f64> SplitRecursion<F> {
    fn new(contribution: F) -> Self {
        SplitRecursion {
            contribution,
            memo: HashMap::new(),
        }
    }

    fn eval(&mut self, p: f64, d: u32) -> f64 {
        let p = fold(p);
        let own = (self.contribution)(p);
        if d == 0 {
            return own;
        }
        if let Some(&v) = self.memo.get(&(p.to_bits(), d)) {
            return v;
        }
        let (same, right_p) = split(p);
        let left = self.eval(same, d - 1);
        let right = self.eval(right_p, d - 1);
        let v = own + 0.5 * left + 0.5 * same * right;
        self.memo.insert((p.to_bits(), d), v);
        v
    }
}

/// `f_{d-1}` tabulated on `p = (1 - cos θ)/2` for evenly spaced `θ`, which
/// packs points near 0 where `f` is steepest, then one exact step at `p`.
fn grid_eval(contribution: impl Fn(f64) -> f64, p: f64, d: u32) -> f64 {
    let n = GRID_INTERVALS;
    let quarter = std::f64::consts::FRAC_PI_2;
    let xs: Vec<f64> = (0..=n)
        .map(|i| (1.0 - (quarter * i as f64 / n as f64).cos()) / 2.0)
        .collect();
    let interp = |f: &[f64], x: f64| {
        let t = (1.0 - 2.0 * fold(x)).clamp(0.0, 1.0).acos() / quarter * n as f64;
        let i = (t as usize).min(n - 1);
        let a = t - i as f64;
        f[i] * (1.0 - a) + f[i + 1] * a
    };
    let step = |f: &[f64], x: f64| {
        let (same, right_p) = split(x);
        contribution(x) + 0.5 * interp(f, same) + 0.5 * same * interp(f, right_p)
    };
    let mut f: Vec<f64> = xs.iter().map(|&x| contribution(x)).collect();
    for _ in 1..d {
        f = xs.iter().map(|&x| step(&f, x)).collect();
    }
    step(&f, fold(p))
}

fn split_recursion(contribution: impl Fn(f64) -> f64, p: f64, d: u32) -> f64 {
    if d <= EXACT_MAX_DEPTH {
        SplitRecursion::new(contribution).eval(p, d)
    } else {
        grid_eval(contribution, p, d)
    }
}

/// Expected output bits per input toss of the depth-`d` extractor, in the
/// limit of long inputs. Exact up to [`EXACT_MAX_DEPTH`].
pub fn rho(p: f64, d: u32) -> Result<f64, AnalysisError> {
    check_p(p)?;
    Ok(split_recursion(|p| p * (1.0 - p), p, d))
}

/// `ρ_0(p), …, ρ_max(p)` sharing one memo table.
pub fn rho_by_depth(p: f64, max_depth: u32) -> Result<Vec<f64>, AnalysisError> {
    check_p(p)?;
    let mut exact = SplitRecursion::new(|p| p * (1.0 - p));
    Ok((0..=max_depth)
        .map(|d| {
            if d <= EXACT_MAX_DEPTH {
                exact.eval(p, d)
            } else {
                grid_eval(|p| p * (1.0 - p), p, d)
            }
        })
        .collect())
}

/// Expected node deliveries per input toss of the depth-`d` extractor,
/// counting the toss itself. Lies in `[1, d + 1]`.
pub fn processing_time(p: f64, d: u32) -> Result<f64, AnalysisError> {
    check_p(p)?;
    Ok(split_recursion(|_| 1.0, p, d))
}

/// Efficiency figures for one `(p, d)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub depth: u32,
    pub p: f64,
    pub rho: f64,
    pub tosses_per_bit: f64,
    pub entropy: f64,
    /// `rho / entropy`: lower bound on tosses per bit over the actual value.
    pub efficiency_ratio: f64,
}

pub fn efficiency(p: f64, d: u32) -> Result<EfficiencyReport, AnalysisError> {
    let r = rho(p, d)?;
    let h = entropy(p)?;
    Ok(EfficiencyReport {
        depth: d,
        p,
        rho: r,
        tosses_per_bit: 1.0 / r,
        entropy: h,
        efficiency_ratio: if h > 0.0 { r / h } else { 0.0 },
    })
}

/// Which quantity a [`Table`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Expected tosses per output bit, `1/ρ_d(p)`.
    TossesPerBit,
    /// Expected node deliveries per toss.
    ProcessingTime,
    /// `ρ_d(p) / H(p)`.
    Efficiency,
}

impl Metric {
    pub fn column_name(self) -> &'static str {
        match self {
            Metric::TossesPerBit => "tosses_per_bit",
            Metric::ProcessingTime => "messages_per_symbol",
            Metric::Efficiency => "efficiency",
        }
    }

    fn eval(self, p: f64, d: u32) -> Result<f64, AnalysisError> {
        match self {
            Metric::TossesPerBit => Ok(1.0 / rho(p, d)?),
            Metric::ProcessingTime => processing_time(p, d),
            Metric::Efficiency => Ok(efficiency(p, d)?.efficiency_ratio),
        }
    }

    /// The `d → ∞` value where it is finite and known in closed form.
    fn limit(self, p: f64) -> Result<Option<f64>, AnalysisError> {
        match self {
            Metric::TossesPerBit => Ok(Some(1.0 / entropy(p)?)),
            Metric::Efficiency => Ok(Some(1.0)),
            Metric::ProcessingTime => Ok(None),
        }
    }
}

/// A depth-by-probability grid of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metric: Metric,
    pub depths: Vec<u32>,
    pub ps: Vec<f64>,
    /// `cells[i][j]` is the value at `depths[i]`, `ps[j]`.
    pub cells: Vec<Vec<f64>>,
    /// Limit row as depth grows without bound, when it exists.
    pub limit: Option<Vec<f64>>,
}

impl Table {
    pub fn build(metric: Metric, depths: &[u32], ps: &[f64]) -> Result<Self, AnalysisError> {
        let cells = depths
            .iter()
            .map(|&d| ps.iter().map(|&p| metric.eval(p, d)).collect())
            .collect::<Result<Vec<Vec<f64>>, _>>()?;
        let limit = ps
            .iter()
            .map(|&p| metric.limit(p))
            .collect::<Result<Option<Vec<f64>>, _>>()?;
        Ok(Table {
            metric,
            depths: depths.to_vec(),
            ps: ps.to_vec(),
            cells,
            limit,
        })
    }

    pub fn get(&self, depth: u32, p: f64) -> Option<f64> {
        let i = self.depths.iter().position(|&d| d == depth)?;
        let j = self.ps.iter().position(|&x| x == p)?;
        Some(self.cells[i][j])
    }

    /// Aligned text with four decimals, one row per depth.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>13}", "maximum depth");
        for p in &self.ps {
            out.push_str(&format!("  {:>9}", format!("p={p}")));
        }
        out.push('\n');
        let mut row = |label: String, values: &[f64]| {
            out.push_str(&format!("{label:>13}"));
            for v in values {
                out.push_str(&format!("  {v:>9.4}"));
            }
            out.push('\n');
        };
        for (d, values) in self.depths.iter().zip(&self.cells) {
            row(d.to_string(), values);
        }
        if let Some(limit) = &self.limit {
            row("inf".to_string(), limit);
        }
        out
    }

    /// Comma-separated `depth,p,<metric>` rows with a header; the limit row
    /// uses depth `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("depth,p,{}\n", self.metric.column_name());
        for (d, values) in self.depths.iter().zip(&self.cells) {
            for (p, v) in self.ps.iter().zip(values) {
                out.push_str(&format!("{d},{p},{v:.6}\n"));
            }
        }
        if let Some(limit) = &self.limit {
            for (p, v) in self.ps.iter().zip(limit) {
                out.push_str(&format!("inf,{p},{v:.6}\n"));
            }
        }
        out
    }
}

/// Expected tosses per bit over the reference grid, with the `1/H(p)` row.
pub fn table_i() -> Table {
    Table::build(Metric::TossesPerBit, &TABLE_DEPTHS, &TABLE_PS).expect("reference grid is valid")
}

/// Expected deliveries per toss over the reference grid.
pub fn table_ii() -> Table {
    Table::build(Metric::ProcessingTime, &TABLE_DEPTHS, &TABLE_PS).expect("reference grid is valid")
}

/// Outcome of one seeded extraction run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulation {
    pub bits: usize,
    pub symbols: u64,
    pub messages: u64,
    /// `symbols / bits`.
    pub tosses_per_bit: f64,
    /// `messages / symbols`.
    pub messages_per_symbol: f64,
}

/// The pseudorandom coin used by [`simulate_efficiency`]: ChaCha8 seeded with
/// `seed` through `SeedableRng::seed_from_u64`, one Bernoulli(`p`) draw per
/// toss with `true` as `H`.
pub fn seeded_coin(p: f64, seed: u64) -> Result<impl Iterator<Item = CoinSymbol>, AnalysisError> {
    let bernoulli = Bernoulli::new(p).map_err(|_| AnalysisError::Domain(p))?;
    let rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(bernoulli.sample_iter(rng).map(CoinSymbol::from_bit))
}

/// Runs a depth-`d` extractor (`None` for unlimited) over a seeded `p`-coin
/// until it has produced `k` bits.
pub fn simulate_efficiency(
    p: f64,
    d: Option<u32>,
    k: usize,
    seed: u64,
) -> Result<Simulation, AnalysisError> {
    check_p(p)?;
    if p == 0.0 || p == 1.0 {
        return Err(AnalysisError::Degenerate(p));
    }
    if k == 0 {
        return Err(AnalysisError::ZeroBits);
    }
    let mut session = ExtractorSession::new(d);
    let mut coin = seeded_coin(p, seed)?;
    while session.bits_emitted() < k {
        session.feed(coin.next().expect("seeded coin is infinite"));
    }
    let symbols = session.symbols_consumed();
    let messages = session.messages_processed();
    Ok(Simulation {
        bits: k,
        symbols,
        messages,
        tosses_per_bit: symbols as f64 / k as f64,
        messages_per_symbol: messages as f64 / symbols as f64,
    })
}
