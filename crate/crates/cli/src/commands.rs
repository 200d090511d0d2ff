use std::io::Write;

use randstream::analysis::{processing_time, rho, simulate_efficiency, Metric, Table};
use randstream::oracle::{verify_coin, verify_dice, verify_markov, Limits};
use randstream::ExactProb;
use serde::Serialize;

use crate::{config, AnalyzeArgs, AnalyzeMetric, BenchArgs, CliError, Mode, TableFormat, VerifyArgs};

pub fn analyze(args: &AnalyzeArgs, out: &mut impl Write) -> Result<(), CliError> {
    let metric = match args.metric {
        AnalyzeMetric::Tosses => Metric::TossesPerBit,
        AnalyzeMetric::Time => Metric::ProcessingTime,
        AnalyzeMetric::Efficiency => Metric::Efficiency,
    };
    let table = Table::build(metric, &args.depths, &args.ps).map_err(config)?;
    let text = match args.format {
        TableFormat::Text => table.to_text(),
        TableFormat::Csv => table.to_csv(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn probs(list: &str) -> Result<Vec<ExactProb>, CliError> {
    list.split(',').map(|s| s.parse().map_err(config)).collect()
}

/// Prints the report; returns whether the masses are exactly uniform.
pub fn verify(args: &VerifyArgs, out: &mut impl Write) -> Result<bool, CliError> {
    let limits = if args.force { Limits::forced() } else { Limits::default() };
    let depth = args.depth.0;
    let (n, k) = (args.n_max, args.bits);
    let report = match args.mode {
        Mode::Coin => {
            let p: ExactProb = args.p.parse().map_err(config)?;
            verify_coin(&p, depth, n, k, &limits)
        }
        Mode::Dice => {
            let dist = args.dist.as_deref().ok_or_else(|| config("dice mode needs --dist"))?;
            verify_dice(&probs(dist)?, depth, n, k, &limits)
        }
        Mode::Markov => {
            let matrix = args.matrix.as_deref().ok_or_else(|| config("markov mode needs --matrix"))?;
            let rows = matrix.split(';').map(probs).collect::<Result<Vec<_>, _>>()?;
            verify_markov(&rows, args.start, depth, n, k, &limits)
        }
        Mode::Vonneumann => return Err(config("verify supports coin, dice and markov modes")),
    }
    .map_err(config)?;
    let text = match args.format {
        TableFormat::Text => report.to_text(),
        TableFormat::Csv => report.to_csv(),
    };
    out.write_all(text.as_bytes())?;
    Ok(report.is_uniform())
}

#[derive(Serialize)]
struct Trial {
    seed: u64,
    symbols: u64,
    tosses_per_bit: f64,
    messages_per_symbol: f64,
}

#[derive(Serialize)]
struct BenchSummary {
    p: f64,
    depth: serde_json::Value,
    bits: usize,
    trials: Vec<Trial>,
    tosses_per_bit_mean: f64,
    messages_per_symbol_mean: f64,
    /// Long-run values from the recursion; null for unlimited depth.
    tosses_per_bit_expected: Option<f64>,
    messages_per_symbol_expected: Option<f64>,
}

/// Runs the trials and prints a JSON summary. Output depends only on the
/// flags, so identical invocations print identical bytes.
pub fn bench(args: &BenchArgs, out: &mut impl Write) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(config("--trials must be positive"));
    }
    let depth = args.depth.0;
    let trials = (0..args.trials)
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            simulate_efficiency(args.p, depth, args.bits, seed).map(|s| Trial {
                seed,
                symbols: s.symbols,
                tosses_per_bit: s.tosses_per_bit,
                messages_per_symbol: s.messages_per_symbol,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(config)?;
    let mean = |f: fn(&Trial) -> f64| trials.iter().map(f).sum::<f64>() / trials.len() as f64;
    let summary = BenchSummary {
        p: args.p,
        depth: depth.map_or_else(|| "unlimited".into(), Into::into),
        bits: args.bits,
        tosses_per_bit_mean: mean(|t| t.tosses_per_bit),
        messages_per_symbol_mean: mean(|t| t.messages_per_symbol),
        tosses_per_bit_expected: depth.map(|d| 1.0 / rho(args.p, d).expect("p already validated")),
        messages_per_symbol_expected: depth.map(|d| processing_time(args.p, d).expect("p already validated")),
        trials,
    };
    serde_json::to_writer_pretty(&mut *out, &summary).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}
