use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::time::Instant;

use randstream::baselines::VonNeumann;
use randstream::{
    BinarizationForest, CoinSymbol, ExtractorSession, MarkovSession, StepOutput,
};
use serde::Serialize;
use serde_json::Value;

use crate::input::{infer_alphabet, Encoding, SymbolReader};
use crate::{config, CliError, ExtractArgs, InputFormat, Mode, OutputFormat};

/// Run statistics, written as one JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub mode: &'static str,
    /// Integer limit, `"unlimited"`, or null for von Neumann.
    pub depth: Value,
    pub m: u32,
    pub input_symbols: u64,
    pub output_bits: usize,
    pub messages_processed: u64,
    /// `input_symbols / output_bits`; null when no bits were produced.
    pub tosses_per_bit_observed: Option<f64>,
    pub wall_seconds: f64,
    /// Packed output only: valid bits in the final byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bits: Option<u8>,
}

enum Engine {
    Coin(ExtractorSession),
    VonNeumann(VonNeumann),
    Dice(BinarizationForest),
    Markov(MarkovSession, Vec<u32>),
}

impl Engine {
    fn step(&mut self, symbol: u32) -> StepOutput {
        let coin = || CoinSymbol::from_bit(symbol == 1);
        let face = |forest: &BinarizationForest| forest.face(symbol).expect("reader checks the range");
        match self {
            Engine::Coin(s) => s.process_symbol(coin()),
            Engine::VonNeumann(v) => StepOutput {
                bits: v.push(coin()).into_iter().collect(),
                messages_processed: 1,
            },
            Engine::Dice(f) => {
                let face = face(f);
                f.process_face(face).expect("face matches the forest")
            }
            Engine::Markov(s, index) => s
                .process_state(index[symbol as usize])
                .expect("reader checks the range"),
        }
    }
}

/// Writes bits as `'0'`/`'1'` characters or packed bytes.
struct BitSink<'a, W: Write> {
    out: &'a mut W,
    format: OutputFormat,
    written: usize,
    byte: u8,
}

impl<W: Write> BitSink<'_, W> {
    fn push(&mut self, bit: bool) -> io::Result<()> {
        match self.format {
            OutputFormat::Ascii => self.out.write_all(if bit { b"1" } else { b"0" })?,
            OutputFormat::Packed => {
                self.byte |= u8::from(bit) << (7 - self.written % 8);
                if self.written % 8 == 7 {
                    self.out.write_all(&[self.byte])?;
                    self.byte = 0;
                }
            }
        }
        self.written += 1;
        Ok(())
    }

    /// Flushes the partial byte or the final newline; returns the number of
    /// valid bits in the last packed byte.
    fn finish(&mut self) -> io::Result<Option<u8>> {
        let tail = match self.format {
            OutputFormat::Ascii => {
                self.out.write_all(b"\n")?;
                None
            }
            OutputFormat::Packed => {
                let rem = self.written % 8;
                if rem != 0 {
                    self.out.write_all(&[self.byte])?;
                }
                Some(if rem == 0 && self.written > 0 { 8 } else { rem as u8 })
            }
        };
        self.out.flush()?;
        Ok(tail)
    }
}

fn parse_state_order(spec: &str, m: u32) -> Result<Vec<u32>, CliError> {
    let labels: Vec<u32> = spec
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| config(format!("bad state label {s:?} in --state-order"))))
        .collect::<Result<_, _>>()?;
    let mut index = vec![u32::MAX; m as usize];
    for (face, &label) in labels.iter().enumerate() {
        if label >= m || index[label as usize] != u32::MAX {
            return Err(config(format!("--state-order must list each of 0..{m} exactly once")));
        }
        index[label as usize] = face as u32;
    }
    if labels.len() != m as usize {
        return Err(config(format!("--state-order must list each of 0..{m} exactly once")));
    }
    Ok(index)
}

fn open_input(args: &ExtractArgs) -> Result<Box<dyn BufRead>, CliError> {
    match &args.input {
        Some(path) if path.as_os_str() != "-" => {
            let file = File::open(path)
                .map_err(|e| config(format!("cannot open {}: {e}", path.display())))?;
            Ok(Box::new(BufReader::new(file)))
        }
        _ => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

/// Determines the alphabet size; may read the whole input to infer it.
fn resolve_alphabet(args: &ExtractArgs, input: &mut Box<dyn BufRead>) -> Result<u32, CliError> {
    let multi = matches!(args.mode, Mode::Dice | Mode::Markov);
    match (multi, args.m) {
        (false, None | Some(2)) => Ok(2),
        (false, Some(m)) => Err(config(format!("{:?} mode has a fixed alphabet of 2, got --m {m}", args.mode))),
        (true, Some(m)) if (2..=randstream::dice::MAX_ALPHABET).contains(&m) => Ok(m),
        (true, Some(m)) => Err(config(format!(
            "--m must be in 2..={}, got {m}",
            randstream::dice::MAX_ALPHABET
        ))),
        (true, None) => {
            let from_file = args.input.as_ref().is_some_and(|p| p.as_os_str() != "-");
            if !from_file {
                return Err(config("--m is required when reading standard input"));
            }
            let mut text = Vec::new();
            input.read_to_end(&mut text)?;
            let m = infer_alphabet(&text)?;
            *input = Box::new(io::Cursor::new(text));
            Ok(m)
        }
    }
}

/// Streams the configured input through the extractor, writing bits to
/// `out` and stats where requested.
pub fn run_extract(args: &ExtractArgs, out: &mut impl Write, err: &mut impl Write) -> Result<Stats, CliError> {
    let start = Instant::now();
    if args.input_format == InputFormat::Bits && !matches!(args.mode, Mode::Coin | Mode::Vonneumann) {
        return Err(config("--input-format bits is only valid for coin and vonneumann modes"));
    }
    if args.state_order.is_some() && args.mode != Mode::Markov {
        return Err(config("--state-order is only valid in markov mode"));
    }
    let mut input = open_input(args)?;
    let m = resolve_alphabet(args, &mut input)?;
    let depth = args.depth.0;
    let mut engine = match args.mode {
        Mode::Coin => Engine::Coin(ExtractorSession::new(depth)),
        Mode::Vonneumann => Engine::VonNeumann(VonNeumann::new()),
        Mode::Dice => Engine::Dice(BinarizationForest::new(m, depth).map_err(config)?),
        Mode::Markov => {
            let index = match &args.state_order {
                Some(spec) => parse_state_order(spec, m)?,
                None => (0..m).collect(),
            };
            Engine::Markov(MarkovSession::new(m, depth).map_err(config)?, index)
        }
    };
    let encoding = match (args.input_format, args.mode) {
        (InputFormat::Bits, _) => Encoding::PackedCoin,
        (InputFormat::Text, Mode::Coin | Mode::Vonneumann) => Encoding::Coin,
        (InputFormat::Text, _) => Encoding::text(Some(m)),
    };

    let mut sink = BitSink {
        out,
        format: args.output_format,
        written: 0,
        byte: 0,
    };
    let mut symbols = 0u64;
    let mut messages = 0u64;
    let mut failure = None;
    let target = args.bits.unwrap_or(usize::MAX);
    if target > 0 {
        for symbol in SymbolReader::new(input, encoding) {
            let symbol = match symbol {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            };
            let step = engine.step(symbol);
            symbols += 1;
            messages += step.messages_processed;
            for bit in step.bits.into_iter().take(target - sink.written) {
                sink.push(bit)?;
            }
            if sink.written == target {
                break;
            }
        }
    }
    let tail_bits = sink.finish()?;
    if failure.is_none() {
        if let Some(k) = args.bits {
            if sink.written < k {
                failure = Some(CliError::Exhausted {
                    consumed: symbols,
                    produced: sink.written,
                    requested: k,
                });
            }
        }
    }

    let stats = Stats {
        mode: match args.mode {
            Mode::Coin => "coin",
            Mode::Dice => "dice",
            Mode::Markov => "markov",
            Mode::Vonneumann => "vonneumann",
        },
        depth: match (args.mode, depth) {
            (Mode::Vonneumann, _) => Value::Null,
            (_, Some(d)) => Value::from(d),
            (_, None) => Value::from("unlimited"),
        },
        m,
        input_symbols: symbols,
        output_bits: sink.written,
        messages_processed: messages,
        tosses_per_bit_observed: (sink.written > 0).then(|| symbols as f64 / sink.written as f64),
        wall_seconds: start.elapsed().as_secs_f64(),
        tail_bits,
    };
    let json = serde_json::to_string(&stats).expect("stats serialize");
    if args.stats {
        writeln!(err, "{json}")?;
    }
    if let Some(path) = &args.stats_file {
        std::fs::write(path, format!("{json}\n"))?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(stats),
    }
}
