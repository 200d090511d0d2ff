//! Symbol readers over raw input bytes.

use std::io::{self, BufRead, Bytes};

use crate::CliError;

/// How the input bytes encode symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// `H`/`T` characters, case-insensitive.
    Coin,
    /// One decimal digit per symbol. Used for alphabets of at most 10.
    Digits { m: u32 },
    /// Whitespace-separated decimal integers.
    Tokens { m: u32 },
    /// Raw bytes, eight coin symbols each, most significant bit first,
    /// 1 as `H`.
    PackedCoin,
}

impl Encoding {
    /// Text encoding for an alphabet of size `m` (`None` for a coin).
    pub fn text(m: Option<u32>) -> Self {
        match m {
            None => Encoding::Coin,
            Some(m) if m <= 10 => Encoding::Digits { m },
            Some(m) => Encoding::Tokens { m },
        }
    }
}

/// Yields symbols as `u32` (for coins, 1 is `H`). Whitespace between
/// text symbols is skipped.
pub struct SymbolReader<R: BufRead> {
    bytes: Bytes<R>,
    encoding: Encoding,
    offset: u64,
    /// Remaining bits of the current byte in packed mode, and their count.
    packed: (u8, u8),
}

impl<R: BufRead> SymbolReader<R> {
    pub fn new(reader: R, encoding: Encoding) -> Self {
        SymbolReader {
            bytes: reader.bytes(),
            encoding,
            offset: 0,
            packed: (0, 0),
        }
    }

    fn next_byte(&mut self) -> Option<io::Result<(u64, u8)>> {
        let b = self.bytes.next()?;
        let at = self.offset;
        self.offset += 1;
        Some(b.map(|b| (at, b)))
    }

    fn next_nonspace(&mut self) -> Option<io::Result<(u64, u8)>> {
        loop {
            match self.next_byte()? {
                Ok((_, b)) if b.is_ascii_whitespace() => continue,
                other => return Some(other),
            }
        }
    }

    fn bad(offset: u64, found: u8) -> CliError {
        CliError::BadSymbol {
            offset,
            found: char::from(found).escape_default().to_string(),
        }
    }

    fn read(&mut self) -> Option<Result<u32, CliError>> {
        match self.encoding {
            Encoding::PackedCoin => {
                if self.packed.1 == 0 {
                    let (_, b) = match self.next_byte()? {
                        Ok(v) => v,
                        Err(e) => return Some(Err(e.into())),
                    };
                    self.packed = (b, 8);
                }
                let (byte, left) = self.packed;
                self.packed = (byte << 1, left - 1);
                Some(Ok(u32::from(byte >> 7)))
            }
            Encoding::Coin => {
                let (at, b) = match self.next_nonspace()? {
                    Ok(v) => v,
                    Err(e) => return Some(Err(e.into())),
                };
                Some(match b {
                    b'H' | b'h' => Ok(1),
                    b'T' | b't' => Ok(0),
                    _ => Err(Self::bad(at, b)),
                })
            }
            Encoding::Digits { m } => {
                let (at, b) = match self.next_nonspace()? {
                    Ok(v) => v,
                    Err(e) => return Some(Err(e.into())),
                };
                Some(match b {
                    b'0'..=b'9' if u32::from(b - b'0') < m => Ok(u32::from(b - b'0')),
                    _ => Err(Self::bad(at, b)),
                })
            }
            Encoding::Tokens { m } => {
                let (start, first) = match self.next_nonspace()? {
                    Ok(v) => v,
                    Err(e) => return Some(Err(e.into())),
                };
                let mut token = vec![first];
                loop {
                    match self.next_byte() {
                        None => break,
                        Some(Err(e)) => return Some(Err(e.into())),
                        Some(Ok((_, b))) if b.is_ascii_whitespace() => break,
                        Some(Ok((_, b))) => token.push(b),
                    }
                }
                let value = std::str::from_utf8(&token)
                    .ok()
                    .and_then(|t| t.parse::<u32>().ok())
                    .filter(|&v| v < m);
                Some(value.ok_or_else(|| CliError::BadSymbol {
                    offset: start,
                    found: String::from_utf8_lossy(&token).into_owned(),
                }))
            }
        }
    }
}

impl<R: BufRead> Iterator for SymbolReader<R> {
    type Item = Result<u32, CliError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read()
    }
}

/// Alphabet size implied by a digit-per-symbol text: one more than the
/// largest digit, and at least 2.
pub fn infer_alphabet(text: &[u8]) -> Result<u32, CliError> {
    let mut largest = 1;
    for (i, &b) in text.iter().enumerate() {
        match b {
            b'0'..=b'9' => largest = largest.max(u32::from(b - b'0')),
            b if b.is_ascii_whitespace() => {}
            b => return Err(SymbolReader::<&[u8]>::bad(i as u64, b)),
        }
    }
    Ok(largest + 1)
}
