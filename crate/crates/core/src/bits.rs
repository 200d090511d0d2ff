//! Small helpers for bit sequences, which are plain `bool` slices throughout
//! the crate (`true` is 1).

/// Renders bits as a string of `'0'`/`'1'` characters.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a string of `'0'`/`'1'` characters. Returns `None` on any other
/// character.
pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Packs bits eight per byte, most significant bit first. A trailing partial
/// byte is zero-padded.
pub fn pack_msb_first(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
        })
        .collect()
}

/// Interprets `bits` (most significant first) as an unsigned integer.
pub(crate) fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
}
