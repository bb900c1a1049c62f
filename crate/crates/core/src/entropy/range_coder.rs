//! Byte-oriented range coder with 32-bit range and 16-bit frequencies.
//!
//! The encoder keeps a 33-bit `low`; a carry out of bit 32 is resolved
//! through one cached byte plus a run of pending `0xFF` bytes. `finish`
//! emits five bytes, so an empty stream is five bytes long. The decoder
//! consumes exactly the bytes the encoder produced.

use super::gaussian::{CdfTable, CDF_TOTAL};
use super::CDF_PRECISION;
use crate::error::{Error, Result};

const TOP: u32 = 1 << 24;

#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xff00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut temp = self.cache;
            loop {
                self.out.push(temp.wrapping_add(carry));
                temp = 0xff;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00ff_ffff) << 8;
    }

    /// Narrows the interval to `[cum, cum + freq)` out of `2^16`.
    pub fn encode_range(&mut self, cum: u32, freq: u32) {
        debug_assert!(freq > 0 && cum + freq <= CDF_TOTAL);
        let r = self.range >> CDF_PRECISION;
        self.low += r as u64 * cum as u64;
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    pub fn encode(&mut self, value: i32, table: &CdfTable) -> Result<()> {
        let i = table.index_of(value).ok_or_else(|| {
            Error::Shape(format!(
                "symbol {value} outside table alphabet [{}, {}]",
                table.offset(),
                table.value_of(table.symbol_count() - 1)
            ))
        })?;
        let (cum, freq) = table.range(i);
        self.encode_range(cum, freq);
        Ok(())
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    code: u32,
    range: u32,
    input: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(input: &'a [u8]) -> Result<Self> {
        if input.len() < 5 {
            return Err(Error::Decode(format!(
                "range-coded segment of {} bytes is shorter than the 5-byte minimum",
                input.len()
            )));
        }
        let mut code = 0u32;
        for &b in &input[..5] {
            code = (code << 8) | b as u32;
        }
        Ok(Self {
            code,
            range: u32::MAX,
            input,
            pos: 5,
        })
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = *self
            .input
            .get(self.pos)
            .ok_or_else(|| Error::Decode(format!("segment exhausted after {} bytes", self.pos)))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn decode(&mut self, table: &CdfTable) -> Result<i32> {
        let r = self.range >> CDF_PRECISION;
        let target = self.code / r;
        if target >= CDF_TOTAL {
            return Err(Error::Decode("corrupt segment: code outside interval".into()));
        }
        let i = table.find(target);
        let (cum, freq) = table.range(i);
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < TOP {
            self.code = (self.code << 8) | self.next_byte()? as u32;
            self.range <<= 8;
        }
        Ok(table.value_of(i))
    }

    pub fn bytes_consumed(&self) -> usize {
        self.pos
    }

    /// Fails unless every byte of the segment was consumed.
    pub fn finish(self) -> Result<()> {
        if self.pos != self.input.len() {
            return Err(Error::Decode(format!(
                "segment has {} trailing bytes",
                self.input.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Codes `symbols[i]` under `tables[i]`.
pub fn encode_stream(symbols: &[i32], tables: &[&CdfTable]) -> Result<Vec<u8>> {
    if symbols.len() != tables.len() {
        return Err(Error::Shape(format!(
            "{} symbols but {} tables",
            symbols.len(),
            tables.len()
        )));
    }
    let mut enc = RangeEncoder::new();
    for (&s, t) in symbols.iter().zip(tables) {
        enc.encode(s, t)?;
    }
    Ok(enc.finish())
}

pub fn decode_next(dec: &mut RangeDecoder<'_>, table: &CdfTable) -> Result<i32> {
    dec.decode(table)
}

/// Decodes one symbol per table and checks the segment is fully consumed.
pub fn decode_stream(bytes: &[u8], tables: &[&CdfTable]) -> Result<Vec<i32>> {
    let mut dec = RangeDecoder::new(bytes)?;
    let out = tables
        .iter()
        .map(|t| dec.decode(t))
        .collect::<Result<Vec<_>>>()?;
    dec.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::gaussian::ScaleTable;
    use crate::weights::SplitMix64;
    use proptest::prelude::*;

    fn uniform8() -> CdfTable {
        CdfTable::from_frequencies(&[8192; 8], 0).unwrap()
    }

    #[test]
    fn empty_stream() {
        let bytes = encode_stream(&[], &[]).unwrap();
        assert!(bytes.len() <= 8);
        assert_eq!(decode_stream(&bytes, &[]).unwrap(), Vec::<i32>::new());
    }

    #[test]
    fn uniform_eight_symbols_size() {
        let t = uniform8();
        let mut rng = SplitMix64::new(17);
        let syms: Vec<i32> = (0..10_000).map(|_| (rng.next_u64() % 8) as i32).collect();
        let tables = vec![&t; syms.len()];
        let bytes = encode_stream(&syms, &tables).unwrap();
        assert!((3750..=3790).contains(&bytes.len()), "{}", bytes.len());
        assert_eq!(decode_stream(&bytes, &tables).unwrap(), syms);
    }

    #[test]
    fn carries_propagate() {
        // many high-end symbols force low over 2^32 repeatedly
        let t = CdfTable::from_frequencies(&[1, 65535], 0).unwrap();
        let u = CdfTable::from_frequencies(&[65535, 1], 0).unwrap();
        let mut syms = Vec::new();
        let mut tables = Vec::new();
        for i in 0..5000 {
            syms.push(if i % 3 == 0 { 0 } else { 1 });
            tables.push(if i % 7 == 0 { &u } else { &t });
        }
        let bytes = encode_stream(&syms, &tables).unwrap();
        assert_eq!(decode_stream(&bytes, &tables).unwrap(), syms);
    }

    #[test]
    fn truncation_and_corruption_are_errors() {
        let st = ScaleTable::shared();
        let mut rng = SplitMix64::new(5);
        let tables: Vec<&CdfTable> = (0..2000).map(|i| st.table(i % 40)).collect();
        let syms: Vec<i32> = (0..2000).map(|_| (rng.next_u64() % 5) as i32 - 2).collect();
        let bytes = encode_stream(&syms, &tables).unwrap();
        assert!(decode_stream(&bytes[..bytes.len() / 2], &tables).is_err());
        assert!(decode_stream(&bytes[..3], &tables).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode_stream(&longer, &tables).is_err());
    }

    #[test]
    fn out_of_alphabet_symbol_rejected() {
        let t = uniform8();
        assert!(encode_stream(&[8], &[&t]).is_err());
        assert!(encode_stream(&[1, 2], &[&t]).is_err());
    }

    fn arb_table() -> impl Strategy<Value = CdfTable> {
        prop::collection::vec(1u32..5000, 1..40).prop_map(|raw| {
            let total: u64 = raw.iter().map(|&f| f as u64).sum();
            let mut f: Vec<u32> = raw
                .iter()
                .map(|&x| ((x as u64 * 60000) / total).max(1) as u32)
                .collect();
            let s: u32 = f.iter().sum();
            f[0] += 65536 - s;
            CdfTable::from_frequencies(&f, -3).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn roundtrip(cases in prop::collection::vec((arb_table(), any::<u32>()), 0..300)) {
            let syms: Vec<i32> = cases
                .iter()
                .map(|(t, r)| t.value_of(*r as usize % t.symbol_count()))
                .collect();
            let tables: Vec<&CdfTable> = cases.iter().map(|(t, _)| t).collect();
            let bytes = encode_stream(&syms, &tables).unwrap();
            prop_assert_eq!(decode_stream(&bytes, &tables).unwrap(), syms);
        }
    }
}
