//! `.tlic` container: a fixed 52-byte header followed by five contiguous
//! range-coded segments (hyper latents, then context-model stages 1–4).
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4  | magic `TLIC` |
//! | 4  | 1  | version (1) |
//! | 5  | 1  | flags (0) |
//! | 6  | 4  | width |
//! | 10 | 4  | height |
//! | 14 | 1  | λ index |
//! | 15 | 8  | model hash |
//! | 23 | 1  | group count (4) |
//! | 24 | 8  | group sizes, u16 × 4 |
//! | 32 | 20 | segment lengths, u32 × 5 |
//!
//! All integers are little-endian.

use std::fmt;

use crate::error::{Error, Result};
use crate::weights::Reader;

pub const MAGIC: [u8; 4] = *b"TLIC";
pub const VERSION: u8 = 1;
pub const GROUP_COUNT: usize = 4;
pub const SEGMENT_COUNT: usize = GROUP_COUNT + 1;
pub const HEADER_LEN: usize = 52;
pub const LAMBDA_LEVELS: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub flags: u8,
    pub width: u32,
    pub height: u32,
    pub lambda_index: u8,
    pub model_hash: u64,
    pub group_sizes: [u16; GROUP_COUNT],
    pub segment_lengths: [u32; SEGMENT_COUNT],
}

impl Header {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Format(format!(
                "image dims {}x{} must be positive",
                self.width, self.height
            )));
        }
        if self.lambda_index >= LAMBDA_LEVELS {
            return Err(Error::Format(format!("lambda index {} out of range", self.lambda_index)));
        }
        if self.flags != 0 {
            return Err(Error::Format(format!("unknown flags {:#04x}", self.flags)));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = self.flags;
        out[6..10].copy_from_slice(&self.width.to_le_bytes());
        out[10..14].copy_from_slice(&self.height.to_le_bytes());
        out[14] = self.lambda_index;
        out[15..23].copy_from_slice(&self.model_hash.to_le_bytes());
        out[23] = GROUP_COUNT as u8;
        for (i, g) in self.group_sizes.iter().enumerate() {
            out[24 + 2 * i..26 + 2 * i].copy_from_slice(&g.to_le_bytes());
        }
        for (i, l) in self.segment_lengths.iter().enumerate() {
            out[32 + 4 * i..36 + 4 * i].copy_from_slice(&l.to_le_bytes());
        }
        out
    }

    /// Parses and validates the header; does not look at the payload.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            if bytes.len() < 4 && MAGIC.starts_with(bytes) {
                return Err(Error::TruncatedStream(format!("{} byte stream", bytes.len())));
            }
            return Err(Error::BadMagic {
                expected: MAGIC,
                found: bytes[..bytes.len().min(4)].to_vec(),
            });
        }
        if bytes.len() < 5 {
            return Err(Error::TruncatedStream("stream ends after magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedStream(format!(
                "{} bytes, header needs {HEADER_LEN}",
                bytes.len()
            )));
        }
        let mut r = Reader::new(&bytes[5..HEADER_LEN]);
        let flags = r.u8()?;
        let width = r.u32()?;
        let height = r.u32()?;
        let lambda_index = r.u8()?;
        let model_hash = r.u64()?;
        let groups = r.u8()? as usize;
        if groups != GROUP_COUNT {
            return Err(Error::Format(format!("group count {groups}, expected {GROUP_COUNT}")));
        }
        let mut group_sizes = [0u16; GROUP_COUNT];
        for g in &mut group_sizes {
            *g = r.u16()?;
        }
        let mut segment_lengths = [0u32; SEGMENT_COUNT];
        for l in &mut segment_lengths {
            *l = r.u32()?;
        }
        let h = Header {
            flags,
            width,
            height,
            lambda_index,
            model_hash,
            group_sizes,
            segment_lengths,
        };
        h.validate()?;
        Ok(h)
    }

    /// Byte offset of segment `i` from the start of the container.
    pub fn segment_offset(&self, i: usize) -> usize {
        HEADER_LEN + self.segment_lengths[..i].iter().map(|&l| l as usize).sum::<usize>()
    }

    pub fn total_len(&self) -> usize {
        self.segment_offset(SEGMENT_COUNT)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub header: Header,
    pub segments: Vec<Vec<u8>>,
}

impl Container {
    /// Builds a container, filling `segment_lengths` from `segments`.
    pub fn new(mut header: Header, segments: Vec<Vec<u8>>) -> Result<Self> {
        if segments.len() != SEGMENT_COUNT {
            return Err(Error::Format(format!(
                "{} segments, expected {SEGMENT_COUNT}",
                segments.len()
            )));
        }
        for (l, s) in header.segment_lengths.iter_mut().zip(&segments) {
            *l = u32::try_from(s.len()).map_err(|_| Error::Format("segment exceeds 4 GiB".into()))?;
        }
        header.validate()?;
        Ok(Self { header, segments })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header.total_len());
        out.extend_from_slice(&self.header.to_bytes());
        for s in &self.segments {
            out.extend_from_slice(s);
        }
        out
    }

    pub fn hyper_segment(&self) -> &[u8] {
        &self.segments[0]
    }

    pub fn stage_segments(&self) -> Vec<&[u8]> {
        self.segments[1..].iter().map(Vec::as_slice).collect()
    }

    pub fn total_bytes(&self) -> usize {
        self.header.total_len()
    }

    pub fn bpp(&self) -> f64 {
        self.total_bytes() as f64 * 8.0 / self.header.pixels()
    }
}

impl Header {
    fn pixels(&self) -> f64 {
        self.width as f64 * self.height as f64
    }
}

pub fn write_container(header: &Header, segments: &[Vec<u8>]) -> Result<Vec<u8>> {
    Ok(Container::new(header.clone(), segments.to_vec())?.to_bytes())
}

pub fn read_container(bytes: &[u8]) -> Result<Container> {
    let header = Header::parse(bytes)?;
    if header.total_len() != bytes.len() {
        return Err(Error::TruncatedStream(format!(
            "header declares {} bytes, stream has {}",
            header.total_len(),
            bytes.len()
        )));
    }
    let segments = (0..SEGMENT_COUNT)
        .map(|i| {
            let start = header.segment_offset(i);
            bytes[start..start + header.segment_lengths[i] as usize].to_vec()
        })
        .collect();
    Ok(Container { header, segments })
}

/// Segment `i` located through the header alone.
pub fn segment_slice(bytes: &[u8], i: usize) -> Result<&[u8]> {
    let header = Header::parse(bytes)?;
    if i >= SEGMENT_COUNT {
        return Err(Error::Format(format!("no segment {i}")));
    }
    let start = header.segment_offset(i);
    let end = start + header.segment_lengths[i] as usize;
    bytes
        .get(start..end)
        .ok_or_else(|| Error::TruncatedStream(format!("segment {i} ends at {end}, stream has {}", bytes.len())))
}

pub const SEGMENT_NAMES: [&str; SEGMENT_COUNT] = ["hyper", "stage1", "stage2", "stage3", "stage4"];

#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    pub header: Header,
    pub header_bpp: f64,
    pub segment_bpp: [f64; SEGMENT_COUNT],
    pub total_bpp: f64,
}

pub fn inspect(bytes: &[u8]) -> Result<InspectReport> {
    let c = read_container(bytes)?;
    let px = c.header.pixels();
    let mut segment_bpp = [0.0; SEGMENT_COUNT];
    for (b, l) in segment_bpp.iter_mut().zip(&c.header.segment_lengths) {
        *b = *l as f64 * 8.0 / px;
    }
    Ok(InspectReport {
        header_bpp: HEADER_LEN as f64 * 8.0 / px,
        segment_bpp,
        total_bpp: c.bpp(),
        header: c.header,
    })
}

impl fmt::Display for InspectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(f, "size        {}x{}", h.width, h.height)?;
        writeln!(f, "lambda      index {}", h.lambda_index)?;
        writeln!(f, "model       {:#018x}", h.model_hash)?;
        writeln!(f, "groups      {:?}", h.group_sizes)?;
        writeln!(f, "{:<10} {:>10} {:>12}", "segment", "bytes", "bpp")?;
        writeln!(f, "{:<10} {:>10} {:>12.6}", "header", HEADER_LEN, self.header_bpp)?;
        let stage_total: f64 = self.segment_bpp[1..].iter().sum();
        for (i, name) in SEGMENT_NAMES.iter().enumerate() {
            writeln!(f, "{:<10} {:>10} {:>12.6}", name, h.segment_lengths[i], self.segment_bpp[i])?;
        }
        writeln!(f, "{:<10} {:>10} {:>12.6}", "total", h.total_len(), self.total_bpp)?;
        if stage_total > 0.0 {
            write!(f, "stage1 share of latent bpp: {:.3}", self.segment_bpp[1] / stage_total)?;
        }
        Ok(())
    }
}
