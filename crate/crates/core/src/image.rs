//! 8-bit RGB images, binary PPM I/O and tensor conversion.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Interleaved RGB samples, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("image dims {width}x{height} must be positive")));
        }
        if data.len() != 3 * width * height {
            return Err(Error::Shape(format!(
                "{} samples for a {width}x{height} RGB image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                for c in 0..3 {
                    data.push(f(x, y, c));
                }
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// `3×H×W` tensor with samples scaled to `[0, 1]`.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_fn(3, self.height, self.width, |c, y, x| {
            self.data[3 * (y * self.width + x) + c] as f32 / 255.0
        })
    }

    /// Inverse of [`to_tensor`](Self::to_tensor): `round(clamp(v, 0, 1)·255)`.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let (c, h, w) = t.shape();
        if c != 3 {
            return Err(Error::Shape(format!("image tensor needs 3 channels, got {c}")));
        }
        let img = Self::from_fn(w, h, |x, y, ch| {
            let v = t.get(ch, y, x);
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            (v * 255.0).round() as u8
        });
        if w == 0 || h == 0 {
            return Err(Error::Dimension("empty image tensor".into()));
        }
        Ok(img)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Format("truncated PPM header".into()));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
        }
        if fields[0] != "P6" {
            return Err(Error::Format(format!("not a binary PPM (magic `{}`)", fields[0])));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad PPM header field `{s}`")))
        };
        let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval != 255 {
            return Err(Error::Format(format!("PPM maxval {maxval} unsupported, need 255")));
        }
        // exactly one whitespace byte separates the header from the samples
        pos += 1;
        let n = 3 * w * h;
        let data = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::Format(format!("PPM data holds fewer than {n} samples")))?;
        Self::new(w, h, data.to_vec())
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_ppm(&std::fs::read(path)?)
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

/// Extends the borders by edge replication up to the next multiples of
/// `multiple`.
pub fn pad_replicate(t: &Tensor, multiple: usize) -> Tensor {
    let (c, h, w) = t.shape();
    let ph = h.div_ceil(multiple) * multiple;
    let pw = w.div_ceil(multiple) * multiple;
    Tensor::from_fn(c, ph, pw, |ch, y, x| t.get(ch, y.min(h - 1), x.min(w - 1)))
}

/// Top-left `height×width` window.
pub fn crop(t: &Tensor, height: usize, width: usize) -> Result<Tensor> {
    let (c, h, w) = t.shape();
    if height > h || width > w {
        return Err(Error::Shape(format!("cannot crop {h}x{w} to {height}x{width}")));
    }
    Ok(Tensor::from_fn(c, height, width, |ch, y, x| t.get(ch, y, x)))
}
