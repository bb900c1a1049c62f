//! Rate-distortion metrics.

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Trade-off weights of the eight quality levels, lowest rate first.
pub const LAMBDAS: [f64; 8] = [0.0018, 0.0035, 0.0067, 0.013, 0.025, 0.0483, 0.0932, 0.18];

pub fn lambda_for_index(index: usize) -> Result<f64> {
    LAMBDAS
        .get(index)
        .copied()
        .ok_or_else(|| Error::Config(format!("lambda index {index} not in 0..{}", LAMBDAS.len())))
}

fn check_dims(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::Shape(format!(
            "image dims differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Mean squared error over all RGB samples, in 8-bit units.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// `10·log10(255²/MSE)` over pooled RGB samples; `+∞` for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / m).log10())
}

pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
/// Smallest side for which the coarsest scale still fits one window.
pub const MS_SSIM_MIN_SIZE: usize = WINDOW << (MS_SSIM_WEIGHTS.len() - 1);

fn gaussian_window() -> [f64; WINDOW] {
    let mut g = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.map(|v| v / s)
}

struct Plane {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Plane {
    /// Separable Gaussian filter, valid region only.
    fn filter(&self, g: &[f64; WINDOW]) -> Plane {
        let ow = self.w - WINDOW + 1;
        let oh = self.h - WINDOW + 1;
        let mut tmp = vec![0.0; ow * self.h];
        for y in 0..self.h {
            let row = &self.v[y * self.w..(y + 1) * self.w];
            for x in 0..ow {
                tmp[y * ow + x] = g.iter().zip(&row[x..x + WINDOW]).map(|(a, b)| a * b).sum();
            }
        }
        let mut v = vec![0.0; ow * oh];
        for y in 0..oh {
            for x in 0..ow {
                v[y * ow + x] = (0..WINDOW).map(|k| g[k] * tmp[(y + k) * ow + x]).sum();
            }
        }
        Plane { w: ow, h: oh, v }
    }

    fn mul(&self, o: &Plane) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            v: self.v.iter().zip(&o.v).map(|(a, b)| a * b).collect(),
        }
    }

    /// 2×2 average pooling.
    fn downsample(&self) -> Plane {
        let (w, h) = (self.w / 2, self.h / 2);
        let mut v = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let i = 2 * y * self.w + 2 * x;
                v.push((self.v[i] + self.v[i + 1] + self.v[i + self.w] + self.v[i + self.w + 1]) / 4.0);
            }
        }
        Plane { w, h, v }
    }
}

/// Mean luminance term and mean contrast-structure term at one scale.
fn ssim_terms(a: &Plane, b: &Plane, g: &[f64; WINDOW]) -> (f64, f64) {
    let c1 = (K1 * 255.0) * (K1 * 255.0);
    let c2 = (K2 * 255.0) * (K2 * 255.0);
    let mu_a = a.filter(g);
    let mu_b = b.filter(g);
    let aa = a.mul(a).filter(g);
    let bb = b.mul(b).filter(g);
    let ab = a.mul(b).filter(g);
    let n = mu_a.v.len() as f64;
    let (mut l_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..mu_a.v.len() {
        let (ma, mb) = (mu_a.v[i], mu_b.v[i]);
        let va = aa.v[i] - ma * ma;
        let vb = bb.v[i] - mb * mb;
        let cov = ab.v[i] - ma * mb;
        l_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        cs_sum += (2.0 * cov + c2) / (va + vb + c2);
    }
    (l_sum / n, cs_sum / n)
}

/// Five-scale structural similarity, averaged over the RGB channels.
pub fn ms_ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check_dims(a, b)?;
    if a.width() < MS_SSIM_MIN_SIZE || a.height() < MS_SSIM_MIN_SIZE {
        return Err(Error::MinSize {
            width: a.width(),
            height: a.height(),
            min: MS_SSIM_MIN_SIZE,
        });
    }
    let g = gaussian_window();
    let plane = |img: &ImageBuffer, c: usize| Plane {
        w: img.width(),
        h: img.height(),
        v: img.data().iter().skip(c).step_by(3).map(|&s| s as f64).collect(),
    };
    let mut total = 0.0;
    for c in 0..3 {
        let (mut pa, mut pb) = (plane(a, c), plane(b, c));
        let mut value = 1.0;
        for (s, &wt) in MS_SSIM_WEIGHTS.iter().enumerate() {
            let (l, cs) = ssim_terms(&pa, &pb, &g);
            value *= cs.max(0.0).powf(wt);
            if s + 1 == MS_SSIM_WEIGHTS.len() {
                value *= l.max(0.0).powf(wt);
            } else {
                pa = pa.downsample();
                pb = pb.downsample();
            }
        }
        total += value;
    }
    Ok(total / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdReport {
    pub bpp: f64,
    pub psnr: f64,
    /// Only available for images of at least [`MS_SSIM_MIN_SIZE`] per side.
    pub ms_ssim: Option<f64>,
    /// Mean squared error with samples scaled to `[0, 1]`.
    pub mse: f64,
}

impl RdReport {
    pub fn new(reference: &ImageBuffer, test: &ImageBuffer, total_bytes: usize) -> Result<Self> {
        let m = mse(reference, test)?;
        let ms = match ms_ssim(reference, test) {
            Ok(v) => Some(v),
            Err(Error::MinSize { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            bpp: total_bytes as f64 * 8.0 / (reference.width() * reference.height()) as f64,
            psnr: psnr(reference, test)?,
            ms_ssim: ms,
            mse: m / (255.0 * 255.0),
        })
    }
}

/// `bpp + λ·MSE` with MSE in the `[0, 1]` sample domain.
pub fn j_cost(report: &RdReport, lambda: f64) -> f64 {
    report.bpp + lambda * report.mse
}
