//! Seeded-model property checks, runnable without trained weights.

use crate::codec::{decode_image_traced, encode_image_traced, Model};
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::image::ImageBuffer;
use crate::weights::{seeded_init_with_amplitude, SplitMix64};

/// Amplitude giving latents with non-trivial symbol statistics.
pub const SELFTEST_AMPLITUDE: f32 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Smooth gradient plus seeded noise.
pub fn random_image(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = SplitMix64::new(seed);
    let phase = rng.next_f64() * 6.0;
    let data = (0..width * height * 3)
        .map(|i| {
            let (p, c) = (i / 3, i % 3);
            let (x, y) = ((p % width) as f64, (p / width) as f64);
            let base = 128.0 + 80.0 * ((x * 0.09 + phase + c as f64).sin() * (y * 0.05).cos());
            (base + rng.uniform(30.0)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    ImageBuffer::new(width, height, data).expect("dims are positive")
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let cfg = NetworkConfig::tiny();
    let store = seeded_init_with_amplitude(&cfg, seed, SELFTEST_AMPLITUDE)?;
    let model = Model::from_store(&store)?;
    let img = random_image(100, 60, seed ^ 0x5eed);
    let enc = encode_image_traced(&img, &model, (seed % 8) as u8)?;
    let dec = decode_image_traced(&enc.container, &model, None)?;
    let mut out = Vec::new();

    out.push(check(
        "causality",
        enc.mcm.trace == dec.mcm.trace,
        format!("{} step parameter sets compared", enc.mcm.trace.len()),
    ));
    out.push(check(
        "latent roundtrip",
        enc.mcm.y_hat == dec.y_hat,
        format!("{} latent values", dec.y_hat.data().len()),
    ));
    out.push(check("coding passes", dec.mcm.passes == 9, format!("{} passes", dec.mcm.passes)));

    let again = encode_image_traced(&img, &model, (seed % 8) as u8)?;
    let redo = decode_image_traced(&again.container, &model, None)?;
    out.push(check(
        "determinism",
        again.container.to_bytes() == enc.container.to_bytes() && redo.image == dec.image,
        format!("{} container bytes", enc.container.total_bytes()),
    ));

    let mut worst: f64 = 0.0;
    let mut ok = true;
    let seg_bits = std::iter::once(enc.hyper_bits).chain(enc.mcm.estimated_bits.iter().copied());
    for (seg, est) in enc.container.segments.iter().zip(seg_bits) {
        let d = seg.len() as f64 * 8.0 - est;
        ok &= (-1.0..=256.0).contains(&d);
        worst = if d.abs() > worst.abs() { d } else { worst };
    }
    out.push(check("rate consistency", ok, format!("largest overhead {worst:.2} bits")));

    let mut prefix_ok = true;
    for k in 1..=3 {
        let p = decode_image_traced(&enc.container, &model, Some(k))?;
        let end: usize = model.slice().sizes()[..k].iter().sum();
        let lens: Vec<usize> = enc.container.segments[1..=k].iter().map(Vec::len).collect();
        prefix_ok &= p.mcm.bytes_consumed == lens
            && p.y_hat.slice_channels(0, end)? == dec.y_hat.slice_channels(0, end)?;
    }
    out.push(check("progressive prefix", prefix_ok, "k = 1, 2, 3".into()));

    out.push(check(
        "dimensions",
        (dec.image.width(), dec.image.height()) == (img.width(), img.height()),
        format!("{}x{}", dec.image.width(), dec.image.height()),
    ));
    Ok(out)
}
