//! Image-level encode and decode.
//!
//! Encode: pad → `g_a` → `h_a` → code `ẑ` → `h_s` → context model → container.
//! Decode runs the same steps backwards and crops to the original size.

use std::path::Path;

use crate::bitstream::{Container, Header, GROUP_COUNT, LAMBDA_LEVELS, SEGMENT_COUNT};
use crate::config::NetworkConfig;
use crate::entropy::FactorizedModel;
use crate::error::{Error, Result};
use crate::image::{crop, pad_replicate, ImageBuffer};
use crate::mcm::{mcm_decode, mcm_encode, progressive_decode, GcpSchedule, McmDecoded, McmEncoded, McmWeights, SliceSpec};
use crate::tensor::Tensor;
use crate::transform::{TransformWeights, PAD_MULTIPLE};
use crate::weights::WeightStore;

/// Spatial reduction from the image to the main latent.
pub const LATENT_STRIDE: usize = 16;

/// Everything needed to run the codec, resolved from a weight store.
#[derive(Debug, Clone)]
pub struct Model {
    config: NetworkConfig,
    slice: SliceSpec,
    transforms: TransformWeights,
    mcm: McmWeights,
    hyper: FactorizedModel,
    model_hash: u64,
}

impl Model {
    pub fn from_store(store: &WeightStore) -> Result<Self> {
        let config = store.config()?;
        config.validate()?;
        Ok(Self {
            slice: config.slice_spec()?,
            transforms: TransformWeights::from_store(store, &config)?,
            mcm: McmWeights::from_store(store, &config)?,
            hyper: FactorizedModel::from_store(store, config.hyper_channels[1])?,
            model_hash: store.model_hash(),
            config,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_store(&WeightStore::load(&std::fs::read(path)?)?)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn slice(&self) -> &SliceSpec {
        &self.slice
    }

    pub fn transforms(&self) -> &TransformWeights {
        &self.transforms
    }

    pub fn mcm(&self) -> &McmWeights {
        &self.mcm
    }

    pub fn hyper(&self) -> &FactorizedModel {
        &self.hyper
    }

    pub fn model_hash(&self) -> u64 {
        self.model_hash
    }

    fn group_sizes(&self) -> [u16; GROUP_COUNT] {
        let mut g = [0u16; GROUP_COUNT];
        for (d, &s) in g.iter_mut().zip(self.slice.sizes()) {
            *d = s as u16;
        }
        g
    }
}

/// Intermediate tensors of one encode, kept for verification.
#[derive(Debug, Clone)]
pub struct EncodeTrace {
    pub container: Container,
    pub y: Tensor,
    pub z_hat: Tensor,
    pub psi: Tensor,
    pub mcm: McmEncoded,
    pub hyper_bits: f64,
}

pub fn encode_image(img: &ImageBuffer, model: &Model, lambda_index: u8) -> Result<Container> {
    Ok(encode_image_traced(img, model, lambda_index)?.container)
}

pub fn encode_image_traced(img: &ImageBuffer, model: &Model, lambda_index: u8) -> Result<EncodeTrace> {
    if lambda_index >= LAMBDA_LEVELS {
        return Err(Error::Config(format!("lambda index {lambda_index} not in 0..{LAMBDA_LEVELS}")));
    }
    let x = pad_replicate(&img.to_tensor(), PAD_MULTIPLE);
    let t = &model.transforms;
    let y = t.analysis_main(&x)?;
    let z = t.analysis_hyper(&y)?;
    let (hyper_seg, z_hat) = model.hyper.encode(&z)?;
    let hyper_bits = model.hyper.estimate_bits(&z_hat)?;
    let psi = t.synthesis_hyper(&z_hat)?;
    let sched = GcpSchedule::new(y.height(), y.width())?;
    let coded = mcm_encode(&y, &psi, &model.slice, &sched, &model.mcm)?;

    let mut segments = Vec::with_capacity(SEGMENT_COUNT);
    segments.push(hyper_seg);
    segments.extend(coded.segments.iter().cloned());
    let header = Header {
        flags: 0,
        width: img.width() as u32,
        height: img.height() as u32,
        lambda_index,
        model_hash: model.model_hash,
        group_sizes: model.group_sizes(),
        segment_lengths: [0; SEGMENT_COUNT],
    };
    Ok(EncodeTrace {
        container: Container::new(header, segments)?,
        y,
        z_hat,
        psi,
        mcm: coded,
        hyper_bits,
    })
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub image: ImageBuffer,
    pub y_hat: Tensor,
    pub mcm: McmDecoded,
}

pub fn decode_image(container: &Container, model: &Model) -> Result<ImageBuffer> {
    Ok(decode_image_traced(container, model, None)?.image)
}

/// Decodes with only the first `stages` context-model segments when given.
pub fn decode_image_traced(container: &Container, model: &Model, stages: Option<usize>) -> Result<DecodeOutput> {
    let h = &container.header;
    if h.model_hash != model.model_hash {
        return Err(Error::ModelMismatch {
            stream: h.model_hash,
            weights: model.model_hash,
        });
    }
    if h.group_sizes != model.group_sizes() {
        return Err(Error::Format(format!(
            "stream groups {:?} differ from model groups {:?}",
            h.group_sizes,
            model.slice.sizes()
        )));
    }
    let (width, height) = (h.width as usize, h.height as usize);
    let ph = height.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE;
    let pw = width.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE;
    let (lh, lw) = (ph / LATENT_STRIDE, pw / LATENT_STRIDE);

    let z_hat = model.hyper.decode(container.hyper_segment(), ph / PAD_MULTIPLE, pw / PAD_MULTIPLE)?;
    let psi = model.transforms.synthesis_hyper(&z_hat)?;
    let sched = GcpSchedule::new(lh, lw)?;
    let segs = container.stage_segments();
    let decoded = match stages {
        None => mcm_decode(&segs, &psi, &model.slice, &sched, &model.mcm)?,
        Some(k) if (1..=GROUP_COUNT).contains(&k) => {
            progressive_decode(&segs[..k], &psi, &model.slice, &sched, &model.mcm)?
        }
        Some(k) => {
            return Err(Error::Config(format!("stage count {k} not in 1..={GROUP_COUNT}")));
        }
    };
    let x_hat = model.transforms.synthesis_main(&decoded.y_hat)?;
    let image = ImageBuffer::from_tensor(&crop(&x_hat, height, width)?)?;
    Ok(DecodeOutput {
        image,
        y_hat: decoded.y_hat.clone(),
        mcm: decoded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::seeded_init_with_amplitude;

    fn model(seed: u64) -> Model {
        let store = seeded_init_with_amplitude(&NetworkConfig::tiny(), seed, 1.0).unwrap();
        Model::from_store(&store).unwrap()
    }

    fn image(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, |x, y, c| ((x * 13 + y * 7 + c * 50) % 256) as u8)
    }

    #[test]
    fn pipeline_roundtrip_with_odd_size() {
        let m = model(1);
        let img = image(100, 60);
        let t = encode_image_traced(&img, &m, 2).unwrap();
        assert_eq!(t.y.shape(), (20, 4, 8));
        assert_eq!((t.container.header.width, t.container.header.height), (100, 60));
        let d = decode_image_traced(&t.container, &m, None).unwrap();
        assert_eq!((d.image.width(), d.image.height()), (100, 60));
        assert_eq!(d.y_hat, t.mcm.y_hat);
        let again = encode_image(&img, &m, 2).unwrap();
        assert_eq!(again.to_bytes(), t.container.to_bytes());
    }

    #[test]
    fn model_mismatch_is_detected() {
        let img = image(64, 64);
        let c = encode_image(&img, &model(1), 0).unwrap();
        assert!(matches!(decode_image(&c, &model(2)), Err(Error::ModelMismatch { .. })));
    }

    #[test]
    fn progressive_stages_decode() {
        let m = model(3);
        let c = encode_image(&image(64, 64), &m, 5).unwrap();
        for k in 1..=4 {
            let d = decode_image_traced(&c, &m, Some(k)).unwrap();
            assert_eq!(d.mcm.decoded_groups, k);
        }
        assert!(decode_image_traced(&c, &m, Some(0)).is_err());
        assert!(encode_image(&image(64, 64), &m, 8).is_err());
    }
}
