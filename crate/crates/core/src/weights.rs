//! Weight files (`.tlwt`) and deterministic seeded initialization.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "TLWT" | version u8 | profile_len u32 | profile bytes (UTF-8)
//! | tensor_count u32
//! | per tensor: name_len u16 | name | ndim u8 | dims u32[ndim] | f32[prod(dims)]
//! | crc32 u32   (IEEE, over every preceding byte)
//! ```

use indexmap::IndexMap;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::ops::{ConvKernel, Linear};

pub const WEIGHTS_MAGIC: [u8; 4] = *b"TLWT";
pub const WEIGHTS_VERSION: u8 = 1;

/// Half-width of the uniform distribution used by [`seeded_init`], before
/// the `1/√fan_in` scaling.
pub const SEED_AMPLITUDE: f32 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct StoredTensor {
    pub dims: Vec<u32>,
    pub data: Vec<f32>,
}

impl StoredTensor {
    pub fn new(dims: Vec<u32>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().map(|&d| d as usize).product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightStore {
    profile: String,
    tensors: IndexMap<String, StoredTensor>,
}

impl WeightStore {
    pub fn new(profile: impl Into<String>) -> Self {
        Self {
            profile: profile.into(),
            tensors: IndexMap::new(),
        }
    }

    pub fn profile(&self) -> &str {
        &self.profile
    }

    pub fn config(&self) -> Result<NetworkConfig> {
        NetworkConfig::from_profile_text(&self.profile)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &StoredTensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.values().map(|t| t.data.len()).sum()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: StoredTensor) -> Result<()> {
        let name = name.into();
        if self.tensors.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        if let Some(bad) = tensor.data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("tensor `{name}` holds non-finite value {bad}")));
        }
        self.tensors.insert(name, tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&StoredTensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut StoredTensor> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    fn expect_dims(&self, name: &str, dims: &[usize]) -> Result<&StoredTensor> {
        let t = self.get(name)?;
        let got: Vec<usize> = t.dims.iter().map(|&d| d as usize).collect();
        if got != dims {
            return Err(Error::Shape(format!(
                "`{name}` has dims {got:?}, expected {dims:?}"
            )));
        }
        Ok(t)
    }

    pub fn vector(&self, name: &str, len: usize) -> Result<Vec<f32>> {
        Ok(self.expect_dims(name, &[len])?.data.clone())
    }

    /// `{prefix}.weight` of dims `[out, in, k, k]` and `{prefix}.bias`.
    pub fn conv(
        &self,
        prefix: &str,
        out_channels: usize,
        in_channels: usize,
        k: usize,
        stride: usize,
    ) -> Result<ConvKernel> {
        let w = self.expect_dims(&format!("{prefix}.weight"), &[out_channels, in_channels, k, k])?;
        let b = self.vector(&format!("{prefix}.bias"), out_channels)?;
        ConvKernel::new(out_channels, in_channels, k, stride, w.data.clone(), b)
    }

    /// A convolution whose widths are read from the stored tensor.
    pub fn conv_any(&self, prefix: &str, stride: usize) -> Result<ConvKernel> {
        let w = self.get(&format!("{prefix}.weight"))?;
        if w.dims.len() != 4 || w.dims[2] != w.dims[3] {
            return Err(Error::Shape(format!(
                "`{prefix}.weight` is not a square conv kernel: {:?}",
                w.dims
            )));
        }
        let (o, i, k) = (w.dims[0] as usize, w.dims[1] as usize, w.dims[2] as usize);
        self.conv(prefix, o, i, k, stride)
    }

    /// `{prefix}.weight` of dims `[out, in]` and `{prefix}.bias`.
    pub fn linear(&self, prefix: &str, out_features: usize, in_features: usize) -> Result<Linear> {
        let w = self.expect_dims(&format!("{prefix}.weight"), &[out_features, in_features])?;
        let b = self.vector(&format!("{prefix}.bias"), out_features)?;
        Linear::new(out_features, in_features, w.data.clone(), b)
    }

    fn body_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.parameter_count() * 4);
        out.extend_from_slice(&WEIGHTS_MAGIC);
        out.push(WEIGHTS_VERSION);
        out.extend_from_slice(&(self.profile.len() as u32).to_le_bytes());
        out.extend_from_slice(self.profile.as_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(t.dims.len() as u8);
            for d in &t.dims {
                out.extend_from_slice(&d.to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// CRC32 of the serialized store (everything before the trailer).
    pub fn checksum(&self) -> u32 {
        crc32fast::hash(&self.body_bytes())
    }

    /// Binds a bitstream to this exact profile and parameter set.
    pub fn model_hash(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write(self.profile.as_bytes());
        h.write(&self.checksum().to_le_bytes());
        h.finish()
    }

    pub fn save(&self) -> Vec<u8> {
        let mut out = self.body_bytes();
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != WEIGHTS_MAGIC {
            return Err(Error::BadMagic {
                expected: WEIGHTS_MAGIC,
                found: bytes[..bytes.len().min(4)].to_vec(),
            });
        }
        if bytes.len() < 5 {
            return Err(Error::TruncatedStream("weight file ends after magic".into()));
        }
        if bytes[4] != WEIGHTS_VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        if bytes.len() < 4 + 1 + 4 + 4 + 4 {
            return Err(Error::TruncatedStream("weight file too short".into()));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(trailer.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }

        let mut r = Reader::new(&body[5..]);
        let plen = r.u32()? as usize;
        let profile = String::from_utf8(r.take(plen)?.to_vec())
            .map_err(|_| Error::Format("profile text is not UTF-8".into()))?;
        let count = r.u32()? as usize;
        let mut store = WeightStore::new(profile);
        for _ in 0..count {
            let nlen = r.u16()? as usize;
            let name = String::from_utf8(r.take(nlen)?.to_vec())
                .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
            let ndim = r.u8()? as usize;
            let dims = (0..ndim).map(|_| r.u32()).collect::<Result<Vec<u32>>>()?;
            let n: usize = dims.iter().map(|&d| d as usize).product();
            let raw = r.take(n * 4)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.insert(name, StoredTensor::new(dims, data)?)?;
        }
        if !r.is_empty() {
            return Err(Error::Format(format!(
                "{} unexpected bytes after last tensor",
                r.remaining()
            )));
        }
        Ok(store)
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::TruncatedStream(format!(
                "need {n} bytes at offset {}, {} left",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.remaining() == 0
    }
}

/// 64-bit FNV-1a.
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::new();
    h.write(bytes);
    h.finish()
}

pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-a, a)`.
    pub fn uniform(&mut self, a: f64) -> f64 {
        (2.0 * self.next_f64() - 1.0) * a
    }
}

/// How a demanded parameter is initialized by [`seeded_init`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamInit {
    /// `uniform(−a, a) / √fan_in`
    Uniform { fan_in: usize },
    Zeros,
    Ones,
}

/// One parameter the networks require: canonical name, dims, init rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub dims: Vec<usize>,
    pub init: ParamInit,
}

impl ParamSpec {
    pub(crate) fn new(name: impl Into<String>, dims: Vec<usize>, init: ParamInit) -> Self {
        Self {
            name: name.into(),
            dims,
            init,
        }
    }

    pub fn numel(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Every parameter demanded by the transforms, the context model and the
/// hyper-latent model, in canonical order.
pub fn param_demands(config: &NetworkConfig) -> Result<Vec<ParamSpec>> {
    config.validate()?;
    let mut out = crate::transform::transform_demands(config);
    out.extend(crate::mcm::weights::mcm_demands(config)?);
    out.extend(crate::entropy::factorized::factorized_demands(config));
    Ok(out)
}

pub fn seeded_init(config: &NetworkConfig, seed: u64) -> Result<WeightStore> {
    seeded_init_with_amplitude(config, seed, SEED_AMPLITUDE)
}

/// [`seeded_init`] with a custom uniform half-width. Larger amplitudes give
/// latents with non-trivial symbol statistics, which the property tests use.
pub fn seeded_init_with_amplitude(
    config: &NetworkConfig,
    seed: u64,
    amplitude: f32,
) -> Result<WeightStore> {
    let mut store = WeightStore::new(config.to_profile_text());
    for spec in param_demands(config)? {
        let n = spec.numel();
        let data = match spec.init {
            ParamInit::Zeros => vec![0.0; n],
            ParamInit::Ones => vec![1.0; n],
            ParamInit::Uniform { fan_in } => {
                let mut rng = SplitMix64::new(seed ^ fnv1a64(spec.name.as_bytes()));
                let a = amplitude as f64 / (fan_in.max(1) as f64).sqrt();
                (0..n).map(|_| rng.uniform(a) as f32).collect()
            }
        };
        let dims = spec.dims.iter().map(|&d| d as u32).collect();
        store.insert(spec.name, StoredTensor::new(dims, data)?)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_store_roundtrips() {
        let s = WeightStore::new("");
        assert_eq!(WeightStore::load(&s.save()).unwrap(), s);
    }

    #[test]
    fn single_tensor_roundtrips_bitwise() {
        let mut s = WeightStore::new("main_window = 7\n");
        s.insert("a", StoredTensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap())
            .unwrap();
        let bytes = s.save();
        let back = WeightStore::load(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.save(), bytes);
    }

    #[test]
    fn flipped_byte_is_checksum_mismatch() {
        let mut s = WeightStore::new("");
        s.insert("w", StoredTensor::new(vec![2, 2], vec![0.5, -1.0, 2.0, 4.0]).unwrap())
            .unwrap();
        let mut bytes = s.save();
        let n = bytes.len();
        bytes[n - 6] ^= 0x01;
        match WeightStore::load(&bytes) {
            Err(Error::ChecksumMismatch { stored, computed }) => {
                assert_eq!(computed, crc32fast::hash(&bytes[..n - 4]));
                assert_ne!(stored, computed);
            }
            other => panic!("expected checksum mismatch, got {other:?}"),
        }
    }

    #[test]
    fn crc_matches_reference_vector() {
        // IEEE CRC32 check value
        assert_eq!(crc32fast::hash(b"123456789"), 0xcbf4_3926);
    }

    #[test]
    fn bad_magic_and_version() {
        assert!(matches!(WeightStore::load(b"NOPE\x01"), Err(Error::BadMagic { .. })));
        let mut bytes = WeightStore::new("").save();
        bytes[4] = 9;
        assert!(matches!(WeightStore::load(&bytes), Err(Error::UnsupportedVersion(9))));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut s = WeightStore::new("");
        s.insert("x", StoredTensor::new(vec![1], vec![0.0]).unwrap()).unwrap();
        assert!(matches!(
            s.insert("x", StoredTensor::new(vec![1], vec![0.0]).unwrap()),
            Err(Error::DuplicateName(_))
        ));

        // a hand-built file carrying the same name twice
        let mut body = Vec::new();
        body.extend_from_slice(b"TLWT\x01");
        body.extend_from_slice(&0u32.to_le_bytes());
        body.extend_from_slice(&2u32.to_le_bytes());
        for _ in 0..2 {
            body.extend_from_slice(&1u16.to_le_bytes());
            body.push(b'x');
            body.push(1);
            body.extend_from_slice(&1u32.to_le_bytes());
            body.extend_from_slice(&0f32.to_le_bytes());
        }
        let crc = crc32fast::hash(&body);
        body.extend_from_slice(&crc.to_le_bytes());
        assert!(matches!(WeightStore::load(&body), Err(Error::DuplicateName(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let mut s = WeightStore::new("");
        assert!(s
            .insert("x", StoredTensor::new(vec![1], vec![f32::NAN]).unwrap())
            .is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 1234567 from the published SplitMix64
        let mut r = SplitMix64::new(1234567);
        assert_eq!(r.next_u64(), 6457827717110365317);
        assert_eq!(r.next_u64(), 3203168211198807973);
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let cfg = NetworkConfig::tiny();
        let a = seeded_init(&cfg, 1).unwrap();
        let b = seeded_init(&cfg, 1).unwrap();
        let c = seeded_init(&cfg, 2).unwrap();
        assert_eq!(a.checksum(), b.checksum());
        assert_ne!(a.checksum(), c.checksum());
        assert_eq!(a.save(), b.save());
    }

    #[test]
    fn seeded_values_respect_fan_in_bound() {
        let cfg = NetworkConfig::tiny();
        let s = seeded_init(&cfg, 5).unwrap();
        let w = s.get("ga.stage1.conv.weight").unwrap();
        let bound = SEED_AMPLITUDE / (3.0f32 * 25.0).sqrt();
        assert!(w.data.iter().all(|v| v.abs() <= bound));
        assert!(s.get("ga.stage1.conv.bias").unwrap().data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn per_name_streams_are_independent() {
        // a parameter's values depend only on (seed, name)
        let tiny = seeded_init(&NetworkConfig::tiny(), 3).unwrap();
        let mut wider = NetworkConfig::tiny();
        wider.main_depths = [2, 1, 2, 1];
        let other = seeded_init(&wider, 3).unwrap();
        assert_eq!(
            tiny.get("ga.stage2.conv.weight").unwrap(),
            other.get("ga.stage2.conv.weight").unwrap()
        );
    }
}
