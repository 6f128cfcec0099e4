//! Watermark configuration, key sets and embedding.
//!
//! The ring channel carries a per-ring payload written into the real part
//! of masked spectrum coefficients. With `enable_lossless` the mask is
//! point-symmetric, values are constant per ring, and imaginary parts are
//! zeroed, so the spectrum stays conjugate symmetric and the real-part
//! inverse transform loses nothing. Without it the legacy path writes
//! complex values on an (optionally off-center) mask and the inverse
//! transform projects them onto their conjugate-symmetric part.
//!
//! Noise channels are replaced wholesale by the key's seeded Gaussian field.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::detect::{noise_distance, ring_distance, ring_evidence};
use crate::patterns::{
    build_ring_mask_at, capacity, sample_noise_field, treering_ring_values, MaskStyle, NoiseKey,
    RingKey, RingMask,
};
use crate::rng::{mix64, Xoshiro256StarStar};
use crate::spectral::{chessboard_sign, dft2, idft2_real, Latent, PixelMask, Plane, Spectrum};
use crate::{Error, Result};

/// Channels of a Stable-Diffusion-style latent.
pub const DEFAULT_CHANNELS: usize = 4;

/// Null latents used to estimate the channel normalizers.
pub const LAMBDA_SAMPLES: usize = 256;

/// Stream index used to derive Gaussian ring values from a key's noise seed.
const RING_VALUE_STREAM: u64 = 0x5249_4e47;

#[derive(Clone, Debug, PartialEq)]
pub struct WatermarkConfig {
    pub size: usize,
    pub ring_channel: usize,
    pub noise_channels: Vec<usize>,
    pub r_min: usize,
    pub r_max: usize,
    pub alpha: f64,
    /// Suppression factor applied to the frequency pattern.
    pub eta: f64,
    pub mask_style: MaskStyle,
    pub enable_shift: bool,
    pub enable_lossless: bool,
    pub enable_discretize: bool,
    /// Center the mask at `(N/2 − 1, N/2)` like the original tree-ring code.
    pub baseline_center_offset: bool,
}

impl Default for WatermarkConfig {
    fn default() -> Self {
        Self {
            size: 64,
            ring_channel: 3,
            noise_channels: alloc::vec![0],
            r_min: 3,
            r_max: 14,
            alpha: 64.0,
            eta: 0.85,
            mask_style: MaskStyle::Rounder,
            enable_shift: true,
            enable_lossless: true,
            enable_discretize: true,
            baseline_center_offset: false,
        }
    }
}

impl WatermarkConfig {
    /// Lossy single-channel tree-ring watermark: Gaussian complex ring values
    /// on naive rings of radius 0..10 about `(31, 32)`, channel 3.
    pub fn tree_ring_baseline() -> Self {
        Self {
            noise_channels: Vec::new(),
            r_min: 0,
            r_max: 10,
            eta: 1.0,
            mask_style: MaskStyle::Naive,
            enable_shift: false,
            enable_lossless: false,
            enable_discretize: false,
            baseline_center_offset: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size % 2 != 0 {
            return Err(Error::Config(format!("size {} must be even", self.size)));
        }
        if self.r_min >= self.r_max || self.r_max + 1 > self.size / 2 {
            return Err(Error::InvalidRadii { r_min: self.r_min, r_max: self.r_max, size: self.size });
        }
        if self.noise_channels.contains(&self.ring_channel) {
            return Err(Error::Config(format!(
                "ring channel {} is also a noise channel",
                self.ring_channel
            )));
        }
        let mut seen = self.noise_channels.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.noise_channels.len() {
            return Err(Error::Config("duplicate noise channel".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("eta {} outside (0, 1]", self.eta)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha {} must be positive", self.alpha)));
        }
        if self.enable_lossless && self.baseline_center_offset {
            return Err(Error::Config(
                "lossless imprinting needs the mask centered on the Fourier center".into(),
            ));
        }
        Ok(())
    }

    pub fn rings(&self) -> usize {
        self.r_max - self.r_min
    }

    /// `2^|R|` distinct ring keys.
    pub fn capacity(&self) -> u64 {
        capacity(self.rings())
    }

    pub fn ring_mask(&self) -> Result<RingMask> {
        build_ring_mask_at(self.r_min, self.r_max, self.size, self.mask_style, self.baseline_center_offset)
    }

    /// Ring channel followed by the noise channels in configured order.
    pub fn watermarked_channels(&self) -> Vec<usize> {
        let mut c = alloc::vec![self.ring_channel];
        c.extend_from_slice(&self.noise_channels);
        c
    }

    fn check_latent(&self, latent: &Latent) -> Result<()> {
        if latent.size() != self.size {
            return Err(Error::Dimension(format!(
                "latent size {} does not match configured size {}",
                latent.size(),
                self.size
            )));
        }
        let max = self.watermarked_channels().into_iter().max().unwrap_or(0);
        if max >= latent.channels() {
            return Err(Error::Dimension(format!(
                "channel {max} missing from a {}-channel latent",
                latent.channels()
            )));
        }
        Ok(())
    }
}

/// The two heterogeneous payloads assigned to one user.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyPair {
    pub ring: RingKey,
    pub noise: NoiseKey,
}

impl KeyPair {
    pub fn key_index(&self) -> u64 {
        self.ring.key_index
    }
}

/// Per-ring reference values before suppression and chessboard signs.
///
/// - lossless + discretized: `±α`
/// - lossless, continuous: `N(0, α²)` per ring
/// - lossy + discretized: `±α` written into both real and imaginary parts
/// - lossy, continuous: `N_C(0, α²)` per ring (the tree-ring baseline)
///
/// Continuous values are seeded from `mix64(noise_seed, RING_VALUE_STREAM)`.
pub fn ring_reference(config: &WatermarkConfig, key: &KeyPair) -> Vec<Complex64> {
    let rings = config.rings();
    let alpha = config.alpha;
    let seed = mix64(key.noise.seed, RING_VALUE_STREAM);
    match (config.enable_lossless, config.enable_discretize) {
        (true, true) => key.ring.ring_values().into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        (true, false) => treering_ring_values(seed, rings, alpha)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
        (false, true) => key.ring.ring_values().into_iter().map(|v| Complex64::new(v, v)).collect(),
        (false, false) => {
            let sd = alpha / core::f64::consts::SQRT_2;
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            (0..rings).map(|_| Complex64::new(sd * rng.gaussian(), sd * rng.gaussian())).collect()
        }
    }
}

/// Writes one key's payload into latents; holds the prebuilt ring mask.
#[derive(Clone, Debug)]
pub struct Embedder {
    config: WatermarkConfig,
    mask: RingMask,
}

impl Embedder {
    pub fn new(config: &WatermarkConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config: config.clone(), mask: config.ring_mask()? })
    }

    pub fn config(&self) -> &WatermarkConfig {
        &self.config
    }

    pub fn mask(&self) -> &RingMask {
        &self.mask
    }

    /// Spectrum values written at each mask pixel, in mask pixel order.
    pub fn written_values(&self, key: &KeyPair) -> Vec<Complex64> {
        let reference = ring_reference(&self.config, key);
        self.mask
            .pixels()
            .iter()
            .map(|&(r, c, ring)| {
                let sign = if self.config.enable_shift { chessboard_sign(r, c) } else { 1.0 };
                let v = reference[ring] * (self.config.eta * sign);
                if self.config.enable_lossless {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn imprint(&self, latent: &Latent, key: &KeyPair) -> Result<Latent> {
        self.config.check_latent(latent)?;
        let mut out = latent.clone();
        let mut spec = dft2(latent.plane(self.config.ring_channel))?;
        for (&(r, c, _), v) in self.mask.pixels().iter().zip(self.written_values(key)) {
            spec.set(r, c, v);
        }
        out.set_plane(self.config.ring_channel, idft2_real(&spec))?;
        for &ch in &self.config.noise_channels {
            out.set_plane(ch, sample_noise_field(&key.noise, ch, self.config.size))?;
        }
        Ok(out)
    }
}

/// Embeds `key` into `latent` under `config`.
pub fn imprint(latent: &Latent, key: &KeyPair, config: &WatermarkConfig) -> Result<Latent> {
    Embedder::new(config)?.imprint(latent, key)
}

/// Writes fresh i.i.d. `N_C(0, N²)` coefficients into the masked region of
/// one channel, without symmetrization, then keeps the real spatial part.
pub fn imprint_iid_noise(latent: &Latent, channel: usize, mask: &PixelMask, seed: u64) -> Result<Latent> {
    if channel >= latent.channels() {
        return Err(Error::Dimension(format!("channel {channel} out of range")));
    }
    if mask.size() != latent.size() {
        return Err(Error::Dimension("mask and latent sizes differ".into()));
    }
    let n = latent.size();
    let sd = n as f64 / core::f64::consts::SQRT_2;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut spec: Spectrum = dft2(latent.plane(channel))?;
    for (r, c) in mask.iter() {
        spec.set(r, c, Complex64::new(sd * rng.gaussian(), sd * rng.gaussian()));
    }
    let mut out = latent.clone();
    out.set_plane(channel, idft2_real(&spec))?;
    Ok(out)
}

/// Distributed keys sharing one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySet {
    pub config: WatermarkConfig,
    pub keys: Vec<KeyPair>,
    /// `(channel, λ_c)` for every watermarked channel.
    pub lambda: Vec<(usize, f64)>,
    pub build_seed: u64,
}

impl KeySet {
    /// Assembles a key set, checking its invariants.
    pub fn new(
        config: WatermarkConfig,
        keys: Vec<KeyPair>,
        lambda: Vec<(usize, f64)>,
        build_seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if keys.len() as u64 > config.capacity() {
            return Err(Error::Capacity { requested: keys.len() as u64, capacity: config.capacity() });
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for k in &keys {
            if k.ring.bits.len() != config.rings() {
                return Err(Error::LengthMismatch { expected: config.rings(), got: k.ring.bits.len() });
            }
            if !seen.insert(k.key_index()) {
                return Err(Error::Config(format!("duplicate key index {}", k.key_index())));
            }
        }
        let channels = config.watermarked_channels();
        if lambda.len() != channels.len() || lambda.iter().any(|(c, _)| !channels.contains(c)) {
            return Err(Error::Config("lambda must list each watermarked channel once".into()));
        }
        for ch in channels {
            match lambda.iter().find(|(c, _)| *c == ch) {
                Some((_, l)) if *l > 0.0 && l.is_finite() => {}
                Some((_, l)) => return Err(Error::Config(format!("lambda {l} for channel {ch}"))),
                None => return Err(Error::Config(format!("missing lambda for channel {ch}"))),
            }
        }
        Ok(Self { config, keys, lambda, build_seed })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key_index: u64) -> Option<&KeyPair> {
        self.keys.iter().find(|k| k.key_index() == key_index)
    }

    pub fn lambda_for(&self, channel: usize) -> f64 {
        self.lambda.iter().find(|(c, _)| *c == channel).map(|(_, l)| *l).unwrap_or(1.0)
    }
}

/// `n` distinct values from `0..cap` in sampling order (partial Fisher-Yates
/// over a virtual array).
fn sample_indices(n: usize, cap: u64, rng: &mut Xoshiro256StarStar) -> Vec<u64> {
    let mut swapped: BTreeMap<u64, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let j = i + rng.below(cap - i);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, vi);
        out.push(vj);
    }
    out
}

/// Draws `n_keys` distinct ring keys, assigns each a noise seed, and
/// estimates `λ_c = 1/μ_c` from [`LAMBDA_SAMPLES`] null planes.
///
/// Streams: key indices `mix64(seed, 0)`, noise seeds `mix64(seed, 1)`,
/// null planes `mix64(mix64(seed, 2), s·64 + channel)`.
pub fn build_keyset(n_keys: usize, config: &WatermarkConfig, seed: u64) -> Result<KeySet> {
    config.validate()?;
    let cap = config.capacity();
    if n_keys as u64 > cap {
        return Err(Error::Capacity { requested: n_keys as u64, capacity: cap });
    }
    if n_keys == 0 {
        return Err(Error::EmptyKeySet);
    }
    let mut index_rng = Xoshiro256StarStar::seed_from_u64(mix64(seed, 0));
    let mut noise_rng = Xoshiro256StarStar::seed_from_u64(mix64(seed, 1));
    let keys = sample_indices(n_keys, cap, &mut index_rng)
        .into_iter()
        .map(|idx| {
            Ok(KeyPair {
                ring: RingKey::from_index(idx, config.rings(), config.alpha)?,
                noise: NoiseKey { seed: noise_rng.next_u64(), channels: config.noise_channels.clone() },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda = estimate_lambda(config, &keys, mix64(seed, 2))?;
    KeySet::new(config.clone(), keys, lambda, seed)
}

/// Mean null distance per watermarked channel, inverted.
pub fn estimate_lambda(config: &WatermarkConfig, keys: &[KeyPair], seed: u64) -> Result<Vec<(usize, f64)>> {
    let mask = config.ring_mask()?;
    let refs: Vec<Vec<Complex64>> = keys.iter().map(|k| ring_reference(config, k)).collect();
    let channels = config.watermarked_channels();
    let mut sums = alloc::vec![0.0; channels.len()];
    for s in 0..LAMBDA_SAMPLES {
        let k = s % keys.len();
        for (slot, &ch) in channels.iter().enumerate() {
            let plane = Plane::gaussian(config.size, mix64(seed, (s * 64 + ch) as u64));
            sums[slot] += if ch == config.ring_channel {
                let ev = ring_evidence(&plane, &mask, config)?;
                ring_distance(&ev, &mask, &refs[k], config)
            } else {
                noise_distance(&plane, &sample_noise_field(&keys[k].noise, ch, config.size))
            };
        }
    }
    Ok(channels
        .into_iter()
        .zip(sums)
        .map(|(ch, s)| (ch, LAMBDA_SAMPLES as f64 / s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::conjugate_symmetric_part;

    fn key(config: &WatermarkConfig, idx: u64, seed: u64) -> KeyPair {
        KeyPair {
            ring: RingKey::from_index(idx, config.rings(), config.alpha).unwrap(),
            noise: NoiseKey { seed, channels: config.noise_channels.clone() },
        }
    }

    fn masked(spec: &Spectrum, mask: &RingMask) -> Vec<Complex64> {
        mask.pixels().iter().map(|&(r, c, _)| spec.get(r, c)).collect()
    }

    #[test]
    fn lossless_imprint_survives_roundtrip_exactly() {
        let config = WatermarkConfig::default();
        let e = Embedder::new(&config).unwrap();
        let k = key(&config, 1234, 9);
        let x = e.imprint(&Latent::gaussian(4, 64, 1), &k).unwrap();
        let got = masked(&dft2(x.plane(3)).unwrap(), e.mask());
        let want = e.written_values(&k);
        let dev = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-6 * config.alpha, "{dev}");
    }

    #[test]
    fn unsuppressed_unshifted_values_are_plus_minus_alpha() {
        let config = WatermarkConfig { eta: 1.0, enable_shift: false, ..Default::default() };
        let e = Embedder::new(&config).unwrap();
        for v in e.written_values(&key(&config, 77, 1)) {
            assert!(v.re == 64.0 || v.re == -64.0);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn lossless_output_is_fixed_point_of_real_roundtrip() {
        let config = WatermarkConfig::default();
        let x = imprint(&Latent::gaussian(4, 64, 3), &key(&config, 5, 5), &config).unwrap();
        let spec = dft2(x.plane(3)).unwrap();
        let cs = conjugate_symmetric_part(&spec);
        for (a, b) in spec.data().iter().zip(cs.data()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn payload_stays_local() {
        let config = WatermarkConfig::default();
        let e = Embedder::new(&config).unwrap();
        let host = Latent::gaussian(4, 64, 8);
        let x = e.imprint(&host, &key(&config, 99, 4)).unwrap();
        assert_eq!(x.plane(1), host.plane(1));
        assert_eq!(x.plane(2), host.plane(2));
        let before = dft2(host.plane(3)).unwrap();
        let after = dft2(x.plane(3)).unwrap();
        for r in 0..64 {
            for c in 0..64 {
                if !e.mask().union().contains(r, c) {
                    assert!((before.get(r, c) - after.get(r, c)).norm() < 1e-9);
                }
            }
        }
        assert_eq!(x.plane(0), &sample_noise_field(&key(&config, 99, 4).noise, 0, 64));
    }

    #[test]
    fn baseline_roundtrip_yields_symmetric_part_of_written_values() {
        let config = WatermarkConfig::tree_ring_baseline();
        let e = Embedder::new(&config).unwrap();
        let host = Latent::gaussian(4, 64, 2);
        let k = key(&config, 3, 12);
        let mut written = dft2(host.plane(3)).unwrap();
        for (&(r, c, _), v) in e.mask().pixels().iter().zip(e.written_values(&k)) {
            written.set(r, c, v);
        }
        let expected = conjugate_symmetric_part(&written);
        let got = dft2(e.imprint(&host, &k).unwrap().plane(3)).unwrap();
        let mut max_from_written: f64 = 0.0;
        for &(r, c, _) in e.mask().pixels() {
            assert!((got.get(r, c) - expected.get(r, c)).norm() < 1e-9);
            max_from_written = max_from_written.max((got.get(r, c) - written.get(r, c)).norm());
        }
        assert!(max_from_written > 1.0);
    }

    #[test]
    fn eta_scales_masked_magnitude_linearly() {
        let base = WatermarkConfig { eta: 1.0, ..Default::default() };
        let k = key(&base, 600, 2);
        let a = Embedder::new(&base).unwrap().written_values(&k);
        let half = WatermarkConfig { eta: 0.5, ..base.clone() };
        let b = Embedder::new(&half).unwrap().written_values(&k);
        for (x, y) in a.iter().zip(&b) {
            assert!((x * 0.5 - y).norm() < 1e-12);
        }
    }

    #[test]
    fn iid_noise_changes_with_seed() {
        let mask = WatermarkConfig::default().ring_mask().unwrap();
        let host = Latent::gaussian(4, 64, 1);
        let a = imprint_iid_noise(&host, 3, mask.union(), 1).unwrap();
        let b = imprint_iid_noise(&host, 3, mask.union(), 2).unwrap();
        assert_ne!(a.plane(3), b.plane(3));
        assert_eq!(a.plane(0), host.plane(0));
    }

    #[test]
    fn iid_noise_variance_halves_inside_mask_only() {
        // Non-symmetric half-plane mask so the written values are independent
        // of their conjugate partners.
        let n = 64;
        let mut mask = PixelMask::new(n);
        for r in 34..46 {
            for c in 16..48 {
                mask.insert(r, c);
            }
        }
        let (mut inside, mut inside_n, mut outside, mut outside_n) = (0.0, 0usize, 0.0, 0usize);
        let mut t = 0u64;
        while inside_n < 100_000 {
            let host = Latent::gaussian(1, n, mix64(100, t));
            let x = imprint_iid_noise(&host, 0, &mask, mix64(200, t)).unwrap();
            let spec = dft2(x.plane(0)).unwrap();
            for r in 1..n {
                for c in 1..n {
                    if r == n / 2 && c == n / 2 {
                        continue;
                    }
                    let e = spec.get(r, c).norm_sqr();
                    if mask.contains(r, c) {
                        inside += e;
                        inside_n += 1;
                    } else if r < 16 {
                        outside += e;
                        outside_n += 1;
                    }
                }
            }
            t += 1;
        }
        let nn = (n * n) as f64;
        let vin = inside / inside_n as f64;
        let vout = outside / outside_n as f64;
        assert!((vin / (nn / 2.0) - 1.0).abs() < 0.05, "{vin}");
        assert!((vout / nn - 1.0).abs() < 0.05, "{vout}");
    }

    #[test]
    fn config_validation() {
        let mut c = WatermarkConfig::default();
        c.noise_channels = alloc::vec![3];
        assert!(c.validate().is_err());
        let c = WatermarkConfig { eta: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = WatermarkConfig { eta: 1.2, ..Default::default() };
        assert!(c.validate().is_err());
        let c = WatermarkConfig { baseline_center_offset: true, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(WatermarkConfig::tree_ring_baseline().validate().is_ok());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let config = WatermarkConfig::default();
        let k = key(&config, 0, 0);
        assert!(matches!(imprint(&Latent::gaussian(4, 32, 0), &k, &config), Err(Error::Dimension(_))));
        assert!(matches!(imprint(&Latent::gaussian(3, 64, 0), &k, &config), Err(Error::Dimension(_))));
    }

    #[test]
    fn full_capacity_keyset_holds_every_index() {
        let config = WatermarkConfig { r_min: 3, r_max: 8, ..Default::default() };
        let ks = build_keyset(32, &config, 4).unwrap();
        let mut idx: Vec<u64> = ks.keys.iter().map(|k| k.key_index()).collect();
        idx.sort_unstable();
        assert_eq!(idx, (0..32).collect::<Vec<_>>());
        assert!(matches!(build_keyset(33, &config, 4), Err(Error::Capacity { .. })));
    }

    #[test]
    fn keyset_is_deterministic() {
        let config = WatermarkConfig::default();
        assert_eq!(build_keyset(16, &config, 7).unwrap(), build_keyset(16, &config, 7).unwrap());
        assert_ne!(build_keyset(16, &config, 7).unwrap(), build_keyset(16, &config, 8).unwrap());
    }

    #[test]
    fn lambda_matches_folded_normal_model() {
        // Null evidence (real part, after undoing the chessboard sign) is
        // N(0, N²/2); the reference is ±ηα. E|X − m| for X ~ N(0, s²) is
        // s·√(2/π)·e^(−m²/2s²) + m·(1 − 2Φ(−m/s)). The noise channel is
        // E|Z1 − Z2| = 2/√π per pixel.
        let config = WatermarkConfig::default();
        let ks = build_keyset(8, &config, 21).unwrap();
        let mask = config.ring_mask().unwrap();
        let s = 64.0 / core::f64::consts::SQRT_2;
        let m = config.eta * config.alpha;
        let per_pixel = s * (2.0 / core::f64::consts::PI).sqrt() * libm::exp(-m * m / (2.0 * s * s))
            + m * libm::erf(m / (s * core::f64::consts::SQRT_2));
        let mu_ring = per_pixel * mask.len() as f64;
        let mu_noise = 2.0 / core::f64::consts::PI.sqrt() * 4096.0;
        let ring = 1.0 / ks.lambda_for(3);
        let noise = 1.0 / ks.lambda_for(0);
        assert!((ring / mu_ring - 1.0).abs() < 0.02, "{ring} vs {mu_ring}");
        assert!((noise / mu_noise - 1.0).abs() < 0.01, "{noise} vs {mu_noise}");
    }
}
