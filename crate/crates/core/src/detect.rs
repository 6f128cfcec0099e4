//! Evidence extraction, verification scores and multi-key identification.
//!
//! The combined score of a key is `min_c λ_c · d_c` over the watermarked
//! channels, where `d_c` is an ℓ1 distance: between the de-shifted masked
//! spectrum and the key's ring reference on the ring channel, and between
//! the spatial channel and the key's noise field on noise channels.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::imprint::{ring_reference, KeyPair, KeySet, WatermarkConfig};
use crate::patterns::{sample_noise_field, Pattern, RingMask};
use crate::spectral::{chessboard_sign, dft2, Latent, Plane};
use crate::{Error, Result};

/// De-shifted spectrum values at each mask pixel, in mask pixel order.
pub fn ring_evidence(plane: &Plane, mask: &RingMask, config: &WatermarkConfig) -> Result<Vec<Complex64>> {
    if plane.size() != mask.size() {
        return Err(Error::Dimension(format!(
            "plane size {} does not match mask size {}",
            plane.size(),
            mask.size()
        )));
    }
    let spec = dft2(plane)?;
    Ok(mask
        .pixels()
        .iter()
        .map(|&(r, c, _)| {
            let v = spec.get(r, c);
            if config.enable_shift {
                v * chessboard_sign(r, c)
            } else {
                v
            }
        })
        .collect())
}

/// Real parts of the de-shifted ring-channel spectrum at masked pixels.
pub fn extract_ring_evidence(latent: &Latent, config: &WatermarkConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if latent.size() != config.size || config.ring_channel >= latent.channels() {
        return Err(Error::Dimension(format!(
            "latent {}x{}x{} does not fit the configuration",
            latent.channels(),
            latent.size(),
            latent.size()
        )));
    }
    let mask = config.ring_mask()?;
    Ok(ring_evidence(latent.plane(config.ring_channel), &mask, config)?
        .into_iter()
        .map(|v| v.re)
        .collect())
}

/// `Σ |evidence − η·reference|` over the reference pattern's support.
pub fn l1_distance(evidence: &[f64], reference: &Pattern, eta: f64) -> Result<f64> {
    if evidence.len() != reference.values().len() {
        return Err(Error::SupportMismatch { evidence: evidence.len(), reference: reference.values().len() });
    }
    Ok(evidence.iter().zip(reference.values()).map(|(e, r)| (e - eta * r).abs()).sum())
}

#[inline]
fn pixel_distance(e: Complex64, target: Complex64, lossless: bool) -> f64 {
    if lossless {
        (e.re - target.re).abs()
    } else {
        (e - target).norm()
    }
}

/// Ring-channel distance. Lossless configurations compare real parts only;
/// lossy ones use the complex modulus. Summed per ring, then across rings.
pub fn ring_distance(evidence: &[Complex64], mask: &RingMask, reference: &[Complex64], config: &WatermarkConfig) -> f64 {
    let mut per_ring = alloc::vec![0.0; mask.rings()];
    for (e, &(_, _, ring)) in evidence.iter().zip(mask.pixels()) {
        per_ring[ring] += pixel_distance(*e, reference[ring] * config.eta, config.enable_lossless);
    }
    per_ring.iter().sum()
}

/// Spatial ℓ1 distance between a channel and a reference field.
pub fn noise_distance(plane: &Plane, field: &Plane) -> f64 {
    plane.data().iter().zip(field.data()).map(|(a, b)| (a - b).abs()).sum()
}

/// Distances of one key.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyScore {
    pub key_index: u64,
    /// Raw `d_c` per watermarked channel, ring channel first.
    pub channel_distances: Vec<(usize, f64)>,
    pub combined: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub per_key: Vec<KeyScore>,
    pub best_key: u64,
    pub best_score: f64,
}

impl MatchResult {
    /// Key indices ordered by combined score, ties by key index.
    pub fn ranking(&self) -> Vec<(u64, f64)> {
        let mut r: Vec<(u64, f64)> = self.per_key.iter().map(|k| (k.key_index, k.combined)).collect();
        r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        r
    }
}

/// Recovered per-channel evidence of one latent.
#[derive(Clone, Debug)]
pub struct Evidence {
    ring: Vec<Complex64>,
    noise: Vec<Plane>,
    /// Per ring, distance to `−ηα` and `+ηα` (discretized keys only).
    ring_table: Option<Vec<[f64; 2]>>,
}

/// Precomputed references for repeated identification against a key set.
#[derive(Clone, Debug)]
pub struct Matcher<'a> {
    keyset: &'a KeySet,
    mask: RingMask,
    refs: Vec<Vec<Complex64>>,
    fields: Vec<Vec<Plane>>,
    lambda: Vec<f64>,
}

impl<'a> Matcher<'a> {
    pub fn new(keyset: &'a KeySet) -> Result<Self> {
        if keyset.is_empty() {
            return Err(Error::EmptyKeySet);
        }
        let config = &keyset.config;
        let mask = config.ring_mask()?;
        let refs = keyset.keys.iter().map(|k| ring_reference(config, k)).collect();
        let fields = keyset
            .keys
            .iter()
            .map(|k| {
                config.noise_channels.iter().map(|&ch| sample_noise_field(&k.noise, ch, config.size)).collect()
            })
            .collect();
        let lambda = config.watermarked_channels().iter().map(|&c| keyset.lambda_for(c)).collect();
        Ok(Self { keyset, mask, refs, fields, lambda })
    }

    pub fn keyset(&self) -> &KeySet {
        self.keyset
    }

    pub fn evidence(&self, latent: &Latent) -> Result<Evidence> {
        let config = &self.keyset.config;
        let max_ch = config.watermarked_channels().into_iter().max().unwrap_or(0);
        if latent.size() != config.size || max_ch >= latent.channels() {
            return Err(Error::Dimension(format!(
                "latent {}x{}x{} does not fit the key set",
                latent.channels(),
                latent.size(),
                latent.size()
            )));
        }
        let ring = ring_evidence(latent.plane(config.ring_channel), &self.mask, config)?;
        let ring_table = config.enable_discretize.then(|| {
            let unit = if config.enable_lossless {
                Complex64::new(config.eta * config.alpha, 0.0)
            } else {
                Complex64::new(config.eta * config.alpha, config.eta * config.alpha)
            };
            let mut table = alloc::vec![[0.0; 2]; self.mask.rings()];
            for (e, &(_, _, r)) in ring.iter().zip(self.mask.pixels()) {
                table[r][0] += pixel_distance(*e, -unit, config.enable_lossless);
                table[r][1] += pixel_distance(*e, unit, config.enable_lossless);
            }
            table
        });
        let noise = config.noise_channels.iter().map(|&ch| latent.plane(ch).clone()).collect();
        Ok(Evidence { ring, noise, ring_table })
    }

    fn score(&self, ev: &Evidence, pos: usize) -> KeyScore {
        let config = &self.keyset.config;
        let key = &self.keyset.keys[pos];
        let d_ring = match &ev.ring_table {
            Some(table) => key.ring.bits.iter().zip(table).map(|(&b, t)| t[b as usize]).sum(),
            None => ring_distance(&ev.ring, &self.mask, &self.refs[pos], config),
        };
        let mut channel_distances = Vec::with_capacity(1 + config.noise_channels.len());
        channel_distances.push((config.ring_channel, d_ring));
        for (i, &ch) in config.noise_channels.iter().enumerate() {
            channel_distances.push((ch, noise_distance(&ev.noise[i], &self.fields[pos][i])));
        }
        let combined = channel_distances
            .iter()
            .zip(&self.lambda)
            .map(|((_, d), l)| l * d)
            .fold(f64::INFINITY, f64::min);
        KeyScore { key_index: key.key_index(), channel_distances, combined }
    }

    /// Scores the first `n` keys of the set (all of them if `n` exceeds it).
    pub fn identify_prefix(&self, ev: &Evidence, n: usize) -> Result<MatchResult> {
        let n = n.min(self.keyset.len());
        if n == 0 {
            return Err(Error::EmptyKeySet);
        }
        let per_key: Vec<KeyScore> = (0..n).map(|p| self.score(ev, p)).collect();
        let mut best = &per_key[0];
        for k in &per_key[1..] {
            if k.combined < best.combined || (k.combined == best.combined && k.key_index < best.key_index) {
                best = k;
            }
        }
        let (best_key, best_score) = (best.key_index, best.combined);
        Ok(MatchResult { per_key, best_key, best_score })
    }

    pub fn identify(&self, latent: &Latent) -> Result<MatchResult> {
        self.identify_prefix(&self.evidence(latent)?, usize::MAX)
    }

    pub fn verify_score(&self, latent: &Latent, key_index: u64) -> Result<f64> {
        let pos = self
            .keyset
            .keys
            .iter()
            .position(|k| k.key_index() == key_index)
            .ok_or(Error::UnknownKey(key_index))?;
        Ok(self.score(&self.evidence(latent)?, pos).combined)
    }

    /// Combined score of the key at position `pos` for prepared evidence.
    pub fn score_at(&self, ev: &Evidence, pos: usize) -> f64 {
        self.score(ev, pos).combined
    }

    /// Raw distances of the key at position `pos`, ring channel first.
    pub fn distances_at(&self, ev: &Evidence, pos: usize) -> Vec<(usize, f64)> {
        self.score(ev, pos).channel_distances
    }
}

/// Eq.-(2) score of `key` against `latent`; lower means watermarked.
pub fn verify_score(latent: &Latent, key: &KeyPair, keyset: &KeySet) -> Result<f64> {
    if keyset.get(key.key_index()) != Some(key) {
        return Err(Error::UnknownKey(key.key_index()));
    }
    Matcher::new(keyset)?.verify_score(latent, key.key_index())
}

/// Best matching key of `keyset` for `latent`.
pub fn identify(latent: &Latent, keyset: &KeySet) -> Result<MatchResult> {
    Matcher::new(keyset)?.identify(latent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imprint::{build_keyset, imprint, Embedder};
    use crate::patterns::{encode_ring_key, MaskStyle, NoiseKey, RingKey};
    use crate::rng::mix64;
    use crate::spectral::Spectrum;

    fn small_config() -> WatermarkConfig {
        WatermarkConfig { size: 16, r_min: 1, r_max: 6, ..Default::default() }
    }

    #[test]
    fn lossless_evidence_equals_pattern() {
        for eta in [1.0, 0.85] {
            let config = WatermarkConfig { eta, ..Default::default() };
            let key = KeyPair {
                ring: RingKey::from_index(1500, 11, 64.0).unwrap(),
                noise: NoiseKey { seed: 1, channels: alloc::vec![0] },
            };
            let x = imprint(&Latent::gaussian(4, 64, 3), &key, &config).unwrap();
            let ev = extract_ring_evidence(&x, &config).unwrap();
            let pattern = encode_ring_key(&key.ring, &config.ring_mask().unwrap()).unwrap();
            for (e, p) in ev.iter().zip(pattern.values()) {
                assert!((e - eta * p).abs() < 1e-6 * 64.0);
            }
            assert!(l1_distance(&ev, &pattern, eta).unwrap() < 1e-6 * 64.0 * ev.len() as f64);
        }
    }

    #[test]
    fn null_evidence_magnitude() {
        // Real part of N_C(0, N²) is N(0, N²/2): E|X_re| = N/√π.
        let config = WatermarkConfig::default();
        let (mut sum, mut count) = (0.0, 0usize);
        for s in 0..64 {
            let ev = extract_ring_evidence(&Latent::gaussian(4, 64, mix64(5, s)), &config).unwrap();
            count += ev.len();
            sum += ev.iter().map(|v| v.abs()).sum::<f64>();
        }
        let want = 64.0 / core::f64::consts::PI.sqrt();
        assert!((sum / count as f64 / want - 1.0).abs() < 0.02);
    }

    #[test]
    fn l1_distance_basics() {
        let mask = crate::patterns::build_ring_mask(2, 4, 16, MaskStyle::Rounder).unwrap();
        let p = Pattern::from_ring_values(&mask, &[1.0, -1.0]).unwrap();
        let mut ev: Vec<f64> = p.values().iter().map(|v| 0.5 * v).collect();
        assert_eq!(l1_distance(&ev, &p, 0.5).unwrap(), 0.0);
        ev[3] += 2.5;
        assert_eq!(l1_distance(&ev, &p, 0.5).unwrap(), 2.5);
        assert!(matches!(l1_distance(&ev[1..], &p, 0.5), Err(Error::SupportMismatch { .. })));
    }

    #[test]
    fn folded_normal_distance_matches_simulation() {
        // E|X − m| for X ~ N(0, s²).
        let mask = crate::patterns::build_ring_mask(3, 14, 64, MaskStyle::Rounder).unwrap();
        let key = RingKey::from_index(0b10110011010, 11, 64.0).unwrap();
        let p = encode_ring_key(&key, &mask).unwrap();
        let s = 64.0 / core::f64::consts::SQRT_2;
        let m: f64 = 64.0;
        let per = s * (2.0 / core::f64::consts::PI).sqrt() * libm::exp(-m * m / (2.0 * s * s))
            + m * libm::erf(m / (s * core::f64::consts::SQRT_2));
        let mut rng = crate::rng::Xoshiro256StarStar::seed_from_u64(4);
        let trials = 10_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let ev: Vec<f64> = (0..p.values().len()).map(|_| s * rng.gaussian()).collect();
            total += l1_distance(&ev, &p, 1.0).unwrap();
        }
        let got = total / trials as f64;
        let want = per * p.values().len() as f64;
        assert!((got / want - 1.0).abs() < 0.01, "{got} {want}");
    }

    #[test]
    fn self_match_for_every_key() {
        let config = small_config();
        let ks = build_keyset(32, &config, 3).unwrap();
        let m = Matcher::new(&ks).unwrap();
        let e = Embedder::new(&config).unwrap();
        for (i, key) in ks.keys.iter().enumerate() {
            let x = e.imprint(&Latent::gaussian(4, 16, i as u64), key).unwrap();
            let res = m.identify(&x).unwrap();
            assert_eq!(res.best_key, key.key_index());
            assert!(res.best_score < 1e-9);
        }
    }

    #[test]
    fn clean_identification_among_2048_keys() {
        let config = WatermarkConfig::default();
        let ks = build_keyset(2048, &config, 11).unwrap();
        let key = ks.get(1729).unwrap();
        let x = imprint(&Latent::gaussian(4, 64, 1), key, &config).unwrap();
        assert_eq!(identify(&x, &ks).unwrap().best_key, 1729);
    }

    /// Independent recomputation: full spectrum, explicit shift, per-pixel sums.
    fn brute_force_scores(latent: &Latent, ks: &KeySet) -> Vec<f64> {
        let config = &ks.config;
        let n = config.size;
        let plane = latent.plane(config.ring_channel);
        let mut spec = Spectrum::zeros(n);
        for u in 0..n {
            for v in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    for c in 0..n {
                        let ph = -2.0 * core::f64::consts::PI
                            * ((u as f64 - (n / 2) as f64) * r as f64 + (v as f64 - (n / 2) as f64) * c as f64)
                            / n as f64;
                        acc += Complex64::from_polar(plane.get(r, c), ph);
                    }
                }
                spec.set(u, v, acc);
            }
        }
        let mask = config.ring_mask().unwrap();
        ks.keys
            .iter()
            .map(|k| {
                let mut d_ring = 0.0;
                for &(r, c, ring) in mask.pixels() {
                    let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                    let target = if k.ring.bits[ring] { config.alpha } else { -config.alpha } * config.eta;
                    d_ring += (spec.get(r, c).re * sign - target).abs();
                }
                let field = sample_noise_field(&k.noise, 0, n);
                let d_noise: f64 = latent.plane(0).data().iter().zip(field.data()).map(|(a, b)| (a - b).abs()).sum();
                (ks.lambda_for(3) * d_ring).min(ks.lambda_for(0) * d_noise)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_oracle() {
        let config = small_config();
        let ks = build_keyset(4, &config, 8).unwrap();
        let m = Matcher::new(&ks).unwrap();
        for t in 0..6u64 {
            let host = Latent::gaussian(4, 16, t);
            let x = if t % 2 == 0 {
                imprint(&host, &ks.keys[(t / 2) as usize], &config).unwrap()
            } else {
                host
            };
            let mut x = x;
            // Perturb so that matches are not trivially exact.
            for v in x.plane_mut(3).data_mut().iter_mut() {
                *v *= 0.9;
            }
            let res = m.identify(&x).unwrap();
            let oracle = brute_force_scores(&x, &ks);
            for (k, o) in res.per_key.iter().zip(&oracle) {
                assert!((k.combined - o).abs() < 1e-9 * (1.0 + o.abs()));
            }
            let argmin = (0..4)
                .min_by(|&a, &b| oracle[a].total_cmp(&oracle[b]).then(ks.keys[a].key_index().cmp(&ks.keys[b].key_index())))
                .unwrap();
            assert_eq!(res.best_key, ks.keys[argmin].key_index());
        }
    }

    #[test]
    fn single_key_always_wins() {
        let config = small_config();
        let ks = build_keyset(1, &config, 2).unwrap();
        for s in 0..5 {
            assert_eq!(identify(&Latent::gaussian(4, 16, s), &ks).unwrap().best_key, ks.keys[0].key_index());
        }
    }

    #[test]
    fn null_score_is_near_one() {
        let config = WatermarkConfig::default();
        let ks = build_keyset(16, &config, 5).unwrap();
        let m = Matcher::new(&ks).unwrap();
        let mut total = 0.0;
        let (mut ring, mut noise) = (0.0, 0.0);
        for s in 0..64u64 {
            let ev = m.evidence(&Latent::gaussian(4, 64, mix64(77, s))).unwrap();
            let pos = (s % 16) as usize;
            let d = m.distances_at(&ev, pos);
            ring += ks.lambda_for(3) * d[0].1;
            noise += ks.lambda_for(0) * d[1].1;
            let sc = m.score_at(&ev, pos);
            assert!(sc >= 0.0);
            total += sc;
        }
        assert!((ring / 64.0 - 1.0).abs() < 0.05);
        assert!((noise / 64.0 - 1.0).abs() < 0.01);
        // The minimum of two unit-mean channels sits slightly below one.
        assert!(total / 64.0 < 1.0 && total / 64.0 > 0.9);
    }

    #[test]
    fn argmin_invariant_under_common_lambda_scale() {
        let config = small_config();
        let ks = build_keyset(8, &config, 6).unwrap();
        let mut scaled = ks.clone();
        for l in scaled.lambda.iter_mut() {
            l.1 *= 37.5;
        }
        let (a, b) = (Matcher::new(&ks).unwrap(), Matcher::new(&scaled).unwrap());
        for s in 0..20 {
            let x = Latent::gaussian(4, 16, s);
            assert_eq!(a.identify(&x).unwrap().best_key, b.identify(&x).unwrap().best_key);
        }
    }

    #[test]
    fn falls_back_to_surviving_channel() {
        let config = WatermarkConfig::default();
        let ks = build_keyset(16, &config, 9).unwrap();
        let m = Matcher::new(&ks).unwrap();
        let key = &ks.keys[5];
        let mut x = imprint(&Latent::gaussian(4, 64, 3), key, &config).unwrap();
        // Destroy the ring channel with a huge constant offset.
        for v in x.plane_mut(3).data_mut() {
            *v += 1.0e3 * ((v.abs() * 1e3) as i64 % 7) as f64;
        }
        let res = m.identify(&x).unwrap();
        assert_eq!(res.best_key, key.key_index());
        let noise_argmin = res
            .per_key
            .iter()
            .min_by(|a, b| a.channel_distances[1].1.total_cmp(&b.channel_distances[1].1))
            .unwrap()
            .key_index;
        assert_eq!(res.best_key, noise_argmin);
    }

    #[test]
    fn unknown_key_and_mismatch_errors() {
        let config = small_config();
        let ks = build_keyset(4, &config, 1).unwrap();
        let mut stranger = ks.keys[0].clone();
        stranger.noise.seed ^= 1;
        assert!(matches!(verify_score(&Latent::gaussian(4, 16, 0), &stranger, &ks), Err(Error::UnknownKey(_))));
        assert!(matches!(identify(&Latent::gaussian(4, 32, 0), &ks), Err(Error::Dimension(_))));
    }

    #[test]
    fn lossy_fast_path_matches_direct_sum() {
        let config = WatermarkConfig { enable_lossless: false, ..small_config() };
        let ks = build_keyset(8, &config, 4).unwrap();
        let m = Matcher::new(&ks).unwrap();
        let x = Latent::gaussian(4, 16, 12);
        let ev = m.evidence(&x).unwrap();
        let mask = config.ring_mask().unwrap();
        let plane_ev = ring_evidence(x.plane(3), &mask, &config).unwrap();
        for pos in 0..8 {
            let direct = ring_distance(&plane_ev, &mask, &ring_reference(&config, &ks.keys[pos]), &config);
            let fast = m.distances_at(&ev, pos)[0].1;
            assert!((direct - fast).abs() < 1e-9 * direct);
        }
    }

    #[test]
    fn deterministic_results() {
        let config = small_config();
        let ks = build_keyset(16, &config, 1).unwrap();
        let x = Latent::gaussian(4, 16, 99);
        assert_eq!(identify(&x, &ks).unwrap(), identify(&x, &ks).unwrap());
    }
}
