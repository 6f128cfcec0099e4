//! Ring masks, ring keys and Gaussian payloads.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::{mix64, Xoshiro256StarStar};
use crate::spectral::{PixelMask, Plane};
use crate::{Error, Result};

/// Angular step of the trajectory rasterizer, in degrees. At radius 31 an
/// arc of 0.25° is ~0.14 px, so consecutive samples never skip a pixel.
pub const TRAJECTORY_STEP_DEG: f64 = 0.25;

/// How ring annuli are rasterized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MaskStyle {
    /// Trajectory of a point rotated a full turn about the center.
    #[default]
    Rounder,
    /// Distance band `r ≤ d < r + 1` about the center.
    Naive,
}

impl fmt::Display for MaskStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskStyle::Rounder => "rounder",
            MaskStyle::Naive => "naive",
        })
    }
}

impl FromStr for MaskStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rounder" => Ok(MaskStyle::Rounder),
            "naive" => Ok(MaskStyle::Naive),
            other => Err(Error::Config(alloc::format!("unknown mask style `{other}`"))),
        }
    }
}

fn check_radius(r: usize, n: usize) -> Result<()> {
    if r >= n / 2 {
        return Err(Error::RadiusOutOfRange { radius: r, size: n });
    }
    Ok(())
}

/// Rounder ring of radius `r` about the Fourier center, point-symmetrized.
pub fn rounder_ring_annulus(r: usize, n: usize) -> Result<PixelMask> {
    check_radius(r, n)?;
    Ok(trajectory(r, n, ((n / 2) as f64, (n / 2) as f64)).symmetrized())
}

/// Naive distance-band ring of radius `r` about the Fourier center.
pub fn naive_ring_annulus(r: usize, n: usize) -> Result<PixelMask> {
    check_radius(r, n)?;
    Ok(distance_band(r, n, ((n / 2) as f64, (n / 2) as f64)))
}

/// Pixels nearest to `center + r·(sin θ, cos θ)` for θ on the trajectory grid.
fn trajectory(r: usize, n: usize, center: (f64, f64)) -> PixelMask {
    let mut mask = PixelMask::new(n);
    let steps = (360.0 / TRAJECTORY_STEP_DEG) as usize;
    for k in 0..steps {
        let theta = (k as f64 * TRAJECTORY_STEP_DEG).to_radians();
        let (s, c) = theta.sin_cos();
        let row = (center.0 + r as f64 * s).round();
        let col = (center.1 + r as f64 * c).round();
        if row >= 0.0 && col >= 0.0 {
            mask.insert(row as usize, col as usize);
        }
    }
    mask
}

fn distance_band(r: usize, n: usize, center: (f64, f64)) -> PixelMask {
    let mut mask = PixelMask::new(n);
    let (lo, hi) = (r as f64, (r + 1) as f64);
    for row in 0..n {
        for col in 0..n {
            let d = ((row as f64 - center.0).powi(2) + (col as f64 - center.1).powi(2)).sqrt();
            if d >= lo && d < hi {
                mask.insert(row, col);
            }
        }
    }
    mask
}

/// Disjoint annuli for radii `r_min..r_max`, with their flattened pixel order.
#[derive(Clone, Debug, PartialEq)]
pub struct RingMask {
    n: usize,
    r_min: usize,
    r_max: usize,
    style: MaskStyle,
    annuli: Vec<PixelMask>,
    union: PixelMask,
    /// `(row, col, ring)` in annulus order, row-major within each annulus.
    pixels: Vec<(usize, usize, usize)>,
}

impl RingMask {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn r_min(&self) -> usize {
        self.r_min
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn style(&self) -> MaskStyle {
        self.style
    }

    /// Number of rings, `|R| = r_max − r_min`.
    pub fn rings(&self) -> usize {
        self.annuli.len()
    }

    pub fn annuli(&self) -> &[PixelMask] {
        &self.annuli
    }

    pub fn union(&self) -> &PixelMask {
        &self.union
    }

    pub fn pixels(&self) -> &[(usize, usize, usize)] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Builds the ring mask about the Fourier center.
pub fn build_ring_mask(r_min: usize, r_max: usize, n: usize, style: MaskStyle) -> Result<RingMask> {
    build_ring_mask_at(r_min, r_max, n, style, false)
}

/// Builds the ring mask, optionally about the legacy off-center point
/// `(N/2 − 1, N/2)`. Off-center masks are not symmetrized.
pub fn build_ring_mask_at(
    r_min: usize,
    r_max: usize,
    n: usize,
    style: MaskStyle,
    off_center: bool,
) -> Result<RingMask> {
    if n == 0 || n % 2 != 0 || r_min >= r_max || r_max + 1 > n / 2 {
        return Err(Error::InvalidRadii { r_min, r_max, size: n });
    }
    let center = if off_center {
        ((n / 2 - 1) as f64, (n / 2) as f64)
    } else {
        ((n / 2) as f64, (n / 2) as f64)
    };
    let mut taken = PixelMask::new(n);
    let mut annuli = Vec::with_capacity(r_max - r_min);
    for r in r_min..r_max {
        let mut ring = match style {
            MaskStyle::Rounder => {
                let t = trajectory(r, n, center);
                if off_center {
                    t
                } else {
                    t.symmetrized()
                }
            }
            MaskStyle::Naive => distance_band(r, n, center),
        };
        ring.subtract(&taken);
        taken.union_with(&ring);
        annuli.push(ring);
    }
    let pixels = annuli
        .iter()
        .enumerate()
        .flat_map(|(i, a)| a.iter().map(move |(r, c)| (r, c, i)))
        .collect();
    Ok(RingMask { n, r_min, r_max, style, annuli, union: taken, pixels })
}

/// Discretized ring payload: one bit per ring.
#[derive(Clone, Debug, PartialEq)]
pub struct RingKey {
    pub bits: Vec<bool>,
    pub alpha: f64,
    pub key_index: u64,
}

impl RingKey {
    /// Big-endian `rings`-bit representation of `key_index`; ring 0 (the
    /// innermost) carries the most significant bit.
    pub fn from_index(key_index: u64, rings: usize, alpha: f64) -> Result<Self> {
        let capacity = capacity(rings);
        if key_index >= capacity {
            return Err(Error::Capacity { requested: key_index + 1, capacity });
        }
        let bits = (0..rings).map(|i| (key_index >> (rings - 1 - i)) & 1 == 1).collect();
        Ok(Self { bits, alpha, key_index })
    }

    /// Parses a bit string such as `"01011"`.
    pub fn from_bit_str(bits: &str, alpha: f64) -> Result<Self> {
        let bits: Vec<bool> = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(alloc::format!("bad bit `{other}`"))),
            })
            .collect::<Result<_>>()?;
        if bits.len() > 63 {
            return Err(Error::Config("more than 63 ring bits".into()));
        }
        let key_index = bits_to_index(&bits);
        Ok(Self { bits, alpha, key_index })
    }

    pub fn bit_string(&self) -> alloc::string::String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `+α` for bit 1, `−α` for bit 0.
    pub fn ring_values(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { self.alpha } else { -self.alpha }).collect()
    }
}

/// Inverse of the big-endian codec in [`RingKey::from_index`].
pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// `2^rings`, saturating at `u64::MAX`.
pub fn capacity(rings: usize) -> u64 {
    if rings >= 64 {
        u64::MAX
    } else {
        1u64 << rings
    }
}

/// Seeded Gaussian noise payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseKey {
    pub seed: u64,
    pub channels: Vec<usize>,
}

/// Real values on a mask's support, in the mask's pixel order.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    n: usize,
    support: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl Pattern {
    pub fn from_ring_values(mask: &RingMask, ring_values: &[f64]) -> Result<Self> {
        if ring_values.len() != mask.rings() {
            return Err(Error::LengthMismatch { expected: mask.rings(), got: ring_values.len() });
        }
        let (support, values) =
            mask.pixels().iter().map(|&(r, c, i)| ((r, c), ring_values[i])).unzip();
        Ok(Self { n: mask.size(), support, values })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_distance(&self, other: &Pattern) -> Result<f64> {
        if self.support != other.support {
            return Err(Error::SupportMismatch {
                evidence: self.support.len(),
                reference: other.support.len(),
            });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum())
    }
}

/// Discretized pattern: every pixel of annulus `i` is `±α` per bit `i`.
pub fn encode_ring_key(key: &RingKey, mask: &RingMask) -> Result<Pattern> {
    Pattern::from_ring_values(mask, &key.ring_values())
}

/// One `N(0, sigma²)` draw per ring.
pub fn treering_ring_values(seed: u64, rings: usize, sigma: f64) -> Vec<f64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    (0..rings).map(|_| sigma * rng.gaussian()).collect()
}

/// Gaussian ring pattern, constant within each annulus.
pub fn sample_treering_pattern(seed: u64, mask: &RingMask, sigma: f64) -> Result<Pattern> {
    if !(sigma > 0.0) {
        return Err(Error::Config("sigma must be positive".into()));
    }
    Pattern::from_ring_values(mask, &treering_ring_values(seed, mask.rings(), sigma))
}

/// Unit-variance spatial field carried by `channel` of a noise key.
/// Each listed channel gets its own stream, `mix64(seed, channel)`.
pub fn sample_noise_field(key: &NoiseKey, channel: usize, n: usize) -> Plane {
    Plane::gaussian(n, mix64(key.seed, channel as u64))
}

/// Nearest-neighbour rotation of a mask about the Fourier center.
pub fn rotate_mask(mask: &PixelMask, degrees: f64) -> PixelMask {
    let n = mask.size();
    let c = (n / 2) as f64;
    let (s, co) = degrees.to_radians().sin_cos();
    let mut out = PixelMask::new(n);
    for (r, col) in mask.iter() {
        let (dy, dx) = (r as f64 - c, col as f64 - c);
        let nr = (c + co * dy - s * dx).round();
        let nc = (c + s * dy + co * dx).round();
        if nr >= 0.0 && nc >= 0.0 {
            out.insert(nr as usize, nc as usize);
        }
    }
    out
}

/// Minimum Jaccard similarity of a mask with its rotations over `angles`.
pub fn min_rotational_jaccard(mask: &PixelMask, angles: &[f64]) -> f64 {
    angles
        .iter()
        .map(|&a| mask.jaccard(&rotate_mask(mask, a)))
        .fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const ANGLES: [f64; 4] = [10.0, 37.0, 75.0, 133.0];

    #[test]
    fn zero_radius_is_center_pixel() {
        let m = rounder_ring_annulus(0, 64).unwrap();
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(32, 32)]);
        let naive = naive_ring_annulus(0, 64).unwrap();
        assert_eq!(naive.iter().collect::<Vec<_>>(), vec![(32, 32)]);
    }

    #[test]
    fn radius_out_of_range() {
        assert!(matches!(rounder_ring_annulus(32, 64), Err(Error::RadiusOutOfRange { .. })));
        assert!(matches!(naive_ring_annulus(40, 64), Err(Error::RadiusOutOfRange { .. })));
        assert!(rounder_ring_annulus(31, 64).is_ok());
    }

    #[test]
    fn rounder_ring_is_rotation_stable_and_symmetric() {
        // A one-pixel-wide ring loses ~1/3 of its pixels to nearest-neighbour
        // rounding; 0.625 is the measured minimum over the angle grid.
        let m = rounder_ring_annulus(10, 64).unwrap();
        for a in ANGLES {
            let j = m.jaccard(&rotate_mask(&m, a));
            assert!(j >= 0.6, "angle {a}: {j}");
        }
        assert!(m.is_symmetric());
        assert_eq!(m, m.symmetrized());
    }

    #[test]
    fn rounder_beats_naive_under_rotation() {
        for r in [5, 10, 13] {
            let rounder = min_rotational_jaccard(&rounder_ring_annulus(r, 64).unwrap(), &ANGLES);
            let naive = min_rotational_jaccard(&naive_ring_annulus(r, 64).unwrap(), &ANGLES);
            assert!(rounder > naive, "r={r}: rounder {rounder} naive {naive}");
        }
    }

    #[test]
    fn naive_bands_two_apart_are_disjoint() {
        for r in 0..20 {
            let a = naive_ring_annulus(r, 64).unwrap();
            let b = naive_ring_annulus(r + 2, 64).unwrap();
            assert!(a.is_disjoint(&b));
        }
    }

    #[test]
    fn default_mask_has_eleven_disjoint_rings() {
        let m = build_ring_mask(3, 14, 64, MaskStyle::Rounder).unwrap();
        assert_eq!(m.rings(), 11);
        assert_eq!(capacity(m.rings()), 2048);
        for i in 0..m.rings() {
            assert!(!m.annuli()[i].is_empty());
            for j in i + 1..m.rings() {
                assert!(m.annuli()[i].is_disjoint(&m.annuli()[j]), "{i} {j}");
            }
            assert!(m.annuli()[i].is_symmetric(), "ring {i}");
        }
        assert!(m.union().is_symmetric());
        assert_eq!(m.len(), m.union().len());
    }

    #[test]
    fn single_ring_mask_matches_annulus() {
        let m = build_ring_mask(0, 1, 64, MaskStyle::Rounder).unwrap();
        assert_eq!(m.annuli()[0], rounder_ring_annulus(0, 64).unwrap());
    }

    #[test]
    fn invalid_radius_order() {
        assert!(matches!(
            build_ring_mask(5, 5, 64, MaskStyle::Rounder),
            Err(Error::InvalidRadii { .. })
        ));
        assert!(build_ring_mask(3, 32, 64, MaskStyle::Naive).is_err());
        assert!(build_ring_mask(3, 31, 64, MaskStyle::Naive).is_ok());
    }

    #[test]
    fn all_zero_bits_give_minus_alpha() {
        let mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).unwrap();
        let key = RingKey::from_index(0, 11, 64.0).unwrap();
        let p = encode_ring_key(&key, &mask).unwrap();
        assert!(p.values().iter().all(|&v| v == -64.0));
        assert_eq!(p.support().len(), mask.len());
    }

    #[test]
    fn single_bit_flip_distance() {
        let mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).unwrap();
        let alpha = 64.0;
        for ring in 0..11 {
            let a = RingKey::from_index(0b101_0101_0101, 11, alpha).unwrap();
            let mut b = a.clone();
            b.bits[ring] = !b.bits[ring];
            let d = encode_ring_key(&a, &mask)
                .unwrap()
                .l1_distance(&encode_ring_key(&b, &mask).unwrap())
                .unwrap();
            assert_eq!(d, 2.0 * alpha * mask.annuli()[ring].len() as f64);
        }
    }

    #[test]
    fn index_codec_roundtrip() {
        for k in [0u64, 1, 1729, 2047] {
            let key = RingKey::from_index(k, 11, 64.0).unwrap();
            assert_eq!(bits_to_index(&key.bits), k);
            assert_eq!(RingKey::from_bit_str(&key.bit_string(), 64.0).unwrap(), key);
        }
        let one = RingKey::from_index(1, 11, 1.0).unwrap();
        assert_eq!(one.bit_string(), "00000000001");
        assert!(matches!(RingKey::from_index(2048, 11, 1.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn length_mismatch() {
        let mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).unwrap();
        let key = RingKey::from_index(3, 4, 64.0).unwrap();
        assert!(matches!(encode_ring_key(&key, &mask), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn treering_pattern_is_deterministic_and_ring_constant() {
        let mask = build_ring_mask(0, 10, 64, MaskStyle::Naive).unwrap();
        let a = sample_treering_pattern(5, &mask, 64.0).unwrap();
        assert_eq!(a, sample_treering_pattern(5, &mask, 64.0).unwrap());
        for (i, ann) in mask.annuli().iter().enumerate() {
            let vals: Vec<f64> = mask
                .pixels()
                .iter()
                .zip(a.values())
                .filter(|((_, _, ring), _)| *ring == i)
                .map(|(_, &v)| v)
                .collect();
            assert_eq!(vals.len(), ann.len());
            assert!(vals.windows(2).all(|w| w[0] == w[1]));
        }
        assert!(sample_treering_pattern(5, &mask, 0.0).is_err());
    }

    #[test]
    fn treering_ring_value_std() {
        let sigma = 3.0;
        let n = 10_000;
        let mut vals = Vec::with_capacity(n);
        for s in 0..n as u64 {
            vals.push(treering_ring_values(s, 1, sigma)[0]);
        }
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() / sigma - 1.0).abs() < 0.03);
    }

    #[test]
    fn noise_field_moments_and_determinism() {
        let key = NoiseKey { seed: 17, channels: vec![0] };
        let f = sample_noise_field(&key, 0, 64);
        assert_eq!(f, sample_noise_field(&key, 0, 64));
        let n = f.data().len() as f64;
        let mean = f.data().iter().sum::<f64>() / n;
        let std = (f.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 0.05 && (std - 1.0).abs() < 0.05, "{mean} {std}");
    }

    #[test]
    fn distinct_noise_fields_folded_normal_distance() {
        // E|Z1 − Z2| = 2/√π for independent standard normals.
        let expected = 2.0 / core::f64::consts::PI.sqrt();
        let a = sample_noise_field(&NoiseKey { seed: 1, channels: vec![0] }, 0, 64);
        let b = sample_noise_field(&NoiseKey { seed: 2, channels: vec![0] }, 0, 64);
        let d = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / 4096.0;
        assert!((d / expected - 1.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn off_center_mask_is_not_symmetric() {
        let m = build_ring_mask_at(0, 10, 64, MaskStyle::Naive, true).unwrap();
        assert!(m.union().contains(31, 32));
        assert!(!m.union().is_symmetric());
    }
}
