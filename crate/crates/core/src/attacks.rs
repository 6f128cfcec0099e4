//! Latent-space surrogate attacks and round-trip channel models.
//!
//! Attacks act on every channel plane of a latent. Stochastic attacks take
//! an explicit seed; a [`ChannelModel`] derives one per attack with
//! `mix64(seed, position)` and finishes with Gaussian inversion noise.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::{mix64, Xoshiro256StarStar};
use crate::spectral::{Latent, Plane};
use crate::{Error, Result};

/// Clamp range of [`quantize`].
pub const QUANT_RANGE: f64 = 4.0;

/// Stream index of the inversion noise inside a channel model.
const INVERSION_STREAM: u64 = 0xFFFF_FFFF;

/// Zero outside the grid.
#[inline]
fn sample_zero(p: &Plane, r: isize, c: isize) -> f64 {
    let n = p.size() as isize;
    if r < 0 || c < 0 || r >= n || c >= n {
        0.0
    } else {
        p.get(r as usize, c as usize)
    }
}

#[inline]
fn sample_clamp(p: &Plane, r: isize, c: isize) -> f64 {
    let hi = p.size() as isize - 1;
    p.get(r.clamp(0, hi) as usize, c.clamp(0, hi) as usize)
}

fn bilinear(p: &Plane, y: f64, x: f64, fetch: fn(&Plane, isize, isize) -> f64) -> f64 {
    let (y0, x0) = (y.floor(), x.floor());
    let (fy, fx) = (y - y0, x - x0);
    let (r, c) = (y0 as isize, x0 as isize);
    let mut acc = (1.0 - fy) * (1.0 - fx) * fetch(p, r, c);
    if fx != 0.0 {
        acc += (1.0 - fy) * fx * fetch(p, r, c + 1);
    }
    if fy != 0.0 {
        acc += fy * (1.0 - fx) * fetch(p, r + 1, c);
        if fx != 0.0 {
            acc += fy * fx * fetch(p, r + 1, c + 1);
        }
    }
    acc
}

/// `deg` folded into `[0, 360)`.
fn wrap_degrees(deg: f64) -> f64 {
    let d = deg % 360.0;
    if d < 0.0 {
        d + 360.0
    } else {
        d
    }
}

/// Sine and cosine, exact at multiples of 90°.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let d = wrap_degrees(deg);
    match d {
        x if x == 0.0 => (0.0, 1.0),
        x if x == 90.0 => (1.0, 0.0),
        x if x == 180.0 => (0.0, -1.0),
        x if x == 270.0 => (-1.0, 0.0),
        _ => d.to_radians().sin_cos(),
    }
}

fn rotate_plane(p: &Plane, deg: f64) -> Plane {
    let n = p.size();
    let center = (n as f64 - 1.0) / 2.0;
    let (s, c) = sin_cos_deg(deg);
    let mut out = Plane::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (dy, dx) = (i as f64 - center, j as f64 - center);
            // Inverse map of a counter-clockwise rotation in (x right, y up).
            let sx = center + c * dx - s * dy;
            let sy = center + s * dx + c * dy;
            out.set(i, j, bilinear(p, sy, sx, sample_zero));
        }
    }
    out
}

/// Rotates every plane about `((N−1)/2, (N−1)/2)`, bilinear, zero fill.
pub fn rotate(latent: &Latent, degrees: f64) -> Latent {
    if wrap_degrees(degrees) == 0.0 {
        return latent.clone();
    }
    latent.map_planes(|_, p| rotate_plane(p, degrees))
}

/// Crops a seeded square window of area `fraction·N²` and resizes it back.
pub fn crop_scale(latent: &Latent, fraction: f64, seed: u64) -> Result<Latent> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Attack(format!("crop fraction {fraction} outside (0, 1]")));
    }
    if fraction == 1.0 {
        return Ok(latent.clone());
    }
    let n = latent.size() as f64;
    let side = fraction.sqrt() * n;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let y0 = rng.next_f64() * (n - side);
    let x0 = rng.next_f64() * (n - side);
    let scale = side / n;
    Ok(latent.map_planes(|_, p| {
        let m = p.size();
        let mut out = Plane::zeros(m);
        for i in 0..m {
            for j in 0..m {
                let sy = y0 + (i as f64 + 0.5) * scale - 0.5;
                let sx = x0 + (j as f64 + 0.5) * scale - 0.5;
                out.set(i, j, bilinear(p, sy, sx, sample_clamp));
            }
        }
        out
    }))
}

/// Box filter of side `kernel` with zero padding. Even kernels cover
/// offsets `−k/2 ..= k/2 − 1`.
pub fn blur(latent: &Latent, kernel: usize) -> Result<Latent> {
    if kernel == 0 {
        return Err(Error::Attack("blur kernel must be at least 1".into()));
    }
    if kernel == 1 {
        return Ok(latent.clone());
    }
    let lo = (kernel / 2) as isize;
    let hi = kernel as isize - 1 - lo;
    let norm = 1.0 / (kernel * kernel) as f64;
    Ok(latent.map_planes(|_, p| {
        let n = p.size() as isize;
        // Separable: rows then columns.
        let mut tmp = Plane::zeros(p.size());
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (c - lo..=c + hi).map(|cc| sample_zero(p, r, cc)).sum();
                tmp.set(r as usize, c as usize, s);
            }
        }
        let mut out = Plane::zeros(p.size());
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (r - lo..=r + hi).map(|rr| sample_zero(&tmp, rr, c)).sum();
                out.set(r as usize, c as usize, s * norm);
            }
        }
        out
    }))
}

/// Adds seeded i.i.d. `N(0, std²)` noise to every element.
pub fn add_noise(latent: &Latent, std: f64, seed: u64) -> Result<Latent> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::Attack(format!("noise std {std} must be non-negative")));
    }
    if std == 0.0 {
        return Ok(latent.clone());
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    Ok(latent.map_planes(|_, p| {
        let mut out = p.clone();
        for v in out.data_mut() {
            *v += std * rng.gaussian();
        }
        out
    }))
}

pub fn brightness(latent: &Latent, factor: f64) -> Result<Latent> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Attack(format!("brightness factor {factor} must be positive")));
    }
    Ok(latent.map_planes(|_, p| {
        let mut out = p.clone();
        out.data_mut().iter_mut().for_each(|v| *v *= factor);
        out
    }))
}

/// Mid-rise uniform quantizer over `[−4, 4]` with `levels` cells.
pub fn quantize(latent: &Latent, levels: u64) -> Result<Latent> {
    if levels < 2 {
        return Err(Error::Attack(format!("quantizer needs at least 2 levels, got {levels}")));
    }
    let step = 2.0 * QUANT_RANGE / levels as f64;
    let top = (levels - 1) as f64;
    Ok(latent.map_planes(|_, p| {
        let mut out = p.clone();
        for v in out.data_mut() {
            let q = ((*v + QUANT_RANGE) / step).floor().clamp(0.0, top);
            *v = -QUANT_RANGE + (q + 0.5) * step;
        }
        out
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttackSpec {
    Rotate(f64),
    CropScale(f64),
    Blur(usize),
    Noise(f64),
    Brightness(f64),
    Quantize(u64),
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AttackSpec::Rotate(d) => d.is_finite(),
            AttackSpec::CropScale(f) => f > 0.0 && f <= 1.0,
            AttackSpec::Blur(k) => k >= 1,
            AttackSpec::Noise(s) => s >= 0.0 && s.is_finite(),
            AttackSpec::Brightness(f) => f > 0.0 && f.is_finite(),
            AttackSpec::Quantize(l) => l >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Attack(format!("parameter out of range in `{self}`")))
        }
    }

    pub fn apply(&self, latent: &Latent, seed: u64) -> Result<Latent> {
        self.validate()?;
        match *self {
            AttackSpec::Rotate(d) => Ok(rotate(latent, d)),
            AttackSpec::CropScale(f) => crop_scale(latent, f, seed),
            AttackSpec::Blur(k) => blur(latent, k),
            AttackSpec::Noise(s) => add_noise(latent, s, seed),
            AttackSpec::Brightness(f) => brightness(latent, f),
            AttackSpec::Quantize(l) => quantize(latent, l),
        }
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::Rotate(d) => write!(f, "rotate={d}"),
            AttackSpec::CropScale(x) => write!(f, "cs={x}"),
            AttackSpec::Blur(k) => write!(f, "blur={k}"),
            AttackSpec::Noise(s) => write!(f, "noise={s}"),
            AttackSpec::Brightness(x) => write!(f, "bright={x}"),
            AttackSpec::Quantize(l) => write!(f, "quant={l}"),
        }
    }
}

impl FromStr for AttackSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s
            .trim()
            .split_once('=')
            .ok_or_else(|| Error::Attack(format!("expected name=value, got `{s}`")))?;
        let bad = || Error::Attack(format!("bad value in `{s}`"));
        let float = || value.trim().parse::<f64>().map_err(|_| bad());
        let spec = match name.trim() {
            "rotate" => AttackSpec::Rotate(float()?),
            "cs" => AttackSpec::CropScale(float()?),
            "blur" => AttackSpec::Blur(value.trim().parse().map_err(|_| bad())?),
            "noise" => AttackSpec::Noise(float()?),
            "bright" => AttackSpec::Brightness(float()?),
            "quant" => AttackSpec::Quantize(value.trim().parse().map_err(|_| bad())?),
            other => return Err(Error::Attack(format!("unknown attack `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a comma-separated attack list. `clean` or an empty string is no attack.
pub fn parse_attacks(s: &str) -> Result<Vec<AttackSpec>> {
    let s = s.trim();
    if s.is_empty() || s == "clean" {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

/// Canonical text of an attack list (`clean` when empty).
pub fn format_attacks(attacks: &[AttackSpec]) -> String {
    if attacks.is_empty() {
        return "clean".to_string();
    }
    attacks.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

/// Surrogate for decode, attack, re-encode and inversion.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    pub inversion_noise_std: f64,
    pub attacks: Vec<AttackSpec>,
    pub seed: u64,
}

impl ChannelModel {
    pub fn identity() -> Self {
        Self { inversion_noise_std: 0.0, attacks: Vec::new(), seed: 0 }
    }

    pub fn new(attacks: Vec<AttackSpec>, inversion_noise_std: f64, seed: u64) -> Self {
        Self { inversion_noise_std, attacks, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Applies the attacks in order, then the inversion noise.
pub fn apply_channel(latent: &Latent, model: &ChannelModel) -> Result<Latent> {
    let mut out = latent.clone();
    for (i, a) in model.attacks.iter().enumerate() {
        out = a.apply(&out, mix64(model.seed, i as u64))?;
    }
    add_noise(&out, model.inversion_noise_std, mix64(model.seed, INVERSION_STREAM))
}
