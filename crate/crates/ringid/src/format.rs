//! RLT1 latent files and RID1 key set files.
//!
//! RLT1 is binary: the magic `RINGLAT1`, three little-endian `u32`
//! dimensions (channels, N, N), then `f32` samples channel-major and
//! row-major. RID1 is line-oriented text with `name=value` header lines
//! followed by one `key` record per line.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ringid_core::imprint::{KeyPair, KeySet, WatermarkConfig};
use ringid_core::patterns::{MaskStyle, NoiseKey, RingKey};
use ringid_core::spectral::Latent;

use crate::{Error, Result};

pub const LATENT_MAGIC: &[u8; 8] = b"RINGLAT1";
pub const KEYSET_VERSION: u32 = 1;

/// Upper bound on a single dimension, to reject garbage headers early.
const MAX_DIM: u32 = 1 << 14;

pub fn write_latent<W: Write>(mut w: W, latent: &Latent) -> std::io::Result<()> {
    w.write_all(LATENT_MAGIC)?;
    let n = latent.size() as u32;
    w.write_u32::<LittleEndian>(latent.channels() as u32)?;
    w.write_u32::<LittleEndian>(n)?;
    w.write_u32::<LittleEndian>(n)?;
    for plane in latent.planes() {
        for &v in plane.data() {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    w.flush()
}

pub fn read_latent<R: Read>(mut r: R) -> Result<Latent> {
    let short = |e: std::io::Error| Error::Format(format!("truncated latent file: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(short)?;
    if &magic != LATENT_MAGIC {
        return Err(Error::Format("not an RLT1 latent (bad magic)".into()));
    }
    let channels = r.read_u32::<LittleEndian>().map_err(short)?;
    let rows = r.read_u32::<LittleEndian>().map_err(short)?;
    let cols = r.read_u32::<LittleEndian>().map_err(short)?;
    if rows != cols {
        return Err(Error::Format(format!("latent planes must be square, got {rows}x{cols}")));
    }
    if channels == 0 || channels > 64 || rows == 0 || rows > MAX_DIM {
        return Err(Error::Format(format!("implausible latent shape {channels}x{rows}x{cols}")));
    }
    let count = channels as usize * rows as usize * cols as usize;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(r.read_f32::<LittleEndian>().map_err(short)? as f64);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes after latent data".into()));
    }
    Latent::from_flat(channels as usize, rows as usize, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_latent(path: &Path, latent: &Latent) -> Result<()> {
    let mut buf = Vec::new();
    write_latent(&mut buf, latent).map_err(|e| Error::io(path.display().to_string(), e))?;
    fs::write(path, buf).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_latent(path: &Path) -> Result<Latent> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_latent(bytes.as_slice())
}

fn flags(config: &WatermarkConfig) -> String {
    let mut f = Vec::new();
    if config.enable_shift {
        f.push("shift");
    }
    if config.enable_lossless {
        f.push("lossless");
    }
    if config.enable_discretize {
        f.push("discretize");
    }
    if config.baseline_center_offset {
        f.push("offset");
    }
    f.join(",")
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Serializes a key set. Floats use the shortest round-trip representation.
pub fn keyset_to_string(ks: &KeySet) -> String {
    let c = &ks.config;
    let mut s = String::new();
    let _ = writeln!(s, "version={KEYSET_VERSION}");
    let _ = writeln!(s, "N={}", c.size);
    let _ = writeln!(s, "rings={}..{}", c.r_min, c.r_max);
    let _ = writeln!(s, "alpha={:?}", c.alpha);
    let _ = writeln!(s, "eta={:?}", c.eta);
    let _ = writeln!(s, "ring_channel={}", c.ring_channel);
    let _ = writeln!(s, "noise_channels={}", join(&c.noise_channels));
    let _ = writeln!(s, "style={}", c.mask_style);
    let _ = writeln!(s, "flags={}", flags(c));
    let _ = writeln!(s, "seed={}", ks.build_seed);
    let lambda: Vec<String> = ks.lambda.iter().map(|(ch, l)| format!("{ch}:{l:?}")).collect();
    let _ = writeln!(s, "lambda={}", lambda.join(","));
    for k in &ks.keys {
        let _ = writeln!(s, "key {} bits={} noise_seed={}", k.key_index(), k.ring.bit_string(), k.noise.seed);
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("keyset line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad(line, format!("bad number `{v}`")))
}

fn list<T: std::str::FromStr>(line: usize, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|t| !t.trim().is_empty()).map(|t| num(line, t)).collect()
}

#[derive(Default)]
struct Header {
    version: Option<u32>,
    size: Option<usize>,
    rings: Option<(usize, usize)>,
    alpha: Option<f64>,
    eta: Option<f64>,
    ring_channel: Option<usize>,
    noise_channels: Option<Vec<usize>>,
    style: Option<MaskStyle>,
    flags: Option<Vec<String>>,
    seed: Option<u64>,
    lambda: Option<Vec<(usize, f64)>>,
}

pub fn parse_keyset(text: &str) -> Result<KeySet> {
    let mut h = Header::default();
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("key ") {
            records.push((ln, rest.to_string()));
            continue;
        }
        if !records.is_empty() {
            return Err(bad(ln, "header line after key records"));
        }
        let (name, value) = line.split_once('=').ok_or_else(|| bad(ln, "expected name=value"))?;
        match name.trim() {
            "version" => h.version = Some(num(ln, value)?),
            "N" => h.size = Some(num(ln, value)?),
            "rings" => {
                let (a, b) = value.split_once("..").ok_or_else(|| bad(ln, "rings must be lo..hi"))?;
                h.rings = Some((num(ln, a)?, num(ln, b)?));
            }
            "alpha" => h.alpha = Some(num(ln, value)?),
            "eta" => h.eta = Some(num(ln, value)?),
            "ring_channel" => h.ring_channel = Some(num(ln, value)?),
            "noise_channels" => h.noise_channels = Some(list(ln, value)?),
            "style" => h.style = Some(value.trim().parse().map_err(|e| bad(ln, e))?),
            "flags" => {
                h.flags = Some(value.split(',').map(|f| f.trim().to_string()).filter(|f| !f.is_empty()).collect())
            }
            "seed" => h.seed = Some(num(ln, value)?),
            "lambda" => {
                let mut v = Vec::new();
                for item in value.split(',').filter(|t| !t.trim().is_empty()) {
                    let (ch, l) = item.split_once(':').ok_or_else(|| bad(ln, "lambda items are channel:value"))?;
                    v.push((num(ln, ch)?, num(ln, l)?));
                }
                h.lambda = Some(v);
            }
            other => return Err(bad(ln, format!("unknown header `{other}`"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("keyset header `{what}` missing"));
    match h.version {
        Some(KEYSET_VERSION) => {}
        Some(v) => return Err(Error::Format(format!("unsupported keyset version {v}"))),
        None => return Err(missing("version")),
    }
    let flags = h.flags.ok_or_else(|| missing("flags"))?;
    for f in &flags {
        if !["shift", "lossless", "discretize", "offset"].contains(&f.as_str()) {
            return Err(Error::Format(format!("unknown keyset flag `{f}`")));
        }
    }
    let has = |f: &str| flags.iter().any(|x| x == f);
    let (r_min, r_max) = h.rings.ok_or_else(|| missing("rings"))?;
    let config = WatermarkConfig {
        size: h.size.ok_or_else(|| missing("N"))?,
        ring_channel: h.ring_channel.ok_or_else(|| missing("ring_channel"))?,
        noise_channels: h.noise_channels.ok_or_else(|| missing("noise_channels"))?,
        r_min,
        r_max,
        alpha: h.alpha.ok_or_else(|| missing("alpha"))?,
        eta: h.eta.ok_or_else(|| missing("eta"))?,
        mask_style: h.style.ok_or_else(|| missing("style"))?,
        enable_shift: has("shift"),
        enable_lossless: has("lossless"),
        enable_discretize: has("discretize"),
        baseline_center_offset: has("offset"),
    };
    config.validate().map_err(|e| Error::Format(e.to_string()))?;
    let mut keys = Vec::with_capacity(records.len());
    for (ln, rec) in records {
        let mut parts = rec.split_whitespace();
        let index: u64 = num(ln, parts.next().ok_or_else(|| bad(ln, "missing key index"))?)?;
        let (mut bits, mut seed) = (None, None);
        for p in parts {
            match p.split_once('=') {
                Some(("bits", b)) => bits = Some(b.to_string()),
                Some(("noise_seed", s)) => seed = Some(num::<u64>(ln, s)?),
                _ => return Err(bad(ln, format!("unexpected field `{p}`"))),
            }
        }
        let bits = bits.ok_or_else(|| bad(ln, "missing bits"))?;
        let ring = RingKey::from_bit_str(&bits, config.alpha).map_err(|e| bad(ln, e))?;
        if ring.bits.len() != config.rings() {
            return Err(bad(ln, format!("{} bits for {} rings", ring.bits.len(), config.rings())));
        }
        if ring.key_index != index {
            return Err(bad(ln, format!("bits encode {} but index is {index}", ring.key_index)));
        }
        let noise = NoiseKey { seed: seed.ok_or_else(|| bad(ln, "missing noise_seed"))?, channels: config.noise_channels.clone() };
        keys.push(KeyPair { ring, noise });
    }
    let lambda = h.lambda.ok_or_else(|| missing("lambda"))?;
    let seed = h.seed.ok_or_else(|| missing("seed"))?;
    KeySet::new(config, keys, lambda, seed).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_keyset(path: &Path, ks: &KeySet) -> Result<()> {
    fs::write(path, keyset_to_string(ks)).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_keyset(path: &Path) -> Result<KeySet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_keyset(&text)
}
