//! Detection metrics, identification benchmarks and the Monte-Carlo
//! experiments behind the distribution-shift analysis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::attacks::{apply_channel, ChannelModel};
use crate::detect::{ring_distance, ring_evidence, Matcher};
use crate::imprint::{ring_reference, Embedder, KeyPair, KeySet, WatermarkConfig, DEFAULT_CHANNELS};
use crate::patterns::{MaskStyle, NoiseKey, RingKey};
use crate::rng::{mix64, Xoshiro256StarStar};
use crate::spectral::{dft2, Latent, PixelMask};
use crate::{imprint::imprint_iid_noise, Error, Result};

/// Minimum trial count of the Monte-Carlo experiments.
pub const MIN_TRIALS: usize = 100;

/// `√3 / 2`, the expected distance ratio between shifted and unshifted recoveries.
pub const SHIFT_FACTOR: f64 = 0.866_025_403_784_438_6;

const Z95: f64 = 1.959_963_984_540_054;

fn check_nonempty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        Err(Error::EmptyScores)
    } else {
        Ok(())
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Mann-Whitney AUC with watermarked scores expected lower; ties count half.
pub fn auc(watermarked: &[f64], null: &[f64]) -> Result<f64> {
    check_nonempty(watermarked, null)?;
    let nulls = sorted(null);
    let mut wins = 0.0;
    for &w in watermarked {
        let below_or_eq = nulls.partition_point(|&x| x <= w);
        let below = nulls.partition_point(|&x| x < w);
        wins += (nulls.len() - below_or_eq) as f64 + 0.5 * (below_or_eq - below) as f64;
    }
    Ok(wins / (watermarked.len() as f64 * nulls.len() as f64))
}

/// TPR at the largest threshold `t` (score `< t` is positive) whose
/// empirical FPR does not exceed `target`.
pub fn tpr_at_fpr(watermarked: &[f64], null: &[f64], target: f64) -> Result<f64> {
    check_nonempty(watermarked, null)?;
    let nulls = sorted(null);
    let m = (target * nulls.len() as f64 + 1e-9).floor() as usize;
    if m >= nulls.len() {
        return Ok(1.0);
    }
    let t = nulls[m];
    Ok(watermarked.iter().filter(|&&w| w < t).count() as f64 / watermarked.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub tpr_at_1pct_fpr: f64,
}

impl RocCurve {
    pub fn trapezoid_area(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
    }
}

/// Sweeps every distinct score as a threshold (score `≤ t` is positive).
pub fn roc_curve(watermarked: &[f64], null: &[f64]) -> Result<RocCurve> {
    check_nonempty(watermarked, null)?;
    let (w, n) = (sorted(watermarked), sorted(null));
    let mut points = alloc::vec![(0.0, 0.0)];
    let (mut i, mut j) = (0, 0);
    while i < w.len() || j < n.len() {
        let t = match (w.get(i), n.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < w.len() && w[i] <= t {
            i += 1;
        }
        while j < n.len() && n[j] <= t {
            j += 1;
        }
        points.push((j as f64 / n.len() as f64, i as f64 / w.len() as f64));
    }
    Ok(RocCurve { points, auc: auc(watermarked, null)?, tpr_at_1pct_fpr: tpr_at_fpr(watermarked, null, 0.01)? })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One benchmark trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub correct: bool,
    /// Combined score of the embedded key on the watermarked latent.
    pub match_score: f64,
    /// Combined score of the same key on an unwatermarked latent.
    pub null_score: f64,
}

/// One row of an identification benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub attack: String,
    pub n_keys: usize,
    pub trials: usize,
    pub accuracy: f64,
    pub mean_match: f64,
    pub std_match: f64,
    pub mean_null: f64,
    pub std_null: f64,
    pub seed: u64,
}

/// Shared state for running benchmark trials against one key set.
#[derive(Clone, Debug)]
pub struct BenchContext<'a> {
    matcher: Matcher<'a>,
    embedder: Embedder,
}

impl<'a> BenchContext<'a> {
    pub fn new(keyset: &'a KeySet) -> Result<Self> {
        Ok(Self { matcher: Matcher::new(keyset)?, embedder: Embedder::new(&keyset.config)? })
    }

    pub fn keyset(&self) -> &KeySet {
        self.matcher.keyset()
    }

    /// Trial `index` of a run seeded with `seed`. Streams of
    /// `t = mix64(seed, index)`: 0 host latent, 1 key choice, 2 channel,
    /// 3 null latent, 4 null channel.
    pub fn trial(&self, channel: &ChannelModel, n_keys: usize, seed: u64, index: u64) -> Result<TrialOutcome> {
        let ks = self.keyset();
        let n_keys = n_keys.min(ks.len());
        let t = mix64(seed, index);
        let channels = DEFAULT_CHANNELS.max(ks.config.watermarked_channels().into_iter().max().unwrap_or(0) + 1);
        let n = ks.config.size;
        let pos = Xoshiro256StarStar::seed_from_u64(mix64(t, 1)).below(n_keys as u64) as usize;
        let key = &ks.keys[pos];

        let marked = self.embedder.imprint(&Latent::gaussian(channels, n, mix64(t, 0)), key)?;
        let received = apply_channel(&marked, &channel.with_seed(mix64(t, 2)))?;
        let ev = self.matcher.evidence(&received)?;
        let res = self.matcher.identify_prefix(&ev, n_keys)?;

        let null = apply_channel(&Latent::gaussian(channels, n, mix64(t, 3)), &channel.with_seed(mix64(t, 4)))?;
        let null_ev = self.matcher.evidence(&null)?;
        Ok(TrialOutcome {
            correct: res.best_key == key.key_index(),
            match_score: res.per_key[pos].combined,
            null_score: self.matcher.score_at(&null_ev, pos),
        })
    }
}

/// Folds trial outcomes, in trial order, into a report row.
pub fn aggregate(attack: &str, n_keys: usize, seed: u64, outcomes: &[TrialOutcome]) -> Result<BenchRow> {
    if outcomes.is_empty() {
        return Err(Error::TooFewTrials { got: 0, min: 1 });
    }
    let m: Vec<f64> = outcomes.iter().map(|o| o.match_score).collect();
    let z: Vec<f64> = outcomes.iter().map(|o| o.null_score).collect();
    let (mean_match, std_match) = mean_std(&m);
    let (mean_null, std_null) = mean_std(&z);
    Ok(BenchRow {
        attack: attack.into(),
        n_keys,
        trials: outcomes.len(),
        accuracy: outcomes.iter().filter(|o| o.correct).count() as f64 / outcomes.len() as f64,
        mean_match,
        std_match,
        mean_null,
        std_null,
        seed,
    })
}

/// Identification accuracy over `trials` seeded trials, single-threaded.
pub fn identification_bench(
    keyset: &KeySet,
    channel: &ChannelModel,
    attack_name: &str,
    n_keys: usize,
    trials: usize,
    seed: u64,
) -> Result<BenchRow> {
    if trials == 0 {
        return Err(Error::TooFewTrials { got: 0, min: 1 });
    }
    if n_keys == 0 || n_keys > keyset.len() {
        return Err(Error::Config(format!("{n_keys} keys requested from a set of {}", keyset.len())));
    }
    let ctx = BenchContext::new(keyset)?;
    let outcomes = (0..trials as u64)
        .map(|i| ctx.trial(channel, n_keys, seed, i))
        .collect::<Result<Vec<_>>>()?;
    aggregate(attack_name, n_keys, seed, &outcomes)
}

/// Ratio estimate with a 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub ci_halfwidth: f64,
    /// Pixel samples entering the ratio.
    pub samples: usize,
}

/// `Σa / Σb` over trials; the half-width comes from the delta method on
/// trial-level totals, so correlation inside a trial is accounted for.
fn ratio_of_sums(a: &[f64], b: &[f64], samples: usize) -> RatioEstimate {
    let t = a.len() as f64;
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let ratio = sa / sb;
    let mb = sb / t;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - ratio * y).collect();
    let var = resid.iter().map(|r| r * r).sum::<f64>() / (t - 1.0);
    RatioEstimate { ratio, ci_halfwidth: Z95 * (var / t).sqrt() / mb, samples }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftReport {
    /// `mean ℓ1(X', Z) / mean ℓ1(X̂, Z)`.
    pub estimate: RatioEstimate,
    /// Per-pixel mean `|X' − Z|`.
    pub shifted_mean: f64,
    /// Per-pixel mean `|X̂ − Z|`.
    pub unshifted_mean: f64,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        Err(Error::TooFewTrials { got: trials, min: MIN_TRIALS })
    } else {
        Ok(())
    }
}

/// Per trial: a reference `Z ~ N_C(0, N²)`, an unshifted recovery `X̂` read
/// from a fresh unit-Gaussian plane, and a shifted recovery `X'` read back
/// after [`imprint_iid_noise`] wrote `N_C(0, N²)` values and the real-part
/// roundtrip discarded the imaginary residue.
pub fn shift_factor_experiment(n: usize, mask: &PixelMask, trials: usize, seed: u64) -> Result<ShiftReport> {
    check_trials(trials)?;
    if mask.size() != n || mask.is_empty() {
        return Err(Error::Dimension("mask must be non-empty and match N".into()));
    }
    let sd = n as f64 / core::f64::consts::SQRT_2;
    let (mut a, mut b) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
    for t in 0..trials as u64 {
        let ts = mix64(seed, t);
        let shifted = imprint_iid_noise(&Latent::gaussian(1, n, mix64(ts, 0)), 0, mask, mix64(ts, 1))?;
        let xs = dft2(shifted.plane(0))?;
        let xu = dft2(Latent::gaussian(1, n, mix64(ts, 2)).plane(0))?;
        let mut z = Xoshiro256StarStar::seed_from_u64(mix64(ts, 3));
        let (mut da, mut db) = (0.0, 0.0);
        for (r, c) in mask.iter() {
            let zz = num_complex::Complex64::new(sd * z.gaussian(), sd * z.gaussian());
            da += (xs.get(r, c) - zz).norm();
            db += (xu.get(r, c) - zz).norm();
        }
        a.push(da);
        b.push(db);
    }
    let samples = trials * mask.len();
    let estimate = ratio_of_sums(&a, &b, samples);
    Ok(ShiftReport {
        estimate,
        shifted_mean: a.iter().sum::<f64>() / samples as f64,
        unshifted_mean: b.iter().sum::<f64>() / samples as f64,
    })
}

/// Masked energy after the baseline roundtrip over the energy written.
///
/// Each trial imprints a fresh Gaussian ring key with `config` (normally
/// [`WatermarkConfig::tree_ring_baseline`]) and compares `Σ|X|²` over the
/// mask before and after the real-part projection.
pub fn energy_ratio_experiment(config: &WatermarkConfig, trials: usize, seed: u64) -> Result<RatioEstimate> {
    check_trials(trials)?;
    let embedder = Embedder::new(config)?;
    let channels = config.watermarked_channels().into_iter().max().unwrap_or(0) + 1;
    let (mut after, mut before) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
    for t in 0..trials as u64 {
        let ts = mix64(seed, t);
        let key = KeyPair {
            ring: RingKey::from_index(0, config.rings(), config.alpha)?,
            noise: NoiseKey { seed: mix64(ts, 1), channels: config.noise_channels.clone() },
        };
        let out = embedder.imprint(&Latent::gaussian(channels, config.size, mix64(ts, 0)), &key)?;
        let spec = dft2(out.plane(config.ring_channel))?;
        let written = embedder.written_values(&key);
        before.push(written.iter().map(|v| v.norm_sqr()).sum());
        after.push(embedder.mask().pixels().iter().map(|&(r, c, _)| spec.get(r, c).norm_sqr()).sum());
    }
    Ok(ratio_of_sums(&after, &before, trials * embedder.mask().len()))
}

/// Masked and unmasked complex variance after [`imprint_iid_noise`],
/// each divided by `N²`. Unmasked statistics skip DC, self-conjugate
/// pixels and the conjugate partners of masked pixels.
pub fn variance_halving_experiment(n: usize, mask: &PixelMask, trials: usize, seed: u64) -> Result<(RatioEstimate, RatioEstimate)> {
    check_trials(trials)?;
    let partners = mask.symmetrized();
    let (mut e_in, mut k_in, mut e_out, mut k_out) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in 0..trials as u64 {
        let ts = mix64(seed, t);
        let x = imprint_iid_noise(&Latent::gaussian(1, n, mix64(ts, 0)), 0, mask, mix64(ts, 1))?;
        let spec = dft2(x.plane(0))?;
        let (mut a, mut ka, mut b, mut kb) = (0.0, 0.0, 0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                if crate::spectral::conjugate_index(n, r, c) == (r, c) {
                    continue;
                }
                let e = spec.get(r, c).norm_sqr();
                if mask.contains(r, c) {
                    a += e;
                    ka += 1.0;
                } else if !partners.contains(r, c) {
                    b += e;
                    kb += 1.0;
                }
            }
        }
        let nn = (n * n) as f64;
        e_in.push(a / nn);
        k_in.push(ka);
        e_out.push(b / nn);
        k_out.push(kb);
    }
    let masked = ratio_of_sums(&e_in, &k_in, trials * mask.len());
    let unmasked_px = k_out.iter().sum::<f64>() as usize;
    Ok((masked, ratio_of_sums(&e_out, &k_out, unmasked_px)))
}

/// Control experiments on the ring-channel distance for one channel model.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlRow {
    pub attack: String,
    /// Watermarked vs raw null distances.
    pub auc_control1: f64,
    /// Watermarked vs null distances scaled by `√3/2`.
    pub auc_control2: f64,
    pub mean_watermarked: f64,
    pub mean_null: f64,
    /// `mean_null − mean_watermarked`.
    pub delta_control1: f64,
    /// `√3/2 · mean_null − mean_watermarked`.
    pub delta_control2: f64,
}

impl ControlRow {
    pub fn delta_auc(&self) -> f64 {
        self.auc_control1 - self.auc_control2
    }
}

/// Raw ring-channel ℓ1 distances of watermarked and unwatermarked latents
/// to a fresh per-trial key, under each channel model.
pub fn pipeline_shift_experiment(
    config: &WatermarkConfig,
    channels: &[(String, ChannelModel)],
    trials: usize,
    seed: u64,
) -> Result<Vec<ControlRow>> {
    check_trials(trials)?;
    let embedder = Embedder::new(config)?;
    let mask = embedder.mask().clone();
    let planes = DEFAULT_CHANNELS.max(config.watermarked_channels().into_iter().max().unwrap_or(0) + 1);
    let mut rows = Vec::with_capacity(channels.len());
    for (ci, (name, model)) in channels.iter().enumerate() {
        let base = mix64(seed, ci as u64);
        let (mut wm, mut null) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
        for t in 0..trials as u64 {
            let ts = mix64(base, t);
            let mut pick = Xoshiro256StarStar::seed_from_u64(mix64(ts, 5));
            let key = KeyPair {
                ring: RingKey::from_index(pick.below(config.capacity()), config.rings(), config.alpha)?,
                noise: NoiseKey { seed: pick.next_u64(), channels: config.noise_channels.clone() },
            };
            let reference = ring_reference(config, &key);
            let marked = embedder.imprint(&Latent::gaussian(planes, config.size, mix64(ts, 0)), &key)?;
            let got = apply_channel(&marked, &model.with_seed(mix64(ts, 2)))?;
            let ev = ring_evidence(got.plane(config.ring_channel), &mask, config)?;
            wm.push(ring_distance(&ev, &mask, &reference, config));
            let clean = apply_channel(&Latent::gaussian(planes, config.size, mix64(ts, 3)), &model.with_seed(mix64(ts, 4)))?;
            let ev0 = ring_evidence(clean.plane(config.ring_channel), &mask, config)?;
            null.push(ring_distance(&ev0, &mask, &reference, config));
        }
        let shifted: Vec<f64> = null.iter().map(|d| d * SHIFT_FACTOR).collect();
        let (mw, _) = mean_std(&wm);
        let (mn, _) = mean_std(&null);
        rows.push(ControlRow {
            attack: name.clone(),
            auc_control1: auc(&wm, &null)?,
            auc_control2: auc(&wm, &shifted)?,
            mean_watermarked: mw,
            mean_null: mn,
            delta_control1: mn - mw,
            delta_control2: mn * SHIFT_FACTOR - mw,
        });
    }
    Ok(rows)
}

/// Reference used to score the standalone imaginary-discard watermark.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMode {
    /// ℓ1 to a fresh `N_C(0, N²)` reference.
    Gaussian,
    /// ℓ1 to zero.
    ZeroL1,
    /// Energy, i.e. squared ℓ2 to zero.
    ZeroL2,
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMode::Gaussian => "gaussian",
            ReferenceMode::ZeroL1 => "zero_l1",
            ReferenceMode::ZeroL2 => "zero_l2",
        })
    }
}

impl FromStr for ReferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ReferenceMode::Gaussian),
            "zero_l1" => Ok(ReferenceMode::ZeroL1),
            "zero_l2" => Ok(ReferenceMode::ZeroL2),
            other => Err(Error::Config(format!("unknown reference mode `{other}`"))),
        }
    }
}

/// ROC of the standalone watermark: per trial one latent carries fresh
/// i.i.d. noise in `mask`, another stays clean, both pass `channel`, and the
/// masked spectrum is scored against the chosen reference.
pub fn standalone_watermark_experiment(
    mode: ReferenceMode,
    mask: &PixelMask,
    trials: usize,
    channel: &ChannelModel,
    seed: u64,
) -> Result<RocCurve> {
    check_trials(trials)?;
    let n = mask.size();
    let sd = n as f64 / core::f64::consts::SQRT_2;
    let score = |lat: &Latent, ref_seed: u64| -> Result<f64> {
        let spec = dft2(lat.plane(0))?;
        let mut z = Xoshiro256StarStar::seed_from_u64(ref_seed);
        Ok(mask
            .iter()
            .map(|(r, c)| {
                let v = spec.get(r, c);
                match mode {
                    ReferenceMode::Gaussian => (v - num_complex::Complex64::new(sd * z.gaussian(), sd * z.gaussian())).norm(),
                    ReferenceMode::ZeroL1 => v.norm(),
                    ReferenceMode::ZeroL2 => v.norm_sqr(),
                }
            })
            .sum())
    };
    let (mut wm, mut null) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
    for t in 0..trials as u64 {
        let ts = mix64(seed, t);
        let marked = imprint_iid_noise(&Latent::gaussian(1, n, mix64(ts, 0)), 0, mask, mix64(ts, 1))?;
        wm.push(score(&apply_channel(&marked, &channel.with_seed(mix64(ts, 2)))?, mix64(ts, 5))?);
        let clean = Latent::gaussian(1, n, mix64(ts, 3));
        null.push(score(&apply_channel(&clean, &channel.with_seed(mix64(ts, 4)))?, mix64(ts, 6))?);
    }
    roc_curve(&wm, &null)
}

/// Named single-component removals from the default configuration.
pub fn ablation_config(name: &str) -> Result<WatermarkConfig> {
    let full = WatermarkConfig::default();
    Ok(match name {
        "full" => full,
        "no_shift" => WatermarkConfig { enable_shift: false, ..full },
        "no_lossless" => WatermarkConfig { enable_lossless: false, baseline_center_offset: true, ..full },
        "no_rounder" => WatermarkConfig { mask_style: MaskStyle::Naive, ..full },
        "no_discretize" => WatermarkConfig { enable_discretize: false, ..full },
        "treering" => WatermarkConfig::tree_ring_baseline(),
        other => return Err(Error::Config(format!("unknown ablation `{other}`"))),
    })
}

/// Names accepted by [`ablation_config`].
pub const ABLATIONS: [&str; 6] = ["full", "no_shift", "no_lossless", "no_rounder", "no_discretize", "treering"];
