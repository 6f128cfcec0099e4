//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ringid_core::attacks::{apply_channel, parse_attacks, ChannelModel};
use ringid_core::detect::Matcher;
use ringid_core::eval::{
    ablation_config, energy_ratio_experiment, shift_factor_experiment, standalone_watermark_experiment,
    variance_halving_experiment, ReferenceMode, MIN_TRIALS, SHIFT_FACTOR,
};
use ringid_core::imprint::{build_keyset, Embedder, KeySet, WatermarkConfig, DEFAULT_CHANNELS};
use ringid_core::patterns::{build_ring_mask, MaskStyle};
use ringid_core::spectral::Latent;
use serde::{Deserialize, Serialize};

use crate::bench::{parse_grid, run_grid};
use crate::format::{load_keyset, load_latent, save_keyset, save_latent};
use crate::report::{bench_csv, manifest_path, roc_csv, RunManifest};
use crate::{Error, Result};

pub const DEFAULT_GRID: &str = "clean,rotate=75,cs=0.75,blur=8,noise=0.1,quant=16,bright=2";

#[derive(Debug, Parser)]
#[command(name = "ringid", version, about = "Ring watermarks for diffusion latents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key set file.
    Keygen(KeygenArgs),
    /// Watermark a latent with one key.
    Embed(EmbedArgs),
    /// Find the best matching key for a latent.
    Identify(IdentifyArgs),
    /// Identification accuracy over an attack × key-count grid.
    Bench(BenchArgs),
    /// Monte-Carlo checks of the imaginary-discard distribution shift.
    ProveShift(ProveShiftArgs),
    /// ROC of the standalone i.i.d.-noise watermark.
    Standalone(StandaloneArgs),
}

/// Watermark configuration: a named preset plus per-field overrides.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigArgs {
    /// full, no_shift, no_lossless, no_rounder, no_discretize or treering.
    #[arg(long, default_value = "full")]
    pub preset: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r_min: Option<usize>,
    #[arg(long)]
    pub r_max: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub ring_channel: Option<usize>,
    /// Comma-separated channel list, or `none`.
    #[arg(long)]
    pub noise_channels: Option<String>,
    /// rounder or naive.
    #[arg(long)]
    pub style: Option<String>,
    #[arg(long)]
    pub no_shift: bool,
    #[arg(long)]
    pub no_lossless: bool,
    #[arg(long)]
    pub no_discretize: bool,
    /// Center rings at (N/2 − 1, N/2).
    #[arg(long)]
    pub offset_center: bool,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<WatermarkConfig> {
        let mut c = ablation_config(&self.preset).map_err(|e| Error::Usage(e.to_string()))?;
        if let Some(n) = self.n {
            c.size = n;
        }
        if let Some(v) = self.r_min {
            c.r_min = v;
        }
        if let Some(v) = self.r_max {
            c.r_max = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.eta {
            c.eta = v;
        }
        if let Some(v) = self.ring_channel {
            c.ring_channel = v;
        }
        if let Some(list) = &self.noise_channels {
            c.noise_channels = if list.trim() == "none" {
                Vec::new()
            } else {
                parse_list(list, "noise channel")?
            };
        }
        if let Some(s) = &self.style {
            c.mask_style = s.parse::<MaskStyle>().map_err(|e| Error::Usage(e.to_string()))?;
        }
        c.enable_shift &= !self.no_shift;
        c.enable_lossless &= !self.no_lossless;
        c.enable_discretize &= !self.no_discretize;
        c.baseline_center_offset |= self.offset_center;
        c.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(c)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Usage(format!("bad {what} `{t}`"))))
        .collect()
}

#[derive(Args, Debug)]
pub struct KeygenArgs {
    #[arg(long)]
    pub keys: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    pub keyset: PathBuf,
    #[arg(long)]
    pub key_index: u64,
    /// Host latent (RLT1).
    #[arg(long, conflicts_with = "sample_latent")]
    pub latent: Option<PathBuf>,
    /// Synthesize a unit-Gaussian host latent from `--seed`.
    #[arg(long)]
    pub sample_latent: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CHANNELS)]
    pub channels: usize,
    /// Lossy single-channel tree-ring imprint instead of the key set's configuration.
    #[arg(long)]
    pub baseline_treering: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub keyset: PathBuf,
    #[arg(long)]
    pub latent: PathBuf,
    /// Attack chain applied before identification, e.g. `rotate=75,noise=0.1`.
    #[arg(long, default_value = "clean")]
    pub attacks: String,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_inv: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the best `k` keys.
    #[arg(long, default_value_t = 0)]
    pub top: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Key set file; built from the configuration flags and `--seed` if absent.
    #[arg(long)]
    pub keyset: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "32,128,2048")]
    pub keys: String,
    /// Comma-separated grid; `+` chains attacks inside one entry.
    #[arg(long, default_value = DEFAULT_GRID)]
    pub attacks: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma_inv: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Replay the arguments recorded in a manifest.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProveShiftArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct StandaloneArgs {
    /// gaussian, zero_l1 or zero_l2.
    #[arg(long, default_value = "zero_l1")]
    pub mode: String,
    /// Channel noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub r_min: usize,
    #[arg(long, default_value_t = 14)]
    pub r_max: usize,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Keygen(a) => keygen(&a, &mut out),
        Command::Embed(a) => embed(&a, &mut out),
        Command::Identify(a) => identify(&a, &mut out),
        Command::Bench(a) => bench(a, &mut out),
        Command::ProveShift(a) => prove_shift(&a, &mut out),
        Command::Standalone(a) => standalone(&a, &mut out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text).map_err(|e| Error::io("stdout", e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn keygen(a: &KeygenArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.config.resolve()?;
    let ks = build_keyset(a.keys, &config, a.seed)?;
    save_keyset(&a.output, &ks)?;
    say(out, format_args!("capacity={}\nkeys={}\n", config.capacity(), ks.len()))?;
    for (ch, l) in &ks.lambda {
        say(out, format_args!("lambda[{ch}]={l:.9e}\n"))?;
    }
    Ok(())
}

fn embed(a: &EmbedArgs, out: &mut dyn Write) -> Result<()> {
    let ks = load_keyset(&a.keyset)?;
    let key = ks.get(a.key_index).ok_or(ringid_core::Error::UnknownKey(a.key_index))?;
    let config = if a.baseline_treering {
        WatermarkConfig { size: ks.config.size, ..WatermarkConfig::tree_ring_baseline() }
    } else {
        ks.config.clone()
    };
    let host = match (&a.latent, a.sample_latent) {
        (Some(p), _) => load_latent(p)?,
        (None, true) => Latent::gaussian(a.channels, config.size, a.seed),
        (None, false) => return Err(Error::Usage("give --latent or --sample-latent".into())),
    };
    let marked = Embedder::new(&config)?.imprint(&host, key)?;
    save_latent(&a.output, &marked)?;

    let mut m = RunManifest::new(
        "embed",
        serde_json::json!({
            "keyset": a.keyset,
            "key_index": a.key_index,
            "latent": a.latent,
            "sample_latent": a.sample_latent,
            "channels": a.channels,
            "baseline_treering": a.baseline_treering,
        }),
    );
    m.config = Some((&config).into());
    m.seeds.insert("latent".into(), a.seed);
    m.artifacts.push(a.output.display().to_string());
    m.save(&manifest_path(&a.output))?;
    say(out, format_args!("embedded key {} into {}\n", a.key_index, a.output.display()))
}

fn identify(a: &IdentifyArgs, out: &mut dyn Write) -> Result<()> {
    let ks = load_keyset(&a.keyset)?;
    let latent = load_latent(&a.latent)?;
    let attacks = parse_attacks(&a.attacks).map_err(|e| Error::Usage(e.to_string()))?;
    if !(a.sigma_inv >= 0.0) {
        return Err(Error::Usage("--sigma-inv must be non-negative".into()));
    }
    let received = apply_channel(&latent, &ChannelModel::new(attacks, a.sigma_inv, a.seed))?;
    let matcher = Matcher::new(&ks)?;
    let res = matcher.identify(&received)?;
    say(out, format_args!("best_key={}\nscore={:.6}\n", res.best_key, res.best_score))?;
    if a.top > 0 {
        say(out, format_args!("rank,key,score"))?;
        for (ch, _) in &res.per_key[0].channel_distances {
            say(out, format_args!(",d{ch}"))?;
        }
        say(out, format_args!("\n"))?;
        for (rank, (key, score)) in res.ranking().into_iter().take(a.top).enumerate() {
            let entry = res.per_key.iter().find(|k| k.key_index == key).expect("ranked key is scored");
            say(out, format_args!("{},{key},{score:.6}", rank + 1))?;
            for (_, d) in &entry.channel_distances {
                say(out, format_args!(",{d:.3}"))?;
            }
            say(out, format_args!("\n"))?;
        }
    }
    Ok(())
}

fn bench_keyset(a: &BenchArgs, max_keys: usize) -> Result<KeySet> {
    match &a.keyset {
        Some(p) => load_keyset(p),
        None => Ok(build_keyset(max_keys, &a.config.resolve()?, a.seed)?),
    }
}

fn bench(mut a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(path) = a.manifest.take() {
        let m = RunManifest::load(&path)?;
        if m.command != "bench" {
            return Err(Error::Format(format!("{} records a `{}` run", path.display(), m.command)));
        }
        let output = a.output.take();
        a = serde_json::from_value(m.args).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if output.is_some() {
            a.output = output;
        }
    }
    let key_counts: Vec<usize> = parse_list(&a.keys, "key count")?;
    let grid = parse_grid(&a.attacks)?;
    if key_counts.is_empty() || grid.is_empty() {
        return Err(Error::Usage("empty --keys or --attacks".into()));
    }
    if a.trials == 0 {
        return Err(Error::Usage("--trials must be positive".into()));
    }
    if !(a.sigma_inv >= 0.0) {
        return Err(Error::Usage("--sigma-inv must be non-negative".into()));
    }
    let ks = bench_keyset(&a, key_counts.iter().copied().max().unwrap_or(1))?;
    let rows = run_grid(&ks, &grid, &key_counts, a.trials, a.sigma_inv, a.seed)?;
    let csv = bench_csv(&rows);
    match &a.output {
        Some(path) => {
            write_text(path, &csv)?;
            let mut m = RunManifest::new("bench", serde_json::to_value(&a).map_err(|e| Error::Format(e.to_string()))?);
            m.config = Some((&ks.config).into());
            m.seeds.insert("trials".into(), a.seed);
            m.seeds.insert("keyset".into(), ks.build_seed);
            m.artifacts.push(path.display().to_string());
            m.save(&manifest_path(path))?;
            say(out, format_args!("wrote {} rows to {}\n", rows.len(), path.display()))
        }
        None => say(out, format_args!("{csv}")),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn prove_shift(a: &ProveShiftArgs, out: &mut dyn Write) -> Result<()> {
    if a.trials < MIN_TRIALS {
        return Err(Error::Usage(format!("--trials must be at least {MIN_TRIALS}")));
    }
    let config = WatermarkConfig { size: a.n, ..WatermarkConfig::default() };
    let mask = build_ring_mask(config.r_min, config.r_max, a.n, config.mask_style)?;
    let shift = shift_factor_experiment(a.n, mask.union(), a.trials, a.seed)?;
    let r = shift.estimate.ratio;
    say(
        out,
        format_args!(
            "shift_ratio={r:.6} ci95={:.6} samples={} target={SHIFT_FACTOR:.4}±0.015 {}\n",
            shift.estimate.ci_halfwidth,
            shift.estimate.samples,
            verdict((r - SHIFT_FACTOR).abs() <= 0.015)
        ),
    )?;
    say(
        out,
        format_args!(
            "unshifted_l1_per_pixel={:.4} expected={:.4}\n",
            shift.unshifted_mean,
            a.n as f64 * (std::f64::consts::PI / 2.0).sqrt()
        ),
    )?;
    let baseline = WatermarkConfig { size: a.n, ..WatermarkConfig::tree_ring_baseline() };
    let energy = energy_ratio_experiment(&baseline, a.trials, a.seed)?;
    say(
        out,
        format_args!(
            "energy_ratio={:.6} ci95={:.6} samples={} target=0.50±0.02 {}\n",
            energy.ratio,
            energy.ci_halfwidth,
            energy.samples,
            verdict((energy.ratio - 0.5).abs() <= 0.02)
        ),
    )?;
    let (masked, unmasked) = variance_halving_experiment(a.n, mask.union(), a.trials.min(1000), a.seed)?;
    say(
        out,
        format_args!(
            "masked_variance/N^2={:.6} unmasked_variance/N^2={:.6} target=0.5±5% {}\n",
            masked.ratio,
            unmasked.ratio,
            verdict((masked.ratio / 0.5 - 1.0).abs() <= 0.05)
        ),
    )
}

fn standalone(a: &StandaloneArgs, out: &mut dyn Write) -> Result<()> {
    let mode: ReferenceMode = a.mode.parse().map_err(|e: ringid_core::Error| Error::Usage(e.to_string()))?;
    if a.trials < MIN_TRIALS {
        return Err(Error::Usage(format!("--trials must be at least {MIN_TRIALS}")));
    }
    if !(a.noise >= 0.0) {
        return Err(Error::Usage("--noise must be non-negative".into()));
    }
    let mask = build_ring_mask(a.r_min, a.r_max, a.n, MaskStyle::Rounder)?;
    let channel = ChannelModel::new(Vec::new(), a.noise, 0);
    let roc = standalone_watermark_experiment(mode, mask.union(), a.trials, &channel, a.seed)?;
    say(out, format_args!("mode={mode} auc={:.6} tpr@1%fpr={:.6}\n", roc.auc, roc.tpr_at_1pct_fpr))?;
    if let Some(path) = &a.output {
        write_text(path, &roc_csv(&roc))?;
    }
    Ok(())
}
