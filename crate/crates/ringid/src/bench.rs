//! Multi-threaded identification benchmark over an attack × key-count grid.
//!
//! Trials are independent and seeded by index, and outcomes are folded in
//! trial order, so results match the single-threaded
//! [`identification_bench`](ringid_core::eval::identification_bench) bit for bit.

use rayon::prelude::*;
use ringid_core::attacks::{ChannelModel, AttackSpec};
use ringid_core::eval::{aggregate, BenchContext, BenchRow};
use ringid_core::imprint::KeySet;

use crate::{Error, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RINGID_THREADS";

/// One column of the grid: a display name and the attack chain.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAttack {
    pub name: String,
    pub attacks: Vec<AttackSpec>,
}

/// Parses `clean,rotate=75,cs=0.75+noise=0.2`: commas separate grid
/// entries, `+` chains attacks inside one entry.
pub fn parse_grid(spec: &str) -> Result<Vec<GridAttack>> {
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|token| {
            let chain = token.replace('+', ",");
            let attacks = ringid_core::attacks::parse_attacks(&chain)
                .map_err(|e| Error::Usage(format!("bad attack `{token}`: {e}")))?;
            Ok(GridAttack { name: token.to_string(), attacks })
        })
        .collect()
}

pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Usage(format!("thread pool: {e}")))
}

/// One row, trials evaluated in parallel.
pub fn bench_row(
    ctx: &BenchContext<'_>,
    name: &str,
    channel: &ChannelModel,
    n_keys: usize,
    trials: usize,
    seed: u64,
) -> Result<BenchRow> {
    if trials == 0 {
        return Err(Error::Usage("trials must be positive".into()));
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| ctx.trial(channel, n_keys, seed, i))
        .collect::<ringid_core::Result<Vec<_>>>()?;
    Ok(aggregate(name, n_keys, seed, &outcomes)?)
}

/// Rows in grid order: attacks outer, key counts inner.
pub fn run_grid(
    keyset: &KeySet,
    grid: &[GridAttack],
    key_counts: &[usize],
    trials: usize,
    inversion_noise: f64,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    for &k in key_counts {
        if k == 0 || k > keyset.len() {
            return Err(Error::Usage(format!("{k} keys requested from a set of {}", keyset.len())));
        }
    }
    let ctx = BenchContext::new(keyset)?;
    pool()?.install(|| {
        let mut rows = Vec::with_capacity(grid.len() * key_counts.len());
        for g in grid {
            let channel = ChannelModel::new(g.attacks.clone(), inversion_noise, 0);
            for &k in key_counts {
                rows.push(bench_row(&ctx, &g.name, &channel, k, trials, seed)?);
            }
        }
        Ok(rows)
    })
}
