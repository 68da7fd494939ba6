//! Rank of the monomial map over a sweep of coupler draws.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::RankReport;
use crate::ngrc::FeatureVectorLayout;
use crate::photonic::{coupler_matrix, coupler_rank, CouplerKind};
use crate::textfmt::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRank {
    pub seed: u64,
    pub rank: usize,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankCheckReport {
    pub n: usize,
    pub m: usize,
    pub kind: CouplerKind,
    pub seed: u64,
    /// `1 + n + n(n+1)/2`
    pub monomials: usize,
    /// `min(m, monomials)`
    pub required: usize,
    /// Full analysis of the base seed.
    pub base: RankReport,
    pub sweep: Vec<SeedRank>,
}

impl RankCheckReport {
    /// Fewer ports than monomials: the map can never reach full column rank.
    pub fn under_complete(&self) -> bool {
        self.m < self.monomials
    }

    pub fn base_is_full(&self) -> bool {
        self.base.rank == self.required
    }

    pub fn full_rank_fraction(&self) -> f64 {
        let full = self.sweep.iter().filter(|s| s.rank == self.required).count();
        full as f64 / self.sweep.len() as f64
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "kind = {}", self.kind);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "monomials = {}", self.monomials);
        let _ = writeln!(out, "rank = {}", self.base.rank);
        let _ = writeln!(out, "required_rank = {}", self.required);
        let _ = writeln!(out, "condition = {}", fmt_f64(self.base.condition));
        let status = match (self.base_is_full(), self.under_complete()) {
            (false, _) => "degenerate",
            (true, true) => "under-complete",
            (true, false) => "full-rank",
        };
        let _ = writeln!(out, "status = {status}");
        let _ = writeln!(out, "sweep_seeds = {}", self.sweep.len());
        let _ = writeln!(out, "full_rank_fraction = {}", fmt_f64(self.full_rank_fraction()));
        out.push_str("[sweep]\nseed,rank,condition\n");
        for s in &self.sweep {
            let _ = writeln!(out, "{},{},{}", s.seed, s.rank, fmt_f64(s.condition));
        }
        out
    }
}

/// Draws the coupler for `seed, seed+1, .., seed+count-1` (no retries) and
/// reports the numerical rank of each monomial map. `jobs` bounds the worker
/// threads; results do not depend on it.
pub fn rank_check(
    n: usize,
    m: usize,
    kind: CouplerKind,
    seed: u64,
    count: usize,
    jobs: Option<usize>,
) -> Result<RankCheckReport> {
    if count == 0 {
        return Err(Error::InvalidParameter("seed sweep needs at least one seed".into()));
    }
    let monomials = FeatureVectorLayout::new(n).total_dim();
    let one = |s: u64| -> Result<RankReport> { coupler_rank(&coupler_matrix(n, m, kind, s)?) };
    let base = one(seed)?;
    let sweep_one = |i: usize| -> Result<SeedRank> {
        let s = seed.wrapping_add(i as u64);
        let r = one(s)?;
        Ok(SeedRank {
            seed: s,
            rank: r.rank,
            condition: r.condition,
        })
    };
    let sweep: Vec<SeedRank> = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| (0..count).into_par_iter().map(sweep_one).collect::<Result<_>>())?,
        None => (0..count).into_par_iter().map(sweep_one).collect::<Result<_>>()?,
    };
    Ok(RankCheckReport {
        n,
        m,
        kind,
        seed,
        monomials,
        required: m.min(monomials),
        base,
        sweep,
    })
}
