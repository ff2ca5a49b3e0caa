//! The sweep runner: executes a manifest over its full
//! `(n_tx, seed, β, α, scheme)` grid.
//!
//! Determinism: with timing recording off, the output is a pure function of
//! the manifest and the seed offset. Cells run in parallel but rows are
//! assembled in grid order, so repeated runs produce byte-identical files.
//!
//! DE bound reuse: deterministic-equivalent bounds depend on covariances,
//! targets, and noise, with the noise entering linearly. Under fixed uniform
//! targets they are therefore computed once per `(n_tx, β)` at unit noise
//! and rescaled per seed; under per-seed WMMSE targets they are computed per
//! cell. Either way `de-admm` and `reference` rows of a cell share them.

use super::spec::{ExperimentSpec, NamedTargets, Normalization, TargetsSpec};
use super::{AuditRecord, BenchError, ResultRow, RowError, Scheme};
use crate::admm::{cccp_admm_solve, LocalCsi};
use crate::baselines::{wmmse_targets, zf_centralized, zf_decentralized};
use crate::de::{de_bounds, DeConfig};
use crate::model::{
    calibrate_noise_with, draw_channel, normalize_power, sinr_true, sinr_true_terms, sum_rate,
    total_power, ChannelSet, CovarianceSet, InterferenceBounds, NoiseModel, PrecoderSet,
    TargetSinr, Topology,
};
use crate::udd::{udd_solve, UddConfig};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
    pub audit: Vec<AuditRecord>,
}

/// Returns the coordinates of audit records that consumed a channel of a
/// foreign BS; empty means the decentralization claim held.
pub fn audit_violations(audit: &[AuditRecord]) -> Vec<String> {
    let mut out = Vec::new();
    for rec in audit {
        for &(ue, bs) in &rec.channel_coords {
            if bs != rec.bs {
                out.push(format!(
                    "{} n_tx {} seed {}: solve at bs {} read channel (ue {ue}, bs {bs})",
                    rec.scheme, rec.n_tx, rec.seed, rec.bs
                ));
            }
        }
    }
    out
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> T) -> (T, f64) {
    if enabled {
        let t = Instant::now();
        let v = f();
        (v, t.elapsed().as_secs_f64() * 1e3)
    } else {
        (f(), 0.0)
    }
}

/// DE bounds shared between rows, with the wall time of their computation.
struct DeBundle {
    bounds: InterferenceBounds,
    elapsed_ms: f64,
    /// True when `bounds` were computed at unit noise and must be scaled by
    /// the per-seed σ².
    unit_noise: bool,
}

type DeShared = Result<Arc<DeBundle>, String>;

pub fn run_experiment(
    spec: &ExperimentSpec,
    jobs: Option<usize>,
    seed_offset: u64,
) -> Result<RunOutcome, BenchError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| BenchError::Spec(format!("worker pool: {e}")))?;
    pool.install(|| Ok(run_all(spec, seed_offset)))
}

fn run_all(spec: &ExperimentSpec, seed_offset: u64) -> RunOutcome {
    let schemes = spec.schemes();
    let any_de = schemes.iter().any(|s| s.needs_de());
    let mut out = RunOutcome { rows: Vec::new(), errors: Vec::new(), audit: Vec::new() };
    for &n_tx in &spec.channel.n_tx {
        let topo = match spec.build_topology(n_tx) {
            Ok(t) => t,
            Err(e) => {
                push_grid_errors(&mut out.errors, spec, &schemes, n_tx, None, &e.to_string());
                continue;
            }
        };
        let cov = match spec.build_covariance(&topo) {
            Ok(c) => c,
            Err(e) => {
                push_grid_errors(&mut out.errors, spec, &schemes, n_tx, None, &e.to_string());
                continue;
            }
        };
        // Fixed uniform targets: one DE solve per β at unit noise, shared by
        // every seed.
        let de_fixed: Option<Vec<DeShared>> = match spec.run.targets {
            TargetsSpec::Uniform(g) if any_de => Some(
                spec.run
                    .beta
                    .iter()
                    .map(|&beta| {
                        let gamma = TargetSinr::uniform(&topo, g)
                            .and_then(|t| t.scaled(beta))
                            .map_err(|e| e.to_string())?;
                        let (res, ms) = timed(spec.run.record_timing, || {
                            de_bounds(&cov, &topo, &gamma, 1.0, &DeConfig::default())
                        });
                        res.map(|sol| {
                            Arc::new(DeBundle {
                                bounds: sol.bounds,
                                elapsed_ms: ms,
                                unit_noise: true,
                            })
                        })
                        .map_err(|e| e.to_string())
                    })
                    .collect(),
            ),
            _ => None,
        };
        let cells: Vec<CellOut> = spec
            .run
            .seeds
            .par_iter()
            .map(|&seed| {
                run_cell(CellCtx {
                    spec,
                    schemes: &schemes,
                    topo: &topo,
                    cov: &cov,
                    n_tx,
                    seed: seed + seed_offset,
                    de_fixed: de_fixed.as_deref(),
                })
            })
            .collect();
        for cell in cells {
            out.rows.extend(cell.rows);
            out.errors.extend(cell.errors);
            out.audit.extend(cell.audit);
        }
    }
    out
}

fn push_grid_errors(
    errors: &mut Vec<RowError>,
    spec: &ExperimentSpec,
    schemes: &[Scheme],
    n_tx: usize,
    seed: Option<u64>,
    message: &str,
) {
    let seeds: Vec<u64> = match seed {
        Some(s) => vec![s],
        None => spec.run.seeds.clone(),
    };
    for &seed in &seeds {
        for &beta in &spec.run.beta {
            for &alpha in &spec.run.alpha {
                for &scheme in schemes {
                    errors.push(RowError {
                        scheme,
                        n_tx,
                        seed,
                        alpha,
                        beta,
                        message: message.to_string(),
                    });
                }
            }
        }
    }
}

struct CellCtx<'a> {
    spec: &'a ExperimentSpec,
    schemes: &'a [Scheme],
    topo: &'a Topology,
    cov: &'a CovarianceSet,
    n_tx: usize,
    seed: u64,
    de_fixed: Option<&'a [DeShared]>,
}

struct CellOut {
    rows: Vec<ResultRow>,
    errors: Vec<RowError>,
    audit: Vec<AuditRecord>,
}

fn run_cell(ctx: CellCtx<'_>) -> CellOut {
    let spec = ctx.spec;
    let mut out = CellOut { rows: Vec::new(), errors: Vec::new(), audit: Vec::new() };
    let fail_all = |out: &mut CellOut, msg: &str| {
        push_grid_errors(&mut out.errors, spec, ctx.schemes, ctx.n_tx, Some(ctx.seed), msg);
    };

    let ch = match draw_channel(ctx.cov, ctx.seed, 0) {
        Ok(c) => c,
        Err(e) => {
            fail_all(&mut out, &format!("channel draw: {e}"));
            return out;
        }
    };
    let noise = match calibrate_noise_with(&ch, ctx.topo, spec.run.snr_db, spec.run.noise_mode.into())
    {
        Ok(n) => n,
        Err(e) => {
            fail_all(&mut out, &format!("noise calibration: {e}"));
            return out;
        }
    };
    let base_targets = match spec.run.targets {
        TargetsSpec::Named(NamedTargets::Wmmse) => {
            wmmse_targets(&ch, ctx.topo, &noise, &spec.wmmse_config()).targets
        }
        TargetsSpec::Uniform(g) => match TargetSinr::uniform(ctx.topo, g) {
            Ok(t) => t,
            Err(e) => {
                fail_all(&mut out, &format!("targets: {e}"));
                return out;
            }
        },
    };

    // β- and α-independent pieces.
    let rec = spec.run.record_timing;
    let zf_local = ctx.schemes.contains(&Scheme::ZfLocal).then(|| {
        timed(rec, || zf_decentralized(&ch, ctx.topo, &noise))
    });
    let need_anchor = spec.run.normalization == Normalization::Rate;
    let zf_central = (ctx.schemes.contains(&Scheme::ZfCentral) || need_anchor)
        .then(|| timed(rec, || zf_centralized(&ch, ctx.topo, &noise)));
    let anchor_rate = if need_anchor {
        let (zc, _) = zf_central.as_ref().expect("anchor needs zf-central");
        match normalize_power(zc, spec.run.p_total) {
            Ok(prec) => Some(sum_rate(&sinr_true(&prec, &ch, ctx.topo, &noise))),
            Err(e) => {
                fail_all(&mut out, &format!("rate anchor: {e}"));
                return out;
            }
        }
    } else {
        None
    };

    for (bi, &beta) in spec.run.beta.iter().enumerate() {
        let gamma = match base_targets.scaled(beta) {
            Ok(g) => g,
            Err(e) => {
                for &alpha in &spec.run.alpha {
                    for &scheme in ctx.schemes {
                        out.errors.push(RowError {
                            scheme,
                            n_tx: ctx.n_tx,
                            seed: ctx.seed,
                            alpha,
                            beta,
                            message: format!("target scaling: {e}"),
                        });
                    }
                }
                continue;
            }
        };
        let udd = ctx.schemes.contains(&Scheme::Udd).then(|| {
            timed(rec, || udd_solve(&ch, ctx.topo, &gamma, &noise, &UddConfig::default()))
        });
        let de_shared: Option<DeShared> = if ctx.schemes.iter().any(|s| s.needs_de()) {
            Some(match ctx.de_fixed {
                Some(cache) => cache[bi].clone(),
                None => {
                    let (res, ms) = timed(rec, || {
                        de_bounds(ctx.cov, ctx.topo, &gamma, noise.sigma2, &DeConfig::default())
                    });
                    res.map(|sol| {
                        Arc::new(DeBundle {
                            bounds: sol.bounds,
                            elapsed_ms: ms,
                            unit_noise: false,
                        })
                    })
                    .map_err(|e| e.to_string())
                }
            })
        } else {
            None
        };

        for &alpha in &spec.run.alpha {
            for &scheme in ctx.schemes {
                let built: Result<(PrecoderSet, f64, f64), String> = match scheme {
                    Scheme::ZfLocal => {
                        let (w, ms) = zf_local.as_ref().expect("requested");
                        Ok((w.clone(), 0.0, *ms))
                    }
                    Scheme::ZfCentral => {
                        let (w, ms) = zf_central.as_ref().expect("requested");
                        Ok((w.clone(), 0.0, *ms))
                    }
                    Scheme::Udd => {
                        let (res, ms) = udd.as_ref().expect("requested");
                        res.as_ref()
                            .map(|sol| (sol.precoders.clone(), 0.0, *ms))
                            .map_err(|e| format!("udd: {e}"))
                    }
                    Scheme::DeAdmm | Scheme::Reference => solve_decentralized(
                        &ctx,
                        &ch,
                        &noise,
                        &gamma,
                        de_shared.as_ref().expect("requested"),
                        alpha,
                        scheme,
                        &mut out.audit,
                    ),
                };
                match built.and_then(|(raw, bounds_ms, solve_ms)| {
                    finish_row(
                        spec,
                        ctx.topo,
                        &ch,
                        &noise,
                        anchor_rate,
                        scheme,
                        ctx.n_tx,
                        ctx.seed,
                        alpha,
                        beta,
                        raw,
                        bounds_ms,
                        solve_ms,
                    )
                }) {
                    Ok(row) => out.rows.push(row),
                    Err(message) => out.errors.push(RowError {
                        scheme,
                        n_tx: ctx.n_tx,
                        seed: ctx.seed,
                        alpha,
                        beta,
                        message,
                    }),
                }
            }
        }
    }
    out
}

/// Per-BS solves for one decentralized row: DE bounds scaled by α (and by
/// σ² when the shared bounds were computed at unit noise), one CCCP-ADMM
/// solve per BS from local CSI only, audit records appended.
#[allow(clippy::too_many_arguments)]
fn solve_decentralized(
    ctx: &CellCtx<'_>,
    ch: &ChannelSet,
    noise: &NoiseModel,
    gamma: &TargetSinr,
    de_shared: &DeShared,
    alpha: f64,
    scheme: Scheme,
    audit: &mut Vec<AuditRecord>,
) -> Result<(PrecoderSet, f64, f64), String> {
    let bundle = de_shared.as_ref().map_err(|e| format!("de bounds: {e}"))?;
    let scale = if bundle.unit_noise { alpha * noise.sigma2 } else { alpha };
    let bounds = bundle.bounds.scaled(scale).map_err(|e| e.to_string())?;
    let cfg = ctx.spec.admm_config(scheme);
    let rec = ctx.spec.run.record_timing;
    let solves: Vec<(usize, Vec<(usize, usize)>, Result<crate::admm::BsSolution, String>, f64)> =
        (0..ctx.topo.n_bs())
            .into_par_iter()
            .map(|p| {
                let local = LocalCsi::from_channels(ch, p);
                let coords = local.coordinates();
                let (res, ms) = timed(rec, || {
                    cccp_admm_solve(&local, ctx.topo, gamma, &bounds, noise, &cfg, None)
                });
                (p, coords, res.map_err(|e| e.to_string()), ms)
            })
            .collect();
    let mut prec = PrecoderSet::zeros(ctx.topo);
    let mut solve_ms = 0.0;
    for (p, coords, res, ms) in solves {
        audit.push(AuditRecord {
            scheme,
            n_tx: ctx.n_tx,
            seed: ctx.seed,
            bs: p,
            channel_coords: coords,
        });
        let sol = res.map_err(|e| format!("bs {p}: {e}"))?;
        for (u, &i) in ctx.topo.serving(p).iter().enumerate() {
            prec.set(ctx.topo, i, p, sol.w[u].clone());
        }
        solve_ms += ms;
    }
    Ok((prec, bundle.elapsed_ms, solve_ms))
}

/// Normalizes a raw precoder set per the manifest and measures the row.
#[allow(clippy::too_many_arguments)]
fn finish_row(
    spec: &ExperimentSpec,
    topo: &Topology,
    ch: &ChannelSet,
    noise: &NoiseModel,
    anchor_rate: Option<f64>,
    scheme: Scheme,
    n_tx: usize,
    seed: u64,
    alpha: f64,
    beta: f64,
    raw: PrecoderSet,
    time_bounds_ms: f64,
    time_solve_ms: f64,
) -> Result<ResultRow, String> {
    let prec = match spec.run.normalization {
        Normalization::Power => {
            normalize_power(&raw, spec.run.p_total).map_err(|e| e.to_string())?
        }
        Normalization::Rate => {
            let target = anchor_rate.expect("anchor computed in rate mode");
            if scheme == Scheme::ZfCentral {
                // The anchor itself runs at the reference power.
                normalize_power(&raw, spec.run.p_total).map_err(|e| e.to_string())?
            } else {
                let terms = sinr_true_terms(&raw, ch, topo);
                let rate_at = |c: f64| {
                    let sinr: Vec<f64> =
                        terms.iter().map(|t| t.at_scale(c, noise.sigma2)).collect();
                    sum_rate(&sinr)
                };
                let mut hi = 1.0;
                let mut grow = 0;
                while rate_at(hi) < target {
                    hi *= 2.0;
                    grow += 1;
                    if grow > 60 {
                        return Err(format!(
                            "anchor rate {target:.3} unreachable (interference ceiling {:.3})",
                            rate_at(hi)
                        ));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if rate_at(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let c = 0.5 * (lo + hi);
                if (rate_at(c) - target).abs() > 1e-3 * target {
                    return Err("rate normalization did not converge".into());
                }
                raw.scale(c)
            }
        }
    };
    let sinr = sinr_true(&prec, ch, topo, noise);
    Ok(ResultRow {
        scheme,
        n_tx,
        seed,
        alpha,
        beta,
        sum_rate: sum_rate(&sinr),
        total_power: total_power(&prec),
        per_ue_sinr: sinr,
        time_bounds_ms,
        time_solve_ms,
    })
}
