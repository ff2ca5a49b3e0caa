//! Reference schemes: local ZF, centralized ZF, and the WMMSE target
//! generator.
//!
//! The two zero-forcing baselines return direction-only precoder sets with
//! equal power per served user (callers normalize globally afterwards).
//! Regularization keeps them defined when a cell is overloaded.
//!
//! `wmmse_targets` maximizes the true sum rate under a total power budget by
//! the classic alternating cycle (scalar MMSE receivers, MSE weights, one
//! quadratic precoder solve with a bisected power multiplier) and then reads
//! per-pair targets off the converged precoders through the approximate SINR
//! model. Precoders are restricted to serving sets by solving the quadratic
//! step exactly on the supported blocks; the restricted solve, unlike a
//! zero-out projection, preserves the monotone-utility guarantee of the
//! cycle.

use crate::linalg::{c64, herm_inverse, hermitize, norm_sq, CMat, CVec};
use crate::model::{
    sinr_approx, sinr_true, sum_rate, ChannelSet, NoiseModel, PrecoderSet, TargetSinr, Topology,
};
use num_complex::Complex64;
use rayon::prelude::*;

/// Trace-scaled Tikhonov weight shared by both ZF baselines.
const ZF_REG: f64 = 1e-10;

/// Inverts a Hermitian PSD system, regularizing only when it is singular or
/// too ill-conditioned to trust (the overloaded-cell regime).
fn inv_or_regularized(mut a: CMat) -> CMat {
    let n = a.nrows();
    if let Some(inv) = herm_inverse(&a) {
        let finite = inv.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite && inv.camax() * a.camax() * (n as f64) < 1e12 {
            return inv;
        }
    }
    let reg = ZF_REG * (a.trace().re / n as f64).max(f64::MIN_POSITIVE);
    for d in 0..n {
        a[(d, d)] += c64(reg, 0.0);
    }
    herm_inverse(&a).expect("regularized system is positive definite")
}

/// Floor applied to WMMSE-derived targets so downstream consumers always see
/// strictly positive values even for users the optimizer switched off.
const TARGET_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct WmmseConfig {
    /// Total power budget (Watt). Must be positive.
    pub p_total: f64,
    pub max_iters: usize,
    /// Stop when the relative utility change falls below this.
    pub tol: f64,
}

impl Default for WmmseConfig {
    fn default() -> Self {
        WmmseConfig {
            p_total: 10.0,
            max_iters: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WmmseSolution {
    pub precoders: PrecoderSet,
    pub targets: TargetSinr,
    /// True sum rate of `precoders` (bits per channel use).
    pub sum_rate: f64,
    pub iters: usize,
    /// False when `max_iters` hit before the utility settled; the result is
    /// then the best iterate seen.
    pub converged: bool,
    /// Sum rate after every iteration, for monotonicity inspection.
    pub utility_trace: Vec<f64>,
}

/// Local zero forcing: every BS inverts the Gram matrix of its own served
/// channels and ignores the rest of the network.
///
/// Each served user gets total direction power 1 split equally over its
/// serving BSs; zero channels yield zero precoders.
pub fn zf_decentralized(channels: &ChannelSet, topo: &Topology, _noise: &NoiseModel) -> PrecoderSet {
    let per_bs: Vec<(usize, Vec<CVec>)> = (0..topo.n_bs())
        .into_par_iter()
        .map(|p| (p, zf_columns(channels, topo, p)))
        .collect();
    let mut out = PrecoderSet::zeros(topo);
    for (p, cols) in per_bs {
        for (k, &i) in topo.serving(p).iter().enumerate() {
            let share = 1.0 / (topo.served_by(i).len() as f64).sqrt();
            out.set(topo, i, p, &cols[k] * c64(share, 0.0));
        }
    }
    out
}

/// Unit-norm regularized ZF directions for the users served by BS `p`.
fn zf_columns(channels: &ChannelSet, topo: &Topology, p: usize) -> Vec<CVec> {
    let served = topo.serving(p);
    let u = served.len();
    let h_mat = CMat::from_fn(topo.n_tx(), u, |r, c| channels.h(served[c], p)[r]);
    let gram = h_mat.adjoint() * &h_mat;
    let dirs = &h_mat * inv_or_regularized(gram);
    (0..u)
        .map(|k| {
            let d: CVec = dirs.column(k).into();
            let n = norm_sq(&d).sqrt();
            if n > 0.0 {
                d / c64(n, 0.0)
            } else {
                CVec::zeros(topo.n_tx())
            }
        })
        .collect()
}

/// Stacks `h_iq` over the BSs in `set`, in order.
fn stacked_channel(channels: &ChannelSet, i: usize, set: &[usize], n_tx: usize) -> CVec {
    let mut g = CVec::zeros(set.len() * n_tx);
    for (k, &q) in set.iter().enumerate() {
        g.rows_mut(k * n_tx, n_tx).copy_from(channels.h(i, q));
    }
    g
}

/// Centralized zero forcing over the aggregate network channel.
///
/// User `i`'s aggregate precoder lives on its serving-set blocks and is the
/// regularized least-norm solution nulling the coherent cross term of every
/// other user; the aggregate direction has unit power.
pub fn zf_centralized(channels: &ChannelSet, topo: &Topology, _noise: &NoiseModel) -> PrecoderSet {
    let n_tx = topo.n_tx();
    let n_ue = topo.n_ue();
    let mut out = PrecoderSet::zeros(topo);
    for i in 0..n_ue {
        let set = topo.served_by(i);
        let dim = set.len() * n_tx;
        // Rows: every user's channel stacked over i's serving set.
        let rows: Vec<CVec> = (0..n_ue)
            .map(|j| stacked_channel(channels, j, set, n_tx))
            .collect();
        // Row j is g_j^H, so (G w)_j is the coherent cross term of user j.
        let g = CMat::from_fn(n_ue, dim, |r, c| rows[r][c].conj());
        let a = &g * g.adjoint();
        let mut e = CVec::zeros(n_ue);
        e[i] = c64(1.0, 0.0);
        let y = inv_or_regularized(a) * e;
        let w_agg = g.adjoint() * y;
        let n = norm_sq(&w_agg).sqrt();
        for (k, &q) in set.iter().enumerate() {
            let block: CVec = w_agg.rows(k * n_tx, n_tx).into();
            let w = if n > 0.0 {
                block / c64(n, 0.0)
            } else {
                CVec::zeros(n_tx)
            };
            out.set(topo, i, q, w);
        }
    }
    out
}

/// Eigendecomposed restricted quadratic for one user's precoder step:
/// `x(ν) = Q (Λ+ν)^{-1} y` with `y = Q^H ḡ_j ω_j u_j`.
struct UserStep {
    q: CMat,
    lam: Vec<f64>,
    y: CVec,
}

impl UserStep {
    fn power(&self, nu: f64) -> f64 {
        let mut s = 0.0;
        for (k, &l) in self.lam.iter().enumerate() {
            let y2 = self.y[k].norm_sqr();
            if y2 > 0.0 {
                let d = l + nu;
                s += y2 / (d * d);
            }
        }
        s
    }

    fn solve(&self, nu: f64) -> CVec {
        let scaled = CVec::from_fn(self.y.len(), |k, _| self.y[k] / (self.lam[k] + nu));
        &self.q * scaled
    }
}

/// WMMSE sum-rate target generator (see module docs).
///
/// Panics if `cfg.p_total <= 0`.
pub fn wmmse_targets(
    channels: &ChannelSet,
    topo: &Topology,
    noise: &NoiseModel,
    cfg: &WmmseConfig,
) -> WmmseSolution {
    assert!(cfg.p_total > 0.0, "power budget must be positive");
    let n_tx = topo.n_tx();
    let n_ue = topo.n_ue();
    let full_dim = topo.n_bs() * n_tx;
    let g_full: Vec<CVec> = (0..n_ue)
        .map(|i| {
            let all: Vec<usize> = (0..topo.n_bs()).collect();
            stacked_channel(channels, i, &all, n_tx)
        })
        .collect();
    // Supported coordinate list per user.
    let idx: Vec<Vec<usize>> = (0..n_ue)
        .map(|i| {
            topo.served_by(i)
                .iter()
                .flat_map(|&q| q * n_tx..(q + 1) * n_tx)
                .collect()
        })
        .collect();
    let g_sub: Vec<CVec> = (0..n_ue)
        .map(|i| CVec::from_fn(idx[i].len(), |k, _| g_full[i][idx[i][k]]))
        .collect();

    // Equal-power restricted matched-filter start.
    let mut v: Vec<CVec> = (0..n_ue)
        .map(|i| {
            let n = norm_sq(&g_sub[i]).sqrt();
            if n > 0.0 {
                &g_sub[i] * c64((cfg.p_total / n_ue as f64).sqrt() / n, 0.0)
            } else {
                CVec::zeros(idx[i].len())
            }
        })
        .collect();

    let to_precoders = |v: &[CVec]| {
        let mut prec = PrecoderSet::zeros(topo);
        for (i, vi) in v.iter().enumerate() {
            for (k, &q) in topo.served_by(i).iter().enumerate() {
                prec.set(topo, i, q, vi.rows(k * n_tx, n_tx).into());
            }
        }
        prec
    };

    let mut trace = Vec::new();
    let mut best_rate = f64::NEG_INFINITY;
    let mut best_v = v.clone();
    let mut converged = false;
    let mut iters = 0;
    for it in 0..cfg.max_iters {
        iters = it + 1;
        // Receive coefficients and MSE weights at the current precoders.
        let mut u = vec![Complex64::default(); n_ue];
        let mut omega = vec![0.0f64; n_ue];
        for i in 0..n_ue {
            let mut d = noise.sigma2;
            for j in 0..n_ue {
                let dot: Complex64 = (0..idx[j].len())
                    .map(|k| g_full[i][idx[j][k]].conj() * v[j][k])
                    .sum();
                d += dot.norm_sqr();
            }
            let s: Complex64 = (0..idx[i].len())
                .map(|k| g_sub[i][k].conj() * v[i][k])
                .sum();
            u[i] = s / d;
            let e = 1.0 - s.norm_sqr() / d;
            omega[i] = 1.0 / e;
        }
        // Weighted interference-plus-signal matrix on the full aggregate.
        let mut m = CMat::zeros(full_dim, full_dim);
        for i in 0..n_ue {
            let wgt = omega[i] * u[i].norm_sqr();
            if wgt > 0.0 {
                m.gerc(c64(wgt, 0.0), &g_full[i], &g_full[i], c64(1.0, 0.0));
            }
        }
        // Per-user restricted eigensystems; the power multiplier is then a
        // scalar bisection over closed-form power curves.
        let steps: Vec<UserStep> = (0..n_ue)
            .map(|j| {
                let dim = idx[j].len();
                let m_sub = CMat::from_fn(dim, dim, |r, c| m[(idx[j][r], idx[j][c])]);
                let eig = hermitize(&m_sub).symmetric_eigen();
                let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
                let coef = u[j] * omega[j];
                let y = eig.eigenvectors.adjoint() * (&g_sub[j] * coef);
                UserStep { q: eig.eigenvectors, lam, y }
            })
            .collect();
        let power = |nu: f64| steps.iter().map(|s| s.power(nu)).sum::<f64>();
        let mut nu = 0.0;
        let p0 = power(0.0);
        if !(p0 <= cfg.p_total) {
            let mut hi = 1.0;
            while power(hi) > cfg.p_total {
                hi *= 2.0;
                assert!(hi.is_finite(), "power curve never fell below budget");
            }
            let mut lo = 0.0;
            for _ in 0..128 {
                let mid = 0.5 * (lo + hi);
                if power(mid) > cfg.p_total {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            nu = hi;
        }
        for j in 0..n_ue {
            v[j] = steps[j].solve(nu);
        }

        let rate = sum_rate(&sinr_true(&to_precoders(&v), channels, topo, noise));
        let prev = trace.last().copied();
        trace.push(rate);
        if rate > best_rate {
            best_rate = rate;
            best_v = v.clone();
        }
        if let Some(prev) = prev {
            if (rate - prev).abs() <= cfg.tol * rate.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!(
            "wmmse did not settle within {} iterations; returning best iterate",
            cfg.max_iters
        );
    }

    let precoders = to_precoders(&best_v);
    let gamma: Vec<f64> = sinr_approx(&precoders, channels, topo, noise)
        .iter()
        .map(|g| g.max(TARGET_FLOOR))
        .collect();
    let targets = TargetSinr::new(topo, gamma).expect("approximate SINRs are positive and finite");
    WmmseSolution {
        precoders,
        targets,
        sum_rate: best_rate,
        iters,
        converged,
        utility_trace: trace,
    }
}
