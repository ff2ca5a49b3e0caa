//! Centralized power-minimization oracle via uplink-downlink duality.
//!
//! With full channel knowledge, the SINR-constrained power minimization under
//! the incoherent per-pair SINR model has a closed-form structure: a fixed
//! point over dual multipliers `λ_ip` yields beamforming directions
//! `ŵ_ip = Σ_ip^{-1} h_ip`, and a linear system over a coupling matrix yields
//! the power scalings `δ_ip`. The realized interference of that solution is
//! the set of exact bounds the decentralized pipeline aims to reproduce from
//! statistics alone.
//!
//! The multiplier iteration updates every pair from the previous iterate. One
//! Hermitian factorization per BS serves all of its users through a rank-one
//! downdate; whenever the downdate loses accuracy the pair falls back to a
//! direct solve, and a direct-solve residual check certifies the final fixed
//! point regardless of the path taken.

use crate::linalg::{c64, herm_solve_vec, norm_sq, CMat, CVec};
use crate::model::{
    BoundsKind, ChannelSet, InterferenceBounds, NoiseModel, PrecoderSet, TargetSinr, Topology,
};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UddError {
    /// The multiplier iteration did not settle; for valid channels this
    /// signals infeasible SINR targets.
    #[error("multiplier fixed point did not converge within {iters} iterations (last change {last_change:.3e})")]
    NoConvergence { iters: usize, last_change: f64 },
    #[error("Hermitian solve failed or lost accuracy at pair (ue {ue}, bs {bs})")]
    SingularSystem { ue: usize, bs: usize },
    #[error("coupling matrix is singular")]
    SingularCoupling,
    #[error("non-positive power scaling at pair {pair}: targets are infeasible")]
    Infeasible { pair: usize },
}

/// Iteration controls for the multiplier fixed point.
#[derive(Debug, Clone, Copy)]
pub struct UddConfig {
    pub max_iters: usize,
    /// Relative change below which the iteration is considered converged.
    pub tol: f64,
    /// Iteration count after which updates are damped.
    pub damping_after: usize,
    pub damping: f64,
    /// Relative tolerance of the direct-solve residual certification.
    pub residual_tol: f64,
}

impl Default for UddConfig {
    fn default() -> Self {
        UddConfig {
            max_iters: 2000,
            tol: 1e-12,
            damping_after: 200,
            damping: 0.5,
            residual_tol: 1e-8,
        }
    }
}

/// Dual multipliers for every serving pair, in stacked order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSet {
    lambda: Vec<f64>,
    iters: usize,
}

impl MultiplierSet {
    /// Wraps externally computed multipliers (the deterministic-equivalent
    /// pipeline produces them from statistics).
    ///
    /// # Panics
    ///
    /// Panics unless there is one positive finite value per serving pair.
    pub fn new(topo: &Topology, lambda: Vec<f64>, iters: usize) -> MultiplierSet {
        assert_eq!(lambda.len(), topo.n_pairs());
        assert!(lambda.iter().all(|v| v.is_finite() && *v > 0.0));
        MultiplierSet { lambda, iters }
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn at(&self, pair: usize) -> f64 {
        self.lambda[pair]
    }

    pub fn get(&self, topo: &Topology, i: usize, p: usize) -> Option<f64> {
        topo.pair_index(i, p).map(|k| self.lambda[k])
    }

    /// Iterations the fixed point took.
    pub fn iters(&self) -> usize {
        self.iters
    }

    /// Per-user aggregates `Λ_i = Σ_{q∈T_i} λ_iq`.
    pub fn aggregate(&self, topo: &Topology) -> Vec<f64> {
        let mut agg = vec![0.0; topo.n_ue()];
        for (k, &(i, _)) in topo.pairs().iter().enumerate() {
            agg[i] += self.lambda[k];
        }
        agg
    }
}

/// Everything the oracle produces for one channel realization.
#[derive(Debug, Clone)]
pub struct UddSolution {
    pub multipliers: MultiplierSet,
    /// Unnormalized directions `ŵ_ip`, stacked order.
    pub w_hat: Vec<CVec>,
    pub coupling: DMatrix<f64>,
    /// Power scalings `δ_ip`, stacked order.
    pub delta: DVector<f64>,
    pub precoders: PrecoderSet,
    pub bounds: InterferenceBounds,
}

/// `N_T I + Σ_j Λ_j h_jp h_jp^H` over all users, at BS `p`.
fn full_system(channels: &ChannelSet, topo: &Topology, agg: &[f64], p: usize) -> CMat {
    let n = topo.n_tx();
    let mut s = CMat::identity(n, n) * c64(n as f64, 0.0);
    for (j, &lam) in agg.iter().enumerate() {
        if lam > 0.0 {
            let h = channels.h(j, p);
            s.gerc(c64(lam, 0.0), h, h, c64(1.0, 0.0));
        }
    }
    s
}

/// `Σ_ip = N_T I + Σ_{j≠i} Λ_j h_jp h_jp^H`, built directly.
fn sigma_ip(channels: &ChannelSet, topo: &Topology, agg: &[f64], i: usize, p: usize) -> CMat {
    let n = topo.n_tx();
    let mut s = CMat::identity(n, n) * c64(n as f64, 0.0);
    for (j, &lam) in agg.iter().enumerate() {
        if j != i && lam > 0.0 {
            let h = channels.h(j, p);
            s.gerc(c64(lam, 0.0), h, h, c64(1.0, 0.0));
        }
    }
    s
}

/// Downdate threshold under which the shared factorization is abandoned for
/// a direct per-pair solve.
const DOWNDATE_GUARD: f64 = 1e-8;

/// One application of the multiplier map: `λ'_ip = γ_ip / (h_ip^H Σ_ip^{-1} h_ip)`.
fn lambda_map(
    channels: &ChannelSet,
    topo: &Topology,
    gamma: &TargetSinr,
    lambda: &[f64],
) -> Result<Vec<f64>, UddError> {
    let mut agg = vec![0.0; topo.n_ue()];
    for (k, &(i, _)) in topo.pairs().iter().enumerate() {
        agg[i] += lambda[k];
    }
    let mut out = vec![0.0; topo.n_pairs()];
    for p in 0..topo.n_bs() {
        let s = full_system(channels, topo, &agg, p);
        let chol = s.cholesky();
        for &i in topo.serving(p) {
            let k = topo.pair_index(i, p).unwrap();
            let h = channels.h(i, p);
            let m = match &chol {
                Some(c) => {
                    let x = c.solve(h);
                    let q = h.dotc(&x).re;
                    let t = 1.0 - agg[i] * q;
                    if t > DOWNDATE_GUARD {
                        q / t
                    } else {
                        direct_quadratic_form(channels, topo, &agg, i, p)?
                    }
                }
                None => direct_quadratic_form(channels, topo, &agg, i, p)?,
            };
            if !(m > 0.0) {
                return Err(UddError::SingularSystem { ue: i, bs: p });
            }
            out[k] = gamma.at(k) / m;
        }
    }
    Ok(out)
}

fn direct_quadratic_form(
    channels: &ChannelSet,
    topo: &Topology,
    agg: &[f64],
    i: usize,
    p: usize,
) -> Result<f64, UddError> {
    let s = sigma_ip(channels, topo, agg, i, p);
    let h = channels.h(i, p);
    let x = herm_solve_vec(&s, h).ok_or(UddError::SingularSystem { ue: i, bs: p })?;
    Ok(h.dotc(&x).re)
}

/// Solves the dual multiplier fixed point from `λ = 1`.
///
/// The converged iterate is certified by re-evaluating every quadratic form
/// with an independent direct solve.
pub fn solve_lambda_fixed_point(
    channels: &ChannelSet,
    topo: &Topology,
    gamma: &TargetSinr,
    cfg: &UddConfig,
) -> Result<MultiplierSet, UddError> {
    for &(i, p) in topo.pairs() {
        if norm_sq(channels.h(i, p)) <= 0.0 {
            return Err(UddError::SingularSystem { ue: i, bs: p });
        }
    }
    let n_pairs = topo.n_pairs();
    let mut lambda = vec![1.0; n_pairs];
    let mut last_change = f64::INFINITY;
    for it in 0..cfg.max_iters {
        let mapped = lambda_map(channels, topo, gamma, &lambda)?;
        let eta = if it >= cfg.damping_after { cfg.damping } else { 1.0 };
        last_change = 0.0;
        for k in 0..n_pairs {
            let v = (1.0 - eta) * lambda[k] + eta * mapped[k];
            last_change = last_change.max((v - lambda[k]).abs() / lambda[k]);
            lambda[k] = v;
        }
        if lambda.iter().any(|v| !v.is_finite() || *v > 1e18) {
            return Err(UddError::NoConvergence { iters: it + 1, last_change });
        }
        if last_change < cfg.tol {
            certify_fixed_point(channels, topo, gamma, &lambda, cfg.residual_tol)?;
            return Ok(MultiplierSet { lambda, iters: it + 1 });
        }
    }
    Err(UddError::NoConvergence { iters: cfg.max_iters, last_change })
}

fn certify_fixed_point(
    channels: &ChannelSet,
    topo: &Topology,
    gamma: &TargetSinr,
    lambda: &[f64],
    tol: f64,
) -> Result<(), UddError> {
    let mut agg = vec![0.0; topo.n_ue()];
    for (k, &(i, _)) in topo.pairs().iter().enumerate() {
        agg[i] += lambda[k];
    }
    for (k, &(i, p)) in topo.pairs().iter().enumerate() {
        let m = direct_quadratic_form(channels, topo, &agg, i, p)?;
        let g = gamma.at(k);
        if (lambda[k] * m - g).abs() > tol * g {
            return Err(UddError::SingularSystem { ue: i, bs: p });
        }
    }
    Ok(())
}

/// Beamforming directions `ŵ_ip = Σ_ip^{-1} h_ip`, stacked order.
pub fn compute_w_hat(
    channels: &ChannelSet,
    topo: &Topology,
    multipliers: &MultiplierSet,
) -> Result<Vec<CVec>, UddError> {
    let agg = multipliers.aggregate(topo);
    let mut out = vec![CVec::zeros(topo.n_tx()); topo.n_pairs()];
    for p in 0..topo.n_bs() {
        let s = full_system(channels, topo, &agg, p);
        let chol = s.cholesky();
        for &i in topo.serving(p) {
            let k = topo.pair_index(i, p).unwrap();
            let h = channels.h(i, p);
            out[k] = match &chol {
                Some(c) => {
                    let x = c.solve(h);
                    let t = 1.0 - agg[i] * h.dotc(&x).re;
                    if t > DOWNDATE_GUARD {
                        x / c64(t, 0.0)
                    } else {
                        direct_w_hat(channels, topo, &agg, i, p)?
                    }
                }
                None => direct_w_hat(channels, topo, &agg, i, p)?,
            };
        }
    }
    Ok(out)
}

fn direct_w_hat(
    channels: &ChannelSet,
    topo: &Topology,
    agg: &[f64],
    i: usize,
    p: usize,
) -> Result<CVec, UddError> {
    let s = sigma_ip(channels, topo, agg, i, p);
    herm_solve_vec(&s, channels.h(i, p)).ok_or(UddError::SingularSystem { ue: i, bs: p })
}

/// The real coupling matrix tying power scalings to SINR targets.
///
/// Row `(i, p)`, column `(j, q)`: the diagonal carries the desired-signal
/// gain over its target, an off-diagonal column with `j ≠ i` carries minus
/// the interference gain from that pair onto user `i`, and columns of the
/// same user at its other serving BSs are zero.
pub fn coupling_matrix(
    channels: &ChannelSet,
    topo: &Topology,
    gamma: &TargetSinr,
    w_hat: &[CVec],
) -> DMatrix<f64> {
    let n = topo.n_pairs();
    let mut f = DMatrix::zeros(n, n);
    for (row, &(i, _p)) in topo.pairs().iter().enumerate() {
        for (col, &(j, q)) in topo.pairs().iter().enumerate() {
            f[(row, col)] = if col == row {
                w_hat[row].dotc(channels.h(i, q)).norm_sqr() / gamma.at(row)
            } else if j != i {
                -w_hat[col].dotc(channels.h(i, q)).norm_sqr()
            } else {
                0.0
            };
        }
    }
    f
}

/// Power scalings `δ = N_T σ² F^{-1} 1`.
pub fn solve_delta(
    coupling: &DMatrix<f64>,
    n_tx: usize,
    sigma2: f64,
) -> Result<DVector<f64>, UddError> {
    let n = coupling.nrows();
    let rhs = DVector::from_element(n, n_tx as f64 * sigma2);
    let delta = coupling
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(UddError::SingularCoupling)?;
    if let Some(k) = delta.iter().position(|v| !(v > &0.0) || !v.is_finite()) {
        return Err(UddError::Infeasible { pair: k });
    }
    Ok(delta)
}

/// Assembles precoders `w_ip = sqrt(δ_ip / N_T) ŵ_ip`.
///
/// # Panics
///
/// Panics if `w_hat` and `delta` do not match the topology.
pub fn udd_precoders(topo: &Topology, w_hat: &[CVec], delta: &DVector<f64>) -> PrecoderSet {
    assert_eq!(w_hat.len(), topo.n_pairs());
    assert_eq!(delta.len(), topo.n_pairs());
    let n_tx = topo.n_tx() as f64;
    let w = w_hat
        .iter()
        .zip(delta.iter())
        .map(|(v, &d)| v * c64((d / n_tx).sqrt(), 0.0))
        .collect();
    PrecoderSet::new(topo, w).expect("stacked precoders match the topology")
}

/// Realized interference of concrete precoders, as bounds.
///
/// For a served user the bound excludes its own pair at that BS; for an
/// unserved user it sums everything the BS transmits.
///
/// # Panics
///
/// Panics if the precoders contain non-finite entries.
pub fn exact_bounds(
    channels: &ChannelSet,
    topo: &Topology,
    precoders: &PrecoderSet,
) -> InterferenceBounds {
    let mut tau = vec![0.0; topo.n_pairs()];
    let mut eps = vec![0.0; topo.n_ue() * topo.n_bs()];
    for i in 0..topo.n_ue() {
        for q in 0..topo.n_bs() {
            let mut own = 0.0;
            let mut all = 0.0;
            for &j in topo.serving(q) {
                let g = channels
                    .h(i, q)
                    .dotc(precoders.get(topo, j, q).unwrap())
                    .norm_sqr();
                all += g;
                if j != i {
                    own += g;
                }
            }
            match topo.pair_index(i, q) {
                Some(k) => tau[k] = own,
                None => eps[i * topo.n_bs() + q] = all,
            }
        }
    }
    InterferenceBounds::new(topo, BoundsKind::Exact, tau, eps)
        .expect("interference sums are finite and non-negative")
}

/// Runs the full oracle: multipliers, directions, power scalings, precoders,
/// and the exact bounds they realize.
pub fn udd_solve(
    channels: &ChannelSet,
    topo: &Topology,
    gamma: &TargetSinr,
    noise: &NoiseModel,
    cfg: &UddConfig,
) -> Result<UddSolution, UddError> {
    let multipliers = solve_lambda_fixed_point(channels, topo, gamma, cfg)?;
    let w_hat = compute_w_hat(channels, topo, &multipliers)?;
    let coupling = coupling_matrix(channels, topo, gamma, &w_hat);
    let delta = solve_delta(&coupling, topo.n_tx(), noise.sigma2)?;
    let precoders = udd_precoders(topo, &w_hat, &delta);
    let bounds = exact_bounds(channels, topo, &precoders);
    Ok(UddSolution {
        multipliers,
        w_hat,
        coupling,
        delta,
        precoders,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_topology, calibrate_noise, draw_channel, sinr_approx, synth_covariance_with_gains,
    };

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn test_case(
        n_bs: usize,
        n_ue: usize,
        n_tx: usize,
        lists: &[Vec<usize>],
        seed: u64,
    ) -> (Topology, ChannelSet) {
        let topo = build_topology(n_bs, n_ue, n_tx, lists).unwrap();
        let gains: Vec<f64> = (0..n_ue * n_bs).map(|k| 0.5 + 0.1 * k as f64).collect();
        let cov = synth_covariance_with_gains(&topo, 0.4, &gains).unwrap();
        (topo.clone(), draw_channel(&cov, seed, 0).unwrap())
    }

    #[test]
    fn single_user_closed_form() {
        // No interferers: Σ = N_T I, so λ = γ N_T / ||h||², ŵ = h / N_T,
        // δ = N_T σ² γ (N_T / ||h||²)².
        let topo = build_topology(1, 1, 3, &[vec![0]]).unwrap();
        let h = CVec::from_vec(vec![c64(1.0, 0.5), c64(-0.5, 0.0), c64(0.0, 2.0)]);
        let ch = ChannelSet::new(1, 1, 3, vec![h.clone()]).unwrap();
        let gamma = TargetSinr::uniform(&topo, 2.0).unwrap();
        let noise = NoiseModel { sigma2: 0.3, snr_db: 0.0 };
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let hn = norm_sq(&h);
        assert!(approx_eq(sol.multipliers.at(0), 2.0 * 3.0 / hn, 1e-10));
        assert!(approx_eq(sol.delta[0], 3.0 * 0.3 * 2.0 * (3.0 / hn).powi(2), 1e-10));
        let g = sinr_approx(&sol.precoders, &ch, &topo, &noise);
        assert!(approx_eq(g[0], 2.0, 1e-10));
    }

    #[test]
    fn scalar_two_user_frozen_values() {
        // One antenna, unit channels, γ = 1/2 for both users: the fixed point
        // is λ = 1 exactly, ŵ = 1/2, F = [[1/2, -1/4], [-1/4, 1/2]],
        // δ = 4σ², w = σ, realized SINR = σ²/(σ² + σ²) = 1/2.
        let topo = build_topology(1, 2, 1, &[vec![0, 1]]).unwrap();
        let one = CVec::from_vec(vec![c64(1.0, 0.0)]);
        let ch = ChannelSet::new(2, 1, 1, vec![one.clone(), one]).unwrap();
        let gamma = TargetSinr::uniform(&topo, 0.5).unwrap();
        let sigma2 = 0.09;
        let noise = NoiseModel { sigma2, snr_db: 0.0 };
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        for k in 0..2 {
            assert!(approx_eq(sol.multipliers.at(k), 1.0, 1e-10));
            assert!(approx_eq(sol.delta[k], 4.0 * sigma2, 1e-10));
            assert!(approx_eq(sol.precoders.at(k)[0].re, sigma2.sqrt(), 1e-10));
            assert!(approx_eq(sol.coupling[(k, k)], 0.5, 1e-10));
            assert!(approx_eq(sol.coupling[(k, 1 - k)], -0.25, 1e-10));
            // Each user's tau is the other user's full power.
            assert!(approx_eq(sol.bounds.tau_at(k), sigma2, 1e-10));
        }
    }

    #[test]
    fn infeasible_scalar_targets_diverge() {
        // Two users on one antenna with γ = 3/2 each has no solution; the
        // multiplier map is λ = γ(1 + λ) which diverges for γ ≥ 1.
        let topo = build_topology(1, 2, 1, &[vec![0, 1]]).unwrap();
        let one = CVec::from_vec(vec![c64(1.0, 0.0)]);
        let ch = ChannelSet::new(2, 1, 1, vec![one.clone(), one]).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.5).unwrap();
        let err = solve_lambda_fixed_point(&ch, &topo, &gamma, &UddConfig::default()).unwrap_err();
        assert!(matches!(err, UddError::NoConvergence { .. }));
    }

    #[test]
    fn orthogonal_users_decouple() {
        let topo = build_topology(1, 2, 4, &[vec![0, 1]]).unwrap();
        let mut h0 = CVec::zeros(4);
        h0[0] = c64(2.0, 0.0);
        let mut h1 = CVec::zeros(4);
        h1[1] = c64(0.0, 1.5);
        let ch = ChannelSet::new(2, 1, 4, vec![h0.clone(), h1.clone()]).unwrap();
        let gamma = TargetSinr::new(&topo, vec![1.0, 3.0]).unwrap();
        let noise = NoiseModel { sigma2: 0.2, snr_db: 0.0 };
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        // Rank-one terms of an orthogonal user drop out of the quadratic form.
        assert!(approx_eq(sol.multipliers.at(0), 1.0 * 4.0 / norm_sq(&h0), 1e-10));
        assert!(approx_eq(sol.multipliers.at(1), 3.0 * 4.0 / norm_sq(&h1), 1e-10));
        assert!(approx_eq(sol.coupling[(0, 1)], 0.0, 1e-20));
        assert!(sol.bounds.tau_at(0).abs() < 1e-20);
    }

    #[test]
    fn fixed_point_satisfies_duality_identity() {
        // At the fixed point, h_ip^H ŵ_ip = γ_ip / λ_ip.
        let (topo, ch) = test_case(2, 4, 5, &[vec![0, 1, 2], vec![2, 3]], 7);
        let gamma = TargetSinr::uniform(&topo, 1.2).unwrap();
        let cfg = UddConfig::default();
        let mult = solve_lambda_fixed_point(&ch, &topo, &gamma, &cfg).unwrap();
        let w_hat = compute_w_hat(&ch, &topo, &mult).unwrap();
        for (k, &(i, p)) in topo.pairs().iter().enumerate() {
            let dot = ch.h(i, p).dotc(&w_hat[k]);
            assert!(dot.im.abs() < 1e-9);
            assert!(approx_eq(dot.re, gamma.at(k) / mult.at(k), 1e-8));
        }
    }

    #[test]
    fn realized_sinr_hits_targets_in_overlap_topology() {
        let (topo, ch) = test_case(3, 6, 6, &[vec![0, 1, 2], vec![2, 3, 4], vec![4, 5]], 13);
        let gamma = TargetSinr::new(
            &topo,
            vec![0.8, 1.1, 0.9, 1.4, 0.7, 1.0, 1.3, 0.6],
        )
        .unwrap();
        let noise = calibrate_noise(&ch, &topo, 20.0).unwrap();
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let g = sinr_approx(&sol.precoders, &ch, &topo, &noise);
        for (k, &gk) in g.iter().enumerate() {
            assert!(
                approx_eq(gk, gamma.at(k), 1e-8),
                "pair {k}: got {gk}, want {}",
                gamma.at(k)
            );
        }
    }

    #[test]
    fn bounds_match_coupling_reconstruction() {
        // τ_iq must equal -(1/N_T) Σ_{j∈U_q\{i}} δ_jq F^{qq}_{ij}, and the
        // target identity γ(τ_own + allowance + σ²) = |h^H w|² must close.
        let (topo, ch) = test_case(2, 4, 5, &[vec![0, 1, 2], vec![2, 3]], 29);
        let gamma = TargetSinr::uniform(&topo, 1.5).unwrap();
        let noise = NoiseModel { sigma2: 0.05, snr_db: 0.0 };
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let n_tx = topo.n_tx() as f64;
        for (row, &(i, q)) in topo.pairs().iter().enumerate() {
            let mut tau = 0.0;
            for (col, &(j, qq)) in topo.pairs().iter().enumerate() {
                if qq == q && j != i {
                    tau -= sol.delta[col] * sol.coupling[(row, col)] / n_tx;
                }
            }
            assert!(approx_eq(sol.bounds.tau_at(row), tau, 1e-9));

            let own = sol.bounds.tau_at(row);
            let allowance = sol.bounds.other_cell_allowance(&topo, i, q);
            let sig = ch.h(i, q).dotc(sol.precoders.at(row)).norm_sqr();
            assert!(approx_eq(
                gamma.at(row) * (own + allowance + noise.sigma2),
                sig,
                1e-8
            ));
        }
    }

    #[test]
    fn multipliers_increase_with_targets() {
        let (topo, ch) = test_case(2, 4, 5, &[vec![0, 1, 2], vec![2, 3]], 37);
        let cfg = UddConfig::default();
        let g1 = TargetSinr::uniform(&topo, 0.9).unwrap();
        let g2 = g1.scaled(1.5).unwrap();
        let m1 = solve_lambda_fixed_point(&ch, &topo, &g1, &cfg).unwrap();
        let m2 = solve_lambda_fixed_point(&ch, &topo, &g2, &cfg).unwrap();
        for k in 0..topo.n_pairs() {
            assert!(m2.at(k) > m1.at(k));
        }
    }

    #[test]
    fn delta_scales_linearly_with_noise() {
        let (topo, ch) = test_case(2, 3, 4, &[vec![0, 1], vec![1, 2]], 41);
        let gamma = TargetSinr::uniform(&topo, 1.0).unwrap();
        let cfg = UddConfig::default();
        let mult = solve_lambda_fixed_point(&ch, &topo, &gamma, &cfg).unwrap();
        let w_hat = compute_w_hat(&ch, &topo, &mult).unwrap();
        let f = coupling_matrix(&ch, &topo, &gamma, &w_hat);
        let d1 = solve_delta(&f, topo.n_tx(), 0.01).unwrap();
        let d2 = solve_delta(&f, topo.n_tx(), 0.07).unwrap();
        for k in 0..topo.n_pairs() {
            assert!(approx_eq(d2[k], 7.0 * d1[k], 1e-10));
        }
    }

    // -- extended-precision re-evaluation -----------------------------------
    //
    // The fixed point is accepted on a 64-bit change criterion. Re-evaluating
    // the multiplier map entirely in double-double arithmetic shows that
    // 64-bit rounding neither fakes the fixed point nor hides a residual.

    mod dd {
        /// Double-double value, |lo| <= ulp(hi)/2.
        #[derive(Debug, Clone, Copy)]
        pub struct Dd {
            pub hi: f64,
            lo: f64,
        }

        fn two_sum(a: f64, b: f64) -> Dd {
            let s = a + b;
            let bb = s - a;
            Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
        }

        fn quick_two_sum(a: f64, b: f64) -> Dd {
            let s = a + b;
            Dd { hi: s, lo: b - (s - a) }
        }

        fn two_prod(a: f64, b: f64) -> Dd {
            let p = a * b;
            Dd { hi: p, lo: a.mul_add(b, -p) }
        }

        impl Dd {
            pub fn from(x: f64) -> Dd {
                Dd { hi: x, lo: 0.0 }
            }

            pub fn add(self, o: Dd) -> Dd {
                let s = two_sum(self.hi, o.hi);
                quick_two_sum(s.hi, s.lo + self.lo + o.lo)
            }

            pub fn sub(self, o: Dd) -> Dd {
                self.add(Dd { hi: -o.hi, lo: -o.lo })
            }

            pub fn mul(self, o: Dd) -> Dd {
                let p = two_prod(self.hi, o.hi);
                quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
            }

            pub fn div(self, o: Dd) -> Dd {
                let q1 = self.hi / o.hi;
                let r1 = self.sub(o.mul(Dd::from(q1)));
                let q2 = r1.hi / o.hi;
                let r2 = r1.sub(o.mul(Dd::from(q2)));
                let q3 = r2.hi / o.hi;
                quick_two_sum(q1, q2).add(Dd::from(q3))
            }
        }

        /// Complex double-double.
        #[derive(Debug, Clone, Copy)]
        pub struct Cdd {
            pub re: Dd,
            pub im: Dd,
        }

        impl Cdd {
            pub fn from(z: num_complex::Complex64) -> Cdd {
                Cdd { re: Dd::from(z.re), im: Dd::from(z.im) }
            }

            pub fn zero() -> Cdd {
                Cdd { re: Dd::from(0.0), im: Dd::from(0.0) }
            }

            pub fn conj(self) -> Cdd {
                Cdd { re: self.re, im: self.im.mul(Dd::from(-1.0)) }
            }

            pub fn add(self, o: Cdd) -> Cdd {
                Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
            }

            pub fn sub(self, o: Cdd) -> Cdd {
                Cdd { re: self.re.sub(o.re), im: self.im.sub(o.im) }
            }

            pub fn mul(self, o: Cdd) -> Cdd {
                Cdd {
                    re: self.re.mul(o.re).sub(self.im.mul(o.im)),
                    im: self.re.mul(o.im).add(self.im.mul(o.re)),
                }
            }

            pub fn div(self, o: Cdd) -> Cdd {
                let d = o.re.mul(o.re).add(o.im.mul(o.im));
                let n = self.mul(o.conj());
                Cdd { re: n.re.div(d), im: n.im.div(d) }
            }

            pub fn abs2(self) -> Dd {
                self.re.mul(self.re).add(self.im.mul(self.im))
            }
        }

        /// Gaussian elimination with partial pivoting, entirely in Cdd.
        // Indexes two rows of `a` at once; an iterator form needs split_at_mut
        // noise for no clarity gain.
        #[allow(clippy::needless_range_loop)]
        pub fn solve(a: &mut [Vec<Cdd>], b: &mut [Cdd]) {
            let n = b.len();
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&r1, &r2| {
                        a[r1][col].abs2().hi.total_cmp(&a[r2][col].abs2().hi)
                    })
                    .unwrap();
                a.swap(col, piv);
                b.swap(col, piv);
                for row in col + 1..n {
                    let f = a[row][col].div(a[col][col]);
                    for k in col..n {
                        a[row][k] = a[row][k].sub(f.mul(a[col][k]));
                    }
                    b[row] = b[row].sub(f.mul(b[col]));
                }
            }
            for col in (0..n).rev() {
                let mut acc = b[col];
                for k in col + 1..n {
                    acc = acc.sub(a[col][k].mul(b[k]));
                }
                b[col] = acc.div(a[col][col]);
            }
        }
    }

    #[test]
    fn fixed_point_survives_double_double_reevaluation() {
        use dd::{Cdd, Dd};

        let (topo, ch) = test_case(2, 4, 6, &[vec![0, 1, 2], vec![2, 3]], 53);
        let gamma = TargetSinr::uniform(&topo, 1.3).unwrap();
        let cfg = UddConfig::default();
        let mult = solve_lambda_fixed_point(&ch, &topo, &gamma, &cfg).unwrap();
        let agg = mult.aggregate(&topo);
        let n = topo.n_tx();

        let f64_map = lambda_map(&ch, &topo, &gamma, mult.values()).unwrap();

        for (k, &(i, p)) in topo.pairs().iter().enumerate() {
            // Build Σ_ip in double-double from the exact f64 inputs.
            let mut a = vec![vec![Cdd::zero(); n]; n];
            for d in 0..n {
                a[d][d] = Cdd::from(c64(n as f64, 0.0));
            }
            for (j, &lam) in agg.iter().enumerate() {
                if j == i || lam == 0.0 {
                    continue;
                }
                let h = ch.h(j, p);
                for r in 0..n {
                    for c in 0..n {
                        let term = Cdd::from(h[r])
                            .mul(Cdd::from(h[c]).conj())
                            .mul(Cdd { re: Dd::from(lam), im: Dd::from(0.0) });
                        a[r][c] = a[r][c].add(term);
                    }
                }
            }
            let h = ch.h(i, p);
            let mut b: Vec<Cdd> = h.iter().map(|&z| Cdd::from(z)).collect();
            dd::solve(&mut a, &mut b);
            let mut m = Dd::from(0.0);
            for r in 0..n {
                m = m.add(Cdd::from(h[r]).conj().mul(b[r]).re);
            }
            let lambda_dd = Dd::from(gamma.at(k)).div(m).hi;

            // The two evaluations of the map agree to near machine precision,
            // and the converged iterate is a genuine fixed point of both.
            assert!(approx_eq(lambda_dd, f64_map[k], 1e-12));
            assert!(approx_eq(lambda_dd, mult.at(k), 1e-9));
        }
    }
}
