//! Deterministic equivalents of the oracle quantities, from covariances only.
//!
//! In the large-antenna regime every random quantity the oracle computes
//! (multipliers, coupling entries, power scalings, interference bounds)
//! concentrates around a deterministic limit that depends on the channel
//! covariance matrices alone. This module computes those limits. No channel
//! realization enters any function here; that is the architectural point,
//! since it is what allows bounds to be agreed on over slow timescales.
//!
//! Normalization convention: the fundamental equations use the resolvent
//! `D_q = N_T I + Σ_k Λ_k Θ_kq / (1 + Λ_k m̄_kq)` with
//! `m̄_kq = Tr(Θ_kq D_q^{-1})`. The stored matrix `T_q` is `N_T D_q^{-1}`,
//! so the equivalent form `m̄_kq = (1/N_T) Tr(Θ_kq T_q)` holds; both
//! normalizations describe the same fixed point and the certification check
//! asserts their agreement.
//!
//! The aggregate `Λ_k = Σ_{r∈T_k} λ̄_kr` sums a user's multipliers over its
//! whole serving set, including in the derivative system below; single-served
//! users make the two readings of the subscript coincide.

use crate::linalg::{c64, herm_inverse, spectral_radius, trace_prod, CMat};
use crate::model::{BoundsKind, CovarianceSet, InterferenceBounds, TargetSinr, Topology};
use crate::udd::MultiplierSet;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeError {
    /// One of the nested fixed points did not settle; for valid statistics
    /// this signals SINR targets infeasible in the large-system limit.
    #[error("{stage} fixed point did not converge within {iters} iterations")]
    NoConvergence { stage: &'static str, iters: usize },
    /// The derivative system's iteration matrix has spectral radius at or
    /// above one, so interference functionals have no stable limit.
    #[error("derivative system unstable at bs {bs} (spectral radius {rho:.6})")]
    UnstableDerivativeSystem { bs: usize, rho: f64 },
    #[error("coupling matrix is singular")]
    SingularCoupling,
    #[error("non-positive power scaling at pair {pair}: targets are infeasible")]
    Infeasible { pair: usize },
}

/// Iteration controls for the nested fixed points.
#[derive(Debug, Clone, Copy)]
pub struct DeConfig {
    pub outer_max_iters: usize,
    /// Relative change of the multipliers below which the outer loop stops.
    pub outer_tol: f64,
    pub inner_max_iters: usize,
    /// Relative change of the resolvent traces below which an inner pass stops.
    pub inner_tol: f64,
    /// Outer iteration count after which updates are damped.
    pub damping_after: usize,
    pub damping: f64,
    /// Required gap between the derivative system's spectral radius and one.
    pub rho_margin: f64,
    /// Relative tolerance of the independent-solve certification.
    pub residual_tol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            outer_max_iters: 1000,
            outer_tol: 1e-10,
            inner_max_iters: 2000,
            inner_tol: 1e-12,
            damping_after: 200,
            damping: 0.5,
            rho_margin: 1e-6,
            residual_tol: 1e-8,
        }
    }
}

/// Everything the deterministic-equivalent pipeline produces.
#[derive(Debug, Clone)]
pub struct DeSolution {
    /// Limits `λ̄_ip` of the dual multipliers, stacked order.
    pub multipliers: MultiplierSet,
    /// Resolvent traces `m̄_iq` for all pairs, row-major `(ue, bs)`.
    pub m_bar: Vec<f64>,
    /// Scaled resolvents `T_q`, one per BS.
    pub t_mats: Vec<CMat>,
    /// Derivative solutions per BS; entry `(k, i)` is the resummed response
    /// of `m̄_kq` to a perturbation along `Θ_iq`.
    pub m_prime: Vec<DMatrix<f64>>,
    /// Coupling limit `F̄`.
    pub coupling: DMatrix<f64>,
    /// Power scaling limits `δ̄`, stacked order.
    pub delta: DVector<f64>,
    pub bounds: InterferenceBounds,
}

fn validate_covariances(cov: &CovarianceSet, topo: &Topology) -> Result<(), DeError> {
    for i in 0..topo.n_ue() {
        for q in 0..topo.n_bs() {
            if cov.theta(i, q).iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(DeError::NoConvergence { stage: "input validation", iters: 0 });
            }
        }
    }
    for &(i, p) in topo.pairs() {
        if cov.theta(i, p).trace().re <= 0.0 {
            let pair = topo.pair_index(i, p).unwrap();
            return Err(DeError::Infeasible { pair });
        }
    }
    Ok(())
}

/// `D_q = N_T I + Σ_k Λ_k Θ_kq / (1 + Λ_k m̄_kq)` from the per-user column of
/// `m̄` at BS `q`.
fn build_d(
    cov: &CovarianceSet,
    topo: &Topology,
    agg: &[f64],
    m_col: &[f64],
    q: usize,
) -> CMat {
    let n = topo.n_tx();
    let mut d = CMat::identity(n, n) * c64(n as f64, 0.0);
    for (k, &lam) in agg.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let denom = 1.0 + lam * m_col[k];
        d += cov.theta(k, q) * c64(lam / denom, 0.0);
    }
    d
}

/// Runs the resolvent-trace fixed point at one BS, updating `m_col` in place.
fn inner_m_fixed_point(
    cov: &CovarianceSet,
    topo: &Topology,
    agg: &[f64],
    q: usize,
    m_col: &mut [f64],
    cfg: &DeConfig,
) -> Result<(), DeError> {
    for _ in 0..cfg.inner_max_iters {
        let d = build_d(cov, topo, agg, m_col, q);
        let d_inv = herm_inverse(&d).expect("resolvent is positive definite");
        let mut change = 0.0f64;
        for (k, mk) in m_col.iter_mut().enumerate() {
            let m_new = trace_prod(cov.theta(k, q), &d_inv).re;
            let rel = (m_new - *mk).abs() / m_new.abs().max(f64::MIN_POSITIVE);
            change = change.max(rel);
            *mk = m_new;
        }
        if change < cfg.inner_tol {
            return Ok(());
        }
    }
    Err(DeError::NoConvergence { stage: "resolvent", iters: cfg.inner_max_iters })
}

/// Certifies the converged traces through an independent solve route.
fn certify_m_bar(
    cov: &CovarianceSet,
    topo: &Topology,
    agg: &[f64],
    m_bar: &[f64],
    tol: f64,
) -> Result<(), DeError> {
    let n_bs = topo.n_bs();
    for q in 0..n_bs {
        let m_col: Vec<f64> = (0..topo.n_ue()).map(|k| m_bar[k * n_bs + q]).collect();
        let d = build_d(cov, topo, agg, &m_col, q);
        let chol = d
            .cholesky()
            .ok_or(DeError::NoConvergence { stage: "certification", iters: 0 })?;
        for (k, &mk) in m_col.iter().enumerate() {
            let x = chol.solve(cov.theta(k, q));
            let tr = x.trace().re;
            if (tr - mk).abs() > tol * mk.abs().max(f64::MIN_POSITIVE) {
                return Err(DeError::NoConvergence { stage: "certification", iters: 0 });
            }
        }
    }
    Ok(())
}

/// Solves the coupled multiplier/trace fixed point from `λ̄ = 1`.
///
/// Returns the multipliers (serving pairs) and the full trace table `m̄`
/// (all pairs, row-major). Each outer step refreshes every `m̄` column to
/// convergence, warm-started from the previous outer iterate.
pub fn de_fixed_point(
    cov: &CovarianceSet,
    topo: &Topology,
    gamma: &TargetSinr,
    cfg: &DeConfig,
) -> Result<(MultiplierSet, Vec<f64>), DeError> {
    validate_covariances(cov, topo)?;
    let n_bs = topo.n_bs();
    let n_ue = topo.n_ue();
    let n_tx = topo.n_tx() as f64;
    let mut lambda = vec![1.0; topo.n_pairs()];
    // The zero-load resolvent value is the natural cold start.
    let mut m_bar: Vec<f64> = (0..n_ue * n_bs)
        .map(|k| cov.theta(k / n_bs, k % n_bs).trace().re / n_tx)
        .collect();
    for it in 0..cfg.outer_max_iters {
        let mut agg = vec![0.0; n_ue];
        for (k, &(i, _)) in topo.pairs().iter().enumerate() {
            agg[i] += lambda[k];
        }
        for q in 0..n_bs {
            let mut m_col: Vec<f64> = (0..n_ue).map(|k| m_bar[k * n_bs + q]).collect();
            inner_m_fixed_point(cov, topo, &agg, q, &mut m_col, cfg)?;
            for k in 0..n_ue {
                m_bar[k * n_bs + q] = m_col[k];
            }
        }
        let eta = if it >= cfg.damping_after { cfg.damping } else { 1.0 };
        let mut change = 0.0f64;
        for (k, &(i, p)) in topo.pairs().iter().enumerate() {
            let m = m_bar[i * n_bs + p];
            if !(m > 0.0) {
                return Err(DeError::Infeasible { pair: k });
            }
            let v = (1.0 - eta) * lambda[k] + eta * gamma.at(k) / m;
            change = change.max((v - lambda[k]).abs() / lambda[k]);
            lambda[k] = v;
        }
        if lambda.iter().any(|v| !v.is_finite() || *v > 1e18) {
            return Err(DeError::NoConvergence { stage: "multiplier", iters: it + 1 });
        }
        if change < cfg.outer_tol {
            let mut agg = vec![0.0; n_ue];
            for (k, &(i, _)) in topo.pairs().iter().enumerate() {
                agg[i] += lambda[k];
            }
            certify_m_bar(cov, topo, &agg, &m_bar, cfg.residual_tol)?;
            return Ok((MultiplierSet::new(topo, lambda, it + 1), m_bar));
        }
    }
    Err(DeError::NoConvergence { stage: "multiplier", iters: cfg.outer_max_iters })
}

/// Scaled resolvent `T_q = N_T D_q^{-1}`, stored explicitly.
///
/// # Panics
///
/// Panics if the inputs are non-finite; `D_q` is positive definite otherwise.
pub fn de_t_matrix(
    cov: &CovarianceSet,
    topo: &Topology,
    agg: &[f64],
    m_bar: &[f64],
    q: usize,
) -> CMat {
    let n_bs = topo.n_bs();
    let m_col: Vec<f64> = (0..topo.n_ue()).map(|k| m_bar[k * n_bs + q]).collect();
    let d = build_d(cov, topo, agg, &m_col, q);
    herm_inverse(&d).expect("resolvent is positive definite") * c64(topo.n_tx() as f64, 0.0)
}

/// Solves the derivative system at BS `q`.
///
/// Entry `(k, i)` of the result resums the response of `m̄_kq` to a rank-one
/// perturbation along `Θ_iq` through all interference chains. Requires the
/// iteration matrix to be a strict contraction.
pub fn de_m_prime(
    cov: &CovarianceSet,
    topo: &Topology,
    agg: &[f64],
    m_bar: &[f64],
    t_q: &CMat,
    q: usize,
    cfg: &DeConfig,
) -> Result<DMatrix<f64>, DeError> {
    let n_ue = topo.n_ue();
    let n_bs = topo.n_bs();
    let n_tx = topo.n_tx() as f64;
    let prods: Vec<CMat> = (0..n_ue).map(|k| cov.theta(k, q) * t_q).collect();
    let mut v = DMatrix::zeros(n_ue, n_ue);
    for h in 0..n_ue {
        for l in 0..=h {
            let tr = trace_prod(&prods[h], &prods[l]).re;
            v[(h, l)] = tr;
            v[(l, h)] = tr;
        }
    }
    let mut l_mat = DMatrix::zeros(n_ue, n_ue);
    for l in 0..n_ue {
        let denom = 1.0 + agg[l] * m_bar[l * n_bs + q];
        let scale = (agg[l] / (n_tx * denom)).powi(2);
        for h in 0..n_ue {
            l_mat[(h, l)] = scale * v[(h, l)];
        }
    }
    let rho = spectral_radius(&l_mat);
    if !(rho < 1.0 - cfg.rho_margin) {
        return Err(DeError::UnstableDerivativeSystem { bs: q, rho });
    }
    let u = v / n_tx;
    let sys = DMatrix::identity(n_ue, n_ue) - l_mat;
    sys.lu().solve(&u).ok_or(DeError::SingularCoupling)
}

/// Builds the coupling limit `F̄` and solves `δ̄ = N_T σ² F̄^{-1} 1`.
pub fn de_coupling_and_delta(
    topo: &Topology,
    gamma: &TargetSinr,
    agg: &[f64],
    m_bar: &[f64],
    m_primes: &[DMatrix<f64>],
    sigma2: f64,
) -> Result<(DMatrix<f64>, DVector<f64>), DeError> {
    let n = topo.n_pairs();
    let n_bs = topo.n_bs();
    let n_tx = topo.n_tx() as f64;
    let mut f = DMatrix::zeros(n, n);
    for (row, &(i, p)) in topo.pairs().iter().enumerate() {
        for (col, &(j, q)) in topo.pairs().iter().enumerate() {
            f[(row, col)] = if col == row {
                let m = m_bar[i * n_bs + p];
                m * m / gamma.at(row)
            } else if j != i {
                let denom = 1.0 + agg[i] * m_bar[i * n_bs + q];
                -m_primes[q][(j, i)] / (n_tx * denom * denom)
            } else {
                0.0
            };
        }
    }
    let rhs = DVector::from_element(n, n_tx * sigma2);
    let delta = f.clone().lu().solve(&rhs).ok_or(DeError::SingularCoupling)?;
    if let Some(k) = delta.iter().position(|v| !(v > &0.0) || !v.is_finite()) {
        return Err(DeError::Infeasible { pair: k });
    }
    Ok((f, delta))
}

/// Runs the whole pipeline: fixed point, resolvents, derivative systems,
/// coupling, power scalings, and the interference bound limits.
pub fn de_bounds(
    cov: &CovarianceSet,
    topo: &Topology,
    gamma: &TargetSinr,
    sigma2: f64,
    cfg: &DeConfig,
) -> Result<DeSolution, DeError> {
    let (multipliers, m_bar) = de_fixed_point(cov, topo, gamma, cfg)?;
    let agg = multipliers.aggregate(topo);
    let n_bs = topo.n_bs();
    let n_ue = topo.n_ue();
    let t_mats: Vec<CMat> = (0..n_bs)
        .map(|q| de_t_matrix(cov, topo, &agg, &m_bar, q))
        .collect();
    let m_prime = (0..n_bs)
        .map(|q| de_m_prime(cov, topo, &agg, &m_bar, &t_mats[q], q, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let (coupling, delta) = de_coupling_and_delta(topo, gamma, &agg, &m_bar, &m_prime, sigma2)?;

    let nt2 = (topo.n_tx() as f64).powi(2);
    let mut tau = vec![0.0; topo.n_pairs()];
    let mut eps = vec![0.0; n_ue * n_bs];
    for q in 0..n_bs {
        for i in 0..n_ue {
            let denom = 1.0 + agg[i] * m_bar[i * n_bs + q];
            let mut acc = 0.0;
            for &j in topo.serving(q) {
                if j == i {
                    continue;
                }
                let col = topo.pair_index(j, q).unwrap();
                acc += delta[col] * m_prime[q][(j, i)];
            }
            // Mathematically non-negative; clamp roundoff.
            let val = (acc / (nt2 * denom * denom)).max(0.0);
            match topo.pair_index(i, q) {
                Some(k) => tau[k] = val,
                None => eps[i * n_bs + q] = val,
            }
        }
    }
    let bounds = InterferenceBounds::new(topo, BoundsKind::DeterministicEquivalent, tau, eps)
        .expect("bound limits are finite and non-negative");
    Ok(DeSolution {
        multipliers,
        m_bar,
        t_mats,
        m_prime,
        coupling,
        delta,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_topology, draw_channel, synth_covariance_with_gains};
    use crate::udd::{self, UddConfig};

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn single_user_closed_form() {
        // One user, Θ = g I: the joint fixed point solves in closed form to
        // m̄ = g (1 - γ / (N_T (1 + γ))), λ̄ = γ / m̄, T = (m̄ / g) I.
        let n_tx = 8;
        let g = 0.7;
        let gamma_v = 2.5;
        let topo = build_topology(1, 1, n_tx, &[vec![0]]).unwrap();
        let cov = synth_covariance_with_gains(&topo, 0.0, &[g]).unwrap();
        let gamma = TargetSinr::uniform(&topo, gamma_v).unwrap();
        let sol = de_bounds(&cov, &topo, &gamma, 0.1, &DeConfig::default()).unwrap();

        let m_expect = g * (1.0 - gamma_v / (n_tx as f64 * (1.0 + gamma_v)));
        assert!(approx_eq(sol.m_bar[0], m_expect, 1e-9));
        assert!(approx_eq(sol.multipliers.at(0), gamma_v / m_expect, 1e-9));
        let t_diag = sol.t_mats[0][(0, 0)].re;
        assert!(approx_eq(t_diag, m_expect / g, 1e-9));
        assert!(approx_eq(
            sol.coupling[(0, 0)],
            m_expect * m_expect / gamma_v,
            1e-9
        ));
        assert!(approx_eq(
            sol.delta[0],
            n_tx as f64 * 0.1 * gamma_v / (m_expect * m_expect),
            1e-8
        ));
        // No other pair exists, so both bound tables are trivial.
        assert!(sol.bounds.tau_at(0) == 0.0);
    }

    #[test]
    fn symmetric_two_user_traces() {
        // Two users with identical unit-trace-per-antenna statistics at one
        // BS: m̄ = 1 - 2γ / (N_T (1 + γ)) by symmetry.
        let n_tx = 10;
        let gamma_v = 1.5;
        let topo = build_topology(1, 2, n_tx, &[vec![0, 1]]).unwrap();
        let cov = synth_covariance_with_gains(&topo, 0.0, &[1.0, 1.0]).unwrap();
        let gamma = TargetSinr::uniform(&topo, gamma_v).unwrap();
        let (mult, m_bar) = de_fixed_point(&cov, &topo, &gamma, &DeConfig::default()).unwrap();
        let m_expect = 1.0 - 2.0 * gamma_v / (n_tx as f64 * (1.0 + gamma_v));
        for (k, &mb) in m_bar.iter().enumerate() {
            assert!(approx_eq(mb, m_expect, 1e-9));
            assert!(approx_eq(mult.at(k), gamma_v / m_expect, 1e-9));
        }
    }

    #[test]
    fn trace_identity_holds_at_convergence() {
        // m̄_iq = (1/N_T) Tr(Θ_iq T_q) ties the two normalizations together.
        let topo = build_topology(2, 4, 12, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
        let gains: Vec<f64> = (0..8).map(|k| 0.3 + 0.15 * k as f64).collect();
        let cov = synth_covariance_with_gains(&topo, 0.5, &gains).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.2).unwrap();
        let (mult, m_bar) = de_fixed_point(&cov, &topo, &gamma, &DeConfig::default()).unwrap();
        let agg = mult.aggregate(&topo);
        for q in 0..2 {
            let t = de_t_matrix(&cov, &topo, &agg, &m_bar, q);
            for i in 0..4 {
                let tr = trace_prod(cov.theta(i, q), &t).re / 12.0;
                assert!(approx_eq(tr, m_bar[i * 2 + q], 1e-9));
            }
        }
    }

    #[test]
    fn m_prime_matches_neumann_resummation() {
        let topo = build_topology(2, 3, 8, &[vec![0, 1], vec![1, 2]]).unwrap();
        let gains: Vec<f64> = (0..6).map(|k| 0.4 + 0.2 * k as f64).collect();
        let cov = synth_covariance_with_gains(&topo, 0.4, &gains).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.0).unwrap();
        let cfg = DeConfig::default();
        let (mult, m_bar) = de_fixed_point(&cov, &topo, &gamma, &cfg).unwrap();
        let agg = mult.aggregate(&topo);
        for q in 0..2 {
            let t = de_t_matrix(&cov, &topo, &agg, &m_bar, q);
            let got = de_m_prime(&cov, &topo, &agg, &m_bar, &t, q, &cfg).unwrap();

            // Independent resummation: M' = Σ_t L^t U truncated once the
            // terms fall below machine noise.
            let n_ue = 3;
            let n_tx = 8.0;
            let prods: Vec<CMat> = (0..n_ue).map(|k| cov.theta(k, q) * &t).collect();
            let mut v = DMatrix::zeros(n_ue, n_ue);
            for h in 0..n_ue {
                for l in 0..n_ue {
                    v[(h, l)] = trace_prod(&prods[h], &prods[l]).re;
                }
            }
            let mut l_mat = DMatrix::zeros(n_ue, n_ue);
            for l in 0..n_ue {
                let denom = 1.0 + agg[l] * m_bar[l * 2 + q];
                for h in 0..n_ue {
                    l_mat[(h, l)] = (agg[l] / (n_tx * denom)).powi(2) * v[(h, l)];
                }
            }
            let u = &v / n_tx;
            let mut acc = u.clone();
            let mut term = u.clone();
            for _ in 0..400 {
                term = &l_mat * term;
                acc += &term;
                if term.amax() < 1e-18 {
                    break;
                }
            }
            assert!((&got - &acc).amax() < 1e-9 * acc.amax().max(1.0));
            // Resummed responses of non-negative chains stay non-negative.
            assert!(got.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn unstable_derivative_system_is_reported() {
        // A resolvent inconsistent with the aggregates makes the iteration
        // matrix expand instead of contract.
        let topo = build_topology(1, 2, 2, &[vec![0, 1]]).unwrap();
        let cov = synth_covariance_with_gains(&topo, 0.0, &[1.0, 1.0]).unwrap();
        let agg = vec![50.0, 50.0];
        let m_bar = vec![0.02, 0.02];
        let t = CMat::identity(2, 2);
        let err = de_m_prime(&cov, &topo, &agg, &m_bar, &t, 0, &DeConfig::default()).unwrap_err();
        assert!(matches!(err, DeError::UnstableDerivativeSystem { bs: 0, .. }));
    }

    #[test]
    fn delta_and_bounds_scale_linearly_with_noise() {
        let topo = build_topology(2, 3, 8, &[vec![0, 1], vec![1, 2]]).unwrap();
        let gains: Vec<f64> = (0..6).map(|k| 0.5 + 0.1 * k as f64).collect();
        let cov = synth_covariance_with_gains(&topo, 0.3, &gains).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.1).unwrap();
        let cfg = DeConfig::default();
        let a = de_bounds(&cov, &topo, &gamma, 0.02, &cfg).unwrap();
        let b = de_bounds(&cov, &topo, &gamma, 0.10, &cfg).unwrap();
        for k in 0..topo.n_pairs() {
            assert!(approx_eq(b.delta[k], 5.0 * a.delta[k], 1e-9));
            assert!(approx_eq(b.bounds.tau_at(k), 5.0 * a.bounds.tau_at(k), 1e-9));
        }
        for i in 0..3 {
            for q in 0..2 {
                if let (Some(ea), Some(eb)) = (a.bounds.eps(&topo, i, q), b.bounds.eps(&topo, i, q))
                {
                    assert!(approx_eq(eb, 5.0 * ea, 1e-9));
                }
            }
        }
    }

    #[test]
    fn infeasible_targets_fail_honestly() {
        // Two users on a single antenna with γ = 3/2 each: the symmetric
        // limit solves m̄ = (1 - γ)/(1 + γ) < 0, so the multipliers diverge.
        let topo = build_topology(1, 2, 1, &[vec![0, 1]]).unwrap();
        let cov = synth_covariance_with_gains(&topo, 0.0, &[1.0, 1.0]).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.5).unwrap();
        let err = de_bounds(&cov, &topo, &gamma, 0.01, &DeConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            DeError::NoConvergence { .. } | DeError::Infeasible { .. }
        ));
    }

    /// Large-antenna agreement with the channel-level oracle. The multiplier
    /// and bound errors must shrink as antennas grow; this is the module-level
    /// miniature of the acceptance trend.
    #[test]
    fn de_approaches_udd_with_antennas() {
        let sizes = [8usize, 32];
        let seeds: Vec<u64> = (0..8).collect();
        let gamma_v = 1.2;
        let sigma2 = 0.05;
        let mut lambda_medians = Vec::new();
        let mut bound_medians = Vec::new();
        for &n_tx in &sizes {
            let topo = build_topology(2, 4, n_tx, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
            let gains: Vec<f64> = (0..8).map(|k| 0.5 + 0.1 * k as f64).collect();
            let cov = synth_covariance_with_gains(&topo, 0.4, &gains).unwrap();
            let gamma = TargetSinr::uniform(&topo, gamma_v).unwrap();
            let de = de_bounds(&cov, &topo, &gamma, sigma2, &DeConfig::default()).unwrap();

            let mut lambda_errs = Vec::new();
            let mut bound_errs = Vec::new();
            for &seed in &seeds {
                let ch = draw_channel(&cov, seed, 0).unwrap();
                let noise = crate::model::NoiseModel { sigma2, snr_db: 0.0 };
                let sol = udd::udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
                let lam_err = (0..topo.n_pairs())
                    .map(|k| {
                        (sol.multipliers.at(k) - de.multipliers.at(k)).abs()
                            / de.multipliers.at(k)
                    })
                    .fold(0.0, f64::max);
                lambda_errs.push(lam_err);
                let mut berr = 0.0f64;
                for k in 0..topo.n_pairs() {
                    let exact = sol.bounds.tau_at(k);
                    let lim = de.bounds.tau_at(k);
                    if lim > 1e-12 {
                        berr = berr.max((exact - lim).abs() / lim);
                    }
                }
                for i in 0..topo.n_ue() {
                    for q in 0..topo.n_bs() {
                        if let (Some(e), Some(l)) =
                            (sol.bounds.eps(&topo, i, q), de.bounds.eps(&topo, i, q))
                        {
                            if l > 1e-12 {
                                berr = berr.max((e - l).abs() / l);
                            }
                        }
                    }
                }
                bound_errs.push(berr);
            }
            let median = |v: &mut Vec<f64>| {
                v.sort_by(f64::total_cmp);
                v[v.len() / 2]
            };
            lambda_medians.push(median(&mut lambda_errs));
            bound_medians.push(median(&mut bound_errs));
        }
        assert!(
            lambda_medians[1] < lambda_medians[0],
            "multiplier error did not shrink: {lambda_medians:?}"
        );
        assert!(
            bound_medians[1] < bound_medians[0],
            "bound error did not shrink: {bound_medians:?}"
        );
        // Per-seed multipliers fluctuate at O(1/sqrt(N_T)) around their
        // limits; at N_T = 32 the max over eight pairs stays well under one.
        assert!(lambda_medians[1] < 0.6, "λ̄ error too large: {lambda_medians:?}");
    }
}
