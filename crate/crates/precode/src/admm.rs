//! Per-BS power minimization under agreed interference bounds.
//!
//! Once scalar bounds `τ`, `ε` are fixed, BS `p` solves its own problem from
//! purely local data: minimize `Σ_{j∈U_p} ||w_jp||²` subject to, per served
//! user `i`, a desired-power constraint assuming every foreign term sits at
//! its bound, a cap `τ_ip` on the interference to its own users, and per
//! unserved user a leakage cap `ε_ip`. The desired-power constraint is
//! non-convex; a CCCP outer loop linearizes it around an anchor and an ADMM
//! inner loop solves each convex piece with closed-form updates.
//!
//! The A-update comes in two flavors. [`AUpdateMode::Paper`] applies the
//! printed closed form, which pins both row constraints at equality; with
//! exact bounds the optimum is tight so this is the natural default, and it
//! is what the single-pass deployment profile uses. [`AUpdateMode::Strict`]
//! solves the row projection exactly by KKT case analysis, which also serves
//! as an independent oracle for the closed form.
//!
//! [`LocalCsi`] is the entire channel knowledge a solver instance receives:
//! it holds one BS column of the channel table and nothing else.

use crate::linalg::{c64, herm_inverse, norm_sq, CMat, CVec};
use crate::model::{ChannelSet, InterferenceBounds, NoiseModel, TargetSinr, Topology};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error("anchor is orthogonal to the channel of pair (ue {ue}, bs {bs}) and the channel is zero")]
    DegenerateAnchor { ue: usize, bs: usize },
    #[error("interference direction degenerate at pair (ue {ue}, bs {bs})")]
    DegenerateDirection { ue: usize, bs: usize },
    #[error("subproblem at bs {bs} infeasible: relative violation {violation:.3e}")]
    InfeasibleSubproblem { bs: usize, violation: f64 },
}

/// Local channel knowledge of one BS: the channels from itself to every user.
///
/// Construction from a [`ChannelSet`] copies exactly one BS column; the type
/// cannot represent a foreign channel, which is what the decentralization
/// audit leans on.
#[derive(Debug, Clone)]
pub struct LocalCsi {
    bs: usize,
    h: Vec<CVec>,
}

impl LocalCsi {
    pub fn from_channels(channels: &ChannelSet, bs: usize) -> LocalCsi {
        LocalCsi {
            bs,
            h: (0..channels.n_ue()).map(|i| channels.h(i, bs).clone()).collect(),
        }
    }

    pub fn new(bs: usize, h: Vec<CVec>) -> LocalCsi {
        LocalCsi { bs, h }
    }

    pub fn bs(&self) -> usize {
        self.bs
    }

    pub fn n_ue(&self) -> usize {
        self.h.len()
    }

    /// Channel from this BS to user `i`.
    pub fn h(&self, i: usize) -> &CVec {
        &self.h[i]
    }

    /// `(ue, bs)` coordinates of every channel held, for audits.
    pub fn coordinates(&self) -> Vec<(usize, usize)> {
        (0..self.h.len()).map(|i| (i, self.bs)).collect()
    }
}

/// A-update flavor; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AUpdateMode {
    Paper,
    Strict,
}

#[derive(Debug, Clone, Copy)]
pub struct AdmmConfig {
    /// CCCP passes (outer).
    pub q1: usize,
    /// ADMM iterations per pass (inner).
    pub q2: usize,
    /// Penalty on served-user consistency constraints.
    pub rho1: f64,
    /// Penalty on unserved-user consistency constraints.
    pub rho2: f64,
    /// CCCP stop threshold on the relative anchor change.
    pub eps: f64,
    pub a_update: AUpdateMode,
    /// When set, a final relative violation above `feas_tol` is an error
    /// instead of a reported number. Single-pass profiles cannot meet it.
    pub require_feasible: bool,
    pub feas_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            q1: 1,
            q2: 1,
            rho1: 0.5,
            rho2: 0.5,
            eps: 1e-8,
            a_update: AUpdateMode::Paper,
            require_feasible: false,
            feas_tol: 1e-2,
        }
    }
}

/// Immutable data of one BS subproblem.
#[derive(Debug, Clone)]
/// One BS subproblem, row-equilibrated.
///
/// Every constraint row touches exactly one channel, so each row is divided
/// by its channel's norm squared: `h` entries here are unit vectors and
/// `tau`/`allow`/`eps_out`/`noise_*` carry the row's `1/|h|^2` factor. The
/// precoders `w` are untouched by this substitution, which keeps the ADMM
/// consensus penalty commensurate with the power objective for every user
/// regardless of pathloss spread.
pub struct BsProblem {
    bs: usize,
    /// Global user ids of the served users, in `U_p` order.
    served: Vec<usize>,
    /// Global user ids of everyone else.
    outside: Vec<usize>,
    h_served: Vec<CVec>,
    h_out: Vec<CVec>,
    gamma: Vec<f64>,
    /// Own intra-set bound per served user.
    tau: Vec<f64>,
    /// Foreign allowance plus noise per served user, `(T_i + σ²)/|h|²`.
    allow: Vec<f64>,
    /// Leakage bound per outside user.
    eps_out: Vec<f64>,
    /// Row-scaled noise, for normalizing served-row violations.
    noise_served: Vec<f64>,
    /// Row-scaled noise, for normalizing leakage violations.
    noise_out: Vec<f64>,
    r_p: CMat,
    rho1: f64,
    rho2: f64,
    a_update: AUpdateMode,
}

impl BsProblem {
    pub fn new(
        local: &LocalCsi,
        topo: &Topology,
        gamma: &TargetSinr,
        bounds: &InterferenceBounds,
        noise: &NoiseModel,
        cfg: &AdmmConfig,
    ) -> BsProblem {
        let p = local.bs();
        let served: Vec<usize> = topo.serving(p).to_vec();
        let outside: Vec<usize> = (0..topo.n_ue()).filter(|i| !topo.serves(p, *i)).collect();
        // Zero channels keep scale 1 and fail later as degenerate anchors.
        let row_scale = |h: &CVec| {
            let s2 = norm_sq(h);
            if s2.is_finite() && s2 > 0.0 { s2 } else { 1.0 }
        };
        let scaled = |i: usize| {
            let h = local.h(i);
            let s2 = row_scale(h);
            (h / c64(s2.sqrt(), 0.0), s2)
        };
        let mut h_served = Vec::with_capacity(served.len());
        let mut s2_served = Vec::with_capacity(served.len());
        for &i in &served {
            let (h, s2) = scaled(i);
            h_served.push(h);
            s2_served.push(s2);
        }
        let mut h_out = Vec::with_capacity(outside.len());
        let mut s2_out = Vec::with_capacity(outside.len());
        for &i in &outside {
            let (h, s2) = scaled(i);
            h_out.push(h);
            s2_out.push(s2);
        }
        let gamma_v = served.iter().map(|&i| gamma.get(topo, i, p).unwrap()).collect();
        let tau = served
            .iter()
            .zip(&s2_served)
            .map(|(&i, s2)| bounds.tau(topo, i, p).unwrap() / s2)
            .collect();
        let allow = served
            .iter()
            .zip(&s2_served)
            .map(|(&i, s2)| (bounds.other_cell_allowance(topo, i, p) + noise.sigma2) / s2)
            .collect();
        let eps_out = outside
            .iter()
            .zip(&s2_out)
            .map(|(&i, s2)| bounds.eps(topo, i, p).unwrap() / s2)
            .collect();
        let equilibrated = LocalCsi {
            bs: p,
            h: (0..topo.n_ue()).map(|i| scaled(i).0).collect(),
        };
        let r_p = precompute_rp(&equilibrated, topo, cfg.rho1, cfg.rho2);
        BsProblem {
            bs: p,
            served,
            outside,
            h_served,
            h_out,
            gamma: gamma_v,
            tau,
            allow,
            eps_out,
            noise_served: s2_served.iter().map(|s2| noise.sigma2 / s2).collect(),
            noise_out: s2_out.iter().map(|s2| noise.sigma2 / s2).collect(),
            r_p,
            rho1: cfg.rho1,
            rho2: cfg.rho2,
            a_update: cfg.a_update,
        }
    }

    pub fn n_served(&self) -> usize {
        self.served.len()
    }

    pub fn r_p(&self) -> &CMat {
        &self.r_p
    }
}

/// Mutable ADMM state for one CCCP pass.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Served-user auxiliary matrix, rows and columns in `U_p` order.
    pub a: CMat,
    /// Outside-user auxiliary matrix, one row per outside user.
    pub b: CMat,
    pub dual_lambda: CMat,
    pub dual_mu: CMat,
    pub w: Vec<CVec>,
    /// Anchor inner products `c_i = h_ip^H w_c,ip`.
    pub anchor_dots: Vec<Complex64>,
    /// Last multipliers of the linearized desired-power constraints.
    pub zeta: Vec<f64>,
}

impl AdmmState {
    /// Fresh state at the start of a CCCP pass: duals zero, `w` at the anchor.
    pub fn new(prob: &BsProblem, w_init: Vec<CVec>, anchor_dots: Vec<Complex64>) -> AdmmState {
        let u = prob.served.len();
        let o = prob.outside.len();
        AdmmState {
            a: CMat::zeros(u, u),
            b: CMat::zeros(o, u),
            dual_lambda: CMat::zeros(u, u),
            dual_mu: CMat::zeros(o, u),
            w: w_init,
            anchor_dots,
            zeta: vec![0.0; u],
        }
    }
}

/// `R_p = (2I + ρ₁ Σ_{j∈U_p} h_jp h_jp^H + ρ₂ Σ_{j∉U_p} h_jp h_jp^H)^{-1}`,
/// the one factorization every w-update reuses, stored explicitly.
pub fn precompute_rp(local: &LocalCsi, topo: &Topology, rho1: f64, rho2: f64) -> CMat {
    let n = topo.n_tx();
    let mut m = CMat::identity(n, n) * c64(2.0, 0.0);
    for i in 0..topo.n_ue() {
        let rho = if topo.serves(local.bs(), i) { rho1 } else { rho2 };
        let h = local.h(i);
        m.gerc(c64(rho, 0.0), h, h, c64(1.0, 0.0));
    }
    herm_inverse(&m).expect("penalty system is positive definite")
}

fn row_v(prob: &BsProblem, state: &AdmmState, u: usize) -> Vec<Complex64> {
    (0..prob.served.len())
        .map(|j| prob.h_served[u].dotc(&state.w[j]) - state.dual_lambda[(u, j)])
        .collect()
}

/// Updates the served-user auxiliary matrix row by row, refreshing `ζ`.
pub fn admm_update_a(prob: &BsProblem, state: &mut AdmmState) -> Result<(), AdmmError> {
    let n = prob.served.len();
    for u in 0..n {
        let v = row_v(prob, state, u);
        let c = state.anchor_dots[u];
        let c2 = c.norm_sqr();
        let k = prob.gamma[u] * (prob.tau[u] + prob.allow[u]);
        let zeta = (k + c2 - 2.0 * (c.conj() * v[u]).re) / (2.0 * c2);
        match prob.a_update {
            AUpdateMode::Paper => {
                state.zeta[u] = zeta;
                let off_norm2: f64 = v
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != u)
                    .map(|(_, z)| z.norm_sqr())
                    .sum();
                if prob.tau[u] == 0.0 {
                    for j in 0..n {
                        if j != u {
                            state.a[(u, j)] = c64(0.0, 0.0);
                        }
                    }
                } else {
                    if off_norm2.sqrt() < 1e-14 {
                        return Err(AdmmError::DegenerateDirection {
                            ue: prob.served[u],
                            bs: prob.bs,
                        });
                    }
                    let scale = (prob.tau[u] / off_norm2).sqrt();
                    for (j, &vj) in v.iter().enumerate() {
                        if j != u {
                            state.a[(u, j)] = vj * scale;
                        }
                    }
                }
                state.a[(u, u)] = v[u] + c * zeta;
            }
            AUpdateMode::Strict => {
                let (row, zeta_strict) = strict_row_update(
                    &v,
                    u,
                    c,
                    prob.gamma[u],
                    prob.tau[u],
                    prob.allow[u],
                );
                state.zeta[u] = zeta_strict;
                for (j, &rj) in row.iter().enumerate() {
                    state.a[(u, j)] = rj;
                }
            }
        }
    }
    Ok(())
}

/// Exact row projection: minimize `||A_row - v||²` subject to
/// `2Re{c* A_uu} - |c|² >= γ (Σ_{j≠u} |A_uj|² + allow)` and
/// `Σ_{j≠u} |A_uj|² <= τ`. Returns the row and the multiplier `ζ`.
fn strict_row_update(
    v: &[Complex64],
    u: usize,
    c: Complex64,
    gamma: f64,
    tau: f64,
    allow: f64,
) -> (Vec<Complex64>, f64) {
    let c2 = c.norm_sqr();
    let off_norm2: f64 = v
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != u)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    let lin = |diag: Complex64| 2.0 * (c.conj() * diag).re - c2;
    let scaled_row = |off_scale: f64, diag: Complex64| {
        let mut row: Vec<Complex64> = v.iter().map(|z| z * off_scale).collect();
        row[u] = diag;
        row
    };
    const SLOP: f64 = 1e-12;

    // Degenerate sphere: off-diagonals are forced to zero and only the
    // half-plane projection of the diagonal remains.
    if tau == 0.0 {
        let zeta = ((gamma * allow + c2 - 2.0 * (c.conj() * v[u]).re) / (2.0 * c2)).max(0.0);
        return (scaled_row(0.0, v[u] + c * zeta), zeta);
    }
    // Both inactive.
    if off_norm2 <= tau * (1.0 + SLOP) && lin(v[u]) >= gamma * (off_norm2 + allow) - SLOP {
        return (scaled_row(1.0, v[u]), 0.0);
    }
    // Sphere active only.
    if off_norm2 > tau && lin(v[u]) >= gamma * (tau + allow) - SLOP {
        return (scaled_row((tau / off_norm2).sqrt(), v[u]), 0.0);
    }
    // Desired-power constraint active, sphere slack: root of the increasing
    // slack function φ(ζ).
    let phi = |zeta: f64| {
        let shrink = 1.0 + zeta * gamma;
        lin(v[u] + c * zeta) - gamma * (off_norm2 / (shrink * shrink) + allow)
    };
    let mut hi = 1.0;
    while phi(hi) < 0.0 {
        hi *= 2.0;
        assert!(hi < 1e30, "slack function never crossed zero");
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zeta3 = 0.5 * (lo + hi);
    let shrink = 1.0 + zeta3 * gamma;
    if off_norm2 / (shrink * shrink) <= tau * (1.0 + SLOP) {
        return (scaled_row(1.0 / shrink, v[u] + c * zeta3), zeta3);
    }
    // Both active: equality at interference τ gives the printed closed form.
    let zeta = (gamma * (tau + allow) + c2 - 2.0 * (c.conj() * v[u]).re) / (2.0 * c2);
    (scaled_row((tau / off_norm2).sqrt(), v[u] + c * zeta), zeta)
}

/// Updates the outside-user auxiliary matrix: per row, the projection of the
/// dual-shifted received vector onto the `ε` ball.
pub fn admm_update_b(prob: &BsProblem, state: &mut AdmmState) {
    let n = prob.served.len();
    for (o, _) in prob.outside.iter().enumerate() {
        let cvec: Vec<Complex64> = (0..n)
            .map(|j| prob.h_out[o].dotc(&state.w[j]) - state.dual_mu[(o, j)])
            .collect();
        let norm2: f64 = cvec.iter().map(|z| z.norm_sqr()).sum();
        let scale = if norm2 > prob.eps_out[o] {
            (prob.eps_out[o] / norm2).sqrt()
        } else {
            1.0
        };
        for (j, &cj) in cvec.iter().enumerate() {
            state.b[(o, j)] = cj * scale;
        }
    }
}

/// Solves the quadratic w-step through the precomputed `R_p`.
pub fn admm_update_w(prob: &BsProblem, state: &mut AdmmState) {
    let n = prob.served.len();
    let n_tx = prob.r_p.nrows();
    for t in 0..n {
        let mut rhs = CVec::zeros(n_tx);
        for j in 0..n {
            let coef = (state.a[(j, t)] + state.dual_lambda[(j, t)]) * prob.rho1;
            rhs += &prob.h_served[j] * coef;
        }
        for o in 0..prob.outside.len() {
            let coef = (state.b[(o, t)] + state.dual_mu[(o, t)]) * prob.rho2;
            rhs += &prob.h_out[o] * coef;
        }
        state.w[t] = &prob.r_p * rhs;
    }
}

/// Dual ascent on both consistency constraint blocks.
pub fn admm_update_duals(prob: &BsProblem, state: &mut AdmmState) {
    let n = prob.served.len();
    for u in 0..n {
        for j in 0..n {
            let gap = state.a[(u, j)] - prob.h_served[u].dotc(&state.w[j]);
            state.dual_lambda[(u, j)] += gap;
        }
    }
    for o in 0..prob.outside.len() {
        for j in 0..n {
            let gap = state.b[(o, j)] - prob.h_out[o].dotc(&state.w[j]);
            state.dual_mu[(o, j)] += gap;
        }
    }
}

/// Relative constraint violations of a returned solution, each normalized by
/// its constraint scale (`bound + σ²` for the power caps, the required
/// received power for the desired-signal constraint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasReport {
    pub sinr: f64,
    pub tau: f64,
    pub eps: f64,
}

impl FeasReport {
    pub fn max_violation(&self) -> f64 {
        self.sinr.max(self.tau).max(self.eps)
    }
}

fn feasibility_report(prob: &BsProblem, w: &[CVec], anchor_dots: &[Complex64]) -> FeasReport {
    let n = prob.served.len();
    let mut sinr = 0.0f64;
    let mut tau = 0.0f64;
    let mut eps = 0.0f64;
    for u in 0..n {
        let c = anchor_dots[u];
        let lhs = 2.0 * (c.conj() * prob.h_served[u].dotc(&w[u])).re - c.norm_sqr();
        let rhs = prob.gamma[u] * (prob.tau[u] + prob.allow[u]);
        sinr = sinr.max((rhs - lhs) / rhs);
        let intra: f64 = (0..n)
            .filter(|j| *j != u)
            .map(|j| prob.h_served[u].dotc(&w[j]).norm_sqr())
            .sum();
        tau = tau.max((intra - prob.tau[u]) / (prob.tau[u] + prob.noise_served[u]));
    }
    for o in 0..prob.outside.len() {
        let leak: f64 = (0..n).map(|j| prob.h_out[o].dotc(&w[j]).norm_sqr()).sum();
        eps = eps.max((leak - prob.eps_out[o]) / (prob.eps_out[o] + prob.noise_out[o]));
    }
    FeasReport {
        sinr: sinr.max(0.0),
        tau: tau.max(0.0),
        eps: eps.max(0.0),
    }
}

/// Result of one per-BS solve.
#[derive(Debug, Clone)]
pub struct BsSolution {
    pub bs: usize,
    /// Precoders for the served users, in `U_p` order.
    pub w: Vec<CVec>,
    pub cccp_passes: usize,
    pub feasibility: FeasReport,
}

/// Zero-forcing initialization on local channels, scaled so each stream
/// would hit its SINR target in an interference-free single cell.
///
/// Falls back to a matched filter when a zero-forcing direction collapses.
pub fn local_zf_init(
    local: &LocalCsi,
    topo: &Topology,
    gamma: &TargetSinr,
    noise: &NoiseModel,
) -> Result<Vec<CVec>, AdmmError> {
    let p = local.bs();
    let served = topo.serving(p);
    let n_tx = topo.n_tx();
    let u = served.len();
    let h_mat = CMat::from_fn(n_tx, u, |r, c| local.h(served[c])[r]);
    let mut gram = h_mat.adjoint() * &h_mat;
    let reg = 1e-10 * (gram.trace().re / u as f64).max(f64::MIN_POSITIVE);
    for d in 0..u {
        gram[(d, d)] += c64(reg, 0.0);
    }
    let dirs = &h_mat * herm_inverse(&gram).expect("regularized Gram matrix is positive definite");
    let mut out = Vec::with_capacity(u);
    for (k, &i) in served.iter().enumerate() {
        let h = local.h(i);
        let hn = norm_sq(h).sqrt();
        if hn <= 0.0 {
            return Err(AdmmError::DegenerateAnchor { ue: i, bs: p });
        }
        let mut d: CVec = dirs.column(k).into();
        let dn = norm_sq(&d).sqrt();
        if h.dotc(&d).norm() < 1e-12 * hn * dn || dn <= 0.0 {
            d = h / c64(hn, 0.0);
        }
        let g = gamma.get(topo, i, p).unwrap();
        let scale = (g * noise.sigma2).sqrt() / h.dotc(&d).norm();
        let w = d * c64(scale, 0.0);
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AdmmError::DegenerateAnchor { ue: i, bs: p });
        }
        out.push(w);
    }
    Ok(out)
}

/// Runs the CCCP outer loop with ADMM inner iterations at one BS.
///
/// `init` seeds the first anchor; `None` uses [`local_zf_init`]. An anchor
/// that turns orthogonal to its channel is re-anchored to the matched-filter
/// direction, which keeps the linearization defined.
pub fn cccp_admm_solve(
    local: &LocalCsi,
    topo: &Topology,
    gamma: &TargetSinr,
    bounds: &InterferenceBounds,
    noise: &NoiseModel,
    cfg: &AdmmConfig,
    init: Option<Vec<CVec>>,
) -> Result<BsSolution, AdmmError> {
    let prob = BsProblem::new(local, topo, gamma, bounds, noise, cfg);
    let mut w_c = match init {
        Some(w) => w,
        None => local_zf_init(local, topo, gamma, noise)?,
    };
    assert_eq!(w_c.len(), prob.served.len());
    let mut passes = 0;
    let mut anchor_dots: Vec<Complex64> = Vec::new();
    for _ in 0..cfg.q1.max(1) {
        anchor_dots.clear();
        for (u, &i) in prob.served.iter().enumerate() {
            let h = &prob.h_served[u];
            let mut c = h.dotc(&w_c[u]);
            if c.norm() < 1e-12 {
                let hn = norm_sq(h).sqrt();
                if hn <= 0.0 {
                    return Err(AdmmError::DegenerateAnchor { ue: i, bs: prob.bs });
                }
                w_c[u] = h / c64(hn, 0.0);
                c = c64(hn, 0.0);
            }
            anchor_dots.push(c);
        }
        let mut state = AdmmState::new(&prob, w_c.clone(), anchor_dots.clone());
        for _ in 0..cfg.q2 {
            admm_update_a(&prob, &mut state)?;
            admm_update_b(&prob, &mut state);
            admm_update_w(&prob, &mut state);
            admm_update_duals(&prob, &mut state);
        }
        let denom: f64 = w_c.iter().map(norm_sq).sum();
        let change: f64 = state
            .w
            .iter()
            .zip(&w_c)
            .map(|(a, b)| norm_sq(&(a - b)))
            .sum::<f64>()
            / denom.max(f64::MIN_POSITIVE);
        w_c = state.w;
        passes += 1;
        if change <= cfg.eps {
            break;
        }
    }
    let feasibility = feasibility_report(&prob, &w_c, &anchor_dots);
    if cfg.require_feasible && feasibility.max_violation() > cfg.feas_tol {
        return Err(AdmmError::InfeasibleSubproblem {
            bs: prob.bs,
            violation: feasibility.max_violation(),
        });
    }
    Ok(BsSolution {
        bs: prob.bs,
        w: w_c,
        cccp_passes: passes,
        feasibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_topology, draw_channel, sinr_approx, synth_covariance_with_gains, total_power,
        PrecoderSet,
    };
    use crate::rng::{derive_rng, STREAM_TEST};
    use crate::udd::{udd_solve, UddConfig};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn gaussian_vec(n: usize, rng: &mut impl Rng) -> CVec {
        CVec::from_fn(n, |_, _| {
            c64(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        })
    }

    fn setup(seed: u64) -> (Topology, ChannelSet, TargetSinr, NoiseModel) {
        let topo = build_topology(2, 3, 6, &[vec![0, 1], vec![1, 2]]).unwrap();
        let gains: Vec<f64> = (0..6).map(|k| 0.6 + 0.12 * k as f64).collect();
        let cov = synth_covariance_with_gains(&topo, 0.4, &gains).unwrap();
        let ch = draw_channel(&cov, seed, 0).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.3).unwrap();
        let noise = NoiseModel { sigma2: 0.05, snr_db: 0.0 };
        (topo, ch, gamma, noise)
    }

    #[test]
    fn rp_reconstruction() {
        let (topo, ch, _, _) = setup(3);
        for p in 0..2 {
            let local = LocalCsi::from_channels(&ch, p);
            let r = precompute_rp(&local, &topo, 0.5, 0.5);
            let mut m = CMat::identity(6, 6) * c64(2.0, 0.0);
            for i in 0..3 {
                let h = ch.h(i, p);
                m.gerc(c64(0.5, 0.0), h, h, c64(1.0, 0.0));
            }
            let defect = (&r * &m - CMat::identity(6, 6))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(defect < 1e-10);
        }
    }

    #[test]
    fn local_csi_holds_one_column_only() {
        let (topo, ch, _, _) = setup(4);
        let local = LocalCsi::from_channels(&ch, 1);
        assert_eq!(local.bs(), 1);
        for (i, p) in local.coordinates() {
            assert_eq!(p, 1);
            assert_eq!(local.h(i), ch.h(i, 1));
        }
        let _ = topo;
    }

    #[test]
    fn b_update_matches_bisection_oracle() {
        // Oracle: B = C / (1 + ν) with ν ≥ 0 from bisection on the norm
        // constraint, against the closed-form min(√ε/||C||, 1) scaling.
        let mut rng = derive_rng(11, STREAM_TEST, 7, 0);
        for case in 0..200 {
            let n = 1 + (case % 4);
            let cvec = gaussian_vec(n, &mut rng);
            let eps = rng.gen::<f64>() * 2.0;
            let norm2 = norm_sq(&cvec);
            let closed = if norm2 > eps { (eps / norm2).sqrt() } else { 1.0 };
            let nu = if norm2 > eps {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while norm2 / ((1.0 + hi) * (1.0 + hi)) > eps {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if norm2 / ((1.0 + mid) * (1.0 + mid)) > eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            } else {
                0.0
            };
            assert!(approx_eq(closed, 1.0 / (1.0 + nu), 1e-10));
        }
    }

    #[test]
    fn paper_a_update_kkt_residuals() {
        // The closed form must pin the sphere at equality, keep off-diagonal
        // entries collinear with v, and reproduce the ζ consistency identity.
        let (topo, ch, gamma, noise) = setup(5);
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let cfg = AdmmConfig { q2: 3, ..AdmmConfig::default() };
        for p in 0..2 {
            let local = LocalCsi::from_channels(&ch, p);
            let prob = BsProblem::new(&local, &topo, &gamma, &sol.bounds, &noise, &cfg);
            let init = local_zf_init(&local, &topo, &gamma, &noise).unwrap();
            let dots: Vec<Complex64> = prob
                .served
                .iter()
                .enumerate()
                .map(|(u, _)| prob.h_served[u].dotc(&init[u]))
                .collect();
            let mut state = AdmmState::new(&prob, init, dots);
            // A few iterations move v off the initialization manifold.
            for _ in 0..3 {
                admm_update_a(&prob, &mut state).unwrap();
                admm_update_b(&prob, &mut state);
                admm_update_w(&prob, &mut state);
                admm_update_duals(&prob, &mut state);
            }
            admm_update_a(&prob, &mut state).unwrap();
            let n = prob.served.len();
            for u in 0..n {
                let v = row_v(&prob, &state, u);
                let tau = prob.tau[u];
                let off_norm2: f64 = (0..n)
                    .filter(|j| *j != u)
                    .map(|j| state.a[(u, j)].norm_sqr())
                    .sum();
                assert!((off_norm2 - tau).abs() <= 1e-8 * tau.max(1e-30));
                // Collinearity with one common real scale.
                let s = (tau
                    / (0..n)
                        .filter(|j| *j != u)
                        .map(|j| v[j].norm_sqr())
                        .sum::<f64>())
                .sqrt();
                for (j, &vj) in v.iter().enumerate() {
                    if j != u {
                        assert!((state.a[(u, j)] - vj * s).norm() < 1e-10);
                    }
                }
                // ζ consistency: the diagonal sits exactly where the
                // linearized constraint holds at equality.
                let c = state.anchor_dots[u];
                let lhs = 2.0 * (c.conj() * state.a[(u, u)]).re - c.norm_sqr();
                let rhs = prob.gamma[u] * (tau + prob.allow[u]);
                assert!(approx_eq(lhs, rhs, 1e-8));
            }
        }
    }

    #[test]
    fn strict_a_update_matches_bisection_oracle() {
        // Oracle: ζ ≥ 0 with off-diagonals ball-projected after 1/(1+ζγ)
        // shrinkage; the slack in ζ is strictly increasing, so bisection on
        // the first sign change solves the row exactly.
        let mut rng = derive_rng(13, STREAM_TEST, 9, 0);
        let mut case_hits = [0usize; 4];
        for case in 0..1000 {
            let n = 2 + (case % 3);
            let u = case % n;
            let v = (0..n).map(|_| {
                c64(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            });
            let mut v: Vec<Complex64> = v.collect();
            let c = c64(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * c64(2.0, 0.0);
            if c.norm() < 1e-3 {
                continue;
            }
            let gamma = 0.2 + rng.gen::<f64>() * 3.0;
            let off: f64 = v
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != u)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            // Mix constraint scales so all four KKT cases occur.
            let tau = match case % 4 {
                0 => off * (1.5 + rng.gen::<f64>()),
                1 => off * (0.1 + 0.5 * rng.gen::<f64>()),
                _ => off * rng.gen::<f64>() * 2.0,
            };
            let allow = match case % 2 {
                0 => 0.01,
                _ => 2.0 * (c.conj() * v[u]).re.abs() / gamma + 1.0,
            };
            // Half the rows get a diagonal aligned with c and large enough
            // that the desired-power constraint already holds at ζ = 0,
            // which exercises the inactive and sphere-only cases.
            if case % 8 < 4 {
                let t = (c.norm_sqr() + gamma * (2.0 * off + allow)) / (2.0 * c.norm_sqr())
                    + rng.gen::<f64>();
                v[u] = c * t;
            }
            let (row, zeta) = strict_row_update(&v, u, c, gamma, tau, allow);

            // Record which case fired, for coverage.
            let off_res: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != u)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            let sphere_tight = (off_res - tau).abs() <= 1e-6 * tau.max(1e-12);
            let idx = match (zeta > 1e-12, sphere_tight) {
                (false, false) => 0,
                (false, true) => 1,
                (true, false) => 2,
                (true, true) => 3,
            };
            case_hits[idx] += 1;

            // Oracle by bisection on ζ.
            let project = |zeta: f64| {
                let shrink = 1.0 + zeta * gamma;
                let raw: f64 = off / (shrink * shrink);
                let s = if raw > tau && raw > 0.0 {
                    (tau / raw).sqrt() / shrink
                } else {
                    1.0 / shrink
                };
                (s, v[u] + c * zeta)
            };
            let slack = |zeta: f64| {
                let (s, diag) = project(zeta);
                let inter: f64 = off * s * s;
                2.0 * (c.conj() * diag).re - c.norm_sqr() - gamma * (inter + allow)
            };
            let zeta_oracle = if slack(0.0) >= 0.0 {
                0.0
            } else {
                let mut hi = 1.0;
                while slack(hi) < 0.0 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if slack(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let (s, diag) = project(zeta_oracle);
            for (j, z) in row.iter().enumerate() {
                let want = if j == u { diag } else { v[j] * s };
                assert!(
                    (z - want).norm() <= 1e-8 * want.norm().max(1.0),
                    "case {case}: row entry mismatch"
                );
            }
            assert!(approx_eq(zeta, zeta_oracle, 1e-7), "case {case}: ζ mismatch");
        }
        assert!(case_hits.iter().all(|&h| h > 20), "case coverage: {case_hits:?}");
    }

    #[test]
    fn w_update_satisfies_stationarity() {
        let (topo, ch, gamma, noise) = setup(8);
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let cfg = AdmmConfig::default();
        for p in 0..2 {
            let local = LocalCsi::from_channels(&ch, p);
            let prob = BsProblem::new(&local, &topo, &gamma, &sol.bounds, &noise, &cfg);
            let init = local_zf_init(&local, &topo, &gamma, &noise).unwrap();
            let dots: Vec<Complex64> = prob
                .served
                .iter()
                .enumerate()
                .map(|(u, _)| prob.h_served[u].dotc(&init[u]))
                .collect();
            let mut state = AdmmState::new(&prob, init, dots);
            admm_update_a(&prob, &mut state).unwrap();
            admm_update_b(&prob, &mut state);
            admm_update_w(&prob, &mut state);
            // Gradient of the augmented Lagrangian in w_t must vanish:
            // 2 w_t + ρ₁ Σ_j h_j (h_j^H w_t - A_jt - λ̂_jt) + ρ₂ Σ_o ... = 0.
            let n = prob.served.len();
            for t in 0..n {
                let mut grad = &state.w[t] * c64(2.0, 0.0);
                for j in 0..n {
                    let gap = prob.h_served[j].dotc(&state.w[t])
                        - state.a[(j, t)]
                        - state.dual_lambda[(j, t)];
                    grad += &prob.h_served[j] * (gap * 0.5);
                }
                for o in 0..prob.outside.len() {
                    let gap = prob.h_out[o].dotc(&state.w[t])
                        - state.b[(o, t)]
                        - state.dual_mu[(o, t)];
                    grad += &prob.h_out[o] * (gap * 0.5);
                }
                let scale = norm_sq(&state.w[t]).sqrt().max(1.0);
                assert!(norm_sq(&grad).sqrt() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn converged_solver_reproduces_oracle_power() {
        // With the oracle's own exact bounds, each subproblem optimum equals
        // the oracle's per-BS power, so a well-converged CCCP-ADMM must land
        // on it.
        let mut ok = 0;
        for seed in [21u64, 22, 23] {
            let (topo, ch, gamma, noise) = setup(seed);
            let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
            let cfg = AdmmConfig {
                q1: 30,
                q2: 300,
                eps: 1e-12,
                ..AdmmConfig::default()
            };
            let mut all = Vec::new();
            let mut within = true;
            for p in 0..topo.n_bs() {
                let local = LocalCsi::from_channels(&ch, p);
                let got =
                    cccp_admm_solve(&local, &topo, &gamma, &sol.bounds, &noise, &cfg, None)
                        .unwrap();
                let p_admm: f64 = got.w.iter().map(norm_sq).sum();
                let p_udd: f64 = topo
                    .serving(p)
                    .iter()
                    .map(|&i| norm_sq(sol.precoders.get(&topo, i, p).unwrap()))
                    .sum();
                if (p_admm - p_udd).abs() > 0.02 * p_udd {
                    within = false;
                }
                assert!(got.feasibility.max_violation() < 0.05);
                all.push(got);
            }
            if within {
                ok += 1;
            }
            // The assembled decentralized solution respects the targets of
            // the approximate SINR model up to the residual violation.
            let mut prec = PrecoderSet::zeros(&topo);
            for bs_sol in &all {
                for (u, &i) in topo.serving(bs_sol.bs).iter().enumerate() {
                    prec.set(&topo, i, bs_sol.bs, bs_sol.w[u].clone());
                }
            }
            let g = sinr_approx(&prec, &ch, &topo, &noise);
            for (k, &gk) in g.iter().enumerate() {
                assert!(
                    gk >= gamma.at(k) * 0.9,
                    "seed {seed} pair {k}: SINR {gk} vs target {}",
                    gamma.at(k)
                );
            }
            let _ = total_power(&prec);
        }
        assert!(ok == 3, "only {ok}/3 seeds matched oracle power");
    }

    #[test]
    fn solver_is_invariant_to_pathloss_scale() {
        // Row equilibration at work: gains spanning five orders of magnitude
        // must not slow the solver down or bias its fixed point.
        let topo = build_topology(2, 4, 8, &[vec![0, 1], vec![1, 2, 3]]).unwrap();
        let gains: Vec<f64> = (0..8).map(|k| 3e-5 * 10f64.powi(k % 5)).collect();
        let cov = synth_covariance_with_gains(&topo, 0.4, &gains).unwrap();
        let ch = draw_channel(&cov, 77, 0).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.5).unwrap();
        let noise = NoiseModel { sigma2: 3e-6, snr_db: 0.0 };
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let cfg = AdmmConfig { q1: 30, q2: 300, eps: 1e-12, ..AdmmConfig::default() };
        for p in 0..topo.n_bs() {
            let local = LocalCsi::from_channels(&ch, p);
            let got = cccp_admm_solve(&local, &topo, &gamma, &sol.bounds, &noise, &cfg, None)
                .unwrap();
            let p_admm: f64 = got.w.iter().map(norm_sq).sum();
            let p_udd: f64 = topo
                .serving(p)
                .iter()
                .map(|&i| norm_sq(sol.precoders.get(&topo, i, p).unwrap()))
                .sum();
            assert!(
                (p_admm - p_udd).abs() <= 0.02 * p_udd,
                "bs {p}: {p_admm} vs oracle {p_udd}"
            );
            assert!(got.feasibility.max_violation() < 1e-2);
        }
    }

    #[test]
    fn orthogonal_anchor_is_reanchored() {
        let (topo, ch, gamma, noise) = setup(31);
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let local = LocalCsi::from_channels(&ch, 0);
        // Build an init whose first stream is orthogonal to its own channel.
        let mut init = local_zf_init(&local, &topo, &gamma, &noise).unwrap();
        let h0 = local.h(topo.serving(0)[0]).clone();
        let mut v = gaussian_vec(6, &mut derive_rng(31, STREAM_TEST, 1, 0));
        let proj = h0.dotc(&v) / c64(norm_sq(&h0), 0.0);
        v -= &h0 * proj;
        init[0] = v;
        let cfg = AdmmConfig { q1: 4, q2: 50, ..AdmmConfig::default() };
        let got = cccp_admm_solve(&local, &topo, &gamma, &sol.bounds, &noise, &cfg, Some(init))
            .unwrap();
        assert!(got.w.iter().all(|w| norm_sq(w) > 0.0));
    }

    #[test]
    fn single_pass_profile_reports_but_never_errors() {
        let (topo, ch, gamma, noise) = setup(41);
        let sol = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
        let local = LocalCsi::from_channels(&ch, 0);
        let single = AdmmConfig::default();
        let got = cccp_admm_solve(&local, &topo, &gamma, &sol.bounds, &noise, &single, None)
            .unwrap();
        assert_eq!(got.cccp_passes, 1);
        // The same profile with the feasibility gate enabled fails honestly.
        let gated = AdmmConfig { require_feasible: true, feas_tol: 1e-6, ..single };
        let err = cccp_admm_solve(&local, &topo, &gamma, &sol.bounds, &noise, &gated, None);
        assert!(matches!(err, Err(AdmmError::InfeasibleSubproblem { bs: 0, .. })));
    }

    #[test]
    fn zf_init_hits_single_cell_targets() {
        // One isolated BS: ZF leaves no intra-cell interference, so the
        // approximate SINR equals the target exactly.
        let topo = build_topology(1, 2, 5, &[vec![0, 1]]).unwrap();
        let gains = vec![1.0, 0.8];
        let cov = synth_covariance_with_gains(&topo, 0.2, &gains).unwrap();
        let ch = draw_channel(&cov, 77, 0).unwrap();
        let gamma = TargetSinr::new(&topo, vec![1.5, 0.7]).unwrap();
        let noise = NoiseModel { sigma2: 0.02, snr_db: 0.0 };
        let local = LocalCsi::from_channels(&ch, 0);
        let init = local_zf_init(&local, &topo, &gamma, &noise).unwrap();
        let prec = PrecoderSet::new(&topo, init).unwrap();
        let g = sinr_approx(&prec, &ch, &topo, &noise);
        assert!(approx_eq(g[0], 1.5, 1e-6));
        assert!(approx_eq(g[1], 0.7, 1e-6));
    }
}
