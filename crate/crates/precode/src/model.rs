//! Network model: topology, channel statistics, channel draws, and metrics.
//!
//! A network is `n_bs` base stations with `n_tx` antennas each and `n_ue`
//! single-antenna users. BS `p` serves the ordered user set `U_p`; user `i`
//! is served by the BS set `T_i` (the transpose relation). Serving sets may
//! overlap: a user served by several BSs receives its symbol coherently from
//! all of them.
//!
//! Symbol-level transmission is never simulated. All metrics are computed
//! analytically from precoders and channels:
//!
//! * the true SINR sums serving-BS contributions coherently per user,
//! * the approximate per-pair SINR treats every interference term
//!   incoherently, which is what decouples the per-BS problems.
//!
//! Indices are 0-based throughout.

use crate::linalg::{c64, norm_sq, psd_sqrt, CMat, CVec};
use crate::rng::{derive_rng, STREAM_CHANNEL, STREAM_PLACEMENT};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("user {0} appears in no serving list")]
    UnservedUser(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("zero channel for serving pair (ue {ue}, bs {bs})")]
    ZeroChannel { ue: usize, bs: usize },
    #[error("cannot normalize an all-zero precoder set")]
    ZeroPrecoder,
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

/// Serving structure of the network.
///
/// Also fixes the stacked ordering used for every per-serving-pair quantity
/// in the crate: BS-major, users in `U_p` order. A user served by several BSs
/// occupies one slot per serving pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n_bs: usize,
    n_ue: usize,
    n_tx: usize,
    serving: Vec<Vec<usize>>,
    served_by: Vec<Vec<usize>>,
    pair_offsets: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

/// Builds a [`Topology`] from explicit serving lists, deriving `T_i`.
pub fn build_topology(
    n_bs: usize,
    n_ue: usize,
    n_tx: usize,
    serving_lists: &[Vec<usize>],
) -> Result<Topology, ModelError> {
    if serving_lists.len() != n_bs {
        return Err(ModelError::IndexOutOfRange(format!(
            "expected {} serving lists, got {}",
            n_bs,
            serving_lists.len()
        )));
    }
    let mut served_by = vec![Vec::new(); n_ue];
    for (p, list) in serving_lists.iter().enumerate() {
        let mut seen = vec![false; n_ue];
        for &i in list {
            if i >= n_ue {
                return Err(ModelError::IndexOutOfRange(format!(
                    "ue {} out of range in serving list of bs {}",
                    i, p
                )));
            }
            if seen[i] {
                return Err(ModelError::IndexOutOfRange(format!(
                    "ue {} listed twice for bs {}",
                    i, p
                )));
            }
            seen[i] = true;
            served_by[i].push(p);
        }
    }
    if let Some(i) = served_by.iter().position(|t| t.is_empty()) {
        return Err(ModelError::UnservedUser(i));
    }
    let mut pair_offsets = Vec::with_capacity(n_bs);
    let mut pairs = Vec::new();
    let mut off = 0;
    for (p, list) in serving_lists.iter().enumerate() {
        pair_offsets.push(off);
        off += list.len();
        pairs.extend(list.iter().map(|&i| (i, p)));
    }
    Ok(Topology {
        n_bs,
        n_ue,
        n_tx,
        serving: serving_lists.to_vec(),
        served_by,
        pair_offsets,
        pairs,
    })
}

impl Topology {
    pub fn n_bs(&self) -> usize {
        self.n_bs
    }
    pub fn n_ue(&self) -> usize {
        self.n_ue
    }
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// Users served by BS `p` (the set `U_p`), in stacking order.
    pub fn serving(&self, p: usize) -> &[usize] {
        &self.serving[p]
    }

    /// BSs serving user `i` (the set `T_i`).
    pub fn served_by(&self, i: usize) -> &[usize] {
        &self.served_by[i]
    }

    pub fn serves(&self, p: usize, i: usize) -> bool {
        self.serving[p].contains(&i)
    }

    /// Number of serving pairs, `Σ_p |U_p|`.
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Stacked index of serving pair `(i, p)`, if `p` serves `i`.
    pub fn pair_index(&self, i: usize, p: usize) -> Option<usize> {
        self.serving[p]
            .iter()
            .position(|&j| j == i)
            .map(|k| self.pair_offsets[p] + k)
    }

    /// All serving pairs `(ue, bs)` in stacked order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Returns a copy with a different antenna count.
    pub fn with_n_tx(&self, n_tx: usize) -> Topology {
        let mut t = self.clone();
        t.n_tx = n_tx;
        t
    }
}

// ---------------------------------------------------------------------------
// Statistics and realizations
// ---------------------------------------------------------------------------

/// Per-(user, BS) channel covariance matrices, defined for all pairs.
///
/// Non-serving pairs matter: they carry the inter-cell interference
/// statistics the bound estimation is built on.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    n_ue: usize,
    n_bs: usize,
    n_tx: usize,
    theta: Vec<CMat>,
}

impl CovarianceSet {
    pub fn new(n_ue: usize, n_bs: usize, n_tx: usize, theta: Vec<CMat>) -> Result<Self, ModelError> {
        if theta.len() != n_ue * n_bs {
            return Err(ModelError::IndexOutOfRange(format!(
                "expected {} covariance matrices, got {}",
                n_ue * n_bs,
                theta.len()
            )));
        }
        if theta.iter().any(|m| m.nrows() != n_tx || m.ncols() != n_tx) {
            return Err(ModelError::IndexOutOfRange(
                "covariance dimension mismatch".into(),
            ));
        }
        Ok(CovarianceSet { n_ue, n_bs, n_tx, theta })
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }
    pub fn n_bs(&self) -> usize {
        self.n_bs
    }
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn theta(&self, i: usize, p: usize) -> &CMat {
        &self.theta[i * self.n_bs + p]
    }

    /// Hermitian square roots of every covariance, for repeated draws.
    pub fn factor(&self) -> Result<CovFactors, ModelError> {
        let sqrt = self
            .theta
            .iter()
            .map(|m| {
                psd_sqrt(m).ok_or_else(|| {
                    ModelError::NumericalFailure("covariance eigendecomposition failed".into())
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CovFactors {
            n_ue: self.n_ue,
            n_bs: self.n_bs,
            n_tx: self.n_tx,
            sqrt,
        })
    }
}

/// Precomputed covariance square roots.
#[derive(Debug, Clone)]
pub struct CovFactors {
    n_ue: usize,
    n_bs: usize,
    n_tx: usize,
    sqrt: Vec<CMat>,
}

/// Per-(user, BS) channel vectors, defined for all pairs.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    n_ue: usize,
    n_bs: usize,
    n_tx: usize,
    h: Vec<CVec>,
}

impl ChannelSet {
    pub fn new(n_ue: usize, n_bs: usize, n_tx: usize, h: Vec<CVec>) -> Result<Self, ModelError> {
        if h.len() != n_ue * n_bs {
            return Err(ModelError::IndexOutOfRange(format!(
                "expected {} channel vectors, got {}",
                n_ue * n_bs,
                h.len()
            )));
        }
        if h.iter().any(|v| v.len() != n_tx) {
            return Err(ModelError::IndexOutOfRange("channel length mismatch".into()));
        }
        Ok(ChannelSet { n_ue, n_bs, n_tx, h })
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }
    pub fn n_bs(&self) -> usize {
        self.n_bs
    }
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn h(&self, i: usize, p: usize) -> &CVec {
        &self.h[i * self.n_bs + p]
    }
}

/// Precoding vectors for every serving pair, in stacked order.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    w: Vec<CVec>,
}

impl PrecoderSet {
    pub fn new(topo: &Topology, w: Vec<CVec>) -> Result<Self, ModelError> {
        if w.len() != topo.n_pairs() {
            return Err(ModelError::IndexOutOfRange(format!(
                "expected {} precoders, got {}",
                topo.n_pairs(),
                w.len()
            )));
        }
        if w.iter().any(|v| v.len() != topo.n_tx()) {
            return Err(ModelError::IndexOutOfRange("precoder length mismatch".into()));
        }
        Ok(PrecoderSet { w })
    }

    pub fn zeros(topo: &Topology) -> Self {
        PrecoderSet {
            w: vec![CVec::zeros(topo.n_tx()); topo.n_pairs()],
        }
    }

    pub fn get(&self, topo: &Topology, i: usize, p: usize) -> Option<&CVec> {
        topo.pair_index(i, p).map(|k| &self.w[k])
    }

    pub fn at(&self, pair: usize) -> &CVec {
        &self.w[pair]
    }

    pub fn set(&mut self, topo: &Topology, i: usize, p: usize, v: CVec) {
        let k = topo
            .pair_index(i, p)
            .expect("set on a non-serving pair");
        self.w[k] = v;
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.w
    }

    pub fn scale(&self, c: f64) -> PrecoderSet {
        PrecoderSet {
            w: self.w.iter().map(|v| v * c64(c, 0.0)).collect(),
        }
    }
}

/// Noise variance and the SNR it was calibrated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma2: f64,
    pub snr_db: f64,
}

impl NoiseModel {
    /// A noise model pinned directly at a variance, no SNR calibration.
    pub fn fixed(sigma2: f64) -> NoiseModel {
        NoiseModel { sigma2, snr_db: f64::NAN }
    }
}

/// Provenance of a set of interference bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsKind {
    /// Evaluated from a channel realization and concrete precoders.
    Exact,
    /// Large-system prediction from covariance matrices only.
    DeterministicEquivalent,
    /// A previous set multiplied by a robustness factor.
    Scaled,
}

/// Scalar inter-cell interference bounds.
///
/// `tau_iq` caps the interference BS `q` causes to its own user `i` through
/// the other users it serves; `eps_iq` caps what BS `q` leaks to a user it
/// does not serve. Once every BS respects its bounds, each local SINR
/// constraint implies the global one, which is what lets the per-BS solver
/// run without any foreign channel knowledge.
#[derive(Debug, Clone)]
pub struct InterferenceBounds {
    kind: BoundsKind,
    /// Serving-pair stacked order.
    tau: Vec<f64>,
    /// Row-major `(ue, bs)`; meaningful at non-serving pairs only.
    eps: Vec<f64>,
    n_bs: usize,
}

impl InterferenceBounds {
    pub fn new(
        topo: &Topology,
        kind: BoundsKind,
        tau: Vec<f64>,
        eps: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if tau.len() != topo.n_pairs() || eps.len() != topo.n_ue() * topo.n_bs() {
            return Err(ModelError::IndexOutOfRange("bound table size mismatch".into()));
        }
        if tau.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::NumericalFailure("tau bounds must be non-negative".into()));
        }
        for (i, p) in (0..topo.n_ue()).flat_map(|i| (0..topo.n_bs()).map(move |p| (i, p))) {
            if !topo.serves(p, i) {
                let v = eps[i * topo.n_bs() + p];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::NumericalFailure(
                        "eps bounds must be non-negative".into(),
                    ));
                }
            }
        }
        Ok(InterferenceBounds { kind, tau, eps, n_bs: topo.n_bs() })
    }

    pub fn kind(&self) -> BoundsKind {
        self.kind
    }

    /// Intra-set bound for serving pair `(i, q)`.
    pub fn tau(&self, topo: &Topology, i: usize, q: usize) -> Option<f64> {
        topo.pair_index(i, q).map(|k| self.tau[k])
    }

    pub fn tau_at(&self, pair: usize) -> f64 {
        self.tau[pair]
    }

    /// Leakage bound for non-serving pair `(i, q)`; `None` when `q` serves `i`.
    pub fn eps(&self, topo: &Topology, i: usize, q: usize) -> Option<f64> {
        if topo.serves(q, i) {
            None
        } else {
            Some(self.eps[i * self.n_bs + q])
        }
    }

    /// Interference budget user `i` sees from everywhere except BS `p`:
    /// `Σ_{q∈T_i\{p}} tau_iq + Σ_{q∉T_i} eps_iq`.
    ///
    /// Together with `tau_ip` and the noise this is the denominator the BS-`p`
    /// subproblem assumes for its own user `i`.
    pub fn other_cell_allowance(&self, topo: &Topology, i: usize, p: usize) -> f64 {
        let mut acc = 0.0;
        for q in 0..topo.n_bs() {
            if q == p {
                continue;
            }
            acc += match topo.pair_index(i, q) {
                Some(k) => self.tau[k],
                None => self.eps[i * self.n_bs + q],
            };
        }
        acc
    }

    /// Uniform scaling of every bound; the robustness knob.
    pub fn scaled(&self, alpha: f64) -> Result<InterferenceBounds, ModelError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ModelError::NumericalFailure("bound scale must be positive".into()));
        }
        Ok(InterferenceBounds {
            kind: BoundsKind::Scaled,
            tau: self.tau.iter().map(|v| v * alpha).collect(),
            eps: self.eps.iter().map(|v| v * alpha).collect(),
            n_bs: self.n_bs,
        })
    }
}

/// Per-serving-pair SINR targets, strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSinr {
    gamma: Vec<f64>,
}

impl TargetSinr {
    pub fn new(topo: &Topology, gamma: Vec<f64>) -> Result<Self, ModelError> {
        if gamma.len() != topo.n_pairs() {
            return Err(ModelError::IndexOutOfRange(format!(
                "expected {} targets, got {}",
                topo.n_pairs(),
                gamma.len()
            )));
        }
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(ModelError::NumericalFailure(
                "SINR targets must be positive and finite".into(),
            ));
        }
        Ok(TargetSinr { gamma })
    }

    pub fn uniform(topo: &Topology, gamma: f64) -> Result<Self, ModelError> {
        TargetSinr::new(topo, vec![gamma; topo.n_pairs()])
    }

    pub fn get(&self, topo: &Topology, i: usize, p: usize) -> Option<f64> {
        topo.pair_index(i, p).map(|k| self.gamma[k])
    }

    pub fn at(&self, pair: usize) -> f64 {
        self.gamma[pair]
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    /// Uniform scaling of all targets; the robustness knob.
    pub fn scaled(&self, beta: f64) -> Result<TargetSinr, ModelError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ModelError::NumericalFailure("target scale must be positive".into()));
        }
        Ok(TargetSinr {
            gamma: self.gamma.iter().map(|g| g * beta).collect(),
        })
    }
}

// ---------------------------------------------------------------------------
// Covariance synthesis
// ---------------------------------------------------------------------------

/// Log-distance pathloss over a linear cell layout.
///
/// BS `p` sits at `(p * bs_spacing, 0)`. A user is placed uniformly in a disc
/// centered at the mean position of its serving BSs; the disc radius shrinks
/// for multi-served users, which keeps them near cell borders. The gain to
/// every BS is `(ref_distance / d)^exponent` with `d` clamped from below by
/// `min_distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossModel {
    pub exponent: f64,
    pub ref_distance: f64,
    pub bs_spacing: f64,
    pub cell_radius: f64,
    pub min_distance: f64,
}

impl Default for PathlossModel {
    fn default() -> Self {
        PathlossModel {
            exponent: 3.0,
            ref_distance: 10.0,
            bs_spacing: 200.0,
            cell_radius: 120.0,
            min_distance: 10.0,
        }
    }
}

impl PathlossModel {
    /// Pathloss gains `g_ip` for all pairs, row-major `(ue, bs)`.
    pub fn gains(&self, topo: &Topology, rng_seed: u64) -> Vec<f64> {
        let mut gains = vec![0.0; topo.n_ue() * topo.n_bs()];
        for i in 0..topo.n_ue() {
            let servers = topo.served_by(i);
            let cx = servers
                .iter()
                .map(|&p| p as f64 * self.bs_spacing)
                .sum::<f64>()
                / servers.len() as f64;
            let radius = if servers.len() > 1 {
                self.cell_radius / 2.0
            } else {
                self.cell_radius
            };
            let mut rng = derive_rng(rng_seed, STREAM_PLACEMENT, i as u64, 0);
            let r = radius * rng.gen::<f64>().sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            let (ux, uy) = (cx + r * phi.cos(), r * phi.sin());
            for p in 0..topo.n_bs() {
                let bx = p as f64 * self.bs_spacing;
                let d = ((ux - bx).powi(2) + uy.powi(2)).sqrt().max(self.min_distance);
                gains[i * topo.n_bs() + p] = (self.ref_distance / d).powf(self.exponent);
            }
        }
        gains
    }
}

/// Exponential antenna correlation matrix, `C(rho)_{ab} = rho^{|a-b|}`.
pub fn exp_correlation(n_tx: usize, rho: f64) -> CMat {
    CMat::from_fn(n_tx, n_tx, |a, b| {
        c64(rho.powi((a as i32 - b as i32).abs()), 0.0)
    })
}

/// Synthesizes covariance matrices `Θ_ip = g_ip · C(rho)` with pathloss gains
/// drawn from random user placement.
pub fn synth_covariance(
    topo: &Topology,
    rho: f64,
    pathloss: &PathlossModel,
    rng_seed: u64,
) -> Result<CovarianceSet, ModelError> {
    let gains = pathloss.gains(topo, rng_seed);
    synth_covariance_with_gains(topo, rho, &gains)
}

/// Covariance synthesis from explicit gains (deterministic variant).
pub fn synth_covariance_with_gains(
    topo: &Topology,
    rho: f64,
    gains: &[f64],
) -> Result<CovarianceSet, ModelError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(ModelError::NumericalFailure(format!(
            "correlation must lie in [0, 1), got {rho}"
        )));
    }
    if gains.len() != topo.n_ue() * topo.n_bs() {
        return Err(ModelError::IndexOutOfRange("gain table size mismatch".into()));
    }
    if gains.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(ModelError::NumericalFailure("pathloss gains must be positive".into()));
    }
    let corr = exp_correlation(topo.n_tx(), rho);
    let theta = gains.iter().map(|&g| &corr * c64(g, 0.0)).collect();
    CovarianceSet::new(topo.n_ue(), topo.n_bs(), topo.n_tx(), theta)
}

// ---------------------------------------------------------------------------
// Channel draws
// ---------------------------------------------------------------------------

fn standard_complex_gaussian(n: usize, rng: &mut impl Rng) -> CVec {
    // CN(0, 1) entries: real and imaginary parts are N(0, 1/2).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(n, |_, _| {
        c64(
            s * rng.sample::<f64, _>(StandardNormal),
            s * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Draws one channel realization, `h_ip = Θ_ip^{1/2} z_ip`.
///
/// The stream key is `(seed, realization, ue, bs)`, so draws are reproducible
/// independently of iteration order.
pub fn draw_channel(
    cov: &CovarianceSet,
    seed: u64,
    realization: u64,
) -> Result<ChannelSet, ModelError> {
    let factors = cov.factor()?;
    Ok(draw_channel_from_factors(&factors, seed, realization))
}

/// Channel draw reusing precomputed covariance square roots.
pub fn draw_channel_from_factors(
    factors: &CovFactors,
    seed: u64,
    realization: u64,
) -> ChannelSet {
    let mut h = Vec::with_capacity(factors.n_ue * factors.n_bs);
    for i in 0..factors.n_ue {
        for p in 0..factors.n_bs {
            let pair_code = ((i as u64) << 32) | p as u64;
            let mut rng = derive_rng(seed, STREAM_CHANNEL, realization, pair_code);
            let z = standard_complex_gaussian(factors.n_tx, &mut rng);
            h.push(&factors.sqrt[i * factors.n_bs + p] * z);
        }
    }
    ChannelSet {
        n_ue: factors.n_ue,
        n_bs: factors.n_bs,
        n_tx: factors.n_tx,
        h,
    }
}

// ---------------------------------------------------------------------------
// Noise calibration
// ---------------------------------------------------------------------------

/// Resolution of the averaging ambiguity in the noise calibration formula.
///
/// The printed exponent is `(1/U_p) Σ_p Σ_{i∈U_p} log10 ||h_ip||²` with
/// `U_p` varying over the outer sum. [`NoiseAveraging::PerBsMean`] applies
/// the factor inside the sum over `p` (each BS contributes the mean of its
/// own users); [`NoiseAveraging::GrandMean`] divides the full double sum by
/// `Σ_p U_p` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseAveraging {
    PerBsMean,
    GrandMean,
}

/// Calibrates the noise variance to an average receive SNR, default mode.
pub fn calibrate_noise(
    channels: &ChannelSet,
    topo: &Topology,
    snr_db: f64,
) -> Result<NoiseModel, ModelError> {
    calibrate_noise_with(channels, topo, snr_db, NoiseAveraging::PerBsMean)
}

/// Calibrates the noise variance with an explicit averaging mode.
pub fn calibrate_noise_with(
    channels: &ChannelSet,
    topo: &Topology,
    snr_db: f64,
    mode: NoiseAveraging,
) -> Result<NoiseModel, ModelError> {
    let mut exponent = 0.0;
    let mut total_pairs = 0usize;
    let mut grand = 0.0;
    for p in 0..topo.n_bs() {
        let users = topo.serving(p);
        let mut acc = 0.0;
        for &i in users {
            let g = norm_sq(channels.h(i, p));
            if g <= 0.0 {
                return Err(ModelError::ZeroChannel { ue: i, bs: p });
            }
            acc += g.log10();
        }
        exponent += acc / users.len() as f64;
        grand += acc;
        total_pairs += users.len();
    }
    if mode == NoiseAveraging::GrandMean {
        exponent = grand / total_pairs as f64;
    }
    let sigma2 = 10f64.powf(exponent) * 10f64.powf(-snr_db / 10.0);
    Ok(NoiseModel { sigma2, snr_db })
}

// ---------------------------------------------------------------------------
// SINR and power metrics
// ---------------------------------------------------------------------------

/// Signal and interference parts of an SINR, before adding noise.
///
/// Both parts scale with the square of a common precoder scale, which the
/// power-normalization root finds rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrTerms {
    pub signal: f64,
    pub interference: f64,
}

impl SinrTerms {
    /// SINR when all precoders are scaled by `c`.
    pub fn at_scale(&self, c: f64, sigma2: f64) -> f64 {
        let c2 = c * c;
        c2 * self.signal / (c2 * self.interference + sigma2)
    }
}

/// Coherent per-user SINR terms.
///
/// The desired term sums serving BSs inside the magnitude; every interferer
/// `j` contributes one coherent sum over its own serving set.
pub fn sinr_true_terms(
    precoders: &PrecoderSet,
    channels: &ChannelSet,
    topo: &Topology,
) -> Vec<SinrTerms> {
    (0..topo.n_ue())
        .map(|i| {
            let mut sig = c64(0.0, 0.0);
            for &p in topo.served_by(i) {
                sig += channels.h(i, p).dotc(precoders.get(topo, i, p).unwrap());
            }
            let mut interf = 0.0;
            for j in 0..topo.n_ue() {
                if j == i {
                    continue;
                }
                let mut term = c64(0.0, 0.0);
                for &q in topo.served_by(j) {
                    term += channels.h(i, q).dotc(precoders.get(topo, j, q).unwrap());
                }
                interf += term.norm_sqr();
            }
            SinrTerms {
                signal: sig.norm_sqr(),
                interference: interf,
            }
        })
        .collect()
}

/// True per-user SINR `Γ_i`.
pub fn sinr_true(
    precoders: &PrecoderSet,
    channels: &ChannelSet,
    topo: &Topology,
    noise: &NoiseModel,
) -> Vec<f64> {
    sinr_true_terms(precoders, channels, topo)
        .iter()
        .map(|t| t.at_scale(1.0, noise.sigma2))
        .collect()
}

/// Incoherent per-pair SINR terms, in stacked serving-pair order.
pub fn sinr_approx_terms(
    precoders: &PrecoderSet,
    channels: &ChannelSet,
    topo: &Topology,
) -> Vec<SinrTerms> {
    topo.pairs()
        .iter()
        .map(|&(i, p)| {
            let signal = channels
                .h(i, p)
                .dotc(precoders.get(topo, i, p).unwrap())
                .norm_sqr();
            let mut interf = 0.0;
            for q in 0..topo.n_bs() {
                let own = topo.served_by(i).contains(&q);
                for &j in topo.serving(q) {
                    if own && j == i {
                        continue;
                    }
                    interf += channels
                        .h(i, q)
                        .dotc(precoders.get(topo, j, q).unwrap())
                        .norm_sqr();
                }
            }
            SinrTerms {
                signal,
                interference: interf,
            }
        })
        .collect()
}

/// Approximate per-pair SINR `Γ_ip`, in stacked serving-pair order.
pub fn sinr_approx(
    precoders: &PrecoderSet,
    channels: &ChannelSet,
    topo: &Topology,
    noise: &NoiseModel,
) -> Vec<f64> {
    sinr_approx_terms(precoders, channels, topo)
        .iter()
        .map(|t| t.at_scale(1.0, noise.sigma2))
        .collect()
}

/// Sum rate in bits per channel use, `Σ log2(1 + Γ_i)`.
pub fn sum_rate(sinr: &[f64]) -> f64 {
    sinr.iter().map(|g| (1.0 + g).log2()).sum()
}

/// Total transmit power `Σ ||w_ip||²`.
pub fn total_power(precoders: &PrecoderSet) -> f64 {
    precoders.w.iter().map(norm_sq).sum()
}

/// Scales all precoders by one common scalar so the total power equals
/// `p_target`.
pub fn normalize_power(precoders: &PrecoderSet, p_target: f64) -> Result<PrecoderSet, ModelError> {
    if !(p_target > 0.0) {
        return Err(ModelError::NumericalFailure("target power must be positive".into()));
    }
    let p = total_power(precoders);
    if p <= 0.0 {
        return Err(ModelError::ZeroPrecoder);
    }
    Ok(precoders.scale((p_target / p).sqrt()))
}
