//! File formats: the result CSV/JSON emitters and the JSON schemas for
//! covariance sets, SINR targets, and computed bounds.
//!
//! All JSON documents carry `"schema": 1`. Complex matrices are flat
//! row-major lists of `[re, im]` pairs. The CSV header is fixed:
//! `scheme,n_tx,seed,alpha,beta,sum_rate,total_power,time_bounds_ms,time_solve_ms`
//! with floats printed to 9 significant digits, UTF-8, LF line endings.

use super::{BenchError, ResultRow};
use crate::de::DeSolution;
use crate::linalg::{c64, CMat};
use crate::model::{build_topology, CovarianceSet, TargetSinr, Topology};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    std::fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let mut out = String::from(
        "scheme,n_tx,seed,alpha,beta,sum_rate,total_power,time_bounds_ms,time_solve_ms\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            r.scheme,
            r.n_tx,
            r.seed,
            r.alpha,
            r.beta,
            r.sum_rate,
            r.total_power,
            r.time_bounds_ms,
            r.time_solve_ms
        ));
    }
    write_file(path, &out)
}

#[derive(Debug, Serialize, Deserialize)]
struct RowsFile {
    schema: u32,
    rows: Vec<ResultRow>,
}

pub fn emit_json(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let doc = RowsFile { schema: 1, rows: rows.to_vec() };
    let text = serde_json::to_string_pretty(&doc).expect("rows serialize");
    write_file(path, &text)
}

pub fn load_rows_json(path: &Path) -> Result<Vec<ResultRow>, BenchError> {
    let doc: RowsFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| BenchError::Format(format!("{}: {e}", path.display())))?;
    if doc.schema != 1 {
        return Err(BenchError::Format(format!("unsupported schema {}", doc.schema)));
    }
    Ok(doc.rows)
}

/// One `(ue, bs)` scalar, used for targets, multipliers, and bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub ue: usize,
    pub bs: usize,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThetaEntry {
    ue: usize,
    bs: usize,
    /// Row-major `[re, im]` entries, length `n_tx²`.
    m: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CovarianceFile {
    schema: u32,
    n_bs: usize,
    n_ue: usize,
    n_tx: usize,
    serving: Vec<Vec<usize>>,
    theta: Vec<ThetaEntry>,
}

pub fn write_covariance(
    topo: &Topology,
    cov: &CovarianceSet,
    path: &Path,
) -> Result<(), BenchError> {
    let n_tx = topo.n_tx();
    let mut theta = Vec::with_capacity(topo.n_ue() * topo.n_bs());
    for i in 0..topo.n_ue() {
        for p in 0..topo.n_bs() {
            let m = cov.theta(i, p);
            let flat = (0..n_tx)
                .flat_map(|r| (0..n_tx).map(move |c| (r, c)))
                .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
                .collect();
            theta.push(ThetaEntry { ue: i, bs: p, m: flat });
        }
    }
    let doc = CovarianceFile {
        schema: 1,
        n_bs: topo.n_bs(),
        n_ue: topo.n_ue(),
        n_tx,
        serving: (0..topo.n_bs()).map(|p| topo.serving(p).to_vec()).collect(),
        theta,
    };
    write_file(path, &serde_json::to_string_pretty(&doc).expect("covariance serialize"))
}

pub fn load_covariance(path: &Path) -> Result<(Topology, CovarianceSet), BenchError> {
    let doc: CovarianceFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| BenchError::Format(format!("{}: {e}", path.display())))?;
    if doc.schema != 1 {
        return Err(BenchError::Format(format!("unsupported schema {}", doc.schema)));
    }
    let topo = build_topology(doc.n_bs, doc.n_ue, doc.n_tx, &doc.serving)
        .map_err(|e| BenchError::Format(format!("topology: {e}")))?;
    let n = doc.n_tx;
    let mut theta = vec![None; doc.n_ue * doc.n_bs];
    for entry in &doc.theta {
        if entry.ue >= doc.n_ue || entry.bs >= doc.n_bs {
            return Err(BenchError::Format(format!(
                "theta entry (ue {}, bs {}) out of range",
                entry.ue, entry.bs
            )));
        }
        if entry.m.len() != n * n {
            return Err(BenchError::Format(format!(
                "theta (ue {}, bs {}): expected {} entries, got {}",
                entry.ue,
                entry.bs,
                n * n,
                entry.m.len()
            )));
        }
        let m = CMat::from_fn(n, n, |r, c| {
            let [re, im] = entry.m[r * n + c];
            c64(re, im)
        });
        let slot = &mut theta[entry.ue * doc.n_bs + entry.bs];
        if slot.is_some() {
            return Err(BenchError::Format(format!(
                "duplicate theta entry (ue {}, bs {})",
                entry.ue, entry.bs
            )));
        }
        *slot = Some(m);
    }
    let theta: Option<Vec<CMat>> = theta.into_iter().collect();
    let theta = theta.ok_or_else(|| {
        BenchError::Format("theta must cover every (ue, bs) pair".into())
    })?;
    let cov = CovarianceSet::new(doc.n_ue, doc.n_bs, doc.n_tx, theta)
        .map_err(|e| BenchError::Format(format!("covariance: {e}")))?;
    Ok((topo, cov))
}

#[derive(Debug, Serialize, Deserialize)]
struct TargetsFile {
    schema: u32,
    gamma: Vec<PairValue>,
}

pub fn write_targets(
    topo: &Topology,
    targets: &TargetSinr,
    path: &Path,
) -> Result<(), BenchError> {
    let gamma = topo
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, &(ue, bs))| PairValue { ue, bs, value: targets.at(k) })
        .collect();
    let doc = TargetsFile { schema: 1, gamma };
    write_file(path, &serde_json::to_string_pretty(&doc).expect("targets serialize"))
}

pub fn load_targets(path: &Path, topo: &Topology) -> Result<TargetSinr, BenchError> {
    let doc: TargetsFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| BenchError::Format(format!("{}: {e}", path.display())))?;
    if doc.schema != 1 {
        return Err(BenchError::Format(format!("unsupported schema {}", doc.schema)));
    }
    let mut gamma = vec![None; topo.n_pairs()];
    for pv in &doc.gamma {
        let k = topo.pair_index(pv.ue, pv.bs).ok_or_else(|| {
            BenchError::Format(format!("(ue {}, bs {}) is not a serving pair", pv.ue, pv.bs))
        })?;
        if gamma[k].replace(pv.value).is_some() {
            return Err(BenchError::Format(format!(
                "duplicate target for (ue {}, bs {})",
                pv.ue, pv.bs
            )));
        }
    }
    let gamma: Option<Vec<f64>> = gamma.into_iter().collect();
    let gamma = gamma
        .ok_or_else(|| BenchError::Format("targets must cover every serving pair".into()))?;
    TargetSinr::new(topo, gamma).map_err(|e| BenchError::Format(format!("targets: {e}")))
}

/// Output of a standalone bound computation.
#[derive(Debug, Serialize, Deserialize)]
pub struct BoundsFile {
    pub schema: u32,
    pub sigma2: f64,
    /// Multiplier limits λ̄, serving pairs.
    pub lambda: Vec<PairValue>,
    /// Power scalings δ̄, serving pairs.
    pub delta: Vec<PairValue>,
    /// Intra-set bounds τ̄, serving pairs.
    pub tau: Vec<PairValue>,
    /// Leakage bounds ε̄, non-serving pairs.
    pub eps: Vec<PairValue>,
}

pub fn bounds_to_file(topo: &Topology, sol: &DeSolution, sigma2: f64) -> BoundsFile {
    let per_pair = |vals: &dyn Fn(usize) -> f64| -> Vec<PairValue> {
        topo.pairs()
            .iter()
            .enumerate()
            .map(|(k, &(ue, bs))| PairValue { ue, bs, value: vals(k) })
            .collect()
    };
    let mut eps = Vec::new();
    for i in 0..topo.n_ue() {
        for q in 0..topo.n_bs() {
            if let Some(value) = sol.bounds.eps(topo, i, q) {
                eps.push(PairValue { ue: i, bs: q, value });
            }
        }
    }
    BoundsFile {
        schema: 1,
        sigma2,
        lambda: per_pair(&|k| sol.multipliers.at(k)),
        delta: per_pair(&|k| sol.delta[k]),
        tau: per_pair(&|k| sol.bounds.tau_at(k)),
        eps,
    }
}

pub fn write_bounds(file: &BoundsFile, path: &Path) -> Result<(), BenchError> {
    write_file(path, &serde_json::to_string_pretty(file).expect("bounds serialize"))
}
