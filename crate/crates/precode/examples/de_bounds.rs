//! Deterministic-equivalent bounds against the instantaneous oracle.
//!
//! Both compute dual multipliers and interference bounds, but the DE path
//! sees only covariance matrices. As antenna counts grow at fixed load the
//! two converge; this prints the gap at N_T = 16, 32, 64.
//!
//! ```bash
//! cargo run --release --example de_bounds
//! ```

use precode::de::{de_bounds, DeConfig};
use precode::model::{
    build_topology, draw_channel, synth_covariance, NoiseModel, PathlossModel, TargetSinr,
};
use precode::udd::{udd_solve, UddConfig};

fn main() {
    let sigma2 = 0.1;
    let noise = NoiseModel::fixed(sigma2);
    let n_draws = 9;
    println!("n_tx   n_ue   median lambda gap   median tau gap");
    for &(n_tx, n_ue) in &[(16usize, 6usize), (32, 13), (64, 26)] {
        // Fixed load n_ue/n_tx ~ 0.4, two cells, every UE served once.
        let serving: Vec<Vec<usize>> = vec![
            (0..n_ue / 2).collect(),
            (n_ue / 2..n_ue).collect(),
        ];
        let topo = build_topology(2, n_ue, n_tx, &serving).unwrap();
        let cov = synth_covariance(&topo, 0.4, &PathlossModel::default(), 11).unwrap();
        let gamma = TargetSinr::uniform(&topo, 1.5).unwrap();

        let de = de_bounds(&cov, &topo, &gamma, sigma2, &DeConfig::default()).unwrap();

        // Realization-level dual multipliers and bounds fluctuate around the
        // deterministic equivalents; the gap shrinks as antennas grow.
        let mut lam_gaps = Vec::new();
        let mut tau_gaps = Vec::new();
        for seed in 0..n_draws {
            let ch = draw_channel(&cov, seed, 0).unwrap();
            let udd = udd_solve(&ch, &topo, &gamma, &noise, &UddConfig::default()).unwrap();
            for k in 0..topo.n_pairs() {
                let (l_star, l_bar) = (udd.multipliers.at(k), de.multipliers.at(k));
                lam_gaps.push((l_star - l_bar).abs() / l_bar);
                let (t_star, t_bar) = (udd.bounds.tau_at(k), de.bounds.tau_at(k));
                if t_star > 1e-12 {
                    tau_gaps.push((t_star - t_bar).abs() / t_star);
                }
            }
        }
        let med = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        println!(
            "{n_tx:4}   {n_ue:4}   {:17.6}   {:.6}",
            med(&mut lam_gaps),
            med(&mut tau_gaps)
        );
    }
    println!("\nthe DE needs no channel realization: bounds above were computed");
    println!("from covariances alone and compared against {n_draws} random draws each");
}
