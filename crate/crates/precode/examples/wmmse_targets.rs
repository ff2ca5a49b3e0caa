//! Target generation: WMMSE rate maximization sets the per-pair SINRs.
//!
//! Power minimization needs targets from somewhere. The WMMSE solver finds a
//! good rate point under a power budget; the SINRs it achieves become the
//! targets γ_ip for the minimization pipeline, which then reproduces that
//! operating point with the least power.
//!
//! ```bash
//! cargo run --release --example wmmse_targets
//! ```

use precode::baselines::{wmmse_targets, WmmseConfig};
use precode::model::{
    build_topology, calibrate_noise_with, draw_channel, synth_covariance_with_gains, total_power,
    NoiseAveraging,
};
use precode::udd::{udd_solve, UddConfig};

fn main() {
    // Uniform gains keep the users comparable; with strong near-far spread
    // the sum-rate optimum develops extreme power disparities and the WMMSE
    // plateau takes thousands of iterations to certify.
    let serving = vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6], vec![6, 7, 8]];
    let topo = build_topology(3, 9, 12, &serving).unwrap();
    let gains = vec![1.0; 27];
    let cov = synth_covariance_with_gains(&topo, 0.5, &gains).unwrap();
    let ch = draw_channel(&cov, 1, 0).unwrap();
    let noise = calibrate_noise_with(&ch, &topo, 10.0, NoiseAveraging::GrandMean).unwrap();

    let budget = 10.0;
    let cfg = WmmseConfig { p_total: budget, max_iters: 2000, tol: 1e-8 };
    let wmmse = wmmse_targets(&ch, &topo, &noise, &cfg);
    println!(
        "wmmse: {:.4} bit/use after {} iterations (converged: {})",
        wmmse.sum_rate, wmmse.iters, wmmse.converged
    );
    println!("budget used: {:.6} of {budget}", total_power(&wmmse.precoders));

    // The monotone utility trace is the solver's own certificate.
    let first = wmmse.utility_trace.first().unwrap();
    let last = wmmse.utility_trace.last().unwrap();
    println!("utility: {first:.4} -> {last:.4} over {} steps", wmmse.utility_trace.len());

    // Feed the achieved SINRs to the oracle: same operating point, but now
    // at the minimum power that supports it.
    let udd = udd_solve(&ch, &topo, &wmmse.targets, &noise, &UddConfig::default()).unwrap();
    let p = total_power(&udd.precoders);
    println!("\npower minimization at those targets: {p:.6} W (<= budget, slack {:.2e})",
        budget - p);
    assert!(p <= budget * (1.0 + 1e-6));
}
