//! Robustness of the decentralized scheme to mis-scaled inputs.
//!
//! alpha multiplies the interference bounds handed to the per-BS solvers
//! (alpha != 1 means the deterministic equivalents are systematically off),
//! beta multiplies the SINR targets. The sweep shows graceful degradation:
//! the sum rate peaks at (1, 1) and stays above the centralized ZF
//! reference across the whole grid.

use precode::bench::{run_experiment, ExperimentSpec, Scheme};

const SEEDS: u64 = 8;

fn main() {
    let seeds: Vec<String> = (0..SEEDS).map(|s| s.to_string()).collect();
    let manifest = format!(
        r#"
[topology]
n_bs = 3
n_ue = 7
stride = 2
serve_len = 3

[channel]
n_tx = [16]
rho = 0.7
placement_seed = 2

[run]
schemes = ["zf-central", "de-admm"]
seeds = [{}]
snr_db = 11.0
p_total = 10.0
noise_mode = "grand-mean"
alpha = [0.2, 1.0, 5.0]
beta = [0.5, 1.0, 2.0]

[solver]
q1 = 4
q2 = 60
"#,
        seeds.join(", ")
    );

    let spec = ExperimentSpec::from_toml_str(&manifest).expect("manifest parses");
    let out = run_experiment(&spec, None, 0).expect("run succeeds");
    assert!(out.errors.is_empty(), "row failures: {:?}", out.errors);

    let mean = |s: Scheme, a: f64, b: f64| -> f64 {
        let vals: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| {
                r.scheme == s && (r.alpha - a).abs() < 1e-12 && (r.beta - b).abs() < 1e-12
            })
            .map(|r| r.sum_rate)
            .collect();
        assert_eq!(vals.len(), SEEDS as usize);
        vals.iter().sum::<f64>() / vals.len() as f64
    };

    let zfc = mean(Scheme::ZfCentral, 1.0, 1.0);
    println!("zf-central reference: {zfc:.2} bits/s/Hz at 10 W ({SEEDS} seeds)");
    println!();
    println!("mean de-admm sum rate over (alpha, beta):");
    print!("{:>10}", "");
    for &a in &[0.2f64, 1.0, 5.0] {
        print!("  alpha={a:<5}");
    }
    println!();
    for &b in &[0.5f64, 1.0, 2.0] {
        print!("beta={b:<5}");
        for &a in &[0.2f64, 1.0, 5.0] {
            print!("  {:>11.2}", mean(Scheme::DeAdmm, a, b));
        }
        println!();
    }

    let peak = mean(Scheme::DeAdmm, 1.0, 1.0);
    let mut worst_gap = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    for &b in &[0.5f64, 1.0, 2.0] {
        for &a in &[0.2f64, 1.0, 5.0] {
            let m = mean(Scheme::DeAdmm, a, b);
            worst_gap = worst_gap.min(m - zfc);
            best = best.max(m);
        }
    }
    println!();
    println!(
        "worst margin over zf-central: {worst_gap:+.2}; grid max {best:.2} vs (1,1) {peak:.2}"
    );
    assert!(worst_gap > 0.0, "de-admm fell below zf-central on the grid");
}
