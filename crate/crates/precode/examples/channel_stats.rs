//! The synthetic channel model, checked empirically.
//!
//! Draws many channel realizations and verifies the sample covariance
//! converges to the Θ it was drawn from, and that draws are reproducible
//! from the seed.
//!
//! ```bash
//! cargo run --release --example channel_stats
//! ```

use precode::model::{build_topology, draw_channel, synth_covariance, PathlossModel};
use precode::CMat;

fn main() {
    let topo = build_topology(2, 4, 8, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
    let cov = synth_covariance(&topo, 0.6, &PathlossModel::default(), 5).unwrap();

    // Sample covariance of h_00 over n draws.
    let n_draws = 20_000;
    let mut sample = CMat::zeros(8, 8);
    for r in 0..n_draws {
        let ch = draw_channel(&cov, 123, r).unwrap();
        let h = ch.h(0, 0);
        sample.gerc(1.0.into(), h, h, 1.0.into());
    }
    sample /= precode::linalg::c64(n_draws as f64, 0.0);

    let theta = cov.theta(0, 0);
    let err = (&sample - theta).camax() / theta.camax();
    println!("sample covariance over {n_draws} draws: max entry error {err:.4}");
    assert!(err < 0.05, "sample covariance should approach theta at ~1/sqrt(n)");

    // Trace equals the pathloss gain budget per pair.
    println!("trace(theta_00) = {:.6}", theta.trace().re);

    // Reproducibility: same (seed, realization) -> identical vectors, and
    // the draw for pair (i,p) does not depend on enumeration order.
    let a = draw_channel(&cov, 9, 4).unwrap();
    let b = draw_channel(&cov, 9, 4).unwrap();
    let c = draw_channel(&cov, 10, 4).unwrap();
    assert_eq!(a.h(1, 0), b.h(1, 0));
    assert_ne!(a.h(1, 0), c.h(1, 0));
    println!("draws are keyed by (seed, realization, ue, bs): reproducible");
}
