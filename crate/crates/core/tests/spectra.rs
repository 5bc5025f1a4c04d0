//! Larger spectrum checks that are too slow for unit tests.

use ising_core::coupling::CouplingMatrix;
use ising_core::mptest::graphon_spectrum;

#[test]
fn dense_random_graph_spectrum_concentrates() {
    // G(n, 1/2) at n = 2000: the graphon proxy A/n has leading eigenvalue
    // near 1/2 and bulk below 2 sqrt(p(1-p)/n) ~ 0.023
    let n = 2000;
    let p = 0.5;
    let scaled = CouplingMatrix::er_scaled(n, p, 2024).unwrap().scaled(p);
    let lams = graphon_spectrum(&scaled, 1e-6);
    assert!(
        (lams[0] - p).abs() <= 0.05 * p,
        "leading eigenvalue {} not within 5% of {p}",
        lams[0]
    );
    for l in &lams[1..] {
        assert!(l.abs() < 0.1, "bulk eigenvalue {l} above 0.1");
    }
}

#[test]
fn spectrum_identities_at_n_500() {
    for j in [
        CouplingMatrix::curie_weiss(500).unwrap(),
        CouplingMatrix::er_scaled(500, 0.15, 3).unwrap(),
        CouplingMatrix::block_example(484).unwrap(),
    ] {
        let spec = j.spectrum();
        let trace: f64 = spec.eigenvalues.iter().sum();
        assert!(trace.abs() <= 1e-8 * j.n() as f64);
        let sq: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
        assert!((sq - spec.frobenius_norm_sq).abs() <= 1e-8 * spec.frobenius_norm_sq);
    }
}
