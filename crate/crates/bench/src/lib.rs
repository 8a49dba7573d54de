//! Shared fixtures for the benchmarks.

use dynmap_core::{CMat, MapFamily, TimeGrid, C64};

/// Deterministic Hermitian test matrix of size `n`.
pub fn hermitian(n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
            let y = if i == j { 0.0 } else { ((i * 5 + j * 3) % 7) as f64 / 7.0 - 0.5 };
            m[(i, j)] = C64::new(x, y);
            m[(j, i)] = C64::new(x, -y);
        }
    }
    m
}

/// Amplitude-damping generator scaled by `t`, a typical expm argument.
pub fn damping_generator(t: f64) -> CMat {
    MapFamily::amplitude_damping(1.0)
        .and_then(|f| f.analytic_liouvillian(0.0))
        .expect("amplitude damping generator")
        .scale_re(t)
}

/// The zoo members used for scan benchmarks, each with its grid.
pub fn zoo() -> Vec<(&'static str, MapFamily, TimeGrid)> {
    let grid = |t1: f64| TimeGrid::new(0.0, t1, 127).expect("grid");
    vec![
        ("amplitude-damping", MapFamily::amplitude_damping(1.0).unwrap(), grid(3.0)),
        ("mixed-pauli", MapFamily::mixed_pauli(0.5, 1.0).unwrap(), grid(5.0)),
        ("decay-cutoff", MapFamily::decay_linear_cutoff(1.0).unwrap().with_t_max(2.0).unwrap(), grid(2.0)),
    ]
}
