use kselect_core::config::{KernelConfig, ProblemSize};
use kselect_core::dataset::{build_matrix, normalize, IncompletePolicy};
use kselect_core::synthetic::{analytic_perf, canonical_spec, generate, SyntheticSpec};

fn brute_force_best(problem: &ProblemSize) -> usize {
    let configs = KernelConfig::all();
    let mut best = 0;
    for (i, c) in configs.iter().enumerate() {
        if analytic_perf(problem, c, 1.0) > analytic_perf(problem, &configs[best], 1.0) {
            best = i;
        }
    }
    best
}

#[test]
fn noise_free_optimum_matches_exhaustive_search() {
    let spec = SyntheticSpec { noise_sigma: 0.0, ..canonical_spec() };
    let records = generate(&spec);
    assert_eq!(records.len(), 170 * 640);
    let m = normalize(&build_matrix(&records, IncompletePolicy::Error).unwrap()).unwrap();
    for (p, argmax) in m.row_argmax().into_iter().enumerate() {
        assert_eq!(argmax, brute_force_best(&m.problems()[p]), "{}", m.problems()[p]);
    }
}

#[test]
fn cube_of_128_optimum() {
    let p = ProblemSize::new(128, 128, 128).unwrap();
    let best = KernelConfig::all()[brute_force_best(&p)];
    assert_eq!(analytic_perf(&p, &best, 1.0), 1.0);
}
