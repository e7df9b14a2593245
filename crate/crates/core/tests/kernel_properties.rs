use proptest::prelude::*;
use qvelab::kernel::{cut_distance, cut_norm, CutDistanceMode, CutNormMode};
use qvelab::{Partition, Relabel, StepFunction, StepKernel};

fn partition(k: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0.2f64..1.2, k).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let mut b: Vec<f64> = w
            .iter()
            .map(|x| {
                acc += x / total;
                acc
            })
            .collect();
        *b.last_mut().unwrap() = 1.0;
        Partition::new(b).unwrap()
    })
}

fn symmetric_rows(k: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(lo..hi, k * k).prop_map(move |v| {
        let mut rows = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                rows[i][j] = v[i * k + j];
                rows[j][i] = v[i * k + j];
            }
        }
        rows
    })
}

fn signed_function(max_parts: usize) -> impl Strategy<Value = StepFunction> {
    (1..=max_parts)
        .prop_flat_map(|k| (partition(k), symmetric_rows(k, -1.0, 1.0)))
        .prop_map(|(p, rows)| StepFunction::new(p, rows).unwrap())
}

fn equal_kernel(k: usize) -> impl Strategy<Value = StepKernel> {
    symmetric_rows(k, 0.0, 4.0).prop_map(|rows| StepKernel::uniform(rows).unwrap())
}

fn permutation(k: usize) -> impl Strategy<Value = Relabel> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle().prop_map(|p| Relabel::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn cut_norm_bounded_by_l1(f in signed_function(8)) {
        let c = cut_norm(&f, CutNormMode::Exact).unwrap();
        prop_assert!(c.exact);
        prop_assert!(c.value <= f.l1_norm() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_norm_is_relabelling_invariant(
        (a, b, sigma) in (1usize..=6).prop_flat_map(|k| (equal_kernel(k), equal_kernel(k), permutation(k)))
    ) {
        let before = cut_norm(&a.as_function().difference(b.as_function()), CutNormMode::Exact).unwrap().value;
        let ra = a.relabel(&sigma).unwrap();
        let rb = b.relabel(&sigma).unwrap();
        let after = cut_norm(&ra.as_function().difference(rb.as_function()), CutNormMode::Exact).unwrap().value;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn cut_distance_triangle_inequality(
        (a, b, c) in (1usize..=5).prop_flat_map(|k| (equal_kernel(k), equal_kernel(k), equal_kernel(k)))
    ) {
        let d = |x: &StepKernel, y: &StepKernel| {
            cut_distance(x.as_function(), y.as_function(), CutDistanceMode::Exact).unwrap().value
        };
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn cut_distance_to_a_relabelling_is_zero(
        (a, sigma) in (1usize..=6).prop_flat_map(|k| (equal_kernel(k), permutation(k)))
    ) {
        let b = a.relabel(&sigma).unwrap();
        let d = cut_distance(a.as_function(), b.as_function(), CutDistanceMode::Exact).unwrap();
        prop_assert!(d.value <= 1e-12);
    }

    #[test]
    fn step_average_contracts_l1(
        (w, target) in (1usize..=6, 1usize..=5).prop_flat_map(|(k, t)| {
            (
                (partition(k), symmetric_rows(k, 0.0, 4.0)).prop_map(|(p, r)| StepKernel::new(p, r).unwrap()),
                partition(t),
            )
        })
    ) {
        let avg = w.step_average(&target);
        prop_assert!(avg.as_function().l1_norm() <= w.as_function().l1_norm() + 1e-12);
        prop_assert!((avg.as_function().integral() - w.as_function().integral()).abs() <= 1e-12);
    }

    #[test]
    fn truncation_above_max_degree_is_identity(w in (1usize..=6).prop_flat_map(equal_kernel), extra in 0.0f64..2.0) {
        let c = w.max_degree() + extra;
        prop_assert_eq!(w.truncate_by_degree(c), w);
    }
}

#[test]
fn heuristic_never_exceeds_exact() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for k in 1..=8 {
        let f = qvelab::suites::random_signed_function(&mut rng, k);
        let exact = cut_norm(&f, CutNormMode::Exact).unwrap().value;
        let heuristic = cut_norm(&f, CutNormMode::heuristic()).unwrap().value;
        assert!(heuristic <= exact + 1e-12, "k = {k}: {heuristic} > {exact}");
    }
}
