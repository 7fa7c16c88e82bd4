mod common;

use proptest::prelude::*;

use tcp_core::catalog::{example_one, gus_tensor, sum_of_squares_tensor};
use tcp_core::io;
use tcp_core::lab::{usc_probe, LabConfig};
use tcp_core::model::{enumerate_faces, face_of, residual, FaceMask, TcpInstance};
use tcp_core::properties::{
    certificate_is_valid, check_copositive, check_monotone, check_r0, probe_gus, PropertyConfig, Verdict,
};
use tcp_core::solver::{homogeneous_solve, solve, SolverConfig};
use tcp_core::Tensor;

const SEEDS: [u64; 2] = [11, 20_240_601];

#[test]
fn tensor_homogeneity() {
    for s in SEEDS {
        common::homogeneity(s, 2000).unwrap();
    }
}

#[test]
fn tensor_duality_and_bounded_image() {
    for s in SEEDS {
        common::duality_and_bounded_image(s, 2000).unwrap();
    }
}

#[test]
fn kkt_equivalence_on_constructed_points() {
    for s in SEEDS {
        common::kkt_equivalence(s, 2000).unwrap();
    }
}

#[test]
fn solver_determinism_and_soundness() {
    for s in SEEDS {
        common::solver_determinism(s, 100, &SolverConfig::default().with_seed(s)).unwrap();
    }
}

#[test]
fn homogeneous_cone_and_scaling() {
    for s in SEEDS {
        common::cone_and_scaling(s, 300, &SolverConfig::default()).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn every_nonnegative_vector_has_exactly_one_face(
        raw in proptest::collection::vec(prop_oneof![Just(0.0f64), 1e-9f64..10.0], 2..=6)
    ) {
        let n = raw.len();
        let mask = face_of(&raw, 0.0).unwrap();
        let owners: Vec<FaceMask> = enumerate_faces(n)
            .into_iter()
            .filter(|f| (0..n).all(|i| f.contains(i) == (raw[i] == 0.0)))
            .collect();
        prop_assert_eq!(owners, vec![mask]);
        for (i, v) in raw.iter().enumerate() {
            prop_assert_eq!(mask.contains(i), *v == 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zero_solves_when_a_is_nonnegative(
        t in common::tensor_strategy(),
        a in proptest::collection::vec(0.0f64..5.0, 3),
    ) {
        let inst = TcpInstance::new(t.clone(), a[..t.dim()].to_vec()).unwrap();
        let r = residual(&inst, &vec![0.0; t.dim()]).unwrap();
        prop_assert_eq!((r.feas_x, r.feas_f, r.comp), (0.0, 0.0, 0.0));
    }
}

#[test]
fn r0_tensors_have_bounded_solution_sets() {
    let cfg = SolverConfig::default();
    let mut rng = tcp_core::rng::seeded(5);
    let mut verified = 0;
    let mut k = 0;
    while verified < 20 {
        let t = Tensor::random_gaussian(3, 2, 1000 + k).unwrap();
        k += 1;
        if check_r0(&t, &cfg).unwrap().verdict != Verdict::HoldsNumerically {
            continue;
        }
        verified += 1;
        for _ in 0..20 {
            let a = tcp_core::rng::gaussian_vec(&mut rng, 2);
            let sol = solve(&TcpInstance::new(t.clone(), a.clone()).unwrap(), &cfg).unwrap();
            assert!(!sol.is_unbounded_suspect(), "tensor {:?}, a {a:?}", t.entries());
        }
    }
}

#[test]
fn witnesses_fail_r0_with_valid_certificates_and_rays() {
    let cfg = SolverConfig::default();
    for n in [2usize, 3] {
        for bits in 0..(1u64 << n) - 1 {
            for seed in 0..4 {
                let t = Tensor::non_r0_witness(3, n, FaceMask::from_bits(bits), seed).unwrap();
                let rep = check_r0(&t, &cfg).unwrap();
                assert_eq!(rep.verdict, Verdict::Fails, "n={n} alpha={bits:b} seed={seed}");
                assert!(certificate_is_valid(&t, rep.certificate.as_ref().unwrap()));
                assert!(!homogeneous_solve(&t, &cfg).unwrap().rays.is_empty());
            }
        }
    }
}

fn sample_tensors() -> Vec<Tensor> {
    let mut ts = vec![example_one(), gus_tensor(), sum_of_squares_tensor(), Tensor::zeros(3, 2).unwrap()];
    ts.extend((0..4).map(|s| Tensor::random_gaussian(3, 2, 300 + s).unwrap()));
    let mut diag = Tensor::zeros(3, 2).unwrap();
    diag.set(&[0, 0, 0], 2.0).unwrap();
    diag.set(&[1, 1, 1], 0.5).unwrap();
    ts.push(diag);
    ts
}

#[test]
fn property_implications_and_certificate_soundness() {
    let cfg = PropertyConfig { gus_samples: 40, ..PropertyConfig::default() };
    for t in sample_tensors() {
        let r0 = check_r0(&t, &cfg.solver).unwrap();
        let cop = check_copositive(&t, &cfg).unwrap();
        let mono = check_monotone(&t, &[0.0, 0.0], &cfg).unwrap();
        let gus = probe_gus(&t, &cfg).unwrap();
        for rep in [&r0, &cop, &mono, &gus] {
            if rep.verdict == Verdict::Fails {
                let cert = rep.certificate.as_ref().expect("fails verdicts carry a certificate");
                assert!(certificate_is_valid(&t, cert), "{:?} on {:?}", rep.property, t.entries());
            }
        }
        if mono.verdict == Verdict::HoldsNumerically {
            assert_eq!(cop.verdict, Verdict::HoldsNumerically, "{:?}", t.entries());
        }
        if gus.verdict == Verdict::HoldsNumerically {
            assert_eq!(r0.verdict, Verdict::HoldsNumerically, "{:?}", t.entries());
        }
    }
}

#[test]
fn lab_reports_are_byte_identical() {
    let cfg = LabConfig::default().with_seed(3);
    let inst = TcpInstance::new(example_one(), vec![2.0, 1.0]).unwrap();
    let a = serde_json::to_string(&io::experiment_report_to_json(&usc_probe(&inst, 0.05, 30, &cfg).unwrap()).unwrap()).unwrap();
    let b = serde_json::to_string(&io::experiment_report_to_json(&usc_probe(&inst, 0.05, 30, &cfg).unwrap()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn usc_max_excess_grows_with_radius() {
    // the joint ball has dimension 10, so almost all samples fall in the outer
    // shell; pool whole probes at increasing radii instead
    let cfg = LabConfig::default();
    let inst = TcpInstance::new(example_one(), vec![2.0, 1.0]).unwrap();
    let maxima: Vec<f64> = [0.005, 0.02, 0.08]
        .iter()
        .map(|&r| {
            let rep = usc_probe(&inst, r, 30, &cfg).unwrap();
            assert_eq!(rep.summary.violations, Some(0));
            rep.summary.max_excess.unwrap()
        })
        .collect();
    assert!(maxima.windows(2).all(|w| w[0] <= w[1]), "{maxima:?}");
    assert!(maxima[0] < 0.01, "{maxima:?}");
}
