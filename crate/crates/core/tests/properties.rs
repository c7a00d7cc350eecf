//! Invariants checked over random ensembles.

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use spinbound::bounds::{self, EtaReading};
use spinbound::concurrence::{spin_flip, spun_concurrence_closed_form, wootters_concurrence};
use spinbound::linalg::{self, ComplexMatrix4, C64};
use spinbound::qstate::{BlochVector, DensityOperator, ProductState, Site};
use spinbound::sampling::{self, sample_rng, Family, SpunState};
use spinbound::twirl;

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_matrix(seed: u64, index: u64) -> ComplexMatrix4 {
    let mut rng = sample_rng(seed, index);
    ComplexMatrix4::from_fn(|_, _| random_complex(&mut rng))
}

fn random_su2(rng: &mut impl Rng) -> [[C64; 2]; 2] {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (C64::new(q[0] / n, q[1] / n), C64::new(q[2] / n, q[3] / n));
    [[a, -b.conj()], [b, a.conj()]]
}

fn conc(rho: &DensityOperator) -> f64 {
    wootters_concurrence(rho).unwrap().concurrence
}

#[test]
fn eigenvalue_sum_equals_trace() {
    for i in 0..10_000 {
        let a = random_matrix(1, i);
        let h = a + a.adjoint();
        let eig = linalg::hermitian_eigen(&h).unwrap();
        let direct: f64 = (0..4).map(|k| h.0[k][k].re).sum();
        assert!((eig.eigenvalues.iter().sum::<f64>() - direct).abs() < 1e-10);
        assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
    }
}

#[test]
fn square_root_recovers_psd_factor() {
    for i in 0..2_000 {
        let g = random_matrix(2, i);
        let s = (g * g.adjoint()).scale(0.1);
        let back = linalg::matrix_sqrt_psd(&(s * s)).unwrap();
        assert!(
            back.max_abs_diff(&s) < 1e-8,
            "sample {i}: {}",
            back.max_abs_diff(&s)
        );
        let root = linalg::matrix_sqrt_psd(&s).unwrap();
        assert!((root * root).max_abs_diff(&s) < 1e-9);
    }
}

#[test]
fn linalg_is_bitwise_deterministic() {
    let a = random_matrix(3, 0);
    let h = a + a.adjoint();
    assert_eq!(
        linalg::hermitian_eigen(&h).unwrap(),
        linalg::hermitian_eigen(&h).unwrap()
    );
    let rho = sampling::ginibre_at(3, 1);
    assert_eq!(
        wootters_concurrence(&rho).unwrap(),
        wootters_concurrence(&rho).unwrap()
    );
}

#[test]
fn magnetisation_is_mean_of_bloch_vectors() {
    for i in 0..10_000 {
        let rho = sampling::ginibre_at(4, i);
        let m = rho.magnetisation();
        let (va, vb) = (
            rho.reduced_bloch(Site::A).to_array(),
            rho.reduced_bloch(Site::B).to_array(),
        );
        for k in 0..3 {
            assert!((m[k] - 0.5 * (va[k] + vb[k])).abs() < 1e-10);
        }
        // populations cannot exceed one
        assert!(rho.singlet_fraction() <= 1.0 - rho.observables().m_abs() + 1e-9);
    }
}

fn random_product(rng: &mut impl Rng) -> ProductState {
    let mut v = || {
        let d: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let r: f64 = rng.random();
        BlochVector::new(r * d[0] / n, r * d[1] / n, r * d[2] / n)
    };
    ProductState::new(v(), v()).unwrap()
}

#[test]
fn product_states_obey_bloch_relations() {
    for i in 0..10_000 {
        let mut rng = sample_rng(5, i);
        let p = random_product(&mut rng);
        let rho = p.density();
        let (va, vb, beta) = (p.bloch_a.norm(), p.bloch_b.norm(), p.beta());
        let m2 = 0.25 * (va * va + vb * vb + 2.0 * va * vb * beta.cos());
        assert!((rho.observables().m_abs().powi(2) - m2).abs() < 1e-10);
        assert!((p.separable_singlet_fraction() - rho.singlet_fraction()).abs() < 1e-12);
        // reduced states of a product are its factors
        let ra = rho.reduced_bloch(Site::A).to_array();
        for (got, want) in ra.iter().zip(p.bloch_a.to_array()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn singlet_fraction_from_z_aligned_populations() {
    for i in 0..2_000 {
        let mut rng = sample_rng(6, i);
        let va: f64 = rng.random();
        let vb: f64 = rng.random();
        let beta = std::f64::consts::PI * rng.random::<f64>();
        let p = ProductState::from_lengths_and_angle(va, vb, beta).unwrap();
        let rho_b = p.bloch_b.density();
        let (p_up, p_down) = ((1.0 + va) / 2.0, (1.0 - va) / 2.0);
        let expect = 0.5 * p_up * rho_b[1][1].re + 0.5 * p_down * rho_b[0][0].re;
        assert!((p.density().singlet_fraction() - expect).abs() < 1e-12);
    }
}

#[test]
fn local_unitaries_leave_concurrence_unchanged() {
    for i in 0..10_000 {
        let rho = sampling::ginibre_at(7, i);
        let mut rng = sample_rng(8, i);
        let (ua, ub) = (random_su2(&mut rng), random_su2(&mut rng));
        let rotated = rho.apply_local(&ua, &ub);
        assert!((conc(&rho) - conc(&rotated)).abs() < 1e-8, "sample {i}");
    }
}

#[test]
fn pure_state_concurrence_matches_amplitude_formula() {
    let mut worst = 0.0f64;
    for i in 0..1_000 {
        let mut rng = sample_rng(9, i);
        let amps: [C64; 4] = std::array::from_fn(|_| random_complex(&mut rng));
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u = amps.map(|z| z / n);
        let expect = 2.0 * (u[0] * u[3] - u[1] * u[2]).norm();
        let got = conc(&DensityOperator::pure(amps).unwrap());
        worst = worst.max((got - expect).abs());
    }
    assert!(worst < 1e-9, "worst {worst}");
}

#[test]
fn closed_form_matches_generic_pipeline() {
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let s = sampling::spun_at(10, i);
        let closed = spun_concurrence_closed_form(&s).unwrap();
        let generic = wootters_concurrence(&s.to_density().unwrap()).unwrap();
        worst = worst.max((closed.concurrence - generic.concurrence).abs());
        assert!(closed.lambdas[0] >= closed.lambdas[1]);
        for k in 0..4 {
            assert!(
                (closed.lambdas[k] - generic.lambdas[k]).abs() < 1e-7,
                "{s:?}"
            );
        }
        assert!((0.0..=1.0).contains(&generic.concurrence));
    }
    assert!(worst < 1e-8, "worst {worst}");
}

#[test]
fn spin_flip_is_an_involution() {
    for i in 0..1_000 {
        let rho = sampling::ginibre_at(11, i);
        let back = spin_flip(&spin_flip(&rho));
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }
}

#[test]
fn twirl_properties() {
    for i in 0..10_000 {
        let rho = sampling::ginibre_at(12, i);
        let t = twirl::twirl_analytic(&rho);
        assert!(twirl::twirl_analytic(&t).matrix().max_abs_diff(t.matrix()) < 1e-12);
        assert!((t.singlet_fraction() - rho.singlet_fraction()).abs() < 1e-12);
        assert!((t.magnetisation()[2] - rho.magnetisation()[2]).abs() < 1e-12);
        let c = t.to_coupled_basis();
        for a in 0..4 {
            for b in 0..4 {
                let kept = a == b || (a == 0 && b == 2) || (a == 2 && b == 0);
                if !kept {
                    assert!(c.0[a][b].norm() < 1e-12);
                }
            }
        }
        DensityOperator::validate(*t.matrix()).unwrap();
        assert!(conc(&rho) >= conc(&t) - 1e-9);
        if i < 1_000 {
            let q = twirl::twirl_numeric(&rho, 16).unwrap();
            assert!(q.matrix().max_abs_diff(t.matrix()) < 1e-10);
        }
    }
}

#[test]
fn twirl_preserves_z_aligned_magnetisation() {
    for i in 0..1_000 {
        let rho = sampling::ginibre_at(13, i).align_magnetisation_to_z();
        let m0 = rho.magnetisation();
        let m1 = twirl::twirl_analytic(&rho).magnetisation();
        for k in 0..3 {
            assert!((m0[k] - m1[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn min_concurrence_bound_is_monotone() {
    let n = 200;
    for i in 0..n {
        let m = i as f64 / (n - 1) as f64;
        let mut prev = -1.0;
        for j in 0..n {
            let p = (1.0 - m) * j as f64 / (n - 1) as f64;
            let v = bounds::min_concurrence_bound(p, m).unwrap();
            assert!(v >= prev - 1e-15, "p_s direction at m={m}");
            prev = v;
            if m > 0.0 {
                let m_prev = (i - 1) as f64 / (n - 1) as f64;
                // more polarisation leaves less room for triplets: the bound grows
                let lower = bounds::min_concurrence_bound(p, m_prev).unwrap();
                assert!(v >= lower - 1e-15, "m direction at p={p}");
            }
            if v > 0.0 {
                let back = bounds::contour_min_ps(v.min(1.0 - 1e-15), m).unwrap();
                assert!(back <= p + 1e-12);
            }
        }
    }
}

#[test]
fn contour_reduces_to_singlet_bound() {
    for i in 0..=100 {
        let m = i as f64 / 100.0 * (1.0 - 1e-9);
        let d = bounds::contour_min_ps(1e-9, m).unwrap() - bounds::singlet_bound(m);
        assert!(d.abs() < 1e-8);
    }
}

#[test]
fn threshold_and_concurrence_agree_in_sign() {
    let mut disagreements = 0;
    for i in 0..100_000 {
        let s = sampling::spun_at(14, i);
        let closed = spun_concurrence_closed_form(&s).unwrap().concurrence;
        let cond = bounds::spun_entanglement_condition(&s).unwrap();
        if cond != (closed > 0.0) && closed.abs() > 1e-10 {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn threshold_decreases_in_triplet_population() {
    // the supremum sits at a = 0
    for &m in &[0.0, 0.3, 0.6] {
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let a = 0.49 * k as f64 / 49.0;
            let v = 0.5 * (1.0 - 2.0 * a - m * m) / (1.0 - 2.0 * a);
            assert!(v <= prev);
            prev = v;
        }
    }
    assert!((bounds::supremum_check_with(0.4, 60, EtaReading::Linear) - 0.42).abs() < 1e-12);
}

#[test]
fn pure_product_states_lie_on_the_line() {
    for k in 0..=360 {
        let beta = std::f64::consts::PI * k as f64 / 360.0;
        let rho = ProductState::from_lengths_and_angle(1.0, 1.0, beta)
            .unwrap()
            .density();
        let obs = rho.observables();
        assert!((obs.singlet_fraction - bounds::singlet_bound(obs.m_abs())).abs() < 1e-12);
    }
}

#[test]
fn spun_samples_are_twirl_fixed_points() {
    for i in 0..5_000 {
        let s = sampling::spun_at(15, i);
        let rho = s.to_density().unwrap();
        assert!(
            twirl::twirl_analytic(&rho)
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-12
        );
        let m = rho.magnetisation();
        assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12 && (m[2] - s.m).abs() < 1e-12);
        assert!((rho.singlet_fraction() - s.p_s).abs() < 1e-12);
    }
}

#[test]
fn separable_samples_never_certified() {
    for i in 0..10_000 {
        let rho = sampling::state_at(Family::Separable, 16, i);
        let obs = rho.observables();
        assert!(obs.singlet_fraction <= bounds::singlet_bound(obs.m_abs()) + 1e-9);
        let v = bounds::witness(&obs, bounds::WitnessMode::FullVector).unwrap();
        assert!(!v.entangled_certified);
        assert!(conc(&rho) < 1e-9);
    }
}

#[test]
fn saturating_family_attains_bound() {
    let n = 50;
    for i in 0..n {
        let m = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let p = (1.0 - m) * j as f64 / (n - 1) as f64;
            let rho = sampling::saturating_state(p, m).unwrap();
            let obs = rho.observables();
            assert!((obs.singlet_fraction - p).abs() < 1e-12 && (obs.m_abs() - m).abs() < 1e-12);
            let expect = bounds::min_concurrence_bound(p, m).unwrap();
            assert!((conc(&rho) - expect).abs() < 1e-8, "p={p} m={m}");
        }
    }
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let cfg = sampling::SamplerConfig::new(77, 300, Family::Spun).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sampling::sample_spun(&cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}

/// Recorded from the first build; the streams must never change.
#[test]
fn golden_spun_sequence() {
    let cfg = sampling::SamplerConfig::new(42, 5, Family::Spun).unwrap();
    let got = sampling::sample_spun(&cfg).unwrap();
    let golden: [SpunState; 5] =
        serde_json::from_str(include_str!("golden/spun_seed42.json")).unwrap();
    assert_eq!(got, golden);
}

#[test]
fn golden_ginibre_sequence() {
    let cfg = sampling::SamplerConfig::new(42, 3, Family::Ginibre).unwrap();
    let got: Vec<_> = sampling::sample_ginibre(&cfg)
        .unwrap()
        .iter()
        .map(|r| spinbound::StateFile::from_state(r, spinbound::qstate::Basis::Computational))
        .collect();
    let golden: Vec<spinbound::StateFile> =
        serde_json::from_str(include_str!("golden/ginibre_seed42.json")).unwrap();
    assert_eq!(got, golden);
}

proptest! {
    #[test]
    fn coupled_basis_round_trip(seed in any::<u64>()) {
        let rho = sampling::ginibre_at(seed, 0);
        let back = DensityOperator::from_coupled(rho.to_coupled_basis()).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let c = rho.to_coupled_basis();
        prop_assert!((c.0[0][0].re - rho.singlet_fraction()).abs() < 1e-12);
        prop_assert!((c.trace() - rho.matrix().trace()).norm() < 1e-12);
    }

    #[test]
    fn witness_certifies_iff_positive_bound(p in 0.0f64..1.0, m in 0.0f64..1.0) {
        prop_assume!(p <= 1.0 - m);
        let v = bounds::witness(&spinbound::Observables::new(p, [0.0, 0.0, m]), bounds::WitnessMode::FullVector).unwrap();
        prop_assert_eq!(v.entangled_certified, v.min_concurrence > 0.0);
        prop_assert!(v.min_concurrence <= 1.0);
    }
}
