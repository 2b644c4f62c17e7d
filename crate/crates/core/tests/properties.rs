use nalgebra::DMatrix;
use proptest::prelude::*;

use polaron::bath::{partition, star_moment, star_to_chain, transform, PartitionStrategy};
use polaron::circuit::{compile, coupling_ratio, required_beta, CircuitDesign, OscillatorHardware};
use polaron::dynamics::{evolve, time_grid, Propagator, StateVector};
use polaron::hamiltonian::{assemble_hamiltonian, excitation_number};
use polaron::resources::{ado_count, frontier, FrontierConfig};
use polaron::spectral::{fmt_g12, thermal_factors, ModeSet, Rescale};
use polaron::units::{cm1_to_ghz, ghz_to_cm1};
use polaron::{GeneralizedHolsteinModel, Mode, Sector, TruncationSpec};

fn model_strategy(max_sites: usize) -> impl Strategy<Value = GeneralizedHolsteinModel> {
    (1..=max_sites).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-0.5f64..0.5, n),
            prop::collection::vec((0.3f64..2.5, 0.0f64..0.4), n),
        )
            .prop_map(move |(j, eps, modes)| {
                let mut m = DMatrix::zeros(n, n);
                for a in 0..n {
                    for b in a + 1..n {
                        m[(a, b)] = j[a * n + b];
                        m[(b, a)] = j[a * n + b];
                    }
                }
                let modes = modes.into_iter().map(|(w, r)| vec![Mode { omega: w, huang_rhys: r }]).collect();
                GeneralizedHolsteinModel::new(m, eps, vec![0.0; n], modes).unwrap()
            })
    })
}

fn modes_strategy(max: usize) -> impl Strategy<Value = ModeSet> {
    prop::collection::vec((0.1f64..5.0, 0.01f64..1.0), 1..=max)
        .prop_map(|p| ModeSet::from_pairs(&p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_excitations(m in model_strategy(3), d in 2usize..5) {
        let trunc = TruncationSpec::uniform(d).with_sector(Sector::FullTwoLevel);
        let h = assemble_hamiltonian(&m, &trunc).unwrap();
        prop_assert!(h.hermiticity_error() < 1e-14);
        let n = excitation_number(h.basis()).unwrap();
        for (r, c, v) in h.triplets() {
            let diff = (n.get(r, r) - n.get(c, c)).norm();
            prop_assert!(v.norm() == 0.0 || diff == 0.0);
        }
    }

    #[test]
    fn evolution_is_unitary_and_conserves_energy(m in model_strategy(3), site in 0usize..3) {
        let h = assemble_hamiltonian(&m, &TruncationSpec::uniform(4)).unwrap();
        let site = site % m.n_sites();
        let psi = StateVector::site_excitation(h.basis(), site);
        let e0 = h.expectation(psi.amplitudes()).re;
        let times = time_grid(2.0, 0.25).unwrap();
        for s in evolve(&h, &psi, &times, Propagator::Krylov).unwrap() {
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            let e = h.expectation(s.amplitudes()).re;
            prop_assert!((e - e0).abs() <= 1e-8 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn krylov_matches_dense(m in model_strategy(2)) {
        let h = assemble_hamiltonian(&m, &TruncationSpec::uniform(5)).unwrap();
        let psi = StateVector::site_excitation(h.basis(), 0);
        let times = time_grid(3.0, 0.5).unwrap();
        let a = evolve(&h, &psi, &times, Propagator::Krylov).unwrap();
        let b = evolve(&h, &psi, &times, Propagator::Dense).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let d: f64 = x.amplitudes().iter().zip(y.amplitudes()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(d < 1e-8);
        }
    }

    #[test]
    fn rescaling_is_a_time_dilation(m in model_strategy(2), factor in 0.2f64..5.0) {
        let trunc = TruncationSpec::uniform(4);
        let h = assemble_hamiltonian(&m, &trunc).unwrap();
        let hs = assemble_hamiltonian(&m.scaled_by(factor), &trunc).unwrap();
        let psi = StateVector::site_excitation(h.basis(), 0);
        let times = time_grid(2.0, 0.5).unwrap();
        let stretched: Vec<f64> = times.iter().map(|t| t / factor).collect();
        let a = evolve(&h, &psi, &times, Propagator::Dense).unwrap();
        let b = evolve(&hs, &psi, &stretched, Propagator::Dense).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let d: f64 = x.amplitudes().iter().zip(y.amplitudes()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            prop_assert!(d < 1e-9);
        }
    }

    #[test]
    fn chain_preserves_moments(modes in modes_strategy(12)) {
        let chain = star_to_chain(&modes).unwrap();
        prop_assert!(chain.len() <= modes.len());
        let scale = modes.modes().iter().fold(0.0f64, |a, m| a.max(m.omega));
        for p in 0..=5 {
            let star = star_moment(&modes, p);
            let tol = 1e-10 * (star_moment(&modes, 0) * scale.powi(p as i32));
            prop_assert!((chain.moment(p) - star).abs() <= tol, "moment {p}");
        }
        prop_assert!(chain.link_coupling.iter().all(|b| *b > 0.0));
    }

    #[test]
    fn partition_covers_every_mode(modes in modes_strategy(40), k in 1usize..8) {
        let k = k.min(modes.len());
        prop_assert!(partition(&modes, modes.len() + 1, PartitionStrategy::RoundRobin).is_err());
        for strategy in [PartitionStrategy::RoundRobin, PartitionStrategy::Contiguous] {
            let parts = partition(&modes, k, strategy).unwrap();
            prop_assert_eq!(parts.iter().map(ModeSet::len).sum::<usize>(), modes.len());
            let lens: Vec<usize> = parts.iter().map(ModeSet::len).collect();
            let (lo, hi) = (lens.iter().min().unwrap(), lens.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
            let total: f64 = parts.iter().map(|p| star_moment(p, 0)).sum();
            prop_assert!((total - star_moment(&modes, 0)).abs() < 1e-12 * total.max(1.0));
        }
        let bath = transform(&modes, k, PartitionStrategy::RoundRobin).unwrap();
        prop_assert_eq!(bath.max_chain_len(), modes.len().div_ceil(k));
    }

    #[test]
    fn detailed_balance_factors(w in 1e-3f64..50.0, kt in 1e-2f64..50.0) {
        let (pos, neg) = thermal_factors(w, kt);
        let expect = (-w / kt).exp();
        prop_assert!(((neg / pos) - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn coupling_ratio_is_monotone(beta in 0.0f64..0.9, ip in 1.0f64..500.0, z in 1.0f64..500.0, f in 0.1f64..20.0, k in 1.01f64..3.0) {
        let hw = OscillatorHardware { beta, persistent_current_na: ip, impedance_ohm: z };
        let r = coupling_ratio(&hw, f).unwrap();
        prop_assert!(r >= 0.0);
        let up = |h: OscillatorHardware| coupling_ratio(&h, f).unwrap();
        let more_current = up(OscillatorHardware { persistent_current_na: ip * k, ..hw });
        let more_impedance = up(OscillatorHardware { impedance_ohm: z * k, ..hw });
        prop_assert!(more_current >= r && more_impedance >= r);
        prop_assert!(coupling_ratio(&hw, f * k).unwrap() <= r);
        let b = required_beta(r, ip, z, f).unwrap();
        prop_assert!((b - beta).abs() <= 1e-12 * beta.max(1.0));
    }

    #[test]
    fn ado_count_is_monotone(n in 1usize..20, p in 0usize..5, depth in 0usize..6, mats in 0usize..3) {
        let base = ado_count(n, p, depth, mats);
        prop_assert!(ado_count(n + 1, p, depth, mats) >= base);
        prop_assert!(ado_count(n, p + 1, depth, mats) >= base);
        prop_assert!(ado_count(n, p, depth + 1, mats) >= base);
        prop_assert!(ado_count(n, p, depth, mats + 1) >= base);
    }

    #[test]
    fn frontier_is_monotone(budget in 1e6f64..1e13, depth in 1usize..6) {
        let cfg = FrontierConfig { depth, max_sites: 24, ..Default::default() };
        let b = budget as u128;
        let f1 = frontier(b, &cfg).unwrap();
        let f2 = frontier(2 * b, &cfg).unwrap();
        for w in f1.windows(2) {
            prop_assert!(w[1].n_peaks <= w[0].n_peaks || !w[0].feasible);
        }
        for (x, y) in f1.iter().zip(&f2) {
            prop_assert!(y.n_peaks >= x.n_peaks);
            prop_assert_eq!(x.memory_bytes, x.ado_count * (x.n_sites * x.n_sites * 16) as u128);
            prop_assert_eq!(x.feasible, x.memory_bytes <= b);
        }
    }

    #[test]
    fn model_json_round_trip(m in model_strategy(4)) {
        let back = GeneralizedHolsteinModel::from_json_str(&m.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(back, m.clone());
        let design = compile(&m, None).unwrap();
        let again = CircuitDesign::from_json_str(&design.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(again, design);
    }

    #[test]
    fn twelve_digit_formatting(x in prop::num::f64::NORMAL) {
        let s = fmt_g12(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs());
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
        let digits = mantissa.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
        prop_assert!(digits <= 12);
    }

    #[test]
    fn wavenumber_round_trip(x in 1e-3f64..1e5) {
        prop_assert!((ghz_to_cm1(cm1_to_ghz(x)) - x).abs() <= 1e-12 * x);
    }
}
