use std::f64::consts::PI;

use proptest::prelude::*;

use qcomm::channels::{represent_at_cut, Channel, GainChannel, LossChannel};
use qcomm::fock::{coherent_state, number_state, operator_sqrt, trace_product, ComplexOperator};
use qcomm::info::{blahut_arimoto, information_bound, mutual_information, uniform_prior, ConditionalTable};
use qcomm::povm::{number_measurement, OutcomeLabel};
use qcomm::spin::{
    identity2, overlap_probability, singlet_joint_probability, singlet_outcomes, spin_component, spin_state, Direction,
};
use qcomm::wigner::{overlap, wigner_of_density, PhaseSpaceGrid};
use qcomm::{DensityOperator, FockSpace, C64};

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(t, p)| Direction::new(t, p).unwrap())
}

fn amplitude(radius: f64) -> impl Strategy<Value = C64> {
    (0.0..=radius, 0.0..2.0 * PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn coherent(space: FockSpace, alpha: C64) -> DensityOperator {
    DensityOperator::pure(&coherent_state(space, alpha).unwrap(), "a").unwrap()
}

fn stochastic_table() -> impl Strategy<Value = ConditionalTable> {
    (2usize..6, 2usize..7).prop_flat_map(|(t, r)| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, r), t).prop_map(move |rows| {
            let probs = rows
                .into_iter()
                .map(|row| {
                    let s: f64 = row.iter().sum::<f64>() + 1e-9;
                    row.iter().map(|x| (x + 1e-9 / r as f64) / s).collect()
                })
                .collect();
            ConditionalTable::new(
                (0..t).map(|i| i.to_string()).collect(),
                (0..r).map(OutcomeLabel::Index).collect(),
                probs,
                vec![1.0; r],
                0.0,
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spin_component_squares_to_a_quarter(r in direction()) {
        let s = spin_component(&r);
        let defect = (s * s - identity2() * C64::from(0.25)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn antipodal_projectors_resolve_identity(r in direction()) {
        let sum = spin_state(&r).projector() + spin_state(&r.antipode()).projector();
        let defect = (sum - identity2()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn overlap_routes_agree(r in direction(), r2 in direction()) {
        let c = overlap_probability(&r, &r2);
        prop_assert!(c.discrepancy() < 1e-12);
        prop_assert!((c.formula - (1.0 + r.dot(&r2)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_outcomes_are_a_distribution(r in direction(), r2 in direction()) {
        let p = singlet_outcomes(&r, &r2);
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((singlet_joint_probability(&r, &r2) - (1.0 - r.dot(&r2)) / 4.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_is_bounded(table in stochastic_table()) {
        let bound = information_bound(&table);
        let i = mutual_information(&table, &uniform_prior(table.n_settings())).unwrap();
        prop_assert!(i >= -1e-12 && i <= bound + 1e-12, "{i} outside [0, {bound}]");
        let c = blahut_arimoto(&table, 1e-9, 10_000).unwrap();
        prop_assert!(c.capacity >= i - 1e-9 && c.capacity <= bound + 1e-9);
    }

    #[test]
    fn coherent_states_are_valid_and_overlap_analytically(a in amplitude(2.0), b in amplitude(2.0)) {
        let s = FockSpace::with_dim(40).unwrap();
        let (pa, pb) = (coherent_state(s, a).unwrap(), coherent_state(s, b).unwrap());
        prop_assert!(coherent(s, a).report().passed());
        let got = pa.inner(&pb).unwrap().norm_sqr();
        prop_assert!((got - (-(a - b).norm_sqr()).exp()).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loss_moves_across_the_cut(p in 0.05f64..=1.0, alpha in amplitude(1.5), m in 0usize..10) {
        let s = FockSpace::with_dim(30).unwrap();
        let rho = coherent(s, alpha);
        let ch = LossChannel::new(p).unwrap();
        let sigma = number_measurement(s).elements()[m].clone();
        let after = trace_product(sigma.op(), ch.apply(&rho).unwrap().op()).unwrap().re;
        let before = trace_product(ch.relocate_element(&sigma).unwrap().op(), rho.op()).unwrap().re;
        prop_assert!((after - before).abs() < 1e-12);
    }

    #[test]
    fn loss_composes(p1 in 0.05f64..=1.0, p2 in 0.05f64..=1.0, alpha in amplitude(1.5)) {
        let s = FockSpace::with_dim(25).unwrap();
        let rho = coherent(s, alpha);
        let twice = LossChannel::new(p2).unwrap().apply(&LossChannel::new(p1).unwrap().apply(&rho).unwrap()).unwrap();
        let once = LossChannel::new(p1 * p2).unwrap().apply(&rho).unwrap();
        prop_assert!((twice.op() - once.op()).max_abs() < 1e-9);
        prop_assert!((once.op().trace().re + once.tail_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tables_do_not_depend_on_the_cut(f in 0.0f64..=1.0, p in 0.1f64..=1.0, g in 1.0f64..2.0) {
        let s = FockSpace::with_dim(60).unwrap();
        let states: Vec<_> = [0, 1, 3]
            .iter()
            .map(|&n| DensityOperator::pure(&number_state(s, n).unwrap(), n.to_string()).unwrap())
            .collect();
        let fam = number_measurement(s);
        let loss = LossChannel::new(p).unwrap();
        let gain = GainChannel::new(g).unwrap();
        for (a, b) in represent_at_cut(&states, &fam, &loss, 0.0).unwrap().iter().flatten()
            .zip(represent_at_cut(&states, &fam, &loss, f).unwrap().iter().flatten())
        {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in represent_at_cut(&states, &fam, &gain, 1.0).unwrap().iter().flatten()
            .zip(represent_at_cut(&states, &fam, &gain, f).unwrap().iter().flatten())
        {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gain_preserves_trace(g in 1.0f64..2.5, n in 0usize..4) {
        let s = FockSpace::with_dim(80).unwrap();
        let rho = DensityOperator::pure(&number_state(s, n).unwrap(), "n").unwrap();
        let out = GainChannel::new(g).unwrap().apply(&rho).unwrap();
        prop_assert!((out.op().trace().re + out.tail_mass() - 1.0).abs() < 1e-9);
        prop_assert!(out.report().passed());
    }

    #[test]
    fn square_root_squares_back(a in amplitude(1.5), b in amplitude(1.5), w in 0.0f64..1.0) {
        let s = FockSpace::with_dim(20).unwrap();
        let op = &coherent(s, a).op().scale(w) + &coherent(s, b).op().scale(1.0 - w);
        let root = operator_sqrt(&op).unwrap();
        prop_assert!((&(&root * &root) - &op).max_abs() < 1e-9);
        prop_assert!((&(&root * &op) - &(&op * &root)).max_abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn wigner_overlap_is_a_trace(a in amplitude(1.5), b in amplitude(1.5)) {
        let s = FockSpace::with_dim(20).unwrap();
        let grid = PhaseSpaceGrid::square(7.0, 141).unwrap();
        let (ra, rb) = (coherent(s, a), coherent(s, b));
        let ov = overlap(&wigner_of_density(&ra, &grid).unwrap(), &wigner_of_density(&rb, &grid).unwrap()).unwrap();
        let tr = trace_product(ra.op(), rb.op()).unwrap().re;
        prop_assert!((ov - tr / (2.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn identity_element_has_unit_probability(alpha in amplitude(1.5)) {
        let s = FockSpace::with_dim(30).unwrap();
        let tr = trace_product(&ComplexOperator::identity(s), coherent(s, alpha).op()).unwrap().re;
        prop_assert!((tr - 1.0).abs() < 1e-12);
    }
}
