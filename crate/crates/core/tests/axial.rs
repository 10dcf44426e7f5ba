mod common;

use common::{random_anti_hermitian, random_triple};
use nahm_forge::axial::{
    ad_squared_has_minus_one, axial_reduced_rhs, check_axial, integrate_su3_reduced, su3_example_solution,
    su3_minus_one_dim, su3_reduced_rhs, y_alpha_beta, AxialError, AxialGenerator, Su3AxialState, Su3ClosedForm,
};
use nahm_forge::nahm::{conserved, integrate_flow, nahm_rhs, FlowOptions, NahmSolution, NahmTriple, Side};
use nahm_forge::numerics::{commutator, CMat, OdeOptions, C};
use nahm_forge::spherical::{ChainBasis, ClosedFormFamily};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn state(a: f64, b: f64, z: f64) -> Su3AxialState<f64> {
    Su3AxialState::new(a, b, C::new(z, 0.0))
}

fn random_state(rng: &mut ChaCha8Rng) -> Su3AxialState<f64> {
    Su3AxialState::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
    )
}

#[test]
fn spherical_data_is_axial_about_the_third_generator() {
    let fam = ClosedFormFamily::NPlus2PlusN(2);
    let basis = ChainBasis::<f64>::new(fam.spec());
    let y3 = AxialGenerator::new(basis.generators().get(2).clone()).unwrap();
    let s = NahmSolution::<f64>::closed_form(fam);
    for t in [-0.5, 0.2, 0.8] {
        assert!(check_axial(&s.eval(t).unwrap(), &y3) < 1e-10);
    }
}

#[test]
fn ansatz_is_axial() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..10 {
        let s = random_state(&mut rng);
        assert!(check_axial(&s.to_triple(), &s.generator()) < 1e-12);
    }
}

#[test]
fn random_data_is_not_axial() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let t = random_triple(&mut rng, 3, 1.0);
    let y = AxialGenerator::new(random_anti_hermitian(&mut rng, 3, 1.0)).unwrap();
    assert!(check_axial(&t, &y) > 0.1);
}

#[test]
fn generator_must_be_anti_hermitian() {
    let m = CMat::<f64>::identity(3, 3);
    assert!(matches!(AxialGenerator::new(m), Err(AxialError::NotAntiHermitian(_))));
}

#[test]
fn ad_squared_examples() {
    let y = AxialGenerator::new(CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C::new(0.0, 0.5),
        C::new(0.0, 0.0),
        C::new(0.0, -0.5),
    ])))
    .unwrap();
    let (hit, spec) = ad_squared_has_minus_one(&y);
    assert!(hit);
    assert_eq!(spec.len(), 9);
    assert!((spec[0] + 1.0).abs() < 1e-12 && spec[8].abs() < 1e-12);
    let (hit, _) = ad_squared_has_minus_one(&AxialGenerator::new(CMat::<f64>::zeros(3, 3)).unwrap());
    assert!(!hit);
    for alpha in [0.1, 0.4, 0.8] {
        assert!(ad_squared_has_minus_one(&y_alpha_beta(alpha, alpha - 1.0)).0);
        assert!(ad_squared_has_minus_one(&y_alpha_beta(alpha, 0.5 * (1.0 - alpha))).0);
        assert!(ad_squared_has_minus_one(&y_alpha_beta(alpha, 1.0 - 2.0 * alpha)).0);
    }
    assert!(!ad_squared_has_minus_one(&y_alpha_beta(0.3, 0.25)).0);
}

#[test]
fn minus_one_dimensions() {
    assert_eq!(su3_minus_one_dim(0.5, 0.0), 2);
    assert_eq!(su3_minus_one_dim(1.0, 0.0), 4);
    assert_eq!(su3_minus_one_dim(2.0, 2.0), 0);
    assert_eq!(su3_minus_one_dim(1.0 / 3.0, 1.0 / 3.0), 4);
}

#[test]
fn reduced_rhs_example() {
    let s = state(1.0, 0.0, 1.0);
    let (dz, da, db) = su3_reduced_rhs(&s);
    assert_eq!((dz, da, db), (C::new(1.0, 0.0), 2.0, -2.0));
    let (d1, d3) = axial_reduced_rhs(&s.t1(), &s.t3(), &s.generator()).unwrap();
    let want = Su3AxialState::new(da, db, dz);
    assert!((d1 - want.t1()).norm() < 1e-14);
    assert!((d3 - want.t3()).norm() < 1e-14);
}

#[test]
fn reduced_rhs_vanishes_for_zero_t1() {
    let s = state(0.4, -0.3, 0.0);
    let (d1, d3) = axial_reduced_rhs(&CMat::zeros(3, 3), &s.t3(), &s.generator()).unwrap();
    assert_eq!(d1.norm() + d3.norm(), 0.0);
}

#[test]
fn reduced_rhs_rejects_non_commuting_t3() {
    let s = state(0.4, -0.3, 0.5);
    let mut t3 = s.t3();
    t3[(0, 1)] = C::new(0.3, 0.0);
    t3[(1, 0)] = C::new(-0.3, 0.0);
    assert!(matches!(
        axial_reduced_rhs(&s.t1(), &t3, &s.generator()),
        Err(AxialError::GeneratorMismatch(_))
    ));
}

/// Random admissible data for `Y_{α,β}`: `T₁` in the `-1` eigenspace of
/// `ad_Y²`, `T₃` diagonal.
fn admissible(rng: &mut ChaCha8Rng, alpha: f64, beta: f64) -> (CMat<f64>, CMat<f64>) {
    let d = [alpha, beta, -(alpha + beta)];
    let mut t1 = CMat::zeros(3, 3);
    for i in 0..3 {
        for j in i + 1..3 {
            if ((d[i] - d[j]).abs() - 1.0).abs() < 1e-12 {
                let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                t1[(i, j)] = z;
                t1[(j, i)] = -z.conj();
            }
        }
    }
    let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let t3 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C::new(0.0, x),
        C::new(0.0, y),
        C::new(0.0, -x - y),
    ]));
    (t1, t3)
}

#[test]
fn reduced_rhs_agrees_with_full_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (alpha, beta) in [(0.5, 0.0), (1.0, 0.0), (0.3, -0.7), (1.0 / 3.0, 1.0 / 3.0), (0.7, 0.15)] {
        let y = y_alpha_beta(alpha, beta);
        for _ in 0..10 {
            let (t1, t3) = admissible(&mut rng, alpha, beta);
            let t2 = commutator(y.matrix(), &t1);
            let full = nahm_rhs(&NahmTriple::from_raw([t1.clone(), t2, t3.clone()]));
            let (d1, d3) = axial_reduced_rhs(&t1, &t3, &y).unwrap();
            assert!((d1 - full.get(0)).norm() < 1e-12);
            assert!((d3 - full.get(2)).norm() < 1e-12);
            // T₂ = [Y,T₁] is preserved by the flow
            assert!((commutator(y.matrix(), full.get(0)) - full.get(1)).norm() < 1e-12);
        }
    }
}

#[test]
fn conserved_quantities_of_the_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let (a, b, z): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let c = conserved(&state(a, b, z).to_triple());
        let expected = a * a + b * b + (a + b) * (a + b) - 2.0 * z * z;
        assert!((c.c[4] - expected).abs() < 1e-12);
        // axial symmetry forces C₁₁ = C₂₂
        assert!(c.c[3].abs() < 1e-12);
        assert!(c.c[..3].iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn closed_form_branches() {
    let f = Su3ClosedForm::<f64>::with_branch(0.0, 1.0, 0.0, 0);
    for t in [1.5, 2.0, 7.0] {
        assert!((f.big_a(t) + 1.0 / (t - 1.0)).abs() < 1e-15);
    }
    let f = Su3ClosedForm::<f64>::containing(1.0, 0.0, 0.0, PI / 4.0).unwrap();
    assert_eq!(f.domain(), (0.0, PI));
    assert!((f.big_a(PI / 4.0) + 1.0).abs() < 1e-14);
    let f = Su3ClosedForm::<f64>::containing(-1.0, 0.0, 0.0, 40.0).unwrap();
    assert!((f.big_a(40.0) + 1.0).abs() < 1e-14);
    let f = Su3ClosedForm::<f64>::containing(-1.0, 0.0, 0.0, -40.0).unwrap();
    assert_eq!(f.branch, -1);
    assert!((f.big_a(-40.0) - 1.0).abs() < 1e-14);
    let f = Su3ClosedForm::<f64>::containing(4.0, 0.5, 0.0, -1.0).unwrap();
    assert_eq!(f.branch, -1);
    assert_eq!(f.domain(), (0.5 - PI / 2.0, 0.5));
}

#[test]
fn singular_points_are_rejected() {
    assert!(matches!(su3_example_solution::<f64>(1.0, 0.0, PI, 0.0), Err(AxialError::SingularPoint(_))));
    assert!(matches!(su3_example_solution::<f64>(0.0, 2.0, 2.0, 0.0), Err(AxialError::SingularPoint(_))));
    assert!(matches!(su3_example_solution::<f64>(-3.0, 0.0, 0.0, 0.0), Err(AxialError::SingularPoint(_))));
}

#[test]
fn example_solution_reconstructs_constants() {
    for (k, c, k1, t) in [(1.0, 0.0, 0.0, 0.7), (2.5, -0.3, 0.4, 1.0), (0.0, 1.0, -1.0, 3.0), (-2.0, 0.0, 0.5, 0.8)] {
        let (s, triple) = su3_example_solution::<f64>(k, c, t, k1).unwrap();
        let cs = s.constants();
        assert!((cs.k1 - k1).abs() < 1e-13);
        assert!((cs.big_k - k).abs() < 1e-12 * (1.0 + s.a * s.a));
        assert!(triple.su_deviation() < 1e-14);
        let sol = NahmSolution::axial(Su3ClosedForm::<f64>::containing(k, c, k1, t).unwrap());
        let grid: Vec<f64> = (0..21).map(|i| t - 0.05 + 0.005 * i as f64).collect();
        assert!(sol.nahm_residual(&grid).unwrap() < 1e-9, "K = {k}");
    }
}

#[test]
fn state_derivative_matches_reduced_equations() {
    let f = Su3ClosedForm::<f64>::containing(1.3, 0.2, 0.7, 1.0).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let s = f.state(t).unwrap();
        let d = f.state_derivative(t).unwrap();
        let (dz, da, db) = su3_reduced_rhs(&s);
        assert!((d.a - da).abs() < 1e-12 && (d.b - db).abs() < 1e-12 && (d.z - dz).norm() < 1e-12);
    }
}

#[test]
fn closed_form_from_state_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..200 {
        let seed = random_state(&mut rng);
        let t0 = rng.gen_range(-1.0..1.0);
        let f = match Su3ClosedForm::from_state(&seed, t0) {
            Ok(f) => f,
            Err(AxialError::Degenerate) => continue,
            Err(e) => panic!("{e}"),
        };
        let (canon, u) = seed.canonical();
        let got = f.state(t0).unwrap();
        let scale = 1.0 + seed.a.abs() + seed.b.abs();
        assert!((got.a - canon.a).abs() < 1e-10 * scale);
        assert!((got.b - canon.b).abs() < 1e-10 * scale);
        assert!((got.z - canon.z).norm() < 1e-10 * scale);
        let moved = seed.to_triple().map(|m| &u * m * u.adjoint());
        assert!(moved.distance(&canon.to_triple()) < 1e-12 * scale);
    }
}

#[test]
fn equilibrium_is_degenerate() {
    assert!(matches!(
        Su3ClosedForm::from_state(&state(0.5, 0.5, 0.0), 0.0),
        Err(AxialError::Degenerate)
    ));
}

#[test]
fn numeric_reduced_flow_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let opts = OdeOptions::default().with_tolerances(1e-12, 1e-14);
    for _ in 0..20 {
        let seed = random_state(&mut rng);
        let Ok(f) = Su3ClosedForm::from_state(&seed, 0.0) else { continue };
        let (lo, hi) = f.domain();
        let end = (hi - 1e-3).min(4.0);
        let (traj, _) = integrate_su3_reduced(&seed, 0.0, end, &opts).unwrap();
        let k0 = seed.constants();
        for i in 1..=50 {
            let t = if i == 50 { end } else { end * i as f64 / 50.0 };
            let s = Su3AxialState::from_slice(traj.eval(t).unwrap().as_slice());
            let big_a = f.big_a(t);
            assert!(((s.a - s.b) - big_a).abs() < 1e-8 * big_a.abs().max(1.0), "t = {t}");
            let k = s.constants();
            assert!((k.k1 - k0.k1).abs() < 1e-9);
            assert!((k.k2 - k0.k2).abs() < 1e-9 * (s.a * s.a + s.z.norm_sqr()).max(1.0));
        }
        assert!(lo < 0.0);
    }
}

#[test]
fn reduced_flow_embeds_in_full_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let opts = OdeOptions::default().with_tolerances(1e-12, 1e-14);
    for _ in 0..5 {
        let seed = Su3AxialState::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), C::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
        let (traj, _) = integrate_su3_reduced(&seed, 0.0, 0.5, &opts).unwrap();
        let full = integrate_flow(&seed.to_triple(), 0.0, -0.1, 0.5, &FlowOptions::default()).unwrap();
        let c0 = conserved(&seed.to_triple());
        for i in 1..=10 {
            let t = 0.5 * i as f64 / 10.0 - 1e-9;
            let reduced = Su3AxialState::from_slice(traj.eval(t).unwrap().as_slice()).to_triple();
            let x = full.eval(t).unwrap();
            assert!(reduced.distance(&x) < 1e-8);
            assert!(conserved(&x).max_diff(&c0) < 1e-8);
        }
    }
}

#[test]
fn residues_at_the_singular_point() {
    let f = Su3ClosedForm::<f64>::containing(1.0, 0.0, 0.3, 1.0).unwrap();
    let sol = NahmSolution::axial(f);
    for (e, side) in [(PI, Side::Left), (0.0, Side::Right)] {
        let exact = sol.residue_at(e, side).unwrap();
        let num = sol.residue_numeric(e, side).unwrap();
        assert!(exact.distance(&num) < 1e-6);
    }
    assert!(sol.residue_at(1.0, Side::Left).is_err());
    // the residue triple spans a 2 + 1 representation on ℂ³
    let rep = sol.pole_representation(PI, Side::Left).unwrap();
    assert_eq!(rep.to_string(), "{2:1, 1:1}");
}

#[test]
fn closed_form_domains_for_nonpositive_k() {
    let f = Su3ClosedForm::<f64>::containing(-1.0, 0.5, 0.0, 2.0).unwrap();
    let (lo, hi) = f.domain();
    assert_eq!(lo, 0.5);
    assert!(hi.is_infinite());
    let sol = NahmSolution::axial(f);
    let grid: Vec<f64> = (0..101).map(|i| 0.6 + 0.05 * i as f64).collect();
    assert!(sol.nahm_residual(&grid).unwrap() < 1e-9);
}

#[test]
fn record_round_trip() {
    let sol = NahmSolution::axial(Su3ClosedForm::<f64>::containing(2.0, 0.1, -0.4, 0.5).unwrap()).affine_pullback(0.5, 0.2);
    let json = serde_json::to_string(&sol.to_record()).unwrap();
    let back = NahmSolution::<f64>::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
    for t in [0.0, 0.4, 1.0] {
        assert!(back.eval(t).unwrap().distance(&sol.eval(t).unwrap()) < 1e-13);
    }
}

proptest! {
    #[test]
    fn su3_dimension_matches_spectrum(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, pick in 0usize..4) {
        // snap onto a gap of one every so often
        let beta = match pick {
            0 => alpha - 1.0,
            1 => 0.5 * (1.0 - alpha),
            2 => 1.0 - 2.0 * alpha,
            _ => beta,
        };
        let (_, spec) = ad_squared_has_minus_one(&y_alpha_beta(alpha, beta));
        let count = spec.iter().filter(|v| (*v + 1.0).abs() < 1e-10).count();
        prop_assert_eq!(su3_minus_one_dim(alpha, beta), count);
    }

    #[test]
    fn canonical_chart_preserves_the_flow(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng);
        let (c, _) = s.canonical();
        let (dz, da, db) = su3_reduced_rhs(&s);
        let (dzc, dac, dbc) = su3_reduced_rhs(&c);
        prop_assert!((da - dac).abs() < 1e-12 && (db - dbc).abs() < 1e-12);
        prop_assert!((dz.norm() - dzc.norm()).abs() < 1e-12);
        prop_assert!(c.z.im == 0.0 && c.z.re >= 0.0);
    }
}
