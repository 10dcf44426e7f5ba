mod common;

use common::{random_anti_hermitian, random_rotation, random_triple, random_unitary};
use nahm_forge::nahm::{
    act, act_orthogonal, conserved, extract_residue, integrate_flow, nahm_rhs, spectral_coeffs, Endpoint,
    FlowOptions, NahmError, NahmSolution, NahmTriple, Side, SolutionRecord,
};
use nahm_forge::numerics::{CMat, C};
use nahm_forge::so3rep::{check_homomorphism, irrep_generators};
use nahm_forge::spherical::{ChainBasis, ClosedFormFamily};
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<ClosedFormFamily> {
    let mut v = vec![ClosedFormFamily::ThreePlusOne, ClosedFormFamily::FivePlusThreePlusOne];
    v.extend((2..=4).map(ClosedFormFamily::NPlus2PlusN));
    v
}

fn diag_triple(entries: [[f64; 3]; 3]) -> NahmTriple<f64> {
    NahmTriple::new(std::array::from_fn(|i| {
        CMat::from_diagonal(&nalgebra::DVector::from_fn(3, |k, _| C::new(0.0, entries[i][k])))
    }))
    .unwrap()
}

fn direct_spectral(t: &NahmTriple<f64>) -> [C<f64>; 5] {
    let i = C::new(0.0, 1.0);
    let p = [
        t.get(0) + t.get(1) * i,
        t.get(2) * C::new(0.0, -2.0),
        t.get(0) - t.get(1) * i,
    ];
    let mut out = [C::new(0.0, 0.0); 5];
    for a in 0..3 {
        for b in 0..3 {
            out[a + b] += (&p[a] * &p[b]).trace();
        }
    }
    out
}

#[test]
fn rejects_non_su_matrices() {
    let mut m = CMat::<f64>::identity(2, 2);
    m[(0, 1)] = C::new(1.0, 0.0);
    let z = CMat::zeros(2, 2);
    assert!(matches!(NahmTriple::new([m, z.clone(), z.clone()]), Err(NahmError::NotSuN { .. })));
    let traced = CMat::from_diagonal_element(2, 2, C::new(0.0, 1.0));
    assert!(matches!(NahmTriple::new([traced, z.clone(), z]), Err(NahmError::NotSuN { .. })));
}

#[test]
fn commuting_triple_has_zero_rhs() {
    let t = diag_triple([[1.0, -0.5, -0.5], [0.2, 0.3, -0.5], [2.0, -1.0, -1.0]]);
    assert_eq!(nahm_rhs(&t).norm(), 0.0);
}

#[test]
fn irrep_is_a_fixed_point_of_f_squared() {
    for n in 2..=5 {
        let y = irrep_generators::<f64>(n);
        let t = NahmTriple::new(y.as_triple().clone()).unwrap();
        assert!(nahm_rhs(&t).distance(&t) < 1e-13);
    }
}

#[test]
fn three_plus_one_rhs_matches_derivative_at_origin() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    let rhs = nahm_rhs(&s.eval(0.0).unwrap());
    assert!(rhs.distance(&s.derivative(0.0).unwrap()) < 1e-14);
    // f' = (1 + t²)/(1 - t²)², g' = 2t/(1 - t²)²: f'(0) = 1, g'(0) = 0
    let basis = ChainBasis::<f64>::new(ClosedFormFamily::ThreePlusOne.spec());
    let want = basis
        .assemble(&nahm_forge::spherical::ChainProfile::new(vec![1.0], vec![0.0]))
        .unwrap();
    assert!(rhs.distance(&want) < 1e-14);
}

#[test]
fn closed_form_residuals() {
    for fam in families() {
        let s = NahmSolution::<f64>::closed_form(fam);
        let grid: Vec<f64> = (0..101).map(|i| -0.9 + 1.8 * i as f64 / 100.0).collect();
        assert!(s.nahm_residual(&grid).unwrap() < 1e-10, "{fam}");
    }
}

#[test]
fn conserved_for_single_nonzero_component() {
    let z = CMat::zeros(3, 3);
    let t3 = CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C::new(0.0, 1.0),
        C::new(0.0, -0.25),
        C::new(0.0, -0.75),
    ]));
    let t = NahmTriple::new([z.clone(), z, t3.clone()]).unwrap();
    let c = conserved(&t);
    let tr33: f64 = (&t3 * &t3).trace().re;
    assert!((c.c[4] + tr33).abs() < 1e-15 && c.c[4] > 0.0);
    assert_eq!(&c.c[..4], &[0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn conserved_matrix_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=5 {
        let c = conserved(&random_triple(&mut rng, n, 1.0));
        assert!(c.cmatrix.trace().abs() < 1e-12);
        assert_eq!(c.cmatrix, c.cmatrix.transpose());
        let back = nahm_forge::nahm::ConservedSet::from_matrix(c.cmatrix);
        assert!(back.max_diff(&c) < 1e-12);
    }
}

#[test]
fn spectral_coefficients_match_direct_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 2..=6 {
        for _ in 0..10 {
            let t = random_triple(&mut rng, n, 1.0);
            let a = spectral_coeffs(&t);
            let b = direct_spectral(&t);
            for k in 0..5 {
                assert!((a[k] - b[k]).norm() < 1e-12, "n = {n}, k = {k}");
            }
        }
    }
    assert!(spectral_coeffs(&NahmTriple::<f64>::zeros(3)).iter().all(|c| c.norm() == 0.0));
}

#[test]
fn spherical_data_has_trivial_spectral_curve() {
    for fam in families() {
        let s = NahmSolution::<f64>::closed_form(fam);
        for t in [-0.7, 0.1, 0.6] {
            let c = spectral_coeffs(&s.eval(t).unwrap());
            assert!(c.iter().all(|v| v.norm() < 1e-10), "{fam}");
        }
    }
}

#[test]
fn action_identity_and_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = random_triple(&mut rng, 3, 1.0);
    let id = CMat::identity(3, 3);
    assert_eq!(act(&t, &Matrix3::identity(), &id).unwrap(), t);
    let reflect = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0));
    assert!(matches!(act(&t, &reflect, &id), Err(NahmError::NotRotation { .. })));
    assert!(act_orthogonal(&t, &reflect, &id).is_ok());
    let shear = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    assert!(matches!(act_orthogonal(&t, &shear, &id), Err(NahmError::NotRotation { .. })));
    let bad = CMat::identity(3, 3) * C::new(1.1, 0.0);
    assert!(matches!(act(&t, &Matrix3::identity(), &bad), Err(NahmError::NotUnitary { .. })));
}

#[test]
fn rotation_and_gauge_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 2..=5 {
        let t = random_triple(&mut rng, n, 1.0);
        let a = random_rotation(&mut rng);
        let u = random_unitary(&mut rng, n);
        let id3 = Matrix3::identity();
        let idn = CMat::identity(n, n);
        let x = act(&act(&t, &a, &idn).unwrap(), &id3, &u).unwrap();
        let y = act(&act(&t, &id3, &u).unwrap(), &a, &idn).unwrap();
        assert!(x.distance(&y) < 1e-12);
        assert!(x.distance(&act(&t, &a, &u).unwrap()) < 1e-12);
    }
}

#[test]
fn conserved_matrix_is_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 2..=5 {
        let t = random_triple(&mut rng, n, 1.0);
        let a = random_rotation(&mut rng);
        let u = random_unitary(&mut rng, n);
        let lhs = conserved(&act(&t, &a, &u).unwrap()).cmatrix;
        let rhs = a * conserved(&t).cmatrix * a.transpose();
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn flow_commutes_with_the_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let opts = FlowOptions::default();
    for n in [2, 3, 4] {
        let seed = random_triple(&mut rng, n, 0.5);
        let a = random_rotation(&mut rng);
        let u = random_unitary(&mut rng, n);
        let flow = integrate_flow(&seed, 0.0, -0.4, 0.4, &opts).unwrap();
        let acted = integrate_flow(&act(&seed, &a, &u).unwrap(), 0.0, -0.4, 0.4, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for t in flow.interior_grid(41, 1e-3) {
            let lhs = act(&flow.eval(t).unwrap(), &a, &u).unwrap();
            worst = worst.max(lhs.distance(&acted.eval(t).unwrap()));
        }
        assert!(worst < 1e-8, "n = {n}: {worst:e}");
    }
}

#[test]
fn reflection_gives_anti_nahm_solutions() {
    let reflect = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0));
    for fam in families() {
        let s = NahmSolution::<f64>::closed_form(fam);
        let id = CMat::identity(s.dim(), s.dim());
        let r = s.act_orthogonal(&reflect, &id).unwrap();
        let grid = r.interior_grid(101, 0.1);
        assert!(r.anti_nahm_residual(&grid).unwrap() < 1e-8, "{fam}");
        assert!(r.nahm_residual(&grid).unwrap() > 1e-3);
        assert!(s.act(&reflect, &id).is_err());
    }
}

#[test]
fn acted_solution_still_solves_nahm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::NPlus2PlusN(2));
    let a = random_rotation(&mut rng);
    let u = random_unitary(&mut rng, 6);
    let acted = s.act(&a, &u).unwrap();
    let grid = acted.interior_grid(101, 0.1);
    assert!(acted.nahm_residual(&grid).unwrap() < 1e-10);
    let t = 0.37;
    let want = act(&s.eval(t).unwrap(), &a, &u).unwrap();
    assert!(acted.eval(t).unwrap().distance(&want) < 1e-12);
}

#[test]
fn pullback_identity_and_normalization() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    let same = s.affine_pullback(1.0, 0.0);
    assert_eq!(same.domain(), (-1.0, 1.0));
    assert!(same.eval(0.3).unwrap().distance(&s.eval(0.3).unwrap()) == 0.0);

    // a solution on (α, β) = (-0.6, 0.4)
    let moved = s.affine_pullback(2.0, 0.2);
    let (lo, hi) = moved.domain();
    assert!((lo + 0.6).abs() < 1e-15 && (hi - 0.4).abs() < 1e-15);
    let grid = moved.interior_grid(101, 0.05);
    assert!(moved.nahm_residual(&grid).unwrap() < 1e-9);
    let back = moved.normalized();
    assert_eq!(back.domain(), (-1.0, 1.0));
    assert!(back.eval(0.5).unwrap().distance(&s.eval(0.5).unwrap()) < 1e-12);
}

#[test]
fn pullback_with_negative_scale_swaps_endpoints() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::NPlus2PlusN(2));
    let r = s.affine_pullback(-1.0, 0.0);
    assert_eq!(r.domain(), (-1.0, 1.0));
    let grid = r.interior_grid(101, 0.1);
    assert!(r.nahm_residual(&grid).unwrap() < 1e-10);
    assert_eq!(r.pole_representation(1.0, Side::Left).unwrap().to_string(), "{2:3}");
    assert_eq!(r.pole_representation(-1.0, Side::Right).unwrap().to_string(), "{3:2}");
}

#[test]
fn pullback_preserves_residues() {
    for fam in families() {
        let s = NahmSolution::<f64>::closed_form(fam);
        for (a, b) in [(0.5, 0.25), (3.0, -1.0), (-2.0, 0.5)] {
            let p = s.affine_pullback(a, b);
            for e in [-1.0, 1.0] {
                let tau: f64 = (e - b) / a;
                let side = p.inner_side(tau);
                let exact = s.residue_at(e, s.inner_side(e)).unwrap();
                let pulled = p.residue_at(tau, side).unwrap();
                assert!(pulled.distance(&exact) < 1e-12, "{fam}");
                let num = p.residue_numeric(tau, side).unwrap();
                assert!(num.distance(&exact) < 1e-6, "{fam} a = {a}");
            }
        }
    }
}

#[test]
fn residue_examples() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    for (e, side) in [(1.0, Side::Left), (-1.0, Side::Right)] {
        let r = s.residue_at(e, side).unwrap();
        assert!(check_homomorphism(r.scale(-1.0).as_triple()) < 1e-12);
        assert!(check_homomorphism(r.as_triple()) > 0.1);
    }
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::NPlus2PlusN(2));
    let r = s.residue_at(1.0, Side::Left).unwrap();
    let basis = ChainBasis::<f64>::new(ClosedFormFamily::NPlus2PlusN(2).spec());
    let p = ClosedFormFamily::NPlus2PlusN(2).closed_form_residues::<f64>(1.0).unwrap();
    assert!((p.g[0] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!(r.distance(&basis.assemble(&p).unwrap()) < 1e-14);
}

#[test]
fn interior_point_is_not_a_pole() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    assert!(matches!(s.residue_at(0.0, Side::Left), Err(NahmError::NotSimplePole { .. })));
    assert!(matches!(s.residue_numeric(0.0, Side::Right), Err(NahmError::NotSimplePole { .. })));
    assert!(matches!(s.residue_numeric(0.5, Side::Right), Err(NahmError::NotSimplePole { .. })));
}

#[test]
fn double_pole_is_rejected() {
    let y = irrep_generators::<f64>(2);
    let f = |t: f64| Ok(NahmTriple::from_raw(y.as_triple().clone()).scale(1.0 / (t * t)));
    assert!(matches!(extract_residue(f, 0.0, Side::Right), Err(NahmError::NotSimplePole { .. })));
    let g = |t: f64| Ok(NahmTriple::from_raw(y.as_triple().clone()).scale(-1.0 / t + 3.0 + t));
    let r = extract_residue(g, 0.0, Side::Right).unwrap();
    assert!(r.distance(&NahmTriple::from_raw(y.as_triple().clone()).scale(-1.0)) < 1e-12);
}

#[test]
fn pole_representations() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::NPlus2PlusN(2));
    assert_eq!(s.pole_representation(1.0, Side::Left).unwrap().to_string(), "{3:2}");
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    assert_eq!(s.pole_representation(-1.0, Side::Right).unwrap().to_string(), "{2:2}");
}

fn flow_through_origin(fam: ClosedFormFamily) -> (NahmSolution<f64>, NahmSolution<f64>, f64, f64) {
    let exact = NahmSolution::<f64>::closed_form(fam);
    let flow = integrate_flow(&exact.eval(0.0).unwrap(), 0.0, -3.0, 3.0, &FlowOptions::default()).unwrap();
    let f = flow.numeric().unwrap();
    let (Endpoint::Pole { t: lo }, Endpoint::Pole { t: hi }) = (f.left, f.right) else {
        panic!("{fam}: {:?} {:?}", f.left, f.right);
    };
    (exact, flow, lo, hi)
}

#[test]
fn numeric_flow_finds_poles_and_residues() {
    let fams = [
        ClosedFormFamily::ThreePlusOne,
        ClosedFormFamily::FivePlusThreePlusOne,
        ClosedFormFamily::NPlus2PlusN(2),
    ];
    for fam in fams {
        let (exact, flow, lo, hi) = flow_through_origin(fam);
        assert!((lo + 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7, "{fam}: {lo} {hi}");
        let grid = flow.interior_grid(101, 0.05);
        let res = flow.nahm_residual(&grid).unwrap();
        assert!(res < 1e-8, "{fam}: {res:e}");
        for (e, side) in [(hi, Side::Left), (lo, Side::Right)] {
            let num = flow.residue_at(e, side).unwrap();
            let want = exact.residue_at(e.signum(), side).unwrap();
            assert!(check_homomorphism(num.scale(-1.0).as_triple()) < 1e-6, "{fam}");
            assert!(num.distance(&want) < 1e-6, "{fam} at {e}: {:e}", num.distance(&want));
            assert_eq!(
                flow.pole_representation(e, side).unwrap(),
                exact.pole_representation(e.signum(), side).unwrap()
            );
        }
        assert!(matches!(flow.residue_at(0.0, Side::Left), Err(NahmError::NotSimplePole { .. })));
    }
}

#[test]
fn forward_flow_of_wider_chains_leaves_the_family() {
    // growing modes at +1 push the numeric flow onto a neighbouring pole
    for n in [3, 4] {
        let (exact, flow, lo, hi) = flow_through_origin(ClosedFormFamily::NPlus2PlusN(n));
        assert!((lo + 1.0).abs() < 1e-7);
        assert!(hi < 1.0 - 1e-7);
        let num = flow.residue_at(lo, Side::Right).unwrap();
        assert!(num.distance(&exact.residue_at(-1.0, Side::Right).unwrap()) < 1e-6);
        assert_eq!(flow.pole_representation(lo, Side::Right).unwrap().to_string(), format!("{{2:{}}}", n + 1));
    }
}

#[test]
fn flows_conserve_invariants_and_stay_in_su_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [2, 3, 4] {
        let seed = random_triple(&mut rng, n, 0.6);
        let flow = integrate_flow(&seed, 0.0, -0.5, 0.5, &FlowOptions::default()).unwrap();
        let c0 = conserved(&seed);
        let s0 = spectral_coeffs(&seed);
        for t in flow.interior_grid(51, 1e-3) {
            let x = flow.eval(t).unwrap();
            assert!(conserved(&x).max_diff(&c0) < 1e-8);
            let s = spectral_coeffs(&x);
            assert!((0..5).all(|k| (s[k] - s0[k]).norm() < 1e-8));
            assert!(x.su_deviation() < 1e-9);
        }
    }
}

#[test]
fn regular_flow_ends_are_regular() {
    let t = NahmTriple::new(std::array::from_fn(|_| CMat::<f64>::zeros(2, 2))).unwrap();
    let flow = integrate_flow(&t, 0.0, -1.0, 2.0, &FlowOptions::default()).unwrap();
    let f = flow.numeric().unwrap();
    assert_eq!(f.left, Endpoint::Regular { t: -1.0 });
    assert_eq!(f.right, Endpoint::Regular { t: 2.0 });
}

fn round_trip(s: &NahmSolution<f64>) -> NahmSolution<f64> {
    let json = serde_json::to_string(&s.to_record()).unwrap();
    let rec: SolutionRecord = serde_json::from_str(&json).unwrap();
    NahmSolution::from_record(&rec).unwrap()
}

#[test]
fn json_round_trip_of_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for fam in families() {
        let s = NahmSolution::<f64>::closed_form(fam);
        let dressed = s
            .affine_pullback(-0.5, 0.1)
            .act(&random_rotation(&mut rng), &random_unitary(&mut rng, s.dim()))
            .unwrap();
        for v in [s, dressed] {
            let back = round_trip(&v);
            assert_eq!(back.domain(), v.domain());
            for t in v.interior_grid(7, 0.05) {
                assert!(back.eval(t).unwrap().distance(&v.eval(t).unwrap()) < 1e-12);
            }
        }
    }
    let rec = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne).to_record();
    let v = serde_json::to_value(&rec).unwrap();
    assert_eq!(v["kind"], "closed-form");
    assert_eq!(v["family"], "3+1");
    assert_eq!(v["domain"], serde_json::json!([-1.0, 1.0]));
}

#[test]
fn json_round_trip_of_numeric_flow() {
    let exact = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    let flow = integrate_flow(&exact.eval(0.0).unwrap(), 0.0, -0.9, 0.9, &FlowOptions::default()).unwrap();
    let back = round_trip(&flow);
    assert_eq!(back.domain(), flow.domain());
    let rec = flow.to_record();
    assert_eq!(rec.kind, "numeric");
    assert_eq!(rec.samples.as_ref().unwrap()[0].len(), 2 * 3 * 16);
    for t in flow.interior_grid(31, 1e-3) {
        let d = back.eval(t).unwrap().distance(&flow.eval(t).unwrap());
        assert!(d < 1e-7, "{t}: {d:e}");
    }
}

#[test]
fn malformed_records_are_rejected() {
    let mut rec = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne).to_record();
    rec.kind = "mystery".into();
    assert!(matches!(NahmSolution::<f64>::from_record(&rec), Err(NahmError::Malformed(_))));
    let mut rec = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne).to_record();
    rec.family = None;
    assert!(NahmSolution::<f64>::from_record(&rec).is_err());
}

#[test]
fn interleaved_layout() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let t = random_triple(&mut rng, 3, 1.0);
    let v = t.to_interleaved();
    assert_eq!(v[0], t.get(0)[(0, 0)].re);
    assert_eq!(v[3], t.get(0)[(0, 1)].im);
    assert_eq!(v[18], t.get(1)[(0, 0)].re);
    assert_eq!(NahmTriple::from_interleaved(3, &v).unwrap(), t);
}

#[test]
fn outside_domain_is_an_error() {
    let s = NahmSolution::<f64>::closed_form(ClosedFormFamily::ThreePlusOne);
    assert!(matches!(s.eval(1.0), Err(NahmError::OutsideDomain { .. })));
    assert!(matches!(s.eval(-2.0), Err(NahmError::OutsideDomain { .. })));
}

proptest! {
    #[test]
    fn rhs_is_equivariant(seed in 0u64..1000, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triple(&mut rng, n, 1.0);
        let a = random_rotation(&mut rng);
        let u = random_unitary(&mut rng, n);
        let lhs = nahm_rhs(&act(&t, &a, &u).unwrap());
        let rhs = act(&nahm_rhs(&t), &a, &u).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-11);
    }

    #[test]
    fn rhs_preserves_su_n(seed in 0u64..1000, n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triple(&mut rng, n, 2.0);
        prop_assert!(nahm_rhs(&t).su_deviation() < 1e-12);
    }

    #[test]
    fn conserved_quantities_are_gauge_invariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triple(&mut rng, 4, 1.0);
        let u = random_unitary(&mut rng, 4);
        let g = act(&t, &Matrix3::identity(), &u).unwrap();
        prop_assert!(conserved(&g).max_diff(&conserved(&t)) < 1e-12);
        let _ = random_anti_hermitian(&mut rng, 2, 1.0);
    }
}
