#![allow(dead_code)]

use nahm_forge::nahm::NahmTriple;
use nahm_forge::numerics::{qr, CMat, C};
use nalgebra::Matrix3;
use rand::Rng;

pub fn random_anti_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMat<f64> {
    let a = CMat::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut m = (&a - a.adjoint()) * C::new(0.5 * scale, 0.0);
    let tr = m.trace() / C::new(n as f64, 0.0);
    for i in 0..n {
        m[(i, i)] -= tr;
    }
    m
}

pub fn random_triple(rng: &mut impl Rng, n: usize, scale: f64) -> NahmTriple<f64> {
    NahmTriple::new(std::array::from_fn(|_| random_anti_hermitian(rng, n, scale))).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMat<f64> {
    let a = CMat::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    qr(&a).0
}

pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = a.qr().q();
    if q.determinant() < 0.0 {
        -q
    } else {
        q
    }
}
