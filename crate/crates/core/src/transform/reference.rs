//! Closed-form Higgs eigenvalue curves for the 3+1 and 4+2 monopoles.

use crate::spherical::ClosedFormFamily;

/// Monopoles with a known Higgs field along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceFamily {
    ThreePlusOne,
    FourPlusTwo,
}

impl ReferenceFamily {
    pub fn of(family: ClosedFormFamily) -> Option<Self> {
        match family {
            ClosedFormFamily::ThreePlusOne => Some(Self::ThreePlusOne),
            ClosedFormFamily::NPlus2PlusN(2) => Some(Self::FourPlusTwo),
            _ => None,
        }
    }
}

// Taylor coefficients at r = 0, lowest order first.
const F31: [f64; 26] = [
    0.0, 0.4, 0.0, -0.045714285714285714, 0.0, 0.008126984126984127, 0.0,
    -0.0015620696763553907, 0.0, 0.000306568352282638, 0.0, -6.0549380240990217e-05, 0.0,
    1.1983346072608444e-05, 0.0, -2.3732246456703422e-06, 0.0, 4.7010760826528047e-07, 0.0,
    -9.312977465216104e-08, 0.0, 1.844976762563244e-08, 0.0, -3.655080871975174e-09, 0.0,
    7.24109666808653e-10,
];
const G31: [f64; 26] = [
    0.0, -0.13333333333333333, 0.0, -0.06603174603174604, 0.0, 0.018962962962962963, 0.0,
    -0.0029318124556219796, 0.0, 0.0002442154670726099, 0.0, -6.913435714645087e-06, 0.0,
    3.4889037940806796e-06, 0.0, -2.368392261656444e-06, 0.0, 7.303752687142025e-07, 0.0,
    -1.4400811272603343e-07, 0.0, 2.0363766444437662e-08, 0.0, -2.4635726445402006e-09, 0.0,
    4.329755280648728e-10,
];
const F42: [f64; 26] = [
    0.2, 0.32, -0.036571428571428574, -0.021942857142857142, 0.007151746031746032,
    0.001969052154195011, -0.0012672184704184703, -0.0001186159719645434,
    0.00020251504511814716, -8.930569512925976e-06, -2.913205623376036e-05,
    5.1529815361469445e-06, 3.7064346523879687e-06, -1.2598445795159191e-06,
    -3.9370204131127543e-07, 2.4120743551441776e-07, 2.7850071477896062e-08,
    -3.9988246865025336e-08, 1.019635754387374e-09, 5.894642708474788e-09,
    -9.227106780982221e-10, -7.682014309437477e-10, 2.3930705799760735e-10,
    8.45846227138336e-11, -4.710849260154028e-11, -6.60550477402883e-12,
];
const G42: [f64; 26] = [
    0.2, 0.16, 0.018285714285714287, 0.018285714285714287, -0.013978412698412698,
    -0.003102185941043084, 0.003092391341991342, 0.00017630278293135436,
    -0.0004105563373769088, 3.455867424085111e-07, 3.7757588834049965e-05,
    1.1924960861365656e-06, -2.8834496221717876e-06, -3.6634629648596615e-07,
    2.2615713910828353e-07, -2.276276672144148e-08, -8.041174227877099e-10,
    2.5710684162570984e-08, -8.130993414837762e-09, -6.3218336600446645e-09,
    2.486875164657392e-09, 1.0048658965645816e-09, -4.6298238605063085e-10,
    -1.2912829604853696e-10, 6.515533880609732e-11, 1.525328790952977e-11,
];

/// Below this |r| the exponential forms cancel badly and the series is used.
const SERIES_RADIUS: f64 = 0.5;

/// Polynomial with coefficients lowest order first.
fn poly(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * r + a)
}

/// `Σ_k e^{4kr} P_k(r)` for terms `(k, P_k)`, divided by `e^{4 k* r}` where
/// `k*` is the dominant power for the sign of `r`.
fn exp_sum(terms: &[(i32, f64)], r: f64, dominant: i32) -> f64 {
    terms
        .iter()
        .map(|&(k, p)| (4.0 * (k - dominant) as f64 * r).exp() * p)
        .sum()
}

fn ratio(num: &[(i32, f64)], den: &[(i32, f64)], r: f64) -> f64 {
    let ks = num.iter().chain(den).map(|x| x.0);
    let k = if r > 0.0 { ks.max() } else { ks.min() }.unwrap_or(0);
    exp_sum(num, r, k) / exp_sum(den, r, k)
}

fn f31(r: f64) -> f64 {
    if r.abs() <= SERIES_RADIUS {
        return poly(&F31, r);
    }
    let p1 = |r: f64| 4.0 * r * r - 6.0 * r + 3.0;
    let p2 = |r: f64| 4.0 * r * r - 2.0 * r;
    ratio(&[(1, p1(r)), (0, -p1(-r))], &[(1, p2(r)), (0, p2(-r))], r)
}

fn g31(r: f64) -> f64 {
    if r.abs() <= SERIES_RADIUS {
        return poly(&G31, r);
    }
    let p2 = |r: f64| 4.0 * r * r - 2.0 * r;
    let p3 = |r: f64| 4.0 * r * r - 6.0 * r + 1.0;
    let p4 = |r: f64| poly(&[-3.0, 6.0, 36.0, -32.0, 64.0], r);
    let p5 = |r: f64| poly(&[0.0, -6.0, 4.0, -32.0, 64.0], r);
    ratio(
        &[(3, p3(r)), (2, p4(r)), (1, -p4(-r)), (0, -p3(-r))],
        &[(3, -p2(r)), (2, p5(r)), (1, p5(-r)), (0, -p2(-r))],
        r,
    )
}

fn f42(r: f64) -> f64 {
    if r.abs() <= SERIES_RADIUS {
        return poly(&F42, r);
    }
    let p1 = poly(&[-6.0, 15.0, -16.0, 8.0], r);
    let p2 = poly(&[6.0, 9.0, 4.0], r);
    let p3 = poly(&[0.0, 3.0, -8.0, 8.0], r);
    let p4 = poly(&[0.0, 3.0, 4.0], r);
    ratio(&[(1, p1), (0, p2)], &[(1, p3), (0, -p4)], r)
}

fn g42(r: f64) -> f64 {
    if r.abs() <= SERIES_RADIUS {
        return poly(&G42, r);
    }
    let p4 = poly(&[0.0, 3.0, 4.0], r);
    let p5 = poly(&[-3.0, 27.0, -112.0, 224.0, -192.0, 64.0], r);
    let p6 = poly(&[-9.0, 45.0, -84.0, -80.0, 256.0, -64.0, 256.0], r);
    let p7 = poly(&[9.0, -9.0, -24.0, 112.0, 128.0, 128.0], r);
    let p8 = poly(&[3.0, 9.0, 4.0], r);
    let p9 = poly(&[0.0, 3.0, -32.0, 96.0, -128.0, 64.0], r);
    let p10 = poly(&[0.0, -9.0, 60.0, -48.0, 64.0, -192.0, 256.0], r);
    let p11 = poly(&[0.0, -9.0, 24.0, 48.0, 128.0, 128.0], r);
    ratio(
        &[(3, p5), (2, -p6), (1, -p7), (0, p8)],
        &[(3, p9), (2, p10), (1, -p11), (0, -p4)],
        r,
    )
}

/// The scalar curves `(F(r), G(r))` of a reference family.
pub fn reference_higgs(family: ReferenceFamily, r: f64) -> (f64, f64) {
    match family {
        ReferenceFamily::ThreePlusOne => (f31(r), g31(r)),
        ReferenceFamily::FourPlusTwo => (f42(r), g42(r)),
    }
}

/// Reference Higgs eigenvalues at `(r, 0, 0)`, ascending, `i` factored out.
///
/// 3+1 gives `{±F, ±G}`. 4+2 gives the diagonal of `Φ₀`, which has trace 1.
pub fn reference_eigenvalues(family: ReferenceFamily, r: f64) -> Vec<f64> {
    let (f, g) = reference_higgs(family, r);
    let mut v = match family {
        ReferenceFamily::ThreePlusOne => vec![f, -f, g, -g],
        ReferenceFamily::FourPlusTwo => {
            let (fm, gm) = reference_higgs(family, -r);
            vec![f, g, 1.0 - (f + fm + g + gm), fm, gm]
        }
    };
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
