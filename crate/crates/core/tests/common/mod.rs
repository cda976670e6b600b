//! Independent reference values shared by the integration tests.

#![allow(dead_code)]

use semispec::{HalfLinePotential, PotentialSpec, Tail};

/// First four zeros of Ai, frozen.
pub const AIRY_ZEROS: [f64; 4] = [2.338_107_410_46, 4.087_949_444_13, 5.520_559_828_1, 6.786_708_090_07];

/// `Ai(x)` from its Maclaurin series; accurate to ~1e−13 for |x| ≤ 8.
pub fn airy_ai(x: f64) -> f64 {
    const AI0: f64 = 0.355_028_053_887_817_2;
    const DAI0: f64 = 0.258_819_403_792_806_8;
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 - 1.0) * k3);
        tg *= x3 / (k3 * (k3 + 1.0));
        f += tf;
        g += tg;
        if tf.abs() + tg.abs() < 1e-18 * (f.abs() + g.abs()) {
            break;
        }
    }
    AI0 * f - DAI0 * g
}

/// Zeros `z` of `Ai(−z)` by bisection inside the given brackets.
pub fn airy_zero(lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let fa = airy_ai(-a);
    assert!(fa * airy_ai(-b) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (airy_ai(-m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn airy_zeros() -> [f64; 4] {
    [
        airy_zero(2.0, 3.0),
        airy_zero(3.5, 4.5),
        airy_zero(5.0, 6.0),
        airy_zero(6.5, 7.0),
    ]
}

pub fn potential(gamma: f64, w: &[f64], b: f64, c: f64, d: f64) -> HalfLinePotential {
    HalfLinePotential::new(PotentialSpec {
        gamma,
        w_coeffs: w.to_vec(),
        b,
        c,
        d,
        tail: Tail::Continue,
    })
    .unwrap()
}

pub fn harmonic() -> HalfLinePotential {
    potential(2.0, &[1.0], 0.6, 0.95, 1.5)
}

/// γ = 1/2 members on the window [1.6, 2.0] with `b = x_E(1.6)/2`,
/// `c = 1.15 x_E(2.0)` and `d = 2c`.
pub fn sqrt_family() -> Vec<(String, HalfLinePotential)> {
    [
        ("flat", vec![1.0]),
        ("linear", vec![1.0, 0.5]),
        ("quadratic", vec![1.0, 0.0, 0.25]),
    ]
    .into_iter()
    .map(|(name, w)| {
        let rough = potential(0.5, &w, 2.5, 5.0, 10.0);
        let c = 1.15 * rough.turning_point(2.0).unwrap();
        let b = 0.5 * rough.turning_point(1.6).unwrap();
        (format!("g0.5-{name}"), rough.with_markers(b, c, 2.0 * c).unwrap())
    })
    .collect()
}
