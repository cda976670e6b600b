use proptest::prelude::*;
use serde_json::json;

use semispec::config::RunConfig;
use semispec::harness::{CheckRecord, VerificationReport};
use semispec::scaling::{self, RegimeTag, RegimeThresholds};
use semispec::spectral::{self, SpectralOptions};
use semispec::stats::linear_fit;
use semispec::{EnergyWindow, HalfLinePotential, PotentialSpec, Tail};

fn admissible(gamma: f64, w0: f64, w1: f64) -> HalfLinePotential {
    HalfLinePotential::new(PotentialSpec {
        gamma,
        w_coeffs: vec![w0, w1],
        b: 0.5,
        c: 1.0,
        d: 2.0,
        tail: Tail::Continue,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classify_partitions_energies(
        e in 1e-6f64..1.0,
        h in 1e-4f64..0.05,
        gamma in 0.3f64..5.0,
        m in 1.0f64..20.0,
        eps in 0.05f64..0.8,
    ) {
        let scale = h.powf(scaling::bottom_exponent(gamma));
        let tag = scaling::classify(e, h, gamma, m, eps);
        match tag {
            RegimeTag::BottomOfWell { scaled_e, .. } => {
                prop_assert!(e <= m * scale);
                prop_assert!((scaled_e * scale - e).abs() <= 1e-12 * e);
            }
            RegimeTag::NonCritical => prop_assert!(e > m * scale && e >= eps),
            RegimeTag::Intermediate { hbar, .. } => {
                prop_assert!(e > m * scale && e < eps);
                // above the bottom band the rescaled parameter is below m^{-(γ+2)/(2γ)}
                prop_assert!(hbar < m.powf(-(gamma + 2.0) / (2.0 * gamma)) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn scaled_coefficients_preserve_the_potential(
        gamma in 0.5f64..4.0,
        w in prop::collection::vec(0.1f64..2.0, 1..4),
        e in 0.01f64..2.0,
        z in 0.0f64..3.0,
    ) {
        let ws = scaling::scaled_coeffs(&w, e, gamma);
        let poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        let s = e.powf(1.0 / gamma);
        let x = s * z;
        let original = x.powf(gamma) * poly(&w, x);
        let rescaled = e * z.powf(gamma) * poly(&ws, z);
        prop_assert!((original - rescaled).abs() <= 1e-12 * original.abs().max(1e-300));
    }

    #[test]
    fn rescaling_round_trips(
        w0 in 0.5f64..2.0,
        w1 in 0.0f64..1.0,
        gamma in 1.0f64..4.0,
        t in 0.1f64..0.9,
    ) {
        let pot = admissible(gamma, w0, w1);
        let h: f64 = 1e-4;
        let th = RegimeThresholds { m_bottom: 2.0, eps: 0.2 };
        let lo = th.m_bottom * h.powf(scaling::bottom_exponent(gamma));
        prop_assume!(lo < th.eps);
        let e = lo * (th.eps / lo).powf(t);
        let r = scaling::intermediate_rescale(&pot, e, h, th, 0.1).unwrap();
        let (e0, h0) = r.original_params();
        prop_assert!((e0 - e).abs() <= 1e-14 * e);
        prop_assert!((h0 - h).abs() <= 1e-12 * h);
        prop_assert!((r.to_original(r.to_scaled(0.7 * e)) - 0.7 * e).abs() <= 1e-14 * e);
        prop_assert!((r.hbar - scaling::hbar(e, h, gamma)).abs() <= 1e-14 * r.hbar);
        let ow = r.original_window();
        prop_assert!(ow.lo < e && e < ow.hi);
    }

    #[test]
    fn turning_point_solves_v_equals_e(
        gamma in 0.5f64..4.0,
        w0 in 0.5f64..2.0,
        w1 in 0.0f64..1.0,
        frac in 0.01f64..0.99,
    ) {
        let pot = admissible(gamma, w0, w1);
        let e = frac * pot.v_at_d();
        let x = pot.turning_point(e).unwrap();
        prop_assert!(x > 0.0 && x < pot.d());
        prop_assert!((pot.v(x) - e).abs() <= 1e-10 * e);
    }

    #[test]
    fn linear_fit_recovers_lines(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        xs in prop::collection::vec(-10.0f64..10.0, 3..20),
    ) {
        let spread = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        let ys: Vec<f64> = xs.iter().map(|x| a + b * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        prop_assert!((f.slope - b).abs() < 1e-8);
        prop_assert!((f.intercept - a).abs() < 1e-8);
    }

    #[test]
    fn report_ignores_record_order(
        values in prop::collection::vec((0usize..4, -1.0f64..1.0), 1..12),
        seed in any::<u64>(),
    ) {
        let names = ["alpha", "beta", "gamma", "delta"];
        let records: Vec<CheckRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &(n, m))| CheckRecord {
                check_name: names[n].into(),
                anchor: "test".into(),
                inputs: json!({ "i": i }),
                observed: m,
                bound: 0.0,
                pass: m >= 0.0,
                fit: None,
                margin: m,
                skipped: false,
            })
            .collect();
        let mut shuffled = records.clone();
        let len = shuffled.len();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = VerificationReport::new(records);
        let b = VerificationReport::new(shuffled);
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert_eq!(a.pass, values.iter().all(|&(_, m)| m >= 0.0));
    }

    #[test]
    fn config_round_trips(lo in 0.01f64..0.5, width in 0.01f64..0.5, h in 1e-4f64..0.05) {
        let mut cfg = RunConfig::default_family();
        cfg.window = [lo, lo + width];
        cfg.h_list = vec![h, 0.5 * h];
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn prufer_angle_increases_at_the_modulus_rate(
        gamma in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
        w1 in 0.0f64..0.5,
        lo in 0.2f64..0.4,
    ) {
        let pot = admissible(gamma, 1.0, w1);
        let h = 0.02;
        let opts = SpectralOptions::default();
        let curve = spectral::prufer_curve(&pot, EnergyWindow::new(lo, lo + 0.1), h, &opts).unwrap();
        for i in 1..curve.len() {
            prop_assert!(curve.theta[i] > curve.theta[i - 1]);
        }
        let e = lo + 0.05;
        let w = spectral::energy_wronskian(&pot, e, h, 1e-6, &opts.shooting).unwrap();
        prop_assert!((w - 1.0).abs() < 1e-3, "h Im(conj(Z) dZ/dE) = {}", w);
    }
}
