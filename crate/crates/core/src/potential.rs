//! Admissible half-line potentials `V(x) = x^γ W(x)` with polynomial `W`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour of the potential beyond the outer marker `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// `V(x) = V(d)` for `x > d`.
    Plateau,
    /// Keep evaluating `x^γ W(x)`; admissible only if it stays above `V(d)`.
    Continue,
}

/// Document form of a potential, as read from TOML/JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub gamma: f64,
    pub w_coeffs: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tail: Tail,
}

/// Closed energy interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo && e <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

const ADMISSIBILITY_GRID: usize = 4096;

/// A validated potential. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLinePotential {
    spec: PotentialSpec,
    v_d: f64,
}

impl HalfLinePotential {
    /// Validates `spec` on dense grids and returns the potential.
    pub fn new(spec: PotentialSpec) -> Result<Self> {
        let PotentialSpec { gamma, b, c, d, .. } = spec;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Admissibility(format!("gamma = {gamma} must be positive")));
        }
        if spec.w_coeffs.is_empty() || spec.w_coeffs.iter().any(|w| !w.is_finite()) {
            return Err(Error::Admissibility("w_coeffs must be non-empty and finite".into()));
        }
        if !(0.0 < b && b < c && c < d && d.is_finite()) {
            return Err(Error::Admissibility(format!(
                "markers must satisfy 0 < b < c < d, got b = {b}, c = {c}, d = {d}"
            )));
        }
        let pot = Self { v_d: 0.0, spec };
        if pot.w(0.0) <= 0.0 {
            return Err(Error::Admissibility("W(0) must be positive".into()));
        }
        let n = ADMISSIBILITY_GRID;
        for i in 0..=n {
            let x = d * i as f64 / n as f64;
            if pot.w(x) <= 0.0 {
                return Err(Error::Admissibility(format!("W({x}) <= 0")));
            }
            if i > 0 && pot.formula(x, 1) <= 0.0 {
                return Err(Error::Admissibility(format!("V'({x}) <= 0 on (0, d]")));
            }
        }
        let v_d = pot.formula(d, 0);
        if pot.spec.tail == Tail::Continue {
            // the continued formula has to stay above V(d) on a long sampled range
            for i in 1..=n {
                let x = d * (1.0 + 9.0 * i as f64 / n as f64);
                if pot.formula(x, 0) < v_d {
                    return Err(Error::Admissibility(format!(
                        "continued tail drops below V(d) at x = {x}"
                    )));
                }
            }
        }
        Ok(Self { v_d, ..pot })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    pub fn b(&self) -> f64 {
        self.spec.b
    }

    pub fn c(&self) -> f64 {
        self.spec.c
    }

    pub fn d(&self) -> f64 {
        self.spec.d
    }

    pub fn tail(&self) -> Tail {
        self.spec.tail
    }

    /// `V(d)`, the top of the energy range where the spectrum is studied.
    pub fn v_at_d(&self) -> f64 {
        self.v_d
    }

    pub fn w0(&self) -> f64 {
        self.spec.w_coeffs[0]
    }

    /// `W(x)` by Horner's rule.
    pub fn w(&self, x: f64) -> f64 {
        self.spec.w_coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn w_derivs(&self, x: f64) -> (f64, f64, f64) {
        let (mut w, mut w1, mut w2) = (0.0, 0.0, 0.0);
        for &c in self.spec.w_coeffs.iter().rev() {
            w2 = w2 * x + 2.0 * w1;
            w1 = w1 * x + w;
            w = w * x + c;
        }
        (w, w1, w2)
    }

    fn formula(&self, x: f64, order: u8) -> f64 {
        let g = self.spec.gamma;
        let (w, w1, w2) = self.w_derivs(x);
        if x == 0.0 {
            return match order {
                0 => 0.0,
                1 if g == 1.0 => w,
                1 => 0.0,
                _ if g == 1.0 => 2.0 * w1,
                _ if g == 2.0 => 2.0 * w,
                _ => 0.0,
            };
        }
        let xg = x.powf(g);
        match order {
            0 => xg * w,
            1 => xg * (g * w / x + w1),
            _ => xg * (g * (g - 1.0) * w / (x * x) + 2.0 * g * w1 / x + w2),
        }
    }

    /// Potential value. Beyond `d` the tail rule applies.
    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        if x > self.spec.d && self.spec.tail == Tail::Plateau {
            self.v_d
        } else {
            self.formula(x, 0)
        }
    }

    /// `V`, `V'` or `V''` at `x ≥ 0`.
    ///
    /// `V'` is singular at the origin for `γ < 1`, and `V''` for `γ < 2`
    /// except at `γ = 1` where `x^γ W` is smooth.
    pub fn eval_v(&self, x: f64, order: u8) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: "potential evaluated at negative x".into(),
                x,
            });
        }
        if order > 2 {
            return Err(Error::Domain {
                what: format!("derivative order {order} not supported"),
                x,
            });
        }
        let g = self.spec.gamma;
        if x == 0.0 {
            let singular = match order {
                1 => g < 1.0,
                2 => g < 2.0 && g != 1.0,
                _ => false,
            };
            if singular {
                return Err(Error::Domain {
                    what: format!("V derivative of order {order} is singular for gamma = {g}"),
                    x,
                });
            }
        }
        if x > self.spec.d && self.spec.tail == Tail::Plateau {
            return Ok(if order == 0 { self.v_d } else { 0.0 });
        }
        Ok(self.formula(x, order))
    }

    /// The unique `x_E ∈ (0, d)` with `V(x_E) = e`.
    pub fn turning_point(&self, e: f64) -> Result<f64> {
        if !(e > 0.0 && e < self.v_d) {
            return Err(Error::Window {
                e,
                lo: 0.0,
                hi: self.v_d,
            });
        }
        let (mut lo, mut hi) = (0.0, self.spec.d);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.formula(mid, 0) < e {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Minimum of `V'` sampled on `[lo, hi] ⊂ (0, d]`.
    pub fn min_dv(&self, lo: f64, hi: f64, grid_n: usize) -> f64 {
        let hi = hi.min(self.spec.d);
        let lo = lo.max(0.0);
        (0..=grid_n)
            .map(|i| lo + (hi - lo) * i as f64 / grid_n as f64)
            .filter(|&x| x > 0.0)
            .map(|x| self.formula(x, 1))
            .fold(f64::INFINITY, f64::min)
    }

    /// Grid-minimized constants on `window` (see [`UniformConstants`]).
    pub fn uniform_constants(&self, window: EnergyWindow, grid_n: usize) -> Result<UniformConstants> {
        let (b, c, d) = (self.b(), self.c(), self.d());
        if !(window.lo > 0.0 && window.hi < self.v_d && window.lo <= window.hi) {
            return Err(Error::Admissibility(format!(
                "window [{}, {}] must lie inside (0, V(d) = {})",
                window.lo, window.hi, self.v_d
            )));
        }
        let n = grid_n.max(2);
        let sample = |lo: f64, hi: f64| (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64);
        // E − V and V − E are monotone in E, so the window endpoints are extremal
        let kappa_o = sample(0.0, b)
            .map(|x| window.lo - self.v(x))
            .fold(f64::INFINITY, f64::min);
        let kappa_e = sample(c, d)
            .map(|x| self.v(x) - window.hi)
            .fold(f64::INFINITY, f64::min);
        let m_sup = sample(b, d)
            .map(|x| self.v(x) - window.lo)
            .fold(f64::NEG_INFINITY, f64::max);
        let delta = self.min_dv(b, c, n);
        let uc = UniformConstants {
            kappa_o,
            kappa_e,
            delta,
            m_sup,
            window,
            grid_n: n,
        };
        if kappa_o <= 0.0 {
            return Err(Error::Admissibility(format!(
                "[0, b] not classically allowed over the window (kappa_o = {kappa_o})"
            )));
        }
        if kappa_e <= 0.0 {
            return Err(Error::Admissibility(format!(
                "[c, inf) not classically forbidden over the window (kappa_e = {kappa_e})"
            )));
        }
        if delta <= 0.0 {
            return Err(Error::Admissibility(format!(
                "V' not positive on [b, c] (delta = {delta})"
            )));
        }
        Ok(uc)
    }

    /// Same potential with new markers.
    pub fn with_markers(&self, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(PotentialSpec {
            b,
            c,
            d,
            ..self.spec.clone()
        })
    }
}

/// Uniform lower/upper bounds over `[0, ∞) × window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformConstants {
    /// `min (E − V)` over `[0, b] × K`.
    pub kappa_o: f64,
    /// `min (V − E)` over `[c, ∞) × K`.
    pub kappa_e: f64,
    /// `min V'` over `[b, c]`.
    pub delta: f64,
    /// `sup (V − E)` over `[b, d] × K`.
    pub m_sup: f64,
    pub window: EnergyWindow,
    pub grid_n: usize,
}

impl UniformConstants {
    /// `min V'` over `[a, c]` for `a ≤ b`.
    pub fn delta_a(&self, pot: &HalfLinePotential, a: f64) -> Result<f64> {
        if !(a > 0.0 && a <= pot.b()) {
            return Err(Error::Precondition(format!("need 0 < a <= b, got a = {a}")));
        }
        let v = pot.min_dv(a, pot.c(), self.grid_n);
        if v <= 0.0 {
            return Err(Error::Admissibility(format!("delta_a = {v} not positive")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(gamma: f64, w: &[f64]) -> HalfLinePotential {
        HalfLinePotential::new(PotentialSpec {
            gamma,
            w_coeffs: w.to_vec(),
            b: 0.6,
            c: 0.95,
            d: 1.5,
            tail: Tail::Continue,
        })
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let h = power(2.0, &[1.0]);
        assert_eq!(h.eval_v(0.5, 0).unwrap(), 0.25);
        assert_eq!(h.eval_v(0.5, 1).unwrap(), 1.0);
        assert_eq!(h.eval_v(0.5, 2).unwrap(), 2.0);
        let s = power(0.5, &[1.0]);
        assert!((s.eval_v(0.25, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = power(1.5, &[1.0, 0.5, 0.25]);
        for &x in &[0.1, 0.4, 0.9, 1.3] {
            let dx = 1e-5;
            let fd1 = (p.v(x + dx) - p.v(x - dx)) / (2.0 * dx);
            let fd2 = (p.v(x + dx) - 2.0 * p.v(x) + p.v(x - dx)) / (dx * dx);
            assert!((p.eval_v(x, 1).unwrap() - fd1).abs() < 1e-8);
            assert!((p.eval_v(x, 2).unwrap() - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn singular_derivatives_at_origin() {
        assert!(matches!(power(0.5, &[1.0]).eval_v(0.0, 1), Err(Error::Domain { .. })));
        assert!(matches!(power(1.5, &[1.0]).eval_v(0.0, 2), Err(Error::Domain { .. })));
        assert_eq!(power(1.5, &[1.0]).eval_v(0.0, 1).unwrap(), 0.0);
        assert_eq!(power(1.0, &[1.0, 0.5]).eval_v(0.0, 1).unwrap(), 1.0);
        assert_eq!(power(1.0, &[1.0, 0.5]).eval_v(0.0, 2).unwrap(), 1.0);
        assert!(power(2.0, &[1.0]).eval_v(-0.1, 0).is_err());
    }

    #[test]
    fn plateau_tail() {
        let p = HalfLinePotential::new(PotentialSpec {
            gamma: 2.0,
            w_coeffs: vec![1.0],
            b: 0.6,
            c: 0.95,
            d: 1.5,
            tail: Tail::Plateau,
        })
        .unwrap();
        assert_eq!(p.v(3.0), 2.25);
        assert_eq!(p.eval_v(3.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn rejects_inadmissible_specs() {
        let base = PotentialSpec {
            gamma: 2.0,
            w_coeffs: vec![1.0],
            b: 0.6,
            c: 0.95,
            d: 1.5,
            tail: Tail::Continue,
        };
        let bad_w0 = PotentialSpec {
            w_coeffs: vec![-1.0],
            ..base.clone()
        };
        assert!(HalfLinePotential::new(bad_w0).is_err());
        let bad_markers = PotentialSpec { b: 1.0, ..base.clone() };
        assert!(HalfLinePotential::new(bad_markers).is_err());
        // W = 1 - x has V' < 0 near x = 1
        let non_monotone = PotentialSpec {
            w_coeffs: vec![1.0, -1.0],
            ..base.clone()
        };
        assert!(HalfLinePotential::new(non_monotone).is_err());
        // x^2 (1 - x/2) is increasing on (0, 1.333), decreasing after
        let falling_tail = PotentialSpec {
            w_coeffs: vec![1.0, -0.5],
            d: 1.2,
            ..base
        };
        assert!(HalfLinePotential::new(falling_tail).is_err());
    }

    #[test]
    fn turning_point_examples() {
        assert!((power(2.0, &[1.0]).turning_point(0.25).unwrap() - 0.5).abs() < 1e-13);
        assert!((power(1.0, &[1.0]).turning_point(1.0).unwrap() - 1.0).abs() < 1e-13);
        let quartic = power(4.0, &[1.0, 1.0]);
        let x = quartic.turning_point(0.5).unwrap();
        assert!((quartic.v(x) - 0.5).abs() <= 1e-12 * 0.5);
        assert!((x - 0.732_906_721_332_718).abs() < 1e-11);
        assert!(matches!(quartic.turning_point(0.0), Err(Error::Window { .. })));
        assert!(matches!(quartic.turning_point(100.0), Err(Error::Window { .. })));
    }

    #[test]
    fn uniform_constants_examples() {
        let p = power(2.0, &[1.0]);
        let uc = p.uniform_constants(EnergyWindow::new(0.5, 0.75), 4096).unwrap();
        assert!((uc.kappa_o - 0.14).abs() < 1e-12);
        assert!((uc.kappa_e - 0.1525).abs() < 1e-12);
        assert!((uc.delta - 1.2).abs() < 1e-12);
        assert!((uc.delta_a(&p, 0.6).unwrap() - 1.2).abs() < 1e-12);
        assert!((uc.m_sup - (2.25 - 0.5)).abs() < 1e-12);
        // window reaching into [0, b]
        assert!(p.uniform_constants(EnergyWindow::new(0.3, 0.75), 4096).is_err());
    }
}
