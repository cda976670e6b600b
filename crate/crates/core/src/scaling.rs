//! Regime classification and the two rescalings used to reduce low energies
//! to problems of fixed size: the bottom-of-well model `A = −∂² + W(0)y^γ`
//! at `h = 1`, and the intermediate rescaling to the parameter `h̄`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{EnergyWindow, HalfLinePotential, PotentialSpec, Tail};
use crate::quad;
use crate::spectral::{find_eigenvalues, BoundaryCondition, SpectralOptions};

/// Exponent `2γ/(γ+2)` of the bottom-of-well energy scale.
pub fn bottom_exponent(gamma: f64) -> f64 {
    2.0 * gamma / (gamma + 2.0)
}

/// `h̄ = h E^{−(2+γ)/(2γ)}`.
pub fn hbar(e: f64, h: f64, gamma: f64) -> f64 {
    h * e.powf(-(2.0 + gamma) / (2.0 * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegimeTag {
    /// `alpha = 2/(γ+2)` is the exponent of the rescaled variable
    /// `y = x h^{−α}`, and `scaled_e = E h^{−2γ/(γ+2)}`.
    BottomOfWell {
        alpha: f64,
        scaled_e: f64,
    },
    /// The problem rescaled by `x = E^{1/γ} z` has parameter `hbar`.
    Intermediate {
        hbar: f64,
        length_scale: f64,
    },
    NonCritical,
}

impl RegimeTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::BottomOfWell { .. } => "bottom",
            RegimeTag::Intermediate { .. } => "intermediate",
            RegimeTag::NonCritical => "non_critical",
        }
    }
}

/// Thresholds `m_bottom` and `eps` splitting `(0, V(d))` into three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub m_bottom: f64,
    pub eps: f64,
}

impl RegimeThresholds {
    /// `m_bottom = 10` and `eps` half the bottom of the non-critical window.
    pub fn for_window(window: EnergyWindow) -> Self {
        Self {
            m_bottom: 10.0,
            eps: 0.5 * window.lo,
        }
    }
}

pub fn classify(e: f64, h: f64, gamma: f64, m_bottom: f64, eps: f64) -> RegimeTag {
    let scale = h.powf(bottom_exponent(gamma));
    if e <= m_bottom * scale {
        RegimeTag::BottomOfWell {
            alpha: 2.0 / (gamma + 2.0),
            scaled_e: e / scale,
        }
    } else if e >= eps {
        RegimeTag::NonCritical
    } else {
        RegimeTag::Intermediate {
            hbar: hbar(e, h, gamma),
            length_scale: e.powf(1.0 / gamma),
        }
    }
}

/// Bohr–Sommerfeld estimate of the `n`-th level (counted from 1) of
/// `−∂² + w0 y^γ`.
fn model_level_estimate(gamma: f64, w0: f64, n: usize) -> f64 {
    let beta = quad::integrate(|t: f64| (1.0 - t.powf(gamma)).sqrt(), 0.0, 1.0, 1e-12, 1e-10);
    // ∫₀^{x_E} √(E − w0 y^γ) dy = β E^{(γ+2)/(2γ)} w0^{−1/γ}
    let action = std::f64::consts::PI * n as f64;
    (action * w0.powf(1.0 / gamma) / beta).powf(2.0 * gamma / (gamma + 2.0))
}

/// The model potential `W(0) y^γ` with a plateau beyond `d`.
pub fn model_potential(gamma: f64, w0: f64, d: f64) -> Result<HalfLinePotential> {
    HalfLinePotential::new(PotentialSpec {
        gamma,
        w_coeffs: vec![w0],
        b: 0.25 * d,
        c: 0.5 * d,
        d,
        tail: Tail::Plateau,
    })
}

/// First `count` eigenvalues of the model on `[0, cap]` with plateau at `d`.
pub fn model_spectrum_in(
    gamma: f64,
    w0: f64,
    d: f64,
    cap: f64,
    bc: BoundaryCondition,
    count: usize,
    opts: &SpectralOptions,
) -> Result<Vec<f64>> {
    let model = model_potential(gamma, w0, d)?;
    if cap >= model.v_at_d() {
        return Err(Error::Window {
            e: cap,
            lo: 0.0,
            hi: model.v_at_d(),
        });
    }
    let spec = find_eigenvalues(&model, EnergyWindow::new(0.0, cap), 1.0, bc, opts)?;
    if spec.len() < count {
        return Err(Error::Admissibility(format!(
            "model window [0, {cap}] holds {} of {count} requested eigenvalues; raise D = {d}",
            spec.len()
        )));
    }
    Ok(spec.eigenvalues[..count].to_vec())
}

/// First `count` eigenvalues `a_k` of `A = −v″ + W(0) y^γ v` under `bc`.
pub fn bottom_model_spectrum(
    pot: &HalfLinePotential,
    bc: BoundaryCondition,
    count: usize,
    opts: &SpectralOptions,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    let (gamma, w0) = (pot.gamma(), pot.w0());
    let cap = 1.5 * model_level_estimate(gamma, w0, count + 1) + 1.0;
    let d = 3.0 * (cap / w0).powf(1.0 / gamma);
    model_spectrum_in(gamma, w0, d, cap, bc, count, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottomRow {
    pub h: f64,
    pub k: usize,
    pub scaled_e: f64,
    pub model_a: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottomReport {
    pub bc: BoundaryCondition,
    pub model: Vec<f64>,
    pub rows: Vec<BottomRow>,
    /// `(h, min spacing · h^{−2γ/(γ+2)})` per swept `h`.
    pub spacing_c: Vec<(f64, f64)>,
    /// `(h, max_k |E_k h^{−2γ/(γ+2)} − a_k|)` per swept `h`.
    pub max_err: Vec<(f64, f64)>,
}

impl BottomReport {
    /// Errors decrease along the sweep (sorted by decreasing `h`), or all
    /// sit below `floor`.
    pub fn monotone(&self, floor: f64) -> bool {
        let mut e: Vec<(f64, f64)> = self.max_err.clone();
        e.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        e.iter().all(|&(_, v)| v <= floor) || e.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,k,scaled_E,model_a,abs_err\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:e},{},{:e},{:e},{:e}\n",
                r.h, r.k, r.scaled_e, r.model_a, r.abs_err
            ));
        }
        s
    }
}

/// Scaled low-lying eigenvalues against the model spectrum over `h_list`.
/// Each search window reaches the scaled level `a_{count+1}`, leaving room
/// for the upward shift from higher terms of `W`.
pub fn bottom_check(
    pot: &HalfLinePotential,
    bc: BoundaryCondition,
    h_list: &[f64],
    count: usize,
    opts: &SpectralOptions,
) -> Result<BottomReport> {
    let mut model = bottom_model_spectrum(pot, bc, count + 1, opts)?;
    let top = model.pop().unwrap();
    let p = bottom_exponent(pot.gamma());
    let mut rows = Vec::new();
    let mut spacing_c = Vec::new();
    let mut max_err = Vec::new();
    for &h in h_list {
        let scale = h.powf(p);
        let window = EnergyWindow::new(0.0, top * scale);
        let spec = find_eigenvalues(pot, window, h, bc, opts)?;
        if spec.len() < count {
            return Err(Error::Admissibility(format!(
                "bottom window at h = {h} holds {} of {count} eigenvalues",
                spec.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for (k, (&e, &a)) in spec.eigenvalues.iter().zip(&model).enumerate() {
            let scaled_e = e / scale;
            let abs_err = (scaled_e - a).abs();
            worst = worst.max(abs_err);
            rows.push(BottomRow {
                h,
                k,
                scaled_e,
                model_a: a,
                abs_err,
            });
        }
        let dmin = spec.spacing[..count].iter().cloned().fold(f64::INFINITY, f64::min);
        spacing_c.push((h, dmin / scale));
        max_err.push((h, worst));
    }
    Ok(BottomReport {
        bc,
        model,
        rows,
        spacing_c,
        max_err,
    })
}

/// A problem rescaled from `(E, h)` to energies near 1 at parameter `hbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub potential: HalfLinePotential,
    pub hbar: f64,
    pub window: EnergyWindow,
    /// Reference energy `E` of the rescaling.
    pub e: f64,
    pub h: f64,
    pub gamma: f64,
}

impl Rescaled {
    pub fn to_original(&self, e_scaled: f64) -> f64 {
        e_scaled * self.e
    }

    pub fn to_scaled(&self, e: f64) -> f64 {
        e / self.e
    }

    /// Recovers `(E, h)` from the reference energy and `hbar`.
    pub fn original_params(&self) -> (f64, f64) {
        (self.e, self.hbar * self.e.powf((2.0 + self.gamma) / (2.0 * self.gamma)))
    }

    pub fn original_window(&self) -> EnergyWindow {
        EnergyWindow::new(self.to_original(self.window.lo), self.to_original(self.window.hi))
    }
}

/// Coefficients of `z ↦ W(E^{1/γ} z)`.
pub fn scaled_coeffs(w: &[f64], e: f64, gamma: f64) -> Vec<f64> {
    let s = e.powf(1.0 / gamma);
    w.iter().enumerate().map(|(j, &c)| c * s.powi(j as i32)).collect()
}

/// Rescales an intermediate-regime energy `e` to a non-critical problem with
/// window `[1 − delta, 1 + delta]`.
pub fn intermediate_rescale(
    pot: &HalfLinePotential,
    e: f64,
    h: f64,
    thresholds: RegimeThresholds,
    delta: f64,
) -> Result<Rescaled> {
    let gamma = pot.gamma();
    let tag = classify(e, h, gamma, thresholds.m_bottom, thresholds.eps);
    if !matches!(tag, RegimeTag::Intermediate { .. }) {
        return Err(Error::Precondition(format!(
            "E = {e}, h = {h} is in the {} regime, not intermediate",
            tag.name()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta = {delta} must lie in (0, 1)")));
    }
    let scale = e.powf(1.0 / gamma);
    let w_coeffs = scaled_coeffs(&pot.spec().w_coeffs, e, gamma);
    let d = pot.d() / scale;
    let rough = HalfLinePotential::new(PotentialSpec {
        gamma,
        w_coeffs: w_coeffs.clone(),
        b: 0.25 * d,
        c: 0.5 * d,
        d,
        tail: pot.tail(),
    })?;
    let z_lo = rough.turning_point(1.0 - delta)?;
    let z_hi = rough.turning_point(1.0 + delta)?;
    let potential = rough.with_markers(0.85 * z_lo, (1.15 * z_hi).min(0.5 * (z_hi + d)), d)?;
    Ok(Rescaled {
        potential,
        hbar: hbar(e, h, gamma),
        window: EnergyWindow::new(1.0 - delta, 1.0 + delta),
        e,
        h,
        gamma,
    })
}
