//! Run configuration documents (TOML) shared by the CLI and the harness.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{EnergyWindow, HalfLinePotential, PotentialSpec, Tail};
use crate::scaling::RegimeThresholds;
use crate::shooting::ShootingOptions;
use crate::spectral::{BoundaryCondition, SpectralOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Dirichlet,
    Neumann,
    #[default]
    Both,
}

impl BcChoice {
    pub fn list(self) -> Vec<BoundaryCondition> {
        match self {
            BcChoice::Dirichlet => vec![BoundaryCondition::Dirichlet],
            BcChoice::Neumann => vec![BoundaryCondition::Neumann],
            BcChoice::Both => vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
        }
    }
}

impl std::str::FromStr for BcChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BcChoice::Dirichlet),
            "neumann" => Ok(BcChoice::Neumann),
            "both" => Ok(BcChoice::Both),
            _ => Err(Error::Config(format!("unknown boundary condition {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Local relative/absolute tolerance of the ODE integrator.
    pub ode: f64,
    pub max_dtheta: f64,
    pub e_tol: f64,
    pub bc_tol: f64,
    pub decay_action: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SpectralOptions::default();
        Self {
            ode: s.shooting.tol,
            max_dtheta: s.max_dtheta,
            e_tol: s.e_tol,
            bc_tol: s.bc_tol,
            decay_action: s.shooting.decay_action,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgmonConfig {
    pub eta: f64,
    /// Energies sampled per window.
    pub energies: usize,
}

impl Default for AgmonConfig {
    fn default() -> Self {
        Self { eta: 0.3, energies: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    pub m_bottom: f64,
    /// Defaults to half the lower end of the window.
    pub eps: Option<f64>,
    /// Number of low-lying levels compared with the model.
    pub bottom_count: usize,
    /// Half-width `Δ` of the rescaled window `[1 − Δ, 1 + Δ]`.
    pub delta: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            m_bottom: 10.0,
            eps: None,
            bottom_count: 3,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WkbConfig {
    /// Energies sampled per window.
    pub energies: usize,
}

impl Default for WkbConfig {
    fn default() -> Self {
        Self { energies: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPotential {
    pub name: String,
    #[serde(flatten)]
    pub spec: PotentialSpec,
    /// Overrides the run-wide window for this potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub window: [f64; 2],
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub bc: BcChoice,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub agmon: AgmonConfig,
    #[serde(default)]
    pub regime: RegimeConfig,
    #[serde(default)]
    pub wkb: WkbConfig,
    #[serde(rename = "potential")]
    pub potentials: Vec<NamedPotential>,
}

/// A validated potential with its resolved window.
#[derive(Debug, Clone)]
pub struct Member {
    pub name: String,
    pub potential: HalfLinePotential,
    pub window: EnergyWindow,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn spectral_options(&self) -> SpectralOptions {
        let t = &self.tolerances;
        SpectralOptions {
            max_dtheta: t.max_dtheta,
            e_tol: t.e_tol,
            bc_tol: t.bc_tol,
            shooting: ShootingOptions {
                tol: t.ode,
                decay_action: t.decay_action,
                ..ShootingOptions::default()
            },
        }
    }

    pub fn thresholds(&self, window: EnergyWindow) -> RegimeThresholds {
        RegimeThresholds {
            m_bottom: self.regime.m_bottom,
            eps: self.regime.eps.unwrap_or(0.5 * window.lo),
        }
    }

    /// Checks scalar fields, then builds every potential. The first
    /// inadmissible potential aborts with its name in the message.
    pub fn members(&self) -> Result<Vec<Member>> {
        if self.h_list.is_empty() || self.h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Config("h_list must be non-empty with positive entries".into()));
        }
        if self.potentials.is_empty() {
            return Err(Error::Config("at least one [[potential]] is required".into()));
        }
        let t = &self.tolerances;
        if [t.ode, t.max_dtheta, t.e_tol, t.bc_tol, t.decay_action]
            .iter()
            .any(|&v| !(v > 0.0))
        {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let mut names: Vec<&str> = self.potentials.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate potential name {:?}", w[0])));
        }
        self.potentials
            .iter()
            .map(|entry| {
                let [lo, hi] = entry.window.unwrap_or(self.window);
                if !(0.0 <= lo && lo < hi) {
                    return Err(Error::Config(format!(
                        "potential {}: window [{lo}, {hi}] is empty or negative",
                        entry.name
                    )));
                }
                let potential = HalfLinePotential::new(entry.spec.clone()).map_err(|e| match e {
                    Error::Admissibility(m) => Error::Admissibility(format!("potential {}: {m}", entry.name)),
                    other => other,
                })?;
                if hi >= potential.v_at_d() {
                    return Err(Error::Admissibility(format!(
                        "potential {}: window top {hi} is not below V(d) = {}",
                        entry.name,
                        potential.v_at_d()
                    )));
                }
                Ok(Member {
                    name: entry.name.clone(),
                    potential,
                    window: EnergyWindow::new(lo, hi),
                })
            })
            .collect()
    }

    /// γ ∈ {1/2, 1, 2, 4} times W ∈ {1, 1 + x/2, 1 + x²/4} on the window
    /// `[0.5, 0.75]`, with `b = 0.85 x_E(0.5)`, `c = 1.15 x_E(0.75)` and
    /// `d = 2c` rounded to four significant digits.
    pub fn default_family() -> Self {
        let (lo, hi) = (0.5, 0.75);
        let ws: [(&str, Vec<f64>); 3] = [
            ("flat", vec![1.0]),
            ("linear", vec![1.0, 0.5]),
            ("quadratic", vec![1.0, 0.0, 0.25]),
        ];
        let mut potentials = Vec::new();
        for (gname, gamma) in [("g0.5", 0.5), ("g1", 1.0), ("g2", 2.0), ("g4", 4.0)] {
            for (wname, w) in &ws {
                let rough = HalfLinePotential::new(PotentialSpec {
                    gamma,
                    w_coeffs: w.clone(),
                    b: 2.5,
                    c: 5.0,
                    d: 10.0,
                    tail: Tail::Continue,
                })
                .expect("family member is admissible");
                let x_lo = rough.turning_point(lo).unwrap();
                let x_hi = rough.turning_point(hi).unwrap();
                let c = round4(1.15 * x_hi);
                potentials.push(NamedPotential {
                    name: format!("{gname}-{wname}"),
                    spec: PotentialSpec {
                        gamma,
                        w_coeffs: w.clone(),
                        b: round4(0.85 * x_lo),
                        c,
                        d: round4(2.0 * c),
                        tail: Tail::Continue,
                    },
                    window: None,
                });
            }
        }
        Self {
            window: [lo, hi],
            h_list: vec![0.02, 0.01, 0.005, 0.0025],
            bc: BcChoice::Both,
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            agmon: AgmonConfig::default(),
            regime: RegimeConfig::default(),
            wkb: WkbConfig::default(),
            potentials,
        }
    }
}

fn round4(x: f64) -> f64 {
    let p = 10f64.powi(3 - x.abs().log10().floor() as i32);
    (x * p).round() / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default_family();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn shipped_family_file_matches() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default_family.toml");
        assert_eq!(RunConfig::from_path(&path).unwrap(), RunConfig::default_family());
    }

    #[test]
    fn family_members_are_admissible() {
        let m = RunConfig::default_family().members().unwrap();
        assert_eq!(m.len(), 12);
        for x in &m {
            let uc = x.potential.uniform_constants(x.window, 2048).unwrap();
            assert!(uc.kappa_o > 0.0 && uc.kappa_e > 0.0, "{}", x.name);
        }
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = RunConfig::from_toml_str(
            r#"
window = [0.02, 0.10]
h_list = [0.01]
bc = "dirichlet"

[[potential]]
name = "harmonic"
gamma = 2.0
w_coeffs = [1.0]
b = 0.6
c = 0.95
d = 1.5
tail = "continue"
"#,
        )
        .unwrap();
        assert_eq!(cfg.bc, BcChoice::Dirichlet);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.members().unwrap()[0].window, EnergyWindow::new(0.02, 0.10));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(RunConfig::from_toml_str("window = 3"), Err(Error::Config(_))));
        let mut cfg = RunConfig::default_family();
        cfg.h_list.clear();
        assert!(matches!(cfg.members(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default_family();
        cfg.potentials[3].spec.w_coeffs = vec![-1.0];
        let err = cfg.members().unwrap_err();
        assert!(
            matches!(err, Error::Admissibility(ref m) if m.contains("g1-flat")),
            "{err}"
        );
        let mut cfg = RunConfig::default_family();
        cfg.window = [0.5, 50.0];
        assert!(matches!(cfg.members(), Err(Error::Admissibility(_))));
    }

    #[test]
    fn rounding() {
        assert_eq!(round4(0.212_549), 0.2125);
        assert_eq!(round4(12.3456), 12.35);
    }
}
