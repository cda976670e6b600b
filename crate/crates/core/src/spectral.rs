//! Eigenvalues as crossings of the Prüfer angle `θ_h(E) = arg Z_h(E)`,
//! where `Z_h(E) = G(0) + i h G′(0)`. Since `dE = h|Z|² dθ` the angle is
//! strictly increasing, so every crossing level brackets exactly one root.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{EnergyWindow, HalfLinePotential};
use crate::quad;
use crate::shooting::{self, ShootingOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    /// Angle level modulo π at which the condition holds.
    pub fn phase(self) -> f64 {
        match self {
            Self::Dirichlet => FRAC_PI_2,
            Self::Neumann => 0.0,
        }
    }

    /// `|G(0)|` or `|h G′(0)|`.
    pub fn residual(self, z: Complex64) -> f64 {
        match self {
            Self::Dirichlet => z.re.abs(),
            Self::Neumann => z.im.abs(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Largest allowed angle increment between curve points (`< π/2`).
    pub max_dtheta: f64,
    /// Relative tolerance of the root search in `E`.
    pub e_tol: f64,
    /// Maximum `|G(0)|/|Z|` (or `|hG′(0)|/|Z|`) accepted at a root.
    pub bc_tol: f64,
    pub shooting: ShootingOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            max_dtheta: PI / 4.0,
            e_tol: 1e-12,
            bc_tol: 1e-8,
            shooting: ShootingOptions::default(),
        }
    }
}

/// `Z_h(E) = G(0) + i h G′(0)`.
pub fn z_of_e(pot: &HalfLinePotential, e: f64, h: f64, opts: &ShootingOptions) -> Result<Complex64> {
    let d = shooting::origin_datum(pot, e, h, opts)?;
    Ok(Complex64::new(d.u, d.hdu))
}

/// `h 𝒲₀[G, Ġ] = h Im(Z̄ ∂_E Z)` with `∂_E Z` by a centered difference of
/// step `rel_de · e`. Equals 1 for the unit-normalized solution.
pub fn energy_wronskian(pot: &HalfLinePotential, e: f64, h: f64, rel_de: f64, opts: &ShootingOptions) -> Result<f64> {
    let de = rel_de * e;
    let z0 = z_of_e(pot, e, h, opts)?;
    let zp = z_of_e(pot, e + de, h, opts)?;
    let zm = z_of_e(pot, e - de, h, opts)?;
    let zdot = (zp - zm) / (2.0 * de);
    Ok(h * (z0.conj() * zdot).im)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruferCurve {
    pub h: f64,
    pub energies: Vec<f64>,
    pub z: Vec<Complex64>,
    /// Continuously unwrapped `arg Z`.
    pub theta: Vec<f64>,
    pub modulus: Vec<f64>,
}

impl PruferCurve {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `θ(E_max) − θ(E_min)`.
    pub fn increment(&self) -> f64 {
        self.theta.last().unwrap() - self.theta[0]
    }

    /// `dθ/dE` predicted from the modulus: `1/(h|Z|²)`.
    pub fn rate(&self, i: usize) -> f64 {
        1.0 / (self.h * self.modulus[i].powi(2))
    }
}

fn wrap(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Rough count of angle turns on the window, from the WKB phase integral.
fn estimated_increment(pot: &HalfLinePotential, window: EnergyWindow, h: f64) -> f64 {
    let phase = |e: f64| {
        let x_e = pot.turning_point(e).unwrap_or(pot.d());
        quad::integrate(|x| (e - pot.v(x)).max(0.0).sqrt(), 0.0, x_e, 1e-12, 1e-6) / h
    };
    (phase(window.hi) - phase(window.lo)).max(0.0)
}

fn evaluate(pot: &HalfLinePotential, es: &[f64], h: f64, opts: &ShootingOptions) -> Result<Vec<Complex64>> {
    es.par_iter().map(|&e| z_of_e(pot, e, h, opts)).collect()
}

/// Samples `Z_h` on an adaptively refined energy grid over `window` and
/// unwraps its argument.
pub fn prufer_curve(
    pot: &HalfLinePotential,
    window: EnergyWindow,
    h: f64,
    opts: &SpectralOptions,
) -> Result<PruferCurve> {
    let max_dtheta = opts.max_dtheta;
    if !(max_dtheta > 0.0 && max_dtheta < FRAC_PI_2) {
        return Err(Error::Precondition(format!(
            "max_dtheta = {max_dtheta} must lie in (0, π/2)"
        )));
    }
    if !(window.lo > 0.0 && window.hi > window.lo && window.hi < pot.v_at_d()) {
        return Err(Error::Window {
            e: window.hi,
            lo: 0.0,
            hi: pot.v_at_d(),
        });
    }
    let n0 = ((2.0 * estimated_increment(pot, window, h) / max_dtheta).ceil() as usize + 8).min(200_000);
    let mut es: Vec<f64> = (0..=n0)
        .map(|i| window.lo + (window.hi - window.lo) * i as f64 / n0 as f64)
        .collect();
    *es.last_mut().unwrap() = window.hi;
    let mut zs = evaluate(pot, &es, h, &opts.shooting)?;

    loop {
        let mut inserts: Vec<(usize, f64)> = Vec::new();
        for i in 0..es.len() - 1 {
            let de = es[i + 1] - es[i];
            let r0 = 1.0 / (h * zs[i].norm_sqr());
            let r1 = 1.0 / (h * zs[i + 1].norm_sqr());
            let predicted = 0.5 * (r0 + r1) * de;
            let raw = wrap(zs[i + 1].arg() - zs[i].arg());
            let bad = r0.max(r1) * de >= max_dtheta
                || raw <= 0.0
                || raw >= max_dtheta
                || (raw - predicted).abs() > 0.5 * predicted;
            if bad {
                if de < 1e-15 * es[i].abs() {
                    return Err(Error::Resolution { e: es[i] });
                }
                inserts.push((i, 0.5 * (es[i] + es[i + 1])));
            }
        }
        if inserts.is_empty() {
            break;
        }
        let new_e: Vec<f64> = inserts.iter().map(|p| p.1).collect();
        let new_z = evaluate(pot, &new_e, h, &opts.shooting)?;
        let mut merged_e = Vec::with_capacity(es.len() + new_e.len());
        let mut merged_z = Vec::with_capacity(es.len() + new_e.len());
        let mut k = 0;
        for i in 0..es.len() {
            merged_e.push(es[i]);
            merged_z.push(zs[i]);
            if k < inserts.len() && inserts[k].0 == i {
                merged_e.push(new_e[k]);
                merged_z.push(new_z[k]);
                k += 1;
            }
        }
        es = merged_e;
        zs = merged_z;
    }

    let mut theta = Vec::with_capacity(es.len());
    theta.push(zs[0].arg());
    for i in 1..es.len() {
        let next = theta[i - 1] + wrap(zs[i].arg() - zs[i - 1].arg());
        if !(next > theta[i - 1]) {
            return Err(Error::Resolution { e: es[i] });
        }
        theta.push(next);
    }
    let modulus = zs.iter().map(|z| z.norm()).collect();
    Ok(PruferCurve {
        h,
        energies: es,
        z: zs,
        theta,
        modulus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub h: f64,
    pub bc: BoundaryCondition,
    /// Sorted eigenvalues inside the window.
    pub eigenvalues: Vec<f64>,
    /// `d_h(E)` for each eigenvalue, same order.
    pub spacing: Vec<f64>,
    /// Nearest eigenvalues found outside the window, if any.
    pub below: Option<f64>,
    pub above: Option<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spacing_of(&self, e: f64) -> Option<f64> {
        self.eigenvalues.iter().position(|&x| x == e).map(|i| self.spacing[i])
    }
}

/// Angle at `e` continued from a nearby reference point `(z_ref, theta_ref)`.
fn theta_near(z: Complex64, z_ref: Complex64, theta_ref: f64) -> f64 {
    theta_ref + wrap(z.arg() - z_ref.arg())
}

/// Safeguarded Newton iteration for `θ(E) = level` on a bracket, using the
/// exact derivative `dθ/dE = 1/(h|Z|²)`.
fn solve_level(
    pot: &HalfLinePotential,
    h: f64,
    level: f64,
    lo: (f64, Complex64, f64),
    hi: (f64, Complex64, f64),
    bc: BoundaryCondition,
    opts: &SpectralOptions,
) -> Result<f64> {
    let (mut a, mut b) = (lo.0, hi.0);
    let (za, ta) = (lo.1, lo.2);
    // linear start inside the bracket
    let mut e = a + (b - a) * ((level - lo.2) / (hi.2 - lo.2)).clamp(0.0, 1.0);
    let mut converged = 0;
    for _ in 0..200 {
        let z = z_of_e(pot, e, h, &opts.shooting)?;
        let th = theta_near(z, za, ta);
        let f = th - level;
        if f == 0.0 {
            return Ok(e);
        }
        if f > 0.0 {
            b = e;
        } else {
            a = e;
        }
        let newton = e - f * h * z.norm_sqr();
        let next = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        let step = (next - e).abs();
        e = next;
        if step <= opts.e_tol * e.abs() || b - a <= opts.e_tol * e.abs() {
            converged += 1;
            if converged >= 2 {
                let z = z_of_e(pot, e, h, &opts.shooting)?;
                if bc.residual(z) > opts.bc_tol * z.norm() {
                    return Err(Error::Resolution { e });
                }
                return Ok(e);
            }
        }
    }
    Err(Error::Resolution { e })
}

/// All crossing levels `phase + kπ` in `(t0, t1]`.
fn levels_between(t0: f64, t1: f64, phase: f64) -> impl Iterator<Item = f64> {
    let k0 = ((t0 - phase) / PI).floor() as i64 + 1;
    let k1 = ((t1 - phase) / PI).floor() as i64;
    (k0..=k1).map(move |k| phase + k as f64 * PI)
}

/// Roots of `θ = level` on a computed curve.
fn roots_on_curve(
    pot: &HalfLinePotential,
    curve: &PruferCurve,
    bc: BoundaryCondition,
    opts: &SpectralOptions,
) -> Result<Vec<f64>> {
    let mut jobs = Vec::new();
    for i in 0..curve.len() - 1 {
        for level in levels_between(curve.theta[i], curve.theta[i + 1], bc.phase()) {
            jobs.push((i, level));
        }
    }
    jobs.par_iter()
        .map(|&(i, level)| {
            let lo = (curve.energies[i], curve.z[i], curve.theta[i]);
            let hi = (curve.energies[i + 1], curve.z[i + 1], curve.theta[i + 1]);
            if curve.theta[i + 1] == level {
                return Ok(curve.energies[i + 1]);
            }
            solve_level(pot, curve.h, level, lo, hi, bc, opts)
        })
        .collect()
}

/// Walks from `e0` in direction `dir` until the next crossing level is
/// passed, then solves for it. When `e0` is itself a root the target is the
/// adjacent level, so rounding in `arg Z` cannot return `e0` again. Returns
/// `None` when the walk leaves the range where `G` is defined.
#[allow(clippy::too_many_arguments)]
fn neighbor(
    pot: &HalfLinePotential,
    h: f64,
    e0: f64,
    from_root: bool,
    bc: BoundaryCondition,
    dir: f64,
    floor: f64,
    opts: &SpectralOptions,
) -> Result<Option<f64>> {
    let ceil = pot.v_at_d() * (1.0 - 1e-9);
    let mut e = e0;
    let mut z = z_of_e(pot, e, h, &opts.shooting)?;
    let mut t = z.arg();
    let t_start = t;
    let target = if from_root {
        let k = ((t_start - bc.phase()) / PI).round();
        bc.phase() + (k + dir.signum()) * PI
    } else if dir > 0.0 {
        levels_between(t_start, t_start + 4.0 * PI, bc.phase())
            .find(|&l| l > t_start)
            .unwrap()
    } else {
        let k = ((t_start - bc.phase()) / PI).ceil() as i64 - 1;
        bc.phase() + k as f64 * PI
    };
    let mut shrink = 1.0;
    for _ in 0..100_000 {
        let mut de = shrink * 0.5 * opts.max_dtheta * h * z.norm_sqr();
        if dir < 0.0 {
            de = de.min(0.5 * e);
        }
        if de < 1e-15 * e {
            return Err(Error::Resolution { e });
        }
        let mut e_new = e + dir * de;
        if dir > 0.0 && e_new >= ceil {
            e_new = ceil;
        }
        if dir < 0.0 && e_new < floor {
            return Ok(None);
        }
        let z_new = z_of_e(pot, e_new, h, &opts.shooting)?;
        let t_new = theta_near(z_new, z, t);
        let step = (t_new - t) * dir;
        if !(step > 0.0) || step > opts.max_dtheta {
            // |Z| dropped inside the step
            shrink *= 0.25;
            continue;
        }
        shrink = 1.0;
        let crossed = if dir > 0.0 { t_new >= target } else { t_new <= target };
        if crossed {
            let (lo, hi) = if dir > 0.0 {
                ((e, z, t), (e_new, z_new, t_new))
            } else {
                ((e_new, z_new, t_new), (e, z, t))
            };
            return solve_level(pot, h, target, lo, hi, bc, opts).map(Some);
        }
        if dir > 0.0 && e_new >= ceil {
            return Ok(None);
        }
        e = e_new;
        z = z_new;
        t = t_new;
    }
    Err(Error::Resolution { e })
}

fn nearest_gaps(eigs: &[f64], below: Option<f64>, above: Option<f64>) -> Vec<f64> {
    let mut all: Vec<f64> = below.into_iter().chain(eigs.iter().copied()).chain(above).collect();
    all.dedup();
    let off = usize::from(below.is_some());
    (0..eigs.len())
        .map(|i| {
            let j = i + off;
            let left = if j > 0 { all[j] - all[j - 1] } else { f64::INFINITY };
            let right = if j + 1 < all.len() {
                all[j + 1] - all[j]
            } else {
                f64::INFINITY
            };
            left.min(right)
        })
        .collect()
}

/// Lower clamp applied to window edges at or below zero.
fn energy_floor(window: EnergyWindow) -> f64 {
    (1e-6 * window.hi).max(f64::MIN_POSITIVE)
}

/// Eigenvalues of the given boundary problem inside `window`, with spacings
/// `d_h(E)` computed against one extra eigenvalue beyond each edge.
pub fn find_eigenvalues(
    pot: &HalfLinePotential,
    window: EnergyWindow,
    h: f64,
    bc: BoundaryCondition,
    opts: &SpectralOptions,
) -> Result<Spectrum> {
    let floor = energy_floor(window);
    let window = EnergyWindow::new(window.lo.max(floor), window.hi);
    let curve = prufer_curve(pot, window, h, opts)?;
    spectrum_from_curve(pot, &curve, bc, floor, opts)
}

/// Both boundary conditions from a single curve.
pub fn find_both(
    pot: &HalfLinePotential,
    window: EnergyWindow,
    h: f64,
    opts: &SpectralOptions,
) -> Result<(PruferCurve, Spectrum, Spectrum)> {
    let floor = energy_floor(window);
    let window = EnergyWindow::new(window.lo.max(floor), window.hi);
    let curve = prufer_curve(pot, window, h, opts)?;
    let d = spectrum_from_curve(pot, &curve, BoundaryCondition::Dirichlet, floor, opts)?;
    let n = spectrum_from_curve(pot, &curve, BoundaryCondition::Neumann, floor, opts)?;
    Ok((curve, d, n))
}

pub fn spectrum_from_curve(
    pot: &HalfLinePotential,
    curve: &PruferCurve,
    bc: BoundaryCondition,
    floor: f64,
    opts: &SpectralOptions,
) -> Result<Spectrum> {
    let h = curve.h;
    let mut eigenvalues = roots_on_curve(pot, curve, bc, opts)?;
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = curve.energies[0];
    let hi = *curve.energies.last().unwrap();
    let found = !eigenvalues.is_empty();
    let below = neighbor(
        pot,
        h,
        eigenvalues.first().copied().unwrap_or(lo),
        found,
        bc,
        -1.0,
        floor,
        opts,
    )?;
    let above = neighbor(
        pot,
        h,
        eigenvalues.last().copied().unwrap_or(hi),
        found,
        bc,
        1.0,
        floor,
        opts,
    )?;
    let spacing = nearest_gaps(&eigenvalues, below, above);
    Ok(Spectrum {
        h,
        bc,
        eigenvalues,
        spacing,
        below,
        above,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingRow {
    pub h: f64,
    pub e: f64,
    pub bc: BoundaryCondition,
    pub d_h: f64,
    /// `d_h / (h E^{(γ−2)/(2γ)})`.
    pub ratio: f64,
}

pub fn normalized_spacing(d_h: f64, e: f64, h: f64, gamma: f64) -> f64 {
    d_h / (h * e.powf((gamma - 2.0) / (2.0 * gamma)))
}

/// Normalized spacing ratios for every eigenvalue in `window` and each `h`.
pub fn spacing_scan(
    pot: &HalfLinePotential,
    window: EnergyWindow,
    h_list: &[f64],
    bc: BoundaryCondition,
    opts: &SpectralOptions,
) -> Result<Vec<SpacingRow>> {
    let mut rows = Vec::new();
    for &h in h_list {
        let spec = find_eigenvalues(pot, window, h, bc, opts)?;
        for (&e, &d_h) in spec.eigenvalues.iter().zip(&spec.spacing) {
            if d_h.is_finite() {
                rows.push(SpacingRow {
                    h,
                    e,
                    bc,
                    d_h,
                    ratio: normalized_spacing(d_h, e, h, pot.gamma()),
                });
            }
        }
    }
    Ok(rows)
}

pub fn spacing_csv(rows: &[SpacingRow]) -> String {
    let mut s = String::from("h,E,bc,d_h,ratio\n");
    for r in rows {
        s.push_str(&format!("{:e},{:e},{},{:e},{:e}\n", r.h, r.e, r.bc, r.d_h, r.ratio));
    }
    s
}
