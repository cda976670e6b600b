//! The L²-normalized decaying solution `G_h(·; E)` of `−h²u″ + (V − E)u = 0`.
//!
//! The solution is built by inward integration: the log-derivative
//! `w = h u′/u` obeys the Riccati equation `h w′ = (V − E) − w²`, which is
//! stable inward on the recessive branch. Past the switch point near the
//! turning point the linear system `(u, h u′)` takes over down to `x = 0`.
//! Amplitudes in the forbidden region are carried as logarithms, and the
//! L² mass is integrated alongside the solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, OdeSystem};
use crate::potential::HalfLinePotential;
use crate::quad;

/// Value and semiclassical derivative `h u′` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyDatum {
    pub x: f64,
    pub u: f64,
    pub hdu: f64,
}

impl CauchyDatum {
    pub fn modulus(&self) -> f64 {
        self.u.hypot(self.hdu)
    }
}

/// Marker points where the Cauchy data of `G` are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    Origin,
    H,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Relative and absolute tolerance of the ODE integrator.
    pub tol: f64,
    /// Truncation: integration starts where `∫_{x_E}^{x} √(V − E) dx / h`
    /// reaches this value.
    pub decay_action: f64,
    /// Points per local wavelength `2πh/√E` enforced as a step ceiling.
    pub points_per_wavelength: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            decay_action: 50.0,
            points_per_wavelength: 50.0,
        }
    }
}

/// `G_h(·; E)` sampled on the integrator's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSolution {
    pub h: f64,
    pub e: f64,
    pub turning_point: f64,
    pub x_switch: f64,
    pub x_inf: f64,
    /// Strictly increasing sample positions on `[0, x_inf]`.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `h G′` on the grid.
    pub hdu: Vec<f64>,
    /// `ln |G|` on the grid; finite even where `values` underflow.
    pub log_abs: Vec<f64>,
    /// `∫_{x}^{∞} G²` on the grid, tail bound included.
    pub mass_above: Vec<f64>,
    /// Cauchy data at `0, h, b, c`, in [`Marker`] order.
    pub cauchy_at: [CauchyDatum; 4],
    /// `ln(|G(c)| + |h G′(c)|)`.
    pub ln_cauchy_c: f64,
    /// Bound on `∫_{x_inf}^{∞} G²` from the pointwise decay inequality.
    pub tail_mass_bound: f64,
    /// `|∫_0^{x_inf} G² + tail − 1|`.
    pub norm_residual: f64,
}

impl NormalizedSolution {
    pub fn cauchy(&self, m: Marker) -> CauchyDatum {
        self.cauchy_at[m as usize]
    }

    /// `Z_h(E) = G(0) + i h G′(0)` as `(re, im)`.
    pub fn z(&self) -> (f64, f64) {
        let d = self.cauchy(Marker::Origin);
        (d.u, d.hdu)
    }

    /// Index of the grid node equal to `x`, if any.
    pub fn node(&self, x: f64) -> Option<usize> {
        self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()).ok()
    }

    /// `∫_0^{x} G²` for a grid node or an interior point (cubic Hermite
    /// interpolation between nodes).
    pub fn mass_below(&self, x: f64) -> f64 {
        1.0 - self.mass_beyond(x)
    }

    /// `∫_x^∞ G²`, accurate in relative terms deep in the forbidden region.
    pub fn mass_beyond(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= 0.0 {
            return self.mass_above[0];
        }
        if x >= self.x_inf {
            return self.tail_mass_bound;
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.mass_above[i],
            Err(i) => i.min(n - 1),
        };
        // ∫_x^{x_i} G² by Gauss–Legendre on the Hermite interpolant
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let dx = x1 - x0;
        let (g0, g1) = (self.values[i - 1], self.values[i]);
        let (d0, d1) = (self.hdu[i - 1] / self.h * dx, self.hdu[i] / self.h * dx);
        let herm = |t: f64| {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * g0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * g1 + (t3 - t2) * d1
        };
        let ta = (x - x0) / dx;
        let partial = quad::integrate(|t| herm(t).powi(2), ta, 1.0, 0.0, 1e-12) * dx;
        self.mass_above[i] + partial
    }

    /// Position-indexed dump as CSV with header `x,G`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,G\n");
        for (x, g) in self.grid.iter().zip(&self.values) {
            s.push_str(&format!("{x:e},{g:e}\n"));
        }
        s
    }
}

/// Riccati system `(w, ln u, M̃)` with `M̃ = e^{−2 ln u} ∫_x^{x_inf} u²`.
struct Riccati<'a> {
    pot: &'a HalfLinePotential,
    e: f64,
    h: f64,
}

impl OdeSystem<3> for Riccati<'_> {
    #[inline]
    fn rhs(&self, x: f64, y: &[f64; 3]) -> [f64; 3] {
        let q = self.pot.v(x) - self.e;
        let w = y[0];
        [(q - w * w) / self.h, w / self.h, -1.0 - 2.0 * w / self.h * y[2]]
    }

    fn error_scale(&self, y: &[f64; 3], yn: &[f64; 3], rtol: f64, atol: f64) -> [f64; 3] {
        let ws = y[0].abs().max(yn[0].abs());
        let ms = y[2].abs().max(yn[2].abs());
        [
            atol + rtol * ws,
            atol + rtol * y[1].abs().max(yn[1].abs()).max(1.0),
            atol * self.h + rtol * ms,
        ]
    }

    fn check(&self, x: f64, y: &[f64; 3]) -> Result<()> {
        if !(y[0] < 0.0) || !y[1].is_finite() {
            return Err(Error::Integration(format!(
                "Riccati pole near x = {x}: switch point lies in the allowed region"
            )));
        }
        Ok(())
    }
}

/// Linear system `(u, h u′, ∫_x^{x_sw} u²)`.
struct Linear<'a> {
    pot: &'a HalfLinePotential,
    e: f64,
    h: f64,
    ceiling: f64,
    /// tighter ceiling on `[0, h]` when `V′` is singular at the origin
    near_origin: Option<(f64, f64)>,
}

impl OdeSystem<3> for Linear<'_> {
    #[inline]
    fn rhs(&self, x: f64, y: &[f64; 3]) -> [f64; 3] {
        let q = self.pot.v(x) - self.e;
        [y[1] / self.h, q * y[0] / self.h, -y[0] * y[0]]
    }

    fn max_step(&self, x: f64) -> f64 {
        match self.near_origin {
            Some((edge, cap)) if x <= edge * (1.0 + 1e-12) => cap,
            _ => self.ceiling,
        }
    }

    fn error_scale(&self, y: &[f64; 3], yn: &[f64; 3], rtol: f64, atol: f64) -> [f64; 3] {
        let amp = y[0].hypot(y[1]).max(yn[0].hypot(yn[1]));
        let s = atol + rtol * amp;
        [s, s, atol * self.h + rtol * y[2].abs().max(yn[2].abs())]
    }
}

/// Linear system for `(u, h u′)` only.
struct Plain<'a> {
    pot: &'a HalfLinePotential,
    e: f64,
    h: f64,
    ceiling: f64,
}

impl OdeSystem<2> for Plain<'_> {
    #[inline]
    fn rhs(&self, x: f64, y: &[f64; 2]) -> [f64; 2] {
        let q = self.pot.v(x) - self.e;
        [y[1] / self.h, q * y[0] / self.h]
    }

    fn max_step(&self, _x: f64) -> f64 {
        self.ceiling
    }

    fn error_scale(&self, y: &[f64; 2], yn: &[f64; 2], rtol: f64, atol: f64) -> [f64; 2] {
        let amp = y[0].hypot(y[1]).max(yn[0].hypot(yn[1]));
        let s = atol + rtol * amp;
        [s, s]
    }
}

/// Switch point `x_E + max(2h^{2/3}, 0.05 (c − b))`.
pub fn switch_point(pot: &HalfLinePotential, x_e: f64, h: f64) -> f64 {
    x_e + (2.0 * h.powf(2.0 / 3.0)).max(0.05 * (pot.c() - pot.b()))
}

/// Smallest `x ≥ max(x_sw, c) + h` where the decay action from the turning
/// point reaches `action · h`.
fn truncation_point(pot: &HalfLinePotential, e: f64, h: f64, x_e: f64, x_sw: f64, action: f64) -> f64 {
    let floor = x_sw.max(pot.c()) + h;
    let target = action * h;
    let mut acc = 0.0;
    let mut x = x_e;
    let mut dx = 0.05 * x_e.max(h.powf(2.0 / 3.0));
    loop {
        let next = x + dx;
        acc += quad::integrate(|t| (pot.v(t) - e).max(0.0).sqrt(), x, next, 1e-14, 1e-8);
        x = next;
        if acc >= target && x >= floor {
            return x;
        }
        dx *= 1.25;
    }
}

fn step_ceiling(e: f64, h: f64, ppw: f64) -> f64 {
    2.0 * std::f64::consts::PI * h / (e.sqrt() * ppw)
}

fn check_inputs(pot: &HalfLinePotential, e: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!("h = {h} must be positive")));
    }
    if !(e > 0.0 && e < pot.v_at_d()) {
        return Err(Error::Window {
            e,
            lo: 0.0,
            hi: pot.v_at_d(),
        });
    }
    Ok(())
}

struct Sample {
    x: f64,
    /// ln|u| relative to u(x_sw) = 1 (before normalization)
    ln_u: f64,
    /// raw u in the linear region
    u: f64,
    /// h u′ / u in the Riccati region, h u′ (unscaled) in the linear region
    hdu: f64,
    riccati: bool,
    /// mass beyond x in units of u(x_sw)², tail excluded
    mass: f64,
}

fn solve(pot: &HalfLinePotential, e: f64, h: f64, opts: &ShootingOptions, record: bool) -> Result<NormalizedSolution> {
    check_inputs(pot, e, h)?;
    let x_e = pot.turning_point(e)?;
    let x_sw = switch_point(pot, x_e, h);
    let x_inf = truncation_point(pot, e, h, x_e, x_sw, opts.decay_action);
    let ode_opts = OdeOptions {
        rtol: opts.tol,
        atol: opts.tol,
        ..OdeOptions::default()
    };
    let (b, c) = (pot.b(), pot.c());

    // --- forbidden region: Riccati from x_inf down to x_sw
    let ric = Riccati { pot, e, h };
    let q_inf = pot.v(x_inf) - e;
    let y0 = [-q_inf.sqrt(), 0.0, 0.0];
    let mut ric_stops: Vec<f64> = [c, b].into_iter().filter(|&s| s > x_sw && s < x_inf).collect();
    ric_stops.push(x_sw);
    let mut ric_samples: Vec<(f64, [f64; 3])> = Vec::new();
    let ric_out = ode::integrate_through(&ric, x_inf, y0, &ric_stops, &ode_opts, |x, y| {
        if record {
            ric_samples.push((x, *y));
        }
    })?;
    let sw = *ric_out.last().unwrap();
    let (w_sw, ln_u_sw, mt_sw) = (sw[0], sw[1], sw[2]);

    // --- allowed region: linear system from x_sw down to 0
    let ceiling = step_ceiling(e, h, opts.points_per_wavelength);
    let near_origin = if pot.gamma() < 1.0 {
        Some((h, (h / 16.0).min(1e-4)))
    } else {
        None
    };
    let lin = Linear {
        pot,
        e,
        h,
        ceiling,
        near_origin,
    };
    let mut lin_stops: Vec<f64> = [c, b, h].into_iter().filter(|&s| s < x_sw).collect();
    lin_stops.sort_by(|a, b| b.partial_cmp(a).unwrap());
    lin_stops.dedup();
    lin_stops.push(0.0);
    let mut lin_samples: Vec<(f64, [f64; 3])> = Vec::new();
    let lin_out = ode::integrate_through(&lin, x_sw, [1.0, w_sw, 0.0], &lin_stops, &ode_opts, |x, y| {
        if record {
            lin_samples.push((x, *y));
        }
    })?;
    let origin = *lin_out.last().unwrap();

    // --- normalization, in units where u(x_sw) = 1
    let q_inf_rate = (2.0 * q_inf).sqrt() / h;
    let ln_tail = -2.0 * ln_u_sw - q_inf_rate.ln();
    let tail_u = ln_tail.exp();
    let body_u = origin[2] + mt_sw;
    let total = body_u + tail_u;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Degenerate(format!("normalization mass {total} at E = {e}")));
    }
    let norm = 1.0 / total.sqrt();
    let ln_norm = norm.ln();
    let tail_mass_bound = tail_u / total;
    let norm_residual = (body_u / total + tail_mass_bound - 1.0).abs();

    let datum_lin = |x: f64, y: &[f64; 3]| CauchyDatum {
        x,
        u: norm * y[0],
        hdu: norm * y[1],
    };
    let datum_ric = |x: f64, y: &[f64; 3]| {
        let g = (ln_norm + (y[1] - ln_u_sw)).exp();
        CauchyDatum { x, u: g, hdu: y[0] * g }
    };
    let lookup = |x: f64| -> CauchyDatum {
        if x < x_sw {
            let i = lin_stops.iter().position(|&s| s == x).unwrap();
            datum_lin(x, &lin_out[i])
        } else if x == x_sw {
            datum_ric(x, &sw)
        } else {
            let i = ric_stops.iter().position(|&s| s == x).unwrap();
            datum_ric(x, &ric_out[i])
        }
    };
    let at_h = if h < x_sw {
        lookup(h)
    } else {
        // h beyond the switch point only for very large h; integrate to it
        let sol = propagate(pot, e, h, lookup(x_sw.max(b).max(c)), &[h], opts)?;
        sol[0]
    };
    let cauchy_at = [datum_lin(0.0, &origin), at_h, lookup(b), lookup(c)];
    let ln_cauchy_c = if c >= x_sw {
        let i = ric_stops.iter().position(|&s| s == c).unwrap_or(ric_stops.len() - 1);
        let y = ric_out[i];
        ln_norm + y[1] - ln_u_sw + (1.0 + y[0].abs()).ln()
    } else {
        let d = cauchy_at[Marker::C as usize];
        (d.u.abs() + d.hdu.abs()).ln()
    };

    let mut solution = NormalizedSolution {
        h,
        e,
        turning_point: x_e,
        x_switch: x_sw,
        x_inf,
        grid: Vec::new(),
        values: Vec::new(),
        hdu: Vec::new(),
        log_abs: Vec::new(),
        mass_above: Vec::new(),
        cauchy_at,
        ln_cauchy_c,
        tail_mass_bound,
        norm_residual,
    };
    if !record {
        return Ok(solution);
    }

    let mut samples: Vec<Sample> = Vec::with_capacity(lin_samples.len() + ric_samples.len());
    for (x, y) in lin_samples.iter().rev() {
        samples.push(Sample {
            x: *x,
            ln_u: y[0].abs().ln(),
            u: y[0],
            hdu: y[1],
            riccati: false,
            mass: y[2] + mt_sw,
        });
    }
    for (x, y) in ric_samples.iter().rev() {
        if *x <= x_sw {
            continue;
        }
        let ln_u = y[1] - ln_u_sw;
        samples.push(Sample {
            x: *x,
            ln_u,
            u: 0.0,
            hdu: y[0],
            riccati: true,
            mass: (y[2].ln() + 2.0 * ln_u).exp(),
        });
    }
    samples.dedup_by(|a, b| a.x == b.x);
    for s in samples {
        let log_abs = ln_norm + s.ln_u;
        let g = if s.riccati { log_abs.exp() } else { norm * s.u };
        let hdu = if s.riccati { s.hdu * g } else { norm * s.hdu };
        solution.grid.push(s.x);
        solution.values.push(g);
        solution.hdu.push(hdu);
        solution.log_abs.push(log_abs);
        solution.mass_above.push(s.mass / total + tail_mass_bound);
    }
    Ok(solution)
}

/// Builds the normalized decaying solution at energy `e` (`0 < e < V(d)`).
pub fn integrate_g(pot: &HalfLinePotential, e: f64, h: f64, opts: &ShootingOptions) -> Result<NormalizedSolution> {
    solve(pot, e, h, opts, true)
}

/// `(G(0), h G′(0))` of the normalized solution, without storing the grid.
pub fn origin_datum(pot: &HalfLinePotential, e: f64, h: f64, opts: &ShootingOptions) -> Result<CauchyDatum> {
    Ok(solve(pot, e, h, opts, false)?.cauchy(Marker::Origin))
}

/// Cauchy data at the markers and the `c` log-modulus, without the grid.
pub fn marker_data(pot: &HalfLinePotential, e: f64, h: f64, opts: &ShootingOptions) -> Result<NormalizedSolution> {
    solve(pot, e, h, opts, false)
}

/// Propagates a solution of `−h²u″ + (V − e)u = 0` from `from.x` to each
/// position in `targets` (visited in the given order).
pub fn propagate(
    pot: &HalfLinePotential,
    e: f64,
    h: f64,
    from: CauchyDatum,
    targets: &[f64],
    opts: &ShootingOptions,
) -> Result<Vec<CauchyDatum>> {
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("h = {h} must be positive")));
    }
    let sys = Plain {
        pot,
        e,
        h,
        ceiling: step_ceiling(e.max(1e-300), h, opts.points_per_wavelength),
    };
    let ode_opts = OdeOptions {
        rtol: opts.tol,
        atol: opts.tol,
        ..OdeOptions::default()
    };
    let out = ode::integrate_through(&sys, from.x, [from.u, from.hdu], targets, &ode_opts, |_, _| {})?;
    Ok(targets
        .iter()
        .zip(out)
        .map(|(&x, y)| CauchyDatum { x, u: y[0], hdu: y[1] })
        .collect())
}

/// Analytic bound `(4/(ηω)) e^{−ωη/4}`, `ω = √(δη)/h`, on the mass of a
/// unit-normalized `G` beyond `x_E + η`.
pub fn agmon_tail_bound(delta: f64, eta: f64, h: f64) -> f64 {
    let omega = (delta * eta).sqrt() / h;
    4.0 / (eta * omega) * (-omega * eta / 4.0).exp()
}

/// Decay bound on `∫_{x_from}^∞ G²` with `η = x_from − x_E` and `δ` the
/// minimum of `V′` over `[x_E, x_E + η/2]` (capped by the plateau value).
pub fn tail_bound(pot: &HalfLinePotential, e: f64, h: f64, x_from: f64) -> Result<f64> {
    check_inputs(pot, e, h)?;
    let x_e = pot.turning_point(e)?;
    let eta = x_from - x_e;
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!(
            "x_from = {x_from} must lie beyond the turning point {x_e}"
        )));
    }
    let delta = agmon_delta(pot, e, eta)?;
    Ok(agmon_tail_bound(delta, eta, h))
}

/// A `δ` with `V(x) − E ≥ δη/2` for every `x ≥ x_E + η/2`.
pub fn agmon_delta(pot: &HalfLinePotential, e: f64, eta: f64) -> Result<f64> {
    let x_e = pot.turning_point(e)?;
    let hi = x_e + 0.5 * eta;
    let mut delta = pot.min_dv(x_e, hi.min(pot.d()), 512);
    if hi > pot.d() {
        delta = delta.min(2.0 * (pot.v_at_d() - e) / eta);
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{PotentialSpec, Tail};

    fn harmonic() -> HalfLinePotential {
        HalfLinePotential::new(PotentialSpec {
            gamma: 2.0,
            w_coeffs: vec![1.0],
            b: 0.6,
            c: 0.95,
            d: 1.5,
            tail: Tail::Continue,
        })
        .unwrap()
    }

    #[test]
    fn dirichlet_and_neumann_ground_states() {
        let pot = harmonic();
        let opts = ShootingOptions::default();
        let g = integrate_g(&pot, 0.03, 0.01, &opts).unwrap();
        let gmax = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(g.cauchy(Marker::Origin).u.abs() <= 1e-6 * gmax);
        let g = integrate_g(&pot, 0.01, 0.01, &opts).unwrap();
        assert!(g.cauchy(Marker::Origin).hdu.abs() <= 1e-6 * gmax);
        // ground Gaussian: G(0) = (4/(πh))^{1/4} for the half-line normalization
        let exact = (4.0 / (std::f64::consts::PI * 0.01)).powf(0.25);
        assert!((g.cauchy(Marker::Origin).u - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn normalization_and_positivity() {
        let pot = harmonic();
        let g = integrate_g(&pot, 0.6, 0.01, &ShootingOptions::default()).unwrap();
        assert!(g.norm_residual <= 1e-8);
        assert!(g.grid.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.grid[0], 0.0);
        let xe = g.turning_point;
        for (x, v) in g.grid.iter().zip(&g.values) {
            if *x >= xe {
                assert!(*v > 0.0, "G({x}) = {v}");
            }
        }
        assert!((g.mass_above[0] - 1.0).abs() < 1e-12);
        // independent composite Simpson with Hermite midpoints
        let mut s = 0.0;
        for i in 1..g.grid.len() {
            let dx = g.grid[i] - g.grid[i - 1];
            let mid = 0.5 * (g.values[i] + g.values[i - 1]) + dx * (g.hdu[i - 1] - g.hdu[i]) / (8.0 * g.h);
            s += dx / 6.0 * (g.values[i - 1].powi(2) + 4.0 * mid * mid + g.values[i].powi(2));
        }
        assert!((s - 1.0).abs() < 1e-5, "simpson mass {s}");
    }

    #[test]
    fn cauchy_data_consistent_with_grid() {
        let pot = harmonic();
        let g = integrate_g(&pot, 0.6, 0.02, &ShootingOptions::default()).unwrap();
        for m in [Marker::Origin, Marker::H, Marker::B, Marker::C] {
            let d = g.cauchy(m);
            let i = g.node(d.x).expect("marker is a grid node");
            assert_eq!(g.values[i], d.u);
            assert!((g.hdu[i] - d.hdu).abs() <= 1e-12 * d.hdu.abs().max(1e-300));
        }
        let c = g.cauchy(Marker::C);
        assert!((g.ln_cauchy_c - (c.u.abs() + c.hdu.abs()).ln()).abs() < 1e-9);
    }

    #[test]
    fn tail_bound_arithmetic() {
        let v = agmon_tail_bound(1.2, 0.4, 0.05);
        let omega = 0.48f64.sqrt() / 0.05;
        assert!((omega - 13.856).abs() < 1e-3);
        assert!((4.0 / (0.4 * omega) - 0.7217).abs() < 1e-4);
        assert!((v - 0.1806).abs() < 1e-4);
        assert!(agmon_tail_bound(1.2, 0.4, 0.025) < v);
        let pot = harmonic();
        let xe = pot.turning_point(0.5).unwrap();
        assert!(matches!(tail_bound(&pot, 0.5, 0.05, xe), Err(Error::Precondition(_))));
        // the bound really dominates the integrated tail
        let g = integrate_g(&pot, 0.5, 0.05, &ShootingOptions::default()).unwrap();
        let x_from = xe + 0.3;
        assert!(g.mass_beyond(x_from) <= tail_bound(&pot, 0.5, 0.05, x_from).unwrap());
    }

    #[test]
    fn rejects_energies_outside_range() {
        let pot = harmonic();
        let opts = ShootingOptions::default();
        assert!(matches!(integrate_g(&pot, 3.0, 0.01, &opts), Err(Error::Window { .. })));
        assert!(matches!(
            integrate_g(&pot, -0.1, 0.01, &opts),
            Err(Error::Window { .. })
        ));
        assert!(integrate_g(&pot, 0.5, 0.0, &opts).is_err());
    }
}
