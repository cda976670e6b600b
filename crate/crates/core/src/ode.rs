//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Integration runs in either direction; the shooting code only ever
//! integrates inward (decreasing `x`).

use crate::error::{Error, Result};

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> [f64; N];

    /// Largest step allowed at `x`.
    fn max_step(&self, _x: f64) -> f64 {
        f64::INFINITY
    }

    /// Per-component error weights.
    fn error_scale(&self, y: &[f64; N], y_new: &[f64; N], rtol: f64, atol: f64) -> [f64; N] {
        let mut sc = [0.0; N];
        for i in 0..N {
            sc[i] = atol + rtol * y[i].abs().max(y_new[i].abs());
        }
        sc
    }

    /// Checked after every accepted step; an `Err` aborts the integration.
    fn check(&self, _x: f64, _y: &[f64; N]) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            min_step: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], step: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * step;
        for i in 0..N {
            out[i] += s * k[i];
        }
    }
    out
}

/// Integrates `sys` from `x0` to `x1`, calling `observer` on every accepted
/// step (including the initial point). Returns the state at `x1`.
pub fn integrate<const N: usize, S, O>(
    sys: &S,
    x0: f64,
    y0: [f64; N],
    x1: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<[f64; N]>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]),
{
    observer(x0, &y0);
    if x0 == x1 {
        return Ok(y0);
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = sys.rhs(x, &y);
    let mut step = (span / 64.0).min(sys.max_step(x));
    let mut n_steps = 0usize;

    loop {
        let remaining = (x1 - x).abs();
        let cap = sys.max_step(x);
        let mut hstep = step.min(cap);
        let last = hstep >= remaining * (1.0 - 1e-12);
        if last {
            hstep = remaining;
        }
        let s = dir * hstep;

        let k2 = sys.rhs(x + C2 * s, &axpy(&y, &[(A21, &k1)], s));
        let k3 = sys.rhs(x + C3 * s, &axpy(&y, &[(A31, &k1), (A32, &k2)], s));
        let k4 = sys.rhs(x + C4 * s, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], s));
        let k5 = sys.rhs(
            x + C5 * s,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], s),
        );
        let k6 = sys.rhs(
            x + s,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], s),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], s);
        let x_new = if last { x1 } else { x + s };
        let k7 = sys.rhs(x_new, &y_new);

        let sc = sys.error_scale(&y, &y_new, opts.rtol, opts.atol);
        let mut err2 = 0.0;
        for i in 0..N {
            let e = s * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let r = e / sc[i];
            err2 += r * r;
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state near x = {x}")));
        }

        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            sys.check(x, &y)?;
            observer(x, &y);
            n_steps += 1;
            if last {
                return Ok(y);
            }
            if n_steps > opts.max_steps {
                return Err(Error::Integration(format!("step budget exhausted near x = {x}")));
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            step = hstep * fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            step = hstep * fac;
            if step < opts.min_step {
                return Err(Error::Integration(format!(
                    "step size fell below floor {:e} near x = {x}",
                    opts.min_step
                )));
            }
        }
    }
}

/// Integrates through a sequence of breakpoints, stopping exactly on each.
/// Returns the state at every breakpoint, in order.
pub fn integrate_through<const N: usize, S, O>(
    sys: &S,
    x0: f64,
    y0: [f64; N],
    stops: &[f64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<Vec<[f64; N]>>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]),
{
    let mut out = Vec::with_capacity(stops.len());
    let mut x = x0;
    let mut y = y0;
    let mut first = true;
    for &stop in stops {
        let mut skip_first = !first;
        y = integrate(sys, x, y, stop, opts, |xx, yy| {
            if skip_first {
                skip_first = false;
            } else {
                observer(xx, yy);
            }
        })?;
        first = false;
        x = stop;
        out.push(y);
    }
    Ok(out)
}
