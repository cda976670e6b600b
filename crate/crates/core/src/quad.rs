//! Quadrature helpers: adaptive Gauss–Kronrod, Gauss–Legendre rules and
//! Chebyshev–Lobatto panels with a cumulative integration matrix.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * hl, (k - g).abs() * hl)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || (b - a).abs() < 1e-15 * a.abs().max(b.abs()).max(1e-300) {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod 7/15 quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (k0, _) = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * k0.abs());
    adapt(&f, a, b, tol, 48)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Chebyshev–Lobatto nodes on `[-1, 1]` (increasing) with the matrix
/// `tail[i][j] = ∫_{t_i}^{1} ℓ_j(t) dt` of the Lagrange basis.
#[derive(Debug, Clone)]
pub struct ChebyshevPanel {
    pub nodes: Vec<f64>,
    pub tail: Vec<Vec<f64>>,
}

impl ChebyshevPanel {
    pub fn new(p: usize) -> Self {
        assert!(p >= 3);
        let nodes: Vec<f64> = (0..p)
            .map(|j| -(std::f64::consts::PI * j as f64 / (p - 1) as f64).cos())
            .collect();
        let bw: Vec<f64> = (0..p)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == p - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let basis = |t: f64, j: usize| -> f64 {
            let mut den = 0.0;
            for (k, &tk) in nodes.iter().enumerate() {
                let d = t - tk;
                if d == 0.0 {
                    return if k == j { 1.0 } else { 0.0 };
                }
                den += bw[k] / d;
            }
            (bw[j] / (t - nodes[j])) / den
        };
        let (gx, gw) = gauss_legendre(p);
        let mut tail = vec![vec![0.0; p]; p];
        for (i, row) in tail.iter_mut().enumerate() {
            let lo = nodes[i];
            let half = 0.5 * (1.0 - lo);
            if half == 0.0 {
                continue;
            }
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (xq, wq) in gx.iter().zip(&gw) {
                    acc += wq * basis(lo + half * (xq + 1.0), j);
                }
                *entry = acc * half;
            }
        }
        Self { nodes, tail }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_handles_sqrt_endpoint() {
        let v = integrate(|y| (1.0 - y).sqrt(), 0.0, 1.0, 1e-14, 1e-14);
        assert!((v - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panel_tail_integrates_polynomials() {
        let panel = ChebyshevPanel::new(12);
        let f: Vec<f64> = panel.nodes.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        for (i, &t) in panel.nodes.iter().enumerate() {
            let got: f64 = panel.tail[i].iter().zip(&f).map(|(q, v)| q * v).sum();
            let exact = (1.0 / 6.0 - 1.0) - (t.powi(6) / 6.0 - t * t);
            assert!((got - exact).abs() < 1e-13, "{i}: {got} vs {exact}");
        }
    }
}
