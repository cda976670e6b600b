//! Solver output against independently computed reference spectra.

mod common;

use semispec::spectral::{find_eigenvalues, BoundaryCondition, SpectralOptions};
use semispec::EnergyWindow;

#[test]
fn airy_series_matches_frozen_zeros() {
    for (z, frozen) in common::airy_zeros().iter().zip(common::AIRY_ZEROS) {
        assert!((z - frozen).abs() < 1e-8, "{z} vs {frozen}");
        assert!(common::airy_ai(-frozen).abs() < 1e-9);
    }
}

#[test]
fn linear_potential_reproduces_airy_zeros() {
    // V = x: Dirichlet levels are a_k h^{2/3}
    let pot = common::potential(1.0, &[1.0], 4.0, 8.0, 12.0);
    let h: f64 = 0.01;
    let scale = h.powf(2.0 / 3.0);
    let zeros = common::airy_zeros();
    let window = EnergyWindow::new(0.5 * zeros[0] * scale, 1.01 * zeros[3] * scale);
    let s = find_eigenvalues(
        &pot,
        window,
        h,
        BoundaryCondition::Dirichlet,
        &SpectralOptions::default(),
    )
    .unwrap();
    assert_eq!(s.len(), 4);
    for (e, a) in s.eigenvalues.iter().zip(zeros) {
        assert!((e / scale - a).abs() < 1e-8, "{} vs {a}", e / scale);
    }
}

#[test]
fn harmonic_levels_are_odd_and_even_multiples() {
    let pot = common::harmonic();
    let h = 0.01;
    let opts = SpectralOptions::default();
    let window = EnergyWindow::new(0.5 * h, 12.0 * h);
    let d = find_eigenvalues(&pot, window, h, BoundaryCondition::Dirichlet, &opts).unwrap();
    let n = find_eigenvalues(&pot, window, h, BoundaryCondition::Neumann, &opts).unwrap();
    // −h²u″ + x²u on the half-line: Neumann (4k+1)h, Dirichlet (4k+3)h
    let want_d = [3.0, 7.0, 11.0];
    let want_n = [1.0, 5.0, 9.0];
    assert_eq!(d.len(), 3);
    assert_eq!(n.len(), 3);
    for (e, k) in d.eigenvalues.iter().zip(want_d) {
        assert!((e - k * h).abs() < 1e-10, "{e}");
    }
    for (e, k) in n.eigenvalues.iter().zip(want_n) {
        assert!((e - k * h).abs() < 1e-10, "{e}");
    }
    for s in d.spacing.iter().chain(&n.spacing) {
        assert!((s - 4.0 * h).abs() < 1e-9, "{s}");
    }
}
