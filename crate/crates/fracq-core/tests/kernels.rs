//! Kernel constants against their closed forms, boundary-integral
//! normalizations by radial quadrature, and the exact scaling law.

use fracq_core::kernels::{
    d_gamma, d_tilde_gamma, kappa_n, kappa_n_gamma, kappa_tilde_n, neumann_kernel,
    poisson_kernel, scattering_kernel, KernelKind, KernelSpec,
};
use fracq_core::quad::integrate_radial;
use fracq_core::FracqError;
use proptest::prelude::*;
use std::f64::consts::PI;

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    let err = (got - want).abs();
    assert!(
        err <= tol * want.abs().max(1.0),
        "{what}: got {got:.17e}, want {want:.17e}, err {err:.3e}"
    );
}

#[test]
fn poisson_constants_closed_forms() {
    assert_close(kappa_n(1).unwrap(), 1.0 / PI, 1e-13, "κ₁ = 1/π");
    assert_close(kappa_n(3).unwrap(), 4.0 / (PI * PI), 1e-12, "κ₃ = 4/π²");
    assert_close(kappa_n(5).unwrap(), 32.0 / PI.powi(3), 1e-12, "κ₅ = 32/π³");
    assert_close(kappa_tilde_n(1).unwrap(), 1.0 / (2.0 * PI), 1e-13, "κ̃₁ = 1/2π");
    assert_close(kappa_tilde_n(3).unwrap(), 1.0 / (4.0 * PI * PI), 1e-13, "κ̃₃ = 1/4π²");
    assert!(kappa_n(2).is_err());
    assert!(kappa_n(0).is_err());
    assert!(kappa_tilde_n(4).is_err());
}

#[test]
fn boundary_operator_constants() {
    // The four fractional-order constants with elementary values.
    assert_close(d_gamma(0.5).unwrap(), -1.0, 1e-10, "d_{1/2} = −1");
    assert_close(d_gamma(1.5).unwrap(), 3.0, 1e-10, "d_{3/2} = 3");
    assert_close(d_tilde_gamma(1.5).unwrap(), 0.5, 1e-10, "d̃_{3/2} = 1/2");
    assert_close(
        kappa_n_gamma(3, 1.5).unwrap(),
        kappa_n(3).unwrap(),
        1e-10,
        "κ_{3,3/2} = κ₃",
    );
    // Integer orders hit Gamma poles and must be rejected.
    assert!(d_gamma(1.0).is_err());
    assert!(d_gamma(2.0).is_err());
    assert!(d_tilde_gamma(3.0).is_err());
    assert!(kappa_n_gamma(3, 0.0).is_err());
    assert!(kappa_n_gamma(3, 1.6).is_err());
}

/// ∫_{ℝⁿ} K_{n/2}(x, 1) dx = 1 for the Poisson kernel, by radial reduction.
#[test]
fn poisson_kernel_unit_mass() {
    for (n, tol) in [(1u32, 1e-6), (3, 1e-6), (5, 1e-4)] {
        let spec = KernelSpec::new(n, n as f64 / 2.0, KernelKind::Dirichlet).unwrap();
        let f = move |r: f64| {
            let mut x = vec![0.0; n as usize];
            x[0] = r;
            poisson_kernel(&spec, &x, 1.0).unwrap()
        };
        let (mass, est) = integrate_radial(f, n, tol * 0.5).unwrap();
        assert!(
            (mass - 1.0).abs() <= tol,
            "n = {n}: ∫K = {mass:.12}, err {:.3e}, quad est {est:.3e}",
            (mass - 1.0).abs()
        );
    }
}

/// ∫_{ℝⁿ} K_γ(x, y) dx = y^{n/2−γ} for the fractional kernel.
#[test]
fn scattering_kernel_mass_scales_as_power_of_height() {
    let spec = KernelSpec::new(3, 0.5, KernelKind::Scattering).unwrap();
    for y in [0.5f64, 1.0, 2.0] {
        let f = move |r: f64| scattering_kernel(&spec, &[r, 0.0, 0.0], y).unwrap();
        let (mass, _) = integrate_radial(f, 3, 1e-8).unwrap();
        assert_close(mass, y.powf(1.5 - 0.5), 1e-6, "∫K_{1/2}(·, y)");
    }
    let spec2 = KernelSpec::new(3, 1.25, KernelKind::Scattering).unwrap();
    let f = move |r: f64| scattering_kernel(&spec2, &[r, 0.0, 0.0], 1.0).unwrap();
    let (mass, _) = integrate_radial(f, 3, 1e-8).unwrap();
    assert_close(mass, 1.0, 1e-6, "∫K_{5/4}(·, 1)");
}

#[test]
fn neumann_kernel_values_and_sign_change() {
    let spec = KernelSpec::new(3, 1.5, KernelKind::Neumann).unwrap();
    let kt = kappa_tilde_n(3).unwrap();
    let v = neumann_kernel(&spec, &[1.0, 2.0, 0.0], 3.0).unwrap();
    assert_close(v, -kt * (9.0f64 + 5.0).ln(), 1e-13, "log kernel value");
    // Positive inside the unit half-ball, negative outside.
    assert!(neumann_kernel(&spec, &[0.25, 0.0, 0.0], 0.25).unwrap() > 0.0);
    assert!(neumann_kernel(&spec, &[2.0, 0.0, 0.0], 1.0).unwrap() < 0.0);
}

#[test]
fn classical_half_space_case_matches_poisson_formula() {
    // n = 1, γ = 1/2: the harmonic Poisson kernel y/(π(y²+x²)).
    let spec = KernelSpec::new(1, 0.5, KernelKind::Dirichlet).unwrap();
    for &(x, y) in &[(0.3, 0.9), (2.0, 0.1), (-1.5, 4.0)] {
        let want = y / (PI * (y * y + x * x));
        assert_close(poisson_kernel(&spec, &[x], y).unwrap(), want, 1e-13, "P(x, y)");
    }
}

#[test]
fn spec_validation_and_evaluation_errors() {
    // Even or zero boundary dimension.
    assert!(KernelSpec::new(2, 1.0, KernelKind::Dirichlet).is_err());
    assert!(KernelSpec::new(0, 0.5, KernelKind::Dirichlet).is_err());
    // Order out of (0, n/2].
    assert!(KernelSpec::new(3, 0.0, KernelKind::Dirichlet).is_err());
    assert!(KernelSpec::new(3, 1.7, KernelKind::Dirichlet).is_err());
    // Fractional kind needs non-integer order strictly below n/2.
    assert!(KernelSpec::new(3, 1.5, KernelKind::Scattering).is_err());
    assert!(KernelSpec::new(3, 1.0, KernelKind::Scattering).is_err());
    assert!(KernelSpec::new(5, 1.25, KernelKind::Scattering).is_ok());

    let spec = KernelSpec::new(3, 1.5, KernelKind::Dirichlet).unwrap();
    // Kind mismatch.
    assert!(matches!(
        neumann_kernel(&spec, &[1.0, 0.0, 0.0], 1.0),
        Err(FracqError::Domain(_))
    ));
    // Wrong point dimension and negative height.
    assert!(poisson_kernel(&spec, &[1.0, 0.0], 1.0).is_err());
    assert!(poisson_kernel(&spec, &[1.0, 0.0, 0.0], -0.5).is_err());
    // The singular corner is a range error, not a domain error.
    assert!(matches!(
        poisson_kernel(&spec, &[0.0, 0.0, 0.0], 0.0),
        Err(FracqError::Range(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Exact scaling law K(λx, λy) = λ^{−n} K(x, y) for the Poisson kernel.
    #[test]
    fn poisson_scaling_law(
        x0 in -5.0f64..5.0, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0,
        y in 0.01f64..10.0, lam in 0.1f64..10.0,
    ) {
        let spec = KernelSpec::new(3, 1.5, KernelKind::Dirichlet).unwrap();
        let a = poisson_kernel(&spec, &[lam * x0, lam * x1, lam * x2], lam * y).unwrap();
        let b = poisson_kernel(&spec, &[x0, x1, x2], y).unwrap() / lam.powi(3);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
    }

    /// Positivity and monotone decay in |x| for fixed height.
    #[test]
    fn poisson_positive_and_radially_decreasing(
        r in 0.0f64..8.0, y in 0.05f64..5.0,
    ) {
        let spec = KernelSpec::new(3, 1.5, KernelKind::Dirichlet).unwrap();
        let a = poisson_kernel(&spec, &[r, 0.0, 0.0], y).unwrap();
        let b = poisson_kernel(&spec, &[r + 0.5, 0.0, 0.0], y).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!(b < a);
    }

    /// The Dirichlet boundary integral is 1 at every height, not only y = 1.
    #[test]
    fn poisson_unit_mass_all_heights(y in 0.25f64..4.0) {
        let spec = KernelSpec::new(3, 1.5, KernelKind::Dirichlet).unwrap();
        let f = move |r: f64| poisson_kernel(&spec, &[r, 0.0, 0.0], y).unwrap();
        let (mass, _) = integrate_radial(f, 3, 1e-7).unwrap();
        prop_assert!((mass - 1.0).abs() <= 1e-6, "mass {mass} at y = {y}");
    }

    /// The fractional kernel at order γ → n/2 approaches the Poisson kernel.
    #[test]
    fn scattering_continuity_at_top_order(
        r in 0.1f64..5.0, y in 0.1f64..5.0,
    ) {
        let near = KernelSpec::new(3, 1.5 - 1e-7, KernelKind::Scattering).unwrap();
        let top = KernelSpec::new(3, 1.5, KernelKind::Dirichlet).unwrap();
        let a = scattering_kernel(&near, &[r, 0.0, 0.0], y).unwrap();
        let b = poisson_kernel(&top, &[r, 0.0, 0.0], y).unwrap();
        prop_assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-12));
    }
}
