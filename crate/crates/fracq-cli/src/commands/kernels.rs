//! `fracq verify-kernels`: normalization, height scaling, closed-form
//! constants, and continuity of the kernel family at top order.

use crate::config::{require_positive, Cfg, CliResult};
use crate::report::Report;
use fracq_core::kernels::{
    d_gamma, d_tilde_gamma, kappa_n, poisson_kernel, scattering_kernel, KernelKind, KernelSpec,
};
use fracq_core::quad::integrate_radial;
use serde_json::json;
use std::f64::consts::PI;

fn kernel_mass(n: u32, y: f64, tol: f64) -> CliResult<f64> {
    let spec = KernelSpec::new(n, n as f64 / 2.0, KernelKind::Dirichlet)?;
    let f = move |r: f64| {
        let mut x = vec![0.0; n as usize];
        x[0] = r;
        poisson_kernel(&spec, &x, y).unwrap_or(f64::NAN)
    };
    Ok(integrate_radial(f, n, tol)?.0)
}

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let tol = require_positive(cfg.f64_or("verify-kernels.tol", 1e-6)?, "verify-kernels.tol")?;
    let perturb = cfg.bool_or("verify-kernels.perturb_constant", false)?;

    let mut rep = Report::new("verify-kernels", cfg.seed()?);
    rep.set_config(json!({ "tol": tol, "perturb_constant": perturb }));

    // Unit mass of the top-order kernel at unit height; dimension 5 is noisier.
    for (n, tol_n) in [(1u32, tol), (3, tol), (5, tol.max(1e-4))] {
        let mass = kernel_mass(n, 1.0, 0.5 * tol_n)?;
        rep.check(&format!("normalization n={n}, y=1"), mass, 1.0, tol_n);
    }
    // At top order the mass is height-independent.
    rep.check("normalization n=3, y=2", kernel_mass(3, 2.0, 0.5 * tol)?, 1.0, tol);

    // Closed-form constants. The perturbation flag injects a relative 1e-3
    // error into the reported top-order constant, to demonstrate that a bad
    // constant is caught (and exits nonzero).
    let kappa3 = kappa_n(3)? * if perturb { 1.0 + 1e-3 } else { 1.0 };
    rep.check("top-order constant κ₃ = 4/π²", kappa3, 4.0 / (PI * PI), 1e-12);
    rep.check("trace constant d_{1/2}", d_gamma(0.5)?, -1.0, 1e-10);
    rep.check("trace constant d_{3/2}", d_gamma(1.5)?, 3.0, 1e-10);
    rep.check("trace constant d̃_{3/2}", d_tilde_gamma(1.5)?, 0.5, 1e-10);

    // The scattering kernel approaches the top-order kernel as γ → n/2.
    let near = KernelSpec::new(3, 1.5 - 1e-7, KernelKind::Scattering)?;
    let top = KernelSpec::new(3, 1.5, KernelKind::Dirichlet)?;
    let a = scattering_kernel(&near, &[1.0, 0.0, 0.0], 1.0)?;
    let b = poisson_kernel(&top, &[1.0, 0.0, 0.0], 1.0)?;
    rep.check("scattering continuity at top order (relative)", a / b, 1.0, 1e-5);

    Ok(rep)
}
