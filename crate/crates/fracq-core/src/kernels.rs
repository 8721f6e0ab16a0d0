//! Closed-form convolution kernels of the half-space problems on
//! ℝ^{n+1}₊ = {(x, y) : x ∈ ℝⁿ, y > 0} with odd n, and their normalization
//! constants. Three kinds:
//!
//! - the Poisson-type kernel κ_n yⁿ/(y² + |x|²)ⁿ reproducing Dirichlet data,
//! - the logarithmic kernel κ̃_n log(1/(y² + |x|²)) paired with Neumann data,
//! - the fractional-order kernel κ_{n,γ} y^{n/2+γ}/(y² + |x|²)^{n/2+γ} for
//!   γ ∈ (0, n/2).
//!
//! All constants are computed from the Gamma function on demand so a Gamma
//! regression cannot hide behind a cached literal.

use crate::specfun::gamma_fn;
use crate::{domain_err, FracqError, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Dirichlet,
    Neumann,
    Scattering,
}

/// Validated kernel selector: boundary dimension, order, and kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    n: u32,
    gamma: f64,
    kind: KernelKind,
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

impl KernelSpec {
    pub fn new(n: u32, gamma: f64, kind: KernelKind) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return domain_err(format!("KernelSpec: boundary dimension must be odd, got {n}"));
        }
        let half_n = n as f64 / 2.0;
        if !(gamma > 0.0 && gamma <= half_n) {
            return domain_err(format!(
                "KernelSpec: order must lie in (0, {half_n}], got {gamma}"
            ));
        }
        if kind == KernelKind::Scattering {
            if gamma >= half_n {
                return domain_err(
                    "KernelSpec: the fractional kernel requires order < n/2; \
                     at order n/2 use the Dirichlet or Neumann kind"
                        .to_string(),
                );
            }
            if is_integer(gamma) {
                return domain_err(format!(
                    "KernelSpec: the fractional kernel requires non-integer order, got {gamma}"
                ));
            }
        }
        Ok(Self { n, gamma, kind })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
}

/// κ_n = Γ(n)/(Γ(n/2) π^{n/2}), the Poisson-kernel constant.
pub fn kappa_n(n: u32) -> Result<f64> {
    if n == 0 || n % 2 == 0 {
        return domain_err(format!("kappa_n: n must be odd ≥ 1, got {n}"));
    }
    let nf = n as f64;
    Ok(gamma_fn(nf)? / (gamma_fn(0.5 * nf)? * PI.powf(0.5 * nf)))
}

/// κ̃_n = 1/(2ⁿ Γ(n/2) π^{n/2}), the logarithmic-kernel constant.
pub fn kappa_tilde_n(n: u32) -> Result<f64> {
    if n == 0 || n % 2 == 0 {
        return domain_err(format!("kappa_tilde_n: n must be odd ≥ 1, got {n}"));
    }
    let nf = n as f64;
    Ok(1.0 / (2.0f64.powi(n as i32) * gamma_fn(0.5 * nf)? * PI.powf(0.5 * nf)))
}

/// κ_{n,γ} = Γ(n/2 + γ)/(Γ(γ) π^{n/2}); continuous in γ, with
/// κ_{n,n/2} = κ_n.
pub fn kappa_n_gamma(n: u32, gamma: f64) -> Result<f64> {
    if n == 0 {
        return domain_err("kappa_n_gamma: n must be ≥ 1".to_string());
    }
    let nf = n as f64;
    if !(gamma > 0.0 && gamma <= 0.5 * nf) {
        return domain_err(format!(
            "kappa_n_gamma: order must lie in (0, {}], got {gamma}",
            0.5 * nf
        ));
    }
    Ok(gamma_fn(0.5 * nf + gamma)? / (gamma_fn(gamma)? * PI.powf(0.5 * nf)))
}

/// d_γ = 2^{2γ} Γ(γ)/Γ(−γ), the boundary-operator constant of the pure
/// fractional Laplacian; poles of Γ(±γ) at integer γ are rejected.
pub fn d_gamma(gamma: f64) -> Result<f64> {
    if is_integer(gamma) {
        return domain_err(format!(
            "d_gamma: integer order {gamma} hits a Gamma pole"
        ));
    }
    Ok(2.0f64.powf(2.0 * gamma) * gamma_fn(gamma)? / gamma_fn(-gamma)?)
}

/// d̃_γ = 2^{2γ} Γ(γ−m)/(γ 2^{2m+1} m! Γ(−γ)) with m = ⌊γ⌋, the constant in
/// front of the higher-order Neumann trace.
pub fn d_tilde_gamma(gamma: f64) -> Result<f64> {
    if is_integer(gamma) {
        return domain_err(format!(
            "d_tilde_gamma: integer order {gamma} hits a Gamma pole"
        ));
    }
    if !(gamma > 0.0) {
        return domain_err(format!("d_tilde_gamma: order must be > 0, got {gamma}"));
    }
    let m = gamma.floor();
    let m_int = m as i32;
    let m_fact: f64 = (1..=m_int).map(|k| k as f64).product();
    Ok(2.0f64.powf(2.0 * gamma) * gamma_fn(gamma - m)?
        / (gamma * 2.0f64.powi(2 * m_int + 1) * m_fact * gamma_fn(-gamma)?))
}

fn check_point(spec: &KernelSpec, x: &[f64], y: f64) -> Result<f64> {
    if x.len() != spec.n as usize {
        return domain_err(format!(
            "kernel point has dimension {}, spec says {}",
            x.len(),
            spec.n
        ));
    }
    if !(y >= 0.0) || !y.is_finite() {
        return domain_err(format!("kernel height must be ≥ 0 and finite, got {y}"));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if y == 0.0 && r2 == 0.0 {
        return Err(FracqError::Range(
            "kernel evaluated at the singular corner x = 0, y = 0".into(),
        ));
    }
    Ok(r2)
}

/// Poisson-type kernel κ_n yⁿ/(y² + |x|²)ⁿ; strictly positive for y > 0.
pub fn poisson_kernel(spec: &KernelSpec, x: &[f64], y: f64) -> Result<f64> {
    if spec.kind != KernelKind::Dirichlet {
        return domain_err("poisson_kernel requires a Dirichlet-kind spec".to_string());
    }
    let r2 = check_point(spec, x, y)?;
    Ok(kappa_n(spec.n)? * (y / (y * y + r2)).powi(spec.n as i32))
}

/// Logarithmic kernel κ̃_n log(1/(y² + |x|²)); changes sign on |X| = 1.
pub fn neumann_kernel(spec: &KernelSpec, x: &[f64], y: f64) -> Result<f64> {
    if spec.kind != KernelKind::Neumann {
        return domain_err("neumann_kernel requires a Neumann-kind spec".to_string());
    }
    let r2 = check_point(spec, x, y)?;
    Ok(-kappa_tilde_n(spec.n)? * (y * y + r2).ln())
}

/// Fractional-order kernel κ_{n,γ} y^{n/2+γ}/(y² + |x|²)^{n/2+γ}.
/// Its boundary integral ∫_{ℝⁿ} K(x, y) dx equals y^{n/2−γ} (so 1 at y = 1).
pub fn scattering_kernel(spec: &KernelSpec, x: &[f64], y: f64) -> Result<f64> {
    if spec.kind != KernelKind::Scattering {
        return domain_err("scattering_kernel requires a Scattering-kind spec".to_string());
    }
    let r2 = check_point(spec, x, y)?;
    let p = spec.n as f64 / 2.0 + spec.gamma;
    Ok(kappa_n_gamma(spec.n, spec.gamma)? * (y / (y * y + r2)).powf(p))
}
