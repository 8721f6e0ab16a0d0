//! Dense polynomials in four variables of total degree ≤ 4, with exact
//! evaluation and differentiation. These are the test objects for the
//! mean-value expansion over 4-balls: degree-4 polynomials are the lowest
//! degree where the Laplacian correction term is visible, and their
//! bilaplacian is a constant, which makes "biharmonic quartic" a one-line
//! construction.

use crate::{domain_err, Result};
use std::sync::OnceLock;

pub const MAX_DEG: usize = 4;

/// Multi-indices (a, b, c, d) with a+b+c+d ≤ 4, in a fixed order shared by all
/// polynomials.
fn monomials() -> &'static [[usize; 4]] {
    static TABLE: OnceLock<Vec<[usize; 4]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for total in 0..=MAX_DEG {
            for a in 0..=total {
                for b in 0..=total - a {
                    for c in 0..=total - a - b {
                        let d = total - a - b - c;
                        t.push([a, b, c, d]);
                    }
                }
            }
        }
        t
    })
}

fn mono_index(m: [usize; 4]) -> usize {
    monomials()
        .iter()
        .position(|&x| x == m)
        .expect("multi-index within degree bound")
}

/// Polynomial in (x₁, x₂, x₃, x₄) of total degree ≤ 4.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly4 {
    coeffs: Vec<f64>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Self { coeffs: vec![0.0; monomials().len()] }
    }

    /// Build from (multi-index, coefficient) terms; repeated indices add up.
    pub fn from_terms(terms: &[([usize; 4], f64)]) -> Result<Self> {
        let mut p = Self::zero();
        for &(m, c) in terms {
            if m.iter().sum::<usize>() > MAX_DEG {
                return domain_err(format!("monomial {m:?} exceeds degree {MAX_DEG}"));
            }
            p.coeffs[mono_index(m)] += c;
        }
        Ok(p)
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.coeffs[mono_index([0, 0, 0, 0])] = c;
        p
    }

    /// |X|² = x₁² + x₂² + x₃² + x₄².
    pub fn radius_sq() -> Self {
        Self::from_terms(&[
            ([2, 0, 0, 0], 1.0),
            ([0, 2, 0, 0], 1.0),
            ([0, 0, 2, 0], 1.0),
            ([0, 0, 0, 2], 1.0),
        ])
        .expect("degree 2")
    }

    /// |X|⁴, the reference quartic with Δ²|X|⁴ = 192 in ℝ⁴.
    pub fn radius_fourth() -> Self {
        let r2 = Self::radius_sq();
        let mut p = Self::zero();
        for (i, &mi) in monomials().iter().enumerate() {
            if r2.coeffs[i] == 0.0 {
                continue;
            }
            for (j, &mj) in monomials().iter().enumerate() {
                if r2.coeffs[j] == 0.0 {
                    continue;
                }
                let m = [mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2], mi[3] + mj[3]];
                p.coeffs[mono_index(m)] += r2.coeffs[i] * r2.coeffs[j];
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        let mut acc = 0.0;
        for (i, &m) in monomials().iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            acc += c
                * x[0].powi(m[0] as i32)
                * x[1].powi(m[1] as i32)
                * x[2].powi(m[2] as i32)
                * x[3].powi(m[3] as i32);
        }
        acc
    }

    /// Exact Laplacian Σᵢ ∂²/∂xᵢ².
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for (i, &m) in monomials().iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            for d in 0..4 {
                if m[d] >= 2 {
                    let mut md = m;
                    md[d] -= 2;
                    out.coeffs[mono_index(md)] += c * (m[d] * (m[d] - 1)) as f64;
                }
            }
        }
        out
    }

    /// Exact bilaplacian Δ²; constant for degree ≤ 4.
    pub fn bilaplacian(&self) -> Self {
        self.laplacian().laplacian()
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += s * b;
        }
    }

    /// Exact partial derivative along one axis.
    pub fn diff(&self, axis: usize) -> Self {
        assert!(axis < 4);
        let mut out = Self::zero();
        for (i, &m) in monomials().iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 || m[axis] == 0 {
                continue;
            }
            let mut md = m;
            md[axis] -= 1;
            out.coeffs[mono_index(md)] += c * m[axis] as f64;
        }
        out
    }

    /// Restriction to the hyperplane x₄ = 0: drops every monomial with a
    /// positive x₄ power.
    pub fn restrict_x4_zero(&self) -> Self {
        let mut out = self.clone();
        for (i, &m) in monomials().iter().enumerate() {
            if m[3] > 0 {
                out.coeffs[i] = 0.0;
            }
        }
        out
    }

    /// True when every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Largest coefficient magnitude — a cheap scale for relative comparisons.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Project onto the biharmonic subspace: q − (Δ²q/192)·|X|⁴ has Δ² = 0,
    /// since Δ²|X|⁴ = 192 in four dimensions and Δ²q is constant for quartics.
    /// The cancellation happens in floating-point coefficient arithmetic, so
    /// the result is biharmonic up to roundoff (see [`Self::is_biharmonic`]),
    /// not necessarily with a bitwise-zero bilaplacian.
    pub fn biharmonic_part(&self) -> Self {
        let d2 = self.bilaplacian().eval(&[0.0; 4]);
        let mut out = self.clone();
        out.add_scaled(&Self::radius_fourth(), -d2 / 192.0);
        out
    }

    /// Whether Δ²p vanishes relative to the polynomial's coefficient scale.
    /// Tolerates the roundoff that [`Self::biharmonic_part`] leaves behind
    /// while still rejecting anything with a genuinely nonzero bilaplacian.
    pub fn is_biharmonic(&self) -> bool {
        self.bilaplacian().coeff_scale() <= 1e-12 * self.coeff_scale().max(f64::MIN_POSITIVE)
    }

    /// Random polynomial with coefficients uniform in [−1, 1].
    pub fn random(rng: &mut impl rand::Rng) -> Self {
        let mut p = Self::zero();
        for c in p.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..=1.0);
        }
        p
    }
}
