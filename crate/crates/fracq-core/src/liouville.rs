//! Model solutions of the nonlocal Liouville equation (−Δ)^{3/2}u = Q e^{3u}
//! on ℝ³, their scaled concentrating families, the class of nonpositive
//! y-independent biharmonic comparison polynomials, and the fixed-point
//! construction of blow-up sequences with polynomial growth profiles.

use crate::grid::{Box3, DecayModel, GridField3, Profile};
use crate::poly::Poly4;
use crate::quad::{integrate_box3, log_potential_grid};
use crate::{domain_err, FracqError, Result};
use serde::Serialize;

/// Model concentrating solution: u(x) = log(2λ/(1 + λ²|x−x₀|²)) when the
/// quadratic coefficient is zero (the exactly implemented closed form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleSpec {
    pub center: [f64; 3],
    pub lambda: f64,
    /// Far-field quadratic coefficient c in u ≈ −log|x| − c|x|²; only c = 0
    /// has a closed form, c > 0 is represented asymptotically.
    pub quad_coefficient: f64,
}

impl BubbleSpec {
    pub fn new(center: [f64; 3], lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain_err(format!("BubbleSpec: scale must be > 0, got {lambda}"));
        }
        Ok(Self { center, lambda, quad_coefficient: 0.0 })
    }

    pub fn with_quad_coefficient(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return domain_err(format!("BubbleSpec: quadratic coefficient must be ≥ 0, got {c}"));
        }
        self.quad_coefficient = c;
        Ok(self)
    }

    /// Whether `bubble_u` evaluates the exact closed form (c = 0) rather than
    /// the asymptotic approximation.
    pub fn is_exact(&self) -> bool {
        self.quad_coefficient == 0.0
    }
}

/// Value of the model solution. Exact closed form for c = 0; for c > 0 the
/// asymptotic form u ≈ log(2λ/(1+λ²ρ²)) − cρ² (correct to O(ρ⁻²) far out,
/// approximate near the center — see [`BubbleSpec::is_exact`]).
pub fn bubble_u(spec: &BubbleSpec, x: &[f64; 3]) -> f64 {
    let dx = [x[0] - spec.center[0], x[1] - spec.center[1], x[2] - spec.center[2]];
    let rho2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
    let l = spec.lambda;
    let core = (2.0 * l / (1.0 + l * l * rho2)).ln();
    core - spec.quad_coefficient * rho2
}

/// The concentrating family u_k(x) = u(kx) + log k, sampled on `box3`.
/// For the closed-form model this is again a model solution with scale kλ
/// centered at x₀/k, so the returned field carries an exact profile.
pub fn scaled_family(spec: &BubbleSpec, k: u32, box3: Box3) -> Result<GridField3> {
    if k == 0 {
        return domain_err("scaled_family: k must be ≥ 1".to_string());
    }
    if !spec.is_exact() {
        return domain_err(
            "scaled_family: only the closed-form model (quad_coefficient = 0) can be scaled exactly"
                .to_string(),
        );
    }
    let kf = k as f64;
    let profile = Profile::Bubble {
        center: [spec.center[0] / kf, spec.center[1] / kf, spec.center[2] / kf],
        lambda: spec.lambda * kf,
    };
    GridField3::from_profile(box3, profile)
}

/// Symbolic description of the zero set S_Φ = {x ∈ Σ₀ : φ(x) = 0} of the
/// boundary trace, for the polynomial families implemented here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SPhi {
    /// φ < 0 everywhere on Σ₀.
    Empty,
    /// Coordinate subspace {xᵢ = 0 for each flagged axis}.
    Subspace { vanishing: [bool; 3] },
}

impl SPhi {
    pub fn is_empty(&self) -> bool {
        matches!(self, SPhi::Empty)
    }

    /// Dimension of the zero set (None when empty).
    pub fn dim(&self) -> Option<usize> {
        match self {
            SPhi::Empty => None,
            SPhi::Subspace { vanishing } => {
                Some(3 - vanishing.iter().filter(|v| **v).count())
            }
        }
    }

    /// Euclidean distance from x to the zero set (+∞ when empty).
    pub fn distance(&self, x: &[f64; 3]) -> f64 {
        match self {
            SPhi::Empty => f64::INFINITY,
            SPhi::Subspace { vanishing } => {
                let mut d2 = 0.0;
                for i in 0..3 {
                    if vanishing[i] {
                        d2 += x[i] * x[i];
                    }
                }
                d2.sqrt()
            }
        }
    }
}

/// Nonpositive polynomial Φ(x, y) on ℝ⁴₊ with Δ²Φ = 0, ∂_yΦ(·,0) = 0 and
/// ∂_yΔΦ(·,0) = 0 — the comparison growth profiles. All four structural
/// conditions are verified exactly on the coefficients at construction;
/// nonpositivity is checked on a sample grid.
#[derive(Debug, Clone)]
pub struct BiharmonicProfile {
    poly: Poly4,
    pub sigma0: Box3,
    pub s_phi: SPhi,
}

impl BiharmonicProfile {
    pub fn new(poly: Poly4, sigma0: Box3, s_phi: SPhi) -> Result<Self> {
        if poly.is_zero() {
            return domain_err("BiharmonicProfile: Φ must not be identically zero".to_string());
        }
        if !poly.bilaplacian().is_zero() {
            return domain_err("BiharmonicProfile: Δ²Φ ≠ 0 on coefficients".to_string());
        }
        if !poly.diff(3).restrict_x4_zero().is_zero() {
            return domain_err("BiharmonicProfile: ∂_yΦ(·,0) ≠ 0 on coefficients".to_string());
        }
        if !poly.laplacian().diff(3).restrict_x4_zero().is_zero() {
            return domain_err("BiharmonicProfile: ∂_yΔΦ(·,0) ≠ 0 on coefficients".to_string());
        }
        // Sign check on a sample grid of Σ₀ × [0, y_max].
        let scale = poly.coeff_scale();
        let n = 9;
        let ymax = sigma0.half_widths[0].max(sigma0.half_widths[1]).max(sigma0.half_widths[2]);
        for iy in 0..n {
            let y = ymax * iy as f64 / (n - 1) as f64;
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let x = [
                            sigma0.center[0] + sigma0.half_widths[0] * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                            sigma0.center[1] + sigma0.half_widths[1] * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
                            sigma0.center[2] + sigma0.half_widths[2] * (2.0 * k as f64 / (n - 1) as f64 - 1.0),
                        ];
                        let v = poly.eval(&[x[0], x[1], x[2], y]);
                        if v > 1e-12 * scale {
                            return domain_err(format!(
                                "BiharmonicProfile: Φ({x:?}, {y}) = {v:.3e} > 0"
                            ));
                        }
                    }
                }
            }
        }
        Ok(Self { poly, sigma0, s_phi })
    }

    /// The polynomial itself (read-only).
    pub fn poly(&self) -> &Poly4 {
        &self.poly
    }

    /// Boundary trace φ(x) = Φ(x, 0).
    pub fn phi(&self, x: &[f64; 3]) -> f64 {
        self.poly.eval(&[x[0], x[1], x[2], 0.0])
    }

    /// Φ at a half-space point.
    pub fn eval4(&self, x4: &[f64; 4]) -> f64 {
        self.poly.eval(x4)
    }
}

/// The basic family Φ = −offset − a₁x₁² − a₂x₂² − a₃x₃² on the default
/// domain Σ₀ = [−1,1]³ at 64³. Zero set: the coordinate subspace where the
/// weighted coordinates vanish, or empty when offset > 0.
pub fn kernel_class_poly(a: [f64; 3]) -> Result<BiharmonicProfile> {
    kernel_class_poly_offset(a, 0.0, default_sigma0()?)
}

/// As [`kernel_class_poly`] with an additive offset (making S_Φ empty when
/// positive) and an explicit Σ₀.
pub fn kernel_class_poly_offset(
    a: [f64; 3],
    offset: f64,
    sigma0: Box3,
) -> Result<BiharmonicProfile> {
    if a.iter().any(|&c| c < 0.0) || !(offset >= 0.0) {
        return domain_err(format!(
            "kernel_class_poly: coefficients must be ≥ 0, got a = {a:?}, offset = {offset}"
        ));
    }
    if a.iter().all(|&c| c == 0.0) && offset == 0.0 {
        return domain_err("kernel_class_poly: Φ would be identically zero".to_string());
    }
    let poly = Poly4::from_terms(&[
        ([0, 0, 0, 0], -offset),
        ([2, 0, 0, 0], -a[0]),
        ([0, 2, 0, 0], -a[1]),
        ([0, 0, 2, 0], -a[2]),
    ])?;
    let s_phi = if offset > 0.0 || a.iter().all(|&c| c == 0.0) {
        SPhi::Empty
    } else {
        SPhi::Subspace { vanishing: [a[0] > 0.0, a[1] > 0.0, a[2] > 0.0] }
    };
    BiharmonicProfile::new(poly, sigma0, s_phi)
}

/// Default fixed-point domain: the unit box [−1,1]³ at 64³ cells.
pub fn default_sigma0() -> Result<Box3> {
    Box3::cube([0.0; 3], 1.0, 64)
}

/// λ_k = ∫_{Σ₀} e^{6kφ} dx, by adaptive quadrature (the octree refines into
/// the concentration set where the integrand peaks).
pub fn lambda_k(profile: &BiharmonicProfile, k: u32) -> Result<f64> {
    if k == 0 {
        return domain_err("lambda_k: k must be ≥ 1".to_string());
    }
    let kf = k as f64;
    let (val, _) =
        integrate_box3(|x| (6.0 * kf * profile.phi(x)).exp(), &profile.sigma0, 1e-9)?;
    Ok(val)
}

/// The additive normalization: c_k = (1/6) log(ε/λ_k), or 1 when S_Φ = ∅.
pub fn c_k(epsilon: f64, lambda: f64, s_phi_empty: bool) -> Result<f64> {
    if s_phi_empty {
        return Ok(1.0);
    }
    if !(epsilon > 0.0) || !(lambda > 0.0) {
        return domain_err(format!(
            "c_k: epsilon and lambda must be > 0, got {epsilon}, {lambda}"
        ));
    }
    Ok((epsilon / lambda).ln() / 6.0)
}

/// Configuration of one fixed-point solve.
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    pub k: u32,
    /// Initial ε; the solver may shrink it to establish the sup bound.
    pub epsilon: f64,
    /// Curvature factor Q on the Σ₀ grid (also fixes the solve grid).
    pub q: GridField3,
    pub profile: BiharmonicProfile,
    pub max_iter: usize,
    pub damping: f64,
    pub tol: f64,
}

impl FixedPointConfig {
    pub fn new(k: u32, epsilon: f64, q: GridField3, profile: BiharmonicProfile) -> Result<Self> {
        let cfg = Self { k, epsilon, q, profile, max_iter: 200, damping: 0.5, tol: 1e-8 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return domain_err("FixedPointConfig: k must be ≥ 1".to_string());
        }
        if !(self.epsilon > 0.0) {
            return domain_err(format!("FixedPointConfig: ε must be > 0, got {}", self.epsilon));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return domain_err(format!(
                "FixedPointConfig: damping must lie in (0, 1], got {}",
                self.damping
            ));
        }
        if !(self.tol > 0.0) {
            return domain_err(format!("FixedPointConfig: tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return domain_err("FixedPointConfig: max_iter must be ≥ 1".to_string());
        }
        let qb = &self.q.box3;
        let sb = &self.profile.sigma0;
        let same_geom = (0..3).all(|d| {
            (qb.center[d] - sb.center[d]).abs() <= 1e-12
                && (qb.half_widths[d] - sb.half_widths[d]).abs() <= 1e-12
        });
        if !same_geom {
            return domain_err(
                "FixedPointConfig: Q must be sampled on the profile's Σ₀ box".to_string(),
            );
        }
        Ok(())
    }
}

/// One application of the fixed-point map:
/// T(v)(x) = (1/2π²) ∫_{Σ₀} log(1/|x−x̃|) Q(x̃) e^{3(kφ(x̃)+c_k)} e^{3v(x̃)} dx̃,
/// evaluated on the Σ₀ grid through the FFT log-potential.
pub fn t_map(v: &GridField3, cfg: &FixedPointConfig) -> Result<GridField3> {
    cfg.validate()?;
    let lam = lambda_k(&cfg.profile, cfg.k)?;
    let ck = c_k(cfg.epsilon, lam, cfg.profile.s_phi.is_empty())?;
    t_map_inner(v, cfg, ck)
}

fn t_map_inner(v: &GridField3, cfg: &FixedPointConfig, ck: f64) -> Result<GridField3> {
    let w = source_density(v, cfg, ck)?;
    log_potential_grid(&w)
}

/// The density Q e^{3(kφ + c_k + v)} on the Σ₀ grid, treated as compactly
/// supported (the fixed-point problem lives on Σ₀).
fn source_density(v: &GridField3, cfg: &FixedPointConfig, ck: f64) -> Result<GridField3> {
    let b = &cfg.q.box3;
    if v.box3 != *b {
        return domain_err("t_map: v must live on the Σ₀ grid".to_string());
    }
    let kf = cfg.k as f64;
    let [nx, ny, nz] = b.resolution;
    let mut vals = Vec::with_capacity(b.num_cells());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let x = b.point(i, j, k);
                let idx = b.idx(i, j, k);
                let e = 3.0 * (kf * cfg.profile.phi(&x) + ck + v.values()[idx]);
                vals.push(cfg.q.values()[idx] * e.exp());
            }
        }
    }
    GridField3::from_values(b.clone(), vals, DecayModel::CompactSupport)
}

/// Result of a fixed-point solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub v_k: GridField3,
    pub c_k: f64,
    pub lambda_k: f64,
    /// Final sup|T(v) − v|.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// ε actually used after the auto-shrink loop.
    pub epsilon_used: f64,
}

/// Solve v = T(v) by damped Picard iteration from v = 0, after shrinking ε
/// (halving) until sup|T(v)| ≤ 1 holds on the probe fields v ≡ 0, ±1.
/// A converged result satisfies sup|v_k| ≤ 1.
pub fn solve_fixed_point(cfg: &FixedPointConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let lam = lambda_k(&cfg.profile, cfg.k)?;
    let empty = cfg.profile.s_phi.is_empty();
    let b = &cfg.q.box3;

    let mut eps = cfg.epsilon;
    let mut ck = c_k(eps, lam, empty)?;
    let mut bound_ok = false;
    for _ in 0..64 {
        ck = c_k(eps, lam, empty)?;
        let mut ok = true;
        for probe in [0.0, 1.0, -1.0] {
            let vp = GridField3::constant(b.clone(), probe)?;
            let tv = t_map_inner(&vp, cfg, ck)?;
            if tv.sup_norm() > 1.0 {
                ok = false;
                break;
            }
        }
        if ok {
            bound_ok = true;
            break;
        }
        eps *= 0.5;
    }
    if !bound_ok {
        return domain_err(
            "solve_fixed_point: could not establish the sup bound ‖T(v)‖ ≤ 1 \
             by shrinking ε"
                .to_string(),
        );
    }

    let mut v = GridField3::constant(b.clone(), 0.0)?;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let d = cfg.damping;
    for it in 1..=cfg.max_iter {
        iterations = it;
        let tv = t_map_inner(&v, cfg, ck)?;
        residual = v
            .values()
            .iter()
            .zip(tv.values().iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        history.push(residual);
        let mut next = vec![0.0; v.values().len()];
        for (n, (a, b)) in next.iter_mut().zip(v.values().iter().zip(tv.values().iter())) {
            *n = (1.0 - d) * a + d * b;
        }
        v = GridField3::from_values(b.clone(), next, DecayModel::CompactSupport)?;
        if residual <= cfg.tol {
            break;
        }
    }
    let converged = residual <= cfg.tol && v.sup_norm() <= 1.0 + 1e-12;
    Ok(SolveResult {
        v_k: v,
        c_k: ck,
        lambda_k: lam,
        residual,
        iterations,
        converged,
        residual_history: history,
        epsilon_used: eps,
    })
}

/// Assemble the solution sample u_k = v_k + kφ + c_k on the Σ₀ grid.
pub fn assemble_u_k(result: &SolveResult, cfg: &FixedPointConfig) -> Result<GridField3> {
    let b = &cfg.q.box3;
    let kf = cfg.k as f64;
    let [nx, ny, nz] = b.resolution;
    let mut vals = Vec::with_capacity(b.num_cells());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let x = b.point(i, j, k);
                vals.push(
                    result.v_k.values()[b.idx(i, j, k)] + kf * cfg.profile.phi(&x) + result.c_k,
                );
            }
        }
    }
    // u_k grows like kφ, a polynomial: power "decay" with negative exponent.
    GridField3::from_values(b.clone(), vals, DecayModel::PowerDecay(-2.0))
}

/// Exactly evaluable half-space extension of a solved fixed point:
/// U_k(x, y) = kΦ(x, y) + c_k + V(x, y) with V the log potential of the
/// fixed-point density. Its boundary trace is the density itself, which is
/// what makes the equation check self-contained.
pub struct SolvedExtension {
    profile: BiharmonicProfile,
    k: f64,
    c_k: f64,
    /// Q e^{3u_k} on the Σ₀ grid.
    pub density: GridField3,
}

impl SolvedExtension {
    pub fn new(result: &SolveResult, cfg: &FixedPointConfig) -> Result<Self> {
        cfg.validate()?;
        let density = source_density(&result.v_k, cfg, result.c_k)?;
        Ok(Self {
            profile: cfg.profile.clone(),
            k: cfg.k as f64,
            c_k: result.c_k,
            density,
        })
    }
}

impl crate::extension::HalfSpaceEval for SolvedExtension {
    fn eval(&self, x: &[f64; 3], y: f64) -> Result<f64> {
        let pot = crate::extension::NeumannPotential::new(&self.density)?;
        let v = crate::extension::HalfSpaceEval::eval(&pot, x, y)?;
        Ok(self.k * self.profile.eval4(&[x[0], x[1], x[2], y]) + self.c_k + v)
    }
}

/// One member of a blow-up sequence, with its growth diagnostics.
#[derive(Debug, Clone)]
pub struct BlowupStep {
    pub k: u32,
    pub result: SolveResult,
    pub u_k: GridField3,
    /// sup over grid points at distance ≥ 0.5 from S_Φ of |u_k/k − φ|.
    pub sup_deviation_away: f64,
    /// u_k at the grid point nearest S_Φ (None when S_Φ = ∅).
    pub u_on_s_phi: Option<f64>,
}

/// Run the fixed-point construction for each k and report how u_k/k tracks
/// the growth profile away from its zero set.
pub fn blowup_sequence(
    profile: &BiharmonicProfile,
    k_list: &[u32],
    q: &GridField3,
) -> Result<Vec<BlowupStep>> {
    if k_list.is_empty() {
        return domain_err("blowup_sequence: need at least one k".to_string());
    }
    let mut steps = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let cfg = FixedPointConfig::new(k, 1.0, q.clone(), profile.clone())?;
        let result = solve_fixed_point(&cfg)?;
        let u_k = assemble_u_k(&result, &cfg)?;
        let b = &u_k.box3;
        let [nx, ny, nz] = b.resolution;
        let kf = k as f64;
        let mut sup_away = 0.0f64;
        let mut nearest = (f64::INFINITY, None::<f64>);
        for kk in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let x = b.point(i, j, kk);
                    let dist = profile.s_phi.distance(&x);
                    let uv = u_k.values()[b.idx(i, j, kk)];
                    if dist >= 0.5 {
                        sup_away = sup_away.max((uv / kf - profile.phi(&x)).abs());
                    }
                    if dist < nearest.0 {
                        nearest = (dist, Some(uv));
                    }
                }
            }
        }
        let u_on_s_phi = if profile.s_phi.is_empty() { None } else { nearest.1 };
        steps.push(BlowupStep { k, result, u_k, sup_deviation_away: sup_away, u_on_s_phi });
    }
    Ok(steps)
}

impl SolveResult {
    /// Scalar summary (fields go to `.gf3` files separately).
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "c_k": self.c_k,
            "lambda_k": self.lambda_k,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "epsilon_used": self.epsilon_used,
            "sup_v": self.v_k.sup_norm(),
            "residual_history": self.residual_history,
        })
    }
}

/// Total curvature ∫ Q e^{3u} dx of a model solution with constant Q,
/// computed by radial quadrature. Independent of λ; for the canonical
/// Q ≡ 2 the value is 4π².
pub fn bubble_total_curvature(spec: &BubbleSpec, q_const: f64) -> Result<f64> {
    if !spec.is_exact() {
        return domain_err("bubble_total_curvature: requires the closed-form model".to_string());
    }
    let l = spec.lambda;
    let f = move |r: f64| q_const * (2.0 * l / (1.0 + l * l * r * r)).powi(3);
    crate::quad::integrate_radial(f, 3, 1e-9).map(|v| v.0)
}

/// Convenience: the Tolerance error for an unconverged solve, used by
/// callers that treat non-convergence as fatal.
pub fn require_converged(result: &SolveResult, tol: f64) -> Result<()> {
    if result.converged {
        Ok(())
    } else {
        Err(FracqError::Tolerance {
            requested: tol,
            achieved: result.residual,
            context: "fixed-point iteration did not converge".into(),
        })
    }
}
