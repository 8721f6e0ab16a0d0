//! Half-space extension machinery on ℝ⁴₊ = ℝ³ × (0, ∞): the Dirichlet
//! extension by convolution with the Poisson-type kernel, the Neumann
//! potential built from the logarithmic kernel, the third-order boundary
//! trace that realizes (−Δ)^{3/2}, the spectral (Fourier-symbol) operator on
//! a periodized grid, and the consistency check between the two routes.
//!
//! Accuracy note: the boundary trace is a third derivative, so it amplifies
//! any value-level noise by h⁻³. Fields that carry an analytic radial profile
//! are therefore extended through an exact 1D radial reduction of the
//! convolution; plain gridded fields use a cell-midpoint sum with curvature
//! correction, which is fine at value level but too noisy under the trace.

use crate::grid::{DecayModel, GridField3};
use crate::kernels::kappa_n;
use crate::quad::{adaptive_gl, half_line_decay, log_potential, weighted_tail_norm};
use crate::{domain_err, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// A field on the closed upper half-space that can be evaluated anywhere with
/// y ≥ 0. The boundary trace and residual operators drive their stencils
/// through this interface.
pub trait HalfSpaceEval: Sync {
    fn eval(&self, x: &[f64; 3], y: f64) -> Result<f64>;
}

/// Closure adapter: lets tests and compositions (sums, differences) of
/// half-space fields act as evaluators.
pub struct FnEval<F: Fn(&[f64; 3], f64) -> Result<f64> + Sync>(pub F);

impl<F: Fn(&[f64; 3], f64) -> Result<f64> + Sync> HalfSpaceEval for FnEval<F> {
    fn eval(&self, x: &[f64; 3], y: f64) -> Result<f64> {
        (self.0)(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DirichletExtension,
    NeumannPotential,
    Sum,
}

/// Point samples of a half-space field, tagged with how they were produced.
#[derive(Debug, Clone)]
pub struct HalfSpaceField {
    pub points: Vec<[f64; 4]>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// Dirichlet extension U(x, y) = ∫ K(x − x̃, y) u(x̃) dx̃ of boundary data u,
/// with K the Poisson-type kernel of order 3/2 on ℝ³. Satisfies Δ²U = 0,
/// U(·, 0) = u, ∂_y U(·, 0) = 0.
pub struct DirichletExtension<'a> {
    u: &'a GridField3,
    kappa: f64,
    /// Absolute quadrature tolerance for the radial profile path.
    tol: f64,
}

impl<'a> DirichletExtension<'a> {
    /// Wrap boundary data. Requires an integrable weighted tail
    /// (∫ |u|/(1+|x|⁶) < ∞), which is what makes the convolution converge.
    pub fn new(u: &'a GridField3) -> Result<Self> {
        // Surface the non-integrable case as a domain error up front.
        weighted_tail_norm(u, 6.0)?;
        Ok(Self { u, kappa: kappa_n(3)?, tol: 1e-12 })
    }

    /// Spherical mean of the Poisson-type kernel over the source sphere of
    /// radius ρ, as a function of the evaluation point's cylindrical
    /// coordinates (s, y): 2π ρ² κ y³ G with
    /// G = [(y²+(s−ρ)²)⁻² − (y²+(s+ρ)²)⁻²] / (4sρ).
    fn radial_kernel(&self, s: f64, y: f64, rho: f64) -> f64 {
        let am = y * y + (s - rho) * (s - rho); // A − B without cancellation
        let ap = y * y + (s + rho) * (s + rho); // A + B
        let b = 2.0 * s * rho;
        let a = y * y + s * s + rho * rho;
        let g = if b < 1e-4 * a {
            // Series in B/A: [(A−B)⁻² − (A+B)⁻²]/(2B) = (2/A³)(1 + 2(B/A)² + …)
            let ba = b / a;
            2.0 / (a * a * a) * (1.0 + 2.0 * ba * ba)
        } else {
            (1.0 / (am * am) - 1.0 / (ap * ap)) / (2.0 * b)
        };
        2.0 * PI * self.kappa * y.powi(3) * rho * rho * g
    }
}

impl HalfSpaceEval for DirichletExtension<'_> {
    fn eval(&self, x: &[f64; 3], y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return domain_err(format!("dirichlet extension needs y ≥ 0, got {y}"));
        }
        if y == 0.0 {
            return Ok(self.u.eval(x));
        }
        if let Some(p) = &self.u.profile {
            let c = p.center();
            let s =
                ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt();
            let g = |rho: f64| p.eval_radial(rho) * self.radial_kernel(s, y, rho);
            let ptol = self.tol / 256.0;
            let value = match support_radius(p) {
                Some(rsup) => adaptive_gl(&g, 0.0, rsup, ptol).0,
                None => {
                    let rtrunc = 40.0f64.max(4.0 * (s + y));
                    half_line_decay(&g, ptol, self.tol / 4.0, rtrunc, "dirichlet_extend")?.0
                }
            };
            return Ok(value);
        }
        grid_convolution(self.u, x, |d2| {
            // K = κ (y/(y²+|d|²))³ and its cell-curvature correction.
            let q = y * y + d2.0;
            let k = self.kappa * (y / q).powi(3);
            let mut corr = 0.0;
            for (hd, dd) in d2.1.iter().zip(d2.2.iter()) {
                let h_ii = 48.0 * dd * dd / q.powi(5) - 6.0 / q.powi(4);
                corr += hd * hd / 24.0 * self.kappa * y.powi(3) * h_ii;
            }
            k + corr
        })
        .map(|main| main + self.far_tail(x, y))
    }
}

impl DirichletExtension<'_> {
    /// Contribution of the density outside the grid, using the declared decay
    /// model and the far-field kernel K ≈ κ y³/r⁶.
    fn far_tail(&self, _x: &[f64; 3], y: f64) -> f64 {
        let b = &self.u.box3;
        let r0 = {
            let vol = 8.0 * b.half_widths[0] * b.half_widths[1] * b.half_widths[2];
            (3.0 * vol / (4.0 * PI)).powf(1.0 / 3.0).max(1.0)
        };
        let pref = 4.0 * PI * self.kappa * y.powi(3);
        match self.u.decay {
            DecayModel::CompactSupport => 0.0,
            DecayModel::PowerDecay(p) => {
                let amp = self.u.outer_shell_power_amp(p);
                // ∫_R^∞ r^{2−p}·r^{−6} dr = R^{−3−p}/(3+p), valid for p > −3.
                if p > -3.0 {
                    pref * amp * r0.powf(-3.0 - p) / (3.0 + p)
                } else {
                    0.0
                }
            }
            DecayModel::LogGrowth => {
                let (a, c) = self.u.outer_shell_logfit();
                // ∫_R^∞ (A ln r + B) r^{−4} dr.
                pref * (a * (r0.ln() / (3.0 * r0.powi(3)) + 1.0 / (9.0 * r0.powi(3)))
                    + c / (3.0 * r0.powi(3)))
            }
        }
    }
}

/// Effective support radius of a profile, when compactly supported.
fn support_radius(p: &crate::grid::Profile) -> Option<f64> {
    match p {
        crate::grid::Profile::RadialBump { radius, .. } => Some(*radius),
        _ => None,
    }
}

/// Shared midpoint-sum convolution over the grid with a per-cell kernel; the
/// closure receives (|d|², cell sizes, d) and returns the kernel value with
/// any curvature correction included. Deterministic slab-ordered summation.
fn grid_convolution(
    u: &GridField3,
    x: &[f64; 3],
    kernel: impl Fn((f64, [f64; 3], [f64; 3])) -> f64 + Sync,
) -> Result<f64> {
    let b = &u.box3;
    let h = b.cell_sizes();
    let vol = b.cell_volume();
    let [nx, ny, nz] = b.resolution;
    let vals = u.values();
    let slabs: Vec<f64> = (0..nz)
        .into_par_iter()
        .map(|k| {
            let zk = b.coord(2, k);
            let mut acc = 0.0;
            for j in 0..ny {
                let zj = b.coord(1, j);
                for i in 0..nx {
                    let zi = b.coord(0, i);
                    let d = [x[0] - zi, x[1] - zj, x[2] - zk];
                    let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    acc += vals[b.idx(i, j, k)] * kernel((d2, h, d));
                }
            }
            acc
        })
        .collect();
    Ok(slabs.iter().sum::<f64>() * vol)
}

/// Neumann potential V(x, y) = (1/2π²) ∫ log(1/|(x,y) − (x̃,0)|) w(x̃) dx̃:
/// biharmonic off the support of w, even in y, and with third-order boundary
/// trace equal to w.
pub struct NeumannPotential<'a> {
    w: &'a GridField3,
    tol: f64,
}

impl<'a> NeumannPotential<'a> {
    pub fn new(w: &'a GridField3) -> Result<Self> {
        match w.decay {
            DecayModel::CompactSupport | DecayModel::PowerDecay(_) => {}
            DecayModel::LogGrowth => {
                return domain_err(
                    "neumann potential requires an integrable density, \
                     got log-growth decay"
                        .to_string(),
                )
            }
        }
        Ok(Self { w, tol: 1e-12 })
    }
}

impl HalfSpaceEval for NeumannPotential<'_> {
    fn eval(&self, x: &[f64; 3], y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return domain_err(format!("neumann potential needs y ≥ 0, got {y}"));
        }
        if let Some(p) = &self.w.profile {
            let c = p.center();
            let s =
                ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt();
            // Spherical mean of log(1/|X−z|) over the source sphere |z| = ρ:
            // −J/4 with J = [(A+B)(ln(A+B)−1) − (A−B)(ln(A−B)−1)]/B.
            let g = |rho: f64| {
                let am = y * y + (s - rho) * (s - rho);
                let ap = y * y + (s + rho) * (s + rho);
                let bb = 2.0 * s * rho;
                let a = y * y + s * s + rho * rho;
                let j = if bb < 1e-4 * a {
                    2.0 * a.ln() - bb * bb / (3.0 * a * a)
                } else {
                    let term = |t: f64| if t <= 0.0 { 0.0 } else { t * (t.ln() - 1.0) };
                    (term(ap) - term(am)) / bb
                };
                -p.eval_radial(rho) * rho * rho * j / (2.0 * PI)
            };
            let ptol = self.tol / 256.0;
            let value = match support_radius(p) {
                Some(rsup) => adaptive_gl(&g, 0.0, rsup, ptol).0,
                None => {
                    let rtrunc = 40.0f64.max(4.0 * (s + y));
                    half_line_decay(&g, ptol, self.tol / 4.0, rtrunc, "neumann_extend")?.0
                }
            };
            return Ok(value);
        }
        log_potential(self.w, [x[0], x[1], x[2], y]).map(|v| v.0)
    }
}

fn collect_samples(
    eval: &impl HalfSpaceEval,
    points: &[[f64; 4]],
    provenance: Provenance,
) -> Result<HalfSpaceField> {
    let values = points
        .par_iter()
        .map(|p| eval.eval(&[p[0], p[1], p[2]], p[3]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(HalfSpaceField { points: points.to_vec(), values, provenance })
}

/// Sample the Dirichlet extension of `u` at the given half-space points
/// (y = 0 points return the boundary data directly).
pub fn dirichlet_extend(u: &GridField3, points: &[[f64; 4]]) -> Result<HalfSpaceField> {
    let ext = DirichletExtension::new(u)?;
    collect_samples(&ext, points, Provenance::DirichletExtension)
}

/// Sample the Neumann potential of the density `w` at the given points.
pub fn neumann_extend(w: &GridField3, points: &[[f64; 4]]) -> Result<HalfSpaceField> {
    let pot = NeumannPotential::new(w)?;
    collect_samples(&pot, points, Provenance::NeumannPotential)
}

/// Result of the boundary-trace operator: the extrapolated value, an error
/// indicator (size of the last Richardson correction), and whether the
/// step-halving sequence behaved like a second-order expansion.
#[derive(Debug, Clone, Copy)]
pub struct TraceResult {
    pub value: f64,
    pub error_indicator: f64,
    pub converged: bool,
}

/// Laplacian of U at (x, y): exact 7-point stencil in x with step hx, plus
/// ∂_yy by a centered stencil of half-height step evaluated on the even
/// reflection U(x, |y|).
fn laplacian_4d(
    u_ext: &impl HalfSpaceEval,
    x: &[f64; 3],
    y: f64,
    hx: f64,
) -> Result<f64> {
    let c = u_ext.eval(x, y)?;
    let mut lap = 0.0;
    for d in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[d] += hx;
        xm[d] -= hx;
        lap += (u_ext.eval(&xp, y)? - 2.0 * c + u_ext.eval(&xm, y)?) / (hx * hx);
    }
    let dy = 0.5 * y;
    lap += (u_ext.eval(x, y + dy)? - 2.0 * c + u_ext.eval(x, (y - dy).abs())?) / (dy * dy);
    Ok(lap)
}

/// One-sided derivative of y ↦ ΔU(x, y) at y = 0 from heights h, 2h, 3h
/// (exact on constants, linears, quadratics in y).
fn trace_slope(u_ext: &impl HalfSpaceEval, x: &[f64; 3], h: f64) -> Result<f64> {
    let d1 = laplacian_4d(u_ext, x, h, h)?;
    let d2 = laplacian_4d(u_ext, x, 2.0 * h, h)?;
    let d3 = laplacian_4d(u_ext, x, 3.0 * h, h)?;
    Ok((-5.0 * d1 + 8.0 * d2 - 3.0 * d3) / (2.0 * h))
}

/// Third-order boundary trace ½ ∂_y Δ U(x, 0⁺), computed from the slope of
/// the 4D Laplacian at heights proportional to h, with Richardson
/// extrapolation over h, h/2, h/4 and a ratio test for convergence.
pub fn neumann_trace_l32(
    u_ext: &impl HalfSpaceEval,
    x: &[f64; 3],
    h: f64,
) -> Result<TraceResult> {
    if !(h > 0.0) || !h.is_finite() {
        return domain_err(format!("neumann_trace_l32: step must be > 0, got {h}"));
    }
    let s1 = trace_slope(u_ext, x, h)?;
    let s2 = trace_slope(u_ext, x, 0.5 * h)?;
    let s3 = trace_slope(u_ext, x, 0.25 * h)?;
    let scale = s1.abs().max(s2.abs()).max(s3.abs()).max(1e-300);
    let d12 = (s1 - s2).abs();
    let d23 = (s2 - s3).abs();
    // Second-order behavior means the differences shrink ~4× per halving;
    // accept down to 1.5×, or immediately when the sequence has flatlined.
    let converged = d23 <= 1e-9 * scale || (d23 > 0.0 && d12 / d23 >= 1.5);
    let extrap = (4.0 * s3 - s2) / 3.0;
    let mut err = d23 / 6.0;
    if !converged {
        err = err.max(0.5 * d12);
    }
    Ok(TraceResult { value: 0.5 * extrap, error_indicator: err, converged })
}

/// A grid field together with a possible quality warning from the transform
/// that produced it.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub field: GridField3,
    pub warning: Option<String>,
}

/// Fractional Laplacian (−Δ)^power via the Fourier symbol |ξ|^{2·power} on
/// the periodized box. Compact-support and power-decay fields are zero-padded
/// 2× per axis to suppress wrap-around; log-growth fields are transformed on
/// their own box (padding would manufacture a jump at the seam). The zero
/// mode maps to 0: constants are annihilated.
pub fn spectral_fraclap(u: &GridField3, power: f64) -> Result<SpectralField> {
    if !(power > 0.0 && power <= 2.0) {
        return domain_err(format!("spectral_fraclap: power must lie in (0, 2], got {power}"));
    }
    let b = &u.box3;
    let [nx, ny, nz] = b.resolution;
    let pad = match u.decay {
        DecayModel::LogGrowth => 1usize,
        _ => 2usize,
    };
    let (px, py, pz) = (pad * nx, pad * ny, pad * nz);
    let pidx = |i: usize, j: usize, k: usize| i + px * (j + py * k);

    use rustfft::num_complex::Complex;
    let mut data = vec![Complex::new(0.0, 0.0); px * py * pz];
    let vals = u.values();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                data[pidx(i, j, k)].re = vals[b.idx(i, j, k)];
            }
        }
    }
    crate::fftutil::fft3(&mut data, [px, py, pz], false);

    let lens = [
        pad as f64 * 2.0 * b.half_widths[0],
        pad as f64 * 2.0 * b.half_widths[1],
        pad as f64 * 2.0 * b.half_widths[2],
    ];
    let freq = |m: usize, n: usize, len: f64| {
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * signed / len
    };
    data.par_chunks_mut(px * py).enumerate().for_each(|(k, slab)| {
        let xi3 = freq(k, pz, lens[2]);
        for j in 0..py {
            let xi2 = freq(j, py, lens[1]);
            for i in 0..px {
                let xi1 = freq(i, px, lens[0]);
                let xi2sum = xi1 * xi1 + xi2 * xi2 + xi3 * xi3;
                let sym = if xi2sum == 0.0 { 0.0 } else { xi2sum.powf(power) };
                slab[i + px * j] *= sym;
            }
        }
    });
    crate::fftutil::fft3(&mut data, [px, py, pz], true);

    let mut out = vec![0.0f64; nx * ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                out[b.idx(i, j, k)] = data[pidx(i, j, k)].re;
            }
        }
    }
    // Wrap-around quality check: padded transforms assume the field is
    // negligible at the box boundary.
    let warning = if pad > 1 {
        let shell = u.outer_shell_mean(|_| 1.0);
        let peak = u.sup_norm();
        if peak > 0.0 && shell > 1e-3 * peak {
            Some(format!(
                "field magnitude at the box boundary (mean {shell:.3e}) is not negligible \
                 against its peak ({peak:.3e}); periodization error may dominate"
            ))
        } else {
            None
        }
    } else {
        None
    };
    let field = GridField3::from_values(b.clone(), out, DecayModel::PowerDecay(6.0))?;
    Ok(SpectralField { field, warning })
}

/// Report of the consistency check between the extension/trace route and the
/// spectral route for the same boundary data.
#[derive(Debug, Clone)]
pub struct RelationReport {
    /// Probe points, snapped to grid cell centers.
    pub probes: Vec<[f64; 3]>,
    /// Boundary-trace values ½∂_yΔU at the probes.
    pub trace_values: Vec<f64>,
    /// Spectral operator values at the same cells.
    pub spectral_values: Vec<f64>,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    /// Scale of the comparison: sup |spectral| over the grid.
    pub scale: f64,
    /// max_abs_residual / scale.
    pub max_relative: f64,
    pub warning: Option<String>,
}

/// Compare the boundary trace of the Dirichlet extension of u against the
/// spectral fractional Laplacian of u at the given probe points (snapped to
/// cell centers so both sides are evaluated at identical locations).
pub fn check_relation(u: &GridField3, probes: &[[f64; 3]], h: f64) -> Result<RelationReport> {
    if probes.is_empty() {
        return domain_err("check_relation: need at least one probe point".to_string());
    }
    let spectral = spectral_fraclap(u, 1.5)?;
    let ext = DirichletExtension::new(u)?;
    let b = &u.box3;

    let mut snapped = Vec::with_capacity(probes.len());
    let mut cells = Vec::with_capacity(probes.len());
    for p in probes {
        if !b.contains(p) {
            return domain_err(format!("check_relation: probe {p:?} outside the grid box"));
        }
        let h3 = b.cell_sizes();
        let mut idx = [0usize; 3];
        for d in 0..3 {
            let t = ((p[d] - (b.center[d] - b.half_widths[d])) / h3[d] - 0.5).round();
            idx[d] = (t.max(0.0) as usize).min(b.resolution[d] - 1);
        }
        snapped.push(b.point(idx[0], idx[1], idx[2]));
        cells.push(idx);
    }

    let trace_values = snapped
        .par_iter()
        .map(|x| neumann_trace_l32(&ext, x, h).map(|t| t.value))
        .collect::<Result<Vec<f64>>>()?;
    let spectral_values: Vec<f64> =
        cells.iter().map(|&[i, j, k]| spectral.field.value(i, j, k)).collect();

    let scale = spectral.field.sup_norm().max(1e-300);
    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0;
    for (t, s) in trace_values.iter().zip(spectral_values.iter()) {
        let r = (t - s).abs();
        max_abs = max_abs.max(r);
        sum_abs += r;
    }
    Ok(RelationReport {
        probes: snapped,
        trace_values,
        spectral_values,
        max_abs_residual: max_abs,
        mean_abs_residual: sum_abs / probes.len() as f64,
        scale,
        max_relative: max_abs / scale,
        warning: spectral.warning,
    })
}

/// Discrete bilaplacian Δ²U at an interior point X (y > 2h), by composing the
/// 9-point 4D Laplacian with itself and Richardson-extrapolating over h and
/// h/2. Near zero for valid extensions; exactly 192 on |X|⁴.
pub fn biharmonic_residual(
    u_ext: &impl HalfSpaceEval,
    x4: [f64; 4],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return domain_err(format!("biharmonic_residual: step must be > 0, got {h}"));
    }
    if x4[3] <= 2.0 * h {
        return domain_err(format!(
            "biharmonic_residual: point must be interior (y > 2h), got y = {}, h = {h}",
            x4[3]
        ));
    }
    let lap = |c: [f64; 4], step: f64| -> Result<f64> {
        let center = u_ext.eval(&[c[0], c[1], c[2]], c[3])?;
        let mut acc = 0.0;
        for d in 0..4 {
            let mut p = c;
            let mut m = c;
            p[d] += step;
            m[d] -= step;
            let vp = u_ext.eval(&[p[0], p[1], p[2]], p[3])?;
            let vm = u_ext.eval(&[m[0], m[1], m[2]], m[3])?;
            acc += (vp - 2.0 * center + vm) / (step * step);
        }
        Ok(acc)
    };
    let bilap = |step: f64| -> Result<f64> {
        let center = lap(x4, step)?;
        let mut acc = 0.0;
        for d in 0..4 {
            let mut p = x4;
            let mut m = x4;
            p[d] += step;
            m[d] -= step;
            acc += (lap(p, step)? - 2.0 * center + lap(m, step)?) / (step * step);
        }
        Ok(acc)
    };
    let b1 = bilap(h)?;
    let b2 = bilap(0.5 * h)?;
    Ok((4.0 * b2 - b1) / 3.0)
}
