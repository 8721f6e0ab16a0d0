//! Quadrature engines: Gauss–Legendre rules, adaptive 1D integration, radial
//! integrals over ℝⁿ with power-law tail extrapolation, adaptive box integrals
//! in ℝ³, a product rule over balls in ℝ⁴ exact on quartics, and logarithmic
//! potentials of gridded densities.
//!
//! Every routine returns `(value, error_estimate)` and reports failure to meet
//! a requested tolerance as an error instead of silently returning a bad
//! value. All summation orders are fixed so results are bit-reproducible
//! across runs and thread counts.

use crate::grid::{DecayModel, GridField3};
use crate::specfun::gamma_fn;
use crate::{domain_err, FracqError, Result};
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

pub use crate::grid::Box3;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// computed by Newton iteration on the Legendre recurrence and cached.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| compute_gauss_legendre(n))
        .clone()
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Newton converges from the Tricomi guesses in descending order; store
    // ascending for readability.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-rule integral of `f` over [lo, hi].
fn gl_sum(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[derive(Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
    val: f64,
    err: f64,
}

/// Adaptive 1D integration on [a, b] with an embedded 7/15-point
/// Gauss–Legendre pair. Returns `(value, error_estimate)`; best-effort — the
/// caller decides whether the estimate is acceptable.
///
/// Starts from 16 uniform subintervals rather than one, so a feature narrower
/// than the node spacing of a single panel cannot slip between the embedded
/// rules undetected.
pub fn adaptive_gl(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (n7, w7) = gauss_legendre(7);
    let (n15, w15) = gauss_legendre(15);
    let eval = |lo: f64, hi: f64| -> Interval {
        let coarse = gl_sum(f, lo, hi, &n7, &w7);
        let fine = gl_sum(f, lo, hi, &n15, &w15);
        Interval { lo, hi, val: fine, err: (fine - coarse).abs() }
    };
    const SEED: usize = 16;
    let mut intervals: Vec<Interval> = (0..SEED)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / SEED as f64;
            let hi = if i + 1 == SEED { b } else { a + (b - a) * (i + 1) as f64 / SEED as f64 };
            eval(lo, hi)
        })
        .collect();
    for _ in 0..4000 {
        let val: f64 = intervals.iter().map(|i| i.val).sum();
        let err: f64 = intervals.iter().map(|i| i.err).sum();
        if err <= tol || err <= 1e-16 * val.abs() {
            break;
        }
        // Split the worst interval; first of equals wins, so the refinement
        // path is deterministic.
        let mut worst = 0;
        for (i, iv) in intervals.iter().enumerate() {
            if iv.err > intervals[worst].err {
                worst = i;
            }
        }
        let iv = intervals[worst];
        let mid = 0.5 * (iv.lo + iv.hi);
        if mid <= iv.lo || mid >= iv.hi {
            break; // interval at floating-point resolution
        }
        intervals[worst] = eval(iv.lo, mid);
        intervals.push(eval(mid, iv.hi));
    }
    // Sum in position order, not refinement order.
    intervals.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let val: f64 = intervals.iter().map(|i| i.val).sum();
    let err: f64 = intervals.iter().map(|i| i.err).sum();
    (val, err)
}

/// ∫_{ℝⁿ} f(|x|) dx = |S^{n−1}| ∫₀^∞ f(r) r^{n−1} dr for a radial profile f.
///
/// The half-line is covered by dyadic panels [0,1], [1,2], [2,4], … with
/// adaptive quadrature on each; once past the truncation radius the panel
/// sequence is extrapolated geometrically (exact for power-law decay). Errors
/// if the tail shows no decay or the requested tolerance cannot be met.
pub fn integrate_radial(f: impl Fn(f64) -> f64, n: u32, tol: f64) -> Result<(f64, f64)> {
    integrate_radial_trunc(f, n, tol, 40.0)
}

/// [`integrate_radial`] with an explicit truncation radius: dyadic panels are
/// always laid at least out to `rtrunc` before the tail model takes over.
pub fn integrate_radial_trunc(
    f: impl Fn(f64) -> f64,
    n: u32,
    tol: f64,
    rtrunc: f64,
) -> Result<(f64, f64)> {
    if n == 0 || n > 16 {
        return domain_err(format!("integrate_radial: dimension must be in 1..=16, got {n}"));
    }
    if !(tol > 0.0) || !(rtrunc > 0.0) {
        return domain_err(format!(
            "integrate_radial: tol and truncation radius must be > 0, got {tol}, {rtrunc}"
        ));
    }
    let nf = n as f64;
    let surface = 2.0 * PI.powf(0.5 * nf) / gamma_fn(0.5 * nf)?;
    let g = |r: f64| f(r) * r.powi(n as i32 - 1);
    let (body, est) = half_line_decay(
        &g,
        tol / (surface * 256.0),
        tol / (surface * 4.0),
        rtrunc,
        "integrate_radial",
    )?;
    let value = surface * body;
    let est = surface * est;
    if est > tol {
        return Err(FracqError::Tolerance {
            requested: tol,
            achieved: est,
            context: "integrate_radial".into(),
        });
    }
    Ok((value, est))
}

/// ∫₀^∞ g, by adaptive quadrature on dyadic panels [0,1], [1,2], [2,4], …
/// with geometric extrapolation of the panel tail once past `rtrunc`.
/// `ptol` is the per-panel quadrature tolerance; panels keep extending until
/// the projected tail-model error drops below `tail_target` (slow algebraic
/// decay needs a farther horizon than fast decay). Errors when the panel
/// sequence shows no decay at all.
pub(crate) fn half_line_decay(
    g: &impl Fn(f64) -> f64,
    ptol: f64,
    tail_target: f64,
    rtrunc: f64,
    context: &str,
) -> Result<(f64, f64)> {
    let mut panels: Vec<(f64, f64)> = Vec::new();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut scale = 0.0f64;
    loop {
        let (p, e) = adaptive_gl(g, lo, hi, ptol);
        panels.push((p, e));
        scale = scale.max(p.abs());
        let m = panels.len();
        if hi >= rtrunc && m >= 4 {
            let last = panels[m - 1].0;
            let prev = panels[m - 2].0;
            if last.abs() <= 1e-15 * scale.max(1e-300) {
                break; // effectively compact support
            }
            let q = last / prev;
            if q.abs() < 0.75 {
                // Decaying; stop once the tail model is accurate enough
                // (or the panel budget is nearly spent — the caller then
                // sees the honest oversized estimate).
                if projected_tail_err(&panels) <= tail_target || m >= 78 {
                    break;
                }
            } else if hi > 1e9 {
                return domain_err(format!(
                    "{context}: integrand still not decaying at r = {hi:.3e} \
                     (panel ratio {q:.3})"
                ));
            }
        }
        if panels.len() > 80 {
            return domain_err(format!("{context}: no decay after 80 dyadic panels"));
        }
        lo = hi;
        hi *= 2.0;
    }

    let m = panels.len();
    let body: f64 = panels.iter().map(|p| p.0).sum();
    let body_err: f64 = panels.iter().map(|p| p.1).sum();
    let last = panels[m - 1].0;
    let (tail, tail_err) = if last.abs() <= 1e-15 * scale.max(1e-300) {
        (0.0, 0.0)
    } else {
        let prev = panels[m - 2].0;
        let q = last / prev;
        (last * q / (1.0 - q), projected_tail_err(&panels))
    };

    Ok((body + tail, body_err + tail_err))
}

/// Error model for the geometric tail extrapolation: exact when the panel
/// ratio is constant, so charge the observed ratio drift plus a small floor
/// proportional to the tail itself.
fn projected_tail_err(panels: &[(f64, f64)]) -> f64 {
    let m = panels.len();
    let last = panels[m - 1].0;
    let prev = panels[m - 2].0;
    let prev2 = panels[m - 3].0;
    let q = last / prev;
    let q_old = prev / prev2;
    let dq = (q - q_old).abs();
    last.abs() * (dq / (1.0 - q.abs()).powi(2) + 1e-3 * q.abs() / (1.0 - q.abs()))
}

/// One octree cell during adaptive box integration.
struct BoxCell {
    lo: [f64; 3],
    hi: [f64; 3],
    val: f64,
    err: f64,
    id: u64,
}

fn eval_box_cell(
    f: &(impl Fn(&[f64; 3]) -> f64 + Sync),
    lo: [f64; 3],
    hi: [f64; 3],
    r4: &(Vec<f64>, Vec<f64>),
    r6: &(Vec<f64>, Vec<f64>),
) -> (f64, f64) {
    let tensor = |rule: &(Vec<f64>, Vec<f64>)| -> f64 {
        let (nodes, weights) = rule;
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])];
        let half = [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1]), 0.5 * (hi[2] - lo[2])];
        let mut acc = 0.0;
        for (k, &zk) in nodes.iter().enumerate() {
            for (j, &zj) in nodes.iter().enumerate() {
                for (i, &zi) in nodes.iter().enumerate() {
                    let x = [mid[0] + half[0] * zi, mid[1] + half[1] * zj, mid[2] + half[2] * zk];
                    acc += weights[i] * weights[j] * weights[k] * f(&x);
                }
            }
        }
        acc * half[0] * half[1] * half[2]
    };
    let fine = tensor(r6);
    let coarse = tensor(r4);
    (fine, (fine - coarse).abs())
}

/// Adaptive integral of `f` over the box (octree refinement, embedded-rule
/// error control). The grid resolution of `domain` is irrelevant here; only
/// its geometry is used.
pub fn integrate_box3(
    f: impl Fn(&[f64; 3]) -> f64 + Sync,
    domain: &Box3,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return domain_err(format!("integrate_box3: tol must be > 0, got {tol}"));
    }
    let r4 = gauss_legendre(4);
    let r6 = gauss_legendre(6);
    let lo = [
        domain.center[0] - domain.half_widths[0],
        domain.center[1] - domain.half_widths[1],
        domain.center[2] - domain.half_widths[2],
    ];
    let hi = [
        domain.center[0] + domain.half_widths[0],
        domain.center[1] + domain.half_widths[1],
        domain.center[2] + domain.half_widths[2],
    ];
    // Seed with an 8×8×8 uniform partition so features narrower than the node
    // spacing of a single root rule still register in some cell's estimate.
    // A feature must put nonzero mass on at least one seed-cell node for the
    // refinement loop to notice it, so integrands are assumed to vary on
    // scales no finer than ~1/200 of the box width.
    const SEED: usize = 8;
    let seeds: Vec<([f64; 3], [f64; 3])> = (0..SEED * SEED * SEED)
        .map(|c| {
            let idx = [c % SEED, (c / SEED) % SEED, c / (SEED * SEED)];
            let mut clo = [0.0; 3];
            let mut chi = [0.0; 3];
            for d in 0..3 {
                let w = (hi[d] - lo[d]) / SEED as f64;
                clo[d] = lo[d] + w * idx[d] as f64;
                chi[d] = if idx[d] + 1 == SEED { hi[d] } else { lo[d] + w * (idx[d] + 1) as f64 };
            }
            (clo, chi)
        })
        .collect();
    let seed_vals: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&(clo, chi)| eval_box_cell(&f, clo, chi, &r4, &r6))
        .collect();
    let mut cells: Vec<BoxCell> = seeds
        .iter()
        .zip(seed_vals.iter())
        .enumerate()
        .map(|(i, (&(clo, chi), &(v, e)))| BoxCell { lo: clo, hi: chi, val: v, err: e, id: i as u64 })
        .collect();
    let mut next_id = cells.len() as u64;
    let mut err_sum: f64 = cells.iter().map(|c| c.err).sum();

    const MAX_CELLS: usize = 65536;
    while err_sum > tol && cells.len() < MAX_CELLS {
        let val_sum: f64 = cells.iter().map(|c| c.val).sum();
        if err_sum <= 1e-15 * val_sum.abs() {
            break;
        }
        // Worst cell, ties broken by id: deterministic refinement path.
        let mut worst = 0;
        for (i, c) in cells.iter().enumerate() {
            let w = &cells[worst];
            if c.err > w.err || (c.err == w.err && c.id < w.id) {
                worst = i;
            }
        }
        let cell = cells.swap_remove(worst);
        err_sum -= cell.err;
        let mid = [
            0.5 * (cell.lo[0] + cell.hi[0]),
            0.5 * (cell.lo[1] + cell.hi[1]),
            0.5 * (cell.lo[2] + cell.hi[2]),
        ];
        let mut children = Vec::with_capacity(8);
        for oct in 0..8usize {
            let mut clo = cell.lo;
            let mut chi = mid;
            for d in 0..3 {
                if oct >> d & 1 == 1 {
                    clo[d] = mid[d];
                    chi[d] = cell.hi[d];
                }
            }
            children.push((clo, chi));
        }
        let results: Vec<(f64, f64)> = children
            .par_iter()
            .map(|&(clo, chi)| eval_box_cell(&f, clo, chi, &r4, &r6))
            .collect();
        for (&(clo, chi), &(cval, cerr)) in children.iter().zip(results.iter()) {
            cells.push(BoxCell { lo: clo, hi: chi, val: cval, err: cerr, id: next_id });
            next_id += 1;
            err_sum += cerr;
        }
    }

    // Fixed summation order regardless of heap history.
    cells.sort_by_key(|c| c.id);
    let value: f64 = cells.iter().map(|c| c.val).sum();
    let est: f64 = cells.iter().map(|c| c.err).sum();
    if est > tol && est > 1e-15 * value.abs() {
        return Err(FracqError::Tolerance {
            requested: tol,
            achieved: est,
            context: "integrate_box3".into(),
        });
    }
    Ok((value, est))
}

/// Integral of `f` over the ball of the given radius around `center` in ℝ⁴,
/// by a spherical product rule (Gauss–Legendre in radius and polar cosine,
/// Gauss–Chebyshev for the S³ colatitude weight sin²ψ, trapezoid in the
/// azimuth). Exact for polynomials of degree ≤ 4 at the base resolution;
/// resolution doubles until the change falls below `tol`.
pub fn integrate_ball4(
    f: impl Fn(&[f64; 4]) -> f64 + Sync,
    center: [f64; 4],
    radius: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(radius > 0.0) || !(tol > 0.0) {
        return domain_err(format!(
            "integrate_ball4: radius and tol must be > 0, got {radius}, {tol}"
        ));
    }
    let eval = |n: usize| -> f64 {
        let (rn, rw) = gauss_legendre(n);
        let (tn, tw) = gauss_legendre(n);
        // Gauss–Chebyshev (second kind) for ∫ h(cos ψ) sin²ψ dψ.
        let np1 = (n + 1) as f64;
        let psi: Vec<(f64, f64)> = (1..=n)
            .map(|k| {
                let a = k as f64 * PI / np1;
                (a.cos(), PI / np1 * a.sin() * a.sin())
            })
            .collect();
        let phi: Vec<f64> = (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect();
        let wphi = 2.0 * PI / n as f64;

        let rows: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let ir = idx / n;
                let ip = idx % n;
                let rho = 0.5 * radius * (rn[ir] + 1.0);
                let wr = 0.5 * radius * rw[ir] * rho.powi(3);
                let (cpsi, wpsi) = psi[ip];
                let spsi = (1.0 - cpsi * cpsi).max(0.0).sqrt();
                let mut acc = 0.0;
                for (it, &ct) in tn.iter().enumerate() {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for &ph in &phi {
                        let x = [
                            center[0] + rho * spsi * st * ph.cos(),
                            center[1] + rho * spsi * st * ph.sin(),
                            center[2] + rho * spsi * ct,
                            center[3] + rho * cpsi,
                        ];
                        acc += tw[it] * wphi * f(&x);
                    }
                }
                wr * wpsi * acc
            })
            .collect();
        rows.iter().sum()
    };

    let mut prev = eval(8);
    let mut err = f64::INFINITY;
    for n in [16usize, 32] {
        let cur = eval(n);
        err = (cur - prev).abs();
        if err <= tol {
            return Ok((cur, err));
        }
        prev = cur;
    }
    Err(FracqError::Tolerance { requested: tol, achieved: err, context: "integrate_ball4".into() })
}

/// Antiderivative ∫ ln(τ² + s²) dτ, continuous in both arguments including the
/// s = 0 limit.
fn log_antideriv(t: f64, s: f64) -> f64 {
    let lead = if t == 0.0 { 0.0 } else { t * (t * t + s * s).ln() };
    lead - 2.0 * t + 2.0 * s * f64::atan2(t, s)
}

/// Average over the cell ∏ᵢ [−hᵢ/2, hᵢ/2] of z ↦ ln 1/√(|d−z|² + y²): the
/// log kernel at height y, target offset d from the cell center.
///
/// Far cells (distance > 3.5·max hᵢ) use the midpoint value with a
/// second-order curvature correction; near and singular cells integrate one
/// axis exactly and the remaining two by panel quadrature, which keeps full
/// accuracy even when the target sits inside the cell.
pub(crate) fn log_kernel_cell_avg(d: [f64; 3], y: f64, h: [f64; 3]) -> f64 {
    let hmax = h[0].max(h[1]).max(h[2]);
    let q = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + y * y;
    if q > (3.5 * hmax) * (3.5 * hmax) {
        let mut g = -0.5 * q.ln();
        for i in 0..3 {
            let gii = -1.0 / q + 2.0 * d[i] * d[i] / (q * q);
            g += h[i] * h[i] / 24.0 * gii;
        }
        return g;
    }
    // ∫ over the first axis in closed form, then 4×4 panels of 12-point GL
    // over the transverse cell face.
    let t_lo = d[0] - 0.5 * h[0];
    let t_hi = d[0] + 0.5 * h[0];
    let (gn, gw) = gauss_legendre(12);
    const NSUB: usize = 4;
    let mut acc = 0.0;
    for p2 in 0..NSUB {
        let a2 = -0.5 * h[1] + h[1] * p2 as f64 / NSUB as f64;
        let b2 = a2 + h[1] / NSUB as f64;
        for p3 in 0..NSUB {
            let a3 = -0.5 * h[2] + h[2] * p3 as f64 / NSUB as f64;
            let b3 = a3 + h[2] / NSUB as f64;
            let m2 = 0.5 * (a2 + b2);
            let s2 = 0.5 * (b2 - a2);
            let m3 = 0.5 * (a3 + b3);
            let s3 = 0.5 * (b3 - a3);
            let mut panel = 0.0;
            for (i2, &z2) in gn.iter().enumerate() {
                let u2 = m2 + s2 * z2;
                let dy2 = d[1] - u2;
                for (i3, &z3) in gn.iter().enumerate() {
                    let u3 = m3 + s3 * z3;
                    let dz3 = d[2] - u3;
                    let s = (dy2 * dy2 + dz3 * dz3 + y * y).sqrt();
                    panel += gw[i2] * gw[i3] * (log_antideriv(t_hi, s) - log_antideriv(t_lo, s));
                }
            }
            acc += panel * s2 * s3;
        }
    }
    -0.5 * acc / (h[0] * h[1] * h[2])
}

/// Check that a density has an integrable logarithmic potential, and return
/// its power-decay exponent when a tail correction applies.
fn potential_density_check(w: &GridField3, context: &str) -> Result<Option<f64>> {
    match w.decay {
        DecayModel::CompactSupport => Ok(None),
        DecayModel::PowerDecay(p) if p > 3.0 => Ok(Some(p)),
        DecayModel::PowerDecay(p) => domain_err(format!(
            "{context}: density with power decay {p} ≤ 3 has no convergent log potential"
        )),
        DecayModel::LogGrowth => domain_err(format!(
            "{context}: density with logarithmic growth has no convergent log potential"
        )),
    }
}

/// Equal-volume radius of the box: where the tail model takes over from the
/// grid sum.
fn eqvol_radius(b: &Box3) -> f64 {
    let vol = 8.0 * b.half_widths[0] * b.half_widths[1] * b.half_widths[2];
    (3.0 * vol / (4.0 * PI)).powf(1.0 / 3.0)
}

/// Logarithmic potential of the density `w` (supported on the boundary
/// hyperplane) at a point of ℝ⁴ = {(x₁, x₂, x₃, y)}:
///
///   V(x) = (1/2π²) ∫_{ℝ³} log(1/|x − (z, 0)|) w(z) dz.
///
/// The grid sum treats w as piecewise constant per cell and integrates the
/// kernel exactly over each cell, so the point may sit anywhere — including
/// on the grid itself. For power-decay densities a tail correction from the
/// outer-shell amplitude is added and charged to the error estimate.
pub fn log_potential(w: &GridField3, x: [f64; 4]) -> Result<(f64, f64)> {
    let pdecay = potential_density_check(w, "log_potential")?;
    let b = &w.box3;
    let h = b.cell_sizes();
    let vol = b.cell_volume();
    let pref = 1.0 / (2.0 * PI * PI);
    let [nx, ny, nz] = b.resolution;
    let vals = w.values();

    // One slab per x₃ index, summed in slab order: deterministic under rayon.
    let slabs: Vec<(f64, f64)> = (0..nz)
        .into_par_iter()
        .map(|k| {
            let zk = b.coord(2, k);
            let mut acc = 0.0;
            let mut amax = 0.0f64;
            for j in 0..ny {
                let zj = b.coord(1, j);
                for i in 0..nx {
                    let zi = b.coord(0, i);
                    let wv = vals[b.idx(i, j, k)];
                    let avg =
                        log_kernel_cell_avg([x[0] - zi, x[1] - zj, x[2] - zk], x[3], h);
                    acc += wv * avg;
                    amax = amax.max(avg.abs());
                }
            }
            (acc, amax)
        })
        .collect();
    let main: f64 = slabs.iter().map(|s| s.0).sum::<f64>() * vol * pref;
    let avg_bound = slabs.iter().fold(0.0f64, |m, s| m.max(s.1));

    // Midpoint error in the density factor: second differences of w against a
    // bound on the kernel magnitude.
    let mut d2 = 0.0;
    for k in 1..nz.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let c = vals[b.idx(i, j, k)];
                d2 += (vals[b.idx(i + 1, j, k)] - 2.0 * c + vals[b.idx(i - 1, j, k)]).abs()
                    + (vals[b.idx(i, j + 1, k)] - 2.0 * c + vals[b.idx(i, j - 1, k)]).abs()
                    + (vals[b.idx(i, j, k + 1)] - 2.0 * c + vals[b.idx(i, j, k - 1)]).abs();
            }
        }
    }
    let mut est = pref * vol * avg_bound * d2 / 24.0;

    // Power-decay tail: model w ≈ S·r^{−p} outside the box.
    let mut tail = 0.0;
    if let Some(p) = pdecay {
        let amp = w.outer_shell_power_amp(p);
        let r0 = eqvol_radius(b).max(1.5);
        // ∫_R^∞ r^{2−p}(−ln r) dr, closed form for p > 3.
        let integral = -r0.powf(3.0 - p) * (r0.ln() / (p - 3.0) + 1.0 / (p - 3.0).powi(2));
        tail = pref * 4.0 * PI * amp * integral;
        est += tail.abs();
    }

    Ok((main + tail, est))
}

/// Logarithmic potential of `w` on its own grid, evaluated on the boundary
/// hyperplane y = 0, via FFT convolution with the cell-averaged kernel.
/// The density is taken as supported on the grid (compact support); declared
/// power decay faster than cubic is tolerated but its tail is ignored.
pub fn log_potential_grid(w: &GridField3) -> Result<GridField3> {
    potential_density_check(w, "log_potential_grid")?;
    let b = &w.box3;
    let h = b.cell_sizes();
    let vol = b.cell_volume();
    let pref = vol / (2.0 * PI * PI);
    let [nx, ny, nz] = b.resolution;
    let (px, py, pz) = (2 * nx, 2 * ny, 2 * nz);
    let pidx = |i: usize, j: usize, k: usize| i + px * (j + py * k);

    use rustfft::num_complex::Complex;
    let mut dens = vec![Complex::new(0.0, 0.0); px * py * pz];
    let vals = w.values();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                dens[pidx(i, j, k)].re = vals[b.idx(i, j, k)];
            }
        }
    }

    // Kernel table over signed cell offsets, wrapped into the padded box.
    let signed = |m: usize, n: usize| -> f64 {
        if m <= n {
            m as f64
        } else {
            m as f64 - 2.0 * n as f64
        }
    };
    let mut kern = vec![Complex::new(0.0, 0.0); px * py * pz];
    kern.par_chunks_mut(px * py).enumerate().for_each(|(mk, slab)| {
        let sk = signed(mk, nz) * h[2];
        for mj in 0..py {
            let sj = signed(mj, ny) * h[1];
            for mi in 0..px {
                let si = signed(mi, nx) * h[0];
                slab[mi + px * mj].re = log_kernel_cell_avg([si, sj, sk], 0.0, h);
            }
        }
    });

    crate::fftutil::fft3(&mut dens, [px, py, pz], false);
    crate::fftutil::fft3(&mut kern, [px, py, pz], false);
    dens.par_iter_mut().zip(kern.par_iter()).for_each(|(a, b)| *a *= *b);
    drop(kern);
    crate::fftutil::fft3(&mut dens, [px, py, pz], true);

    let mut out = vec![0.0f64; nx * ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                out[b.idx(i, j, k)] = pref * dens[pidx(i, j, k)].re;
            }
        }
    }
    GridField3::from_values(b.clone(), out, DecayModel::LogGrowth)
}

/// Weighted integrability functional ∫_{ℝ³} |u(x)| / (1 + |x|^s) dx:
/// grid midpoint sum plus an analytic tail from the decay model. Errors when
/// the tail is non-integrable for the given weight exponent.
pub fn weighted_tail_norm(u: &GridField3, s: f64) -> Result<(f64, f64)> {
    if !(s >= 0.0) || !s.is_finite() {
        return domain_err(format!("weighted_tail_norm: weight exponent must be ≥ 0, got {s}"));
    }
    let b = &u.box3;
    let [nx, ny, nz] = b.resolution;
    let vol = b.cell_volume();
    let vals = u.values();

    // Sampled integrand, kept for the curvature-based error estimate.
    let mut g = vec![0.0f64; vals.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let x = b.point(i, j, k);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                g[b.idx(i, j, k)] = vals[b.idx(i, j, k)].abs() / (1.0 + r.powf(s));
            }
        }
    }
    let grid_part: f64 = g.iter().sum::<f64>() * vol;
    let mut d2 = 0.0;
    for k in 1..nz.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let c = g[b.idx(i, j, k)];
                d2 += (g[b.idx(i + 1, j, k)] - 2.0 * c + g[b.idx(i - 1, j, k)]).abs()
                    + (g[b.idx(i, j + 1, k)] - 2.0 * c + g[b.idx(i, j - 1, k)]).abs()
                    + (g[b.idx(i, j, k + 1)] - 2.0 * c + g[b.idx(i, j, k - 1)]).abs();
            }
        }
    }
    // Midpoint error: the sampled second differences already carry the h² scale.
    let mut est = vol * d2 / 24.0;
    let r0 = eqvol_radius(b).max(1.0);

    let tail = match u.decay {
        DecayModel::CompactSupport => 0.0,
        DecayModel::PowerDecay(p) => {
            if p + s <= 3.0 + 1e-9 {
                return domain_err(format!(
                    "weighted_tail_norm: tail ~ r^({:.3}) is not integrable over ℝ³ \
                     (need decay p + weight s > 3, got p = {p}, s = {s})",
                    2.0 - p - s
                ));
            }
            let amp = u.outer_shell_mean(|x| {
                (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().powf(p)
            });
            // ∫_{r0}^∞ r^{2−p}/(1+r^s) dr via r = r0/t.
            let integrand = |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let r = r0 / t;
                r.powf(2.0 - p) / (1.0 + r.powf(s)) * r0 / (t * t)
            };
            let (it, _) = adaptive_gl(&integrand, 0.0, 1.0, 1e-12);
            4.0 * PI * amp * it
        }
        DecayModel::LogGrowth => {
            if s <= 3.0 + 1e-9 {
                return domain_err(format!(
                    "weighted_tail_norm: log-growth tail needs weight s > 3, got s = {s}"
                ));
            }
            // Least-squares fit |u| ≈ A·ln r + B over the outermost shell.
            let mut sl = 0.0;
            let mut sv = 0.0;
            let mut sll = 0.0;
            let mut slv = 0.0;
            let mut cnt = 0.0;
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1
                        {
                            let x = b.point(i, j, k);
                            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
                            let l = r.ln();
                            let v = vals[b.idx(i, j, k)].abs();
                            sl += l;
                            sv += v;
                            sll += l * l;
                            slv += l * v;
                            cnt += 1.0;
                        }
                    }
                }
            }
            let det = cnt * sll - sl * sl;
            let (a, c) = if det.abs() > 1e-12 {
                ((cnt * slv - sl * sv) / det, (sv * sll - sl * slv) / det)
            } else {
                (0.0, sv / cnt.max(1.0))
            };
            let integrand = |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let r = r0 / t;
                (a * r.ln() + c).abs() * r * r / (1.0 + r.powf(s)) * r0 / (t * t)
            };
            let (it, _) = adaptive_gl(&integrand, 0.0, 1.0, 1e-12);
            4.0 * PI * it
        }
    };
    est += 0.75 * tail.abs();
    Ok((grid_part + tail, est))
}
