//! Concentration analysis of solution sequences: local curvature mass,
//! detection of the concentration set, the potential/harmonic decomposition
//! of a solution, mean-value diagnostics for the harmonic part, and the
//! integrability dichotomy probe for exponentials of potentials.

use crate::extension::{DirichletExtension, HalfSpaceEval, NeumannPotential};
use crate::grid::{Box3, DecayModel, GridField3, Profile};
use crate::liouville::{bubble_total_curvature, BubbleSpec};
use crate::poly::Poly4;
use crate::quad::{adaptive_gl, gauss_legendre, integrate_ball4, log_potential_grid};
use crate::{domain_err, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Fraction of the concentration threshold that still counts as "above";
/// masses between margin² and margin times the threshold are "marginal".
const DETECTION_MARGIN: f64 = 0.95;

/// Refinement ratio above which the dichotomy probe declares divergence: a
/// convergent integral's midpoint sums settle (ratio → 1), a divergent one
/// keeps growing as the grid resolves more of the singularity.
const DIVERGENCE_TREND_CUT: f64 = 1.15;

/// ∫_{B_radius(center)} |Q| e^{3u} dx.
///
/// When both fields carry profiles radially aligned with the ball (a constant
/// Q aligns with every center) the integral reduces to an adaptive 1D radial
/// quadrature and is exact to quadrature tolerance. Otherwise the angular
/// directions are resolved by a product rule on spheres and only the radial
/// direction adapts; grid-backed fields are then read through their
/// interpolant, so the ball should stay inside the sampled box.
pub fn local_mass(
    q: &GridField3,
    u: &GridField3,
    center: [f64; 3],
    radius: f64,
) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return domain_err(format!("local_mass: radius must be > 0 and finite, got {radius}"));
    }
    if center.iter().any(|c| !c.is_finite()) {
        return domain_err("local_mass: center must be finite".to_string());
    }

    if let (Some(pu), Some(qr)) = (&u.profile, radial_factor(q, &center)) {
        let cu = pu.center();
        let aligned = (0..3).all(|d| (cu[d] - center[d]).abs() <= 1e-12 * (1.0 + radius));
        if aligned {
            let g = |rho: f64| qr(rho).abs() * (3.0 * pu.eval_radial(rho)).exp() * rho * rho;
            let (val, _err) = adaptive_gl(&g, 0.0, radius, 1e-10);
            return Ok(4.0 * PI * val);
        }
    }

    // General path: Gauss–Legendre in cos θ, trapezoid in φ (periodic, so
    // spectrally accurate), adaptive in the radius.
    let (tn, tw) = gauss_legendre(24);
    let nphi = 48usize;
    let sphere_mean = |rho: f64| -> f64 {
        let mut acc = 0.0;
        for (ct, wt) in tn.iter().zip(tw.iter()) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for m in 0..nphi {
                let phi = 2.0 * PI * m as f64 / nphi as f64;
                let x = [
                    center[0] + rho * st * phi.cos(),
                    center[1] + rho * st * phi.sin(),
                    center[2] + rho * ct,
                ];
                acc += wt * q.eval(&x).abs() * (3.0 * u.eval(&x)).exp();
            }
        }
        acc / (2.0 * nphi as f64)
    };
    let g = |rho: f64| rho * rho * sphere_mean(rho);
    let (val, _err) = adaptive_gl(&g, 0.0, radius, 1e-9);
    Ok(4.0 * PI * val)
}

/// Radial restriction of Q about `center` when one exists: a constant field
/// restricts everywhere, any other profile only about its own center.
fn radial_factor<'a>(
    q: &'a GridField3,
    center: &[f64; 3],
) -> Option<Box<dyn Fn(f64) -> f64 + 'a>> {
    let p = q.profile.as_ref()?;
    if let Profile::RadialQuadratic { c0, c2, .. } = p {
        if *c2 == 0.0 {
            let c = *c0;
            return Some(Box::new(move |_| c));
        }
    }
    let pc = p.center();
    let aligned = (0..3).all(|d| (pc[d] - center[d]).abs() <= 1e-12);
    if aligned {
        Some(Box::new(move |rho| p.eval_radial(rho)))
    } else {
        None
    }
}

/// Verdict for one candidate point of the concentration-set test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Above,
    Marginal,
    Below,
}

/// Output of [`detect_s1`].
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub candidates: Vec<[f64; 3]>,
    pub radii: Vec<f64>,
    /// masses[ci][ri]: for candidate ci and radius ri, the minimum of the
    /// local mass over the tail of the sequence (a lim-inf proxy).
    pub masses: Vec<Vec<f64>>,
    /// Per candidate: the minimum of masses over all radii ("for every r").
    pub measures: Vec<f64>,
    /// Half the total curvature of the model solution, computed (not
    /// hard-coded) from the closed form.
    pub threshold: f64,
    pub verdicts: Vec<Verdict>,
    /// Harmonic-part integrals near each candidate; left empty here, pipelines
    /// that run the decomposition fill it in.
    pub beta_values: Vec<f64>,
}

impl ConcentrationReport {
    /// Flat CSV of the mass table (one row per candidate × radius).
    pub fn masses_csv(&self) -> String {
        let mut out = String::from("candidate_x,candidate_y,candidate_z,radius,mass\n");
        for (ci, c) in self.candidates.iter().enumerate() {
            for (ri, r) in self.radii.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{:.12e}\n",
                    c[0], c[1], c[2], r, self.masses[ci][ri]
                ));
            }
        }
        out
    }
}

/// Test candidate points for membership in the curvature concentration set:
/// a point belongs when every ball around it retains at least half the model
/// solution's total curvature along the (tail of the) sequence.
pub fn detect_s1(
    q: &GridField3,
    family: &[GridField3],
    candidates: &[[f64; 3]],
    radii: &[f64],
) -> Result<ConcentrationReport> {
    if family.is_empty() {
        return domain_err("detect_s1: the solution sequence is empty".to_string());
    }
    if candidates.is_empty() {
        return domain_err("detect_s1: no candidate points given".to_string());
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return domain_err("detect_s1: radii must be a nonempty list of positive numbers".to_string());
    }
    let spec = BubbleSpec::new([0.0; 3], 1.0)?;
    let threshold = bubble_total_curvature(&spec, 2.0)? / 2.0;

    // lim inf proxy: the later half of the sequence.
    let tail_start = family.len() - family.len().div_ceil(2);
    let tail = &family[tail_start..];

    let mut masses = Vec::with_capacity(candidates.len());
    let mut measures = Vec::with_capacity(candidates.len());
    let mut verdicts = Vec::with_capacity(candidates.len());
    for c in candidates {
        let mut row = Vec::with_capacity(radii.len());
        for &r in radii {
            let m = tail
                .iter()
                .map(|u| local_mass(q, u, *c, r))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            row.push(m);
        }
        let measure = row.iter().copied().fold(f64::INFINITY, f64::min);
        let verdict = if measure >= DETECTION_MARGIN * threshold {
            Verdict::Above
        } else if measure >= DETECTION_MARGIN * DETECTION_MARGIN * threshold {
            Verdict::Marginal
        } else {
            Verdict::Below
        };
        masses.push(row);
        measures.push(measure);
        verdicts.push(verdict);
    }
    Ok(ConcentrationReport {
        candidates: candidates.to_vec(),
        radii: radii.to_vec(),
        masses,
        measures,
        threshold,
        verdicts,
        beta_values: Vec::new(),
    })
}

/// The splitting u = v + h on the boundary grid: v is the log potential of
/// the curvature density w = Q e^{3u}, and h = u − v extends to a function
/// that the potential part cannot see (biharmonic in the interior).
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Curvature density Q e^{3u}.
    pub w: GridField3,
    /// Log potential of w on the boundary grid.
    pub v_boundary: GridField3,
    /// u − v on the boundary grid.
    pub h_boundary: GridField3,
}

pub fn decompose(u: &GridField3, q: &GridField3) -> Result<Decomposition> {
    if u.box3 != q.box3 {
        return domain_err("decompose: u and Q must share one grid".to_string());
    }
    // Decay of w = Q e^{3u}: a solution normalized to the model total
    // curvature satisfies u ~ −2 log|x|, so e^{3u} ~ |x|⁻⁶; with compactly
    // supported Q the product is compactly supported, and with decaying u
    // (e^{3u} → 1) the product inherits Q's decay.
    let wdecay = match (&q.decay, &u.decay) {
        (DecayModel::CompactSupport, _) => DecayModel::CompactSupport,
        (_, DecayModel::LogGrowth) => DecayModel::PowerDecay(6.0),
        (DecayModel::PowerDecay(pq), _) => DecayModel::PowerDecay(*pq),
        (DecayModel::LogGrowth, _) => {
            return domain_err("decompose: Q must not grow at infinity".to_string())
        }
    };
    let wvals: Vec<f64> = q
        .values()
        .iter()
        .zip(u.values().iter())
        .map(|(qq, uu)| qq * (3.0 * uu).exp())
        .collect();
    let w = GridField3::from_values(u.box3.clone(), wvals, wdecay)?;
    let v_boundary = log_potential_grid(&w)?;
    let hvals: Vec<f64> = u
        .values()
        .iter()
        .zip(v_boundary.values().iter())
        .map(|(a, b)| a - b)
        .collect();
    // h is bounded on solution families (the log growths cancel).
    let h_boundary = GridField3::from_values(u.box3.clone(), hvals, DecayModel::PowerDecay(0.0))?;
    Ok(Decomposition { w, v_boundary, h_boundary })
}

impl Decomposition {
    /// Half-space evaluator for the potential part.
    pub fn potential_part(&self) -> Result<NeumannPotential<'_>> {
        NeumannPotential::new(&self.w)
    }

    /// Half-space evaluator for the remainder, extended from its boundary
    /// values.
    pub fn harmonic_part(&self) -> Result<DirichletExtension<'_>> {
        DirichletExtension::new(&self.h_boundary)
    }
}

/// ∫_{B⁺_{r0}(x₀,0)} |H| dX over the upper half-ball, computed by even
/// reflection across y = 0 (so the full 4-ball quadrature applies).
pub fn beta_k(
    h: &impl HalfSpaceEval,
    center: [f64; 3],
    r0: f64,
    tol: f64,
) -> Result<f64> {
    if !(r0 > 0.0) || !(tol > 0.0) {
        return domain_err(format!("beta_k: need r0 > 0 and tol > 0, got {r0}, {tol}"));
    }
    let c4 = [center[0], center[1], center[2], 0.0];
    // A failed evaluation must surface as a domain error, not poison the
    // quadrature (NaN would stall its refinement loop), so record it in a
    // flag and feed the rule a neutral value.
    let failed = std::sync::atomic::AtomicBool::new(false);
    let res = integrate_ball4(
        |x4| match h.eval(&[x4[0], x4[1], x4[2]], x4[3].abs()) {
            Ok(v) => v.abs(),
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                0.0
            }
        },
        c4,
        r0,
        tol,
    );
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return domain_err("beta_k: evaluator failed inside the ball".to_string());
    }
    let (val, _err) = res?;
    if !val.is_finite() {
        return domain_err("beta_k: evaluator returned non-finite values".to_string());
    }
    Ok(0.5 * val)
}

/// Result of the solid mean-value identity check.
#[derive(Debug, Clone, Serialize)]
pub struct PizzettiCheck {
    pub center: [f64; 4],
    pub radius: f64,
    /// Quadrature mean of h over the 4-ball.
    pub mean_value: f64,
    /// h(center) + (r²/12)·Δh(center); exact for biharmonic h.
    pub predicted: f64,
    pub residual: f64,
    pub quad_error: f64,
}

/// Compare the solid mean of a quartic over a 4-ball against the two-term
/// mean-value expansion h(c) + (r²/12)Δh(c). The residual vanishes exactly
/// when Δ²h = 0; otherwise it equals the (r⁴) Pizzetti term.
pub fn pizzetti_check(h: &Poly4, center: [f64; 4], r: f64) -> Result<PizzettiCheck> {
    if !(r > 0.0) || !r.is_finite() {
        return domain_err(format!("pizzetti_check: radius must be > 0, got {r}"));
    }
    let (integral, err) = integrate_ball4(|x| h.eval(x), center, r, 1e-12)?;
    let volume = PI * PI * r.powi(4) / 2.0;
    let mean_value = integral / volume;
    let quad_error = err / volume;
    let predicted = h.eval(&center) + r * r / 12.0 * h.laplacian().eval(&center);
    Ok(PizzettiCheck {
        center,
        radius: r,
        mean_value,
        predicted,
        residual: mean_value - predicted,
        quad_error,
    })
}

/// Output of the integrability dichotomy probe.
#[derive(Debug, Clone, Serialize)]
pub struct BrezisMerleProbe {
    pub p: f64,
    /// Mass ∫ w of the density (midpoint sum on its grid).
    pub alpha: f64,
    /// ∫_K e^{3pV} at the density's native resolution.
    pub integral_coarse: f64,
    /// Same at doubled resolution.
    pub integral_fine: f64,
    /// fine / coarse: ≈ 1 for an integrable exponential, growing without
    /// bound when the local singularity is non-integrable.
    pub trend: f64,
    pub divergent: bool,
    pub resolution_coarse: [usize; 3],
    pub resolution_fine: [usize; 3],
}

/// Probe whether e^{3pV} is integrable on the region K, where V is the log
/// potential of the density w. Integrability flips when p·(local mass of w)
/// crosses the dichotomy constant; the probe detects the flip by comparing
/// midpoint sums at two resolutions.
pub fn brezis_merle_probe(w: &GridField3, p: f64, region: &Box3) -> Result<BrezisMerleProbe> {
    if !(p > 0.0) || !p.is_finite() {
        return domain_err(format!("brezis_merle_probe: exponent must be > 0, got {p}"));
    }
    let alpha: f64 = w.values().iter().sum::<f64>() * w.box3.cell_volume();
    if !(alpha > 0.0) {
        return domain_err(format!(
            "brezis_merle_probe: density mass must be positive, got {alpha:.3e}"
        ));
    }

    let v_coarse = log_potential_grid(w)?;
    let integral_coarse = region_exp_sum(&v_coarse, p, region)?;

    let b = &w.box3;
    let fine_res = [b.resolution[0] * 2, b.resolution[1] * 2, b.resolution[2] * 2];
    let fine_box = Box3::new(b.center, b.half_widths, fine_res)?;
    let w_fine = match &w.profile {
        // A grid-tied mollifier keeps its diameter in cells, not in length:
        // refinement sharpens the approximate point mass, which is exactly
        // the regime the dichotomy describes.
        Some(Profile::RadialBump { grid_tied: true, center, mass, .. }) => {
            let prof = Profile::mollified_point_mass(&fine_box, *center, *mass)?;
            GridField3::from_profile(fine_box.clone(), prof)?
        }
        Some(prof) => GridField3::from_profile(fine_box.clone(), prof.clone())?,
        None => {
            let decay = w.decay;
            GridField3::from_fn(fine_box.clone(), |x| w.eval(x), decay)?
        }
    };
    let v_fine = log_potential_grid(&w_fine)?;
    let integral_fine = region_exp_sum(&v_fine, p, region)?;

    let trend = integral_fine / integral_coarse;
    Ok(BrezisMerleProbe {
        p,
        alpha,
        integral_coarse,
        integral_fine,
        trend,
        divergent: trend >= DIVERGENCE_TREND_CUT,
        resolution_coarse: b.resolution,
        resolution_fine: fine_res,
    })
}

/// Midpoint sum of e^{3pV} over the cells of V's grid whose centers lie in
/// the region.
fn region_exp_sum(v: &GridField3, p: f64, region: &Box3) -> Result<f64> {
    let b = &v.box3;
    let vol = b.cell_volume();
    let [nx, ny, nz] = b.resolution;
    let mut acc = 0.0;
    let mut hit = false;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let x = b.point(i, j, k);
                if region.contains(&x) {
                    hit = true;
                    acc += (3.0 * p * v.values()[b.idx(i, j, k)]).exp() * vol;
                }
            }
        }
    }
    if !hit {
        return domain_err("brezis_merle_probe: region contains no grid cells".to_string());
    }
    Ok(acc)
}
