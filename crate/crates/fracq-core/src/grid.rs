//! Uniform box grids in ℝ³ and sampled scalar fields, with optional analytic
//! radial profiles attached to a field.
//!
//! Several operators in this crate (half-space extension, boundary traces,
//! concentration masses) need far more accuracy than any interpolant of grid
//! samples can deliver, because the third-order trace amplifies interpolation
//! bias by |ξ|³. A field constructed from a known radial profile therefore
//! carries that profile along, and the quadrature paths use it exactly; fields
//! without a profile fall back to cell-midpoint evaluation at second order.

use crate::quad::adaptive_gl;
use crate::{domain_err, FracqError, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::sync::OnceLock;

/// Axis-aligned box in ℝ³ with a cell-centered grid.
///
/// Axis `d` holds `resolution[d]` cells of size `2·half_widths[d]/resolution[d]`;
/// sample points sit at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub center: [f64; 3],
    pub half_widths: [f64; 3],
    pub resolution: [usize; 3],
}

impl Box3 {
    pub fn new(center: [f64; 3], half_widths: [f64; 3], resolution: [usize; 3]) -> Result<Self> {
        for d in 0..3 {
            if !(half_widths[d] > 0.0) || !half_widths[d].is_finite() {
                return domain_err(format!("Box3: half_widths must be positive, got {half_widths:?}"));
            }
            if resolution[d] < 2 {
                return domain_err(format!("Box3: resolution must be ≥ 2, got {resolution:?}"));
            }
        }
        Ok(Self { center, half_widths, resolution })
    }

    /// Cube with equal half-widths and equal per-axis resolution.
    pub fn cube(center: [f64; 3], half_width: f64, resolution: usize) -> Result<Self> {
        Self::new(center, [half_width; 3], [resolution; 3])
    }

    pub fn cell_sizes(&self) -> [f64; 3] {
        [
            2.0 * self.half_widths[0] / self.resolution[0] as f64,
            2.0 * self.half_widths[1] / self.resolution[1] as f64,
            2.0 * self.half_widths[2] / self.resolution[2] as f64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.cell_sizes();
        h[0] * h[1] * h[2]
    }

    pub fn num_cells(&self) -> usize {
        self.resolution[0] * self.resolution[1] * self.resolution[2]
    }

    /// Coordinate of the cell center with index `i` along axis `d`.
    pub fn coord(&self, d: usize, i: usize) -> f64 {
        let h = 2.0 * self.half_widths[d] / self.resolution[d] as f64;
        self.center[d] - self.half_widths[d] + (i as f64 + 0.5) * h
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        (0..3).all(|d| (x[d] - self.center[d]).abs() <= self.half_widths[d])
    }

    /// Flat index, x₁-fastest.
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }
}

/// Decay model of a field outside its grid, used for tail corrections and to
/// decide FFT padding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayModel {
    /// Identically zero outside the box.
    CompactSupport,
    /// |u| ~ A·|x|^{−p}; negative p models polynomial growth.
    PowerDecay(f64),
    /// |u| ~ A·log|x| + B (signed), the natural model for log potentials.
    LogGrowth,
}

/// Normalization constant of the C^∞ bump shape exp(1 − 1/(1−t²)):
/// ∫₀¹ t² exp(1 − 1/(1−t²)) dt, computed once by quadrature.
pub(crate) fn bump_shape_moment() -> f64 {
    static MOMENT: OnceLock<f64> = OnceLock::new();
    *MOMENT.get_or_init(|| {
        adaptive_gl(
            &|t: f64| {
                let s = 1.0 - t * t;
                if s <= 0.0 {
                    0.0
                } else {
                    t * t * (1.0 - 1.0 / s).exp()
                }
            },
            0.0,
            1.0,
            1e-14,
        )
        .0
    })
}

/// Analytic radial profile a field may carry. All profiles are radially
/// symmetric about their center, which is what the exact extension and trace
/// quadrature paths rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// u(x) = log(2λ / (1 + λ²|x−c|²)), the finite-volume model solution of
    /// (−Δ)^{3/2}u = 2e^{3u}.
    Bubble { center: [f64; 3], lambda: f64 },
    /// u(x) = amp · e^{−|x−c|²/(2σ²)}.
    Gaussian { center: [f64; 3], sigma: f64, amp: f64 },
    /// Smooth compactly supported bump amp·exp(1 − 1/(1−(ρ/r)²)) carrying total
    /// mass `mass`. `grid_tied` marks the radius as a grid artifact (a mollified
    /// point mass): refinement-aware consumers shrink it with the grid.
    RadialBump {
        center: [f64; 3],
        radius: f64,
        mass: f64,
        amp: f64,
        grid_tied: bool,
    },
    /// u(x) = −(1/4π²) log(δ² + |x−c|²), a mollified fundamental solution with
    /// unit-mass image under (−Δ)^{3/2}.
    MollifiedLog { center: [f64; 3], delta: f64 },
    /// u(x) = c₀ + c₂|x−c|², for polynomial boundary data.
    RadialQuadratic { center: [f64; 3], c0: f64, c2: f64 },
}

impl Profile {
    /// Mollified point mass: bump of the given total mass whose radius is tied
    /// to the grid (4 cells, i.e. diameter 8 cells) of `box3`.
    pub fn mollified_point_mass(box3: &Box3, center: [f64; 3], mass: f64) -> Result<Self> {
        let h = box3.cell_sizes();
        let hmax = h[0].max(h[1]).max(h[2]);
        Self::radial_bump(center, 4.0 * hmax, mass, true)
    }

    /// Bump of prescribed total mass and radius.
    pub fn radial_bump(center: [f64; 3], radius: f64, mass: f64, grid_tied: bool) -> Result<Self> {
        if !(radius > 0.0) {
            return domain_err(format!("radial_bump: radius must be > 0, got {radius}"));
        }
        let amp = mass / (4.0 * std::f64::consts::PI * radius.powi(3) * bump_shape_moment());
        Ok(Profile::RadialBump { center, radius, mass, amp, grid_tied })
    }

    pub fn center(&self) -> [f64; 3] {
        match *self {
            Profile::Bubble { center, .. }
            | Profile::Gaussian { center, .. }
            | Profile::RadialBump { center, .. }
            | Profile::MollifiedLog { center, .. }
            | Profile::RadialQuadratic { center, .. } => center,
        }
    }

    /// Value at radius ρ from the center.
    pub fn eval_radial(&self, rho: f64) -> f64 {
        match *self {
            Profile::Bubble { lambda, .. } => (2.0 * lambda / (1.0 + lambda * lambda * rho * rho)).ln(),
            Profile::Gaussian { sigma, amp, .. } => amp * (-rho * rho / (2.0 * sigma * sigma)).exp(),
            Profile::RadialBump { radius, amp, .. } => {
                let t = rho / radius;
                if t >= 1.0 {
                    0.0
                } else {
                    amp * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            Profile::MollifiedLog { delta, .. } => {
                -(delta * delta + rho * rho).ln() / (4.0 * std::f64::consts::PI.powi(2))
            }
            Profile::RadialQuadratic { c0, c2, .. } => c0 + c2 * rho * rho,
        }
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        let c = self.center();
        let rho = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt();
        self.eval_radial(rho)
    }

    /// The natural decay model for each profile.
    pub fn decay_model(&self) -> DecayModel {
        match self {
            Profile::Bubble { .. } | Profile::MollifiedLog { .. } => DecayModel::LogGrowth,
            Profile::Gaussian { .. } => DecayModel::PowerDecay(8.0),
            Profile::RadialBump { .. } => DecayModel::CompactSupport,
            Profile::RadialQuadratic { c2, .. } => {
                if *c2 == 0.0 {
                    DecayModel::PowerDecay(0.0)
                } else {
                    DecayModel::PowerDecay(-2.0)
                }
            }
        }
    }
}

/// Scalar field sampled at the cell centers of a [`Box3`], x₁-fastest layout,
/// plus a decay model and an optional exact profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField3 {
    pub box3: Box3,
    values: Vec<f64>,
    pub decay: DecayModel,
    pub profile: Option<Profile>,
}

impl GridField3 {
    pub fn from_values(box3: Box3, values: Vec<f64>, decay: DecayModel) -> Result<Self> {
        if values.len() != box3.num_cells() {
            return Err(FracqError::InvalidField(format!(
                "value count {} does not match grid size {}",
                values.len(),
                box3.num_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FracqError::InvalidField("non-finite sample".into()));
        }
        Ok(Self { box3, values, decay, profile: None })
    }

    pub fn from_fn(box3: Box3, f: impl Fn(&[f64; 3]) -> f64, decay: DecayModel) -> Result<Self> {
        let [nx, ny, nz] = box3.resolution;
        let mut values = Vec::with_capacity(box3.num_cells());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    values.push(f(&box3.point(i, j, k)));
                }
            }
        }
        Self::from_values(box3, values, decay)
    }

    pub fn from_profile(box3: Box3, profile: Profile) -> Result<Self> {
        let decay = profile.decay_model();
        let mut field = Self::from_fn(box3, |x| profile.eval(x), decay)?;
        field.profile = Some(profile);
        Ok(field)
    }

    pub fn constant(box3: Box3, c: f64) -> Result<Self> {
        let center = box3.center;
        Self::from_profile(box3, Profile::RadialQuadratic { center, c0: c, c2: 0.0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.box3.idx(i, j, k)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Evaluate anywhere: the exact profile when present, otherwise trilinear
    /// interpolation of the samples (clamped to the box).
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        if let Some(p) = &self.profile {
            return p.eval(x);
        }
        self.eval_trilinear(x)
    }

    /// Trilinear interpolation of the cell-centered samples; coordinates are
    /// clamped to the sample hull. Second-order, value-level accuracy only.
    pub fn eval_trilinear(&self, x: &[f64; 3]) -> f64 {
        let b = &self.box3;
        let h = b.cell_sizes();
        let mut i0 = [0usize; 3];
        let mut t = [0.0f64; 3];
        for d in 0..3 {
            let u = (x[d] - (b.center[d] - b.half_widths[d])) / h[d] - 0.5;
            let umax = (b.resolution[d] - 1) as f64;
            let uc = u.clamp(0.0, umax);
            let base = uc.floor().min(umax - 1.0).max(0.0);
            i0[d] = base as usize;
            t[d] = uc - base;
        }
        let mut acc = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 0 { 1.0 - t[0] } else { t[0] })
                        * (if dy == 0 { 1.0 - t[1] } else { t[1] })
                        * (if dz == 0 { 1.0 - t[2] } else { t[2] });
                    acc += w * self.value(i0[0] + dx, i0[1] + dy, i0[2] + dz);
                }
            }
        }
        acc
    }

    /// Signed mean of u·r^p over the outermost cell shell: the amplitude of a
    /// power-decay tail model u ≈ A·r^{−p}.
    pub(crate) fn outer_shell_power_amp(&self, p: f64) -> f64 {
        let [nx, ny, nz] = self.box3.resolution;
        let mut sum = 0.0;
        let mut count = 0usize;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                        let x = self.box3.point(i, j, k);
                        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                        sum += self.values[self.box3.idx(i, j, k)] * r.powf(p);
                        count += 1;
                    }
                }
            }
        }
        sum / count.max(1) as f64
    }

    /// Least-squares fit u ≈ A·ln r + B over the outermost cell shell
    /// (signed); returns (A, B).
    pub(crate) fn outer_shell_logfit(&self) -> (f64, f64) {
        let [nx, ny, nz] = self.box3.resolution;
        let (mut sl, mut sv, mut sll, mut slv, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                        let x = self.box3.point(i, j, k);
                        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
                        let l = r.ln();
                        let v = self.values[self.box3.idx(i, j, k)];
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
        if det.abs() > 1e-12 {
            ((cnt * slv - sl * sv) / det, (sv * sll - sl * slv) / det)
        } else {
            (0.0, sv / cnt.max(1.0))
        }
    }

    /// Mean of |v|·weight over the outermost cell shell, for decay heuristics.
    pub fn outer_shell_mean(&self, weight: impl Fn(&[f64; 3]) -> f64) -> f64 {
        let [nx, ny, nz] = self.box3.resolution;
        let mut sum = 0.0;
        let mut count = 0usize;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                        let x = self.box3.point(i, j, k);
                        sum += self.values[self.box3.idx(i, j, k)].abs() * weight(&x);
                        count += 1;
                    }
                }
            }
        }
        sum / count.max(1) as f64
    }

    /// Check that outer-shell magnitudes are broadly consistent (within 3×)
    /// with the declared decay model; returns a human-readable complaint if not.
    pub fn decay_consistency(&self) -> Option<String> {
        let b = &self.box3;
        let rmin = b.half_widths[0].min(b.half_widths[1]).min(b.half_widths[2]);
        let shell = self.outer_shell_mean(|_| 1.0);
        let peak = self.sup_norm();
        if peak == 0.0 {
            return None;
        }
        match self.decay {
            DecayModel::CompactSupport => {
                if shell > 1e-6 * peak {
                    Some(format!(
                        "compact_support field has outer-shell mean {shell:.3e} vs peak {peak:.3e}"
                    ))
                } else {
                    None
                }
            }
            DecayModel::PowerDecay(p) if p > 0.0 => {
                let predicted = peak / rmin.max(1.0).powf(p);
                if shell > 3.0 * predicted.max(1e-300) && shell > 1e-12 * peak {
                    Some(format!(
                        "power_decay({p}) field has outer-shell mean {shell:.3e}, predicted ≲ {predicted:.3e}"
                    ))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Serialize: one JSON header line, then the samples as little-endian f64,
    /// row-major with x₁ fastest.
    pub fn write_gf3(&self, w: &mut impl Write) -> Result<()> {
        let header = Gf3Header {
            schema: 1,
            box3: self.box3.clone(),
            decay: self.decay,
            profile: self.profile.clone(),
        };
        let mut line = serde_json::to_string(&header)
            .map_err(|e| FracqError::InvalidField(format!("header encode: {e}")))?;
        line.push('\n');
        w.write_all(line.as_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_gf3(r: &mut impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| FracqError::InvalidField("missing header line".into()))?;
        let header: Gf3Header = serde_json::from_slice(&bytes[..nl])
            .map_err(|e| FracqError::InvalidField(format!("header decode: {e}")))?;
        let data = &bytes[nl + 1..];
        let n = header.box3.num_cells();
        if data.len() != 8 * n {
            return Err(FracqError::InvalidField(format!(
                "payload holds {} bytes, expected {}",
                data.len(),
                8 * n
            )));
        }
        let values: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut field = Self::from_values(header.box3, values, header.decay)?;
        field.profile = header.profile;
        Ok(field)
    }

    pub fn save_gf3(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_gf3(&mut f)
    }

    pub fn load_gf3(path: &std::path::Path) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        Self::read_gf3(&mut f)
    }
}

#[derive(Serialize, Deserialize)]
struct Gf3Header {
    schema: u32,
    #[serde(rename = "box")]
    box3: Box3,
    decay: DecayModel,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    profile: Option<Profile>,
}
