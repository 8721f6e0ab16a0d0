//! `fracq bubble`: check that the model solution satisfies its equation on
//! the grid, compare the total curvature with 4π², and emit the residual
//! field plus a radial profile.

use crate::config::{require_positive, require_power_of_two, Cfg, CliResult};
use crate::report::Report;
use fracq_core::grid::{Box3, DecayModel, GridField3, Profile};
use fracq_core::liouville::{bubble_u, BubbleSpec};
use serde_json::json;
use std::f64::consts::PI;
use std::fmt::Write as _;

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let lambda = cfg.f64_or("bubble.lambda", 1.0)?;
    let box_len = require_positive(cfg.f64_or("bubble.box", 32.0)?, "bubble.box")?;
    let resolution = cfg.usize_or("bubble.resolution", 128)?;
    let region = require_positive(cfg.f64_or("bubble.region", 4.0)?, "bubble.region")?;
    let residual_tol =
        require_positive(cfg.f64_or("bubble.residual_tol", 1e-3)?, "bubble.residual_tol")?;
    let mass_tol = require_positive(cfg.f64_or("bubble.mass_tol", 1e-3)?, "bubble.mass_tol")?;
    let profile_points = cfg.usize_or("bubble.profile_points", 65)?.max(2);
    require_power_of_two(resolution, "bubble")?;

    // Validates λ (rejecting λ ≤ 0 and non-finite values with a usage error).
    let spec = BubbleSpec::new([0.0; 3], lambda)?;

    let mut rep = Report::new("bubble", cfg.seed()?);
    rep.set_config(json!({
        "lambda": lambda,
        "box": box_len,
        "resolution": resolution,
        "region": region,
        "residual_tol": residual_tol,
        "mass_tol": mass_tol,
        "profile_points": profile_points,
    }));

    let b = Box3::cube([0.0; 3], 0.5 * box_len, resolution)?;
    let u = GridField3::from_profile(b.clone(), Profile::Bubble { center: [0.0; 3], lambda })?;
    let lhs = fracq_core::extension::spectral_fraclap(&u, 1.5)?;

    // Residual field (operator minus curvature), plus the max over the
    // probe region relative to the curvature scale there, and the total.
    let mut residual = vec![0.0f64; b.num_cells()];
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    let mut total = 0.0f64;
    let [nx, ny, nz] = b.resolution;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = b.idx(i, j, k);
                let x = b.point(i, j, k);
                let rhs = 2.0 * (3.0 * u.values()[idx]).exp();
                residual[idx] = lhs.field.values()[idx] - rhs;
                total += rhs;
                if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= region * region {
                    max_abs = max_abs.max(residual[idx].abs());
                    scale = scale.max(rhs);
                }
            }
        }
    }
    total *= b.cell_volume();
    let rel_residual = max_abs / scale;
    let target = 4.0 * PI * PI;

    rep.check(
        &format!("equation residual (relative, |x| ≤ {region})"),
        rel_residual,
        0.0,
        residual_tol,
    );
    rep.check("total curvature = 4π²", total, target, mass_tol * target);

    rep.result("total_curvature", json!(total));
    rep.result("residual_max_relative", json!(rel_residual));
    rep.result("transform_warning", json!(lhs.warning));

    let out = cfg.out_dir()?;
    std::fs::create_dir_all(&out).map_err(fracq_core::FracqError::from)?;

    let residual_field =
        GridField3::from_values(b.clone(), residual, DecayModel::PowerDecay(6.0))?;
    fracq_core::gf3::write_gf3(&residual_field, out.join("residual.gf3"))?;
    rep.artifact("residual.gf3");

    // Radial profile of the solution and its curvature.
    let mut csv = String::from("r,u,curvature\n");
    let rmax = 0.5 * box_len;
    for i in 0..profile_points {
        let r = rmax * i as f64 / (profile_points - 1) as f64;
        let uval = bubble_u(&spec, &[r, 0.0, 0.0]);
        let _ = writeln!(csv, "{r},{uval},{}", 2.0 * (3.0 * uval).exp());
    }
    std::fs::write(out.join("profile.csv"), csv).map_err(fracq_core::FracqError::from)?;
    rep.artifact("profile.csv");

    Ok(rep)
}
