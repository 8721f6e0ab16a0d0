//! `fracq brezis-merle`: probe exponential integrability of the potential of
//! a point-like mass across a list of exponents. The default configuration
//! straddles the critical exponent, so the classification must flip.

use crate::config::{require_positive, require_power_of_two, Cfg, CliErr, CliResult};
use crate::report::Report;
use fracq_core::blowup::brezis_merle_probe;
use fracq_core::grid::{Box3, GridField3, Profile};
use serde_json::json;
use std::f64::consts::PI;

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let mass = require_positive(cfg.f64_or("brezis-merle.mass", PI * PI)?, "brezis-merle.mass")?;
    let box_len = require_positive(cfg.f64_or("brezis-merle.box", 2.0)?, "brezis-merle.box")?;
    let resolution = cfg.usize_or("brezis-merle.resolution", 64)?;
    let region_len =
        require_positive(cfg.f64_or("brezis-merle.region", 0.8)?, "brezis-merle.region")?;
    let region_resolution = cfg.usize_or("brezis-merle.region_resolution", 8)?;
    let p_list = cfg.f64_list_or("brezis-merle.p_list", &[1.5, 2.5])?;
    let expect = cfg.bool_list("brezis-merle.expect_divergent")?.or({
        // The default run is a check: below critical integrable, above not.
        if cfg.has("brezis-merle.p_list") { None } else { Some(vec![false, true]) }
    });
    require_power_of_two(resolution, "brezis-merle")?;
    if let Some(e) = &expect {
        if e.len() != p_list.len() {
            return Err(CliErr(format!(
                "brezis-merle.expect_divergent has {} entries for {} exponents",
                e.len(),
                p_list.len()
            )));
        }
    }

    let mut rep = Report::new("brezis-merle", cfg.seed()?);
    rep.set_config(json!({
        "mass": mass,
        "box": box_len,
        "resolution": resolution,
        "region": region_len,
        "region_resolution": region_resolution,
        "p_list": p_list,
        "expect_divergent": expect,
    }));

    let b = Box3::cube([0.0; 3], 0.5 * box_len, resolution)?;
    let w = GridField3::from_profile(
        b.clone(),
        Profile::mollified_point_mass(&b, [0.0; 3], mass)?,
    )?;
    let region = Box3::cube([0.0; 3], 0.5 * region_len, region_resolution)?;

    let mut rows = Vec::new();
    for (i, &p) in p_list.iter().enumerate() {
        let probe = brezis_merle_probe(&w, p, &region)?;
        if i == 0 {
            // The measured mass must reproduce the requested one.
            rep.check("point mass recovered (relative)", probe.alpha / mass, 1.0, 1e-2);
            rep.result("alpha", json!(probe.alpha));
            rep.result("critical_exponent", json!(2.0 * PI * PI / probe.alpha));
        }
        if let Some(e) = &expect {
            rep.check_flag(
                &format!("classification at p={p}"),
                probe.divergent == e[i],
                if e[i] { "divergent" } else { "integrable" },
            );
        }
        rows.push(json!({
            "p": p,
            "trend": probe.trend,
            "divergent": probe.divergent,
            "integral_coarse": probe.integral_coarse,
            "integral_fine": probe.integral_fine,
            "resolution_coarse": probe.resolution_coarse,
            "resolution_fine": probe.resolution_fine,
        }));
    }
    rep.result("probes", json!(rows));
    Ok(rep)
}
