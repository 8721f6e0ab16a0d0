//! `fracq relation`: compare the extension/trace route against the spectral
//! route for one named test function or a custom field file.

use crate::config::{require_positive, require_power_of_two, Cfg, CliErr, CliResult};
use crate::report::Report;
use fracq_core::extension::check_relation;
use fracq_core::grid::{Box3, GridField3, Profile};
use serde_json::json;

const DEFAULT_PROBES: [[f64; 3]; 4] =
    [[0.0, 0.0, 0.0], [1.1, 0.0, 0.0], [0.0, -1.7, 0.4], [2.5, 2.5, 0.0]];

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let function = cfg.string_or("relation.function", "bubble")?;
    let box_len = require_positive(cfg.f64_or("relation.box", 16.0)?, "relation.box")?;
    let resolution = cfg.usize_or("relation.resolution", 64)?;
    let fd_h = require_positive(cfg.f64_or("relation.fd_h", 0.1)?, "relation.fd_h")?;
    let tol = require_positive(cfg.f64_or("relation.tol", 2e-2)?, "relation.tol")?;
    let probes = cfg.points_or("relation.probes", &DEFAULT_PROBES)?;

    let u = match function.as_str() {
        "bubble" => {
            let lambda = require_positive(cfg.f64_or("relation.lambda", 1.0)?, "relation.lambda")?;
            require_power_of_two(resolution, "relation")?;
            GridField3::from_profile(
                Box3::cube([0.0; 3], 0.5 * box_len, resolution)?,
                Profile::Bubble { center: [0.0; 3], lambda },
            )?
        }
        "gaussian" => {
            let sigma = require_positive(cfg.f64_or("relation.sigma", 1.0)?, "relation.sigma")?;
            let amp = cfg.f64_or("relation.amp", 1.0)?;
            require_power_of_two(resolution, "relation")?;
            GridField3::from_profile(
                Box3::cube([0.0; 3], 0.5 * box_len, resolution)?,
                Profile::Gaussian { center: [0.0; 3], sigma, amp },
            )?
        }
        path => {
            let field = fracq_core::gf3::read_gf3(path)
                .map_err(|e| CliErr(format!("relation.function {path:?}: {e}")))?;
            for r in field.box3.resolution {
                require_power_of_two(r, "relation")?;
            }
            field
        }
    };

    let mut rep = Report::new("relation", cfg.seed()?);
    rep.set_config(json!({
        "function": function,
        "box": [
            2.0 * u.box3.half_widths[0],
            2.0 * u.box3.half_widths[1],
            2.0 * u.box3.half_widths[2],
        ],
        "resolution": u.box3.resolution,
        "fd_h": fd_h,
        "tol": tol,
        "probes": probes,
    }));

    let report = check_relation(&u, &probes, fd_h)?;
    rep.check("route agreement (relative)", report.max_relative, 0.0, tol);

    rep.result("probes", json!(report.probes));
    rep.result("trace_values", json!(report.trace_values));
    rep.result("spectral_values", json!(report.spectral_values));
    rep.result("max_abs_residual", json!(report.max_abs_residual));
    rep.result("mean_abs_residual", json!(report.mean_abs_residual));
    rep.result("scale", json!(report.scale));
    rep.result("transform_warning", json!(report.warning));
    Ok(rep)
}
