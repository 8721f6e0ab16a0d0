//! `fracq scan`: measure local curvature mass around candidate points for a
//! family of fields and report which candidates hold concentrated mass.
//! Diagnostic: the report carries the verdicts; there is nothing to fail.

use crate::config::{require_positive, Cfg, CliErr, CliResult};
use crate::report::Report;
use fracq_core::blowup::detect_s1;
use fracq_core::grid::{Box3, GridField3};
use fracq_core::liouville::{scaled_family, BubbleSpec};
use serde_json::{json, Value};

const DEFAULT_CANDIDATES: [[f64; 3]; 2] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let q_const = require_positive(cfg.f64_or("scan.q_const", 2.0)?, "scan.q_const")?;
    let candidates = cfg.points_or("scan.candidates", &DEFAULT_CANDIDATES)?;
    let radii = cfg.f64_list_or("scan.radii", &[0.1, 0.2, 0.4])?;

    let (family, family_cfg): (Vec<GridField3>, Value) = if cfg.has("scan.fields") {
        let paths = match cfg.raw("scan.fields") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|p| {
                    p.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliErr(format!("scan.fields entries must be paths, got {p}")))
                })
                .collect::<CliResult<Vec<String>>>()?,
            other => return Err(CliErr(format!("scan.fields must be an array of paths, got {other:?}"))),
        };
        let fields = paths
            .iter()
            .map(|p| fracq_core::gf3::read_gf3(p).map_err(|e| CliErr(format!("scan.fields {p:?}: {e}"))))
            .collect::<CliResult<Vec<GridField3>>>()?;
        (fields, json!({ "fields": paths }))
    } else {
        let lambda = require_positive(cfg.f64_or("scan.lambda", 8.0)?, "scan.lambda")?;
        let k_list = cfg.u32_list_or("scan.k_list", &[2, 4, 8])?;
        let box_len = require_positive(cfg.f64_or("scan.box", 4.0)?, "scan.box")?;
        let resolution = cfg.usize_or("scan.resolution", 32)?;
        let spec = BubbleSpec::new([0.0; 3], lambda)?;
        let b = Box3::cube([0.0; 3], 0.5 * box_len, resolution)?;
        let fields = k_list
            .iter()
            .map(|&k| scaled_family(&spec, k, b.clone()))
            .collect::<fracq_core::Result<Vec<GridField3>>>()?;
        (
            fields,
            json!({
                "lambda": lambda,
                "k_list": k_list,
                "box": box_len,
                "resolution": resolution,
            }),
        )
    };
    if family.is_empty() {
        return Err(CliErr("scan: the family is empty".into()));
    }

    let mut rep = Report::new("scan", cfg.seed()?);
    rep.set_config(json!({
        "family": family_cfg,
        "q_const": q_const,
        "candidates": candidates,
        "radii": radii,
    }));

    let q = GridField3::constant(family[0].box3.clone(), q_const)?;
    let report = detect_s1(&q, &family, &candidates, &radii)?;

    let flagged: Vec<usize> = report
        .verdicts
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, fracq_core::blowup::Verdict::Above))
        .map(|(i, _)| i)
        .collect();
    eprintln!(
        "scan: {} of {} candidates above threshold {:.6}",
        flagged.len(),
        candidates.len(),
        report.threshold
    );

    let out = cfg.out_dir()?;
    std::fs::create_dir_all(&out).map_err(fracq_core::FracqError::from)?;
    std::fs::write(out.join("masses.csv"), report.masses_csv())
        .map_err(fracq_core::FracqError::from)?;
    rep.artifact("masses.csv");

    rep.result("concentration", serde_json::to_value(&report).expect("report serializes"));
    rep.result("flagged", json!(flagged));
    Ok(rep)
}
