//! `fracq pizzetti`: check the solid mean-value identity (coefficient 1/12)
//! for a named or custom polynomial plus randomly drawn biharmonic ones.

use crate::config::{require_positive, Cfg, CliErr, CliResult};
use crate::report::Report;
use fracq_core::blowup::pizzetti_check;
use fracq_core::poly::Poly4;
use rand::SeedableRng;
use serde_json::{json, Value};

fn custom_poly(v: &Value) -> CliResult<Poly4> {
    let terms = v
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| CliErr("pizzetti.polynomial must be a name or {\"terms\": [[e1,e2,e3,e4,coeff],...]}".into()))?;
    let mut parsed = Vec::new();
    for t in terms {
        let row: Vec<f64> = t
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default();
        if row.len() != 5 || row[..4].iter().any(|e| *e < 0.0 || e.fract() != 0.0) {
            return Err(CliErr(format!(
                "pizzetti.polynomial terms must be [e1,e2,e3,e4,coeff] with integer exponents, got {t}"
            )));
        }
        parsed.push((
            [row[0] as usize, row[1] as usize, row[2] as usize, row[3] as usize],
            row[4],
        ));
    }
    Ok(Poly4::from_terms(&parsed)?)
}

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let center = cfg.point4_or("pizzetti.center", [0.3, -0.1, 0.2, 0.5])?;
    let radius = require_positive(cfg.f64_or("pizzetti.radius", 0.8)?, "pizzetti.radius")?;
    let tol = require_positive(cfg.f64_or("pizzetti.tol", 1e-8)?, "pizzetti.tol")?;
    let random_count = cfg.usize_or("pizzetti.random_count", 5)?;
    let seed = cfg.seed()?;

    let poly_spec = cfg.raw("pizzetti.polynomial").unwrap_or(json!("radius-sq"));
    let named: Vec<(String, Poly4)> = match &poly_spec {
        Value::String(name) => match name.as_str() {
            "radius-sq" => vec![("radius-sq".into(), Poly4::radius_sq())],
            "radius-fourth" => vec![("radius-fourth".into(), Poly4::radius_fourth())],
            other => {
                return Err(CliErr(format!(
                    "pizzetti.polynomial: unknown name {other:?} (use radius-sq, radius-fourth, or a terms object)"
                )))
            }
        },
        v => vec![("custom".into(), custom_poly(v)?)],
    };

    let mut rep = Report::new("pizzetti", seed);
    rep.set_config(json!({
        "center": center,
        "radius": radius,
        "tol": tol,
        "random_count": random_count,
        "polynomial": poly_spec,
    }));

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut polys = named;
    for i in 0..random_count {
        let p = Poly4::random(&mut rng).biharmonic_part();
        polys.push((format!("random-{}", i + 1), p));
    }

    let mut rows = Vec::new();
    for (name, p) in &polys {
        let biharmonic = p.is_biharmonic();
        let chk = pizzetti_check(p, center, radius)?;
        // The identity is only promised for biharmonic polynomials; other
        // inputs are reported (the residual measures their defect) but do
        // not gate the exit code.
        if biharmonic {
            rep.check(&format!("mean-value residual: {name}"), chk.residual, 0.0, tol);
        }
        rows.push(json!({
            "name": name,
            "biharmonic": biharmonic,
            "mean_value": chk.mean_value,
            "predicted": chk.predicted,
            "residual": chk.residual,
            "quad_error": chk.quad_error,
        }));
    }
    rep.result("polynomials", json!(rows));
    Ok(rep)
}
