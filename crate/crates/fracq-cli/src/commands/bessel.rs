//! `fracq verify-bessel`: sweep the three Bessel integral identities over
//! ten parameter tuples each, reporting every residual.

use crate::config::{require_positive, Cfg, CliResult};
use crate::report::Report;
use fracq_core::specfun::{
    verify_bessel_identity_1, verify_bessel_identity_2, verify_bessel_identity_3,
};
use serde_json::json;

pub fn run(cfg: &Cfg) -> CliResult<Report> {
    let tol = require_positive(cfg.f64_or("verify-bessel.tol", 1e-7)?, "verify-bessel.tol")?;

    let mut rep = Report::new("verify-bessel", cfg.seed()?);
    rep.set_config(json!({ "tol": tol }));

    let gammas = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 3];

    for (i, &g) in gammas.iter().enumerate() {
        let (a, z) = (0.5 + 0.35 * i as f64, 0.4 + 0.3 * i as f64);
        let (res, est) = verify_bessel_identity_1(g, a, z)?;
        worst[0] = worst[0].max(res);
        rows.push(json!({
            "identity": 1, "gamma": g, "a": a, "z": z,
            "residual": res, "estimate": est, "pass": res <= tol,
        }));
    }
    for (i, &g) in gammas.iter().enumerate() {
        let z = 0.3 + 1.1 * i as f64;
        let (res, imag) = verify_bessel_identity_2(g, z)?;
        worst[1] = worst[1].max(res);
        rows.push(json!({
            "identity": 2, "gamma": g, "z": z,
            "residual": res, "imaginary_part": imag, "pass": res <= tol,
        }));
    }
    for i in 0..10 {
        let (mu, nu) = (0.5 + 0.3 * i as f64, 0.25 * i as f64);
        let (a, b) = (1.0 + 0.2 * i as f64, 0.6 + 0.15 * i as f64);
        let (res, est) = verify_bessel_identity_3(mu, nu, a, b)?;
        worst[2] = worst[2].max(res);
        rows.push(json!({
            "identity": 3, "mu": mu, "nu": nu, "a": a, "b": b,
            "residual": res, "estimate": est, "pass": res <= tol,
        }));
    }

    for (i, w) in worst.iter().enumerate() {
        rep.check(
            &format!("identity {} worst residual over 10 tuples", i + 1),
            *w,
            0.0,
            tol,
        );
    }
    rep.result("tuples", json!(rows));
    Ok(rep)
}
