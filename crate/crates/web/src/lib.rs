//! Browser bindings for the `vguard` analytic models.
//!
//! Every export takes natural units (`λ_a = 1`, unit powers, path-loss
//! exponent 4) and returns a flat `Float64Array`; `www/index.html` draws it.

use vguard::coverage::{coverage_curve, theta_db_grid, Provenance};
use vguard::density::{ap_equivalent_density, ue_equivalent_density, RadialDensity};
use vguard::geometry::{pca, NetworkConfig, Point2, Scenario};
use wasm_bindgen::prelude::*;

fn scenario(xstar: f64, xr_ratio: f64, angle_deg: f64) -> Result<Scenario, vguard::Error> {
    Scenario::with_receiver_polar(xstar, xr_ratio * xstar, angle_deg.to_radians())
}

fn msg(e: vguard::Error) -> String {
    e.to_string()
}

/// Rows of `[r, ap_density, ue_density]` for `n + 1` radii on `[0, r_max]`.
pub fn density_rows(xstar: f64, xr_ratio: f64, angle_deg: f64, r_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(r_max > 0.0) || n == 0 {
        return Err(String::from("r_max must be > 0 and n >= 1"));
    }
    let sc = scenario(xstar, xr_ratio, angle_deg).map_err(msg)?;
    let cfg = NetworkConfig::default();
    let ap = ap_equivalent_density(&sc, &cfg);
    let ue = ue_equivalent_density(&sc, &cfg);
    let mut out = Vec::with_capacity(3 * (n + 1));
    for i in 0..=n {
        let r = r_max * i as f64 / n as f64;
        out.extend([r, ap.value(r), ue.value(r)]);
    }
    Ok(out)
}

/// Rows of `[theta_db, guarded, unguarded]`: downlink coverage from the
/// serving AP with and without the Voronoi guard region.
pub fn coverage_rows(
    xstar: f64,
    xr_ratio: f64,
    angle_deg: f64,
    theta_min: f64,
    theta_max: f64,
    theta_step: f64,
) -> Result<Vec<f64>, String> {
    let sc = scenario(xstar, xr_ratio, angle_deg).map_err(msg)?;
    let cfg = NetworkConfig::default();
    let rho = sc.x_star().dist(sc.x_r());
    if rho == 0.0 {
        return Err(String::from("receiver coincides with the serving AP"));
    }
    let thetas = theta_db_grid(theta_min, theta_max, theta_step).map_err(msg)?;
    let guarded = ap_equivalent_density(&sc, &cfg);
    let plain = RadialDensity::constant(cfg.lambda_a);
    let g = coverage_curve(&guarded, rho, cfg.p_a, cfg.alpha_a, &thetas, Provenance::Analytic, "guarded")
        .map_err(msg)?;
    let p = coverage_curve(&plain, rho, cfg.p_a, cfg.alpha_a, &thetas, Provenance::Analytic, "unguarded")
        .map_err(msg)?;
    let mut out = Vec::with_capacity(3 * thetas.len());
    for ((t, a), b) in thetas.iter().zip(g.values()).zip(p.values()) {
        out.extend([*t, a, b]);
    }
    Ok(out)
}

/// Probability that each point of an `n × n` grid over
/// `[-half_width, half_width]²` lies in the serving cell, row-major from
/// the top-left corner. The serving AP sits at `(xstar, 0)`.
pub fn pca_grid(xstar: f64, half_width: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(half_width > 0.0) || n < 2 {
        return Err(String::from("half_width must be > 0 and n >= 2"));
    }
    let sc = Scenario::canonical(xstar, Point2::new(0.0, 0.0)).map_err(msg)?;
    let step = 2.0 * half_width / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        let y = half_width - row as f64 * step;
        for col in 0..n {
            let x = -half_width + col as f64 * step;
            out.push(pca(Point2::new(x, y), &sc, 1.0));
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn density_curves(xstar: f64, xr_ratio: f64, angle_deg: f64, r_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    density_rows(xstar, xr_ratio, angle_deg, r_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coverage_curves(
    xstar: f64,
    xr_ratio: f64,
    angle_deg: f64,
    theta_min: f64,
    theta_max: f64,
    theta_step: f64,
) -> Result<Vec<f64>, JsError> {
    coverage_rows(xstar, xr_ratio, angle_deg, theta_min, theta_max, theta_step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pca_field(xstar: f64, half_width: f64, n: usize) -> Result<Vec<f64>, JsError> {
    pca_grid(xstar, half_width, n).map_err(|e| JsError::new(&e))
}
