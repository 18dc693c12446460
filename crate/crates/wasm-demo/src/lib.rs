//! Thin wasm-bindgen surface over the core crate for the static demo
//! page. Everything returns JSON strings so the page needs no generated
//! TypeScript glue beyond the wasm-bindgen loader.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fatigue_core::paris::{fit_paris, GrowthPoint, ParisConstants, UnitSystem};
use fatigue_core::xfem::{hoop_stress_derivative, kink_angle, sent_k1};

#[derive(Serialize)]
struct KinkResult {
    theta_deg: f64,
    /// Residual of the hoop-stress derivative at theta; ~0 confirms the
    /// returned angle is the maximum-circumferential-stress direction.
    derivative_residual: f64,
}

/// Crack kink angle (degrees) for a mixed-mode tip state.
#[wasm_bindgen]
pub fn kink(k1: f64, k2: f64) -> String {
    let theta = kink_angle(k1, k2);
    let mag = (k1 * k1 + k2 * k2).sqrt().max(1e-300);
    let out = KinkResult {
        theta_deg: theta.to_degrees(),
        derivative_residual: hoop_stress_derivative(k1, k2, theta) / mag,
    };
    serde_json::to_string(&out).unwrap()
}

#[derive(Serialize)]
struct FitResult {
    m: f64,
    c: f64,
    r_squared: f64,
    point_count: usize,
}

#[derive(Serialize)]
struct FitError {
    error: String,
}

/// Least-squares Paris fit of newline-separated "dk,dadn" pairs.
#[wasm_bindgen]
pub fn fit_points(csv: &str) -> String {
    let mut points = Vec::new();
    for line in csv.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(|c: char| c.is_alphabetic()) {
            continue;
        }
        let mut it = line.split(',');
        let dk = it.next().and_then(|s| s.trim().parse::<f64>().ok());
        let dadn = it.next().and_then(|s| s.trim().parse::<f64>().ok());
        if let (Some(delta_k), Some(dadn)) = (dk, dadn) {
            points.push(GrowthPoint { delta_k, dadn });
        }
    }
    match fit_paris(&points, UnitSystem::MpaSqrtMm) {
        Ok(fit) => {
            let d = fit.diagnostics.unwrap();
            serde_json::to_string(&FitResult {
                m: fit.m,
                c: fit.c,
                r_squared: d.r_squared,
                point_count: d.point_count,
            })
            .unwrap()
        }
        Err(e) => serde_json::to_string(&FitError {
            error: e.to_string(),
        })
        .unwrap(),
    }
}

#[derive(Serialize)]
struct LifePoint {
    n: f64,
    a_mm: f64,
}

#[derive(Serialize)]
struct LifeResult {
    cycles_to_failure: f64,
    curve: Vec<LifePoint>,
}

/// Integrate an edge-crack life curve with the closed-form edge-notch K.
/// Stresses in MPa, lengths in mm; constants in the MPa·√mm convention.
#[wasm_bindgen]
pub fn life_curve(
    width: f64,
    a0: f64,
    sigma_max: f64,
    sigma_min: f64,
    c: f64,
    m: f64,
) -> String {
    if !(a0 > 0.0 && a0 < width && sigma_max > sigma_min && c > 0.0 && (0.0..10.0).contains(&m))
    {
        return serde_json::to_string(&FitError {
            error: "bad inputs: need 0 < a0 < width, sigma_max > sigma_min, C > 0, 0 <= m < 10"
                .into(),
        })
        .unwrap();
    }
    let paris = ParisConstants::new(c, m, UnitSystem::MpaSqrtMm);
    let da = (width - a0) / 400.0;
    let mut a = a0;
    let mut n = 0.0;
    let mut curve = vec![LifePoint { n, a_mm: a }];
    while a < 0.9 * width {
        let dk = sent_k1(sigma_max - sigma_min, a + 0.5 * da, width);
        let rate = paris.rate(dk);
        if !(rate > 0.0) || rate > width {
            break;
        }
        n += da / rate;
        a += da;
        curve.push(LifePoint { n, a_mm: a });
        if n > 1e12 {
            break;
        }
    }
    serde_json::to_string(&LifeResult {
        cycles_to_failure: n,
        curve,
    })
    .unwrap()
}
