//! Browser bindings: domain-colored render, vertical profile and Green-line
//! trace of the Cauchy transform over the Cantor set.

use cantor_riemannium::cauchy::{vertical_profile as profile_rows, CauchyEvaluator};
use cantor_riemannium::geometry::{certify_good_rational, GoodPointConfig};
use cantor_riemannium::green::{trace_green_line, TraceOptions};
use cantor_riemannium::measures::{make_nu, truncate_mu, Base, LambdaRule};
use cantor_riemannium::rational::{parse_ratio, to_f64};
use cantor_riemannium::render::{render_field, RenderMode, RenderSpec};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// RGBA pixels, row-major, ready for `ImageData`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn render_rgba(
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    width: u32,
    height: u32,
    base: &str,
    depth: u32,
    mode: &str,
) -> Result<Vec<u8>, String> {
    let base: Base = base.parse().map_err(err)?;
    let mode: RenderMode = mode.parse().map_err(err)?;
    let spec = RenderSpec::new([re_min, re_max, im_min, im_max], width, height, base, depth, mode);
    let img = render_field(&spec).map_err(err)?;
    let mut rgba = Vec::with_capacity(img.rgb.len() / 3 * 4);
    for px in img.rgb.chunks_exact(3) {
        rgba.extend_from_slice(px);
        rgba.push(255);
    }
    Ok(rgba)
}

/// `F(x0 + iy)` on `count` log-spaced heights from `ymax` down to `ymin`,
/// as JSON rows `{x, y, ReF, ImF, tail_bound}`.
#[wasm_bindgen]
pub fn vertical_profile(x0: &str, base: &str, depth: u32, ymin: f64, ymax: f64, count: usize) -> Result<String, String> {
    let x = parse_ratio(x0).map_err(err)?;
    if !(ymin > 0.0 && ymax >= ymin && count >= 2) {
        return Err("need 0 < ymin <= ymax and at least two heights".into());
    }
    let base: Base = base.parse().map_err(err)?;
    let rule = LambdaRule::default();
    let (t, good) = match base {
        Base::Mu => (truncate_mu(depth).map_err(err)?, None),
        Base::Nu => (
            make_nu(&rule, depth).map_err(err)?,
            certify_good_rational(&x, &GoodPointConfig::new(rule.kappa.clone(), 30)).ok(),
        ),
    };
    let ys: Vec<f64> = (0..count).map(|i| ymax * (ymin / ymax).powf(i as f64 / (count - 1) as f64)).collect();
    let ev = CauchyEvaluator::new(&t);
    let rows = profile_rows(&ev, to_f64(&x), &ys, good.as_ref()).map_err(err)?;
    serde_json::to_string(&rows).map_err(err)
}

/// Green line of angle `theta` (a rational such as `1/3`) as JSON.
#[wasm_bindgen]
pub fn green_line(theta: &str, depth: u32, step: f64) -> Result<String, String> {
    let th = parse_ratio(theta).map_err(err)?;
    let opts = TraceOptions { depth, step, ..TraceOptions::default() };
    let tr = trace_green_line(&th, &opts).map_err(err)?;
    serde_json::to_string(&tr).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_rgba() {
        let px = render_rgba(-1.0, 1.0, -1.0, 1.0, 16, 20, "mu", 6, "domain_color").unwrap();
        assert_eq!(px.len(), 16 * 20 * 4);
        assert!(px.chunks_exact(4).all(|p| p[3] == 255));
        assert!(render_rgba(-1.0, 1.0, -1.0, 1.0, 16, 16, "lebesgue", 6, "domain_color").is_err());
    }

    #[test]
    fn profile_and_trace_are_json() {
        let rows: serde_json::Value = serde_json::from_str(&vertical_profile("1/3", "mu", 8, 1e-4, 1.0, 5).unwrap()).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 5);
        let tr: serde_json::Value = serde_json::from_str(&green_line("1/3", 8, 0.05).unwrap()).unwrap();
        assert_eq!(tr["status"], "LANDED");
        assert!(green_line("1/0", 8, 0.05).is_err());
    }
}
