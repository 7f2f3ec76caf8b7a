//! Raster pictures of the principal sheet: domain coloring of the
//! primitive, Green lines, equipotentials and the finger picture of `F_ν`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::CauchyEvaluator;
use crate::error::{Error, Result};
use crate::geometry::{certify_good, BinaryWord, CantorAddress, GoodPointConfig};
use crate::measures::{make_nu, truncate_mu, Base, LambdaRule, MeasureTruncation};
use crate::rational::{fmt_ratio, to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RenderMode {
    DomainColor,
    GreenLines,
    Equipotentials,
    Krueger,
}

impl FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "domain_color" | "domain" => Ok(RenderMode::DomainColor),
            "green_lines" | "green" => Ok(RenderMode::GreenLines),
            "equipotentials" | "equipotential" => Ok(RenderMode::Equipotentials),
            "krueger" => Ok(RenderMode::Krueger),
            other => Err(Error::Parse(format!("unknown render mode {other:?}"))),
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderMode::DomainColor => "domain_color",
            RenderMode::GreenLines => "green_lines",
            RenderMode::Equipotentials => "equipotentials",
            RenderMode::Krueger => "krueger",
        })
    }
}

/// In `KRUEGER` mode the vertical window coordinates are values of `Im F`
/// rather than `Im z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderSpec {
    /// `(re_min, re_max, im_min, im_max)`.
    pub window: [f64; 4],
    pub width: u32,
    pub height: u32,
    pub base: Base,
    pub depth: u32,
    pub mode: RenderMode,
    /// Number of level lines per unit in the line modes.
    #[serde(default = "default_lines")]
    pub lines: u32,
    /// Finger tips are drawn at good points with `|pre| + |period| <=` this.
    #[serde(default = "default_address_len")]
    pub address_len: usize,
}

fn default_lines() -> u32 {
    24
}

fn default_address_len() -> usize {
    8
}

pub const MIN_RESOLUTION: u32 = 16;

impl RenderSpec {
    pub fn new(window: [f64; 4], width: u32, height: u32, base: Base, depth: u32, mode: RenderMode) -> Self {
        RenderSpec { window, width, height, base, depth, mode, lines: default_lines(), address_len: default_address_len() }
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b, c, d] = self.window;
        if !(self.window.iter().all(|v| v.is_finite()) && a < b && c < d) {
            return Err(Error::Invalid(format!("empty window {:?}", self.window)));
        }
        if self.width < MIN_RESOLUTION || self.height < MIN_RESOLUTION {
            return Err(Error::Invalid(format!("resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}")));
        }
        if self.depth == 0 {
            return Err(Error::Invalid("depth must be positive".into()));
        }
        if self.mode == RenderMode::Krueger && self.base != Base::Nu {
            return Err(Error::Invalid("the finger picture needs base nu".into()));
        }
        Ok(())
    }

    /// Centre of pixel `(i, j)`, row 0 at the top.
    pub fn pixel_center(&self, i: u32, j: u32) -> (f64, f64) {
        let [a, b, c, d] = self.window;
        let x = a + (i as f64 + 0.5) * (b - a) / self.width as f64;
        let y = d - (j as f64 + 0.5) * (d - c) / self.height as f64;
        (x, y)
    }

    /// Row whose centre is nearest to the vertical coordinate `y`.
    pub fn row_of(&self, y: f64) -> i64 {
        let [_, _, c, d] = self.window;
        ((d - y) / (d - c) * self.height as f64 - 0.5).round() as i64
    }

    pub fn column_of(&self, x: f64) -> i64 {
        let [a, b, _, _] = self.window;
        ((x - a) / (b - a) * self.width as f64 - 0.5).round() as i64
    }
}

/// A finger of the `ν` picture: a good point and `lim Im F_ν` above it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KruegerTip {
    pub x: String,
    pub x_f64: f64,
    pub height: f64,
    pub column: i64,
    pub row: i64,
}

#[derive(Clone, Debug)]
pub struct Rendered {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB.
    pub rgb: Vec<u8>,
    pub tips: Vec<KruegerTip>,
}

impl Rendered {
    pub fn pixel(&self, i: u32, j: u32) -> [u8; 3] {
        let k = 3 * (j as usize * self.width as usize + i as usize);
        [self.rgb[k], self.rgb[k + 1], self.rgb[k + 2]]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        use image::ImageEncoder;
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(&self.rgb, self.width, self.height, image::ExtendedColorType::Rgb8)
            .map_err(|e| Error::Image(e.to_string()))?;
        Ok(out)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    /// Writes PNG or PPM according to the extension (`.ppm`, otherwise PNG).
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ppm") => self.to_ppm(),
            _ => self.to_png()?,
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(&bytes)?;
        Ok(())
    }
}

fn truncation(spec: &RenderSpec) -> Result<MeasureTruncation> {
    match spec.base {
        Base::Mu => truncate_mu(spec.depth),
        Base::Nu => make_nu(&LambdaRule::default(), spec.depth),
    }
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = h.rem_euclid(1.0) * 6.0;
    let c = v * s;
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |u: f64| ((u + m).clamp(0.0, 1.0) * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

/// Hue from `arg F`, black at `F = 0`, bands of `|Im F|`.
fn domain_color(w: Complex64) -> [u8; 3] {
    if !w.re.is_finite() || !w.im.is_finite() {
        return [255, 255, 255];
    }
    let r = w.norm();
    let hue = w.arg() / std::f64::consts::TAU;
    let band = (4.0 * w.im.abs()).fract();
    let v = (r / (r + 0.05)) * (0.75 + 0.25 * band);
    hsv(hue, 0.85, v)
}

/// Dark where `value · lines` is within about a pixel of an integer.
fn line_shade(value: f64, grad: f64, lines: f64, px: f64, tint: [u8; 3]) -> [u8; 3] {
    let v = value * lines;
    let d = (v - v.round()).abs();
    let width = 0.75 * grad * lines * px;
    if d < width {
        [20, 20, 30]
    } else {
        tint
    }
}

fn pixel_value(spec: &RenderSpec, ev: &CauchyEvaluator, i: u32, j: u32) -> [u8; 3] {
    let (x, y) = spec.pixel_center(i, j);
    let z = Complex64::new(x, y);
    if ev.is_pole(z) {
        return [255, 255, 255];
    }
    let [a, b, _, _] = spec.window;
    let px = (b - a) / spec.width as f64;
    match spec.mode {
        RenderMode::DomainColor => domain_color(ev.primitive_direct(z)),
        RenderMode::GreenLines => {
            let g = ev.angle(z);
            line_shade(g, ev.f(z).norm(), spec.lines as f64, px, [245, 240, 225])
        }
        RenderMode::Equipotentials => {
            let g = ev.im_primitive(z);
            line_shade(g, ev.f(z).norm(), spec.lines as f64, px, [225, 235, 245])
        }
        RenderMode::Krueger => unreachable!("handled by render_krueger"),
    }
}

fn fill_rows<F: Fn(u32, u32) -> [u8; 3] + Sync>(spec: &RenderSpec, px: F) -> Vec<u8> {
    let row_len = 3 * spec.width as usize;
    let mut rgb = vec![0u8; row_len * spec.height as usize];
    let work = |(j, row): (usize, &mut [u8])| {
        for i in 0..spec.width {
            let c = px(i, j as u32);
            row[3 * i as usize..3 * i as usize + 3].copy_from_slice(&c);
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        rgb.par_chunks_mut(row_len).enumerate().for_each(work);
    }
    #[cfg(not(feature = "parallel"))]
    {
        rgb.chunks_mut(row_len).enumerate().for_each(work);
    }
    rgb
}

/// Good points of the finger picture inside `[lo, hi]`, sorted.
pub fn krueger_points(address_len: usize, lo: f64, hi: f64) -> Vec<crate::geometry::GoodPoint> {
    let rule = LambdaRule::default();
    let cfg = GoodPointConfig::new(rule.kappa.clone(), 30);
    let mut out: Vec<crate::geometry::GoodPoint> = Vec::new();
    for per_len in 1..=address_len {
        for pre_len in 0..=(address_len - per_len) {
            for per in BinaryWord::all_of_level(per_len) {
                if per.is_constant() {
                    continue;
                }
                for pre in BinaryWord::all_of_level(pre_len) {
                    let addr = CantorAddress::new(pre, per.clone());
                    let x = to_f64(&addr.coordinate());
                    if x < lo || x > hi {
                        continue;
                    }
                    if let Ok(g) = certify_good(&addr, &cfg) {
                        out.push(g);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.x.cmp(&b.x));
    out.dedup_by(|a, b| a.x == b.x);
    out
}

fn render_krueger(spec: &RenderSpec, ev: &CauchyEvaluator) -> Rendered {
    let [a, b, c, d] = spec.window;
    let mut tips = Vec::new();
    let mut bars: Vec<Option<i64>> = vec![None; spec.width as usize];
    for g in krueger_points(spec.address_len, a, b) {
        let x = to_f64(&g.x);
        let height = ev.im_primitive(Complex64::new(x, 0.0));
        let column = spec.column_of(x);
        let row = spec.row_of(height);
        if (0..spec.width as i64).contains(&column) {
            let slot = &mut bars[column as usize];
            // the highest tip wins the column
            *slot = Some(slot.map_or(row, |r| r.min(row)));
        }
        tips.push(KruegerTip { x: fmt_ratio(&g.x), x_f64: x, height, column, row });
    }
    let rgb = fill_rows(spec, |i, j| {
        let (_, y) = spec.pixel_center(i, j);
        match bars[i as usize] {
            Some(top) if j as i64 == top => [200, 30, 30],
            Some(top) if j as i64 > top => [120, 90, 70],
            _ => {
                let t = ((y - c) / (d - c)).clamp(0.0, 1.0);
                let v = (235.0 - 40.0 * t) as u8;
                [v, v, 250]
            }
        }
    });
    Rendered { width: spec.width, height: spec.height, rgb, tips }
}

/// Renders with the global thread pool.
pub fn render_field(spec: &RenderSpec) -> Result<Rendered> {
    spec.validate()?;
    let ev = CauchyEvaluator::new(&truncation(spec)?);
    if spec.mode == RenderMode::Krueger {
        return Ok(render_krueger(spec, &ev));
    }
    let rgb = fill_rows(spec, |i, j| pixel_value(spec, &ev, i, j));
    Ok(Rendered { width: spec.width, height: spec.height, rgb, tips: Vec::new() })
}

/// Renders on a dedicated pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn render_with_threads(spec: &RenderSpec, threads: usize) -> Result<Rendered> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    pool.install(|| render_field(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(mode: RenderMode, base: Base) -> RenderSpec {
        RenderSpec::new([-1.0, 1.0, -1.0, 1.0], 64, 64, base, 6, mode)
    }

    #[test]
    fn centre_is_dark() {
        let r = render_field(&smoke(RenderMode::DomainColor, Base::Mu)).unwrap();
        assert_eq!(r.rgb.len(), 64 * 64 * 3);
        let c = r.pixel(32, 32);
        assert!(c.iter().all(|&v| v < 20), "{c:?}");
        let corner = r.pixel(0, 0);
        assert!(corner.iter().any(|&v| v > 100));
    }

    #[test]
    fn outputs_decode() {
        let r = render_field(&smoke(RenderMode::GreenLines, Base::Mu)).unwrap();
        let png = r.to_png().unwrap();
        let img = image::load_from_memory(&png).unwrap().to_rgb8();
        assert_eq!(img.as_raw(), &r.rgb);
        let ppm = r.to_ppm();
        assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
        render_field(&smoke(RenderMode::Equipotentials, Base::Nu)).unwrap();
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = smoke(RenderMode::DomainColor, Base::Mu);
        s.width = 8;
        assert!(s.validate().is_err());
        let mut s = smoke(RenderMode::DomainColor, Base::Mu);
        s.window = [1.0, -1.0, 0.0, 1.0];
        assert!(s.validate().is_err());
        assert!(smoke(RenderMode::Krueger, Base::Mu).validate().is_err());
    }

    #[test]
    fn finger_tips() {
        let mut s = RenderSpec::new([-0.5, 0.5, -0.2, 0.6], 128, 128, Base::Nu, 10, RenderMode::Krueger);
        s.address_len = 5;
        let r = render_field(&s).unwrap();
        assert!(!r.tips.is_empty());
        for t in &r.tips {
            assert!(t.height.is_finite());
            if (0..128).contains(&t.row) && (0..128).contains(&t.column) {
                assert_ne!(r.pixel(t.column as u32, t.row as u32), [0, 0, 0]);
            }
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn thread_count_does_not_matter() {
        let s = smoke(RenderMode::DomainColor, Base::Nu);
        let a = render_with_threads(&s, 1).unwrap().to_png().unwrap();
        let b = render_with_threads(&s, 4).unwrap().to_png().unwrap();
        assert_eq!(a, b);
    }
}
