//! Binary PPM heatmaps over a fixed 8-colour viridis ramp.

use std::io::Write;
use std::path::Path;

use unified_ipp::Pose;

pub const RAMP: [[u8; 3]; 8] = [
    [68, 1, 84],
    [70, 50, 126],
    [54, 92, 141],
    [39, 127, 142],
    [31, 161, 135],
    [74, 193, 109],
    [160, 218, 57],
    [253, 231, 37],
];

pub const PATH_COLOR: [u8; 3] = [255, 0, 0];

/// Ramp colour for `v`, clamped to [0, 1]; NaN maps to the bottom colour.
pub fn ramp_color(v: f64) -> [u8; 3] {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let x = v * (RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(RAMP.len() - 2);
    let t = x - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    std::array::from_fn(|k| (a[k] as f64 + t * (b[k] as f64 - a[k] as f64)).round() as u8)
}

/// P6 image bytes; each cell becomes a `scale x scale` block.
pub fn heatmap_ppm(values: &[f64], width: usize, height: usize, overlay: Option<&[Pose]>, scale: usize) -> Vec<u8> {
    assert_eq!(values.len(), width * height, "grid size mismatch");
    let scale = scale.max(1);
    let mut cells: Vec<[u8; 3]> = values.iter().map(|v| ramp_color(*v)).collect();
    for p in overlay.unwrap_or(&[]) {
        if p.x < width && p.y < height {
            cells[p.y * width + p.x] = PATH_COLOR;
        }
    }
    let (w, h) = (width * scale, height * scale);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            out.extend_from_slice(&cells[(y / scale) * width + x / scale]);
        }
    }
    out
}

pub fn render_heatmap(
    values: &[f64],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
    overlay: Option<&[Pose]>,
    scale: usize,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&heatmap_ppm(values, width, height, overlay, scale))
}
