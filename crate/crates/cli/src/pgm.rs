//! Plain (P2) grayscale images.

use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

/// P2 text with maxval 255, one image row per line.
pub fn encode(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in pixels.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

/// Pixel round(255·K(i, j)); entries must lie in [0, 1].
pub fn kernel_image(values: &DMatrix<f64>) -> CliResult<Vec<u8>> {
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(CliError::Config(format!("kernel entry {v} outside [0, 1]")));
    }
    let (h, w) = values.shape();
    let pixels: Vec<u8> = (0..h).flat_map(|i| (0..w).map(move |j| (255.0 * values[(i, j)]).round() as u8)).collect();
    Ok(encode(w, h, &pixels))
}

/// +1 → 255, −1 → 0, gap → 128.
pub fn region_image(rows: &[Vec<i8>]) -> CliResult<Vec<u8>> {
    let w = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != w) {
        return Err(CliError::Config("region rows have different lengths".into()));
    }
    let pixels: Vec<u8> = rows
        .iter()
        .flatten()
        .map(|&l| match l {
            1 => 255,
            -1 => 0,
            _ => 128,
        })
        .collect();
    Ok(encode(w, rows.len(), &pixels))
}
