use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

/// Row-major linear RGB image with channels nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl ImageBuffer {
    pub fn filled(width: usize, height: usize, color: [f64; 3]) -> Self {
        ImageBuffer {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: [f64; 3]) {
        self.pixels[y * self.width + x] = c;
    }

    /// Interleaved 8-bit RGB bytes.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.map(encode_channel))
            .collect()
    }
}

/// Clamps to `[0, 1]`, scales by 255 and rounds half to even.
pub fn encode_channel(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0).round_ties_even() as u8
}

/// Writes a P6 PPM (`.ppm`) or PNG (`.png`), chosen by extension.
pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if img.pixels.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("image contains non-finite values".into()));
    }
    let bytes = img.to_rgb8();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("ppm") => {
            let file = fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
            let mut w = BufWriter::new(file);
            write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
            w.write_all(&bytes)?;
            w.flush()?;
            Ok(())
        }
        Some("png") => {
            image::save_buffer(
                path,
                &bytes,
                img.width as u32,
                img.height as u32,
                image::ExtendedColorType::Rgb8,
            )
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io_at(path, io),
                other => other.into(),
            })
        }
        _ => Err(Error::Parameter(format!(
            "unsupported image extension for {}, use .ppm or .png",
            path.display()
        ))),
    }
}

/// Reads a PPM or PNG back into `[0, 1]` channels.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let img = image::open(path)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io_at(path, io),
            other => other.into(),
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let pixels = img
        .pixels()
        .map(|p| p.0.map(|b| b as f64 / 255.0))
        .collect();
    Ok(ImageBuffer {
        width: w as usize,
        height: h as usize,
        pixels,
    })
}

/// CSV with a header row; fields are quoted per RFC 4180 when needed.
pub fn write_csv<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON array of objects.
pub fn write_json<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json`, returning both paths.
pub fn write_table<T: Serialize>(rows: &[T], stem: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let stem = stem.as_ref();
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    write_csv(rows, &csv_path)?;
    write_json(rows, &json_path)?;
    Ok((csv_path, json_path))
}

/// Sidecar describing how a report was produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the effective configuration's canonical JSON.
    pub config_hash: String,
}

pub fn write_metadata(meta: &ReportMetadata, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}
