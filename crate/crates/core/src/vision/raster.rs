//! Grayscale contour rasters and PGM/PNG round-tripping.

use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("no atoms to rasterize")]
    Empty,
    #[error("degenerate bounding box: {0}")]
    DegenerateBounds(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("unsupported raster format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed PGM file: {0}")]
    MalformedPgm(String),
}

/// A grayscale image tied to physical coordinates.
///
/// Row 0 is the minimum-y edge; PGM/PNG export flips vertically so images
/// render with y up.
#[derive(Debug, Clone)]
pub struct ContourRaster {
    pub width: usize,
    pub height: usize,
    /// Physical size of one pixel (Å/pixel).
    pub scale: f64,
    /// Physical coordinate of the low corner of pixel (0, 0), in Å.
    pub origin: (f64, f64),
    /// Row-major intensities, `height × width`.
    pub data: Vec<u8>,
}

impl ContourRaster {
    pub fn new(width: usize, height: usize, scale: f64, origin: (f64, f64)) -> Self {
        ContourRaster {
            width,
            height,
            scale,
            origin,
            data: vec![0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Physical coordinate of a pixel center.
    pub fn pixel_center(&self, x: usize, y: usize) -> (f64, f64) {
        (
            self.origin.0 + (x as f64 + 0.5) * self.scale,
            self.origin.1 + (y as f64 + 0.5) * self.scale,
        )
    }

    /// Write as binary PGM (P5) or PNG depending on the file extension.
    pub fn save(&self, path: &Path) -> Result<(), RasterError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => self.save_pgm(path),
            Some("png") => self.save_png(path),
            other => Err(RasterError::UnsupportedFormat(format!("{other:?}"))),
        }
    }

    fn flipped_rows(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len());
        for y in (0..self.height).rev() {
            out.extend_from_slice(&self.data[y * self.width..(y + 1) * self.width]);
        }
        out
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), RasterError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
        f.write_all(&self.flipped_rows())?;
        Ok(())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        let img = image::GrayImage::from_raw(
            self.width as u32,
            self.height as u32,
            self.flipped_rows(),
        )
        .expect("buffer size matches dimensions");
        img.save(path)?;
        Ok(())
    }

    /// Load a PGM or PNG written by [`ContourRaster::save`]. Physical scale
    /// and origin are not stored in the image; the caller supplies them.
    pub fn load(path: &Path, scale: f64, origin: (f64, f64)) -> Result<Self, RasterError> {
        let (width, height, top_down) = match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => Self::load_pgm_raw(path)?,
            Some("png") => {
                let img = image::open(path)?.to_luma8();
                (img.width() as usize, img.height() as usize, img.into_raw())
            }
            other => return Err(RasterError::UnsupportedFormat(format!("{other:?}"))),
        };
        // undo the vertical flip applied on save
        let mut data = Vec::with_capacity(top_down.len());
        for y in (0..height).rev() {
            data.extend_from_slice(&top_down[y * width..(y + 1) * width]);
        }
        Ok(ContourRaster {
            width,
            height,
            scale,
            origin,
            data,
        })
    }

    fn load_pgm_raw(path: &Path) -> Result<(usize, usize, Vec<u8>), RasterError> {
        let bytes = std::fs::read(path)?;
        let mut header_fields = Vec::new();
        let mut pos = 0;
        // P5, width, height, maxval, then a single whitespace byte before data
        while header_fields.len() < 4 && pos < bytes.len() {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            header_fields.push(
                std::str::from_utf8(&bytes[start..pos])
                    .map_err(|_| RasterError::MalformedPgm("non-utf8 header".into()))?
                    .to_string(),
            );
        }
        if header_fields.len() != 4 || header_fields[0] != "P5" {
            return Err(RasterError::MalformedPgm("expected P5 header".into()));
        }
        pos += 1; // single whitespace after maxval
        let width: usize = header_fields[1]
            .parse()
            .map_err(|_| RasterError::MalformedPgm("bad width".into()))?;
        let height: usize = header_fields[2]
            .parse()
            .map_err(|_| RasterError::MalformedPgm("bad height".into()))?;
        let data = bytes[pos..].to_vec();
        if data.len() != width * height {
            return Err(RasterError::MalformedPgm(format!(
                "expected {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok((width, height, data))
    }
}

/// Splat flagged atom positions (x, y in Å) into a grayscale raster.
///
/// Each atom becomes a filled disc of the given radius at intensity 255.
/// The raster covers `bounds` = (x_min, y_min, x_max, y_max) so frames of
/// one run share a common pixel grid.
pub fn rasterize(
    positions: &[(f64, f64)],
    resolution: f64,
    disc_radius: f64,
    bounds: (f64, f64, f64, f64),
) -> Result<ContourRaster, RasterError> {
    if resolution <= 0.0 {
        return Err(RasterError::BadResolution(resolution));
    }
    if positions.is_empty() {
        return Err(RasterError::Empty);
    }
    let (x0, y0, x1, y1) = bounds;
    if !(x1 > x0 && y1 > y0) {
        return Err(RasterError::DegenerateBounds(format!("{bounds:?}")));
    }
    let width = ((x1 - x0) / resolution).ceil() as usize;
    let height = ((y1 - y0) / resolution).ceil() as usize;
    if width == 0 || height == 0 {
        return Err(RasterError::DegenerateBounds(format!("{bounds:?}")));
    }
    let mut raster = ContourRaster::new(width, height, resolution, (x0, y0));
    let r_px = disc_radius / resolution;
    for &(ax, ay) in positions {
        let cx = (ax - x0) / resolution;
        let cy = (ay - y0) / resolution;
        let x_lo = ((cx - r_px).floor().max(0.0)) as usize;
        let x_hi = ((cx + r_px).ceil().min(width as f64 - 1.0)) as usize;
        let y_lo = ((cy - r_px).floor().max(0.0)) as usize;
        let y_hi = ((cy + r_px).ceil().min(height as f64 - 1.0)) as usize;
        for py in y_lo..=y_hi {
            for px in x_lo..=x_hi {
                let dx = px as f64 + 0.5 - cx;
                let dy = py as f64 + 0.5 - cy;
                if dx * dx + dy * dy <= r_px * r_px {
                    raster.set(px, py, 255);
                }
            }
        }
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_disc() {
        let r = rasterize(&[(5.0, 5.0)], 1.0, 1.5, (0.0, 0.0, 10.0, 10.0)).unwrap();
        assert_eq!(r.get(4, 4), 255); // pixel containing (5,5) has center (4.5,4.5)
        assert_eq!(r.get(9, 9), 0);
        let lit = r.data.iter().filter(|&&v| v > 0).count();
        assert!(lit > 1 && lit < 20, "disc size {lit}");
    }

    #[test]
    fn two_atoms_disc_spacing() {
        let r = rasterize(&[(2.0, 5.0), (12.0, 5.0)], 1.0, 1.0, (0.0, 0.0, 20.0, 10.0)).unwrap();
        // centers land in pixels 1 and 11 of row 4: 10 px apart
        assert_eq!(r.get(1, 4), 255);
        assert_eq!(r.get(11, 4), 255);
        assert_eq!(r.get(6, 4), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(rasterize(&[(0.0, 0.0)], -1.0, 1.0, (0.0, 0.0, 1.0, 1.0)).is_err());
        assert!(rasterize(&[], 1.0, 1.0, (0.0, 0.0, 1.0, 1.0)).is_err());
        assert!(rasterize(&[(0.0, 0.0)], 1.0, 1.0, (0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let mut r = ContourRaster::new(7, 5, 1.0, (0.0, 0.0));
        r.set(3, 2, 200);
        r.set(0, 4, 17);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.pgm");
        r.save(&path).unwrap();
        let back = ContourRaster::load(&path, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(back.data, r.data);
    }

    #[test]
    fn png_round_trip() {
        let mut r = ContourRaster::new(9, 4, 0.5, (1.0, 2.0));
        r.set(8, 0, 255);
        r.set(2, 3, 90);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.png");
        r.save(&path).unwrap();
        let back = ContourRaster::load(&path, 0.5, (1.0, 2.0)).unwrap();
        assert_eq!(back.data, r.data);
    }
}
