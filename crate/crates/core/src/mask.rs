//! Image-sized road masks, binary or confidence-valued.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageBuffer, ImageFormat, Luma};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("mask shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(u32, u32, u32, u32),
    #[error("value {value} at index {index} is not valid for a {kind:?} mask")]
    InvalidValue { index: usize, value: f64, kind: MaskKind },
    #[error("data length {got} does not match {width}x{height}")]
    BadLength { width: u32, height: u32, got: usize },
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaskKind {
    /// Values are exactly 0.0 or 1.0.
    Binary,
    /// Values anywhere in `[0, 1]`.
    Confidence,
}

/// Row-major `height x width` grid of road values.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadMask {
    width: u32,
    height: u32,
    kind: MaskKind,
    data: Vec<f64>,
}

impl RoadMask {
    pub fn zeros(width: u32, height: u32, kind: MaskKind) -> Self {
        Self { width, height, kind, data: vec![0.0; width as usize * height as usize] }
    }

    pub fn from_vec(width: u32, height: u32, kind: MaskKind, data: Vec<f64>) -> Result<Self, MaskError> {
        if data.len() != width as usize * height as usize {
            return Err(MaskError::BadLength { width, height, got: data.len() });
        }
        for (index, &value) in data.iter().enumerate() {
            let ok = match kind {
                MaskKind::Binary => value == 0.0 || value == 1.0,
                MaskKind::Confidence => (0.0..=1.0).contains(&value),
            };
            if !ok {
                return Err(MaskError::InvalidValue { index, value, kind });
            }
        }
        Ok(Self { width, height, kind, data })
    }

    pub fn from_bools(width: u32, height: u32, bits: &[bool]) -> Result<Self, MaskError> {
        let data = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::from_vec(width, height, MaskKind::Binary, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn same_shape(&self, other: &RoadMask) -> Result<(), MaskError> {
        if self.width != other.width || self.height != other.height {
            return Err(MaskError::ShapeMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Pixels with a value strictly above zero.
    pub fn support(&self) -> Vec<bool> {
        self.data.iter().map(|&v| v > 0.0).collect()
    }

    pub fn count_positive(&self) -> usize {
        self.data.iter().filter(|&&v| v > 0.0).count()
    }

    /// Multiplies every value by `c` (`c` in `[0, 1]`); binary masks become confidence masks.
    pub fn scaled(&self, c: f64) -> RoadMask {
        assert!((0.0..=1.0).contains(&c), "scale {c} outside [0, 1]");
        RoadMask {
            width: self.width,
            height: self.height,
            kind: MaskKind::Confidence,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// 8-bit grayscale: binary as {0, 255}, confidence as round(255 * p).
    pub fn to_gray(&self) -> GrayImage {
        let px = self.data.iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
        GrayImage::from_raw(self.width, self.height, px).expect("buffer sized from mask")
    }

    pub fn from_gray(img: &GrayImage, kind: MaskKind) -> RoadMask {
        let data = img
            .as_raw()
            .iter()
            .map(|&v| match kind {
                MaskKind::Binary => {
                    if v >= 128 {
                        1.0
                    } else {
                        0.0
                    }
                }
                MaskKind::Confidence => v as f64 / 255.0,
            })
            .collect();
        RoadMask { width: img.width(), height: img.height(), kind, data }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, MaskError> {
        let mut out = Cursor::new(Vec::new());
        self.to_gray().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), MaskError> {
        std::fs::write(path.as_ref(), self.encode_png()?).map_err(|e| MaskError::Image(image::ImageError::IoError(e)))
    }

    pub fn load_png(path: impl AsRef<Path>, kind: MaskKind) -> Result<RoadMask, MaskError> {
        let img = image::open(path)?.to_luma8();
        Ok(Self::from_gray(&img, kind))
    }
}

/// Writes a label map as a 16-bit single-channel PNG.
pub fn save_labels_png(width: u32, height: u32, labels: &[u32], path: impl AsRef<Path>) -> Result<(), MaskError> {
    let px: Vec<u16> = labels.iter().map(|&l| l.min(u16::MAX as u32) as u16).collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width, height, px).expect("buffer sized from labels");
    img.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}
