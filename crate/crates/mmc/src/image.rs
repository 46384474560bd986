//! Single-channel raster images and frame sequences.
//!
//! Pixels are `f64` intensities with a nominal range of `[0, 1]`, stored
//! row-major (`data[y * width + x]`). The row-major order is fixed repo-wide:
//! every operator matrix in [`crate::linops`] indexes pixels the same way.

use crate::error::{Error, Result};

/// A single-channel floating-point image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    /// Creates an image from row-major pixel data.
    pub fn from_data(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image dims", "width and height must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::dims("Image::from_data", width * height, data.len()));
        }
        Ok(Image { width, height, data })
    }

    /// Creates an image filled with a constant value.
    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0)
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] = v;
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Extracts the rectangle with top-left corner `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::dims(
                "Image::crop",
                format!("{}x{}", self.width, self.height),
                format!("crop {}x{} at ({}, {})", w, h, x0, y0),
            ));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Image::from_data(w, h, data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert!(self.same_dims(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Clamps every pixel to `[lo, hi]`.
pub fn clip_image(img: &Image, lo: f64, hi: f64) -> Image {
    assert!(lo < hi, "clip range must satisfy lo < hi");
    let data = img.data().iter().map(|&v| v.clamp(lo, hi)).collect();
    Image {
        width: img.width,
        height: img.height,
        data,
    }
}

/// An ordered list of same-sized frames.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<Image>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Image>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::param("frames", "sequence must contain at least one frame"));
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        for (i, f) in frames.iter().enumerate() {
            if f.width() != w || f.height() != h {
                return Err(Error::dims(
                    "FrameSequence::new",
                    format!("{}x{}", w, h),
                    format!("{}x{} at frame {}", f.width(), f.height(), i),
                ));
            }
        }
        Ok(FrameSequence { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    /// Pixels per frame.
    pub fn frame_pixels(&self) -> usize {
        self.width() * self.height()
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &Image {
        &self.frames[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Image> {
        self.frames.iter()
    }

    /// Concatenates all frames into one vector (frame-major order).
    pub fn stack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len() * self.frame_pixels());
        for f in &self.frames {
            v.extend_from_slice(f.data());
        }
        v
    }

    /// Rebuilds a sequence from a stacked vector produced by [`stack`](Self::stack).
    pub fn from_stack(width: usize, height: usize, n: usize, stacked: &[f64]) -> Result<Self> {
        let px = width * height;
        if stacked.len() != n * px {
            return Err(Error::dims("FrameSequence::from_stack", n * px, stacked.len()));
        }
        let frames = (0..n)
            .map(|i| Image::from_data(width, height, stacked[i * px..(i + 1) * px].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        FrameSequence::new(frames)
    }

    pub fn map(&self, f: impl Fn(&Image) -> Image) -> Result<FrameSequence> {
        FrameSequence::new(self.frames.iter().map(f).collect())
    }
}
