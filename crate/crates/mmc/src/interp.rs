//! Bicubic sampling, resizing and Gaussian smoothing.
//!
//! One interpolation convention is used everywhere in the crate: the Keys
//! cubic kernel with a = −0.5, replicate borders, and a corner-anchored
//! coordinate mapping for resizing (output pixel `i` samples the input at
//! `i / scale`). The corner anchor keeps resized grids on the same lattice
//! as the decimation operator, so degraded data, initialization and the
//! forward model all agree on pixel positions.

use crate::image::Image;
use crate::par::{self, prelude::*};

/// Keys cubic kernel, a = −0.5.
#[inline]
pub fn cubic_kernel(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * (t * t * t - 5.0 * t * t + 8.0 * t - 4.0)
    } else {
        0.0
    }
}

/// The four tap weights for a sample at fractional offset `fx` in [0, 1),
/// corresponding to source offsets {−1, 0, 1, 2} from `floor(x)`.
#[inline]
pub(crate) fn cubic_weights(fx: f64) -> [f64; 4] {
    [
        cubic_kernel(fx + 1.0),
        cubic_kernel(fx),
        cubic_kernel(1.0 - fx),
        cubic_kernel(2.0 - fx),
    ]
}

#[inline]
fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Bicubic sample at `(x, y)` with taps clamped to the image (replicate
/// border). Coordinates may lie outside the image; they are not clamped
/// here, only the stencil taps are.
pub fn bicubic_sample(img: &Image, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let wx = cubic_weights(x - x0);
    let wy = cubic_weights(y - y0);
    let (w, h) = (img.width(), img.height());
    let mut acc = 0.0;
    for (j, &wyj) in wy.iter().enumerate() {
        let yy = clamp_index(y0 as i64 + j as i64 - 1, h);
        let row = &img.data()[yy * w..(yy + 1) * w];
        let mut rv = 0.0;
        for (i, &wxi) in wx.iter().enumerate() {
            let xx = clamp_index(x0 as i64 + i as i64 - 1, w);
            rv += wxi * row[xx];
        }
        acc += wyj * rv;
    }
    acc
}

/// Like [`bicubic_sample`] but with the sample position itself clamped to
/// the image domain first, matching the warping-operator convention.
pub fn bicubic_sample_clamped(img: &Image, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, img.width() as f64 - 1.0);
    let y = y.clamp(0.0, img.height() as f64 - 1.0);
    bicubic_sample(img, x, y)
}

/// Bicubic resize to explicit output dimensions.
pub fn bicubic_resize(img: &Image, out_w: usize, out_h: usize) -> Image {
    assert!(out_w > 0 && out_h > 0);
    let sx = out_w as f64 / img.width() as f64;
    let sy = out_h as f64 / img.height() as f64;
    let mut out = vec![0.0; out_w * out_h];
    par::chunks_mut(&mut out, out_w).enumerate().for_each(|(y, row)| {
        let py = y as f64 / sy;
        for (x, v) in row.iter_mut().enumerate() {
            let px = x as f64 / sx;
            *v = bicubic_sample(img, px, py);
        }
    });
    Image::from_data(out_w, out_h, out).expect("resize dims are positive")
}

/// Warps `img` by a displacement field: `out(x) = img(x + v(x))`, sampled
/// bicubically with clamped coordinates.
pub fn warp_image(img: &Image, vx: &Image, vy: &Image) -> Image {
    assert!(img.same_dims(vx) && img.same_dims(vy));
    let w = img.width();
    let mut out = vec![0.0; img.pixel_count()];
    par::chunks_mut(&mut out, w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let dx = vx.get(x, y);
            let dy = vy.get(x, y);
            *v = bicubic_sample_clamped(img, x as f64 + dx, y as f64 + dy);
        }
    });
    Image::from_data(w, img.height(), out).unwrap()
}

/// Normalized 1-D Gaussian taps for offsets −r..=r with r = ceil(3σ).
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let r = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    for v in &mut k {
        *v /= s;
    }
    k
}

#[inline]
fn mirror_index(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    // Whole-sample symmetric reflection (edge pixel duplicated).
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Separable Gaussian smoothing with symmetric (mirrored) borders.
pub fn gaussian_smooth(img: &Image, sigma: f64) -> Image {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let (w, h) = (img.width(), img.height());

    // Horizontal pass.
    let mut tmp = vec![0.0; w * h];
    par::chunks_mut(&mut tmp, w).enumerate().for_each(|(y, row)| {
        let src = &img.data()[y * w..(y + 1) * w];
        for (x, v) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &kv) in k.iter().enumerate() {
                acc += kv * src[mirror_index(x as i64 + j as i64 - r, w)];
            }
            *v = acc;
        }
    });

    // Vertical pass.
    let mut out = vec![0.0; w * h];
    par::chunks_mut(&mut out, w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &kv) in k.iter().enumerate() {
                let yy = mirror_index(y as i64 + j as i64 - r, h);
                acc += kv * tmp[yy * w + x];
            }
            *v = acc;
        }
    });
    Image::from_data(w, h, out).unwrap()
}

/// Central-difference gradient with replicate borders.
pub fn central_gradient(img: &Image) -> (Image, Image) {
    let (w, h) = (img.width(), img.height());
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    par::chunks_mut(&mut gx, w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            *v = 0.5 * (img.get(xp, y) - img.get(xm, y));
        }
    });
    par::chunks_mut(&mut gy, w).enumerate().for_each(|(y, row)| {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for (x, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (img.get(x, yp) - img.get(x, ym));
        }
    });
    (
        Image::from_data(w, h, gx).unwrap(),
        Image::from_data(w, h, gy).unwrap(),
    )
}
