//! Quality metrics and synthetic test-data generation.
//!
//! PSNR and SSIM follow the usual conventions for intensities in [0, 1]:
//! PSNR with peak 1, SSIM with an 11x11 Gaussian window (sigma 1.5) and
//! stabilizers C1 = 0.01^2, C2 = 0.03^2, averaged over the windows fully
//! inside the image.

use std::io::Write;

use crate::error::{Error, Result};
use crate::image::{clip_image, FrameSequence, Image};
use crate::interp::{bicubic_resize, bicubic_sample};
use crate::par::{self, prelude::*};

#[derive(Debug, Clone, Copy)]
pub struct EvalResult {
    pub psnr: f64,
    pub ssim: f64,
    pub frame_index: usize,
    pub crop_margin: usize,
}

/// Peak signal-to-noise ratio in dB for a peak value of 1.0. Identical
/// images yield `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::dims(
            "psnr",
            format!("{}x{}", a.width(), a.height()),
            format!("{}x{}", b.width(), b.height()),
        ));
    }
    let mse = par::dist_sq(a.data(), b.data()) / a.pixel_count() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

fn ssim_window_weights() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as i64;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for dy in -r..=r {
        for dx in -r..=r {
            w.push((-((dx * dx + dy * dy) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Mean local SSIM over all fully interior 11x11 windows.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::dims(
            "ssim",
            format!("{}x{}", a.width(), a.height()),
            format!("{}x{}", b.width(), b.height()),
        ));
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::param(
            "ssim",
            format!("image {}x{} smaller than the {0}x{0} window", w, SSIM_WINDOW),
        ));
    }
    let weights = ssim_window_weights();
    let out_w = w - SSIM_WINDOW + 1;
    let out_h = h - SSIM_WINDOW + 1;
    let mut local = vec![0.0; out_w * out_h];
    par::chunks_mut(&mut local, out_w).enumerate().for_each(|(oy, row)| {
        for (ox, out) in row.iter_mut().enumerate() {
            let (mut mu_a, mut mu_b) = (0.0, 0.0);
            let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
            let mut k = 0;
            for dy in 0..SSIM_WINDOW {
                let base = (oy + dy) * w + ox;
                for dx in 0..SSIM_WINDOW {
                    let va = a.data()[base + dx];
                    let vb = b.data()[base + dx];
                    let wt = weights[k];
                    k += 1;
                    mu_a += wt * va;
                    mu_b += wt * vb;
                    aa += wt * va * va;
                    bb += wt * vb * vb;
                    ab += wt * va * vb;
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            *out = ((2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2));
        }
    });
    Ok(par::sum(&local) / local.len() as f64)
}

/// Metrics on the central frame (index floor(n/2)) after cropping `crop`
/// pixels from every side.
pub fn evaluate_central(
    result: &FrameSequence,
    truth: &FrameSequence,
    crop: usize,
) -> Result<EvalResult> {
    if result.len() != truth.len() {
        return Err(Error::dims("evaluate_central", truth.len(), result.len()));
    }
    if result.width() != truth.width() || result.height() != truth.height() {
        return Err(Error::dims(
            "evaluate_central",
            format!("{}x{}", truth.width(), truth.height()),
            format!("{}x{}", result.width(), result.height()),
        ));
    }
    if 2 * crop >= result.width().min(result.height()) {
        return Err(Error::param(
            "crop",
            format!("2*{} exceeds min dimension {}", crop, result.width().min(result.height())),
        ));
    }
    let idx = result.len() / 2;
    let w = result.width() - 2 * crop;
    let h = result.height() - 2 * crop;
    let rc = result.frame(idx).crop(crop, crop, w, h)?;
    let tc = truth.frame(idx).crop(crop, crop, w, h)?;
    Ok(EvalResult {
        psnr: psnr(&rc, &tc)?,
        ssim: ssim(&rc, &tc)?,
        frame_index: idx,
        crop_margin: crop,
    })
}

/// Degrades a ground-truth sequence: bicubic resize of each frame to
/// floor(dims / factor), clipped back to [0, 1].
pub fn generate_lowres(truth: &FrameSequence, factor: f64) -> Result<FrameSequence> {
    if factor <= 1.0 {
        return Err(Error::param("factor", "must be > 1"));
    }
    let lw = (truth.width() as f64 / factor).floor() as usize;
    let lh = (truth.height() as f64 / factor).floor() as usize;
    if lw < 8 || lh < 8 {
        return Err(Error::param(
            "factor",
            format!("low-res dims {}x{} too small", lw, lh),
        ));
    }
    truth.map(|f| clip_image(&bicubic_resize(f, lw, lh), 0.0, 1.0))
}

/// Synthesizes an n-frame sequence by translating a fixed crop window over
/// `base` by `shift` per frame. Frame k samples base at offset k*shift, so
/// the inter-frame motion is exactly known. Errors when the translated
/// window would leave the base image (2-pixel interpolation margin
/// included).
pub fn synth_translation_sequence(
    base: &Image,
    n: usize,
    shift: (f64, f64),
) -> Result<FrameSequence> {
    if n == 0 {
        return Err(Error::param("n", "need at least one frame"));
    }
    let (sx, sy) = shift;
    if !sx.is_finite() || !sy.is_finite() {
        return Err(Error::NonFinite { context: "synth_translation_sequence" });
    }
    let span_x = sx * (n - 1) as f64;
    let span_y = sy * (n - 1) as f64;
    let margin = 2.0; // bicubic stencil reach
    let lo_x = margin + (-span_x).max(0.0);
    let lo_y = margin + (-span_y).max(0.0);
    let hi_pad_x = margin + span_x.max(0.0);
    let hi_pad_y = margin + span_y.max(0.0);
    let w = base.width() as f64 - lo_x.ceil() - hi_pad_x.ceil();
    let h = base.height() as f64 - lo_y.ceil() - hi_pad_y.ceil();
    if w < 1.0 || h < 1.0 {
        return Err(Error::param(
            "shift",
            "translated window exits the base image",
        ));
    }
    let (w, h) = (w as usize, h as usize);
    let (ox, oy) = (lo_x.ceil(), lo_y.ceil());
    let frames = (0..n)
        .map(|k| {
            let dx = ox + k as f64 * sx;
            let dy = oy + k as f64 * sy;
            Image::from_fn(w, h, |x, y| bicubic_sample(base, x as f64 + dx, y as f64 + dy))
        })
        .collect();
    FrameSequence::new(frames)
}

/// One line of the metrics report.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub sequence: String,
    pub method: String,
    pub frame: usize,
    pub psnr: f64,
    pub ssim: f64,
}

/// Writes rows as CSV with a `sequence,method,frame,psnr,ssim` header.
pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "sequence,method,frame,psnr,ssim")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.sequence, r.method, r.frame, r.psnr, r.ssim)?;
    }
    Ok(())
}
