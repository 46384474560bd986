//! Shared fixtures for the integration and acceptance suites.

use mmc::image::Image;
use mmc::interp::gaussian_smooth;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random texture stretched to a healthy contrast range.
pub fn textured(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Image::from_fn(w, h, |_, _| rng.gen_range(0.0..1.0));
    let s = gaussian_smooth(&noise, 1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in s.data() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Image::from_data(w, h, s.data().iter().map(|&v| (v - lo) / (hi - lo)).collect()).unwrap()
}

/// Text-like strokes over a mid-frequency background. Stroke widths of 4+
/// pixels survive 4x decimation as trackable blobs while their sharp edges
/// carry the high-frequency detail super-resolution recovers.
pub fn textlike(w: usize, h: usize, seed: u64) -> Image {
    let stroke = 4usize;
    let pitch = 16usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg = {
        let noise = Image::from_fn(w, h, |_, _| rng.gen_range(0.0..1.0));
        gaussian_smooth(&noise, 3.0)
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in bg.data() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut img = Image::from_data(
        w,
        h,
        bg.data().iter().map(|&v| 0.5 + 0.4 * (v - lo) / (hi - lo)).collect(),
    )
    .unwrap();
    let rows = h / pitch;
    let glyph_h = pitch * 2 / 3;
    for r in 0..rows {
        let y0 = r * pitch + pitch / 4;
        let mut x = 4usize;
        while x + 2 * stroke + 4 < w {
            let gw = rng.gen_range(stroke + 1..2 * stroke + 1);
            for gx in 0..stroke.min(gw) {
                for gy in 0..glyph_h {
                    if y0 + gy < h && x + gx < w {
                        img.set(x + gx, y0 + gy, 0.1);
                    }
                }
            }
            for bar in 0..2 {
                if rng.gen_bool(0.7) {
                    let by = bar * (glyph_h.saturating_sub(stroke));
                    for gx in 0..gw {
                        for t in 0..stroke {
                            if y0 + by + t < h && x + gx < w {
                                img.set(x + gx, y0 + by + t, 0.1);
                            }
                        }
                    }
                }
            }
            x += gw + rng.gen_range(3..6);
        }
    }
    img
}

/// `moving(x) = base(x - shift)` via clamped bicubic sampling.
pub fn shifted(base: &Image, sx: f64, sy: f64) -> Image {
    Image::from_fn(base.width(), base.height(), |x, y| {
        mmc::interp::bicubic_sample_clamped(base, x as f64 - sx, y as f64 - sy)
    })
}

/// Mean endpoint error against a constant true flow over the interior.
pub fn interior_epe(flow: &mmc::FlowField, tx: f64, ty: f64, border: usize) -> f64 {
    let (w, h) = (flow.width(), flow.height());
    let mut total = 0.0;
    let mut count = 0usize;
    for y in border..h - border {
        for x in border..w - border {
            let dx = flow.vx().get(x, y) - tx;
            let dy = flow.vy().get(x, y) - ty;
            total += (dx * dx + dy * dy).sqrt();
            count += 1;
        }
    }
    total / count as f64
}

/// Truth sequence cropped so its dimensions are an exact multiple of the
/// factor (keeps hi_dims(generate_lowres(truth)) == truth dims).
pub fn factor_aligned(seq: &mmc::FrameSequence, factor: usize) -> mmc::FrameSequence {
    let w = seq.width() / factor * factor;
    let h = seq.height() / factor * factor;
    seq.map(|f| f.crop(0, 0, w, h).unwrap()).unwrap()
}
