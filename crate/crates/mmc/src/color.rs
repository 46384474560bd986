//! Full-range BT.601 YCbCr conversion.
//!
//! Chroma channels are centered at 0.5 so that a neutral gray maps to
//! (y, 0.5, 0.5). The inverse uses the exact reciprocal coefficients, so a
//! round trip reproduces the input to floating-point precision.

use crate::error::{Error, Result};
use crate::image::Image;

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Converts planar RGB (values in [0,1]) to YCbCr with chroma offset 0.5.
pub fn to_ycbcr(r: &Image, g: &Image, b: &Image) -> Result<(Image, Image, Image)> {
    if !r.same_dims(g) || !r.same_dims(b) {
        return Err(Error::dims(
            "to_ycbcr",
            format!("{}x{}", r.width(), r.height()),
            "mismatched channel dims",
        ));
    }
    let (w, h) = (r.width(), r.height());
    let n = w * h;
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        let (rv, gv, bv) = (r.data()[i], g.data()[i], b.data()[i]);
        let yv = KR * rv + KG * gv + KB * bv;
        y.push(yv);
        cb.push(0.5 + 0.5 * (bv - yv) / (1.0 - KB));
        cr.push(0.5 + 0.5 * (rv - yv) / (1.0 - KR));
    }
    Ok((
        Image::from_data(w, h, y)?,
        Image::from_data(w, h, cb)?,
        Image::from_data(w, h, cr)?,
    ))
}

/// Inverse of [`to_ycbcr`].
pub fn from_ycbcr(y: &Image, cb: &Image, cr: &Image) -> Result<(Image, Image, Image)> {
    if !y.same_dims(cb) || !y.same_dims(cr) {
        return Err(Error::dims(
            "from_ycbcr",
            format!("{}x{}", y.width(), y.height()),
            "mismatched channel dims",
        ));
    }
    let (w, h) = (y.width(), y.height());
    let n = w * h;
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let yv = y.data()[i];
        let cbv = cb.data()[i] - 0.5;
        let crv = cr.data()[i] - 0.5;
        let rv = yv + crv * (1.0 - KR) / 0.5;
        let bv = yv + cbv * (1.0 - KB) / 0.5;
        let gv = (yv - KR * rv - KB * bv) / KG;
        r.push(rv);
        g.push(gv);
        b.push(bv);
    }
    Ok((
        Image::from_data(w, h, r)?,
        Image::from_data(w, h, g)?,
        Image::from_data(w, h, b)?,
    ))
}
