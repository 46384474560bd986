//! Linear operators with exact adjoints.
//!
//! Every operator here is backed by an explicit sparse matrix (or a
//! block-diagonal tiling of one), so the adjoint is the literal transpose
//! and the row/column absolute sums used for solver preconditioning are
//! exact, not bounds.
//!
//! Images enter operators as row-major vectors; sequences as frame-major
//! stacks (see [`crate::image::FrameSequence::stack`]).

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{FlowDirection, FlowField, FlowSet};
use crate::interp::{cubic_weights, gaussian_kernel};
use crate::sparse::SparseMatrix;

pub trait LinearOperator: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// y = K x.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// x = Kᵀ y.
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]);

    /// y += coef · K x.
    fn apply_scaled_add(&self, coef: f64, x: &[f64], y: &mut [f64]);

    /// x += coef · Kᵀ y.
    fn apply_adjoint_scaled_add(&self, coef: f64, y: &[f64], x: &mut [f64]);

    /// Per-row sums of absolute entries.
    fn row_abs_sums(&self) -> Vec<f64>;

    /// Per-column sums of absolute entries.
    fn col_abs_sums(&self) -> Vec<f64>;

    /// All stored entries in (row, col) order.
    fn triplets(&self) -> Vec<(usize, usize, f64)>;

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.output_dim()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.input_dim()];
        self.apply_adjoint_into(y, &mut x);
        x
    }
}

/// An operator stored as a CSR matrix together with its transpose, so both
/// directions run as parallel row-major matvecs.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    mat: SparseMatrix,
    mat_t: SparseMatrix,
}

impl MatrixOperator {
    pub fn new(mat: SparseMatrix) -> Self {
        let mat_t = mat.transpose();
        MatrixOperator { mat, mat_t }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.mat
    }
}

impl LinearOperator for MatrixOperator {
    fn input_dim(&self) -> usize {
        self.mat.cols()
    }

    fn output_dim(&self) -> usize {
        self.mat.rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.mat.apply_into(x, y);
    }

    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        self.mat_t.apply_into(y, x);
    }

    fn apply_scaled_add(&self, coef: f64, x: &[f64], y: &mut [f64]) {
        self.mat.apply_scaled_add(coef, x, y);
    }

    fn apply_adjoint_scaled_add(&self, coef: f64, y: &[f64], x: &mut [f64]) {
        self.mat_t.apply_scaled_add(coef, y, x);
    }

    fn row_abs_sums(&self) -> Vec<f64> {
        self.mat.row_abs_sums()
    }

    fn col_abs_sums(&self) -> Vec<f64> {
        self.mat.col_abs_sums()
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.mat.triplets()
    }
}

/// Applies the same inner operator independently to each of `n` frames.
pub struct BlockDiagOperator {
    inner: Arc<dyn LinearOperator>,
    n: usize,
}

impl BlockDiagOperator {
    pub fn new(inner: Arc<dyn LinearOperator>, n: usize) -> Self {
        assert!(n >= 1);
        BlockDiagOperator { inner, n }
    }

    pub fn blocks(&self) -> usize {
        self.n
    }

    pub fn inner(&self) -> &Arc<dyn LinearOperator> {
        &self.inner
    }
}

impl LinearOperator for BlockDiagOperator {
    fn input_dim(&self) -> usize {
        self.n * self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.n * self.inner.output_dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let (di, do_) = (self.inner.input_dim(), self.inner.output_dim());
        for b in 0..self.n {
            self.inner
                .apply_into(&x[b * di..(b + 1) * di], &mut y[b * do_..(b + 1) * do_]);
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        let (di, do_) = (self.inner.input_dim(), self.inner.output_dim());
        for b in 0..self.n {
            self.inner
                .apply_adjoint_into(&y[b * do_..(b + 1) * do_], &mut x[b * di..(b + 1) * di]);
        }
    }

    fn apply_scaled_add(&self, coef: f64, x: &[f64], y: &mut [f64]) {
        let (di, do_) = (self.inner.input_dim(), self.inner.output_dim());
        for b in 0..self.n {
            self.inner.apply_scaled_add(
                coef,
                &x[b * di..(b + 1) * di],
                &mut y[b * do_..(b + 1) * do_],
            );
        }
    }

    fn apply_adjoint_scaled_add(&self, coef: f64, y: &[f64], x: &mut [f64]) {
        let (di, do_) = (self.inner.input_dim(), self.inner.output_dim());
        for b in 0..self.n {
            self.inner.apply_adjoint_scaled_add(
                coef,
                &y[b * do_..(b + 1) * do_],
                &mut x[b * di..(b + 1) * di],
            );
        }
    }

    fn row_abs_sums(&self) -> Vec<f64> {
        let inner = self.inner.row_abs_sums();
        let mut out = Vec::with_capacity(self.n * inner.len());
        for _ in 0..self.n {
            out.extend_from_slice(&inner);
        }
        out
    }

    fn col_abs_sums(&self) -> Vec<f64> {
        let inner = self.inner.col_abs_sums();
        let mut out = Vec::with_capacity(self.n * inner.len());
        for _ in 0..self.n {
            out.extend_from_slice(&inner);
        }
        out
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let inner = self.inner.triplets();
        let (di, do_) = (self.inner.input_dim(), self.inner.output_dim());
        let mut out = Vec::with_capacity(self.n * inner.len());
        for b in 0..self.n {
            for &(r, c, v) in &inner {
                out.push((b * do_ + r, b * di + c, v));
            }
        }
        out
    }
}

/// Forward-difference gradient with zero (Neumann) rows on the last
/// column/row. Output stacks the x-derivative plane above the y-derivative
/// plane: `[dx; dy]`, each of `width * height` rows.
pub fn gradient(width: usize, height: usize) -> Result<MatrixOperator> {
    let n = width * height;
    if n < 2 {
        return Err(Error::param("gradient dims", "image must have at least 2 pixels"));
    }
    let mut t = Vec::with_capacity(4 * n);
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            if x + 1 < width {
                t.push((p, p, -1.0));
                t.push((p, p + 1, 1.0));
            }
            if y + 1 < height {
                t.push((n + p, p, -1.0));
                t.push((n + p, p + width, 1.0));
            }
        }
    }
    Ok(MatrixOperator::new(SparseMatrix::from_triplets(2 * n, n, &t)))
}

/// Separable Gaussian blur as an explicit matrix: kernel truncated at
/// radius ceil(3σ), normalized to unit sum, symmetric (mirrored) border
/// handling. Built as the product of the vertical and horizontal passes.
pub fn gaussian_blur(sigma: f64, width: usize, height: usize) -> Result<MatrixOperator> {
    if sigma <= 0.0 {
        return Err(Error::param("sigma", format!("must be positive, got {}", sigma)));
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let n = width * height;

    let mirror = |mut i: i64, m: usize| -> usize {
        let m = m as i64;
        loop {
            if i < 0 {
                i = -i - 1;
            } else if i >= m {
                i = 2 * m - 1 - i;
            } else {
                return i as usize;
            }
        }
    };

    let mut tx = Vec::with_capacity(n * k.len());
    let mut ty = Vec::with_capacity(n * k.len());
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            for (j, &kv) in k.iter().enumerate() {
                let sx = mirror(x as i64 + j as i64 - r, width);
                tx.push((p, y * width + sx, kv));
                let sy = mirror(y as i64 + j as i64 - r, height);
                ty.push((p, sy * width + x, kv));
            }
        }
    }
    let bx = SparseMatrix::from_triplets(n, n, &tx);
    let by = SparseMatrix::from_triplets(n, n, &ty);
    Ok(MatrixOperator::new(by.matmul(&bx)))
}

/// Low-resolution dimension implied by `decimate`.
pub fn decimated_dim(hi: usize, factor: f64) -> usize {
    (hi as f64 / factor).floor() as usize
}

/// Downsampling operator. For an integer factor k it point-samples pixel
/// (k·x, k·y); for non-integer factors it samples bilinearly at
/// (factor·x, factor·y). Output dims are floor(hi / factor).
pub fn decimate(factor: f64, hi_width: usize, hi_height: usize) -> Result<MatrixOperator> {
    if factor <= 1.0 {
        return Err(Error::param("factor", format!("must be > 1, got {}", factor)));
    }
    let lo_w = decimated_dim(hi_width, factor);
    let lo_h = decimated_dim(hi_height, factor);
    if lo_w < 1 || lo_h < 1 {
        return Err(Error::param("factor", "output dimensions collapse to zero"));
    }
    let n_hi = hi_width * hi_height;
    let mut t = Vec::with_capacity(4 * lo_w * lo_h);

    // Taps along one axis: a single unit weight when the sample position is
    // (numerically) an integer, two linear weights otherwise.
    let taps = |pos: f64, dim: usize| -> Vec<(usize, f64)> {
        let i0 = pos.floor();
        let f = pos - i0;
        let i0 = (i0 as i64).clamp(0, dim as i64 - 1) as usize;
        if f < 1e-12 || i0 + 1 >= dim {
            vec![(i0, 1.0)]
        } else {
            vec![(i0, 1.0 - f), (i0 + 1, f)]
        }
    };

    for y in 0..lo_h {
        let ys = taps(factor * y as f64, hi_height);
        for x in 0..lo_w {
            let xs = taps(factor * x as f64, hi_width);
            let row = y * lo_w + x;
            for &(yy, wy) in &ys {
                for &(xx, wx) in &xs {
                    t.push((row, yy * hi_width + xx, wy * wx));
                }
            }
        }
    }
    let _ = n_hi;
    Ok(MatrixOperator::new(SparseMatrix::from_triplets(
        lo_w * lo_h,
        hi_width * hi_height,
        &t,
    )))
}

/// Sparse bicubic warping matrix: row (x, y) holds the ≤16 interpolation
/// weights of a sample at `(x, y) + v(x, y)` with the sample position
/// clamped to the image domain (replicate border). Multiplying by an image
/// vector evaluates `u(x + v(x))`.
pub fn warp_matrix(flow: &FlowField) -> Result<MatrixOperator> {
    let (w, h) = (flow.width(), flow.height());
    let n = w * h;
    let mut t = Vec::with_capacity(16 * n);
    for y in 0..h {
        for x in 0..w {
            let sx = (x as f64 + flow.vx().get(x, y)).clamp(0.0, w as f64 - 1.0);
            let sy = (y as f64 + flow.vy().get(x, y)).clamp(0.0, h as f64 - 1.0);
            if !sx.is_finite() || !sy.is_finite() {
                return Err(Error::NonFinite { context: "warp_matrix" });
            }
            let x0 = sx.floor();
            let y0 = sy.floor();
            let wx = cubic_weights(sx - x0);
            let wy = cubic_weights(sy - y0);
            let row = y * w + x;
            for (j, &wyj) in wy.iter().enumerate() {
                if wyj == 0.0 {
                    continue;
                }
                let yy = (y0 as i64 + j as i64 - 1).clamp(0, h as i64 - 1) as usize;
                for (i, &wxi) in wx.iter().enumerate() {
                    if wxi == 0.0 {
                        continue;
                    }
                    let xx = (x0 as i64 + i as i64 - 1).clamp(0, w as i64 - 1) as usize;
                    t.push((row, yy * w + xx, wyj * wxi));
                }
            }
        }
    }
    Ok(MatrixOperator::new(SparseMatrix::from_triplets(n, n, &t)))
}

/// The motion-corrected time derivative over a stacked n-frame sequence,
/// scaled by 1/h. Block row k (0-based, k < n−1) couples frames k and k+1
/// according to the flow direction:
///
/// * anchored on frame k  (`Backward`): `(u^k − W_k u^{k+1}) / h`
/// * anchored on frame k+1 (`Forward`): `(W_k u^k − u^{k+1}) / h`
///
/// The last block row is identically zero (Neumann boundary in time).
pub fn motion_time_derivative(
    flows: &FlowSet,
    h: f64,
    width: usize,
    height: usize,
    n: usize,
) -> Result<MatrixOperator> {
    if h <= 0.0 {
        return Err(Error::param("h", format!("must be positive, got {}", h)));
    }
    flows.check_matches(width, height, n)?;
    let px = width * height;
    let dim = n * px;
    let inv_h = 1.0 / h;
    let mut t = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let warp = warp_matrix(flows.flow(k))?;
        let row0 = k * px;
        let (ident_frame, warp_frame, warp_sign) = match flows.direction(k) {
            FlowDirection::Backward => (k, k + 1, -1.0),
            FlowDirection::Forward => (k + 1, k, 1.0),
        };
        let ident_sign = -warp_sign;
        for p in 0..px {
            t.push((row0 + p, ident_frame * px + p, ident_sign * inv_h));
        }
        for (r, c, v) in warp.triplets() {
            t.push((row0 + r, warp_frame * px + c, warp_sign * v * inv_h));
        }
    }
    Ok(MatrixOperator::new(SparseMatrix::from_triplets(dim, dim, &t)))
}

/// The per-frame data operator `diag(DB, …, DB)`: Gaussian blur followed by
/// decimation, applied independently to each frame. The product DB is
/// materialized once and shared across blocks.
pub fn block_diag_data_operator(
    blur: &MatrixOperator,
    dec: &MatrixOperator,
    n: usize,
) -> Result<BlockDiagOperator> {
    if dec.input_dim() != blur.output_dim() {
        return Err(Error::dims(
            "block_diag_data_operator",
            blur.output_dim(),
            dec.input_dim(),
        ));
    }
    let db = dec.matrix().matmul(blur.matrix());
    Ok(BlockDiagOperator::new(Arc::new(MatrixOperator::new(db)), n))
}

/// Block-diagonal tiling of the single-frame forward-difference gradient.
pub fn sequence_gradient(width: usize, height: usize, n: usize) -> Result<BlockDiagOperator> {
    let g = gradient(width, height)?;
    Ok(BlockDiagOperator::new(Arc::new(g), n))
}

/// Writes the operator as a coordinate-list text file: one `row col value`
/// line per entry, 17 significant digits, sorted by (row, col).
pub fn write_coo<W: Write>(op: &dyn LinearOperator, mut w: W) -> std::io::Result<()> {
    for (r, c, v) in op.triplets() {
        writeln!(w, "{} {} {:.16e}", r, c, v)?;
    }
    Ok(())
}
