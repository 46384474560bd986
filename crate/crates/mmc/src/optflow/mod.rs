//! Coarse-to-fine optical flow between consecutive frames.
//!
//! The data term combines L1 brightness constancy with L1 gradient
//! constancy; the regularizer is an isotropic Huber norm on each flow
//! component's gradient. Each linearized subproblem is solved by the
//! primal-dual solver; warping iterations around the current estimate
//! handle the nonlinearity, embedded in a blur-and-subsample pyramid.

pub mod flo;

use std::sync::Arc;

use crate::config::FlowConfig;
use crate::error::{Error, Result};
use crate::flow::{FlowDirection, FlowField, FlowSet, Parity};
use crate::image::{FrameSequence, Image};
use crate::interp::{bicubic_resize, central_gradient, gaussian_smooth, warp_image};
use crate::linops::{gradient, MatrixOperator};
use crate::par::{self, prelude::*};
use crate::pdsolve::prox::{DualProx, GroupHuber, GroupLayout, IdentityProx, TranslatedL1};
use crate::pdsolve::{
    solve, DualBlock, OperatorEntry, PrimalBlock, SaddlePointProblem, SolveOptions,
};
use crate::sparse::SparseMatrix;

/// Std-dev of the smoothing applied before each pyramid decimation.
const PYRAMID_PRESMOOTH_SIGMA: f64 = 0.8;

/// Image pair pyramid, level 0 = finest.
pub struct Pyramid {
    levels: Vec<(Image, Image)>,
    /// Cumulative (x, y) scale of each level relative to level 0.
    scales: Vec<(f64, f64)>,
}

impl Pyramid {
    /// Builds the pyramid: each coarser level is the pre-smoothed,
    /// bicubically resized previous one, with dims ceil(prev * scale),
    /// stopping before any dimension would drop below `min_level_size`.
    pub fn build(fixed: &Image, moving: &Image, cfg: &FlowConfig) -> Result<Pyramid> {
        if !fixed.same_dims(moving) {
            return Err(Error::dims(
                "Pyramid::build",
                format!("{}x{}", fixed.width(), fixed.height()),
                format!("{}x{}", moving.width(), moving.height()),
            ));
        }
        cfg.validate()?;
        let mut levels = vec![(fixed.clone(), moving.clone())];
        let mut scales = vec![(1.0, 1.0)];
        loop {
            let (prev_f, prev_m) = levels.last().unwrap();
            let (w, h) = (prev_f.width(), prev_f.height());
            let nw = (w as f64 * cfg.pyramid_scale).ceil() as usize;
            let nh = (h as f64 * cfg.pyramid_scale).ceil() as usize;
            if nw.min(nh) < cfg.min_level_size || (nw, nh) == (w, h) {
                break;
            }
            let f = bicubic_resize(&gaussian_smooth(prev_f, PYRAMID_PRESMOOTH_SIGMA), nw, nh);
            let m = bicubic_resize(&gaussian_smooth(prev_m, PYRAMID_PRESMOOTH_SIGMA), nw, nh);
            levels.push((f, m));
            scales.push((
                nw as f64 / fixed.width() as f64,
                nh as f64 / fixed.height() as f64,
            ));
        }
        Ok(Pyramid { levels, scales })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> (&Image, &Image) {
        (&self.levels[l].0, &self.levels[l].1)
    }

    pub fn scale(&self, l: usize) -> (f64, f64) {
        self.scales[l]
    }
}

fn diag_operator(values: &Image) -> MatrixOperator {
    let n = values.pixel_count();
    let t: Vec<(usize, usize, f64)> = values
        .data()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, i, v))
        .collect();
    MatrixOperator::new(SparseMatrix::from_triplets(n, n, &t))
}

fn pointwise(a: &Image, b: &Image, f: impl Fn(f64, f64) -> f64) -> Image {
    Image::from_data(
        a.width(),
        a.height(),
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect(),
    )
    .unwrap()
}

/// One linearization around the current estimate: solves the convex
/// problem in the full flow `v = v_tilde + dv` with brightness and
/// gradient constancy linearized at `v_tilde`, and returns the updated
/// flow.
pub fn linearized_flow_step(
    fixed: &Image,
    moving: &Image,
    v_tilde: &FlowField,
    cfg: &FlowConfig,
) -> Result<FlowField> {
    if !fixed.same_dims(moving) || fixed.width() != v_tilde.width() || fixed.height() != v_tilde.height() {
        return Err(Error::dims(
            "linearized_flow_step",
            format!("{}x{}", fixed.width(), fixed.height()),
            "inconsistent image/flow dims",
        ));
    }
    let (w, h) = (fixed.width(), fixed.height());
    let n = w * h;
    let (vx, vy) = (v_tilde.vx(), v_tilde.vy());

    // Warped moving image and its warped derivatives: the linearization
    // coefficients are the derivatives of `moving` evaluated at x + v.
    let moved = warp_image(moving, vx, vy);
    let (mx, my) = central_gradient(moving);
    let (fx, fy) = central_gradient(fixed);
    let mx_w = warp_image(&mx, vx, vy);
    let my_w = warp_image(&my, vx, vy);

    // Second derivatives for the two gradient-constancy channels.
    let (mxx, mxy) = central_gradient(&mx);
    let (myx, myy) = central_gradient(&my);
    let mxx_w = warp_image(&mxx, vx, vy);
    let mxy_w = warp_image(&mxy, vx, vy);
    let myx_w = warp_image(&myx, vx, vy);
    let myy_w = warp_image(&myy, vx, vy);

    // Channel residuals at v_tilde and the L1 targets in terms of the full
    // flow: |rho + g . (v - v_tilde)| = |g . v - (g . v_tilde - rho)|.
    let target = |gx: &Image, gy: &Image, rho: &Image| -> Vec<f64> {
        (0..n)
            .map(|i| {
                gx.data()[i] * vx.data()[i] + gy.data()[i] * vy.data()[i] - rho.data()[i]
            })
            .collect()
    };
    let rho_b = pointwise(&moved, fixed, |m, f| m - f);
    let rho_gx = pointwise(&mx_w, &fx, |m, f| m - f);
    let rho_gy = pointwise(&my_w, &fy, |m, f| m - f);

    let channels: Vec<(MatrixOperator, MatrixOperator, Vec<f64>, &str)> = vec![
        (diag_operator(&mx_w), diag_operator(&my_w), target(&mx_w, &my_w, &rho_b), "brightness"),
        (diag_operator(&mxx_w), diag_operator(&mxy_w), target(&mxx_w, &mxy_w, &rho_gx), "grad_x"),
        (diag_operator(&myx_w), diag_operator(&myy_w), target(&myx_w, &myy_w, &rho_gy), "grad_y"),
    ];

    let mut duals = Vec::new();
    let mut entries = Vec::new();
    for (d, (gx_op, gy_op, t, name)) in channels.into_iter().enumerate() {
        duals.push(DualBlock::new(
            name,
            n,
            Box::new(TranslatedL1 { targets: t, radius: 1.0 }),
        ));
        entries.push(OperatorEntry {
            dual: d,
            row_offset: 0,
            primal: 0,
            coef: 1.0,
            op: Arc::new(gx_op),
        });
        entries.push(OperatorEntry {
            dual: d,
            row_offset: 0,
            primal: 1,
            coef: 1.0,
            op: Arc::new(gy_op),
        });
    }
    // Huber regularizer on the gradient of each flow component. The weight
    // goes into the operator coefficient (beta * H_eps(|grad v|) equals
    // H_{beta*eps}(|beta grad v|)), so the diagonal preconditioner sees it
    // and the steps adapt to the regularization strength.
    let grad_op = Arc::new(gradient(w, h)?);
    for (comp, name) in [(0usize, "reg_x"), (1usize, "reg_y")] {
        let huber: Box<dyn DualProx> = Box::new(GroupHuber {
            radius: 1.0,
            epsilon: cfg.beta * cfg.huber_epsilon,
            layout: GroupLayout::planar(n, 2),
        });
        duals.push(DualBlock::new(name, 2 * n, huber));
        entries.push(OperatorEntry {
            dual: 3 + comp,
            row_offset: 0,
            primal: comp,
            coef: cfg.beta,
            op: grad_op.clone(),
        });
    }

    let problem = SaddlePointProblem::new(
        vec![
            PrimalBlock::new("vx", n, Box::new(IdentityProx)).with_init(vx.data().to_vec()),
            PrimalBlock::new("vy", n, Box::new(IdentityProx)).with_init(vy.data().to_vec()),
        ],
        duals,
        entries,
    )?;

    let (x, _report) = solve(
        &problem,
        &SolveOptions {
            max_iterations: cfg.inner_iterations,
            tolerance: 1e-4,
            trace_every: 0,
            step_balance: 1.0,
        },
    )?;
    FlowField::new(
        Image::from_data(w, h, x[..n].to_vec())?,
        Image::from_data(w, h, x[n..].to_vec())?,
    )
}

/// Componentwise spatial median over (2r+1)^2 windows with replicate
/// borders.
pub fn median_filter_flow(flow: &FlowField, radius: usize) -> FlowField {
    assert!(radius >= 1, "median radius must be >= 1");
    let filter = |img: &Image| -> Image {
        let (w, h) = (img.width(), img.height());
        let r = radius as i64;
        let mut out = vec![0.0; w * h];
        par::chunks_mut(&mut out, w).enumerate().for_each(|(y, row)| {
            let mut window = Vec::with_capacity((2 * radius + 1) * (2 * radius + 1));
            for (x, v) in row.iter_mut().enumerate() {
                window.clear();
                for dy in -r..=r {
                    let yy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    for dx in -r..=r {
                        let xx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                        window.push(img.get(xx, yy));
                    }
                }
                let mid = window.len() / 2;
                window.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
                *v = window[mid];
            }
        });
        Image::from_data(w, h, out).unwrap()
    };
    FlowField::new(filter(flow.vx()), filter(flow.vy())).expect("median preserves finiteness")
}

/// Estimates the flow `v` with `moving(x + v(x)) ≈ fixed(x)` by
/// coarse-to-fine warping.
pub fn estimate_pair_flow(fixed: &Image, moving: &Image, cfg: &FlowConfig) -> Result<FlowField> {
    let pyramid = Pyramid::build(fixed, moving, cfg)?;
    let coarsest = pyramid.num_levels() - 1;
    let (cw, ch) = {
        let (f, _) = pyramid.level(coarsest);
        (f.width(), f.height())
    };
    let mut v = FlowField::zeros(cw, ch);
    for l in (0..=coarsest).rev() {
        // Estimate on the pre-smoothed pair at every level. Smoothing
        // commutes with translation, and it suppresses the sampling-phase
        // noise that sharp (aliased) edges otherwise inject into the
        // constancy terms.
        let (f, m) = pyramid.level(l);
        let f = gaussian_smooth(f, PYRAMID_PRESMOOTH_SIGMA);
        let m = gaussian_smooth(m, PYRAMID_PRESMOOTH_SIGMA);
        for _ in 0..cfg.warps_per_level {
            v = linearized_flow_step(&f, &m, &v, cfg)?;
        }
        v = median_filter_flow(&v, cfg.median_radius);
        if l > 0 {
            let (nf, _) = pyramid.level(l - 1);
            let (nw, nh) = (nf.width(), nf.height());
            let rx = nw as f64 / f.width() as f64;
            let ry = nh as f64 / f.height() as f64;
            let vx = bicubic_resize(v.vx(), nw, nh);
            let vy = bicubic_resize(v.vy(), nw, nh);
            v = FlowField::new(
                Image::from_data(nw, nh, vx.data().iter().map(|&x| x * rx).collect())?,
                Image::from_data(nw, nh, vy.data().iter().map(|&x| x * ry).collect())?,
            )?;
        }
    }
    Ok(v)
}

/// Estimates the n−1 pairwise flows of a sequence with alternating
/// directions. Pair `k` is anchored per `parity.direction(k)`: `Backward`
/// estimates against `fixed = frames[k]`, `moving = frames[k+1]`;
/// `Forward` swaps them. The pairs are independent and run concurrently.
pub fn estimate_sequence_flows(
    frames: &FrameSequence,
    cfg: &FlowConfig,
    parity: Parity,
) -> Result<FlowSet> {
    let n = frames.len();
    if n < 2 {
        return Err(Error::param("frames", "need at least 2 frames for flow estimation"));
    }
    let results: Vec<Result<FlowField>> = par::range(0..n - 1)
        .map(|k| {
            let (fixed, moving) = match parity.direction(k) {
                FlowDirection::Backward => (frames.frame(k), frames.frame(k + 1)),
                FlowDirection::Forward => (frames.frame(k + 1), frames.frame(k)),
            };
            estimate_pair_flow(fixed, moving, cfg)
        })
        .collect();
    let mut flows = Vec::with_capacity(n - 1);
    for r in results {
        flows.push(r?);
    }
    let directions = (0..n - 1).map(|k| parity.direction(k)).collect();
    FlowSet::new(flows, directions)
}

/// Bicubically resizes a flow field to the grid scaled by `factor`
/// (output dims = round(input dims * factor)) and rescales the
/// displacement values by `factor`.
pub fn upsample_flow(flow: &FlowField, factor: f64) -> Result<FlowField> {
    if factor <= 0.0 {
        return Err(Error::param("factor", "must be positive"));
    }
    let nw = ((flow.width() as f64) * factor).round().max(1.0) as usize;
    let nh = ((flow.height() as f64) * factor).round().max(1.0) as usize;
    let vx = bicubic_resize(flow.vx(), nw, nh);
    let vy = bicubic_resize(flow.vy(), nw, nh);
    FlowField::new(
        Image::from_data(nw, nh, vx.data().iter().map(|&v| v * factor).collect())?,
        Image::from_data(nw, nh, vy.data().iter().map(|&v| v * factor).collect())?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::bicubic_sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Smooth random texture with plenty of gradient information.
    pub(crate) fn textured_image(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Image::from_fn(w, h, |_, _| rng.gen_range(0.0..1.0));
        let smooth = gaussian_smooth(&noise, 1.5);
        // Stretch to a healthy contrast range.
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in smooth.data() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Image::from_data(
            w,
            h,
            smooth.data().iter().map(|&v| 0.1 + 0.8 * (v - lo) / (hi - lo)).collect(),
        )
        .unwrap()
    }

    /// `moving(x) = base(x - shift)` via clamped bicubic sampling, so the
    /// true flow of (fixed = base, moving) is exactly `shift`.
    pub(crate) fn shifted_image(base: &Image, sx: f64, sy: f64) -> Image {
        Image::from_fn(base.width(), base.height(), |x, y| {
            crate::interp::bicubic_sample_clamped(base, x as f64 - sx, y as f64 - sy)
        })
    }

    fn interior_epe(flow: &FlowField, tx: f64, ty: f64, border: usize) -> f64 {
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

    #[test]
    fn pyramid_level_zero_is_input() {
        let f = textured_image(40, 32, 1);
        let m = textured_image(40, 32, 2);
        let p = Pyramid::build(&f, &m, &FlowConfig::default()).unwrap();
        let (l0f, l0m) = p.level(0);
        assert_eq!(l0f, &f);
        assert_eq!(l0m, &m);
        assert!(p.num_levels() >= 2);
        let (lc, _) = p.level(p.num_levels() - 1);
        assert!(lc.width().min(lc.height()) >= 16);
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let img = textured_image(48, 48, 3);
        let flow = estimate_pair_flow(&img, &img, &FlowConfig::default()).unwrap();
        assert!(flow.mean_magnitude() < 1e-3, "magnitude {}", flow.mean_magnitude());
    }

    #[test]
    fn constant_frames_give_zero_flow() {
        let img = Image::constant(32, 32, 0.5);
        let flow = estimate_pair_flow(&img, &img, &FlowConfig::default()).unwrap();
        assert_eq!(flow.mean_magnitude(), 0.0);
    }

    #[test]
    fn small_integer_shift_recovered() {
        let fixed = textured_image(48, 48, 4);
        let moving = shifted_image(&fixed, 1.0, 0.0);
        let flow = estimate_pair_flow(&fixed, &moving, &FlowConfig::default()).unwrap();
        let epe = interior_epe(&flow, 1.0, 0.0, 8);
        assert!(epe <= 0.3, "EPE {}", epe);
    }

    #[test]
    fn linearized_step_keeps_exact_estimate() {
        let fixed = textured_image(32, 32, 5);
        let moving = shifted_image(&fixed, 1.0, 0.0);
        let exact = FlowField::constant(32, 32, 1.0, 0.0);
        let out = linearized_flow_step(&fixed, &moving, &exact, &FlowConfig::default()).unwrap();
        // Residuals at the exact flow vanish (up to border effects), so the
        // step should stay near the estimate.
        let epe = interior_epe(&out, 1.0, 0.0, 6);
        assert!(epe < 0.05, "EPE {}", epe);
    }

    #[test]
    fn linearized_step_solves_ramp_in_one_step() {
        // fixed(x) = c*x, moving = fixed shifted by s: the linearization is
        // exact for a linear image, one step lands on the shift.
        let c = 0.02;
        let s = 0.3;
        let fixed = Image::from_fn(32, 32, |x, _| c * x as f64);
        let moving = Image::from_fn(32, 32, |x, _| c * ((x as f64) - s));
        let out = linearized_flow_step(
            &fixed,
            &moving,
            &FlowField::zeros(32, 32),
            &FlowConfig { inner_iterations: 300, ..Default::default() },
        )
        .unwrap();
        let epe = interior_epe(&out, s, 0.0, 6);
        assert!(epe < 0.02, "EPE {}", epe);
    }

    #[test]
    fn huge_beta_flattens_the_flow() {
        let fixed = textured_image(32, 32, 6);
        let moving = shifted_image(&fixed, 0.7, 0.2);
        let cfg = FlowConfig { beta: 1e6, inner_iterations: 200, ..Default::default() };
        let out =
            linearized_flow_step(&fixed, &moving, &FlowField::zeros(32, 32), &cfg).unwrap();
        let mean_x: f64 = out.vx().data().iter().sum::<f64>() / (32.0 * 32.0);
        let mean_y: f64 = out.vy().data().iter().sum::<f64>() / (32.0 * 32.0);
        let var: f64 = out
            .vx()
            .data()
            .iter()
            .map(|&v| (v - mean_x) * (v - mean_x))
            .chain(out.vy().data().iter().map(|&v| (v - mean_y) * (v - mean_y)))
            .sum::<f64>()
            / (2.0 * 32.0 * 32.0);
        let mag = (mean_x * mean_x + mean_y * mean_y).sqrt();
        assert!(var <= 1e-6 * mag.max(1e-3), "var {} mag {}", var, mag);
    }

    #[test]
    fn sequence_flow_counts_and_directions() {
        let frames = FrameSequence::new(
            (0..5).map(|k| textured_image(32, 32, 10 + k)).collect(),
        )
        .unwrap();
        let set = estimate_sequence_flows(&frames, &FlowConfig::default(), Parity::Matrix).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(
            set.directions(),
            &[
                FlowDirection::Backward,
                FlowDirection::Forward,
                FlowDirection::Backward,
                FlowDirection::Forward
            ]
        );

        let two = FrameSequence::new(vec![textured_image(32, 32, 20), textured_image(32, 32, 21)])
            .unwrap();
        let set = estimate_sequence_flows(&two, &FlowConfig::default(), Parity::Matrix).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.direction(0), FlowDirection::Backward);

        let one = FrameSequence::new(vec![textured_image(32, 32, 22)]).unwrap();
        assert!(estimate_sequence_flows(&one, &FlowConfig::default(), Parity::Matrix).is_err());
    }

    #[test]
    fn static_sequence_has_near_zero_flows() {
        let img = textured_image(32, 32, 30);
        let frames = FrameSequence::new(vec![img.clone(), img.clone(), img]).unwrap();
        let set = estimate_sequence_flows(&frames, &FlowConfig::default(), Parity::Matrix).unwrap();
        for f in set.flows() {
            assert!(f.mean_magnitude() < 1e-3);
        }
    }

    #[test]
    fn pair_results_independent_of_batching() {
        let frames = FrameSequence::new(
            (0..3).map(|k| textured_image(32, 32, 40 + k)).collect(),
        )
        .unwrap();
        let cfg = FlowConfig::default();
        let set = estimate_sequence_flows(&frames, &cfg, Parity::Matrix).unwrap();
        // Pair 1 is Forward: fixed = frame 2, moving = frame 1.
        let alone = estimate_pair_flow(frames.frame(2), frames.frame(1), &cfg).unwrap();
        assert_eq!(alone.vx().data(), set.flow(1).vx().data());
        assert_eq!(alone.vy().data(), set.flow(1).vy().data());
    }

    #[test]
    fn upsample_flow_scales_values_and_dims() {
        let f = FlowField::constant(8, 6, 1.0, 0.0);
        let up = upsample_flow(&f, 4.0).unwrap();
        assert_eq!((up.width(), up.height()), (32, 24));
        assert!(up.vx().data().iter().all(|&v| (v - 4.0).abs() < 1e-12));
        assert!(up.vy().data().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn upsample_flow_factor_one_is_identity() {
        let base = textured_image(12, 9, 50);
        let f = FlowField::new(base.clone(), base.clone()).unwrap();
        let up = upsample_flow(&f, 1.0).unwrap();
        assert!(up.vx().max_abs_diff(f.vx()) < 1e-12);
    }

    #[test]
    fn upsample_flow_preserves_linear_ramps() {
        let vx = Image::from_fn(16, 16, |x, y| 0.05 * x as f64 + 0.02 * y as f64);
        let vy = Image::from_fn(16, 16, |x, _| -0.03 * x as f64);
        let f = FlowField::new(vx, vy).unwrap();
        let up = upsample_flow(&f, 2.0).unwrap();
        for y in 6..26 {
            for x in 6..26 {
                // Output pixel x samples input at x / 2 (corner anchor).
                let sx = x as f64 / 2.0;
                let sy = y as f64 / 2.0;
                let expect = 2.0 * (0.05 * sx + 0.02 * sy);
                assert!((up.vx().get(x, y) - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn median_filter_removes_outliers() {
        let mut vx = Image::constant(9, 9, 2.0);
        vx.set(4, 4, 50.0);
        let f = FlowField::new(vx, Image::constant(9, 9, -1.0)).unwrap();
        let filtered = median_filter_flow(&f, 2);
        assert!(filtered.vx().data().iter().all(|&v| v == 2.0));
        assert!(filtered.vy().data().iter().all(|&v| v == -1.0));
    }

    #[test]
    fn median_filter_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let vx = Image::from_fn(11, 7, |_, _| rng.gen_range(-3.0..3.0));
        let vy = Image::from_fn(11, 7, |_, _| rng.gen_range(-3.0..3.0));
        let f = FlowField::new(vx.clone(), vy).unwrap();
        let filtered = median_filter_flow(&f, 1);
        for y in 0..7i64 {
            for x in 0..11i64 {
                let mut win = Vec::new();
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let xx = (x + dx).clamp(0, 10) as usize;
                        let yy = (y + dy).clamp(0, 6) as usize;
                        win.push(vx.get(xx, yy));
                    }
                }
                win.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(filtered.vx().get(x as usize, y as usize), win[4]);
            }
        }
    }

    #[test]
    fn shifted_image_matches_direct_kernel_eval() {
        let base = textured_image(24, 24, 70);
        let m = shifted_image(&base, 0.6, 0.3);
        // Independent check at a few interior pixels.
        for &(x, y) in &[(5usize, 5usize), (10, 12), (17, 8)] {
            let direct = bicubic_sample(&base, x as f64 - 0.6, y as f64 - 0.3);
            assert!((m.get(x, y) - direct).abs() < 1e-12);
        }
    }
}
