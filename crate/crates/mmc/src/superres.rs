//! The joint multi-frame super-resolution problem.
//!
//! All n high-resolution frames are reconstructed at once by minimizing
//!
//! ```text
//! min_{u,w}  ||A u - f||_1  +  alpha * || (grad w ; kappa W w) ||_{2,1}
//!                           +  alpha * || (kappa grad (u-w) ; W (u-w)) ||_{2,1}
//! ```
//!
//! where `A = diag(DB, …, DB)` is blur+decimation per frame, `grad` the
//! block forward-difference gradient and `W` the motion-corrected time
//! derivative built from the pairwise flows. The infimal-convolution split
//! `u = w + z` lets each pixel pick between spatially dominant and
//! temporally dominant regularization; the per-pixel L2 group spans the two
//! gradient channels and the warp channel.

use std::sync::Arc;

use crate::config::{FlowConfig, SuperResConfig};
use crate::error::{Error, Result};
use crate::flow::FlowSet;
use crate::image::{clip_image, FrameSequence, Image};
use crate::interp::bicubic_resize;
use crate::linops::{
    block_diag_data_operator, decimate, decimated_dim, gaussian_blur, motion_time_derivative,
    sequence_gradient, BlockDiagOperator, LinearOperator, MatrixOperator,
};
use crate::optflow::{estimate_sequence_flows, upsample_flow};
use crate::par;
use crate::pdsolve::prox::{GroupL21, GroupLayout, IdentityProx, TranslatedL1};
use crate::pdsolve::{
    solve, DualBlock, OperatorEntry, PrimalBlock, SaddlePointProblem, SolveOptions, SolveReport,
};

/// High-resolution dimensions implied by a low-res frame and a factor.
pub fn hi_dims(low_w: usize, low_h: usize, factor: f64) -> (usize, usize) {
    (
        (low_w as f64 * factor).round() as usize,
        (low_h as f64 * factor).round() as usize,
    )
}

/// Bicubic upsampling of every frame to explicit dimensions.
pub fn bicubic_upsample(seq: &FrameSequence, w: usize, h: usize) -> FrameSequence {
    seq.map(|f| bicubic_resize(f, w, h)).expect("dims preserved per frame")
}

/// An assembled instance of the joint energy.
pub struct SuperResProblem {
    data_op: Arc<BlockDiagOperator>,
    grad: Arc<BlockDiagOperator>,
    time_deriv: Arc<MatrixOperator>,
    low_res: FrameSequence,
    config: SuperResConfig,
    h: f64,
    hi_width: usize,
    hi_height: usize,
}

impl SuperResProblem {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn hi_width(&self) -> usize {
        self.hi_width
    }

    pub fn hi_height(&self) -> usize {
        self.hi_height
    }

    pub fn frames(&self) -> usize {
        self.low_res.len()
    }

    pub fn config(&self) -> &SuperResConfig {
        &self.config
    }

    pub fn data_op(&self) -> &Arc<BlockDiagOperator> {
        &self.data_op
    }

    pub fn grad(&self) -> &Arc<BlockDiagOperator> {
        &self.grad
    }

    pub fn time_deriv(&self) -> &Arc<MatrixOperator> {
        &self.time_deriv
    }

    fn frame_pixels(&self) -> usize {
        self.hi_width * self.hi_height
    }

    fn hi_dim(&self) -> usize {
        self.frames() * self.frame_pixels()
    }

    fn initial_u(&self) -> Vec<f64> {
        bicubic_upsample(&self.low_res, self.hi_width, self.hi_height).stack()
    }
}

/// The solved split: `u = w + z` exactly, `u` clipped to [0, 1].
pub struct SuperResSolution {
    pub u: FrameSequence,
    pub w: FrameSequence,
    pub z: FrameSequence,
    pub report: SolveReport,
}

/// Temporal step size from the warp-to-gradient energy ratio on a bicubic
/// estimate: `h = ||W_1 u0||_1 / (||dx u0||_1 + ||dy u0||_1)` with the time
/// derivative built at h = 1. Returns 1 when either energy (numerator or
/// denominator) is below 1e-12.
pub fn estimate_temporal_stepsize(u0: &FrameSequence, flows: &FlowSet) -> Result<f64> {
    let (w, h, n) = (u0.width(), u0.height(), u0.len());
    flows.check_matches(w, h, n)?;
    let stacked = u0.stack();
    let w1 = motion_time_derivative(flows, 1.0, w, h, n)?;
    let numerator = par::sum_by(&w1.apply(&stacked), f64::abs);
    let grad = sequence_gradient(w, h, n)?;
    let denominator = par::sum_by(&grad.apply(&stacked), f64::abs);
    if numerator < 1e-12 || denominator < 1e-12 {
        return Ok(1.0);
    }
    Ok(numerator / denominator)
}

/// Builds the operators of the joint energy. `flows` must live on the
/// high-resolution grid (already upsampled) with n−1 entries.
pub fn assemble(
    low_res: &FrameSequence,
    flows: &FlowSet,
    config: &SuperResConfig,
) -> Result<SuperResProblem> {
    config.validate()?;
    let n = low_res.len();
    let (hw, hh) = hi_dims(low_res.width(), low_res.height(), config.factor);
    if decimated_dim(hw, config.factor) != low_res.width()
        || decimated_dim(hh, config.factor) != low_res.height()
    {
        return Err(Error::dims(
            "assemble",
            format!("{}x{} low-res", low_res.width(), low_res.height()),
            format!(
                "factor {} maps {}x{} back to {}x{}",
                config.factor,
                hw,
                hh,
                decimated_dim(hw, config.factor),
                decimated_dim(hh, config.factor)
            ),
        ));
    }
    flows.check_matches(hw, hh, n)?;

    let sigma = config.resolved_sigma();
    let blur = gaussian_blur(sigma, hw, hh)?;
    let dec = decimate(config.factor, hw, hh)?;
    let data_op = Arc::new(block_diag_data_operator(&blur, &dec, n)?);
    let grad = Arc::new(sequence_gradient(hw, hh, n)?);

    let h = match config.h {
        Some(h) => h,
        None => {
            let u0 = bicubic_upsample(low_res, hw, hh);
            estimate_temporal_stepsize(&u0, flows)?
        }
    };
    let time_deriv = Arc::new(motion_time_derivative(flows, h, hw, hh, n)?);

    Ok(SuperResProblem {
        data_op,
        grad,
        time_deriv,
        low_res: low_res.clone(),
        config: config.clone(),
        h,
        hi_width: hw,
        hi_height: hh,
    })
}

/// Per-pixel grouping of one infimal-convolution dual block: channels
/// (dx, dy, warp) for pixel p of frame i. The gradient section stores each
/// frame as [dx; dy]; the warp section follows after all gradient rows.
fn infconv_group_layout(n: usize, frame_px: usize) -> GroupLayout {
    let big_n = n * frame_px;
    GroupLayout::from_fn(3 * big_n, big_n, 3, move |g, c| {
        let frame = g / frame_px;
        let p = g % frame_px;
        match c {
            0 => 2 * frame_px * frame + p,
            1 => 2 * frame_px * frame + frame_px + p,
            _ => 2 * big_n + frame_px * frame + p,
        }
    })
}

enum ModelVariant {
    /// The full infimal-convolution split over (u, w). `swapped` exchanges
    /// which of the two L2,1 terms carries the kappa on its gradient part.
    Infconv { swapped: bool },
    /// Single regularizer || (grad u ; W u) ||_{2,1} on u alone.
    SingleTerm,
}

fn build_saddle(p: &SuperResProblem, variant: &ModelVariant) -> Result<SaddlePointProblem> {
    let n = p.frames();
    let fp = p.frame_pixels();
    let big_n = p.hi_dim();
    let low_n = p.data_op.output_dim();
    let alpha = p.config.alpha;
    let kappa = p.config.kappa;
    let f = p.low_res.stack();
    let u0 = p.initial_u();

    let data_block = DualBlock::new(
        "data",
        low_n,
        Box::new(TranslatedL1 { targets: f, radius: 1.0 }),
    );
    let grad_op: Arc<dyn LinearOperator> = p.grad.clone();
    let warp_op: Arc<dyn LinearOperator> = p.time_deriv.clone();

    match variant {
        ModelVariant::Infconv { swapped } => {
            // Coefficients on (gradient, warp) channels per term. The first
            // term attaches to w, the second to u - w.
            let (w_grad, w_warp, d_grad, d_warp) = if *swapped {
                (kappa, 1.0, 1.0, kappa)
            } else {
                (1.0, kappa, kappa, 1.0)
            };
            let w0: Vec<f64> = u0.iter().map(|&v| 0.5 * v).collect();
            let primal = vec![
                PrimalBlock::new("u", big_n, Box::new(IdentityProx)).with_init(u0),
                PrimalBlock::new("w", big_n, Box::new(IdentityProx)).with_init(w0),
            ];
            let duals = vec![
                data_block,
                DualBlock::new(
                    "infconv_w",
                    3 * big_n,
                    Box::new(GroupL21 { radius: alpha, layout: infconv_group_layout(n, fp) }),
                ),
                DualBlock::new(
                    "infconv_z",
                    3 * big_n,
                    Box::new(GroupL21 { radius: alpha, layout: infconv_group_layout(n, fp) }),
                ),
            ];
            let entries = vec![
                OperatorEntry { dual: 0, row_offset: 0, primal: 0, coef: 1.0, op: p.data_op.clone() },
                // First term rows: [grad; warp] applied to w.
                OperatorEntry { dual: 1, row_offset: 0, primal: 1, coef: w_grad, op: grad_op.clone() },
                OperatorEntry { dual: 1, row_offset: 2 * big_n, primal: 1, coef: w_warp, op: warp_op.clone() },
                // Second term rows applied to u - w.
                OperatorEntry { dual: 2, row_offset: 0, primal: 0, coef: d_grad, op: grad_op.clone() },
                OperatorEntry { dual: 2, row_offset: 0, primal: 1, coef: -d_grad, op: grad_op },
                OperatorEntry { dual: 2, row_offset: 2 * big_n, primal: 0, coef: d_warp, op: warp_op.clone() },
                OperatorEntry { dual: 2, row_offset: 2 * big_n, primal: 1, coef: -d_warp, op: warp_op },
            ];
            SaddlePointProblem::new(primal, duals, entries)
        }
        ModelVariant::SingleTerm => {
            let primal = vec![PrimalBlock::new("u", big_n, Box::new(IdentityProx)).with_init(u0)];
            let duals = vec![
                data_block,
                DualBlock::new(
                    "reg",
                    3 * big_n,
                    Box::new(GroupL21 { radius: alpha, layout: infconv_group_layout(n, fp) }),
                ),
            ];
            let entries = vec![
                OperatorEntry { dual: 0, row_offset: 0, primal: 0, coef: 1.0, op: p.data_op.clone() },
                OperatorEntry { dual: 1, row_offset: 0, primal: 0, coef: 1.0, op: grad_op },
                OperatorEntry { dual: 1, row_offset: 2 * big_n, primal: 0, coef: 1.0, op: warp_op },
            ];
            SaddlePointProblem::new(primal, duals, entries)
        }
    }
}

/// The joint solves run with a damped primal balance: the L1 data duals
/// saturate within a few iterations instead of ramping, which turns the
/// energy trace into a near-monotone descent at the cost of smaller primal
/// steps.
const SUPERRES_STEP_BALANCE: f64 = 0.2;

fn solve_options(cfg: &SuperResConfig) -> SolveOptions {
    SolveOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        trace_every: 1,
        step_balance: SUPERRES_STEP_BALANCE,
    }
}

fn split_solution(p: &SuperResProblem, x: Vec<f64>, report: SolveReport) -> Result<SuperResSolution> {
    let big_n = p.hi_dim();
    let (hw, hh, n) = (p.hi_width, p.hi_height, p.frames());
    let u_raw = FrameSequence::from_stack(hw, hh, n, &x[..big_n])?;
    let w = FrameSequence::from_stack(hw, hh, n, &x[big_n..])?;
    let u = u_raw.map(|f| clip_image(f, 0.0, 1.0))?;
    let z = FrameSequence::new(
        u.iter()
            .zip(w.iter())
            .map(|(uf, wf)| {
                Image::from_data(
                    hw,
                    hh,
                    uf.data().iter().zip(wf.data()).map(|(a, b)| a - b).collect(),
                )
                .unwrap()
            })
            .collect(),
    )?;
    Ok(SuperResSolution { u, w, z, report })
}

/// Solves the assembled joint problem.
pub fn solve_superres(problem: &SuperResProblem) -> Result<SuperResSolution> {
    let saddle = build_saddle(problem, &ModelVariant::Infconv { swapped: false })?;
    let (x, report) = solve(&saddle, &solve_options(&problem.config))?;
    split_solution(problem, x, report)
}

/// Same energy with the roles of the two L2,1 terms exchanged; the solved
/// `u` should agree with [`solve_superres`] up to solver tolerance.
pub fn solve_superres_swapped(problem: &SuperResProblem) -> Result<SuperResSolution> {
    let saddle = build_saddle(problem, &ModelVariant::Infconv { swapped: true })?;
    let (x, report) = solve(&saddle, &solve_options(&problem.config))?;
    split_solution(problem, x, report)
}

/// Solves the single-term model `||Au-f||_1 + alpha ||(grad u; W u)||_{2,1}`,
/// the limit the infimal convolution collapses to as kappa -> 1. Returns
/// the clipped frames and the report.
pub fn solve_superres_single_term(
    problem: &SuperResProblem,
) -> Result<(FrameSequence, SolveReport)> {
    let saddle = build_saddle(problem, &ModelVariant::SingleTerm)?;
    let (x, report) = solve(&saddle, &solve_options(&problem.config))?;
    let u_raw =
        FrameSequence::from_stack(problem.hi_width, problem.hi_height, problem.frames(), &x)?;
    Ok((u_raw.map(|f| clip_image(f, 0.0, 1.0))?, report))
}

/// Direct evaluation of the joint energy at (u, w).
pub fn energy_value(
    problem: &SuperResProblem,
    u: &FrameSequence,
    w: &FrameSequence,
) -> Result<f64> {
    let big_n = problem.hi_dim();
    if u.len() != problem.frames()
        || u.width() != problem.hi_width
        || u.height() != problem.hi_height
        || w.len() != u.len()
        || w.width() != u.width()
        || w.height() != u.height()
    {
        return Err(Error::dims(
            "energy_value",
            format!("{} frames {}x{}", problem.frames(), problem.hi_width, problem.hi_height),
            "mismatched u/w",
        ));
    }
    let saddle = build_saddle(problem, &ModelVariant::Infconv { swapped: false })?;
    let mut x = Vec::with_capacity(2 * big_n);
    x.extend_from_slice(&u.stack());
    x.extend_from_slice(&w.stack());
    Ok(saddle.primal_energy(&x))
}

/// Energy at the solver's starting point (bicubic u, w = u/2).
pub fn initial_energy(problem: &SuperResProblem) -> Result<f64> {
    let u0 = bicubic_upsample(&problem.low_res, problem.hi_width, problem.hi_height);
    let w0 = u0.map(|f| {
        Image::from_data(
            f.width(),
            f.height(),
            f.data().iter().map(|&v| 0.5 * v).collect(),
        )
        .unwrap()
    })?;
    energy_value(problem, &u0, &w0)
}

/// End-to-end grayscale result.
pub struct PipelineOutput {
    pub solution: SuperResSolution,
    /// Flows estimated on the low-resolution grid.
    pub flows: FlowSet,
    pub h: f64,
}

/// Full grayscale pipeline: estimate low-res flows with alternating
/// directions, upsample them by the factor, assemble and solve. A single
/// frame degrades to single-image super-resolution with a zero time
/// derivative.
pub fn superresolve(
    low_res: &FrameSequence,
    flow_cfg: &FlowConfig,
    cfg: &SuperResConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let n = low_res.len();
    let (hw, hh) = hi_dims(low_res.width(), low_res.height(), cfg.factor);
    let flows_low = if n >= 2 {
        let fc = FlowConfig { beta: cfg.beta, ..flow_cfg.clone() };
        estimate_sequence_flows(low_res, &fc, cfg.parity)?
    } else {
        FlowSet::zeros(low_res.width(), low_res.height(), 1, cfg.parity)?
    };
    let flows_hi = FlowSet::new(
        flows_low
            .flows()
            .iter()
            .map(|f| upsample_flow(f, cfg.factor))
            .collect::<Result<Vec<_>>>()?,
        flows_low.directions().to_vec(),
    )?;
    // A 1-frame set has no flows; zeros() builds the right empty set.
    let flows_hi = if n == 1 { FlowSet::zeros(hw, hh, 1, cfg.parity)? } else { flows_hi };
    let problem = assemble(low_res, &flows_hi, cfg)?;
    let h = problem.h;
    let solution = solve_superres(&problem)?;
    Ok(PipelineOutput { solution, flows: flows_low, h })
}

/// End-to-end color result: the luminance channel is reconstructed by the
/// joint solve, chroma channels are upsampled bicubically.
pub struct ColorPipelineOutput {
    pub r: FrameSequence,
    pub g: FrameSequence,
    pub b: FrameSequence,
    pub luma: SuperResSolution,
    pub flows: FlowSet,
    pub h: f64,
}

pub fn superresolve_color(
    red: &FrameSequence,
    green: &FrameSequence,
    blue: &FrameSequence,
    flow_cfg: &FlowConfig,
    cfg: &SuperResConfig,
) -> Result<ColorPipelineOutput> {
    let n = red.len();
    if green.len() != n || blue.len() != n {
        return Err(Error::dims("superresolve_color", n, green.len().min(blue.len())));
    }
    let mut ys = Vec::with_capacity(n);
    let mut cbs = Vec::with_capacity(n);
    let mut crs = Vec::with_capacity(n);
    for i in 0..n {
        let (y, cb, cr) = crate::color::to_ycbcr(red.frame(i), green.frame(i), blue.frame(i))?;
        ys.push(y);
        cbs.push(cb);
        crs.push(cr);
    }
    let luma_low = FrameSequence::new(ys)?;
    let out = superresolve(&luma_low, flow_cfg, cfg)?;
    let (hw, hh) = (out.solution.u.width(), out.solution.u.height());

    let mut rs = Vec::with_capacity(n);
    let mut gs = Vec::with_capacity(n);
    let mut bs = Vec::with_capacity(n);
    for i in 0..n {
        let cb = bicubic_resize(&cbs[i], hw, hh);
        let cr = bicubic_resize(&crs[i], hw, hh);
        let (r, g, b) = crate::color::from_ycbcr(out.solution.u.frame(i), &cb, &cr)?;
        rs.push(clip_image(&r, 0.0, 1.0));
        gs.push(clip_image(&g, 0.0, 1.0));
        bs.push(clip_image(&b, 0.0, 1.0));
    }
    Ok(ColorPipelineOutput {
        r: FrameSequence::new(rs)?,
        g: FrameSequence::new(gs)?,
        b: FrameSequence::new(bs)?,
        luma: out.solution,
        flows: out.flows,
        h: out.h,
    })
}
