//! Heavier cross-module invariants that don't fit the per-module unit
//! suites.

mod common;

use common::*;
use proptest::prelude::*;

use mmc::config::SuperResConfig;
use mmc::eval::{generate_lowres, synth_translation_sequence};
use mmc::flow::{FlowField, FlowSet, Parity};
use mmc::image::{clip_image, Image};
use mmc::linops::{warp_matrix, LinearOperator};
use mmc::optflow::flo::{read_flo, write_flo};
use mmc::superres::{assemble, hi_dims, solve_superres, solve_superres_swapped};

/// Swapping which L2,1 term carries the kappa weight relabels (w, z) but
/// must leave u unchanged; both runs are taken to deep convergence and
/// compared at twice the solver's operating tolerance.
#[test]
fn infconv_role_swap_preserves_u() {
    let base = textured(26, 26, 16);
    let truth = synth_translation_sequence(&base, 2, (0.5, 0.0)).unwrap();
    let low = generate_lowres(&truth, 2.0).unwrap();
    let (hw, hh) = hi_dims(low.width(), low.height(), 2.0);
    let flows = FlowSet::zeros(hw, hh, 2, Parity::Matrix).unwrap();
    let cfg = SuperResConfig {
        factor: 2.0,
        max_iterations: 150_000,
        tolerance: 1e-7,
        h: Some(1.0),
        ..Default::default()
    };
    let problem = assemble(&low, &flows, &cfg).unwrap();
    let a = solve_superres(&problem).unwrap();
    let b = solve_superres_swapped(&problem).unwrap();
    assert!(a.report.converged && b.report.converged);
    let ua = a.u.stack();
    let ub = b.u.stack();
    let num: f64 = ua.iter().zip(&ub).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = ua.iter().map(|x| x * x).sum::<f64>().sqrt();
    let bound = 2.0 * SuperResConfig::default().tolerance;
    assert!(num / den <= bound, "relative gap {} vs {}", num / den, bound);
    // And the returned splits satisfy u = w + z exactly.
    for k in 0..2 {
        for (i, &z) in a.z.frame(k).data().iter().enumerate() {
            assert_eq!(z, a.u.frame(k).data()[i] - a.w.frame(k).data()[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Clipping is idempotent and bounded for arbitrary pixel data.
    #[test]
    fn clip_idempotent(values in proptest::collection::vec(-10.0f64..10.0, 12)) {
        let img = Image::from_data(4, 3, values).unwrap();
        let once = clip_image(&img, 0.0, 1.0);
        let twice = clip_image(&once, 0.0, 1.0);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    /// Warping by a zero flow reproduces any image exactly.
    #[test]
    fn zero_flow_warp_is_identity(values in proptest::collection::vec(0.0f64..1.0, 30)) {
        let img = Image::from_data(6, 5, values).unwrap();
        let w = warp_matrix(&FlowField::zeros(6, 5)).unwrap();
        let out = w.apply(img.data());
        prop_assert_eq!(out.as_slice(), img.data());
    }

    /// Flow files survive a write/read round trip at f32 precision.
    #[test]
    fn flo_roundtrip(vx in proptest::collection::vec(-8.0f32..8.0, 20),
                     vy in proptest::collection::vec(-8.0f32..8.0, 20)) {
        let flow = FlowField::new(
            Image::from_data(5, 4, vx.iter().map(|&v| v as f64).collect()).unwrap(),
            Image::from_data(5, 4, vy.iter().map(|&v| v as f64).collect()).unwrap(),
        ).unwrap();
        let mut buf = Vec::new();
        write_flo(&flow, &mut buf).unwrap();
        let back = read_flo(&buf[..]).unwrap();
        prop_assert_eq!(back.vx().data(), flow.vx().data());
        prop_assert_eq!(back.vy().data(), flow.vy().data());
    }
}
