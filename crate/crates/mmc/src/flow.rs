//! Per-pixel displacement fields and the alternating-direction flow sets
//! that couple consecutive frames.

use crate::error::{Error, Result};
use crate::image::Image;

/// A dense 2-vector displacement field. Units are pixels of the grid the
/// field lives on.
#[derive(Debug, Clone)]
pub struct FlowField {
    vx: Image,
    vy: Image,
}

impl FlowField {
    pub fn new(vx: Image, vy: Image) -> Result<Self> {
        if !vx.same_dims(&vy) {
            return Err(Error::dims(
                "FlowField::new",
                format!("{}x{}", vx.width(), vx.height()),
                format!("{}x{}", vy.width(), vy.height()),
            ));
        }
        if !vx.is_finite() || !vy.is_finite() {
            return Err(Error::NonFinite { context: "FlowField::new" });
        }
        Ok(FlowField { vx, vy })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField {
            vx: Image::zeros(width, height),
            vy: Image::zeros(width, height),
        }
    }

    pub fn constant(width: usize, height: usize, dx: f64, dy: f64) -> Self {
        FlowField {
            vx: Image::constant(width, height, dx),
            vy: Image::constant(width, height, dy),
        }
    }

    pub fn width(&self) -> usize {
        self.vx.width()
    }

    pub fn height(&self) -> usize {
        self.vx.height()
    }

    pub fn vx(&self) -> &Image {
        &self.vx
    }

    pub fn vy(&self) -> &Image {
        &self.vy
    }

    /// Mean Euclidean magnitude over all pixels.
    pub fn mean_magnitude(&self) -> f64 {
        let n = self.vx.pixel_count();
        let total: f64 = self
            .vx
            .data()
            .iter()
            .zip(self.vy.data())
            .map(|(&x, &y)| (x * x + y * y).sqrt())
            .sum();
        total / n as f64
    }
}

/// Temporal orientation of the flow for the frame pair `(k, k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    /// Anchored on frame `k`: the field samples frame `k+1`, pulling the
    /// later frame back onto the earlier grid.
    Backward,
    /// Anchored on frame `k+1`: the field samples frame `k`.
    Forward,
}

impl FlowDirection {
    pub fn opposite(self) -> FlowDirection {
        match self {
            FlowDirection::Backward => FlowDirection::Forward,
            FlowDirection::Forward => FlowDirection::Backward,
        }
    }
}

/// Which alternation convention the temporal coupling follows. The two were
/// printed inconsistently in the source material for this formulation; they
/// differ only by which frame of each pair gets warped first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    /// Pair (1,2) is anchored on the earlier frame (block row `[I, -W]`).
    #[default]
    Matrix,
    /// Pair (1,2) is anchored on the later frame.
    Formula,
}

impl Parity {
    /// Direction assigned to the 0-based pair index `k`.
    pub fn direction(self, k: usize) -> FlowDirection {
        let start = match self {
            Parity::Matrix => FlowDirection::Backward,
            Parity::Formula => FlowDirection::Forward,
        };
        if k % 2 == 0 {
            start
        } else {
            start.opposite()
        }
    }
}

/// The n−1 pairwise flows of a sequence, with strictly alternating
/// directions.
#[derive(Debug, Clone)]
pub struct FlowSet {
    flows: Vec<FlowField>,
    directions: Vec<FlowDirection>,
}

impl FlowSet {
    pub fn new(flows: Vec<FlowField>, directions: Vec<FlowDirection>) -> Result<Self> {
        if flows.len() != directions.len() {
            return Err(Error::dims("FlowSet::new", flows.len(), directions.len()));
        }
        for w in directions.windows(2) {
            if w[0] == w[1] {
                return Err(Error::param(
                    "directions",
                    "flow directions must alternate strictly",
                ));
            }
        }
        for (i, f) in flows.iter().enumerate() {
            if i > 0 && (f.width() != flows[0].width() || f.height() != flows[0].height()) {
                return Err(Error::dims(
                    "FlowSet::new",
                    format!("{}x{}", flows[0].width(), flows[0].height()),
                    format!("{}x{} at flow {}", f.width(), f.height(), i),
                ));
            }
        }
        Ok(FlowSet { flows, directions })
    }

    /// All-zero flows for an `n`-frame sequence, directions per `parity`.
    pub fn zeros(width: usize, height: usize, n: usize, parity: Parity) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "sequence length must be >= 1"));
        }
        let flows = (0..n.saturating_sub(1))
            .map(|_| FlowField::zeros(width, height))
            .collect();
        let directions = (0..n.saturating_sub(1)).map(|k| parity.direction(k)).collect();
        FlowSet::new(flows, directions)
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn flows(&self) -> &[FlowField] {
        &self.flows
    }

    pub fn flow(&self, k: usize) -> &FlowField {
        &self.flows[k]
    }

    pub fn directions(&self) -> &[FlowDirection] {
        &self.directions
    }

    pub fn direction(&self, k: usize) -> FlowDirection {
        self.directions[k]
    }

    /// Checks that this set describes an `n`-frame sequence of `w`x`h` frames.
    pub fn check_matches(&self, width: usize, height: usize, n: usize) -> Result<()> {
        if self.flows.len() + 1 != n {
            return Err(Error::dims("FlowSet::check_matches", n - 1, self.flows.len()));
        }
        if !self.flows.is_empty()
            && (self.flows[0].width() != width || self.flows[0].height() != height)
        {
            return Err(Error::dims(
                "FlowSet::check_matches",
                format!("{}x{}", width, height),
                format!("{}x{}", self.flows[0].width(), self.flows[0].height()),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_alternate() {
        let d: Vec<_> = (0..4).map(|k| Parity::Matrix.direction(k)).collect();
        assert_eq!(
            d,
            vec![
                FlowDirection::Backward,
                FlowDirection::Forward,
                FlowDirection::Backward,
                FlowDirection::Forward
            ]
        );
        let d: Vec<_> = (0..2).map(|k| Parity::Formula.direction(k)).collect();
        assert_eq!(d, vec![FlowDirection::Forward, FlowDirection::Backward]);
    }

    #[test]
    fn flowset_rejects_non_alternating() {
        let f = || FlowField::zeros(2, 2);
        let bad = FlowSet::new(
            vec![f(), f()],
            vec![FlowDirection::Backward, FlowDirection::Backward],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn flowfield_rejects_nan() {
        let mut vx = Image::zeros(2, 2);
        vx.set(0, 0, f64::NAN);
        assert!(FlowField::new(vx, Image::zeros(2, 2)).is_err());
    }

    #[test]
    fn zeros_has_matching_count() {
        let fs = FlowSet::zeros(4, 4, 5, Parity::Matrix).unwrap();
        assert_eq!(fs.len(), 4);
        fs.check_matches(4, 4, 5).unwrap();
        assert!(fs.check_matches(4, 4, 6).is_err());
    }
}
