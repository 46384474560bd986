//! Parameter records for the flow and super-resolution solvers.

use crate::error::{Error, Result};
use crate::flow::Parity;

/// Parameters of the joint super-resolution energy.
#[derive(Debug, Clone)]
pub struct SuperResConfig {
    /// Regularization weight of the infimal-convolution term.
    pub alpha: f64,
    /// Flow regularization weight (forwarded to the flow estimator).
    pub beta: f64,
    /// Cross-weight between the spatial and temporal channels, in (0, 1].
    pub kappa: f64,
    /// Magnification factor (> 1 for super-resolution; not necessarily an
    /// integer).
    pub factor: f64,
    /// Std-dev of the model blur on the high-res grid. `None` derives
    /// sigma = 1.2 * factor / 4.
    pub sigma: Option<f64>,
    /// Temporal step size. `None` estimates it from the data.
    pub h: Option<f64>,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Alternation convention for the temporal coupling.
    pub parity: Parity,
}

impl Default for SuperResConfig {
    fn default() -> Self {
        SuperResConfig {
            alpha: 0.01,
            beta: 0.1,
            kappa: 0.5,
            factor: 4.0,
            sigma: None,
            h: None,
            max_iterations: 500,
            tolerance: 1e-4,
            parity: Parity::Matrix,
        }
    }
}

impl SuperResConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::param("kappa", format!("must be in (0, 1), got {}", self.kappa)));
        }
        if self.factor <= 1.0 {
            return Err(Error::param("factor", format!("must be > 1, got {}", self.factor)));
        }
        if let Some(s) = self.sigma {
            if s <= 0.0 {
                return Err(Error::param("sigma", "must be positive"));
            }
        }
        if let Some(h) = self.h {
            if h <= 0.0 {
                return Err(Error::param("h", "must be positive"));
            }
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(Error::param("alpha/beta", "weights must be nonnegative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be positive"));
        }
        if self.tolerance < 0.0 {
            return Err(Error::param("tolerance", "must be nonnegative"));
        }
        Ok(())
    }

    /// Model blur std-dev: explicit value or the factor-scaled default.
    pub fn resolved_sigma(&self) -> f64 {
        self.sigma.unwrap_or(1.2 * self.factor / 4.0)
    }
}

/// Parameters of the coarse-to-fine optical flow estimator.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Huber regularization weight.
    pub beta: f64,
    /// Huber threshold of the flow regularizer (pixels).
    pub huber_epsilon: f64,
    /// Per-level downscale factor in (0, 1).
    pub pyramid_scale: f64,
    /// Smallest pyramid dimension in pixels.
    pub min_level_size: usize,
    /// Outer warping iterations per pyramid level.
    pub warps_per_level: usize,
    /// Primal-dual iterations per linearized subproblem.
    pub inner_iterations: usize,
    /// Half-width of the median filter window applied at the end of each
    /// level.
    pub median_radius: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            beta: 0.1,
            huber_epsilon: 0.01,
            pyramid_scale: 0.5,
            min_level_size: 16,
            warps_per_level: 3,
            inner_iterations: 50,
            median_radius: 2,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return Err(Error::param("pyramid_scale", "must be in (0, 1)"));
        }
        if self.min_level_size < 8 {
            return Err(Error::param("min_level_size", "must be >= 8"));
        }
        if self.warps_per_level == 0 || self.inner_iterations == 0 {
            return Err(Error::param("warps/inner_iterations", "must be positive"));
        }
        if self.beta < 0.0 || self.huber_epsilon < 0.0 {
            return Err(Error::param("beta/huber_epsilon", "must be nonnegative"));
        }
        if self.median_radius == 0 {
            return Err(Error::param("median_radius", "must be >= 1"));
        }
        Ok(())
    }
}
