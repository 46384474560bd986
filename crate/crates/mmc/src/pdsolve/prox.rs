//! Proximal mappings for the dual and primal blocks of the saddle-point
//! solver.
//!
//! Dual proxes act on the convex conjugate of the term they represent, so
//! L1-type data terms become clamps and grouped L2,1 norms become radial
//! ball projections.

use crate::par::{self, prelude::*};

const UNGROUPED: u32 = u32::MAX;

/// Maps the rows of a dual block onto per-pixel channel groups. Group `g`
/// gathers the components `index[g * channels + c]`.
#[derive(Debug, Clone)]
pub struct GroupLayout {
    channels: usize,
    num_groups: usize,
    index: Vec<u32>,
    group_of: Vec<u32>,
}

impl GroupLayout {
    /// Builds a layout from a per-(group, channel) index function over a
    /// dual block of `dim` rows. Panics when groups overlap or leave the
    /// block.
    pub fn from_fn(
        dim: usize,
        num_groups: usize,
        channels: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let mut index = Vec::with_capacity(num_groups * channels);
        let mut group_of = vec![UNGROUPED; dim];
        for g in 0..num_groups {
            for c in 0..channels {
                let i = f(g, c);
                assert!(i < dim, "group index {} out of block of {}", i, dim);
                assert!(group_of[i] == UNGROUPED, "overlapping groups at index {}", i);
                group_of[i] = g as u32;
                index.push(i as u32);
            }
        }
        GroupLayout { channels, num_groups, index, group_of }
    }

    /// Planar layout: channel `c` of group `g` lives at `c * num_groups + g`.
    pub fn planar(num_groups: usize, channels: usize) -> Self {
        Self::from_fn(num_groups * channels, num_groups, channels, |g, c| c * num_groups + g)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn dim(&self) -> usize {
        self.group_of.len()
    }

    #[inline]
    fn group_indices(&self, g: usize) -> &[u32] {
        &self.index[g * self.channels..(g + 1) * self.channels]
    }

    /// Euclidean norm of the group's components.
    #[inline]
    pub fn group_norm(&self, g: usize, v: &[f64]) -> f64 {
        self.group_indices(g)
            .iter()
            .map(|&i| v[i as usize] * v[i as usize])
            .sum::<f64>()
            .sqrt()
    }

    /// Applies a per-group scale factor to every grouped component.
    fn scale_groups(&self, v: &mut [f64], scales: &[f64]) {
        let group_of = &self.group_of;
        par::chunks_mut(v, 4096).enumerate().for_each(|(ci, chunk)| {
            let base = ci * 4096;
            for (i, x) in chunk.iter_mut().enumerate() {
                let g = group_of[base + i];
                if g != UNGROUPED {
                    *x *= scales[g as usize];
                }
            }
        });
    }

    /// Replaces each grouped component of `sigma` by the minimum over its
    /// group, making the dual step uniform inside every group (required for
    /// the radial ball projection to be the exact prox).
    pub fn uniformize(&self, sigma: &mut [f64]) {
        let mins: Vec<f64> = par::range(0..self.num_groups)
            .map(|g| {
                self.group_indices(g)
                    .iter()
                    .map(|&i| sigma[i as usize])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        self.scale_groups_assign(sigma, &mins);
    }

    fn scale_groups_assign(&self, v: &mut [f64], values: &[f64]) {
        let group_of = &self.group_of;
        par::chunks_mut(v, 4096).enumerate().for_each(|(ci, chunk)| {
            let base = ci * 4096;
            for (i, x) in chunk.iter_mut().enumerate() {
                let g = group_of[base + i];
                if g != UNGROUPED {
                    *x = values[g as usize];
                }
            }
        });
    }
}

/// Dual prox: conjugate of a weighted translated L1 norm
/// `f(z) = radius * ||z - targets||_1`. The prox is a componentwise clamp of
/// `y - sigma .* targets` to `[-radius, radius]`.
pub fn prox_l1_translated(y: &mut [f64], sigma: &[f64], targets: &[f64], radius: f64) {
    assert_eq!(y.len(), targets.len());
    assert_eq!(y.len(), sigma.len());
    par::chunks_mut(y, 4096).enumerate().for_each(|(ci, chunk)| {
        let base = ci * 4096;
        for (i, v) in chunk.iter_mut().enumerate() {
            let j = base + i;
            *v = (*v - sigma[j] * targets[j]).clamp(-radius, radius);
        }
    });
}

/// Dual prox: conjugate of `radius * sum_g ||z_g||_2`. Projects each group
/// radially onto the ball of the given radius.
pub fn prox_l21_dual(y: &mut [f64], radius: f64, layout: &GroupLayout) {
    let scales: Vec<f64> = par::range(0..layout.num_groups())
        .map(|g| {
            let norm = layout.group_norm(g, y);
            if norm > radius {
                radius / norm
            } else {
                1.0
            }
        })
        .collect();
    layout.scale_groups(y, &scales);
}

/// Dual prox: conjugate of the grouped Huber norm
/// `radius * sum_g H_eps(||z_g||_2)`. Scales by `1 / (1 + sigma*eps/radius)`
/// and projects onto the radius ball; `eps = 0` reduces exactly to
/// [`prox_l21_dual`]. `sigma` must be uniform within each group (see
/// [`GroupLayout::uniformize`]).
pub fn prox_huber_dual(y: &mut [f64], sigma: &[f64], radius: f64, epsilon: f64, layout: &GroupLayout) {
    assert_eq!(y.len(), sigma.len());
    if epsilon == 0.0 {
        return prox_l21_dual(y, radius, layout);
    }
    let scales: Vec<f64> = par::range(0..layout.num_groups())
        .map(|g| {
            let first = layout.group_indices(g)[0] as usize;
            let shrink = 1.0 / (1.0 + sigma[first] * epsilon / radius);
            let norm = layout.group_norm(g, y) * shrink;
            if norm > radius {
                shrink * radius / norm
            } else {
                shrink
            }
        })
        .collect();
    layout.scale_groups(y, &scales);
}

/// Huber penalty of a scalar magnitude: quadratic below `eps`, linear above.
#[inline]
pub fn huber(t: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        return t.abs();
    }
    let a = t.abs();
    if a <= eps {
        a * a / (2.0 * eps)
    } else {
        a - eps / 2.0
    }
}

/// Dual-block description: the prox of the conjugate term plus the value of
/// the primal term (used for energy traces).
pub trait DualProx: Send + Sync {
    fn dim(&self) -> usize;
    fn prox(&self, y: &mut [f64], sigma: &[f64]);
    fn primal_value(&self, kx: &[f64]) -> f64;
    /// Adjusts per-component dual steps so the prox above is exact.
    fn uniformize_steps(&self, _sigma: &mut [f64]) {}
}

/// `radius * ||z - targets||_1`.
pub struct TranslatedL1 {
    pub targets: Vec<f64>,
    pub radius: f64,
}

impl DualProx for TranslatedL1 {
    fn dim(&self) -> usize {
        self.targets.len()
    }

    fn prox(&self, y: &mut [f64], sigma: &[f64]) {
        prox_l1_translated(y, sigma, &self.targets, self.radius);
    }

    fn primal_value(&self, kx: &[f64]) -> f64 {
        let partials: Vec<f64> = par::chunks(kx, 4096)
            .enumerate()
            .map(|(ci, chunk)| {
                let base = ci * 4096;
                chunk
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v - self.targets[base + i]).abs())
                    .sum::<f64>()
            })
            .collect();
        self.radius * partials.iter().sum::<f64>()
    }
}

/// `radius * sum_g ||z_g||_2` over the given group layout.
pub struct GroupL21 {
    pub radius: f64,
    pub layout: GroupLayout,
}

impl DualProx for GroupL21 {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn prox(&self, y: &mut [f64], _sigma: &[f64]) {
        prox_l21_dual(y, self.radius, &self.layout);
    }

    fn primal_value(&self, kx: &[f64]) -> f64 {
        let norms: Vec<f64> = par::range(0..self.layout.num_groups())
            .map(|g| self.layout.group_norm(g, kx))
            .collect();
        self.radius * norms.iter().sum::<f64>()
    }

    fn uniformize_steps(&self, sigma: &mut [f64]) {
        self.layout.uniformize(sigma);
    }
}

/// `radius * sum_g H_eps(||z_g||_2)` over the given group layout.
pub struct GroupHuber {
    pub radius: f64,
    pub epsilon: f64,
    pub layout: GroupLayout,
}

impl DualProx for GroupHuber {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn prox(&self, y: &mut [f64], sigma: &[f64]) {
        prox_huber_dual(y, sigma, self.radius, self.epsilon, &self.layout);
    }

    fn primal_value(&self, kx: &[f64]) -> f64 {
        let vals: Vec<f64> = par::range(0..self.layout.num_groups())
            .map(|g| huber(self.layout.group_norm(g, kx), self.epsilon))
            .collect();
        self.radius * vals.iter().sum::<f64>()
    }

    fn uniformize_steps(&self, sigma: &mut [f64]) {
        self.layout.uniformize(sigma);
    }
}

/// Primal-block prox plus the value of the primal term.
pub trait PrimalProx: Send + Sync {
    fn prox(&self, x: &mut [f64], tau: &[f64]);
    fn value(&self, x: &[f64]) -> f64;
}

/// g(x) = 0.
pub struct IdentityProx;

impl PrimalProx for IdentityProx {
    fn prox(&self, _x: &mut [f64], _tau: &[f64]) {}

    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

/// g(x) = (weight / 2) * ||x - center||^2.
pub struct QuadraticDistance {
    pub center: Vec<f64>,
    pub weight: f64,
}

impl PrimalProx for QuadraticDistance {
    fn prox(&self, x: &mut [f64], tau: &[f64]) {
        let (center, w) = (&self.center, self.weight);
        par::chunks_mut(x, 4096).enumerate().for_each(|(ci, chunk)| {
            let base = ci * 4096;
            for (i, v) in chunk.iter_mut().enumerate() {
                let t = tau[base + i] * w;
                *v = (*v + t * center[base + i]) / (1.0 + t);
            }
        });
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.weight * par::dist_sq(x, &self.center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn soft_threshold(v: f64, t: f64) -> f64 {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    }

    #[test]
    fn l1_translated_trivial_cases() {
        let mut y = vec![0.0];
        prox_l1_translated(&mut y, &[1.0], &[0.0], 1.0);
        assert_eq!(y, vec![0.0]);
        let mut y = vec![5.0];
        prox_l1_translated(&mut y, &[1.0], &[0.0], 1.0);
        assert_eq!(y, vec![1.0]);
    }

    #[test]
    fn l1_translated_matches_moreau_identity() {
        // prox of the conjugate via prox of the primal:
        // prox_{s f*}(y) = y - s * prox_{f/s}(y/s), with
        // prox_{t f}(v) = c + soft(v - c, t) for f = ||. - c||vec_1.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let y: f64 = rng.gen_range(-3.0..3.0);
            let s: f64 = rng.gen_range(0.1..2.0);
            let c: f64 = rng.gen_range(-1.0..1.0);
            let mut got = vec![y];
            prox_l1_translated(&mut got, &[s], &[c], 1.0);
            let oracle = y - s * (c + soft_threshold(y / s - c, 1.0 / s));
            assert!((got[0] - oracle).abs() < 1e-12, "{} vs {}", got[0], oracle);
        }
    }

    #[test]
    fn l21_projection_examples() {
        let layout = GroupLayout::planar(1, 3);
        let mut y = vec![3.0, 4.0, 0.0];
        prox_l21_dual(&mut y, 10.0, &layout);
        assert_eq!(y, vec![3.0, 4.0, 0.0]);
        let mut y = vec![3.0, 4.0, 0.0];
        prox_l21_dual(&mut y, 1.0, &layout);
        assert!((y[0] - 0.6).abs() < 1e-15);
        assert!((y[1] - 0.8).abs() < 1e-15);
        assert_eq!(y[2], 0.0);
    }

    #[test]
    fn l21_result_norms_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let groups = 50;
        let layout = GroupLayout::planar(groups, 3);
        let mut y: Vec<f64> = (0..3 * groups).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let alpha = 0.8;
        prox_l21_dual(&mut y, alpha, &layout);
        for g in 0..groups {
            assert!(layout.group_norm(g, &y) <= alpha + 1e-12);
        }
    }

    #[test]
    fn huber_zero_eps_reduces_to_l21_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let groups = 40;
        let layout = GroupLayout::planar(groups, 2);
        let y0: Vec<f64> = (0..2 * groups).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sigma = vec![0.7; 2 * groups];
        let mut a = y0.clone();
        let mut b = y0;
        prox_huber_dual(&mut a, &sigma, 1.3, 0.0, &layout);
        prox_l21_dual(&mut b, 1.3, &layout);
        assert_eq!(a, b);
    }

    #[test]
    fn huber_inside_ball_is_pure_scaling() {
        let layout = GroupLayout::planar(1, 2);
        let mut y = vec![0.3, 0.1];
        let sigma = vec![0.5, 0.5];
        let (alpha, eps) = (1.0, 0.2);
        prox_huber_dual(&mut y, &sigma, alpha, eps, &layout);
        let s = 1.0 / (1.0 + 0.5 * eps / alpha);
        assert!((y[0] - 0.3 * s).abs() < 1e-15);
        assert!((y[1] - 0.1 * s).abs() < 1e-15);
    }

    #[test]
    fn huber_dual_matches_numeric_moreau_oracle() {
        // 1-D: prox_{s f*}(v) for f = alpha * H_eps(|.|) solves
        // (u - v)/s + (f*)'(u) = 0 on [-alpha, alpha]. The oracle evaluates
        // f* numerically as sup_z (z*u - alpha*H_eps(z)) by golden-section,
        // differentiates it by central finite differences and bisects the
        // monotone optimality condition. No shared code with the closed
        // form under test.
        let golden_min = |mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            let phi = (5.0f64.sqrt() - 1.0) / 2.0;
            for _ in 0..300 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                if f(a) < f(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            0.5 * (lo + hi)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = GroupLayout::planar(1, 1);
        for _ in 0..25 {
            let v: f64 = rng.gen_range(-3.0..3.0);
            let s: f64 = rng.gen_range(0.2..2.0);
            let alpha: f64 = rng.gen_range(0.5..2.0);
            let eps: f64 = rng.gen_range(0.01..0.5);
            let conj = |u: f64| -> f64 {
                let inner = |z: f64| -(z * u - alpha * huber(z, eps));
                let z = golden_min(-10.0, 10.0, &inner);
                z * u - alpha * huber(z, eps)
            };
            // Central differences are exact for the quadratic conjugate but
            // must stay inside the ball (f* jumps to infinity outside), so
            // the boundary decisions use one-sided inward differences.
            let fd = 1e-5;
            let optimality = |u: f64| (u - v) / s + (conj(u + fd) - conj(u - fd)) / (2.0 * fd);
            let fd1 = 1e-7;
            let d_at_lo = (-alpha - v) / s + (conj(-alpha + fd1) - conj(-alpha)) / fd1;
            let d_at_hi = (alpha - v) / s + (conj(alpha) - conj(alpha - fd1)) / fd1;
            let oracle = if d_at_lo >= 0.0 {
                -alpha
            } else if d_at_hi <= 0.0 {
                alpha
            } else {
                let (mut lo, mut hi) = (-alpha + fd, alpha - fd);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if optimality(mid) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let mut got = vec![v];
            prox_huber_dual(&mut got, &[s], alpha, eps, &layout);
            assert!(
                (got[0] - oracle).abs() < 1e-8,
                "v={} s={} alpha={} eps={}: {} vs {}",
                v,
                s,
                alpha,
                eps,
                got[0],
                oracle
            );
        }
    }

    #[test]
    fn proxes_are_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let layout = GroupLayout::planar(10, 3);
        let sigma = vec![0.9; 30];
        for _ in 0..100 {
            let a: Vec<f64> = (0..30).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let b: Vec<f64> = (0..30).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let dist_in: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            for which in 0..3 {
                let (mut pa, mut pb) = (a.clone(), b.clone());
                match which {
                    0 => {
                        let t = vec![0.1; 30];
                        prox_l1_translated(&mut pa, &sigma, &t, 1.0);
                        prox_l1_translated(&mut pb, &sigma, &t, 1.0);
                    }
                    1 => {
                        prox_l21_dual(&mut pa, 0.7, &layout);
                        prox_l21_dual(&mut pb, 0.7, &layout);
                    }
                    _ => {
                        prox_huber_dual(&mut pa, &sigma, 0.7, 0.05, &layout);
                        prox_huber_dual(&mut pb, &sigma, 0.7, 0.05, &layout);
                    }
                }
                let dist_out: f64 =
                    pa.iter().zip(&pb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                assert!(dist_out <= dist_in + 1e-12);
            }
        }
    }

    #[test]
    fn uniformize_takes_group_min() {
        let layout = GroupLayout::planar(2, 2);
        let mut sigma = vec![0.5, 1.0, 2.0, 0.25];
        layout.uniformize(&mut sigma);
        assert_eq!(sigma, vec![0.5, 0.25, 0.5, 0.25]);
    }

    #[test]
    #[should_panic(expected = "overlapping")]
    fn overlapping_groups_rejected() {
        GroupLayout::from_fn(4, 2, 2, |g, c| g + c);
    }
}
