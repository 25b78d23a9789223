//! Cubic velocity grid, global Maxwellian, and weighted inner products.
//!
//! The grid is a uniform tensor product on `[-R, R]^3` with trapezoidal
//! weights. The axis is built mirror-symmetrically so that negating a node
//! lands exactly (bitwise) on another node; inner products sum mirror pairs
//! together so that integrals of odd functions cancel exactly.

use crate::error::{CoreError, Result};
use crate::real::Real;

/// Uniform cubic velocity grid with trapezoidal quadrature weights.
#[derive(Debug, Clone)]
pub struct VelocityGrid<T> {
    /// Nodes per axis (even).
    pub n: usize,
    /// Half-width `R` of the cube.
    pub cutoff: T,
    /// Axis spacing.
    pub h: T,
    /// Axis nodes, `axis[k] = -R + k h`, mirrored bitwise.
    pub axis: Vec<T>,
    /// Per-axis trapezoidal weights (`h/2` at the ends, `h` inside).
    pub axis_w: Vec<T>,
    /// Per-node quadrature weight (product of axis weights).
    pub w: Vec<T>,
    /// `sqrt(mu)` at each node.
    pub sqrt_mu: Vec<T>,
    /// `mu` at each node, defined as `sqrt_mu^2` so the pair is consistent
    /// to the last bit.
    pub mu: Vec<T>,
    /// `|v|^2` at each node.
    pub vsq: Vec<T>,
}

/// Global Maxwellian `mu(v) = (2 pi)^{-3/2} exp(-|v|^2 / 2)`.
pub fn maxwellian<T: Real>(v: [T; 3]) -> T {
    let vsq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let c = T::of((2.0 * std::f64::consts::PI).powf(-1.5));
    c * (-vsq * T::of(0.5)).exp()
}

/// Square root of the global Maxwellian.
pub fn sqrt_maxwellian<T: Real>(v: [T; 3]) -> T {
    let vsq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let c = T::of((2.0 * std::f64::consts::PI).powf(-0.75));
    c * (-vsq * T::of(0.25)).exp()
}

/// Build the velocity grid.
///
/// `n` must be even and at least 4 (an even count keeps the origin off the
/// grid and makes the node set exactly symmetric under `v -> -v`); `cutoff`
/// must be at least 5 so the Maxwellian tails are below quadrature error.
pub fn build_velocity_grid<T: Real>(n: usize, cutoff: T) -> Result<VelocityGrid<T>> {
    if n < 4 || n % 2 != 0 {
        return Err(CoreError::InvalidGrid(format!(
            "axis count must be even and >= 4, got {n}"
        )));
    }
    if cutoff < T::of(5.0) {
        return Err(CoreError::InvalidGrid(format!(
            "cutoff must be >= 5, got {cutoff}"
        )));
    }
    let h = cutoff * T::of(2.0) / T::of((n - 1) as f64);
    let mut axis = vec![T::zero(); n];
    for k in 0..n / 2 {
        let x = -cutoff + T::of(k as f64) * h;
        axis[k] = x;
        axis[n - 1 - k] = -x;
    }
    let mut axis_w = vec![h; n];
    axis_w[0] = h * T::of(0.5);
    axis_w[n - 1] = h * T::of(0.5);

    let nn = n * n * n;
    let mut w = vec![T::zero(); nn];
    let mut sqrt_mu = vec![T::zero(); nn];
    let mut mu = vec![T::zero(); nn];
    let mut vsq = vec![T::zero(); nn];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let i = (ix * n + iy) * n + iz;
                let v = [axis[ix], axis[iy], axis[iz]];
                w[i] = axis_w[ix] * axis_w[iy] * axis_w[iz];
                let s = sqrt_maxwellian(v);
                sqrt_mu[i] = s;
                mu[i] = s * s;
                vsq[i] = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            }
        }
    }
    Ok(VelocityGrid {
        n,
        cutoff,
        h,
        axis,
        axis_w,
        w,
        sqrt_mu,
        mu,
        vsq,
    })
}

impl<T: Real> VelocityGrid<T> {
    /// Total number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// True when the grid is empty (never, for a constructed grid).
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the node `(ix, iy, iz)`.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Axis indices of the flat node index.
    #[inline]
    pub fn unindex(&self, i: usize) -> (usize, usize, usize) {
        let iz = i % self.n;
        let iy = (i / self.n) % self.n;
        let ix = i / (self.n * self.n);
        (ix, iy, iz)
    }

    /// Velocity of the flat node index.
    #[inline]
    pub fn node(&self, i: usize) -> [T; 3] {
        let (ix, iy, iz) = self.unindex(i);
        [self.axis[ix], self.axis[iy], self.axis[iz]]
    }

    /// Flat index of the mirrored node `-v`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        let (ix, iy, iz) = self.unindex(i);
        self.index(self.n - 1 - ix, self.n - 1 - iy, self.n - 1 - iz)
    }

    /// Check that a value vector matches this grid.
    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(CoreError::GridMismatch(format!(
                "function has {len} values, grid has {} nodes",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Values of a velocity-space function on the grid nodes.
#[derive(Debug, Clone)]
pub struct VelocityFunction<T> {
    /// One value per grid node, in flat node order.
    pub values: Vec<T>,
}

impl<T: Real> VelocityFunction<T> {
    /// All-zero function.
    pub fn zeros(grid: &VelocityGrid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(grid: &VelocityGrid<T>, f: impl Fn([T; 3]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { values }
    }

    /// `a * self + b * other`, elementwise.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self { values }
    }

    /// In-place `self += a * other`.
    pub fn add_scaled(&mut self, a: T, other: &Self) {
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    /// Scale in place.
    pub fn scale(&mut self, a: T) {
        for x in &mut self.values {
            *x *= a;
        }
    }
}

/// Weighted inner product `sum_i w_i f_i g_i`.
///
/// Mirror pairs are summed together so products of odd and even functions
/// cancel to the last bit, and the traversal order is fixed for determinism.
pub fn inner<T: Real>(grid: &VelocityGrid<T>, f: &VelocityFunction<T>, g: &VelocityFunction<T>) -> T {
    debug_assert_eq!(f.values.len(), grid.len());
    debug_assert_eq!(g.values.len(), grid.len());
    let mut acc = T::zero();
    for i in 0..grid.len() {
        let j = grid.mirror(i);
        if i < j {
            let a = grid.w[i] * f.values[i] * g.values[i];
            let b = grid.w[j] * f.values[j] * g.values[j];
            acc += a + b;
        }
    }
    acc
}

/// Weighted L2 norm.
pub fn norm<T: Real>(grid: &VelocityGrid<T>, f: &VelocityFunction<T>) -> T {
    inner(grid, f, f).max(T::zero()).sqrt()
}

/// Sup norm against the polynomial weight `(1 + |v|^2)^{l/2}`.
pub fn weighted_sup_norm<T: Real>(grid: &VelocityGrid<T>, f: &VelocityFunction<T>, l: i32) -> T {
    debug_assert_eq!(f.values.len(), grid.len());
    let half_l = T::of(l as f64 / 2.0);
    let mut best = T::zero();
    for i in 0..grid.len() {
        let wgt = (T::one() + grid.vsq[i]).powf(half_l);
        let val = (f.values[i] * wgt).abs();
        if val > best {
            best = val;
        }
    }
    best
}

/// Density, bulk velocity, and temperature coefficients of the hydrodynamic
/// part of a fluctuation, in the convention
/// `P g = (rho + u . v + theta (|v|^2 - 3) / 2) sqrt(mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroTriple<T> {
    pub rho: T,
    pub u: [T; 3],
    pub theta: T,
}

impl<T: Real> MacroTriple<T> {
    pub fn zero() -> Self {
        Self {
            rho: T::zero(),
            u: [T::zero(); 3],
            theta: T::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(build_velocity_grid::<f64>(7, 8.0).is_err());
        assert!(build_velocity_grid::<f64>(2, 8.0).is_err());
        assert!(build_velocity_grid::<f64>(16, 4.0).is_err());
        assert!(build_velocity_grid::<f64>(16, 8.0).is_ok());
    }

    #[test]
    fn axis_is_bitwise_mirror_symmetric() {
        let g = build_velocity_grid::<f64>(16, 8.0).unwrap();
        for k in 0..16 {
            assert_eq!(g.axis[k].to_bits(), (-g.axis[15 - k]).to_bits());
        }
        for i in 0..g.len() {
            let j = g.mirror(i);
            let vi = g.node(i);
            let vj = g.node(j);
            for d in 0..3 {
                assert_eq!(vi[d].to_bits(), (-vj[d]).to_bits());
            }
            assert_eq!(g.w[i].to_bits(), g.w[j].to_bits());
        }
    }

    #[test]
    fn maxwellian_mass_is_one() {
        let g = build_velocity_grid::<f64>(16, 8.0).unwrap();
        let mu = VelocityFunction {
            values: g.mu.clone(),
        };
        let one = VelocityFunction::from_fn(&g, |_| 1.0);
        let mass = inner(&g, &mu, &one);
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn odd_moments_cancel_exactly() {
        let g = build_velocity_grid::<f64>(12, 6.0).unwrap();
        let f = VelocityFunction::from_fn(&g, |v| v[0] * (1.0 + v[2] * v[2]).recip());
        let mu = VelocityFunction {
            values: g.mu.clone(),
        };
        let m = inner(&g, &f, &mu);
        assert_eq!(m, 0.0, "odd moment must cancel bitwise, got {m}");
    }

    #[test]
    fn gaussian_second_moment() {
        let g = build_velocity_grid::<f64>(16, 8.0).unwrap();
        let sm = VelocityFunction {
            values: g.sqrt_mu.clone(),
        };
        let v1sm = VelocityFunction::from_fn(&g, |v| v[0] * sqrt_maxwellian(v));
        // The second moment sits at the trapezoid aliasing floor for this
        // spacing (about 2e-6); the Gram-corrected projector absorbs it.
        let m2 = inner(&g, &v1sm, &v1sm);
        assert!((m2 - 1.0).abs() < 5e-6, "second moment = {m2}");
        let m0 = inner(&g, &sm, &sm);
        assert!((m0 - 1.0).abs() < 1e-6, "mass = {m0}");
    }

    #[test]
    fn weighted_sup_norm_picks_weighted_max() {
        let g = build_velocity_grid::<f64>(8, 5.0).unwrap();
        let f = VelocityFunction::from_fn(&g, |_| 1.0);
        let w0 = weighted_sup_norm(&g, &f, 0);
        assert!((w0 - 1.0).abs() < 1e-15);
        let w2 = weighted_sup_norm(&g, &f, 2);
        let vmax = 3.0 * 5.0 * 5.0;
        assert!((w2 - (1.0 + vmax)).abs() < 1e-12, "w2 = {w2}");
    }
}
