//! Tensor-product Lagrange interpolation on the uniform velocity axis.
//!
//! Post-collision velocities rarely land on grid nodes; their values are
//! taken from the interpolation of the density `g / sqrt(mu)` and multiplied
//! by the exact Maxwellian afterwards. The stencil is clamped inside the
//! axis, which turns into polynomial extrapolation near the boundary and
//! keeps the reproduction of polynomials (and with it the exact discrete
//! collision invariants) intact.

use crate::grid::VelocityGrid;
use crate::real::Real;

/// Largest supported stencil size (interpolation order 9).
pub const MAX_STENCIL: usize = 10;

/// Per-axis inverse denominators of the Lagrange weights for a unit-spaced
/// stencil of size `s`: `1 / prod_{j != i} (i - j)`.
fn inv_denominators<T: Real>(s: usize) -> [T; MAX_STENCIL] {
    let mut out = [T::zero(); MAX_STENCIL];
    for i in 0..s {
        let mut d = 1.0f64;
        for j in 0..s {
            if j != i {
                d *= i as f64 - j as f64;
            }
        }
        out[i] = T::of(1.0 / d);
    }
    out
}

/// Precomputed interpolation context for one grid.
#[derive(Debug, Clone)]
pub struct Interpolator<T> {
    /// Stencil size (order + 1).
    pub s: usize,
    x0: T,
    inv_h: T,
    n: usize,
    inv_den: [T; MAX_STENCIL],
}

/// One axis stencil: start index and the `s` Lagrange weights.
#[derive(Debug, Clone, Copy)]
pub struct AxisStencil<T> {
    pub start: usize,
    pub w: [T; MAX_STENCIL],
}

impl<T: Real> Interpolator<T> {
    /// Build for a grid and interpolation order (stencil = order + 1).
    pub fn new(grid: &VelocityGrid<T>, order: usize) -> Self {
        let s = order + 1;
        assert!(s >= 2 && s <= MAX_STENCIL, "stencil size {s} unsupported");
        assert!(grid.n >= s, "grid too small for the stencil");
        Self {
            s,
            x0: grid.axis[0],
            inv_h: T::one() / grid.h,
            n: grid.n,
            inv_den: inv_denominators(s),
        }
    }

    /// Axis stencil for a coordinate value.
    #[inline]
    pub fn axis_stencil(&self, p: T) -> AxisStencil<T> {
        let s = self.s;
        // Fractional axis coordinate.
        let u = (p - self.x0) * self.inv_h;
        let cell = u.floor().to_f64_lossy() as i64;
        // Center the stencil on the containing cell, clamped to the axis.
        let lo = cell - (s as i64 - 1) / 2;
        let start = lo.clamp(0, self.n as i64 - s as i64) as usize;
        // Local coordinate relative to the stencil start, in units of h.
        let t = u - T::of(start as f64);
        let mut w = [T::zero(); MAX_STENCIL];
        // prefix[i] = prod_{j<i} (t - j), suffix accumulated in reverse.
        let mut prefix = [T::zero(); MAX_STENCIL];
        let mut acc = T::one();
        for (i, pre) in prefix.iter_mut().enumerate().take(s) {
            *pre = acc;
            acc *= t - T::of(i as f64);
        }
        let mut suffix = T::one();
        for i in (0..s).rev() {
            w[i] = prefix[i] * suffix * self.inv_den[i];
            suffix *= t - T::of(i as f64);
        }
        AxisStencil { start, w }
    }

    /// Interpolated value of nodal data at a 3-D point.
    ///
    /// Exact (to rounding) whenever the data are the restriction of a
    /// polynomial of per-axis degree below the stencil size.
    pub fn gather(&self, grid: &VelocityGrid<T>, values: &[T], p: [T; 3]) -> T {
        let sx = self.axis_stencil(p[0]);
        let sy = self.axis_stencil(p[1]);
        let sz = self.axis_stencil(p[2]);
        let n = grid.n;
        let s = self.s;
        let mut acc = T::zero();
        for ix in 0..s {
            let wx = sx.w[ix];
            let bx = (sx.start + ix) * n;
            for iy in 0..s {
                let wxy = wx * sy.w[iy];
                let base = (bx + sy.start + iy) * n + sz.start;
                let row = &values[base..base + s];
                let mut inner = T::zero();
                for (iz, &val) in row.iter().enumerate() {
                    inner += sz.w[iz] * val;
                }
                acc += wxy * inner;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_velocity_grid;

    fn poly(v: [f64; 3], deg: usize) -> f64 {
        // A full-degree per-axis polynomial to exercise reproduction.
        let p1 = (0..=deg).map(|k| 0.3 + v[0].powi(k as i32)).sum::<f64>();
        let p2 = (0..=deg).map(|k| 1.1 - 0.5 * v[1].powi(k as i32)).sum::<f64>();
        let p3 = (0..=deg).map(|k| 0.25 * v[2].powi(k as i32) - 0.1).sum::<f64>();
        p1 * p2 * p3
    }

    #[test]
    fn reproduces_polynomials_of_stencil_degree() {
        let g = build_velocity_grid::<f64>(12, 6.0).unwrap();
        for order in [1usize, 3, 5, 7] {
            let it = Interpolator::new(&g, order);
            let vals: Vec<f64> = (0..g.len()).map(|i| poly(g.node(i), order)).collect();
            for &p in &[
                [0.37, -1.91, 2.45],
                [-5.99, 5.2, 0.01],
                [3.3, 3.3, -3.3],
            ] {
                let got = it.gather(&g, &vals, p);
                let want = poly(p, order);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "order {order}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn extrapolates_polynomials_outside_the_box() {
        let g = build_velocity_grid::<f64>(12, 6.0).unwrap();
        let it = Interpolator::new(&g, 5);
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let v = g.node(i);
                1.0 + v[0] + v[1] * v[1] + v[2] * v[0]
            })
            .collect();
        let p = [6.8, -6.5, 2.0];
        let got = it.gather(&g, &vals, p);
        let want = 1.0 + p[0] + p[1] * p[1] + p[2] * p[0];
        assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn exact_node_hits_return_nodal_values() {
        let g = build_velocity_grid::<f64>(12, 6.0).unwrap();
        let it = Interpolator::new(&g, 7);
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        for &i in &[0usize, 341, 863, 1727] {
            let v = g.node(i);
            let got = it.gather(&g, &vals, v);
            assert_eq!(got, vals[i], "node {i}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let g = build_velocity_grid::<f64>(16, 8.0).unwrap();
        for order in [1usize, 2, 5, 7, 9] {
            let it = Interpolator::new(&g, order);
            for &p in &[-7.7f64, -0.03, 0.5, 4.44, 7.99] {
                let st = it.axis_stencil(p);
                let s: f64 = st.w.iter().take(it.s).sum();
                assert!((s - 1.0).abs() < 1e-12, "order {order} p {p}: {s}");
            }
        }
    }
}
