//! Hydrodynamic projector onto `span{sqrt(mu), v_i sqrt(mu), |v|^2 sqrt(mu)}`.
//!
//! The basis is analytically orthonormal, but on the grid it is only
//! orthonormal up to quadrature error, so the projector is built from the
//! discrete Gram matrix. That makes `P` idempotent to rounding and keeps the
//! reconstruction identity for the macroscopic coefficients exact.

use crate::error::Result;
use crate::grid::{inner, MacroTriple, VelocityFunction, VelocityGrid};
use crate::real::Real;

/// Orthonormalized hydrodynamic basis and its raw-coefficient map.
#[derive(Debug, Clone)]
pub struct Projector<T> {
    /// Raw basis: `sqrt(mu)`, `v_d sqrt(mu)` (d = 0,1,2),
    /// `(|v|^2 - 3)/sqrt(6) sqrt(mu)`.
    pub raw: Vec<VelocityFunction<T>>,
    /// Discretely orthonormalized basis spanning the same space.
    pub ortho: Vec<VelocityFunction<T>>,
    /// Upper-triangular factor of the raw Gram matrix (row major, 5x5).
    gram_r: [T; 25],
}

fn cholesky5<T: Real>(a: &[T; 25]) -> [T; 25] {
    // Upper-triangular R with A = R^T R; A is within rounding of identity.
    let mut r = [T::zero(); 25];
    for i in 0..5 {
        let mut d = a[i * 5 + i];
        for k in 0..i {
            d -= r[k * 5 + i] * r[k * 5 + i];
        }
        let di = d.sqrt();
        r[i * 5 + i] = di;
        for j in (i + 1)..5 {
            let mut s = a[i * 5 + j];
            for k in 0..i {
                s -= r[k * 5 + i] * r[k * 5 + j];
            }
            r[i * 5 + j] = s / di;
        }
    }
    r
}

fn solve_upper5<T: Real>(r: &[T; 25], b: &mut [T; 5]) {
    // Solve R x = b in place.
    for i in (0..5).rev() {
        let mut s = b[i];
        for j in (i + 1)..5 {
            s -= r[i * 5 + j] * b[j];
        }
        b[i] = s / r[i * 5 + i];
    }
}

fn solve_upper_t5<T: Real>(r: &[T; 25], b: &mut [T; 5]) {
    // Solve R^T x = b in place.
    for i in 0..5 {
        let mut s = b[i];
        for j in 0..i {
            s -= r[j * 5 + i] * b[j];
        }
        b[i] = s / r[i * 5 + i];
    }
}

impl<T: Real> Projector<T> {
    /// Build the projector for a grid.
    pub fn new(grid: &VelocityGrid<T>) -> Result<Self> {
        let inv_sqrt6 = T::of(1.0 / 6.0f64.sqrt());
        let mut raw = Vec::with_capacity(5);
        raw.push(VelocityFunction {
            values: grid.sqrt_mu.clone(),
        });
        for d in 0..3 {
            let mut f = VelocityFunction::zeros(grid);
            for i in 0..grid.len() {
                f.values[i] = grid.node(i)[d] * grid.sqrt_mu[i];
            }
            raw.push(f);
        }
        let mut e4 = VelocityFunction::zeros(grid);
        for i in 0..grid.len() {
            e4.values[i] = (grid.vsq[i] - T::of(3.0)) * inv_sqrt6 * grid.sqrt_mu[i];
        }
        raw.push(e4);

        let mut gram = [T::zero(); 25];
        for a in 0..5 {
            for b in 0..5 {
                gram[a * 5 + b] = inner(grid, &raw[a], &raw[b]);
            }
        }
        let gram_r = cholesky5(&gram);

        // ortho_k = sum_j raw_j (R^{-1})_{jk}: solve R^T c = e_k column-wise.
        let mut ortho = Vec::with_capacity(5);
        for k in 0..5 {
            // Column k of R^{-1} is the solution of R x = e_k.
            let mut col = [T::zero(); 5];
            col[k] = T::one();
            solve_upper5(&gram_r, &mut col);
            let mut f = VelocityFunction::zeros(grid);
            for (j, c) in col.iter().enumerate() {
                if *c != T::zero() {
                    f.add_scaled(*c, &raw[j]);
                }
            }
            ortho.push(f);
        }
        Ok(Self { raw, ortho, gram_r })
    }

    /// Coefficients of `P g` in the raw basis.
    fn raw_coeffs(&self, grid: &VelocityGrid<T>, g: &VelocityFunction<T>) -> [T; 5] {
        // c = Gram^{-1} <raw, g> = R^{-1} R^{-T} b.
        let mut b = [T::zero(); 5];
        for (a, e) in self.raw.iter().enumerate() {
            b[a] = inner(grid, e, g);
        }
        solve_upper_t5(&self.gram_r, &mut b);
        solve_upper5(&self.gram_r, &mut b);
        b
    }

    /// Project onto the hydrodynamic subspace.
    ///
    /// Returns the macroscopic coefficients in the convention
    /// `P g = (rho + u . v + theta (|v|^2 - 3)/2) sqrt(mu)` together with the
    /// projected function.
    pub fn project(
        &self,
        grid: &VelocityGrid<T>,
        g: &VelocityFunction<T>,
    ) -> (MacroTriple<T>, VelocityFunction<T>) {
        let c = self.raw_coeffs(grid, g);
        let mut pg = VelocityFunction::zeros(grid);
        for (j, cj) in c.iter().enumerate() {
            pg.add_scaled(*cj, &self.raw[j]);
        }
        let sqrt6 = T::of(6.0f64.sqrt());
        let triple = MacroTriple {
            rho: c[0],
            u: [c[1], c[2], c[3]],
            theta: c[4] * sqrt6 * T::of(2.0 / 3.0) * T::of(0.5),
        };
        (triple, pg)
    }

    /// Complementary projection `g - P g`.
    pub fn complement(
        &self,
        grid: &VelocityGrid<T>,
        g: &VelocityFunction<T>,
    ) -> VelocityFunction<T> {
        let (_, pg) = self.project(grid, g);
        let mut out = g.clone();
        out.add_scaled(-T::one(), &pg);
        out
    }

    /// Build the hydrodynamic function with the given coefficients.
    pub fn reconstruct(&self, grid: &VelocityGrid<T>, m: &MacroTriple<T>) -> VelocityFunction<T> {
        let mut f = VelocityFunction::zeros(grid);
        for i in 0..grid.len() {
            let v = grid.node(i);
            let q = m.rho
                + m.u[0] * v[0]
                + m.u[1] * v[1]
                + m.u[2] * v[2]
                + m.theta * (grid.vsq[i] - T::of(3.0)) * T::of(0.5);
            f.values[i] = q * grid.sqrt_mu[i];
        }
        f
    }
}

/// Convenience wrapper matching the rest of the free-function API.
pub fn project_p<T: Real>(
    proj: &Projector<T>,
    grid: &VelocityGrid<T>,
    g: &VelocityFunction<T>,
) -> (MacroTriple<T>, VelocityFunction<T>) {
    proj.project(grid, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_velocity_grid;

    fn grid() -> VelocityGrid<f64> {
        build_velocity_grid(12, 6.0).unwrap()
    }

    #[test]
    fn projector_is_idempotent() {
        let g = grid();
        let p = Projector::new(&g).unwrap();
        let f = VelocityFunction::from_fn(&g, |v| {
            (0.3 + v[0] - 0.2 * v[1] * v[2] + 0.05 * v[0].powi(3)) * crate::grid::sqrt_maxwellian(v)
        });
        let (_, pf) = p.project(&g, &f);
        let (_, ppf) = p.project(&g, &pf);
        let mut diff = ppf.clone();
        diff.add_scaled(-1.0, &pf);
        let d = crate::grid::norm(&g, &diff);
        let s = crate::grid::norm(&g, &pf);
        assert!(d <= 1e-13 * s.max(1.0), "idempotency defect {d}");
    }

    #[test]
    fn projector_fixes_each_invariant() {
        let g = grid();
        let p = Projector::new(&g).unwrap();
        let mut cases: Vec<VelocityFunction<f64>> = vec![VelocityFunction {
            values: g.sqrt_mu.clone(),
        }];
        for d in 0..3 {
            cases.push(VelocityFunction::from_fn(&g, |v| {
                v[d] * crate::grid::sqrt_maxwellian(v)
            }));
        }
        cases.push(VelocityFunction::from_fn(&g, |v| {
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * crate::grid::sqrt_maxwellian(v)
        }));
        for f in cases {
            let (_, pf) = p.project(&g, &f);
            let mut diff = pf.clone();
            diff.add_scaled(-1.0, &f);
            let d = crate::grid::norm(&g, &diff);
            let s = crate::grid::norm(&g, &f);
            assert!(d <= 1e-12 * s, "invariant moved by {d} (scale {s})");
        }
    }

    #[test]
    fn macro_coefficients_reconstruct_projection() {
        let g = grid();
        let p = Projector::new(&g).unwrap();
        let f = VelocityFunction::from_fn(&g, |v| {
            (1.0 + 0.5 * v[0] - 0.25 * v[1] + 0.125 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
                * crate::grid::sqrt_maxwellian(v)
        });
        let (m, pf) = p.project(&g, &f);
        let rec = p.reconstruct(&g, &m);
        let mut diff = rec.clone();
        diff.add_scaled(-1.0, &pf);
        let d = crate::grid::norm(&g, &diff);
        assert!(d <= 1e-12, "reconstruction defect {d}");
    }

    #[test]
    fn pure_deviatoric_function_projects_to_zero() {
        let g = grid();
        let p = Projector::new(&g).unwrap();
        let f = VelocityFunction::from_fn(&g, |v| v[0] * v[1] * crate::grid::sqrt_maxwellian(v));
        let (m, pf) = p.project(&g, &f);
        let d = crate::grid::norm(&g, &pf);
        assert!(d <= 1e-12, "deviatoric leak {d}");
        assert!(m.rho.abs() <= 1e-13 && m.theta.abs() <= 1e-13);
    }
}
