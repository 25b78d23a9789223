//! Constrained inverse of the linearized collision operator.
//!
//! `L` is positive semidefinite in the weighted inner product with the five
//! collision invariants as null space, so `L g = h` is solvable only for
//! microscopic `h`, and the solution is pinned down by requiring `P g = 0`.
//! Both sides live on the orthogonal complement of the invariants, so the
//! operator being inverted is the complement restriction of the symmetrized
//! realization.
//!
//! The solver works in the similarity variable `y = W^{1/2} g`, where that
//! realization becomes the plainly symmetric matrix
//! `H = W^{1/2} (nu - K) W^{-1/2}` and the constraint columns
//! `b_m = W^{1/2} e_m` are orthonormal. One Cholesky factorization of
//! `P H P + sigma B B^T`, with `P = I - B B^T` the projector onto the
//! complement, is shared by every right-hand side. That matrix is positive
//! definite exactly when the restriction being inverted is coercive, and
//! its inverse maps a complement right-hand side straight to the complement
//! solution, so no multiplier bookkeeping is needed. A residual-refinement
//! pass absorbs the factorization rounding, so solves come out at working
//! precision.

use crate::collision::CollisionOperator;
use crate::error::{CoreError, Result};
use crate::grid::VelocityFunction;
use crate::real::Real;

/// Relative size of the invariant component above which a right-hand side
/// is rejected as not microscopic.
pub const MACRO_REL_TOL: f64 = 1e-6;

/// Relative residual the constrained solve must reach.
pub const SOLVE_REL_TOL: f64 = 1e-10;

/// Dot product with four-way accumulation so the chain of additions does
/// not serialize the loop.
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let ra = ca.remainder();
    let rb = cb.remainder();
    for (x, y) in ca.zip(cb) {
        s0 += x[0] * y[0];
        s1 += x[1] * y[1];
        s2 += x[2] * y[2];
        s3 += x[3] * y[3];
    }
    for (x, y) in ra.iter().zip(rb.iter()) {
        s0 += *x * *y;
    }
    (s0 + s1) + (s2 + s3)
}

fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// In-place lower Cholesky factorization of a dense symmetric matrix.
///
/// On success the lower triangle (diagonal included) holds the factor; the
/// strict upper triangle is left untouched and must be ignored.
fn cholesky_in_place<T: Real>(a: &mut [T], n: usize) -> Result<()> {
    for i in 0..n {
        let (done, rest) = a.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..i {
            let s = row_i[j] - dot(&row_i[..j], &done[j * n..j * n + j]);
            row_i[j] = s / done[j * n + j];
        }
        let d = row_i[i] - dot(&row_i[..i], &row_i[..i]);
        if d <= T::zero() {
            return Err(CoreError::SolveFailure(format!(
                "pivot {i} not positive ({d:e}); complement restriction is not \
                 coercive at this resolution"
            )));
        }
        row_i[i] = d.sqrt();
    }
    Ok(())
}

/// Shared factorization and constraint data for `L^{-1}` on the complement
/// of the invariants.
#[derive(Debug, Clone)]
pub struct SolverCore<T> {
    nn: usize,
    /// Lower Cholesky factor of `P H P + sigma B B^T` (upper triangle stale).
    chol: Vec<T>,
    /// Weighted orthonormal invariant directions `b_m = W^{1/2} e_m`.
    b: Vec<Vec<T>>,
    sqrt_w: Vec<T>,
    inv_sqrt_w: Vec<T>,
}

impl<T: Real> SolverCore<T> {
    pub(crate) fn build(op: &CollisionOperator<T>) -> Result<Self> {
        let nn = op.grid.len();
        let sqrt_w: Vec<T> = op.grid.w.iter().map(|w| w.sqrt()).collect();
        let inv_sqrt_w: Vec<T> = sqrt_w.iter().map(|s| T::one() / *s).collect();
        let b: Vec<Vec<T>> = op
            .invariants_basis()
            .iter()
            .map(|e| {
                e.values
                    .iter()
                    .zip(&sqrt_w)
                    .map(|(v, s)| *v * *s)
                    .collect()
            })
            .collect();
        let ksym = op.k_matrix();
        let mut a = vec![T::zero(); nn * nn];
        for i in 0..nn {
            for j in i..nn {
                let val = if i == j {
                    op.nu[i] - ksym[i * nn + i]
                } else {
                    -(sqrt_w[i] * ksym[i * nn + j]) * inv_sqrt_w[j]
                };
                a[i * nn + j] = val;
                a[j * nn + i] = val;
            }
        }

        // Projecting both sides of `H` onto the complement keeps the
        // factorized matrix free of any conservation defect the symmetrized
        // matrix carries along the invariant directions, so definiteness
        // hinges only on the coercivity of the restriction actually being
        // inverted. The invariant directions themselves are pinned at
        // `sigma`, which only needs to sit at the scale of the collision
        // frequency for conditioning.
        let sigma = op.nu.iter().cloned().fold(T::zero(), T::max);
        let nm = b.len();
        let mut bt = vec![T::zero(); nn * nm];
        for (m, bm) in b.iter().enumerate() {
            for i in 0..nn {
                bt[i * nm + m] = bm[i];
            }
        }
        let mut ut = vec![T::zero(); nn * nm];
        for (m, bm) in b.iter().enumerate() {
            for i in 0..nn {
                ut[i * nm + m] = dot(&a[i * nn..(i + 1) * nn], bm);
            }
        }
        let mut gram = vec![T::zero(); nm * nm];
        for (m, bm) in b.iter().enumerate() {
            for n in 0..nm {
                let mut s = T::zero();
                for i in 0..nn {
                    s += bm[i] * ut[i * nm + n];
                }
                gram[m * nm + n] = s;
            }
            gram[m * nm + m] += sigma;
        }
        let mut gb = vec![T::zero(); nn * nm];
        for j in 0..nn {
            for m in 0..nm {
                let mut s = T::zero();
                for n in 0..nm {
                    s += gram[m * nm + n] * bt[j * nm + n];
                }
                gb[j * nm + m] = s;
            }
        }
        for i in 0..nn {
            for j in i..nn {
                let mut corr = T::zero();
                for m in 0..nm {
                    corr += bt[i * nm + m] * (gb[j * nm + m] - ut[j * nm + m])
                        - ut[i * nm + m] * bt[j * nm + m];
                }
                let val = a[i * nn + j] + corr;
                a[i * nn + j] = val;
                a[j * nn + i] = val;
            }
        }
        cholesky_in_place(&mut a, nn)?;

        Ok(Self {
            nn,
            chol: a,
            b,
            sqrt_w,
            inv_sqrt_w,
        })
    }

    /// Coefficients of `y` against the constraint columns.
    fn b_coeffs(&self, y: &[T]) -> Vec<T> {
        self.b.iter().map(|bm| dot(bm, y)).collect()
    }

    /// Remove the invariant component of `y` in place.
    pub(crate) fn project_off(&self, y: &mut [T]) {
        for bm in &self.b {
            let c = dot(bm, y);
            for (yi, bi) in y.iter_mut().zip(bm.iter()) {
                *yi -= c * *bi;
            }
        }
    }

    /// Solve the shifted system in place using the cached factor.
    fn chol_solve(&self, x: &mut [T]) {
        let n = self.nn;
        let l = &self.chol;
        for i in 0..n {
            let s = x[i] - dot(&l[i * n..i * n + i], &x[..i]);
            x[i] = s / l[i * n + i];
        }
        for k in (0..n).rev() {
            let xk = x[k] / l[k * n + k];
            x[k] = xk;
            let row = &l[k * n..k * n + k];
            for (xi, lk) in x[..k].iter_mut().zip(row.iter()) {
                *xi -= *lk * xk;
            }
        }
    }

    /// `out = H y` through the symmetrized operator.
    pub(crate) fn apply_h(&self, op: &CollisionOperator<T>, y: &[T], out: &mut [T]) {
        let mut g = vec![T::zero(); self.nn];
        for i in 0..self.nn {
            g[i] = y[i] * self.inv_sqrt_w[i];
        }
        op.apply_l_sym_slice(&g, out);
        for i in 0..self.nn {
            out[i] *= self.sqrt_w[i];
        }
    }

    /// One factored pass: the projected shifted matrix sends the complement
    /// to itself, so a triangular solve followed by sweeping out the
    /// rounding-level invariant component inverts the restriction.
    fn factored_pass(&self, rhs: &[T]) -> Vec<T> {
        let mut y = rhs.to_vec();
        self.chol_solve(&mut y);
        self.project_off(&mut y);
        y
    }

    /// Invert the complement restriction of `H`: returns `y` orthogonal to
    /// the constraints with the complement part of `H y` equal to `rhs`
    /// (which must itself be orthogonal to the constraints).
    pub(crate) fn solve_complement(
        &self,
        op: &CollisionOperator<T>,
        rhs: &[T],
    ) -> Result<Vec<T>> {
        let normr = norm2(rhs);
        let mut y = self.factored_pass(rhs);
        if normr == T::zero() {
            return Ok(y);
        }
        let mut r = vec![T::zero(); self.nn];
        for _ in 0..2 {
            self.apply_h(op, &y, &mut r);
            self.project_off(&mut r);
            for (ri, fi) in r.iter_mut().zip(rhs.iter()) {
                *ri = *fi - *ri;
            }
            if norm2(&r) <= T::of(1e-14) * normr {
                break;
            }
            let dy = self.factored_pass(&r);
            for (yi, di) in y.iter_mut().zip(dy.iter()) {
                *yi += *di;
            }
        }
        Ok(y)
    }

    /// Constrained solve in the original variables.
    fn solve(&self, op: &CollisionOperator<T>, h: &[T]) -> Result<Vec<T>> {
        let nn = self.nn;
        let mut f = vec![T::zero(); nn];
        for i in 0..nn {
            f[i] = h[i] * self.sqrt_w[i];
        }
        let normh = norm2(&f);
        if normh == T::zero() {
            return Ok(f);
        }
        let coeffs = self.b_coeffs(&f);
        let macro_norm = dot(&coeffs, &coeffs).sqrt();
        if macro_norm > T::of(MACRO_REL_TOL) * normh {
            return Err(CoreError::NotMicroscopic(format!(
                "invariant component {:e} of norm {:e}",
                macro_norm.to_f64_lossy(),
                normh.to_f64_lossy()
            )));
        }
        for (bm, c) in self.b.iter().zip(&coeffs) {
            for (fi, bi) in f.iter_mut().zip(bm.iter()) {
                *fi -= *c * *bi;
            }
        }
        let normf = norm2(&f);
        if normf == T::zero() {
            return Ok(f);
        }

        let mut y = self.solve_complement(op, &f)?;

        let mut r = vec![T::zero(); nn];
        self.apply_h(op, &y, &mut r);
        self.project_off(&mut r);
        for (ri, fi) in r.iter_mut().zip(f.iter()) {
            *ri -= *fi;
        }
        let rel = norm2(&r) / normf;
        if rel > T::of(SOLVE_REL_TOL) {
            return Err(CoreError::SolveFailure(format!(
                "constrained solve stalled at relative residual {:e}",
                rel.to_f64_lossy()
            )));
        }
        for i in 0..nn {
            y[i] *= self.inv_sqrt_w[i];
        }
        Ok(y)
    }
}

impl<T: Real> CollisionOperator<T> {
    /// The shared solver state, built on first use.
    pub(crate) fn solver_core(&self) -> Result<&SolverCore<T>> {
        self.solver.get_or_try_init(|| SolverCore::build(self))
    }

    /// Force the factorization to be built now (it is otherwise lazy).
    pub fn prepare_solver(&self) -> Result<()> {
        self.solver_core().map(|_| ())
    }
}

/// Solve `L g = h` with `P g = 0` for a microscopic right-hand side.
///
/// The right-hand side may carry an invariant component up to
/// [`MACRO_REL_TOL`] relative, which is projected away; anything larger is
/// rejected. The returned solution satisfies the complement-restricted
/// equation to [`SOLVE_REL_TOL`] relative residual in the weighted norm:
/// both sides of `L g = h` are microscopic, so the residual is measured
/// after projecting `L g` back onto the complement, which is where the
/// restricted operator acts.
pub fn solve_linv<T: Real>(
    op: &CollisionOperator<T>,
    h: &VelocityFunction<T>,
) -> Result<VelocityFunction<T>> {
    op.grid.check_len(h.values.len())?;
    let core = op.solver_core()?;
    core.solve(op, &h.values).map(|values| VelocityFunction { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionParams;
    use crate::grid::{build_velocity_grid, inner, norm, sqrt_maxwellian};
    use once_cell::sync::Lazy;

    static OP: Lazy<CollisionOperator<f64>> = Lazy::new(|| {
        let grid = build_velocity_grid::<f64>(8, 5.0).unwrap();
        let params = CollisionParams {
            interp_order: 2,
            ..CollisionParams::default()
        };
        CollisionOperator::assemble(&grid, params).unwrap()
    });

    #[test]
    fn zero_right_hand_side_returns_zero() {
        let h = VelocityFunction::zeros(&OP.grid);
        let g = solve_linv(&OP, &h).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_macroscopic_right_hand_side() {
        let h = VelocityFunction::from_fn(&OP.grid, sqrt_maxwellian);
        match solve_linv(&OP, &h) {
            Err(CoreError::NotMicroscopic(_)) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn round_trips_random_microscopic_functions() {
        use rand::prelude::*;
        let op = &*OP;
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let raw = VelocityFunction {
                values: (0..op.grid.len())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            };
            let h = op.projector().complement(&op.grid, &raw);
            let g = solve_linv(op, &h).unwrap();
            let lg = op.apply_l_sym(&g).unwrap();
            let lg_micro = op.projector().complement(&op.grid, &lg);
            let mut res = lg_micro.clone();
            res.add_scaled(-1.0, &h);
            let rel = norm(&op.grid, &res) / norm(&op.grid, &h);
            assert!(rel <= SOLVE_REL_TOL, "round-trip residual {rel:e}");
            let (_, pg) = op.projector().project(&op.grid, &g);
            let pn = norm(&op.grid, &pg);
            assert!(pn <= 1e-12 * norm(&op.grid, &g).max(1.0), "macro leak {pn:e}");
        }
    }

    #[test]
    fn inverse_of_shear_stress_function_stays_positive() {
        let op = &*OP;
        let a12 = VelocityFunction::from_fn(&op.grid, |v| {
            v[0] * v[1] * sqrt_maxwellian(v)
        });
        let g = solve_linv(op, &a12).unwrap();
        assert!(inner(&op.grid, &g, &a12) > 0.0);
    }
}
