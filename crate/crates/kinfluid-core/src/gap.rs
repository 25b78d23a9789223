//! Spectral-gap estimate for the linearized collision operator.
//!
//! The coercivity constant is the smallest eigenvalue of the pencil
//! `(L, diag nu)` on the orthogonal complement of the collision invariants:
//! the largest `delta0` with `inner(Lg, g) >= delta0 * inner(nu g, g)` for
//! microscopic `g`. It is found by block inverse iteration with the shared
//! Cholesky factor of the shifted solver matrix, accelerated by a
//! Rayleigh-Ritz projection on every sweep.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::CollisionOperator;
use crate::error::{CoreError, Result};
use crate::real::Real;

/// Grid parameters an estimate was computed on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionTag {
    pub points_per_axis: usize,
    pub cutoff: f64,
}

/// Smallest generalized eigenvalue of `(L, diag nu)` on the complement of
/// the invariants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGapEstimate {
    pub delta0: f64,
    pub resolution_tag: ResolutionTag,
}

/// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues ascending; `a` is overwritten and `q`
/// receives the eigenvectors column-wise.
fn jacobi_eigh<T: Real>(a: &mut [T], q: &mut [T], m: usize) -> Result<Vec<T>> {
    for i in 0..m {
        for j in 0..m {
            q[i * m + j] = if i == j { T::one() } else { T::zero() };
        }
    }
    let tol = T::of(1e-14);
    for _ in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..m {
            diag += a[i * m + i] * a[i * m + i];
            for j in (i + 1)..m {
                off += a[i * m + j] * a[i * m + j];
            }
        }
        if off.sqrt() <= tol * (diag.sqrt() + T::of(1e-300)) {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| {
                a[x * m + x]
                    .partial_cmp(&a[y * m + y])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let qc = q.to_vec();
            for (newc, &oldc) in order.iter().enumerate() {
                for r in 0..m {
                    q[r * m + newc] = qc[r * m + oldc];
                }
            }
            return Ok(order.iter().map(|&x| a[x * m + x]).collect());
        }
        for p in 0..m {
            for r in (p + 1)..m {
                let apr = a[p * m + r];
                if apr == T::zero() {
                    continue;
                }
                let app = a[p * m + p];
                let arr = a[r * m + r];
                let theta = (arr - app) / (T::of(2.0) * apr);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akr = a[k * m + r];
                    a[k * m + p] = c * akp - s * akr;
                    a[k * m + r] = s * akp + c * akr;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let ark = a[r * m + k];
                    a[p * m + k] = c * apk - s * ark;
                    a[r * m + k] = s * apk + c * ark;
                }
                for k in 0..m {
                    let qkp = q[k * m + p];
                    let qkr = q[k * m + r];
                    q[k * m + p] = c * qkp - s * qkr;
                    q[k * m + r] = s * qkp + c * qkr;
                }
            }
        }
    }
    Err(CoreError::EigenFailure(
        "small symmetric eigensolve did not converge".into(),
    ))
}

/// Estimate the coercivity constant of the operator.
pub fn estimate_spectral_gap<T: Real>(
    op: &CollisionOperator<T>,
) -> Result<SpectralGapEstimate> {
    let core = op.solver_core()?;
    let nn = op.grid.len();
    let m = 10.min(nn.saturating_sub(5)).max(1);
    let max_sweeps = 300;

    let mut rng = ChaCha8Rng::seed_from_u64(271_828_182);
    let mut block: Vec<Vec<T>> = (0..m)
        .map(|_| {
            (0..nn)
                .map(|_| T::of(rng.gen_range(-1.0..1.0)))
                .collect::<Vec<T>>()
        })
        .collect();
    for y in block.iter_mut() {
        core.project_off(y);
    }

    let d_inner = |x: &[T], y: &[T]| -> T {
        let mut s = T::zero();
        for i in 0..nn {
            s += op.nu[i] * x[i] * y[i];
        }
        s
    };

    let mut prev = T::infinity();
    let mut lam_min = T::zero();
    let mut hy = vec![T::zero(); nn];
    let mut rhs = vec![T::zero(); nn];
    for sweep in 0..max_sweeps {
        // One inverse-iteration step: y <- H^{-1} D y on the complement.
        for y in block.iter_mut() {
            for i in 0..nn {
                rhs[i] = y[i] * op.nu[i];
            }
            core.project_off(&mut rhs);
            *y = core.solve_complement(op, &rhs)?;
        }
        // D-orthonormalize by modified Gram-Schmidt.
        for k in 0..m {
            for j in 0..k {
                let (head, tail) = block.split_at_mut(k);
                let c = d_inner(&head[j], &tail[0]);
                for i in 0..nn {
                    tail[0][i] -= c * head[j][i];
                }
            }
            let nk = d_inner(&block[k], &block[k]).sqrt();
            if nk <= T::of(1e-280) {
                return Err(CoreError::EigenFailure(format!(
                    "iteration block degenerated at column {k}"
                )));
            }
            let inv = T::one() / nk;
            for i in 0..nn {
                block[k][i] *= inv;
            }
        }
        // Rayleigh-Ritz in the D metric: the block is D-orthonormal, so the
        // small problem is an ordinary symmetric eigenproblem.
        let mut small = vec![T::zero(); m * m];
        let mut hblock: Vec<Vec<T>> = Vec::with_capacity(m);
        for y in &block {
            core.apply_h(op, y, &mut hy);
            hblock.push(hy.clone());
        }
        for p in 0..m {
            for r in p..m {
                let mut s = T::zero();
                for i in 0..nn {
                    s += block[p][i] * hblock[r][i];
                }
                small[p * m + r] = s;
                small[r * m + p] = s;
            }
        }
        let mut q = vec![T::zero(); m * m];
        let lams = jacobi_eigh(&mut small, &mut q, m)?;
        lam_min = lams[0];

        // Rotate the block onto the Ritz vectors.
        let old = block.clone();
        for (k, y) in block.iter_mut().enumerate() {
            for i in 0..nn {
                let mut s = T::zero();
                for (j, oj) in old.iter().enumerate() {
                    s += oj[i] * q[j * m + k];
                }
                y[i] = s;
            }
        }

        let drift = (lam_min - prev).abs() / lam_min.abs().max(T::of(1e-300));
        if sweep >= 3 && drift <= T::of(1e-10) {
            if lam_min <= T::zero() {
                return Err(CoreError::EigenFailure(format!(
                    "nonpositive gap {:e}: discretization too coarse",
                    lam_min.to_f64_lossy()
                )));
            }
            return Ok(SpectralGapEstimate {
                delta0: lam_min.to_f64_lossy(),
                resolution_tag: ResolutionTag {
                    points_per_axis: op.grid.n,
                    cutoff: op.grid.cutoff.to_f64_lossy(),
                },
            });
        }
        prev = lam_min;
    }
    Err(CoreError::EigenFailure(format!(
        "gap iteration did not settle in {max_sweeps} sweeps (last {:e})",
        lam_min.to_f64_lossy()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionParams;
    use crate::grid::{build_velocity_grid, inner, VelocityFunction};
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
    fn gap_is_positive_and_tagged() {
        let est = estimate_spectral_gap(&OP).unwrap();
        assert!(est.delta0 > 0.0, "gap {}", est.delta0);
        assert!(est.delta0 < 1.0, "gap {} above the trivial bound", est.delta0);
        assert_eq!(est.resolution_tag.points_per_axis, 8);
        assert_eq!(est.resolution_tag.cutoff, 5.0);
    }

    #[test]
    fn invariants_sit_below_the_gap_scale() {
        let op = &*OP;
        let est = estimate_spectral_gap(op).unwrap();
        for e in op.invariants_basis() {
            let le = op.apply_l_sym(e).unwrap();
            let num = inner(&op.grid, &le, e);
            let den = {
                let nu_e = VelocityFunction {
                    values: e
                        .values
                        .iter()
                        .zip(&op.nu)
                        .map(|(v, nu)| *v * *nu)
                        .collect(),
                };
                inner(&op.grid, &nu_e, e)
            };
            let q = num / den;
            assert!(
                q.abs() < 1e-8 * est.delta0,
                "invariant Rayleigh quotient {q:e} vs gap {}",
                est.delta0
            );
        }
    }

    #[test]
    fn coercivity_holds_on_random_microscopic_functions() {
        use rand::prelude::*;
        let op = &*OP;
        let est = estimate_spectral_gap(op).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(19);
        for _ in 0..30 {
            let raw = VelocityFunction {
                values: (0..op.grid.len())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            };
            let g = op.projector().complement(&op.grid, &raw);
            let lg = op.apply_l_sym(&g).unwrap();
            let num = inner(&op.grid, &lg, &g);
            let den: f64 = op
                .grid
                .w
                .iter()
                .zip(&op.nu)
                .zip(&g.values)
                .map(|((w, nu), v)| w * nu * v * v)
                .sum();
            assert!(
                num >= est.delta0 * den * (1.0 - 1e-6),
                "coercivity violated: {num:e} vs {:e}",
                est.delta0 * den
            );
        }
    }
}
