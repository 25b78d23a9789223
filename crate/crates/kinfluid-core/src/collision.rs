//! Discrete linearized hard-sphere collision operator and its bilinear form.
//!
//! The linearized operator splits as `L g = nu g - K g` with a positive
//! multiplier `nu` and a compact integral part `K`. Rows of `K` are
//! assembled by direct quadrature of the scattering integral: for each node
//! pair the angular rule supplies post-collisional velocities, gain values
//! there are taken by Lagrange interpolation of `g` itself, and the exact
//! product identity `mu(v') mu(v*') = mu(v) mu(v*)` turns the surrounding
//! Maxwellian factors into a per-deposit damping `exp((|v'|^2 - |v|^2) / 4
//! - |v*|^2 / 2)`, which never exceeds `exp(-|v*|^2 / 4)`. Every assembled
//! entry therefore stays on the scale of the true kernel. Interpolating the
//! unweighted ratio `g / sqrt(mu)` instead would divide each column by
//! `sqrt(mu(v_c))` and blow stencil-smearing error up by `exp(|v_c|^2 / 4)`,
//! which on a truncated box dwarfs `nu` and destroys positivity.
//!
//! Post-collision speeds obey `|v'|^2 <= |v|^2 + |v*|^2`, so pairs whose
//! exchange sphere exits the box are dropped whole and scattered points
//! never need extrapolation. The residual interpolation error of the kept
//! deposits is restored per row by a rank-five correction on
//! Maxwellian-weighted representers: the row's five invariant moments have
//! closed-form targets because every exchange conserves them pointwise, so
//! the identities `K(sqrt(mu) m) = nu sqrt(mu) m` hold to rounding, not to
//! quadrature accuracy. Assembly refuses the grid when the repaired
//! content is not Maxwellian-negligible, since that means collisions
//! visibly scatter mass through the domain boundary.
//!
//! The grid, the Maxwellian, and the kernel are invariant under the 48
//! signed axis permutations, so only one row per node orbit is assembled;
//! the rest are exact index-permuted copies, which makes the operator
//! commute with the grid symmetries bitwise.
//!
//! Two realizations of `K` are kept. The raw one preserves the per-row
//! structure above: invariants are annihilated to rounding, but its
//! weighted matrix is only symmetric to quadrature accuracy, because the
//! row at `v` and the row at `v_c` integrate the shared kernel with
//! different pair rules. The symmetrized one averages the matrix with its
//! weighted transpose and is what the constrained solver, the spectral-gap
//! estimate, and the self-adjointness contract use. Both induce the
//! identical weighted quadratic form, so spectra of the symmetric form are
//! shared.

use std::collections::HashMap;

use crate::error::{CoreError, Result};
use crate::grid::{VelocityFunction, VelocityGrid};
use crate::interp::Interpolator;
use crate::projector::Projector;
use crate::real::Real;
use crate::solve::SolverCore;
use crate::sphere::{frame_for, AlignedSphereRule};
use crate::symmetry::{CubeGroup, OrbitTable, SignedPerm};
use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

/// Quadrature and interpolation controls for the operator assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Gauss-Legendre nodes for the polar angle (per hemisphere).
    pub polar_points: usize,
    /// Uniform azimuth nodes around the relative velocity.
    pub azimuth_points: usize,
    /// Lagrange interpolation order for off-grid evaluations.
    ///
    /// Deposits carry Maxwellian damping, so the order trades only
    /// accuracy against assembly cost; the envelope of the assembled
    /// kernel does not depend on it.
    pub interp_order: usize,
    /// Relative Maxwellian floor below which partners are dropped.
    pub partner_floor: f64,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            polar_points: 6,
            azimuth_points: 12,
            interp_order: 5,
            partner_floor: 1e-16,
        }
    }
}

/// Dense discrete collision operator on one velocity grid.
#[derive(Debug)]
pub struct CollisionOperator<T> {
    pub grid: VelocityGrid<T>,
    pub params: CollisionParams,
    /// Collision frequency multiplier at each node.
    pub nu: Vec<T>,
    /// Dense integral part, row-major, per-event form; `L g = nu g - K g`.
    k_mat: Vec<T>,
    /// Integral part averaged with its weighted transpose.
    k_sym: Vec<T>,
    /// Number of node orbits (rows actually assembled).
    pub orbit_count: usize,
    /// Worst relative invariant-moment content any row routed through the
    /// repair step; the grid's conservation-vs-interpolation figure of
    /// merit.
    pub mass_defect: f64,
    group: CubeGroup,
    orbits: OrbitTable,
    pub(crate) proj: Projector<T>,
    /// Shared factorization for constrained solves, built on first use.
    pub(crate) solver: OnceCell<SolverCore<T>>,
}

/// Average a weighted kernel matrix with its transpose in the weighted
/// inner product, so that `w_i K_ij == w_j K_ji` exactly.
fn symmetrize_weighted<T: Real>(grid: &VelocityGrid<T>, k: &[T]) -> Vec<T> {
    let nn = grid.len();
    let mut out = k.to_vec();
    let half = T::of(0.5);
    for i in 0..nn {
        for c in (i + 1)..nn {
            let s = half * (grid.w[i] * k[i * nn + c] + grid.w[c] * k[c * nn + i]);
            out[i * nn + c] = s / grid.w[i];
            out[c * nn + i] = s / grid.w[c];
        }
    }
    out
}

/// Per-pair cut thresholds derived from the partner floor and the box.
struct Cuts<T> {
    /// Keep a partner when `|v|^2` is below this.
    single: T,
    /// Keep an exchange pair when `|v|^2 + |v*|^2` is below this.
    pair: T,
}

/// Post-collision speeds obey `|v'|^2 <= |v|^2 + |v*|^2`, so capping the
/// pair cut at the squared half-width keeps every exchange sphere inside
/// the box; pairs that would scatter outside are dropped whole.
fn cuts<T: Real>(floor: f64, cutoff: T) -> Cuts<T> {
    let l = -floor.ln();
    let pair = T::of(4.0 * l).min(cutoff * cutoff);
    Cuts {
        single: T::of(2.0 * l).min(pair),
        pair,
    }
}

/// Relative invariant-moment content a single row may route through the
/// repair step before assembly refuses the configuration. The measured
/// defect doubles as an accuracy indicator for the grid and is kept on the
/// assembled operator.
const TRUNCATION_DEFECT_TOL: f64 = 1e-1;

/// Lower Cholesky factor of a 5x5 symmetric positive definite matrix.
fn spd5_factor<T: Real>(g: &[[T; 5]; 5]) -> Result<[[T; 5]; 5]> {
    let mut l = [[T::zero(); 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= T::zero() {
                    return Err(CoreError::SolveFailure(
                        "moment repair basis is degenerate".into(),
                    ));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

fn spd5_solve<T: Real>(l: &[[T; 5]; 5], rhs: &[T; 5]) -> [T; 5] {
    let mut x = *rhs;
    for i in 0..5 {
        for k in 0..i {
            let xv = x[k];
            x[i] -= l[i][k] * xv;
        }
        x[i] /= l[i][i];
    }
    for i in (0..5).rev() {
        for k in (i + 1)..5 {
            let xv = x[k];
            x[i] -= l[k][i] * xv;
        }
        x[i] /= l[i][i];
    }
    x
}

/// Scatter `coeff` times the tensor Lagrange weights into a flat buffer.
#[inline]
fn scatter<T: Real>(
    buf: &mut [T],
    n: usize,
    s: usize,
    interp: &Interpolator<T>,
    p: [T; 3],
    coeff: T,
) {
    let sx = interp.axis_stencil(p[0]);
    let sy = interp.axis_stencil(p[1]);
    let sz = interp.axis_stencil(p[2]);
    for ix in 0..s {
        let wx = coeff * sx.w[ix];
        let bx = (sx.start + ix) * n;
        for iy in 0..s {
            let wxy = wx * sy.w[iy];
            let base = (bx + sy.start + iy) * n + sz.start;
            let row = &mut buf[base..base + s];
            for (iz, slot) in row.iter_mut().enumerate() {
                *slot += wxy * sz.w[iz];
            }
        }
    }
}

/// Gather interpolated values of `count` interleaved nodal arrays at once.
#[inline]
fn gather_many<T: Real>(
    data: &[T],
    n: usize,
    s: usize,
    count: usize,
    interp: &Interpolator<T>,
    p: [T; 3],
    out: &mut [T],
) {
    let sx = interp.axis_stencil(p[0]);
    let sy = interp.axis_stencil(p[1]);
    let sz = interp.axis_stencil(p[2]);
    for o in out.iter_mut().take(count) {
        *o = T::zero();
    }
    for ix in 0..s {
        let wx = sx.w[ix];
        let bx = (sx.start + ix) * n;
        for iy in 0..s {
            let wxy = wx * sy.w[iy];
            let base = ((bx + sy.start + iy) * n + sz.start) * count;
            for iz in 0..s {
                let w = wxy * sz.w[iz];
                let node = &data[base + iz * count..base + (iz + 1) * count];
                for (o, &val) in out.iter_mut().zip(node.iter()) {
                    *o += w * val;
                }
            }
        }
    }
}

impl<T: Real> CollisionOperator<T> {
    /// Assemble the operator for a grid.
    pub fn assemble(grid: &VelocityGrid<T>, params: CollisionParams) -> Result<Self> {
        if params.partner_floor <= 0.0 || params.partner_floor >= 1.0 {
            return Err(CoreError::InvalidParameter(format!(
                "partner floor must be in (0, 1), got {}",
                params.partner_floor
            )));
        }
        let n = grid.n;
        let nn = grid.len();
        let rule = AlignedSphereRule::<T>::new(params.polar_points, params.azimuth_points);
        let interp = Interpolator::new(grid, params.interp_order);
        let s = interp.s;
        let group = CubeGroup::for_grid(grid);
        let orbits = group.orbits(grid);
        let cut = cuts::<T>(params.partner_floor, grid.cutoff);

        let kept: Vec<u32> = (0..nn)
            .filter(|&j| grid.vsq[j] <= cut.single)
            .map(|j| j as u32)
            .collect();

        // Moment-repair data: the invariant polynomials at every node and a
        // Maxwellian-weighted repair basis with its 5x5 Gram factor.
        let moments: Vec<[T; 5]> = (0..nn)
            .map(|c| {
                let v = grid.node(c);
                [T::one(), v[0], v[1], v[2], grid.vsq[c]]
            })
            .collect();
        let wsmu: Vec<T> = (0..nn).map(|c| grid.w[c] * grid.sqrt_mu[c]).collect();
        let mut gram = [[T::zero(); 5]; 5];
        for c in 0..nn {
            let m = &moments[c];
            let wm = wsmu[c] * grid.sqrt_mu[c];
            for a in 0..5 {
                for b in 0..5 {
                    gram[a][b] += wm * m[a] * m[b];
                }
            }
        }
        let gram_chol = spd5_factor(&gram)?;
        let smu_peak = grid.sqrt_mu.iter().cloned().fold(T::zero(), T::max);
        let mut worst_defect = 0.0f64;

        let lo = grid.axis[0];
        let hi = grid.axis[n - 1];
        let gauss3 = T::of(1.0 / (2.0 * std::f64::consts::PI).powi(3).sqrt());
        let quarter = T::of(0.25);
        let half = T::of(0.5);

        let reps = orbits.reps.len();
        let mut nu_fund = vec![T::zero(); reps];
        let mut k_fund = vec![T::zero(); reps * nn];
        let mut buf = vec![T::zero(); nn];

        for (slot, &r) in orbits.reps.iter().enumerate() {
            let vi = grid.node(r);
            let vsq_i = grid.vsq[r];
            for b in buf.iter_mut() {
                *b = T::zero();
            }
            let mut nu_acc = T::zero();
            for &ju in &kept {
                let j = ju as usize;
                let vj = grid.node(j);
                let vsq_j = grid.vsq[j];
                let gv = [vi[0] - vj[0], vi[1] - vj[1], vi[2] - vj[2]];
                let r2 = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
                if r2 == T::zero() {
                    continue;
                }
                let gn = r2.sqrt();
                let c_ij = gn * rule.c0;
                let wj_muj = grid.w[j] * grid.mu[j];
                nu_acc += wj_muj * c_ij;
                if vsq_i + vsq_j > cut.pair {
                    continue;
                }
                buf[j] -= grid.w[j] * c_ij * gauss3 * (-(vsq_i + vsq_j) * quarter).exp();
                let damp_base = -vsq_i * quarter - vsq_j * half;
                let inv = T::one() / gn;
                let e = [gv[0] * inv, gv[1] * inv, gv[2] * inv];
                let (e1, e2) = frame_for(e);
                for (it, &t) in rule.t_nodes.iter().enumerate() {
                    let c = gn * t;
                    let st = (T::one() - t * t).sqrt();
                    let coeff = grid.w[j] * gauss3 * rule.t_weights[it] * c;
                    for &(ca, sa) in &rule.azimuth {
                        let om = [
                            t * e[0] + st * (ca * e1[0] + sa * e2[0]),
                            t * e[1] + st * (ca * e1[1] + sa * e2[1]),
                            t * e[2] + st * (ca * e1[2] + sa * e2[2]),
                        ];
                        let cw = [c * om[0], c * om[1], c * om[2]];
                        let vp = [vi[0] - cw[0], vi[1] - cw[1], vi[2] - cw[2]];
                        let vsp = [vj[0] + cw[0], vj[1] + cw[1], vj[2] + cw[2]];
                        for p in [vp, vsp] {
                            if p[0] < lo || p[0] > hi || p[1] < lo || p[1] > hi
                                || p[2] < lo || p[2] > hi
                            {
                                continue;
                            }
                            let psq = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                            let damp = (damp_base + psq * quarter).exp();
                            scatter(&mut buf, n, s, &interp, p, coeff * damp);
                        }
                    }
                }
            }
            nu_fund[slot] = nu_acc;

            // Repair the row's five invariant moments against their
            // closed-form targets. The gap between target and actual is the
            // interpolation error of the kept deposits plus the net
            // invariant content of box-dropped pairs (their gain and loss
            // moments telescope to `w mu c m(v)` per pair); redistributing
            // it on Maxwellian-weighted representers makes the row
            // identities exact for the full collision frequency.
            let smu_i = grid.sqrt_mu[r];
            let mi = &moments[r];
            let mut delta = [T::zero(); 5];
            for (d, mv) in delta.iter_mut().zip(mi.iter()) {
                *d = smu_i * nu_acc * *mv;
            }
            for (c, &bv) in buf.iter().enumerate() {
                if bv != T::zero() {
                    let sm = grid.sqrt_mu[c];
                    let m = &moments[c];
                    for (d, mv) in delta.iter_mut().zip(m.iter()) {
                        *d -= bv * sm * *mv;
                    }
                }
            }
            // Gate on the Maxwellian-weighted size of the repaired moments:
            // rows far out carry an exponentially small weight, so their
            // content is negligible however it is placed, while boundary
            // leakage out of the thermal bulk trips the tolerance.
            let scale = (nu_acc * (T::one() + vsq_i) * smu_peak).to_f64_lossy();
            for d in &delta {
                let rel = d.to_f64_lossy().abs() / scale;
                if rel > worst_defect {
                    worst_defect = rel;
                }
            }
            let lam = spd5_solve(&gram_chol, &delta);
            for (c, bv) in buf.iter_mut().enumerate() {
                let m = &moments[c];
                let mut add = T::zero();
                for (lv, mv) in lam.iter().zip(m.iter()) {
                    add += *lv * *mv;
                }
                *bv += wsmu[c] * add;
            }

            let dst = &mut k_fund[slot * nn..(slot + 1) * nn];
            dst.copy_from_slice(&buf);
        }

        if worst_defect > TRUNCATION_DEFECT_TOL {
            return Err(CoreError::InvalidParameter(format!(
                "post-collision nodes leave the truncated domain with \
                 non-negligible Maxwellian weight (mass defect {worst_defect:e})"
            )));
        }

        // Average each row over the stabilizer of its representative so that
        // replicated rows commute with the whole group bitwise, not just
        // with the coset used for replication.
        let mut visited = vec![false; nn];
        let mut members: Vec<usize> = Vec::with_capacity(group.elements.len());
        for (slot, &r) in orbits.reps.iter().enumerate() {
            let stab: Vec<usize> = (0..group.elements.len())
                .filter(|&e| group.index_maps[e][r] as usize == r)
                .collect();
            if stab.len() <= 1 {
                continue;
            }
            for v in visited.iter_mut() {
                *v = false;
            }
            let row = &mut k_fund[slot * nn..(slot + 1) * nn];
            for c in 0..nn {
                if visited[c] {
                    continue;
                }
                members.clear();
                for &e in &stab {
                    members.push(group.index_maps[e][c] as usize);
                }
                members.sort_unstable();
                members.dedup();
                let mut sum = T::zero();
                for &m in &members {
                    sum += row[m];
                }
                let avg = sum / T::of(members.len() as f64);
                for &m in &members {
                    row[m] = avg;
                    visited[m] = true;
                }
            }
        }

        let mut nu = vec![T::zero(); nn];
        let mut k_mat = vec![T::zero(); nn * nn];
        for i in 0..nn {
            let slot = orbits.rep_slot[i] as usize;
            nu[i] = nu_fund[slot];
            let map = &group.index_maps[orbits.canon_elem[i] as usize];
            let src = &k_fund[slot * nn..(slot + 1) * nn];
            let dst = &mut k_mat[i * nn..(i + 1) * nn];
            for (c, d) in dst.iter_mut().enumerate() {
                *d = src[map[c] as usize];
            }
        }

        let k_sym = symmetrize_weighted(grid, &k_mat);
        Ok(Self {
            grid: grid.clone(),
            params,
            nu,
            k_mat,
            k_sym,
            orbit_count: reps,
            mass_defect: worst_defect,
            group,
            orbits,
            proj: Projector::new(grid)?,
            solver: OnceCell::new(),
        })
    }

    /// Rebuild from cached parts (validates shapes; the raw matrix is
    /// cached, the symmetrized one is re-derived).
    pub fn from_parts(
        grid: &VelocityGrid<T>,
        params: CollisionParams,
        nu: Vec<T>,
        k_mat: Vec<T>,
        mass_defect: f64,
    ) -> Result<Self> {
        let nn = grid.len();
        if nu.len() != nn || k_mat.len() != nn * nn {
            return Err(CoreError::GridMismatch(format!(
                "expected {nn} multiplier and {} matrix entries, got {} and {}",
                nn * nn,
                nu.len(),
                k_mat.len()
            )));
        }
        let group = CubeGroup::for_grid(grid);
        let orbits = group.orbits(grid);
        let orbit_count = orbits.reps.len();
        let k_sym = symmetrize_weighted(grid, &k_mat);
        Ok(Self {
            grid: grid.clone(),
            params,
            nu,
            k_mat,
            k_sym,
            orbit_count,
            mass_defect,
            group,
            orbits,
            proj: Projector::new(grid)?,
            solver: OnceCell::new(),
        })
    }

    /// Dense symmetrized integral part, row-major. This is the matrix the
    /// constrained solver and the gap estimate act on.
    pub fn k_matrix(&self) -> &[T] {
        &self.k_sym
    }

    /// Dense per-event integral part, row-major.
    pub fn k_matrix_raw(&self) -> &[T] {
        &self.k_mat
    }

    /// The five discretely orthonormalized collision invariants.
    pub fn invariants_basis(&self) -> &[VelocityFunction<T>] {
        &self.proj.ortho
    }

    /// Hydrodynamic projector on this operator's grid.
    pub fn projector(&self) -> &Projector<T> {
        &self.proj
    }

    fn matvec(&self, mat: &[T], g: &[T], out: &mut [T]) {
        let nn = self.grid.len();
        for (i, o) in out.iter_mut().enumerate().take(nn) {
            let row = &mat[i * nn..(i + 1) * nn];
            let mut acc = T::zero();
            for (kv, gv) in row.iter().zip(g.iter()) {
                acc += *kv * *gv;
            }
            *o = acc;
        }
    }

    /// `out = K g`, per-event form.
    pub fn apply_k_slice(&self, g: &[T], out: &mut [T]) {
        self.matvec(&self.k_mat, g, out);
    }

    /// `out = L g = nu g - K g`, per-event form. This realization
    /// annihilates the collision invariants and contracts the bilinear form
    /// to rounding.
    pub fn apply_l_slice(&self, g: &[T], out: &mut [T]) {
        self.apply_k_slice(g, out);
        for i in 0..out.len() {
            out[i] = self.nu[i] * g[i] - out[i];
        }
    }

    /// `out = L g`, self-adjoint realization used by the solver.
    pub fn apply_l_sym_slice(&self, g: &[T], out: &mut [T]) {
        self.matvec(&self.k_sym, g, out);
        for i in 0..out.len() {
            out[i] = self.nu[i] * g[i] - out[i];
        }
    }

    /// `L g` on a velocity function, per-event form.
    pub fn apply_l(&self, g: &VelocityFunction<T>) -> Result<VelocityFunction<T>> {
        self.grid.check_len(g.values.len())?;
        let mut out = VelocityFunction::zeros(&self.grid);
        self.apply_l_slice(&g.values, &mut out.values);
        Ok(out)
    }

    /// `L g` on a velocity function, self-adjoint realization.
    pub fn apply_l_sym(&self, g: &VelocityFunction<T>) -> Result<VelocityFunction<T>> {
        self.grid.check_len(g.values.len())?;
        let mut out = VelocityFunction::zeros(&self.grid);
        self.apply_l_sym_slice(&g.values, &mut out.values);
        Ok(out)
    }

    /// `K g` on a velocity function, per-event form.
    pub fn apply_k(&self, g: &VelocityFunction<T>) -> Result<VelocityFunction<T>> {
        self.grid.check_len(g.values.len())?;
        let mut out = VelocityFunction::zeros(&self.grid);
        self.apply_k_slice(&g.values, &mut out.values);
        Ok(out)
    }

    fn defect_of(&self, mat: &[T]) -> (f64, f64) {
        let nn = self.grid.len();
        let mut max_d = 0.0f64;
        let mut max_s = 0.0f64;
        let mut fro_d = 0.0f64;
        let mut fro_s = 0.0f64;
        for i in 0..nn {
            let wi = self.grid.w[i].to_f64_lossy();
            for j in (i + 1)..nn {
                let a = wi * mat[i * nn + j].to_f64_lossy();
                let b = self.grid.w[j].to_f64_lossy() * mat[j * nn + i].to_f64_lossy();
                let d = (a - b).abs();
                let s = a.abs().max(b.abs());
                max_d = max_d.max(d);
                max_s = max_s.max(s);
                fro_d += d * d;
                fro_s += a * a + b * b;
            }
        }
        (
            max_d / max_s.max(f64::MIN_POSITIVE),
            (fro_d / fro_s.max(f64::MIN_POSITIVE)).sqrt(),
        )
    }

    /// Weighted symmetry defect of the solver matrix: max and Frobenius
    /// norm of `w_i L_ij - w_j L_ji`, relative to the matching norms of
    /// `w_i L_ij`. Rounding-level by construction.
    pub fn symmetry_defect(&self) -> (f64, f64) {
        self.defect_of(&self.k_sym)
    }

    /// Weighted symmetry defect of the per-event matrix. This measures the
    /// entrywise self-adjointness error of the quadrature and is order one
    /// at far near-diagonal pairs on any affordable grid.
    pub fn symmetry_defect_raw(&self) -> (f64, f64) {
        self.defect_of(&self.k_mat)
    }

    /// Direct evaluation of the bilinear collision form
    /// `Gamma(g, h) = mu^{-1/2} Q(sqrt(mu) g, sqrt(mu) h)`.
    ///
    /// This walks the full pair-and-angle quadrature for every output node
    /// (no orbit reuse), so it costs `O(N^2 M s^3)` and is intended for
    /// small grids and cross-checks; production paths use
    /// [`CollisionOperator::gamma_batch`].
    pub fn gamma(
        &self,
        g: &VelocityFunction<T>,
        h: &VelocityFunction<T>,
    ) -> Result<VelocityFunction<T>> {
        let nn = self.grid.len();
        self.grid.check_len(g.values.len())?;
        self.grid.check_len(h.values.len())?;
        let rule = AlignedSphereRule::<T>::new(self.params.polar_points, self.params.azimuth_points);
        let interp = Interpolator::new(&self.grid, self.params.interp_order);
        let cut = cuts::<T>(self.params.partner_floor, self.grid.cutoff);
        let kept: Vec<u32> = (0..nn)
            .filter(|&j| self.grid.vsq[j] <= cut.single)
            .map(|j| j as u32)
            .collect();
        let gt: Vec<T> = (0..nn)
            .map(|i| {
                let sm = self.grid.sqrt_mu[i];
                if sm == T::zero() {
                    T::zero()
                } else {
                    g.values[i] / sm
                }
            })
            .collect();
        let ht: Vec<T> = (0..nn)
            .map(|i| {
                let sm = self.grid.sqrt_mu[i];
                if sm == T::zero() {
                    T::zero()
                } else {
                    h.values[i] / sm
                }
            })
            .collect();
        let mut out = VelocityFunction::zeros(&self.grid);
        for i in 0..nn {
            let vi = self.grid.node(i);
            let vsq_i = self.grid.vsq[i];
            let mut gain = T::zero();
            let mut loss = T::zero();
            for &ju in &kept {
                let j = ju as usize;
                if vsq_i + self.grid.vsq[j] > cut.pair {
                    continue;
                }
                let vj = self.grid.node(j);
                let gv = [vi[0] - vj[0], vi[1] - vj[1], vi[2] - vj[2]];
                let r2 = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
                if r2 == T::zero() {
                    continue;
                }
                let gn = r2.sqrt();
                let wj_muj = self.grid.w[j] * self.grid.mu[j];
                loss += wj_muj * gn * rule.c0 * gt[j];
                let inv = T::one() / gn;
                let e = [gv[0] * inv, gv[1] * inv, gv[2] * inv];
                let (e1, e2) = frame_for(e);
                for (it, &t) in rule.t_nodes.iter().enumerate() {
                    let c = gn * t;
                    let st = (T::one() - t * t).sqrt();
                    let coeff = wj_muj * rule.t_weights[it] * c;
                    for &(ca, sa) in &rule.azimuth {
                        let om = [
                            t * e[0] + st * (ca * e1[0] + sa * e2[0]),
                            t * e[1] + st * (ca * e1[1] + sa * e2[1]),
                            t * e[2] + st * (ca * e1[2] + sa * e2[2]),
                        ];
                        let cw = [c * om[0], c * om[1], c * om[2]];
                        let vp = [vi[0] - cw[0], vi[1] - cw[1], vi[2] - cw[2]];
                        let vsp = [vj[0] + cw[0], vj[1] + cw[1], vj[2] + cw[2]];
                        let a = interp.gather(&self.grid, &gt, vsp);
                        let b = interp.gather(&self.grid, &ht, vp);
                        gain += coeff * a * b;
                    }
                }
            }
            out.values[i] = self.grid.sqrt_mu[i] * (gain - loss * ht[i]);
        }
        Ok(out)
    }

    /// Evaluate `Gamma` on every ordered pair of a closed template family.
    ///
    /// Pair-and-angle quadrature runs only on orbit representative rows and
    /// shares interpolation stencils across all templates; values elsewhere
    /// follow from the tensor transformation law of the family under the
    /// grid symmetries.
    pub fn gamma_batch(&self, family: &TemplateFamily<T>) -> Result<GammaBatch<T>> {
        let nn = self.grid.len();
        let gcount = family.templates.len();
        for t in &family.templates {
            self.grid.check_len(t.values.values.len())?;
        }
        // (template index, sign) images under each group element's inverse.
        let mut table: Vec<Vec<(u32, T)>> = Vec::with_capacity(self.group.elements.len());
        for el in &self.group.elements {
            let inv = el.inverse();
            let mut row = Vec::with_capacity(gcount);
            for t in &family.templates {
                let (tag, sign) = t.tag.transformed(&inv);
                let idx = family.get(t.sub, tag).ok_or_else(|| {
                    CoreError::InvalidParameter(
                        "template family is not closed under the grid symmetries".into(),
                    )
                })?;
                row.push((idx as u32, T::of(sign)));
            }
            table.push(row);
        }

        // Interleaved sqrt(mu)-stripped template values: data[i * G + k].
        let mut data = vec![T::zero(); nn * gcount];
        for (k, t) in family.templates.iter().enumerate() {
            for i in 0..nn {
                let sm = self.grid.sqrt_mu[i];
                data[i * gcount + k] = if sm == T::zero() {
                    T::zero()
                } else {
                    t.values.values[i] / sm
                };
            }
        }

        let rule = AlignedSphereRule::<T>::new(self.params.polar_points, self.params.azimuth_points);
        let interp = Interpolator::new(&self.grid, self.params.interp_order);
        let s = interp.s;
        let n = self.grid.n;
        let cut = cuts::<T>(self.params.partner_floor, self.grid.cutoff);
        let kept: Vec<u32> = (0..nn)
            .filter(|&j| self.grid.vsq[j] <= cut.single)
            .map(|j| j as u32)
            .collect();

        let reps = self.orbits.reps.len();
        // fund[(a * G + b) * reps + slot] = Gamma(tau_a, tau_b)(rep(slot)).
        let mut fund = vec![T::zero(); gcount * gcount * reps];
        let mut pair_acc = vec![T::zero(); gcount * gcount];
        let mut mloss = vec![T::zero(); gcount];
        let mut av = vec![T::zero(); gcount];
        let mut bv = vec![T::zero(); gcount];

        for (slot, &r) in self.orbits.reps.iter().enumerate() {
            let vi = self.grid.node(r);
            let vsq_i = self.grid.vsq[r];
            for x in pair_acc.iter_mut() {
                *x = T::zero();
            }
            for x in mloss.iter_mut() {
                *x = T::zero();
            }
            for &ju in &kept {
                let j = ju as usize;
                if vsq_i + self.grid.vsq[j] > cut.pair {
                    continue;
                }
                let vj = self.grid.node(j);
                let gv = [vi[0] - vj[0], vi[1] - vj[1], vi[2] - vj[2]];
                let r2 = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
                if r2 == T::zero() {
                    continue;
                }
                let gn = r2.sqrt();
                let wj_muj = self.grid.w[j] * self.grid.mu[j];
                let cl = wj_muj * gn * rule.c0;
                for (k, m) in mloss.iter_mut().enumerate() {
                    *m += cl * data[j * gcount + k];
                }
                let inv = T::one() / gn;
                let e = [gv[0] * inv, gv[1] * inv, gv[2] * inv];
                let (e1, e2) = frame_for(e);
                for (it, &t) in rule.t_nodes.iter().enumerate() {
                    let c = gn * t;
                    let st = (T::one() - t * t).sqrt();
                    let coeff = wj_muj * rule.t_weights[it] * c;
                    for &(ca, sa) in &rule.azimuth {
                        let om = [
                            t * e[0] + st * (ca * e1[0] + sa * e2[0]),
                            t * e[1] + st * (ca * e1[1] + sa * e2[1]),
                            t * e[2] + st * (ca * e1[2] + sa * e2[2]),
                        ];
                        let cw = [c * om[0], c * om[1], c * om[2]];
                        let vp = [vi[0] - cw[0], vi[1] - cw[1], vi[2] - cw[2]];
                        let vsp = [vj[0] + cw[0], vj[1] + cw[1], vj[2] + cw[2]];
                        gather_many(&data, n, s, gcount, &interp, vsp, &mut av);
                        gather_many(&data, n, s, gcount, &interp, vp, &mut bv);
                        for a in 0..gcount {
                            let f = coeff * av[a];
                            let row = &mut pair_acc[a * gcount..(a + 1) * gcount];
                            for (b, acc) in row.iter_mut().enumerate() {
                                *acc += f * bv[b];
                            }
                        }
                    }
                }
            }
            let smu_i = self.grid.sqrt_mu[r];
            for a in 0..gcount {
                for b in 0..gcount {
                    let v = smu_i
                        * (pair_acc[a * gcount + b] - mloss[a] * data[r * gcount + b]);
                    fund[(a * gcount + b) * reps + slot] = v;
                }
            }
        }

        // Replicate to every node through the family's transformation law.
        let mut fields: Vec<VelocityFunction<T>> =
            (0..gcount * gcount).map(|_| VelocityFunction::zeros(&self.grid)).collect();
        for i in 0..nn {
            let slot = self.orbits.rep_slot[i] as usize;
            let trow = &table[self.orbits.canon_elem[i] as usize];
            for a in 0..gcount {
                let (ap, sa) = trow[a];
                for b in 0..gcount {
                    let (bp, sb) = trow[b];
                    let v = fund[(ap as usize * gcount + bp as usize) * reps + slot];
                    fields[a * gcount + b].values[i] = sa * sb * v;
                }
            }
        }
        Ok(GammaBatch {
            len: gcount,
            fields,
        })
    }

    /// Evaluate the discrete analogues of the kernel decay bounds.
    ///
    /// With the kernel extracted from the symmetrized matrix as
    /// `k(v_i, v_c) = K[i][c] / w_c`, this reports
    /// `sup_v (1 + |v|) Int |k(v, v')| dv'` and the weighted variant
    /// `sup_v (1 + |v|) w_l(v) Int |k(v, v')| e^{eps |v - v'|^2} / w_l(v') dv'`
    /// with `w_l(v) = (1 + |v|^2)^{l/2}`. Both stay bounded for the
    /// continuum kernel; `l = 0`, `eps = 0` reduces the second to the first.
    pub fn kernel_bound_check(&self, l: f64, eps: f64) -> KernelBoundReport {
        let nn = self.grid.len();
        let mut unweighted = 0.0f64;
        let mut weighted = 0.0f64;
        for i in 0..nn {
            let vi = self.grid.node(i);
            let vsq_i = self.grid.vsq[i].to_f64_lossy();
            let lead = 1.0 + vsq_i.sqrt();
            let wl_i = (1.0 + vsq_i).powf(0.5 * l);
            let mut su = 0.0f64;
            let mut sw = 0.0f64;
            for c in 0..nn {
                let a = self.k_sym[i * nn + c].to_f64_lossy().abs();
                if a == 0.0 {
                    continue;
                }
                su += a;
                let vc = self.grid.node(c);
                let dx = vi[0].to_f64_lossy() - vc[0].to_f64_lossy();
                let dy = vi[1].to_f64_lossy() - vc[1].to_f64_lossy();
                let dz = vi[2].to_f64_lossy() - vc[2].to_f64_lossy();
                let r2 = dx * dx + dy * dy + dz * dz;
                let wl_c = (1.0 + self.grid.vsq[c].to_f64_lossy()).powf(0.5 * l);
                sw += a * (eps * r2).exp() / wl_c;
            }
            unweighted = unweighted.max(lead * su);
            weighted = weighted.max(lead * wl_i * sw);
        }
        KernelBoundReport {
            l,
            eps,
            unweighted,
            weighted,
        }
    }
}

/// Discrete kernel decay constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub l: f64,
    pub eps: f64,
    /// `sup_v (1 + |v|) Int |k| dv'`.
    pub unweighted: f64,
    /// The `w_l`-weighted, `e^{eps |v - v'|^2}`-amplified variant.
    pub weighted: f64,
}

/// Transformation type of a velocity template under signed axis
/// permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorTag {
    /// Invariant (radial) profile.
    Scalar,
    /// Transforms like the coordinate `v_d`.
    Vector(usize),
    /// Transforms like the product `v_a v_b` (stored with `a <= b`).
    Sym2(usize, usize),
}

impl TensorTag {
    /// Normalized symmetric pair tag.
    pub fn sym2(a: usize, b: usize) -> Self {
        if a <= b {
            TensorTag::Sym2(a, b)
        } else {
            TensorTag::Sym2(b, a)
        }
    }

    /// Image under composition with a signed permutation: the returned tag
    /// and sign satisfy `tau(sigma v) = sign * tau'(v)` for templates of
    /// this type.
    pub fn transformed(self, sigma: &SignedPerm) -> (TensorTag, f64) {
        match self {
            TensorTag::Scalar => (TensorTag::Scalar, 1.0),
            TensorTag::Vector(d) => {
                let (p, s) = sigma.coordinate_image(d);
                (TensorTag::Vector(p), s)
            }
            TensorTag::Sym2(a, b) => {
                let (pa, sa) = sigma.coordinate_image(a);
                let (pb, sb) = sigma.coordinate_image(b);
                (TensorTag::sym2(pa, pb), sa * sb)
            }
        }
    }
}

/// One velocity template: nodal values plus its transformation type.
/// Templates in the same subfamily share a radial profile and differ only
/// by their tensor component.
#[derive(Debug, Clone)]
pub struct Template<T> {
    pub sub: usize,
    pub tag: TensorTag,
    pub values: VelocityFunction<T>,
}

/// A family of templates closed under the grid symmetries.
#[derive(Debug, Clone)]
pub struct TemplateFamily<T> {
    templates: Vec<Template<T>>,
    lookup: HashMap<(usize, TensorTag), usize>,
}

impl<T: Real> TemplateFamily<T> {
    pub fn new(templates: Vec<Template<T>>) -> Result<Self> {
        let mut lookup = HashMap::new();
        for (k, t) in templates.iter().enumerate() {
            if lookup.insert((t.sub, t.tag), k).is_some() {
                return Err(CoreError::InvalidParameter(format!(
                    "duplicate template component {:?} in subfamily {}",
                    t.tag, t.sub
                )));
            }
        }
        Ok(Self { templates, lookup })
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, sub: usize, tag: TensorTag) -> Option<usize> {
        self.lookup.get(&(sub, tag)).copied()
    }

    pub fn template(&self, k: usize) -> &Template<T> {
        &self.templates[k]
    }
}

/// All ordered-pair fields `Gamma(tau_a, tau_b)` of one template family.
#[derive(Debug)]
pub struct GammaBatch<T> {
    pub len: usize,
    fields: Vec<VelocityFunction<T>>,
}

impl<T: Real> GammaBatch<T> {
    /// Field for the ordered pair `(a, b)`.
    pub fn pair(&self, a: usize, b: usize) -> &VelocityFunction<T> {
        &self.fields[a * self.len + b]
    }
}

/// Weighted moments of a nodal function against the five collision
/// invariants `sqrt(mu), v_d sqrt(mu), |v|^2 sqrt(mu)`.
pub fn invariant_moments<T: Real>(
    grid: &VelocityGrid<T>,
    f: &VelocityFunction<T>,
) -> [T; 5] {
    let mut out = [T::zero(); 5];
    for i in 0..grid.len() {
        let v = grid.node(i);
        let base = grid.w[i] * grid.sqrt_mu[i] * f.values[i];
        out[0] += base;
        out[1] += base * v[0];
        out[2] += base * v[1];
        out[3] += base * v[2];
        out[4] += base * grid.vsq[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_velocity_grid;
    use once_cell::sync::Lazy;

    fn small_params() -> CollisionParams {
        // Order 2 keeps the stencil footprint within the decay budget at
        // this test resolution (h ~ 1.4).
        CollisionParams {
            polar_points: 6,
            azimuth_points: 12,
            interp_order: 2,
            partner_floor: 1e-16,
        }
    }

    static OP8: Lazy<CollisionOperator<f64>> = Lazy::new(|| {
        let grid = build_velocity_grid::<f64>(8, 5.0).unwrap();
        CollisionOperator::assemble(&grid, small_params()).unwrap()
    });

    fn invariants(grid: &crate::grid::VelocityGrid<f64>) -> Vec<VelocityFunction<f64>> {
        let mut out = Vec::new();
        out.push(VelocityFunction::from_fn(grid, crate::grid::sqrt_maxwellian));
        for d in 0..3 {
            out.push(VelocityFunction::from_fn(grid, |v| {
                v[d] * crate::grid::sqrt_maxwellian(v)
            }));
        }
        out.push(VelocityFunction::from_fn(grid, |v| {
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * crate::grid::sqrt_maxwellian(v)
        }));
        out
    }

    #[test]
    fn annihilates_collision_invariants_to_rounding() {
        let op = &*OP8;
        let nu_max = op.nu.iter().cloned().fold(0.0f64, f64::max);
        for (k, phi) in invariants(&op.grid).iter().enumerate() {
            let lphi = op.apply_l(phi).unwrap();
            let top = lphi.values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            let scale = nu_max
                * phi.values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            assert!(
                top <= 1e-12 * scale,
                "invariant {k}: residual {top:e} vs scale {scale:e}"
            );
        }
    }

    #[test]
    fn commutes_with_grid_symmetries_bitwise() {
        let op = &*OP8;
        let nn = op.grid.len();
        for e in [1usize, 7, 23, 40, 47] {
            let map = &op.group.index_maps[e];
            for &i in &[0usize, 77, 300, nn - 5] {
                let si = map[i] as usize;
                assert_eq!(op.nu[i], op.nu[si], "nu at node {i}, element {e}");
                for &c in &[3usize, 150, 288, nn - 1] {
                    let sc = map[c] as usize;
                    assert_eq!(
                        op.k_mat[i * nn + c],
                        op.k_mat[si * nn + sc],
                        "entry ({i},{c}) element {e}"
                    );
                    assert_eq!(
                        op.k_matrix()[i * nn + c],
                        op.k_matrix()[si * nn + sc],
                        "symmetrized entry ({i},{c}) element {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn multiplier_is_positive_and_tracks_the_closed_form() {
        let op = &*OP8;
        for i in 0..op.grid.len() {
            assert!(op.nu[i] > 0.0, "nu[{i}] = {}", op.nu[i]);
        }
        for &i in &[0usize, 100, 255, 256, 300] {
            let r = op.grid.vsq[i].sqrt();
            let want = crate::oracle::nu_exact(r);
            let got = op.nu[i];
            assert!(
                (got - want).abs() <= 0.02 * want,
                "nu({r}) = {got} vs {want}"
            );
        }
    }

    #[test]
    fn solver_matrix_is_weight_symmetric_to_rounding() {
        let (max_rel, fro_rel) = OP8.symmetry_defect();
        assert!(max_rel < 1e-12, "max defect {max_rel}");
        assert!(fro_rel < 1e-12, "fro defect {fro_rel}");
        // The per-event matrix is honestly asymmetric entrywise.
        let (raw_max, raw_fro) = OP8.symmetry_defect_raw();
        assert!(raw_max.is_finite() && raw_fro.is_finite());
        assert!(raw_max > max_rel);
    }

    #[test]
    fn weak_form_self_adjointness_on_random_pairs() {
        use rand::prelude::*;
        let op = &*OP8;
        let nn = op.grid.len();
        let nu_max = op.nu.iter().cloned().fold(0.0f64, f64::max);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let g = VelocityFunction {
                values: (0..nn).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let h = VelocityFunction {
                values: (0..nn).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let lg = op.apply_l_sym(&g).unwrap();
            let lh = op.apply_l_sym(&h).unwrap();
            let a = crate::grid::inner(&op.grid, &lg, &h);
            let b = crate::grid::inner(&op.grid, &g, &lh);
            let ng = crate::grid::norm(&op.grid, &g);
            let nh = crate::grid::norm(&op.grid, &h);
            assert!(
                (a - b).abs() <= 1e-6 * nu_max * ng * nh,
                "adjointness residual {:e} vs scale {:e}",
                (a - b).abs(),
                nu_max * ng * nh
            );
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative_on_random_functions() {
        use rand::prelude::*;
        let op = &*OP8;
        let nn = op.grid.len();
        let nu_max = op.nu.iter().cloned().fold(0.0f64, f64::max);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..30 {
            let g = VelocityFunction {
                values: (0..nn).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let lg = op.apply_l(&g).unwrap();
            let q = crate::grid::inner(&op.grid, &lg, &g);
            let ng = crate::grid::norm(&op.grid, &g);
            assert!(
                q >= -1e-10 * nu_max * ng * ng,
                "negative quadratic form {q:e}"
            );
        }
    }

    #[test]
    fn bilinear_form_contracts_to_the_linear_operator() {
        // L g = -Gamma(g, sqrt(mu)) - Gamma(sqrt(mu), g) in the continuum.
        // The two routes discretize it independently (matrix rows deposit
        // the damped function, the bilinear path gathers the stripped
        // ratio, and only the rows carry the moment repair), so they agree
        // at quadrature accuracy, not per event.
        let op = &*OP8;
        let grid = &op.grid;
        let g = VelocityFunction::from_fn(grid, |v| {
            (0.4 + v[0] - 0.3 * v[1] * v[2] + 0.05 * v[2] * v[2])
                * crate::grid::sqrt_maxwellian(v)
        });
        let m = VelocityFunction::from_fn(grid, crate::grid::sqrt_maxwellian);
        let lg = op.apply_l(&g).unwrap();
        let g1 = op.gamma(&g, &m).unwrap();
        let g2 = op.gamma(&m, &g).unwrap();
        let scale = lg.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let mut dev = 0.0f64;
        for i in 0..grid.len() {
            let lhs = lg.values[i];
            let rhs = -(g1.values[i] + g2.values[i]);
            dev = dev.max((lhs - rhs).abs());
        }
        assert!(dev <= 0.15 * scale, "route gap {dev:e} vs scale {scale:e}");
    }

    #[test]
    fn batch_matches_direct_bilinear_evaluation() {
        // Low-degree templates make the angular rule exact, so the orbit
        // route and the direct route agree to rounding.
        let op = &*OP8;
        let grid = &op.grid;
        let mut templates = Vec::new();
        templates.push(Template {
            sub: 0,
            tag: TensorTag::Scalar,
            values: VelocityFunction::from_fn(grid, crate::grid::sqrt_maxwellian),
        });
        for d in 0..3 {
            templates.push(Template {
                sub: 1,
                tag: TensorTag::Vector(d),
                values: VelocityFunction::from_fn(grid, |v| {
                    v[d] * crate::grid::sqrt_maxwellian(v)
                }),
            });
        }
        let family = TemplateFamily::new(templates).unwrap();
        let batch = op.gamma_batch(&family).unwrap();
        let pairs = [(0usize, 1usize), (1, 0), (2, 3), (1, 1), (0, 0)];
        let directs: Vec<_> = pairs
            .iter()
            .map(|&(a, b)| {
                op.gamma(&family.template(a).values, &family.template(b).values)
                    .unwrap()
            })
            .collect();
        // One scale for the whole comparison; some pairs (e.g. the Maxwellian
        // with itself) are identically zero and carry only rounding noise.
        let scale = directs
            .iter()
            .flat_map(|d| d.values.iter())
            .fold(1e-30f64, |m, &x| m.max(x.abs()));
        for (&(a, b), direct) in pairs.iter().zip(&directs) {
            let field = batch.pair(a, b);
            for i in 0..grid.len() {
                assert!(
                    (field.values[i] - direct.values[i]).abs() <= 5e-11 * scale,
                    "pair ({a},{b}) node {i}: {} vs {}",
                    field.values[i],
                    direct.values[i]
                );
            }
        }
    }

    #[test]
    fn rejects_template_family_that_is_not_closed() {
        let op = &*OP8;
        let grid = &op.grid;
        let family = TemplateFamily::new(vec![Template {
            sub: 0,
            tag: TensorTag::Vector(0),
            values: VelocityFunction::from_fn(grid, |v| {
                v[0] * crate::grid::sqrt_maxwellian(v)
            }),
        }])
        .unwrap();
        assert!(op.gamma_batch(&family).is_err());
    }

    #[test]
    fn kernel_row_sums_stay_bounded() {
        let rep = OP8.kernel_bound_check(2.0, 1.0 / 16.0);
        assert!(rep.unweighted.is_finite() && rep.unweighted > 0.0);
        assert!(rep.weighted.is_finite() && rep.weighted > 0.0);
        // With trivial weight and no Gaussian factor both sums coincide.
        let base = OP8.kernel_bound_check(0.0, 0.0);
        assert_eq!(base.unweighted, base.weighted);
    }

    #[test]
    fn bilinear_form_moments_vanish_at_quadrature_level() {
        let op = &*OP8;
        let grid = &op.grid;
        let g = VelocityFunction::from_fn(grid, |v| {
            (1.0 + 0.5 * v[0]) * crate::grid::sqrt_maxwellian(v)
        });
        let h = VelocityFunction::from_fn(grid, |v| {
            (v[1] - 0.2 * v[0] * v[2]) * crate::grid::sqrt_maxwellian(v)
        });
        // An ordered pair only conserves mass; momentum and energy exchange
        // between the two arguments and cancel in the symmetrized sum.
        let gh = op.gamma(&g, &h).unwrap();
        let hg = op.gamma(&h, &g).unwrap();
        let sym = VelocityFunction {
            values: gh
                .values
                .iter()
                .zip(&hg.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        };
        let m = invariant_moments(grid, &sym);
        let scale = crate::grid::norm(grid, &gh) + crate::grid::norm(grid, &hg);
        for (k, &mom) in m.iter().enumerate() {
            // Coarse grid: limited by interpolation and aliasing error.
            assert!(
                mom.abs() <= 5e-2 * scale,
                "moment {k}: {mom:e} vs scale {scale:e}"
            );
        }
        let mass_only = invariant_moments(grid, &gh)[0];
        assert!(
            mass_only.abs() <= 5e-2 * scale,
            "mass moment of ordered pair: {mass_only:e} vs scale {scale:e}"
        );
    }
}
