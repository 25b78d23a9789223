//! Grid-free reference values for the collision operator.
//!
//! Everything in this module is computed independently of the velocity grid
//! and of the discrete operator assembly: the collision frequency from its
//! closed form, and the transport coefficients from a Sonine-Galerkin solve
//! whose brackets are evaluated with the quartic collision form
//!
//! `<g, L h> = (1/4) Int B(g.omega) mu mu_* (Delta g)(Delta h) dv dv_* domega`
//!
//! reduced to center-of-mass coordinates. The center integral uses
//! Gauss-Hermite, the angular rules are sized to be exact for the polynomial
//! integrands, and the relative-speed integral is a high-order Gauss rule,
//! so the only error left is the Sonine truncation itself. These values
//! back the acceptance checks on the assembled operator.

use crate::quad1d::{gauss_hermite, gauss_legendre_on};
use statrs::function::erf::erf;

/// Collision frequency at speed zero: `2 pi E|u| = 4 sqrt(2 pi)`.
pub fn nu_zero_exact() -> f64 {
    4.0 * (2.0 * std::f64::consts::PI).sqrt()
}

/// Collision frequency at speed zero from its defining radial integral
/// `2 pi Int |u| mu(u) du`, quadrature only (independent of `erf`).
pub fn nu_zero_quadrature() -> f64 {
    let (r, w) = gauss_legendre_on::<f64>(96, 0.0, 16.0);
    let c = (2.0 * std::f64::consts::PI).powf(-1.5) * 4.0 * std::f64::consts::PI;
    let integral: f64 = r
        .iter()
        .zip(&w)
        .map(|(&ri, &wi)| wi * ri * ri * ri * c * (-0.5 * ri * ri).exp())
        .sum();
    2.0 * std::f64::consts::PI * integral
}

/// Closed form of the collision frequency at speed `r`:
/// `nu(r) = 2 pi [ sqrt(2/pi) e^{-r^2/2} + (r + 1/r) erf(r / sqrt(2)) ]`,
/// continuously extended at `r = 0`.
pub fn nu_exact(r: f64) -> f64 {
    if r < 1e-8 {
        return nu_zero_exact() + (nu_second_derivative_at_zero() / 2.0) * r * r;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    two_pi * ((2.0 / std::f64::consts::PI).sqrt() * (-0.5 * r * r).exp()
        + (r + 1.0 / r) * erf(r / std::f64::consts::SQRT_2))
}

fn nu_second_derivative_at_zero() -> f64 {
    // Series of the closed form around r = 0: nu(r) = nu(0) (1 + r^2/6 + ...).
    nu_zero_exact() / 3.0
}

/// Collision frequency at speed `r` from the defining double integral
/// `2 pi Int |v - u| mu(u) du`.
///
/// The angle average of `|v - u|` has the closed form
/// `((r+s)^3 - |r-s|^3) / (6 r s)`, and the remaining radial integral is
/// split at `s = r` where that expression changes branch.
pub fn nu_quadrature(r: f64) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5) * 4.0 * std::f64::consts::PI;
    let angle_avg = |s: f64| -> f64 {
        if r < 1e-12 {
            return s;
        }
        ((r + s).powi(3) - (r - s).abs().powi(3)) / (6.0 * r * s)
    };
    let mut acc = 0.0;
    let hi = 16.0f64.max(r + 16.0);
    for (a, b) in [(0.0, r.min(hi)), (r.min(hi), hi)] {
        if b <= a {
            continue;
        }
        let (s, ws) = gauss_legendre_on::<f64>(96, a, b);
        for (&si, &wsi) in s.iter().zip(&ws) {
            let gauss = norm * si * si * (-0.5 * si * si).exp();
            acc += wsi * gauss * angle_avg(si);
        }
    }
    2.0 * std::f64::consts::PI * acc
}

/// Laguerre polynomial `L_m^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(m: usize, alpha: f64, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut l0 = 1.0;
    let mut l1 = 1.0 + alpha - x;
    for k in 1..m {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Which tensor family a Galerkin system belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketFamily {
    /// Traceless second moment `A_ij = v_i v_j - |v|^2 delta_ij / 3` with
    /// radial factors `L_m^{(5/2)}(|v|^2/2)`, `m = 0, 1, ...`.
    Shear,
    /// Heat-flux vector `B_i = v_i (|v|^2 - 5)/2` with radial factors
    /// `L_m^{(3/2)}(|v|^2/2)`, `m = 1, 2, ...` (m = 0 is a collision
    /// invariant and is excluded).
    Heat,
}

impl BracketFamily {
    fn alpha(self) -> f64 {
        match self {
            BracketFamily::Shear => 2.5,
            BracketFamily::Heat => 1.5,
        }
    }

    fn first_index(self) -> usize {
        match self {
            BracketFamily::Shear => 0,
            BracketFamily::Heat => 1,
        }
    }

    fn prefactor_degree(self) -> usize {
        match self {
            BracketFamily::Shear => 2,
            BracketFamily::Heat => 1,
        }
    }

    /// Family-summed tensor contraction of the polynomial prefactors:
    /// `sum_ij A_ij(x) A_ij(y)` for the shear tensor, `x . y` for the
    /// heat-flux vector basis `v_i L_m`.
    fn contraction(self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        match self {
            BracketFamily::Shear => {
                let xs = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let ys = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                dot * dot - xs * ys / 3.0
            }
            BracketFamily::Heat => dot,
        }
    }

    /// Radial polynomial of the driver whose `L^{-1}` moment defines the
    /// transport constant: `1` for the shear tensor `A_ij`, and
    /// `(|v|^2 - 5)/2` for the heat flux `B_i = v_i (|v|^2 - 5)/2`.
    fn driver_radial(self, rsq: f64) -> f64 {
        match self {
            BracketFamily::Shear => 1.0,
            BracketFamily::Heat => 0.5 * (rsq - 5.0),
        }
    }

    /// Family-summed prefactor contraction at coinciding points, as a
    /// function of `|v|^2` (isotropic).
    fn contraction_diag(self, rsq: f64) -> f64 {
        match self {
            BracketFamily::Shear => (2.0 / 3.0) * rsq * rsq,
            BracketFamily::Heat => rsq,
        }
    }

    /// Number of independent tensor components (trace of the family sum
    /// against itself splits over these).
    fn components(self) -> f64 {
        match self {
            BracketFamily::Shear => 10.0,
            BracketFamily::Heat => 3.0,
        }
    }
}

/// Bracket matrix and transport solve for one tensor family.
#[derive(Debug, Clone)]
pub struct GalerkinSolve {
    /// Galerkin matrix `T_{mn}` (family-summed brackets), row major.
    pub t: Vec<f64>,
    /// Right-hand side `chi_m` (family-summed overlaps with the driver).
    pub chi: Vec<f64>,
    /// Solution coefficients.
    pub coeff: Vec<f64>,
    /// The transport constant `chi . coeff / components`.
    pub value: f64,
}

fn solve_spd_small(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    // Plain Cholesky; the Galerkin matrices are tiny and well conditioned.
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        let mut d = a[i * n + i];
        for k in 0..i {
            d -= r[k * n + i] * r[k * n + i];
        }
        assert!(d > 0.0, "Galerkin matrix must be positive definite");
        let di = d.sqrt();
        r[i * n + i] = di;
        for j in (i + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..i {
                s -= r[k * n + i] * r[k * n + j];
            }
            r[i * n + j] = s / di;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for j in 0..i {
            s -= r[j * n + i] * x[j];
        }
        x[i] = s / r[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= r[i * n + j] * x[j];
        }
        x[i] = s / r[i * n + i];
    }
    x
}

/// Evaluate the family-summed bracket matrix by the quartic collision form.
///
/// `order` counts radial basis functions. All angular and center rules are
/// sized to be exact for the polynomial degree implied by `order`, so the
/// result is converged up to the 1e-13 scale of the radial rule.
pub fn bracket_matrix(family: BracketFamily, order: usize) -> Vec<f64> {
    assert!(order >= 1);
    let alpha = family.alpha();
    let m0 = family.first_index();
    // Polynomial degree of one basis function and of the products.
    let max_deg = family.prefactor_degree() + 2 * (m0 + order - 1);
    let pair_deg = 2 * max_deg + 1;
    // Center-of-mass rule: exact for degree 2 n_h - 1 >= pair_deg.
    let n_h = pair_deg / 2 + 1;
    let (gh_x, gh_w) = gauss_hermite(n_h);
    // Angular rule around the fixed relative direction (the z axis).
    let n_t = pair_deg / 2 + 2;
    let (t_x, t_w) = gauss_legendre_on::<f64>(n_t, 0.0, 1.0);
    let n_az = pair_deg + 3;
    // Relative-speed rule.
    let (r_x, r_w) = gauss_legendre_on::<f64>(64, 0.0, 16.0);

    let sonine = |m: usize, p: [f64; 3]| -> f64 {
        let x = 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        laguerre(m, alpha, x)
    };

    let mut t_mat = vec![0.0; order * order];
    let two_pi = 2.0 * std::f64::consts::PI;
    let az_w = two_pi / n_az as f64;
    // (2 pi)^{-3} from mu mu_*, and 4 pi from the exact reduction of the
    // relative-direction sphere; the 1/4 of the quartic form is applied in
    // the accumulation loop.
    let norm = (two_pi).powi(-3) * 4.0 * std::f64::consts::PI;

    // Precompute the azimuth directions.
    let az: Vec<(f64, f64)> = (0..n_az)
        .map(|k| {
            let phi = two_pi * (k as f64 + 0.5) / n_az as f64;
            (phi.cos(), phi.sin())
        })
        .collect();

    for (igx, (&gx, &wgx)) in gh_x.iter().zip(&gh_w).enumerate() {
        let _ = igx;
        for (&gy, &wgy) in gh_x.iter().zip(&gh_w) {
            for (&gz, &wgz) in gh_x.iter().zip(&gh_w) {
                let wg = wgx * wgy * wgz;
                let g_c = [gx, gy, gz];
                for (&r, &wr) in r_x.iter().zip(&r_w) {
                    let base = wg * wr * r * r * (-0.25 * r * r).exp();
                    let v = [g_c[0], g_c[1], g_c[2] + 0.5 * r];
                    let vs = [g_c[0], g_c[1], g_c[2] - 0.5 * r];
                    // Basis values at the two pre-collision points.
                    let mut pre = vec![0.0; order];
                    let mut pre_s = vec![0.0; order];
                    for m in 0..order {
                        pre[m] = sonine(m0 + m, v);
                        pre_s[m] = sonine(m0 + m, vs);
                    }
                    let c_vv = family.contraction(v, v);
                    let c_vvs = family.contraction(v, vs);
                    let c_vsvs = family.contraction(vs, vs);
                    for (&t, &wt) in t_x.iter().zip(&t_w) {
                        // Both hemispheres carry the same |g.omega| = r t.
                        let st = (1.0 - t * t).max(0.0).sqrt();
                        for &sgn in &[1.0f64, -1.0] {
                            let tz = sgn * t;
                            for &(cph, sph) in &az {
                                let omega = [st * cph, st * sph, tz];
                                let c = r * tz; // (v - v_*) . omega
                                let vp = [
                                    v[0] - c * omega[0],
                                    v[1] - c * omega[1],
                                    v[2] - c * omega[2],
                                ];
                                let vsp = [
                                    vs[0] + c * omega[0],
                                    vs[1] + c * omega[1],
                                    vs[2] + c * omega[2],
                                ];
                                let wq = base * (r * t) * wt * az_w;
                                // Family contractions between the four points.
                                let c_pp = family.contraction(vp, vp);
                                let c_pps = family.contraction(vp, vsp);
                                let c_psps = family.contraction(vsp, vsp);
                                let c_pv = family.contraction(vp, v);
                                let c_pvs = family.contraction(vp, vs);
                                let c_psv = family.contraction(vsp, v);
                                let c_psvs = family.contraction(vsp, vs);
                                let mut post = vec![0.0; order];
                                let mut post_s = vec![0.0; order];
                                for m in 0..order {
                                    post[m] = sonine(m0 + m, vp);
                                    post_s[m] = sonine(m0 + m, vsp);
                                }
                                for m in 0..order {
                                    for n in m..order {
                                        // sum_components Delta_m Delta_n with
                                        // the family contraction pairing the
                                        // tensor prefactors.
                                        let s = post[m]
                                            * (post[n] * c_pp + post_s[n] * c_pps
                                                - pre[n] * c_pv
                                                - pre_s[n] * c_pvs)
                                            + post_s[m]
                                                * (post[n] * c_pps + post_s[n] * c_psps
                                                    - pre[n] * c_psv
                                                    - pre_s[n] * c_psvs)
                                            - pre[m]
                                                * (post[n] * c_pv + post_s[n] * c_psv
                                                    - pre[n] * c_vv
                                                    - pre_s[n] * c_vvs)
                                            - pre_s[m]
                                                * (post[n] * c_pvs + post_s[n] * c_psvs
                                                    - pre[n] * c_vvs
                                                    - pre_s[n] * c_vsvs);
                                        t_mat[m * order + n] += 0.25 * wq * s;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // Mirror the upper triangle and apply the global normalization.
    for m in 0..order {
        for n in 0..m {
            t_mat[m * order + n] = t_mat[n * order + m];
        }
    }
    for x in &mut t_mat {
        *x *= norm;
    }
    t_mat
}

/// Driver overlaps `chi_m` for a family, via a radial Gauss rule.
pub fn driver_overlap(family: BracketFamily, order: usize) -> Vec<f64> {
    let alpha = family.alpha();
    let m0 = family.first_index();
    let (r_x, r_w) = gauss_legendre_on::<f64>(96, 0.0, 16.0);
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5) * 4.0 * std::f64::consts::PI;
    let mut chi = vec![0.0; order];
    for (&r, &wr) in r_x.iter().zip(&r_w) {
        let gauss = norm * r * r * (-0.5 * r * r).exp();
        let rsq = r * r;
        // `chi_m = sum_components <prefactor L_m sqrt(mu), driver sqrt(mu)>`;
        // the prefactor contraction at coinciding points is isotropic.
        let c_diag = family.contraction_diag(rsq) * family.driver_radial(rsq);
        for (m, c) in chi.iter_mut().enumerate() {
            *c += wr * gauss * c_diag * laguerre(m0 + m, alpha, 0.5 * rsq);
        }
    }
    chi
}

/// Run the Galerkin solve for one family at the given Sonine order.
pub fn galerkin(family: BracketFamily, order: usize) -> GalerkinSolve {
    let t = bracket_matrix(family, order);
    let chi = driver_overlap(family, order);
    let coeff = solve_spd_small(&t, &chi, order);
    let value = chi
        .iter()
        .zip(&coeff)
        .map(|(&a, &b)| a * b)
        .sum::<f64>()
        / family.components();
    GalerkinSolve {
        t,
        chi,
        coeff,
        value,
    }
}

/// Independent reference for the viscosity and heat-conductivity constants.
#[derive(Debug, Clone, Copy)]
pub struct TransportOracle {
    pub mu_star: f64,
    pub kappa_star: f64,
    /// Sonine order used.
    pub order: usize,
}

/// Compute the transport oracle at a given Sonine order (3 is the
/// conventional low order; values move by well under a percent beyond it).
pub fn transport_oracle(order: usize) -> TransportOracle {
    let shear = galerkin(BracketFamily::Shear, order);
    let heat = galerkin(BracketFamily::Heat, order);
    TransportOracle {
        mu_star: shear.value,
        kappa_star: heat.value,
        order,
    }
}
