//! Angular quadrature over the collision sphere.
//!
//! The scattering integrand for a pair `(v, v*)` depends on the angle
//! variable only through `t = e . omega` (with `e` the unit relative
//! velocity) and the azimuth around `e`, and it is invariant under
//! `omega -> -omega`. The product rule below aligns its polar axis with
//! `e`, restricts to the upper hemisphere with doubled weights, and uses
//! Gauss-Legendre nodes in `t` with a uniform midpoint rule in the azimuth.
//! A fixed 26-point octahedral rule is kept alongside as an independent
//! cross-check of angular sums.

use crate::quad1d::gauss_legendre_on;
use crate::real::Real;

/// Aligned product rule on the unit sphere.
#[derive(Debug, Clone)]
pub struct AlignedSphereRule<T> {
    /// Polar nodes in (0, 1), Gauss-Legendre.
    pub t_nodes: Vec<T>,
    /// Polar weights, scaled so that the full-sphere area is recovered.
    pub t_weights: Vec<T>,
    /// Azimuth (cos, sin) pairs at midpoints of a uniform subdivision.
    pub azimuth: Vec<(T, T)>,
    /// Sum of all weights times `t`; equals the exact angular mass of
    /// `|e . omega|` over the sphere (2 pi) up to rounding.
    pub c0: T,
}

impl<T: Real> AlignedSphereRule<T> {
    /// Build with `m` polar nodes and `k` azimuth nodes (m*k points on the
    /// hemisphere, representing 2*m*k on the sphere).
    pub fn new(m: usize, k: usize) -> Self {
        assert!(m >= 1 && k >= 1, "empty angular rule");
        let (t_nodes, wt) = gauss_legendre_on::<T>(m, T::zero(), T::one());
        let two_pi = T::of(2.0 * std::f64::consts::PI);
        // Factor 2 for the folded lower hemisphere.
        let scale = T::of(2.0) * two_pi / T::of(k as f64);
        let t_weights: Vec<T> = wt.into_iter().map(|w| w * scale).collect();
        let azimuth: Vec<(T, T)> = (0..k)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
                (T::of(phi.cos()), T::of(phi.sin()))
            })
            .collect();
        let mut c0 = T::zero();
        for (idx, &t) in t_nodes.iter().enumerate() {
            c0 += t_weights[idx] * t * T::of(k as f64);
        }
        Self {
            t_nodes,
            t_weights,
            azimuth,
            c0,
        }
    }

    /// Number of hemisphere points.
    pub fn len(&self) -> usize {
        self.t_nodes.len() * self.azimuth.len()
    }

    /// True when the rule has no points.
    pub fn is_empty(&self) -> bool {
        self.t_nodes.is_empty() || self.azimuth.is_empty()
    }
}

/// Orthonormal frame completing a unit vector `e`.
///
/// The auxiliary axis is the coordinate direction with the smallest
/// component magnitude (lowest index on ties), which keeps the choice
/// deterministic and covariant under signed coordinate permutations.
#[inline]
pub fn frame_for<T: Real>(e: [T; 3]) -> ([T; 3], [T; 3]) {
    let a0 = e[0].abs();
    let a1 = e[1].abs();
    let a2 = e[2].abs();
    let mut axis = 0usize;
    let mut best = a0;
    if a1 < best {
        axis = 1;
        best = a1;
    }
    if a2 < best {
        axis = 2;
    }
    let mut u = [T::zero(); 3];
    u[axis] = T::one();
    // e1 = normalize(u x e), orthogonal to e by construction.
    let mut e1 = [
        u[1] * e[2] - u[2] * e[1],
        u[2] * e[0] - u[0] * e[2],
        u[0] * e[1] - u[1] * e[0],
    ];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let inv = T::one() / n;
    for c in e1.iter_mut() {
        *c *= inv;
    }
    // e2 = e x e1 completes the right-handed frame.
    let e2 = [
        e[1] * e1[2] - e[2] * e1[1],
        e[2] * e1[0] - e[0] * e1[2],
        e[0] * e1[1] - e[1] * e1[0],
    ];
    (e1, e2)
}

/// Fixed 26-point octahedral rule (vertices, edge midpoints, cube
/// diagonals), exact for spherical polynomials up to degree 7.
pub fn octahedral_26<T: Real>() -> Vec<([T; 3], T)> {
    let four_pi = 4.0 * std::f64::consts::PI;
    let w1 = T::of(four_pi / 21.0);
    let w2 = T::of(four_pi * 4.0 / 105.0);
    let w3 = T::of(four_pi * 9.0 / 280.0);
    let mut pts = Vec::with_capacity(26);
    for d in 0..3 {
        for s in [1.0f64, -1.0] {
            let mut p = [T::zero(); 3];
            p[d] = T::of(s);
            pts.push((p, w1));
        }
    }
    let r = T::of(std::f64::consts::FRAC_1_SQRT_2);
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        for sa in [1.0f64, -1.0] {
            for sb in [1.0f64, -1.0] {
                let mut p = [T::zero(); 3];
                p[a] = T::of(sa) * r;
                p[b] = T::of(sb) * r;
                pts.push((p, w2));
            }
        }
    }
    let q = T::of(1.0 / 3f64.sqrt());
    for sa in [1.0f64, -1.0] {
        for sb in [1.0f64, -1.0] {
            for sc in [1.0f64, -1.0] {
                pts.push(([T::of(sa) * q, T::of(sb) * q, T::of(sc) * q], w3));
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aligned_sum<F: Fn([f64; 3]) -> f64>(rule: &AlignedSphereRule<f64>, e: [f64; 3], f: F) -> f64 {
        let (e1, e2) = frame_for(e);
        let mut acc = 0.0;
        for (it, &t) in rule.t_nodes.iter().enumerate() {
            let s = (1.0 - t * t).sqrt();
            for &(c, sn) in &rule.azimuth {
                let w = [
                    t * e[0] + s * (c * e1[0] + sn * e2[0]),
                    t * e[1] + s * (c * e1[1] + sn * e2[1]),
                    t * e[2] + s * (c * e1[2] + sn * e2[2]),
                ];
                // Even reflection accounts for the folded hemisphere.
                acc += rule.t_weights[it] * 0.5 * (f(w) + f([-w[0], -w[1], -w[2]]));
            }
        }
        acc
    }

    #[test]
    fn total_area_and_c0() {
        let rule = AlignedSphereRule::<f64>::new(6, 12);
        let total: f64 = rule
            .t_weights
            .iter()
            .map(|w| w * rule.azimuth.len() as f64)
            .sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((rule.c0 - 2.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn octahedral_rule_integrates_low_degree_exactly() {
        let pts = octahedral_26::<f64>();
        let four_pi = 4.0 * std::f64::consts::PI;
        let mass: f64 = pts.iter().map(|&(_, w)| w).sum();
        assert!((mass - four_pi).abs() < 1e-13);
        let x2: f64 = pts.iter().map(|&(p, w)| w * p[0] * p[0]).sum();
        assert!((x2 - four_pi / 3.0).abs() < 1e-13);
        let x4: f64 = pts.iter().map(|&(p, w)| w * p[0].powi(4)).sum();
        assert!((x4 - four_pi / 5.0).abs() < 1e-13);
        let x2y2: f64 = pts.iter().map(|&(p, w)| w * p[0] * p[0] * p[1] * p[1]).sum();
        assert!((x2y2 - four_pi / 15.0).abs() < 1e-13);
        let x6: f64 = pts.iter().map(|&(p, w)| w * p[0].powi(6)).sum();
        assert!((x6 - four_pi / 7.0).abs() < 1e-12);
        let odd: f64 = pts.iter().map(|&(p, w)| w * p[0] * p[1] * p[2]).sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn aligned_rule_matches_octahedral_on_smooth_even_integrands() {
        let rule = AlignedSphereRule::<f64>::new(8, 16);
        let oct = octahedral_26::<f64>();
        let e = {
            let v = [0.3f64, -0.8, 0.52];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        // Degree-4 even polynomial: both rules are exact.
        let f = |w: [f64; 3]| {
            let d = w[0] * e[0] + w[1] * e[1] + w[2] * e[2];
            d * d * (1.0 + w[2] * w[2]) + 0.3 * w[0] * w[0] * w[1] * w[1]
        };
        let a = aligned_sum(&rule, e, f);
        let b: f64 = oct.iter().map(|&(p, w)| w * f(p)).sum();
        assert!((a - b).abs() < 1e-12 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn aligned_rule_is_exact_for_kernel_like_moments() {
        // | e.w | times polynomials in e.w: polar part is polynomial in t.
        let rule = AlignedSphereRule::<f64>::new(6, 12);
        let e = [0.0f64, 0.6, -0.8];
        for (p, want) in [
            (1i32, 2.0 * std::f64::consts::PI),
            (3, std::f64::consts::PI),
            (5, 2.0 * std::f64::consts::PI / 3.0),
        ] {
            let got = aligned_sum(&rule, e, |w| {
                let d: f64 = w[0] * e[0] + w[1] * e[1] + w[2] * e[2];
                d.abs().powi(p)
            });
            assert!((got - want).abs() < 1e-13 * want, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn frame_is_orthonormal_and_deterministic() {
        for &e in &[
            [1.0f64, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.6, 0.0, 0.8],
            [-0.577350269189626, 0.577350269189626, 0.577350269189626],
        ] {
            let (e1, e2) = frame_for(e);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(dot(e1, e1).sqrt() - 1.0 < 1e-14);
            assert!(dot(e2, e2).sqrt() - 1.0 < 1e-14);
            assert!(dot(e, e1).abs() < 1e-14);
            assert!(dot(e, e2).abs() < 1e-14);
            assert!(dot(e1, e2).abs() < 1e-14);
        }
    }
}
