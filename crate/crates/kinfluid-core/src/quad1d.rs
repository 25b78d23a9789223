//! One-dimensional quadrature rules.
//!
//! Gauss-Legendre nodes are computed in `f64` by Newton iteration on the
//! Legendre recurrence and converted to the working scalar afterwards; the
//! iteration converges to full double precision in a handful of steps.

use crate::real::Real;

/// Legendre polynomial value and derivative at `x` for order `n`.
fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points on `[-1, 1]`.
///
/// Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[a, b]`, in the working scalar.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre(n);
    let half = (b - a) * T::of(0.5);
    let mid = (b + a) * T::of(0.5);
    let nodes = x.iter().map(|&xi| mid + half * T::of(xi)).collect();
    let weights = w.iter().map(|&wi| half * T::of(wi)).collect();
    (nodes, weights)
}

/// Orthonormal Hermite values `p_0..p_{n}` at `x` (weight `exp(-x^2)`).
fn hermite_orthonormal(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(std::f64::consts::PI.powf(-0.25));
    if n >= 1 {
        p.push(x * std::f64::consts::SQRT_2 * p[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * p[k] - (kf / (kf + 1.0)).sqrt() * p[k - 1];
        p.push(next);
    }
    p
}

/// Gauss-Hermite rule with `n` points for the weight `exp(-x^2)` on the line.
///
/// Roots are located by interlacing bisection on the orthonormal recurrence,
/// which is unconditionally stable; weights come from the Christoffel
/// function `w_i = 1 / sum_{k<n} p_k(x_i)^2`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Roots of successive orders interlace; build them up order by order.
    let mut roots: Vec<f64> = vec![];
    for m in 1..=n {
        let bound = (2.0 * m as f64 + 1.0).sqrt() + 2.0;
        let mut brackets = Vec::with_capacity(m + 1);
        brackets.push(-bound);
        brackets.extend(roots.iter().copied());
        brackets.push(bound);
        let mut new_roots = Vec::with_capacity(m);
        for w in brackets.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let fa = hermite_orthonormal(m, a)[m];
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = hermite_orthonormal(m, mid)[m];
                if (fm > 0.0) == (fa > 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
                if (b - a).abs() < 1e-15 * bound {
                    break;
                }
            }
            new_roots.push(0.5 * (a + b));
        }
        roots = new_roots;
    }
    let mut weights = Vec::with_capacity(n);
    for &x in &roots {
        let p = hermite_orthonormal(n.saturating_sub(1), x);
        let s: f64 = p.iter().take(n).map(|pk| pk * pk).sum();
        weights.push(1.0 / s);
    }
    // Symmetrize bitwise.
    for i in 0..n / 2 {
        let x = 0.5 * (roots[n - 1 - i] - roots[i]);
        roots[i] = -x;
        roots[n - 1 - i] = x;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    (roots, weights)
}
