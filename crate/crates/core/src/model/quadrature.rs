//! Gauss–Legendre rules and Legendre polynomial evaluation.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots are located by Newton iteration on the three-term recurrence,
/// started from the Chebyshev-like asymptotic guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

/// `(P_n(x), P_n'(x))`.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut d_prev = 0.0;
    let mut d = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // derivative recurrence: P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..30 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let integral: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((integral - exact).abs() < 1e-13, "n = {n}");
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_with_derivative(0, 0.3), (1.0, 0.0));
        let (p2, d2) = legendre_with_derivative(2, 0.3);
        assert_relative_eq!(p2, 0.5 * (3.0 * 0.09 - 1.0), max_relative = 1e-14);
        assert_relative_eq!(d2, 3.0 * 0.3, max_relative = 1e-14);
        for n in 0..12 {
            assert_relative_eq!(legendre_with_derivative(n, 1.0).0, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn mapped_rule() {
        let (x, w) = gauss_legendre_on(5, 0.0, 2.0);
        let integral: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t * t * t).sum();
        assert_relative_eq!(integral, 4.0, max_relative = 1e-14);
    }
}
