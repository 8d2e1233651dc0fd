//! Legendre polynomials and the Gauss quadrature rules built on them.

use std::f64::consts::PI;

/// P_l(xi) by the three-term recurrence. Endpoint values are exact.
pub fn legendre_eval(l: usize, xi: f64) -> f64 {
    legendre_with_derivative(l, xi).0
}

/// d/dxi P_l(xi).
pub fn legendre_derivative(l: usize, xi: f64) -> f64 {
    legendre_with_derivative(l, xi).1
}

fn legendre_with_derivative(l: usize, xi: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for n in 0..l {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * xi * p - nf * p_prev) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let dp = legendre_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    /// n-point Gauss-Lobatto rule including both endpoints, exact for degree 2n-3.
    pub fn gauss_lobatto(n: usize) -> Self {
        assert!(n >= 2);
        let m = n - 1;
        let mut nodes = vec![0.0; n];
        nodes[0] = -1.0;
        nodes[m] = 1.0;
        // Interior nodes are roots of P'_m; Newton with P''_m from the Legendre ODE.
        for i in 1..m {
            let mut x = -(PI * i as f64 / m as f64).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(m, x);
                let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
                let dx = dp / d2p;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let p = legendre_eval(m, x);
                2.0 / ((m * n) as f64 * p * p)
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over [a, b] with the rule mapped affinely.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_identities() {
        for l in 0..8 {
            assert_eq!(legendre_eval(l, 1.0), 1.0);
            assert_eq!(legendre_eval(l, -1.0), if l % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert_eq!(legendre_eval(2, 1.0), 1.0);
        assert_eq!(legendre_eval(1, 0.0), 0.0);
        assert_eq!(legendre_eval(3, -1.0), -1.0);
    }

    #[test]
    fn closed_forms() {
        for &x in &[-0.7, -0.1, 0.3, 0.9] {
            let p2 = 0.5 * (3.0 * x * x - 1.0);
            let p3 = 0.5 * (5.0 * x * x * x - 3.0 * x);
            assert!((legendre_eval(2, x) - p2).abs() < 1e-15);
            assert!((legendre_eval(3, x) - p3).abs() < 1e-15);
            assert!((legendre_derivative(3, x) - 0.5 * (15.0 * x * x - 3.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=8 {
            let q = Quadrature::gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = q.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn gauss_lobatto_exactness_and_endpoints() {
        for n in 2..=6 {
            let q = Quadrature::gauss_lobatto(n);
            assert_eq!(q.nodes[0], -1.0);
            assert_eq!(q.nodes[n - 1], 1.0);
            for deg in 0..=(2 * n - 3) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = q.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }
}
