//! Orthonormal symmetric Jacobi (Gegenbauer) polynomials on [-1, 1] with
//! weight `(1 - t^2)^a`, and the matching Gauss rules.
//!
//! With `a = lambda - 1/2` these are the ultraspherical polynomials
//! `C_k^lambda`, rescaled to unit norm. Everything is driven by the
//! three-term recurrence
//!
//! ```text
//! t p_k(t) = b_{k+1} p_{k+1}(t) + b_k p_{k-1}(t),
//! b_k^2 = k (k + 2a) / ((2k + 2a + 1)(2k + 2a - 1)),
//! ```
//!
//! so evaluation, node finding and Christoffel weights share one source.

use std::f64::consts::PI;

/// `integral_{-1}^{1} (1 - t^2)^a dt` for half-integer `a >= -1/2`.
pub fn weight_mass(a: f64) -> f64 {
    let twice = (2.0 * a).round();
    assert!(
        (2.0 * a - twice).abs() < 1e-12 && twice >= -1.0,
        "weight exponent must be a half-integer >= -1/2, got {a}"
    );
    let mut j = twice as i64;
    let mut factor = 1.0;
    // I(a) = 2a / (2a + 1) * I(a - 1)
    while j > 0 {
        let aa = j as f64 / 2.0;
        factor *= 2.0 * aa / (2.0 * aa + 1.0);
        j -= 2;
    }
    let base = if j == 0 { 2.0 } else { PI };
    factor * base
}

#[derive(Debug, Clone)]
pub struct Gegenbauer {
    a: f64,
    p0: f64,
    /// `b[k]` for `k = 1..=kmax`; `b[0]` is unused.
    b: Vec<f64>,
}

impl Gegenbauer {
    pub fn new(a: f64, kmax: usize) -> Self {
        let p0 = 1.0 / weight_mass(a).sqrt();
        let mut b = vec![0.0; kmax + 2];
        for (k, bk) in b.iter_mut().enumerate().skip(1) {
            let kf = k as f64;
            let sq = if k == 1 {
                1.0 / (3.0 + 2.0 * a)
            } else {
                kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0))
            };
            *bk = sq.sqrt();
        }
        Self { a, p0, b }
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    pub fn kmax(&self) -> usize {
        self.b.len() - 2
    }

    /// Fills `out[k] = p_k(t)` for `k < out.len()`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        assert!(out.len() <= self.kmax() + 1);
        if out.is_empty() {
            return;
        }
        out[0] = self.p0;
        if out.len() > 1 {
            out[1] = t * self.p0 / self.b[1];
        }
        for k in 1..out.len() - 1 {
            out[k + 1] = (t * out[k] - self.b[k] * out[k - 1]) / self.b[k + 1];
        }
    }

    pub fn eval(&self, k: usize, t: f64) -> f64 {
        let mut prev = 0.0;
        let mut cur = self.p0;
        for j in 0..k {
            let next = (t * cur - self.b[j] * prev) / self.b[j + 1];
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `sum_k coeffs[k] p_k(t)`.
    pub fn series(&self, coeffs: &[f64], t: f64) -> f64 {
        assert!(coeffs.len() <= self.kmax() + 1);
        let mut prev = 0.0;
        let mut cur = self.p0;
        let mut acc = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            acc += c * cur;
            let next = (t * cur - self.b[k] * prev) / self.b[k + 1];
            prev = cur;
            cur = next;
        }
        acc
    }

    /// `(p_n(t), p_n'(t))`.
    fn eval_with_derivative(&self, n: usize, t: f64) -> (f64, f64) {
        let (mut p_prev, mut p) = (0.0, self.p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        for k in 0..n {
            let p_next = (t * p - self.b[k] * p_prev) / self.b[k + 1];
            let d_next = (p + t * d - self.b[k] * d_prev) / self.b[k + 1];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }
}

/// Gauss rule for the weight `(1 - t^2)^a` on [-1, 1]; nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn gegenbauer(a: f64, n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let poly = Gegenbauer::new(a, n);
        let mut nodes = vec![0.0; n];
        // Only the upper half is solved for; the rule is symmetric. Newton
        // steps are deflated by the roots already found so that a poor start
        // cannot converge onto a previous root.
        for j in 0..n.div_ceil(2) {
            if n % 2 == 1 && j == n / 2 {
                nodes[j] = 0.0;
                continue;
            }
            let jf = (j + 1) as f64;
            let theta = (4.0 * jf - 1.0 + 2.0 * a) * PI / (4.0 * n as f64 + 4.0 * a + 2.0);
            let mut t = theta.cos();
            for _ in 0..100 {
                let (p, dp) = poly.eval_with_derivative(n, t);
                let deflate: f64 = nodes[n - j..]
                    .iter()
                    .map(|&r| 1.0 / (t - r) + 1.0 / (t + r))
                    .sum();
                let step = p / (dp - p * deflate);
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[n - 1 - j] = t;
            nodes[j] = -t;
        }
        let mut buf = vec![0.0; n];
        let weights = nodes
            .iter()
            .map(|&t| {
                poly.eval_into(t, &mut buf);
                1.0 / buf.iter().map(|p| p * p).sum::<f64>()
            })
            .collect();
        Self { nodes, weights }
    }

    /// Gauss–Legendre on [lo, hi].
    pub fn legendre_on(n: usize, lo: f64, hi: f64) -> Self {
        let base = Self::gegenbauer(0.0, n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Self {
            nodes: base.nodes.iter().map(|t| mid + half * t).collect(),
            weights: base.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_masses() {
        assert!((weight_mass(0.0) - 2.0).abs() < 1e-15);
        assert!((weight_mass(0.5) - PI / 2.0).abs() < 1e-15);
        assert!((weight_mass(-0.5) - PI).abs() < 1e-15);
        assert!((weight_mass(1.0) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormality_under_own_rule() {
        for &a in &[-0.5, 0.0, 0.5, 1.0, 1.5, 4.5] {
            let kmax = 30;
            let rule = GaussRule::gegenbauer(a, 40);
            let poly = Gegenbauer::new(a, kmax);
            let mut buf = vec![0.0; kmax + 1];
            let mut gram = vec![vec![0.0; kmax + 1]; kmax + 1];
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                poly.eval_into(t, &mut buf);
                for i in 0..=kmax {
                    for j in 0..=kmax {
                        gram[i][j] += w * buf[i] * buf[j];
                    }
                }
            }
            for i in 0..=kmax {
                for j in 0..=kmax {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i][j] - expect).abs() < 1e-12, "a={a} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn chebyshev_second_kind_nodes_closed_form() {
        // a = 1/2: nodes are cos(j pi / (n + 1)).
        let n = 17;
        let rule = GaussRule::gegenbauer(0.5, n);
        for (i, t) in rule.nodes.iter().enumerate() {
            let expect = ((n - i) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((t - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn series_matches_direct_eval() {
        let poly = Gegenbauer::new(1.0, 10);
        let coeffs: Vec<f64> = (0..=10).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let t = 0.37;
        let direct: f64 = (0..=10).map(|k| coeffs[k] * poly.eval(k, t)).sum();
        assert!((poly.series(&coeffs, t) - direct).abs() < 1e-13);
    }

    #[test]
    fn large_rules_have_distinct_sorted_nodes() {
        for &a in &[0.0, 0.5, 1.0] {
            let rule = GaussRule::gegenbauer(a, 4096);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            let mass: f64 = rule.weights.iter().sum();
            assert!((mass - weight_mass(a)).abs() < 1e-12 * weight_mass(a));
        }
    }
}
