//! Product quadrature on spheres.
//!
//! S^{d-1} is parametrized recursively as `x = (t, sqrt(1 - t^2) y)` with
//! `y` on S^{d-2}. The surface measure splits into `(1 - t^2)^{(d-3)/2} dt`
//! times the measure on S^{d-2}, so each level uses a Gauss–Gegenbauer rule
//! in `t = cos(theta)`; the base circle uses `2L` equispaced azimuths. A
//! rule of level `L` integrates every polynomial of total degree `<= 2L - 1`
//! exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::bodies::DirectionFrame;
use crate::error::{contract, Error, Result};
use crate::gauss::GaussRule;
use crate::linalg::{compensated_sum, dot, sphere_area};

#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    level: usize,
    /// Row-major, `dim` entries per node.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Highest total polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.level - 1
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// The rule carried into R^{k} by `node -> sum_j node_j basis_j`.
    pub fn embedded(&self, basis: &[Vec<f64>]) -> SphereRule {
        assert_eq!(basis.len(), self.dim);
        let ambient = basis[0].len();
        let mut nodes = vec![0.0; self.len() * ambient];
        for (y, out) in self.nodes().zip(nodes.chunks_exact_mut(ambient)) {
            embed(y, basis, out);
        }
        SphereRule {
            dim: ambient,
            level: self.level,
            nodes,
            weights: self.weights.clone(),
        }
    }
}

pub(crate) fn embed(y: &[f64], basis: &[Vec<f64>], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (yj, b) in y.iter().zip(basis) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += yj * bi;
        }
    }
}

fn build(d: usize, level: usize) -> SphereRule {
    if d == 2 {
        let m = 2 * level;
        let step = std::f64::consts::PI / level as f64;
        let mut nodes = Vec::with_capacity(2 * m);
        for k in 0..m {
            let phi = k as f64 * step;
            nodes.push(phi.cos());
            nodes.push(phi.sin());
        }
        return SphereRule {
            dim: 2,
            level,
            nodes,
            weights: vec![step; m],
        };
    }
    let inner = cached_rule(d - 1, level);
    let gauss = GaussRule::gegenbauer((d as f64 - 3.0) / 2.0, level);
    let count = gauss.len() * inner.len();
    let mut nodes = Vec::with_capacity(count * d);
    let mut weights = Vec::with_capacity(count);
    for (&t, &wt) in gauss.nodes.iter().zip(&gauss.weights) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (y, &wy) in inner.nodes().zip(inner.weights()) {
            nodes.push(t);
            nodes.extend(y.iter().map(|v| s * v));
            weights.push(wt * wy);
        }
    }
    SphereRule {
        dim: d,
        level,
        nodes,
        weights,
    }
}

/// Product rule on S^{d-1} at the given level (`L^{d-2} * 2L` nodes).
pub fn sphere_rule(d: usize, level: usize) -> Result<SphereRule> {
    if d < 2 {
        return Err(contract(format!("sphere rules need d >= 2, got {d}")));
    }
    if level < 1 {
        return Err(contract("quadrature level must be at least 1"));
    }
    Ok(cached_rule(d, level).as_ref().clone())
}

/// Shared, memoized rules. Rules are immutable so sharing is free.
pub fn cached_rule(d: usize, level: usize) -> Arc<SphereRule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&(d, level)) {
        return rule.clone();
    }
    let rule = Arc::new(build(d, level));
    // Small rules only; large ones would pin memory for the process lifetime.
    if rule.len() * d <= 1 << 22 {
        cache
            .lock()
            .expect("rule cache poisoned")
            .insert((d, level), rule.clone());
    }
    rule
}

/// Rule on the great subsphere S^{n-1} ∩ u^perp: an S^{n-2} rule rotated by the frame.
pub fn subsphere_rule(frame: &DirectionFrame, level: usize) -> Result<SphereRule> {
    let n = frame.u.len();
    if n < 3 {
        return Err(contract("great subspheres need n >= 3"));
    }
    Ok(cached_rule(n - 1, level.max(1)).embedded(&frame.basis))
}

fn finish(values: Vec<f64>, weights: &[f64], node_of: impl Fn(usize) -> Vec<f64>) -> Result<f64> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index,
            node: node_of(index),
            value: values[index],
        });
    }
    Ok(compensated_sum(values.iter().zip(weights).map(|(v, w)| v * w)))
}

/// `sum_i w_i f(node_i)`. Values are computed in parallel and summed in node
/// order, so the result does not depend on the worker count.
pub fn integrate<F>(rule: &SphereRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = rule
        .nodes
        .par_chunks_exact(rule.dim)
        .with_min_len(512)
        .map(&f)
        .collect();
    finish(values, &rule.weights, |i| rule.node(i).to_vec())
}

/// Integrates `f` over the image of `base` under `basis` without materializing
/// the mapped rule.
pub fn integrate_embedded<F>(base: &SphereRule, basis: &[Vec<f64>], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let ambient = basis[0].len();
    let values: Vec<f64> = base
        .nodes
        .par_chunks_exact(base.dim)
        .with_min_len(512)
        .map_init(
            || vec![0.0; ambient],
            |buf, y| {
                embed(y, basis, buf);
                f(buf)
            },
        )
        .collect();
    finish(values, &base.weights, |i| {
        let mut out = vec![0.0; ambient];
        embed(base.node(i), basis, &mut out);
        out
    })
}

/// Directions on S^{n-1} modulo `u ~ -u`: the nodes of the smallest product
/// rule whose open half (with respect to a fixed generic direction) has at
/// least `min_count` points.
pub fn direction_grid(n: usize, min_count: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(contract("direction grids need n >= 2"));
    }
    let generic: Vec<f64> = (0..n).map(|i| 1.0 + 0.1234567 * (i as f64 + 1.0).sqrt()).collect();
    let mut level = 1;
    loop {
        let rule = cached_rule(n, level);
        if rule.len() / 2 >= min_count.max(1) || rule.len() > 4_000_000 {
            let grid = rule
                .nodes()
                .filter(|u| dot(u, &generic) > 0.0)
                .map(|u| u.to_vec())
                .collect();
            return Ok(grid);
        }
        level += 1;
    }
}

/// `|S^{d-1}|`, re-exported for callers that only think in terms of rules.
pub fn area(d: usize) -> f64 {
    sphere_area(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::complete_frame;
    use crate::linalg::{normalized, unit};
    use std::f64::consts::PI;

    #[test]
    fn weight_sums_are_sphere_areas() {
        for d in 2..=7 {
            for level in [1, 3, 8] {
                let rule = sphere_rule(d, level).unwrap();
                let rel = (rule.weight_sum() - sphere_area(d)).abs() / sphere_area(d);
                assert!(rel < 1e-12, "d={d} level={level} rel={rel}");
            }
        }
        assert!((sphere_rule(3, 5).unwrap().weight_sum() - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_rule(4, 5).unwrap().weight_sum() - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn nodes_are_unit() {
        let rule = sphere_rule(5, 6).unwrap();
        for u in rule.nodes() {
            assert!((dot(u, u).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_on_s3() {
        let rule = sphere_rule(4, 4).unwrap();
        let v = integrate(&rule, |u| u[0] * u[0]).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-12);
        let odd = integrate(&rule, |u| u[0] * u[1]).unwrap();
        assert!(odd.abs() < 1e-14);
    }

    /// Monomial moments on the sphere: the integral of x^alpha is
    /// 2 prod Gamma(b_i) / Gamma(sum b_i) with b_i = (alpha_i + 1)/2 for all
    /// even alpha, zero otherwise.
    fn monomial_moment(alpha: &[usize]) -> f64 {
        if alpha.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        // Gamma at half-integers via Gamma(x + 1) = x Gamma(x).
        fn gamma_half(twice: usize) -> f64 {
            let mut x = twice as f64 / 2.0;
            let mut acc = 1.0;
            while x > 1.0 {
                x -= 1.0;
                acc *= x;
            }
            if (x - 0.5).abs() < 1e-12 {
                acc * PI.sqrt()
            } else {
                acc
            }
        }
        let num: f64 = alpha.iter().map(|a| gamma_half(a + 1)).product();
        let total: usize = alpha.iter().map(|a| a + 1).sum();
        2.0 * num / gamma_half(total)
    }

    #[test]
    fn exact_for_low_degree_monomials() {
        for d in 3..=5 {
            let level = 4;
            let rule = sphere_rule(d, level).unwrap();
            let max_deg = rule.exact_degree();
            let mut alpha = vec![0usize; d];
            // enumerate all exponent vectors with total degree <= max_deg
            fn rec(i: usize, left: usize, alpha: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
                if i == alpha.len() {
                    f(alpha);
                    return;
                }
                for a in 0..=left {
                    alpha[i] = a;
                    rec(i + 1, left - a, alpha, f);
                }
                alpha[i] = 0;
            }
            rec(0, max_deg, &mut alpha, &mut |a: &[usize]| {
                let got = integrate(&rule, |u| u.iter().zip(a).map(|(x, &k)| x.powi(k as i32)).product())
                    .unwrap();
                let want = monomial_moment(a);
                assert!((got - want).abs() < 1e-12, "d={d} alpha={a:?} got={got} want={want}");
            });
        }
    }

    #[test]
    fn level_doubling_converges_for_smooth_integrand() {
        let f = |u: &[f64]| (u[0] + 0.3 * u[1] * u[2]).exp() / (2.0 + u[3]);
        let a = integrate(&sphere_rule(4, 16).unwrap(), f).unwrap();
        let b = integrate(&sphere_rule(4, 32).unwrap(), f).unwrap();
        assert!(((a - b) / b).abs() < 1e-8);
    }

    #[test]
    fn subsphere_rules() {
        let e4 = unit(4, 3);
        let rule = subsphere_rule(&complete_frame(&e4).unwrap(), 6).unwrap();
        assert!((rule.weight_sum() - 4.0 * PI).abs() < 1e-12);
        for v in rule.nodes() {
            assert!(v[3].abs() < 1e-15);
        }
        let u = normalized(&[0.3, -1.0, 0.2, 0.7]);
        let frame = complete_frame(&u).unwrap();
        let rule = subsphere_rule(&frame, 6).unwrap();
        for v in rule.nodes() {
            assert!(dot(v, &u).abs() < 1e-12);
        }
        // rotation-invariant integrand gives the same value for every u
        let f = |v: &[f64]| (1.0 + dot(v, v)).ln();
        let a = integrate(&rule, f).unwrap();
        let b = integrate(&subsphere_rule(&complete_frame(&e4).unwrap(), 6).unwrap(), f).unwrap();
        assert!((a - b).abs() < 1e-10);
        let c = integrate_embedded(&cached_rule(3, 6), &frame.basis, f).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn non_finite_values_name_the_node() {
        let rule = sphere_rule(3, 2).unwrap();
        let err = integrate(&rule, |u| if u[2] > 0.5 { f64::NAN } else { 1.0 }).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert!(node[2] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cube_radial_cubed_matches_membership_monte_carlo() {
        // Oracle: (1/3) int_{S^2} rho^3 equals the volume of [-1,1]^3 = 8;
        // checked independently by Monte Carlo membership in the bounding box.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let samples = 200_000;
        let mut hits = 0usize;
        let box_half = 1.2_f64;
        for _ in 0..samples {
            let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-box_half..box_half));
            if x.iter().all(|v| v.abs() <= 1.0) {
                hits += 1;
            }
        }
        let mc = hits as f64 / samples as f64 * (2.0 * box_half).powi(3);
        // The kinks along the cube's edges limit convergence to O(L^-2).
        let quad = integrate(&sphere_rule(3, 320).unwrap(), |u| {
            u.iter().fold(0.0_f64, |m, x| m.max(x.abs())).powi(-3)
        })
        .unwrap();
        assert!((quad - 3.0 * mc).abs() < 3.0 * 0.05, "quad {quad} mc {mc}");
        assert!((quad - 24.0).abs() < 1e-3);
    }

    #[test]
    fn direction_grid_is_half_sphere() {
        let grid = direction_grid(4, 100).unwrap();
        assert!(grid.len() >= 100);
        for u in &grid {
            for v in &grid {
                let s: f64 = u.iter().zip(v).map(|(a, b)| (a + b).abs()).sum();
                assert!(s > 1e-9, "antipodal pair in grid");
            }
        }
    }
}
