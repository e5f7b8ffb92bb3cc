//! The Funk (spherical Radon) transform and its inverses.
//!
//! Zonal functions on S^{n-1} are stored both as samples on a
//! Gauss–Gegenbauer grid in `t = cos(phi)` and as coefficients in the
//! orthonormal ultraspherical basis with parameter `(n-2)/2` (Chebyshev
//! polynomials of the second kind on S^3). The Funk transform is diagonal in
//! that basis; on S^3 the forward transform of a zonal function also has the
//! Abel-type form
//!
//! ```text
//! (R f)(phi) = (4 pi / sin phi) * integral_{pi/2 - phi}^{pi/2} f(psi) sin(psi) dpsi,
//! ```
//!
//! which is what [`zonal_radon_s3`] evaluates, independently of the
//! multipliers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::bodies::{check_unit, complete_frame, StarBody};
use crate::error::{contract, Error, Result};
use crate::gauss::{Gegenbauer, GaussRule};
use crate::linalg::{sphere_area, unit};
use crate::spherequad::{cached_rule, integrate_embedded};

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_KMAX: usize = 64;
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-10;
/// Ratio of high-degree to total mass above which Helgason inversion warns.
pub const CONDITIONING_WARNING: f64 = 1e-6;
/// Relative size of coefficients treated as rounding noise.
const NOISE_FLOOR: f64 = 1e-14;

/// Gauss grid and orthonormal basis shared by all zonal functions of one shape.
#[derive(Debug)]
struct ZonalGrid {
    dim: usize,
    rule: GaussRule,
    basis: Gegenbauer,
}

fn zonal_grid(dim: usize, size: usize, kmax: usize) -> Arc<ZonalGrid> {
    type Key = (usize, usize, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ZonalGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (dim, size, kmax);
    if let Some(g) = cache.lock().expect("zonal grid cache poisoned").get(&key) {
        return g.clone();
    }
    let a = (dim as f64 - 3.0) / 2.0;
    let grid = Arc::new(ZonalGrid {
        dim,
        rule: GaussRule::gegenbauer(a, size),
        basis: Gegenbauer::new(a, kmax),
    });
    cache
        .lock()
        .expect("zonal grid cache poisoned")
        .insert(key, grid.clone());
    grid
}

/// A function on S^{n-1} that depends only on the angle `phi` to `axis`.
#[derive(Debug, Clone)]
pub struct ZonalFunction {
    grid: Arc<ZonalGrid>,
    axis: Vec<f64>,
    /// Values at the grid nodes, ordered by increasing `phi`.
    samples: Vec<f64>,
    coeffs: Vec<f64>,
}

impl ZonalFunction {
    /// Samples `f(phi)` on a `grid_size`-point grid and projects onto degrees `0..=kmax`.
    pub fn from_fn(
        dim: usize,
        axis: Vec<f64>,
        grid_size: usize,
        kmax: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(contract("zonal functions need n >= 3"));
        }
        check_unit(&axis, dim)?;
        if grid_size <= kmax {
            return Err(contract(format!(
                "grid size {grid_size} must exceed the expansion degree {kmax}"
            )));
        }
        let grid = zonal_grid(dim, grid_size, kmax);
        let samples: Vec<f64> = grid.rule.nodes.iter().rev().map(|t| f(t.acos())).collect();
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                node: vec![grid.rule.nodes[grid_size - 1 - i].acos()],
                value: samples[i],
            });
        }
        let coeffs = project(&grid, &samples, kmax);
        Ok(Self {
            grid,
            axis,
            samples,
            coeffs,
        })
    }

    /// Synthesizes the grid samples of `sum_k coeffs[k] p_k(cos phi)`.
    pub fn from_coeffs(dim: usize, axis: Vec<f64>, grid_size: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(contract("need at least one coefficient"));
        }
        if dim < 3 {
            return Err(contract("zonal functions need n >= 3"));
        }
        check_unit(&axis, dim)?;
        let kmax = coeffs.len() - 1;
        if grid_size <= kmax {
            return Err(contract("grid must exceed the expansion degree"));
        }
        let grid = zonal_grid(dim, grid_size, kmax);
        Ok(Self::with_coeffs(grid, axis, coeffs))
    }

    /// Radial function of an axially symmetric body as a zonal function.
    pub fn from_body(body: &StarBody, grid_size: usize, kmax: usize) -> Result<Self> {
        let axis = body.axis().ok_or(Error::NotAxial)?.to_vec();
        let frame = complete_frame(&axis)?;
        let side = frame.basis[0].clone();
        Self::from_fn(body.dim(), axis.clone(), grid_size, kmax, |phi| {
            let (s, c) = phi.sin_cos();
            let u: Vec<f64> = side.iter().zip(&axis).map(|(e, a)| s * e + c * a).collect();
            body.radial_unchecked(&u)
        })
    }

    fn with_coeffs(grid: Arc<ZonalGrid>, axis: Vec<f64>, coeffs: Vec<f64>) -> Self {
        let samples = grid
            .rule
            .nodes
            .iter()
            .rev()
            .map(|&t| grid.basis.series(&coeffs, t))
            .collect();
        Self {
            grid,
            axis,
            samples,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn kmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    /// Grid angles in increasing order.
    pub fn angles(&self) -> Vec<f64> {
        self.grid.rule.nodes.iter().rev().map(|t| t.acos()).collect()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value at polar angle `phi` from the expansion.
    pub fn eval(&self, phi: f64) -> f64 {
        self.eval_cos(phi.cos())
    }

    pub fn eval_cos(&self, t: f64) -> f64 {
        self.grid.basis.series(&self.coeffs, t)
    }

    /// Value at a point of the sphere.
    pub fn eval_at(&self, u: &[f64]) -> f64 {
        let t: f64 = u.iter().zip(&self.axis).map(|(a, b)| a * b).sum();
        self.eval_cos(t.clamp(-1.0, 1.0))
    }

    /// Sup-norm gap between stored samples and the resynthesized expansion.
    pub fn roundtrip_error(&self) -> f64 {
        self.grid
            .rule
            .nodes
            .iter()
            .rev()
            .zip(&self.samples)
            .map(|(&t, s)| (self.grid.basis.series(&self.coeffs, t) - s).abs())
            .fold(0.0, f64::max)
    }

    /// `max |f(phi) - f(pi - phi)|` over the grid.
    pub fn evenness_error(&self) -> f64 {
        let n = self.samples.len();
        (0..n)
            .map(|i| (self.samples[i] - self.samples[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies `c_k -> g(k, c_k)` and resynthesizes the samples.
    pub fn map_coeffs(&self, g: impl Fn(usize, f64) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, &c)| g(k, c)).collect();
        Self::with_coeffs(self.grid.clone(), self.axis.clone(), coeffs)
    }

    /// `sup |p_k|` on [-1, 1], attained at `t = 1`.
    fn basis_sup(&self, k: usize) -> f64 {
        self.grid.basis.eval(k, 1.0).abs()
    }

    fn from_samples_like(&self, samples: Vec<f64>) -> Self {
        let coeffs = project(&self.grid, &samples, self.kmax());
        Self {
            grid: self.grid.clone(),
            axis: self.axis.clone(),
            samples,
            coeffs,
        }
    }
}

fn project(grid: &ZonalGrid, samples: &[f64], kmax: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; kmax + 1];
    let mut buf = vec![0.0; kmax + 1];
    for ((&t, &w), &f) in grid
        .rule
        .nodes
        .iter()
        .rev()
        .zip(grid.rule.weights.iter().rev())
        .zip(samples)
    {
        grid.basis.eval_into(t, &mut buf);
        for (c, p) in coeffs.iter_mut().zip(&buf) {
            *c += w * f * p;
        }
    }
    coeffs
}

/// Eigenvalues of the Funk transform on zonal harmonics of degree `0..=kmax`.
#[derive(Debug, Clone, Serialize)]
pub struct FunkMultipliers {
    pub dim: usize,
    /// `values[k]`; zero for odd `k`.
    pub values: Vec<f64>,
}

impl FunkMultipliers {
    pub fn kmax(&self) -> usize {
        self.values.len() - 1
    }
}

/// `(R f)(u)`: the integral of `f` over the great subsphere `S^{n-1} ∩ u^perp`.
pub fn funk_transform<F>(f: F, u: &[f64], level: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = u.len();
    check_unit(u, n)?;
    if n < 3 {
        return Err(contract("the Funk transform needs n >= 3"));
    }
    let frame = complete_frame(u)?;
    integrate_embedded(&cached_rule(n - 1, level.max(1)), &frame.basis, f)
}

/// Funk transform of the zonal function `t -> g(t)` (`t = <v, axis>`), evaluated
/// at a direction making angle `phi` with the axis. On the great subsphere
/// `<v, axis> = sin(phi) s`, where `s` is one coordinate of S^{n-2}, so the
/// subsphere integral collapses to a one-dimensional Gauss–Gegenbauer rule.
pub fn funk_transform_zonal(n: usize, g: impl Fn(f64) -> f64, phi: f64, level: usize) -> Result<f64> {
    if n < 3 {
        return Err(contract("the Funk transform needs n >= 3"));
    }
    let s = phi.sin();
    if n == 3 {
        let m = 2 * level.max(1);
        let step = 2.0 * PI / m as f64;
        return Ok((0..m).map(|k| g(s * (k as f64 * step).cos())).sum::<f64>() * step);
    }
    let rule = cached_gauss((n as f64 - 4.0) / 2.0, level.max(1));
    Ok(sphere_area(n - 2) * rule.integrate(|x| g(s * x)))
}

fn cached_gauss(a: f64, n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<(i64, usize), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = ((2.0 * a).round() as i64, n);
    if let Some(r) = cache.lock().expect("gauss cache poisoned").get(&key) {
        return r.clone();
    }
    let rule = Arc::new(GaussRule::gegenbauer(a, n));
    cache.lock().expect("gauss cache poisoned").insert(key, rule.clone());
    rule
}

/// Reference angles tried when reading off a multiplier; the one where the
/// harmonic is largest is used.
const REFERENCE_ANGLES: [f64; 5] = [0.37, 0.81, 1.23, 0.59, 1.01];

/// Multipliers `lambda_k`, obtained by transforming each zonal harmonic and
/// reading the ratio `(R Z_k)(phi) / Z_k(phi)` at a reference angle.
pub fn funk_multipliers(n: usize, kmax: usize, level: usize) -> Result<FunkMultipliers> {
    if n < 3 {
        return Err(contract("Funk multipliers need n >= 3"));
    }
    if kmax % 2 == 1 {
        return Err(contract(format!("kmax must be even, got {kmax}")));
    }
    let basis = Gegenbauer::new((n as f64 - 3.0) / 2.0, kmax);
    let mut values = vec![0.0; kmax + 1];
    for k in (0..=kmax).step_by(2) {
        let peak = basis.eval(k, 1.0).abs();
        let (phi, zk) = REFERENCE_ANGLES
            .iter()
            .map(|&phi| (phi, basis.eval(k, phi.cos())))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty");
        if zk.abs() < 1e-10 * peak {
            return Err(Error::DegenerateMultiplier { degree: k });
        }
        let q = level.max(k / 2 + 2);
        let transformed = funk_transform_zonal(n, |t| basis.eval(k, t), phi, q)?;
        values[k] = transformed / zk;
    }
    Ok(FunkMultipliers { dim: n, values })
}

fn require_s3(f: &ZonalFunction) -> Result<()> {
    if f.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: f.dim(),
        });
    }
    Ok(())
}

/// Zonal Funk transform on S^3 through the Abel-type integral. With
/// `t = cos(psi)` the formula reads `(R f)(phi) = 4 pi * mean_{t in [0, sin phi]} f(t)`,
/// which stays regular as `phi -> 0` (where it tends to `4 pi f(pi/2)`).
pub fn zonal_radon_s3(f: &ZonalFunction) -> Result<ZonalFunction> {
    require_s3(f)?;
    let rule = GaussRule::legendre_on(f.kmax() / 2 + 8, 0.0, 1.0);
    let samples = f
        .angles()
        .iter()
        .map(|&phi| {
            let s = phi.min(PI - phi).sin();
            4.0 * PI * rule.integrate(|tau| f.eval_cos(s * tau))
        })
        .collect();
    Ok(f.from_samples_like(samples))
}

/// Spherical Laplacian of a zonal function, `f'' + (n-2) cot(phi) f'`,
/// applied spectrally: degree `k` is scaled by `-k(k+n-2)`.
pub fn laplace_zonal(f: &ZonalFunction) -> ZonalFunction {
    let m = f.dim() as f64 - 2.0;
    f.map_coeffs(|k, c| -(k as f64) * (k as f64 + m) * c)
}

#[derive(Debug, Clone)]
pub struct HelgasonInverse {
    pub function: ZonalFunction,
    /// Share of `(1 - Delta) g` carried by the top quarter of degrees.
    pub conditioning: f64,
    pub warning: Option<String>,
}

/// `R^{-1} g = (1/16 pi^2) R (1 - Delta) g` on S^3.
pub fn helgason_inverse_zonal(g: &ZonalFunction) -> Result<HelgasonInverse> {
    require_s3(g)?;
    let lifted = g.map_coeffs(|k, c| (1.0 + (k * (k + 2)) as f64) * c);
    let kmax = lifted.kmax();
    let mass = |range: std::ops::RangeInclusive<usize>| -> f64 {
        range
            .map(|k| lifted.coeffs[k].abs() * lifted.basis_sup(k))
            .sum::<f64>()
    };
    let total = mass(0..=kmax);
    let high = mass((3 * kmax / 4 + 1).min(kmax)..=kmax);
    let conditioning = if total > 0.0 { high / total } else { 0.0 };
    let warning = (conditioning > CONDITIONING_WARNING).then(|| {
        format!(
            "high-degree coefficients carry {conditioning:.2e} of (1 - Laplacian) g; the inverse may be unreliable"
        )
    });
    let transformed = zonal_radon_s3(&lifted)?;
    let function = transformed.map_coeffs(|_, c| c / (16.0 * PI * PI));
    Ok(HelgasonInverse {
        function,
        conditioning,
        warning,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ZonalInverseOptions {
    /// Poisson radius `r` in (0, 1]; degree `k` is damped by `r^k`. `1` means
    /// no smoothing. The Poisson kernel is positive, so smoothing never turns
    /// a non-negative inverse negative.
    pub smoothing: f64,
    pub tail_threshold: f64,
}

impl Default for ZonalInverseOptions {
    fn default() -> Self {
        Self {
            smoothing: 1.0,
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZonalInverse {
    pub function: ZonalFunction,
    /// Estimated sup-norm size of the truncated tail, relative to the sup of the result.
    pub tail_estimate: f64,
    pub smoothing: f64,
}

/// Inverts the Funk transform of an even zonal function by dividing each
/// coefficient by its multiplier.
pub fn zonal_inverse(g: &ZonalFunction, m: &FunkMultipliers, opts: ZonalInverseOptions) -> Result<ZonalInverse> {
    if m.dim != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: m.dim,
        });
    }
    if m.kmax() < g.kmax() {
        return Err(contract(format!(
            "multipliers only reach degree {}, function has degree {}",
            m.kmax(),
            g.kmax()
        )));
    }
    let r = opts.smoothing;
    if !(r > 0.0 && r <= 1.0) {
        return Err(contract(format!("smoothing radius must lie in (0, 1], got {r}")));
    }
    let inverse = g.map_coeffs(|k, c| {
        if k % 2 == 1 {
            0.0
        } else {
            r.powi(k as i32) * c / m.values[k]
        }
    });
    // Coefficients at the projection's rounding level carry no truncation
    // information; dividing them by small multipliers would otherwise report
    // a tail even for polynomial input.
    let kmax = g.kmax();
    let noise = NOISE_FLOOR * g.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt();
    let tail: f64 = (kmax.saturating_sub(7)..=kmax)
        .filter(|k| k % 2 == 0)
        .map(|k| {
            let excess = (g.coeffs()[k].abs() - noise).max(0.0);
            r.powi(k as i32) * excess / m.values[k].abs() * inverse.basis_sup(k)
        })
        .sum();
    let scale = inverse.sup_norm().max(f64::MIN_POSITIVE);
    let tail_estimate = tail / scale;
    if tail_estimate > opts.tail_threshold {
        return Err(Error::ExpansionTail {
            tail: tail_estimate,
            threshold: opts.tail_threshold,
        });
    }
    Ok(ZonalInverse {
        function: inverse,
        tail_estimate,
        smoothing: r,
    })
}

/// Convenience: the north pole of S^{n-1}.
pub fn north_pole(n: usize) -> Vec<f64> {
    unit(n, n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalized;
    use crate::spherequad::{integrate, sphere_rule};

    fn u2(phi: f64) -> f64 {
        let c = phi.cos();
        4.0 * c * c - 1.0
    }

    /// Funk–Hecke oracle: lambda_k = |S^{n-2}| C_k(0) / C_k(1), with
    /// C_k^lambda(0) = (-1)^{k/2} (lambda)_{k/2} / (k/2)! and
    /// C_k^lambda(1) = (2 lambda)_k / k!.
    fn funk_hecke(n: usize, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let lam = (n as f64 - 2.0) / 2.0;
        let half = k / 2;
        let mut c0 = if half % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..half {
            c0 *= (lam + j as f64) / (j as f64 + 1.0);
        }
        let mut c1 = 1.0;
        for j in 0..k {
            c1 *= (2.0 * lam + j as f64) / (j as f64 + 1.0);
        }
        sphere_area(n - 1) * c0 / c1
    }

    #[test]
    fn funk_of_constant() {
        let v = funk_transform(|_| 1.0, &[0.0, 0.0, 0.0, 1.0], 8).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        let v = funk_transform(|_| 1.0, &normalized(&[1.0, 2.0, 3.0, 4.0, 5.0]), 8).unwrap();
        assert!((v - 2.0 * PI * PI).abs() < 1e-12 * 2.0 * PI * PI);
    }

    #[test]
    fn funk_of_degree_two_harmonic() {
        let axis = north_pole(4);
        for phi in [0.0f64, 0.3, 1.0, 1.4] {
            let u = vec![phi.sin(), 0.0, 0.0, phi.cos()];
            let v = funk_transform(|x| 4.0 * x[3] * x[3] - 1.0, &u, 8).unwrap();
            assert!((v + 4.0 * PI / 3.0 * u2(phi)).abs() < 1e-12, "phi={phi}");
        }
        let _ = axis;
    }

    #[test]
    fn multipliers_match_funk_hecke() {
        for n in 3..=8 {
            let m = funk_multipliers(n, 40, 4).unwrap();
            for k in 0..=40 {
                let want = funk_hecke(n, k);
                let tol = 1e-10 * want.abs().max(1e-3);
                assert!((m.values[k] - want).abs() < tol, "n={n} k={k}: {} vs {want}", m.values[k]);
            }
        }
        let m4 = funk_multipliers(4, 8, 4).unwrap();
        assert!((m4.values[0] - 4.0 * PI).abs() < 1e-12);
        assert!((m4.values[2] + 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((m4.values[4] - 4.0 * PI / 5.0).abs() < 1e-12);
        let m5 = funk_multipliers(5, 4, 4).unwrap();
        assert!((m5.values[0] - sphere_area(4)).abs() < 1e-12);
        assert!(funk_multipliers(4, 7, 4).is_err());
    }

    #[test]
    fn multiplier_signs_alternate() {
        let m = funk_multipliers(6, 60, 4).unwrap();
        for k in (0..=60).step_by(2) {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            assert!(m.values[k] * sign > 0.0);
        }
    }

    #[test]
    fn one_dimensional_reduction_agrees_with_subsphere_rule() {
        for n in [3, 4, 5] {
            let basis = Gegenbauer::new((n as f64 - 3.0) / 2.0, 6);
            let axis = north_pole(n);
            for phi in [0.2f64, 0.9] {
                let mut u = vec![0.0; n];
                u[0] = phi.sin();
                u[n - 1] = phi.cos();
                for k in [0, 2, 4, 6] {
                    let full = funk_transform(|v| basis.eval(k, crate::linalg::dot(v, &axis)), &u, 6).unwrap();
                    let reduced = funk_transform_zonal(n, |t| basis.eval(k, t), phi, 6).unwrap();
                    assert!((full - reduced).abs() < 1e-12, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn zonal_roundtrip_and_evenness() {
        let f = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, |phi| {
            1.0 / (1.2 + phi.cos().powi(2))
        })
        .unwrap();
        assert!(f.roundtrip_error() < 1e-8, "{}", f.roundtrip_error());
        assert!(f.evenness_error() < 1e-14);
        assert!((f.eval(0.7) - 1.0 / (1.2 + 0.7f64.cos().powi(2))).abs() < 1e-8);
    }

    #[test]
    fn zonal_radon_examples() {
        let one = ZonalFunction::from_fn(4, north_pole(4), 64, 8, |_| 1.0).unwrap();
        let r = zonal_radon_s3(&one).unwrap();
        for v in r.samples() {
            assert!((v - 4.0 * PI).abs() < 1e-12);
        }
        let f = ZonalFunction::from_fn(4, north_pole(4), 64, 8, u2).unwrap();
        let r = zonal_radon_s3(&f).unwrap();
        for (phi, v) in r.angles().iter().zip(r.samples()) {
            assert!((v + 4.0 * PI / 3.0 * u2(*phi)).abs() < 1e-12);
        }
        // limit at the pole: 4 pi f(pi/2)
        assert!((r.eval(0.0) + 4.0 * PI).abs() < 1e-12);
        let g = ZonalFunction::from_fn(4, north_pole(4), 64, 8, |phi| 2.0 + phi.cos().powi(2)).unwrap();
        let rg = zonal_radon_s3(&g).unwrap();
        assert!((rg.eval(0.0) - 4.0 * PI * 2.0).abs() < 1e-12);
    }

    #[test]
    fn zonal_radon_agrees_with_quadrature() {
        let h = |t: f64| (0.5 * t * t).exp() + t.powi(4);
        let f = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, |phi| h(phi.cos())).unwrap();
        let r = zonal_radon_s3(&f).unwrap();
        for j in 0..50 {
            let phi = PI * (j as f64 + 0.5) / 50.0;
            let u = vec![phi.sin(), 0.0, 0.0, phi.cos()];
            let direct = funk_transform(|v| h(v[3]), &u, 24).unwrap();
            assert!((r.eval(phi) - direct).abs() < 1e-8 * direct.abs(), "phi={phi}");
        }
    }

    #[test]
    fn laplacian_eigenvalues() {
        let one = ZonalFunction::from_fn(4, north_pole(4), 64, 8, |_| 1.0).unwrap();
        assert!(laplace_zonal(&one).sup_norm() < 1e-12);
        let c = ZonalFunction::from_fn(4, north_pole(4), 64, 8, f64::cos).unwrap();
        let lc = laplace_zonal(&c);
        for (phi, v) in lc.angles().iter().zip(lc.samples()) {
            assert!((v + 3.0 * phi.cos()).abs() < 1e-12);
        }
        let f = ZonalFunction::from_fn(4, north_pole(4), 64, 8, u2).unwrap();
        let lf = laplace_zonal(&f);
        for (phi, v) in lf.angles().iter().zip(lf.samples()) {
            assert!((v + 8.0 * u2(*phi)).abs() < 1e-11);
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let h = |phi: f64| (0.7 * phi.cos().powi(2)).exp();
        let f = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, h).unwrap();
        let lf = laplace_zonal(&f);
        let d = 1e-4;
        for phi in [0.3, 0.8, 1.2, 2.0] {
            let d2 = (h(phi + d) - 2.0 * h(phi) + h(phi - d)) / (d * d);
            let d1 = (h(phi + d) - h(phi - d)) / (2.0 * d);
            let fd = d2 + 2.0 / phi.tan() * d1;
            assert!((lf.eval(phi) - fd).abs() < 1e-6, "phi={phi}");
        }
    }

    #[test]
    fn helgason_examples() {
        let one = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, |_| 1.0).unwrap();
        let inv = helgason_inverse_zonal(&one).unwrap();
        for v in inv.function.samples() {
            assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-12);
        }
        assert!(inv.warning.is_none());
        let f = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, u2).unwrap();
        let g = zonal_radon_s3(&f).unwrap();
        let back = helgason_inverse_zonal(&g).unwrap();
        for (phi, v) in back.function.angles().iter().zip(back.function.samples()) {
            assert!((v - u2(*phi)).abs() < 1e-4);
        }
        assert!(helgason_inverse_zonal(&ZonalFunction::from_fn(5, north_pole(5), 32, 4, |_| 1.0).unwrap()).is_err());
    }

    #[test]
    fn helgason_warns_on_rough_input() {
        let rough = ZonalFunction::from_fn(4, north_pole(4), DEFAULT_GRID, DEFAULT_KMAX, |phi| {
            1.0 + 0.2 * phi.cos().abs()
        })
        .unwrap();
        assert!(helgason_inverse_zonal(&rough).unwrap().warning.is_some());
    }

    #[test]
    fn zonal_inverse_examples() {
        let m5 = funk_multipliers(5, DEFAULT_KMAX, 8).unwrap();
        let c = ZonalFunction::from_fn(5, north_pole(5), DEFAULT_GRID, DEFAULT_KMAX, |_| 3.0).unwrap();
        let inv = zonal_inverse(&c, &m5, ZonalInverseOptions::default()).unwrap();
        for v in inv.function.samples() {
            assert!((v - 3.0 / (2.0 * PI * PI)).abs() < 1e-11, "{v}");
        }
        let m4 = funk_multipliers(4, DEFAULT_KMAX, 8).unwrap();
        let ball = ZonalFunction::from_body(&StarBody::unit_ball(4), DEFAULT_GRID, DEFAULT_KMAX).unwrap();
        let z = zonal_inverse(&ball, &m4, ZonalInverseOptions::default()).unwrap();
        let h = helgason_inverse_zonal(&ball).unwrap();
        for (a, b) in z.function.samples().iter().zip(h.function.samples()) {
            assert!((a - 1.0 / (4.0 * PI)).abs() < 1e-12);
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn zonal_inverse_roundtrip_with_quadrature_transform() {
        for n in [4, 5, 6] {
            let m = funk_multipliers(n, DEFAULT_KMAX, 8).unwrap();
            let h = |t: f64| 1.0 + 0.3 * t * t + 0.1 * (t * t).sin();
            let g = ZonalFunction::from_fn(n, north_pole(n), DEFAULT_GRID, DEFAULT_KMAX, |phi| h(phi.cos())).unwrap();
            let inv = zonal_inverse(&g, &m, ZonalInverseOptions::default()).map_err(|e| format!("n={n}: {e}")).unwrap();
            for j in 0..12 {
                let phi = 0.05 + 1.5 * j as f64 / 11.0;
                let mut u = vec![0.0; n];
                u[0] = phi.sin();
                u[n - 1] = phi.cos();
                let back = funk_transform(|v| inv.function.eval_at(v), &u, 40).unwrap();
                assert!((back - h(phi.cos())).abs() < 1e-4, "n={n} phi={phi}");
            }
        }
    }

    #[test]
    fn zonal_inverse_refuses_rough_input_and_smoothing_rescues() {
        let cyl = StarBody::cylinder(5, 1.0, 1.0).unwrap();
        let m = funk_multipliers(5, DEFAULT_KMAX, 8).unwrap();
        let g = ZonalFunction::from_body(&cyl, DEFAULT_GRID, DEFAULT_KMAX).unwrap();
        assert!(matches!(
            zonal_inverse(&g, &m, ZonalInverseOptions::default()),
            Err(Error::ExpansionTail { .. })
        ));
        let opts = ZonalInverseOptions {
            smoothing: 0.6,
            ..Default::default()
        };
        assert!(zonal_inverse(&g, &m, opts).is_ok());
    }

    #[test]
    fn self_adjointness_on_s3() {
        let f = |v: &[f64]| 1.0 + v[0] * v[0] * v[1] * v[1] + 0.3 * v[2].powi(4);
        let g = |v: &[f64]| (0.5 * v[3] * v[3] + 0.2 * v[0] * v[2]).exp();
        let rule = sphere_rule(4, 10).unwrap();
        let rf_g = integrate(&rule, |u| funk_transform(f, u, 10).unwrap() * g(u)).unwrap();
        let f_rg = integrate(&rule, |u| f(u) * funk_transform(g, u, 10).unwrap()).unwrap();
        assert!(((rf_g - f_rg) / f_rg).abs() < 1e-8);
    }

    #[test]
    fn intertwining_with_rotations() {
        // rotation in the (x0, x3) plane
        let (s, c) = 0.7f64.sin_cos();
        let rot = move |v: &[f64]| vec![c * v[0] - s * v[3], v[1], v[2], s * v[0] + c * v[3]];
        let f = |v: &[f64]| (v[0] + 0.5 * v[1] * v[3]).exp();
        let f_rot = |v: &[f64]| f(&rot(v));
        for u in [normalized(&[0.1, 0.4, -0.3, 0.8]), normalized(&[1.0, 1.0, 1.0, 1.0])] {
            let lhs = funk_transform(f_rot, &u, 24).unwrap();
            let rhs = funk_transform(f, &rot(&u), 24).unwrap();
            assert!((lhs - rhs).abs() < 1e-8);
        }
    }
}
