//! Origin-symmetric star bodies described by their radial functions.
//!
//! Closed-form families keep their exact parameters so that ray exits,
//! support points and section volumes can be checked against analytic
//! formulas. Everything else goes through the generic radial evaluator.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{contract, Error, Result};
use crate::linalg::{axpy, dot, norm, normalized, unit};
use crate::spherequad::{integrate, SphereRule};

/// Tolerance on `|u| = 1` for radial queries.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Smoothness {
    C2,
    Lipschitz,
    Piecewise,
}

#[derive(Clone)]
pub struct CustomRadial(pub Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl fmt::Debug for CustomRadial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomRadial(..)")
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    /// `[-a, a]^n`.
    Cube {
        half_width: f64,
    },
    /// `{ x : |x|_p <= radius }` for `1 <= p < inf`.
    LpBall {
        p: f64,
        radius: f64,
    },
    /// `B^{n-1}(radius) x [-half_height, half_height]`, axis along the last coordinate.
    Cylinder {
        radius: f64,
        half_height: f64,
    },
    /// `rho(u) = radius * (1 + eps * (sum_i quad_i u_i^2 + (sum_i quartic_i u_i^2)^2))`.
    PerturbedBall {
        radius: f64,
        eps: f64,
        quad: Vec<f64>,
        quartic: Vec<f64>,
    },
    Custom {
        name: String,
        radial: CustomRadial,
    },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Ball { .. } => "ball",
            Family::Ellipsoid { .. } => "ellipsoid",
            Family::Cube { .. } => "cube",
            Family::LpBall { .. } => "lp-ball",
            Family::Cylinder { .. } => "cylinder",
            Family::PerturbedBall { .. } => "perturbed-ball",
            Family::Custom { .. } => "custom",
        }
    }
}

/// An origin-symmetric star body in R^n. Immutable once built.
#[derive(Debug, Clone)]
pub struct StarBody {
    dim: usize,
    family: Family,
    smoothness: Smoothness,
    axis: Option<Vec<f64>>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(contract(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(contract(format!("dimension must be at least 2, got {dim}")))
    } else {
        Ok(())
    }
}

/// Index `j` such that all entries except `values[j]` agree; `None` if no such index.
fn odd_one_out(values: &[&[f64]]) -> Option<usize> {
    let n = values[0].len();
    'outer: for j in (0..n).rev() {
        for v in values {
            let reference = v[if j == 0 { 1 } else { 0 }];
            if (0..n).filter(|&i| i != j).any(|i| v[i] != reference) {
                continue 'outer;
            }
        }
        return Some(j);
    }
    None
}

impl StarBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("radius", radius)?;
        Ok(Self {
            dim,
            family: Family::Ball { radius },
            smoothness: Smoothness::C2,
            axis: Some(unit(dim, dim - 1)),
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0).expect("unit ball is valid for dim >= 2")
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        let dim = semi_axes.len();
        check_dim(dim)?;
        for &a in &semi_axes {
            check_positive("semi-axis", a)?;
        }
        let axis = odd_one_out(&[&semi_axes]).map(|j| unit(dim, j));
        Ok(Self {
            dim,
            family: Family::Ellipsoid { semi_axes },
            smoothness: Smoothness::C2,
            axis,
        })
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("half-width", half_width)?;
        Ok(Self {
            dim,
            family: Family::Cube { half_width },
            smoothness: Smoothness::Piecewise,
            axis: None,
        })
    }

    pub fn lp_ball(dim: usize, p: f64, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("radius", radius)?;
        if !(p.is_finite() && p >= 1.0) {
            return Err(contract(format!("lp-ball exponent must satisfy 1 <= p < inf, got {p}")));
        }
        let smoothness = if p >= 2.0 {
            Smoothness::C2
        } else if p > 1.0 {
            Smoothness::Lipschitz
        } else {
            Smoothness::Piecewise
        };
        let axis = (p == 2.0).then(|| unit(dim, dim - 1));
        Ok(Self {
            dim,
            family: Family::LpBall { p, radius },
            smoothness,
            axis,
        })
    }

    pub fn cylinder(dim: usize, radius: f64, half_height: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("radius", radius)?;
        check_positive("half-height", half_height)?;
        Ok(Self {
            dim,
            family: Family::Cylinder {
                radius,
                half_height,
            },
            smoothness: Smoothness::Piecewise,
            axis: Some(unit(dim, dim - 1)),
        })
    }

    pub fn perturbed_ball(radius: f64, eps: f64, quad: Vec<f64>, quartic: Vec<f64>) -> Result<Self> {
        let dim = quad.len();
        check_dim(dim)?;
        check_positive("radius", radius)?;
        if quartic.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: quartic.len(),
            });
        }
        if !eps.is_finite() || quad.iter().chain(&quartic).any(|c| !c.is_finite()) {
            return Err(contract("perturbation coefficients must be finite"));
        }
        let bound = quad.iter().map(|c| c.abs()).sum::<f64>()
            + quartic.iter().map(|c| c.abs()).sum::<f64>().powi(2);
        if eps.abs() * bound >= 1.0 {
            return Err(contract(format!(
                "|eps| * bound(p) = {} must stay below 1 so the radial function is positive",
                eps.abs() * bound
            )));
        }
        let axis = odd_one_out(&[&quad, &quartic]).map(|j| unit(dim, j));
        Ok(Self {
            dim,
            family: Family::PerturbedBall {
                radius,
                eps,
                quad,
                quartic,
            },
            smoothness: Smoothness::C2,
            axis,
        })
    }

    /// A body given by an arbitrary even radial evaluator. The evaluator must be
    /// positive, finite and even on the unit sphere.
    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        smoothness: Smoothness,
        axis: Option<Vec<f64>>,
        radial: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim(dim)?;
        if let Some(a) = &axis {
            check_unit(a, dim)?;
        }
        Ok(Self {
            dim,
            family: Family::Custom {
                name: name.into(),
                radial: CustomRadial(Arc::new(radial)),
            },
            smoothness,
            axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn axis(&self) -> Option<&[f64]> {
        self.axis.as_deref()
    }

    pub fn is_convex_family(&self) -> bool {
        !matches!(self.family, Family::Custom { .. })
    }

    /// Short human-readable identifier.
    pub fn id(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let n = self.dim;
        match &self.family {
            Family::Ball { radius } => format!("ball(n={n},r={radius})"),
            Family::Ellipsoid { semi_axes } => format!("ellipsoid({})", list(semi_axes)),
            Family::Cube { half_width } => format!("cube(n={n},a={half_width})"),
            Family::LpBall { p, radius } => format!("lp-ball(n={n},p={p},r={radius})"),
            Family::Cylinder {
                radius,
                half_height,
            } => format!("cylinder(n={n},r={radius},h={half_height})"),
            Family::PerturbedBall { radius, eps, .. } => {
                format!("perturbed-ball(n={n},r={radius},eps={eps})")
            }
            Family::Custom { name, .. } => format!("custom({name},n={n})"),
        }
    }

    /// Radial function `rho(u)`; `u` must be a unit vector.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        check_unit(u, self.dim)?;
        Ok(self.radial_unchecked(u))
    }

    /// Radial function without the unit-length check. Non-unit input gives
    /// the radial function of the direction scaled by `1/|u|`.
    pub fn radial_unchecked(&self, u: &[f64]) -> f64 {
        match &self.family {
            Family::Ball { radius } => radius / norm(u),
            Family::Ellipsoid { semi_axes } => {
                let q: f64 = u.iter().zip(semi_axes).map(|(x, a)| (x / a) * (x / a)).sum();
                1.0 / q.sqrt()
            }
            Family::Cube { half_width } => {
                half_width / u.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
            }
            Family::LpBall { p, radius } => {
                let s: f64 = u.iter().map(|x| x.abs().powf(*p)).sum();
                radius / s.powf(1.0 / p)
            }
            Family::Cylinder {
                radius,
                half_height,
            } => {
                let n = u.len();
                let w = norm(&u[..n - 1]);
                let t = u[n - 1].abs();
                let side = if w > 0.0 { radius / w } else { f64::INFINITY };
                let cap = if t > 0.0 { half_height / t } else { f64::INFINITY };
                side.min(cap)
            }
            Family::PerturbedBall {
                radius,
                eps,
                quad,
                quartic,
            } => {
                let r2: f64 = dot(u, u);
                let q: f64 = u.iter().zip(quad).map(|(x, c)| c * x * x).sum::<f64>() / r2;
                let b: f64 = u.iter().zip(quartic).map(|(x, c)| c * x * x).sum::<f64>() / r2;
                radius * (1.0 + eps * (q + b * b)) / r2.sqrt()
            }
            Family::Custom { radial, .. } => {
                let r = norm(u);
                if (r - 1.0).abs() <= UNIT_TOL {
                    (radial.0)(u)
                } else {
                    let v: Vec<f64> = u.iter().map(|x| x / r).collect();
                    (radial.0)(&v) / r
                }
            }
        }
    }

    /// `|x| <= rho(x / |x|)`; the origin is always inside.
    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 {
            return true;
        }
        match &self.family {
            Family::Cube { half_width } => x.iter().all(|v| v.abs() <= *half_width),
            _ => {
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                r <= self.radial_unchecked(&u)
            }
        }
    }

    /// The body scaled by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_positive("scale factor", factor)?;
        let mut out = self.clone();
        out.family = match &self.family {
            Family::Ball { radius } => Family::Ball {
                radius: radius * factor,
            },
            Family::Ellipsoid { semi_axes } => Family::Ellipsoid {
                semi_axes: semi_axes.iter().map(|a| a * factor).collect(),
            },
            Family::Cube { half_width } => Family::Cube {
                half_width: half_width * factor,
            },
            Family::LpBall { p, radius } => Family::LpBall {
                p: *p,
                radius: radius * factor,
            },
            Family::Cylinder {
                radius,
                half_height,
            } => Family::Cylinder {
                radius: radius * factor,
                half_height: half_height * factor,
            },
            Family::PerturbedBall {
                radius,
                eps,
                quad,
                quartic,
            } => Family::PerturbedBall {
                radius: radius * factor,
                eps: *eps,
                quad: quad.clone(),
                quartic: quartic.clone(),
            },
            Family::Custom { name, radial } => {
                let inner = radial.0.clone();
                Family::Custom {
                    name: format!("{factor}*{name}"),
                    radial: CustomRadial(Arc::new(move |u| factor * inner(u))),
                }
            }
        };
        Ok(out)
    }

    /// Upper bound on the radial function, used to size root-finding brackets.
    pub fn max_radius_hint(&self) -> f64 {
        let n = self.dim as f64;
        match &self.family {
            Family::Ball { radius } => *radius,
            Family::Ellipsoid { semi_axes } => semi_axes.iter().cloned().fold(0.0, f64::max),
            Family::Cube { half_width } => half_width * n.sqrt(),
            Family::LpBall { p, radius } => {
                if *p >= 2.0 {
                    radius * n.powf(0.5 - 1.0 / p)
                } else {
                    *radius
                }
            }
            Family::Cylinder {
                radius,
                half_height,
            } => radius.hypot(*half_height),
            Family::PerturbedBall {
                radius,
                eps,
                quad,
                quartic,
            } => {
                let bound = quad.iter().map(|c| c.abs()).sum::<f64>()
                    + quartic.iter().map(|c| c.abs()).sum::<f64>().powi(2);
                radius * (1.0 + eps.abs() * bound)
            }
            Family::Custom { .. } => 1.0,
        }
    }

    /// Support value `h(u) = max <x, u>` and a point attaining it, when the
    /// family has a closed form. `u` is assumed to be a unit vector.
    pub fn support_closed_form(&self, u: &[f64]) -> Option<(f64, Vec<f64>)> {
        match &self.family {
            Family::Ball { radius } => Some((*radius, u.iter().map(|x| radius * x).collect())),
            Family::Ellipsoid { semi_axes } => {
                let h = u
                    .iter()
                    .zip(semi_axes)
                    .map(|(x, a)| (a * x) * (a * x))
                    .sum::<f64>()
                    .sqrt();
                let point = u.iter().zip(semi_axes).map(|(x, a)| a * a * x / h).collect();
                Some((h, point))
            }
            Family::Cube { half_width } => {
                let h = half_width * u.iter().map(|x| x.abs()).sum::<f64>();
                let point = u
                    .iter()
                    .map(|x| if *x == 0.0 { 0.0 } else { half_width * x.signum() })
                    .collect();
                Some((h, point))
            }
            Family::Cylinder {
                radius,
                half_height,
            } => {
                let n = u.len();
                let w = norm(&u[..n - 1]);
                let t = u[n - 1];
                let mut point: Vec<f64> = if w > 0.0 {
                    u[..n - 1].iter().map(|x| radius * x / w).collect()
                } else {
                    vec![0.0; n - 1]
                };
                point.push(if t == 0.0 { 0.0 } else { half_height * t.signum() });
                Some((radius * w + half_height * t.abs(), point))
            }
            Family::LpBall { p, radius } => {
                if *p == 1.0 {
                    let (k, m) = u
                        .iter()
                        .enumerate()
                        .fold((0, 0.0_f64), |(bk, bm), (i, x)| {
                            if x.abs() > bm {
                                (i, x.abs())
                            } else {
                                (bk, bm)
                            }
                        });
                    let mut point = vec![0.0; u.len()];
                    point[k] = radius * u[k].signum();
                    Some((radius * m, point))
                } else {
                    let q = p / (p - 1.0);
                    let qn = u.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q);
                    let point = u
                        .iter()
                        .map(|x| radius * x.signum() * (x.abs() / qn).powf(q - 1.0))
                        .collect();
                    Some((radius * qn, point))
                }
            }
            Family::PerturbedBall { .. } | Family::Custom { .. } => None,
        }
    }

    /// Exit distance `max { t >= 0 : p + t w in K }` from a closed-form family,
    /// or `None` when only the generic root finder applies.
    fn ray_exit_closed_form(&self, p: &[f64], w: &[f64]) -> Option<f64> {
        fn quadratic_exit(pp: f64, pw: f64, ww: f64) -> f64 {
            // |p + t w|^2 = 1 in scaled coordinates
            let disc = (pw * pw - ww * (pp - 1.0)).max(0.0);
            ((-pw + disc.sqrt()) / ww).max(0.0)
        }
        match &self.family {
            Family::Ball { radius } => {
                let r2 = radius * radius;
                Some(quadratic_exit(dot(p, p) / r2, dot(p, w) / r2, dot(w, w) / r2))
            }
            Family::Ellipsoid { semi_axes } => {
                let (mut pp, mut pw, mut ww) = (0.0, 0.0, 0.0);
                for i in 0..p.len() {
                    let a2 = semi_axes[i] * semi_axes[i];
                    pp += p[i] * p[i] / a2;
                    pw += p[i] * w[i] / a2;
                    ww += w[i] * w[i] / a2;
                }
                Some(quadratic_exit(pp, pw, ww))
            }
            Family::Cube { half_width } => {
                let mut t = f64::INFINITY;
                for (pi, wi) in p.iter().zip(w) {
                    if *wi != 0.0 {
                        t = t.min((half_width * wi.signum() - pi) / wi);
                    }
                }
                Some(t.max(0.0))
            }
            Family::Cylinder {
                radius,
                half_height,
            } => {
                let n = p.len();
                let r2 = radius * radius;
                let (pb, wb) = (&p[..n - 1], &w[..n - 1]);
                let ww = dot(wb, wb);
                let side = if ww > 0.0 {
                    quadratic_exit(dot(pb, pb) / r2, dot(pb, wb) / r2, ww / r2)
                } else {
                    f64::INFINITY
                };
                let cap = if w[n - 1] != 0.0 {
                    (half_height * w[n - 1].signum() - p[n - 1]) / w[n - 1]
                } else {
                    f64::INFINITY
                };
                Some(side.min(cap).max(0.0))
            }
            _ => None,
        }
    }

    /// Exit distance along the ray `p + t w` (`w` unit, `p` inside the body).
    /// Closed-form families answer exactly; others use the membership root finder.
    pub fn ray_exit(&self, p: &[f64], w: &[f64]) -> Result<f64> {
        match self.ray_exit_closed_form(p, w) {
            Some(t) => Ok(t),
            None => self.ray_exit_by_root_finding(p, w),
        }
    }

    /// Bracketing bisection on the membership predicate followed by
    /// Illinois-style secant refinement of `|x| - rho(x/|x|)`.
    pub fn ray_exit_by_root_finding(&self, p: &[f64], w: &[f64]) -> Result<f64> {
        let scale = self.max_radius_hint();
        let tol = 1e-12 * scale;
        let point = |t: f64| -> Vec<f64> {
            let mut x = p.to_vec();
            axpy(t, w, &mut x);
            x
        };
        if !self.contains(p) {
            return Ok(0.0);
        }
        let gap = |t: f64| -> f64 {
            let x = point(t);
            let r = norm(&x);
            if r == 0.0 {
                -self.radial_unchecked(w)
            } else {
                r - r * self.radial_unchecked(&x)
            }
        };
        let fail = || Error::RootFinder {
            origin: p.to_vec(),
            direction: w.to_vec(),
        };

        let mut lo = 0.0;
        let mut hi = scale.max(tol);
        let mut grow = 0;
        while self.contains(&point(hi)) {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 64 {
                return Err(fail());
            }
        }
        // Coarse bisection keeps the secant phase inside a single sign change.
        while hi - lo > 1e-3 * scale {
            let mid = 0.5 * (lo + hi);
            if self.contains(&point(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (gap(a), gap(b));
        if fa > 0.0 || fb < 0.0 {
            return Err(fail());
        }
        let mut side = 0i8;
        for _ in 0..200 {
            if b - a <= tol {
                return Ok(0.5 * (a + b));
            }
            let mut c = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let fc = gap(c);
            if fc.abs() <= 1e-15 * scale {
                return Ok(c);
            }
            if fc < 0.0 {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        Err(fail())
    }

    /// Midpoint membership on random pairs of boundary points.
    pub fn spot_check_convexity(&self, pairs: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim;
        let random_boundary = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let u = normalized(&g);
            let r = self.radial_unchecked(&u);
            u.iter().map(|x| x * r).collect()
        };
        (0..pairs).all(|_| {
            let a = random_boundary(&mut rng);
            let b = random_boundary(&mut rng);
            // Shrink by a hair so boundary rounding does not count as a failure.
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y) * (1.0 - 1e-12)).collect();
            self.contains(&mid)
        })
    }
}

pub(crate) fn check_unit(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    let r = norm(u);
    if !r.is_finite() || (r - 1.0).abs() > UNIT_TOL {
        return Err(contract(format!("expected a unit vector, |u| = {r}")));
    }
    Ok(())
}

/// `(1/n) * integral rho^n` over the sphere with the given rule.
pub fn volume(body: &StarBody, rule: &SphereRule) -> Result<f64> {
    if rule.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: rule.dim(),
        });
    }
    let n = body.dim() as i32;
    Ok(integrate(rule, |u| body.radial_unchecked(u).powi(n))? / n as f64)
}

/// A unit vector `u` and an orthonormal basis of `u^perp`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFrame {
    pub u: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl DirectionFrame {
    /// Largest deviation of the Gram matrix of `{u, basis}` from the identity.
    pub fn gram_error(&self) -> f64 {
        let mut all = vec![self.u.clone()];
        all.extend(self.basis.iter().cloned());
        gram_error(&all)
    }

    /// Maps `y` in R^{n-1} to `sum_j y_j basis_j`.
    pub fn embed_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (yj, b) in y.iter().zip(&self.basis) {
            axpy(*yj, b, out);
        }
    }
}

fn gram_error(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - expect).abs());
        }
    }
    worst
}

/// Orthonormal completion of `u` by a Householder reflection that maps the
/// coordinate axis of largest `|u_k|` onto `u`. Deterministic.
pub fn complete_frame(u: &[f64]) -> Result<DirectionFrame> {
    let n = u.len();
    check_unit(u, n)?;
    if n < 2 {
        return Err(contract("a frame needs dimension >= 2"));
    }
    let k = (0..n)
        .max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .expect("non-empty");
    let s = if u[k] >= 0.0 { 1.0 } else { -1.0 };
    // v = u + s e_k; H = I - 2 v v^T / |v|^2 sends e_k to -s u.
    let mut v = u.to_vec();
    v[k] += s;
    let vv = dot(&v, &v);
    let basis = (0..n)
        .filter(|&j| j != k)
        .map(|j| {
            let coef = 2.0 * v[j] / vv;
            let mut col: Vec<f64> = v.iter().map(|vi| -coef * vi).collect();
            col[j] += 1.0;
            col
        })
        .collect();
    Ok(DirectionFrame {
        u: u.to_vec(),
        basis,
    })
}

/// An orthonormal basis of an `i`-dimensional subspace of R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFrame {
    pub dim_ambient: usize,
    pub basis: Vec<Vec<f64>>,
}

impl SubspaceFrame {
    pub fn new(dim_ambient: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        let i = basis.len();
        if i == 0 || i >= dim_ambient {
            return Err(contract(format!(
                "subspace dimension must satisfy 1 <= i < n, got i={i}, n={dim_ambient}"
            )));
        }
        if basis.iter().any(|b| b.len() != dim_ambient) {
            return Err(contract("basis vectors must live in the ambient space"));
        }
        let frame = Self { dim_ambient, basis };
        if frame.gram_error() > 1e-12 {
            return Err(contract("subspace basis is not orthonormal"));
        }
        Ok(frame)
    }

    pub fn dim_sub(&self) -> usize {
        self.basis.len()
    }

    pub fn gram_error(&self) -> f64 {
        gram_error(&self.basis)
    }

    /// The hyperplane `u^perp` as a subspace frame.
    pub fn from_direction(frame: &DirectionFrame) -> Self {
        Self {
            dim_ambient: frame.u.len(),
            basis: frame.basis.clone(),
        }
    }
}

/// Gram–Schmidt (applied twice) on `i` standard-normal vectors.
pub fn random_subspace(n: usize, i: usize, seed: u64) -> Result<SubspaceFrame> {
    if i == 0 || i >= n {
        return Err(contract(format!(
            "subspace dimension must satisfy 1 <= i < n, got i={i}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(i);
    while basis.len() < i {
        let mut g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&g, b);
                axpy(-c, b, &mut g);
            }
        }
        let r = norm(&g);
        if r > 1e-8 {
            basis.push(g.iter().map(|x| x / r).collect());
        }
    }
    Ok(SubspaceFrame {
        dim_ambient: n,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherequad::sphere_rule;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        normalized(&g)
    }

    fn families(n: usize) -> Vec<StarBody> {
        let mut axes = vec![1.0; n];
        axes[n - 1] = 2.0;
        vec![
            StarBody::unit_ball(n),
            StarBody::ellipsoid(axes).unwrap(),
            StarBody::cube(n, 1.0).unwrap(),
            StarBody::lp_ball(n, 3.0, 1.0).unwrap(),
            StarBody::lp_ball(n, 1.0, 1.0).unwrap(),
            StarBody::cylinder(n, 1.0, 0.7).unwrap(),
            StarBody::perturbed_ball(1.0, 0.1, vec![0.3; n], vec![0.5; n]).unwrap(),
        ]
    }

    #[test]
    fn radial_examples() {
        let cube = StarBody::cube(4, 1.0).unwrap();
        assert_eq!(cube.radial(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((cube.radial(&[0.5, 0.5, 0.5, 0.5]).unwrap() - 2.0).abs() < 1e-15);
        let ell = StarBody::ellipsoid(vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((ell.radial(&[0.0, 0.0, 0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cylinder_radial_conventions() {
        let cyl = StarBody::cylinder(4, 1.0, 2.0).unwrap();
        assert_eq!(cyl.radial(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cyl.radial(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 2.0);
        let s = 0.5_f64.sqrt();
        let expect = (1.0 / s).min(2.0 / s);
        assert!((cyl.radial(&[s, 0.0, 0.0, s]).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn non_unit_input_rejected() {
        let ball = StarBody::unit_ball(4);
        assert!(matches!(ball.radial(&[1.0, 1.0, 0.0, 0.0]), Err(Error::Contract(_))));
        assert!(matches!(ball.radial(&[1.0, 0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn contains_examples() {
        let ball = StarBody::unit_ball(4);
        assert!(ball.contains(&[0.5, 0.0, 0.0, 0.0]));
        assert!(!ball.contains(&[1.1, 0.0, 0.0, 0.0]));
        assert!(ball.contains(&[0.0; 4]));
        let cube = StarBody::cube(4, 1.0).unwrap();
        assert!(cube.contains(&[1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn evenness_of_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for body in families(4).into_iter().chain(families(5)) {
            for _ in 0..10_000 {
                let u = random_unit(&mut rng, body.dim());
                let minus: Vec<f64> = u.iter().map(|x| -x).collect();
                let d = body.radial_unchecked(&u) - body.radial_unchecked(&minus);
                assert!(d.abs() < 1e-12, "{}", body.id());
            }
        }
    }

    #[test]
    fn scaling_is_exact_for_closed_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bodies = [
            StarBody::unit_ball(4),
            StarBody::ellipsoid(vec![1.0, 0.5, 2.0, 1.5]).unwrap(),
            StarBody::cube(4, 0.75).unwrap(),
        ];
        for body in &bodies {
            let big = body.scaled(2.0).unwrap();
            for _ in 0..100 {
                let u = random_unit(&mut rng, 4);
                assert_eq!(big.radial_unchecked(&u), 2.0 * body.radial_unchecked(&u));
            }
        }
    }

    #[test]
    fn convexity_midpoints() {
        for body in families(4) {
            assert!(body.spot_check_convexity(2000, 9), "{}", body.id());
        }
        let star = StarBody::custom(4, "star", Smoothness::C2, None, |u: &[f64]| {
            1.0 + 0.9 * (8.0 * u[0] * u[0] - 4.0).cos().abs()
        })
        .unwrap();
        assert!(!star.spot_check_convexity(2000, 9));
    }

    #[test]
    fn ray_exit_matches_root_finder() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for body in families(4) {
            for _ in 0..200 {
                let w = random_unit(&mut rng, 4);
                let dir = random_unit(&mut rng, 4);
                let p: Vec<f64> = dir.iter().map(|x| 0.3 * x * body.radial_unchecked(&dir)).collect();
                let exact = body.ray_exit(&p, &w).unwrap();
                let generic = body.ray_exit_by_root_finding(&p, &w).unwrap();
                assert!((exact - generic).abs() < 1e-10, "{}: {exact} vs {generic}", body.id());
            }
        }
    }

    #[test]
    fn support_points_lie_on_boundary_and_attain_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for body in families(4) {
            let Some(_) = body.support_closed_form(&unit(4, 0)) else { continue };
            for _ in 0..100 {
                let u = random_unit(&mut rng, 4);
                let (h, x) = body.support_closed_form(&u).unwrap();
                assert!((dot(&x, &u) - h).abs() < 1e-12);
                assert!(body.contains(&x.iter().map(|v| v * (1.0 - 1e-12)).collect::<Vec<_>>()));
                for _ in 0..20 {
                    let v = random_unit(&mut rng, 4);
                    let y: Vec<f64> = v.iter().map(|t| t * body.radial_unchecked(&v)).collect();
                    assert!(dot(&y, &u) <= h + 1e-12, "{}", body.id());
                }
            }
        }
    }

    #[test]
    fn volumes() {
        let rule = sphere_rule(4, 24).unwrap();
        let v = volume(&StarBody::unit_ball(4), &rule).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-12);
        let ell = StarBody::ellipsoid(vec![1.0, 0.5, 2.0, 1.5]).unwrap();
        let v = volume(&ell, &sphere_rule(4, 48).unwrap()).unwrap();
        assert!((v - PI * PI / 2.0 * 1.5).abs() < 1e-8);
        let fine = sphere_rule(4, 96).unwrap();
        let v = volume(&StarBody::cube(4, 1.0).unwrap(), &fine).unwrap();
        assert!((v - 16.0).abs() < 1e-3 * 16.0, "{v}");
        assert!(matches!(
            volume(&StarBody::unit_ball(5), &rule),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cylinder_volume_in_r5() {
        let rule = sphere_rule(5, 28).unwrap();
        let v = volume(&StarBody::cylinder(5, 1.0, 1.0).unwrap(), &rule).unwrap();
        assert!((v - PI * PI).abs() < 1e-2 * PI * PI, "{v}");
    }

    #[test]
    fn frames() {
        let f = complete_frame(&unit(4, 3)).unwrap();
        for b in &f.basis {
            assert!(b[3].abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..9 {
            for _ in 0..50 {
                let u = random_unit(&mut rng, n);
                let f = complete_frame(&u).unwrap();
                assert!(f.gram_error() < 1e-12);
                assert_eq!(f, complete_frame(&u).unwrap());
                let g = complete_frame(&u.iter().map(|x| -x).collect::<Vec<_>>()).unwrap();
                for b in &g.basis {
                    assert!(dot(b, &u).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_subspaces() {
        let a = random_subspace(4, 2, 11).unwrap();
        assert_eq!(a.dim_sub(), 2);
        assert!(a.gram_error() < 1e-12);
        assert_eq!(a, random_subspace(4, 2, 11).unwrap());
        assert_ne!(a, random_subspace(4, 2, 12).unwrap());
        assert_eq!(random_subspace(5, 3, 1).unwrap().dim_sub(), 3);
        assert!(random_subspace(4, 4, 1).is_err());
        assert!(random_subspace(4, 0, 1).is_err());
    }

    #[test]
    fn axis_detection() {
        assert_eq!(
            StarBody::ellipsoid(vec![1.0, 1.0, 1.0, 2.0]).unwrap().axis(),
            Some(&[0.0, 0.0, 0.0, 1.0][..])
        );
        assert_eq!(
            StarBody::ellipsoid(vec![3.0, 1.0, 1.0, 1.0]).unwrap().axis(),
            Some(&[1.0, 0.0, 0.0, 0.0][..])
        );
        assert!(StarBody::ellipsoid(vec![1.0, 2.0, 3.0, 1.0]).unwrap().axis().is_none());
        assert!(StarBody::cube(4, 1.0).unwrap().axis().is_none());
        let pb = StarBody::perturbed_ball(1.0, 0.1, vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(pb.axis(), Some(&[0.0, 0.0, 0.0, 1.0][..]));
    }

    #[test]
    fn perturbation_cap() {
        assert!(StarBody::perturbed_ball(1.0, 0.9, vec![1.0, 0.0], vec![0.5, 0.0]).is_err());
    }
}
