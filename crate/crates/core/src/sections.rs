//! Hyperplane sections: central sections, the parallel-section function
//! `A_u(z) = vol_{n-1}(K ∩ (z u + u^perp))`, its curvature at `z = 0`, and the
//! pointwise inverse Funk transform in R^4 obtained from it.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;

use serde::Serialize;

use crate::bodies::{check_unit, complete_frame, Smoothness, StarBody};
use crate::error::{contract, Error, Result};
use crate::linalg::{axpy, dot};
use crate::optim::nelder_mead_sphere;
use crate::spherequad::{cached_rule, direction_grid, integrate_embedded};

pub const DEFAULT_LEVEL: usize = 40;
/// Default Richardson base step as a fraction of the support extent.
pub const DEFAULT_H_REL: f64 = 1e-2;
/// Level and step used for bodies whose radial function has kinks. Their
/// section volumes converge only like `L^-2`, so second differences need a
/// finer rule and a longer step; for polytopes `A` is exactly quadratic near
/// `0` in generic directions, so the longer step costs no truncation error.
pub const ROUGH_LEVEL: usize = 192;
pub const ROUGH_H_REL: f64 = 0.1;
/// Relative rounding level assumed for one section volume.
const SECTION_NOISE: f64 = 1e-13;

/// Support value `h_K(u)` and a point of K attaining it. Closed forms are used
/// where the family has one; otherwise a coarse direction grid of
/// `<rho(v) v, u>` is refined by Nelder–Mead.
pub fn support(body: &StarBody, u: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_unit(u, body.dim())?;
    if let Some(hit) = body.support_closed_form(u) {
        return Ok(hit);
    }
    let n = body.dim();
    let grid = direction_grid(n, 64 * n * n)?;
    let score = |v: &[f64]| body.radial_unchecked(v) * dot(v, u);
    let mut starts: Vec<(f64, Vec<f64>)> = grid
        .into_iter()
        .flat_map(|v| {
            let minus: Vec<f64> = v.iter().map(|x| -x).collect();
            [v, minus]
        })
        .map(|v| (score(&v), v))
        .collect();
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = starts[0].clone();
    for (_, v) in starts.iter().take(3) {
        let m = nelder_mead_sphere(v, 0.05, 1e-10, 4000, |w| Ok(-score(w)))?;
        if -m.value > best.0 {
            best = (-m.value, m.point);
        }
    }
    let (h, v) = best;
    let r = body.radial_unchecked(&v);
    Ok((h, v.iter().map(|x| r * x).collect()))
}

/// Runs `f` over an embedded rule, turning the first closure error into the result.
fn integrate_fallible<F>(level: usize, basis: &[Vec<f64>], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let m = basis.len();
    let value = integrate_embedded(&cached_rule(m, level), basis, |w| match f(w) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("poisoned").get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    value
}

/// `vol_{n-1}(K ∩ u^perp) = (1/(n-1)) * integral over S^{n-1} ∩ u^perp of rho^{n-1}`.
pub fn central_section_volume(body: &StarBody, u: &[f64], level: usize) -> Result<f64> {
    let n = body.dim();
    check_unit(u, n)?;
    let frame = complete_frame(u)?;
    let m = (n - 1) as i32;
    let raw = integrate_embedded(&cached_rule(n - 1, level), &frame.basis, |v| {
        body.radial_unchecked(v).powi(m)
    })?;
    Ok(raw / (n - 1) as f64)
}

/// Maximum chord-midpoint sweeps when centring a slice.
const CENTERING_SWEEPS: usize = 64;

/// A point of the slice `K ∩ (z u + u^perp)` near its middle: start from the
/// scaled support point, then move to the chord midpoint along each in-plane
/// basis vector in turn until a sweep no longer moves the point. Where slices
/// are translates of one another this lands on corresponding points, so the
/// polar quadrature errors of nearby slices agree.
fn slice_center(body: &StarBody, u: &[f64], basis: &[Vec<f64>], z: f64, h: f64, p_star: &[f64]) -> Result<Vec<f64>> {
    let mut c: Vec<f64> = p_star.iter().map(|x| z / h * x).collect();
    // land exactly on the plane
    let off = z - dot(&c, u);
    axpy(off, u, &mut c);
    let tol = 1e-14 * h;
    let minus: Vec<Vec<f64>> = basis.iter().map(|b| b.iter().map(|x| -x).collect()).collect();
    for _ in 0..CENTERING_SWEEPS {
        let mut moved = 0.0_f64;
        for (b, mb) in basis.iter().zip(&minus) {
            let shift = 0.5 * (body.ray_exit(&c, b)? - body.ray_exit(&c, mb)?);
            axpy(shift, b, &mut c);
            moved = moved.max(shift.abs());
        }
        if moved <= tol {
            break;
        }
    }
    Ok(c)
}

/// `A_u(z)`, by polar integration inside the affine hyperplane around a
/// central point of the slice.
pub fn parallel_section(body: &StarBody, u: &[f64], z: f64, level: usize) -> Result<f64> {
    let n = body.dim();
    check_unit(u, n)?;
    if !z.is_finite() {
        return Err(contract("section offset must be finite"));
    }
    if z == 0.0 {
        return central_section_volume(body, u, level);
    }
    let (h, p_star) = support(body, u)?;
    if z.abs() >= h {
        return Ok(0.0);
    }
    let frame = complete_frame(u)?;
    let center = slice_center(body, u, &frame.basis, z, h, &p_star)?;
    let m = (n - 1) as i32;
    let raw = integrate_fallible(level, &frame.basis, |w| Ok(body.ray_exit(&center, w)?.powi(m)))?;
    Ok(raw / (n - 1) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionProfile {
    pub body_id: String,
    pub direction: Vec<f64>,
    /// Symmetric grid on `[-z_max, z_max]`, increasing.
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub z_max: f64,
}

impl SectionProfile {
    /// `max |A(z) - A(-z)| / max A`.
    pub fn evenness_error(&self) -> f64 {
        let n = self.values.len();
        let peak = self.values.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        (0..n)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
            / peak
    }

    /// Two-column delimited text with a header line.
    pub fn write_delimited(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "z,area")?;
        for (z, a) in self.z.iter().zip(&self.values) {
            writeln!(out, "{z:.17e},{a:.17e}")?;
        }
        Ok(())
    }
}

/// Samples `A_u` at `2 * half_points + 1` evenly spaced offsets on `[-z_max, z_max]`.
pub fn section_profile(body: &StarBody, u: &[f64], half_points: usize, level: usize) -> Result<SectionProfile> {
    if half_points < 4 {
        return Err(contract(format!("need at least 4 half-points, got {half_points}")));
    }
    check_unit(u, body.dim())?;
    let (z_max, _) = support(body, u)?;
    let hp = half_points as f64;
    let z: Vec<f64> = (0..=2 * half_points)
        .map(|j| z_max * (j as f64 - hp) / hp)
        .collect();
    let values = z
        .iter()
        .map(|&zj| parallel_section(body, u, zj, level))
        .collect::<Result<Vec<_>>>()?;
    Ok(SectionProfile {
        body_id: body.id(),
        direction: u.to_vec(),
        z,
        values,
        z_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDerivative {
    pub value: f64,
    pub error_estimate: f64,
    /// The extrapolation table did not behave like a smooth `A`.
    pub low_confidence: bool,
}

/// `A''_u(0)` from `D(s) = 2 (A(s) - A(0)) / s^2` at `s = h, h/2, h/4`, with
/// two rounds of Richardson extrapolation (`A'(0) = 0` by symmetry, so `D`
/// has an expansion in even powers of `s`). When successive differences do
/// not shrink by roughly 4 the table is flagged and `D(h)` is returned.
pub fn second_derivative_at_zero(body: &StarBody, u: &[f64], h: f64, level: usize) -> Result<SecondDerivative> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(contract(format!("step must be positive, got {h}")));
    }
    let a0 = central_section_volume(body, u, level)?;
    let steps = [h, h / 2.0, h / 4.0];
    let mut d = [0.0; 3];
    for (dj, &s) in d.iter_mut().zip(&steps) {
        let a = parallel_section(body, u, s, level)?;
        *dj = 2.0 * (a - a0) / (s * s);
    }
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    let r2 = (16.0 * r1[1] - r1[0]) / 15.0;

    // Quadrature error of one section volume from a half-level rerun, assuming
    // the slowest (`L^-2`) convergence seen for kinked radial functions.
    let a0_coarse = central_section_volume(body, u, (level / 2).max(1))?;
    let delta = ((a0 - a0_coarse).abs() / 3.0).max(SECTION_NOISE * a0.abs());
    let noise_at = |s: f64| 4.0 * delta / (s * s);
    let noise = noise_at(steps[2]) * 2.0;
    let (d01, d12) = (d[0] - d[1], d[1] - d[2]);
    let significant = d01.abs() > 10.0 * noise || d12.abs() > 10.0 * noise;
    if !significant {
        // The table is flat within quadrature noise; the longest step is the least noisy.
        return Ok(SecondDerivative {
            value: d[0],
            error_estimate: d01.abs() + noise_at(steps[0]),
            low_confidence: false,
        });
    }
    let ratio = d01 / d12;
    // Extrapolation must not cross zero past every quotient it started from.
    let overshoot = (r2 > 0.0 && d.iter().all(|&x| x <= 0.0)) || (r2 < 0.0 && d.iter().all(|&x| x >= 0.0));
    if !(3.5..=4.5).contains(&ratio) || overshoot {
        // Extrapolating across a kink can flip signs. Every difference
        // quotient of an even function with a concave cube root is <= 0, so
        // report the one with the least noise amplification instead.
        return Ok(SecondDerivative {
            value: d[0],
            error_estimate: d01.abs().max(d12.abs()) + noise_at(steps[0]),
            low_confidence: true,
        });
    }
    Ok(SecondDerivative {
        value: r2,
        error_estimate: (r2 - r1[1]).abs() + noise,
        low_confidence: false,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Lemma1Options {
    pub level: usize,
    /// Base step as a fraction of `h_K(u)`.
    pub h_rel: f64,
}

impl Lemma1Options {
    pub fn for_body(body: &StarBody) -> Self {
        match body.smoothness() {
            Smoothness::C2 => Self::default(),
            Smoothness::Lipschitz | Smoothness::Piecewise => Self {
                level: ROUGH_LEVEL,
                h_rel: ROUGH_H_REL,
            },
        }
    }
}

impl Default for Lemma1Options {
    fn default() -> Self {
        Self {
            level: DEFAULT_LEVEL,
            h_rel: DEFAULT_H_REL,
        }
    }
}

/// `(R^{-1} rho_K)(u) = -A''_u(0) / (16 pi^2)` for a body in R^4.
pub fn lemma1_inverse(body: &StarBody, u: &[f64]) -> Result<SecondDerivative> {
    lemma1_inverse_with(body, u, Lemma1Options::for_body(body))
}

pub fn lemma1_inverse_with(body: &StarBody, u: &[f64], opts: Lemma1Options) -> Result<SecondDerivative> {
    if body.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: body.dim(),
        });
    }
    let (h, _) = support(body, u)?;
    let d2 = second_derivative_at_zero(body, u, opts.h_rel * h, opts.level)?;
    let scale = 16.0 * PI * PI;
    Ok(SecondDerivative {
        value: -d2.value / scale,
        error_estimate: d2.error_estimate / scale,
        low_confidence: d2.low_confidence,
    })
}
