//! Intersection bodies: the radial function of `IL`, testers for whether a
//! body is an intersection body, and recovery of the generating star body.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::{complete_frame, Smoothness, StarBody};
use crate::error::{Error, Result};
use crate::optim::nelder_mead_sphere;
use crate::radon::{funk_multipliers, DEFAULT_TAIL_THRESHOLD, zonal_inverse, ZonalFunction, ZonalInverse, ZonalInverseOptions};
use crate::sections::{central_section_volume, lemma1_inverse_with, Lemma1Options, SecondDerivative};
use crate::spherequad::direction_grid;

/// Relative width of the "yes" band: `eps_abs = YES_BAND * max(R^{-1} rho_K)`.
pub const YES_BAND: f64 = 1e-4;
/// A "no" needs the minimum below `-NO_CLEARANCE * error_bar`.
pub const NO_CLEARANCE: f64 = 3.0;
/// Error bars of directions whose extrapolation looked non-smooth are widened by this.
pub const LOW_CONFIDENCE_WIDENING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lemma1,
    Zonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionVerdict {
    pub verdict: Verdict,
    pub min_value: f64,
    pub min_direction: Vec<f64>,
    pub error_bar: f64,
    pub max_value: f64,
    pub eps_abs: f64,
    pub method: Method,
    pub note: Option<String>,
}

fn classify(min_value: f64, max_value: f64, error_bar: f64) -> (Verdict, f64) {
    let eps_abs = YES_BAND * max_value.abs();
    let verdict = if min_value >= -eps_abs {
        Verdict::Yes
    } else if min_value < -NO_CLEARANCE * error_bar {
        Verdict::No
    } else {
        Verdict::Borderline
    };
    (verdict, eps_abs)
}

const BORDERLINE_NOTE: &str = "the minimum is negative but within the error bar; an inverse that is a measure with singular parts cannot be certified by pointwise evaluation";

/// `rho_{IL}(u) = vol_{n-1}(L ∩ u^perp)`.
pub fn intersection_body_radial(l: &StarBody, u: &[f64], level: usize) -> Result<f64> {
    central_section_volume(l, u, level)
}

#[derive(Debug, Clone, Copy)]
pub struct R4Options {
    /// Minimum number of grid directions (antipodal pairs count once).
    pub grid_size: usize,
    /// Section level and Richardson step; `None` picks them from the body's smoothness.
    pub lemma1: Option<Lemma1Options>,
    /// Grid minima used as starts for local refinement.
    pub refine_starts: usize,
    pub refine_evaluations: usize,
}

impl Default for R4Options {
    fn default() -> Self {
        Self {
            grid_size: 256,
            lemma1: None,
            refine_starts: 3,
            refine_evaluations: 60,
        }
    }
}

fn error_bar(d: &SecondDerivative) -> f64 {
    if d.low_confidence {
        d.error_estimate * LOW_CONFIDENCE_WIDENING
    } else {
        d.error_estimate
    }
}

/// Tests positivity of `R^{-1} rho_K` in R^4 from `-A''_u(0) / (16 pi^2)` over
/// a direction grid, refining the smallest values by local search.
pub fn is_intersection_body_r4(body: &StarBody, opts: R4Options) -> Result<IntersectionVerdict> {
    if body.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: body.dim(),
        });
    }
    let lopts = opts.lemma1.unwrap_or_else(|| Lemma1Options::for_body(body));
    let grid = direction_grid(4, opts.grid_size)?;
    let values: Vec<SecondDerivative> = grid
        .par_iter()
        .map(|u| lemma1_inverse_with(body, u, lopts))
        .collect::<Result<Vec<_>>>()?;
    let max_value = values.iter().map(|d| d.value).fold(f64::NEG_INFINITY, f64::max);

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[a].value.total_cmp(&values[b].value));
    let mut best_u = grid[order[0]].clone();
    let mut best = values[order[0]];
    for &i in order.iter().take(opts.refine_starts) {
        let mut found: Option<(Vec<f64>, SecondDerivative)> = None;
        nelder_mead_sphere(&grid[i], 0.05, 1e-4, opts.refine_evaluations, |u| {
            let d = lemma1_inverse_with(body, u, lopts)?;
            if found.as_ref().is_none_or(|(_, f)| d.value < f.value) {
                found = Some((u.to_vec(), d));
            }
            Ok(d.value)
        })?;
        if let Some((u, d)) = found {
            if d.value < best.value {
                best = d;
                best_u = u;
            }
        }
    }
    let bar = error_bar(&best);
    let (verdict, eps_abs) = classify(best.value, max_value, bar);
    Ok(IntersectionVerdict {
        verdict,
        min_value: best.value,
        min_direction: best_u,
        error_bar: bar,
        max_value,
        eps_abs,
        method: Method::Lemma1,
        note: (verdict == Verdict::Borderline).then(|| BORDERLINE_NOTE.to_string()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// Unsmoothed first; fall back to Poisson smoothing when the expansion tail is too large.
    Auto,
    None,
    Poisson(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct ZonalOptions {
    pub grid: usize,
    pub kmax: usize,
    pub smoothing: Smoothing,
    /// Degree and grid used once the tester falls back to smoothing.
    pub smoothed_kmax: usize,
    pub smoothed_grid: usize,
    pub smoothed_radius: f64,
}

impl Default for ZonalOptions {
    fn default() -> Self {
        Self {
            grid: crate::radon::DEFAULT_GRID,
            kmax: crate::radon::DEFAULT_KMAX,
            smoothing: Smoothing::Auto,
            smoothed_kmax: 320,
            smoothed_grid: 2048,
            smoothed_radius: 0.9,
        }
    }
}

fn zonal_inverse_of_body(body: &StarBody, grid: usize, kmax: usize, r: f64, tail_threshold: f64) -> Result<ZonalInverse> {
    let g = ZonalFunction::from_body(body, grid, kmax)?;
    let m = funk_multipliers(body.dim(), kmax, 8)?;
    zonal_inverse(
        &g,
        &m,
        ZonalInverseOptions {
            smoothing: r,
            tail_threshold,
        },
    )
}

fn grid_min(f: &ZonalFunction) -> (f64, f64) {
    f.angles()
        .into_iter()
        .zip(f.samples().iter().copied())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(phi, v)| (v, phi))
        .expect("non-empty grid")
}

/// Tests positivity of the zonal inverse of an axially symmetric body's
/// radial function in any dimension.
///
/// Poisson smoothing multiplies degree `k` by `r^k`, i.e. convolves with a
/// positive kernel, so a negative smoothed inverse still certifies that the
/// unsmoothed inverse is not a non-negative measure.
pub fn is_intersection_body_zonal(body: &StarBody, opts: ZonalOptions) -> Result<IntersectionVerdict> {
    let axis = body.axis().ok_or(Error::NotAxial)?.to_vec();
    let (grid, kmax, r) = match opts.smoothing {
        Smoothing::None => (opts.grid, opts.kmax, 1.0),
        Smoothing::Poisson(r) => (opts.smoothed_grid, opts.smoothed_kmax, r),
        Smoothing::Auto => match zonal_inverse_of_body(body, opts.grid, opts.kmax, 1.0, DEFAULT_TAIL_THRESHOLD) {
            Ok(_) => (opts.grid, opts.kmax, 1.0),
            Err(Error::ExpansionTail { .. }) => (opts.smoothed_grid, opts.smoothed_kmax, opts.smoothed_radius),
            Err(e) => return Err(e),
        },
    };
    let full = zonal_inverse_of_body(body, grid, kmax, r, DEFAULT_TAIL_THRESHOLD)?;
    let half_kmax = (kmax / 2) & !1;
    // The coarser run only sizes the error bar, so its own tail is not refused.
    let half = zonal_inverse_of_body(body, grid / 2, half_kmax, r, f64::INFINITY)?;

    let (min_value, phi) = grid_min(&full.function);
    let max_value = full.function.samples().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (half_min, _) = grid_min(&half.function);
    let bar = full.tail_estimate * full.function.sup_norm() + (min_value - half_min).abs();

    let frame = complete_frame(&axis)?;
    let (s, c) = phi.sin_cos();
    let min_direction = frame.basis[0]
        .iter()
        .zip(&axis)
        .map(|(e, a)| s * e + c * a)
        .collect();
    let (verdict, eps_abs) = classify(min_value, max_value, bar);
    let mut notes = Vec::new();
    if r < 1.0 {
        notes.push(format!(
            "Poisson-smoothed inverse (r = {r}); a negative value certifies failure, a non-negative one is necessary but not sufficient"
        ));
    }
    if verdict == Verdict::Borderline {
        notes.push(BORDERLINE_NOTE.to_string());
    }
    Ok(IntersectionVerdict {
        verdict,
        min_value,
        min_direction,
        error_bar: bar,
        max_value,
        eps_abs,
        method: Method::Zonal,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Star body `L` with `IL = K`: `rho_L = (3 R^{-1} rho_K)^{1/3}` in R^4.
///
/// Axially symmetric bodies use the zonal inverse and are tabulated; others
/// evaluate the section-based inverse lazily. Fails when the inverse touches
/// or crosses zero.
pub fn recover_star_body(body: &StarBody) -> Result<StarBody> {
    if body.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: body.dim(),
        });
    }
    let refuse = |v: &IntersectionVerdict| -> Result<()> {
        let floor = v.eps_abs.max(NO_CLEARANCE * v.error_bar);
        if v.min_value <= floor {
            return Err(Error::NotIntersectionBodyOfStarBody(format!(
                "inverse Radon transform reaches {:.3e} (threshold {:.3e}) at {:?}",
                v.min_value, floor, v.min_direction
            )));
        }
        Ok(())
    };
    let name = format!("generator-of-{}", body.id());
    if body.axis().is_some() && body.smoothness() == Smoothness::C2 {
        let opts = ZonalOptions {
            smoothing: Smoothing::None,
            ..Default::default()
        };
        let verdict = is_intersection_body_zonal(body, opts)?;
        refuse(&verdict)?;
        let inverse = zonal_inverse_of_body(body, opts.grid, opts.kmax, 1.0, DEFAULT_TAIL_THRESHOLD)?.function;
        let radial = move |u: &[f64]| (3.0 * inverse.eval_at(u)).cbrt();
        return StarBody::custom(4, &name, Smoothness::C2, body.axis().map(|a| a.to_vec()), radial);
    }
    let verdict = is_intersection_body_r4(body, R4Options::default())?;
    refuse(&verdict)?;
    let source = Arc::new(body.clone());
    let lopts = Lemma1Options::for_body(body);
    let radial = move |u: &[f64]| match lemma1_inverse_with(&source, u, lopts) {
        Ok(d) => (3.0 * d.value).cbrt(),
        Err(_) => f64::NAN,
    };
    StarBody::custom(4, &name, body.smoothness(), body.axis().map(|a| a.to_vec()), radial)
}
