//! Harness for the Busemann–Petty problem and its relatives: section
//! dominance, the BP implication check with an intersection-body certificate,
//! the minmax section ratio, the dimension table and Brunn–Minkowski
//! concavity of parallel sections.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::{check_unit, complete_frame, random_subspace, volume, Smoothness, StarBody, SubspaceFrame};
use crate::error::{contract, Error, Result};
use crate::gauss::GaussRule;
use crate::intersect::{is_intersection_body_r4, is_intersection_body_zonal, IntersectionVerdict, R4Options, Verdict, ZonalOptions};
use crate::linalg::{ball_volume, unit};
use crate::optim::nelder_mead_sphere;
use crate::sections::{central_section_volume, parallel_section, support};
use crate::spherequad::{cached_rule, direction_grid, integrate_embedded};

/// Relative margin for strict slice dominance and for volume comparisons.
pub const DEFAULT_DELTA_REL: f64 = 1e-6;
/// Tolerance of the midpoint-concavity test, relative to the largest value.
pub const BM_TOLERANCE: f64 = 1e-8;
/// Quadrature nodes allowed for one volume evaluation.
const VOLUME_NODE_BUDGET: f64 = 16e6;

/// Sphere level for `i`-dimensional slices of `body`.
pub fn default_slice_level(body: &StarBody, i: usize) -> usize {
    match (body.smoothness(), i) {
        (Smoothness::C2, _) => 40,
        (_, 2) => 512,
        (_, 3) => 256,
        _ => 64,
    }
}

/// Sphere level for `vol_n(body)`, capped by a node budget in high dimension.
pub fn default_volume_level(body: &StarBody) -> usize {
    let wanted = match body.smoothness() {
        Smoothness::C2 => 48,
        _ => 192,
    };
    let n = body.dim() as f64;
    let cap = (VOLUME_NODE_BUDGET / 2.0).powf(1.0 / (n - 1.0)).floor() as usize;
    wanted.min(cap.max(4))
}

fn body_volume(body: &StarBody, level: Option<usize>) -> Result<f64> {
    let level = level.unwrap_or_else(|| default_volume_level(body));
    volume(body, &cached_rule(body.dim(), level))
}

/// `vol_i(K ∩ H) = (1/i) * integral over S^{n-1} ∩ H of rho^i`.
pub fn islice_volume(body: &StarBody, h: &SubspaceFrame, level: usize) -> Result<f64> {
    if h.dim_ambient != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: h.dim_ambient,
        });
    }
    let i = h.dim_sub();
    if i == 1 {
        // S^0 = {v, -v}; the body is symmetric.
        return Ok(2.0 * body.radial(&h.basis[0])?);
    }
    let raw = integrate_embedded(&cached_rule(i, level), &h.basis, |v| body.radial_unchecked(v).powi(i as i32))?;
    Ok(raw / i as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstSubspace {
    pub basis: Vec<Vec<f64>>,
    pub vol_k: f64,
    pub vol_l: f64,
    /// `(vol_L - vol_K) / vol_L`; negative means `K` has the larger slice.
    pub relative_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceStats {
    pub i: usize,
    pub samples: usize,
    /// Subspaces with `vol_K < (1 - delta) vol_L`.
    pub strict: usize,
    /// Subspaces with `vol_K > (1 + delta) vol_L`.
    pub failures: usize,
    pub dominance_fraction: f64,
    pub worst: WorstSubspace,
}

#[derive(Debug, Clone, Copy)]
pub struct BpOptions {
    /// Minimum number of sampled subspaces.
    pub samples: usize,
    pub seed: u64,
    pub slice_level: Option<usize>,
    pub volume_level: Option<usize>,
    pub delta_rel: f64,
    /// Run the intersection-body tester on `K` when dominance holds.
    pub certify: bool,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            slice_level: None,
            volume_level: None,
            delta_rel: DEFAULT_DELTA_REL,
            certify: true,
        }
    }
}

fn sample_subspaces(n: usize, i: usize, samples: usize, seed: u64) -> Result<Vec<SubspaceFrame>> {
    if i == n - 1 {
        return direction_grid(n, samples)?
            .iter()
            .map(|u| Ok(SubspaceFrame::from_direction(&complete_frame(u)?)))
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| random_subspace(n, i, rng.random())).collect()
}

/// Compares `vol_i(K ∩ H)` with `vol_i(L ∩ H)` over sampled `i`-subspaces:
/// the direction grid when `i = n - 1`, seeded random subspaces otherwise.
pub fn section_dominance(k: &StarBody, l: &StarBody, i: usize, opts: &BpOptions) -> Result<DominanceStats> {
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    if i == 0 || i >= n {
        return Err(contract(format!("slice dimension must satisfy 1 <= i < n, got i={i}, n={n}")));
    }
    let subspaces = sample_subspaces(n, i, opts.samples, opts.seed)?;
    let level_k = opts.slice_level.unwrap_or_else(|| default_slice_level(k, i));
    let level_l = opts.slice_level.unwrap_or_else(|| default_slice_level(l, i));
    let volumes: Vec<(f64, f64)> = subspaces
        .par_iter()
        .map(|h| Ok((islice_volume(k, h, level_k)?, islice_volume(l, h, level_l)?)))
        .collect::<Result<Vec<_>>>()?;

    let delta = opts.delta_rel;
    let strict = volumes.iter().filter(|(vk, vl)| *vk < vl * (1.0 - delta)).count();
    let failures = volumes.iter().filter(|(vk, vl)| *vk > vl * (1.0 + delta)).count();
    let margin = |(vk, vl): (f64, f64)| (vl - vk) / vl;
    let worst_index = (0..volumes.len())
        .min_by(|&a, &b| margin(volumes[a]).total_cmp(&margin(volumes[b])))
        .ok_or_else(|| contract("no subspaces sampled"))?;
    let (vol_k, vol_l) = volumes[worst_index];
    Ok(DominanceStats {
        i,
        samples: volumes.len(),
        strict,
        failures,
        dominance_fraction: strict as f64 / volumes.len() as f64,
        worst: WorstSubspace {
            basis: subspaces[worst_index].basis.clone(),
            vol_k,
            vol_l,
            relative_margin: margin((vol_k, vol_l)),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BpVerdict {
    Consistent,
    Violation,
    HypothesisNotMet,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BpReport {
    pub body_k: String,
    pub body_l: String,
    pub n: usize,
    pub dominance: DominanceStats,
    pub vol_k: f64,
    pub vol_l: f64,
    pub k_certificate: Option<IntersectionVerdict>,
    pub verdict: BpVerdict,
    pub note: Option<String>,
}

fn certify(k: &StarBody) -> Result<Option<IntersectionVerdict>> {
    if k.dim() == 4 {
        is_intersection_body_r4(k, R4Options::default()).map(Some)
    } else if k.axis().is_some() {
        is_intersection_body_zonal(k, ZonalOptions::default()).map(Some)
    } else {
        Ok(None)
    }
}

/// Busemann–Petty check for hyperplane sections.
pub fn bp_check(k: &StarBody, l: &StarBody, opts: &BpOptions) -> Result<BpReport> {
    gbp_check(k, l, k.dim() - 1, opts)
}

/// Generalized check: `i`-dimensional sections of `K` smaller than those of
/// `L` should force `vol(K) < vol(L)` when `K` is an intersection body.
pub fn gbp_check(k: &StarBody, l: &StarBody, i: usize, opts: &BpOptions) -> Result<BpReport> {
    let dominance = section_dominance(k, l, i, opts)?;
    let vol_k = body_volume(k, opts.volume_level)?;
    let vol_l = body_volume(l, opts.volume_level)?;
    let mut report = BpReport {
        body_k: k.id(),
        body_l: l.id(),
        n: k.dim(),
        dominance,
        vol_k,
        vol_l,
        k_certificate: None,
        verdict: BpVerdict::Inconclusive,
        note: None,
    };
    let d = &report.dominance;
    if d.strict < d.samples {
        if d.failures > 0 {
            report.verdict = BpVerdict::HypothesisNotMet;
        } else {
            report.note = Some("some slices agree within the relative margin; strict dominance is undecided".into());
        }
        return Ok(report);
    }

    if opts.certify {
        report.k_certificate = certify(k)?;
    }
    let certified = report
        .k_certificate
        .as_ref()
        .is_some_and(|c| c.verdict == Verdict::Yes);
    let delta = opts.delta_rel;
    if vol_k < vol_l * (1.0 - delta) {
        report.verdict = BpVerdict::Consistent;
        if !certified {
            report.note = Some("K is not certified as an intersection body; consistency carries no weight".into());
        }
    } else if vol_k <= vol_l * (1.0 + delta) {
        report.note = Some("volumes agree within the relative margin".into());
    } else {
        report.verdict = BpVerdict::Violation;
        report.note = Some(if certified {
            "K is certified as an intersection body, so this contradicts the theory; suspect numerical error".into()
        } else {
            "K is not certified as an intersection body; a genuine counterexample pair is possible".into()
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRecord {
    pub body_id: String,
    pub n: usize,
    /// `vol_n(K)^{(n-1)/n} / max_u vol_{n-1}(K ∩ u^perp)`.
    pub ratio: f64,
    pub max_direction: Vec<f64>,
    pub max_section: f64,
    pub volume: f64,
}

/// Sphere level for central sections in the minmax search.
pub fn default_minmax_section_level(body: &StarBody) -> usize {
    match body.smoothness() {
        Smoothness::C2 => 40,
        _ => 256,
    }
}

/// The minmax ratio, maximizing the central section over a direction grid
/// followed by Nelder–Mead from the three best grid points.
pub fn minmax_ratio(
    body: &StarBody,
    grid_size: usize,
    section_level: Option<usize>,
    volume_level: Option<usize>,
) -> Result<RatioRecord> {
    let n = body.dim();
    let level = section_level.unwrap_or_else(|| default_minmax_section_level(body));
    let grid = direction_grid(n, grid_size)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|u| central_section_volume(body, u, level))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut best_u = grid[order[0]].clone();
    let mut best = values[order[0]];
    for &start in order.iter().take(3) {
        let res = nelder_mead_sphere(&grid[start], 0.05, 1e-8, 200 * n, |u| {
            Ok(-central_section_volume(body, u, level)?)
        })?;
        if -res.value > best {
            best = -res.value;
            best_u = res.point;
        }
    }
    let vol = body_volume(body, volume_level)?;
    Ok(RatioRecord {
        body_id: body.id(),
        n,
        ratio: vol.powf((n as f64 - 1.0) / n as f64) / best,
        max_direction: best_u,
        max_section: best,
        volume: vol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SlicingFamily {
    Cube,
    Ball,
    /// `B^{n-1}(1) x [-half_height, half_height]`.
    Cylinder { half_height: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SlicingRow {
    #[serde(flatten)]
    pub record: RatioRecord,
    pub ball_ratio: f64,
}

/// `vol(B^n)^{(n-1)/n} / vol(B^{n-1})`.
pub fn ball_ratio(n: usize) -> f64 {
    ball_volume(n).powf((n as f64 - 1.0) / n as f64) / ball_volume(n - 1)
}

/// `vol_{n-2}`-weighted chord profile: `vol_{n-1}(B^{n-1}(1) ∩ {|y_1| <= s})`.
fn ball_slab_volume(m: usize, s: f64) -> f64 {
    // y_1 = sin(theta), cross-section B^{m-1}(cos(theta))
    let top = s.min(1.0).asin();
    if top <= 0.0 {
        return 0.0;
    }
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussRule::legendre_on(48, -1.0, 1.0));
    ball_volume(m - 1) * top * rule.integrate(|x| (top * x).cos().powi(m as i32))
}

/// Central section of `B^{n-1}(1) x [-h, h]` orthogonal to
/// `(sin(alpha), 0, ..., 0, cos(alpha))`.
pub fn cylinder_section(n: usize, h: f64, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    if c <= 1e-15 {
        return 2.0 * h * ball_volume(n - 2);
    }
    if s <= 0.0 {
        return ball_volume(n - 1);
    }
    ball_slab_volume(n - 1, h * c / s) / c
}

/// Maximizes [`cylinder_section`] over the tilt angle: a fine grid, then golden
/// section around the best grid point.
fn cylinder_max_section(n: usize, h: f64) -> (f64, f64) {
    const STEPS: usize = 4000;
    let f = |a: f64| cylinder_section(n, h, a);
    let at = |j: usize| FRAC_PI_2 * j as f64 / STEPS as f64;
    let j = (0..=STEPS).max_by(|&a, &b| f(at(a)).total_cmp(&f(at(b)))).expect("non-empty");
    let (mut lo, mut hi) = (at(j.saturating_sub(1)), at((j + 1).min(STEPS)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) >= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    [(at(j), f(at(j))), (mid, f(mid))]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty")
}

/// Minmax ratios across dimensions from closed forms: `vol(B^n)` for the ball,
/// `2^{n-1}` against the diagonal section `sqrt(2) 2^{n-1}` for the cube (the
/// maximal one), and a one-parameter tilt search for the cylinder.
pub fn slicing_table(family: SlicingFamily, dims: impl IntoIterator<Item = usize>) -> Result<Vec<SlicingRow>> {
    dims.into_iter()
        .map(|n| {
            if n < 3 {
                return Err(contract(format!("slicing table needs n >= 3, got {n}")));
            }
            let p = (n as f64 - 1.0) / n as f64;
            let record = match family {
                SlicingFamily::Ball => RatioRecord {
                    body_id: format!("ball(n={n},r=1)"),
                    n,
                    ratio: ball_ratio(n),
                    max_direction: unit(n, n - 1),
                    max_section: ball_volume(n - 1),
                    volume: ball_volume(n),
                },
                SlicingFamily::Cube => {
                    let mut dir = vec![0.0; n];
                    dir[0] = std::f64::consts::FRAC_1_SQRT_2;
                    dir[1] = std::f64::consts::FRAC_1_SQRT_2;
                    let vol = 2f64.powi(n as i32);
                    let section = 2f64.sqrt() * 2f64.powi(n as i32 - 1);
                    RatioRecord {
                        body_id: format!("cube(n={n},a=1)"),
                        n,
                        ratio: vol.powf(p) / section,
                        max_direction: dir,
                        max_section: section,
                        volume: vol,
                    }
                }
                SlicingFamily::Cylinder { half_height } => {
                    if !(half_height.is_finite() && half_height > 0.0) {
                        return Err(contract("cylinder half height must be positive"));
                    }
                    let (alpha, section) = cylinder_max_section(n, half_height);
                    let vol = 2.0 * half_height * ball_volume(n - 1);
                    let mut dir = vec![0.0; n];
                    dir[0] = alpha.sin();
                    dir[n - 1] = alpha.cos();
                    RatioRecord {
                        body_id: format!("cylinder(n={n},r=1,h={half_height})"),
                        n,
                        ratio: vol.powf(p) / section,
                        max_direction: dir,
                        max_section: section,
                        volume: vol,
                    }
                }
            };
            Ok(SlicingRow {
                record,
                ball_ratio: ball_ratio(n),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub body_id: String,
    pub direction: Vec<f64>,
    pub points: usize,
    /// Largest `(g(z-) + g(z+))/2 - g(z)` relative to `max g`, `g = A^{1/(n-1)}`.
    pub worst_violation: f64,
    pub worst_z: f64,
    pub concave: bool,
}

/// Midpoint concavity of `A_u(z)^{1/(n-1)}` on `points` interior nodes of
/// `(-h_K(u), h_K(u))`.
pub fn bm_concavity_check(body: &StarBody, u: &[f64], points: usize, level: usize) -> Result<ConcavityReport> {
    let n = body.dim();
    check_unit(u, n)?;
    if points < 3 {
        return Err(contract("concavity needs at least 3 points"));
    }
    let (h, _) = support(body, u)?;
    let zs: Vec<f64> = (1..=points)
        .map(|j| -h + 2.0 * h * j as f64 / (points + 1) as f64)
        .collect();
    let g: Vec<f64> = zs
        .par_iter()
        .map(|&z| Ok(parallel_section(body, u, z, level)?.max(0.0).powf(1.0 / (n as f64 - 1.0))))
        .collect::<Result<Vec<_>>>()?;
    let scale = g.iter().cloned().fold(0.0, f64::max);
    let (mut worst, mut worst_z) = (f64::NEG_INFINITY, zs[0]);
    for j in 1..points - 1 {
        let v = (0.5 * (g[j - 1] + g[j + 1]) - g[j]) / scale;
        if v > worst {
            worst = v;
            worst_z = zs[j];
        }
    }
    Ok(ConcavityReport {
        body_id: body.id(),
        direction: u.to_vec(),
        points,
        worst_violation: worst,
        worst_z,
        concave: worst <= BM_TOLERANCE,
    })
}

/// `vol_n(body)` at the harness default level.
pub fn harness_volume(body: &StarBody) -> Result<f64> {
    body_volume(body, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalized;
    use std::f64::consts::PI;

    #[test]
    fn islice_of_cube_plane() {
        let cube = StarBody::cube(4, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = SubspaceFrame::new(4, vec![vec![s, s, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]).unwrap();
        let v = islice_volume(&cube, &h, 512).unwrap();
        assert!((v - 4.0 * 2f64.sqrt()).abs() < 1e-4, "{v}");
        let line = SubspaceFrame::new(4, vec![normalized(&[1.0, 1.0, 1.0, 1.0])]).unwrap();
        assert!((islice_volume(&cube, &line, 1).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn islice_of_ball_is_ball_volume() {
        let ball = StarBody::ball(6, 1.5).unwrap();
        for i in 2..6 {
            let h = random_subspace(6, i, 7 + i as u64).unwrap();
            let v = islice_volume(&ball, &h, 12).unwrap();
            let want = ball_volume(i) * 1.5f64.powi(i as i32);
            assert!((v - want).abs() < 1e-12 * want, "i={i}");
        }
    }

    #[test]
    fn hyperplane_slices_match_central_sections() {
        let e = StarBody::ellipsoid(vec![1.0, 0.8, 1.3, 0.6]).unwrap();
        let u = normalized(&[0.3, -0.2, 0.9, 0.1]);
        let h = SubspaceFrame::from_direction(&complete_frame(&u).unwrap());
        let a = islice_volume(&e, &h, 40).unwrap();
        let b = central_section_volume(&e, &u, 40).unwrap();
        assert!((a - b).abs() < 1e-14 * b);
    }

    #[test]
    fn dominance_of_scaled_body() {
        let k = StarBody::ellipsoid(vec![1.0, 0.9, 1.1, 0.8]).unwrap();
        let l = k.scaled(1.01).unwrap();
        let opts = BpOptions { samples: 60, ..Default::default() };
        let d = section_dominance(&k, &l, 3, &opts).unwrap();
        assert_eq!(d.dominance_fraction, 1.0);
        assert!((d.worst.relative_margin - (1.0 - 1.01f64.powi(-3))).abs() < 1e-10);
        let same = section_dominance(&k, &k, 2, &opts).unwrap();
        assert_eq!(same.strict, 0);
        assert_eq!(same.failures, 0);
    }

    #[test]
    fn bp_report_verdicts() {
        let k = StarBody::ball(4, 1.0).unwrap();
        let l = StarBody::ball(4, 1.05).unwrap();
        let opts = BpOptions { samples: 40, ..Default::default() };
        let r = bp_check(&k, &l, &opts).unwrap();
        assert_eq!(r.verdict, BpVerdict::Consistent);
        assert_eq!(r.k_certificate.as_ref().unwrap().verdict, Verdict::Yes);
        assert!(r.note.is_none());

        let r = bp_check(&l, &k, &opts).unwrap();
        assert_eq!(r.verdict, BpVerdict::HypothesisNotMet);
        assert!(r.k_certificate.is_none());

        let r = bp_check(&k, &k, &opts).unwrap();
        assert_eq!(r.verdict, BpVerdict::Inconclusive);
    }

    #[test]
    fn generalized_check_reduces_to_hyperplane_check() {
        let k = StarBody::ellipsoid(vec![1.0, 0.9, 1.1, 0.8]).unwrap();
        let l = StarBody::ellipsoid(vec![1.05, 0.95, 1.1, 0.85]).unwrap();
        let opts = BpOptions { samples: 40, certify: false, ..Default::default() };
        let a = serde_json::to_string(&bp_check(&k, &l, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&gbp_check(&k, &l, 3, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ball_ratio_values() {
        // vol(B^n) = pi^{n/2} / Gamma(n/2 + 1), evaluated directly
        let vol = |n: usize| -> f64 {
            if n.is_multiple_of(2) {
                PI.powi(n as i32 / 2) / (1..=n / 2).map(|k| k as f64).product::<f64>()
            } else {
                let m = (n - 1) / 2;
                2f64.powi(n as i32) * PI.powi(m as i32) * (1..=m).map(|k| k as f64).product::<f64>()
                    / (1..=n).map(|k| k as f64).product::<f64>()
            }
        };
        for n in 3..13 {
            let want = vol(n).powf((n as f64 - 1.0) / n as f64) / vol(n - 1);
            assert!((ball_ratio(n) - want).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn cylinder_section_matches_quadrature() {
        let cyl = StarBody::cylinder(4, 1.0, 0.7).unwrap();
        for alpha in [0.0, 0.3, 0.9, 1.4, FRAC_PI_2] {
            let u = vec![alpha.sin(), 0.0, 0.0, alpha.cos()];
            let numeric = central_section_volume(&cyl, &u, 512).unwrap();
            let closed = cylinder_section(4, 0.7, alpha);
            assert!((numeric - closed).abs() < 2e-4 * closed, "alpha={alpha}: {numeric} vs {closed}");
        }
    }

    #[test]
    fn table_ball_and_cube() {
        let balls = slicing_table(SlicingFamily::Ball, 4..=12).unwrap();
        let cubes = slicing_table(SlicingFamily::Cube, 4..=12).unwrap();
        let cross = cubes
            .iter()
            .zip(&balls)
            .find(|(c, b)| c.record.ratio > b.record.ratio)
            .map(|(c, _)| c.record.n);
        assert_eq!(cross, Some(10));
        assert!((balls[5].record.ratio - 0.71180).abs() < 1e-4);
        assert!((balls[6].record.ratio - 0.70409).abs() < 1e-4);
        let cyl = slicing_table(SlicingFamily::Cylinder { half_height: 1.0 }, [4]).unwrap();
        assert!(cyl[0].record.ratio <= cyl[0].ball_ratio + 1e-6);
    }

    #[test]
    fn some_cylinder_beats_the_ball_from_n_7() {
        let best = |n: usize| {
            (1..100)
                .map(|j| slicing_table(SlicingFamily::Cylinder { half_height: 0.02 * j as f64 }, [n]).unwrap()[0].record.ratio)
                .fold(0.0, f64::max)
        };
        assert!(best(6) < ball_ratio(6));
        assert!(best(7) > ball_ratio(7));
    }

    #[test]
    fn minmax_of_ball() {
        let ball = StarBody::ball(4, 1.0).unwrap();
        let r = minmax_ratio(&ball, 32, None, None).unwrap();
        assert!((r.ratio - ball_ratio(4)).abs() < 1e-9, "{}", r.ratio);
    }

    #[test]
    fn concavity_of_convex_and_of_a_dumbbell() {
        let e = StarBody::ellipsoid(vec![1.0, 0.7, 1.2, 0.9]).unwrap();
        let u = normalized(&[0.4, 0.1, -0.3, 0.8]);
        let r = bm_concavity_check(&e, &u, 21, 40).unwrap();
        assert!(r.concave, "{}", r.worst_violation);

        // pinched at the equator: slices grow away from z = 0
        let pinched = StarBody::custom(4, "pinched", Smoothness::C2, Some(unit(4, 3)), |u: &[f64]| 0.3 + u[3] * u[3]).unwrap();
        let r = bm_concavity_check(&pinched, &unit(4, 3), 21, 40).unwrap();
        assert!(!r.concave, "{}", r.worst_violation);
    }
}
