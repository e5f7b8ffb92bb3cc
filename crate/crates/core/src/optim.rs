//! Derivative-free local minimization over the unit sphere.

use crate::bodies::complete_frame;
use crate::error::Result;
use crate::linalg::normalized;

#[derive(Debug, Clone)]
pub struct SphereMinimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead in the tangent chart `x -> normalize(u0 + sum_j x_j b_j)`
/// around `start`, where `b_j` span the tangent space at `start`.
pub fn nelder_mead_sphere(
    start: &[f64],
    initial_step: f64,
    tolerance: f64,
    max_evaluations: usize,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<SphereMinimum> {
    let frame = complete_frame(start)?;
    let m = frame.basis.len();
    let chart = |x: &[f64]| -> Vec<f64> {
        let mut p = start.to_vec();
        for (xj, b) in x.iter().zip(&frame.basis) {
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += xj * bi;
            }
        }
        normalized(&p)
    };
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        f(&chart(x))
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    let origin = vec![0.0; m];
    let v0 = eval(&origin, &mut evaluations)?;
    simplex.push((origin, v0));
    for j in 0..m {
        let mut x = vec![0.0; m];
        x[j] = initial_step;
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    while evaluations < max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < tolerance {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|j| simplex[..m].iter().map(|(x, _)| x[j]).sum::<f64>() / m as f64)
            .collect();
        let worst = simplex[m].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations)?;
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evaluations)?;
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evaluations)?;
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[m] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    let v = eval(&x, &mut evaluations)?;
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(SphereMinimum {
        point: chart(&simplex[0].0),
        value: simplex[0].1,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn finds_quadratic_minimum_on_s3() {
        let target = normalized(&[0.3, -0.5, 0.2, 0.7]);
        let start = normalized(&[0.5, -0.2, 0.4, 0.6]);
        let res = nelder_mead_sphere(&start, 0.1, 1e-10, 5000, |u| Ok(-dot(u, &target).powi(2))).unwrap();
        assert!((dot(&res.point, &target).abs() - 1.0).abs() < 1e-12);
        assert!((res.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn respects_evaluation_budget() {
        let start = normalized(&[1.0, 1.0, 1.0]);
        let res = nelder_mead_sphere(&start, 0.2, 0.0, 50, |u| Ok(u[0])).unwrap();
        assert!(res.evaluations <= 50 + 3);
    }

    #[test]
    fn propagates_errors() {
        let start = normalized(&[1.0, 0.0, 0.0]);
        let res = nelder_mead_sphere(&start, 0.2, 1e-6, 50, |_| Err(crate::error::contract("boom")));
        assert!(res.is_err());
    }
}
