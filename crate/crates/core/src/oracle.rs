//! Independent ground truth: convex envelopes of finite data through
//! Carathéodory-form linear programs, quadratic-time Moreau envelopes,
//! and closed forms.
//!
//! Extending a sample by `+∞` off the sample set makes every off-sample
//! point irrelevant to the convex envelope, so the `M = ∞` transforms of a
//! finite sample are exact envelope values over the sample points alone.

use rayon::prelude::*;

use crate::error::{CcxError, Result};
use crate::grid::{GridFunction, ScatteredSamples};
use crate::simplex;

/// At most n+1 points with convex weights realising an envelope value.
#[derive(Clone, Debug)]
pub struct CaratheodoryCertificate {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub value: f64,
}

/// `co[g](x0)` for the function equal to `values[i]` at `points[i]` and
/// `+∞` elsewhere.
pub fn convex_envelope_value(
    points: &[Vec<f64>],
    values: &[f64],
    x0: &[f64],
) -> Result<CaratheodoryCertificate> {
    if points.is_empty() || points.len() != values.len() {
        return Err(CcxError::EmptyInput);
    }
    let n = x0.len();
    if points.iter().any(|p| p.len() != n) {
        return Err(CcxError::InvalidParameter("point dimension mismatch".into()));
    }
    // Normalise: centre at x0, unit spread, unit value scale.
    let spread = points
        .iter()
        .map(|p| dist(p, x0))
        .fold(0.0f64, f64::max);
    let vscale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let (a, b) = if spread == 0.0 {
        (vec![vec![1.0; points.len()]], vec![1.0])
    } else {
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|k| points.iter().map(|p| (p[k] - x0[k]) / spread).collect())
            .collect();
        a.push(vec![1.0; points.len()]);
        let mut b = vec![0.0; n];
        b.push(1.0);
        (a, b)
    };
    let c: Vec<f64> = values.iter().map(|v| v / vscale).collect();
    let sol = simplex::solve(&a, &b, &c).map_err(|e| match e {
        CcxError::Infeasible => CcxError::OutsideHull,
        other => other,
    })?;

    let mut cert = CaratheodoryCertificate {
        points: Vec::new(),
        weights: Vec::new(),
        value: 0.0,
    };
    for (i, &w) in sol.x.iter().enumerate() {
        if w > 0.0 {
            cert.points.push(points[i].clone());
            cert.weights.push(w);
            cert.value += w * values[i];
        }
    }
    Ok(cert)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact `C^l_λ(f_K^{+∞})(x0)`: envelope of `f_i + λ|x_i - x0|²` at x0.
pub fn lower_transform_exact(samples: &ScatteredSamples, x0: &[f64], lambda: f64) -> Result<f64> {
    let values: Vec<f64> = samples
        .iter()
        .map(|(p, v)| v + lambda * dist2(p, x0))
        .collect();
    Ok(convex_envelope_value(samples.points(), &values, x0)?.value)
}

/// Exact `C^u_λ(f_K^{-∞})(x0) = -C^l_λ((-f)_K^{+∞})(x0)`.
pub fn upper_transform_exact(samples: &ScatteredSamples, x0: &[f64], lambda: f64) -> Result<f64> {
    let neg = samples.map_values(|_, v| -v);
    Ok(-lower_transform_exact(&neg, x0, lambda)?)
}

/// Exact `A^∞_λ(f_K)(x0)`.
pub fn average_approx_exact(samples: &ScatteredSamples, x0: &[f64], lambda: f64) -> Result<f64> {
    let lo = lower_transform_exact(samples, x0, lambda)?;
    let up = upper_transform_exact(samples, x0, lambda)?;
    Ok(0.5 * (lo + up))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeKind {
    Lower,
    Upper,
}

/// Largest grid the quadratic-time envelope will accept.
pub const BRUTE_FORCE_MAX_NODES: usize = 65_536;

/// Direct min (or max) over all node pairs.
pub fn moreau_bruteforce(f: &GridFunction, lambda: f64, kind: EnvelopeKind) -> Result<GridFunction> {
    let d = f.domain();
    if d.len() > BRUTE_FORCE_MAX_NODES {
        return Err(CcxError::TooLarge(format!(
            "{} nodes exceeds {BRUTE_FORCE_MAX_NODES}",
            d.len()
        )));
    }
    let vals = f.values();
    let h = d.spacing();
    let dim = d.dim();
    let multi: Vec<[usize; 3]> = (0..d.len()).map(|i| d.multi_index(i)).collect();
    let out = (0..d.len())
        .into_par_iter()
        .map(|i| {
            let x = multi[i];
            let mut best = match kind {
                EnvelopeKind::Lower => f64::INFINITY,
                EnvelopeKind::Upper => f64::NEG_INFINITY,
            };
            for (y, &v) in multi.iter().zip(vals) {
                let q = lambda
                    * (0..dim)
                        .map(|k| ((x[k] as f64 - y[k] as f64) * h[k]).powi(2))
                        .sum::<f64>();
                best = match kind {
                    EnvelopeKind::Lower => best.min(v + q),
                    EnvelopeKind::Upper => best.max(v - q),
                };
            }
            best
        })
        .collect();
    GridFunction::new(d.clone(), out)
}

/// Upper transform of `α χ_{x0}`: `λ(|x - x0| - √(α/λ))²` inside the
/// radius `√(α/λ)`, zero beyond.
pub fn closed_form_upper_single(alpha: f64, lambda: f64, x0: &[f64], x: &[f64]) -> f64 {
    let r = dist(x, x0);
    let radius = (alpha / lambda).sqrt();
    if r <= radius {
        lambda * (r - radius).powi(2)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn data_point_below_chord() {
        let c = convex_envelope_value(&pts(&[-1.0, 0.0, 1.0]), &[1.0, -1.0, 1.0], &[0.0]).unwrap();
        assert!((c.value + 1.0).abs() < 1e-12);
        assert_eq!(c.points, vec![vec![0.0]]);
        assert!((c.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chord_beats_data_point() {
        let c = convex_envelope_value(&pts(&[-1.0, 0.0, 1.0]), &[0.0, 0.6, 1.0], &[0.0]).unwrap();
        assert!((c.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outside_hull_is_error() {
        assert!(matches!(
            convex_envelope_value(&pts(&[0.0, 1.0]), &[0.0, 0.0], &[2.0]),
            Err(CcxError::OutsideHull)
        ));
    }

    /// Exhaustive search over all singletons, pairs and triples containing x0.
    fn exhaustive_2d(points: &[Vec<f64>], values: &[f64], x0: &[f64]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            if dist(&points[i], x0) < 1e-12 {
                best = best.min(values[i]);
            }
            for j in i + 1..n {
                // x0 on segment ij
                let (a, b) = (&points[i], &points[j]);
                let ab = [b[0] - a[0], b[1] - a[1]];
                let ax = [x0[0] - a[0], x0[1] - a[1]];
                let cross = ab[0] * ax[1] - ab[1] * ax[0];
                let len2 = ab[0] * ab[0] + ab[1] * ab[1];
                if cross.abs() < 1e-12 && len2 > 0.0 {
                    let t = (ab[0] * ax[0] + ab[1] * ax[1]) / len2;
                    if (-1e-12..=1.0 + 1e-12).contains(&t) {
                        best = best.min((1.0 - t) * values[i] + t * values[j]);
                    }
                }
                for k in j + 1..n {
                    let c = &points[k];
                    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let l1 = ((b[0] - x0[0]) * (c[1] - x0[1]) - (c[0] - x0[0]) * (b[1] - x0[1])) / det;
                    let l2 = ((c[0] - x0[0]) * (a[1] - x0[1]) - (a[0] - x0[0]) * (c[1] - x0[1])) / det;
                    let l3 = 1.0 - l1 - l2;
                    if l1 >= -1e-12 && l2 >= -1e-12 && l3 >= -1e-12 {
                        best = best.min(l1 * values[i] + l2 * values[j] + l3 * values[k]);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn random_2d_matches_exhaustive_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(3..12);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            // A convex combination of the points is always inside the hull.
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sw: f64 = w.iter().sum();
            let x0 = vec![
                points.iter().zip(&w).map(|(p, wi)| p[0] * wi).sum::<f64>() / sw,
                points.iter().zip(&w).map(|(p, wi)| p[1] * wi).sum::<f64>() / sw,
            ];
            let cert = convex_envelope_value(&points, &values, &x0).unwrap();
            let brute = exhaustive_2d(&points, &values, &x0);
            assert!((cert.value - brute).abs() < 1e-9, "{} vs {}", cert.value, brute);
            assert!(cert.points.len() <= 3);
            let sum: f64 = cert.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for k in 0..2 {
                let comb: f64 = cert.points.iter().zip(&cert.weights).map(|(p, w)| p[k] * w).sum();
                assert!((comb - x0[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_point_transforms() {
        let s = ScatteredSamples::new(pts(&[0.0, 1.0]), vec![0.0, 1.0]).unwrap();
        let lo = lower_transform_exact(&s, &[0.5], 1.0).unwrap();
        assert!((lo - 0.75).abs() < 1e-12);
        let avg = average_approx_exact(&s, &[0.5], 1.0).unwrap();
        assert!((avg - 0.5).abs() < 1e-12);
    }

    #[test]
    fn convex_quadratic_reproduced_at_samples() {
        let xs = [-1.0, -0.3, 0.2, 0.9];
        let s = ScatteredSamples::new(pts(&xs), xs.iter().map(|x| x * x).collect()).unwrap();
        for &x in &xs {
            let v = lower_transform_exact(&s, &[x], 2.0).unwrap();
            assert!((v - x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_below_data_and_value_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let values: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = ScatteredSamples::new(points.clone(), values.clone()).unwrap();
        let x0 = vec![
            points.iter().map(|p| p[0]).sum::<f64>() / 10.0,
            points.iter().map(|p| p[1]).sum::<f64>() / 10.0,
        ];
        let lam = 3.0;
        let lo = lower_transform_exact(&s, &x0, lam).unwrap();
        for (p, v) in s.iter() {
            assert!(lower_transform_exact(&s, p, lam).unwrap() <= v + 1e-12);
        }
        let mut lowered = values.clone();
        lowered[4] -= 0.5;
        let s2 = ScatteredSamples::new(points, lowered).unwrap();
        assert!(lower_transform_exact(&s2, &x0, lam).unwrap() <= lo + 1e-12);
    }

    #[test]
    fn affine_invariance_of_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let values: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = ScatteredSamples::new(points.clone(), values).unwrap();
        let ell = |p: &[f64]| 0.7 * p[0] - 1.3 * p[1] + 0.25;
        let shifted = s.map_values(|p, v| v + ell(p));
        let x0 = vec![points[0][0] * 0.5 + points[1][0] * 0.5, points[0][1] * 0.5 + points[1][1] * 0.5];
        let a = average_approx_exact(&s, &x0, 4.0).unwrap();
        let b = average_approx_exact(&shifted, &x0, 4.0).unwrap();
        assert!((b - (a + ell(&x0))).abs() < 1e-9);
    }

    #[test]
    fn bruteforce_examples_and_guard() {
        let d = GridDomain::new(vec![4], vec![1.0], vec![0.0]).unwrap();
        let f = GridFunction::new(d.clone(), vec![0.0, 100.0, 100.0, 100.0]).unwrap();
        let g = moreau_bruteforce(&f, 1.0, EnvelopeKind::Lower).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 4.0, 9.0]);
        let c = GridFunction::constant(d, 2.0).unwrap();
        assert!(moreau_bruteforce(&c, 1.0, EnvelopeKind::Upper)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 2.0));
        let big = GridDomain::new(vec![300, 300], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let f = GridFunction::constant(big, 0.0).unwrap();
        assert!(matches!(
            moreau_bruteforce(&f, 1.0, EnvelopeKind::Lower),
            Err(CcxError::TooLarge(_))
        ));
    }

    #[test]
    fn closed_form_single_spike() {
        let x0 = [0.0];
        assert_eq!(closed_form_upper_single(1.0, 1.0, &x0, &[0.0]), 1.0);
        assert_eq!(closed_form_upper_single(1.0, 1.0, &x0, &[0.5]), 0.25);
        assert_eq!(closed_form_upper_single(1.0, 1.0, &x0, &[2.0]), 0.0);
    }
}
