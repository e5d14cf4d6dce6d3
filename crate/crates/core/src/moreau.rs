//! Discrete Moreau envelopes with the quadratic structuring function
//! `λ|x - y|²`: lower (inf-convolution, erosion) and upper (sup-convolution,
//! dilation).
//!
//! The n-dimensional envelope is computed as one 1-D sweep per axis. Each
//! sweep is the linear-time lower envelope of parabolas; the minimum over
//! `λ Σ_k (x_k - y_k)²` separates across axes, so the result equals the
//! direct n-D minimum over all nodes.

use rayon::prelude::*;

use crate::error::{CcxError, Result};
use crate::grid::{GridDomain, GridFunction, SampleMask};

/// Per-axis node radius limiting the search range of a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub radius: Vec<usize>,
}

impl Window {
    pub fn new(radius: Vec<usize>) -> Self {
        Self { radius }
    }

    /// Smallest window whose physical radius covers `locality_radius(m, lambda)`
    /// on every axis.
    pub fn from_locality(domain: &GridDomain, m: f64, lambda: f64) -> Self {
        let r = locality_radius(m, lambda);
        Self {
            radius: domain
                .spacing()
                .iter()
                .map(|h| (r / h).ceil() as usize)
                .collect(),
        }
    }
}

/// `2√2·√(M/λ)`: transforms of a function bounded by M at x only see values
/// in the closed ball of this radius around x.
pub fn locality_radius(m: f64, lambda: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (m / lambda).sqrt()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(CcxError::InvalidParameter("lambda must be > 0".into()))
    }
}

/// Reusable buffers for the parabola sweep.
#[derive(Default)]
struct Envelope {
    // Centres of the parabolas forming the lower envelope.
    centers: Vec<usize>,
    // Parabola `centers[j]` is lowest on [bounds[j], bounds[j + 1]).
    bounds: Vec<f64>,
}

/// Lower envelope of the parabolas `values[j] + w (i - j)²`, sampled at
/// every integer `i`. `+∞` entries are allowed and never win; if every entry
/// is `+∞` the output is `+∞` everywhere.
fn lower_envelope_1d(values: &[f64], w: f64, out: &mut [f64], env: &mut Envelope) {
    let n = values.len();
    env.centers.clear();
    env.bounds.clear();

    let Some(first) = values.iter().position(|v| v.is_finite()) else {
        out.fill(f64::INFINITY);
        return;
    };
    env.centers.push(first);
    env.bounds.push(f64::NEG_INFINITY);
    env.bounds.push(f64::INFINITY);

    for q in first + 1..n {
        let fq = values[q];
        if !fq.is_finite() {
            continue;
        }
        loop {
            let k = env.centers.len() - 1;
            let p = env.centers[k];
            // Abscissa where the parabolas centred at p and q cross.
            let s = (fq - values[p]) / (2.0 * w * (q - p) as f64) + 0.5 * (q + p) as f64;
            // bounds[0] is -inf, so the first parabola is never popped.
            if k > 0 && s <= env.bounds[k] {
                env.centers.pop();
                env.bounds.pop();
                continue;
            }
            let last = env.bounds.len() - 1;
            env.bounds[last] = s;
            env.centers.push(q);
            env.bounds.push(f64::INFINITY);
            break;
        }
    }

    let eval = |c: usize, i: usize| {
        let d = i.abs_diff(c) as f64;
        values[c] + w * d * d
    };
    let m = env.centers.len();
    let mut k = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let x = i as f64;
        // Ties at a boundary stay with the smaller centre.
        while env.bounds[k + 1] < x {
            k += 1;
        }
        // Neighbouring parabolas guard against rounding in the crossing
        // abscissae; the self term keeps the envelope below the data exactly.
        let mut best = eval(env.centers[k], i);
        if k > 0 {
            best = best.min(eval(env.centers[k - 1], i));
        }
        if k + 1 < m {
            best = best.min(eval(env.centers[k + 1], i));
        }
        *slot = best.min(values[i]);
    }
}

/// Direct windowed minimum: `min_{|i-j| <= r} values[j] + w (i - j)²`.
fn windowed_min_1d(values: &[f64], w: f64, r: usize, out: &mut [f64]) {
    let n = values.len();
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        let mut best = f64::INFINITY;
        for (j, &v) in values.iter().enumerate().take(hi + 1).skip(lo) {
            let d = i.abs_diff(j) as f64;
            best = best.min(v + w * d * d);
        }
        *slot = best;
    }
}

/// 1-D lower Moreau envelope on nodes `j·h`:
/// `out[i] = min_j values[j] + λ (h (i - j))²`.
pub fn lower_moreau_1d(values: &[f64], lambda: f64, h: f64) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(CcxError::EmptyInput);
    }
    check_lambda(lambda)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(CcxError::InvalidParameter("spacing must be > 0".into()));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(CcxError::NonFinite { index });
    }
    let mut out = vec![0.0; values.len()];
    lower_envelope_1d(values, lambda * h * h, &mut out, &mut Envelope::default());
    Ok(out)
}

/// 1-D upper Moreau envelope, `-lower_moreau_1d(-values)`.
pub fn upper_moreau_1d(values: &[f64], lambda: f64, h: f64) -> Result<Vec<f64>> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    Ok(lower_moreau_1d(&neg, lambda, h)?
        .into_iter()
        .map(|v| -v)
        .collect())
}

// Below this node count the per-line work is too small to be worth
// spreading over threads.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// In-place separable lower envelope over every axis of `domain`.
/// `weights[k]` is `λ h_k²`; `window` optionally restricts each axis search.
fn separable_lower(values: &mut [f64], domain: &GridDomain, weights: &[f64], window: Option<&[usize]>) {
    let shape = domain.shape();
    let strides = domain.strides();
    for axis in 0..domain.dim() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        let outer: usize = shape[..axis].iter().product();
        let starts: Vec<usize> = (0..outer)
            .flat_map(|o| (0..stride).map(move |i| o * n * stride + i))
            .collect();
        let w = weights[axis];
        let radius = window.map(|r| r[axis]).filter(|&r| r < n - 1);

        let src: &[f64] = values;
        let run_line = |start: usize, env: &mut Envelope, line: &mut Vec<f64>, out: &mut Vec<f64>| {
            line.clear();
            line.extend((0..n).map(|j| src[start + j * stride]));
            out.resize(n, 0.0);
            match radius {
                Some(r) => windowed_min_1d(line, w, r, out),
                None => lower_envelope_1d(line, w, out, env),
            }
        };

        let results: Vec<Vec<f64>> = if values.len() >= PARALLEL_THRESHOLD {
            starts
                .par_iter()
                .map_init(
                    || (Envelope::default(), Vec::with_capacity(n)),
                    |(env, line), &start| {
                        let mut out = Vec::with_capacity(n);
                        run_line(start, env, line, &mut out);
                        out
                    },
                )
                .collect()
        } else {
            let mut env = Envelope::default();
            let mut line = Vec::with_capacity(n);
            starts
                .iter()
                .map(|&start| {
                    let mut out = Vec::with_capacity(n);
                    run_line(start, &mut env, &mut line, &mut out);
                    out
                })
                .collect()
        };
        for (start, out) in starts.iter().zip(results) {
            for (j, v) in out.into_iter().enumerate() {
                values[start + j * stride] = v;
            }
        }
    }
}

fn weights(domain: &GridDomain, lambda: f64) -> Vec<f64> {
    domain.spacing().iter().map(|h| lambda * h * h).collect()
}

fn window_radius<'a>(domain: &GridDomain, window: Option<&'a Window>) -> Result<Option<&'a [usize]>> {
    match window {
        Some(w) if w.radius.len() != domain.dim() => Err(CcxError::InvalidParameter(format!(
            "window has {} axes, grid has {}",
            w.radius.len(),
            domain.dim()
        ))),
        Some(w) => Ok(Some(&w.radius)),
        None => Ok(None),
    }
}

/// Discrete `M_λ(f)(x) = min_y f(y) + λ|x - y|²` over grid nodes.
pub fn lower_moreau(f: &GridFunction, lambda: f64, window: Option<&Window>) -> Result<GridFunction> {
    check_lambda(lambda)?;
    let radius = window_radius(f.domain(), window)?;
    let mut values = f.values().to_vec();
    separable_lower(&mut values, f.domain(), &weights(f.domain(), lambda), radius);
    Ok(GridFunction::from_parts(f.domain().clone(), values))
}

/// Discrete `M^λ(f)(x) = max_y f(y) - λ|x - y|²`, computed as `-M_λ(-f)`.
pub fn upper_moreau(f: &GridFunction, lambda: f64, window: Option<&Window>) -> Result<GridFunction> {
    check_lambda(lambda)?;
    let radius = window_radius(f.domain(), window)?;
    let mut values: Vec<f64> = f.values().iter().map(|v| -v).collect();
    separable_lower(&mut values, f.domain(), &weights(f.domain(), lambda), radius);
    values.iter_mut().for_each(|v| *v = -*v);
    Ok(GridFunction::from_parts(f.domain().clone(), values))
}

/// Squared Euclidean distance (physical units) from every node to the
/// nearest member node of `mask`.
pub fn squared_distance_field(mask: &SampleMask) -> Vec<f64> {
    let domain = mask.domain();
    let mut values: Vec<f64> = mask
        .member()
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();
    separable_lower(&mut values, domain, &weights(domain, 1.0), None);
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_1d(values: &[f64], w: f64) -> Vec<f64> {
        (0..values.len())
            .map(|i| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v + w * (i as f64 - j as f64).powi(2))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn constant_is_fixed() {
        let out = lower_moreau_1d(&[5.0; 4], 0.3, 2.0).unwrap();
        assert_eq!(out, vec![5.0; 4]);
    }

    #[test]
    fn spike_dominates() {
        let out = lower_moreau_1d(&[0.0, 100.0, 100.0, 100.0], 1.0, 1.0).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn empty_and_bad_parameters() {
        assert!(matches!(lower_moreau_1d(&[], 1.0, 1.0), Err(CcxError::EmptyInput)));
        assert!(lower_moreau_1d(&[1.0], 0.0, 1.0).is_err());
        assert!(lower_moreau_1d(&[1.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn infinities_are_skipped() {
        let mut out = vec![0.0; 5];
        let inf = f64::INFINITY;
        lower_envelope_1d(&[inf, inf, 0.0, inf, inf], 1.0, &mut out, &mut Envelope::default());
        assert_eq!(out, vec![4.0, 1.0, 0.0, 1.0, 4.0]);
        lower_envelope_1d(&[inf; 5], 1.0, &mut out, &mut Envelope::default());
        assert!(out.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn two_dimensional_spike() {
        let d = GridDomain::new(vec![5, 5], vec![1.0, 1.0], vec![-2.0, -2.0]).unwrap();
        let f = GridFunction::from_fn(d.clone(), |x| if x == [0.0, 0.0] { 0.0 } else { 100.0 })
            .unwrap();
        let g = lower_moreau(&f, 1.0, None).unwrap();
        let idx = d.nearest_node(&[1.0, 2.0]).unwrap();
        assert_eq!(g.values()[idx], 5.0);
    }

    #[test]
    fn locality_radius_formula() {
        assert!((locality_radius(2.0, 8.0) - 2f64.sqrt()).abs() < 1e-12);
        assert!((locality_radius(1.0, 1.0) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn window_mismatch_rejected() {
        let d = GridDomain::new(vec![3], vec![1.0], vec![0.0]).unwrap();
        let f = GridFunction::constant(d, 1.0).unwrap();
        assert!(lower_moreau(&f, 1.0, Some(&Window::new(vec![1, 1]))).is_err());
    }

    #[test]
    fn distance_field_matches_brute_force() {
        let d = GridDomain::new(vec![7, 9], vec![0.5, 0.25], vec![0.0, 0.0]).unwrap();
        let mask = SampleMask::from_indices(d.clone(), &[3, 40, 61]).unwrap();
        let field = squared_distance_field(&mask);
        for (i, &v) in field.iter().enumerate() {
            let brute = mask
                .indices()
                .iter()
                .map(|&k| d.dist2(i, k))
                .fold(f64::INFINITY, f64::min);
            assert!((v - brute).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn sweep_matches_brute_force(
            values in prop::collection::vec(-50.0f64..50.0, 1..80),
            lambda in 0.01f64..20.0,
            h in 0.05f64..2.0,
        ) {
            let fast = lower_moreau_1d(&values, lambda, h).unwrap();
            let slow = brute_1d(&values, lambda * h * h);
            let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn lower_below_data_and_constant_covariant(
            values in prop::collection::vec(-10.0f64..10.0, 1..40),
            lambda in 0.1f64..5.0,
            c in -5.0f64..5.0,
        ) {
            let lo = lower_moreau_1d(&values, lambda, 1.0).unwrap();
            let up = upper_moreau_1d(&values, lambda, 1.0).unwrap();
            for i in 0..values.len() {
                prop_assert!(lo[i] <= values[i]);
                prop_assert!(values[i] <= up[i]);
            }
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            let lo2 = lower_moreau_1d(&shifted, lambda, 1.0).unwrap();
            for i in 0..values.len() {
                prop_assert!((lo2[i] - (lo[i] + c)).abs() <= 1e-12 * (1.0 + values[i].abs() + c.abs()));
            }
        }

        #[test]
        fn monotone_in_lambda(
            values in prop::collection::vec(-10.0f64..10.0, 1..40),
            l1 in 0.1f64..5.0,
            extra in 0.0f64..5.0,
        ) {
            let a = lower_moreau_1d(&values, l1, 1.0).unwrap();
            let b = lower_moreau_1d(&values, l1 + extra, 1.0).unwrap();
            for i in 0..values.len() {
                prop_assert!(a[i] <= b[i] + 1e-12);
            }
        }
    }
}
