//! Upper, lower, average and mixed compensated convex approximations of
//! functions sampled on a mask K.
//!
//! A grid is a window onto ℝⁿ. What lies outside the window is chosen
//! by [`Exterior`]; the default treats it as off-sample, which is the right
//! model for a compact K inside the window.

use std::collections::BTreeMap;

use crate::error::{CcxError, Result};
use crate::geometry::MaskGeometry;
use crate::grid::{
    bound_a0, extend_with_constant, GridDomain, GridFunction, SampleMask, ScatteredSamples, Sign,
    TransformParams,
};
use crate::moreau::locality_radius;
use crate::transforms::{lower_transform, mixed_transform, upper_transform, MixedKind};

/// What the transforms see beyond the grid window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exterior {
    /// Not in K: the grid is padded by the locality radius with `±M`.
    Unsampled,
    /// The window is the whole space; no padding.
    Clipped,
    /// In K with constant value `c0`: padded with `c0`.
    Sampled(f64),
}

fn pad_for(domain: &GridDomain, reach: f64) -> Vec<usize> {
    domain
        .spacing()
        .iter()
        .map(|h| (reach / h).ceil() as usize + 1)
        .collect()
}

/// `f_K^{±M}` on a grid enlarged to hold `reach` of exterior, with the pad.
fn extended(
    f: &GridFunction,
    k: &SampleMask,
    m: f64,
    sign: Sign,
    exterior: Exterior,
    reach: f64,
) -> Result<(GridFunction, Vec<usize>)> {
    let e = extend_with_constant(f, k, m, sign)?;
    let off = match sign {
        Sign::Plus => m,
        Sign::Minus => -m,
    };
    match exterior {
        Exterior::Clipped => {
            let pad = vec![0; f.domain().dim()];
            Ok((e, pad))
        }
        Exterior::Unsampled => {
            let pad = pad_for(f.domain(), reach);
            Ok((e.pad(&pad, off), pad))
        }
        Exterior::Sampled(c0) => {
            if !(c0.abs() < m) {
                return Err(CcxError::BelowThreshold {
                    m,
                    threshold: c0.abs(),
                });
            }
            let pad = pad_for(f.domain(), reach);
            Ok((e.pad(&pad, c0), pad))
        }
    }
}

fn finite_m(params: &TransformParams) -> Result<f64> {
    params.validate()?;
    params.m.finite()
}

/// `L = C^l_λ(f_K^M)`.
pub fn lower_approx(f: &GridFunction, k: &SampleMask, params: &TransformParams) -> Result<GridFunction> {
    lower_approx_with(f, k, params, Exterior::Unsampled)
}

pub fn lower_approx_with(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let m = finite_m(params)?;
    let reach = locality_radius(m, params.lambda);
    let (e, pad) = extended(f, k, m, Sign::Plus, exterior, reach)?;
    Ok(lower_transform(&e, params.lambda)?.crop(&pad, f.domain()))
}

/// `U = C^u_λ(f_K^{−M})`.
pub fn upper_approx(f: &GridFunction, k: &SampleMask, params: &TransformParams) -> Result<GridFunction> {
    upper_approx_with(f, k, params, Exterior::Unsampled)
}

pub fn upper_approx_with(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let m = finite_m(params)?;
    let reach = locality_radius(m, params.lambda);
    let (e, pad) = extended(f, k, m, Sign::Minus, exterior, reach)?;
    Ok(upper_transform(&e, params.lambda)?.crop(&pad, f.domain()))
}

/// `s L + (1 − s) U`, kept between L and U against rounding. Off K the
/// order of L and U is not fixed, so the bracket is `[min, max]`.
fn combine(lower: &GridFunction, upper: &GridFunction, s: f64) -> Result<GridFunction> {
    lower.zip_with(upper, |l, u| (s * l + (1.0 - s) * u).clamp(l.min(u), l.max(u)))
}

/// `A = (L + U)/2`.
pub fn average_approx(f: &GridFunction, k: &SampleMask, params: &TransformParams) -> Result<GridFunction> {
    average_approx_with(f, k, params, Exterior::Unsampled)
}

pub fn average_approx_with(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let p = params.with_s(0.5)?;
    weighted_average_approx_with(f, k, &p, exterior)
}

/// `A_s = s L + (1 − s) U` with `s = params.s`.
pub fn weighted_average_approx(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
) -> Result<GridFunction> {
    weighted_average_approx_with(f, k, params, Exterior::Unsampled)
}

pub fn weighted_average_approx_with(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let lower = lower_approx_with(f, k, params, exterior)?;
    let upper = upper_approx_with(f, k, params, exterior)?;
    combine(&lower, &upper, params.s)
}

/// `SA = (C^u_τ(C^l_λ(f_K^M)) + C^l_τ(C^u_λ(f_K^{−M})))/2`.
pub fn mixed_average_approx(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
) -> Result<GridFunction> {
    mixed_average_approx_with(f, k, params, Exterior::Unsampled)
}

pub fn mixed_average_approx_with(
    f: &GridFunction,
    k: &SampleMask,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let m = finite_m(params)?;
    let tau = params
        .tau
        .ok_or_else(|| CcxError::InvalidParameter("mixed approximation needs tau".into()))?;
    let reach = locality_radius(m, params.lambda) + locality_radius(m, tau);
    let (e_plus, pad) = extended(f, k, m, Sign::Plus, exterior, reach)?;
    let (e_minus, _) = extended(f, k, m, Sign::Minus, exterior, reach)?;
    let a = mixed_transform(&e_plus, params.lambda, tau, MixedKind::UpperOfLower)?;
    let b = mixed_transform(&e_minus, params.lambda, tau, MixedKind::LowerOfUpper)?;
    Ok(a.zip_with(&b, |x, y| 0.5 * (x + y))?.crop(&pad, f.domain()))
}

/// Lower and upper single-valued reductions of a multivalued sample set:
/// per distinct point the least and the greatest value.
pub fn multivalued_bounds(x: &ScatteredSamples) -> Result<(ScatteredSamples, ScatteredSamples)> {
    let mut groups: BTreeMap<Vec<u64>, (Vec<f64>, f64, f64)> = BTreeMap::new();
    for (p, v) in x.iter() {
        // +0.0 and -0.0 name the same point.
        let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
        groups
            .entry(key)
            .and_modify(|g| {
                g.1 = g.1.min(v);
                g.2 = g.2.max(v);
            })
            .or_insert((p.to_vec(), v, v));
    }
    let points: Vec<Vec<f64>> = groups.values().map(|g| g.0.clone()).collect();
    let lo = groups.values().map(|g| g.1).collect();
    let hi = groups.values().map(|g| g.2).collect();
    Ok((
        ScatteredSamples::new(points.clone(), lo)?,
        ScatteredSamples::new(points, hi)?,
    ))
}

/// Grid form of [`multivalued_bounds`]: every point snaps to its nearest
/// node and values landing on one node collapse by min and max. Lossy
/// below half a grid spacing.
pub fn snap_to_grid(
    x: &ScatteredSamples,
    domain: &GridDomain,
) -> Result<(GridFunction, GridFunction, SampleMask)> {
    if x.dim() != domain.dim() {
        return Err(CcxError::InvalidDomain(format!(
            "samples are {}-dimensional, grid is {}-dimensional",
            x.dim(),
            domain.dim()
        )));
    }
    let n = domain.len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (p, v) in x.iter() {
        let node = domain
            .nearest_node(p)
            .ok_or_else(|| CcxError::InvalidDomain(format!("sample {p:?} lies outside the grid")))?;
        lo[node] = lo[node].min(v);
        hi[node] = hi[node].max(v);
    }
    let member: Vec<bool> = lo.iter().map(|v| v.is_finite()).collect();
    let clean = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter().map(|x| if x.is_finite() { x } else { 0.0 }).collect()
    };
    Ok((
        GridFunction::new(domain.clone(), clean(lo))?,
        GridFunction::new(domain.clone(), clean(hi))?,
        SampleMask::new(domain.clone(), member)?,
    ))
}

/// `s C^l_λ(f̌_K^M) + (1 − s) C^u_λ(f̂_K^{−M})` for a multivalued sample set.
pub fn set_valued_average(
    x: &ScatteredSamples,
    domain: &GridDomain,
    params: &TransformParams,
    exterior: Exterior,
) -> Result<GridFunction> {
    let (lo, hi, k) = snap_to_grid(x, domain)?;
    let lower = lower_approx_with(&lo, &k, params, exterior)?;
    let upper = upper_approx_with(&hi, &k, params, exterior)?;
    combine(&lower, &upper, params.s)
}

/// `K_R = K ∪ {|x − c| ≥ R}` with value `c0` on the added nodes, where c is
/// the grid centre. The grid must reach `R` plus the locality radius of
/// `(M, λ)` from the centre along every axis.
pub fn ring_extension(
    f: &GridFunction,
    k: &SampleMask,
    ring: f64,
    c0: f64,
    params: &TransformParams,
) -> Result<(GridFunction, SampleMask)> {
    if f.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    let m = finite_m(params)?;
    let d = f.domain();
    let c = d.center();
    let need = ring + locality_radius(m, params.lambda);
    for axis in 0..d.dim() {
        let half = 0.5 * (d.shape()[axis] - 1) as f64 * d.spacing()[axis];
        if half < need {
            return Err(CcxError::GridTooSmall(format!(
                "axis {axis} reaches {half} from the centre, needs {need}"
            )));
        }
    }
    for i in k.indices() {
        if d.dist2_to_point(i, &c) >= ring * ring {
            return Err(CcxError::InvalidParameter(format!(
                "sample node {i} is not inside the ring radius {ring}"
            )));
        }
    }
    let outside: Vec<bool> = (0..d.len())
        .map(|i| d.dist2_to_point(i, &c) >= ring * ring)
        .collect();
    let values = f
        .values()
        .iter()
        .zip(&outside)
        .map(|(&v, &o)| if o { c0 } else { v })
        .collect();
    let member = k.member().iter().zip(&outside).map(|(&a, &b)| a || b).collect();
    Ok((
        GridFunction::new(d.clone(), values)?,
        SampleMask::new(d.clone(), member)?,
    ))
}

/// Result of comparing an approximant with the data on K.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    pub max_deviation: f64,
    pub worst_node: usize,
    pub tol: f64,
    pub pass: bool,
}

pub fn interpolation_check(
    approx: &GridFunction,
    f: &GridFunction,
    k: &SampleMask,
    tol: f64,
) -> Result<InterpolationReport> {
    if approx.domain() != f.domain() || f.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    let (mut worst_node, mut max_deviation) = (0, 0.0f64);
    for i in k.indices() {
        let dev = (approx.values()[i] - f.values()[i]).abs();
        if dev > max_deviation || i == 0 {
            max_deviation = max_deviation.max(dev);
            worst_node = i;
        }
    }
    Ok(InterpolationReport {
        max_deviation,
        worst_node,
        tol,
        pass: max_deviation <= tol,
    })
}

/// One point of a `(λ, s)` sweep: the largest deviation of `A_s` from f on K.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub s: f64,
    pub max_deviation: f64,
}

/// Evaluates `A_{λ,s}` on a parameter grid; no optimisation is attempted.
pub fn sweep_weighted(
    f: &GridFunction,
    k: &SampleMask,
    m: f64,
    lambdas: &[f64],
    weights: &[f64],
    exterior: Exterior,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(lambdas.len() * weights.len());
    for &lambda in lambdas {
        let p = TransformParams::new(lambda, crate::grid::Bound::Finite(m))?;
        let lower = lower_approx_with(f, k, &p, exterior)?;
        let upper = upper_approx_with(f, k, &p, exterior)?;
        for &s in weights {
            if !(0.0..=1.0).contains(&s) {
                return Err(CcxError::InvalidParameter(format!("s = {s} is outside [0, 1]")));
            }
            let a = combine(&lower, &upper, s)?;
            let max_deviation = k
                .indices()
                .into_iter()
                .map(|i| (a.values()[i] - f.values()[i]).abs())
                .fold(0.0, f64::max);
            out.push(SweepPoint {
                lambda,
                s,
                max_deviation,
            });
        }
    }
    Ok(out)
}

/// Validator threshold `2 A0 + λ d²`, the stronger of the two forms the
/// finite-M error bounds are stated with.
pub fn validation_threshold(a0: f64, lambda: f64, d: f64) -> f64 {
    2.0 * a0 + lambda * d * d
}

/// An M strictly above [`validation_threshold`] for the data on K and the
/// given set diameter.
pub fn auto_m(f: &GridFunction, k: &SampleMask, lambda: f64, d: f64) -> Result<f64> {
    let t = validation_threshold(bound_a0(f, k)?, lambda, d);
    Ok(t + (1e-6 * t).max(1e-9))
}

/// Nodes of co[K], through the geometry cache.
pub fn hull_restricted<'a>(geo: &'a MaskGeometry) -> impl Iterator<Item = usize> + 'a {
    geo.hull_nodes()
        .iter()
        .enumerate()
        .filter(|(_, &inside)| inside)
        .map(|(i, _)| i)
}
