//! Moduli of continuity and the interpolation error bounds expressed
//! through them.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CcxError, Result};
use crate::grid::GridFunction;

/// Node count up to which every pair is enumerated.
pub const EXHAUSTIVE_MAX_NODES: usize = 4096;
/// Upper limit on the number of knots kept by the empirical modulus.
pub const MAX_KNOTS: usize = 256;

/// A nondecreasing function with ω(0) = 0.
pub trait Modulus {
    fn eval(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Modulus for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Sampled modulus, its least concave majorant and an affine majorant.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusModel {
    pub knots: Vec<f64>,
    pub omega_f: Vec<f64>,
    pub omega_cav: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub l_lip: Option<f64>,
    pub l_c11: Option<f64>,
}

impl ModulusModel {
    /// Builds the model from `(knots, omega_f)`; the majorant and the
    /// affine bound are derived. Knots must start at 0 and increase.
    pub fn from_samples(knots: Vec<f64>, omega_f: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != omega_f.len() {
            return Err(CcxError::InvalidParameter("knots and values must pair up".into()));
        }
        if knots[0] != 0.0 || omega_f[0] != 0.0 {
            return Err(CcxError::InvalidParameter("modulus must start at (0, 0)".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().any(|t| !t.is_finite()) {
            return Err(CcxError::InvalidParameter("knots must increase".into()));
        }
        if omega_f.windows(2).any(|w| w[1] < w[0]) || omega_f.iter().any(|v| !v.is_finite()) {
            return Err(CcxError::InvalidParameter("modulus must be nondecreasing".into()));
        }
        let omega_cav = least_concave_majorant(&knots, &omega_f);
        let (a, b) = affine_bound(&knots, &omega_cav);
        Ok(ModulusModel {
            knots,
            omega_f,
            omega_cav,
            a,
            b,
            l_lip: None,
            l_c11: None,
        })
    }

    /// `ω(t) = L t`.
    pub fn linear(l: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(CcxError::InvalidParameter("slope must be >= 0".into()));
        }
        Ok(ModulusModel::from_samples(vec![0.0, 1.0], vec![0.0, l])?.with_lipschitz(l))
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.l_lip = Some(l);
        self
    }

    pub fn with_c11(mut self, l: f64) -> Self {
        self.l_c11 = Some(l);
        self
    }

    /// Replaces (a, b) after checking `ω_cav ≤ a t + b` at every knot.
    pub fn with_affine_bound(mut self, a: f64, b: f64) -> Result<Self> {
        if a < 0.0 || b < 0.0 {
            return Err(CcxError::InvalidParameter("affine bound must be nonnegative".into()));
        }
        let tol = 1e-12 * (1.0 + self.omega_cav.last().copied().unwrap_or(0.0));
        if self
            .knots
            .iter()
            .zip(&self.omega_cav)
            .any(|(t, w)| *w > a * t + b + tol)
        {
            return Err(CcxError::InvalidParameter("affine bound is not a majorant".into()));
        }
        self.a = a;
        self.b = b;
        Ok(self)
    }

    /// Serialises as `# a=..`, `# b=..`, optional `# L_lip=..`/`# L_c11=..`
    /// header lines followed by `knot,omega_f,omega_cav` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# a={:?}", self.a);
        let _ = writeln!(s, "# b={:?}", self.b);
        if let Some(l) = self.l_lip {
            let _ = writeln!(s, "# L_lip={l:?}");
        }
        if let Some(l) = self.l_c11 {
            let _ = writeln!(s, "# L_c11={l:?}");
        }
        s.push_str("knot,omega_f,omega_cav\n");
        for ((t, f), c) in self.knots.iter().zip(&self.omega_f).zip(&self.omega_cav) {
            let _ = writeln!(s, "{t:?},{f:?},{c:?}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CcxError::Parse(format!("bad number `{v}`")))
        };
        let (mut a, mut b, mut l_lip, mut l_c11) = (None, None, None, None);
        let (mut knots, mut omega_f, mut omega_cav) = (Vec::new(), Vec::new(), Vec::new());
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.split_once('=') {
                    let v = parse(value)?;
                    match key.trim() {
                        "a" => a = Some(v),
                        "b" => b = Some(v),
                        "L_lip" => l_lip = Some(v),
                        "L_c11" => l_c11 = Some(v),
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("knot") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(CcxError::Parse(format!("expected 3 columns in `{line}`")));
            }
            knots.push(parse(cols[0])?);
            omega_f.push(parse(cols[1])?);
            omega_cav.push(parse(cols[2])?);
        }
        let mut model = ModulusModel::from_samples(knots, omega_f)?;
        if model
            .omega_cav
            .iter()
            .zip(&omega_cav)
            .any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
        {
            return Err(CcxError::Parse("omega_cav is not the concave majorant of omega_f".into()));
        }
        if let (Some(a), Some(b)) = (a, b) {
            model = model.with_affine_bound(a, b)?;
        }
        model.l_lip = l_lip;
        model.l_c11 = l_c11;
        Ok(model)
    }
}

impl Modulus for ModulusModel {
    /// Piecewise-linear `ω_cav`, extended past the last knot by `a t + b`.
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.knots.len();
        if t >= self.knots[n - 1] {
            return self.omega_cav[n - 1] + self.a * (t - self.knots[n - 1]);
        }
        let j = self.knots.partition_point(|&k| k <= t);
        let (t0, t1) = (self.knots[j - 1], self.knots[j]);
        let (w0, w1) = (self.omega_cav[j - 1], self.omega_cav[j]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// Empirical ω_f of grid data. Every pair is used when the grid has at most
/// [`EXHAUSTIVE_MAX_NODES`] nodes, otherwise `max_pairs` random pairs drawn
/// from `seed`. The result is a lower estimate of the continuum modulus.
pub fn empirical_modulus(f: &GridFunction, max_pairs: usize, seed: u64) -> Result<ModulusModel> {
    let d = f.domain();
    let shape = d.shape();
    let dim = d.dim();
    let n = d.len();
    let vals = f.values();
    // Best |f(x) - f(y)| per absolute index offset.
    let offset_len: usize = shape.iter().product();
    let offset_of = |i: usize, j: usize| {
        let (a, b) = (d.multi_index(i), d.multi_index(j));
        let mut lin = 0;
        for k in 0..dim {
            lin = lin * shape[k] + a[k].abs_diff(b[k]);
        }
        lin
    };

    let best: Vec<f64> = if n <= EXHAUSTIVE_MAX_NODES {
        (0..n)
            .into_par_iter()
            .fold(
                || vec![0.0f64; offset_len],
                |mut acc, i| {
                    for j in i + 1..n {
                        let o = offset_of(i, j);
                        acc[o] = acc[o].max((vals[i] - vals[j]).abs());
                    }
                    acc
                },
            )
            .reduce(|| vec![0.0f64; offset_len], max_merge)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = vec![0.0f64; offset_len];
        for _ in 0..max_pairs {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let o = offset_of(i, j);
            acc[o] = acc[o].max((vals[i] - vals[j]).abs());
        }
        acc
    };

    // Offset -> physical distance; only offsets that occur carry data.
    let offset_domain_strides = {
        let mut s = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * shape[k + 1];
        }
        s
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (o, &w) in best.iter().enumerate().skip(1) {
        let mut rem = o;
        let mut d2 = 0.0;
        for (&stride, &h) in offset_domain_strides.iter().zip(d.spacing()).take(dim) {
            let c = rem / stride;
            rem %= stride;
            let x = c as f64 * h;
            d2 += x * x;
        }
        pts.push((d2.sqrt(), w));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Merge distances equal up to rounding.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, w) in pts {
        match merged.last_mut() {
            Some(last) if t - last.0 <= 1e-12 * t => last.1 = last.1.max(w),
            _ => merged.push((t, w)),
        }
    }
    if merged.len() > MAX_KNOTS - 1 {
        let tmax = merged.last().map_or(0.0, |p| p.0);
        let bins = MAX_KNOTS - 1;
        let mut binned = vec![(0.0, f64::NEG_INFINITY); bins];
        for (t, w) in merged {
            let k = (((t / tmax) * bins as f64).ceil() as usize).clamp(1, bins) - 1;
            binned[k].0 = tmax * (k + 1) as f64 / bins as f64;
            binned[k].1 = binned[k].1.max(w);
        }
        merged = binned.into_iter().filter(|p| p.1.is_finite()).collect();
    }

    let mut knots = vec![0.0];
    let mut omega = vec![0.0];
    let mut run = 0.0f64;
    for (t, w) in merged {
        run = run.max(w);
        knots.push(t);
        omega.push(run);
    }
    ModulusModel::from_samples(knots, omega)
}

fn max_merge(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.max(y);
    }
    a
}

/// Upper concave hull of `(knots[i], omega[i])`, evaluated at the knots.
pub fn least_concave_majorant(knots: &[f64], omega: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::with_capacity(knots.len());
    for i in 0..knots.len() {
        while hull.len() >= 2 {
            let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop q when it lies on or below the chord p -> i.
            let cross = (knots[q] - knots[p]) * (omega[i] - omega[p])
                - (omega[q] - omega[p]) * (knots[i] - knots[p]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = omega.to_vec();
    for pair in hull.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        for i in p + 1..q {
            let v = omega[p] + (omega[q] - omega[p]) * (knots[i] - knots[p]) / (knots[q] - knots[p]);
            out[i] = v.clamp(omega[i], omega[q]);
        }
    }
    out
}

/// Slope and intercept of the last chord of a concave majorant; by
/// concavity `ω_cav(t) ≤ a t + b` for every t ≥ 0.
pub fn affine_bound(knots: &[f64], omega_cav: &[f64]) -> (f64, f64) {
    let n = knots.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let a = ((omega_cav[n - 1] - omega_cav[n - 2]) / (knots[n - 1] - knots[n - 2])).max(0.0);
    let b = (omega_cav[n - 1] - a * knots[n - 1]).max(0.0);
    (a, b)
}

/// `ω(r_c + a/λ + √(2b/λ))` for a uniformly continuous f.
pub fn error_bound_uc(r_c: f64, lambda: f64, model: &ModulusModel) -> f64 {
    error_bound_uc_with(r_c, lambda, model, model.a, model.b)
}

/// As [`error_bound_uc`] for any modulus with affine majorant `a t + b`.
pub fn error_bound_uc_with(r_c: f64, lambda: f64, omega: &impl Modulus, a: f64, b: f64) -> f64 {
    omega.eval(r_c + a / lambda + (2.0 * b / lambda).sqrt())
}

/// `L r_c + L²/λ` for an L-Lipschitz f.
pub fn error_bound_lip(r_c: f64, lambda: f64, l: f64) -> f64 {
    l * r_c + l * l / lambda
}

/// `L/4·((λ + L/2)/(λ − L/2) + 1)·r_c²` for f with L-Lipschitz gradient;
/// needs λ > L.
pub fn error_bound_c11(r_c: f64, lambda: f64, l: f64) -> Result<f64> {
    if !(lambda > l) {
        return Err(CcxError::InvalidParameter(format!(
            "lambda = {lambda} must exceed L = {l}"
        )));
    }
    Ok(l / 4.0 * ((lambda + l / 2.0) / (lambda - l / 2.0) + 1.0) * r_c * r_c)
}
