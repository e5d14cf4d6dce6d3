//! Grid domains, sampled functions, sample masks and scattered samples.
//!
//! Everything downstream works on regular axis-aligned grids of dimension
//! one to three, stored row-major (last axis fastest).

use serde::{Deserialize, Serialize};

use crate::error::{CcxError, Result};

pub const MAX_DIM: usize = 3;

/// A regular axis-aligned grid: node `(i_1, .., i_n)` sits at
/// `origin + (i_k * h_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl GridDomain {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if n == 0 || n > MAX_DIM {
            return Err(CcxError::InvalidDomain(format!(
                "dimension {n} outside 1..={MAX_DIM}"
            )));
        }
        if spacing.len() != n || origin.len() != n {
            return Err(CcxError::InvalidDomain(
                "shape, spacing and origin lengths differ".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(CcxError::InvalidDomain("zero-length axis".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(CcxError::InvalidDomain("spacing must be positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(CcxError::InvalidDomain("origin must be finite".into()));
        }
        Ok(Self {
            shape,
            spacing,
            origin,
        })
    }

    /// Grid covering `[lo, hi]` on every axis with spacing `h` (n-dimensional cube).
    pub fn cube(dim: usize, lo: f64, hi: f64, h: f64) -> Result<Self> {
        let count = ((hi - lo) / h).round() as usize + 1;
        Self::new(vec![count; dim], vec![h; dim], vec![lo; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides, last axis contiguous.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn multi_index(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for k in (0..self.dim()).rev() {
            out[k] = index % self.shape[k];
            index /= self.shape[k];
        }
        out
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, index: usize) -> [f64; MAX_DIM] {
        let multi = self.multi_index(index);
        let mut out = [0.0; MAX_DIM];
        for k in 0..self.dim() {
            out[k] = self.origin[k] + multi[k] as f64 * self.spacing[k];
        }
        out
    }

    pub fn coords_vec(&self, index: usize) -> Vec<f64> {
        self.coords(index)[..self.dim()].to_vec()
    }

    /// Squared physical distance between two nodes.
    pub fn dist2(&self, a: usize, b: usize) -> f64 {
        let (ma, mb) = (self.multi_index(a), self.multi_index(b));
        (0..self.dim())
            .map(|k| {
                let d = (ma[k] as f64 - mb[k] as f64) * self.spacing[k];
                d * d
            })
            .sum()
    }

    pub fn dist2_to_point(&self, a: usize, p: &[f64]) -> f64 {
        let c = self.coords(a);
        (0..self.dim()).map(|k| (c[k] - p[k]).powi(2)).sum()
    }

    /// Node whose cell (half a spacing each side) contains `p`, if any.
    pub fn nearest_node(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.dim() {
            return None;
        }
        let mut multi = [0usize; MAX_DIM];
        for k in 0..self.dim() {
            let t = ((p[k] - self.origin[k]) / self.spacing[k]).round();
            if t < 0.0 || t >= self.shape[k] as f64 {
                return None;
            }
            multi[k] = t as usize;
        }
        Some(self.linear_index(&multi[..self.dim()]))
    }

    /// Midpoint of the grid's bounding box.
    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.origin[k] + 0.5 * (self.shape[k] - 1) as f64 * self.spacing[k])
            .collect()
    }

    /// Domain grown by `pad[k]` nodes on both sides of axis `k`.
    pub fn padded(&self, pad: &[usize]) -> GridDomain {
        let shape = self
            .shape
            .iter()
            .zip(pad)
            .map(|(&s, &p)| s + 2 * p)
            .collect();
        let origin = (0..self.dim())
            .map(|k| self.origin[k] - pad[k] as f64 * self.spacing[k])
            .collect();
        GridDomain {
            shape,
            spacing: self.spacing.clone(),
            origin,
        }
    }

    /// True when every node lies at least `margin` (physical units) inside the box.
    pub fn interior_with_margin(&self, index: usize, margin: f64) -> bool {
        let multi = self.multi_index(index);
        (0..self.dim()).all(|k| {
            let lo = multi[k] as f64 * self.spacing[k];
            let hi = (self.shape[k] - 1 - multi[k]) as f64 * self.spacing[k];
            lo >= margin && hi >= margin
        })
    }
}

/// Finite real values on the nodes of a [`GridDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(CcxError::InvalidDomain(format!(
                "{} values for {} nodes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(CcxError::NonFinite { index });
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: GridDomain, c: f64) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, vec![c; n])
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n = domain.dim();
        let values = (0..domain.len())
            .map(|i| f(&domain.coords(i)[..n]))
            .collect();
        Self::new(domain, values)
    }

    /// Internal constructor for values produced by the kernels, which are
    /// finite whenever their inputs are.
    pub(crate) fn from_parts(domain: GridDomain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        Self { domain, values }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_parts(
            self.domain.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        if self.domain != other.domain {
            return Err(CcxError::DomainMismatch);
        }
        Ok(GridFunction::from_parts(
            self.domain.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn neg(&self) -> GridFunction {
        self.map(|v| -v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute difference to `other` (same domain required).
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.domain != other.domain {
            return Err(CcxError::DomainMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Embeds into a grown domain, filling new nodes with `fill`.
    pub fn pad(&self, pad: &[usize], fill: f64) -> GridFunction {
        let big = self.domain.padded(pad);
        let mut values = vec![fill; big.len()];
        let n = self.domain.dim();
        for (i, &v) in self.values.iter().enumerate() {
            let mut m = self.domain.multi_index(i);
            for k in 0..n {
                m[k] += pad[k];
            }
            values[big.linear_index(&m[..n])] = v;
        }
        GridFunction::from_parts(big, values)
    }

    /// Inverse of [`GridFunction::pad`]: keeps the central block of `small`'s shape.
    pub fn crop(&self, pad: &[usize], small: &GridDomain) -> GridFunction {
        let n = small.dim();
        let values = (0..small.len())
            .map(|i| {
                let mut m = small.multi_index(i);
                for k in 0..n {
                    m[k] += pad[k];
                }
                self.values[self.domain.linear_index(&m[..n])]
            })
            .collect();
        GridFunction::from_parts(small.clone(), values)
    }
}

/// Boolean membership per node; the sample set K (or Ω's complement).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMask {
    domain: GridDomain,
    member: Vec<bool>,
}

impl SampleMask {
    pub fn new(domain: GridDomain, member: Vec<bool>) -> Result<Self> {
        if member.len() != domain.len() {
            return Err(CcxError::InvalidDomain(format!(
                "{} mask entries for {} nodes",
                member.len(),
                domain.len()
            )));
        }
        if !member.iter().any(|&m| m) {
            return Err(CcxError::EmptyMask);
        }
        Ok(Self { domain, member })
    }

    pub fn full(domain: GridDomain) -> Self {
        let n = domain.len();
        Self {
            domain,
            member: vec![true; n],
        }
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let n = domain.dim();
        let member = (0..domain.len()).map(|i| f(&domain.coords(i)[..n])).collect();
        Self::new(domain, member)
    }

    pub fn from_indices(domain: GridDomain, indices: &[usize]) -> Result<Self> {
        let mut member = vec![false; domain.len()];
        for &i in indices {
            if i >= member.len() {
                return Err(CcxError::InvalidParameter(format!("node {i} out of range")));
            }
            member[i] = true;
        }
        Self::new(domain, member)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn member(&self) -> &[bool] {
        &self.member
    }

    pub fn contains(&self, index: usize) -> bool {
        self.member[index]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn complement(&self) -> Result<SampleMask> {
        SampleMask::new(self.domain.clone(), self.member.iter().map(|m| !m).collect())
    }

    pub fn union(&self, other: &SampleMask) -> Result<SampleMask> {
        if self.domain != other.domain {
            return Err(CcxError::DomainMismatch);
        }
        Ok(SampleMask {
            domain: self.domain.clone(),
            member: self
                .member
                .iter()
                .zip(&other.member)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    pub fn pad(&self, pad: &[usize], fill: bool) -> SampleMask {
        let big = self.domain.padded(pad);
        let mut member = vec![fill; big.len()];
        let n = self.domain.dim();
        for (i, &m) in self.member.iter().enumerate() {
            let mut mi = self.domain.multi_index(i);
            for k in 0..n {
                mi[k] += pad[k];
            }
            member[big.linear_index(&mi[..n])] = m;
        }
        SampleMask { domain: big, member }
    }
}

/// Finite list of `(point, value)` pairs; duplicate points are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteredSamples {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl ScatteredSamples {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(CcxError::EmptyInput);
        }
        if points.len() != values.len() {
            return Err(CcxError::InvalidParameter(
                "points and values differ in length".into(),
            ));
        }
        let dim = points[0].len();
        if dim == 0 || dim > MAX_DIM {
            return Err(CcxError::InvalidDomain(format!("dimension {dim}")));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(CcxError::InvalidParameter(format!(
                    "point {i} has dimension {}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) || !values[i].is_finite() {
                return Err(CcxError::NonFinite { index: i });
            }
        }
        Ok(Self {
            dim,
            points,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.values.iter().copied())
    }

    pub fn map_values(&self, f: impl Fn(&[f64], f64) -> f64) -> ScatteredSamples {
        ScatteredSamples {
            dim: self.dim,
            points: self.points.clone(),
            values: self.iter().map(|(p, v)| f(p, v)).collect(),
        }
    }

    /// Grid samples on the member nodes of `mask`.
    pub fn from_mask(f: &GridFunction, mask: &SampleMask) -> Result<Self> {
        if f.domain() != mask.domain() {
            return Err(CcxError::DomainMismatch);
        }
        let idx = mask.indices();
        let points = idx.iter().map(|&i| f.domain().coords_vec(i)).collect();
        let values = idx.iter().map(|&i| f.values()[i]).collect();
        Self::new(points, values)
    }
}

/// Extension constant M: finite, or the symbolic infinity used only by the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn finite(self) -> Result<f64> {
        match self {
            Bound::Finite(m) => Ok(m),
            Bound::Infinite => Err(CcxError::InvalidParameter(
                "M = infinity is only available on oracle paths".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub lambda: f64,
    pub tau: Option<f64>,
    pub m: Bound,
    pub s: f64,
}

impl TransformParams {
    pub fn new(lambda: f64, m: Bound) -> Result<Self> {
        let p = Self {
            lambda,
            tau: None,
            m,
            s: 0.5,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = Some(tau);
        self.validate()?;
        Ok(self)
    }

    pub fn with_s(mut self, s: f64) -> Result<Self> {
        self.s = s;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(CcxError::InvalidParameter("lambda must be > 0".into()));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CcxError::InvalidParameter("tau must be > 0".into()));
            }
        }
        if let Bound::Finite(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return Err(CcxError::InvalidParameter("M must be > 0".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(CcxError::InvalidParameter("s must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// f on member nodes, `+M` (Plus) or `-M` (Minus) elsewhere.
pub fn extend_with_constant(
    f_on_k: &GridFunction,
    k: &SampleMask,
    m: f64,
    sign: Sign,
) -> Result<GridFunction> {
    if f_on_k.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    let a0 = bound_a0(f_on_k, k)?;
    if !(m > a0) {
        return Err(CcxError::BelowThreshold { m, threshold: a0 });
    }
    let fill = match sign {
        Sign::Plus => m,
        Sign::Minus => -m,
    };
    let values = f_on_k
        .values()
        .iter()
        .zip(k.member())
        .map(|(&v, &inside)| if inside { v } else { fill })
        .collect();
    Ok(GridFunction::from_parts(f_on_k.domain().clone(), values))
}

/// `A0 + λ d²`; callers pick M strictly above this.
pub fn min_safe_m(a0: f64, lambda: f64, d: f64) -> f64 {
    a0 + lambda * d * d
}

/// Max of |f| over the member nodes.
pub fn bound_a0(f_on_k: &GridFunction, k: &SampleMask) -> Result<f64> {
    if f_on_k.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    let mut any = false;
    let mut a0 = 0.0f64;
    for (v, &inside) in f_on_k.values().iter().zip(k.member()) {
        if inside {
            any = true;
            a0 = a0.max(v.abs());
        }
    }
    if !any {
        return Err(CcxError::EmptyMask);
    }
    Ok(a0)
}

/// Shifts f by its midrange over K so that `(sup + inf) / 2 = 0` there.
pub fn median_shift(f_on_k: &GridFunction, k: &SampleMask) -> Result<(GridFunction, f64)> {
    if f_on_k.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    let (lo, hi) = f_on_k
        .values()
        .iter()
        .zip(k.member())
        .filter(|(_, &inside)| inside)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        return Err(CcxError::EmptyMask);
    }
    let m = 0.5 * (hi + lo);
    Ok((f_on_k.map(|v| v - m), m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> GridDomain {
        GridDomain::new(vec![3], vec![1.0], vec![0.0]).unwrap()
    }

    #[test]
    fn extend_full_mask_is_identity() {
        let d = line3();
        let f = GridFunction::constant(d.clone(), 3.0).unwrap();
        let k = SampleMask::full(d);
        let out = extend_with_constant(&f, &k, 10.0, Sign::Minus).unwrap();
        assert_eq!(out.values(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn extend_single_node() {
        let d = line3();
        let f = GridFunction::constant(d.clone(), 0.0).unwrap();
        let k = SampleMask::from_indices(d, &[1]).unwrap();
        let plus = extend_with_constant(&f, &k, 5.0, Sign::Plus).unwrap();
        assert_eq!(plus.values(), &[5.0, 0.0, 5.0]);
        let minus = extend_with_constant(&f, &k, 5.0, Sign::Minus).unwrap();
        assert_eq!(minus.values(), &[-5.0, 0.0, -5.0]);
    }

    #[test]
    fn extend_rejects_small_m_and_mismatch() {
        let d = line3();
        let f = GridFunction::new(d.clone(), vec![0.0, 7.0, 0.0]).unwrap();
        let k = SampleMask::full(d);
        assert!(matches!(
            extend_with_constant(&f, &k, 7.0, Sign::Plus),
            Err(CcxError::BelowThreshold { .. })
        ));
        let other = GridDomain::new(vec![4], vec![1.0], vec![0.0]).unwrap();
        let k2 = SampleMask::full(other);
        assert!(matches!(
            extend_with_constant(&f, &k2, 9.0, Sign::Plus),
            Err(CcxError::DomainMismatch)
        ));
    }

    #[test]
    fn extension_ordering_and_idempotence() {
        let d = GridDomain::new(vec![5], vec![0.5], vec![0.0]).unwrap();
        let f = GridFunction::new(d.clone(), vec![1.0, -2.0, 0.5, 3.0, -1.0]).unwrap();
        let k = SampleMask::from_indices(d, &[1, 3]).unwrap();
        let up = extend_with_constant(&f, &k, 4.0, Sign::Plus).unwrap();
        let lo = extend_with_constant(&f, &k, 4.0, Sign::Minus).unwrap();
        for i in 0..5 {
            assert!(lo.values()[i] <= up.values()[i]);
            assert_eq!(lo.values()[i] == up.values()[i], k.contains(i));
        }
        let again = extend_with_constant(&up, &k, 4.0, Sign::Plus).unwrap();
        assert_eq!(again, up);
    }

    #[test]
    fn min_safe_m_examples() {
        assert_eq!(min_safe_m(1.0, 2.0, 3.0), 19.0);
        assert_eq!(min_safe_m(0.0, 5.0, 0.0), 0.0);
        assert_eq!(min_safe_m(0.5, 1.0, 2.0), 4.5);
    }

    #[test]
    fn bound_a0_examples() {
        let d = line3();
        let k = SampleMask::full(d.clone());
        let f = GridFunction::new(d.clone(), vec![-2.0, 1.0, 0.0]).unwrap();
        assert_eq!(bound_a0(&f, &k).unwrap(), 2.0);
        let c = GridFunction::constant(d.clone(), 7.0).unwrap();
        let k1 = SampleMask::from_indices(d, &[2]).unwrap();
        assert_eq!(bound_a0(&c, &k1).unwrap(), 7.0);
        let d2 = GridDomain::new(vec![2], vec![1.0], vec![0.0]).unwrap();
        let g = GridFunction::new(d2.clone(), vec![0.5, -0.5]).unwrap();
        assert_eq!(bound_a0(&g, &SampleMask::full(d2)).unwrap(), 0.5);
    }

    #[test]
    fn empty_mask_rejected() {
        let d = line3();
        assert!(matches!(
            SampleMask::new(d, vec![false; 3]),
            Err(CcxError::EmptyMask)
        ));
    }

    #[test]
    fn median_shift_examples() {
        let d2 = GridDomain::new(vec![2], vec![1.0], vec![0.0]).unwrap();
        let k2 = SampleMask::full(d2.clone());
        let (g, m) = median_shift(&GridFunction::new(d2.clone(), vec![0.0, 4.0]).unwrap(), &k2)
            .unwrap();
        assert_eq!((g.values(), m), (&[-2.0, 2.0][..], 2.0));
        let (g, m) = median_shift(&GridFunction::new(d2, vec![-1.0, 1.0]).unwrap(), &k2).unwrap();
        assert_eq!((g.values(), m), (&[-1.0, 1.0][..], 0.0));
        let d3 = line3();
        let (g, m) = median_shift(
            &GridFunction::constant(d3.clone(), 3.0).unwrap(),
            &SampleMask::full(d3),
        )
        .unwrap();
        assert_eq!((g.values(), m), (&[0.0, 0.0, 0.0][..], 3.0));
    }

    #[test]
    fn non_finite_values_rejected() {
        let d = line3();
        assert!(matches!(
            GridFunction::new(d, vec![0.0, f64::NAN, 1.0]),
            Err(CcxError::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn pad_crop_roundtrip() {
        let d = GridDomain::new(vec![2, 3], vec![0.5, 1.0], vec![1.0, -1.0]).unwrap();
        let f = GridFunction::from_fn(d.clone(), |x| x[0] * 10.0 + x[1]).unwrap();
        let big = f.pad(&[2, 1], -9.0);
        assert_eq!(big.domain().shape(), &[6, 5]);
        assert_eq!(big.domain().origin(), &[0.0, -2.0]);
        assert_eq!(big.crop(&[2, 1], &d), f);
    }

    #[test]
    fn coords_follow_origin_and_spacing() {
        let d = GridDomain::new(vec![3, 4], vec![0.5, 0.25], vec![-1.0, 2.0]).unwrap();
        let i = d.linear_index(&[2, 3]);
        assert_eq!(&d.coords(i)[..2], &[0.0, 2.75]);
        assert_eq!(d.nearest_node(&[0.1, 2.8]), Some(i));
        assert_eq!(d.nearest_node(&[5.0, 2.8]), None);
    }
}
