//! Set quantities on grid masks: Hausdorff distance, density and convex
//! density radii, convex-hull membership, and the distance-like functions
//! `d_{λ,f}` and `D_{λ,f}`.
//!
//! Hull tests work on integer index offsets. Rescaling axes is linear, so
//! hull membership in index space equals membership in physical space.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{CcxError, Result};
use crate::grid::{GridDomain, GridFunction, SampleMask};
use crate::moduli::Modulus;
use crate::moreau::squared_distance_field;
use crate::simplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusKind {
    Density,
    ConvexDensity,
}

/// Per-node radius. `None` marks nodes outside co[K], where the convex
/// density radius is undefined.
#[derive(Clone, Debug)]
pub struct RadiusField {
    pub domain: GridDomain,
    pub r: Vec<Option<f64>>,
    pub kind: RadiusKind,
    /// Supremum over nodes of co[K]; a lower bound of the continuum value.
    pub sup: f64,
}

fn check_same(a: &GridDomain, b: &GridDomain) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(CcxError::DomainMismatch)
    }
}

/// Hausdorff distance between the member sets, in physical units.
pub fn hausdorff_distance(k: &SampleMask, e: &SampleMask) -> Result<f64> {
    check_same(k.domain(), e.domain())?;
    let to_k = squared_distance_field(k);
    let to_e = squared_distance_field(e);
    let directed = |field: &[f64], other: &SampleMask| {
        other
            .indices()
            .into_iter()
            .map(|i| field[i])
            .fold(0.0f64, f64::max)
    };
    Ok(directed(&to_k, e).max(directed(&to_e, k)).sqrt())
}

/// Distance to K at every node.
pub fn density_radius(k: &SampleMask) -> RadiusField {
    density_radius_with(&MaskGeometry::new(k.clone()))
}

pub fn density_radius_with(geo: &MaskGeometry) -> RadiusField {
    let r: Vec<Option<f64>> = squared_distance_field(&geo.mask)
        .into_iter()
        .map(|d2| Some(d2.sqrt()))
        .collect();
    let hull = geo.hull_nodes();
    let sup = r
        .iter()
        .zip(hull)
        .filter(|(_, &inside)| inside)
        .map(|(v, _)| v.unwrap_or(0.0))
        .fold(0.0, f64::max);
    RadiusField {
        domain: geo.mask.domain().clone(),
        r,
        kind: RadiusKind::Density,
        sup,
    }
}

/// A mask with its member offsets and lazily built co[K] node set.
pub struct MaskGeometry {
    mask: SampleMask,
    members: Vec<usize>,
    hull: OnceLock<Vec<bool>>,
}

impl MaskGeometry {
    pub fn new(mask: SampleMask) -> Self {
        let members = mask.indices();
        MaskGeometry {
            mask,
            members,
            hull: OnceLock::new(),
        }
    }

    pub fn mask(&self) -> &SampleMask {
        &self.mask
    }

    /// Membership of every node in co[K], computed once.
    pub fn hull_nodes(&self) -> &[bool] {
        self.hull.get_or_init(|| self.compute_hull_nodes())
    }

    pub fn contains(&self, node: usize) -> bool {
        self.hull_nodes()[node]
    }

    fn index(&self, node: usize) -> [i64; 3] {
        let m = self.mask.domain().multi_index(node);
        [m[0] as i64, m[1] as i64, m[2] as i64]
    }

    fn compute_hull_nodes(&self) -> Vec<bool> {
        let d = self.mask.domain();
        let n = d.len();
        let pts: Vec<[i64; 3]> = self.members.iter().map(|&i| self.index(i)).collect();
        match d.dim() {
            1 => {
                let lo = pts.iter().map(|p| p[0]).min().unwrap_or(0);
                let hi = pts.iter().map(|p| p[0]).max().unwrap_or(0);
                (0..n).map(|i| (lo..=hi).contains(&self.index(i)[0])).collect()
            }
            2 => {
                let hull = convex_hull_2d(pts.iter().map(|p| [p[0], p[1]]).collect());
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let p = self.index(i);
                        polygon_contains(&hull, [p[0], p[1]])
                    })
                    .collect()
            }
            _ => {
                let mut lo = [i64::MAX; 3];
                let mut hi = [i64::MIN; 3];
                for p in &pts {
                    for k in 0..3 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x = self.index(i);
                        (0..3).all(|k| (lo[k]..=hi[k]).contains(&x[k])) && lp_contains(&pts, x, 3)
                    })
                    .collect()
            }
        }
    }

    /// Convex density radius at a node of co[K].
    pub fn convex_density_radius(&self, node: usize) -> Result<f64> {
        let d = self.mask.domain();
        if node >= d.len() {
            return Err(CcxError::InvalidParameter(format!("node {node} out of range")));
        }
        if self.mask.contains(node) {
            return Ok(0.0);
        }
        let x = self.index(node);
        let h = d.spacing();
        let dim = d.dim();
        let dist2 = |o: [i64; 3]| -> f64 {
            (0..dim).map(|k| (o[k] as f64 * h[k]).powi(2)).sum()
        };

        // Grow the ball until x is in the hull of the K-nodes it holds.
        let hmin = h[..dim].iter().copied().fold(f64::INFINITY, f64::min);
        let extent: f64 = (0..dim)
            .map(|k| ((d.shape()[k] - 1) as f64 * h[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut radius = hmin;
        let mut ball: Vec<([i64; 3], f64)>;
        loop {
            ball = self.members_in_ball(x, radius, &dist2);
            let offs: Vec<[i64; 3]> = ball.iter().map(|b| b.0).collect();
            if hull_contains_origin(&offs, dim) {
                break;
            }
            if radius >= extent {
                return Err(CcxError::OutsideHull);
            }
            radius = (radius * 2.0).min(extent);
        }

        // Smallest distinct distance whose ball already certifies membership.
        ball.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut radii: Vec<f64> = ball.iter().map(|b| b.1).collect();
        radii.dedup();
        let (mut lo, mut hi) = (0usize, radii.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let cut = ball.partition_point(|b| b.1 <= radii[mid]);
            let offs: Vec<[i64; 3]> = ball[..cut].iter().map(|b| b.0).collect();
            if hull_contains_origin(&offs, dim) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(radii[lo].sqrt())
    }

    fn members_in_ball(
        &self,
        x: [i64; 3],
        radius: f64,
        dist2: &impl Fn([i64; 3]) -> f64,
    ) -> Vec<([i64; 3], f64)> {
        let d = self.mask.domain();
        let dim = d.dim();
        let h = d.spacing();
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for k in 0..dim {
            let r = (radius / h[k]).floor() as i64 + 1;
            lo[k] = (x[k] - r).max(0);
            hi[k] = (x[k] + r).min(d.shape()[k] as i64 - 1);
        }
        let r2 = radius * radius;
        let mut out = Vec::new();
        let mut idx = [0i64; 3];
        let strides = d.strides();
        let box_len: Vec<i64> = (0..dim).map(|k| hi[k] - lo[k] + 1).collect();
        let total: i64 = box_len.iter().product();
        for c in 0..total {
            let mut rem = c;
            for k in (0..dim).rev() {
                idx[k] = lo[k] + rem % box_len[k];
                rem /= box_len[k];
            }
            let lin: usize = (0..dim).map(|k| idx[k] as usize * strides[k]).sum();
            if !self.mask.contains(lin) {
                continue;
            }
            let o = [idx[0] - x[0], idx[1] - x[1], idx[2] - x[2]];
            let d2 = dist2(o);
            if d2 <= r2 * (1.0 + 1e-12) {
                out.push((o, d2));
            }
        }
        out
    }

    /// Convex density radius at every node; `None` outside co[K].
    pub fn convex_density_field(&self) -> RadiusField {
        let hull = self.hull_nodes();
        let r: Vec<Option<f64>> = (0..hull.len())
            .into_par_iter()
            .map(|i| {
                if hull[i] {
                    self.convex_density_radius(i).ok()
                } else {
                    None
                }
            })
            .collect();
        let sup = r.iter().flatten().copied().fold(0.0, f64::max);
        RadiusField {
            domain: self.mask.domain().clone(),
            r,
            kind: RadiusKind::ConvexDensity,
            sup,
        }
    }
}

/// Whether the node lies in the convex hull of the member nodes of K.
pub fn co_membership(node: usize, k: &SampleMask) -> bool {
    let d = k.domain();
    let x = d.multi_index(node);
    let offs: Vec<[i64; 3]> = k
        .indices()
        .into_iter()
        .map(|i| {
            let p = d.multi_index(i);
            [
                p[0] as i64 - x[0] as i64,
                p[1] as i64 - x[1] as i64,
                p[2] as i64 - x[2] as i64,
            ]
        })
        .collect();
    hull_contains_origin(&offs, d.dim())
}

pub fn convex_density_radius(node: usize, k: &SampleMask) -> Result<f64> {
    MaskGeometry::new(k.clone()).convex_density_radius(node)
}

pub fn convex_density_field(k: &SampleMask) -> RadiusField {
    MaskGeometry::new(k.clone()).convex_density_field()
}

/// Whether the origin is a convex combination of the integer offsets.
fn hull_contains_origin(offs: &[[i64; 3]], dim: usize) -> bool {
    if offs.is_empty() {
        return false;
    }
    if offs.iter().any(|o| o[..dim].iter().all(|&c| c == 0)) {
        return true;
    }
    match dim {
        1 => offs.iter().any(|o| o[0] < 0) && offs.iter().any(|o| o[0] > 0),
        2 => angular_span_contains(&offs.iter().map(|o| [o[0], o[1]]).collect::<Vec<_>>()),
        _ => lp_contains(offs, [0, 0, 0], dim),
    }
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn half(v: [i64; 2]) -> u8 {
    // Angles in [0, π) first, then [π, 2π).
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

/// Exact test for nonzero vectors: the origin is in their convex hull iff
/// no open half-plane through the origin contains them all, i.e. no gap
/// between angularly consecutive directions exceeds π.
fn angular_span_contains(vs: &[[i64; 2]]) -> bool {
    let mut dirs: Vec<[i64; 2]> = vs.to_vec();
    dirs.sort_by(|&a, &b| half(a).cmp(&half(b)).then_with(|| 0.cmp(&cross(a, b))));
    dirs.dedup_by(|b, a| half(*a) == half(*b) && cross(*a, *b) == 0);
    if dirs.len() < 2 {
        return false;
    }
    if dirs.len() == 2 {
        // Only two opposite directions put the origin on a segment.
        return cross(dirs[0], dirs[1]) == 0;
    }
    (0..dirs.len()).all(|i| cross(dirs[i], dirs[(i + 1) % dirs.len()]) >= 0)
}

/// Counter-clockwise hull vertices (Andrew's monotone chain), without
/// collinear points. Degenerate inputs give one or two vertices.
fn convex_hull_2d(mut pts: Vec<[i64; 2]>) -> Vec<[i64; 2]> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: [i64; 2], a: [i64; 2], b: [i64; 2]| cross([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut hull: Vec<[i64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[i64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 2 {
        // All points collinear and the chain collapsed; keep the extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

fn polygon_contains(hull: &[[i64; 2]], p: [i64; 2]) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ap = [p[0] - a[0], p[1] - a[1]];
            cross(ab, ap) == 0 && {
                let t = ab[0] * ap[0] + ab[1] * ap[1];
                t >= 0 && t <= ab[0] * ab[0] + ab[1] * ab[1]
            }
        }
        n => (0..n).all(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]) >= 0
        }),
    }
}

/// LP feasibility of convex weights reproducing `x` from `pts`.
fn lp_contains(pts: &[[i64; 3]], x: [i64; 3], dim: usize) -> bool {
    let scale = pts
        .iter()
        .flat_map(|p| (0..dim).map(move |k| (p[k] - x[k]).abs()))
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let mut a: Vec<Vec<f64>> = (0..dim)
        .map(|k| pts.iter().map(|p| (p[k] - x[k]) as f64 / scale).collect())
        .collect();
    a.push(vec![1.0; pts.len()]);
    let mut b = vec![0.0; dim];
    b.push(1.0);
    simplex::feasible(&a, &b)
}

fn check_positive_on_k(f: &GridFunction, k: &SampleMask) -> Result<()> {
    check_same(f.domain(), k.domain())?;
    if let Some(i) = k.indices().into_iter().find(|&i| f.values()[i] <= 0.0) {
        return Err(CcxError::InvalidParameter(format!(
            "f must be positive on K; f = {} at node {i}",
            f.values()[i]
        )));
    }
    Ok(())
}

/// `d_{λ,f}(x; K) = min_{y∈K} |y − x| − √(f(y)/λ)`.
pub fn dist_like(node: usize, k: &SampleMask, f: &GridFunction, lambda: f64) -> Result<f64> {
    check_positive_on_k(f, k)?;
    check_lambda(lambda)?;
    Ok(dist_like_unchecked(node, &k.indices(), f, lambda))
}

fn dist_like_unchecked(node: usize, members: &[usize], f: &GridFunction, lambda: f64) -> f64 {
    let d = f.domain();
    members
        .iter()
        .map(|&y| d.dist2(node, y).sqrt() - (f.values()[y] / lambda).sqrt())
        .fold(f64::INFINITY, f64::min)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(CcxError::InvalidParameter("lambda must be > 0".into()))
    }
}

/// `D_{λ,f}(x; K) = −√λ · min(0, d_{λ,f}(x; K))`.
pub fn big_d(node: usize, k: &SampleMask, f: &GridFunction, lambda: f64) -> Result<f64> {
    Ok(-lambda.sqrt() * dist_like(node, k, f, lambda)?.min(0.0))
}

/// `D²_{λ,f}(·; K)` at every node.
pub fn big_d_squared_field(k: &SampleMask, f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    check_positive_on_k(f, k)?;
    check_lambda(lambda)?;
    let members = k.indices();
    let s = lambda.sqrt();
    let values: Vec<f64> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            let dd = s * dist_like_unchecked(i, &members, f, lambda).min(0.0);
            dd * dd
        })
        .collect();
    GridFunction::new(f.domain().clone(), values)
}

/// `2√(λM)·d_H + 2√M·ω(d_H)`, with ω a modulus of √f.
pub fn stability_bound(lambda: f64, m: f64, omega: &impl Modulus, d_h: f64) -> f64 {
    2.0 * (lambda * m).sqrt() * d_h + 2.0 * m.sqrt() * omega.eval(d_h)
}

/// `(2√(λM) + L√(M/α))·d_H` for f ≥ α > 0 with L-Lipschitz f.
pub fn stability_bound_lipschitz(lambda: f64, m: f64, l: f64, alpha: f64, d_h: f64) -> f64 {
    (2.0 * (lambda * m).sqrt() + l * (m / alpha).sqrt()) * d_h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize, h: f64) -> GridDomain {
        GridDomain::new(vec![n], vec![h], vec![0.0]).unwrap()
    }

    fn square(n: usize, h: f64, lo: f64) -> GridDomain {
        GridDomain::new(vec![n, n], vec![h, h], vec![lo, lo]).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let d = line(4, 1.0);
        let k = SampleMask::from_indices(d.clone(), &[0]).unwrap();
        let e = SampleMask::from_indices(d.clone(), &[3]).unwrap();
        assert_eq!(hausdorff_distance(&k, &k).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&k, &e).unwrap(), 3.0);
        let seg = SampleMask::from_indices(d.clone(), &[0, 1]).unwrap();
        let more = SampleMask::from_indices(d, &[0, 1, 2]).unwrap();
        assert_eq!(hausdorff_distance(&seg, &more).unwrap(), 1.0);
        let other = SampleMask::full(line(5, 1.0));
        assert!(matches!(hausdorff_distance(&seg, &other), Err(CcxError::DomainMismatch)));
    }

    #[test]
    fn density_examples() {
        let full = density_radius(&SampleMask::full(square(5, 0.5, 0.0)));
        assert!(full.r.iter().all(|r| *r == Some(0.0)));
        let d = line(11, 0.5);
        let k = SampleMask::from_indices(d, &[0]).unwrap();
        let field = density_radius(&k);
        assert_eq!(field.r[5], Some(2.5));
        // co[K] = {0}, so the summary is 0.
        assert_eq!(field.sup, 0.0);
    }

    #[test]
    fn density_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = GridDomain::new(vec![13, 9], vec![0.3, 0.7], vec![0.0, 0.0]).unwrap();
        let k = SampleMask::new(d.clone(), (0..d.len()).map(|_| rng.gen_bool(0.1)).collect()).unwrap();
        let field = density_radius(&k);
        for i in 0..d.len() {
            let brute = k
                .indices()
                .into_iter()
                .map(|j| d.dist2(i, j).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!((field.r[i].unwrap() - brute).abs() <= 1e-12);
        }
    }

    #[test]
    fn convex_sets_have_zero_radius() {
        let d = square(9, 0.25, -1.0);
        let k = SampleMask::from_fn(d.clone(), |x| x[0].abs() <= 0.5 && x[1].abs() <= 0.75).unwrap();
        let field = convex_density_field(&k);
        for i in 0..d.len() {
            if k.contains(i) {
                assert_eq!(field.r[i], Some(0.0));
            } else {
                assert!(field.r[i].is_none());
            }
        }
    }

    #[test]
    fn box_with_corners() {
        // Fine interior cloud plus the four corners of [-1, 1]².
        let d = square(17, 0.125, -1.0);
        let k = SampleMask::from_fn(d.clone(), |x| {
            (x[0].abs() <= 0.5 && x[1].abs() <= 0.5) || (x[0].abs() == 1.0 && x[1].abs() == 1.0)
        })
        .unwrap();
        let node = d.nearest_node(&[1.0, 0.0]).unwrap();
        assert_eq!(convex_density_radius(node, &k).unwrap(), 1.0);
    }

    #[test]
    fn two_point_radius_and_outside() {
        let d = line(3, 0.5);
        let k = SampleMask::from_indices(d.clone(), &[0, 2]).unwrap();
        assert_eq!(convex_density_radius(1, &k).unwrap(), 0.5);
        let k = SampleMask::from_indices(line(4, 1.0), &[0, 2]).unwrap();
        assert!(matches!(convex_density_radius(3, &k), Err(CcxError::OutsideHull)));
    }

    #[test]
    fn membership_examples() {
        let d = line(4, 1.0);
        let k = SampleMask::from_indices(d, &[0, 2]).unwrap();
        assert!(co_membership(0, &k));
        assert!(co_membership(1, &k));
        assert!(!co_membership(3, &k));
        let d = square(7, 1.0, 0.0);
        let tri = SampleMask::from_indices(
            d.clone(),
            &[d.linear_index(&[0, 0]), d.linear_index(&[6, 0]), d.linear_index(&[0, 6])],
        )
        .unwrap();
        assert!(co_membership(d.linear_index(&[2, 2]), &tri));
        assert!(!co_membership(d.linear_index(&[4, 4]), &tri));
        assert!(co_membership(d.linear_index(&[3, 3]), &tri));
    }

    #[test]
    fn three_d_membership() {
        let d = GridDomain::cube(3, 0.0, 1.0, 0.25).unwrap();
        let corners: Vec<usize> = [[0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0, 4]]
            .iter()
            .map(|m| d.linear_index(m))
            .collect();
        let k = SampleMask::from_indices(d.clone(), &corners).unwrap();
        let geo = MaskGeometry::new(k.clone());
        assert!(geo.contains(d.linear_index(&[1, 1, 1])));
        assert!(geo.contains(d.linear_index(&[2, 2, 0])));
        assert!(!geo.contains(d.linear_index(&[2, 2, 1])));
        assert_eq!(geo.convex_density_radius(d.linear_index(&[2, 0, 0])).unwrap(), 0.5);
    }

    #[test]
    fn distance_like_examples() {
        let d = line(13, 0.5);
        let k = SampleMask::from_indices(d.clone(), &[0]).unwrap();
        let f = GridFunction::constant(d.clone(), 1.0).unwrap();
        assert_eq!(dist_like(6, &k, &f, 1.0).unwrap(), 2.0);
        assert_eq!(dist_like(1, &k, &f, 1.0).unwrap(), -0.5);
        assert_eq!(big_d(6, &k, &f, 1.0).unwrap(), 0.0);
        assert_eq!(big_d(1, &k, &f, 1.0).unwrap(), 0.5);
        assert_eq!(big_d_squared_field(&k, &f, 1.0).unwrap().values()[1], 0.25);
        let zero = GridFunction::constant(d, 0.0).unwrap();
        assert!(dist_like(1, &k, &zero, 1.0).is_err());
    }

    #[test]
    fn stability_formulas() {
        let id = |t: f64| t;
        assert!((stability_bound(4.0, 1.0, &id, 0.1) - 0.6).abs() < 1e-12);
        assert_eq!(stability_bound(4.0, 1.0, &id, 0.0), 0.0);
        assert!((stability_bound_lipschitz(1.0, 1.0, 1.0, 1.0, 0.2) - 0.6).abs() < 1e-12);
    }

    fn random_mask(d: &GridDomain, p: f64, rng: &mut ChaCha8Rng) -> SampleMask {
        loop {
            if let Ok(m) = SampleMask::new(d.clone(), (0..d.len()).map(|_| rng.gen_bool(p)).collect()) {
                return m;
            }
        }
    }

    #[test]
    fn hausdorff_metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = square(12, 0.2, 0.0);
        for _ in 0..30 {
            let a = random_mask(&d, 0.1, &mut rng);
            let b = random_mask(&d, 0.1, &mut rng);
            let c = random_mask(&d, 0.1, &mut rng);
            let ab = hausdorff_distance(&a, &b).unwrap();
            assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
            assert_eq!(ab == 0.0, a == b);
            let ac = hausdorff_distance(&a, &c).unwrap();
            let cb = hausdorff_distance(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn distance_bounds_between_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = square(16, 0.125, 0.0);
        let lambda = 3.0;
        // √f = 1 + 0.5 sin(2x) is 1-Lipschitz.
        let f = GridFunction::from_fn(d.clone(), |x| (1.0 + 0.5 * (2.0 * x[0]).sin()).powi(2)).unwrap();
        let m = f.max_abs();
        let omega = |t: f64| t;
        for _ in 0..20 {
            let k = random_mask(&d, 0.15, &mut rng);
            let e = random_mask(&d, 0.15, &mut rng);
            let dh = hausdorff_distance(&k, &e).unwrap();
            let dk = big_d_squared_field(&k, &f, lambda).unwrap();
            let de = big_d_squared_field(&e, &f, lambda).unwrap();
            let bound = stability_bound(lambda, m, &omega, dh);
            for i in 0..d.len() {
                let gap = (dist_like(i, &k, &f, lambda).unwrap() - dist_like(i, &e, &f, lambda).unwrap()).abs();
                assert!(gap <= dh + omega(dh) / lambda.sqrt() + 1e-12);
                assert!((dk.values()[i] - de.values()[i]).abs() <= bound + 1e-12);
                assert!(dk.values()[i] <= m + 1e-12);
                if k.contains(i) {
                    assert!(dk.values()[i] >= f.values()[i] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn convex_radius_antitone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = square(10, 0.25, 0.0);
        for _ in 0..10 {
            let small = random_mask(&d, 0.15, &mut rng);
            let extra = random_mask(&d, 0.1, &mut rng);
            let big = small.union(&extra).unwrap();
            let fs = convex_density_field(&small);
            let fb = convex_density_field(&big);
            for i in 0..d.len() {
                if let Some(rs) = fs.r[i] {
                    assert!(fb.r[i].unwrap() <= rs);
                }
            }
        }
    }

    fn brute_convex_radius(d: &GridDomain, k: &SampleMask, node: usize) -> Option<f64> {
        let mut dists: Vec<f64> = k.indices().iter().map(|&j| d.dist2(node, j)).collect();
        dists.sort_by(f64::total_cmp);
        dists.dedup();
        for r2 in dists {
            let sub: Vec<usize> = k.indices().into_iter().filter(|&j| d.dist2(node, j) <= r2).collect();
            let pts: Vec<Vec<f64>> = sub.iter().map(|&j| d.coords_vec(j)).collect();
            let vals = vec![0.0; pts.len()];
            if crate::oracle::convex_envelope_value(&pts, &vals, &d.coords_vec(node)).is_ok() {
                return Some(r2.sqrt());
            }
        }
        None
    }

    proptest! {
        #[test]
        fn convex_radius_matches_lp(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = GridDomain::new(vec![7, 6], vec![0.5, 0.3], vec![0.0, 0.0]).unwrap();
            let k = random_mask(&d, 0.2, &mut rng);
            let field = convex_density_field(&k);
            for i in 0..d.len() {
                let brute = brute_convex_radius(&d, &k, i);
                match (field.r[i], brute) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    other => prop_assert!(false, "node {} mismatch {:?}", i, other),
                }
            }
        }

        #[test]
        fn angular_test_agrees_with_hull(pts in prop::collection::vec((-6i64..6, -6i64..6), 1..12), x in (-6i64..6, -6i64..6)) {
            let pts: Vec<[i64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let hull = convex_hull_2d(pts.clone());
            let offs: Vec<[i64; 3]> = pts.iter().map(|p| [p[0] - x.0, p[1] - x.1, 0]).collect();
            prop_assert_eq!(polygon_contains(&hull, [x.0, x.1]), hull_contains_origin(&offs, 2));
            prop_assert_eq!(lp_contains(&offs, [0, 0, 0], 2), hull_contains_origin(&offs, 2));
        }
    }
}
