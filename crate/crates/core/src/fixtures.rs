//! Analytic test functions with known regularity, and generators for the
//! sample sets used throughout the tests and the CLI.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CcxError, Result};
use crate::grid::{GridDomain, GridFunction, SampleMask, ScatteredSamples};

/// Built-in functions on ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// `|x|`: 1-Lipschitz.
    Abs,
    /// `|x|²`: gradient 2-Lipschitz.
    Quadratic,
    /// `sin(3 x₁)`: uniformly continuous with `ω(t) = 2 sin(min(3t, π)/2)`.
    Uc,
    /// `max(0, 1 − |x|)`: 1-Lipschitz, zero outside the unit ball.
    Tent,
    /// `1`: constant.
    One,
    /// `0.5 + 0.25 sin(2 x₁ + x₂)`: positive, with √f Lipschitz.
    Positive,
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::Abs => "abs",
            Fixture::Quadratic => "quadratic",
            Fixture::Uc => "uc",
            Fixture::Tent => "tent",
            Fixture::One => "one",
            Fixture::Positive => "positive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "abs" | "lipschitz" => Fixture::Abs,
            "quadratic" | "c11" => Fixture::Quadratic,
            "uc" | "sin" => Fixture::Uc,
            "tent" => Fixture::Tent,
            "one" => Fixture::One,
            "positive" => Fixture::Positive,
            _ => return Err(CcxError::InvalidParameter(format!("unknown fixture `{s}`"))),
        })
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            Fixture::Abs => r2.sqrt(),
            Fixture::Quadratic => r2,
            Fixture::Uc => (3.0 * x[0]).sin(),
            Fixture::Tent => (1.0 - r2.sqrt()).max(0.0),
            Fixture::One => 1.0,
            Fixture::Positive => {
                let y = x.get(1).copied().unwrap_or(0.0);
                0.5 + 0.25 * (2.0 * x[0] + y).sin()
            }
        }
    }

    pub fn grid(self, domain: &GridDomain) -> Result<GridFunction> {
        GridFunction::from_fn(domain.clone(), |x| self.eval(x))
    }

    /// Globally bounded version that agrees with `self` on `B(0, rho)`.
    pub fn capped(self, rho: f64) -> Capped {
        Capped { fixture: self, rho }
    }
}

/// A fixture made bounded on ℝⁿ by capping it outside `B(0, rho)`, so that
/// global constants (bound, Lipschitz, modulus) exist. Fixtures that are
/// already bounded are unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capped {
    pub fixture: Fixture,
    pub rho: f64,
}

impl Capped {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = x.iter().map(|v| v * v).sum::<f64>();
        let r = r2.sqrt();
        let rho = self.rho;
        match self.fixture {
            Fixture::Abs => r.min(rho),
            // r² up to rho, then bent down with curvature −2 to the constant
            // 2 rho² at 2 rho: the gradient stays 2-Lipschitz.
            Fixture::Quadratic => {
                if r <= rho {
                    r2
                } else if r <= 2.0 * rho {
                    let s = r - rho;
                    rho * rho + 2.0 * rho * s - s * s
                } else {
                    2.0 * rho * rho
                }
            }
            other => other.eval(x),
        }
    }

    pub fn grid(&self, domain: &GridDomain) -> Result<GridFunction> {
        GridFunction::from_fn(domain.clone(), |x| self.eval(x))
    }

    /// `sup |f|`.
    pub fn a0(&self) -> f64 {
        match self.fixture {
            Fixture::Abs => self.rho,
            Fixture::Quadratic => 2.0 * self.rho * self.rho,
            Fixture::Uc | Fixture::Tent | Fixture::One => 1.0,
            Fixture::Positive => 0.75,
        }
    }

    /// Global Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match self.fixture {
            Fixture::Abs | Fixture::Tent => 1.0,
            Fixture::Quadratic => 2.0 * self.rho,
            Fixture::Uc => 3.0,
            Fixture::One => 0.0,
            Fixture::Positive => 0.25 * 5f64.sqrt(),
        }
    }

    /// Lipschitz constant of the gradient, when it exists.
    pub fn c11(&self) -> Option<f64> {
        match self.fixture {
            Fixture::Quadratic => Some(2.0),
            Fixture::Uc => Some(9.0),
            Fixture::One => Some(0.0),
            Fixture::Positive => Some(1.25),
            Fixture::Abs | Fixture::Tent => None,
        }
    }

    /// Concave majorant of the modulus of continuity, with an affine bound
    /// `(a, b)`.
    pub fn modulus(&self) -> (Box<dyn Fn(f64) -> f64 + Send + Sync>, f64, f64) {
        let l = self.lipschitz();
        let osc = match self.fixture {
            Fixture::Abs => self.rho,
            Fixture::Quadratic => 2.0 * self.rho * self.rho,
            Fixture::Tent => 1.0,
            Fixture::Positive => 0.5,
            Fixture::One => 0.0,
            Fixture::Uc => {
                let omega = |t: f64| 2.0 * ((3.0 * t.max(0.0)).min(PI) / 2.0).sin();
                return (Box::new(omega), 3.0, 0.0);
            }
        };
        (Box::new(move |t: f64| (l * t.max(0.0)).min(osc)), l, 0.0)
    }

    /// Modulus of continuity of `√f` for positive fixtures.
    pub fn sqrt_modulus(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self.fixture {
            Fixture::One => Some(Box::new(|_| 0.0)),
            // |√a − √b| ≤ |a − b| / (2√min f) with min f = 1/4.
            Fixture::Positive => {
                let l = self.lipschitz();
                Some(Box::new(move |t: f64| l * t.max(0.0)))
            }
            _ => None,
        }
    }

    /// `inf f`.
    pub fn min_value(&self) -> f64 {
        match self.fixture {
            Fixture::Positive => 0.25,
            Fixture::One => 1.0,
            Fixture::Uc => -1.0,
            _ => 0.0,
        }
    }
}

/// The two-point data `K = {0, 1}`, `f = (0, 1)` on `[lo, hi]` with spacing h.
pub fn two_point(lo: f64, hi: f64, h: f64) -> Result<(GridFunction, SampleMask)> {
    let d = GridDomain::cube(1, lo, hi, h)?;
    let i0 = d.nearest_node(&[0.0]).ok_or_else(|| CcxError::GridTooSmall("0 not in grid".into()))?;
    let i1 = d.nearest_node(&[1.0]).ok_or_else(|| CcxError::GridTooSmall("1 not in grid".into()))?;
    let mut values = vec![0.0; d.len()];
    values[i1] = 1.0;
    Ok((GridFunction::new(d.clone(), values)?, SampleMask::from_indices(d, &[i0, i1])?))
}

pub fn two_point_samples() -> ScatteredSamples {
    ScatteredSamples::new(vec![vec![0.0], vec![1.0]], vec![0.0, 1.0]).expect("valid samples")
}

/// Unit spike of height `alpha` at the origin of `[-2, 2]` with spacing h.
pub fn spike(alpha: f64, h: f64) -> Result<GridFunction> {
    let d = GridDomain::cube(1, -2.0, 2.0, h)?;
    let c = d.nearest_node(&[0.0]).expect("origin is a node");
    let mut values = vec![0.0; d.len()];
    values[c] = alpha;
    GridFunction::new(d, values)
}

/// Fine cloud inside `[-1/2, 1/2]²` plus the four corners of `[-1, 1]²`.
pub fn box_with_corners(h: f64) -> Result<SampleMask> {
    let d = GridDomain::cube(2, -1.0, 1.0, h)?;
    SampleMask::from_fn(d, |x| {
        let corner = (x[0].abs() - 1.0).abs() < 1e-12 && (x[1].abs() - 1.0).abs() < 1e-12;
        corner || (x[0].abs() <= 0.5 && x[1].abs() <= 0.5)
    })
}

/// Mask of the nodes outside the open disk of radius `r` at the grid centre.
pub fn disk_hole(domain: &GridDomain, r: f64) -> Result<SampleMask> {
    let c = domain.center();
    let member = (0..domain.len())
        .map(|i| domain.dist2_to_point(i, &c) >= r * r)
        .collect();
    SampleMask::new(domain.clone(), member)
}

/// Each node kept independently with probability `p`; at least one node.
pub fn random_mask(domain: &GridDomain, p: f64, rng: &mut ChaCha8Rng) -> SampleMask {
    loop {
        let member: Vec<bool> = (0..domain.len()).map(|_| rng.gen_bool(p)).collect();
        if let Ok(m) = SampleMask::new(domain.clone(), member) {
            return m;
        }
    }
}

/// Moves every member node to a uniformly chosen node within distance
/// `delta`, so the Hausdorff distance to the result is at most `delta`.
pub fn dither(mask: &SampleMask, delta: f64, rng: &mut ChaCha8Rng) -> SampleMask {
    let d = mask.domain();
    let dim = d.dim();
    let reach: Vec<i64> = d.spacing().iter().map(|h| (delta / h).floor() as i64).collect();
    let mut member = vec![false; d.len()];
    for i in mask.indices() {
        let m = d.multi_index(i);
        loop {
            let mut target = [0usize; 3];
            let mut ok = true;
            for k in 0..dim {
                let off = if reach[k] > 0 { rng.gen_range(-reach[k]..=reach[k]) } else { 0 };
                let t = m[k] as i64 + off;
                if t < 0 || t >= d.shape()[k] as i64 {
                    ok = false;
                    break;
                }
                target[k] = t as usize;
            }
            if !ok {
                continue;
            }
            let j = d.linear_index(&target[..dim]);
            if d.dist2(i, j) <= delta * delta {
                member[j] = true;
                break;
            }
        }
    }
    SampleMask::new(d.clone(), member).expect("dithering keeps every point")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;

    #[test]
    fn moduli_dominate_sampled_differences() {
        let d = GridDomain::cube(2, -2.5, 2.5, 0.125).unwrap();
        for fx in [Fixture::Abs, Fixture::Quadratic, Fixture::Uc, Fixture::Tent, Fixture::Positive] {
            let c = fx.capped(1.0);
            let f = c.grid(&d).unwrap();
            let (omega, a, b) = c.modulus();
            assert!(f.max_abs() <= c.a0());
            for i in (0..d.len()).step_by(7) {
                for j in 0..d.len() {
                    let t = d.dist2(i, j).sqrt();
                    let diff = (f.values()[i] - f.values()[j]).abs();
                    assert!(diff <= omega(t) + 1e-12, "{fx:?}");
                    assert!(omega(t) <= a * t + b + 1e-12);
                    assert!(diff <= c.lipschitz() * t + 1e-12);
                }
            }
        }
    }

    #[test]
    fn capped_agrees_inside_the_ball() {
        for fx in [Fixture::Abs, Fixture::Quadratic] {
            let c = fx.capped(1.5);
            for x in [[0.0, 0.0], [1.0, -1.0], [0.3, 1.4]] {
                assert_eq!(c.eval(&x), fx.eval(&x));
            }
        }
    }

    #[test]
    fn capped_quadratic_descent_inequality() {
        // |f(y) − f(x) − ∇f(x)·(y − x)| ≤ L/2 |y − x|² characterises an
        // L-Lipschitz gradient.
        let c = Fixture::Quadratic.capped(1.0);
        let grad = |x: &[f64; 2]| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let dphi = if r <= 1.0 { 2.0 * r } else if r <= 2.0 { 2.0 - 2.0 * (r - 1.0) } else { 0.0 };
            if r == 0.0 { [0.0, 0.0] } else { [dphi * x[0] / r, dphi * x[1] / r] }
        };
        let mut rng = rng(5);
        for _ in 0..20000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let y = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let g = grad(&x);
            let lin = c.eval(&x) + g[0] * (y[0] - x[0]) + g[1] * (y[1] - x[1]);
            let d2 = (y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2);
            assert!((c.eval(&y) - lin).abs() <= d2 + 1e-12);
        }
    }

    #[test]
    fn two_point_data() {
        let (f, k) = two_point(-1.0, 2.0, 0.125).unwrap();
        assert_eq!(k.count(), 2);
        assert_eq!(f.values().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn box_example_shape() {
        let k = box_with_corners(0.125).unwrap();
        assert_eq!(k.count(), 81 + 4);
    }

    #[test]
    fn dither_respects_delta() {
        let d = GridDomain::cube(2, 0.0, 1.0, 1.0 / 32.0).unwrap();
        let mut r = rng(3);
        let k = random_mask(&d, 0.05, &mut r);
        for _ in 0..10 {
            let e = dither(&k, 0.1, &mut r);
            assert!(hausdorff_distance(&k, &e).unwrap() <= 0.1 + 1e-12);
        }
        assert_eq!(dither(&k, 0.0, &mut r), k);
    }
}
