//! Compensated convex transforms through the critical mixed Moreau
//! envelopes: `C^l_λ = M^λ ∘ M_λ` and `C^u_λ = M_λ ∘ M^λ`.

use crate::error::Result;
use crate::grid::GridFunction;
use crate::moreau::{lower_moreau, upper_moreau, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedKind {
    /// `C^u_τ(C^l_λ(f))`
    UpperOfLower,
    /// `C^l_τ(C^u_λ(f))`
    LowerOfUpper,
}

/// Lower transform `C^l_λ(f)`; never above f.
pub fn lower_transform(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    lower_transform_windowed(f, lambda, None)
}

pub fn lower_transform_windowed(
    f: &GridFunction,
    lambda: f64,
    window: Option<&Window>,
) -> Result<GridFunction> {
    let g = upper_moreau(&lower_moreau(f, lambda, window)?, lambda, window)?;
    // Exactly C^l <= f; the clamp only removes last-bit rounding.
    g.zip_with(f, f64::min)
}

/// Upper transform `C^u_λ(f)`; never below f.
pub fn upper_transform(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    upper_transform_windowed(f, lambda, None)
}

pub fn upper_transform_windowed(
    f: &GridFunction,
    lambda: f64,
    window: Option<&Window>,
) -> Result<GridFunction> {
    let g = lower_moreau(&upper_moreau(f, lambda, window)?, lambda, window)?;
    g.zip_with(f, f64::max)
}

pub fn mixed_transform(
    f: &GridFunction,
    lambda: f64,
    tau: f64,
    kind: MixedKind,
) -> Result<GridFunction> {
    match kind {
        MixedKind::UpperOfLower => upper_transform(&lower_transform(f, lambda)?, tau),
        MixedKind::LowerOfUpper => lower_transform(&upper_transform(f, lambda)?, tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use proptest::prelude::*;

    fn line(lo: f64, hi: f64, h: f64) -> GridDomain {
        GridDomain::cube(1, lo, hi, h).unwrap()
    }

    #[test]
    fn convex_quadratic_is_fixed_by_lower_transform() {
        let d = line(-2.0, 2.0, 0.25);
        let f = GridFunction::from_fn(d, |x| x[0] * x[0]).unwrap();
        let g = lower_transform(&f, 1.0).unwrap();
        // The supporting node x + f'(x)/(2λ) = 2x lies on the grid iff |x| <= 1.
        for i in 0..f.len() {
            if f.domain().coords(i)[0].abs() <= 1.0 {
                assert!((g.values()[i] - f.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_are_fixed() {
        let d = GridDomain::cube(2, 0.0, 1.0, 0.125).unwrap();
        let f = GridFunction::constant(d, -2.5).unwrap();
        for g in [
            lower_transform(&f, 3.0).unwrap(),
            upper_transform(&f, 3.0).unwrap(),
            mixed_transform(&f, 3.0, 7.0, MixedKind::UpperOfLower).unwrap(),
            mixed_transform(&f, 3.0, 7.0, MixedKind::LowerOfUpper).unwrap(),
        ] {
            assert!(g.values().iter().all(|&v| v == -2.5));
        }
    }

    #[test]
    fn two_point_chord() {
        // K = {0, 1}, f = (0, 1), extension M = 100: chord 2x on [0,1], minus x².
        let d = line(-2.0, 2.0, 0.25);
        let f = GridFunction::from_fn(d.clone(), |x| match x[0] {
            0.0 => 0.0,
            1.0 => 1.0,
            _ => 100.0,
        })
        .unwrap();
        let g = lower_transform(&f, 1.0).unwrap();
        for i in 0..d.len() {
            let x = d.coords(i)[0];
            if (0.0..=1.0).contains(&x) {
                assert!((g.values()[i] - (2.0 * x - x * x)).abs() < 1e-12, "x = {x}");
            }
        }
    }

    #[test]
    fn unit_spike_closed_form() {
        let d = line(-2.0, 2.0, 0.25);
        let f = GridFunction::from_fn(d.clone(), |x| if x[0] == 0.0 { 1.0 } else { 0.0 }).unwrap();
        let g = upper_transform(&f, 1.0).unwrap();
        for (r, expect) in [(0.0, 1.0), (0.5, 0.25), (1.0, 0.0), (1.5, 0.0)] {
            let i = d.nearest_node(&[r]).unwrap();
            assert!((g.values()[i] - expect).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ordering_and_duality(values in prop::collection::vec(-5.0f64..5.0, 36), lambda in 0.1f64..10.0) {
            let d = GridDomain::new(vec![6, 6], vec![0.5, 0.5], vec![0.0, 0.0]).unwrap();
            let f = GridFunction::new(d, values).unwrap();
            let lo = lower_transform(&f, lambda).unwrap();
            let up = upper_transform(&f, lambda).unwrap();
            let dual = lower_transform(&f.neg(), lambda).unwrap().neg();
            for i in 0..f.len() {
                prop_assert!(lo.values()[i] <= f.values()[i]);
                prop_assert!(f.values()[i] <= up.values()[i]);
                prop_assert!((up.values()[i] - dual.values()[i]).abs() <= 1e-12 * (1.0 + f.max_abs()));
            }
        }

        #[test]
        fn monotone_in_data(values in prop::collection::vec(-5.0f64..5.0, 30), bump in prop::collection::vec(0.0f64..2.0, 30)) {
            let d = GridDomain::new(vec![30], vec![0.2], vec![0.0]).unwrap();
            let f = GridFunction::new(d.clone(), values.clone()).unwrap();
            let g = GridFunction::new(d, values.iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
            let (lf, lg) = (lower_transform(&f, 2.0).unwrap(), lower_transform(&g, 2.0).unwrap());
            let (uf, ug) = (upper_transform(&f, 2.0).unwrap(), upper_transform(&g, 2.0).unwrap());
            for i in 0..f.len() {
                prop_assert!(lf.values()[i] <= lg.values()[i] + 1e-12);
                prop_assert!(uf.values()[i] <= ug.values()[i] + 1e-12);
            }
        }

        #[test]
        fn mixed_sandwich(values in prop::collection::vec(-3.0f64..3.0, 40), lambda in 0.5f64..4.0, ratio in 1.0f64..50.0) {
            let d = GridDomain::new(vec![40], vec![0.1], vec![0.0]).unwrap();
            let f = GridFunction::new(d, values).unwrap();
            let m = f.max_abs().max(1e-9);
            let tau = lambda * ratio;
            let lo = lower_transform(&f, lambda).unwrap();
            let mixed = mixed_transform(&f, lambda, tau, MixedKind::UpperOfLower).unwrap();
            for i in 0..f.len() {
                let gap = mixed.values()[i] - lo.values()[i];
                prop_assert!(gap >= 0.0);
                prop_assert!(gap <= 16.0 * m * lambda / tau + 1e-9 * (1.0 + m));
            }
        }
    }

    #[test]
    fn affine_shift_on_lattice() {
        // ℓ(x) = 2λh·x shifts optimisers by exactly one node.
        let lambda = 2.0;
        let h = 0.25;
        let d = line(-10.0, 10.0, h);
        let f = GridFunction::from_fn(d.clone(), |x| (3.0 * x[0]).sin()).unwrap();
        let slope = 2.0 * lambda * h;
        let g = f
            .zip_with(&GridFunction::from_fn(d.clone(), |x| slope * x[0]).unwrap(), |a, b| a + b)
            .unwrap();
        let lf = lower_transform(&f, lambda).unwrap();
        let lg = lower_transform(&g, lambda).unwrap();
        let m = f.max_abs().max(g.max_abs());
        let radius = (crate::moreau::locality_radius(m, lambda) / h).ceil() as usize + 2;
        assert!(2 * radius < d.len());
        for i in radius..d.len() - radius {
            let x = d.coords(i)[0];
            assert!((lg.values()[i] - (lf.values()[i] + slope * x)).abs() < 1e-9);
        }
    }

    #[test]
    fn composition_rule_for_tau_at_least_lambda() {
        // On the lattice the identity holds up to λh².
        let lambda = 2.0;
        for h in [0.125, 0.0625, 0.03125] {
            let d = line(-2.0, 2.0, h);
            let f = GridFunction::from_fn(d, |x| (4.0 * x[0]).cos() + 0.3 * x[0]).unwrap();
            let once = upper_transform(&f, lambda).unwrap();
            for tau in [2.0, 5.0, 40.0] {
                let twice = upper_transform(&once, tau).unwrap();
                assert!(twice.sup_distance(&once).unwrap() <= lambda * h * h * (1.0 + 1e-9));
            }
            let lo = lower_transform(&f, lambda).unwrap();
            let twice = lower_transform(&lo, 2.0 * lambda).unwrap();
            assert!(twice.sup_distance(&lo).unwrap() <= lambda * h * h * (1.0 + 1e-9));
        }
    }
}
