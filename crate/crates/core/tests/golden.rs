//! Generated fixture files under `tests/data`. `CCX_BLESS=1` rewrites them
//! from the generators below; otherwise the files must match byte for byte.

use std::path::PathBuf;

use ccx_core::fixtures::{self, Fixture};
use ccx_core::grid::GridDomain;
use ccx_core::io::{grid_from_str, grid_to_string, mask_to_grid, samples_to_csv};
use ccx_core::oracle::closed_form_upper_single;
use ccx_core::transforms::upper_transform;

pub const HOLE_WINDOW: f64 = 3.0;
pub const HOLE_RADIUS: f64 = 0.375;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

fn generate() -> Vec<(&'static str, String)> {
    let square = GridDomain::cube(2, -1.0, 1.0, 0.125).unwrap();
    let mut out = Vec::new();
    for (name, fx) in [
        ("abs.ccxgrid", Fixture::Abs),
        ("quadratic.ccxgrid", Fixture::Quadratic),
        ("uc.ccxgrid", Fixture::Uc),
    ] {
        out.push((name, grid_to_string(&fx.grid(&square).unwrap())));
    }
    out.push(("two_point.csv", format!("x,value\n{}", samples_to_csv(&fixtures::two_point_samples()))));
    let spike = fixtures::spike(1.0, 0.25).unwrap();
    out.push(("spike.ccxgrid", grid_to_string(&spike)));
    out.push(("spike_upper.ccxgrid", grid_to_string(&upper_transform(&spike, 1.0).unwrap())));
    out.push((
        "box_with_corners.ccxgrid",
        grid_to_string(&mask_to_grid(&fixtures::box_with_corners(0.125).unwrap())),
    ));
    let window = GridDomain::cube(2, -HOLE_WINDOW, HOLE_WINDOW, 0.125).unwrap();
    out.push((
        "hole_abs.ccxgrid",
        grid_to_string(&Fixture::Abs.capped(1.0).grid(&window).unwrap()),
    ));
    out.push((
        "hole_mask.ccxgrid",
        grid_to_string(&mask_to_grid(&fixtures::disk_hole(&window, HOLE_RADIUS).unwrap())),
    ));
    out
}

#[test]
fn data_files_match_generators() {
    let dir = data_dir();
    let bless = std::env::var("CCX_BLESS").is_ok_and(|v| v == "1");
    if bless {
        std::fs::create_dir_all(&dir).unwrap();
    }
    for (name, text) in generate() {
        let path = dir.join(name);
        if bless {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let stored = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}; run with CCX_BLESS=1", path.display()));
        assert_eq!(stored, text, "{name} differs from its generator");
    }
}

#[test]
fn spike_golden_matches_closed_form() {
    let text = std::fs::read_to_string(data_dir().join("spike_upper.ccxgrid")).unwrap();
    let g = grid_from_str(&text).unwrap();
    for i in 0..g.len() {
        let x = g.domain().coords_vec(i);
        let exact = closed_form_upper_single(1.0, 1.0, &[0.0], &x);
        assert!((g.values()[i] - exact).abs() <= 1e-9, "node {i}: {} vs {exact}", g.values()[i]);
    }
}
