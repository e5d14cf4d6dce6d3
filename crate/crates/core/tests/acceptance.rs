//! One PASS/FAIL line per acceptance criterion, each backed by the named
//! checks printed beneath it. Runs without the test harness so the table
//! is always printed.

use std::time::Instant;

use ccx_core::error::Result;
use ccx_core::experiments::*;
use ccx_core::fixtures::Fixture;
use ccx_core::report::Check;

const LAMBDAS: [f64; 4] = [1.0, 4.0, 16.0, 64.0];
const FIXTURES: [Fixture; 3] = [Fixture::Abs, Fixture::Quadratic, Fixture::Uc];

fn kernel() -> Result<Vec<Check>> {
    Ok(vec![kernel_exactness(1, 50)?])
}

fn spike() -> Result<Vec<Check>> {
    Ok(vec![spike_golden(1.0, 1.0, 0.25)?])
}

fn two_point() -> Result<Vec<Check>> {
    two_point_interpolation(0.125, 1.0, 100.0)
}

fn ordering() -> Result<Vec<Check>> {
    ordering_sandwich(4, 100)
}

fn complement() -> Result<Vec<Check>> {
    complement_identity(5, 50)
}

fn d2() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for lambda in [4.0, 16.0, 64.0] {
        out.extend(d2_identity(6, 10, lambda, 1.0 / 32.0)?);
    }
    Ok(out)
}

fn stability() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (lambda, trials) in [(4.0, 50), (16.0, 50)] {
        let s = StabilitySetup {
            fixture: Fixture::Positive.capped(1.0),
            lambda,
            h: 1.0 / 32.0,
            density: 0.05,
            delta: 3.0 / 32.0,
            trials,
            seed: 7,
            m: 1.0,
            tau: 10.0 * lambda,
            base: None,
        };
        out.extend(hausdorff_stability(&s)?);
    }
    Ok(out)
}

fn max_principle_run() -> Result<Vec<Check>> {
    Ok(vec![max_principle(8, 100)?])
}

fn error_bounds() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fx in FIXTURES {
        for lambda in LAMBDAS {
            out.extend(error_bounds_oracle(fx, lambda, 9, 0.125)?);
            let s = HoleSetup {
                fixture: fx,
                rho: 1.0,
                hole: 0.25,
                check_radius: 0.5,
                h: 1.0 / 32.0,
            };
            out.extend(error_bounds_hole(&s, lambda)?);
        }
    }
    for lambda in LAMBDAS {
        out.extend(error_bounds_ring(lambda, 1.25, 1.0 / 16.0, 9)?);
    }
    Ok(out)
}

fn regularity_run() -> Result<Vec<Check>> {
    regularity(10, 20, &[10.0, 100.0])
}

fn convergence_run() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fx in FIXTURES {
        out.extend(convergence(fx, 11, 1.0 / 32.0, (1.0, 256.0))?);
    }
    Ok(out)
}

fn locality_run() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fx in FIXTURES {
        for lambda in [4.0, 16.0, 64.0] {
            out.push(locality(fx, lambda, 1.0 / 16.0)?);
        }
    }
    Ok(out)
}

type Criterion = (&'static str, fn() -> Result<Vec<Check>>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("kernel exactness", kernel),
        ("unit spike golden", spike),
        ("two-point interpolation", two_point),
        ("ordering and sandwich", ordering),
        ("complement identity", complement),
        ("D^2 identity", d2),
        ("Hausdorff stability", stability),
        ("weak maximum principle", max_principle_run),
        ("error bounds", error_bounds),
        ("regularity", regularity_run),
        ("convergence", convergence_run),
        ("locality", locality_run),
    ];
    let mut failed = Vec::new();
    for (i, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = run();
        let secs = start.elapsed().as_secs_f64();
        match checks {
            Ok(checks) => {
                let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
                let worst = checks
                    .iter()
                    .filter(|c| c.bound > 0.0)
                    .map(|c| c.observed / c.bound)
                    .fold(0.0, f64::max);
                println!(
                    "{} criterion {:>2} {label}: {} checks, worst observed/bound {worst:.3e}, {secs:.2} s",
                    if pass { "PASS" } else { "FAIL" },
                    i + 1,
                    checks.len(),
                );
                for c in &checks {
                    println!(
                        "    {} {} observed {:.4e} bound {:.4e}{}",
                        if c.pass { "ok  " } else { "FAIL" },
                        c.name,
                        c.observed,
                        c.bound,
                        c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                    );
                }
                if !pass {
                    failed.push(i + 1);
                }
            }
            Err(e) => {
                println!("FAIL criterion {:>2} {label}: error {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
