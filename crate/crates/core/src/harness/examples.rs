//! Built-in scenarios for the four reference experiments.
//!
//! Examples 1 and 2 place observations in explicit rectangles chosen so that
//! midpoint splitting reproduces the published post-split loads. These are
//! reconstructions; the original placements are not known.

use super::scenario::{skewed_counts, Distribution, Region, Scenario, Topology};
use crate::balance::Rect;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_200_917;

/// Number of cases of `example` (1 to 4).
pub fn example_case_count(example: u8) -> Option<usize> {
    match example {
        1 => Some(2),
        2 => Some(4),
        3 | 4 => Some(5),
        _ => None,
    }
}

fn region(x0: f64, y0: f64, x1: f64, y1: f64, count: u64) -> Region {
    Region {
        rect: Rect::new(x0, y0, x1, y1).expect("static region is valid"),
        count,
    }
}

fn regions(list: Vec<Region>) -> Distribution {
    Distribution::Regions { regions: list }
}

/// Scenario for `example` and 1-based `case`.
pub fn example_scenario(example: u8, case: usize, seed: u64) -> Result<Scenario> {
    let cases = example_case_count(example)
        .ok_or_else(|| Error::InvalidScenario(format!("no example {example}")))?;
    if case == 0 || case > cases {
        return Err(Error::InvalidScenario(format!(
            "example {example} has cases 1 to {cases}"
        )));
    }
    let (n, m, p, topology, distribution) = match (example, case) {
        (1, 1) => (2048, 1500, 2, Topology::Pair, Distribution::Weighted { counts: vec![1000, 500] }),
        (1, _) => (
            2048,
            1500,
            2,
            Topology::Pair,
            regions(vec![region(0.0, 0.0, 1.0, 1.0, 1000), region(1.0, 0.0, 2.0, 1.0, 500)]),
        ),
        (2, 1) => (2048, 1500, 4, Topology::Grid, Distribution::Weighted { counts: vec![150, 300, 450, 600] }),
        (2, 2) => (
            2048,
            1500,
            4,
            Topology::Grid,
            regions(vec![
                region(0.0, 1.5, 0.5, 2.0, 225),
                region(0.5, 1.5, 1.0, 2.0, 225),
                region(1.0, 0.0, 2.0, 1.5, 450),
                region(0.0, 0.0, 1.0, 1.5, 600),
            ]),
        ),
        (2, 3) => (
            2048,
            1500,
            4,
            Topology::Grid,
            regions(vec![
                region(1.0, 0.75, 2.0, 1.5, 450),
                region(1.0, 0.0, 2.0, 0.75, 450),
                region(0.0, 0.75, 1.0, 1.5, 300),
                region(0.0, 0.0, 1.0, 0.75, 300),
            ]),
        ),
        (2, _) => (
            2048,
            1500,
            4,
            Topology::Grid,
            regions(vec![
                region(0.0, 0.75, 1.0, 1.375, 500),
                region(0.0, 1.375, 1.0, 1.5, 250),
                region(0.5, 0.0, 1.0, 0.75, 250),
                region(0.0, 0.0, 0.5, 0.75, 500),
            ]),
        ),
        (3, c) => {
            let p = 1usize << c;
            let counts = skewed_counts(1032, p, seed);
            (1024, 1032, p, Topology::Star, Distribution::Weighted { counts })
        }
        (_, c) => {
            let p = 1usize << c;
            let counts = skewed_counts(2000, p, seed);
            (2048, 2000, p, Topology::Chain, Distribution::Weighted { counts })
        }
    };
    let sc = Scenario {
        name: Some(format!("ex{example}-case{case}")),
        n,
        m,
        p,
        topology,
        distribution,
        seed,
        s: 2,
        mu: 1.0,
        tol: crate::dd::DEFAULT_TOL,
        max_iter: crate::dd::DEFAULT_MAX_ITER,
        max_rounds: crate::balance::DEFAULT_MAX_ROUNDS,
    };
    sc.validate()?;
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_validates() {
        for ex in 1..=4 {
            for case in 1..=example_case_count(ex).unwrap() {
                let sc = example_scenario(ex, case, DEFAULT_SEED).unwrap();
                assert!(sc.name.unwrap().starts_with("ex"));
            }
        }
        assert!(example_scenario(5, 1, 0).is_err());
        assert!(example_scenario(1, 3, 0).is_err());
    }
}
