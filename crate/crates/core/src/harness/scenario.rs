use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::balance::{Point, Rect, SpatialDecomposition};
use crate::dd::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::balance::DEFAULT_MAX_ROUNDS;
use crate::error::{Error, Result};
use crate::estimation::ClsProblem;
use crate::linalg::{DenseMatrix, DenseVector, WeightMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Two strips side by side.
    Pair,
    /// 2 × 2 cells whose graph is the cycle 1–2–3–4–1.
    Grid,
    /// `p` strips in a row.
    Chain,
    /// Subdomain 1 touches every other subdomain; the others touch only 1.
    Star,
}

/// Observations `count` placed uniformly in `rect`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub rect: Rect,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// `m` split as evenly as possible over the subdomains.
    Uniform,
    /// Explicit per-subdomain counts summing to `m`.
    Weighted { counts: Vec<u64> },
    /// Listed subdomains (1-based) start empty; the rest share `m` evenly.
    Empty { empty_ids: Vec<usize> },
    /// Explicit placement rectangles, independent of the cells.
    Regions { regions: Vec<Region> },
}

fn default_mu() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_max_rounds() -> usize {
    DEFAULT_MAX_ROUNDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// State dimension.
    pub n: usize,
    /// Observation count.
    pub m: u64,
    /// Subdomain count.
    pub p: usize,
    pub topology: Topology,
    pub distribution: Distribution,
    pub seed: u64,
    /// Overlap width of neighbouring column ranges.
    #[serde(default)]
    pub s: usize,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario =
            serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.p == 0 || self.n == 0 {
            return bad("n and p must be positive".into());
        }
        match self.topology {
            Topology::Pair if self.p != 2 => return bad("pair topology needs p = 2".into()),
            Topology::Grid if self.p != 4 => return bad("grid topology needs p = 4".into()),
            Topology::Star if self.p < 2 => return bad("star topology needs p >= 2".into()),
            _ => {}
        }
        if self.n / self.p < self.s + 2 {
            return bad(format!(
                "{} columns over {} subdomains leave no room for overlap {}",
                self.n, self.p, self.s
            ));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("tol > 0, max_iter >= 1 and finite mu >= 0 required".into());
        }
        match &self.distribution {
            Distribution::Uniform => {
                if self.m < self.p as u64 {
                    return Err(Error::InfeasibleDistribution(format!(
                        "{} observations for {} subdomains",
                        self.m, self.p
                    )));
                }
            }
            Distribution::Weighted { counts } => {
                if counts.len() != self.p {
                    return Err(Error::InfeasibleDistribution(format!(
                        "{} counts for {} subdomains",
                        counts.len(),
                        self.p
                    )));
                }
                if counts.iter().sum::<u64>() != self.m {
                    return Err(Error::InfeasibleDistribution("counts do not sum to m".into()));
                }
            }
            Distribution::Empty { empty_ids } => {
                if empty_ids.iter().any(|&i| i == 0 || i > self.p) {
                    return bad("empty ids are 1-based and at most p".into());
                }
                let mut ids = empty_ids.clone();
                ids.sort_unstable();
                ids.dedup();
                if ids.len() >= self.p || self.m < (self.p - ids.len()) as u64 {
                    return Err(Error::InfeasibleDistribution(
                        "not enough observations for the non-empty subdomains".into(),
                    ));
                }
            }
            Distribution::Regions { regions } => {
                if regions.iter().map(|r| r.count).sum::<u64>() != self.m {
                    return Err(Error::InfeasibleDistribution("region counts do not sum to m".into()));
                }
                let (domain, _, _) = geometry(self.topology, self.p);
                for r in regions {
                    let rect = Rect::new(r.rect.x0, r.rect.y0, r.rect.x1, r.rect.y1)?;
                    if rect.clip(&domain) != Some(rect) {
                        return bad(format!("region {rect:?} leaves the domain"));
                    }
                }
            }
        }
        if self.m == 0 {
            return Err(Error::InfeasibleDistribution("no observations".into()));
        }
        Ok(())
    }

    /// `m0 = n + max(1, n/4)` rows in the state block.
    pub fn m0(&self) -> usize {
        self.n + (self.n / 4).max(1)
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
    Rect::new(x0, y0, x1, y1).expect("static geometry is valid")
}

/// Domain, cells and processor edges (0-based) for a topology.
pub fn geometry(topology: Topology, p: usize) -> (Rect, Vec<Vec<Rect>>, Vec<(usize, usize)>) {
    match topology {
        Topology::Pair | Topology::Chain => {
            let cells = (0..p)
                .map(|i| vec![rect(2.0 * i as f64, 0.0, 2.0 * (i + 1) as f64, 1.0)])
                .collect();
            let edges = (1..p).map(|i| (i - 1, i)).collect();
            (rect(0.0, 0.0, 2.0 * p as f64, 1.0), cells, edges)
        }
        Topology::Grid => {
            let cells = vec![
                vec![rect(0.0, 1.5, 1.0, 2.0)],
                vec![rect(1.0, 1.5, 2.0, 2.0)],
                vec![rect(1.0, 0.0, 2.0, 1.5)],
                vec![rect(0.0, 0.0, 1.0, 1.5)],
            ];
            (rect(0.0, 0.0, 2.0, 2.0), cells, vec![(0, 1), (1, 2), (2, 3), (0, 3)])
        }
        Topology::Star => {
            // Hub: bottom band plus the gaps between the leaves.
            let leaves = p - 1;
            let w = leaves as f64;
            let gap = 0.05;
            let mut hub = vec![rect(0.0, 0.0, w, 1.0)];
            let mut cells = Vec::with_capacity(p);
            let mut x = 0.0;
            for k in 0..leaves {
                let left = k as f64 + gap;
                hub.push(rect(x, 1.0, left, 1.5));
                let right = (k + 1) as f64 - gap;
                cells.push(vec![rect(left, 1.0, right, 1.5)]);
                x = right;
            }
            hub.push(rect(x, 1.0, w, 1.5));
            cells.insert(0, hub);
            let edges = (1..p).map(|k| (0, k)).collect();
            (rect(0.0, 0.0, w, 1.5), cells, edges)
        }
    }
}

fn sample_in(rects: &[Rect], count: u64, rng: &mut ChaCha8Rng, out: &mut Vec<Point>) {
    let total: f64 = rects.iter().map(Rect::area).sum();
    for _ in 0..count {
        let mut pick = rng.gen_range(0.0..total);
        let mut r = rects[rects.len() - 1];
        for cand in rects {
            if pick < cand.area() {
                r = *cand;
                break;
            }
            pick -= cand.area();
        }
        out.push(Point::new(rng.gen_range(r.x0..r.x1), rng.gen_range(r.y0..r.y1)));
    }
}

fn even_split(m: u64, slots: usize) -> Vec<u64> {
    let base = m / slots as u64;
    let extra = (m % slots as u64) as usize;
    (0..slots).map(|i| base + u64::from(i < extra)).collect()
}

/// Seeded counts with every entry at least 1, drawn with relative weights in `[0.25, 1.75)`.
pub fn skewed_counts(m: u64, p: usize, seed: u64) -> Vec<u64> {
    assert!(m >= p as u64, "need at least one observation per subdomain");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let w: Vec<f64> = (0..p).map(|_| rng.gen_range(0.25..1.75)).collect();
    let total: f64 = w.iter().sum();
    let spare = m - p as u64;
    let mut counts: Vec<u64> = w.iter().map(|wi| 1 + (spare as f64 * wi / total) as u64).collect();
    let mut short = m - counts.iter().sum::<u64>();
    let mut i = 0;
    while short > 0 {
        counts[i % p] += 1;
        short -= 1;
        i += 1;
    }
    counts
}

/// Mesh `nx × ny = n` whose aspect ratio is closest to the domain's.
fn mesh_shape(n: usize, domain: &Rect) -> (usize, usize) {
    let aspect = domain.width() / domain.height();
    (1..=n)
        .filter(|nx| n % nx == 0)
        .min_by(|&a, &b| {
            let da = ((a * a) as f64 / n as f64 / aspect).ln().abs();
            let db = ((b * b) as f64 / n as f64 / aspect).ln().abs();
            da.total_cmp(&db)
        })
        .map(|nx| (nx, n / nx))
        .expect("n >= 1")
}

/// State index (x-major) of the mesh node nearest to `pt`.
fn nearest_state(pt: Point, domain: &Rect, nx: usize, ny: usize) -> usize {
    let cell = |v: f64, lo: f64, len: f64, k: usize| -> usize {
        (((v - lo) / len * k as f64).floor().max(0.0) as usize).min(k - 1)
    };
    let ix = cell(pt.x, domain.x0, domain.width(), nx);
    let iy = cell(pt.y, domain.y0, domain.height(), ny);
    ix * ny + iy
}

/// Builds the CLS problem and the spatial decomposition described by `sc`.
///
/// Deterministic in `sc.seed`.
pub fn generate_scenario(sc: &Scenario) -> Result<(ClsProblem, SpatialDecomposition)> {
    sc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let (domain, cells, edges) = geometry(sc.topology, sc.p);

    let mut points = Vec::with_capacity(sc.m as usize);
    match &sc.distribution {
        Distribution::Uniform => {
            for (c, count) in cells.iter().zip(even_split(sc.m, sc.p)) {
                sample_in(c, count, &mut rng, &mut points);
            }
        }
        Distribution::Weighted { counts } => {
            for (c, &count) in cells.iter().zip(counts) {
                sample_in(c, count, &mut rng, &mut points);
            }
        }
        Distribution::Empty { empty_ids } => {
            let full: Vec<usize> = (0..sc.p).filter(|i| !empty_ids.contains(&(i + 1))).collect();
            for (&i, count) in full.iter().zip(even_split(sc.m, full.len())) {
                sample_in(&cells[i], count, &mut rng, &mut points);
            }
        }
        Distribution::Regions { regions } => {
            for r in regions {
                sample_in(&[r.rect], r.count, &mut rng, &mut points);
            }
        }
    }

    let (n, m0, m1) = (sc.n, sc.m0(), points.len());
    let (nx, ny) = mesh_shape(n, &domain);
    let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let boost = 2.0 * (n as f64).sqrt() + 1.0;
    let mut h0 = DenseMatrix::zeros(m0, n);
    for (i, v) in h0.as_mut_slice().iter_mut().enumerate() {
        *v = rng.gen_range(-1.0..1.0);
        if i / n == i % n {
            *v += boost;
        }
    }
    let mut h1 = DenseMatrix::zeros(m1, n);
    for (r, pt) in points.iter().enumerate() {
        h1[(r, nearest_state(*pt, &domain, nx, ny))] = 1.0;
    }
    let mut noisy = |h: &DenseMatrix| -> Result<DenseVector> {
        let clean = h.matvec(&x_true)?;
        DenseVector::new(clean.into_iter().map(|v| v + rng.gen_range(-1e-3..1e-3)).collect())
    };
    let y0 = noisy(&h0)?;
    let y1 = noisy(&h1)?;
    let prob = ClsProblem::new(
        h0,
        y0,
        h1,
        y1,
        WeightMatrix::identity(m0),
        WeightMatrix::identity(m1),
    )?;
    let deco = SpatialDecomposition::new(domain, cells, &edges, points)?;
    Ok((prob, deco))
}
