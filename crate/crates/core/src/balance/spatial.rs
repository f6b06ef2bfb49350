use serde::{Deserialize, Serialize};

use super::graph::{BalanceSchedule, ProcessorGraph};
use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, y0, x1, y1 };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite());
        if !finite || self.x0 >= self.x1 || self.y0 >= self.y1 {
            return Err(Error::InvalidScenario(format!("degenerate rectangle {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Intersection with positive area.
    pub fn clip(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x1 - r.x0 > EPS && r.y1 - r.y0 > EPS).then_some(r)
    }

    pub fn distance(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.x).max(p.x - self.x1).max(0.0);
        let dy = (self.y0 - p.y).max(p.y - self.y1).max(0.0);
        dx.hypot(dy)
    }

    fn bounding(rects: &[Rect]) -> Option<Rect> {
        let first = *rects.first()?;
        Some(rects.iter().fold(first, |b, r| Rect {
            x0: b.x0.min(r.x0),
            y0: b.y0.min(r.y0),
            x1: b.x1.max(r.x1),
            y1: b.y1.max(r.y1),
        }))
    }
}

/// Common edge of two touching rectangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b.x - self.a.x).hypot(self.b.y - self.a.y)
    }

    pub fn is_vertical(&self) -> bool {
        self.a.x == self.b.x
    }

    pub fn distance(&self, p: Point) -> f64 {
        let (dx, dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (p.x - self.a.x - t * dx).hypot(p.y - self.a.y - t * dy)
    }
}

fn touching(r: &Rect, s: &Rect) -> Option<Segment> {
    let vertical = if (r.x1 - s.x0).abs() < EPS {
        Some(r.x1)
    } else if (r.x0 - s.x1).abs() < EPS {
        Some(r.x0)
    } else {
        None
    };
    if let Some(x) = vertical {
        let (lo, hi) = (r.y0.max(s.y0), r.y1.min(s.y1));
        if hi - lo > EPS {
            return Some(Segment {
                a: Point::new(x, lo),
                b: Point::new(x, hi),
            });
        }
    }
    let horizontal = if (r.y1 - s.y0).abs() < EPS {
        Some(r.y1)
    } else if (r.y0 - s.y1).abs() < EPS {
        Some(r.y0)
    } else {
        None
    };
    if let Some(y) = horizontal {
        let (lo, hi) = (r.x0.max(s.x0), r.x1.min(s.x1));
        if hi - lo > EPS {
            return Some(Segment {
                a: Point::new(lo, y),
                b: Point::new(hi, y),
            });
        }
    }
    None
}

/// One splitting event: `empty` adopted half of `from`'s cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub empty: usize,
    pub from: usize,
}

/// Rectangular domain tiled by cells (unions of rectangles) with a fixed
/// processor graph and point ownership.
///
/// The owner list is authoritative. Cell geometry follows splits exactly and
/// follows migrations as boundary slabs, which may be approximate when a
/// cell is not a single rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialDecomposition {
    domain: Rect,
    cells: Vec<Vec<Rect>>,
    edges: Vec<(usize, usize)>,
    points: Vec<Point>,
    owner: Vec<usize>,
}

impl SpatialDecomposition {
    /// Validates the tiling and assigns every point to the lowest-id cell containing it.
    pub fn new(
        domain: Rect,
        cells: Vec<Vec<Rect>>,
        edges: &[(usize, usize)],
        points: Vec<Point>,
    ) -> Result<Self> {
        domain.validate()?;
        let p = cells.len();
        ProcessorGraph::new(p, edges, vec![0; p.max(1)])
            .map_err(|e| Error::InvalidScenario(format!("processor graph: {e}")))?;
        let all: Vec<(usize, Rect)> = cells
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |r| (i, *r)))
            .collect();
        if cells.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidScenario("every cell needs a rectangle".into()));
        }
        let mut area = 0.0;
        for (k, (i, r)) in all.iter().enumerate() {
            r.validate()?;
            if r.x0 < domain.x0 - EPS || r.x1 > domain.x1 + EPS || r.y0 < domain.y0 - EPS || r.y1 > domain.y1 + EPS {
                return Err(Error::InvalidScenario(format!("cell {i} leaves the domain")));
            }
            for (j, s) in &all[k + 1..] {
                if r.clip(s).is_some() {
                    return Err(Error::InvalidScenario(format!("cells {i} and {j} overlap")));
                }
            }
            area += r.area();
        }
        if (area - domain.area()).abs() > 1e-9 * domain.area() {
            return Err(Error::InvalidScenario("cells do not cover the domain".into()));
        }
        let owner = points
            .iter()
            .enumerate()
            .map(|(k, &pt)| {
                if !pt.x.is_finite() || !pt.y.is_finite() {
                    return Err(Error::InvalidScenario(format!("point {k} is not finite")));
                }
                cells
                    .iter()
                    .position(|c| c.iter().any(|r| r.contains(pt)))
                    .ok_or_else(|| Error::InvalidScenario(format!("point {k} lies outside the domain")))
            })
            .collect::<Result<_>>()?;
        let mut edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        Ok(Self {
            domain,
            cells,
            edges,
            points,
            owner,
        })
    }

    pub fn p(&self) -> usize {
        self.cells.len()
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn cell(&self, i: usize) -> &[Rect] {
        &self.cells[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn loads(&self) -> Vec<u64> {
        let mut l = vec![0u64; self.p()];
        for &o in &self.owner {
            l[o] += 1;
        }
        l
    }

    pub fn graph(&self) -> ProcessorGraph {
        ProcessorGraph::new(self.p(), &self.edges, self.loads()).expect("validated at construction")
    }

    /// Segments where cells `i` and `j` touch, with the index of the rectangle of `i`.
    pub fn shared_boundary(&self, i: usize, j: usize) -> Vec<(usize, Segment)> {
        let mut out = Vec::new();
        for (k, r) in self.cells[i].iter().enumerate() {
            for s in &self.cells[j] {
                if let Some(seg) = touching(r, s) {
                    out.push((k, seg));
                }
            }
        }
        out
    }

    fn boundary_length(a: &[Rect], b: &[Rect]) -> f64 {
        a.iter()
            .flat_map(|r| b.iter().filter_map(move |s| touching(r, s)))
            .map(|s| s.length())
            .sum()
    }

    /// Bisects cell `from` and hands one half to the empty cell `empty`.
    fn split_into(&mut self, empty: usize, from: usize) -> Result<()> {
        let held = self.owner.iter().filter(|&&o| o == from).count();
        if held < 2 {
            return Err(Error::Unsplittable(from));
        }
        let bb = Rect::bounding(&self.cells[from]).expect("cells are non-empty");
        let (w, h) = (bb.width(), bb.height());
        let cut_x = if (w - h).abs() <= EPS * w.max(h) {
            // Square: cut across the common boundary, so both halves touch it.
            self.shared_boundary(empty, from)
                .into_iter()
                .max_by(|a, b| a.1.length().total_cmp(&b.1.length()))
                .map_or(true, |(_, s)| !s.is_vertical())
        } else {
            w > h
        };
        let (lo, hi, mid) = if cut_x {
            let mid = 0.5 * (bb.x0 + bb.x1);
            (Rect { x1: mid, ..bb }, Rect { x0: mid, ..bb }, mid)
        } else {
            let mid = 0.5 * (bb.y0 + bb.y1);
            (Rect { y1: mid, ..bb }, Rect { y0: mid, ..bb }, mid)
        };
        let lo_part: Vec<Rect> = self.cells[from].iter().filter_map(|r| r.clip(&lo)).collect();
        let hi_part: Vec<Rect> = self.cells[from].iter().filter_map(|r| r.clip(&hi)).collect();
        let adopt_hi = Self::boundary_length(&self.cells[empty], &hi_part)
            > Self::boundary_length(&self.cells[empty], &lo_part);
        let on_line_to_empty = empty < from;

        let adopted_points: Vec<usize> = (0..self.points.len())
            .filter(|&k| self.owner[k] == from)
            .filter(|&k| {
                let pt = self.points[k];
                let c = if cut_x { pt.x } else { pt.y };
                let in_hi = if c == mid { adopt_hi == on_line_to_empty } else { c > mid };
                in_hi == adopt_hi
            })
            .collect();
        // Both halves must keep points, or the donor becomes the next empty cell.
        if adopted_points.is_empty() || adopted_points.len() == held {
            return Err(Error::Unsplittable(from));
        }
        for k in adopted_points {
            self.owner[k] = empty;
        }
        let (adopted, kept) = if adopt_hi { (hi_part, lo_part) } else { (lo_part, hi_part) };
        self.cells[from] = kept;
        self.cells[empty].extend(adopted);
        Ok(())
    }

    /// Moves `amount` points of `from`, nearest to the common boundary, to `to`.
    fn transfer(&mut self, from: usize, to: usize, amount: u64) {
        let segs = self.shared_boundary(from, to);
        let dist = |pt: Point| -> f64 {
            if segs.is_empty() {
                self.cells[to].iter().map(|r| r.distance(pt)).fold(f64::INFINITY, f64::min)
            } else {
                segs.iter().map(|(_, s)| s.distance(pt)).fold(f64::INFINITY, f64::min)
            }
        };
        let mut candidates: Vec<(f64, usize)> = (0..self.points.len())
            .filter(|&k| self.owner[k] == from)
            .map(|k| (dist(self.points[k]), k))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let chosen: Vec<usize> = candidates.iter().take(amount as usize).map(|&(_, k)| k).collect();
        for &k in &chosen {
            self.owner[k] = to;
        }

        let Some(&(ri, seg)) = segs.iter().max_by(|a, b| a.1.length().total_cmp(&b.1.length())) else {
            return;
        };
        let r = self.cells[from][ri];
        let depth = chosen
            .iter()
            .map(|&k| self.points[k])
            .filter(|&pt| r.contains(pt))
            .map(|pt| if seg.is_vertical() { (pt.x - seg.a.x).abs() } else { (pt.y - seg.a.y).abs() })
            .fold(0.0f64, f64::max);
        if depth <= EPS {
            return;
        }
        let extent = if seg.is_vertical() { r.width() } else { r.height() };
        if depth >= extent - EPS {
            // A cell never gives away its last rectangle.
            if self.cells[from].len() > 1 {
                self.cells[from].remove(ri);
                self.cells[to].push(r);
            }
            return;
        }
        let (slab, rest) = if seg.is_vertical() {
            let c = seg.a.x;
            if (r.x1 - c).abs() < EPS {
                (Rect { x0: c - depth, ..r }, Rect { x1: c - depth, ..r })
            } else {
                (Rect { x1: c + depth, ..r }, Rect { x0: c + depth, ..r })
            }
        } else {
            let c = seg.a.y;
            if (r.y1 - c).abs() < EPS {
                (Rect { y0: c - depth, ..r }, Rect { y1: c - depth, ..r })
            } else {
                (Rect { y1: c + depth, ..r }, Rect { y0: c + depth, ..r })
            }
        };
        self.cells[from][ri] = rest;
        self.cells[to].push(slab);
    }
}

/// Splits every empty cell (ascending id) by bisecting its most loaded neighbour.
pub fn check_and_split(mut deco: SpatialDecomposition) -> Result<(SpatialDecomposition, Vec<Split>)> {
    if deco.points.is_empty() {
        return Err(Error::AllEmpty);
    }
    let graph = deco.graph();
    let mut splits = Vec::new();
    loop {
        let loads = deco.loads();
        let empties: Vec<usize> = (0..deco.p()).filter(|&i| loads[i] == 0).collect();
        let Some(&first) = empties.first() else {
            break;
        };
        let mut progressed = false;
        for i in empties {
            let loads = deco.loads();
            if loads[i] > 0 {
                continue;
            }
            // max_by_key keeps the last maximum; iterate in reverse for lowest id.
            let Some(j) = graph.neighbours(i).into_iter().rev().max_by_key(|&j| loads[j]) else {
                continue;
            };
            if loads[j] == 0 {
                continue;
            }
            deco.split_into(i, j)?;
            splits.push(Split { empty: i, from: j });
            progressed = true;
        }
        if !progressed {
            return Err(Error::Unsplittable(first));
        }
    }
    Ok((deco, splits))
}

/// Applies every flow of the schedule by moving boundary points.
///
/// Flows are taken in edge order; a flow whose sender does not yet hold
/// enough points waits until incoming flows have arrived.
pub fn migrate(mut deco: SpatialDecomposition, schedule: &BalanceSchedule) -> Result<(SpatialDecomposition, u64)> {
    let mut loads = deco.loads();
    let mut pending = schedule.flows();
    let mut moved = 0;
    while !pending.is_empty() {
        let mut waiting = Vec::new();
        for (from, to, amount) in pending.iter().copied() {
            if from >= deco.p() || to >= deco.p() {
                return Err(Error::InvalidArgument(format!("flow {from} -> {to} outside the decomposition")));
            }
            if loads[from] >= amount {
                deco.transfer(from, to, amount);
                loads[from] -= amount;
                loads[to] += amount;
                moved += amount;
            } else {
                waiting.push((from, to, amount));
            }
        }
        if waiting.len() == pending.len() {
            let (from, to, needed) = waiting[0];
            return Err(Error::InsufficientLoad {
                from,
                to,
                needed,
                held: loads[from],
            });
        }
        pending = waiting;
    }
    Ok((deco, moved))
}
