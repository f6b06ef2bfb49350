//! Domain decomposition of the CLS problem over the column index set.
//!
//! Columns are split into contiguous ranges `I_1, …, I_p`; neighbouring
//! ranges share exactly `s` indices. Each subdomain minimises the reduced
//! functional over its own columns with every other column frozen at the
//! latest iterate, plus `μ` times the squared mismatch with its neighbours on
//! the shared indices. Sweeps are either multiplicative (ascending subdomain
//! id, newest iterates) or additive (all subdomains against the previous
//! iterate, solved concurrently). Overlapping entries are averaged when the
//! global iterate is assembled.
//!
//! Ranges are zero-based and half-open: the inclusive one-based index set
//! `{i, …, j}` is the range `i-1..j` and has `j - i + 1` columns.

use std::collections::BTreeMap;
use std::ops::Range;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{stack, ClsProblem};
use crate::linalg::{
    factor_normal, gemm, norm2, norm_inf, weighted_normal_solve, Cholesky, DenseMatrix,
    DenseVector, MatRef, WeightMatrix,
};

/// Default stopping tolerance on `‖x^{n+1} − x^n‖∞`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 500;

/// Column ranges with overlap, plus the owner of every row of `A = [H0; H1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexDecomposition {
    n: usize,
    ranges: Vec<Range<usize>>,
    overlap: usize,
    row_assignment: Vec<usize>,
}

impl IndexDecomposition {
    /// Validates a chain of contiguous ranges covering `0..n`.
    pub fn new(n: usize, ranges: Vec<Range<usize>>, overlap: usize) -> Result<Self> {
        if ranges.is_empty() || n == 0 {
            return Err(Error::InvalidArgument("empty decomposition".into()));
        }
        for (i, r) in ranges.iter().enumerate() {
            if r.is_empty() || r.end > n {
                return Err(Error::RangeOutOfBounds {
                    start: r.start,
                    end: r.end,
                    len: n,
                });
            }
            if i > 0 {
                let prev = &ranges[i - 1];
                if prev.end < r.start {
                    return Err(Error::CoverageGap(prev.end));
                }
                let shared = prev.end - r.start;
                if shared != overlap || r.start <= prev.start || r.end <= prev.end {
                    return Err(Error::InvalidArgument(format!(
                        "ranges {prev:?} and {r:?} must share exactly {overlap} indices"
                    )));
                }
            }
        }
        if ranges[0].start != 0 {
            return Err(Error::CoverageGap(0));
        }
        if ranges.last().unwrap().end != n {
            return Err(Error::CoverageGap(ranges.last().unwrap().end));
        }
        // Non-adjacent ranges must not meet, otherwise an index has three owners.
        for i in 2..ranges.len() {
            if ranges[i].start < ranges[i - 2].end {
                return Err(Error::InvalidArgument(format!(
                    "overlap {overlap} too wide for range {:?}",
                    ranges[i - 1]
                )));
            }
        }
        Ok(Self {
            n,
            ranges,
            overlap,
            row_assignment: Vec::new(),
        })
    }

    /// Splits `0..n` into `p` nearly equal blocks; block `i > 0` reaches `s`
    /// columns back into block `i − 1`.
    pub fn uniform(n: usize, p: usize, overlap: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::InvalidArgument(format!("cannot split {n} columns into {p} parts")));
        }
        let cuts: Vec<usize> = (0..=p).map(|i| i * n / p).collect();
        let ranges = (0..p)
            .map(|i| {
                let start = if i == 0 { 0 } else { cuts[i].saturating_sub(overlap) };
                start..cuts[i + 1]
            })
            .collect();
        Self::new(n, ranges, overlap)
    }

    /// Attaches the row owners (observation ownership); every row gets exactly one owner.
    pub fn with_row_assignment(mut self, owners: Vec<usize>) -> Result<Self> {
        if let Some(bad) = owners.iter().position(|&o| o >= self.p()) {
            return Err(Error::InvalidArgument(format!(
                "row {bad} assigned to subdomain {} of {}",
                owners[bad],
                self.p()
            )));
        }
        self.row_assignment = owners;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.ranges.len()
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn range(&self, i: usize) -> Range<usize> {
        self.ranges[i].clone()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn row_assignment(&self) -> &[usize] {
        &self.row_assignment
    }

    /// Rows owned by subdomain `i` (the set `J_i`).
    pub fn rows_of(&self, i: usize) -> Vec<usize> {
        self.row_assignment
            .iter()
            .enumerate()
            .filter_map(|(r, &o)| (o == i).then_some(r))
            .collect()
    }

    /// Shared indices of subdomains `i` and `j` (global, possibly empty).
    pub fn shared(&self, i: usize, j: usize) -> Range<usize> {
        let (a, b) = (&self.ranges[i], &self.ranges[j]);
        let start = a.start.max(b.start);
        let end = a.end.min(b.end);
        start..end.max(start)
    }

    /// Subdomains adjacent to `i` in the chain.
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if i > 0 {
            out.push(i - 1);
        }
        if i + 1 < self.p() {
            out.push(i + 1);
        }
        out
    }

    fn check_subdomain(&self, i: usize) -> Result<()> {
        if i >= self.p() {
            return Err(Error::InvalidArgument(format!(
                "subdomain {i} out of {}",
                self.p()
            )));
        }
        Ok(())
    }
}

/// Local iterate of one subdomain, indexed over its own range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution {
    pub subdomain: usize,
    pub x: DenseVector,
    pub iteration: usize,
}

impl LocalSolution {
    pub fn new(subdomain: usize, x: Vec<f64>, iteration: usize) -> Self {
        Self {
            subdomain,
            x: x.into(),
            iteration,
        }
    }

    /// Restriction of a global vector to the range of subdomain `i`.
    pub fn from_global(deco: &IndexDecomposition, i: usize, x: &[f64]) -> Self {
        Self::new(i, x[deco.range(i)].to_vec(), 0)
    }
}

/// Multiplicative (Gauss–Seidel-like) or additive (Jacobi-like) Schwarz sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Multiplicative,
    Additive,
}

impl std::str::FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicative" => Ok(SweepMode::Multiplicative),
            "additive" => Ok(SweepMode::Additive),
            other => Err(Error::InvalidArgument(format!("unknown sweep mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdOptions {
    pub mu: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: SweepMode,
    /// Worker threads for the additive mode; `None` means one per subdomain.
    pub workers: Option<usize>,
}

impl Default for DdOptions {
    fn default() -> Self {
        Self {
            mu: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            mode: SweepMode::Multiplicative,
            workers: None,
        }
    }
}

/// Outcome of [`dd_solve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdSolveReport {
    pub x_global: DenseVector,
    pub iterations: usize,
    pub converged: bool,
    /// `‖x^{n+1} − x^n‖∞` after each sweep.
    pub residual_history: Vec<f64>,
    pub error_vs_oracle: Option<f64>,
}

impl DdSolveReport {
    /// `‖x_global − oracle‖∞`, stored in the report.
    pub fn set_oracle(&mut self, oracle: &[f64]) {
        let err = self
            .x_global
            .iter()
            .zip(oracle)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.error_vs_oracle = Some(err);
    }
}

/// Copies columns `range` of `b`.
pub fn restrict_matrix(b: &DenseMatrix, range: Range<usize>) -> Result<DenseMatrix> {
    if range.is_empty() || range.end > b.cols() {
        return Err(Error::RangeOutOfBounds {
            start: range.start,
            end: range.end,
            len: b.cols(),
        });
    }
    Ok(b.columns(range.start, range.end))
}

pub fn restrict_vector(x: &[f64], range: Range<usize>) -> Result<DenseVector> {
    if range.is_empty() || range.end > x.len() {
        return Err(Error::RangeOutOfBounds {
            start: range.start,
            end: range.end,
            len: x.len(),
        });
    }
    Ok(x[range].to_vec().into())
}

/// Places `w` at positions `start..start + w.len()` of a zero vector of length `target_len`.
pub fn extend_vector(w: &[f64], start: usize, target_len: usize) -> Result<DenseVector> {
    let end = start + w.len();
    if w.is_empty() || end > target_len {
        return Err(Error::RangeOutOfBounds {
            start,
            end,
            len: target_len,
        });
    }
    let mut out = vec![0.0; target_len];
    out[start..end].copy_from_slice(w);
    Ok(out.into())
}

fn check_local(deco: &IndexDecomposition, loc: &LocalSolution) -> Result<()> {
    deco.check_subdomain(loc.subdomain)?;
    let want = deco.range(loc.subdomain).len();
    if loc.x.len() != want {
        return Err(Error::DimensionMismatch(format!(
            "local solution of subdomain {} has length {}, range has {want}",
            loc.subdomain,
            loc.x.len()
        )));
    }
    Ok(())
}

/// Reduced functional `‖A_i x_i − (b − A_j x_j)‖²_R` on the pair `(i, j)`.
pub fn reduced_objective(
    prob: &ClsProblem,
    deco: &IndexDecomposition,
    x_i: &LocalSolution,
    x_j: &LocalSolution,
) -> Result<f64> {
    check_local(deco, x_i)?;
    check_local(deco, x_j)?;
    if x_i.subdomain == x_j.subdomain {
        return Err(Error::InvalidArgument("reduced objective needs two subdomains".into()));
    }
    if deco.n() != prob.n() {
        return Err(Error::DimensionMismatch("decomposition does not match problem".into()));
    }
    let ri = deco.range(x_i.subdomain);
    let rj = deco.range(x_j.subdomain);
    let block = |h: &DenseMatrix, y: &[f64], w: &WeightMatrix| -> Result<f64> {
        let ai = restrict_matrix(h, ri.clone())?.matvec(&x_i.x)?;
        let aj = restrict_matrix(h, rj.clone())?.matvec(&x_j.x)?;
        let res: Vec<f64> = (0..y.len()).map(|r| ai[r] - (y[r] - aj[r])).collect();
        w.weighted_sq_norm(&res)
    };
    Ok(block(prob.h0(), prob.y0(), prob.r0())? + block(prob.h1(), prob.y1(), prob.r1())?)
}

/// Euclidean norm of the mismatch of two local solutions on their shared indices.
pub fn overlap_penalty(
    deco: &IndexDecomposition,
    x_i: &LocalSolution,
    x_j: &LocalSolution,
) -> Result<f64> {
    check_local(deco, x_i)?;
    check_local(deco, x_j)?;
    let (i, j) = (x_i.subdomain, x_j.subdomain);
    let shared = deco.shared(i, j);
    if i == j || shared.is_empty() {
        return Err(Error::EmptyOverlap(i, j));
    }
    let oi = deco.range(i).start;
    let oj = deco.range(j).start;
    let diff: Vec<f64> = shared.map(|k| x_i.x[k - oi] - x_j.x[k - oj]).collect();
    Ok(norm2(&diff))
}

/// Global vector averaging the local solutions wherever ranges overlap.
pub fn assemble_global(deco: &IndexDecomposition, locals: &[LocalSolution]) -> Result<DenseVector> {
    let n = deco.n();
    let mut sum = vec![0.0; n];
    let mut count = vec![0u32; n];
    for loc in locals {
        check_local(deco, loc)?;
        let range = deco.range(loc.subdomain);
        for (k, v) in range.zip(loc.x.iter()) {
            sum[k] += v;
            count[k] += 1;
        }
    }
    if let Some(gap) = count.iter().position(|&c| c == 0) {
        return Err(Error::CoverageGap(gap));
    }
    Ok(sum
        .into_iter()
        .zip(count)
        .map(|(s, c)| s / c as f64)
        .collect::<Vec<_>>()
        .into())
}

/// Penalised local solve for subdomain `i` with every other subdomain frozen.
///
/// Minimises `‖A_i x_i − (b − A_c x_c)‖²_R + μ Σ_j ‖x_i − x_j‖²` where `x_c`
/// is the assembled iterate of the other subdomains on the columns outside
/// `I_i` and the sum runs over neighbours sharing indices with `i`. Without
/// overlap (or with `μ = 0`) this is the plain weighted normal-equation solve.
pub fn local_solve(
    prob: &ClsProblem,
    deco: &IndexDecomposition,
    i: usize,
    frozen: &BTreeMap<usize, LocalSolution>,
    mu: f64,
) -> Result<LocalSolution> {
    deco.check_subdomain(i)?;
    if deco.n() != prob.n() {
        return Err(Error::DimensionMismatch("decomposition does not match problem".into()));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("penalty {mu} must be finite and >= 0")));
    }
    let others: Vec<LocalSolution> = (0..deco.p())
        .filter(|&j| j != i)
        .map(|j| {
            frozen
                .get(&j)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("no frozen iterate for subdomain {j}")))
        })
        .collect::<Result<_>>()?;
    let range = deco.range(i);
    let frozen_x = frozen_complement(deco, i, &others)?;

    let s = stack(prob);
    let outside = s.a.matvec(&frozen_x)?;
    let rhs: Vec<f64> = s.b.iter().zip(&outside).map(|(b, o)| b - o).collect();
    let a_i = restrict_matrix(&s.a, range.clone())?;

    let penalties = penalty_targets(deco, i, &others);
    if mu == 0.0 || penalties.is_empty() {
        let x = weighted_normal_solve(&a_i, &s.r, &rhs)?;
        return Ok(LocalSolution::new(i, x.into_vec(), next_iteration(frozen)));
    }
    let (mut normal, mut local_rhs) = crate::linalg::normal_equations(&a_i, &s.r, &rhs)?;
    for (k, target) in penalties {
        normal[(k, k)] += mu;
        local_rhs[k] += mu * target;
    }
    let x = factor_normal(&normal)?.solve(&local_rhs)?;
    Ok(LocalSolution::new(i, x, next_iteration(frozen)))
}

fn next_iteration(frozen: &BTreeMap<usize, LocalSolution>) -> usize {
    frozen.values().map(|l| l.iteration).max().unwrap_or(0) + 1
}

/// Global vector holding the assembled iterate of `others` outside `I_i` and zero inside.
fn frozen_complement(
    deco: &IndexDecomposition,
    i: usize,
    others: &[LocalSolution],
) -> Result<Vec<f64>> {
    let n = deco.n();
    let range = deco.range(i);
    let mut sum = vec![0.0; n];
    let mut count = vec![0u32; n];
    for loc in others {
        check_local(deco, loc)?;
        for (k, v) in deco.range(loc.subdomain).zip(loc.x.iter()) {
            if !range.contains(&k) {
                sum[k] += v;
                count[k] += 1;
            }
        }
    }
    for k in 0..n {
        if range.contains(&k) {
            continue;
        }
        if count[k] == 0 {
            return Err(Error::CoverageGap(k));
        }
        sum[k] /= count[k] as f64;
    }
    Ok(sum)
}

/// `(local index, neighbour value)` pairs for every shared index of `i`, one
/// entry per neighbour that shares it.
fn penalty_targets(deco: &IndexDecomposition, i: usize, others: &[LocalSolution]) -> Vec<(usize, f64)> {
    let start = deco.range(i).start;
    let mut out = Vec::new();
    for loc in others {
        let j = loc.subdomain;
        let oj = deco.range(j).start;
        for k in deco.shared(i, j) {
            out.push((k - start, loc.x[k - oj]));
        }
    }
    out
}

/// Per-subdomain normal-equation data, factored once and reused every sweep.
struct LocalSystem {
    range: Range<usize>,
    /// Rows `I_i` of the global normal matrix `AᵀRA`, `|I_i| × n`.
    coupling: DenseMatrix,
    /// `(AᵀRb)|_{I_i}`.
    rhs: Vec<f64>,
    /// Local indices penalised towards each neighbour.
    shared: Vec<(usize, Range<usize>)>,
    factor: Cholesky,
}

impl LocalSystem {
    fn build(
        deco: &IndexDecomposition,
        i: usize,
        a: &DenseMatrix,
        ra: &DenseMatrix,
        rb: &[f64],
        mu: f64,
    ) -> Result<Self> {
        let range = deco.range(i);
        let (m, n) = a.shape();
        let width = range.len();
        let mut coupling = DenseMatrix::zeros(width, n);
        gemm(
            1.0,
            MatRef::column_block(a.as_slice(), m, n, range.start, width).t(),
            MatRef::row_major(ra.as_slice(), m, n),
            0.0,
            &mut coupling,
        );
        let mut rhs = vec![0.0; width];
        for (r, &w) in rb.iter().enumerate() {
            if w != 0.0 {
                crate::linalg::axpy(w, &a.row(r)[range.clone()], &mut rhs);
            }
        }
        let shared: Vec<(usize, Range<usize>)> = deco
            .neighbours(i)
            .into_iter()
            .map(|j| (j, deco.shared(i, j)))
            .filter(|(_, r)| !r.is_empty())
            .collect();

        let mut local = coupling.columns(range.start, range.end);
        local.symmetrize();
        if mu > 0.0 {
            for (_, r) in &shared {
                for k in r.clone() {
                    local[(k - range.start, k - range.start)] += mu;
                }
            }
        }
        let factor = factor_normal(&local)?;
        Ok(Self {
            range,
            coupling,
            rhs,
            shared,
            factor,
        })
    }

    /// Solves against the frozen global vector `x` (entries of `I_i` ignored)
    /// and the neighbours' current local iterates.
    fn solve(&self, x: &[f64], locals: &[Vec<f64>], ranges: &[Range<usize>], mu: f64) -> Vec<f64> {
        let mut out = self.rhs.clone();
        for (row, o) in out.iter_mut().enumerate() {
            let g = self.coupling.row(row);
            let full = crate::linalg::dot(g, x);
            let inside = crate::linalg::dot(&g[self.range.clone()], &x[self.range.clone()]);
            *o -= full - inside;
        }
        if mu > 0.0 {
            for (j, shared) in &self.shared {
                let oj = ranges[*j].start;
                for k in shared.clone() {
                    out[k - self.range.start] += mu * locals[*j][k - oj];
                }
            }
        }
        self.factor
            .solve_in_place(&mut out)
            .expect("local factor matches its right-hand side");
        out
    }
}

fn assemble_slices(n: usize, ranges: &[Range<usize>], locals: &[Vec<f64>], skip: Option<usize>) -> Vec<f64> {
    let mut sum = vec![0.0; n];
    let mut count = vec![0u32; n];
    for (j, (r, x)) in ranges.iter().zip(locals).enumerate() {
        if Some(j) == skip {
            continue;
        }
        for (k, v) in r.clone().zip(x) {
            sum[k] += v;
            count[k] += 1;
        }
    }
    for (s, c) in sum.iter_mut().zip(count) {
        if c > 1 {
            *s /= c as f64;
        }
    }
    sum
}

/// Runs `f` over `0..p` on `workers` scoped threads and returns results in order.
fn parallel_map<T, F>(p: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, p.max(1));
    if workers == 1 {
        return (0..p).map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<T>> = (0..p).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..p)
                        .step_by(workers)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every slot filled")).collect()
}

/// Alternating Schwarz iteration on the decomposed CLS problem.
///
/// Stops when `‖x^{n+1} − x^n‖∞ ≤ tol` or after `max_iter` sweeps; in the
/// latter case the report carries `converged = false`.
pub fn dd_solve(prob: &ClsProblem, deco: &IndexDecomposition, opts: &DdOptions) -> Result<DdSolveReport> {
    if deco.n() != prob.n() {
        return Err(Error::DimensionMismatch(format!(
            "decomposition over {} columns, problem has {}",
            deco.n(),
            prob.n()
        )));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument("tol must be > 0 and max_iter >= 1".into()));
    }
    if !(opts.mu >= 0.0 && opts.mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("penalty {} must be finite and >= 0", opts.mu)));
    }
    let n = prob.n();
    let p = deco.p();
    let workers = match opts.mode {
        SweepMode::Additive => opts.workers.unwrap_or(p),
        SweepMode::Multiplicative => 1,
    };

    let s = stack(prob);
    let ra = s.r.apply_rows(&s.a)?;
    let rb = s.r.apply(&s.b)?;
    let systems: Vec<LocalSystem> = parallel_map(p, workers, |i| {
        LocalSystem::build(deco, i, &s.a, &ra, &rb, opts.mu)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    drop(ra);

    let ranges = deco.ranges();
    let mut locals: Vec<Vec<f64>> = ranges.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..opts.max_iter {
        match opts.mode {
            SweepMode::Multiplicative => {
                for i in 0..p {
                    let frozen = assemble_slices(n, ranges, &locals, Some(i));
                    locals[i] = systems[i].solve(&frozen, &locals, ranges, opts.mu);
                }
            }
            SweepMode::Additive => {
                let prev = &locals;
                let next = parallel_map(p, workers, |i| {
                    let frozen = assemble_slices(n, ranges, prev, Some(i));
                    systems[i].solve(&frozen, prev, ranges, opts.mu)
                });
                locals = next;
            }
        }
        let next = assemble_slices(n, ranges, &locals, None);
        let diff = next
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        history.push(diff);
        if p == 1 || diff <= opts.tol {
            converged = true;
            break;
        }
    }

    Ok(DdSolveReport {
        x_global: x.into(),
        iterations: history.len(),
        converged,
        residual_history: history,
        error_vs_oracle: None,
    })
}

/// `‖A·x − Σ_i A_i·x|_{I_i}‖∞` for a non-overlapping decomposition.
pub fn splitting_defect(prob: &ClsProblem, deco: &IndexDecomposition, x: &[f64]) -> Result<f64> {
    let s = stack(prob);
    let full = s.a.matvec(x)?;
    let mut parts = vec![0.0; full.len()];
    for i in 0..deco.p() {
        let r = deco.range(i);
        let contrib = restrict_matrix(&s.a, r.clone())?.matvec(&x[r])?;
        parts.iter_mut().zip(contrib).for_each(|(p, c)| *p += c);
    }
    let diff: Vec<f64> = full.iter().zip(&parts).map(|(a, b)| a - b).collect();
    Ok(norm_inf(&diff))
}
