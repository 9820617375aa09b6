//! Bethe master functions and their critical points.
//!
//! For a partition `λ` with level counts `l_1, …, l_{N−1}`,
//!
//! ```text
//! Φ_λ(z, t) = Σ_{a<b} log(z_a − z_b) − Σ_a Σ_{i≤l_1} log(t^{(1)}_i − z_a)
//!           + 2 Σ_k Σ_{i<j} log(t^{(k)}_i − t^{(k)}_j)
//!           − Σ_{k=1}^{N−2} Σ_{i,j} log(t^{(k)}_i − t^{(k+1)}_j)
//! ```
//!
//! The twisted function `Φ_q` uses levels of sizes `n−1, …, 1` and adds
//! `Σ_k (q_{k+1} − q_k) Σ_i t^{(k)}_i + q_1 Σ_a z_a`. Only the first level
//! couples to `z`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, CVector};
use crate::partitions::Partition;
use crate::poly::{for_each_permutation, from_roots};
use crate::sampling;
use crate::tensor_gaudin::{check_distinct, COLLISION_DELTA};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Positions `z` and Bethe variables `t`, grouped by level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheConfiguration {
    #[serde(with = "crate::json::complex_vec")]
    pub z: Vec<C64>,
    #[serde(with = "crate::json::complex_rows")]
    pub t: Vec<Vec<C64>>,
}

/// The `t`-dependence of a master function.
#[derive(Clone, Debug)]
pub struct MasterFunction {
    n: usize,
    levels: Vec<usize>,
    /// Coefficient of `Σ_i t^{(k)}_i` for each level.
    linear_t: Vec<C64>,
    /// Coefficient of `Σ_a z_a`.
    linear_z: C64,
}

impl MasterFunction {
    /// `Φ_λ`, with `N` equal to the number of nonzero parts.
    pub fn for_partition(lambda: &Partition) -> Result<Self> {
        let rows = lambda.length().max(1);
        let levels = lambda.bethe_levels(rows)?.levels;
        Ok(Self {
            n: lambda.weight(),
            linear_t: vec![ZERO; levels.len()],
            levels,
            linear_z: ZERO,
        })
    }

    /// `Φ_λ` viewed with `N` rows; trailing levels are empty.
    pub fn for_partition_with_rows(lambda: &Partition, rows: usize) -> Result<Self> {
        let levels = lambda.bethe_levels(rows)?.levels;
        Ok(Self {
            n: lambda.weight(),
            linear_t: vec![ZERO; levels.len()],
            levels,
            linear_z: ZERO,
        })
    }

    /// `Φ_q` for pairwise distinct `q`.
    pub fn twisted(q: &[C64]) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty q".into()));
        }
        check_distinct(q, COLLISION_DELTA)?;
        Ok(Self {
            n,
            levels: (1..n).map(|k| n - k).collect(),
            linear_t: (0..n - 1).map(|k| q[k + 1] - q[k]).collect(),
            linear_z: q[0],
        })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn num_t(&self) -> usize {
        self.levels.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.levels
            .iter()
            .map(|&l| {
                let o = acc;
                acc += l;
                o
            })
            .collect()
    }

    /// Splits a flat vector of `t` values into levels.
    pub fn unflatten(&self, flat: &[C64]) -> Vec<Vec<C64>> {
        let mut it = flat.iter().copied();
        self.levels.iter().map(|&l| it.by_ref().take(l).collect()).collect()
    }

    fn check_config(&self, z: &[C64], t: &[Vec<C64>]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::InvalidInput(format!("expected {} positions", self.n)));
        }
        if t.len() != self.levels.len() || t.iter().zip(&self.levels).any(|(v, &l)| v.len() != l) {
            return Err(Error::InvalidInput(format!(
                "t must have level sizes {:?}",
                self.levels
            )));
        }
        let delta = COLLISION_DELTA;
        check_distinct(z, delta)?;
        for (k, level) in t.iter().enumerate() {
            check_distinct(level, delta)?;
            let neighbours: &[C64] = if k == 0 { z } else { &t[k - 1] };
            for (i, x) in level.iter().enumerate() {
                for (j, y) in neighbours.iter().enumerate() {
                    let distance = (x - y).norm();
                    if distance < delta {
                        return Err(Error::Collision { a: i, b: j, distance });
                    }
                }
            }
        }
        Ok(())
    }

    /// Calls `visit(var, other, coeff)` for every logarithmic term
    /// `coeff · log(t_var − other)` seen from variable `var` (flat index).
    /// `other` is either another flat `t` index or a position.
    fn for_each_pair<F: FnMut(usize, Partner, f64)>(&self, mut visit: F) {
        let offsets = self.offsets();
        for (k, &l) in self.levels.iter().enumerate() {
            for i in 0..l {
                let var = offsets[k] + i;
                if k == 0 {
                    for a in 0..self.n {
                        visit(var, Partner::Position(a), -1.0);
                    }
                }
                for j in (0..l).filter(|&j| j != i) {
                    visit(var, Partner::Bethe(offsets[k] + j), 2.0);
                }
                if k + 1 < self.levels.len() {
                    for j in 0..self.levels[k + 1] {
                        visit(var, Partner::Bethe(offsets[k + 1] + j), -1.0);
                    }
                }
                if k > 0 {
                    for j in 0..self.levels[k - 1] {
                        visit(var, Partner::Bethe(offsets[k - 1] + j), -1.0);
                    }
                }
            }
        }
    }

    fn linear_for(&self, var: usize) -> C64 {
        let mut acc = 0;
        for (k, &l) in self.levels.iter().enumerate() {
            acc += l;
            if var < acc {
                return self.linear_t[k];
            }
        }
        unreachable!("variable index out of range")
    }

    fn grad_flat(&self, z: &[C64], t: &[C64]) -> Vec<C64> {
        let mut g: Vec<C64> = (0..t.len()).map(|v| self.linear_for(v)).collect();
        self.for_each_pair(|var, partner, c| {
            let other = partner.value(z, t);
            g[var] += (t[var] - other).inv() * c;
        });
        g
    }

    fn hessian_flat(&self, z: &[C64], t: &[C64]) -> CMatrix {
        let m = t.len();
        let mut h = CMatrix::zeros(m, m);
        self.for_each_pair(|var, partner, c| {
            let d = t[var] - partner.value(z, t);
            let w = (d * d).inv() * c;
            h[(var, var)] -= w;
            if let Partner::Bethe(j) = partner {
                h[(var, j)] += w;
            }
        });
        h
    }

    /// `∂Φ/∂t` for every Bethe variable, flattened level by level.
    pub fn grad_t(&self, z: &[C64], t: &[Vec<C64>]) -> Result<Vec<C64>> {
        self.check_config(z, t)?;
        Ok(self.grad_flat(z, &t.concat()))
    }

    /// `p_a = ∂Φ/∂z_a`.
    pub fn grad_z(&self, z: &[C64], t: &[Vec<C64>]) -> Result<Vec<C64>> {
        self.check_config(z, t)?;
        Ok(self.momenta(z, t.first().map(Vec::as_slice).unwrap_or(&[])))
    }

    fn momenta(&self, z: &[C64], first_level: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|a| {
                let mut p = self.linear_z;
                for b in (0..self.n).filter(|&b| b != a) {
                    p += (z[a] - z[b]).inv();
                }
                for &x in first_level {
                    p += (x - z[a]).inv();
                }
                p
            })
            .collect()
    }

    /// Principal-branch value of `Φ`; meaningful only modulo `2πi`.
    pub fn value(&self, z: &[C64], t: &[Vec<C64>]) -> Result<C64> {
        self.check_config(z, t)?;
        let flat = t.concat();
        let mut v = ZERO;
        for a in 0..self.n {
            for b in a + 1..self.n {
                v += (z[a] - z[b]).ln();
            }
            v += z[a] * self.linear_z;
        }
        for (var, x) in flat.iter().enumerate() {
            v += x * self.linear_for(var);
        }
        self.for_each_pair(|var, partner, c| {
            let counted_once = match partner {
                Partner::Position(_) => true,
                Partner::Bethe(j) => var < j,
            };
            if counted_once {
                v += (flat[var] - partner.value(z, &flat)).ln() * c;
            }
        });
        Ok(v)
    }
}

/// `Φ(z₁, t₁) − Φ(z₂, t₂)` with every logarithm difference taken as
/// `log(x₁/x₂)`, which is single valued for nearby configurations.
pub fn value_difference(mf: &MasterFunction, (z1, t1): (&[C64], &[C64]), (z2, t2): (&[C64], &[C64])) -> C64 {
    let mut d = ZERO;
    for a in 0..z1.len() {
        for b in a + 1..z1.len() {
            d += ((z1[a] - z1[b]) / (z2[a] - z2[b])).ln();
        }
        d += (z1[a] - z2[a]) * mf.linear_z;
    }
    for var in 0..t1.len() {
        d += (t1[var] - t2[var]) * mf.linear_for(var);
    }
    mf.for_each_pair(|var, partner, c| {
        let counted_once = match partner {
            Partner::Position(_) => true,
            Partner::Bethe(j) => var < j,
        };
        if counted_once {
            let x1 = t1[var] - partner.value(z1, t1);
            let x2 = t2[var] - partner.value(z2, t2);
            d += (x1 / x2).ln() * c;
        }
    });
    d
}

/// Largest relative deviation between the analytic gradients (in `t` and
/// `z`) and central differences with step `h`.
pub fn gradient_fd_residual(mf: &MasterFunction, z: &[C64], t: &[Vec<C64>], h: f64) -> Result<f64> {
    let gt = mf.grad_t(z, t)?;
    let gz = mf.grad_z(z, t)?;
    let flat = t.concat();
    let mut worst: f64 = 0.0;
    let mut compare = |analytic: C64, fd: C64| {
        worst = worst.max((analytic - fd).norm() / analytic.norm().max(1.0));
    };
    for (var, &g) in gt.iter().enumerate() {
        let (mut tp, mut tm) = (flat.clone(), flat.clone());
        tp[var] += h;
        tm[var] -= h;
        compare(g, value_difference(mf, (z, &tp), (z, &tm)) / (2.0 * h));
    }
    for (a, &g) in gz.iter().enumerate() {
        let (mut zp, mut zm) = (z.to_vec(), z.to_vec());
        zp[a] += h;
        zm[a] -= h;
        compare(g, value_difference(mf, (&zp, &flat), (&zm, &flat)) / (2.0 * h));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
enum Partner {
    Position(usize),
    Bethe(usize),
}

impl Partner {
    fn value(self, z: &[C64], t: &[C64]) -> C64 {
        match self {
            Partner::Position(a) => z[a],
            Partner::Bethe(j) => t[j],
        }
    }
}

/// A numerically certified critical point with its momenta.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CriticalPoint {
    #[serde(with = "crate::json::complex_vec")]
    pub z: Vec<C64>,
    #[serde(with = "crate::json::complex_rows")]
    pub t: Vec<Vec<C64>>,
    #[serde(with = "crate::json::complex_vec")]
    pub p: Vec<C64>,
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on `max |∂Φ/∂t|`.
    pub tol: f64,
    /// Initial number of random starts; multiplied by 4 while fewer than the
    /// expected number of points have been found.
    pub starts: usize,
    pub max_starts: usize,
    pub max_iter: usize,
    /// Critical points closer than this (after within-level matching,
    /// relative to the position scale) are merged.
    pub dedup_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            starts: 32,
            max_starts: 2048,
            max_iter: 200,
            dedup_tol: 1e-6,
        }
    }
}

/// Result of a multistart solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetheSolution {
    pub points: Vec<CriticalPoint>,
    /// Number of points predicted by the theory.
    pub expected: usize,
    pub starts_used: usize,
}

impl BetheSolution {
    pub fn complete(&self) -> bool {
        self.points.len() == self.expected
    }
}

/// Critical points of `Φ_λ` with respect to `t`; `expected` is `d_λ`.
pub fn solve_bethe(lambda: &Partition, z: &[C64], opts: &SolverOptions, seed: u64) -> Result<BetheSolution> {
    let mf = MasterFunction::for_partition(lambda)?;
    solve(&mf, z, lambda.irrep_dimension() as usize, opts, seed)
}

/// Critical points of `Φ_q`; `expected` is `n!`.
pub fn solve_bethe_q(q: &[C64], z: &[C64], opts: &SolverOptions, seed: u64) -> Result<BetheSolution> {
    let mf = MasterFunction::twisted(q)?;
    let expected = (1..=q.len()).product();
    solve(&mf, z, expected, opts, seed)
}

/// Multistart damped Newton on `∂Φ/∂t = 0`.
pub fn solve(
    mf: &MasterFunction,
    z: &[C64],
    expected: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<BetheSolution> {
    if z.len() != mf.sites() {
        return Err(Error::InvalidInput(format!("expected {} positions", mf.sites())));
    }
    check_distinct(z, COLLISION_DELTA)?;
    let scale = z.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if mf.num_t() == 0 {
        let point = CriticalPoint {
            z: z.to_vec(),
            t: mf.levels().iter().map(|_| Vec::new()).collect(),
            p: mf.momenta(z, &[]),
            grad_norm: 0.0,
        };
        return Ok(BetheSolution {
            points: vec![point],
            expected,
            starts_used: 0,
        });
    }

    let structured = derivative_start(mf, z);
    let centre: C64 = z.iter().sum::<C64>() / z.len() as f64;
    let radius = 2.0 * z.iter().map(|x| (x - centre).norm()).fold(0.5, f64::max);
    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut launched = 0;
    let mut batch = opts.starts.max(1);
    loop {
        let results: Vec<Option<CriticalPoint>> = (launched..launched + batch)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    if let Some(start) = structured.clone() {
                        return newton(mf, z, start, scale, opts);
                    }
                }
                let mut rng = sampling::rng(sampling::derive_seed(seed, &format!("start-{k}")));
                let start: Vec<C64> = (0..mf.num_t())
                    .map(|_| {
                        let r = radius * (0.25f64).powf(1.0 - 2.5 * rng.gen::<f64>());
                        centre + sampling::complex_in_disc(&mut rng, r)
                    })
                    .collect();
                newton(mf, z, start, scale, opts)
            })
            .collect();
        launched += batch;
        for point in results.into_iter().flatten() {
            if !found
                .iter()
                .any(|f| same_critical_point(f, &point, opts.dedup_tol * scale))
            {
                found.push(point);
            }
        }
        if found.len() >= expected || launched >= opts.max_starts {
            break;
        }
        batch = (launched * 3).min(opts.max_starts - launched);
    }
    found.sort_by(|a, b| {
        lex_key(&a.p)
            .partial_cmp(&lex_key(&b.p))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(BetheSolution {
        points: found,
        expected,
        starts_used: launched,
    })
}

/// Level `k` with `m` variables starts at the roots of the `(n − m)`-th
/// derivative of `Π (x − z_a)`. This is the exact critical point for a
/// single column.
fn derivative_start(mf: &MasterFunction, z: &[C64]) -> Option<Vec<C64>> {
    let base = from_roots(z);
    let mut start = Vec::with_capacity(mf.num_t());
    for &m in mf.levels() {
        if m == 0 {
            continue;
        }
        let order = z.len().checked_sub(m)?;
        let mut d = base.clone();
        for _ in 0..order {
            d = d.derivative();
        }
        start.extend(d.roots().ok()?);
    }
    Some(start)
}

fn lex_key(values: &[C64]) -> Vec<(f64, f64)> {
    values.iter().map(|x| (x.re, x.im)).collect()
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn admissible(mf: &MasterFunction, z: &[C64], flat: &[C64], scale: f64) -> bool {
    let delta = 1e-8 * scale;
    let mut ok = true;
    mf.for_each_pair(|var, partner, _| {
        if ok && (flat[var] - partner.value(z, flat)).norm() < delta {
            ok = false;
        }
    });
    ok && flat.iter().all(|x| x.is_finite() && x.norm() < 1e6 * scale)
}

/// Damped Newton on `∂Φ/∂t = 0`.
///
/// Without linear terms the gradient decays at infinity and plain Newton
/// drifts there, so the system is taken with denominators cleared,
/// `F_i = g_i · Π_p (t_i − p)` over the partners `p` of `t_i`: the step
/// solves `(H + diag(g) L) δ = −g` with `L_ij = ∂ log D_i / ∂t_j`, and `‖F‖`
/// is the merit. With linear terms the gradient stays bounded away from zero
/// at infinity; `max |g|` is tried first and the cleared system is the
/// fallback.
fn newton(mf: &MasterFunction, z: &[C64], t: Vec<C64>, scale: f64, opts: &SolverOptions) -> Option<CriticalPoint> {
    let twisted = mf.linear_t.iter().any(|c| *c != ZERO);
    if twisted {
        newton_run(mf, z, t.clone(), scale, opts, false).or_else(|| newton_run(mf, z, t, scale, opts, true))
    } else {
        newton_run(mf, z, t, scale, opts, true)
    }
}

fn newton_run(
    mf: &MasterFunction,
    z: &[C64],
    mut t: Vec<C64>,
    scale: f64,
    opts: &SolverOptions,
    cleared: bool,
) -> Option<CriticalPoint> {
    if !admissible(mf, z, &t, scale) {
        return None;
    }
    let mut g = mf.grad_flat(z, &t);
    let mut merit = if cleared {
        cleared_norm(mf, z, &t, &g)
    } else {
        max_abs(&g)
    };
    let mut polish = 0;
    for _ in 0..opts.max_iter {
        if max_abs(&g) <= opts.tol {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let m = t.len();
        let mut jac = mf.hessian_flat(z, &t);
        if cleared {
            mf.for_each_pair(|var, partner, _| {
                let d = (t[var] - partner.value(z, &t)).inv();
                jac[(var, var)] += g[var] * d;
                if let Partner::Bethe(j) = partner {
                    jac[(var, j)] -= g[var] * d;
                }
            });
        }
        let rhs = CVector::from_iterator(m, g.iter().map(|x| -x));
        let step = jac.lu().solve(&rhs)?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<C64> = t.iter().zip(step.iter()).map(|(x, d)| x + d * alpha).collect();
            if admissible(mf, z, &trial, scale) {
                let tg = mf.grad_flat(z, &trial);
                let tm = if cleared {
                    cleared_norm(mf, z, &trial, &tg)
                } else {
                    max_abs(&tg)
                };
                let converged = max_abs(&g) <= opts.tol && max_abs(&tg) <= opts.tol;
                if tm < merit || converged {
                    t = trial;
                    g = tg;
                    merit = tm;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let gnorm = max_abs(&g);
    if gnorm > opts.tol {
        return None;
    }
    let mut levels = mf.unflatten(&t);
    for level in levels.iter_mut() {
        level.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }
    let p = mf.momenta(z, levels.first().map(Vec::as_slice).unwrap_or(&[]));
    Some(CriticalPoint {
        z: z.to_vec(),
        t: levels,
        p,
        grad_norm: gnorm,
    })
}

fn cleared_norm(mf: &MasterFunction, z: &[C64], t: &[C64], g: &[C64]) -> f64 {
    let mut log_d = vec![0.0; t.len()];
    mf.for_each_pair(|var, partner, _| {
        log_d[var] += (t[var] - partner.value(z, t)).norm().ln();
    });
    g.iter()
        .zip(&log_d)
        .map(|(gi, ld)| gi.norm_sqr() * (2.0 * ld).exp())
        .sum::<f64>()
        .sqrt()
}

/// Distance between two configurations, minimised over permutations
/// within each level.
fn same_critical_point(a: &CriticalPoint, b: &CriticalPoint, tol: f64) -> bool {
    a.t.iter().zip(&b.t).all(|(x, y)| level_distance(x, y) <= tol)
}

fn level_distance(x: &[C64], y: &[C64]) -> f64 {
    if x.len() <= 6 {
        let mut best = f64::INFINITY;
        for_each_permutation(x.len(), |perm, _| {
            let d = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (x[i] - y[j]).norm())
                .fold(0.0, f64::max);
            best = best.min(d);
        });
        return best;
    }
    let mut used = vec![false; y.len()];
    let mut worst: f64 = 0.0;
    for xi in x {
        let (j, d) = y
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, yj)| (j, (xi - yj).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("levels have equal size");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
