//! Wronski maps on polynomial and quasi-exponential tuples, the monic
//! differential operator annihilating a tuple, and the maps to `(z, p)`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calogero_moser::{bivariate_char, xi};
use crate::linalg::{CMatrix, CVector};
use crate::partitions::Partition;
use crate::poly::{leibniz_det, Poly};
use crate::sampling;
use crate::tensor_gaudin::{SpectralPoint, COLLISION_DELTA};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A point of `X_λ`: monic `f_i = u^{λ̃_i} + Σ_j f_ij u^{λ̃_i − j}`, where
/// only exponents outside `λ̃` carry free coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTuple {
    lambda: Partition,
    shifted: Vec<usize>,
    /// Free slots `(i, j)`, `i` zero based, `j ≥ 1`.
    slots: Vec<(usize, usize)>,
    values: Vec<C64>,
}

impl PolyTuple {
    /// The free slots of `X_λ`, ordered by `i` then `j`.
    pub fn free_slots(lambda: &Partition) -> Vec<(usize, usize)> {
        let shifted = lambda.shifted();
        let mut slots = Vec::new();
        for (i, &d) in shifted.entries.iter().enumerate() {
            for j in 1..=d {
                if !shifted.contains(d - j) {
                    slots.push((i, j));
                }
            }
        }
        slots
    }

    pub fn new(lambda: &Partition, values: Vec<C64>) -> Result<Self> {
        let slots = Self::free_slots(lambda);
        if values.len() != slots.len() {
            return Err(Error::InvalidInput(format!(
                "X_{lambda} has {} free coefficients, got {}",
                slots.len(),
                values.len()
            )));
        }
        Ok(Self {
            lambda: lambda.clone(),
            shifted: lambda.shifted().entries,
            slots,
            values,
        })
    }

    pub fn zero(lambda: &Partition) -> Self {
        let n = Self::free_slots(lambda).len();
        Self::new(lambda, vec![ZERO; n]).expect("slot count matches")
    }

    /// Free coefficients drawn uniformly from the disc of the given radius.
    pub fn random<R: Rng + ?Sized>(lambda: &Partition, radius: f64, rng: &mut R) -> Self {
        let n = Self::free_slots(lambda).len();
        let values = (0..n).map(|_| sampling::complex_in_disc(rng, radius)).collect();
        Self::new(lambda, values).expect("slot count matches")
    }

    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn n(&self) -> usize {
        self.shifted.len()
    }

    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `f_ij`, zero for fixed slots.
    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.slots
            .iter()
            .position(|&s| s == (i, j))
            .map_or(ZERO, |k| self.values[k])
    }

    pub fn polys(&self) -> Vec<Poly> {
        let mut coeffs: Vec<Vec<C64>> = self
            .shifted
            .iter()
            .map(|&d| {
                let mut c = vec![ZERO; d + 1];
                c[d] = ONE;
                c
            })
            .collect();
        for (&(i, j), &v) in self.slots.iter().zip(&self.values) {
            coeffs[i][self.shifted[i] - j] = v;
        }
        coeffs.into_iter().map(Poly::from_coeffs).collect()
    }

    fn prefactor(&self) -> C64 {
        let e = &self.shifted;
        let mut prod = 1.0;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                prod *= e[j] as f64 - e[i] as f64;
            }
        }
        C64::new(prod, 0.0)
    }

    fn derivative_rows(&self) -> Vec<Vec<Poly>> {
        let n = self.n();
        self.polys()
            .into_iter()
            .map(|f| {
                let mut row = vec![f];
                for m in 0..n {
                    let next = row[m].derivative();
                    row.push(next);
                }
                row
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PolyTupleJson {
    lambda: Partition,
    coeffs: BTreeMap<String, [f64; 2]>,
}

impl Serialize for PolyTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .slots
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), v)| (format!("{},{}", i + 1, j), [v.re, v.im]))
            .collect();
        PolyTupleJson {
            lambda: self.lambda.clone(),
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyTuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyTupleJson::deserialize(d)?;
        let slots = Self::free_slots(&raw.lambda);
        let mut values = vec![ZERO; slots.len()];
        for (key, [re, im]) in &raw.coeffs {
            let (i, j) = key
                .split_once(',')
                .and_then(|(i, j)| Some((i.trim().parse::<usize>().ok()?, j.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| D::Error::custom(format!("bad coefficient key {key:?}")))?;
            let k = slots
                .iter()
                .position(|&s| i >= 1 && s == (i - 1, j))
                .ok_or_else(|| D::Error::custom(format!("{key:?} is not a free slot")))?;
            values[k] = C64::new(*re, *im);
        }
        Self::new(&raw.lambda, values).map_err(D::Error::custom)
    }
}

/// A point of `X_q`: `f_i = e^{q_i u}(u + f_i1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiExpTuple {
    #[serde(with = "crate::json::complex_vec")]
    pub q: Vec<C64>,
    #[serde(with = "crate::json::complex_vec")]
    pub f: Vec<C64>,
}

impl QuasiExpTuple {
    pub fn new(q: Vec<C64>, f: Vec<C64>) -> Result<Self> {
        if q.is_empty() || q.len() != f.len() {
            return Err(Error::InvalidInput(
                "q and f must be nonempty and of equal length".into(),
            ));
        }
        crate::tensor_gaudin::check_distinct(&q, COLLISION_DELTA)?;
        Ok(Self { q, f })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `g_{i,m}` with `f_i^{(m)} = e^{q_i u} g_{i,m}`, for `m = 0..=n`.
    fn derivative_rows(&self) -> Vec<Vec<Poly>> {
        let n = self.n();
        self.q
            .iter()
            .zip(&self.f)
            .map(|(&q, &f)| {
                let mut row = vec![Poly::from_coeffs(vec![f, ONE])];
                for m in 0..n {
                    let next = &row[m].scale(q) + &row[m].derivative();
                    row.push(next);
                }
                row
            })
            .collect()
    }

    fn prefactor(&self) -> C64 {
        let q = &self.q;
        let mut prod = ONE;
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                prod *= q[j] - q[i];
            }
        }
        prod
    }
}

/// `u^n + Σ_a (−1)^a W_a u^{n−a}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonicPoly {
    #[serde(with = "crate::json::complex_vec")]
    pub w: Vec<C64>,
}

impl MonicPoly {
    /// The monic polynomial with the given roots; `W_a = σ_a(roots)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        Self {
            w: crate::linalg::elementary_symmetric(roots)[1..].to_vec(),
        }
    }

    fn from_poly(p: &Poly) -> Self {
        let n = p.degree().unwrap_or(0);
        Self {
            w: (1..=n)
                .map(|a| p.coeff(n - a) * if a % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.w.len()
    }

    pub fn poly(&self) -> Poly {
        let n = self.degree();
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        for (k, &w) in self.w.iter().enumerate() {
            let a = k + 1;
            coeffs[n - a] = w * if a % 2 == 0 { 1.0 } else { -1.0 };
        }
        Poly::from_coeffs(coeffs)
    }
}

/// `P_ij`, the coefficient of `u^{n−j} ∂^{n−i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffOpCoeffs {
    #[serde(with = "crate::json::complex_rows")]
    pub p: Vec<Vec<C64>>,
}

impl DiffOpCoeffs {
    fn from_polys(ops: &[Poly]) -> Self {
        let n = ops.len() - 1;
        Self {
            p: (0..=n)
                .map(|i| (0..=n).map(|j| ops[n - i].coeff(n - j)).collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.p.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.p[i][j]
    }

    /// Coefficient of `∂^k` as a polynomial in `u`.
    pub fn coefficient(&self, k: usize) -> Poly {
        let n = self.n();
        let i = n - k;
        Poly::from_coeffs((0..=n).map(|d| self.p[i][n - d]).collect())
    }

    /// `Σ P_ij u^{n−j} v^{n−i}`.
    pub fn eval_bivariate(&self, u: C64, v: C64) -> C64 {
        let n = self.n();
        let mut total = ZERO;
        for i in 0..=n {
            for j in 0..=n {
                total += self.p[i][j] * u.powu((n - j) as u32) * v.powu((n - i) as u32);
            }
        }
        total
    }
}

/// Determinant of `(g_i^{(j−1)})`.
pub fn wronskian(functions: &[Poly]) -> Poly {
    let n = functions.len();
    let rows: Vec<Vec<Poly>> = functions
        .iter()
        .map(|f| {
            let mut row = vec![f.clone()];
            for m in 1..n {
                let next = row[m - 1].derivative();
                row.push(next);
            }
            row
        })
        .collect();
    leibniz_det(&rows)
}

/// Wronskian of `e^{q_i u} g_i(u)`, returned as `(Σ q_i, polynomial)` with
/// `Wr = e^{(Σ q_i) u} · polynomial`.
pub fn wronskian_quasi(functions: &[(C64, Poly)]) -> (C64, Poly) {
    let n = functions.len();
    let rows: Vec<Vec<Poly>> = functions
        .iter()
        .map(|(q, g)| {
            let mut row = vec![g.clone()];
            for m in 1..n {
                let next = &row[m - 1].scale(*q) + &row[m - 1].derivative();
                row.push(next);
            }
            row
        })
        .collect();
    (functions.iter().map(|(q, _)| q).sum(), leibniz_det(&rows))
}

/// Cofactors of the bordered `(n+1)×(n+1)` matrix along the last row
/// `(1, ∂, …, ∂ⁿ)`, divided by `prefactor`: entry `k` multiplies `∂^k`.
fn operator_polys(rows: &[Vec<Poly>], prefactor: C64) -> Vec<Poly> {
    let n = rows.len();
    let scale = prefactor.inv();
    (0..=n)
        .map(|k| {
            let minor: Vec<Vec<Poly>> = rows
                .iter()
                .map(|row| (0..=n).filter(|&m| m != k).map(|m| row[m].clone()).collect())
                .collect();
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            leibniz_det(&minor).scale(scale * sign)
        })
        .collect()
}

fn checked_monic(wr: &Poly, n: usize) -> Result<MonicPoly> {
    let tol = 1e-10 * wr.max_abs_coeff().max(1.0);
    let degree = wr.effective_degree(tol).unwrap_or(0);
    if degree != n {
        return Err(Error::WronskianDegree {
            expected: n,
            found: degree,
        });
    }
    let relative = (wr.coeff(n) - ONE).norm();
    if relative > 1e-10 {
        return Err(Error::LeadingCoefficient { relative });
    }
    Ok(MonicPoly::from_poly(&wr.truncate(n + 1)))
}

/// `W_1, …, W_n` of `Wr(f_1, …, f_n) / Π_{i<j}(λ̃_j − λ̃_i)`.
pub fn wronski_map(x: &PolyTuple) -> Result<MonicPoly> {
    let rows = x.derivative_rows();
    let square: Vec<Vec<Poly>> = rows.iter().map(|r| r[..x.n()].to_vec()).collect();
    checked_monic(&leibniz_det(&square).scale(x.prefactor().inv()), x.n())
}

/// Coefficients of the monic operator `D_{λ,x}` annihilating `f_1, …, f_n`.
pub fn fundamental_operator(x: &PolyTuple) -> DiffOpCoeffs {
    DiffOpCoeffs::from_polys(&operator_polys(&x.derivative_rows(), x.prefactor()))
}

/// `W_1, …, W_n` of the quasi-exponential Wronskian with
/// `e^{σ_1(q) u} Π_{i<j}(q_j − q_i)` removed.
pub fn wronski_map_q(x: &QuasiExpTuple) -> Result<MonicPoly> {
    let rows = x.derivative_rows();
    let square: Vec<Vec<Poly>> = rows.iter().map(|r| r[..x.n()].to_vec()).collect();
    checked_monic(&leibniz_det(&square).scale(x.prefactor().inv()), x.n())
}

/// `D_{q,x}` with the exponential factor removed.
pub fn fundamental_operator_q(x: &QuasiExpTuple) -> DiffOpCoeffs {
    DiffOpCoeffs::from_polys(&operator_polys(&x.derivative_rows(), x.prefactor()))
}

/// Largest coefficient of `D f_i`, relative to the size of the terms.
pub fn annihilation_residual(x: &PolyTuple) -> f64 {
    let op = fundamental_operator(x);
    worst_annihilation(&op, &x.derivative_rows())
}

/// As [`annihilation_residual`], for `D_{q,x}` acting on `e^{q_i u}(u + f_i1)`.
pub fn annihilation_residual_q(x: &QuasiExpTuple) -> f64 {
    let op = fundamental_operator_q(x);
    worst_annihilation(&op, &x.derivative_rows())
}

fn worst_annihilation(op: &DiffOpCoeffs, rows: &[Vec<Poly>]) -> f64 {
    let n = op.n();
    let coefficients: Vec<Poly> = (0..=n).map(|k| op.coefficient(k)).collect();
    rows.iter()
        .map(|row| {
            let mut total = Poly::zero();
            let mut scale: f64 = 0.0;
            for k in 0..=n {
                let term = &coefficients[k] * &row[k];
                scale = scale.max(term.max_abs_coeff());
                total = &total + &term;
            }
            total.max_abs_coeff() / scale.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Largest coefficient deviation between `Σ_{i=0}^n P_ii Π_{j>i}(s + j)` and
/// `Π_{j=1}^n (s − λ_j + j)`.
pub fn fla_residual(x: &PolyTuple) -> f64 {
    let op = fundamental_operator(x);
    let n = x.n();
    let mut lhs = Poly::zero();
    for i in 0..=n {
        let mut term = Poly::constant(op.get(i, i));
        for j in i + 1..=n {
            term = &term * &Poly::from_coeffs(vec![C64::new(j as f64, 0.0), ONE]);
        }
        lhs = &lhs + &term;
    }
    let mut rhs = Poly::one();
    for j in 1..=n {
        let shift = j as f64 - x.lambda().part(j - 1) as f64;
        rhs = &rhs * &Poly::from_coeffs(vec![C64::new(shift, 0.0), ONE]);
    }
    (&lhs - &rhs).max_abs_coeff()
}

fn sorted_roots(monic: &MonicPoly) -> Result<Vec<C64>> {
    let mut z = monic.poly().roots()?;
    z.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            let distance = (z[a] - z[b]).norm();
            if distance < COLLISION_DELTA {
                return Err(Error::RepeatedRoots { a, b, distance });
            }
        }
    }
    Ok(z)
}

fn residue_momenta(op: &DiffOpCoeffs, z: &[C64], shift: C64) -> Vec<C64> {
    let n = z.len();
    if n < 2 {
        return vec![shift; n];
    }
    let n2 = op.coefficient(n - 2);
    (0..n)
        .map(|a| {
            let mut denom = ONE;
            let mut pairwise = ZERO;
            for b in (0..n).filter(|&b| b != a) {
                denom *= z[a] - z[b];
                pairwise += (z[a] - z[b]).inv();
            }
            -n2.eval(z[a]) / denom + pairwise + shift
        })
        .collect()
}

fn root_residual(monic: &MonicPoly, z: &[C64]) -> f64 {
    let poly = monic.poly();
    let scale = poly.max_abs_coeff().max(1.0);
    z.iter().map(|&r| poly.eval(r).norm() / scale).fold(0.0, f64::max)
}

/// `ψ_λ(x) = (z_x, p_x)`, with `z_x` sorted by `(re, im)`.
pub fn psi(x: &PolyTuple) -> Result<SpectralPoint> {
    let monic = wronski_map(x)?;
    let z = sorted_roots(&monic)?;
    let p = residue_momenta(&fundamental_operator(x), &z, ZERO);
    Ok(SpectralPoint {
        residual: root_residual(&monic, &z),
        z,
        p,
    })
}

/// `ψ_q(x)`; needs `n ≥ 2`.
pub fn psi_q(x: &QuasiExpTuple) -> Result<SpectralPoint> {
    if x.n() < 2 {
        return Err(Error::Unsupported("psi_q needs at least two functions".into()));
    }
    let monic = wronski_map_q(x)?;
    let z = sorted_roots(&monic)?;
    let shift: C64 = x.q.iter().sum();
    let p = residue_momenta(&fundamental_operator_q(x), &z, shift);
    Ok(SpectralPoint {
        residual: root_residual(&monic, &z),
        z,
        p,
    })
}

/// Largest deviation of `det((u − Z_x)(v − Q_x) − 1)` from
/// `Σ P_ij u^{n−j} v^{n−i}` over a seeded 5×5 grid, relative to the size of
/// the terms.
pub fn bivariate_identity_residual(x: &PolyTuple, seed: u64) -> Result<f64> {
    let sp = psi(x)?;
    let point = xi(&sp.z, &sp.p)?;
    let op = fundamental_operator(x);
    let n = x.n();
    let mut rng = sampling::rng(seed);
    let us: Vec<C64> = (0..5).map(|_| sampling::complex_in_disc(&mut rng, 2.0)).collect();
    let vs: Vec<C64> = (0..5).map(|_| sampling::complex_in_disc(&mut rng, 2.0)).collect();
    let mut worst: f64 = 0.0;
    for &u in &us {
        for &v in &vs {
            let mut scale: f64 = 1.0;
            for i in 0..=n {
                for j in 0..=n {
                    let term = op.p[i][j] * u.powu((n - j) as u32) * v.powu((n - i) as u32);
                    scale = scale.max(term.norm());
                }
            }
            let diff = bivariate_char(&point, u, v) - op.eval_bivariate(u, v);
            worst = worst.max(diff.norm() / scale);
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FiberOptions {
    pub starts: usize,
    pub max_starts: usize,
    pub max_iter: usize,
    /// Newton stops once `max_a |W_a(x) − σ_a|` is below this, relative to
    /// `max(1, |σ|_∞)`.
    pub tol: f64,
    pub dedup_tol: f64,
}

impl Default for FiberOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            max_starts: 4096,
            max_iter: 200,
            tol: 1e-12,
            dedup_tol: 1e-6,
        }
    }
}

/// Preimages of a point under the Wronski map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberSolution {
    pub lambda: Partition,
    #[serde(with = "crate::json::complex_vec")]
    pub sigma: Vec<C64>,
    pub solutions: Vec<PolyTuple>,
    /// `max_a |W_a − σ_a| / max(1, |σ|_∞)` per solution.
    pub residuals: Vec<f64>,
    pub expected: usize,
    pub starts_used: usize,
}

impl FiberSolution {
    pub fn complete(&self) -> bool {
        self.solutions.len() == self.expected
    }
}

fn fiber_residual(x: &PolyTuple, sigma: &[C64]) -> Option<(Vec<C64>, f64)> {
    let w = wronski_map(x).ok()?;
    let f: Vec<C64> = w.w.iter().zip(sigma).map(|(a, b)| a - b).collect();
    let scale = sigma.iter().map(|s| s.norm()).fold(1.0, f64::max);
    let r = f.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
    Some((f, r))
}

/// `∂W_a/∂f_s` from multilinearity: replace `f_i` by `u^{λ̃_i − j}`.
fn fiber_jacobian(x: &PolyTuple) -> CMatrix {
    let n = x.n();
    let polys = x.polys();
    let scale = x.prefactor().inv();
    let mut jac = CMatrix::zeros(n, n);
    for (s, &(i, j)) in x.slots().iter().enumerate() {
        let mut fs = polys.clone();
        fs[i] = Poly::monomial(x.shifted[i] - j, ONE);
        let w = wronskian(&fs).scale(scale);
        for a in 1..=n {
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            jac[(a - 1, s)] = w.coeff(n - a) * sign;
        }
    }
    jac
}

fn fiber_newton(lambda: &Partition, sigma: &[C64], start: Vec<C64>, opts: &FiberOptions) -> Option<(PolyTuple, f64)> {
    let mut x = PolyTuple::new(lambda, start).ok()?;
    let (mut f, mut r) = fiber_residual(&x, sigma)?;
    let mut polish = 0;
    for _ in 0..opts.max_iter {
        if r <= opts.tol {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let jac = fiber_jacobian(&x);
        let rhs = CVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let values: Vec<C64> = x.values.iter().zip(step.iter()).map(|(v, d)| v + d * alpha).collect();
            if values.iter().all(|v| v.is_finite() && v.norm() < 1e12) {
                let trial = PolyTuple::new(lambda, values).ok()?;
                if let Some((tf, tr)) = fiber_residual(&trial, sigma) {
                    if tr < r || (r <= opts.tol && tr <= opts.tol) {
                        x = trial;
                        f = tf;
                        r = tr;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (r <= opts.tol).then_some((x, r))
}

/// Solutions of `W_a(x) = σ_a`, found by seeded multistart Newton with the
/// start count multiplied by 4 until `d_λ` distinct solutions appear or
/// `max_starts` is reached.
pub fn wronski_fiber(lambda: &Partition, sigma: &[C64], opts: &FiberOptions, seed: u64) -> Result<FiberSolution> {
    let n = lambda.weight();
    if sigma.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} target values")));
    }
    let expected = lambda.irrep_dimension() as usize;
    let shifted = lambda.shifted().entries;
    let slots = PolyTuple::free_slots(lambda);
    let radius = sigma
        .iter()
        .enumerate()
        .map(|(k, s)| s.norm().powf(1.0 / (k + 1) as f64))
        .fold(1.0, f64::max);

    let mut found: Vec<(PolyTuple, f64)> = Vec::new();
    let mut launched = 0;
    let mut batch = opts.starts.max(1);
    loop {
        let results: Vec<Option<(PolyTuple, f64)>> = (launched..launched + batch)
            .into_par_iter()
            .map(|k| {
                let mut rng = sampling::rng(sampling::derive_seed(seed, &format!("fiber-{k}")));
                let start = slots
                    .iter()
                    .map(|&(i, j)| {
                        let size = (2.0 * radius * shifted[i] as f64).powi(j as i32) / factorial(j);
                        sampling::complex_in_disc(&mut rng, size)
                    })
                    .collect();
                fiber_newton(lambda, sigma, start, opts)
            })
            .collect();
        launched += batch;
        for (x, r) in results.into_iter().flatten() {
            let size = 1.0 + x.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let duplicate = found.iter().any(|(y, _)| {
                x.values
                    .iter()
                    .zip(&y.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
                    <= opts.dedup_tol * size
            });
            if !duplicate {
                found.push((x, r));
            }
        }
        if found.len() >= expected || launched >= opts.max_starts {
            break;
        }
        batch = (launched * 3).min(opts.max_starts - launched);
    }
    found.sort_by(|(a, _), (b, _)| {
        let ka: Vec<(f64, f64)> = a.values.iter().map(|v| (v.re, v.im)).collect();
        let kb: Vec<(f64, f64)> = b.values.iter().map(|v| (v.re, v.im)).collect();
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let (solutions, residuals) = found.into_iter().unzip();
    Ok(FiberSolution {
        lambda: lambda.clone(),
        sigma: sigma.to_vec(),
        solutions,
        residuals,
        expected,
        starts_used: launched,
    })
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|k| k as f64).product()
}
