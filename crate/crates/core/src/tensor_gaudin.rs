//! Weight subspaces of `V^{⊗n}`, `V = C^N`, and the Gaudin Hamiltonians
//! acting on them.
//!
//! Operators are only ever assembled on a fixed weight space, in the basis
//! of standard tensors `e_{i_1} ⊗ … ⊗ e_{i_n}` of that weight. Indices in
//! this module are zero based: colours run over `0..N` and sites over
//! `0..n`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, CVector};
use crate::partitions::Partition;
use crate::sampling::{self, SeededRng};
use crate::{Error, Result, C64};

/// Largest weight-space dimension we are willing to assemble densely.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Positions closer than this are treated as colliding.
pub const COLLISION_DELTA: f64 = 1e-8;

/// Ordered basis of a weight subspace of `V^{⊗n}`.
#[derive(Clone, Debug)]
pub struct WeightBasis {
    rank: usize,
    weight: Vec<usize>,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
}

impl WeightBasis {
    /// Multi-indices with `weight[k]` occurrences of colour `k`, in
    /// lexicographic order. `rank` is `N`; the number of sites is the sum
    /// of the weight.
    pub fn new(rank: usize, sites: usize, weight: &[i64]) -> Result<Self> {
        Self::with_cap(rank, sites, weight, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(rank: usize, sites: usize, weight: &[i64], cap: usize) -> Result<Self> {
        if rank == 0 || rank > u8::MAX as usize {
            return Err(Error::InvalidWeight(format!("unsupported rank {rank}")));
        }
        if weight.len() != rank {
            return Err(Error::InvalidWeight(format!(
                "weight {weight:?} has {} entries, expected {rank}",
                weight.len()
            )));
        }
        if weight.iter().any(|&w| w < 0) {
            return Err(Error::InvalidWeight(format!("weight {weight:?} has a negative entry")));
        }
        let weight: Vec<usize> = weight.iter().map(|&w| w as usize).collect();
        if weight.iter().sum::<usize>() != sites {
            return Err(Error::InvalidWeight(format!(
                "weight {weight:?} does not sum to {sites}"
            )));
        }
        let dim = multinomial(&weight);
        if dim > cap {
            return Err(Error::DimensionTooLarge { dim, cap });
        }

        fn fill(remaining: &mut [usize], prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if remaining.iter().all(|&r| r == 0) {
                out.push(prefix.clone());
                return;
            }
            for colour in 0..remaining.len() {
                if remaining[colour] > 0 {
                    remaining[colour] -= 1;
                    prefix.push(colour as u8);
                    fill(remaining, prefix, out);
                    prefix.pop();
                    remaining[colour] += 1;
                }
            }
        }

        let mut indices = Vec::with_capacity(dim);
        fill(&mut weight.clone(), &mut Vec::with_capacity(sites), &mut indices);
        let lookup = indices.iter().enumerate().map(|(k, idx)| (idx.clone(), k)).collect();
        Ok(Self {
            rank,
            weight,
            indices,
            lookup,
        })
    }

    /// The weight space `V^{⊗n}[1, …, 1]` with `N = n`.
    pub fn unit_weight(sites: usize) -> Result<Self> {
        Self::new(sites, sites, &vec![1; sites])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sites(&self) -> usize {
        self.weight.iter().sum()
    }

    pub fn weight(&self) -> &[usize] {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<u8>] {
        &self.indices
    }

    pub fn position(&self, index: &[u8]) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Matrix of `Σ_a e_{ij}^{(a)}` from this weight space to the shifted
    /// one, or `None` when the target weight is not realisable.
    pub fn total_eij(&self, i: usize, j: usize) -> Option<(WeightBasis, CMatrix)> {
        let target = self.shifted_weight(i, j)?;
        let mut m = CMatrix::zeros(target.dim(), self.dim());
        for (col, idx) in self.indices.iter().enumerate() {
            for a in 0..idx.len() {
                if let Some(row) = target.site_image(i, j, a, idx) {
                    m[(row, col)] += C64::new(1.0, 0.0);
                }
            }
        }
        Some((target, m))
    }

    fn shifted_weight(&self, i: usize, j: usize) -> Option<WeightBasis> {
        if i == j {
            return Some(self.clone());
        }
        if self.weight[j] == 0 {
            return None;
        }
        let mut w: Vec<i64> = self.weight.iter().map(|&x| x as i64).collect();
        w[i] += 1;
        w[j] -= 1;
        WeightBasis::with_cap(self.rank, self.sites(), &w, usize::MAX).ok()
    }

    /// Position (in `self`) of `e_{ij}^{(a)} e_idx` when it is nonzero.
    fn site_image(&self, i: usize, j: usize, a: usize, idx: &[u8]) -> Option<usize> {
        if idx[a] as usize != j {
            return None;
        }
        let mut image = idx.to_vec();
        image[a] = i as u8;
        self.position(&image)
    }
}

fn multinomial(weight: &[usize]) -> usize {
    let mut result: u128 = 1;
    let mut seen: u128 = 0;
    for &w in weight {
        for k in 1..=w as u128 {
            seen += 1;
            result = result * seen / k;
        }
    }
    usize::try_from(result).unwrap_or(usize::MAX)
}

/// Applies `e_{ij}^{(a)}` to a vector given in `basis` coordinates.
///
/// Returns the image on the basis of the shifted weight, or `None` when
/// that weight has a negative entry (the image is then zero).
pub fn apply_eij(
    i: usize,
    j: usize,
    a: usize,
    basis: &WeightBasis,
    vector: &CVector,
) -> Option<(WeightBasis, CVector)> {
    assert!(i < basis.rank() && j < basis.rank() && a < basis.sites());
    let target = basis.shifted_weight(i, j)?;
    let mut out = CVector::zeros(target.dim());
    for (col, idx) in basis.indices().iter().enumerate() {
        if let Some(row) = target.site_image(i, j, a, idx) {
            out[row] += vector[col];
        }
    }
    Some((target, out))
}

/// Columns of `vectors` are an orthonormal basis of a subspace of the weight
/// space `basis`.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: WeightBasis,
    pub vectors: CMatrix,
}

impl Subspace {
    /// The whole weight space.
    pub fn full(basis: WeightBasis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            vectors: CMatrix::identity(d, d),
        }
    }

    /// `Sing V^{⊗n}[λ]` for `V = C^N`: weight-`λ` vectors killed by every
    /// `Σ_a e_{ij}^{(a)}` with `i < j`.
    pub fn singular(lambda: &Partition, rank: usize) -> Result<Self> {
        let n = lambda.weight();
        let weight: Vec<i64> = lambda.padded(rank)?.into_iter().map(|w| w as i64).collect();
        let basis = WeightBasis::new(rank, n, &weight)?;
        let blocks: Vec<CMatrix> = (0..rank)
            .flat_map(|i| (i + 1..rank).map(move |j| (i, j)))
            .filter_map(|(i, j)| basis.total_eij(i, j).map(|(_, m)| m))
            .collect();
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut raising = CMatrix::zeros(rows, basis.dim());
        let mut offset = 0;
        for b in &blocks {
            raising.view_mut((offset, 0), b.shape()).copy_from(b);
            offset += b.nrows();
        }
        let scale = linalg::frobenius(&raising).max(1.0);
        let vectors = linalg::null_space(&raising, 1e-9 * scale)?;
        let expected = lambda.irrep_dimension() as usize;
        if vectors.ncols() != expected {
            return Err(Error::SingularDimension {
                expected,
                found: vectors.ncols(),
            });
        }
        Ok(Self { basis, vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Restricts an operator given on the ambient weight space.
    pub fn restrict(&self, op: &CMatrix) -> Result<SubspaceOperator> {
        let v = &self.vectors;
        let matrix = v.adjoint() * op * v;
        let defect = linalg::frobenius(&(op * v - v * &matrix)) / linalg::frobenius(op).max(1.0);
        if defect > RESTRICTION_TOL {
            return Err(Error::RestrictionDefect { residual: defect });
        }
        Ok(SubspaceOperator {
            matrix,
            restriction_defect: defect,
        })
    }
}

const RESTRICTION_TOL: f64 = 1e-11;

/// An operator restricted to a [`Subspace`], in the coordinates of its
/// orthonormal basis.
#[derive(Clone, Debug)]
pub struct SubspaceOperator {
    pub matrix: CMatrix,
    /// `‖H V − V M‖ / max(1, ‖H‖)`.
    pub restriction_defect: f64,
}

pub fn check_distinct(z: &[C64], delta: f64) -> Result<()> {
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            let distance = (z[a] - z[b]).norm();
            if distance < delta {
                return Err(Error::Collision { a, b, distance });
            }
        }
    }
    Ok(())
}

/// `Σ_{b≠a} Ω^{(ab)} / (z_a − z_b)` on the full weight space, where
/// `Ω^{(ab)} = Σ_{ij} e_{ij}^{(a)} e_{ji}^{(b)}` swaps tensor factors `a`
/// and `b`.
fn gaudin_on_weight_space(a: usize, z: &[C64], basis: &WeightBasis) -> CMatrix {
    let d = basis.dim();
    let mut h = CMatrix::zeros(d, d);
    for (col, idx) in basis.indices().iter().enumerate() {
        for b in (0..z.len()).filter(|&b| b != a) {
            let mut swapped = idx.clone();
            swapped.swap(a, b);
            let row = basis.position(&swapped).expect("swap preserves weight");
            h[(row, col)] += (z[a] - z[b]).inv();
        }
    }
    h
}

/// Gaudin Hamiltonian `H_a(z)` (site `a`, zero based) restricted to `subspace`.
pub fn gaudin_hamiltonian(a: usize, z: &[C64], subspace: &Subspace) -> Result<SubspaceOperator> {
    check_sites(a, z, &subspace.basis)?;
    check_distinct(z, COLLISION_DELTA)?;
    subspace.restrict(&gaudin_on_weight_space(a, z, &subspace.basis))
}

/// `H_a(z, q) = Σ_i q_i e_{ii}^{(a)} + H_a(z)` restricted to `subspace`.
pub fn generalized_gaudin(a: usize, z: &[C64], q: &[C64], subspace: &Subspace) -> Result<SubspaceOperator> {
    let basis = &subspace.basis;
    check_sites(a, z, basis)?;
    if q.len() != basis.rank() {
        return Err(Error::InvalidInput(format!(
            "q has {} entries, expected {}",
            q.len(),
            basis.rank()
        )));
    }
    check_distinct(z, COLLISION_DELTA)?;
    let mut h = gaudin_on_weight_space(a, z, basis);
    for (k, idx) in basis.indices().iter().enumerate() {
        h[(k, k)] += q[idx[a] as usize];
    }
    subspace.restrict(&h)
}

fn check_sites(a: usize, z: &[C64], basis: &WeightBasis) -> Result<()> {
    if z.len() != basis.sites() {
        return Err(Error::InvalidInput(format!(
            "{} positions for {} sites",
            z.len(),
            basis.sites()
        )));
    }
    if a >= z.len() {
        return Err(Error::InvalidInput(format!("site {a} out of range")));
    }
    Ok(())
}

/// Tolerances for [`joint_eigen`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JointEigenOptions {
    /// Relative eigen-residual and commutator tolerance.
    pub tol: f64,
    /// Probe eigenvalues closer than `gap_tol·‖probe‖` are treated as one
    /// cluster and resolved on their invariant subspace.
    pub gap_tol: f64,
    pub max_retries: usize,
}

impl Default for JointEigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            gap_tol: 1e-6,
            max_retries: 8,
        }
    }
}

/// One joint eigenvector of a commuting family.
#[derive(Clone, Debug)]
pub struct JointEigenpair {
    /// Eigenvalue of each operator, in input order.
    pub p: Vec<C64>,
    /// Unit right eigenvector.
    pub vector: CVector,
    /// `max_a ‖H_a v − p_a v‖ / (1 + ‖H_a‖)`.
    pub residual: f64,
    /// Dimension of the joint eigenspace this vector was drawn from.
    pub multiplicity: usize,
}

const MAX_DEPTH: usize = 4;

/// Joint eigenvectors of commuting matrices from a random linear
/// combination `Σ c_a H_a`, with `c` drawn from `seed`.
///
/// Eigenvalues of the probe that are numerically degenerate are grouped;
/// on each group's invariant subspace the family is either scalar (a joint
/// eigenspace, reported once per basis vector) or diagonalised again with a
/// fresh probe.
pub fn joint_eigen(ops: &[CMatrix], opts: &JointEigenOptions, seed: u64) -> Result<Vec<JointEigenpair>> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidInput("joint_eigen needs at least one operator".into()))?;
    let d = first.nrows();
    if ops.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::InvalidInput("operators must be square of equal size".into()));
    }
    let scale = ops.iter().map(linalg::frobenius).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            worst = worst.max(linalg::frobenius(&linalg::commutator(&ops[a], &ops[b])));
        }
    }
    let worst = worst / (scale * scale);
    if worst > opts.tol {
        return Err(Error::NonCommuting { residual: worst });
    }
    let mut rng = sampling::rng(seed);
    resolve(ops, opts, &mut rng, 0)
}

fn resolve(
    ops: &[CMatrix],
    opts: &JointEigenOptions,
    rng: &mut SeededRng,
    depth: usize,
) -> Result<Vec<JointEigenpair>> {
    let d = ops[0].nrows();
    if d == 0 {
        return Ok(Vec::new());
    }
    let norms: Vec<f64> = ops.iter().map(linalg::frobenius).collect();
    let mut last_error = Error::IllConditionedProbe {
        retries: opts.max_retries,
    };
    for _ in 0..opts.max_retries.max(1) {
        let coeffs: Vec<C64> = ops.iter().map(|_| sampling::complex_in_disc(rng, 1.0)).collect();
        let probe = ops
            .iter()
            .zip(&coeffs)
            .fold(CMatrix::zeros(d, d), |acc, (h, &c)| acc + h * c);
        match resolve_with_probe(ops, &norms, &probe, opts, rng, depth) {
            Ok(pairs) => return Ok(pairs),
            Err(ProbeFailure::Retry(e)) => last_error = e,
            Err(ProbeFailure::Fatal(e)) => return Err(e),
        }
    }
    Err(last_error)
}

enum ProbeFailure {
    Retry(Error),
    Fatal(Error),
}

fn resolve_with_probe(
    ops: &[CMatrix],
    norms: &[f64],
    probe: &CMatrix,
    opts: &JointEigenOptions,
    rng: &mut SeededRng,
    depth: usize,
) -> std::result::Result<Vec<JointEigenpair>, ProbeFailure> {
    let d = probe.nrows();
    let mu = linalg::eigenvalues(probe).map_err(ProbeFailure::Retry)?;
    let pscale = linalg::frobenius(probe).max(f64::MIN_POSITIVE);
    let clusters = cluster_eigenvalues(&mu, opts.gap_tol * pscale);
    let ill = || {
        ProbeFailure::Retry(Error::IllConditionedProbe {
            retries: opts.max_retries,
        })
    };

    let mut out = Vec::with_capacity(d);
    for cluster in clusters {
        if cluster.len() == 1 {
            let lambda = mu[cluster[0]];
            let shifted = probe - CMatrix::identity(d, d) * lambda;
            let (u, _, v) = linalg::svd(&shifted).map_err(ProbeFailure::Retry)?;
            let right = v.column(d - 1).into_owned();
            let left = u.column(d - 1).into_owned();
            let overlap = left.dotc(&right);
            if overlap.norm() < 1e-8 {
                return Err(ill());
            }
            let p: Vec<C64> = ops.iter().map(|h| left.dotc(&(h * &right)) / overlap).collect();
            let residual = eigen_residual(ops, norms, &p, &right);
            if residual > opts.tol {
                return Err(ill());
            }
            out.push(JointEigenpair {
                p,
                vector: right,
                residual,
                multiplicity: 1,
            });
            continue;
        }

        // Invariant subspace of the cluster: kernel of Π (P − μ_i).
        let k = cluster.len();
        let annihilator = cluster.iter().fold(CMatrix::identity(d, d), |acc, &i| {
            acc * (probe - CMatrix::identity(d, d) * mu[i])
        });
        let (_, _, v) = linalg::svd(&annihilator).map_err(ProbeFailure::Retry)?;
        let basis = v.columns(d - k, k).into_owned();
        let restricted: Vec<CMatrix> = ops.iter().map(|h| basis.adjoint() * h * &basis).collect();
        for ((h, m), norm) in ops.iter().zip(&restricted).zip(norms) {
            let defect = linalg::frobenius(&(h * &basis - &basis * m)) / (1.0 + norm);
            if defect > opts.tol {
                return Err(ProbeFailure::Retry(Error::NotDiagonalizable {
                    cluster: k,
                    eigenvectors: 0,
                }));
            }
        }
        let means: Vec<C64> = restricted.iter().map(|m| m.trace() / k as f64).collect();
        let centred: Vec<CMatrix> = restricted
            .iter()
            .zip(&means)
            .map(|(m, &c)| m - CMatrix::identity(k, k) * c)
            .collect();
        let scalar = centred
            .iter()
            .zip(norms)
            .all(|(m, norm)| linalg::frobenius(m) <= opts.tol * (1.0 + norm));
        if scalar {
            for col in 0..k {
                let vector = basis.column(col).into_owned();
                let residual = eigen_residual(ops, norms, &means, &vector);
                out.push(JointEigenpair {
                    p: means.clone(),
                    vector,
                    residual,
                    multiplicity: k,
                });
            }
            continue;
        }
        if depth + 1 >= MAX_DEPTH {
            return Err(ProbeFailure::Fatal(Error::NotDiagonalizable {
                cluster: k,
                eigenvectors: 0,
            }));
        }
        let inner = resolve(&centred, opts, rng, depth + 1).map_err(ProbeFailure::Fatal)?;
        for pair in inner {
            let p: Vec<C64> = pair.p.iter().zip(&means).map(|(a, b)| a + b).collect();
            let vector = &basis * &pair.vector;
            let residual = eigen_residual(ops, norms, &p, &vector);
            if residual > opts.tol {
                return Err(ill());
            }
            out.push(JointEigenpair {
                p,
                vector,
                residual,
                multiplicity: pair.multiplicity,
            });
        }
    }
    Ok(out)
}

fn eigen_residual(ops: &[CMatrix], norms: &[f64], p: &[C64], v: &CVector) -> f64 {
    let vnorm = v.norm().max(f64::MIN_POSITIVE);
    ops.iter()
        .zip(p)
        .zip(norms)
        .map(|((h, &pa), norm)| (h * v - v * pa).norm() / (vnorm * (1.0 + norm)))
        .fold(0.0, f64::max)
}

/// Single-linkage clusters of eigenvalues closer than `cutoff`, ordered by
/// smallest member index.
fn cluster_eigenvalues(mu: &[C64], cutoff: f64) -> Vec<Vec<usize>> {
    let n = mu.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (mu[i] - mu[j]).norm() <= cutoff {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let g = *slot.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// A point `(z, p)` of a Gaudin spectral variety.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralPoint {
    #[serde(with = "crate::json::complex_vec")]
    pub z: Vec<C64>,
    #[serde(with = "crate::json::complex_vec")]
    pub p: Vec<C64>,
    pub residual: f64,
}

fn to_points(z: &[C64], pairs: Vec<JointEigenpair>) -> Vec<SpectralPoint> {
    pairs
        .into_iter()
        .map(|pair| SpectralPoint {
            z: z.to_vec(),
            p: pair.p,
            residual: pair.residual,
        })
        .collect()
}

/// Joint spectrum of `H_1(z), …, H_n(z)` on `Sing V^{⊗n}[λ]` with `V = C^N`;
/// one point per eigenvector, so `d_λ` points counted with multiplicity.
pub fn spectral_points(
    lambda: &Partition,
    z: &[C64],
    rank: usize,
    opts: &JointEigenOptions,
    seed: u64,
) -> Result<Vec<SpectralPoint>> {
    let subspace = Subspace::singular(lambda, rank)?;
    let ops = (0..z.len())
        .map(|a| gaudin_hamiltonian(a, z, &subspace).map(|h| h.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(to_points(z, joint_eigen(&ops, opts, seed)?))
}

/// Joint spectrum of `H_a(z, q)` on `V^{⊗n}[1, …, 1]`, `N = n`.
pub fn twisted_spectral_points(
    z: &[C64],
    q: &[C64],
    opts: &JointEigenOptions,
    seed: u64,
) -> Result<Vec<SpectralPoint>> {
    Ok(to_points(z, twisted_eigenpairs(z, q, opts, seed)?))
}

/// As [`twisted_spectral_points`], keeping eigenvectors and multiplicities.
pub fn twisted_eigenpairs(z: &[C64], q: &[C64], opts: &JointEigenOptions, seed: u64) -> Result<Vec<JointEigenpair>> {
    let subspace = Subspace::full(WeightBasis::unit_weight(z.len())?);
    let ops = (0..z.len())
        .map(|a| generalized_gaudin(a, z, q, &subspace).map(|h| h.matrix))
        .collect::<Result<Vec<_>>>()?;
    joint_eigen(&ops, opts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn basis(rank: usize, weight: &[i64]) -> WeightBasis {
        let n = weight.iter().sum::<i64>() as usize;
        WeightBasis::new(rank, n, weight).unwrap()
    }

    fn unit(basis: &WeightBasis, index: &[u8]) -> CVector {
        let mut v = CVector::zeros(basis.dim());
        v[basis.position(index).unwrap()] = c(1.0, 0.0);
        v
    }

    #[test]
    fn weight_basis_examples() {
        assert_eq!(basis(2, &[1, 1]).indices(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(basis(2, &[2, 0]).indices(), &[vec![0, 0]]);
        assert_eq!(basis(3, &[1, 1, 1]).dim(), 6);
        assert_eq!(basis(3, &[2, 1, 1]).dim(), 12);
        assert!(WeightBasis::new(2, 2, &[3, -1]).is_err());
        assert!(WeightBasis::new(2, 3, &[1, 1]).is_err());
        assert!(WeightBasis::new(3, 2, &[1, 1]).is_err());
    }

    #[test]
    fn eij_action_examples() {
        let b = basis(2, &[2, 0]);
        let (target, image) = apply_eij(1, 0, 1, &b, &unit(&b, &[0, 0])).unwrap();
        assert_eq!(image, unit(&target, &[0, 1]));

        let b = basis(2, &[1, 1]);
        let (_, image) = apply_eij(0, 1, 0, &b, &unit(&b, &[0, 1])).unwrap();
        assert_eq!(image.norm(), 0.0);

        let (target, image) = apply_eij(0, 0, 0, &b, &unit(&b, &[0, 1])).unwrap();
        assert_eq!(image, unit(&target, &[0, 1]));

        assert!(apply_eij(0, 1, 0, &basis(2, &[2, 0]), &CVector::zeros(1)).is_none());
    }

    #[test]
    fn swap_matches_eij_composition() {
        // Σ_ij e_ij^(a) e_ji^(b) composed from single-site actions.
        let b = basis(3, &[2, 1, 1]);
        let (sa, sb) = (0, 2);
        for col in 0..b.dim() {
            let v = unit(&b, &b.indices()[col]);
            let mut total = CVector::zeros(b.dim());
            for i in 0..3 {
                for j in 0..3 {
                    if let Some((mid, w)) = apply_eij(j, i, sb, &b, &v) {
                        if let Some((end, x)) = apply_eij(i, j, sa, &mid, &w) {
                            assert_eq!(end.weight(), b.weight());
                            total += x;
                        }
                    }
                }
            }
            let mut swapped = b.indices()[col].clone();
            swapped.swap(sa, sb);
            assert_eq!(total, unit(&b, &swapped));
        }
    }

    #[test]
    fn singular_subspace_examples() {
        let s = Subspace::singular(&Partition::new(vec![2]).unwrap(), 2).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.vectors[(0, 0)].norm() - 1.0).abs() < 1e-14);

        let s = Subspace::singular(&Partition::new(vec![1, 1]).unwrap(), 2).unwrap();
        assert_eq!(s.dim(), 1);
        let v = s.vectors.column(0);
        let r = 0.5f64.sqrt();
        assert!((v[0].norm() - r).abs() < 1e-14);
        assert!((v[0] + v[1]).norm() < 1e-14);

        let s = Subspace::singular(&Partition::new(vec![2, 1]).unwrap(), 2).unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn singular_dimensions_are_irrep_dimensions() {
        for n in 1..=5 {
            for lam in enumerate_partitions(n, n) {
                for rank in lam.length().max(1)..=lam.length() + 1 {
                    let s = Subspace::singular(&lam, rank).unwrap();
                    assert_eq!(s.dim() as u64, lam.irrep_dimension(), "{lam} N={rank}");
                    let gram = s.vectors.adjoint() * &s.vectors;
                    assert!(linalg::frobenius(&(gram - CMatrix::identity(s.dim(), s.dim()))) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_site_hamiltonians() {
        let z = [c(0.3, 0.1), c(-0.4, 0.7)];
        let s = Subspace::singular(&Partition::new(vec![2]).unwrap(), 2).unwrap();
        let h1 = gaudin_hamiltonian(0, &z, &s).unwrap().matrix;
        let h2 = gaudin_hamiltonian(1, &z, &s).unwrap().matrix;
        assert!((h1[(0, 0)] - (z[0] - z[1]).inv()).norm() < 1e-14);
        assert!((h1[(0, 0)] + h2[(0, 0)]).norm() < 1e-14);

        let q = [c(0.5, -0.2), c(1.5, 0.3)];
        let full = Subspace::full(WeightBasis::unit_weight(2).unwrap());
        let h = generalized_gaudin(0, &z, &q, &full).unwrap().matrix;
        let w = (z[0] - z[1]).inv();
        let expect = CMatrix::from_row_slice(2, 2, &[q[0], w, w, q[1]]);
        assert!(linalg::frobenius(&(h - expect)) < 1e-14);
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let s = Subspace::singular(&Partition::new(vec![2]).unwrap(), 2).unwrap();
        let z = [c(0.3, 0.0), c(0.3, 0.0)];
        assert!(matches!(gaudin_hamiltonian(0, &z, &s), Err(Error::Collision { .. })));
    }

    #[test]
    fn hamiltonians_commute_and_sum_to_zero() {
        let mut rng = sampling::rng(11);
        let lam = Partition::new(vec![2, 1, 1]).unwrap();
        let z = sampling::generic_positions(4, &mut rng);
        let b = WeightBasis::new(3, 4, &[2, 1, 1]).unwrap();
        let full = Subspace::full(b.clone());
        let hs: Vec<CMatrix> = (0..4)
            .map(|a| gaudin_hamiltonian(a, &z, &full).unwrap().matrix)
            .collect();
        let norm = hs.iter().map(linalg::frobenius).fold(0.0, f64::max);
        for a in 0..4 {
            for bb in 0..4 {
                let comm = linalg::commutator(&hs[a], &hs[bb]);
                assert!(linalg::frobenius(&comm) <= 1e-10 * norm * norm);
            }
        }
        let sum = hs.iter().fold(CMatrix::zeros(b.dim(), b.dim()), |acc, h| acc + h);
        assert!(linalg::frobenius(&sum) < 1e-12 * norm);

        // gl_N equivariance: E·H = H'·E between weight spaces.
        for (i, j) in [(0, 1), (1, 2), (0, 2), (1, 0)] {
            let (target, e) = b.total_eij(i, j).unwrap();
            let tfull = Subspace::full(target);
            for a in 0..4 {
                let ht = gaudin_hamiltonian(a, &z, &tfull).unwrap().matrix;
                assert!(linalg::frobenius(&(&e * &hs[a] - ht * &e)) < 1e-10 * norm);
            }
        }
        let _ = lam;
    }

    #[test]
    fn twisted_sum_is_sigma_one() {
        let mut rng = sampling::rng(5);
        let z = sampling::generic_positions(3, &mut rng);
        let q = sampling::generic_exponents(3, 2.0, &mut rng);
        let full = Subspace::full(WeightBasis::unit_weight(3).unwrap());
        let hs: Vec<CMatrix> = (0..3)
            .map(|a| generalized_gaudin(a, &z, &q, &full).unwrap().matrix)
            .collect();
        let sum = hs.iter().fold(CMatrix::zeros(6, 6), |acc, h| acc + h);
        let s1: C64 = q.iter().sum();
        assert!(linalg::frobenius(&(&sum - CMatrix::identity(6, 6) * s1)) < 1e-12);
        assert!((sum.trace() - s1 * 6.0).norm() < 1e-11);
        let zero_q = [c(0.0, 0.0); 3];
        for a in 0..3 {
            let h0 = generalized_gaudin(a, &z, &zero_q, &full).unwrap().matrix;
            let h = gaudin_hamiltonian(a, &z, &full).unwrap().matrix;
            assert_eq!(h0, h);
        }
    }

    #[test]
    fn joint_eigen_examples() {
        let opts = JointEigenOptions::default();
        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(5.0, 0.0)]));
        let mut got: Vec<f64> = joint_eigen(&[diag], &opts, 1)
            .unwrap()
            .iter()
            .map(|e| e.p[0].re)
            .collect();
        got.sort_by(f64::total_cmp);
        assert!((got[0] - 3.0).abs() < 1e-12 && (got[1] - 5.0).abs() < 1e-12);

        let id = CMatrix::identity(2, 2);
        let pairs = joint_eigen(&[id], &opts, 1).unwrap();
        assert_eq!(pairs.len(), 2);
        for e in &pairs {
            assert!((e.p[0] - c(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(e.multiplicity, 2);
        }

        let z = [c(0.1, 0.2), c(0.9, -0.3)];
        let q = [c(0.4, 0.0), c(-1.0, 0.5)];
        let pairs = twisted_eigenpairs(&z, &q, &opts, 9).unwrap();
        assert_eq!(pairs.len(), 2);
        let w = (z[0] - z[1]).inv();
        let disc = ((q[0] - q[1]) * (q[0] - q[1]) * 0.25 + w * w).sqrt();
        let mid = (q[0] + q[1]) * 0.5;
        for e in &pairs {
            assert!((e.p[0] + e.p[1] - q[0] - q[1]).norm() < 1e-12);
            let d1 = (e.p[0] - mid - disc).norm().min((e.p[0] - mid + disc).norm());
            assert!(d1 < 1e-12);
        }
    }

    #[test]
    fn joint_eigen_rejects_non_commuting() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = a.transpose();
        assert!(matches!(
            joint_eigen(&[a, b], &JointEigenOptions::default(), 0),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn joint_eigen_flags_jordan_blocks() {
        let j = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(joint_eigen(&[j], &JointEigenOptions::default(), 0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let opts = JointEigenOptions::default();
        let mut rng = sampling::rng(21);
        for n in 2..=5 {
            let z = sampling::generic_positions(n, &mut rng);
            let base: Vec<C64> = (0..n)
                .map(|a| (0..n).filter(|&b| b != a).map(|b| (z[a] - z[b]).inv()).sum())
                .collect();
            let top = spectral_points(&Partition::new(vec![n]).unwrap(), &z, 2, &opts, 1).unwrap();
            assert_eq!(top.len(), 1);
            let bottom = spectral_points(&Partition::new(vec![1; n]).unwrap(), &z, n, &opts, 1).unwrap();
            assert_eq!(bottom.len(), 1);
            for a in 0..n {
                assert!((top[0].p[a] - base[a]).norm() < 1e-10);
                assert!((bottom[0].p[a] + base[a]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_point_json_shape() {
        let pt = SpectralPoint {
            z: vec![c(1.0, -0.5)],
            p: vec![c(0.25, 0.0)],
            residual: 0.0,
        };
        let s = serde_json::to_string(&pt).unwrap();
        assert_eq!(s, r#"{"z":[[1.0,-0.5]],"p":[[0.25,0.0]],"residual":0.0}"#);
        let back: SpectralPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, pt);
    }
}
