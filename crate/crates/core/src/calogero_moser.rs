//! The Calogero–Moser matrix `Q(z, p)`, its first integrals and the
//! normal-form points `(Z, Q)` of the Calogero–Moser space.
//!
//! Sign convention: `Q_a` is the `a`-th elementary symmetric function of the
//! eigenvalues of `Q`, so `det(u − Q) = u^n − Q_1 u^{n−1} + … ± Q_n`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{self, CMatrix};
use crate::tensor_gaudin::{check_distinct, COLLISION_DELTA};
use crate::{Error, Result, C64};

fn check_shape(z: &[C64], p: &[C64]) -> Result<()> {
    if z.len() != p.len() || z.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} positions and {} momenta",
            z.len(),
            p.len()
        )));
    }
    check_distinct(z, COLLISION_DELTA)
}

/// `Q` with `p` on the diagonal and `1/(z_a − z_b)` off it.
pub fn cm_matrix(z: &[C64], p: &[C64]) -> Result<CMatrix> {
    check_shape(z, p)?;
    let n = z.len();
    Ok(CMatrix::from_fn(
        n,
        n,
        |a, b| {
            if a == b {
                p[a]
            } else {
                (z[a] - z[b]).inv()
            }
        },
    ))
}

/// `Q_1, …, Q_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstIntegrals {
    pub values: Vec<C64>,
}

impl FirstIntegrals {
    /// `u^n − Q_1 u^{n−1} + Q_2 u^{n−2} − … + (−1)^n Q_n`.
    pub fn char_poly_at(&self, u: C64) -> C64 {
        let n = self.values.len();
        let mut total = u.powu(n as u32);
        for (k, q) in self.values.iter().enumerate() {
            let a = k + 1;
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            total += q * sign * u.powu((n - a) as u32);
        }
        total
    }
}

/// Elementary symmetric functions `σ_1..σ_n` of the eigenvalues of `m`.
pub fn spectral_invariants(m: &CMatrix) -> Result<Vec<C64>> {
    let eig = linalg::eigenvalues(m)?;
    Ok(linalg::elementary_symmetric(&eig)[1..].to_vec())
}

pub fn first_integrals(z: &[C64], p: &[C64]) -> Result<FirstIntegrals> {
    let q = cm_matrix(z, p)?;
    Ok(FirstIntegrals {
        values: spectral_invariants(&q)?,
    })
}

/// `Σ p_a² − Σ_{a<b} 2/(z_a − z_b)²`.
pub fn cm_hamiltonian(z: &[C64], p: &[C64]) -> Result<C64> {
    check_shape(z, p)?;
    let kinetic: C64 = p.iter().map(|x| x * x).sum();
    let mut potential = C64::new(0.0, 0.0);
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            let d = z[a] - z[b];
            potential += (d * d).inv() * 2.0;
        }
    }
    Ok(kinetic - potential)
}

/// `|Q_a(z, p) − target_a|` for each degree `a = 1..n`.
pub fn level_defects(z: &[C64], p: &[C64], targets: &[C64]) -> Result<Vec<f64>> {
    let fi = first_integrals(z, p)?;
    if targets.len() != fi.values.len() {
        return Err(Error::InvalidInput("target count differs from n".into()));
    }
    Ok(fi.values.iter().zip(targets).map(|(q, t)| (q - t).norm()).collect())
}

fn scaled_max(defects: &[f64], p: &[C64]) -> f64 {
    let base = linalg::max_abs(p).max(1.0);
    defects
        .iter()
        .enumerate()
        .map(|(k, d)| d / base.powi(k as i32 + 1))
        .fold(0.0, f64::max)
}

/// `max_a |Q_a(z, p)| / max(1, ‖p‖_∞)^a`: distance from the zero level set.
pub fn l0_residual(z: &[C64], p: &[C64]) -> Result<f64> {
    let zeros = vec![C64::new(0.0, 0.0); p.len()];
    Ok(scaled_max(&level_defects(z, p, &zeros)?, p))
}

/// `max_a |Q_a(z, p) − σ_a(q)| / max(1, ‖p‖_∞)^a`.
pub fn lq_residual(z: &[C64], p: &[C64], q: &[C64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::InvalidInput("q and p differ in length".into()));
    }
    let sigma = linalg::elementary_symmetric(q);
    Ok(scaled_max(&level_defects(z, p, &sigma[1..])?, p))
}

/// A normal-form point of the Calogero–Moser space: `Z` diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CmPoint {
    pub z: Vec<C64>,
    pub q: CMatrix,
}

impl CmPoint {
    pub fn z_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&linalg::CVector::from_vec(self.z.clone()))
    }

    /// `[Z, Q] + 1`.
    pub fn commutator_plus_one(&self) -> CMatrix {
        let n = self.z.len();
        let zm = self.z_matrix();
        linalg::commutator(&zm, &self.q) + CMatrix::identity(n, n)
    }

    /// Equality up to simultaneous permutation: `Z` entries are matched
    /// greedily and `Q` compared after the same relabelling.
    pub fn approx_eq(&self, other: &CmPoint, tol: f64) -> bool {
        let n = self.z.len();
        if other.z.len() != n {
            return false;
        }
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for a in 0..n {
            let best = (0..n).filter(|&b| !used[b]).min_by(|&x, &y| {
                (self.z[a] - other.z[x])
                    .norm()
                    .total_cmp(&(self.z[a] - other.z[y]).norm())
            });
            match best {
                Some(b) if (self.z[a] - other.z[b]).norm() <= tol => {
                    perm[a] = b;
                    used[b] = true;
                }
                _ => return false,
            }
        }
        (0..n).all(|a| (0..n).all(|b| (self.q[(a, b)] - other.q[(perm[a], perm[b])]).norm() <= tol))
    }
}

#[derive(Serialize, Deserialize)]
struct CmPointJson {
    #[serde(rename = "Z", with = "crate::json::complex_vec")]
    z: Vec<C64>,
    #[serde(rename = "Q", with = "crate::json::complex_rows")]
    q: Vec<Vec<C64>>,
}

impl Serialize for CmPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.z.len();
        CmPointJson {
            z: self.z.clone(),
            q: (0..n).map(|a| (0..n).map(|b| self.q[(a, b)]).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CmPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CmPointJson::deserialize(d)?;
        let n = raw.z.len();
        if raw.q.len() != n || raw.q.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("Q must be n×n"));
        }
        Ok(CmPoint {
            z: raw.z,
            q: CMatrix::from_fn(n, n, |a, b| raw.q[a][b]),
        })
    }
}

/// `(z, p) ↦ (diag(z), Q(z, p))`.
pub fn xi(z: &[C64], p: &[C64]) -> Result<CmPoint> {
    Ok(CmPoint {
        z: z.to_vec(),
        q: cm_matrix(z, p)?,
    })
}

/// Second singular value of `[Z, Q] + 1` over the first; a zero matrix
/// counts as a full violation, and a failed decomposition gives NaN.
pub fn rank_one_residual(point: &CmPoint) -> f64 {
    let m = point.commutator_plus_one();
    if m.nrows() <= 1 {
        return if linalg::frobenius(&m) == 0.0 { 1.0 } else { 0.0 };
    }
    let Ok((_, sv, _)) = linalg::svd(&m) else {
        return f64::NAN;
    };
    if sv[0] == 0.0 {
        1.0
    } else {
        sv[1] / sv[0]
    }
}

/// `det((u − Z)(v − Q) − 1)`.
pub fn bivariate_char(point: &CmPoint, u: C64, v: C64) -> C64 {
    let n = point.z.len();
    let id = CMatrix::identity(n, n);
    let left = &id * u - point.z_matrix();
    let right = &id * v - &point.q;
    linalg::determinant(&(left * right - id))
}

/// Elementary symmetric coordinates of `(spec Z, spec Q)`.
pub fn pi_image(point: &CmPoint) -> Result<(Vec<C64>, Vec<C64>)> {
    let sz = linalg::elementary_symmetric(&point.z)[1..].to_vec();
    Ok((sz, spectral_invariants(&point.q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(values: &[f64]) -> Vec<C64> {
        values.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn cm_matrix_examples() {
        let q = cm_matrix(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &r(&[-1.0, -1.0, 1.0, 1.0]));
        assert_eq!(q, expect);
        assert_eq!(cm_matrix(&r(&[0.5]), &r(&[2.0])).unwrap()[(0, 0)], c(2.0, 0.0));
        assert!(cm_matrix(&r(&[0.0, 0.0]), &r(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn first_integral_examples() {
        let fi = first_integrals(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap();
        assert!(fi.values.iter().all(|v| v.norm() < 1e-7));
        let fi = first_integrals(&r(&[0.0, 1.0]), &r(&[1.0, 2.0])).unwrap();
        assert!((fi.values[0] - c(3.0, 0.0)).norm() < 1e-13);
        assert!((fi.values[1] - c(3.0, 0.0)).norm() < 1e-13);
        let fi = first_integrals(&r(&[0.3]), &r(&[-0.7])).unwrap();
        assert_eq!(fi.values, r(&[-0.7]));
    }

    #[test]
    fn hamiltonian_examples() {
        assert!((cm_hamiltonian(&r(&[0.0, 1.0]), &r(&[1.0, 2.0])).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
        assert!(cm_hamiltonian(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap().norm() < 1e-14);
        assert_eq!(cm_hamiltonian(&r(&[0.0]), &r(&[1.5])).unwrap(), c(2.25, 0.0));
    }

    #[test]
    fn residual_examples() {
        let z = r(&[0.0, 1.0]);
        assert!(l0_residual(&z, &r(&[-1.0, 1.0])).unwrap() < 1e-7);
        assert!(l0_residual(&z, &r(&[1.0, -1.0])).unwrap() < 1e-7);
        let raw = level_defects(&z, &r(&[1.0, 2.0]), &r(&[0.0, 0.0])).unwrap();
        assert!((raw[0] - 3.0).abs() < 1e-13 && (raw[1] - 3.0).abs() < 1e-13);
        // scaled by max(1, ‖p‖∞)^a = 2, 4
        assert!((l0_residual(&z, &r(&[1.0, 2.0])).unwrap() - 1.5).abs() < 1e-13);
        let zero = r(&[0.0, 0.0]);
        let p = r(&[0.3, -0.8]);
        assert_eq!(lq_residual(&z, &p, &zero).unwrap(), l0_residual(&z, &p).unwrap());
    }

    #[test]
    fn char_poly_matches_determinant() {
        let mut rng = sampling::rng(4);
        let z = sampling::generic_positions(4, &mut rng);
        let p: Vec<C64> = (0..4).map(|_| sampling::complex_in_disc(&mut rng, 2.0)).collect();
        let fi = first_integrals(&z, &p).unwrap();
        let q = cm_matrix(&z, &p).unwrap();
        for k in 0..5 {
            let u = c(0.3 * k as f64 - 0.5, 0.2 * k as f64);
            let det = linalg::determinant(&(CMatrix::identity(4, 4) * u - &q));
            let val = fi.char_poly_at(u);
            assert!((det - val).norm() <= 1e-10 * det.norm().max(1.0));
        }
    }

    #[test]
    fn xi_is_rank_one() {
        let z = r(&[0.0, 1.0]);
        let pt = xi(&z, &r(&[-1.0, 1.0])).unwrap();
        let ones = pt.commutator_plus_one();
        assert!(ones.iter().all(|x| (x - c(1.0, 0.0)).norm() < 1e-14));
        assert!(rank_one_residual(&pt) < 1e-12);

        let single = xi(&r(&[0.2]), &r(&[0.4])).unwrap();
        assert_eq!(single.commutator_plus_one()[(0, 0)], c(1.0, 0.0));
        assert_eq!(rank_one_residual(&single), 0.0);

        let identity = CmPoint {
            z: r(&[0.0, 1.0]),
            q: CMatrix::zeros(2, 2),
        };
        assert!((rank_one_residual(&identity) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn permuted_inputs_give_conjugate_points() {
        let mut rng = sampling::rng(8);
        let z = sampling::generic_positions(4, &mut rng);
        let p: Vec<C64> = (0..4).map(|_| sampling::complex_in_disc(&mut rng, 1.0)).collect();
        let perm = [2, 0, 3, 1];
        let zp: Vec<C64> = perm.iter().map(|&i| z[i]).collect();
        let pp: Vec<C64> = perm.iter().map(|&i| p[i]).collect();
        let a = xi(&z, &p).unwrap();
        let b = xi(&zp, &pp).unwrap();
        assert!(a.approx_eq(&b, 1e-8));
        let fa = first_integrals(&z, &p).unwrap();
        let fb = first_integrals(&zp, &pp).unwrap();
        for (x, y) in fa.values.iter().zip(&fb.values) {
            assert!((x - y).norm() < 1e-10 * x.norm().max(1.0));
        }
        let mut shifted = b.clone();
        shifted.q[(0, 0)] += c(1e-3, 0.0);
        assert!(!a.approx_eq(&shifted, 1e-8));
    }

    #[test]
    fn bivariate_example() {
        let pt = xi(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap();
        for (u, v) in [
            (c(0.3, 0.1), c(-1.2, 0.4)),
            (c(2.0, 0.0), c(0.5, -0.5)),
            (c(-0.7, 1.1), c(3.0, 0.2)),
        ] {
            let expect = u * u * v * v - u * v * v - u * v * 2.0 + v;
            assert!((bivariate_char(&pt, u, v) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn pi_image_examples() {
        let pt = xi(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap();
        let (sz, sq) = pi_image(&pt).unwrap();
        assert_eq!(sz, r(&[1.0, 0.0]));
        assert!(sq.iter().all(|x| x.norm() < 1e-7));
    }

    #[test]
    fn json_layout() {
        let pt = xi(&r(&[0.0, 1.0]), &r(&[-1.0, 1.0])).unwrap();
        let s = serde_json::to_string(&pt).unwrap();
        assert_eq!(
            s,
            r#"{"Z":[[0.0,0.0],[1.0,0.0]],"Q":[[[-1.0,0.0],[-1.0,-0.0]],[[1.0,-0.0],[1.0,0.0]]]}"#
        );
        let back: CmPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, pt);
    }

    proptest::proptest! {
        #[test]
        fn structural_identities(seed in 0u64..500) {
            let mut rng = sampling::rng(seed);
            let n = 1 + (seed % 5) as usize;
            let z = sampling::generic_positions(n, &mut rng);
            let p: Vec<C64> = (0..n).map(|_| sampling::complex_in_disc(&mut rng, 2.0)).collect();
            proptest::prop_assert!(rank_one_residual(&xi(&z, &p).unwrap()) <= 1e-12);
            let h = cm_hamiltonian(&z, &p).unwrap();
            let q = cm_matrix(&z, &p).unwrap();
            let trace_sq = (&q * &q).trace();
            let fi = first_integrals(&z, &p).unwrap();
            let q1 = fi.values[0];
            let q2 = fi.values.get(1).copied().unwrap_or_default();
            let scale = h.norm().max(trace_sq.norm()).max(1.0);
            proptest::prop_assert!((h - trace_sq).norm() <= 1e-10 * scale);
            proptest::prop_assert!((h - (q1 * q1 - q2 * 2.0)).norm() <= 1e-10 * scale);
        }
    }
}
