//! The algebraic Mukai lattice `Z + NS(X) + Z*omega` of a K3 surface.
//!
//! All arithmetic is exact over `BigInt`. The pairing of `(r, xi, a)` and
//! `(r', xi', a')` is `xi.G.xi' - r*a' - r'*a`, where `G` is the Gram matrix
//! of the Neron-Severi lattice. Every value is immutable after construction
//! and every operation is a pure function.

use crate::jsonio::{int_serde, int_vec_serde, int_mat_serde};
use crate::linalg;
use num::{BigInt, BigRational, Integer, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("gram matrix must be a square matrix matching the stated rank")]
    BadShape,
    #[error("gram matrix must be symmetric")]
    NotSymmetric,
    #[error("gram matrix must have even diagonal entries")]
    OddDiagonal,
    #[error("basis names must be distinct and one per row of the gram matrix")]
    BadBasisNames,
    #[error("class of length {got} does not fit a lattice of rank {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("reflection class must be spherical (square -2), got square {0}")]
    NotSpherical(BigInt),
    #[error("the zero vector has no orthogonal complement basis")]
    ZeroVector,
}

/// Gram matrix of the Neron-Severi lattice, with named basis classes.
///
/// Validated to be symmetric with even diagonal. The signature is *not*
/// checked and geometric existence of a K3 surface with this Picard lattice
/// is an assumption of the caller, not a theorem of this crate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct NSLattice {
    rank: usize,
    gram: Vec<Vec<BigInt>>,
    basis_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawLattice {
    rank: usize,
    #[serde(with = "int_mat_serde")]
    gram: Vec<Vec<BigInt>>,
    basis: Vec<String>,
}

impl TryFrom<RawLattice> for NSLattice {
    type Error = LatticeError;
    fn try_from(raw: RawLattice) -> Result<Self, LatticeError> {
        let lattice = NSLattice::new(raw.gram, raw.basis)?;
        if lattice.rank != raw.rank {
            return Err(LatticeError::BadShape);
        }
        Ok(lattice)
    }
}

impl From<NSLattice> for RawLattice {
    fn from(l: NSLattice) -> RawLattice {
        RawLattice {
            rank: l.rank,
            gram: l.gram,
            basis: l.basis_names,
        }
    }
}

impl NSLattice {
    pub fn new(gram: Vec<Vec<BigInt>>, basis_names: Vec<String>) -> Result<Self, LatticeError> {
        let rank = gram.len();
        if rank == 0 || gram.iter().any(|row| row.len() != rank) {
            return Err(LatticeError::BadShape);
        }
        for i in 0..rank {
            if gram[i][i].is_odd() {
                return Err(LatticeError::OddDiagonal);
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        if basis_names.len() != rank {
            return Err(LatticeError::BadBasisNames);
        }
        for i in 0..rank {
            for j in 0..i {
                if basis_names[i] == basis_names[j] {
                    return Err(LatticeError::BadBasisNames);
                }
            }
        }
        Ok(NSLattice {
            rank,
            gram,
            basis_names,
        })
    }

    /// `Pic(X) = Z H` with `(H^2)` the given even integer.
    pub fn rank_one(h_square: impl Into<BigInt>) -> Result<Self, LatticeError> {
        NSLattice::new(vec![vec![h_square.into()]], vec!["H".into()])
    }

    /// Section/fiber lattice of an elliptic K3: basis `C, f` with
    /// `(C^2) = -2`, `(C.f) = 1`, `(f^2) = 0`.
    pub fn elliptic() -> Self {
        NSLattice::new(
            vec![
                vec![BigInt::from(-2), BigInt::one()],
                vec![BigInt::one(), BigInt::zero()],
            ],
            vec!["C".into(), "f".into()],
        )
        .expect("fixed valid gram")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[Vec<BigInt>] {
        &self.gram
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    fn check_len(&self, n: usize) -> Result<(), LatticeError> {
        if n == self.rank {
            Ok(())
        } else {
            Err(LatticeError::DimensionMismatch {
                want: self.rank,
                got: n,
            })
        }
    }

    /// Intersection pairing `x.G.y` on the Neron-Severi lattice.
    pub fn ns_pair(&self, x: &[BigInt], y: &[BigInt]) -> Result<BigInt, LatticeError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut acc = BigInt::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                acc += xi * &self.gram[i][j] * yj;
            }
        }
        Ok(acc)
    }

    pub fn ns_square(&self, x: &[BigInt]) -> Result<BigInt, LatticeError> {
        self.ns_pair(x, x)
    }

    /// Intersection pairing extended to rational classes.
    pub fn ns_pair_rational(
        &self,
        x: &[BigRational],
        y: &[BigRational],
    ) -> Result<BigRational, LatticeError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                acc += xi * BigRational::from_integer(self.gram[i][j].clone()) * yj;
            }
        }
        Ok(acc)
    }

    /// Pairing of a rational class against an integral one.
    pub fn ns_pair_mixed(
        &self,
        x: &[BigRational],
        y: &[BigInt],
    ) -> Result<BigRational, LatticeError> {
        let y: Vec<BigRational> = y.iter().cloned().map(BigRational::from_integer).collect();
        self.ns_pair_rational(x, &y)
    }
}

/// `(r, xi, a)` in `Z + NS(X) + Z*omega`; `xi` in the lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MukaiVector {
    #[serde(with = "int_serde")]
    pub r: BigInt,
    #[serde(with = "int_vec_serde")]
    pub xi: Vec<BigInt>,
    #[serde(with = "int_serde")]
    pub a: BigInt,
}

impl MukaiVector {
    pub fn new(r: impl Into<BigInt>, xi: Vec<BigInt>, a: impl Into<BigInt>) -> Self {
        MukaiVector {
            r: r.into(),
            xi,
            a: a.into(),
        }
    }

    pub fn from_i64(r: i64, xi: &[i64], a: i64) -> Self {
        MukaiVector::new(r, xi.iter().map(|&x| BigInt::from(x)).collect(), a)
    }

    pub fn zero(rank: usize) -> Self {
        MukaiVector::new(0, vec![BigInt::zero(); rank], 0)
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.a.is_zero() && self.xi.iter().all(Zero::is_zero)
    }

    /// Flat coordinates `(r, xi..., a)`, the column order used everywhere a
    /// normal form is taken.
    pub fn coords(&self) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(self.xi.len() + 2);
        out.push(self.r.clone());
        out.extend(self.xi.iter().cloned());
        out.push(self.a.clone());
        out
    }

    pub fn from_coords(coords: &[BigInt]) -> Self {
        assert!(coords.len() >= 2, "need at least (r, a)");
        MukaiVector {
            r: coords[0].clone(),
            xi: coords[1..coords.len() - 1].to_vec(),
            a: coords[coords.len() - 1].clone(),
        }
    }

    pub fn neg(&self) -> Self {
        MukaiVector {
            r: -&self.r,
            xi: self.xi.iter().map(|x| -x).collect(),
            a: -&self.a,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.xi.len(), other.xi.len());
        MukaiVector {
            r: &self.r + &other.r,
            xi: self
                .xi
                .iter()
                .zip(&other.xi)
                .map(|(x, y)| x + y)
                .collect(),
            a: &self.a + &other.a,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scaled(&self, m: &BigInt) -> Self {
        MukaiVector {
            r: &self.r * m,
            xi: self.xi.iter().map(|x| x * m).collect(),
            a: &self.a * m,
        }
    }
}

/// Mukai pairing `<x, y> = xi.G.xi' - r*a' - r'*a`.
pub fn pair(x: &MukaiVector, y: &MukaiVector, lattice: &NSLattice) -> Result<BigInt, LatticeError> {
    let ns = lattice.ns_pair(&x.xi, &y.xi)?;
    Ok(ns - &x.r * &y.a - &y.r * &x.a)
}

/// `<x, x>`; always even on an even lattice.
pub fn square(x: &MukaiVector, lattice: &NSLattice) -> Result<BigInt, LatticeError> {
    pair(x, x, lattice)
}

/// The duality involution `x -> x - 2[x]_1`, i.e. `(r, xi, a) -> (r, -xi, a)`.
pub fn dualize(x: &MukaiVector) -> MukaiVector {
    MukaiVector {
        r: x.r.clone(),
        xi: x.xi.iter().map(|c| -c).collect(),
        a: x.a.clone(),
    }
}

/// Mukai vector of a sheaf with Chern data `(r, c1, c2)`:
/// `(r, c1, r + c1^2/2 - c2)`.
pub fn vector_from_chern(
    r: impl Into<BigInt>,
    c1: &[BigInt],
    c2: impl Into<BigInt>,
    lattice: &NSLattice,
) -> Result<MukaiVector, LatticeError> {
    let r = r.into();
    let c1_sq = lattice.ns_square(c1)?;
    // c1^2 is even on an even lattice, so ch2 = c1^2/2 - c2 is integral
    let a = &r + c1_sq / 2 - c2.into();
    Ok(MukaiVector {
        r,
        xi: c1.to_vec(),
        a,
    })
}

/// The isometry `T_N`: multiplication by `ch(N) = e^N` for a line bundle
/// class `N`. `(r, xi, a) -> (r, xi + r N, a + xi.G.N + r (N^2)/2)`.
pub fn twist(
    x: &MukaiVector,
    n: &[BigInt],
    lattice: &NSLattice,
) -> Result<MukaiVector, LatticeError> {
    lattice.check_len(x.xi.len())?;
    let cross = lattice.ns_pair(&x.xi, n)?;
    let n_sq = lattice.ns_square(n)?;
    let xi = x
        .xi
        .iter()
        .zip(n)
        .map(|(c, nc)| c + &x.r * nc)
        .collect();
    let a = &x.a + cross + &x.r * (n_sq / 2);
    Ok(MukaiVector {
        r: x.r.clone(),
        xi,
        a,
    })
}

/// The reflection `R_{v1}: x -> x + <x, v1> v1` for spherical `v1`.
///
/// Requires `<v1, v1> = -2`; the map is an involutive isometry exactly in
/// that case, and every use in this crate is spherical.
pub fn reflect(
    x: &MukaiVector,
    v1: &MukaiVector,
    lattice: &NSLattice,
) -> Result<MukaiVector, LatticeError> {
    let v1_sq = square(v1, lattice)?;
    if v1_sq != BigInt::from(-2) {
        return Err(LatticeError::NotSpherical(v1_sq));
    }
    let c = pair(x, v1, lattice)?;
    Ok(x.add(&v1.scaled(&c)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub primitive: bool,
    pub spherical: bool,
    pub isotropic: bool,
    #[serde(with = "int_serde")]
    pub square: BigInt,
}

pub fn classify(x: &MukaiVector, lattice: &NSLattice) -> Result<Classification, LatticeError> {
    let sq = square(x, lattice)?;
    let g = linalg::gcd_all(&x.coords());
    Ok(Classification {
        primitive: g.is_one(),
        spherical: sq == BigInt::from(-2),
        isotropic: sq.is_zero(),
        square: sq,
    })
}

/// Saturated integral basis of `v^perp`, with its Gram matrix of pairwise
/// Mukai pairings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthBasis {
    pub vector: MukaiVector,
    pub basis: Vec<MukaiVector>,
    #[serde(with = "int_mat_serde")]
    pub gram: Vec<Vec<BigInt>>,
}

impl OrthBasis {
    /// Integral membership test against the saturated basis.
    pub fn contains(&self, y: &MukaiVector) -> bool {
        let rows: Vec<Vec<BigInt>> = self.basis.iter().map(MukaiVector::coords).collect();
        linalg::solve_in_hnf_span(&rows, &y.coords()).is_some()
    }
}

/// Canonical basis of the kernel of `x -> <v, x>`.
///
/// The kernel is computed by unimodular reduction, so the basis is saturated;
/// the output is row-HNF reduced in the fixed coordinate order `(r, xi, a)`,
/// making it reproducible byte for byte.
pub fn orth_basis(v: &MukaiVector, lattice: &NSLattice) -> Result<OrthBasis, LatticeError> {
    lattice.check_len(v.xi.len())?;
    if v.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    // <v, y> as a functional in y's flat coordinates (r', xi', a'):
    // coefficient of r' is -a, of xi'_j is (G xi)_j, of a' is -r.
    let mut functional = Vec::with_capacity(lattice.rank() + 2);
    functional.push(-v.a.clone());
    for j in 0..lattice.rank() {
        let mut acc = BigInt::zero();
        for (i, vi) in v.xi.iter().enumerate() {
            acc += vi * &lattice.gram()[i][j];
        }
        functional.push(acc);
    }
    functional.push(-v.r.clone());

    let rows = linalg::kernel_of_functional(&functional);
    let basis: Vec<MukaiVector> = rows.iter().map(|r| MukaiVector::from_coords(r)).collect();
    let mut gram = vec![vec![BigInt::zero(); basis.len()]; basis.len()];
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            gram[i][j] = pair(&basis[i], &basis[j], lattice)?;
        }
    }
    Ok(OrthBasis {
        vector: v.clone(),
        basis,
        gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zh2() -> NSLattice {
        NSLattice::rank_one(2).unwrap()
    }

    #[test]
    fn gram_validation() {
        assert_eq!(
            NSLattice::rank_one(3).unwrap_err(),
            LatticeError::OddDiagonal
        );
        let bad = NSLattice::new(
            vec![
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(2), BigInt::from(0)],
            ],
            vec!["a".into(), "b".into()],
        );
        assert_eq!(bad.unwrap_err(), LatticeError::NotSymmetric);
        let dup = NSLattice::new(
            vec![
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(1), BigInt::from(0)],
            ],
            vec!["a".into(), "a".into()],
        );
        assert_eq!(dup.unwrap_err(), LatticeError::BadBasisNames);
    }

    #[test]
    fn pairing_examples() {
        let l = zh2();
        let o_x = MukaiVector::from_i64(1, &[0], 1);
        assert_eq!(pair(&o_x, &o_x, &l).unwrap(), BigInt::from(-2));
        let h = MukaiVector::from_i64(0, &[1], 0);
        assert_eq!(pair(&h, &h, &l).unwrap(), BigInt::from(2));
        let v = MukaiVector::from_i64(2, &[1], -1);
        assert_eq!(pair(&v, &o_x, &l).unwrap(), BigInt::from(-1));
        // dimension mismatch
        let bad = MukaiVector::from_i64(1, &[0, 0], 1);
        assert!(pair(&bad, &o_x, &l).is_err());
    }

    #[test]
    fn dualize_examples() {
        assert_eq!(
            dualize(&MukaiVector::from_i64(1, &[0], 1)),
            MukaiVector::from_i64(1, &[0], 1)
        );
        assert_eq!(
            dualize(&MukaiVector::from_i64(0, &[1], 0)),
            MukaiVector::from_i64(0, &[-1], 0)
        );
        assert_eq!(
            dualize(&MukaiVector::from_i64(3, &[2], 1)),
            MukaiVector::from_i64(3, &[-2], 1)
        );
    }

    #[test]
    fn chern_examples() {
        let l = zh2();
        let zero = [BigInt::zero()];
        assert_eq!(
            vector_from_chern(1, &zero, 0, &l).unwrap(),
            MukaiVector::from_i64(1, &[0], 1)
        );
        // ideal sheaf of n points
        assert_eq!(
            vector_from_chern(1, &zero, 5, &l).unwrap(),
            MukaiVector::from_i64(1, &[0], -4)
        );
        let h = [BigInt::one()];
        assert_eq!(
            vector_from_chern(2, &h, 1, &l).unwrap(),
            MukaiVector::from_i64(2, &[1], 2)
        );
    }

    #[test]
    fn twist_examples() {
        let l = zh2();
        let o_x = MukaiVector::from_i64(1, &[0], 1);
        let zero = [BigInt::zero()];
        assert_eq!(twist(&o_x, &zero, &l).unwrap(), o_x);
        let h = [BigInt::one()];
        // T_H(v(O)) = v(O(H))
        assert_eq!(
            twist(&o_x, &h, &l).unwrap(),
            MukaiVector::from_i64(1, &[1], 2)
        );
        // the prop:deform move T_{nf} on the elliptic lattice, l=2, r=1, n=3
        let ell = NSLattice::elliptic();
        let v2 = MukaiVector::from_i64(2, &[2, 0], -1);
        let three_f = [BigInt::zero(), BigInt::from(3)];
        assert_eq!(
            twist(&v2, &three_f, &ell).unwrap(),
            MukaiVector::from_i64(2, &[2, 6], 5)
        );
    }

    #[test]
    fn reflect_examples() {
        let l = zh2();
        let v1 = MukaiVector::from_i64(1, &[0], 1);
        assert_eq!(reflect(&v1, &v1, &l).unwrap(), v1.neg());
        let h = MukaiVector::from_i64(0, &[1], 0);
        assert_eq!(reflect(&h, &v1, &l).unwrap(), h);
        let v = MukaiVector::from_i64(2, &[1], -1);
        let w = reflect(&v, &v1, &l).unwrap();
        assert_eq!(w, MukaiVector::from_i64(1, &[1], -2));
        assert_eq!(square(&v, &l).unwrap(), square(&w, &l).unwrap());
        assert_eq!(square(&w, &l).unwrap(), BigInt::from(6));
        // non-spherical reflection class is rejected
        let not_sph = MukaiVector::from_i64(0, &[1], 0);
        assert!(matches!(
            reflect(&v, &not_sph, &l),
            Err(LatticeError::NotSpherical(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let l = zh2();
        assert!(!classify(&MukaiVector::from_i64(2, &[0], 2), &l)
            .unwrap()
            .primitive);
        let c = classify(&MukaiVector::from_i64(1, &[0], 1), &l).unwrap();
        assert!(c.spherical && c.square == BigInt::from(-2));
        let c = classify(&MukaiVector::from_i64(1, &[0], 0), &l).unwrap();
        assert!(c.isotropic && c.primitive);
    }

    #[test]
    fn orth_basis_examples() {
        let l = zh2();
        let v = MukaiVector::from_i64(1, &[0], 1);
        let ob = orth_basis(&v, &l).unwrap();
        assert_eq!(ob.basis.len(), 2);
        for b in &ob.basis {
            assert!(pair(&v, b, &l).unwrap().is_zero());
        }
        // the span is {(r', x', a') : r' + a' = 0}
        assert!(ob.contains(&MukaiVector::from_i64(0, &[1], 0)));
        assert!(ob.contains(&MukaiVector::from_i64(1, &[0], -1)));
        assert!(!ob.contains(&MukaiVector::from_i64(1, &[0], 0)));

        let h = MukaiVector::from_i64(0, &[1], 0);
        let ob = orth_basis(&h, &l).unwrap();
        assert_eq!(
            ob.basis,
            vec![
                MukaiVector::from_i64(1, &[0], 0),
                MukaiVector::from_i64(0, &[0], 1)
            ]
        );

        assert_eq!(
            orth_basis(&MukaiVector::zero(1), &l).unwrap_err(),
            LatticeError::ZeroVector
        );
    }

    #[test]
    fn lattice_json_round_trip_validates() {
        let l = NSLattice::elliptic();
        let s = serde_json::to_string(&l).unwrap();
        let back: NSLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(l, back);
        // odd diagonal is rejected at parse time
        let bad = r#"{"rank":1,"gram":[[3]],"basis":["H"]}"#;
        assert!(serde_json::from_str::<NSLattice>(bad).is_err());
    }
}
