//! Numerical walls in the ample cone for pure-dimension-1 Mukai vectors.
//!
//! For `v = (0, xi_E, a)` with `(xi_E^2) > 0` and `chi(E) = a`, every
//! candidate subsheaf class `(xi_F, chi_F)` determines
//! `D = chi_F * xi_E - chi_E * xi_F`, and the wall `W_D = {x : (x, D) = 0}`
//! is non-empty in the ample cone only when `(D^2) <= 0`. For fixed `xi_F`
//! that is a quadratic condition on `chi_F` with positive leading
//! coefficient `(xi_E^2)`, so only finitely many integers `chi_F` survive
//! and enumeration terminates unconditionally.

use crate::jsonio::{int_serde, int_vec_serde, ratio_serde, ratio_vec_serde};
use crate::lattice::{MukaiVector, NSLattice};
use crate::linalg::primitive_normalized;
use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WallError {
    #[error("wall enumeration needs a pure-dimension-1 vector (r = 0), got r = {0}")]
    NotPureDimensionOne(BigInt),
    #[error("(xi_E^2) = {0} must be positive")]
    NonPositiveSquare(BigInt),
    #[error("chamber decomposition needs a rank-2 lattice and a 2-generator cone")]
    NotRankTwo,
    #[error("invalid cone: {0}")]
    BadCone(String),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// A salient open cone given by extremal generators and an interior
/// reference point, all in rational NS coordinates. Geometric ampleness is
/// the caller's responsibility; only the listed numerical invariants are
/// checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleConeSpec {
    #[serde(with = "crate::jsonio::ratio_mat_serde")]
    pub generators: Vec<Vec<BigRational>>,
    #[serde(with = "ratio_vec_serde")]
    pub reference: Vec<BigRational>,
}

impl AmpleConeSpec {
    pub fn from_integers(generators: &[Vec<i64>], reference: &[i64]) -> Self {
        let lift = |xs: &[i64]| -> Vec<BigRational> {
            xs.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        };
        AmpleConeSpec {
            generators: generators.iter().map(|g| lift(g)).collect(),
            reference: lift(reference),
        }
    }

    pub fn validate(&self, lattice: &NSLattice) -> Result<(), WallError> {
        if self.generators.is_empty() {
            return Err(WallError::BadCone("no generators".into()));
        }
        let ref_sq = lattice
            .ns_pair_rational(&self.reference, &self.reference)
            .map_err(WallError::Lattice)?;
        if !ref_sq.is_positive() {
            return Err(WallError::BadCone(format!(
                "reference point has non-positive square {ref_sq}"
            )));
        }
        for g in &self.generators {
            let p = lattice
                .ns_pair_rational(&self.reference, g)
                .map_err(WallError::Lattice)?;
            if !p.is_positive() {
                return Err(WallError::BadCone(
                    "reference pairs non-positively with a generator".into(),
                ));
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            for h in &self.generators[i + 1..] {
                if proportional(g, h) {
                    return Err(WallError::BadCone(
                        "two cone generators are proportional".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn proportional(x: &[BigRational], y: &[BigRational]) -> bool {
    // x ~ y iff all 2x2 minors vanish
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if &x[i] * &y[j] != &x[j] * &y[i] {
                return false;
            }
        }
    }
    true
}

/// One candidate subsheaf class that lies on a wall.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WallWitness {
    #[serde(with = "int_vec_serde")]
    pub xi_f: Vec<BigInt>,
    #[serde(with = "int_serde")]
    pub chi_f: BigInt,
}

/// A numerical wall, keyed by the primitive sign-normalized class `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    #[serde(with = "int_vec_serde")]
    pub d: Vec<BigInt>,
    #[serde(with = "int_serde")]
    pub d_square: BigInt,
    pub witnesses: Vec<WallWitness>,
}

/// All numerical walls cut out by the given candidate `c1(F)` classes.
///
/// The output is deduplicated by normalized `D` (merging witnesses, since
/// `W_D = W_{-D}`), restricted to walls that meet the open cone, and sorted
/// lexicographically by `D`.
pub fn enumerate_walls(
    v: &MukaiVector,
    lattice: &NSLattice,
    cone: &AmpleConeSpec,
    subclasses: &[Vec<BigInt>],
) -> Result<Vec<Wall>, WallError> {
    if !v.r.is_zero() {
        return Err(WallError::NotPureDimensionOne(v.r.clone()));
    }
    cone.validate(lattice)?;
    let xi_e = &v.xi;
    let chi_e = &v.a;
    let a_coef = lattice.ns_square(xi_e).map_err(WallError::Lattice)?;
    if !a_coef.is_positive() {
        return Err(WallError::NonPositiveSquare(a_coef));
    }
    // scan subclasses in parallel, then merge deterministically
    let scans: Result<Vec<Vec<(Vec<BigInt>, BigInt, WallWitness)>>, WallError> = subclasses
        .par_iter()
        .map(|xi_f| scan_subclass(xi_e, chi_e, &a_coef, xi_f, lattice, cone))
        .collect();
    let mut walls: BTreeMap<Vec<BigInt>, Wall> = BTreeMap::new();
    for (d, d_square, witness) in scans?.into_iter().flatten() {
        walls
            .entry(d.clone())
            .or_insert_with(|| Wall {
                d,
                d_square,
                witnesses: Vec::new(),
            })
            .witnesses
            .push(witness);
    }
    let mut out: Vec<Wall> = walls.into_values().collect();
    for w in &mut out {
        w.witnesses.sort();
        w.witnesses.dedup();
    }
    Ok(out)
}

/// All `(D, (D^2), witness)` triples contributed by one candidate `xi_F`.
fn scan_subclass(
    xi_e: &[BigInt],
    chi_e: &BigInt,
    a_coef: &BigInt,
    xi_f: &[BigInt],
    lattice: &NSLattice,
    cone: &AmpleConeSpec,
) -> Result<Vec<(Vec<BigInt>, BigInt, WallWitness)>, WallError> {
    let mut found = Vec::new();
    if xi_f.iter().all(Zero::is_zero) || xi_f == xi_e {
        return Ok(found);
    }
    let b_coef = chi_e * lattice.ns_pair(xi_e, xi_f).map_err(WallError::Lattice)?;
    let c_coef = chi_e * chi_e * lattice.ns_square(xi_f).map_err(WallError::Lattice)?;
    // (D^2) = A chi_F^2 - 2 B chi_F + C <= 0; A > 0
    let disc = &b_coef * &b_coef - a_coef * &c_coef;
    if disc.is_negative() {
        return Ok(found);
    }
    // integer-sqrt window with one unit of slack, then exact filter
    let sd = disc.sqrt();
    let lo = num::Integer::div_floor(&(&b_coef - &sd), a_coef) - BigInt::one();
    let hi = -num::Integer::div_floor(&-(&b_coef + &sd), a_coef) + BigInt::one();
    let mut chi_f = lo;
    while chi_f <= hi {
        let val = a_coef * &chi_f * &chi_f - BigInt::from(2) * &b_coef * &chi_f + &c_coef;
        if !val.is_positive() {
            let d_raw: Vec<BigInt> = xi_e
                .iter()
                .zip(xi_f)
                .map(|(e, f)| &chi_f * e - chi_e * f)
                .collect();
            if let Some(d) = primitive_normalized(&d_raw) {
                if wall_meets_open_cone(&d, cone, lattice)? {
                    let d_square = lattice.ns_square(&d).map_err(WallError::Lattice)?;
                    let witness = WallWitness {
                        xi_f: xi_f.to_vec(),
                        chi_f: chi_f.clone(),
                    };
                    found.push((d, d_square, witness));
                }
            }
        }
        chi_f += 1;
    }
    Ok(found)
}

/// Does `{(x, D) = 0}` meet the open cone? For a salient cone the pairings
/// of the generators against `D` must take strictly both signs.
fn wall_meets_open_cone(
    d: &[BigInt],
    cone: &AmpleConeSpec,
    lattice: &NSLattice,
) -> Result<bool, WallError> {
    let mut pos = false;
    let mut neg = false;
    for g in &cone.generators {
        let p = lattice.ns_pair_mixed(g, d).map_err(WallError::Lattice)?;
        if p.is_positive() {
            pos = true;
        } else if p.is_negative() {
            neg = true;
        }
    }
    Ok(pos && neg)
}

/// Chambers of a 2-generator cone, parametrized by
/// `x(t) = (1-t) g1 + t g2`, `t` in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chamber {
    #[serde(with = "ratio_serde")]
    pub lo: BigRational,
    #[serde(with = "ratio_serde")]
    pub hi: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChamberDecomposition {
    /// Sorted distinct wall-crossing parameters in `(0, 1)`.
    #[serde(with = "ratio_vec_serde")]
    pub cuts: Vec<BigRational>,
    /// Open intervals between consecutive cuts (and the cone boundary).
    pub chambers: Vec<Chamber>,
}

pub fn chambers_rank2(
    walls: &[Wall],
    cone: &AmpleConeSpec,
    lattice: &NSLattice,
) -> Result<ChamberDecomposition, WallError> {
    if lattice.rank() != 2 || cone.generators.len() != 2 {
        return Err(WallError::NotRankTwo);
    }
    cone.validate(lattice)?;
    let g1 = &cone.generators[0];
    let g2 = &cone.generators[1];
    let mut cuts: Vec<BigRational> = Vec::new();
    for w in walls {
        let p1 = lattice.ns_pair_mixed(g1, &w.d).map_err(WallError::Lattice)?;
        let p2 = lattice.ns_pair_mixed(g2, &w.d).map_err(WallError::Lattice)?;
        // (x(t), D) = (1-t) p1 + t p2 vanishes at t = p1 / (p1 - p2);
        // the crossing is interior exactly when p1, p2 have opposite signs
        if (p1.is_positive() && p2.is_negative()) || (p1.is_negative() && p2.is_positive()) {
            cuts.push(&p1 / (&p1 - &p2));
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(BigRational::zero());
    bounds.extend(cuts.iter().cloned());
    bounds.push(BigRational::one());
    let chambers = bounds
        .windows(2)
        .map(|w| Chamber {
            lo: w[0].clone(),
            hi: w[1].clone(),
        })
        .collect();
    Ok(ChamberDecomposition { cuts, chambers })
}

/// `true` iff the polarization lies on none of the walls.
pub fn is_general(
    polarization: &[BigRational],
    walls: &[Wall],
    lattice: &NSLattice,
) -> Result<bool, WallError> {
    for w in walls {
        let p = lattice
            .ns_pair_mixed(polarization, &w.d)
            .map_err(WallError::Lattice)?;
        if p.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The documented default candidate set for `c1(F)`: the componentwise
/// integer box between `0` and `xi_E`, excluding `0` and `xi_E` themselves.
/// Only sensible for small ranks; it is a numerical superset, not an
/// effectivity statement.
pub fn default_subclass_box(xi_e: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = vec![vec![]];
    for c in xi_e {
        let (lo, hi) = if c.is_negative() {
            (c.clone(), BigInt::zero())
        } else {
            (BigInt::zero(), c.clone())
        };
        let mut next = Vec::new();
        for prefix in &out {
            let mut x = lo.clone();
            while x <= hi {
                let mut row = prefix.clone();
                row.push(x.clone());
                next.push(row);
                x += 1;
            }
        }
        out = next;
    }
    out.retain(|row| !row.iter().all(Zero::is_zero) && row != xi_e);
    out
}
