//! The explicit Mukai-vector families over `Pic(X) = Z H`.
//!
//! Both constructors produce a spherical class `v1` and a vector `v` with
//! `<v1^2> = -2`, `<v, v1> = -1` on the rank-one lattice `(H^2) = 2k(s)`.
//! The coprime family has `<v^2> = 2s`; the general family (non-primitive
//! first Chern class, rank `l r`) has `<v^2> = 2l(ls + rp)`. The three
//! identities are recomputed through the Mukai pairing at construction, so a
//! transcription error in the closed-form coefficients cannot go unnoticed.

use crate::jsonio::{int_serde, ratio_serde};
use crate::lattice::{pair, square, MukaiVector, NSLattice};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("{0} and {1} must be coprime")]
    NotCoprime(BigInt, BigInt),
    #[error("k(s) = {0} must be at least 1 to give a polarization degree")]
    NonPositiveK(BigInt),
    #[error("r1 = {r1} must lie strictly between 0 and l*r = {upper}")]
    RangeError { r1: BigInt, upper: BigInt },
    #[error("d*r1 = 1 mod r has no solution for d1 at r1 = {r1}")]
    BezoutUnsolvable { r1: BigInt },
    #[error("parameter {name} = {value} out of range: {need}")]
    BadParam {
        name: &'static str,
        value: BigInt,
        need: &'static str,
    },
}

fn require_positive(name: &'static str, x: &BigInt) -> Result<(), FamilyError> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(FamilyError::BadParam {
            name,
            value: x.clone(),
            need: "positive",
        })
    }
}

/// Modular inverse of `a` mod `m > 0`, reduced into `[0, m)`.
fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// The unique `(r1, d1)` with `r1*d - r*d1 = 1` and `0 < r1 <= r`.
pub fn solve_bezout(r: &BigInt, d: &BigInt) -> Result<(BigInt, BigInt), FamilyError> {
    require_positive("r", r)?;
    require_positive("d", d)?;
    if !r.gcd(d).is_one() {
        return Err(FamilyError::NotCoprime(r.clone(), d.clone()));
    }
    let mut r1 = mod_inverse(d, r).expect("coprimality checked");
    if r1.is_zero() {
        // only when r = 1
        r1 = r.clone();
    }
    let d1 = (&r1 * d - BigInt::one()) / r;
    debug_assert!(r1.is_positive() && r1 <= *r);
    debug_assert_eq!(&r1 * d - r * &d1, BigInt::one());
    Ok((r1, d1))
}

/// The unique `(p, q)` with `p*r1 - q*l = -1` and `0 <= p < l`.
pub fn solve_pq(l: &BigInt, r1: &BigInt) -> Result<(BigInt, BigInt), FamilyError> {
    require_positive("l", l)?;
    require_positive("r1", r1)?;
    if !l.gcd(r1).is_one() {
        return Err(FamilyError::NotCoprime(l.clone(), r1.clone()));
    }
    let inv = mod_inverse(r1, l).expect("coprimality checked");
    let p = (-inv).mod_floor(l);
    let q = (&p * r1 + BigInt::one()) / l;
    debug_assert_eq!(&p * r1 - l * &q, BigInt::from(-1));
    Ok((p, q))
}

/// Input parameters of a family instance. Everything else is derived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Coprime {
        #[serde(with = "int_serde")]
        r: BigInt,
        #[serde(with = "int_serde")]
        d: BigInt,
        #[serde(with = "int_serde")]
        s: BigInt,
    },
    General {
        #[serde(with = "int_serde")]
        l: BigInt,
        #[serde(with = "int_serde")]
        r: BigInt,
        #[serde(with = "int_serde")]
        d: BigInt,
        #[serde(with = "int_serde")]
        r1: BigInt,
        #[serde(with = "int_serde")]
        s: BigInt,
    },
}

impl FamilyParams {
    pub fn coprime(r: i64, d: i64, s: i64) -> Self {
        FamilyParams::Coprime {
            r: r.into(),
            d: d.into(),
            s: s.into(),
        }
    }

    pub fn general(l: i64, r: i64, d: i64, r1: i64, s: i64) -> Self {
        FamilyParams::General {
            l: l.into(),
            r: r.into(),
            d: d.into(),
            r1: r1.into(),
            s: s.into(),
        }
    }

    pub fn build(&self) -> Result<FamilyInstance, FamilyError> {
        match self {
            FamilyParams::Coprime { r, d, s } => family_coprime(r, d, s),
            FamilyParams::General { l, r, d, r1, s } => family_general(l, r, d, r1, s),
        }
    }
}

/// Quantities derived from the input parameters during construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDerived {
    #[serde(with = "int_serde")]
    pub r1: BigInt,
    #[serde(with = "int_serde")]
    pub d1: BigInt,
    #[serde(with = "int_serde")]
    pub k: BigInt,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::jsonio::opt_int_serde"
    )]
    pub p: Option<BigInt>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::jsonio::opt_int_serde"
    )]
    pub q: Option<BigInt>,
}

/// The three defining pairing values, recomputed at construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyIdentities {
    #[serde(with = "int_serde")]
    pub v1_square: BigInt,
    #[serde(with = "int_serde")]
    pub v_square: BigInt,
    #[serde(with = "int_serde")]
    pub v_dot_v1: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyInstance {
    pub params: FamilyParams,
    pub derived: FamilyDerived,
    pub lattice: NSLattice,
    pub v: MukaiVector,
    pub v1: MukaiVector,
    pub identities: FamilyIdentities,
}

impl FamilyInstance {
    /// `w = R_{v1}(v) = v - v1`, the reflected vector.
    pub fn reflected(&self) -> MukaiVector {
        self.v.sub(&self.v1)
    }
}

fn verify_identities(
    lattice: &NSLattice,
    v: &MukaiVector,
    v1: &MukaiVector,
    expected_v_square: &BigInt,
) -> FamilyIdentities {
    let v1_square = square(v1, lattice).expect("rank checked");
    let v_square = square(v, lattice).expect("rank checked");
    let v_dot_v1 = pair(v, v1, lattice).expect("rank checked");
    assert_eq!(v1_square, BigInt::from(-2), "family identity <v1^2> = -2");
    assert_eq!(&v_square, expected_v_square, "family identity for <v^2>");
    assert_eq!(v_dot_v1, BigInt::from(-1), "family identity <v, v1> = -1");
    FamilyIdentities {
        v1_square,
        v_square,
        v_dot_v1,
    }
}

/// Coprime family: `r, d` coprime positive, `(r1, d1)` the normalized Bezout
/// pair, `k(s) = s r1^2 + r r1 - r^2`, lattice `(H^2) = 2 k(s)`, and
///
/// ```text
/// v1 = (r1, d1 H, d1^2 r + d1^2 s r1 - r1 d^2 + 2d)
/// v  = (r,  d H,  (2 d d1 r1 - r d1^2) s + d^2 (r1 - r))
/// ```
pub fn family_coprime(r: &BigInt, d: &BigInt, s: &BigInt) -> Result<FamilyInstance, FamilyError> {
    let (r1, d1) = solve_bezout(r, d)?;
    let k = s * &r1 * &r1 + r * &r1 - r * r;
    if !k.is_positive() {
        return Err(FamilyError::NonPositiveK(k));
    }
    let lattice = NSLattice::rank_one(BigInt::from(2) * &k).expect("2k is even");
    let a1 = &d1 * &d1 * r + &d1 * &d1 * s * &r1 - &r1 * d * d + BigInt::from(2) * d;
    let a = (BigInt::from(2) * d * &d1 * &r1 - r * &d1 * &d1) * s + d * d * (&r1 - r);
    let v1 = MukaiVector::new(r1.clone(), vec![d1.clone()], a1);
    let v = MukaiVector::new(r.clone(), vec![d.clone()], a);
    let identities = verify_identities(&lattice, &v, &v1, &(BigInt::from(2) * s));
    Ok(FamilyInstance {
        params: FamilyParams::Coprime {
            r: r.clone(),
            d: d.clone(),
            s: s.clone(),
        },
        derived: FamilyDerived {
            r1,
            d1,
            k,
            p: None,
            q: None,
        },
        lattice,
        v,
        v1,
        identities,
    })
}

/// General family (rank `l r`, first Chern class `l d H`):
///
/// ```text
/// v  = (l r, l d H, l((1 + d r1) d1 s + d^2 q r1 - r d^2) - p)
/// v1 = (r1, d1 H, r1(-d^2 + d1^2 s) + d1^2 r q + 2d)
/// ```
///
/// with `d1` solving `d r1 - d1 r = 1`, `(p, q)` from [`solve_pq`], and
/// `k(s) = r1(q r + r1 s) - r^2` giving the polarization `(H^2) = 2 k(s)`.
///
/// `r = 0` is rejected: the relation `d r1 - d1 r = 1` then leaves `d1`
/// undetermined and the construction below has no canonical choice.
pub fn family_general(
    l: &BigInt,
    r: &BigInt,
    d: &BigInt,
    r1: &BigInt,
    s: &BigInt,
) -> Result<FamilyInstance, FamilyError> {
    require_positive("l", l)?;
    require_positive("r", r)?;
    if d.is_negative() {
        return Err(FamilyError::BadParam {
            name: "d",
            value: d.clone(),
            need: "non-negative",
        });
    }
    if !r.gcd(d).is_one() {
        return Err(FamilyError::NotCoprime(r.clone(), d.clone()));
    }
    if !l.gcd(r1).is_one() {
        return Err(FamilyError::NotCoprime(l.clone(), r1.clone()));
    }
    let upper = l * r;
    if !r1.is_positive() || *r1 >= upper {
        return Err(FamilyError::RangeError {
            r1: r1.clone(),
            upper,
        });
    }
    // d r1 - d1 r = 1 determines d1 when it has an integral solution
    let (d1_num, rem) = (d * r1 - BigInt::one()).div_rem(r);
    if !rem.is_zero() {
        return Err(FamilyError::BezoutUnsolvable { r1: r1.clone() });
    }
    let d1 = d1_num;
    let (p, q) = solve_pq(l, r1)?;
    let k = r1 * (&q * r + r1 * s) - r * r;
    if !k.is_positive() {
        return Err(FamilyError::NonPositiveK(k));
    }
    let lattice = NSLattice::rank_one(BigInt::from(2) * &k).expect("2k is even");
    let a = l * ((BigInt::one() + d * r1) * &d1 * s + d * d * &q * r1 - r * d * d) - &p;
    let a1 = r1 * (-(d * d) + &d1 * &d1 * s) + &d1 * &d1 * r * &q + BigInt::from(2) * d;
    let v = MukaiVector::new(l * r, vec![l * d], a);
    let v1 = MukaiVector::new(r1.clone(), vec![d1.clone()], a1);
    let expected = BigInt::from(2) * l * (l * s + r * &p);
    let identities = verify_identities(&lattice, &v, &v1, &expected);
    Ok(FamilyInstance {
        params: FamilyParams::General {
            l: l.clone(),
            r: r.clone(),
            d: d.clone(),
            r1: r1.clone(),
            s: s.clone(),
        },
        derived: FamilyDerived {
            r1: r1.clone(),
            d1,
            k,
            p: Some(p),
            q: Some(q),
        },
        lattice,
        v,
        v1,
        identities,
    })
}

/// Which numerical hypothesis to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HypothesisKind {
    /// Sufficient conditions for `k(s) > 0` in the coprime family.
    Lemma1,
    /// The asymptotic bound `<v^2>/2 > max{r l (r l - 1), l^2}`.
    Thm2,
    /// The slope-stability hypothesis `<v^2>/2l >= l`.
    MuBound,
    /// Non-emptiness of the slope-stable locus, strict for primitive vectors.
    RemarkExist,
    /// `k(s) >= 1` for a concrete family instance.
    KPositive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum HypothesisParams {
    Lemma1 {
        #[serde(with = "int_serde")]
        r: BigInt,
        #[serde(with = "int_serde")]
        r1: BigInt,
        #[serde(with = "int_serde")]
        s: BigInt,
    },
    Thm2 {
        #[serde(with = "int_serde")]
        l: BigInt,
        #[serde(with = "int_serde")]
        r: BigInt,
        #[serde(with = "int_serde")]
        square: BigInt,
    },
    MuBound {
        #[serde(with = "int_serde")]
        l: BigInt,
        #[serde(with = "int_serde")]
        square: BigInt,
    },
    RemarkExist {
        #[serde(with = "int_serde")]
        l: BigInt,
        #[serde(with = "int_serde")]
        square: BigInt,
        primitive: bool,
    },
    KPositive { family: FamilyParams },
}

impl HypothesisParams {
    pub fn kind(&self) -> HypothesisKind {
        match self {
            HypothesisParams::Lemma1 { .. } => HypothesisKind::Lemma1,
            HypothesisParams::Thm2 { .. } => HypothesisKind::Thm2,
            HypothesisParams::MuBound { .. } => HypothesisKind::MuBound,
            HypothesisParams::RemarkExist { .. } => HypothesisKind::RemarkExist,
            HypothesisParams::KPositive { .. } => HypothesisKind::KPositive,
        }
    }
}

/// Pass/fail record for one hypothesis; the margin is the exact rational
/// amount by which the governing inequality holds (negative on failure).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub kind: HypothesisKind,
    pub inputs: HypothesisParams,
    pub passed: bool,
    #[serde(with = "ratio_serde")]
    pub margin: BigRational,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::jsonio::opt_ratio_serde"
    )]
    pub value: Option<BigRational>,
    pub citation: String,
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn rat_i(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Evaluate one numerical hypothesis with an exact rational margin.
pub fn check_hypothesis(params: &HypothesisParams) -> Result<HypothesisReport, FamilyError> {
    let kind = params.kind();
    let (passed, margin, value, citation) = match params {
        HypothesisParams::Lemma1 { r, r1, s } => {
            let k = s * r1 * r1 + r * r1 - r * r;
            // blanket assumption r1 >= r/2, then either case
            let blanket = rat(r1) - rat(r) / rat_i(2);
            let case1 = if *r == BigInt::from(2) {
                rat(s) - rat_i(3)
            } else {
                -rat_i(1)
            };
            let case2 = (rat(r1) - rat_i(2) * rat(r) / rat_i(3)).min(rat(s) - rat_i(1));
            let case = case1.max(case2);
            if blanket.is_negative() {
                (false, blanket, Some(rat(&k)), LEMMA1_CITE.to_string())
            } else if case.is_negative() {
                (false, case, Some(rat(&k)), LEMMA1_CITE.to_string())
            } else {
                // the lemma asserts k(s) > 0 here; re-derive and use it as margin
                (k.is_positive(), rat(&k), Some(rat(&k)), LEMMA1_CITE.to_string())
            }
        }
        HypothesisParams::Thm2 { l, r, square } => {
            let rl = r * l;
            let bound = (&rl * (&rl - BigInt::one())).max(l * l);
            let margin = rat(square) / rat_i(2) - rat(&bound);
            (
                margin.is_positive(),
                margin,
                Some(rat(&bound)),
                "asymptotic square bound for non-primitive first Chern class".to_string(),
            )
        }
        HypothesisParams::MuBound { l, square } => {
            require_positive("l", l)?;
            let margin = rat(square) / (rat_i(2) * rat(l)) - rat(l);
            let bound = &margin + rat_i(1);
            (
                !margin.is_negative(),
                margin,
                Some(bound),
                "slope-stability codimension bound hypothesis".to_string(),
            )
        }
        HypothesisParams::RemarkExist {
            l,
            square,
            primitive,
        } => {
            require_positive("l", l)?;
            let margin = rat(square) / (rat_i(2) * rat(l)) - rat(l);
            let passed = if *primitive {
                margin.is_positive()
            } else {
                !margin.is_negative()
            };
            (
                passed,
                margin,
                None,
                "non-emptiness of the slope-stable locus".to_string(),
            )
        }
        HypothesisParams::KPositive { family } => {
            let k = match family {
                FamilyParams::Coprime { r, d, s } => {
                    let (r1, _) = solve_bezout(r, d)?;
                    s * &r1 * &r1 + r * &r1 - r * r
                }
                FamilyParams::General { l, r, d, r1, s } => {
                    require_positive("l", l)?;
                    require_positive("r", r)?;
                    if !r.gcd(d).is_one() {
                        return Err(FamilyError::NotCoprime(r.clone(), d.clone()));
                    }
                    let (_, q) = solve_pq(l, r1)?;
                    r1 * (&q * r + r1 * s) - r * r
                }
            };
            let margin = rat(&k) - rat_i(1);
            (
                !margin.is_negative(),
                margin,
                Some(rat(&k)),
                "polarization degree positivity k(s) >= 1".to_string(),
            )
        }
    };
    Ok(HypothesisReport {
        kind,
        inputs: params.clone(),
        passed,
        margin,
        value,
        citation,
    })
}

const LEMMA1_CITE: &str = "sufficient conditions for k(s) > 0 in the coprime family";
