//! Certificates: verifiable chains of twist / reflect / deform moves
//! connecting a Mukai vector to the Hilbert-scheme vector `(1, 0, 1-n)`.
//!
//! A certificate records the initial state, every move with its resulting
//! state and legality reports, the final vector, and the target `n`. The
//! verifier trusts nothing: it rebuilds every family instance from its
//! recorded parameters, recomputes every move result and every hypothesis
//! report, and accepts only on exact agreement.
//!
//! The planner performs a breadth-first search over ranks. Lowering the rank
//! uses a reflection `v -> v - v1` from a model family; when no such family
//! exists at the current rank (small `s`), the planner detours through a
//! higher rank first, using the same reflection in the other direction.

use crate::families::{
    check_hypothesis, family_coprime, FamilyError, FamilyParams, HypothesisParams,
    HypothesisReport,
};
use crate::jsonio::int_serde;
use crate::lattice::{reflect, square, twist, LatticeError, MukaiVector, NSLattice};
use crate::linalg::{gcd_all, primitive_normalized};
use crate::walls::AmpleConeSpec;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertifyError {
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("no certificate found within the search budget")]
    NoCertificateFound,
    #[error("the primitivizing-twist search needs Picard rank >= 2, got {0}")]
    RankTooSmall(usize),
    #[error("primitivizing-twist search exhausted (|n| <= {0})")]
    SearchExhausted(u64),
    #[error("invalid input: {0}")]
    BadParam(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A lattice together with a Mukai vector on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub lattice: NSLattice,
    pub vector: MukaiVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectDirection {
    /// The current vector is the family's `v`; the move lands on `v - v1`.
    Down,
    /// The current vector is the family's `v - v1`; the move lands on `v`.
    Up,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveKind {
    Twist {
        #[serde(with = "crate::jsonio::int_vec_serde")]
        n: Vec<BigInt>,
    },
    Reflect {
        v1: MukaiVector,
        family: FamilyParams,
        direction: ReflectDirection,
    },
    Deform { target: State },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    #[serde(flatten)]
    pub kind: MoveKind,
    pub justification: String,
    pub checks: Vec<HypothesisReport>,
    pub result: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub initial: State,
    pub moves: Vec<Move>,
    #[serde(rename = "final")]
    pub final_vector: MukaiVector,
    #[serde(with = "int_serde")]
    pub target_n: BigInt,
}

/// `v(I_Z) = (1, 0, 1-n)` for a length-`n` subscheme, on a rank-1 lattice.
pub fn hilbert_vector(n: &BigInt) -> Result<MukaiVector, CertifyError> {
    if !n.is_positive() {
        return Err(CertifyError::BadParam(format!("n = {n} must be >= 1")));
    }
    Ok(MukaiVector::new(
        BigInt::one(),
        vec![BigInt::zero()],
        BigInt::one() - n,
    ))
}

/// `l` of `v = l(r + xi) + a w`: the gcd of the rank and the NS coordinates.
fn divisibility(v: &MukaiVector) -> BigInt {
    let mut coords = vec![v.r.clone()];
    coords.extend(v.xi.iter().cloned());
    gcd_all(&coords)
}

const TWIST_JUSTIFICATION: &str = "line-bundle twist, an isometry of the Mukai lattice";
const REFLECT_JUSTIFICATION: &str =
    "reflection by the class of the rigid stable bundle; moduli spaces related by an \
     elementary transformation";
const DEFORM_JUSTIFICATION: &str =
    "deformation equivalence across polarized families with matching numerical data \
     (recorded axiom)";

/// The hypothesis reports a reflect move must carry, in order.
fn reflect_checks(
    family: &FamilyParams,
    chain_square: &BigInt,
) -> Result<Vec<HypothesisReport>, FamilyError> {
    let mut out = vec![check_hypothesis(&HypothesisParams::KPositive {
        family: family.clone(),
    })?];
    if let FamilyParams::General { l, r, .. } = family {
        out.push(check_hypothesis(&HypothesisParams::MuBound {
            l: l.clone(),
            square: chain_square.clone(),
        })?);
        out.push(check_hypothesis(&HypothesisParams::Thm2 {
            l: l.clone(),
            r: r.clone(),
            square: chain_square.clone(),
        })?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Planner
// ---------------------------------------------------------------------------

/// Smallest positive `d` with `d * r1 = 1 (mod h)`; `r1` must be a unit.
fn smallest_inverse(r1: &BigInt, h: &BigInt) -> Option<BigInt> {
    if h.is_one() {
        return Some(BigInt::one());
    }
    let e = r1.extended_gcd(h);
    if !e.gcd.is_one() {
        return None;
    }
    let d = e.x.mod_floor(h);
    Some(if d.is_zero() { h.clone() } else { d })
}

/// Is there a coprime-family edge between rank `h` and rank `h - r1` at this
/// `s`? Returns the `d` parameter of the witnessing family.
fn l1_edge(h: &BigInt, r1: &BigInt, s: &BigInt) -> Option<BigInt> {
    if !r1.is_positive() || r1 >= h {
        return None;
    }
    let k = s * r1 * r1 + h * r1 - h * h;
    if !k.is_positive() {
        return None;
    }
    smallest_inverse(r1, h)
}

/// Shortest rank path from `start` to 1 in the coprime-family move graph,
/// deterministic (neighbors visited in ascending rank order).
fn l1_rank_path(start: &BigInt, s: &BigInt, cap: &BigInt) -> Option<Vec<BigInt>> {
    if start.is_one() {
        return Some(vec![BigInt::one()]);
    }
    let mut parent: BTreeMap<BigInt, BigInt> = BTreeMap::new();
    let mut frontier = vec![start.clone()];
    parent.insert(start.clone(), start.clone());
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for node in &frontier {
            let mut neighbor = BigInt::one();
            while neighbor <= *cap {
                if neighbor != *node && !parent.contains_key(&neighbor) {
                    let h = node.max(&neighbor).clone();
                    let r1 = (node - &neighbor).abs();
                    if l1_edge(&h, &r1, s).is_some() {
                        parent.insert(neighbor.clone(), node.clone());
                        if neighbor.is_one() {
                            let mut path = vec![BigInt::one()];
                            let mut cur = node.clone();
                            loop {
                                path.push(cur.clone());
                                if cur == *start {
                                    break;
                                }
                                cur = parent[&cur].clone();
                            }
                            path.reverse();
                            return Some(path);
                        }
                        next.push(neighbor.clone());
                    }
                }
                neighbor += 1;
            }
        }
        frontier = next;
    }
    None
}

/// Append the moves that walk `state` down the given rank path via
/// deform-onto-model + reflect pairs, then normalize with a final twist.
fn emit_l1_moves(
    mut state: State,
    path: &[BigInt],
    s: &BigInt,
    moves: &mut Vec<Move>,
) -> Result<State, CertifyError> {
    let chain_square = BigInt::from(2) * s;
    for step in path.windows(2) {
        let (from, to) = (&step[0], &step[1]);
        let down = from > to;
        let h = if down { from.clone() } else { to.clone() };
        let r1 = (from - to).abs();
        let d = l1_edge(&h, &r1, s).ok_or(CertifyError::NoCertificateFound)?;
        let fam = family_coprime(&h, &d, s)?;
        debug_assert_eq!(fam.derived.r1, r1);
        let (anchor, direction) = if down {
            (fam.v.clone(), ReflectDirection::Down)
        } else {
            (fam.reflected(), ReflectDirection::Up)
        };
        let target = State {
            lattice: fam.lattice.clone(),
            vector: anchor,
        };
        if state != target {
            moves.push(Move {
                kind: MoveKind::Deform {
                    target: target.clone(),
                },
                justification: DEFORM_JUSTIFICATION.into(),
                checks: Vec::new(),
                result: target.clone(),
            });
            state = target;
        }
        let reflected = reflect(&state.vector, &fam.v1, &state.lattice)?;
        let result = State {
            lattice: state.lattice.clone(),
            vector: reflected,
        };
        moves.push(Move {
            kind: MoveKind::Reflect {
                v1: fam.v1.clone(),
                family: fam.params.clone(),
                direction,
            },
            justification: REFLECT_JUSTIFICATION.into(),
            checks: reflect_checks(&fam.params, &chain_square)?,
            result: result.clone(),
        });
        state = result;
    }
    // normalize (1, d'H, a') to (1, 0, .) with a twist by -d'H
    debug_assert!(state.vector.r.is_one());
    if !state.vector.xi[0].is_zero() {
        let n = vec![-state.vector.xi[0].clone()];
        let twisted = twist(&state.vector, &n, &state.lattice)?;
        let result = State {
            lattice: state.lattice.clone(),
            vector: twisted,
        };
        moves.push(Move {
            kind: MoveKind::Twist { n },
            justification: TWIST_JUSTIFICATION.into(),
            checks: Vec::new(),
            result: result.clone(),
        });
        state = result;
    }
    Ok(state)
}

/// Canonical primitive start state for the `l = 1` pipeline: `(r, H, a0)` on
/// `(H^2) = 2 k0` with `k0 = s (mod r)` minimal `>= 1` and `<v^2> = 2s`.
fn canonical_l1_initial(r: &BigInt, s: &BigInt) -> Result<State, CertifyError> {
    let mut k0 = s.mod_floor(r);
    if !k0.is_positive() {
        k0 += r;
    }
    let a0 = (&k0 - s) / r;
    let lattice = NSLattice::rank_one(BigInt::from(2) * &k0)?;
    let vector = MukaiVector::new(r.clone(), vec![BigInt::one()], a0);
    debug_assert_eq!(square(&vector, &lattice)?, BigInt::from(2) * s);
    Ok(State { lattice, vector })
}

/// Plan and verify a certificate for the numerical class
/// `(rank = l*r, divisibility l, square, a mod l)`.
pub fn plan_certificate(
    r: &BigInt,
    l: &BigInt,
    square_in: &BigInt,
    a_mod_l: &BigInt,
) -> Result<Certificate, CertifyError> {
    plan_certificate_with_cap(r, l, square_in, a_mod_l, None)
}

/// [`plan_certificate`] with an explicit cap on the intermediate ranks the
/// breadth-first search may visit (default `4r + 8`).
pub fn plan_certificate_with_cap(
    r: &BigInt,
    l: &BigInt,
    square_in: &BigInt,
    a_mod_l: &BigInt,
    rank_cap: Option<&BigInt>,
) -> Result<Certificate, CertifyError> {
    if !r.is_positive() || !l.is_positive() {
        return Err(CertifyError::BadParam(format!(
            "r = {r} and l = {l} must be positive"
        )));
    }
    if !square_in.is_positive() || square_in.is_odd() {
        return Err(CertifyError::HypothesisFailed(format!(
            "square = {square_in} must be a positive even integer"
        )));
    }
    let cert = if l.is_one() {
        let s = square_in / BigInt::from(2);
        let initial = canonical_l1_initial(r, &s)?;
        let default_cap = BigInt::from(4) * r + BigInt::from(8);
        let cap = rank_cap.unwrap_or(&default_cap);
        let path = l1_rank_path(r, &s, cap).ok_or(CertifyError::NoCertificateFound)?;
        let mut moves = Vec::new();
        let end = emit_l1_moves(initial.clone(), &path, &s, &mut moves)?;
        let target_n = square_in / BigInt::from(2) + BigInt::one();
        Certificate {
            initial,
            moves,
            final_vector: end.vector,
            target_n,
        }
    } else {
        plan_general(r, l, square_in, a_mod_l, rank_cap)?
    };
    let report = verify_certificate(&cert);
    if !report.accepted {
        // the planner must never emit an unverifiable chain
        return Err(CertifyError::NoCertificateFound);
    }
    Ok(cert)
}

/// The `l > 1` pipeline: realize the class by a model family with
/// non-primitive first Chern class, reflect down once to a primitive vector
/// of rank `lr - r1`, then run the `l = 1` pipeline.
fn plan_general(
    r: &BigInt,
    l: &BigInt,
    square_in: &BigInt,
    a_mod_l: &BigInt,
    rank_cap: Option<&BigInt>,
) -> Result<Certificate, CertifyError> {
    let thm2 = check_hypothesis(&HypothesisParams::Thm2 {
        l: l.clone(),
        r: r.clone(),
        square: square_in.clone(),
    })
    .map_err(CertifyError::Family)?;
    if !thm2.passed {
        return Err(CertifyError::HypothesisFailed(format!(
            "square/2 = {} does not exceed max(rl(rl-1), l^2)",
            BigRational::new(square_in.clone(), BigInt::from(2))
        )));
    }
    let two_l = BigInt::from(2) * l;
    let (q0, rem) = square_in.div_rem(&two_l);
    if !rem.is_zero() {
        return Err(CertifyError::HypothesisFailed(format!(
            "square = {square_in} must be divisible by 2l = {two_l}"
        )));
    }
    let a_res = a_mod_l.mod_floor(l);
    if !l.gcd(&a_res).is_one() {
        return Err(CertifyError::HypothesisFailed(format!(
            "a = {a_res} (mod {l}) is not a unit, so the vector is not primitive"
        )));
    }
    let p = (-&a_res).mod_floor(l);
    let (s, rem) = (&q0 - r * &p).div_mod_floor(l);
    if !rem.is_zero() {
        return Err(CertifyError::HypothesisFailed(format!(
            "square/2l = {q0} is incompatible with a = {a_res} (mod {l})"
        )));
    }
    // pick the smallest r1 realizing p and a legal family
    let mut fam = None;
    let mut r1 = BigInt::one();
    let upper = l * r;
    while r1 < upper {
        if l.gcd(&r1).is_one()
            && r.gcd(&r1).is_one()
            && (&p * &r1 + BigInt::one()).mod_floor(l).is_zero()
        {
            if let Some(d) = smallest_inverse(&r1, r) {
                if let Ok(f) = crate::families::family_general(l, r, &d, &r1, &s) {
                    fam = Some(f);
                    break;
                }
            }
        }
        r1 += 1;
    }
    let fam = fam.ok_or(CertifyError::NoCertificateFound)?;
    debug_assert_eq!(fam.identities.v_square, *square_in);
    debug_assert_eq!(fam.v.a.mod_floor(l), a_res);

    let initial = State {
        lattice: fam.lattice.clone(),
        vector: fam.v.clone(),
    };
    let w = fam.reflected();
    let mut moves = vec![Move {
        kind: MoveKind::Reflect {
            v1: fam.v1.clone(),
            family: fam.params.clone(),
            direction: ReflectDirection::Down,
        },
        justification: REFLECT_JUSTIFICATION.into(),
        checks: reflect_checks(&fam.params, square_in)?,
        result: State {
            lattice: fam.lattice.clone(),
            vector: w.clone(),
        },
    }];
    for check in &moves[0].checks {
        if !check.passed || (check.kind == crate::families::HypothesisKind::MuBound
            && !check.margin.is_positive())
        {
            return Err(CertifyError::HypothesisFailed(check.citation.clone()));
        }
    }
    let state = State {
        lattice: fam.lattice.clone(),
        vector: w.clone(),
    };
    let s1 = square_in / BigInt::from(2);
    let default_cap = BigInt::from(4) * &w.r + BigInt::from(8);
    let cap = rank_cap.unwrap_or(&default_cap);
    let path = l1_rank_path(&w.r, &s1, cap).ok_or(CertifyError::NoCertificateFound)?;
    let end = emit_l1_moves(state, &path, &s1, &mut moves)?;
    Ok(Certificate {
        initial,
        moves,
        final_vector: end.vector,
        target_n: square_in / BigInt::from(2) + BigInt::one(),
    })
}

// ---------------------------------------------------------------------------
// Verifier
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    /// `None` for failures about the initial state or the final target.
    pub move_index: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub accepted: bool,
    pub failures: Vec<VerifyFailure>,
}

/// Re-derive everything a certificate claims; accept only on exact agreement.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let mut failures: Vec<VerifyFailure> = Vec::new();
    let global = |reason: String| VerifyFailure {
        move_index: None,
        reason,
    };
    let chain_square = match square(&cert.initial.vector, &cert.initial.lattice) {
        Ok(sq) => sq,
        Err(e) => {
            return VerifyReport {
                accepted: false,
                failures: vec![global(format!("initial state is inconsistent: {e}"))],
            };
        }
    };
    if BigInt::from(2) * (&cert.target_n - BigInt::one()) != chain_square {
        failures.push(global(format!(
            "target_n = {} does not equal square/2 + 1",
            cert.target_n
        )));
    }
    if !cert.target_n.is_positive() {
        failures.push(global(format!("target_n = {} must be >= 1", cert.target_n)));
    }

    let mut state = cert.initial.clone();
    for (idx, mv) in cert.moves.iter().enumerate() {
        let mut fail = |reason: String| VerifyFailure {
            move_index: Some(idx),
            reason,
        };
        match check_move(&state, mv, &chain_square) {
            Ok(move_failures) => failures.extend(move_failures.into_iter().map(&mut fail)),
            Err(e) => failures.push(fail(format!("move could not be evaluated: {e}"))),
        }
        match square(&mv.result.vector, &mv.result.lattice) {
            Ok(sq) if sq == chain_square => {}
            Ok(sq) => failures.push(fail(format!(
                "square changed from {chain_square} to {sq}"
            ))),
            Err(e) => failures.push(fail(format!("result state is inconsistent: {e}"))),
        }
        state = mv.result.clone();
    }

    if state.vector != cert.final_vector {
        failures.push(global("final vector mismatch with last state".into()));
    }
    match hilbert_vector(&cert.target_n) {
        Ok(h) if h == cert.final_vector => {}
        Ok(h) => failures.push(global(format!(
            "final vector mismatch: expected {:?}",
            h.coords()
        ))),
        Err(e) => failures.push(global(e.to_string())),
    }
    VerifyReport {
        accepted: failures.is_empty(),
        failures,
    }
}

/// All reasons this single move is illegal or misrecorded, given the state.
fn check_move(
    state: &State,
    mv: &Move,
    chain_square: &BigInt,
) -> Result<Vec<String>, CertifyError> {
    let mut out = Vec::new();
    match &mv.kind {
        MoveKind::Twist { n } => {
            if mv.result.lattice != state.lattice {
                out.push("twist must not change the lattice".into());
            }
            match twist(&state.vector, n, &state.lattice) {
                Ok(t) if t == mv.result.vector => {}
                Ok(_) => out.push("recorded twist result does not recompute".into()),
                Err(e) => out.push(format!("twist failed: {e}")),
            }
            if !mv.checks.is_empty() {
                out.push("twist carries no hypothesis checks".into());
            }
        }
        MoveKind::Reflect {
            v1,
            family,
            direction,
        } => {
            let fam = match family.build() {
                Ok(f) => f,
                Err(e) => {
                    out.push(format!("family parameters do not build: {e}"));
                    return Ok(out);
                }
            };
            if fam.lattice != state.lattice {
                out.push("family lattice does not match the current lattice".into());
            }
            if fam.v1 != *v1 {
                out.push("recorded v1 is not the family's spherical class".into());
            }
            let expected_pairing = match direction {
                ReflectDirection::Down => {
                    if state.vector != fam.v {
                        out.push("current vector is not the family's v".into());
                    }
                    BigInt::from(-1)
                }
                ReflectDirection::Up => {
                    if state.vector != fam.reflected() {
                        out.push("current vector is not the family's v - v1".into());
                    }
                    BigInt::one()
                }
            };
            match crate::lattice::pair(&state.vector, v1, &state.lattice) {
                Ok(p) if p == expected_pairing => {}
                Ok(_) => {
                    out.push("pairing with spherical class must be -1 (up: +1)".into())
                }
                Err(e) => out.push(format!("pairing failed: {e}")),
            }
            if mv.result.lattice != state.lattice {
                out.push("reflect must not change the lattice".into());
            }
            match reflect(&state.vector, v1, &state.lattice) {
                Ok(r) if r == mv.result.vector => {}
                Ok(_) => out.push("recorded reflect result does not recompute".into()),
                Err(e) => out.push(format!("reflect failed: {e}")),
            }
            if !mv.result.vector.r.is_positive() {
                out.push("reflect must land on positive rank".into());
            }
            match reflect_checks(family, chain_square) {
                Ok(expected) => {
                    if mv.checks != expected {
                        out.push("recorded hypothesis reports do not recompute".into());
                    }
                    for check in &expected {
                        let strict_mu = check.kind == crate::families::HypothesisKind::MuBound;
                        let ok = if strict_mu {
                            check.margin.is_positive()
                        } else {
                            check.passed
                        };
                        if !ok {
                            out.push(format!("hypothesis not satisfied: {}", check.citation));
                        }
                    }
                }
                Err(e) => out.push(format!("hypothesis recomputation failed: {e}")),
            }
        }
        MoveKind::Deform { target } => {
            if mv.result != *target {
                out.push("deform result does not equal its recorded target".into());
            }
            let l_src = divisibility(&state.vector);
            let l_dst = divisibility(&target.vector);
            if l_src != l_dst {
                out.push("deform must preserve the divisibility l".into());
            }
            if state.vector.r != target.vector.r {
                out.push("deform must preserve the rank".into());
            }
            let sq_src = square(&state.vector, &state.lattice)?;
            let sq_dst = square(&target.vector, &target.lattice)?;
            if sq_src != sq_dst {
                out.push("deform must preserve the square".into());
            }
            if !l_src.is_zero()
                && (&state.vector.a - &target.vector.a).mod_floor(&l_src) != BigInt::zero()
            {
                out.push("deform must preserve a mod l".into());
            }
            for (name, v) in [("source", &state.vector), ("target", &target.vector)] {
                let mut coords = vec![v.r.clone()];
                coords.extend(v.xi.iter().cloned());
                match primitive_normalized(&coords) {
                    Some(_) => {}
                    None => out.push(format!("deform {name} has zero r + xi part")),
                }
            }
            if !mv.checks.is_empty() {
                out.push("deform carries no hypothesis checks".into());
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Primitivizing twist search
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistChecks {
    pub xi_prime_primitive: bool,
    pub xi_prime_interior: bool,
    #[serde(with = "int_serde")]
    pub xi_prime_square: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivizingTwist {
    #[serde(with = "int_serde")]
    pub n: BigInt,
    #[serde(with = "crate::jsonio::int_vec_serde")]
    pub direction: Vec<BigInt>,
    #[serde(with = "crate::jsonio::int_vec_serde")]
    pub l_class: Vec<BigInt>,
    #[serde(with = "crate::jsonio::int_vec_serde")]
    pub xi_prime: Vec<BigInt>,
    pub checks: TwistChecks,
}

/// Search for `N = n L'` (`L'` a primitive cone-generator direction,
/// `gcd(n, r) = 1`) such that `xi' = xi + r N` is primitive, strictly inside
/// the cone, and has square `>= 4`. Smallest `|n|` wins, positive preferred.
pub fn find_primitivizing_twist(
    v: &MukaiVector,
    lattice: &NSLattice,
    cone: &AmpleConeSpec,
    n_max: u64,
) -> Result<PrimitivizingTwist, CertifyError> {
    if lattice.rank() < 2 {
        return Err(CertifyError::RankTooSmall(lattice.rank()));
    }
    if cone.generators.len() != lattice.rank() {
        return Err(CertifyError::BadParam(
            "interior test needs a simplicial cone (generators = rank)".into(),
        ));
    }
    let l = divisibility(v);
    if l.is_zero() {
        return Err(CertifyError::BadParam("zero r + xi part".into()));
    }
    let r = &v.r / &l;
    let xi: Vec<BigInt> = v.xi.iter().map(|c| c / &l).collect();
    let directions: Vec<Vec<BigInt>> = cone
        .generators
        .iter()
        .map(|g| {
            let lcm = g
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<BigInt> = g.iter().map(|x| (x * &lcm).to_integer()).collect();
            primitive_normalized(&ints)
                .ok_or_else(|| CertifyError::BadParam("zero cone generator".into()))
        })
        .collect::<Result<_, _>>()?;
    for abs_n in 1..=n_max {
        for sign in [1i64, -1] {
            let n = BigInt::from(abs_n) * BigInt::from(sign);
            if !n.gcd(&r).is_one() {
                continue;
            }
            for dir in &directions {
                let l_class: Vec<BigInt> = dir.iter().map(|c| c * &n).collect();
                let xi_prime: Vec<BigInt> = xi
                    .iter()
                    .zip(&l_class)
                    .map(|(x, nc)| x + &r * nc)
                    .collect();
                let primitive = gcd_all(&xi_prime).is_one();
                let interior = strictly_inside(&xi_prime, cone)?;
                let sq = lattice.ns_square(&xi_prime)?;
                if primitive && interior && sq >= BigInt::from(4) {
                    return Ok(PrimitivizingTwist {
                        n,
                        direction: dir.clone(),
                        l_class,
                        xi_prime: xi_prime.clone(),
                        checks: TwistChecks {
                            xi_prime_primitive: primitive,
                            xi_prime_interior: interior,
                            xi_prime_square: sq,
                        },
                    });
                }
            }
        }
    }
    Err(CertifyError::SearchExhausted(n_max))
}

/// Is `x` a strictly positive combination of the simplicial cone generators?
fn strictly_inside(x: &[BigInt], cone: &AmpleConeSpec) -> Result<bool, CertifyError> {
    let n = cone.generators.len();
    if x.len() != n {
        return Err(CertifyError::BadParam("dimension mismatch".into()));
    }
    // solve sum_j c_j * g_j = x by Gaussian elimination over the rationals
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                (0..n).map(|j| cone.generators[j][i].clone()).collect();
            row.push(BigRational::from_integer(x[i].clone()));
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(p) = (pivot_row..n).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for c in col..=n {
            let t = &m[pivot_row][c] * &inv;
            m[pivot_row][c] = t;
        }
        for i in 0..n {
            if i != pivot_row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in col..=n {
                    let t = &m[pivot_row][c] * &f;
                    m[i][c] -= t;
                }
            }
        }
        pivot_row += 1;
    }
    if pivot_row < n {
        return Err(CertifyError::BadParam(
            "cone generators are linearly dependent".into(),
        ));
    }
    Ok(m.iter().all(|row| row[n].is_positive()))
}
