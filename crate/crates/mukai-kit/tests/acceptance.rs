//! Acceptance gate: one test per criterion, each printing a single
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`). All checks are
//! exact; there is no tolerance anywhere.

use mukai_kit::certify::{plan_certificate, verify_certificate};
use mukai_kit::families::{family_coprime, family_general, FamilyError};
use mukai_kit::lattice::{
    pair, reflect, square, twist, MukaiVector, NSLattice, orth_basis,
};
use mukai_kit::moduli::{filtration_oracle, mu_codim_bound, stratum_report};
use mukai_kit::walls::{chambers_rank2, default_subclass_box, enumerate_walls, AmpleConeSpec};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn b(x: i64) -> BigInt {
    BigInt::from(x)
}

/// Print the verdict line and fail the test on a false condition.
fn verdict(name: &str, ok: bool) {
    println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion failed: {name}");
}

#[test]
fn criterion_1_coprime_family_identity_sweep() {
    let mut cases = 0u64;
    let mut ok = true;
    for r in 2i64..=12 {
        for d in 1..r {
            if b(r).gcd(&b(d)) != b(1) {
                continue;
            }
            for s in -12i64..=12 {
                match family_coprime(&b(r), &b(d), &b(s)) {
                    Ok(inst) => {
                        cases += 1;
                        ok &= inst.identities.v1_square == b(-2)
                            && inst.identities.v_square == b(2 * s)
                            && inst.identities.v_dot_v1 == b(-1)
                            && inst.derived.k >= b(1);
                    }
                    Err(FamilyError::NonPositiveK(_)) => {}
                    Err(e) => panic!("unexpected error at ({r},{d},{s}): {e}"),
                }
            }
        }
    }
    verdict(
        &format!("criterion 1: coprime-family identity sweep ({cases} instances)"),
        ok && cases > 0,
    );
}

#[test]
fn criterion_2_general_family_identity_sweep() {
    let mut cases = 0u64;
    let mut ok = true;
    for l in 1i64..=8 {
        for r in 1..=12 / l {
            for d in 0i64..=12 {
                if b(r).gcd(&b(d)) != b(1) {
                    continue;
                }
                for r1 in 1..l * r {
                    if b(l).gcd(&b(r1)) != b(1) || (d * r1 - 1) % r != 0 {
                        continue;
                    }
                    for s in -12i64..=12 {
                        match family_general(&b(l), &b(r), &b(d), &b(r1), &b(s)) {
                            Ok(inst) => {
                                cases += 1;
                                let p = inst.derived.p.clone().unwrap();
                                let expected = b(2 * l) * (b(l * s) + b(r) * &p);
                                ok &= inst.identities.v1_square == b(-2)
                                    && inst.identities.v_square == expected
                                    && inst.identities.v_dot_v1 == b(-1);
                            }
                            Err(FamilyError::NonPositiveK(_)) => {}
                            Err(e) => {
                                panic!("unexpected error at ({l},{r},{d},{r1},{s}): {e}")
                            }
                        }
                    }
                }
            }
        }
    }
    verdict(
        &format!("criterion 2: general-family identity sweep ({cases} instances)"),
        ok && cases > 0,
    );
}

/// Random even Gram matrix of rank 1..=3 with entries bounded by 8.
fn random_lattice(rng: &mut ChaCha8Rng) -> NSLattice {
    loop {
        let rank = rng.gen_range(1..=3usize);
        let mut gram = vec![vec![BigInt::zero(); rank]; rank];
        for i in 0..rank {
            gram[i][i] = b(2 * rng.gen_range(-4i64..=4));
            for j in 0..i {
                let e = b(rng.gen_range(-8i64..=8));
                gram[i][j] = e.clone();
                gram[j][i] = e;
            }
        }
        let names = ["e1", "e2", "e3"][..rank]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if let Ok(lat) = NSLattice::new(gram, names) {
            return lat;
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, rank: usize) -> MukaiVector {
    MukaiVector::new(
        b(rng.gen_range(-8i64..=8)),
        (0..rank).map(|_| b(rng.gen_range(-8i64..=8))).collect(),
        b(rng.gen_range(-8i64..=8)),
    )
}

fn random_class(rng: &mut ChaCha8Rng, rank: usize) -> Vec<BigInt> {
    (0..rank).map(|_| b(rng.gen_range(-8i64..=8))).collect()
}

#[test]
fn criterion_3_isometry_involution_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut ok = true;
    for _ in 0..10_000 {
        let lat = random_lattice(&mut rng);
        let rank = lat.rank();
        let x = random_vector(&mut rng, rank);
        let y = random_vector(&mut rng, rank);
        let n = random_class(&mut rng, rank);
        let p0 = pair(&x, &y, &lat).unwrap();

        // twist preserves pairings and is inverted by the opposite twist
        let tx = twist(&x, &n, &lat).unwrap();
        let ty = twist(&y, &n, &lat).unwrap();
        ok &= pair(&tx, &ty, &lat).unwrap() == p0;
        let minus_n: Vec<BigInt> = n.iter().map(|c| -c).collect();
        ok &= twist(&tx, &minus_n, &lat).unwrap() == x;

        // reflect in v1 = (1, xi, xi^2/2 + 1), spherical for every xi
        let xi = random_class(&mut rng, rank);
        let a1 = lat.ns_square(&xi).unwrap() / 2 + 1;
        let v1 = MukaiVector::new(BigInt::one(), xi, a1);
        debug_assert_eq!(square(&v1, &lat).unwrap(), b(-2));
        let rx = reflect(&x, &v1, &lat).unwrap();
        let ry = reflect(&y, &v1, &lat).unwrap();
        ok &= pair(&rx, &ry, &lat).unwrap() == p0;
        ok &= reflect(&rx, &v1, &lat).unwrap() == x;
    }
    verdict("criterion 3: 10000 randomized isometry/involution cases", ok);
}

#[test]
fn criterion_4_reflected_orth_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB112);
    let mut ok = true;
    let mut done = 0;
    while done < 1_000 {
        let lat = random_lattice(&mut rng);
        let rank = lat.rank();
        // v1 = (1, 0, 1) is spherical; v = (r, xi, 1-r) has <v, v1> = -1;
        // a random twist moves the pair around without breaking either fact
        let v1 = MukaiVector::new(BigInt::one(), vec![BigInt::zero(); rank], BigInt::one());
        let r = b(rng.gen_range(-8i64..=8));
        let v = MukaiVector::new(r.clone(), random_class(&mut rng, rank), BigInt::one() - &r);
        if v.is_zero() {
            continue;
        }
        let n = random_class(&mut rng, rank);
        let v1 = twist(&v1, &n, &lat).unwrap();
        let v = twist(&v, &n, &lat).unwrap();
        assert_eq!(pair(&v, &v1, &lat).unwrap(), b(-1));
        assert_eq!(square(&v1, &lat).unwrap(), b(-2));

        let basis_v = orth_basis(&v, &lat).unwrap();
        let w = reflect(&v, &v1, &lat).unwrap();
        let basis_w = orth_basis(&w, &lat).unwrap();
        let reflected: Vec<MukaiVector> = basis_v
            .basis
            .iter()
            .map(|x| reflect(x, &v1, &lat).unwrap())
            .collect();
        // membership in w's orthogonal complement, as integral combinations
        ok &= reflected.iter().all(|x| basis_w.contains(x));
        // the reflected basis has the same Gram matrix as the original
        let m = reflected.len();
        for i in 0..m {
            for j in 0..m {
                ok &= pair(&reflected[i], &reflected[j], &lat).unwrap()
                    == basis_v.gram[i][j];
            }
        }
        done += 1;
    }
    verdict("criterion 4: 1000 reflected orthogonal-complement pairs", ok);
}

/// Independent brute-force wall scan: wide symmetric window per subclass,
/// no interval isolation, own normalization.
fn brute_force_walls(
    v: &MukaiVector,
    lat: &NSLattice,
    cone: &AmpleConeSpec,
    subclasses: &[Vec<BigInt>],
) -> BTreeSet<Vec<BigInt>> {
    let xi_e = &v.xi;
    let chi_e = &v.a;
    let a = lat.ns_square(xi_e).unwrap();
    let mut out = BTreeSet::new();
    for xi_f in subclasses {
        if xi_f.iter().all(Zero::is_zero) || xi_f == xi_e {
            continue;
        }
        let bb = chi_e * lat.ns_pair(xi_e, xi_f).unwrap();
        let cc = chi_e * chi_e * lat.ns_square(xi_f).unwrap();
        // every root of A x^2 - 2B x + C lies within |x| <= (2|B|+|C|)/A + 2
        let m: BigInt = (b(2) * bb.abs() + cc.abs()) / &a + b(2);
        let mut chi = -m.clone();
        while chi <= m {
            let d_sq_val = &a * &chi * &chi - b(2) * &bb * &chi + &cc;
            if !d_sq_val.is_positive() {
                let d_raw: Vec<BigInt> = xi_e
                    .iter()
                    .zip(xi_f)
                    .map(|(e, f)| &chi * e - chi_e * f)
                    .collect();
                let g = d_raw.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
                if !g.is_zero() {
                    let mut d: Vec<BigInt> = d_raw.iter().map(|x| x / &g).collect();
                    if d.iter().find(|x| !x.is_zero()).unwrap().is_negative() {
                        d = d.iter().map(|x| -x).collect();
                    }
                    let mut pos = false;
                    let mut neg = false;
                    for gen in &cone.generators {
                        let p = lat.ns_pair_mixed(gen, &d).unwrap();
                        pos |= p.is_positive();
                        neg |= p.is_negative();
                    }
                    if pos && neg {
                        out.insert(d);
                    }
                }
            }
            chi += 1;
        }
    }
    out
}

#[test]
fn criterion_5_wall_oracle_equivalence() {
    let lat = NSLattice::elliptic();
    let cone = AmpleConeSpec::from_integers(&[vec![0, 1], vec![1, 2]], &[1, 3]);
    let mut configs = 0;
    let mut ok = true;
    for k in 2i64..=5 {
        for a in 1i64..=5 {
            let v = MukaiVector::from_i64(0, &[1, k], a);
            let subs = default_subclass_box(&v.xi);
            let walls = enumerate_walls(&v, &lat, &cone, &subs).unwrap();
            let got: BTreeSet<Vec<BigInt>> = walls.iter().map(|w| w.d.clone()).collect();
            let expect = brute_force_walls(&v, &lat, &cone, &subs);
            ok &= got == expect;
            ok &= walls
                .iter()
                .all(|w| !w.d_square.is_positive() && !w.witnesses.is_empty());
            let dec = chambers_rank2(&walls, &cone, &lat).unwrap();
            ok &= dec.chambers.len() == dec.cuts.len() + 1;
            configs += 1;
        }
    }
    // the worked example must be among the configurations
    assert!(configs >= 20);
    verdict(
        &format!("criterion 5: wall oracle equivalence on {configs} rank-2 configurations"),
        ok,
    );
}

#[test]
fn criterion_6_certificate_grid() {
    let mut ok = true;
    for r in 1i64..=7 {
        for s in 1i64..=10 {
            let cert = plan_certificate(&b(r), &b(1), &b(2 * s), &b(0))
                .unwrap_or_else(|e| panic!("no certificate for (r={r}, s={s}): {e}"));
            let rep = verify_certificate(&cert);
            ok &= rep.accepted;
            ok &= cert.final_vector == MukaiVector::from_i64(1, &[0], -s);
            ok &= cert.target_n == b(s + 1);
            let max_rank = cert
                .moves
                .iter()
                .map(|m| m.result.vector.r.clone())
                .chain(std::iter::once(cert.initial.vector.r.clone()))
                .max()
                .unwrap();
            if r == 2 && (s == 1 || s == 2) {
                ok &= max_rank > b(2);
            }
        }
    }
    verdict("criterion 6: certificate grid r in [1,7], s in [1,10]", ok);
}

/// Mutate every integer leaf of the JSON value by +1, one at a time.
fn integer_leaf_paths(v: &serde_json::Value, path: String, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map {
                integer_leaf_paths(x, format!("{path}/{k}"), out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                integer_leaf_paths(x, format!("{path}/{i}"), out);
            }
        }
        serde_json::Value::Number(_) => out.push(path),
        serde_json::Value::Bool(_) => out.push(path),
        _ => {}
    }
}

#[test]
fn criterion_7_tamper_suite() {
    let certs = [
        plan_certificate(&b(2), &b(1), &b(6), &b(0)).unwrap(),
        plan_certificate(&b(2), &b(1), &b(2), &b(0)).unwrap(),
        plan_certificate(&b(1), &b(2), &b(20), &b(1)).unwrap(),
    ];
    let mut mutations = 0u64;
    let mut ok = true;
    for cert in &certs {
        let json = serde_json::to_value(cert).unwrap();
        let mut paths = Vec::new();
        integer_leaf_paths(&json, String::new(), &mut paths);
        for path in &paths {
            let mut tampered = json.clone();
            let leaf = tampered.pointer_mut(path).unwrap();
            match leaf {
                serde_json::Value::Number(n) => {
                    *leaf = serde_json::Value::from(n.as_i64().unwrap() + 1);
                }
                serde_json::Value::Bool(flag) => {
                    *leaf = serde_json::Value::from(!*flag);
                }
                _ => unreachable!(),
            }
            mutations += 1;
            // a mutation is rejected if it no longer parses or fails verify
            let accepted = serde_json::from_value::<mukai_kit::certify::Certificate>(tampered)
                .map(|c| verify_certificate(&c).accepted)
                .unwrap_or(false);
            if accepted {
                println!("undetected mutation at {path}");
                ok = false;
            }
        }
    }
    verdict(
        &format!("criterion 7: tamper suite, {mutations} single-field mutations rejected"),
        ok && mutations > 0,
    );
}

#[test]
fn criterion_8_filtration_oracle() {
    // (l, r, d) instances on their model lattices, with an s making k >= 1
    let instances = [
        (2i64, 1i64, 1i64, 1i64, 2i64),
        (3, 1, 1, 1, 1),
        (2, 3, 1, 1, 7),
    ];
    let mut ok = true;
    for (l, r, d, r1, s) in instances {
        let fam = family_general(&b(l), &b(r), &b(d), &b(r1), &b(s)).unwrap();
        let sq = fam.identities.v_square.clone();
        let rep = filtration_oracle(&fam.v, &b(l), &fam.lattice, 1_000_000).unwrap();
        ok &= rep.identity_verified;
        ok &= rep.shapes_enumerated > 0;
        let bound = mu_codim_bound(&sq, &b(l)).unwrap();
        let strict = BigRational::new(sq.clone(), b(2 * l)) > BigRational::from_integer(b(l));
        if strict {
            ok &= rep.min_codim_bound.clone().unwrap() >= bound.bound;
            // per-shape domination, not just the minimum
            ok &= rep.shapes.iter().all(|sh| sh.implied_codim >= bound.bound);
        }
    }
    verdict("criterion 8: filtration oracle on (2,1,1), (3,1,1), (2,3,1)", ok);
}

#[test]
fn criterion_9_stratum_bookkeeping() {
    let lat = NSLattice::rank_one(2).unwrap();
    let v1 = MukaiVector::from_i64(1, &[0], 1);
    let mut ok = true;
    let mut checked = 0u64;
    for c in -5i64..=5 {
        // <v, v1> = -r - a; with r = 1, a = -1 - c gives pairing c
        let v = MukaiVector::from_i64(1, &[0], -1 - c);
        assert_eq!(pair(&v, &v1, &lat).unwrap(), b(c));
        let sq = square(&v, &lat).unwrap();
        for i in 1i64..=10 {
            let hom = -c - 1 + i;
            if hom < 0 {
                continue;
            }
            for m in 0..=hom.min(3) {
                let rep = stratum_report(&v, &v1, &b(i), &b(m), &lat).unwrap();
                // codim formula and the proof's decomposition
                ok &= rep.codim == b((i - 1) * (i - 1 - c));
                ok &= rep.dim_stratum == &sq + b(2) - &rep.codim;
                let vg_sq = square(&rep.v_g, &lat).unwrap();
                let gr = &rep.ext1_dim * (&rep.k - &rep.ext1_dim);
                ok &= rep.dim_stratum == vg_sq + b(2) + gr;
                // the two fibrations are dimensionally consistent:
                // dim Gr(l_hat, m) + codim M(v)_i
                //   = dim Gr(i-1+m, m) + codim M(w)_{i+m}, w = v - m v1
                let w = v.sub(&v1.scaled(&b(m)));
                let w_rep = stratum_report(&w, &v1, &b(i + m), &b(0), &lat).unwrap();
                ok &= &rep.fiber_grassmannians.pi_v.dim + &rep.codim
                    == &rep.fiber_grassmannians.pi_w.dim + &w_rep.codim;
                checked += 1;
            }
        }
    }
    verdict(
        &format!("criterion 9: stratum bookkeeping identities ({checked} grid points)"),
        ok && checked > 0,
    );
}
