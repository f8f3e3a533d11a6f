//! Dense univariate polynomials with coefficients in a [`FieldCtx`],
//! little-endian. Used for root finding (subfield embeddings), the normality
//! certificate and inversion in `F_q[X]/(X^n - 1)`.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{internal, Result};
use crate::field::{FieldCtx, FieldElement};

pub type Poly = Vec<FieldElement>;

pub fn trim(a: &mut Poly) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

pub fn trimmed(a: &[FieldElement]) -> Poly {
    let mut v = a.to_vec();
    trim(&mut v);
    v
}

pub fn degree(a: &[FieldElement]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

pub fn add(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    let len = a.len().max(b.len());
    let mut out: Poly = (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.add(x, y),
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(&mut out);
    out
}

pub fn sub(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    let neg: Poly = b.iter().map(|c| f.neg(c)).collect();
    add(f, a, &neg)
}

pub fn mul(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    let mut rem = trimmed(a);
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![f.zero(); rem.len() - db];
    for i in (db..rem.len()).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let c = f.mul(&rem[i], &lead_inv);
        for j in 0..=db {
            let t = f.mul(&c, &b[j]);
            rem[i - db + j] = f.sub(&rem[i - db + j], &t);
        }
        quot[i - db] = c;
    }
    rem.truncate(db);
    trim(&mut rem);
    trim(&mut quot);
    (quot, rem)
}

pub fn rem(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    divrem(f, a, b).1
}

pub fn monic(f: &FieldCtx, a: &[FieldElement]) -> Poly {
    let mut a = trimmed(a);
    if let Some(lead) = a.last().cloned() {
        let inv = f.inv(&lead).unwrap();
        for c in a.iter_mut() {
            *c = f.mul(c, &inv);
        }
    }
    a
}

/// Monic gcd.
pub fn gcd(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    let mut x = trimmed(a);
    let mut y = trimmed(b);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

/// `(g, s)` with `g = gcd(a, m)` monic and `s * a = g (mod m)`.
pub fn gcd_with_cofactor(f: &FieldCtx, a: &[FieldElement], m: &[FieldElement]) -> (Poly, Poly) {
    let mut r0 = trimmed(m);
    let mut r1 = rem(f, a, m);
    let mut s0: Poly = Vec::new();
    let mut s1: Poly = vec![f.one()];
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    let Some(lead) = r0.last().cloned() else {
        return (Vec::new(), Vec::new());
    };
    let inv = f.inv(&lead).unwrap();
    let g = r0.iter().map(|c| f.mul(c, &inv)).collect();
    let s = s0.iter().map(|c| f.mul(c, &inv)).collect();
    (g, s)
}

pub fn mulmod(f: &FieldCtx, a: &[FieldElement], b: &[FieldElement], m: &[FieldElement]) -> Poly {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod(f: &FieldCtx, a: &[FieldElement], e: &BigUint, m: &[FieldElement]) -> Poly {
    let mut acc: Poly = rem(f, &[f.one()], m);
    let base = rem(f, a, m);
    for i in (0..e.bits()).rev() {
        acc = mulmod(f, &acc, &acc, m);
        if e.bit(i) {
            acc = mulmod(f, &acc, &base, m);
        }
    }
    acc
}

pub fn eval(f: &FieldCtx, a: &[FieldElement], x: &FieldElement) -> FieldElement {
    a.iter().rev().fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

/// All roots in `f` of a polynomial that splits into distinct linear factors
/// over `f` (equal-degree splitting, seeded probes).
pub fn roots(f: &FieldCtx, poly: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let g = monic(f, poly);
    let mut out = Vec::new();
    let mut stack = vec![g];
    // Probes must span the whole field: for sparse moduli the trace
    // vanishes on every low-degree element.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    while let Some(h) = stack.pop() {
        match degree(&h) {
            None | Some(0) => continue,
            Some(1) => {
                // h = x + c
                out.push(f.neg(&h[0]));
                continue;
            }
            Some(_) => {}
        }
        let mut split = None;
        for _ in 0..256 {
            let delta = FieldElement {
                coords: (0..f.degree()).map(|_| rng.gen_range(0..f.characteristic())).collect(),
            };
            let s = splitting_poly(f, &h, &delta);
            let d = gcd(f, &h, &s);
            let dd = degree(&d).unwrap_or(0);
            if dd > 0 && dd < degree(&h).unwrap() {
                split = Some(d);
                break;
            }
        }
        let Some(d) = split else {
            return internal("root finding failed to split a polynomial");
        };
        let (other, r) = divrem(f, &h, &d);
        if !r.is_empty() {
            return internal("inexact split in root finding");
        }
        stack.push(d);
        stack.push(monic(f, &other));
    }
    out.sort();
    Ok(out)
}

fn splitting_poly(f: &FieldCtx, h: &[FieldElement], delta: &FieldElement) -> Poly {
    let one = f.one();
    if f.characteristic() == 2 {
        // Absolute trace of delta * x.
        let y = rem(f, &[f.zero(), delta.clone()], h);
        let mut cur = y.clone();
        let mut acc = y;
        for _ in 1..f.degree() {
            cur = mulmod(f, &cur, &cur, h);
            acc = add(f, &acc, &cur);
        }
        acc
    } else {
        let e = (f.size() - 1u32) >> 1;
        let t = powmod(f, &[delta.clone(), one.clone()], &e, h);
        sub(f, &t, &[one])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_split_polynomial() {
        let f = FieldCtx::new(3, 4).unwrap();
        // (x - a)(x - b)(x - c) for three distinct elements
        let pts: Vec<FieldElement> = [5u64, 17, 40].iter().map(|&i| f.element_from_index(i)).collect();
        let mut prod: Poly = vec![f.one()];
        for a in &pts {
            prod = mul(&f, &prod, &[f.neg(a), f.one()]);
        }
        let mut want = pts.clone();
        want.sort();
        assert_eq!(roots(&f, &prod).unwrap(), want);
    }

    #[test]
    fn roots_in_characteristic_two() {
        let f = FieldCtx::new(2, 6).unwrap();
        let pts: Vec<FieldElement> = [3u64, 9, 33, 60].iter().map(|&i| f.element_from_index(i)).collect();
        let mut prod: Poly = vec![f.one()];
        for a in &pts {
            prod = mul(&f, &prod, &[a.clone(), f.one()]);
        }
        let mut want = pts.clone();
        want.sort();
        assert_eq!(roots(&f, &prod).unwrap(), want);
    }

    #[test]
    fn cofactor_inverts_modulo() {
        let f = FieldCtx::new(5, 1).unwrap();
        let m: Poly = [4u64, 0, 0, 1].iter().map(|&c| f.from_u64(c)).collect(); // x^3 - 1
        let a: Poly = [2u64, 1].iter().map(|&c| f.from_u64(c)).collect(); // x + 2
        let (g, s) = gcd_with_cofactor(&f, &a, &m);
        assert_eq!(g, vec![f.one()]);
        assert_eq!(mulmod(&f, &a, &s, &m), vec![f.one()]);
    }

    #[test]
    fn roots_with_sparse_modulus() {
        // x^12 + x^3 + 1: the absolute trace vanishes on 1, x, ..., x^7.
        let f = FieldCtx::new(2, 12).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let r = roots(&f, &[f.one(), f.one(), f.one()]).unwrap();
        assert_eq!(r.len(), 2);
        for x in &r {
            assert!(eval(&f, &[f.one(), f.one(), f.one()], x).is_zero());
        }
    }
}
