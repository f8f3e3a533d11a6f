//! Dense polynomials over a prime field `F_p`, little-endian `u64` coefficients.
//!
//! Only what the field layer needs: reduction, gcd, modular inversion and the
//! irreducibility test used to pick deterministic moduli.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::arith::{add_mod, factorize, inv_mod, mul_mod, sub_mod};

pub(crate) fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        *o = sub_mod(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0), p);
    }
    trim(&mut out);
    out
}

/// Quotient and remainder. Panics on a zero divisor.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod(b[db], p).expect("leading coefficient invertible");
    let mut rem: Vec<u64> = a.to_vec();
    trim(&mut rem);
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u64; rem.len() - db];
    for i in (db..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        let f = mul_mod(c, lead_inv, p);
        quot[i - db] = f;
        for j in 0..=db {
            rem[i - db + j] = sub_mod(rem[i - db + j], mul_mod(f, b[j], p), p);
        }
    }
    rem.truncate(db);
    trim(&mut rem);
    trim(&mut quot);
    (quot, rem)
}

pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    divrem(a, b, p).1
}

fn make_monic(a: &mut [u64], p: u64) {
    if let Some(d) = degree(a) {
        let inv = inv_mod(a[d], p).unwrap();
        for c in a.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
    }
}

/// Monic gcd; the gcd of two zero polynomials is zero.
pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&mut x, p);
    x
}

/// Inverse of `a` modulo `f`, when `gcd(a, f) = 1`.
pub(crate) fn inv_mod_poly(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    let mut r0 = f.to_vec();
    let mut r1 = rem(a, f, p);
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    trim(&mut r0);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(r0[0], p)?;
    let mut out: Vec<u64> = s0.iter().map(|&x| mul_mod(x, c, p)).collect();
    out = rem(&out, f, p);
    Some(out)
}

/// `x^(p^j) mod f` for `j = 0..=k`, via the Berlekamp matrix of `f`.
fn frobenius_powers_of_x(f: &[u64], p: u64, k: usize) -> Vec<Vec<u64>> {
    let d = degree(f).unwrap();
    // x^p mod f by square-and-multiply.
    let mut xp: Vec<u64> = vec![1];
    let mut base: Vec<u64> = rem(&[0, 1], f, p);
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            xp = rem(&mul(&xp, &base, p), f, p);
        }
        base = rem(&mul(&base, &base, p), f, p);
        e >>= 1;
    }
    // Rows: x^(i p) mod f for i < d.
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(d);
    let mut cur: Vec<u64> = vec![1];
    for _ in 0..d {
        let mut row = cur.clone();
        row.resize(d, 0);
        rows.push(row);
        cur = rem(&mul(&cur, &xp, p), f, p);
    }
    let mut out = Vec::with_capacity(k + 1);
    let mut h: Vec<u64> = rem(&[0, 1], f, p);
    h.resize(d, 0);
    out.push(h.clone());
    for _ in 0..k {
        let mut next = vec![0u64; d];
        for (i, &c) in h.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (n, &r) in next.iter_mut().zip(rows[i].iter()) {
                *n = add_mod(*n, mul_mod(c, r, p), p);
            }
        }
        h = next;
        out.push(h.clone());
    }
    out
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let Some(k) = degree(f) else { return false };
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let powers = frobenius_powers_of_x(f, p, k);
    let x = [0u64, 1];
    let mut xk = powers[k].clone();
    trim(&mut xk);
    if xk != x {
        return false;
    }
    for (ell, _) in factorize(k as u64) {
        let h = &powers[k / ell as usize];
        let g = gcd(&sub(h, &x, p), f, p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// The first monic irreducible polynomial of degree `k` over `F_p`, where monic
/// candidates `x^k + sum c_i x^i` are ordered by the integer `sum c_i p^i`.
pub fn lowest_irreducible(p: u64, k: usize) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&(p, k)) {
        return f.clone();
    }
    assert!(k >= 1);
    let mut f = vec![0u64; k + 1];
    f[k] = 1;
    let found = loop {
        if is_irreducible(&f, p) {
            break f.clone();
        }
        // Odometer increment over c_0 .. c_{k-1}.
        let mut i = 0;
        loop {
            assert!(i < k, "no irreducible polynomial found of degree {k} over F_{p}");
            f[i] += 1;
            if f[i] == p {
                f[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    };
    cache.lock().unwrap().insert((p, k), found.clone());
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible(f: &[u64], p: u64) -> bool {
        // Trial division by every monic polynomial of degree 1..=deg/2.
        let d = degree(f).unwrap();
        for dd in 1..=d / 2 {
            let count = p.pow(dd as u32);
            for code in 0..count {
                let mut g = vec![0u64; dd + 1];
                let mut c = code;
                for coef in g.iter_mut().take(dd) {
                    *coef = c % p;
                    c /= p;
                }
                g[dd] = 1;
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_matches_trial_division() {
        for &(p, k) in &[(2u64, 2usize), (2, 3), (2, 4), (2, 6), (3, 2), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)] {
            let total = p.pow(k as u32);
            for code in 0..total {
                let mut f = vec![0u64; k + 1];
                let mut c = code;
                for coef in f.iter_mut().take(k) {
                    *coef = c % p;
                    c /= p;
                }
                f[k] = 1;
                assert_eq!(is_irreducible(&f, p), brute_irreducible(&f, p), "p={p} f={f:?}");
            }
        }
    }

    #[test]
    fn lowest_irreducible_small_cases() {
        assert_eq!(lowest_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(lowest_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert_eq!(lowest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(lowest_irreducible(5, 1), vec![0, 1]);
    }

    #[test]
    fn inverse_modulo_irreducible() {
        let f = lowest_irreducible(3, 4);
        for code in 1..81u64 {
            let a: Vec<u64> = (0..4).map(|i| (code / 3u64.pow(i)) % 3).collect();
            let inv = inv_mod_poly(&a, &f, 3).unwrap();
            assert_eq!(rem(&mul(&a, &inv, 3), &f, 3), vec![1]);
        }
    }
}
