//! Finite fields `F_{p^k}` in a power basis over the prime field, optionally
//! linked to a subfield `F_q` so that Frobenius `x -> x^q` and the relative
//! trace down to `F_q` are available.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{add_mod, factorize, inv_mod, is_prime, mul_mod, neg_mod, sub_mod};
use crate::error::{domain, internal, Error, Result};
use crate::fp_poly;
use crate::poly;

/// Coordinates over `F_p` in the power basis of the context modulus,
/// little-endian.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement {
    pub coords: Vec<u64>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// Link from an extension to its designated base field `F_q`.
#[derive(Debug)]
struct BaseLink {
    field: Arc<FieldCtx>,
    rel_degree: usize,
    /// Images of the base power basis `1, t, ..., t^(r-1)`.
    embed_cols: Vec<Vec<u64>>,
    /// Rows of the extension coordinates that determine a base element.
    pivots: Vec<usize>,
    /// Inverse of the pivot-row block of `embed_cols`, row-major `r x r`.
    pivot_inverse: Vec<Vec<u64>>,
    /// Column `j` is `(x^j)^q`.
    frobenius: Vec<Vec<u64>>,
}

/// A finite field `F_{p^k}`. Immutable once built and shared behind `Arc`.
#[derive(Debug)]
pub struct FieldCtx {
    p: u64,
    degree: usize,
    modulus: Vec<u64>,
    /// Row `i` holds `x^(degree + i) mod modulus`.
    reduction: Vec<Vec<u64>>,
    size: BigUint,
    base: Option<BaseLink>,
    nonresidue: OnceLock<Option<FieldElement>>,
}

impl FieldCtx {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Arc<FieldCtx>> {
        if !is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        Ok(Arc::new(Self::raw(p, vec![0, 1])))
    }

    /// `F_{p^k}` with the lowest irreducible modulus, based over `F_p`.
    pub fn new(p: u64, k: usize) -> Result<Arc<FieldCtx>> {
        if k == 0 {
            return domain("extension degree must be at least 1");
        }
        let prime = Self::prime(p)?;
        if k == 1 {
            return Ok(prime);
        }
        Self::extension(&prime, k)
    }

    /// `F_{p^k}` over `F_p` for an explicit monic modulus (checked irreducible).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Arc<FieldCtx>> {
        let prime = Self::prime(p)?;
        if modulus.len() == 2 && modulus == [0, 1] {
            return Ok(prime);
        }
        Self::extension_with_modulus(&prime, modulus)
    }

    /// `F_{q^n}` where `q` is the size of `base`, with the lowest irreducible
    /// modulus of degree `n * [base : F_p]` over `F_p`.
    pub fn extension(base: &Arc<FieldCtx>, n: usize) -> Result<Arc<FieldCtx>> {
        if n == 0 {
            return domain("extension degree must be at least 1");
        }
        let modulus = fp_poly::lowest_irreducible(base.p, base.degree * n);
        Self::extension_with_modulus(base, modulus)
    }

    pub fn extension_with_modulus(base: &Arc<FieldCtx>, modulus: Vec<u64>) -> Result<Arc<FieldCtx>> {
        let p = base.p;
        let Some(k) = fp_poly::degree(&modulus) else {
            return domain("zero modulus");
        };
        if modulus.len() != k + 1 || modulus[k] != 1 || modulus.iter().any(|&c| c >= p) {
            return domain("modulus must be monic with coefficients reduced mod p");
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return domain(format!("modulus {modulus:?} is reducible over F_{p}"));
        }
        if k % base.degree != 0 {
            return domain(format!(
                "base degree {} does not divide extension degree {k}",
                base.degree
            ));
        }
        let mut ctx = Self::raw(p, modulus);
        let r = base.degree;
        let embed_cols = if r == 1 {
            vec![ctx.one().coords]
        } else {
            // Smallest root of the base modulus gives the embedding.
            let f: Vec<FieldElement> = base.modulus.iter().map(|&c| ctx.from_u64(c)).collect();
            let roots = poly::roots(&ctx, &f)?;
            let Some(t) = roots.into_iter().min() else {
                return internal("base modulus has no root in the extension");
            };
            let mut cols = Vec::with_capacity(r);
            let mut cur = ctx.one();
            for _ in 0..r {
                cols.push(cur.coords.clone());
                cur = ctx.mul(&cur, &t);
            }
            cols
        };
        let (pivots, pivot_inverse) = pivot_block_inverse(&embed_cols, k, p)?;
        let Some(q) = base.size.to_u64() else {
            return Err(Error::Unsupported("base field larger than 64 bits".into()));
        };
        let xq = ctx.pow(&ctx.generator(), q);
        let mut frobenius = Vec::with_capacity(k);
        let mut cur = ctx.one();
        for _ in 0..k {
            frobenius.push(cur.coords.clone());
            cur = ctx.mul(&cur, &xq);
        }
        ctx.base = Some(BaseLink {
            field: base.clone(),
            rel_degree: k / r,
            embed_cols,
            pivots,
            pivot_inverse,
            frobenius,
        });
        Ok(Arc::new(ctx))
    }

    fn raw(p: u64, modulus: Vec<u64>) -> FieldCtx {
        let k = modulus.len() - 1;
        let mut reduction = Vec::with_capacity(k.saturating_sub(1));
        // x^k = -(lower part of modulus)
        let mut cur: Vec<u64> = modulus[..k].iter().map(|&c| neg_mod(c, p)).collect();
        for _ in 0..k.saturating_sub(1) {
            reduction.push(cur.clone());
            // multiply by x
            let top = cur[k - 1];
            let mut next = vec![0u64; k];
            next[1..k].copy_from_slice(&cur[..k - 1]);
            for (n, &m) in next.iter_mut().zip(modulus.iter()) {
                *n = sub_mod(*n, mul_mod(top, m, p), p);
            }
            cur = next;
        }
        FieldCtx {
            p,
            degree: k,
            modulus,
            reduction,
            size: BigUint::from(p).pow(k as u32),
            base: None,
            nonresidue: OnceLock::new(),
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// Number of elements as a machine integer, if it fits.
    pub fn size_u64(&self) -> Option<u64> {
        self.size.to_u64()
    }

    /// The designated base field, `None` for a prime field.
    pub fn base(&self) -> Option<&Arc<FieldCtx>> {
        self.base.as_ref().map(|b| &b.field)
    }

    /// Size `q` of the base field (`p` for a prime field).
    pub fn base_size(&self) -> u64 {
        match &self.base {
            Some(b) => b.field.size.to_u64().unwrap(),
            None => self.p,
        }
    }

    /// Degree over the base field.
    pub fn relative_degree(&self) -> usize {
        self.base.as_ref().map_or(1, |b| b.rel_degree)
    }

    /// The Frobenius `x -> x^q` as a list of columns (images of `x^j`).
    pub fn frobenius_columns(&self) -> Option<&[Vec<u64>]> {
        self.base.as_ref().map(|b| b.frobenius.as_slice())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coords: vec![0; self.degree] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    /// The image of an integer.
    pub fn from_u64(&self, c: u64) -> FieldElement {
        let mut e = self.zero();
        e.coords[0] = c % self.p;
        e
    }

    pub fn from_i64(&self, c: i64) -> FieldElement {
        let v = c.rem_euclid(self.p as i64) as u64;
        self.from_u64(v)
    }

    /// The class of `x`, the root of the modulus.
    pub fn generator(&self) -> FieldElement {
        if self.degree == 1 {
            // x = 0 modulo the prime-field modulus `x`.
            return self.zero();
        }
        let mut e = self.zero();
        e.coords[1] = 1;
        e
    }

    pub fn element(&self, coords: Vec<u64>) -> Result<FieldElement> {
        if coords.len() != self.degree {
            return domain(format!("expected {} coordinates, got {}", self.degree, coords.len()));
        }
        if coords.iter().any(|&c| c >= self.p) {
            return domain(format!("coordinate out of range for p = {}", self.p));
        }
        Ok(FieldElement { coords })
    }

    /// Element whose coordinates are the base-`p` digits of `index`.
    pub fn element_from_index(&self, mut index: u64) -> FieldElement {
        let mut e = self.zero();
        for c in e.coords.iter_mut() {
            *c = index % self.p;
            index /= self.p;
        }
        e
    }

    /// Inverse of [`FieldCtx::element_from_index`]; `None` if it overflows.
    pub fn index_of(&self, a: &FieldElement) -> Option<u64> {
        let mut idx: u64 = 0;
        for &c in a.coords.iter().rev() {
            idx = idx.checked_mul(self.p)?.checked_add(c)?;
        }
        Some(idx)
    }

    pub fn is_one(&self, a: &FieldElement) -> bool {
        a.coords[0] == 1 % self.p && a.coords[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| add_mod(x, y, p)).collect(),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| sub_mod(x, y, p)).collect(),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement { coords: a.coords.iter().map(|&x| neg_mod(x, p)).collect() }
    }

    /// Multiplication by an element of the prime field.
    pub fn scale(&self, a: &FieldElement, c: u64) -> FieldElement {
        let p = self.p;
        let c = c % p;
        FieldElement { coords: a.coords.iter().map(|&x| mul_mod(x, c, p)).collect() }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let k = self.degree;
        let p = self.p;
        if k == 1 {
            return FieldElement { coords: vec![mul_mod(a.coords[0], b.coords[0], p)] };
        }
        let mut out = vec![0u64; k];
        if p < (1 << 32) {
            let mut acc = vec![0u128; 2 * k - 1];
            for (i, &x) in a.coords.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.coords.iter().enumerate() {
                    acc[i + j] += (x * y) as u128;
                }
            }
            let pp = p as u128;
            for i in (k..2 * k - 1).rev() {
                let c = (acc[i] % pp) as u64;
                if c == 0 {
                    continue;
                }
                for (slot, &r) in acc[..k].iter_mut().zip(&self.reduction[i - k]) {
                    *slot += (c * r) as u128;
                }
            }
            for (o, a) in out.iter_mut().zip(&acc[..k]) {
                *o = (*a % pp) as u64;
            }
        } else {
            let mut acc = vec![0u64; 2 * k - 1];
            for (i, &x) in a.coords.iter().enumerate() {
                for (j, &y) in b.coords.iter().enumerate() {
                    acc[i + j] = add_mod(acc[i + j], mul_mod(x, y, p), p);
                }
            }
            for i in (k..2 * k - 1).rev() {
                let c = acc[i];
                for (slot, &r) in acc[..k].iter_mut().zip(&self.reduction[i - k]) {
                    *slot = add_mod(*slot, mul_mod(c, r, p), p);
                }
            }
            out.copy_from_slice(&acc[..k]);
        }
        FieldElement { coords: out }
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return domain("inversion of zero");
        }
        if self.degree == 1 {
            return Ok(FieldElement { coords: vec![inv_mod(a.coords[0], self.p).unwrap()] });
        }
        let inv = fp_poly::inv_mod_poly(&a.coords, &self.modulus, self.p)
            .ok_or_else(|| Error::Internal("nonzero element not invertible".into()))?;
        let mut coords = inv;
        coords.resize(self.degree, 0);
        Ok(FieldElement { coords })
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    pub fn pow_big(&self, a: &FieldElement, e: &BigUint) -> FieldElement {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.square(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// `a^(q^k)` for the base-field size `q`; identity on a prime field.
    pub fn frobenius(&self, a: &FieldElement, k: usize) -> FieldElement {
        let Some(link) = &self.base else {
            return a.clone();
        };
        let mut cur = a.clone();
        for _ in 0..k % link.rel_degree {
            cur = FieldElement { coords: apply_columns(&link.frobenius, &cur.coords, self.p) };
        }
        cur
    }

    /// Image of a base-field element.
    pub fn embed_base(&self, b: &FieldElement) -> FieldElement {
        let Some(link) = &self.base else {
            return b.clone();
        };
        FieldElement { coords: apply_columns(&link.embed_cols, &b.coords, self.p) }
    }

    /// The base-field element `a` comes from, if it lies in the base field.
    pub fn project_base(&self, a: &FieldElement) -> Option<FieldElement> {
        let Some(link) = &self.base else {
            return Some(a.clone());
        };
        let p = self.p;
        let picked: Vec<u64> = link.pivots.iter().map(|&i| a.coords[i]).collect();
        let coords: Vec<u64> = link
            .pivot_inverse
            .iter()
            .map(|row| row.iter().zip(&picked).fold(0, |acc, (&m, &x)| add_mod(acc, mul_mod(m, x, p), p)))
            .collect();
        let b = FieldElement { coords };
        (self.embed_base(&b) == *a).then_some(b)
    }

    /// `sum_{i < n} a^(q^i)`, an element of the base field.
    pub fn trace_to_base(&self, a: &FieldElement) -> FieldElement {
        let Some(link) = &self.base else {
            return a.clone();
        };
        let mut sum = a.clone();
        let mut cur = a.clone();
        for _ in 1..link.rel_degree {
            cur = FieldElement { coords: apply_columns(&link.frobenius, &cur.coords, self.p) };
            sum = self.add(&sum, &cur);
        }
        self.project_base(&sum).expect("trace lies in the base field")
    }

    /// Square root, canonicalised to the lexicographically smaller of `x, -x`.
    pub fn sqrt(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return Some(self.zero());
        }
        if self.p == 2 {
            let mut x = a.clone();
            for _ in 1..self.degree {
                x = self.square(&x);
            }
            return Some(x);
        }
        let one = self.one();
        let q_minus_1 = &self.size - 1u32;
        let half = &q_minus_1 >> 1;
        if self.pow_big(a, &half) != one {
            return None;
        }
        let s = q_minus_1.trailing_zeros().unwrap();
        let t = &q_minus_1 >> s;
        let z = self.nonresidue().clone();
        let mut m = s;
        let mut c = self.pow_big(&z, &t);
        let mut x = self.pow_big(a, &((&t + 1u32) >> 1));
        let mut b = self.pow_big(a, &t);
        while b != one {
            let mut i = 0;
            let mut bb = b.clone();
            while bb != one {
                bb = self.square(&bb);
                i += 1;
            }
            debug_assert!(i < m);
            let mut f = c.clone();
            for _ in 0..(m - i - 1) {
                f = self.square(&f);
            }
            x = self.mul(&x, &f);
            c = self.square(&f);
            b = self.mul(&b, &c);
            m = i;
        }
        debug_assert_eq!(self.square(&x), *a);
        let other = self.neg(&x);
        Some(match x.coords.cmp(&other.coords) {
            Ordering::Greater => other,
            _ => x,
        })
    }

    /// First quadratic non-residue in index order (odd characteristic only).
    fn nonresidue(&self) -> &FieldElement {
        self.nonresidue
            .get_or_init(|| {
                let half = (&self.size - 1u32) >> 1;
                let minus_one = self.neg(&self.one());
                (2u64..).map(|i| self.element_from_index(i)).find(|z| self.pow_big(z, &half) == minus_one)
            })
            .as_ref()
            .expect("odd field has a non-residue")
    }

    /// True iff `g` has multiplicative order exactly `d`.
    pub fn has_order(&self, g: &FieldElement, d: u64) -> bool {
        if d == 0 || g.is_zero() {
            return false;
        }
        if !self.is_one(&self.pow(g, d)) {
            return false;
        }
        factorize(d).iter().all(|&(ell, _)| !self.is_one(&self.pow(g, d / ell)))
    }

    /// Deterministic element of multiplicative order exactly `d`.
    pub fn element_of_order(&self, d: u64) -> Result<FieldElement> {
        let group = &self.size - 1u32;
        if d == 0 || !(&group % d).is_zero() {
            return domain(format!("order {d} does not divide the multiplicative group order {group}"));
        }
        if d == 1 {
            return Ok(self.one());
        }
        let cofactor = &group / d;
        let primes = factorize(d);
        for idx in 1u64.. {
            let c = self.element_from_index(idx);
            if c.is_zero() {
                continue;
            }
            let g = self.pow_big(&c, &cofactor);
            if primes.iter().all(|&(ell, _)| !self.is_one(&self.pow(&g, d / ell))) {
                return Ok(g);
            }
        }
        unreachable!()
    }

    /// Normality certificate: `gcd(X^n - 1, sum_i a^(q^i) X^i) = 1` over this field.
    pub fn is_normal(&self, a: &FieldElement) -> bool {
        let n = self.relative_degree();
        if a.is_zero() {
            return false;
        }
        let mut conj = Vec::with_capacity(n);
        let mut cur = a.clone();
        for _ in 0..n {
            conj.push(cur.clone());
            cur = self.frobenius(&cur, 1);
        }
        let mut xn1 = vec![self.zero(); n + 1];
        xn1[0] = self.neg(&self.one());
        xn1[n] = self.add(&xn1[n], &self.one());
        let g = poly::gcd(self, &xn1, &conj);
        g.len() == 1
    }

    /// A normal element of this field over its base, found by seeded sampling.
    pub fn find_normal_element(&self) -> Result<FieldElement> {
        let n = self.relative_degree();
        let seed = 0x5d_4e_b0_u64 ^ (self.p << 16) ^ (self.degree as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 * n.max(1) {
            let coords = (0..self.degree).map(|_| rng.gen_range(0..self.p)).collect();
            let a = FieldElement { coords };
            if self.is_normal(&a) {
                return Ok(a);
            }
        }
        internal(format!("no normal element found in {} trials", 64 * n))
    }

    /// Same prime, modulus and base link.
    pub fn same_field(&self, other: &FieldCtx) -> bool {
        self.p == other.p
            && self.modulus == other.modulus
            && match (&self.base, &other.base) {
                (None, None) => true,
                (Some(a), Some(b)) => a.field.same_field(&b.field) && a.embed_cols == b.embed_cols,
                _ => false,
            }
    }

    /// Row `t` is the linear form `x -> coord_t(trace_to_base(x))` on
    /// power-basis coordinates.
    pub fn trace_forms(&self) -> Vec<Vec<u64>> {
        let k = self.degree;
        let p = self.p;
        let Some(link) = &self.base else {
            return vec![vec![1]];
        };
        let sums: Vec<Vec<u64>> = link
            .pivots
            .iter()
            .map(|&piv| {
                let mut row = vec![0u64; k];
                row[piv] = 1;
                let mut acc = row.clone();
                for _ in 1..link.rel_degree {
                    row = link.frobenius.iter().map(|col| dot_mod(&row, col, p)).collect();
                    for (a, &x) in acc.iter_mut().zip(&row) {
                        *a = add_mod(*a, x, p);
                    }
                }
                acc
            })
            .collect();
        link.pivot_inverse
            .iter()
            .map(|coef| {
                let mut out = vec![0u64; k];
                for (&c, row) in coef.iter().zip(&sums) {
                    for (o, &x) in out.iter_mut().zip(row) {
                        *o = add_mod(*o, mul_mod(c, x, p), p);
                    }
                }
                out
            })
            .collect()
    }

    /// Row `t` holds `coord_t(trace_to_base(x^s))` for `s < 2 degree - 1`,
    /// so that `coord_t(tr(a b)) = sum_{i,j} a_i b_j h[i + j]`.
    pub fn trace_hankel(&self) -> Vec<Vec<u64>> {
        let k = self.degree;
        let p = self.p;
        self.trace_forms()
            .into_iter()
            .map(|form| {
                let mut h = form.clone();
                for red in &self.reduction {
                    h.push(dot_mod(red, &form, p));
                }
                debug_assert_eq!(h.len(), 2 * k - 1);
                h
            })
            .collect()
    }

    /// A field embedding of `self` into `target`, sending the generator to
    /// the smallest root of `self`'s modulus.
    pub fn embedding_into(&self, target: &FieldCtx) -> Result<Embedding> {
        if self.p != target.p || target.degree % self.degree != 0 {
            return domain(format!(
                "F_{}^{} does not embed in F_{}^{}",
                self.p, self.degree, target.p, target.degree
            ));
        }
        let root = if self.degree == 1 {
            target.zero()
        } else {
            let f: Vec<FieldElement> = self.modulus.iter().map(|&c| target.from_u64(c)).collect();
            let Some(t) = poly::roots(target, &f)?.into_iter().min() else {
                return internal("modulus has no root in the target field");
            };
            t
        };
        let mut cols = Vec::with_capacity(self.degree);
        let mut cur = target.one();
        for _ in 0..self.degree {
            cols.push(cur.coords.clone());
            cur = target.mul(&cur, &root);
        }
        Ok(Embedding { cols, p: self.p })
    }
}

/// A field homomorphism `F_{p^a} -> F_{p^b}`, stored as images of the power basis.
#[derive(Clone, Debug)]
pub struct Embedding {
    cols: Vec<Vec<u64>>,
    p: u64,
}

impl Embedding {
    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        FieldElement { coords: apply_columns(&self.cols, &x.coords, self.p) }
    }
}

pub(crate) fn dot_mod(a: &[u64], b: &[u64], p: u64) -> u64 {
    if p < (1 << 32) {
        let s: u128 = a.iter().zip(b).map(|(&x, &y)| (x * y) as u128).sum();
        (s % p as u128) as u64
    } else {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p))
    }
}

/// `sum_j v_j * cols[j]` over `F_p`.
pub(crate) fn apply_columns(cols: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
    let len = cols.first().map_or(0, |c| c.len());
    if p < (1 << 32) {
        let mut acc = vec![0u128; len];
        for (col, &c) in cols.iter().zip(v) {
            if c == 0 {
                continue;
            }
            for (a, &x) in acc.iter_mut().zip(col) {
                *a += (c * x) as u128;
            }
        }
        acc.into_iter().map(|a| (a % p as u128) as u64).collect()
    } else {
        let mut acc = vec![0u64; len];
        for (col, &c) in cols.iter().zip(v) {
            for (a, &x) in acc.iter_mut().zip(col) {
                *a = add_mod(*a, mul_mod(c, x, p), p);
            }
        }
        acc
    }
}

/// Pick `r` independent rows of the `k x r` matrix with columns `cols` and
/// invert that block.
fn pivot_block_inverse(cols: &[Vec<u64>], k: usize, p: u64) -> Result<(Vec<usize>, Vec<Vec<u64>>)> {
    let r = cols.len();
    // Row-reduce the transpose to find pivot rows of the original.
    let mut rows: Vec<Vec<u64>> = cols.to_vec(); // r x k
    let mut pivots = Vec::with_capacity(r);
    let mut rank = 0;
    for col in 0..k {
        if rank == r {
            break;
        }
        let Some(sel) = (rank..r).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, sel);
        let inv = inv_mod(rows[rank][col], p).unwrap();
        for x in rows[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for i in 0..r {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col];
                let pivot_row = rows[rank].clone();
                for (x, &y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rank != r {
        return internal("embedding is not injective");
    }
    // Block B[i][j] = cols[j][pivots[i]]; invert it.
    let block: Vec<Vec<u64>> = pivots.iter().map(|&pi| cols.iter().map(|c| c[pi]).collect()).collect();
    let inverse = invert_matrix(&block, p).ok_or_else(|| Error::Internal("singular pivot block".into()))?;
    Ok((pivots, inverse))
}

pub(crate) fn invert_matrix(m: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    for col in 0..n {
        let sel = (col..n).find(|&i| a[i][col] != 0)?;
        a.swap(col, sel);
        let inv = inv_mod(a[col][col], p)?;
        for x in a[col].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != col && row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Rank of a matrix over `F_p` (rows as given).
pub fn rank_mod_p(m: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(sel) = (rank..a.len()).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, sel);
        let inv = inv_mod(a[rank][col], p).unwrap();
        for x in a[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != rank && row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
        rank += 1;
    }
    rank
}
