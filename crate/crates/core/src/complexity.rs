//! Trace forms on `F_{q^n}` over `F_q`: Gram matrices of conjugates and the
//! multiplication-table complexity `#{(i, j) : tr(g^(1 + q^i + q^j)) != 0}`.

use std::sync::Arc;

use crate::arith::{add_mod, mul_mod};
use crate::error::{domain, Result};
use crate::field::{FieldCtx, FieldElement};

#[derive(Debug, Clone)]
pub struct TraceKernel {
    field: Arc<FieldCtx>,
    n: usize,
    k: usize,
    p: u64,
    /// One Hankel row per `F_p`-coordinate of `F_q`.
    hankel: Vec<Vec<u64>>,
    binary: Option<Binary>,
}

/// Bit-packed kernel for `p = 2`, absolute degree at most 64.
#[derive(Debug, Clone)]
struct Binary {
    k: usize,
    /// Modulus bits including `x^k`.
    modulus: u128,
    /// `windows[t][a]` packs `hankel[t][a..a + k]`.
    windows: Vec<Vec<u64>>,
}

impl Binary {
    fn new(k: usize, modulus: &[u64], hankel: &[Vec<u64>]) -> Self {
        let pack = |bits: &[u64]| bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b & 1) << i));
        let modulus = modulus.iter().enumerate().fold(0u128, |acc, (i, &b)| acc | (((b & 1) as u128) << i));
        let windows = hankel.iter().map(|h| (0..k).map(|a| pack(&h[a..a + k])).collect()).collect();
        Binary { k, modulus, windows }
    }

    fn pack(x: &FieldElement) -> u64 {
        x.coords.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b << i))
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        let mut prod = 0u128;
        let mut a = a;
        let mut shift = 0;
        while a != 0 {
            if a & 1 == 1 {
                prod ^= (b as u128) << shift;
            }
            a >>= 1;
            shift += 1;
        }
        for d in (self.k..2 * self.k - 1).rev() {
            if (prod >> d) & 1 == 1 {
                prod ^= self.modulus << (d - self.k);
            }
        }
        prod as u64
    }

    fn transform(&self, t: usize, y: u64) -> u64 {
        self.windows[t].iter().enumerate().fold(0u64, |acc, (a, &w)| acc | (((w & y).count_ones() as u64 & 1) << a))
    }

    fn complexity(&self, c: &[FieldElement]) -> u64 {
        let n = c.len();
        let cb: Vec<u64> = c.iter().map(Self::pack).collect();
        let u: Vec<u64> = cb.iter().map(|&x| self.mul(cb[0], x)).collect();
        let w: Vec<Vec<u64>> = (0..self.windows.len()).map(|t| cb.iter().map(|&y| self.transform(t, y)).collect()).collect();
        let mut count = 0u64;
        for i in 0..n {
            for j in i..n {
                if w.iter().any(|wt| (u[i] & wt[j]).count_ones() & 1 == 1) {
                    count += if i == j { 1 } else { 2 };
                }
            }
        }
        count
    }
}

impl TraceKernel {
    pub fn new(field: &Arc<FieldCtx>) -> Result<Self> {
        if field.base().is_none() {
            return domain("trace kernel needs an extension with a base field");
        }
        let hankel = field.trace_hankel();
        let k = field.degree();
        let binary = (field.characteristic() == 2 && k <= 64).then(|| Binary::new(k, field.modulus(), &hankel));
        Ok(TraceKernel { field: field.clone(), n: field.relative_degree(), k, p: field.characteristic(), hankel, binary })
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `g, g^q, ..., g^(q^(n-1))`.
    pub fn conjugates(&self, g: &FieldElement) -> Vec<FieldElement> {
        let mut out = Vec::with_capacity(self.n);
        let mut cur = g.clone();
        for i in 0..self.n {
            if i > 0 {
                cur = self.field.frobenius(&cur, 1);
            }
            out.push(cur.clone());
        }
        out
    }

    /// `out[a] = sum_b h[a + b] y[b]`.
    fn hankel_apply(&self, h: &[u64], y: &[u64], out: &mut [u64]) {
        let p = self.p;
        if p < (1 << 32) {
            for (a, o) in out.iter_mut().enumerate() {
                let s: u128 = h[a..a + self.k].iter().zip(y).map(|(&x, &z)| (x * z) as u128).sum();
                *o = (s % p as u128) as u64;
            }
        } else {
            for (a, o) in out.iter_mut().enumerate() {
                *o = h[a..a + self.k].iter().zip(y).fold(0, |acc, (&x, &z)| add_mod(acc, mul_mod(x, z, p), p));
            }
        }
    }

    fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        let p = self.p;
        if p < (1 << 32) {
            let s: u128 = a.iter().zip(b).map(|(&x, &y)| (x * y) as u128).sum();
            (s % p as u128) as u64
        } else {
            a.iter().zip(b).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p))
        }
    }

    /// `w[t][j] = H_t right[j]`, so that `coord_t(tr(x right[j])) = x . w[t][j]`.
    fn transformed(&self, right: &[FieldElement]) -> Vec<Vec<Vec<u64>>> {
        self.hankel
            .iter()
            .map(|h| {
                right
                    .iter()
                    .map(|y| {
                        let mut out = vec![0u64; self.k];
                        self.hankel_apply(h, &y.coords, &mut out);
                        out
                    })
                    .collect()
            })
            .collect()
    }

    fn pair_matrix(&self, left: &[FieldElement], right: &[FieldElement]) -> Vec<Vec<FieldElement>> {
        let w = self.transformed(right);
        left.iter()
            .map(|x| {
                (0..right.len())
                    .map(|j| FieldElement { coords: w.iter().map(|wt| self.dot(&x.coords, &wt[j])).collect() })
                    .collect()
            })
            .collect()
    }

    /// `(tr(g^(q^i) g^(q^j)))_{i,j}` with entries in `F_q`.
    pub fn gram(&self, g: &FieldElement) -> Vec<Vec<FieldElement>> {
        let c = self.conjugates(g);
        self.pair_matrix(&c, &c)
    }

    /// Every entry of the Gram matrix of conjugates equals `delta_ij`.
    pub fn is_self_dual(&self, g: &FieldElement) -> bool {
        self.gram(g).iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, e)| {
                e.coords[0] == u64::from(i == j) && e.coords[1..].iter().all(|&c| c == 0)
            })
        })
    }

    /// `(tr(g g^(q^i) g^(q^j)))_{i,j}`.
    pub fn trace_matrix(&self, g: &FieldElement) -> Vec<Vec<FieldElement>> {
        let c = self.conjugates(g);
        let u: Vec<FieldElement> = c.iter().map(|x| self.field.mul(g, x)).collect();
        self.pair_matrix(&u, &c)
    }

    /// Nonzero count of the trace matrix, from its upper triangle.
    pub fn complexity_unchecked(&self, g: &FieldElement) -> u64 {
        let c = self.conjugates(g);
        self.complexity_from_conjugates(&c)
    }

    /// As [`TraceKernel::complexity_unchecked`], given all `n` conjugates of `g`.
    pub fn complexity_from_conjugates(&self, c: &[FieldElement]) -> u64 {
        if let Some(b) = &self.binary {
            return b.complexity(c);
        }
        self.complexity_generic(c)
    }

    fn complexity_generic(&self, c: &[FieldElement]) -> u64 {
        let g = &c[0];
        let u: Vec<FieldElement> = c.iter().map(|x| self.field.mul(g, x)).collect();
        let w = self.transformed(c);
        let mut count = 0u64;
        for i in 0..self.n {
            for j in i..self.n {
                if w.iter().any(|wt| self.dot(&u[i].coords, &wt[j]) != 0) {
                    count += if i == j { 1 } else { 2 };
                }
            }
        }
        count
    }

    /// Complexity of a self-dual normal basis generator.
    pub fn complexity(&self, g: &FieldElement) -> Result<u64> {
        if !self.is_self_dual(g) {
            return domain("complexity is defined here only for self-dual normal bases");
        }
        Ok(self.complexity_unchecked(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_trace_matrix(f: &FieldCtx, g: &FieldElement) -> Vec<Vec<FieldElement>> {
        let n = f.relative_degree();
        let q = f.base_size();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = f.mul(&f.mul(g, &f.pow(g, q.pow(i as u32))), &f.pow(g, q.pow(j as u32)));
                        f.trace_to_base(&e)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matches_naive_powering() {
        for (p, r, n) in [(2u64, 1usize, 5usize), (2, 2, 3), (3, 1, 4), (3, 2, 3), (5, 1, 3)] {
            let fq = FieldCtx::new(p, r).unwrap();
            let big = FieldCtx::extension(&fq, n).unwrap();
            let kern = TraceKernel::new(&big).unwrap();
            for idx in [1u64, 5, 17, 40, 99] {
                let g = big.element_from_index(idx);
                let naive = naive_trace_matrix(&big, &g);
                assert_eq!(kern.trace_matrix(&g), naive);
                let nz = naive.iter().flatten().filter(|e| !e.is_zero()).count() as u64;
                assert_eq!(kern.complexity_unchecked(&g), nz);
                for (i, row) in kern.gram(&g).iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        let c = kern.conjugates(&g);
                        assert_eq!(*e, big.trace_to_base(&big.mul(&c[i], &c[j])));
                    }
                }
            }
        }
    }

    #[test]
    fn binary_path_matches_generic() {
        for (r, n) in [(1usize, 7usize), (1, 12), (2, 5), (3, 9), (1, 45), (4, 16)] {
            let fq = FieldCtx::new(2, r).unwrap();
            let big = FieldCtx::extension(&fq, n).unwrap();
            let kern = TraceKernel::new(&big).unwrap();
            let b = kern.binary.as_ref().unwrap();
            for idx in [1u64, 2, 3, 77, 12345, 987654321] {
                let x = big.element_from_index(idx % (1u64 << (r * n).min(63)));
                let y = big.element_from_index((idx * 7 + 5) % (1u64 << (r * n).min(63)));
                assert_eq!(b.mul(Binary::pack(&x), Binary::pack(&y)), Binary::pack(&big.mul(&x, &y)));
                let c = kern.conjugates(&x);
                assert_eq!(b.complexity(&c), kern.complexity_generic(&c));
            }
        }
    }

    #[test]
    fn f4_over_f2() {
        let f2 = FieldCtx::prime(2).unwrap();
        let f4 = FieldCtx::extension(&f2, 2).unwrap();
        let kern = TraceKernel::new(&f4).unwrap();
        let w = f4.generator();
        assert!(kern.is_self_dual(&w));
        assert_eq!(kern.complexity(&w).unwrap(), 3);
        assert!(!kern.is_self_dual(&f4.one()));
        assert!(kern.complexity(&f4.one()).is_err());
    }
}
