//! The group algebra `F_q[G] = F_q[X]/(X^n - 1)` of the Galois group of
//! `F_{q^n}/F_q`, with `X` standing for the Frobenius.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{add_mod, mul_mod};
use crate::error::{domain, internal, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly;

/// `sum_k coeffs[k] X^k`, coefficients in `F_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GaElement {
    pub coeffs: Vec<FieldElement>,
}

/// A matrix over `F_p`, stored by columns.
#[derive(Clone, Debug)]
pub struct FpLinear {
    p: u64,
    rows: usize,
    columns: Vec<Vec<u64>>,
}

impl FpLinear {
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.rows];
        for (&c, col) in x.iter().zip(&self.columns) {
            if c == 0 {
                continue;
            }
            if self.p == 2 {
                out.iter_mut().zip(col).for_each(|(o, &y)| *o ^= y);
            } else {
                out.iter_mut().zip(col).for_each(|(o, &y)| *o = add_mod(*o, mul_mod(c, y, self.p), self.p));
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct GroupAlgebra {
    base: Arc<FieldCtx>,
    n: usize,
}

impl GroupAlgebra {
    pub fn new(base: Arc<FieldCtx>, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("group order must be positive");
        }
        Ok(GroupAlgebra { base, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &Arc<FieldCtx> {
        &self.base
    }

    pub fn zero(&self) -> GaElement {
        GaElement { coeffs: vec![self.base.zero(); self.n] }
    }

    pub fn one(&self) -> GaElement {
        self.monomial(0)
    }

    /// `X^k`, exponent taken mod `n`.
    pub fn monomial(&self, k: usize) -> GaElement {
        let mut e = self.zero();
        e.coeffs[k % self.n] = self.base.one();
        e
    }

    pub fn constant(&self, c: &FieldElement) -> GaElement {
        let mut e = self.zero();
        e.coeffs[0] = c.clone();
        e
    }

    pub fn from_coeffs(&self, coeffs: Vec<FieldElement>) -> Result<GaElement> {
        if coeffs.len() != self.n {
            return domain(format!("expected {} coefficients, got {}", self.n, coeffs.len()));
        }
        for c in &coeffs {
            self.base.element(c.coords.clone())?;
        }
        Ok(GaElement { coeffs })
    }

    fn check(&self, a: &GaElement) -> Result<()> {
        if a.coeffs.len() != self.n {
            return domain(format!("element of length {} in an algebra with n = {}", a.coeffs.len(), self.n));
        }
        Ok(())
    }

    pub fn add(&self, a: &GaElement, b: &GaElement) -> GaElement {
        let f = &self.base;
        GaElement { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f.add(x, y)).collect() }
    }

    pub fn sub(&self, a: &GaElement, b: &GaElement) -> GaElement {
        let f = &self.base;
        GaElement { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f.sub(x, y)).collect() }
    }

    pub fn neg(&self, a: &GaElement) -> GaElement {
        GaElement { coeffs: a.coeffs.iter().map(|x| self.base.neg(x)).collect() }
    }

    pub fn scale(&self, a: &GaElement, c: &FieldElement) -> GaElement {
        GaElement { coeffs: a.coeffs.iter().map(|x| self.base.mul(x, c)).collect() }
    }

    /// `F_p`-coordinates, coefficient by coefficient.
    pub fn flatten(&self, a: &GaElement) -> Vec<u64> {
        a.coeffs.iter().flat_map(|c| c.coords.iter().copied()).collect()
    }

    pub fn unflatten(&self, flat: &[u64]) -> GaElement {
        GaElement { coeffs: flat.chunks(self.base.degree()).map(|c| FieldElement { coords: c.to_vec() }).collect() }
    }

    /// The `F_p`-linear map `f` tabulated on the basis `w^a X^t`.
    pub fn linear_map(&self, f: impl Fn(&GaElement) -> Result<Vec<u64>>) -> Result<FpLinear> {
        let r = self.base.degree();
        let mut columns = Vec::with_capacity(self.n * r);
        for t in 0..self.n {
            for a in 0..r {
                let mut coords = vec![0; r];
                coords[a] = 1;
                let mut e = self.zero();
                e.coeffs[t] = FieldElement { coords };
                columns.push(f(&e)?);
            }
        }
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return internal("linear map with ragged columns");
        }
        Ok(FpLinear { p: self.base.characteristic(), rows, columns })
    }

    /// Cyclic convolution.
    pub fn mul(&self, a: &GaElement, b: &GaElement) -> Result<GaElement> {
        self.check(a)?;
        self.check(b)?;
        let f = &self.base;
        let n = self.n;
        let mut out = self.zero();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let k = (i + j) % n;
                out.coeffs[k] = f.add(&out.coeffs[k], &f.mul(x, y));
            }
        }
        Ok(out)
    }

    /// The involution `X -> X^(n-1)`.
    pub fn conjugate(&self, a: &GaElement) -> GaElement {
        let n = self.n;
        GaElement { coeffs: (0..n).map(|k| a.coeffs[(n - k) % n].clone()).collect() }
    }

    /// Sum of coefficients.
    pub fn augmentation(&self, a: &GaElement) -> FieldElement {
        a.coeffs.iter().fold(self.base.zero(), |acc, c| self.base.add(&acc, c))
    }

    fn modulus_poly(&self) -> poly::Poly {
        let f = &self.base;
        let mut m = vec![f.zero(); self.n + 1];
        m[0] = f.neg(&f.one());
        m[self.n] = f.add(&m[self.n], &f.one());
        m
    }

    /// Inverse via extended Euclid against `X^n - 1`.
    pub fn inverse(&self, a: &GaElement) -> Result<GaElement> {
        self.check(a)?;
        let f = &self.base;
        let (g, s) = poly::gcd_with_cofactor(f, &a.coeffs, &self.modulus_poly());
        if g.len() != 1 {
            return domain(format!("not a unit: gcd with X^n - 1 is {g:?}"));
        }
        let mut coeffs = s;
        coeffs.resize(self.n, f.zero());
        Ok(GaElement { coeffs })
    }

    pub fn is_unit(&self, a: &GaElement) -> bool {
        poly::gcd(&self.base, &a.coeffs, &self.modulus_poly()).len() == 1
    }

    fn check_big(&self, big: &FieldCtx) -> Result<()> {
        match big.base() {
            Some(b) if b.same_field(&self.base) && big.relative_degree() == self.n => Ok(()),
            _ => domain("field is not an extension of degree n over the algebra's base field"),
        }
    }

    /// `a o x = sum_k a_k x^(q^k)`.
    pub fn act(&self, a: &GaElement, x: &FieldElement, big: &FieldCtx) -> Result<FieldElement> {
        self.check(a)?;
        self.check_big(big)?;
        let mut acc = big.zero();
        let mut conj = x.clone();
        for (k, c) in a.coeffs.iter().enumerate() {
            if k > 0 {
                conj = big.frobenius(&conj, 1);
            }
            if !c.is_zero() {
                acc = big.add(&acc, &big.mul(&big.embed_base(c), &conj));
            }
        }
        Ok(acc)
    }

    /// `R = sum_i tr(alpha alpha^(q^i)) X^i`.
    pub fn compute_r(&self, alpha: &FieldElement, big: &FieldCtx) -> Result<GaElement> {
        self.check_big(big)?;
        let mut coeffs = Vec::with_capacity(self.n);
        let mut conj = alpha.clone();
        for i in 0..self.n {
            if i > 0 {
                conj = big.frobenius(&conj, 1);
            }
            coeffs.push(big.trace_to_base(&big.mul(alpha, &conj)));
        }
        let r = GaElement { coeffs };
        if !self.is_unit(&r) {
            return internal("R is not a unit; the element is not normal");
        }
        Ok(r)
    }
}

/// Circulant-matrix view of the group algebra, for cross-checks in tests.
#[doc(hidden)]
pub mod circulant {
    use super::*;

    /// `C[i][j] = a_{(j - i) mod n}`.
    pub fn circulant_of(a: &GaElement) -> Vec<Vec<FieldElement>> {
        let n = a.coeffs.len();
        (0..n).map(|i| (0..n).map(|j| a.coeffs[(j + n - i) % n].clone()).collect()).collect()
    }

    pub fn mat_mul(f: &FieldCtx, a: &[Vec<FieldElement>], b: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(&a[i][k], &b[k][j]))))
                    .collect()
            })
            .collect()
    }

    pub fn transpose(a: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
        let n = a.len();
        (0..n).map(|i| (0..n).map(|j| a[j][i].clone()).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::circulant::*;
    use super::*;
    use proptest::prelude::*;

    fn f2_n3() -> GroupAlgebra {
        GroupAlgebra::new(FieldCtx::prime(2).unwrap(), 3).unwrap()
    }

    fn elem(ga: &GroupAlgebra, c: &[u64]) -> GaElement {
        ga.from_coeffs(c.iter().map(|&x| ga.base().from_u64(x)).collect()).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let ga = f2_n3();
        let a = elem(&ga, &[1, 1, 0]);
        let b = elem(&ga, &[1, 0, 1]);
        assert_eq!(ga.mul(&a, &b).unwrap(), elem(&ga, &[0, 1, 1]));
        assert_eq!(ga.mul(&a, &ga.one()).unwrap(), a);
        assert_eq!(ga.mul(&ga.monomial(2), &ga.monomial(1)).unwrap(), ga.one());
    }

    #[test]
    fn mismatched_length_is_domain_error() {
        let ga = f2_n3();
        let short = GaElement { coeffs: vec![ga.base().one(); 2] };
        assert!(ga.mul(&short, &ga.one()).is_err());
        assert!(ga.from_coeffs(vec![ga.base().one(); 4]).is_err());
    }

    #[test]
    fn conjugate_and_augmentation_basics() {
        let ga = GroupAlgebra::new(FieldCtx::prime(5).unwrap(), 4).unwrap();
        assert_eq!(ga.conjugate(&ga.one()), ga.one());
        assert_eq!(ga.conjugate(&ga.monomial(1)), ga.monomial(3));
        assert_eq!(ga.augmentation(&ga.one()), ga.base().one());
        for k in 0..4 {
            assert_eq!(ga.augmentation(&ga.monomial(k)), ga.base().one());
        }
    }

    #[test]
    fn inverse_examples() {
        let ga = GroupAlgebra::new(FieldCtx::prime(7).unwrap(), 5).unwrap();
        assert_eq!(ga.inverse(&ga.one()).unwrap(), ga.one());
        assert_eq!(ga.inverse(&ga.monomial(1)).unwrap(), ga.monomial(4));
        // 1 - X shares the factor X - 1 with X^5 - 1.
        let non_unit = ga.sub(&ga.one(), &ga.monomial(1));
        assert!(ga.inverse(&non_unit).is_err());
    }

    #[test]
    fn act_examples() {
        let fq = FieldCtx::prime(3).unwrap();
        let big = FieldCtx::extension(&fq, 4).unwrap();
        let ga = GroupAlgebra::new(fq.clone(), 4).unwrap();
        let x = big.element_from_index(41);
        assert_eq!(ga.act(&ga.one(), &x, &big).unwrap(), x);
        assert_eq!(ga.act(&ga.monomial(1), &x, &big).unwrap(), big.pow(&x, 3));
        let all = ga.from_coeffs(vec![fq.one(); 4]).unwrap();
        assert_eq!(ga.act(&all, &x, &big).unwrap(), big.embed_base(&big.trace_to_base(&x)));
    }

    #[test]
    fn r_of_normal_element() {
        for (p, r, n) in [(2u64, 1usize, 5usize), (3, 1, 3), (5, 1, 4), (2, 2, 3)] {
            let fq = FieldCtx::new(p, r).unwrap();
            let big = FieldCtx::extension(&fq, n).unwrap();
            let ga = GroupAlgebra::new(fq.clone(), n).unwrap();
            let alpha = big.find_normal_element().unwrap();
            let rr = ga.compute_r(&alpha, &big).unwrap();
            let t = big.trace_to_base(&alpha);
            assert_eq!(ga.augmentation(&rr), fq.mul(&t, &t));
            assert_eq!(ga.conjugate(&rr), rr);
            assert!(ga.is_unit(&rr));
        }
    }

    #[test]
    fn r_is_unit_exactly_for_normal_elements() {
        let fq = FieldCtx::prime(2).unwrap();
        let big = FieldCtx::extension(&fq, 4).unwrap();
        let ga = GroupAlgebra::new(fq, 4).unwrap();
        for i in 0..16 {
            let a = big.element_from_index(i);
            let normal = big.is_normal(&a);
            assert_eq!(ga.compute_r(&a, &big).is_ok(), normal, "a = {a:?}");
        }
    }

    #[test]
    fn circulant_examples() {
        let ga = f2_n3();
        let id = circulant_of(&ga.one());
        for (i, row) in id.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                assert_eq!(c.coords[0], u64::from(i == j));
            }
        }
        let cx = circulant_of(&ga.monomial(1));
        let ones: Vec<(usize, usize)> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| cx[i][j].coords[0] == 1)
            .collect();
        assert_eq!(ones, vec![(0, 1), (1, 2), (2, 0)]);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<u64>, Vec<u64>, Vec<u64>)> {
        let v = proptest::collection::vec(0u64..5, 6);
        (v.clone(), v.clone(), v)
    }

    proptest! {
        #[test]
        fn algebra_properties((a, b, c) in arb_pair()) {
            let f = FieldCtx::prime(5).unwrap();
            let ga = GroupAlgebra::new(f.clone(), 6).unwrap();
            let a = elem(&ga, &a);
            let b = elem(&ga, &b);
            let ab = ga.mul(&a, &b).unwrap();
            prop_assert_eq!(ga.conjugate(&ga.conjugate(&a)), a.clone());
            prop_assert_eq!(ga.conjugate(&ab), ga.mul(&ga.conjugate(&a), &ga.conjugate(&b)).unwrap());
            prop_assert_eq!(ga.augmentation(&ga.conjugate(&a)), ga.augmentation(&a));
            prop_assert_eq!(ga.augmentation(&ab), f.mul(&ga.augmentation(&a), &ga.augmentation(&b)));
            prop_assert_eq!(circulant_of(&ab), mat_mul(&f, &circulant_of(&a), &circulant_of(&b)));
            prop_assert_eq!(circulant_of(&ga.conjugate(&a)), transpose(&circulant_of(&a)));
            if ga.is_unit(&a) {
                let inv = ga.inverse(&a).unwrap();
                prop_assert_eq!(ga.mul(&a, &inv).unwrap(), ga.one());
                prop_assert_eq!(ga.inverse(&ga.conjugate(&a)).unwrap(), ga.conjugate(&inv));
            }
            let _ = c;
        }

        #[test]
        fn act_is_a_module_action(a in proptest::collection::vec(0u64..3, 5),
                                  b in proptest::collection::vec(0u64..3, 5),
                                  x in 0u64..243) {
            let fq = FieldCtx::prime(3).unwrap();
            let big = FieldCtx::extension(&fq, 5).unwrap();
            let ga = GroupAlgebra::new(fq, 5).unwrap();
            let a = elem(&ga, &a);
            let b = elem(&ga, &b);
            let x = big.element_from_index(x);
            let lhs = ga.act(&ga.mul(&a, &b).unwrap(), &x, &big).unwrap();
            let rhs = ga.act(&a, &ga.act(&b, &x, &big).unwrap(), &big).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
