//! Evaluation at the powers of an `n`-th root of unity `zeta` in `F_{q^m}`:
//! `F_q[X]/(X^n - 1) -> (F_{q^m})^n`, `u -> (u(zeta^s))_s`, and its inverse.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::CyclotomicDecomposition;
use crate::error::{domain, internal, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::group_algebra::{GaElement, GroupAlgebra};

#[derive(Debug)]
pub struct FourierCtx {
    ga: GroupAlgebra,
    ext: Arc<FieldCtx>,
    zeta: FieldElement,
    /// `zeta^k` for `k < n`.
    zeta_pows: Vec<FieldElement>,
    n_inv: FieldElement,
    decomposition: CyclotomicDecomposition,
}

impl FourierCtx {
    pub fn new(base: Arc<FieldCtx>, n: usize) -> Result<Self> {
        let q = base
            .size_u64()
            .ok_or_else(|| crate::Error::Domain("base field too large".into()))?;
        let decomposition = CyclotomicDecomposition::new(n, q)?;
        let ext = FieldCtx::extension(&base, decomposition.m)?;
        let zeta = ext.element_of_order(n as u64)?;
        let mut zeta_pows = Vec::with_capacity(n);
        let mut cur = ext.one();
        for _ in 0..n {
            zeta_pows.push(cur.clone());
            cur = ext.mul(&cur, &zeta);
        }
        let n_inv = ext.inv(&ext.from_u64(n as u64))?;
        let ctx = FourierCtx { ga: GroupAlgebra::new(base, n)?, ext, zeta, zeta_pows, n_inv, decomposition };
        ctx.self_check()?;
        Ok(ctx)
    }

    /// `F(zeta^-1) F(zeta) = n I`, checked through a round trip on a seeded vector.
    fn self_check(&self) -> Result<()> {
        let f = self.ga.base();
        let mut rng = ChaCha8Rng::seed_from_u64(0xf0_u64 ^ self.n() as u64);
        let coeffs = (0..self.n())
            .map(|_| f.element((0..f.degree()).map(|_| rng.gen_range(0..f.characteristic())).collect()).unwrap())
            .collect();
        let u = self.ga.from_coeffs(coeffs)?;
        if self.inverse(&self.forward(&u)?)? != u {
            return internal("F(zeta^-1) F(zeta) != n I");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.ga.n()
    }

    pub fn algebra(&self) -> &GroupAlgebra {
        &self.ga
    }

    /// `F_{q^m}`, the field holding all components.
    pub fn ext(&self) -> &Arc<FieldCtx> {
        &self.ext
    }

    pub fn zeta(&self) -> &FieldElement {
        &self.zeta
    }

    pub fn decomposition(&self) -> &CyclotomicDecomposition {
        &self.decomposition
    }

    pub fn forward(&self, u: &GaElement) -> Result<Vec<FieldElement>> {
        let n = self.n();
        if u.coeffs.len() != n {
            return domain(format!("expected {n} coefficients, got {}", u.coeffs.len()));
        }
        let ext = &self.ext;
        let lifted: Vec<FieldElement> = u.coeffs.iter().map(|c| ext.embed_base(c)).collect();
        Ok((0..n)
            .map(|s| {
                lifted.iter().enumerate().fold(ext.zero(), |acc, (k, c)| {
                    if c.is_zero() {
                        acc
                    } else {
                        ext.add(&acc, &ext.mul(c, &self.zeta_pows[s * k % n]))
                    }
                })
            })
            .collect())
    }

    /// `u_t = (1/n) sum_i vals_i zeta^(-t i)`; fails unless every `u_t` lies in `F_q`.
    pub fn inverse(&self, vals: &[FieldElement]) -> Result<GaElement> {
        let n = self.n();
        if vals.len() != n {
            return domain(format!("expected {n} components, got {}", vals.len()));
        }
        let ext = &self.ext;
        let mut coeffs = Vec::with_capacity(n);
        for t in 0..n {
            let mut acc = ext.zero();
            for (i, r) in vals.iter().enumerate() {
                if !r.is_zero() {
                    acc = ext.add(&acc, &ext.mul(r, &self.zeta_pows[(n - t * i % n) % n]));
                }
            }
            let acc = ext.mul(&acc, &self.n_inv);
            match ext.project_base(&acc) {
                Some(c) => coeffs.push(c),
                None => return domain("result not rational over F_q"),
            }
        }
        Ok(GaElement { coeffs })
    }

    pub fn conjugate_in_frequency(&self, vals: &[FieldElement]) -> Vec<FieldElement> {
        let n = vals.len();
        (0..n).map(|s| vals[(n - s) % n].clone()).collect()
    }

    /// Write `value, value^q, value^(q^2), ...` at the members of class `idx`.
    pub fn spread(&self, idx: usize, value: &FieldElement, vals: &mut [FieldElement]) {
        let mut cur = value.clone();
        for (k, &pos) in self.decomposition.classes[idx].members.iter().enumerate() {
            if k > 0 {
                cur = self.ext.frobenius(&cur, 1);
            }
            vals[pos] = cur.clone();
        }
    }

    /// Component at `q s` is the `q`-th power of the component at `s`, for every `s`.
    pub fn is_coherent(&self, vals: &[FieldElement]) -> bool {
        let n = self.n();
        let qm = (self.decomposition.q % n as u64) as usize;
        (0..n).all(|s| vals[s * qm % n] == self.ext.frobenius(&vals[s], 1))
    }
}
