//! The group `O = {v : v conj(v) = 1}` of `F_q[X]/(X^n - 1)`, enumerated by index.
//!
//! Semi-simple `n`: `v` is read off from one component per cyclotomic class,
//! a power of a fixed generator of that component's solution group, so
//! the index is a mixed-radix number over the generator exponents.
//! Ramified `n = p^e`: `v = sum v_i (X - 1)^i`, with `v_0 = +-1`, free odd
//! coefficients and even coefficients forced by a quadratic recurrence.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::arith::{add_mod, sub_mod};
use crate::construct::{base_field, existence_check, split_prime_power, SdnbCertificate};
use crate::cyclotomic::{ClassKind, CyclotomicDecomposition};
use crate::error::{domain, internal, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::fourier::FourierCtx;
use crate::group_algebra::{GaElement, GroupAlgebra};

/// Largest number of precomputed per-factor table entries.
const MAX_TABLE_ENTRIES: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Semisimple,
    RamifiedOdd,
    RamifiedEvenN2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// `v(1) = +-1` (a radix-1 factor for even `q`).
    Sign,
    /// Powers of an element of order `q^c + 1` on a self-paired class.
    SelfPaired { class: usize, c: usize },
    /// Powers of `(g, g^-1)` on a class and its partner, `g` of order `q^d - 1`.
    Paired { class: usize, partner: usize, d: usize },
}

/// One mixed-radix digit of the semi-simple enumeration.
#[derive(Debug, Clone)]
pub struct Factor {
    pub kind: FactorKind,
    pub order: u64,
    /// `table[e]` is the part of `v` carried by this factor at exponent `e`;
    /// `v` is the sum of one entry from each factor's table.
    pub table: Vec<GaElement>,
}

#[derive(Debug)]
enum Layout {
    Semisimple { factors: Vec<Factor> },
    Ramified { binom: Vec<Vec<u64>>, free: usize },
    EvenN2,
}

#[derive(Debug)]
pub struct GroupSpec {
    pub q: u64,
    pub n: usize,
    pub kind: GroupKind,
    pub cardinality: BigUint,
    ga: GroupAlgebra,
    layout: Layout,
}

/// `n = n1 p^e` with `p` not dividing `n1`.
fn split_degree(n: usize, p: u64) -> (usize, usize) {
    let p = p as usize;
    let mut n1 = n;
    let mut pe = 1;
    while n1 % p == 0 {
        n1 /= p;
        pe *= p;
    }
    (n1, pe)
}

fn check_enumerable(q: u64, n: usize) -> Result<GroupKind> {
    let (p, _) = split_prime_power(q)?;
    if n == 0 {
        return domain("n must be positive");
    }
    if !existence_check(q, n) {
        return Err(Error::NoSdnb { q, n });
    }
    if n == 2 {
        return Ok(GroupKind::RamifiedEvenN2);
    }
    if n % 2 == 0 {
        return Err(Error::Unsupported(format!("mixed degree n = 2 * {} over q = {q}", n / 2)));
    }
    let (n1, pe) = split_degree(n, p);
    match (n1, pe) {
        (_, 1) => Ok(GroupKind::Semisimple),
        (1, _) => Ok(GroupKind::RamifiedOdd),
        _ => Err(Error::Unsupported(format!("mixed degree n = {n1} * {pe}: enumeration not implemented"))),
    }
}

/// `|O|` from the class census or the ramified closed form.
pub fn group_cardinality(q: u64, n: usize) -> Result<BigUint> {
    let kind = check_enumerable(q, n)?;
    let qb = BigUint::from(q);
    Ok(match kind {
        GroupKind::RamifiedEvenN2 => qb,
        GroupKind::RamifiedOdd => BigUint::from(2u32) * qb.pow(((n - 1) / 2) as u32),
        GroupKind::Semisimple => {
            let census = CyclotomicDecomposition::new(n, q)?.census();
            let mut total = if q % 2 == 1 { BigUint::from(2u32) } else { BigUint::one() };
            for &c in &census.c {
                total *= qb.pow(c as u32) + 1u32;
            }
            for &d in &census.d {
                total *= qb.pow(d as u32) - 1u32;
            }
            total
        }
    })
}

/// Binomials mod `p` up to row `n`.
fn pascal(n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![0u64; n + 1];
        row[0] = 1 % p;
        for j in 1..=i {
            row[j] = add_mod(rows[i - 1][j - 1], rows[i - 1][j], p);
        }
        rows.push(row);
    }
    rows
}

impl GroupSpec {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        let kind = check_enumerable(q, n)?;
        let cardinality = group_cardinality(q, n)?;
        let fq = base_field(q)?;
        let ga = GroupAlgebra::new(fq.clone(), n)?;
        let layout = match kind {
            GroupKind::RamifiedEvenN2 => Layout::EvenN2,
            GroupKind::RamifiedOdd => Layout::Ramified { binom: pascal(n, fq.characteristic()), free: (n - 1) / 2 },
            GroupKind::Semisimple => {
                if cardinality.to_u64().is_none() {
                    return Err(Error::Unsupported(format!("group of order {cardinality} is too large to enumerate")));
                }
                Layout::Semisimple { factors: semisimple_factors(&FourierCtx::new(fq, n)?, q)? }
            }
        };
        Ok(GroupSpec { q, n, kind, cardinality, ga, layout })
    }

    pub fn algebra(&self) -> &GroupAlgebra {
        &self.ga
    }

    pub fn base(&self) -> &Arc<FieldCtx> {
        self.ga.base()
    }

    /// The cardinality as a machine integer, if it fits.
    pub fn len(&self) -> Option<u64> {
        self.cardinality.to_u64()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Semi-simple factor tables (empty for the ramified layouts).
    pub fn factors(&self) -> &[Factor] {
        match &self.layout {
            Layout::Semisimple { factors } => factors,
            _ => &[],
        }
    }

    /// Mixed-radix digits of `idx`, least significant factor first.
    pub fn digits(&self, mut idx: u64) -> Vec<u64> {
        self.factors()
            .iter()
            .map(|f| {
                let d = idx % f.order;
                idx /= f.order;
                d
            })
            .collect()
    }

    fn check_index(&self, idx: u64) -> Result<()> {
        match self.len() {
            Some(len) if idx < len => Ok(()),
            Some(len) => domain(format!("index {idx} out of range for a group of order {len}")),
            None => Err(Error::Unsupported("group too large for 64-bit indices".into())),
        }
    }

    /// The group element with index `idx`; index 0 is the identity.
    pub fn element(&self, idx: u64) -> Result<GaElement> {
        self.check_index(idx)?;
        let ga = &self.ga;
        let f = ga.base();
        Ok(match &self.layout {
            Layout::EvenN2 => {
                let a = f.add(&f.one(), &f.element_from_index(idx));
                ga.from_coeffs(vec![a.clone(), f.add(&a, &f.one())])?
            }
            Layout::Ramified { binom, free } => {
                let v0 = if idx % 2 == 0 { f.one() } else { f.neg(&f.one()) };
                let q = self.q;
                let mut rest = idx / 2;
                let odd: Vec<FieldElement> = (0..*free)
                    .map(|_| {
                        let e = f.element_from_index(rest % q);
                        rest /= q;
                        e
                    })
                    .collect();
                let w = ramified_coefficients(f, self.n, binom, v0, &odd);
                from_x_minus_one_basis(ga, binom, &w)
            }
            Layout::Semisimple { factors } => {
                let mut v = ga.zero();
                for (fac, d) in factors.iter().zip(self.digits(idx)) {
                    v = ga.add(&v, &fac.table[d as usize]);
                }
                v
            }
        })
    }

    /// Elements with indices in `[start, end)`.
    pub fn range(&self, start: u64, end: u64) -> impl Iterator<Item = Result<(u64, GaElement)>> + '_ {
        (start..end).map(move |i| self.element(i).map(|v| (i, v)))
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<(u64, GaElement)>> + '_ {
        self.range(0, self.len().unwrap_or(0))
    }
}

/// The semi-simple stream; a domain error for other layouts.
pub fn enumerate_semisimple(spec: &GroupSpec) -> Result<impl Iterator<Item = Result<GaElement>> + '_> {
    if spec.kind != GroupKind::Semisimple {
        return domain("not a semi-simple group");
    }
    Ok(spec.iter().map(|r| r.map(|(_, v)| v)))
}

/// The ramified stream (`n = p^e`, or `n = 2` with `q` even).
pub fn enumerate_ramified(spec: &GroupSpec) -> Result<impl Iterator<Item = Result<GaElement>> + '_> {
    if spec.kind == GroupKind::Semisimple {
        return domain("not a ramified group");
    }
    Ok(spec.iter().map(|r| r.map(|(_, v)| v)))
}

fn semisimple_factors(fourier: &FourierCtx, q: u64) -> Result<Vec<Factor>> {
    let dec = fourier.decomposition();
    let ext = fourier.ext();
    let n = fourier.n();
    let mut factors = Vec::new();
    let one = ext.one();
    // Sign at s = 0.
    {
        let mut signs = vec![one.clone()];
        if q % 2 == 1 {
            signs.push(ext.neg(&one));
        }
        let table = signs
            .iter()
            .map(|s| {
                let mut vals = vec![ext.zero(); n];
                vals[0] = s.clone();
                fourier.inverse(&vals)
            })
            .collect::<Result<Vec<_>>>()?;
        factors.push(Factor { kind: FactorKind::Sign, order: table.len() as u64, table });
    }
    let mut entries = 0u64;
    for (idx, class) in dec.classes.iter().enumerate() {
        let (kind, order, partner) = match class.kind {
            ClassKind::Zero => continue,
            ClassKind::SelfPaired => {
                let c = class.size() / 2;
                let order = (q as u128).checked_pow(c as u32).map(|x| x + 1);
                (FactorKind::SelfPaired { class: idx, c }, order, None)
            }
            ClassKind::Paired { partner } => {
                if idx > partner {
                    continue;
                }
                let d = class.size();
                let order = (q as u128).checked_pow(d as u32).map(|x| x - 1);
                (FactorKind::Paired { class: idx, partner, d }, order, Some(partner))
            }
        };
        let Some(order) = order.and_then(|o| u64::try_from(o).ok()) else {
            return Err(Error::Unsupported("cyclotomic factor order exceeds 64 bits".into()));
        };
        entries += order;
        if entries > MAX_TABLE_ENTRIES {
            return Err(Error::Unsupported("cyclotomic factor tables too large to enumerate".into()));
        }
        let g = ext.element_of_order(order)?;
        let component = |x: &FieldElement| -> Result<GaElement> {
            let mut vals = vec![ext.zero(); n];
            fourier.spread(idx, x, &mut vals);
            if partner.is_some() {
                // v(zeta^-s) = v(zeta^s)^-1
                let mut y = ext.inv(x)?;
                for (k, &pos) in dec.classes[idx].members.iter().enumerate() {
                    if k > 0 {
                        y = ext.frobenius(&y, 1);
                    }
                    vals[n - pos] = y.clone();
                }
            }
            fourier.inverse(&vals)
        };
        // Products are componentwise in frequency, so entry e is the e-th
        // power of entry 1 inside this component.
        let ga = fourier.algebra();
        let step = component(&g)?;
        let times_step = ga.linear_map(|e| Ok(ga.flatten(&ga.mul(e, &step)?)))?;
        let first = component(&one)?;
        let mut table = Vec::with_capacity(order as usize);
        let mut cur = ga.flatten(&first);
        for _ in 0..order {
            table.push(ga.unflatten(&cur));
            cur = times_step.apply(&cur);
        }
        if ga.unflatten(&cur) != first || (order > 1 && table[1] != step) {
            return internal("factor generator has the wrong order");
        }
        factors.push(Factor { kind, order, table });
    }
    Ok(factors)
}

/// Coefficients `v_0, ..., v_{n-1}` in the `(X - 1)`-power basis: `v_0` and the
/// odd-index coefficients given, even ones solved from
/// `sum_{j=1}^{2i} sum_{k=0}^{j} (-1)^k C(n-k, 2i-j) v_k v_{j-k} = 0`.
pub fn ramified_coefficients(
    f: &FieldCtx,
    n: usize,
    binom: &[Vec<u64>],
    v0: FieldElement,
    odd: &[FieldElement],
) -> Vec<FieldElement> {
    let p = f.characteristic();
    let mut v = vec![f.zero(); n];
    v[0] = v0;
    for (i, o) in odd.iter().enumerate() {
        v[2 * i + 1] = o.clone();
    }
    let inv_two_v0 = f.inv(&f.add(&v[0], &v[0])).expect("p odd and v_0 = +-1");
    for i in 1..=(n - 1) / 2 {
        let two_i = 2 * i;
        let mut acc = f.zero();
        for j in 1..=two_i {
            for k in 0..=j {
                // The two v_0 v_{2i} terms form the unknown.
                if j == two_i && (k == 0 || k == two_i) {
                    continue;
                }
                let b = binom[n - k][two_i - j];
                if b == 0 {
                    continue;
                }
                let coef = if k % 2 == 0 { b } else { sub_mod(0, b, p) };
                let term = f.mul(&v[k], &v[j - k]);
                acc = f.add(&acc, &f.scale(&term, coef));
            }
        }
        v[two_i] = f.neg(&f.mul(&acc, &inv_two_v0));
    }
    v
}

/// `sum_i w_i (X - 1)^i` in the standard basis.
pub fn from_x_minus_one_basis(ga: &GroupAlgebra, binom: &[Vec<u64>], w: &[FieldElement]) -> GaElement {
    let f = ga.base();
    let p = f.characteristic();
    let n = ga.n();
    let mut out = ga.zero();
    for (i, wi) in w.iter().enumerate() {
        if wi.is_zero() {
            continue;
        }
        // (X - 1)^i = sum_j C(i, j) (-1)^(i - j) X^j
        for j in 0..=i {
            let b = binom[i][j];
            if b == 0 {
                continue;
            }
            let c = if (i - j) % 2 == 0 { b } else { sub_mod(0, b, p) };
            out.coeffs[j] = f.add(&out.coeffs[j], &f.scale(wi, c));
        }
    }
    debug_assert_eq!(out.coeffs.len(), n);
    out
}

/// `r = sum_{i=1}^{(n-1)/2} r_i (X^i - X^(n-i))`.
pub fn skew_vector(ga: &GroupAlgebra, r: &[FieldElement]) -> Result<GaElement> {
    let n = ga.n();
    if n % 2 == 0 || r.len() != (n - 1) / 2 {
        return domain(format!("a skew vector for n = {n} has {} entries", (n.max(1) - 1) / 2));
    }
    let f = ga.base();
    let mut out = ga.zero();
    for (i, ri) in r.iter().enumerate() {
        out.coeffs[i + 1] = f.add(&out.coeffs[i + 1], ri);
        out.coeffs[n - i - 1] = f.sub(&out.coeffs[n - i - 1], ri);
    }
    Ok(out)
}

/// The unique `w` in the augmentation ideal with `w + w conj(w) / 2 = r`,
/// found by iterating `P <- -r^2 + P^2 / 4` to its fixed point `P = w conj(w)`.
pub fn macwilliams_iterate(ga: &GroupAlgebra, r: &GaElement) -> Result<GaElement> {
    let f = ga.base();
    if f.characteristic() == 2 {
        return domain("the skew-vector parametrisation needs odd characteristic");
    }
    if ga.conjugate(r) != ga.neg(r) {
        return domain("r is not skew");
    }
    let half = f.inv(&f.from_u64(2))?;
    let quarter = f.mul(&half, &half);
    let minus_r2 = ga.neg(&ga.mul(r, r)?);
    let mut pp = ga.zero();
    let mut converged = false;
    for _ in 0..=ga.n() + 1 {
        let next = ga.add(&minus_r2, &ga.scale(&ga.mul(&pp, &pp)?, &quarter));
        if next == pp {
            converged = true;
            break;
        }
        pp = next;
    }
    if !converged {
        return internal("fixed-point iteration for w conj(w) did not stabilise");
    }
    let w = ga.sub(r, &ga.scale(&pp, &half));
    let one = ga.one();
    let lhs = ga.mul(&ga.add(&one, &w), &ga.add(&one, &ga.conjugate(&w)))?;
    if lhs != one {
        return internal("(1 + w)(1 + conj(w)) != 1");
    }
    Ok(w)
}

/// Every SDNB generator, as `conj(v) o gamma` over the group.
pub fn all_sdnb_generators<'a>(
    spec: &'a GroupSpec,
    cert: &'a SdnbCertificate,
) -> Result<impl Iterator<Item = Result<FieldElement>> + 'a> {
    if spec.q != cert.q || spec.n != cert.n {
        return domain("certificate and group are for different (q, n)");
    }
    let ga = spec.algebra();
    Ok(spec.iter().map(move |item| {
        let (_, v) = item?;
        ga.act(&ga.conjugate(&v), &cert.gamma, &cert.field)
    }))
}
