//! Construction of a self-dual normal basis generator for `F_{q^n}/F_q`.
//!
//! A normal element `alpha` determines `R = sum_i tr(alpha alpha^(q^i)) X^i`;
//! any `v` with `v conj(v) = R` gives the generator `v^-1 o alpha`.

use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{pow_mod, prime_power};
use crate::complexity::TraceKernel;
use crate::cyclotomic::ClassKind;
use crate::error::{domain, internal, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::fourier::FourierCtx;
use crate::group_algebra::{GaElement, GroupAlgebra};

/// `q = p^r` split into `(p, r)`, or a domain error.
pub fn split_prime_power(q: u64) -> Result<(u64, usize)> {
    match prime_power(q) {
        Some((p, r)) => Ok((p, r as usize)),
        None => domain(format!("{q} is not a prime power")),
    }
}

/// `F_q` with the deterministic modulus.
pub fn base_field(q: u64) -> Result<Arc<FieldCtx>> {
    let (p, r) = split_prime_power(q)?;
    FieldCtx::new(p, r)
}

/// An SDNB of `F_{q^n}/F_q` exists iff `n` is odd, or `n = 2 mod 4` and `q` is even.
pub fn existence_check(q: u64, n: usize) -> bool {
    n % 2 == 1 || (n % 4 == 2 && q % 2 == 0)
}

/// `tr(g^(q^i) g^(q^j)) = delta_ij` for all `i, j`.
pub fn verify_sdnb(field: &Arc<FieldCtx>, g: &FieldElement) -> bool {
    match TraceKernel::new(field) {
        Ok(k) => k.is_self_dual(g),
        Err(_) => false,
    }
}

#[derive(Debug, Clone)]
pub struct SdnbCertificate {
    pub q: u64,
    pub n: usize,
    /// `F_{q^n}`, based over `F_q`.
    pub field: Arc<FieldCtx>,
    pub gamma: FieldElement,
    /// The solution of `v conj(v) = R` used, when the construction has one.
    pub v: Option<GaElement>,
    complexity: OnceLock<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub q: u64,
    pub n: usize,
    pub modulus: Vec<u64>,
    pub gamma_coords: Vec<u64>,
    pub v_coeffs: Option<Vec<Vec<u64>>>,
    pub complexity: u64,
}

impl SdnbCertificate {
    /// Checks self-duality before accepting `gamma`.
    pub fn new(field: Arc<FieldCtx>, gamma: FieldElement, v: Option<GaElement>) -> Result<Self> {
        let n = field.relative_degree();
        let q = field.base_size();
        if !verify_sdnb(&field, &gamma) {
            return internal(format!("constructed element is not a self-dual normal basis generator (q = {q}, n = {n})"));
        }
        Ok(SdnbCertificate { q, n, field, gamma, v, complexity: OnceLock::new() })
    }

    pub fn complexity(&self) -> u64 {
        *self.complexity.get_or_init(|| {
            TraceKernel::new(&self.field).expect("extension field").complexity_unchecked(&self.gamma)
        })
    }

    pub fn base(&self) -> &Arc<FieldCtx> {
        self.field.base().expect("certificate field has a base")
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            q: self.q,
            n: self.n,
            modulus: self.field.modulus().to_vec(),
            gamma_coords: self.gamma.coords.clone(),
            v_coeffs: self.v.as_ref().map(|v| v.coeffs.iter().map(|c| c.coords.clone()).collect()),
            complexity: self.complexity(),
        }
    }

    /// Rebuilds and re-verifies a certificate; the stated complexity must match.
    pub fn from_json(j: &CertificateJson) -> Result<Self> {
        let fq = base_field(j.q)?;
        let field = FieldCtx::extension_with_modulus(&fq, j.modulus.clone())?;
        if field.relative_degree() != j.n {
            return domain(format!("modulus has degree {} over F_q, expected n = {}", field.relative_degree(), j.n));
        }
        let gamma = field.element(j.gamma_coords.clone())?;
        let v = match &j.v_coeffs {
            Some(cs) => {
                let ga = GroupAlgebra::new(fq.clone(), j.n)?;
                Some(ga.from_coeffs(cs.iter().map(|c| fq.element(c.clone())).collect::<Result<_>>()?)?)
            }
            None => None,
        };
        if !verify_sdnb(&field, &gamma) {
            return domain("gamma does not generate a self-dual normal basis");
        }
        let cert = SdnbCertificate { q: j.q, n: j.n, field, gamma, v, complexity: OnceLock::new() };
        if cert.complexity() != j.complexity {
            return domain(format!("stated complexity {} differs from computed {}", j.complexity, cert.complexity()));
        }
        Ok(cert)
    }
}

/// Smallest `t >= 2` with `-t` a nonzero square mod `p`.
fn case_c_t(p: u64) -> Option<u64> {
    (2..p).find(|&t| {
        let x = p - t % p;
        x % p != 0 && pow_mod(x, (p - 1) / 2, p) == 1
    })
}

/// `(t, eta, nu)` with `eta^2 = -t` and `nu^2 = t - 1` mod `p`.
fn case_c_constants(p: u64) -> Result<(u64, u64, u64)> {
    let fp = FieldCtx::prime(p)?;
    let Some(t) = case_c_t(p) else {
        return internal(format!("no t with -t a nonzero square mod {p}"));
    };
    let eta = fp.sqrt(&fp.from_u64(p - t % p)).expect("square by choice of t");
    let Some(nu) = fp.sqrt(&fp.from_u64(t - 1)) else {
        return internal(format!("t - 1 = {} is not a square mod {p}", t - 1));
    };
    Ok((t, eta.coords[0], nu.coords[0]))
}

/// Which square root served a self-paired class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelfPairedCase {
    /// `sqrt(R_s)` is fixed by conjugation.
    RootFixed,
    /// `sqrt(-R_s)` is not fixed by conjugation.
    NegRootMoved,
    /// The combination `(nu sqrt(R_s) + sqrt(-R_s)) / eta`.
    Combined,
}

/// `v` with `v conj(v) = R(alpha)`, for `gcd(n, q) = 1` and `n` odd.
pub fn solve_semisimple(fourier: &FourierCtx, big: &FieldCtx, alpha: &FieldElement) -> Result<GaElement> {
    solve_semisimple_traced(fourier, big, alpha).map(|(v, _)| v)
}

/// As [`solve_semisimple`], also reporting the case used for each self-paired class.
pub fn solve_semisimple_traced(
    fourier: &FourierCtx,
    big: &FieldCtx,
    alpha: &FieldElement,
) -> Result<(GaElement, Vec<SelfPairedCase>)> {
    let mut cases = Vec::new();
    let ga = fourier.algebra();
    let ext = fourier.ext();
    let dec = fourier.decomposition();
    let n = ga.n();
    let r = ga.compute_r(alpha, big)?;
    let fr = fourier.forward(&r)?;
    let mut vals = vec![ext.zero(); n];
    for (idx, class) in dec.classes.iter().enumerate() {
        let s = class.representative;
        match class.kind {
            ClassKind::Zero => vals[0] = ext.embed_base(&big.trace_to_base(alpha)),
            ClassKind::Paired { partner } => {
                if idx < partner {
                    fourier.spread(idx, &fr[s], &mut vals);
                    fourier.spread(partner, &ext.one(), &mut vals);
                }
            }
            ClassKind::SelfPaired => {
                let c = class.size() / 2;
                let rs = &fr[s];
                let fixed = |x: &FieldElement| ext.frobenius(x, c) == *x;
                let Some(u) = ext.sqrt(rs) else {
                    return internal(format!("R_{s} is not a square"));
                };
                let vs = if fixed(&u) {
                    cases.push(SelfPairedCase::RootFixed);
                    u
                } else {
                    let Some(u2) = ext.sqrt(&ext.neg(rs)) else {
                        return internal(format!("-R_{s} is not a square"));
                    };
                    if !fixed(&u2) {
                        cases.push(SelfPairedCase::NegRootMoved);
                        u2
                    } else {
                        cases.push(SelfPairedCase::Combined);
                        let (_, eta, nu) = case_c_constants(ext.characteristic())?;
                        let num = ext.add(&ext.scale(&u, nu), &u2);
                        ext.div(&num, &ext.from_u64(eta))?
                    }
                };
                if ext.frobenius(&vs, 2 * c) != vs {
                    return internal(format!("component at {s} left its class field"));
                }
                fourier.spread(idx, &vs, &mut vals);
            }
        }
    }
    let v = fourier.inverse(&vals).map_err(|e| Error::Internal(format!("solution not rational: {e}")))?;
    if ga.mul(&v, &ga.conjugate(&v))? != r {
        return internal("semi-simple solution fails v conj(v) = R");
    }
    Ok((v, cases))
}

/// The square root `omega` of `R(alpha)` with `epsilon(omega) = tr(alpha)`,
/// for `p` odd and `n = p^e`. Newton iteration in the local ring `F_q[X]/(X-1)^n`.
pub fn solve_ramified(ga: &GroupAlgebra, big: &FieldCtx, alpha: &FieldElement) -> Result<GaElement> {
    let f = ga.base();
    if f.characteristic() == 2 {
        return domain("ramified square root needs odd characteristic");
    }
    let r = ga.compute_r(alpha, big)?;
    let t = big.trace_to_base(alpha);
    if t.is_zero() {
        return internal("normal element with zero trace");
    }
    let mut omega = ga.constant(&t);
    let two = f.from_u64(2);
    let cap = 2 + (usize::BITS - ga.n().leading_zeros()) as usize;
    for _ in 0..=cap {
        let sq = ga.mul(&omega, &omega)?;
        if sq == r {
            if ga.conjugate(&omega) != omega {
                return internal("square root of R is not conjugation invariant");
            }
            return Ok(omega);
        }
        let step = ga.mul(&ga.sub(&r, &sq), &ga.inverse(&ga.scale(&omega, &two))?)?;
        omega = ga.add(&omega, &step);
    }
    internal("Newton iteration for the square root of R did not converge")
}

/// `n = 2`, `q` even: any `beta` with `tr(beta) = 1`.
pub fn construct_even_quadratic(fq: &Arc<FieldCtx>) -> Result<SdnbCertificate> {
    if fq.characteristic() != 2 {
        return domain("the quadratic rule needs even q");
    }
    let big = FieldCtx::extension(fq, 2)?;
    let beta = (1u64..)
        .map(|i| big.element_from_index(i))
        .find(|b| !big.trace_to_base(b).is_zero())
        .expect("trace is surjective");
    let t = big.trace_to_base(&beta);
    let beta = big.mul(&beta, &big.embed_base(&fq.inv(&t)?));
    SdnbCertificate::new(big, beta, None)
}

fn construct_semisimple(fq: &Arc<FieldCtx>, n: usize) -> Result<SdnbCertificate> {
    let big = FieldCtx::extension(fq, n)?;
    let fourier = FourierCtx::new(fq.clone(), n)?;
    let alpha = big.find_normal_element()?;
    let v = solve_semisimple(&fourier, &big, &alpha)?;
    let ga = fourier.algebra();
    let gamma = ga.act(&ga.inverse(&v)?, &alpha, &big)?;
    SdnbCertificate::new(big, gamma, Some(v))
}

fn construct_ramified(fq: &Arc<FieldCtx>, n: usize) -> Result<SdnbCertificate> {
    let big = FieldCtx::extension(fq, n)?;
    let ga = GroupAlgebra::new(fq.clone(), n)?;
    let alpha = big.find_normal_element()?;
    let omega = solve_ramified(&ga, &big, &alpha)?;
    let gamma = ga.act(&ga.inverse(&omega)?, &alpha, &big)?;
    SdnbCertificate::new(big, gamma, Some(omega))
}

/// Construct an SDNB generator of `F_{q^n}/F_q`. Deterministic in `(q, n)`.
pub fn construct(q: u64, n: usize) -> Result<SdnbCertificate> {
    let fq = base_field(q)?;
    if n == 0 {
        return domain("n must be positive");
    }
    if !existence_check(q, n) {
        return Err(Error::NoSdnb { q, n });
    }
    let p = fq.characteristic();
    if p == 2 {
        if n % 2 == 1 {
            return construct_semisimple(&fq, n);
        }
        let quad = construct_even_quadratic(&fq)?;
        if n == 2 {
            return Ok(quad);
        }
        let odd = construct_semisimple(&fq, n / 2)?;
        return compose_coprime(&quad, &odd);
    }
    let mut n1 = n;
    let mut pe = 1;
    while n1 % p as usize == 0 {
        n1 /= p as usize;
        pe *= p as usize;
    }
    match (n1, pe) {
        (_, 1) => construct_semisimple(&fq, n),
        (1, _) => construct_ramified(&fq, n),
        _ => compose_coprime(&construct_semisimple(&fq, n1)?, &construct_ramified(&fq, pe)?),
    }
}

/// The product of generators of degrees `m` and `n`, `gcd(m, n) = 1`,
/// generates an SDNB of degree `mn` whose complexity is the product.
pub fn compose_coprime(a: &SdnbCertificate, b: &SdnbCertificate) -> Result<SdnbCertificate> {
    if a.n.gcd(&b.n) != 1 {
        return domain(format!("degrees {} and {} are not coprime", a.n, b.n));
    }
    if !a.base().same_field(b.base()) {
        return domain("certificates are over different base fields");
    }
    let big = FieldCtx::extension(a.base(), a.n * b.n)?;
    let ea = a.field.embedding_into(&big)?;
    let eb = b.field.embedding_into(&big)?;
    let gamma = big.mul(&ea.apply(&a.gamma), &eb.apply(&b.gamma));
    let cert = SdnbCertificate::new(big, gamma, None)?;
    if cert.complexity() != a.complexity() * b.complexity() {
        return internal(format!(
            "compositum complexity {} != {} * {}",
            cert.complexity(),
            a.complexity(),
            b.complexity()
        ));
    }
    Ok(cert)
}

/// Reinterpret an SDNB of `F_{q^n}/F_q` as one of `F_{Q^n}/F_Q`, `Q = q^r`,
/// `gcd(n, r) = 1`. The complexity is unchanged.
pub fn base_extension(cert: &SdnbCertificate, r: usize) -> Result<SdnbCertificate> {
    if r == 0 || cert.n.gcd(&r) != 1 {
        return domain(format!("extension degree {r} is not coprime to n = {}", cert.n));
    }
    let fq = cert.base();
    let big_q = fq.size_u64().and_then(|q| q.checked_pow(r as u32));
    let Some(_) = big_q else {
        return Err(Error::Unsupported("extended base field larger than 64 bits".into()));
    };
    let f_big_q = FieldCtx::new(fq.characteristic(), fq.degree() * r)?;
    let big = FieldCtx::extension(&f_big_q, cert.n)?;
    let e = cert.field.embedding_into(&big)?;
    let out = SdnbCertificate::new(big, e.apply(&cert.gamma), None)?;
    if out.complexity() != cert.complexity() {
        return internal("base extension changed the complexity");
    }
    Ok(out)
}
