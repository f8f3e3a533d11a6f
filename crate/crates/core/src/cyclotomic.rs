//! q-cyclotomic classes of `Z/n`, i.e. the orbits of `s -> q s mod n`.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    Zero,
    SelfPaired,
    /// `partner` is the index of the class containing `n - s`.
    Paired { partner: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicClass {
    /// Smallest member.
    pub representative: usize,
    /// Orbit order `s, qs, q^2 s, ...`.
    pub members: Vec<usize>,
    #[serde(flatten)]
    pub kind: ClassKind,
}

impl CyclotomicClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicDecomposition {
    pub n: usize,
    pub q: u64,
    /// Multiplicative order of `q` mod `n`.
    pub m: usize,
    /// Sorted by representative; `classes[0]` is `{0}`.
    pub classes: Vec<CyclotomicClass>,
    #[serde(skip)]
    class_of: Vec<usize>,
}

/// Class counts and degrees: `X^n - 1` has `sigma` self-reciprocal factors
/// (degrees `1` and `2 c_i`) and `tau` reciprocal pairs (degrees `d_j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub sigma: usize,
    pub tau: usize,
    pub c: Vec<usize>,
    pub d: Vec<usize>,
}

impl CyclotomicDecomposition {
    pub fn new(n: usize, q: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be positive");
        }
        if n % 2 == 0 {
            return domain(format!("n = {n} is even; cyclotomic decomposition needs odd n"));
        }
        if (q % n as u64).gcd(&(n as u64)) != 1 && n > 1 {
            return domain(format!("gcd(n, q) > 1 for n = {n}, q = {q}; use the ramified construction"));
        }
        let qm = (q % n as u64) as usize;
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<CyclotomicClass> = Vec::new();
        for s in 0..n {
            if class_of[s] != usize::MAX {
                continue;
            }
            let idx = classes.len();
            let mut members = Vec::new();
            let mut t = s;
            loop {
                class_of[t] = idx;
                members.push(t);
                t = t * qm % n;
                if t == s {
                    break;
                }
            }
            classes.push(CyclotomicClass { representative: s, members, kind: ClassKind::Zero });
        }
        for idx in 0..classes.len() {
            let s = classes[idx].representative;
            let partner = class_of[(n - s) % n];
            classes[idx].kind = if s == 0 {
                ClassKind::Zero
            } else if partner == idx {
                ClassKind::SelfPaired
            } else {
                ClassKind::Paired { partner }
            };
        }
        let m = if n == 1 { 1 } else { classes[class_of[1]].size() };
        Ok(CyclotomicDecomposition { n, q, m, classes, class_of })
    }

    /// Index into `classes` of the class containing `s mod n`.
    pub fn class_of(&self, s: usize) -> usize {
        self.class_of[s % self.n]
    }

    /// Paired classes whose representative is smaller than their partner's.
    pub fn is_canonical_paired(&self, idx: usize) -> bool {
        matches!(self.classes[idx].kind, ClassKind::Paired { partner } if idx < partner)
    }

    pub fn census(&self) -> Census {
        let mut c = Vec::new();
        let mut d = Vec::new();
        for (idx, cl) in self.classes.iter().enumerate() {
            match cl.kind {
                ClassKind::Zero => {}
                ClassKind::SelfPaired => c.push(cl.size() / 2),
                ClassKind::Paired { .. } => {
                    if self.is_canonical_paired(idx) {
                        d.push(cl.size());
                    }
                }
            }
        }
        Census { sigma: 1 + c.len(), tau: d.len(), c, d }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v["census"] = serde_json::to_value(self.census()).expect("serializable");
        v
    }
}
