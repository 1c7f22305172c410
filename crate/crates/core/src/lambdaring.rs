//! Split K-theory in formal Chern roots: Laurent polynomials in invertible
//! root variables, with exterior and symmetric powers of virtual classes.
//!
//! The Eagon–Northcott check compares the Koszul pushforward of the
//! degeneracy locus of `E0 -> E1` with `O - Lambda^r(E1 - E0) det(E0 - E1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LambdaError {
    #[error("need 1 <= r0 <= r1, got r0 = {0}, r1 = {1}")]
    RankOrder(usize, usize),
    #[error("ranks above {0} are not supported")]
    RankTooLarge(usize),
}

pub const MAX_RANK: usize = 6;

/// Laurent polynomial with integer coefficients in a fixed number of root variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, BigInt>,
}

impl RootPoly {
    pub fn zero(nvars: usize) -> Self {
        RootPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        RootPoly::monomial(vec![0; nvars], BigInt::one())
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        RootPoly::monomial(vec![0; nvars], c.into())
    }

    pub fn monomial(exps: Vec<i32>, c: BigInt) -> Self {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        RootPoly { nvars, terms }
    }

    /// The `i`-th variable raised to `e`.
    pub fn var(nvars: usize, i: usize, e: i32) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = e;
        RootPoly::monomial(exps, BigInt::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &BigInt)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: Vec<i32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &RootPoly) -> RootPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &RootPoly) -> RootPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RootPoly {
        RootPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: i64) -> RootPoly {
        let mut out = RootPoly::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, o: &RootPoly) -> RootPoly {
        assert_eq!(self.nvars, o.nvars, "root polynomials over different variable sets");
        let mut out = RootPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m: Vec<i32> = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// Inverts every variable.
    pub fn dual(&self) -> RootPoly {
        RootPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.iter().map(|e| -e).collect(), c.clone())).collect(),
        }
    }

    /// Swaps two variables.
    pub fn swap(&self, i: usize, j: usize) -> RootPoly {
        RootPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.swap(i, j);
                    (m, c.clone())
                })
                .collect(),
        }
    }

    /// Invariance under all permutations of the variables in `block`.
    pub fn is_symmetric_in(&self, block: Range<usize>) -> bool {
        let idx: Vec<usize> = block.collect();
        idx.windows(2).all(|w| self.swap(w[0], w[1]) == *self)
    }

    /// Evaluates at rational points, for cross-checks.
    pub fn eval(&self, point: &[num_rational::BigRational]) -> num_rational::BigRational {
        use num_rational::BigRational;
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = BigRational::from_integer(c.clone());
            for (x, &e) in point.iter().zip(m) {
                let p = if e >= 0 { x.clone() } else { x.recip() };
                for _ in 0..e.unsigned_abs() {
                    v *= &p;
                }
            }
            total += v;
        }
        total
    }
}

impl fmt::Display for RootPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k > 0 {
                write!(f, " {sign} ")?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e != 0)
                .map(|(i, e)| if *e == 1 { format!("z{}", i + 1) } else { format!("z{}^{e}", i + 1) })
                .collect();
            let a = c.abs();
            match (mono.is_empty(), a.is_one()) {
                (true, _) => write!(f, "{a}")?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{a}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

/// A signed sum of line classes, each a Laurent monomial in the roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualClass {
    nvars: usize,
    lines: Vec<(Vec<i32>, i64)>,
}

impl VirtualClass {
    pub fn zero(nvars: usize) -> Self {
        VirtualClass { nvars, lines: Vec::new() }
    }

    /// The split bundle with roots `vars`.
    pub fn split(nvars: usize, vars: Range<usize>) -> Self {
        let lines = vars
            .map(|i| {
                let mut m = vec![0; nvars];
                m[i] = 1;
                (m, 1)
            })
            .collect();
        VirtualClass { nvars, lines }
    }

    /// The trivial line bundle with multiplicity `m`.
    pub fn trivial(nvars: usize, m: i64) -> Self {
        VirtualClass { nvars, lines: vec![(vec![0; nvars], m)] }
    }

    pub fn line(exps: Vec<i32>, m: i64) -> Self {
        VirtualClass { nvars: exps.len(), lines: vec![(exps, m)] }
    }

    pub fn plus(&self, o: &VirtualClass) -> VirtualClass {
        let mut lines = self.lines.clone();
        lines.extend(o.lines.iter().cloned());
        VirtualClass { nvars: self.nvars, lines }
    }

    pub fn minus(&self, o: &VirtualClass) -> VirtualClass {
        self.plus(&o.negated())
    }

    pub fn negated(&self) -> VirtualClass {
        VirtualClass { nvars: self.nvars, lines: self.lines.iter().map(|(l, m)| (l.clone(), -m)).collect() }
    }

    pub fn dual(&self) -> VirtualClass {
        VirtualClass {
            nvars: self.nvars,
            lines: self.lines.iter().map(|(l, m)| (l.iter().map(|e| -e).collect(), *m)).collect(),
        }
    }

    pub fn rank(&self) -> i64 {
        self.lines.iter().map(|(_, m)| m).sum()
    }

    /// Underlying element of the root ring.
    pub fn class(&self) -> RootPoly {
        let mut out = RootPoly::zero(self.nvars);
        for (l, m) in &self.lines {
            out.add_term(l.clone(), (*m).into());
        }
        out
    }

    pub fn det(&self) -> RootPoly {
        let mut exps = vec![0; self.nvars];
        for (l, m) in &self.lines {
            for (e, a) in exps.iter_mut().zip(l) {
                *e += a * (*m as i32);
            }
        }
        RootPoly::monomial(exps, BigInt::one())
    }
}

/// Truncated power series in `u` with root-ring coefficients.
fn series_mul(a: &[RootPoly], b: &[RootPoly], order: usize) -> Vec<RootPoly> {
    let nvars = a[0].nvars;
    let mut out = vec![RootPoly::zero(nvars); order + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// `sum_j (sign u L)^j` up to `order`, or `1 + sign u L` when `finite`.
fn line_series(l: &[i32], sign: i64, finite: bool, order: usize) -> Vec<RootPoly> {
    let nvars = l.len();
    let mut out = vec![RootPoly::zero(nvars); order + 1];
    let top = if finite { order.min(1) } else { order };
    for (j, slot) in out.iter_mut().enumerate().take(top + 1) {
        let m: Vec<i32> = l.iter().map(|e| e * j as i32).collect();
        let c = if sign < 0 && j % 2 == 1 { -1 } else { 1 };
        *slot = RootPoly::monomial(m, c.into());
    }
    out
}

fn product_series(v: &VirtualClass, order: usize, sym: bool) -> Vec<RootPoly> {
    let mut acc = vec![RootPoly::zero(v.nvars); order + 1];
    acc[0] = RootPoly::one(v.nvars);
    for (l, m) in &v.lines {
        // Lambda_u: 1 + uL, inverse sum (-uL)^j; Sym_u: sum (uL)^j, inverse 1 - uL
        let f = match (sym, *m > 0) {
            (false, true) => line_series(l, 1, true, order),
            (false, false) => line_series(l, -1, false, order),
            (true, true) => line_series(l, 1, false, order),
            (true, false) => line_series(l, -1, true, order),
        };
        for _ in 0..m.unsigned_abs() {
            acc = series_mul(&acc, &f, order);
        }
    }
    acc
}

/// `Lambda_u(v)` through `u^order`.
pub fn lambda_u(v: &VirtualClass, order: usize) -> Vec<RootPoly> {
    product_series(v, order, false)
}

/// `Sym_u(v) = Lambda_{-u}(v)^{-1}` through `u^order`.
pub fn sym_u(v: &VirtualClass, order: usize) -> Vec<RootPoly> {
    product_series(v, order, true)
}

pub fn exterior(k: usize, v: &VirtualClass) -> RootPoly {
    lambda_u(v, k).swap_remove(k)
}

pub fn symmetric(k: usize, v: &VirtualClass) -> RootPoly {
    sym_u(v, k).swap_remove(k)
}

/// `Lambda_{-1}(v) = sum_i (-1)^i Lambda^i v` for an honest bundle.
pub fn lambda_minus_one(v: &VirtualClass) -> RootPoly {
    let r = v.rank().max(0) as usize;
    let mut out = RootPoly::zero(v.nvars);
    for (i, p) in lambda_u(v, r).iter().enumerate() {
        out = out.add(&p.scale(if i % 2 == 0 { 1 } else { -1 }));
    }
    out
}

/// Derived pushforward of `O(-i)` from the projectivization of `E0`
/// (rank `r0`): `O` for `i = 0`, zero for `0 < i < r0`, and
/// `Sym^{i-r0} E0 * det E0` shifted by `1 - r0` for `i >= r0`.
pub fn pushforward_o_minus(i: usize, r0: usize, e0: &VirtualClass) -> RootPoly {
    if i == 0 {
        return RootPoly::one(e0.nvars);
    }
    if i < r0 {
        return RootPoly::zero(e0.nvars);
    }
    let sign = if (r0 - 1).is_multiple_of(2) { 1 } else { -1 };
    symmetric(i - r0, e0).mul(&e0.det()).scale(sign)
}

/// The root ring for `E0` of rank `r0` (roots `0..r0`) and `E1` of rank `r1`
/// (roots `r0..r0+r1`).
pub fn en_blocks(r0: usize, r1: usize) -> (VirtualClass, VirtualClass) {
    let n = r0 + r1;
    (VirtualClass::split(n, 0..r0), VirtualClass::split(n, r0..n))
}

/// Outcome of one Eagon–Northcott comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnReport {
    pub r0: usize,
    pub r1: usize,
    /// Koszul pushforward equals the closed form.
    pub lhs_eq_rhs: bool,
    /// Each intermediate rewriting agrees with its neighbours.
    pub steps_agree: bool,
    /// Both sides are symmetric in each block of roots.
    pub symmetric: bool,
    pub lhs_terms: usize,
}

impl EnReport {
    pub fn passed(&self) -> bool {
        self.lhs_eq_rhs && self.steps_agree && self.symmetric
    }
}

fn check_ranks(r0: usize, r1: usize) -> Result<(), LambdaError> {
    if r0 < 1 || r0 > r1 {
        return Err(LambdaError::RankOrder(r0, r1));
    }
    if r1 > MAX_RANK {
        return Err(LambdaError::RankTooLarge(MAX_RANK));
    }
    Ok(())
}

/// Koszul side: `sum_i (-1)^i Lambda^i(E1^*) Rq_* O(-i)`.
pub fn en_lhs(r0: usize, r1: usize) -> RootPoly {
    let (e0, e1) = en_blocks(r0, r1);
    let lam = lambda_u(&e1.dual(), r1);
    let mut out = RootPoly::zero(r0 + r1);
    for (i, li) in lam.iter().enumerate() {
        let term = li.mul(&pushforward_o_minus(i, r0, &e0));
        out = if i % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    out
}

/// Closed form: `1 - det(E0) det(E1)^{-1} Lambda^{r1-r0}(E1 - E0)`.
pub fn en_rhs(r0: usize, r1: usize) -> RootPoly {
    let (e0, e1) = en_blocks(r0, r1);
    let n = r0 + r1;
    let lam = exterior(r1 - r0, &e1.minus(&e0));
    RootPoly::one(n).sub(&e0.det().mul(&e1.det().dual()).mul(&lam))
}

pub fn eagon_northcott_check(r0: usize, r1: usize) -> Result<EnReport, LambdaError> {
    check_ranks(r0, r1)?;
    let (e0, e1) = en_blocks(r0, r1);
    let n = r0 + r1;
    let r = r1 - r0;
    let lhs = en_lhs(r0, r1);
    let rhs = en_rhs(r0, r1);
    let one = RootPoly::one(n);
    let det_ratio = e0.det().mul(&e1.det().dual());

    // Lambda^i(E1^*) = Lambda^{r1-i}(E1) det(E1)^{-1}, reindexed from i = r0
    let lam_e1 = lambda_u(&e1, r1);
    let sym_e0 = sym_u(&e0, r);
    let mut step2 = RootPoly::zero(n);
    for i in r0..=r1 {
        let t = lam_e1[r1 - i].mul(&sym_e0[i - r0]);
        step2 = if (i - r0).is_multiple_of(2) { step2.add(&t) } else { step2.sub(&t) };
    }
    let step2 = one.sub(&det_ratio.mul(&step2));
    let mut sum_j = RootPoly::zero(n);
    for j in 0..=r {
        let t = lam_e1[r - j].mul(&sym_e0[j]);
        sum_j = if j % 2 == 0 { sum_j.add(&t) } else { sum_j.sub(&t) };
    }
    let step3 = one.sub(&det_ratio.mul(&sum_j));
    let blocks_ok = |p: &RootPoly| p.is_symmetric_in(0..r0) && p.is_symmetric_in(r0..n);
    Ok(EnReport {
        r0,
        r1,
        lhs_eq_rhs: lhs == rhs,
        steps_agree: lhs == step2 && step2 == step3 && step3 == rhs,
        symmetric: blocks_ok(&lhs) && blocks_ok(&rhs),
        lhs_terms: lhs.num_terms(),
    })
}

/// For split `V` of rank `r + 1`, the forms
/// `Lambda_{-1}(V^*)`, `1 - sum_{i<=r} (-1)^i Lambda^{i+1}(V^*)`,
/// `1 - det(V^*) Lambda^r(V - O)` and `prod (1 - z_i^{-1})` agree.
pub fn corollary_check(rank: usize) -> Result<bool, LambdaError> {
    check_ranks(1, rank)?;
    let v = VirtualClass::split(rank, 0..rank);
    let vd = v.dual();
    let r = rank - 1;
    let direct = lambda_minus_one(&vd);
    let lam = lambda_u(&vd, rank);
    let mut alt = RootPoly::one(rank);
    for i in 0..=r {
        let t = &lam[i + 1];
        alt = if i % 2 == 0 { alt.sub(t) } else { alt.add(t) };
    }
    let closed = RootPoly::one(rank)
        .sub(&vd.det().mul(&exterior(r, &v.minus(&VirtualClass::trivial(rank, 1)))));
    let mut prod = RootPoly::one(rank);
    for i in 0..rank {
        prod = prod.mul(&RootPoly::one(rank).sub(&RootPoly::var(rank, i, -1)));
    }
    Ok(direct == alt && alt == closed && closed == prod)
}

/// `prod (1 - L_i^{-1}) = (-1)^n prod (1 - L_i) prod L_i^{-1}` for split rank `n`.
pub fn duality_check(rank: usize) -> bool {
    let v = VirtualClass::split(rank, 0..rank);
    let lhs = lambda_minus_one(&v.dual());
    let sign = if rank.is_multiple_of(2) { 1 } else { -1 };
    let rhs = lambda_minus_one(&v).mul(&v.det().dual()).scale(sign);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_examples() {
        let (e0, e1) = en_blocks(1, 2);
        let n = 3;
        assert_eq!(exterior(0, &e1.minus(&e0)), RootPoly::one(n));
        let y1y2 = RootPoly::var(n, 1, 1).mul(&RootPoly::var(n, 2, 1));
        assert_eq!(exterior(2, &e1), y1y2);
        assert_eq!(exterior(1, &e1.minus(&e0)), e1.class().sub(&e0.class()));
    }

    #[test]
    fn symmetric_examples() {
        let x = VirtualClass::split(2, 0..2);
        assert_eq!(symmetric(1, &x), x.class());
        let x1 = VirtualClass::split(1, 0..1);
        assert_eq!(symmetric(2, &x1), RootPoly::var(1, 0, 2));
    }

    #[test]
    fn lambda_of_negative_is_inverse() {
        let (e0, e1) = en_blocks(2, 3);
        let v = e1.minus(&e0);
        let a = lambda_u(&v, 6);
        let b = lambda_u(&v.negated(), 6);
        let prod = series_mul(&a, &b, 6);
        assert_eq!(prod[0], RootPoly::one(5));
        assert!(prod[1..].iter().all(RootPoly::is_zero));
    }

    #[test]
    fn en_small_cases() {
        assert!(eagon_northcott_check(1, 1).unwrap().passed());
        // both sides are 1 - x1/y1
        let expect = RootPoly::one(2).sub(&RootPoly::monomial(vec![1, -1], BigInt::one()));
        assert_eq!(en_rhs(1, 1), expect);
        assert_eq!(en_lhs(1, 1), expect);
        assert!(eagon_northcott_check(1, 3).unwrap().passed());
        assert!(eagon_northcott_check(2, 5).unwrap().passed());
        assert_eq!(eagon_northcott_check(3, 2), Err(LambdaError::RankOrder(3, 2)));
        assert_eq!(eagon_northcott_check(1, 7), Err(LambdaError::RankTooLarge(6)));
    }

    #[test]
    fn corollary_and_duality() {
        for r in 1..=5 {
            assert!(corollary_check(r).unwrap());
        }
        for r in 0..=4 {
            assert!(duality_check(r));
        }
    }
}
