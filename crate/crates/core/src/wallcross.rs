//! The wall-crossing sum expressing refined pairs invariants through
//! refined Vafa–Witten invariants, its triangular inverse, and the
//! uniform-component contributions on K3 surfaces.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::qseries::{hilb_chi, multiple_cover, SeriesError};
use crate::scalar::{quantum_integer, sign_pow, t_geometric, ParamPoly, RatFunc, ScalarError, Q};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WallError {
    #[error("no data for multiple {0}")]
    MissingCharge(u32),
    #[error("quantum integer [{0}] vanishes")]
    DivisionByZeroQuantum(i64),
    #[error("divisibility must be positive")]
    ZeroDivisibility,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Charges `(m/N) alpha` for `1 <= m <= N`, with `chi` of each twisted multiple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeProfile {
    pub divisibility: u32,
    pub chi_of_multiple: BTreeMap<u32, i64>,
    /// Whether `H^{0,1} = 0 = H^{0,2}`; otherwise only the single-term sum applies.
    pub hzero: bool,
}

impl ChargeProfile {
    /// A profile with `chi(m alpha/N) = m * chi_unit`.
    pub fn linear(divisibility: u32, chi_unit: i64, hzero: bool) -> Self {
        let chi_of_multiple = (1..=divisibility).map(|m| (m, m as i64 * chi_unit)).collect();
        ChargeProfile { divisibility, chi_of_multiple, hzero }
    }

    fn chi(&self, m: u32) -> Result<i64, WallError> {
        self.chi_of_multiple.get(&m).copied().ok_or(WallError::MissingCharge(m))
    }

    fn restricted(&self, level: u32) -> ChargeProfile {
        ChargeProfile { divisibility: level, ..self.clone() }
    }
}

/// Ordered compositions of `n` into positive parts.
pub fn compositions(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(-1)^chi [chi]_t`
fn signed_quantum(chi: i64) -> RatFunc {
    let q = quantum_integer(chi);
    if sign_pow(chi) < 0 {
        -q
    } else {
        q
    }
}

/// Sum over compositions of length `>= min_len`; the single-term case when `hzero` is false.
fn composition_sum(
    profile: &ChargeProfile,
    vw: &BTreeMap<u32, RatFunc>,
    min_len: usize,
) -> Result<RatFunc, WallError> {
    let n = profile.divisibility;
    if n == 0 {
        return Err(WallError::ZeroDivisibility);
    }
    let comps = if profile.hzero { compositions(n) } else { vec![vec![n]] };
    let mut total = RatFunc::zero();
    for comp in comps.iter().filter(|c| c.len() >= min_len) {
        let l = comp.len();
        let sign = if l % 2 == 0 { 1 } else { -1 };
        let mut term = RatFunc::from_q(Q::new(sign.into(), factorial(l)));
        for &m in comp {
            let v = vw.get(&m).ok_or(WallError::MissingCharge(m))?;
            term = &term * &(&signed_quantum(profile.chi(m)?) * v);
        }
        total = &total + &term;
    }
    Ok(total)
}

/// Pairs invariant of the full charge from the Vafa–Witten invariants of its multiples.
pub fn pairs_from_vw(profile: &ChargeProfile, vw: &BTreeMap<u32, RatFunc>) -> Result<RatFunc, WallError> {
    composition_sum(profile, vw, 1)
}

/// Solves the wall-crossing sum for the Vafa–Witten invariants, level by level.
pub fn vw_from_pairs(
    profile: &ChargeProfile,
    pairs: &BTreeMap<u32, RatFunc>,
) -> Result<BTreeMap<u32, RatFunc>, WallError> {
    if profile.divisibility == 0 {
        return Err(WallError::ZeroDivisibility);
    }
    let mut vw = BTreeMap::new();
    let levels: Vec<u32> = if profile.hzero {
        (1..=profile.divisibility).collect()
    } else {
        vec![profile.divisibility]
    };
    for level in levels {
        let p = pairs.get(&level).ok_or(WallError::MissingCharge(level))?;
        let sub = profile.restricted(level);
        let rest = if profile.hzero { composition_sum(&sub, &vw, 2)? } else { RatFunc::zero() };
        let chi = profile.chi(level)?;
        if chi == 0 {
            return Err(WallError::DivisionByZeroQuantum(chi));
        }
        // the length-one term is -(-1)^chi [chi] VW
        let lead = -signed_quantum(chi);
        vw.insert(level, (p - &rest).checked_div(&lead)?);
    }
    Ok(vw)
}

/// The same sum with every quantum integer replaced by its value at `t = 1`.
pub fn pairs_from_vw_t1(profile: &ChargeProfile, vw: &BTreeMap<u32, ParamPoly>) -> Result<ParamPoly, WallError> {
    let n = profile.divisibility;
    if n == 0 {
        return Err(WallError::ZeroDivisibility);
    }
    let comps = if profile.hzero { compositions(n) } else { vec![vec![n]] };
    let mut total = ParamPoly::zero();
    for comp in &comps {
        let l = comp.len();
        let sign = if l % 2 == 0 { 1 } else { -1 };
        let mut term = ParamPoly::constant(Q::new(sign.into(), factorial(l)));
        for &m in comp {
            let v = vw.get(&m).ok_or(WallError::MissingCharge(m))?;
            let chi = profile.chi(m)?;
            term = &term * &v.scale(&Q::from_integer((sign_pow(chi) * chi).into()));
        }
        total = &total + &term;
    }
    Ok(total)
}

/// Contribution of a rank-`r` uniform component:
/// `(-1)^(chi - 1) [r]^{-1} t^{-r vd / 2} chivir`.
pub fn uniform_contribution(r: i64, vd: i64, chi_ralpha_n: i64, chivir: &RatFunc) -> Result<RatFunc, WallError> {
    let mut out = (chivir * &RatFunc::s_pow(-r * vd)).checked_div(&quantum_integer(r))?;
    if sign_pow(chi_ralpha_n - 1) < 0 {
        out = -out;
    }
    Ok(out)
}

/// `chi_{-t}` of a `P^(chi0 - 1)`-bundle over a base with `chi_{-t}` equal to `base`.
pub fn pbundle_chi(chi0: i64, base: &RatFunc) -> RatFunc {
    &t_geometric(chi0) * base
}

/// Outcome of comparing the uniform contribution with the wall-crossing sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallCheck {
    pub r: i64,
    pub chi0: i64,
    pub d: i64,
    /// The primitive invariant from the single-term inversion is `t^{-d} chi_{-t}(Hilb^d)`.
    pub primitive_ok: bool,
    /// The uniform contribution equals the sum applied to the multiple-cover invariants.
    pub multiple_ok: bool,
}

/// K3 check for a primitive `alpha0` with `chi(alpha0(n)) = chi0` and
/// `d = 1 - chi(alpha0, alpha0)/2`, at rank multiple `r`.
pub fn ball_check(r: i64, chi0: i64, d: i64) -> Result<BallCheck, WallError> {
    let hilb = hilb_chi(d, d.max(1))?;
    let vd = 2 * d + chi0 - 1;
    let chivir = pbundle_chi(chi0, &hilb);
    let p1 = uniform_contribution(1, vd, chi0, &chivir)?;
    let prim_profile = ChargeProfile::linear(1, chi0, false);
    let vw1 = vw_from_pairs(&prim_profile, &BTreeMap::from([(1, p1)]))?.remove(&1).expect("level 1");
    let primitive_ok = vw1 == &hilb * &RatFunc::t_pow(-d);
    let pr = uniform_contribution(r, vd, r * chi0, &chivir.substitute_tr(r as u32))?;
    let profile = ChargeProfile::linear(r as u32, chi0, false);
    let mut vw = BTreeMap::new();
    for m in 1..=r {
        vw.insert(m as u32, multiple_cover(&vw1, m)?);
    }
    let multiple_ok = pairs_from_vw(&profile, &vw)? == pr;
    Ok(BallCheck { r, chi0, d, primitive_ok, multiple_ok })
}

/// Pairs invariant of the general-type component with `p_g` sections of
/// `K_S` and `chi = chi(O_S(n))`, from the `P^(chi-1)` fibre:
/// `-p_g t^{chi-1+p_g/2} (1+t)^{-p_g} t^{2-2chi} sum_p (-t^2)^p chi(Omega^p)`.
pub fn pairs_pg(p_g: i64, chi: i64) -> Result<RatFunc, WallError> {
    let mut fibre = RatFunc::zero();
    for p in 0..chi {
        // chi(P^n, Omega^p) = (-1)^p
        let term = RatFunc::t_pow(p).pow(2)?;
        fibre = &fibre + &term;
    }
    let one_plus_t = &RatFunc::one() + &RatFunc::t_pow(1);
    let pref = (&RatFunc::s_pow(2 * (chi - 1) + p_g) * &RatFunc::t_pow(2 - 2 * chi)).checked_div(&one_plus_t.pow(p_g)?)?;
    Ok(-(&(&pref * &fibre) * &RatFunc::from_int(p_g)))
}

/// The invariant obtained from [`pairs_pg`] through the single-term sum with `chi(alpha(n)) = 2 chi`.
pub fn vw_pg(p_g: i64, chi: i64) -> Result<RatFunc, WallError> {
    let profile = ChargeProfile { divisibility: 1, chi_of_multiple: BTreeMap::from([(1, 2 * chi)]), hzero: false };
    let p = pairs_pg(p_g, chi)?;
    Ok(vw_from_pairs(&profile, &BTreeMap::from([(1, p)]))?.remove(&1).expect("level 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(1), vec![vec![1]]);
        assert_eq!(compositions(3).len(), 4);
        assert_eq!(compositions(4).len(), 8);
    }

    #[test]
    fn single_charge() {
        let prof = ChargeProfile::linear(1, 5, true);
        let vw = BTreeMap::from([(1, r("g"))]);
        assert_eq!(pairs_from_vw(&prof, &vw).unwrap(), &quantum_integer(5) * &r("g"));
        let back = vw_from_pairs(&prof, &BTreeMap::from([(1, r("g"))])).unwrap();
        assert_eq!(back[&1], r("g").checked_div(&quantum_integer(5)).unwrap());
    }

    #[test]
    fn two_charges_by_hand() {
        let (a, b) = (3, 4);
        let prof = ChargeProfile { divisibility: 2, chi_of_multiple: BTreeMap::from([(1, a), (2, b)]), hzero: true };
        let vw = BTreeMap::from([(1, RatFunc::one()), (2, RatFunc::one())]);
        let got = pairs_from_vw(&prof, &vw).unwrap();
        let qa = quantum_integer(a);
        let expect = &(-&(&RatFunc::from_int(sign_pow(b)) * &quantum_integer(b)))
            + &(&(&qa * &qa) * &RatFunc::from_q(crate::scalar::q(1, 2)));
        assert_eq!(got, expect);
    }

    #[test]
    fn zero_chi_flagged() {
        let prof = ChargeProfile::linear(1, 0, true);
        let err = vw_from_pairs(&prof, &BTreeMap::from([(1, RatFunc::one())])).unwrap_err();
        assert_eq!(err, WallError::DivisionByZeroQuantum(0));
        let missing = pairs_from_vw(&ChargeProfile::linear(2, 1, true), &BTreeMap::new()).unwrap_err();
        assert_eq!(missing, WallError::MissingCharge(1));
    }

    #[test]
    fn pg_values() {
        let p = pairs_pg(2, 5).unwrap();
        assert_eq!(p, r("-2*qint(10)/qint(2)^3"));
        assert_eq!(vw_pg(2, 5).unwrap(), r("2/qint(2)^3"));
    }

    #[test]
    fn ball_small() {
        let c = ball_check(2, 5, 1).unwrap();
        assert!(c.primitive_ok && c.multiple_ok);
    }
}
