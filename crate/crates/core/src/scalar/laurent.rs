use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::{ParamPoly, QPoly, Q};

/// Laurent polynomial in `s = t^(1/2)` with [`ParamPoly`] coefficients.
///
/// The exponent `e` stands for `t^(e/2)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HalfLaurent {
    coeffs: BTreeMap<i64, ParamPoly>,
}

impl HalfLaurent {
    pub fn zero() -> Self {
        HalfLaurent::default()
    }

    pub fn one() -> Self {
        HalfLaurent::monomial(0, ParamPoly::one())
    }

    pub fn monomial(e: i64, c: ParamPoly) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        HalfLaurent { coeffs }
    }

    pub fn s_pow(e: i64) -> Self {
        HalfLaurent::monomial(e, ParamPoly::one())
    }

    pub fn constant(c: ParamPoly) -> Self {
        HalfLaurent::monomial(0, c)
    }

    /// Embeds a polynomial, `p(s) * s^shift`.
    pub fn from_qpoly(p: &QPoly, shift: i64) -> Self {
        let mut out = HalfLaurent::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                out.coeffs.insert(i as i64 + shift, ParamPoly::constant(c.clone()));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> ParamPoly {
        self.coeffs.get(&e).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ParamPoly)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `Some(c)` when only the `s^0` coefficient is present.
    pub fn as_constant(&self) -> Option<ParamPoly> {
        match self.coeffs.len() {
            0 => Some(ParamPoly::zero()),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn is_param_free(&self) -> bool {
        self.coeffs.values().all(|c| c.as_constant().is_some())
    }

    /// Multiplies by `s^k`.
    pub fn shift(&self, k: i64) -> HalfLaurent {
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &ParamPoly) -> HalfLaurent {
        let mut out = HalfLaurent::zero();
        for (e, a) in &self.coeffs {
            out.add_term(*e, a * c);
        }
        out
    }

    pub fn scale_q(&self, c: &Q) -> HalfLaurent {
        if c.is_zero() {
            return HalfLaurent::zero();
        }
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(e, a)| (*e, a.scale(c))).collect(),
        }
    }

    pub(crate) fn add_term(&mut self, e: i64, c: ParamPoly) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Substitutes `s -> s^r`; `r = -1` is the bar involution.
    pub fn substitute_power(&self, r: i64) -> HalfLaurent {
        assert!(r != 0, "substitute_power needs a nonzero exponent");
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (e * r, c.clone())).collect(),
        }
    }

    /// Value at `s = 1`.
    pub fn eval_at_one(&self) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for c in self.coeffs.values() {
            out.add_assign_ref(c);
        }
        out
    }

    /// Divides by `(s - 1)`; `None` if not divisible.
    pub fn div_s_minus_one(&self) -> Option<HalfLaurent> {
        let (Some(lo), Some(hi)) = (self.min_exp(), self.max_exp()) else {
            return Some(HalfLaurent::zero());
        };
        // synthetic division from the top: q_{i-1} = p_i + q_i
        let mut out = HalfLaurent::zero();
        let mut carry = ParamPoly::zero();
        for e in (lo + 1..=hi).rev() {
            carry = &carry + &self.coeff(e);
            out.add_term(e - 1, carry.clone());
        }
        let rem = &carry + &self.coeff(lo);
        rem.is_zero().then_some(out)
    }

    /// Splits into per-monomial polynomial slices `num = s^lo * sum_m m * slice_m(s)`.
    pub(crate) fn slices(&self) -> (i64, BTreeMap<super::Monomial, QPoly>) {
        let lo = self.min_exp().unwrap_or(0);
        let mut acc: BTreeMap<super::Monomial, Vec<Q>> = BTreeMap::new();
        let width = (self.max_exp().unwrap_or(0) - lo + 1) as usize;
        for (e, c) in &self.coeffs {
            for (m, a) in c.terms() {
                let v = acc.entry(m.clone()).or_insert_with(|| vec![Q::zero(); width]);
                v[(e - lo) as usize] = a.clone();
            }
        }
        (lo, acc.into_iter().map(|(m, v)| (m, QPoly::from_coeffs(v))).collect())
    }

    pub(crate) fn from_slices(lo: i64, slices: &BTreeMap<super::Monomial, QPoly>) -> HalfLaurent {
        let mut out = HalfLaurent::zero();
        for (m, p) in slices {
            for (i, c) in p.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    out.add_term(lo + i as i64, ParamPoly::term(m.clone(), c.clone()));
                }
            }
        }
        out
    }

    /// Multiplies by a dense polynomial.
    pub fn mul_qpoly(&self, p: &QPoly) -> HalfLaurent {
        let mut out = HalfLaurent::zero();
        for (e, c) in &self.coeffs {
            for (i, a) in p.coeffs().iter().enumerate() {
                if !a.is_zero() {
                    out.add_term(e + i as i64, c.scale(a));
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> HalfLaurent {
        let mut out = HalfLaurent::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

impl Add for &HalfLaurent {
    type Output = HalfLaurent;
    fn add(self, rhs: &HalfLaurent) -> HalfLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &HalfLaurent {
    type Output = HalfLaurent;
    fn sub(self, rhs: &HalfLaurent) -> HalfLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &HalfLaurent {
    type Output = HalfLaurent;
    fn mul(self, rhs: &HalfLaurent) -> HalfLaurent {
        let mut out = HalfLaurent::zero();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &HalfLaurent {
    type Output = HalfLaurent;
    fn neg(self) -> HalfLaurent {
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Add for HalfLaurent {
    type Output = HalfLaurent;
    fn add(self, rhs: HalfLaurent) -> HalfLaurent {
        &self + &rhs
    }
}

impl Sub for HalfLaurent {
    type Output = HalfLaurent;
    fn sub(self, rhs: HalfLaurent) -> HalfLaurent {
        &self - &rhs
    }
}

impl Mul for HalfLaurent {
    type Output = HalfLaurent;
    fn mul(self, rhs: HalfLaurent) -> HalfLaurent {
        &self * &rhs
    }
}

impl Neg for HalfLaurent {
    type Output = HalfLaurent;
    fn neg(self) -> HalfLaurent {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Param;

    #[test]
    fn divide_by_s_minus_one() {
        // s^-1 (s^2 - 1) = s - s^-1
        let p = &HalfLaurent::s_pow(1) - &HalfLaurent::s_pow(-1);
        let q = p.div_s_minus_one().unwrap();
        assert_eq!(q, &HalfLaurent::one() + &HalfLaurent::s_pow(-1));
        assert!(HalfLaurent::s_pow(3).div_s_minus_one().is_none());
    }

    #[test]
    fn slices_round_trip() {
        let g = ParamPoly::var(Param::G);
        let p = &HalfLaurent::monomial(-2, g.clone()) + &HalfLaurent::monomial(3, &g + &ParamPoly::one());
        let (lo, sl) = p.slices();
        assert_eq!(HalfLaurent::from_slices(lo, &sl), p);
    }
}
