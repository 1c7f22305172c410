use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{HalfLaurent, ParamPoly, QPoly, ScalarError, Q};

/// Rational function in `s = t^(1/2)`: a [`HalfLaurent`] numerator over a
/// parameter-free polynomial denominator.
///
/// Always held in canonical form: the denominator has a nonzero constant
/// term, integer coefficients with content 1 and a positive leading
/// coefficient, and shares no factor with the numerator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: HalfLaurent,
    den: QPoly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: HalfLaurent::zero(), den: QPoly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_laurent(HalfLaurent::one())
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::from_param(ParamPoly::from_int(n))
    }

    pub fn from_q(c: Q) -> Self {
        RatFunc::from_param(ParamPoly::constant(c))
    }

    pub fn from_param(p: ParamPoly) -> Self {
        RatFunc::from_laurent(HalfLaurent::constant(p))
    }

    pub fn from_laurent(num: HalfLaurent) -> Self {
        RatFunc { num, den: QPoly::one() }
    }

    /// `s^e`
    pub fn s_pow(e: i64) -> Self {
        RatFunc::from_laurent(HalfLaurent::s_pow(e))
    }

    /// `t^e = s^(2e)`
    pub fn t_pow(e: i64) -> Self {
        RatFunc::s_pow(2 * e)
    }

    /// Builds `num / den` and brings it to canonical form.
    pub fn new(num: HalfLaurent, den: QPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(RatFunc::normalize(num, den))
    }

    pub fn numerator(&self) -> &HalfLaurent {
        &self.num
    }

    pub fn denominator(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    /// `Some(p)` when the value is a plain parameter polynomial.
    pub fn as_param(&self) -> Option<ParamPoly> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_laurent(&self) -> Option<&HalfLaurent> {
        self.den.is_one().then_some(&self.num)
    }

    fn normalize(num: HalfLaurent, den: QPoly) -> RatFunc {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let v = den.s_valuation();
        let mut den = den.shift_down(v);
        let mut num = num.shift(-(v as i64));
        if den.degree() > 0 {
            let (lo, mut slices) = num.slices();
            let mut g = den.clone();
            for p in slices.values() {
                g = g.gcd(p);
                if g.degree() == 0 {
                    break;
                }
            }
            if g.degree() > 0 {
                den = den.div_exact(&g).expect("gcd divides denominator");
                for p in slices.values_mut() {
                    *p = p.div_exact(&g).expect("gcd divides numerator");
                }
                num = HalfLaurent::from_slices(lo, &slices);
            }
        }
        let (content, prim) = den.primitive_part();
        if !content.is_one() {
            num = num.scale_q(&content.recip());
        }
        RatFunc { num, den: prim }
    }

    pub fn checked_inv(&self) -> Result<RatFunc, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if !self.num.is_param_free() {
            return Err(ScalarError::ParamInDenominator(self.to_string()));
        }
        let lo = self.num.min_exp().expect("nonzero");
        let width = (self.num.max_exp().expect("nonzero") - lo + 1) as usize;
        let mut dense = vec![Q::zero(); width];
        for (e, c) in self.num.terms() {
            dense[(e - lo) as usize] = c.as_constant().expect("param free");
        }
        let new_num = HalfLaurent::from_qpoly(&self.den, -lo);
        Ok(RatFunc::normalize(new_num, QPoly::from_coeffs(dense)))
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<RatFunc, ScalarError> {
        Ok(self * &other.checked_inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<RatFunc, ScalarError> {
        let base = if n < 0 { self.checked_inv()? } else { self.clone() };
        let mut out = RatFunc::one();
        let mut b = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &b;
            }
            k >>= 1;
            if k > 0 {
                b = &b * &b;
            }
        }
        Ok(out)
    }

    pub fn scale_param(&self, c: &ParamPoly) -> RatFunc {
        RatFunc::normalize(self.num.scale(c), self.den.clone())
    }

    /// The bar involution `s -> 1/s`.
    pub fn bar(&self) -> RatFunc {
        let d = self.den.degree() as i64;
        let num = self.num.substitute_power(-1).shift(d);
        RatFunc::normalize(num, self.den.reversed())
    }

    /// Substitutes `t -> t^r`, i.e. `s -> s^r`.
    pub fn substitute_tr(&self, r: u32) -> RatFunc {
        assert!(r >= 1, "substitute_tr needs r >= 1");
        if r == 1 {
            return self.clone();
        }
        RatFunc::normalize(
            self.num.substitute_power(r as i64),
            self.den.substitute_power(r as usize),
        )
    }

    /// Value at `t = 1`, cancelling removable factors of `(s - 1)`.
    pub fn eval_at_t1(&self) -> Result<ParamPoly, ScalarError> {
        let one = Q::one();
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let s_minus_one = QPoly::from_ints(&[-1, 1]);
        while den.eval(&one).is_zero() {
            if !num.eval_at_one().is_zero() {
                return Err(ScalarError::PoleAtOne(self.to_string()));
            }
            num = num.div_s_minus_one().expect("numerator vanishes at 1");
            den = den.div_exact(&s_minus_one).expect("denominator vanishes at 1");
        }
        let d = den.eval(&one);
        Ok(num.eval_at_one().scale(&d.recip()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.bar() == *self
    }

    /// Factors the denominator into cyclotomic polynomials in `s`.
    ///
    /// Returns the multiplicities of each `Phi_m` and whatever is left over
    /// (a constant when the denominator is a product of cyclotomics).
    pub fn denominator_factors(&self) -> (BTreeMap<usize, usize>, QPoly) {
        self.den.cyclotomic_factors()
    }

    /// Map each `s^e` numerator term through `f` keeping the denominator.
    pub fn map_num_coeffs(&self, f: impl Fn(&ParamPoly) -> ParamPoly) -> RatFunc {
        let mut num = HalfLaurent::zero();
        for (e, c) in self.num.terms() {
            num.add_term(e, f(c));
        }
        RatFunc::normalize(num, self.den.clone())
    }
}

fn fmt_laurent(f: &mut fmt::Formatter<'_>, p: &HalfLaurent, var: &str, shift: i64) -> fmt::Result {
    let mut first = true;
    for (e, c) in p.terms() {
        let e = e - shift;
        let multi = !c.is_single_term();
        let mut body = String::new();
        let neg;
        if multi {
            neg = false;
            if e == 0 {
                body = c.to_string();
                if !first {
                    body = format!("({body})");
                }
            } else {
                body = format!("({c})*");
            }
        } else {
            neg = c.fmt_abs_single(&mut body, e != 0)?;
            if e != 0 && !body.is_empty() {
                body.push('*');
            }
        }
        if e != 0 {
            body.push_str(var);
            if e != 1 {
                body.push_str(&format!("^{e}"));
            }
        }
        match (first, neg) {
            (true, true) => f.write_str("-")?,
            (true, false) => {}
            (false, true) => f.write_str(" - ")?,
            (false, false) => f.write_str(" + ")?,
        }
        f.write_str(&body)?;
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let lo = self.num.min_exp().expect("nonzero");
        match lo {
            0 => {}
            1 => f.write_str("s * ")?,
            _ => write!(f, "s^{lo} * ")?,
        }
        let bare = lo == 0 && self.den.is_one();
        if !bare {
            f.write_str("(")?;
        }
        fmt_laurent(f, &self.num, "s", lo)?;
        if !bare {
            f.write_str(")")?;
        }
        if !self.den.is_one() {
            f.write_str(" / (")?;
            fmt_laurent(f, &HalfLaurent::from_qpoly(&self.den, 0), "s", 0)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for RatFunc {
    type Err = crate::expr::ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::expr::parse_ratfunc(s, &Default::default())
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFunc::from_laurent(num);
            }
            return RatFunc::normalize(num, self.den.clone());
        }
        let num = &self.num.mul_qpoly(&rhs.den) + &rhs.num.mul_qpoly(&self.den);
        RatFunc::normalize(num, self.den.mul(&rhs.den))
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        let num = &self.num * &rhs.num;
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_laurent(num);
        }
        RatFunc::normalize(num, self.den.mul(&rhs.den))
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        &self + &rhs
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: RatFunc) -> RatFunc {
        &self - &rhs
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        &self * &rhs
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl From<i64> for RatFunc {
    fn from(n: i64) -> Self {
        RatFunc::from_int(n)
    }
}

impl From<ParamPoly> for RatFunc {
    fn from(p: ParamPoly) -> Self {
        RatFunc::from_param(p)
    }
}

/// The quantum integer `[n]_t = s^(1-n) + s^(3-n) + ... + s^(n-1)`.
pub fn quantum_integer(n: i64) -> RatFunc {
    if n == 0 {
        return RatFunc::zero();
    }
    let m = n.abs();
    let mut num = HalfLaurent::zero();
    let mut e = -(m - 1);
    while e < m {
        num.add_term(e, ParamPoly::one());
        e += 2;
    }
    let out = RatFunc::from_laurent(num);
    if n < 0 {
        -out
    } else {
        out
    }
}

/// `1 + t + ... + t^(n-1)`, zero for `n <= 0`.
pub fn t_geometric(n: i64) -> RatFunc {
    let mut num = HalfLaurent::zero();
    for i in 0..n.max(0) {
        num.add_term(2 * i, ParamPoly::one());
    }
    RatFunc::from_laurent(num)
}

/// `(-1)^n`
pub fn sign_pow(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Param;

    fn r(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    #[test]
    fn quantum_integer_examples() {
        assert_eq!(quantum_integer(1), RatFunc::one());
        assert_eq!(quantum_integer(3).to_string(), "s^-2 * (1 + s^2 + s^4)");
        assert_eq!(quantum_integer(2).to_string(), "s^-1 * (1 + s^2)");
        assert_eq!(quantum_integer(-2), -quantum_integer(2));
        assert!(quantum_integer(0).is_zero());
    }

    #[test]
    fn canonical_display() {
        let g = ParamPoly::var(Param::G);
        let two_minus_2g = &ParamPoly::from_int(2) - &g.scale(&Q::from_integer(2.into()));
        let f = RatFunc::from_param(two_minus_2g).checked_div(&quantum_integer(2)).unwrap();
        assert_eq!(f.to_string(), "s * (2 - 2*g) / (1 + s^2)");
        assert_eq!(f.bar(), f);
        let inv = quantum_integer(2).pow(-1).unwrap();
        assert_eq!(inv.to_string(), "s * (1) / (1 + s^2)");
        assert_eq!((-inv).to_string(), "s * (-1) / (1 + s^2)");
    }

    #[test]
    fn removable_singularity_at_one() {
        let f = r("(1 - s^4) / (1 - s^2)");
        assert_eq!(f.eval_at_t1().unwrap(), ParamPoly::from_int(2));
        assert_eq!(quantum_integer(7).eval_at_t1().unwrap(), ParamPoly::from_int(7));
        let pole = r("1 / (1 - s)");
        assert!(matches!(pole.eval_at_t1(), Err(ScalarError::PoleAtOne(_))));
    }

    #[test]
    fn params_rejected_in_denominator() {
        let g = RatFunc::from_param(ParamPoly::var(Param::G));
        assert!(matches!(g.checked_inv(), Err(ScalarError::ParamInDenominator(_))));
    }

    #[test]
    fn bar_of_monomial() {
        assert_eq!(RatFunc::s_pow(2).bar(), RatFunc::s_pow(-2));
        assert!(!RatFunc::s_pow(1).is_symmetric());
    }

    #[test]
    fn substitute_tr_identities() {
        for chi in 1..=12 {
            for rr in 1..=12u32 {
                let lhs = &quantum_integer(chi).substitute_tr(rr) * &quantum_integer(rr as i64);
                assert_eq!(lhs, quantum_integer(rr as i64 * chi));
            }
            let lhs = quantum_integer(chi).substitute_tr(2);
            let rhs = quantum_integer(2 * chi).checked_div(&quantum_integer(2)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
