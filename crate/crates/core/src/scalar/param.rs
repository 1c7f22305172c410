use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::Q;

/// Symbolic parameters, in declaration order.
pub const PARAM_NAMES: [&str; 2] = ["g", "c2"];

const NPARAMS: usize = PARAM_NAMES.len();

/// Index into [`PARAM_NAMES`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Param(usize);

impl Param {
    pub const G: Param = Param(0);
    pub const C2: Param = Param(1);

    pub fn lookup(name: &str) -> Option<Param> {
        PARAM_NAMES.iter().position(|n| *n == name).map(Param)
    }

    pub fn name(self) -> &'static str {
        PARAM_NAMES[self.0]
    }
}

/// A monomial in the declared parameters.
///
/// Ordered by total degree, then so that earlier parameters come first
/// (`g < c2`, `g^2 < g*c2 < c2^2`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial([u32; NPARAMS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(p: Param) -> Self {
        let mut m = Monomial::default();
        m.0[p.0] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.degree() == 0
    }

    pub fn exponent(&self, p: Param) -> u32 {
        self.0[p.0]
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(PARAM_NAMES[i])?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Polynomial in the declared parameters with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamPoly {
    terms: BTreeMap<Monomial, Q>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn one() -> Self {
        ParamPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        ParamPoly::term(Monomial::one(), c)
    }

    pub fn from_int(n: i64) -> Self {
        ParamPoly::constant(Q::from_integer(n.into()))
    }

    pub fn var(p: Param) -> Self {
        ParamPoly::term(Monomial::var(p), Q::one())
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ParamPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// `Some(c)` when the polynomial has no parameter dependence.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, c: &Q) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &ParamPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub_assign_ref(&mut self, other: &ParamPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), -c);
        }
    }

    pub fn pow(&self, n: u32) -> ParamPoly {
        let mut out = ParamPoly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitutes a rational value for one parameter.
    pub fn substitute(&self, p: Param, value: &Q) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(p);
            let mut m2 = m.clone();
            m2.0[p.0] = 0;
            let mut v = c.clone();
            for _ in 0..e {
                v *= value;
            }
            out.add_term(m2, v);
        }
        out
    }

    /// Evaluates at rational values for all parameters.
    pub fn eval(&self, values: &[Q; NPARAMS]) -> Q {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    v *= &values[i];
                }
            }
            total += v;
        }
        total
    }

    /// Sum of all coefficients, i.e. the value at every parameter equal to 1.
    pub fn coefficient_sum(&self) -> Q {
        self.terms.values().fold(Q::zero(), |acc, c| acc + c)
    }

    pub(crate) fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }

    /// Writes a single-term polynomial with sign stripped; returns whether it was negative.
    pub(crate) fn fmt_abs_single(&self, f: &mut impl fmt::Write, implicit_one: bool) -> Result<bool, fmt::Error> {
        let (m, c) = self.terms.iter().next().expect("single term");
        let neg = c.is_negative();
        let a = c.abs();
        if m.is_one() {
            if !(implicit_one && a.is_one()) {
                write!(f, "{a}")?;
            }
        } else if a.is_one() {
            write!(f, "{m}")?;
        } else {
            write!(f, "{a}*{m}")?;
        }
        Ok(neg)
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            ParamPoly::term(m.clone(), c.abs()).fmt_abs_single(f, false)?;
        }
        Ok(())
    }
}

impl Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $f:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                (&self).$f(&rhs)
            }
        }
    )*};
}
forward_owned!(ParamPoly, Add add, Sub sub, Mul mul);

impl Neg for ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        -&self
    }
}

impl From<i64> for ParamPoly {
    fn from(n: i64) -> Self {
        ParamPoly::from_int(n)
    }
}

impl From<Q> for ParamPoly {
    fn from(c: Q) -> Self {
        ParamPoly::constant(c)
    }
}
