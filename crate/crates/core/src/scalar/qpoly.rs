use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Q;

/// Dense univariate polynomial in `s` with rational coefficients.
///
/// `coeffs[i]` is the coefficient of `s^i`; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Q>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly { coeffs: vec![Q::one()] }
    }

    pub fn from_coeffs(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| Q::from_integer(c.into())).collect())
    }

    /// `s^n - 1`
    pub fn s_pow_minus_one(n: usize) -> Self {
        let mut c = vec![Q::zero(); n + 1];
        c[0] = -Q::one();
        c[n] = Q::one();
        QPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Number of leading factors of `s`.
    pub fn s_valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn shift_down(&self, k: usize) -> QPoly {
        QPoly::from_coeffs(self.coeffs[k.min(self.coeffs.len())..].to_vec())
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Q) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Q::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        QPoly::from_coeffs(out)
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }

    /// Substitutes `s -> s^r`.
    pub fn substitute_power(&self, r: usize) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Q::zero(); self.degree() * r + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * r] = c.clone();
        }
        QPoly::from_coeffs(out)
    }

    /// Coefficient reversal: `s^deg * p(1/s)`.
    pub fn reversed(&self) -> QPoly {
        let mut c = self.coeffs.clone();
        c.reverse();
        QPoly::from_coeffs(c)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        if self.coeffs.len() < d.coeffs.len() {
            return (QPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dl = d.leading();
        let dd = d.degree();
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (QPoly::from_coeffs(quot), QPoly::from_coeffs(rem))
    }

    /// Exact division; `None` if a remainder is left.
    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let l = self.leading();
        self.scale(&l.recip())
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    /// Splits into `(c, p)` with `self = c * p`, `p` integral, content 1, positive leading coefficient.
    pub fn primitive_part(&self) -> (Q, QPoly) {
        if self.is_zero() {
            return (Q::zero(), QPoly::zero());
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in &self.coeffs {
            let v = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&v);
        }
        let mut content = Q::new(num_gcd, den_lcm);
        if self.leading().is_negative() {
            content = -content;
        }
        let p = self.scale(&content.recip());
        (content, p)
    }

    /// Factors a polynomial with nonzero constant term into cyclotomic polynomials.
    ///
    /// Returns `(m, multiplicity)` pairs and the cofactor left over.
    pub fn cyclotomic_factors(&self) -> (BTreeMap<usize, usize>, QPoly) {
        let mut rest = self.clone();
        let mut out = BTreeMap::new();
        if rest.is_zero() {
            return (out, rest);
        }
        let deg = rest.degree();
        let bound = 2 * deg * deg + 2;
        let mut cache: BTreeMap<usize, QPoly> = BTreeMap::new();
        for m in 1..=bound {
            if rest.degree() == 0 {
                break;
            }
            let phi = cyclotomic(m, &mut cache);
            if phi.degree() > rest.degree() {
                continue;
            }
            while let Some(q) = rest.div_exact(&phi) {
                *out.entry(m).or_insert(0) += 1;
                rest = q;
                if rest.degree() < phi.degree() {
                    break;
                }
            }
        }
        (out, rest)
    }
}

/// The `m`-th cyclotomic polynomial.
pub fn cyclotomic(m: usize, cache: &mut BTreeMap<usize, QPoly>) -> QPoly {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    let mut p = QPoly::s_pow_minus_one(m);
    for d in 1..m {
        if m.is_multiple_of(d) {
            let f = cyclotomic(d, cache);
            p = p.div_exact(&f).expect("cyclotomic division is exact");
        }
    }
    cache.insert(m, p.clone());
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_of_shared_factor() {
        // (1+s)(1-s) and (1+s)(2+s)
        let a = QPoly::from_ints(&[1, 0, -1]);
        let b = QPoly::from_ints(&[2, 3, 1]);
        assert_eq!(a.gcd(&b), QPoly::from_ints(&[1, 1]));
    }

    #[test]
    fn primitive_part_normalizes_sign_and_content() {
        let p = QPoly::from_coeffs(vec![Q::new(1.into(), 2.into()), Q::new((-3).into(), 4.into())]);
        let (c, prim) = p.primitive_part();
        assert_eq!(prim, QPoly::from_ints(&[-2, 3]));
        assert_eq!(prim.scale(&c), p);
    }

    #[test]
    fn cyclotomic_table() {
        let mut cache = BTreeMap::new();
        assert_eq!(cyclotomic(1, &mut cache), QPoly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic(4, &mut cache), QPoly::from_ints(&[1, 0, 1]));
        assert_eq!(cyclotomic(6, &mut cache), QPoly::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn factor_product_of_one_minus_powers() {
        // (1 - s^4)(1 - s^6)
        let p = QPoly::s_pow_minus_one(4).mul(&QPoly::s_pow_minus_one(6));
        let (f, rest) = p.cyclotomic_factors();
        assert_eq!(rest.degree(), 0);
        assert_eq!(f.get(&1), Some(&2));
        assert_eq!(f.get(&2), Some(&2));
        assert_eq!(f.get(&4), Some(&1));
        assert_eq!(f.get(&3), Some(&1));
        assert_eq!(f.get(&6), Some(&1));
        let (_, rest) = QPoly::from_ints(&[1, 1, 1, 1, 1, 1, 1, 1, 5]).cyclotomic_factors();
        assert!(rest.degree() > 0);
    }
}
