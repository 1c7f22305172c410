//! Truncated Laurent series in `q` with rational-function coefficients: the
//! Jacobi form `Delta~(q, t)`, K3 Hilbert scheme series and rank-`r`
//! generating functions.

use std::fmt;

use serde::Serialize;

use crate::scalar::{quantum_integer, HalfLaurent, ParamPoly, RatFunc, ScalarError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("series known only below q^{prec}, coefficient of q^{wanted} requested")]
    OrderTooLow { wanted: i64, prec: i64 },
    #[error("lowest coefficient is zero or not invertible")]
    NotInvertible,
    #[error("need {what}, got {got}")]
    BadArgument { what: &'static str, got: i64 },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// `sum_{e >= start} c_e q^e`, known modulo `q^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    start: i64,
    coeffs: Vec<RatFunc>,
    prec: i64,
}

impl QSeries {
    /// The zero series known modulo `q^prec`.
    pub fn zero(prec: i64) -> Self {
        QSeries { start: prec, coeffs: Vec::new(), prec }
    }

    /// Builds from coefficients of `q^start, q^(start+1), ...`, known modulo `q^prec`.
    pub fn from_coeffs(start: i64, coeffs: Vec<RatFunc>, prec: i64) -> Self {
        let mut coeffs = coeffs;
        coeffs.truncate((prec - start).max(0) as usize);
        QSeries { start, coeffs, prec }.trimmed()
    }

    /// `c q^e` modulo `q^prec`.
    pub fn monomial(e: i64, c: RatFunc, prec: i64) -> Self {
        QSeries::from_coeffs(e, vec![c], prec)
    }

    fn trimmed(mut self) -> Self {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..lead);
        self.start += lead as i64;
        while self.coeffs.last().is_some_and(RatFunc::is_zero) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.start = self.prec;
        }
        self
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Exponent of the lowest nonzero term, `prec` for the zero series.
    pub fn valuation(&self) -> i64 {
        self.start
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Result<RatFunc, SeriesError> {
        if e >= self.prec {
            return Err(SeriesError::OrderTooLow { wanted: e, prec: self.prec });
        }
        if e < self.start {
            return Ok(RatFunc::zero());
        }
        Ok(self.coeffs.get((e - self.start) as usize).cloned().unwrap_or_default())
    }

    /// `(exponent, coefficient)` for every nonzero known term.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &RatFunc)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.start + i as i64, c))
    }

    pub fn truncate(&self, prec: i64) -> QSeries {
        let p = prec.min(self.prec);
        QSeries::from_coeffs(self.start, self.coeffs.clone(), p)
    }

    pub fn add(&self, o: &QSeries) -> QSeries {
        let prec = self.prec.min(o.prec);
        let start = self.start.min(o.start).min(prec);
        let n = (prec - start).max(0) as usize;
        let mut out = vec![RatFunc::zero(); n];
        for (e, c) in self.terms().chain(o.terms()) {
            if e < prec {
                let slot = &mut out[(e - start) as usize];
                *slot = &*slot + c;
            }
        }
        QSeries::from_coeffs(start, out, prec)
    }

    pub fn neg(&self) -> QSeries {
        QSeries { start: self.start, coeffs: self.coeffs.iter().map(|c| -c).collect(), prec: self.prec }
    }

    pub fn sub(&self, o: &QSeries) -> QSeries {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &QSeries) -> QSeries {
        let prec = if self.is_zero() && o.is_zero() {
            self.prec + o.prec
        } else {
            (self.start + o.prec).min(o.start + self.prec)
        };
        if self.is_zero() || o.is_zero() {
            return QSeries::zero(prec);
        }
        let start = self.start + o.start;
        let n = (prec - start).max(0) as usize;
        let mut out = vec![RatFunc::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        QSeries::from_coeffs(start, out, prec)
    }

    pub fn scale(&self, c: &RatFunc) -> QSeries {
        QSeries::from_coeffs(self.start, self.coeffs.iter().map(|a| a * c).collect(), self.prec)
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> QSeries {
        QSeries { start: self.start + k, coeffs: self.coeffs.clone(), prec: self.prec + k }
    }

    pub fn invert(&self) -> Result<QSeries, SeriesError> {
        let lead = self.coeffs.first().ok_or(SeriesError::NotInvertible)?;
        let lead_inv = lead.checked_inv().map_err(|_| SeriesError::NotInvertible)?;
        let v = self.start;
        // relative precision is preserved
        let n = (self.prec - v).max(0) as usize;
        let mut inv: Vec<RatFunc> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                inv.push(lead_inv.clone());
                continue;
            }
            let mut acc = RatFunc::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                let a = &self.coeffs[j];
                if !a.is_zero() && !inv[k - j].is_zero() {
                    acc = &acc + &(a * &inv[k - j]);
                }
            }
            inv.push(-(&acc * &lead_inv));
        }
        Ok(QSeries::from_coeffs(-v, inv, -v + n as i64))
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, f: impl Fn(&RatFunc) -> RatFunc) -> QSeries {
        QSeries::from_coeffs(self.start, self.coeffs.iter().map(f).collect(), self.prec)
    }

    /// `t -> t^r` in every coefficient.
    pub fn substitute_t(&self, r: u32) -> QSeries {
        self.map(|c| c.substitute_tr(r))
    }

    /// `q -> q^r`.
    pub fn substitute_q(&self, r: u32) -> QSeries {
        let r = r as i64;
        let mut out = Vec::new();
        for (e, c) in self.terms() {
            let idx = (e * r - self.start * r) as usize;
            if out.len() <= idx {
                out.resize(idx + 1, RatFunc::zero());
            }
            out[idx] = c.clone();
        }
        QSeries::from_coeffs(self.start * r, out, self.prec * r)
    }

    /// Keeps the terms `q^(m k)` and renames them `q^k`: the average of
    /// `f(zeta q^(1/m))` over `m`-th roots of unity `zeta`.
    pub fn select_multiples(&self, m: i64) -> QSeries {
        assert!(m >= 1);
        let prec = (self.prec - 1).div_euclid(m) + 1;
        let mut out: Vec<(i64, RatFunc)> = Vec::new();
        for (e, c) in self.terms() {
            if e.rem_euclid(m) == 0 {
                out.push((e / m, c.clone()));
            }
        }
        from_pairs(out, prec)
    }

    /// Every coefficient is bar-invariant.
    pub fn is_bar_symmetric(&self) -> bool {
        self.coeffs.iter().all(RatFunc::is_symmetric)
    }
}

fn from_pairs(pairs: Vec<(i64, RatFunc)>, prec: i64) -> QSeries {
    let Some(lo) = pairs.iter().map(|(e, _)| *e).min() else {
        return QSeries::zero(prec);
    };
    let n = (prec - lo).max(0) as usize;
    let mut v = vec![RatFunc::zero(); n];
    for (e, c) in pairs {
        if e < prec {
            v[(e - lo) as usize] = c;
        }
    }
    QSeries::from_coeffs(lo, v, prec)
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, c) in self.terms() {
            writeln!(f, "q^{e}: {c}")?;
        }
        write!(f, "+ O(q^{})", self.prec)
    }
}

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoeffRow {
    pub q_exp: i64,
    pub coeff: String,
    pub t1_value: Option<String>,
    pub symmetric: bool,
}

pub fn coefficient_table(s: &QSeries) -> Vec<CoeffRow> {
    s.terms()
        .map(|(e, c)| CoeffRow {
            q_exp: e,
            coeff: c.to_string(),
            t1_value: c.eval_at_t1().ok().map(|v| v.to_string()),
            symmetric: c.is_symmetric(),
        })
        .collect()
}

/// `prod_k (1 - c q^k)` factors folded into a dense Laurent-coefficient vector.
fn mul_one_minus(v: &mut [HalfLaurent], k: usize, c: &HalfLaurent) {
    for i in (k..v.len()).rev() {
        if !v[i - k].is_zero() {
            let d = &v[i - k] * c;
            v[i] = &v[i] - &d;
        }
    }
}

/// `q prod_{k>=1} (1-q^k)^20 (1-t q^k)^2 (1-t^-1 q^k)^2`, known modulo `q^(order+1)`.
pub fn delta_tilde(order: i64) -> Result<QSeries, SeriesError> {
    if order < 1 {
        return Err(SeriesError::BadArgument { what: "order >= 1", got: order });
    }
    // coefficients of q^(e+1) for e = 0..order
    let n = order as usize;
    let mut v = vec![HalfLaurent::zero(); n];
    v[0] = HalfLaurent::one();
    let one = HalfLaurent::one();
    let t = HalfLaurent::s_pow(2);
    let tinv = HalfLaurent::s_pow(-2);
    for k in 1..n {
        for _ in 0..20 {
            mul_one_minus(&mut v, k, &one);
        }
        for _ in 0..2 {
            mul_one_minus(&mut v, k, &t);
            mul_one_minus(&mut v, k, &tinv);
        }
    }
    Ok(QSeries::from_coeffs(1, v.into_iter().map(RatFunc::from_laurent).collect(), order + 1))
}

/// `chi_{-t}(Hilb^n K3)`, read off from `Delta~^{-1} = sum t^{-k-1} chi_{-t}(Hilb^{k+1}) q^k`.
pub fn hilb_chi(n: i64, order: i64) -> Result<RatFunc, SeriesError> {
    if n < 0 {
        return Err(SeriesError::BadArgument { what: "n >= 0", got: n });
    }
    if n > order {
        return Err(SeriesError::OrderTooLow { wanted: n, prec: order + 1 });
    }
    let inv = delta_tilde(order.max(1) + 1)?.invert()?;
    Ok(&inv.coeff(n - 1)? * &RatFunc::t_pow(n))
}

/// Coefficients `c_k` of `Delta~^{-1} = sum_{k >= -1} c_k q^k` for `k < kmax`.
fn inverse_delta(kmax: i64) -> Result<QSeries, SeriesError> {
    delta_tilde(kmax.max(0) + 2)?.invert()
}

/// The rank-`r` K3 series
/// `sum_{d | r} [d]^{-2} sum_m c_{(r/d) m}(t^d) q^(m d + r)` through `q^order`.
pub fn vw_k3_series(r: i64, order: i64) -> Result<QSeries, SeriesError> {
    if r < 1 {
        return Err(SeriesError::BadArgument { what: "r >= 1", got: r });
    }
    let kmax = (r * (order - r).max(0)).max(1) + 1;
    let inv = inverse_delta(kmax)?;
    let mut pairs: Vec<(i64, RatFunc)> = Vec::new();
    for d in (1..=r).filter(|d| r % d == 0) {
        let weight = quantum_integer(d).pow(-2)?;
        let step = r / d;
        let mut m = if d == r { -1 } else { 0 };
        while m * d + r <= order {
            let k = step * m;
            let c = inv.coeff(k)?.substitute_tr(d as u32);
            if !c.is_zero() {
                pairs.push((m * d + r, &c * &weight));
            }
            m += 1;
        }
    }
    let mut acc = QSeries::zero(order + 1);
    for (e, c) in pairs {
        acc = acc.add(&QSeries::monomial(e, c, order + 1));
    }
    Ok(acc)
}

/// Right-hand side for prime `r`, built from series operations:
/// `[r]^{-2} q^r Delta~(q^r, t^r)^{-1} + q^r (select multiples of r in Delta~(q, t)^{-1})`.
pub fn gk_rhs(r: i64, order: i64) -> Result<QSeries, SeriesError> {
    if r < 2 {
        return Err(SeriesError::BadArgument { what: "r >= 2", got: r });
    }
    let prec = order + 1;
    let inner = (prec - r) / r + 3;
    let d_r = delta_tilde(inner)?.substitute_t(r as u32).substitute_q(r as u32);
    let first = d_r.invert()?.shift(r).scale(&quantum_integer(r).pow(-2)?).truncate(prec);
    let inv = delta_tilde((prec - r) * r + 3)?.invert()?;
    let second = inv.select_multiples(r).shift(r).truncate(prec);
    Ok(first.add(&second))
}

/// The `r = 2` root-of-unity average done literally:
/// `(Delta~(x)^{-1} + Delta~(-x)^{-1}) / 2` with `x = q^(1/2)`, reindexed to `q`.
pub fn literal_average_r2(order: i64) -> Result<QSeries, SeriesError> {
    let n = 2 * order + 3;
    let d = delta_tilde(n)?;
    let flipped = QSeries::from_coeffs(
        d.valuation(),
        (d.valuation()..d.prec())
            .map(|e| {
                let c = d.coeff(e).expect("within precision");
                if e % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect(),
        d.prec(),
    );
    let avg = d.invert()?.add(&flipped.invert()?).scale(&RatFunc::from_q(crate::scalar::q(1, 2)));
    let mut out: Vec<(i64, RatFunc)> = Vec::new();
    for (e, c) in avg.terms() {
        if e.rem_euclid(2) != 0 {
            return Err(SeriesError::BadArgument { what: "odd terms cancelling", got: e });
        }
        out.push((e / 2, c.clone()));
    }
    Ok(from_pairs(out, (avg.prec() - 1).div_euclid(2) + 1))
}

/// `vw1(t^r) / [r]_t^2`.
pub fn multiple_cover(vw1: &RatFunc, r: i64) -> Result<RatFunc, SeriesError> {
    if r < 1 {
        return Err(SeriesError::BadArgument { what: "r >= 1", got: r });
    }
    Ok(vw1.substitute_tr(r as u32).checked_div(&quantum_integer(r).pow(2)?)?)
}

/// The primitive K3 invariant `t^{-d} chi_{-t}(Hilb^d K3)`.
pub fn primitive_vw(d: i64) -> Result<RatFunc, SeriesError> {
    Ok(&hilb_chi(d, d.max(1))? * &RatFunc::t_pow(-d))
}

/// The general-type series `sum_n (contribution of n) q^n` through `q^order`, `order <= 2`,
/// from the built-in localization scenarios.
pub fn gen_type_series(p2: i64, order: i64) -> Result<QSeries, crate::scenario::ScenarioError> {
    crate::scenario::gen_type_series_in(&crate::scenario::Registry::builtin(), p2, order)
}

/// The `t = 1` value of each coefficient.
pub fn t1_coefficients(s: &QSeries) -> Result<Vec<(i64, ParamPoly)>, SeriesError> {
    s.terms().map(|(e, c)| Ok((e, c.eval_at_t1()?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    #[test]
    fn delta_leading_terms() {
        let d = delta_tilde(4).unwrap();
        assert_eq!(d.coeff(0).unwrap(), RatFunc::zero());
        assert_eq!(d.coeff(1).unwrap(), RatFunc::one());
        assert_eq!(d.coeff(2).unwrap(), r("-(20 + 2*t + 2/t)"));
        assert!(matches!(d.coeff(5), Err(SeriesError::OrderTooLow { .. })));
    }

    #[test]
    fn inverse_round_trip() {
        let d = delta_tilde(8).unwrap();
        let prod = d.mul(&d.invert().unwrap());
        assert_eq!(prod.coeff(0).unwrap(), RatFunc::one());
        for e in 1..prod.prec() {
            assert!(prod.coeff(e).unwrap().is_zero());
        }
    }

    #[test]
    fn hilb_small() {
        assert_eq!(hilb_chi(0, 1).unwrap(), RatFunc::one());
        assert_eq!(hilb_chi(1, 1).unwrap(), r("2 + 20*t + 2*t^2"));
        assert_eq!(hilb_chi(2, 2).unwrap().eval_at_t1().unwrap(), ParamPoly::from_int(324));
        assert!(matches!(hilb_chi(3, 2), Err(SeriesError::OrderTooLow { .. })));
    }

    #[test]
    fn selection_and_substitution() {
        let s = QSeries::from_coeffs(-1, (0..6).map(RatFunc::from_int).collect(), 5);
        // terms 0 q^-1 + 1 q^0 + 2 q + 3 q^2 + 4 q^3 + 5 q^4
        let sel = s.select_multiples(2);
        assert_eq!(sel.coeff(0).unwrap(), RatFunc::from_int(1));
        assert_eq!(sel.coeff(1).unwrap(), RatFunc::from_int(3));
        assert_eq!(sel.coeff(2).unwrap(), RatFunc::from_int(5));
        assert_eq!(sel.prec(), 3);
        let sub = s.substitute_q(3);
        assert_eq!(sub.coeff(3).unwrap(), RatFunc::from_int(2));
        assert!(sub.coeff(4).unwrap().is_zero());
        assert_eq!(sub.prec(), 15);
    }

    #[test]
    fn multiple_cover_examples() {
        let v = primitive_vw(1).unwrap();
        assert_eq!(multiple_cover(&v, 1).unwrap(), v);
        let two = multiple_cover(&v, 2).unwrap();
        let expect = (&hilb_chi(1, 1).unwrap().substitute_tr(2) * &RatFunc::t_pow(-2))
            .checked_div(&quantum_integer(2).pow(2).unwrap())
            .unwrap();
        assert_eq!(two, expect);
        let t1 = two.eval_at_t1().unwrap();
        assert_eq!(t1, v.eval_at_t1().unwrap().scale(&crate::scalar::q(1, 4)));
    }
}
