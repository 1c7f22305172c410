//! Torus-equivariant K-theory classes on a fixed locus, as signed sums of
//! weighted line, rank-2 and trivial atoms.

use std::sync::Arc;

use crate::cohring::{CohClass, CohError, CohRing};
use crate::scalar::{ParamPoly, RatFunc};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KError {
    #[error("atom of weight 0 in a factor that must be inverted")]
    ZeroWeightDenominator,
    #[error("rank-2 atom needs a Chern character of rank 2")]
    BadRank2,
    #[error(transparent)]
    Coh(#[from] CohError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomKind {
    Line { c1: CohClass<ParamPoly> },
    Rank2 { ch: CohClass<ParamPoly>, det_c1: CohClass<ParamPoly> },
    Trivial,
}

/// `sign * (bundle) * s^weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub kind: AtomKind,
    /// Exponent of `s = t^(1/2)`, twice the torus weight.
    pub weight: i64,
    pub sign: i8,
}

impl Atom {
    pub fn line(c1: CohClass<ParamPoly>, weight: i64) -> Atom {
        Atom { kind: AtomKind::Line { c1 }, weight, sign: 1 }
    }

    pub fn rank2(ch: CohClass<ParamPoly>, det_c1: CohClass<ParamPoly>, weight: i64) -> Result<Atom, KError> {
        if ch.degree0() != &ParamPoly::from_int(2) {
            return Err(KError::BadRank2);
        }
        Ok(Atom { kind: AtomKind::Rank2 { ch, det_c1 }, weight, sign: 1 })
    }

    pub fn trivial(weight: i64) -> Atom {
        Atom { kind: AtomKind::Trivial, weight, sign: 1 }
    }

    pub fn negated(mut self) -> Atom {
        self.sign = -self.sign;
        self
    }

    pub fn rank(&self) -> i64 {
        match self.kind {
            AtomKind::Rank2 { .. } => 2,
            _ => 1,
        }
    }

    /// First Chern class of the underlying bundle (its determinant).
    pub fn c1(&self, ring: &Arc<CohRing>) -> CohClass<ParamPoly> {
        match &self.kind {
            AtomKind::Line { c1 } => c1.clone(),
            AtomKind::Rank2 { det_c1, .. } => det_c1.clone(),
            AtomKind::Trivial => CohClass::zero(ring),
        }
    }

    /// Non-equivariant Chern character of the underlying bundle.
    pub fn bundle_ch(&self, ring: &Arc<CohRing>) -> CohClass<ParamPoly> {
        match &self.kind {
            AtomKind::Line { c1 } => c1.exp_class().expect("c1 has no degree-0 part"),
            AtomKind::Rank2 { ch, .. } => ch.clone(),
            AtomKind::Trivial => CohClass::one(ring),
        }
    }

    fn dual(&self) -> Atom {
        let kind = match &self.kind {
            AtomKind::Line { c1 } => AtomKind::Line { c1: c1.neg() },
            AtomKind::Rank2 { ch, det_c1 } => AtomKind::Rank2 {
                ch: ch.sub(&ch.degree_part(2).scale(&ParamPoly::from_int(2))),
                det_c1: det_c1.neg(),
            },
            AtomKind::Trivial => AtomKind::Trivial,
        };
        Atom { kind, weight: -self.weight, sign: self.sign }
    }

    /// `Lambda_{-1}` of the positive atom: `1 - s^e ch + s^{2e} det` (rank 2) or `1 - s^e ch`.
    fn lambda_factor(&self, ring: &Arc<CohRing>) -> CohClass<RatFunc> {
        let one = CohClass::<RatFunc>::one(ring);
        let se = RatFunc::s_pow(self.weight);
        let ch = to_rat(&self.bundle_ch(ring)).scale(&se);
        let mut f = one.sub(&ch);
        if let AtomKind::Rank2 { det_c1, .. } = &self.kind {
            let det = to_rat(&det_c1.exp_class().expect("det has no degree-0 part"));
            f = f.add(&det.scale(&RatFunc::s_pow(2 * self.weight)));
        }
        f
    }
}

pub(crate) fn to_rat(c: &CohClass<ParamPoly>) -> CohClass<RatFunc> {
    c.map(|p| RatFunc::from_param(p.clone()))
}

/// A signed sum of [`Atom`]s over one ring.
#[derive(Debug, Clone, PartialEq)]
pub struct EqKClass {
    ring: Arc<CohRing>,
    atoms: Vec<Atom>,
}

impl EqKClass {
    pub fn new(ring: &Arc<CohRing>, atoms: Vec<Atom>) -> Self {
        EqKClass { ring: ring.clone(), atoms }
    }

    pub fn zero(ring: &Arc<CohRing>) -> Self {
        EqKClass::new(ring, Vec::new())
    }

    pub fn ring(&self) -> &Arc<CohRing> {
        &self.ring
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn push(&mut self, atom: Atom) {
        self.atoms.push(atom);
    }

    pub fn rank(&self) -> i64 {
        self.atoms.iter().map(|a| a.sign as i64 * a.rank()).sum()
    }

    pub fn plus(&self, other: &EqKClass) -> EqKClass {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        EqKClass::new(&self.ring, atoms)
    }

    pub fn negated(&self) -> EqKClass {
        EqKClass::new(&self.ring, self.atoms.iter().cloned().map(Atom::negated).collect())
    }

    /// Tensors every atom by `s^k`.
    pub fn shifted(&self, k: i64) -> EqKClass {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { weight: a.weight + k, ..a.clone() })
            .collect();
        EqKClass::new(&self.ring, atoms)
    }

    pub fn dual(&self) -> EqKClass {
        EqKClass::new(&self.ring, self.atoms.iter().map(Atom::dual).collect())
    }

    /// Equivariant Chern character.
    pub fn ch(&self) -> CohClass<RatFunc> {
        let mut out = CohClass::zero(&self.ring);
        for a in &self.atoms {
            let term = to_rat(&a.bundle_ch(&self.ring)).scale(&RatFunc::s_pow(a.weight));
            out = if a.sign > 0 { out.add(&term) } else { out.sub(&term) };
        }
        out
    }

    /// `ch(Lambda_{-1} x) = ch(sum_i (-1)^i Lambda^i x)`, multiplicative over atoms.
    pub fn lambda_minus_one(&self) -> Result<CohClass<RatFunc>, KError> {
        let mut out = CohClass::one(&self.ring);
        for a in &self.atoms {
            let f = a.lambda_factor(&self.ring);
            let f = if a.sign > 0 {
                f
            } else {
                f.invert_unit().map_err(|_| KError::ZeroWeightDenominator)?
            };
            out = out.mul(&f);
        }
        Ok(out)
    }

    /// Determinant: first Chern class and `s`-exponent of `det x`.
    pub fn det(&self) -> (CohClass<ParamPoly>, i64) {
        let mut c1 = CohClass::zero(&self.ring);
        let mut e = 0;
        for a in &self.atoms {
            let s = a.sign as i64;
            let ac = a.c1(&self.ring);
            c1 = if s > 0 { c1.add(&ac) } else { c1.sub(&ac) };
            e += s * a.rank() * a.weight;
        }
        (c1, e)
    }

    /// The canonical square root `det(x^{>=0}) t^{r/2}` of `det x`, where
    /// `x^{>=0}` keeps atoms of nonnegative weight and `r` is its rank.
    pub fn sqrt_kvir(&self) -> (CohClass<ParamPoly>, i64) {
        let nonneg: Vec<Atom> = self.atoms.iter().filter(|a| a.weight >= 0).cloned().collect();
        let part = EqKClass::new(&self.ring, nonneg);
        let (c1, e) = part.det();
        (c1, e + part.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohring::parse_class;
    use crate::expr::Bindings;
    use crate::scalar::{Param, ParamPoly};

    fn cls(ring: &Arc<CohRing>, s: &str) -> CohClass<ParamPoly> {
        parse_class(ring, s, &Bindings::new()).unwrap()
    }

    fn surface() -> Arc<CohRing> {
        CohRing::surface(ParamPoly::var(Param::G))
    }

    fn omega(ring: &Arc<CohRing>, weight: i64) -> Atom {
        Atom::rank2(cls(ring, "2 + K + (K^2 - 2*c2*vol)/2"), cls(ring, "K"), weight).unwrap()
    }

    #[test]
    fn ch_examples() {
        let p = CohRing::point();
        let t = EqKClass::new(&p, vec![Atom::trivial(2)]);
        assert_eq!(t.ch(), CohClass::scalar(&p, RatFunc::s_pow(2)));
        let c = CohRing::curve(ParamPoly::var(Param::G));
        let l = EqKClass::new(&c, vec![Atom::line(cls(&c, "-k"), -2)]);
        assert_eq!(l.ch(), to_rat(&cls(&c, "1 - k")).scale(&RatFunc::s_pow(-2)));
    }

    #[test]
    fn lambda_examples() {
        let p = CohRing::point();
        assert_eq!(EqKClass::zero(&p).lambda_minus_one().unwrap(), CohClass::one(&p));
        let x = EqKClass::new(&p, vec![Atom::trivial(-4)]);
        let expect = RatFunc::one() - RatFunc::s_pow(-4);
        assert_eq!(x.lambda_minus_one().unwrap(), CohClass::scalar(&p, expect));
        let s = surface();
        let x = EqKClass::new(&s, vec![omega(&s, 4)]);
        let ch_om = to_rat(&cls(&s, "2 + K + (K^2 - 2*c2*vol)/2"));
        let expect = CohClass::one(&s)
            .sub(&ch_om.scale(&RatFunc::s_pow(4)))
            .add(&to_rat(&cls(&s, "exp(K)")).scale(&RatFunc::s_pow(8)));
        assert_eq!(x.lambda_minus_one().unwrap(), expect);
    }

    #[test]
    fn zero_weight_inversion_rejected() {
        let p = CohRing::point();
        let x = EqKClass::new(&p, vec![Atom::trivial(0).negated()]);
        assert_eq!(x.lambda_minus_one(), Err(KError::ZeroWeightDenominator));
    }

    #[test]
    fn dual_of_line_and_rank2() {
        let s = surface();
        let l = EqKClass::new(&s, vec![Atom::line(cls(&s, "2*K"), 2)]);
        assert_eq!(l.dual(), EqKClass::new(&s, vec![Atom::line(cls(&s, "-2*K"), -2)]));
        let r = EqKClass::new(&s, vec![omega(&s, 2)]);
        let d = r.dual();
        let AtomKind::Rank2 { ch, det_c1 } = &d.atoms()[0].kind else { panic!() };
        assert_eq!(ch, &cls(&s, "2 - K + (K^2 - 2*c2*vol)/2"));
        assert_eq!(det_c1, &cls(&s, "-K"));
        assert_eq!(d.dual(), r);
    }

    #[test]
    fn sqrt_of_shifted_cotangent() {
        // Omega_F - T_F t^{-1} on a curve F, d = 1
        let c = CohRing::curve(ParamPoly::var(Param::G));
        let x = EqKClass::new(&c, vec![Atom::line(cls(&c, "k"), 0), Atom::line(cls(&c, "-k"), -2).negated()]);
        assert_eq!(x.sqrt_kvir(), (cls(&c, "k"), 1));
        let (c1, e) = x.det();
        assert_eq!((c1, e), (cls(&c, "2*k"), 2));
        assert_eq!(EqKClass::zero(&c).sqrt_kvir(), (CohClass::zero(&c), 0));
    }
}
