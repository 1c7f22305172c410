//! K-theoretic localization on a fixed-locus component, and the
//! cohomological Euler-class computation it must agree with at `t = 1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::cohring::{chern_from_ch, todd_from_tangent_ch, CohClass, CohError, CohRing};
use crate::eqkth::{to_rat, AtomKind, EqKClass, KError};
use crate::scalar::{q, HalfLaurent, ParamPoly, RatFunc, ScalarError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalizeError {
    #[error("virtual normal bundle has an atom of weight 0")]
    ZeroWeightDenominator,
    #[error("Euler-class integral still depends on the equivariant parameter: {0}")]
    ResidualTau(String),
    #[error("numerator, normal bundle and tangent class live on different rings")]
    RingMismatch,
    #[error(transparent)]
    K(#[from] KError),
    #[error(transparent)]
    Coh(#[from] CohError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// All localization input for one connected fixed component.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedLocusData {
    pub base: Arc<CohRing>,
    /// The twisted virtual structure sheaf restricted to the component.
    pub numerator: EqKClass,
    /// The virtual normal bundle (not its dual).
    pub nvir: EqKClass,
    /// Chern character of the component's tangent bundle.
    pub tangent_ch: CohClass<ParamPoly>,
    pub tangent_rank: i64,
    pub prefactor: RatFunc,
}

impl FixedLocusData {
    fn validate(&self) -> Result<(), LocalizeError> {
        let same = |r: &Arc<CohRing>| Arc::ptr_eq(r, &self.base) || **r == *self.base;
        if !same(self.numerator.ring()) || !same(self.nvir.ring()) || !same(self.tangent_ch.ring()) {
            return Err(LocalizeError::RingMismatch);
        }
        if self.nvir.atoms().iter().any(|a| a.weight == 0) {
            return Err(LocalizeError::ZeroWeightDenominator);
        }
        Ok(())
    }
}

/// `prefactor * int ch(numerator) / ch(Lambda_{-1} nvir^dual) * Td(T)`.
pub fn chi_t(data: &FixedLocusData) -> Result<RatFunc, LocalizeError> {
    data.validate()?;
    let ring = &data.base;
    let lam = data.nvir.dual().lambda_minus_one()?;
    let inv = lam.invert_unit().map_err(|_| LocalizeError::ZeroWeightDenominator)?;
    let td = to_rat(&todd_from_tangent_ch(&data.tangent_ch, data.tangent_rank)?);
    let integrand = data.numerator.ch().mul(&inv).mul(&td);
    debug_assert!(Arc::ptr_eq(integrand.ring(), ring) || **integrand.ring() == **ring);
    Ok(&integrand.integrate() * &data.prefactor)
}

/// `prefactor(1) * int 1/e(nvir)`, with the equivariant parameter adjoined
/// as a Laurent variable and checked to drop out.
pub fn euler_oracle(data: &FixedLocusData) -> Result<ParamPoly, LocalizeError> {
    data.validate()?;
    let ring = &data.base;
    let tau = |w: i64| HalfLaurent::monomial(1, ParamPoly::constant(q(w, 2)));
    let lift = |c: &CohClass<ParamPoly>| c.map(|p| HalfLaurent::constant(p.clone()));
    let mut acc = CohClass::<HalfLaurent>::one(ring);
    for a in data.nvir.atoms() {
        let wt = CohClass::scalar(ring, tau(a.weight));
        let e = match &a.kind {
            AtomKind::Line { c1 } => lift(c1).add(&wt),
            AtomKind::Trivial => wt,
            AtomKind::Rank2 { ch, .. } => {
                let (c1, c2) = chern_from_ch(ch)?;
                lift(&c2).add(&lift(&c1).mul(&wt)).add(&wt.mul(&wt))
            }
        };
        let factor = if a.sign > 0 {
            e.invert_unit().map_err(|_| LocalizeError::ZeroWeightDenominator)?
        } else {
            e
        };
        acc = acc.mul(&factor);
    }
    let total = acc.integrate();
    let value = total
        .as_constant()
        .ok_or_else(|| LocalizeError::ResidualTau(format!("{total:?}")))?;
    Ok(&value * &data.prefactor.eval_at_t1()?)
}

/// True iff `f` is invariant under `t^(1/2) -> t^(-1/2)`.
pub fn check_symmetry(f: &RatFunc) -> bool {
    f.is_symmetric()
}

/// Where a canonical rational function can have poles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoleReport {
    /// Multiplicity of each cyclotomic factor `Phi_m(s)` in the denominator.
    pub cyclotomic: BTreeMap<usize, usize>,
    /// Whether the denominator is, up to a constant, a product of cyclotomic factors.
    pub roots_of_unity_only: bool,
    /// Pole at `s = 0` (a negative power of `s` in lowest terms).
    pub origin_pole: bool,
    /// Pole at `s = 1`, i.e. at `t = 1`.
    pub pole_at_one: bool,
}

impl PoleReport {
    /// The pole-location property: roots of unity and the origin only, never `t = 1`.
    pub fn ok(&self) -> bool {
        self.roots_of_unity_only && !self.pole_at_one
    }
}

pub fn pole_structure(f: &RatFunc) -> PoleReport {
    let (cyclotomic, rest) = f.denominator_factors();
    PoleReport {
        roots_of_unity_only: rest.degree() == 0,
        pole_at_one: cyclotomic.contains_key(&1),
        origin_pole: f.numerator().min_exp().is_some_and(|e| e < 0),
        cyclotomic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqkth::Atom;

    #[test]
    fn empty_point_data() {
        let p = CohRing::point();
        let data = FixedLocusData {
            base: p.clone(),
            numerator: EqKClass::new(&p, vec![Atom::trivial(0)]),
            nvir: EqKClass::zero(&p),
            tangent_ch: CohClass::zero(&p),
            tangent_rank: 0,
            prefactor: RatFunc::one(),
        };
        assert_eq!(chi_t(&data).unwrap(), RatFunc::one());
        assert_eq!(euler_oracle(&data).unwrap(), ParamPoly::one());
    }

    #[test]
    fn one_trivial_direction() {
        // numerator t^{1/2}... a single normal direction of weight 1 on a point,
        // with the twist s^{-1}: s^{-1}/(1 - s^{-2}) = 1/(s - s^{-1}) is antisymmetric
        let p = CohRing::point();
        let data = FixedLocusData {
            base: p.clone(),
            numerator: EqKClass::new(&p, vec![Atom::trivial(-1)]),
            nvir: EqKClass::new(&p, vec![Atom::trivial(2)]),
            tangent_ch: CohClass::zero(&p),
            tangent_rank: 0,
            prefactor: RatFunc::one(),
        };
        let f = chi_t(&data).unwrap();
        assert_eq!(f, "1/(s - s^-1)".parse().unwrap());
        assert!(pole_structure(&f).pole_at_one);
        assert!(matches!(euler_oracle(&data), Err(LocalizeError::ResidualTau(_))));
    }

    #[test]
    fn zero_weight_rejected() {
        let p = CohRing::point();
        let data = FixedLocusData {
            base: p.clone(),
            numerator: EqKClass::zero(&p),
            nvir: EqKClass::new(&p, vec![Atom::trivial(0)]),
            tangent_ch: CohClass::zero(&p),
            tangent_rank: 0,
            prefactor: RatFunc::one(),
        };
        assert_eq!(chi_t(&data), Err(LocalizeError::ZeroWeightDenominator));
    }

    #[test]
    fn symmetry_and_poles() {
        let f: RatFunc = "(-1)/qint(2)".parse().unwrap();
        assert!(check_symmetry(&f));
        assert!(!check_symmetry(&RatFunc::s_pow(1)));
        let rep = pole_structure(&f);
        assert!(rep.ok());
        assert_eq!(rep.cyclotomic.get(&4), Some(&1));
        assert!(!rep.origin_pole);
        assert!(pole_structure(&RatFunc::s_pow(-3)).origin_pole);
    }
}
