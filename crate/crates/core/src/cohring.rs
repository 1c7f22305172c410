//! Truncated even cohomology rings of small complex dimension, with
//! integration, exponentials and Todd classes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{eval_int, Bindings, Env, Expr, ExprError};
use crate::scalar::{HalfLaurent, Param, ParamPoly, RatFunc, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohError {
    #[error("classes belong to different rings ({0} vs {1})")]
    RingMismatch(String, String),
    #[error("exp needs a class with zero degree-0 part")]
    NonNilpotent,
    #[error("degree-0 part is not invertible")]
    NotInvertible,
    #[error("Todd class is only implemented up to complex dimension 2, ring has {0}")]
    DimensionTooLarge(u8),
    #[error("Chern character has degree-0 part {found}, expected rank {rank}")]
    RankMismatch { rank: i64, found: String },
    #[error("invalid ring definition: {0}")]
    InvalidRing(String),
    #[error("unknown ring `{0}`")]
    UnknownRing(String),
}

/// Coefficients a [`CohClass`] can carry.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_param(p: &ParamPoly) -> Self;
    fn try_inv(&self) -> Option<Self>;

    fn from_q(q: Q) -> Self {
        Self::from_param(&ParamPoly::constant(q))
    }
}

impl Coeff for ParamPoly {
    fn zero() -> Self {
        ParamPoly::zero()
    }
    fn one() -> Self {
        ParamPoly::one()
    }
    fn is_zero(&self) -> bool {
        ParamPoly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_param(p: &ParamPoly) -> Self {
        p.clone()
    }
    fn try_inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        (!num_traits::Zero::is_zero(&c)).then(|| ParamPoly::constant(c.recip()))
    }
}

impl Coeff for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_param(p: &ParamPoly) -> Self {
        RatFunc::from_param(p.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        self.checked_inv().ok()
    }
}

/// Laurent polynomials invert only when they are a single monomial with a
/// constant coefficient.
impl Coeff for HalfLaurent {
    fn zero() -> Self {
        HalfLaurent::zero()
    }
    fn one() -> Self {
        HalfLaurent::one()
    }
    fn is_zero(&self) -> bool {
        HalfLaurent::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_param(p: &ParamPoly) -> Self {
        HalfLaurent::constant(p.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        if self.num_terms() != 1 {
            return None;
        }
        let (e, c) = self.terms().next()?;
        let inv = c.try_inv()?;
        Some(HalfLaurent::monomial(-e, inv))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElem {
    pub name: String,
    /// Real cohomological degree: 0, 2 or 4.
    pub degree: u8,
}

/// A finite-dimensional commutative graded ring with an integration functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohRing {
    name: String,
    complex_dim: u8,
    basis: Vec<BasisElem>,
    mult: Vec<Vec<Vec<ParamPoly>>>,
    integral: Vec<ParamPoly>,
    aliases: Vec<(String, ParamPoly)>,
}

impl CohRing {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn complex_dim(&self) -> u8 {
        self.complex_dim
    }

    pub fn basis(&self) -> &[BasisElem] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    /// Named parameter-polynomial constants such as `chi = 2 - 2*g`.
    pub fn alias(&self, name: &str) -> Option<&ParamPoly> {
        self.aliases.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Structure constants: `e_i * e_j = sum_k product(i, j)[k] e_k`.
    pub fn product(&self, i: usize, j: usize) -> &[ParamPoly] {
        &self.mult[i][j]
    }

    pub fn integral_weight(&self, i: usize) -> &ParamPoly {
        &self.integral[i]
    }

    /// A single point.
    pub fn point() -> Arc<CohRing> {
        RingBuilder::new("point", 0).integral("1", ParamPoly::one()).build().expect("valid")
    }

    /// A curve of genus `genus` with `k = c1(K_C)`, `int k = 2g - 2`.
    pub fn curve(genus: ParamPoly) -> Arc<CohRing> {
        let deg_k = &(&genus * &ParamPoly::from_int(2)) - &ParamPoly::from_int(2);
        RingBuilder::new("curve", 1)
            .elem("k", 2)
            .integral("k", deg_k)
            .alias("chi", &ParamPoly::from_int(2) - &(&genus * &ParamPoly::from_int(2)))
            .build()
            .expect("valid")
    }

    /// The subring of `H^*(C x C)` generated by `a = k x 1`, `b = 1 x k`,
    /// the diagonal `D` and the point class `vol`.
    pub fn cxc(genus: ParamPoly) -> Arc<CohRing> {
        let chi = &ParamPoly::from_int(2) - &(&genus * &ParamPoly::from_int(2));
        let one = ParamPoly::one();
        RingBuilder::new("cxc", 2)
            .elem("a", 2)
            .elem("b", 2)
            .elem("D", 2)
            .elem("vol", 4)
            .product("a", "b", "vol", &chi * &chi)
            .product("a", "D", "vol", -&chi)
            .product("b", "D", "vol", -&chi)
            .product("D", "D", "vol", chi.clone())
            .integral("vol", one)
            .alias("chi", chi)
            .build()
            .expect("valid")
    }

    /// A surface with `K = c1(K_S)`, `K^2 = g - 1` and point class `vol`.
    pub fn surface(genus: ParamPoly) -> Arc<CohRing> {
        RingBuilder::new("surface", 2)
            .elem("K", 2)
            .elem("vol", 4)
            .product("K", "K", "vol", &genus - &ParamPoly::one())
            .integral("vol", ParamPoly::one())
            .build()
            .expect("valid")
    }

    /// Looks up a built-in ring by name, with symbolic genus `g` unless
    /// `genus` is given.
    pub fn builtin(name: &str, genus: Option<ParamPoly>) -> Result<Arc<CohRing>, CohError> {
        let g = genus.unwrap_or_else(|| ParamPoly::var(Param::G));
        match name {
            "point" => Ok(CohRing::point()),
            "curve" => Ok(CohRing::curve(g)),
            "cxc" => Ok(CohRing::cxc(g)),
            "surface" => Ok(CohRing::surface(g)),
            _ => Err(CohError::UnknownRing(name.to_string())),
        }
    }

    /// Parses a ring from its TOML description.
    pub fn from_toml(src: &str) -> Result<Arc<CohRing>, CohError> {
        let def: RingDef = toml::from_str(src).map_err(|e| CohError::InvalidRing(e.to_string()))?;
        def.build()
    }

    fn check(&self) -> Result<(), CohError> {
        let bad = |m: String| Err(CohError::InvalidRing(m));
        let n = self.dim();
        if self.basis.first().map(|b| (b.name.as_str(), b.degree)) != Some(("1", 0)) {
            return bad("first basis element must be the unit `1` of degree 0".into());
        }
        let top = 2 * self.complex_dim;
        for b in &self.basis {
            if b.degree % 2 != 0 || b.degree > top {
                return bad(format!("`{}` has degree {} outside 0..={top} or odd", b.name, b.degree));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if self.mult[i][j] != self.mult[j][i] {
                    return bad(format!("product {}*{} is not commutative", self.basis[i].name, self.basis[j].name));
                }
                let d = self.basis[i].degree + self.basis[j].degree;
                for (k, c) in self.mult[i][j].iter().enumerate() {
                    if !c.is_zero() && self.basis[k].degree != d {
                        return bad(format!(
                            "product {}*{} has a component in `{}` of the wrong degree",
                            self.basis[i].name, self.basis[j].name, self.basis[k].name
                        ));
                    }
                }
            }
        }
        for i in 0..n {
            let mut e = vec![ParamPoly::zero(); n];
            e[i] = ParamPoly::one();
            if self.mult[0][i] != e {
                return bad(format!("`1` is not a unit for `{}`", self.basis[i].name));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.mul_vec(&self.mult[i][j], &unit_vec(n, k));
                    let rhs = self.mul_vec(&unit_vec(n, i), &self.mult[j][k]);
                    if lhs != rhs {
                        return bad(format!(
                            "product is not associative on ({}, {}, {})",
                            self.basis[i].name, self.basis[j].name, self.basis[k].name
                        ));
                    }
                }
            }
        }
        for (i, w) in self.integral.iter().enumerate() {
            if !w.is_zero() && self.basis[i].degree != top {
                return bad(format!("integral is nonzero on `{}` below top degree", self.basis[i].name));
            }
        }
        Ok(())
    }

    fn mul_vec(&self, x: &[ParamPoly], y: &[ParamPoly]) -> Vec<ParamPoly> {
        let n = self.dim();
        let mut out = vec![ParamPoly::zero(); n];
        for (i, xi) in x.iter().enumerate().take(n) {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate().take(n) {
                if yj.is_zero() {
                    continue;
                }
                let xy = xi * yj;
                for (k, c) in self.mult[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k].add_assign_ref(&(&xy * c));
                    }
                }
            }
        }
        out
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<ParamPoly> {
    let mut v = vec![ParamPoly::zero(); n];
    v[i] = ParamPoly::one();
    v
}

/// Incremental construction of a [`CohRing`]; products with `1` are implicit
/// and every product not listed is zero.
pub struct RingBuilder {
    name: String,
    complex_dim: u8,
    basis: Vec<BasisElem>,
    products: Vec<(String, String, String, ParamPoly)>,
    integral: Vec<(String, ParamPoly)>,
    aliases: Vec<(String, ParamPoly)>,
}

impl RingBuilder {
    pub fn new(name: &str, complex_dim: u8) -> Self {
        RingBuilder {
            name: name.to_string(),
            complex_dim,
            basis: vec![BasisElem { name: "1".into(), degree: 0 }],
            products: Vec::new(),
            integral: Vec::new(),
            aliases: Vec::new(),
        }
    }

    pub fn elem(mut self, name: &str, degree: u8) -> Self {
        self.basis.push(BasisElem { name: name.to_string(), degree });
        self
    }

    /// Records `left * right = coeff * target`; the symmetric entry is implied.
    pub fn product(mut self, left: &str, right: &str, target: &str, coeff: ParamPoly) -> Self {
        self.products.push((left.into(), right.into(), target.into(), coeff));
        self
    }

    pub fn integral(mut self, name: &str, weight: ParamPoly) -> Self {
        self.integral.push((name.into(), weight));
        self
    }

    pub fn alias(mut self, name: &str, value: ParamPoly) -> Self {
        self.aliases.push((name.into(), value));
        self
    }

    pub fn build(self) -> Result<Arc<CohRing>, CohError> {
        let n = self.basis.len();
        let idx = |name: &str| {
            self.basis
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| CohError::InvalidRing(format!("unknown basis element `{name}`")))
        };
        for (i, b) in self.basis.iter().enumerate() {
            if self.basis[..i].iter().any(|o| o.name == b.name) {
                return Err(CohError::InvalidRing(format!("duplicate basis element `{}`", b.name)));
            }
        }
        let mut mult = vec![vec![vec![ParamPoly::zero(); n]; n]; n];
        for (i, slot) in mult[0].iter_mut().enumerate() {
            *slot = unit_vec(n, i);
        }
        for (i, row) in mult.iter_mut().enumerate() {
            row[0] = unit_vec(n, i);
        }
        let mut seen = BTreeMap::new();
        for (l, r, t, c) in &self.products {
            let (i, j, k) = (idx(l)?, idx(r)?, idx(t)?);
            if i == 0 || j == 0 {
                return Err(CohError::InvalidRing("products with `1` are implicit".into()));
            }
            let key = (i.min(j), i.max(j), k);
            if seen.insert(key, ()).is_some() {
                return Err(CohError::InvalidRing(format!("product {l}*{r} -> {t} given twice")));
            }
            mult[i][j][k].add_assign_ref(c);
            if i != j {
                mult[j][i][k].add_assign_ref(c);
            }
        }
        let mut integral = vec![ParamPoly::zero(); n];
        for (name, w) in &self.integral {
            integral[idx(name)?] = w.clone();
        }
        let ring = CohRing {
            name: self.name,
            complex_dim: self.complex_dim,
            basis: self.basis,
            mult,
            integral,
            aliases: self.aliases,
        };
        ring.check()?;
        Ok(Arc::new(ring))
    }
}

/// Declarative ring description.
///
/// ```toml
/// name = "curve"
/// complex_dim = 1
/// basis = [{ name = "k", degree = 2 }]
/// integral = { k = "2*g - 2" }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingDef {
    pub name: String,
    pub complex_dim: u8,
    /// Basis elements other than the unit.
    #[serde(default)]
    pub basis: Vec<BasisElem>,
    #[serde(default)]
    pub products: Vec<ProductDef>,
    #[serde(default)]
    pub integral: BTreeMap<String, String>,
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDef {
    pub left: String,
    pub right: String,
    pub target: String,
    pub coeff: String,
}

impl RingDef {
    pub fn build(&self) -> Result<Arc<CohRing>, CohError> {
        let b = Bindings::new();
        let pp = |s: &str| {
            crate::expr::parse_param(s, &b).map_err(|e| CohError::InvalidRing(format!("`{s}`: {e}")))
        };
        if self.complex_dim > 2 {
            return Err(CohError::DimensionTooLarge(self.complex_dim));
        }
        let mut rb = RingBuilder::new(&self.name, self.complex_dim);
        for e in &self.basis {
            rb = rb.elem(&e.name, e.degree);
        }
        for p in &self.products {
            rb = rb.product(&p.left, &p.right, &p.target, pp(&p.coeff)?);
        }
        for (k, v) in &self.integral {
            rb = rb.integral(k, pp(v)?);
        }
        for (k, v) in &self.aliases {
            rb = rb.alias(k, pp(v)?);
        }
        rb.build()
    }
}

/// An element of a [`CohRing`] with coefficients in `C`.
#[derive(Clone, Debug)]
pub struct CohClass<C> {
    ring: Arc<CohRing>,
    coeffs: Vec<C>,
}

impl<C: PartialEq> PartialEq for CohClass<C> {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.coeffs == other.coeffs
    }
}

fn same_ring(a: &Arc<CohRing>, b: &Arc<CohRing>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl<C: Coeff> CohClass<C> {
    pub fn zero(ring: &Arc<CohRing>) -> Self {
        CohClass { ring: ring.clone(), coeffs: vec![C::zero(); ring.dim()] }
    }

    pub fn one(ring: &Arc<CohRing>) -> Self {
        CohClass::scalar(ring, C::one())
    }

    pub fn scalar(ring: &Arc<CohRing>, c: C) -> Self {
        let mut out = CohClass::zero(ring);
        out.coeffs[0] = c;
        out
    }

    /// The basis element called `name`.
    pub fn generator(ring: &Arc<CohRing>, name: &str) -> Option<Self> {
        let i = ring.index_of(name)?;
        let mut out = CohClass::zero(ring);
        out.coeffs[i] = C::one();
        Some(out)
    }

    pub fn from_coeffs(ring: &Arc<CohRing>, coeffs: Vec<C>) -> Self {
        assert_eq!(coeffs.len(), ring.dim(), "coefficient count must match the ring");
        CohClass { ring: ring.clone(), coeffs }
    }

    pub fn ring(&self) -> &Arc<CohRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, name: &str) -> Option<&C> {
        self.ring.index_of(name).map(|i| &self.coeffs[i])
    }

    pub fn degree0(&self) -> &C {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    /// The homogeneous piece of real degree `d`.
    pub fn degree_part(&self, d: u8) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.ring.basis())
            .map(|(c, b)| if b.degree == d { c.clone() } else { C::zero() })
            .collect();
        CohClass { ring: self.ring.clone(), coeffs }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> CohClass<D> {
        CohClass { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|a| a.mul(c))
    }

    fn check_ring(&self, other: &Self) -> Result<(), CohError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(CohError::RingMismatch(self.ring.name.clone(), other.ring.name.clone()))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CohError> {
        self.check_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(CohClass { ring: self.ring.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CohError> {
        self.check_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect();
        Ok(CohClass { ring: self.ring.clone(), coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CohError> {
        self.check_ring(other)?;
        let n = self.ring.dim();
        let mut out = vec![C::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let xy = self.coeffs[i].mul(&other.coeffs[j]);
                for (k, c) in self.ring.mult[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = out[k].add(&xy.mul(&C::from_param(c)));
                    }
                }
            }
        }
        Ok(CohClass { ring: self.ring.clone(), coeffs: out })
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("classes from the same ring")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).expect("classes from the same ring")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("classes from the same ring")
    }

    pub fn neg(&self) -> Self {
        self.map(C::neg)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = CohClass::one(&self.ring);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Applies the integration functional.
    pub fn integrate(&self) -> C {
        let mut total = C::zero();
        for (c, w) in self.coeffs.iter().zip(&self.ring.integral) {
            if !w.is_zero() && !c.is_zero() {
                total = total.add(&c.mul(&C::from_param(w)));
            }
        }
        total
    }

    /// Truncated exponential of a class with zero degree-0 part.
    pub fn exp_class(&self) -> Result<Self, CohError> {
        if !self.degree0().is_zero() {
            return Err(CohError::NonNilpotent);
        }
        let mut out = CohClass::one(&self.ring);
        let mut term = CohClass::one(&self.ring);
        for k in 1..=self.ring.complex_dim as i64 {
            term = term.mul(self).scale(&C::from_q(Q::new(1.into(), k.into())));
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Inverse of a class with invertible degree-0 part, by a finite
    /// geometric series in the nilpotent remainder.
    pub fn invert_unit(&self) -> Result<Self, CohError> {
        let c0 = self.degree0();
        let inv0 = c0.try_inv().ok_or(CohError::NotInvertible)?;
        // x = c0 (1 + n) with n nilpotent
        let mut n = self.scale(&inv0);
        n.coeffs[0] = C::zero();
        let mut out = CohClass::one(&self.ring);
        let mut term = CohClass::one(&self.ring);
        for _ in 0..self.ring.complex_dim {
            term = term.mul(&n).neg();
            out = out.add(&term);
        }
        Ok(out.scale(&inv0))
    }
}

/// Chern classes `(c1, c2)` of a Chern character, in complex dimension at most 2.
pub fn chern_from_ch<C: Coeff>(ch: &CohClass<C>) -> Result<(CohClass<C>, CohClass<C>), CohError> {
    let dim = ch.ring().complex_dim();
    if dim > 2 {
        return Err(CohError::DimensionTooLarge(dim));
    }
    let c1 = ch.degree_part(2);
    let ch2 = ch.degree_part(4);
    let c2 = c1.mul(&c1).sub(&ch2.scale(&C::from_q(Q::from_integer(2.into()))));
    let c2 = c2.scale(&C::from_q(Q::new(1.into(), 2.into())));
    Ok((c1, c2))
}

/// `Td = 1 + c1/2 + (c1^2 + c2)/12` from the Chern character of a bundle of rank `rank`.
pub fn todd_from_tangent_ch<C: Coeff>(ch_t: &CohClass<C>, rank: i64) -> Result<CohClass<C>, CohError> {
    if ch_t.degree0() != &C::from_q(Q::from_integer(rank.into())) {
        return Err(CohError::RankMismatch { rank, found: format!("{:?}", ch_t.degree0()) });
    }
    let (c1, c2) = chern_from_ch(ch_t)?;
    let ring = ch_t.ring();
    let half = C::from_q(Q::new(1.into(), 2.into()));
    let twelfth = C::from_q(Q::new(1.into(), 12.into()));
    let td = CohClass::one(ring)
        .add(&c1.scale(&half))
        .add(&c1.mul(&c1).add(&c2).scale(&twelfth));
    Ok(td)
}

impl<C: Coeff + fmt::Display> fmt::Display for CohClass<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, b) in self.coeffs.iter().zip(self.ring.basis()) {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if b.name == "1" {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", b.name)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Evaluates class literals such as `3/2*a + 3/2*b - D` or `exp(-K)*(2 - K)`.
pub struct ClassEnv<'a> {
    pub ring: &'a Arc<CohRing>,
    pub bindings: &'a Bindings,
}

impl Env for ClassEnv<'_> {
    type V = CohClass<ParamPoly>;

    fn bindings(&self) -> &Bindings {
        self.bindings
    }
    fn constant(&self, q: Q) -> Result<Self::V, ExprError> {
        Ok(CohClass::scalar(self.ring, ParamPoly::constant(q)))
    }
    fn var(&self, name: &str) -> Result<Self::V, ExprError> {
        if name != "1" {
            if let Some(c) = CohClass::generator(self.ring, name) {
                return Ok(c);
            }
        }
        if let Some(v) = self.ring.alias(name) {
            return Ok(CohClass::scalar(self.ring, v.clone()));
        }
        if let Some(p) = Param::lookup(name) {
            return Ok(CohClass::scalar(self.ring, ParamPoly::var(p)));
        }
        if let Some(v) = self.bindings.get(name) {
            return Ok(CohClass::scalar(self.ring, ParamPoly::from_int(*v)));
        }
        Err(ExprError::UnknownSymbol(name.to_string()))
    }
    fn add(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError> {
        Ok(a.add(&b))
    }
    fn sub(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError> {
        Ok(a.sub(&b))
    }
    fn mul(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError> {
        Ok(a.mul(&b))
    }
    fn div(&self, a: Self::V, b: Self::V) -> Result<Self::V, ExprError> {
        let inv = b.invert_unit().map_err(|e| ExprError::Eval(e.to_string()))?;
        Ok(a.mul(&inv))
    }
    fn neg(&self, a: Self::V) -> Result<Self::V, ExprError> {
        Ok(a.neg())
    }
    fn powi(&self, a: Self::V, n: i64) -> Result<Self::V, ExprError> {
        if n >= 0 {
            return Ok(a.pow(n as u32));
        }
        let inv = a.invert_unit().map_err(|e| ExprError::Eval(e.to_string()))?;
        Ok(inv.pow(n.unsigned_abs() as u32))
    }
    fn call(&self, name: &str, args: &[Expr]) -> Result<Self::V, ExprError> {
        match (name, args) {
            ("exp", [x]) => self.eval(x)?.exp_class().map_err(|e| ExprError::Eval(e.to_string())),
            ("exp", _) => Err(ExprError::Arity { name: name.into(), expected: 1 }),
            _ => Err(ExprError::UnknownFunction(name.to_string())),
        }
    }
}

/// Parses a class literal over `ring`.
pub fn parse_class(ring: &Arc<CohRing>, src: &str, bindings: &Bindings) -> Result<CohClass<ParamPoly>, ExprError> {
    ClassEnv { ring, bindings }.eval(&Expr::parse(src)?)
}

/// Integer-valued helper re-exported for scenario code.
pub fn eval_int_expr(src: &str, bindings: &Bindings) -> Result<i64, ExprError> {
    eval_int(&Expr::parse(src)?, bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn g() -> ParamPoly {
        ParamPoly::var(Param::G)
    }

    fn chi() -> ParamPoly {
        &ParamPoly::from_int(2) - &g().scale(&q(2, 1))
    }

    fn cls(ring: &Arc<CohRing>, s: &str) -> CohClass<ParamPoly> {
        parse_class(ring, s, &Bindings::new()).unwrap()
    }

    #[test]
    fn builtin_integrals() {
        let c = CohRing::curve(g());
        assert_eq!(cls(&c, "k").integrate(), &g().scale(&q(2, 1)) - &ParamPoly::from_int(2));
        let x = CohRing::cxc(g());
        assert_eq!(cls(&x, "D*D").integrate(), chi());
        assert_eq!(cls(&x, "a*D").integrate(), -&chi());
        assert_eq!(cls(&x, "b*D").integrate(), -&chi());
        assert_eq!(cls(&x, "a*b"), cls(&x, "chi^2*vol"));
        assert!(cls(&x, "a*a").is_zero());
        let s = CohRing::surface(g());
        assert_eq!(cls(&s, "K^2").integrate(), &g() - &ParamPoly::one());
        assert_eq!(cls(&s, "c2*vol").integrate(), ParamPoly::var(Param::C2));
    }

    #[test]
    fn exp_of_diagonal() {
        let x = CohRing::cxc(g());
        let e = cls(&x, "-D").exp_class().unwrap();
        assert_eq!(e, cls(&x, "1 - D + chi/2*vol"));
        assert_eq!(cls(&x, "D").exp_class().unwrap().mul(&e), CohClass::one(&x));
        assert_eq!(CohClass::<ParamPoly>::zero(&x).exp_class().unwrap(), CohClass::one(&x));
        assert_eq!(CohClass::<ParamPoly>::one(&x).exp_class(), Err(CohError::NonNilpotent));
    }

    #[test]
    fn exp_on_curve_is_linear() {
        let c = CohRing::curve(g());
        for m in [-3i64, 1, 5] {
            let x = cls(&c, "k").scale(&ParamPoly::from_int(m));
            assert_eq!(x.exp_class().unwrap(), CohClass::one(&c).add(&x));
        }
    }

    #[test]
    fn todd_examples() {
        let x = CohRing::cxc(g());
        let td = todd_from_tangent_ch(&cls(&x, "2 - a - b + D + 3*chi/2*vol"), 2).unwrap();
        assert_eq!(td, cls(&x, "1 - a/2 - b/2 + D/2 + chi*(2 + chi)/4*vol"));
        let c = CohRing::curve(g());
        assert_eq!(todd_from_tangent_ch(&cls(&c, "1 - k"), 1).unwrap(), cls(&c, "1 - k/2"));
        assert_eq!(todd_from_tangent_ch(&cls(&c, "3"), 3).unwrap(), CohClass::one(&c));
        assert!(matches!(todd_from_tangent_ch(&cls(&c, "1 - k"), 2), Err(CohError::RankMismatch { .. })));
    }

    #[test]
    fn invert_unit_examples() {
        let x = CohRing::cxc(g());
        assert_eq!(cls(&x, "1 - D").invert_unit().unwrap(), cls(&x, "1 + D + chi*vol"));
        assert_eq!(cls(&x, "D").invert_unit(), Err(CohError::NotInvertible));
        let c = CohRing::curve(g());
        let k: CohClass<RatFunc> = cls(&c, "k").map(|p| RatFunc::from_param(p.clone()));
        let one_minus_s = RatFunc::one() - RatFunc::s_pow(1);
        let u = CohClass::scalar(&c, one_minus_s.clone()).add(&k);
        let inv = u.invert_unit().unwrap();
        let expect = CohClass::scalar(&c, one_minus_s.pow(-1).unwrap()).sub(&k.scale(&one_minus_s.pow(-2).unwrap()));
        assert_eq!(inv, expect);
        assert_eq!(inv.mul(&u), CohClass::one(&c));
    }

    #[test]
    fn mixed_rings_rejected() {
        let a = CohClass::<ParamPoly>::one(&CohRing::curve(g()));
        let b = CohClass::<ParamPoly>::one(&CohRing::cxc(g()));
        assert!(matches!(a.checked_mul(&b), Err(CohError::RingMismatch(..))));
    }

    #[test]
    fn ring_from_toml() {
        let src = r#"
            name = "p2"
            complex_dim = 2
            basis = [{ name = "H", degree = 2 }, { name = "pt", degree = 4 }]
            products = [{ left = "H", right = "H", target = "pt", coeff = "1" }]
            integral = { pt = "1" }
        "#;
        let r = CohRing::from_toml(src).unwrap();
        // c(T) = (1+H)^3, ch(T) = 3 e^H - 1
        let ch = parse_class(&r, "3*exp(H) - 1", &Bindings::new()).unwrap();
        let td = todd_from_tangent_ch(&ch, 2).unwrap();
        assert_eq!(td.integrate(), ParamPoly::one());
        let bad = src.replace("target = \"pt\"", "target = \"H\"");
        assert!(matches!(CohRing::from_toml(&bad), Err(CohError::InvalidRing(_))));
        let big = src.replace("complex_dim = 2", "complex_dim = 3");
        assert_eq!(CohRing::from_toml(&big), Err(CohError::DimensionTooLarge(3)));
    }
}
