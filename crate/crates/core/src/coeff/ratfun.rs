use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::mpoly::gcd;
use super::{MPoly, Param, PowerProduct, Q};
use crate::error::{Error, Result};

/// An element of `Q(params)` in canonical form.
///
/// `num / den` with `gcd(num, den) = 1`, both with integer coefficients whose
/// contents are coprime, and `den` with a positive leading coefficient. Equal
/// field elements therefore have identical representations, so the derived
/// equality agrees with cross-multiplication (see [`RatFun::cross_eq`]).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatFun {
    num: MPoly,
    den: MPoly,
}

impl RatFun {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFun::zero());
        }
        let g = common_divisor(&num, &den);
        if g.is_one() {
            return Ok(RatFun::from_coprime(num, den));
        }
        Ok(RatFun::from_coprime(
            num.div_exact(&g).expect("gcd divides numerator"),
            den.div_exact(&g).expect("gcd divides denominator"),
        ))
    }

    /// Canonical form of a pair already known to have no common factor.
    fn from_coprime(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return RatFun::zero();
        }
        let (cn, pn) = num.primitive_integer();
        let (cd, pd) = den.primitive_integer();
        let r = cn / cd;
        RatFun {
            num: pn.scale(&Q::from_integer(r.numer().clone())),
            den: pd.scale(&Q::from_integer(r.denom().clone())),
        }
    }

    /// `self / d^w`, cancelling one copy of `d` at a time so that each gcd
    /// involves `d` rather than its power.
    pub(crate) fn div_by_power(&self, d: &MPoly, w: u32) -> RatFun {
        if self.is_zero() || w == 0 || d.is_one() {
            return self.clone();
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let mut cancelling = !d.is_constant();
        for _ in 0..w {
            let g = if cancelling { gcd(&num, d) } else { MPoly::one() };
            if g.is_one() {
                cancelling = false;
                den = &den * d;
            } else {
                num = num.div_exact(&g).expect("gcd divides");
                den = &den * &d.div_exact(&g).expect("gcd divides");
            }
        }
        RatFun::from_coprime(num, den)
    }

    pub fn zero() -> Self {
        RatFun {
            num: MPoly::zero(),
            den: MPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun::integer(1)
    }

    pub fn integer(n: i64) -> Self {
        RatFun::constant(Q::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        RatFun::constant(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn constant(c: Q) -> Self {
        RatFun::from_poly(MPoly::constant(c))
    }

    pub fn param(p: impl Into<Param>) -> Self {
        RatFun::from_poly(MPoly::var(p.into()))
    }

    pub fn from_poly(p: MPoly) -> Self {
        RatFun::new(p, MPoly::one()).expect("nonzero denominator")
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// Sign of the numerator's leading coefficient; used for printing.
    pub fn is_negative(&self) -> bool {
        self.num.leading_coefficient().is_negative()
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut s = self.num.params();
        s.extend(self.den.params());
        s
    }

    /// Equality by cross-multiplication, independent of the canonical form.
    pub fn cross_eq(&self, other: &RatFun) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFun::from_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &RatFun) -> Result<RatFun> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, k: i32) -> Result<RatFun> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let e = k.unsigned_abs();
        Ok(RatFun {
            num: base.num.pow(e),
            den: base.den.pow(e),
        })
    }

    pub fn eval(&self, assignment: &BTreeMap<Param, Q>) -> Result<Q> {
        let d = self.den.eval(assignment)?;
        let n = self.num.eval(assignment)?;
        if d.is_zero() {
            return Err(Error::PoleAtPoint(self.den.to_string()));
        }
        Ok(n / d)
    }

    /// Simultaneous substitution of field elements for parameters.
    /// Parameters absent from `map` are kept.
    pub fn subst(&self, map: &BTreeMap<Param, RatFun>) -> Result<RatFun> {
        if map.is_empty() || self.params().iter().all(|p| !map.contains_key(p)) {
            return Ok(self.clone());
        }
        let num = subst_poly(&self.num, map)?;
        let den = subst_poly(&self.den, map)?;
        if den.is_zero() {
            return Err(Error::PoleAtPoint(self.den.to_string()));
        }
        num.checked_div(&den)
    }

    /// Square root in the field: `Some(g)` with `g * g == self` exactly.
    pub fn sqrt(&self) -> Option<RatFun> {
        if self.is_zero() {
            return Some(RatFun::zero());
        }
        // with a monic denominator the reduced pair is unique, so both parts
        // must be squares on their own
        let lc = self.den.leading_coefficient();
        let scale = Q::one() / lc;
        let n = self.num.scale(&scale).sqrt()?;
        let d = self.den.scale(&scale).sqrt()?;
        RatFun::new(n, d).ok()
    }
}

fn subst_poly(p: &MPoly, map: &BTreeMap<Param, RatFun>) -> Result<RatFun> {
    let mut acc = RatFun::zero();
    for (m, c) in p.terms() {
        let mut t = RatFun::constant(c.clone());
        let mut kept = PowerProduct::one();
        for (v, e) in m.iter() {
            match map.get(v) {
                Some(val) => t = &t * &val.pow(e as i32)?,
                None => kept = kept.mul(&PowerProduct::from_pairs([(v.clone(), e)])),
            }
        }
        if !kept.is_one() {
            t = &t * &RatFun::from_poly(MPoly::term(kept, Q::one()));
        }
        acc = &acc + &t;
    }
    Ok(acc)
}

fn common_divisor(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_constant() || b.is_constant() {
        MPoly::one()
    } else {
        gcd(a, b)
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFun {
                num: &self.num + &rhs.num,
                den: MPoly::one(),
            };
        }
        // only factors of gcd(den1, den2) can cancel
        let g = common_divisor(&self.den, &rhs.den);
        if g.is_one() {
            return RatFun::from_coprime(
                &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
                &self.den * &rhs.den,
            );
        }
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g).expect("gcd divides");
        let t = &(&self.num * &d2) + &(&rhs.num * &d1);
        if t.is_zero() {
            return RatFun::zero();
        }
        let h = common_divisor(&t, &g);
        let den = &d1 * &rhs.den;
        if h.is_one() {
            return RatFun::from_coprime(t, den);
        }
        RatFun::from_coprime(
            t.div_exact(&h).expect("gcd divides"),
            den.div_exact(&h).expect("gcd divides"),
        )
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFun {
                num: &self.num * &rhs.num,
                den: MPoly::one(),
            };
        }
        // both operands are reduced, so only cross factors can cancel
        let g1 = common_divisor(&self.num, &rhs.den);
        let g2 = common_divisor(&rhs.num, &self.den);
        let cancel = |p: &MPoly, g: &MPoly| if g.is_one() { p.clone() } else { p.div_exact(g).expect("gcd divides") };
        RatFun::from_coprime(
            &cancel(&self.num, &g1) * &cancel(&rhs.num, &g2),
            &cancel(&self.den, &g2) * &cancel(&rhs.den, &g1),
        )
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl Add for RatFun {
    type Output = RatFun;
    fn add(self, rhs: RatFun) -> RatFun {
        &self + &rhs
    }
}

impl Sub for RatFun {
    type Output = RatFun;
    fn sub(self, rhs: RatFun) -> RatFun {
        &self - &rhs
    }
}

impl Mul for RatFun {
    type Output = RatFun;
    fn mul(self, rhs: RatFun) -> RatFun {
        &self * &rhs
    }
}

impl From<MPoly> for RatFun {
    fn from(p: MPoly) -> Self {
        RatFun::from_poly(p)
    }
}

impl From<Q> for RatFun {
    fn from(c: Q) -> Self {
        RatFun::constant(c)
    }
}

/// `alpha/2`, `(alpha^2 - 4)/4`, `-3*delta/(2*beta)`. The output re-parses
/// to the same element under the usual precedence rules.
impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let simple_den = self.den.is_constant()
            || (self.den.len() == 1
                && self.den.leading_coefficient().is_one()
                && self.den.leading().is_some_and(|(m, _)| m.degree() == 1));
        if simple_den {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{ratfun_arith, ratfun_eval, ratfun_sqrt, ArithOp};
    use alloc::string::ToString;

    fn alpha() -> RatFun {
        RatFun::param("alpha")
    }

    fn qq(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn half_alpha() -> RatFun {
        &alpha() * &RatFun::ratio(1, 2)
    }

    #[test]
    fn add_halves() {
        let a = ratfun_arith(ArithOp::Add, &half_alpha(), &half_alpha()).unwrap();
        assert_eq!(a, alpha());
    }

    #[test]
    fn inverse_pair_multiplies_to_one() {
        let sq = &half_alpha() * &half_alpha();
        let inv = RatFun::integer(4).checked_div(&(&alpha() * &alpha())).unwrap();
        assert!(ratfun_arith(ArithOp::Mul, &sq, &inv).unwrap().is_one());
    }

    #[test]
    fn one_minus_alpha_squared_over_four() {
        let c = ratfun_arith(ArithOp::Sub, &RatFun::one(), &(&half_alpha() * &half_alpha())).unwrap();
        let expected = RatFun::new(
            &MPoly::integer(4) - &(MPoly::var("alpha".into()).pow(2)),
            MPoly::integer(4),
        )
        .unwrap();
        assert_eq!(c, expected);
        assert_eq!(c.to_string(), "(-alpha^2 + 4)/4");
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            ratfun_arith(ArithOp::Div, &alpha(), &RatFun::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn eval_examples() {
        let c = &RatFun::one() - &(&half_alpha() * &half_alpha());
        let at = |v: Q| ratfun_eval(&c, &[(Param::from("alpha"), v)].into_iter().collect());
        assert_eq!(at(qq(2, 1)).unwrap(), qq(0, 1));
        assert_eq!(at(qq(6, 5)).unwrap(), qq(16, 25));
        assert_eq!(
            ratfun_eval(&alpha(), &BTreeMap::new()),
            Err(Error::MissingParam("alpha".into()))
        );
        let pole = RatFun::one().checked_div(&alpha()).unwrap();
        assert!(matches!(
            ratfun_eval(&pole, &[(Param::from("alpha"), qq(0, 1))].into_iter().collect()),
            Err(Error::PoleAtPoint(_))
        ));
    }

    #[test]
    fn sqrt_examples() {
        let quarter_sq = &half_alpha() * &half_alpha();
        assert_eq!(ratfun_sqrt(&quarter_sq), Some(half_alpha()));
        assert_eq!(ratfun_sqrt(&(&RatFun::one() - &quarter_sq)), None);
        assert_eq!(ratfun_sqrt(&RatFun::one()), Some(RatFun::one()));
        let frac = RatFun::integer(9).checked_div(&(&alpha() * &alpha())).unwrap();
        assert_eq!(ratfun_sqrt(&frac).unwrap().to_string(), "3/alpha");
    }

    #[test]
    fn canonical_form_cancels_common_factors() {
        let a = MPoly::var("alpha".into());
        let num = &(&a * &a) - &MPoly::one();
        let den = (&a - &MPoly::one()).scale(&qq(-2, 3));
        let f = RatFun::new(num, den).unwrap();
        assert_eq!(f.to_string(), "(-3*alpha - 3)/2");
        assert_eq!(f.den().to_string(), "2");
    }

    #[test]
    fn printing_of_composite_denominators() {
        let delta = RatFun::param("delta");
        let beta = RatFun::param("beta");
        let k = (&delta * &RatFun::integer(-3)).checked_div(&(&beta * &RatFun::integer(2))).unwrap();
        assert_eq!(k.to_string(), "-3*delta/(2*beta)");
        assert_eq!(RatFun::one().checked_div(&delta).unwrap().to_string(), "1/delta");
    }

    #[test]
    fn subst_partial() {
        let c = &RatFun::one() - &(&half_alpha() * &half_alpha());
        let map: BTreeMap<_, _> = [(Param::from("alpha"), RatFun::integer(2))].into_iter().collect();
        assert!(c.subst(&map).unwrap().is_zero());
        let to_beta: BTreeMap<_, _> = [(Param::from("alpha"), &RatFun::param("beta") * &RatFun::integer(2))].into_iter().collect();
        assert_eq!(c.subst(&to_beta).unwrap().to_string(), "-beta^2 + 1");
    }
}
