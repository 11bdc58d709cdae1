//! Seeded generators for parameters, points, test functions and random
//! equations and transforms.

use std::collections::{BTreeMap, BTreeSet};

use pdecanon_core::{
    AffineTransform, DegeneracyReport, DerivKey, DiffMonomial, DiffPoly, MPoly, Param, PowerProduct, RatFun,
    TestFunction, VarSet, Q,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used when neither `--seed` nor `PDECANON_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

const PARAM_ATTEMPTS: usize = 200;

pub struct Gen {
    rng: ChaCha8Rng,
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn nonzero(&mut self, bound: i64) -> i64 {
        let n = self.rng.gen_range(1..=bound);
        if self.rng.gen_bool(0.5) {
            -n
        } else {
            n
        }
    }

    /// `n/d` with `n, d` in `[-9, 9] \ {0}`.
    pub fn small_q(&mut self) -> Q {
        Q::new(self.nonzero(9).into(), self.nonzero(9).into())
    }

    /// A rational with numerator in `[-9, 9]` and denominator in `[1, 9]`.
    pub fn coordinate(&mut self) -> Q {
        Q::new(self.rng.gen_range(-9..=9).into(), self.rng.gen_range(1..=9).into())
    }

    pub fn point(&mut self, n: usize) -> Vec<Q> {
        (0..n).map(|_| self.coordinate()).collect()
    }

    /// Values for `names` at which no condition in `avoid` vanishes.
    pub fn params_avoiding(&mut self, names: &BTreeSet<Param>, avoid: &DegeneracyReport) -> Option<BTreeMap<Param, Q>> {
        (0..PARAM_ATTEMPTS).find_map(|_| {
            let values: BTreeMap<Param, Q> = names.iter().map(|p| (p.clone(), self.small_q())).collect();
            avoid.violated_at(&values).is_none().then_some(values)
        })
    }

    /// A polynomial whose derivatives up to order `degree - 1` in every
    /// variable and mixed direction do not vanish identically: pure powers of
    /// each variable, a product of all variables, and a few random monomials.
    pub fn test_function(&mut self, vars: &VarSet, degree: u32) -> TestFunction {
        let degree = degree.max(1);
        let names: Vec<Param> = vars.names().iter().map(Param::new).collect();
        let mut poly = MPoly::zero();
        for p in &names {
            for e in 1..=degree {
                poly.add_term(PowerProduct::from_pairs([(p.clone(), e)]), q(self.nonzero(5)));
            }
        }
        let mixed = PowerProduct::from_pairs(names.iter().map(|p| (p.clone(), degree)));
        poly.add_term(mixed, q(self.nonzero(5)));
        for _ in 0..3 {
            let pp = PowerProduct::from_pairs(names.iter().map(|p| (p.clone(), self.rng.gen_range(0..=degree))));
            poly.add_term(pp, q(self.nonzero(5)));
        }
        TestFunction::new(vars.clone(), poly).expect("built from the variable names")
    }

    fn small_poly(&mut self, params: &[Param]) -> MPoly {
        let terms = self.rng.gen_range(1..=3);
        MPoly::from_terms((0..terms).map(|_| {
            let pp = PowerProduct::from_pairs(params.iter().map(|p| (p.clone(), self.rng.gen_range(0..=2))));
            (pp, q(self.rng.gen_range(-4..=4)))
        }))
    }

    /// A rational function with small numerator and denominator.
    pub fn ratfun(&mut self, params: &[Param]) -> RatFun {
        loop {
            let num = self.small_poly(params);
            let den = self.small_poly(params);
            if let Ok(r) = RatFun::new(num, den) {
                return r;
            }
        }
    }

    /// A coefficient of the shapes seen in practice: integers, ratios,
    /// multiples of a parameter, shifted parameters and simple quotients.
    pub fn coefficient(&mut self, params: &[Param]) -> RatFun {
        let pick = |g: &mut Gen| RatFun::param(params[g.rng.gen_range(0..params.len())].clone());
        match self.rng.gen_range(0..5) {
            0 => RatFun::integer(self.rng.gen_range(-5..=5)),
            1 => RatFun::constant(self.small_q()),
            2 if !params.is_empty() => &pick(self) * &RatFun::constant(self.small_q()),
            3 if !params.is_empty() => &pick(self) + &RatFun::integer(self.rng.gen_range(-3..=3)),
            4 if !params.is_empty() => {
                let den = &pick(self) + &RatFun::integer(self.nonzero(3));
                pick(self).checked_div(&den).unwrap_or_else(|_| RatFun::one())
            }
            _ => RatFun::integer(self.nonzero(5)),
        }
    }

    fn monomial(&mut self, n: usize, max_weight: u32) -> DiffMonomial {
        loop {
            let factors = self.rng.gen_range(0..=2);
            let m = DiffMonomial::from_factors((0..factors).map(|_| {
                let orders = (0..n).map(|_| self.rng.gen_range(0..=2)).collect();
                (DerivKey::from_orders(orders), self.rng.gen_range(1..=2))
            }));
            if m.weighted_order() <= max_weight {
                return m;
            }
        }
    }

    /// A differential polynomial with up to five terms of bounded weighted order.
    pub fn diffpoly(&mut self, vars: &VarSet, params: &[Param], max_weight: u32) -> DiffPoly {
        let terms = self.rng.gen_range(1..=5);
        let terms: Vec<(DiffMonomial, RatFun)> = (0..terms)
            .map(|_| (self.monomial(vars.len(), max_weight), self.coefficient(params)))
            .collect();
        DiffPoly::from_terms(vars, terms)
    }

    fn entry(&mut self, params: &[Param]) -> RatFun {
        match self.rng.gen_range(0..10) {
            0..=5 => RatFun::integer(self.rng.gen_range(-3..=3)),
            6 | 7 => RatFun::constant(self.small_q()),
            _ => self.coefficient(params),
        }
    }

    /// An affine map with a symbolically nonzero determinant.
    pub fn transform(&mut self, source: &VarSet, target: &VarSet, params: &[Param]) -> AffineTransform {
        let n = source.len();
        loop {
            let matrix: Vec<Vec<RatFun>> = (0..n).map(|_| (0..n).map(|_| self.entry(params)).collect()).collect();
            let offset: Vec<RatFun> = (0..n)
                .map(|_| match self.rng.gen_range(0..3) {
                    0 => RatFun::zero(),
                    1 => RatFun::integer(self.rng.gen_range(-3..=3)),
                    _ => self.coefficient(params),
                })
                .collect();
            if let Ok(t) = AffineTransform::new(source.clone(), target.clone(), matrix, offset) {
                if !t.determinant().is_zero() {
                    return t;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let vars = VarSet::new(["t", "x"]).unwrap();
        let params = [Param::from("a")];
        let (mut a, mut b) = (Gen::new(7), Gen::new(7));
        assert_eq!(a.diffpoly(&vars, &params, 6), b.diffpoly(&vars, &params, 6));
        assert_eq!(a.test_function(&vars, 3), b.test_function(&vars, 3));
    }

    #[test]
    fn params_avoid_conditions() {
        let a = Param::from("a");
        let avoid = DegeneracyReport::from_polys([&MPoly::var(a.clone()) - &MPoly::integer(1)]);
        let mut g = Gen::new(1);
        for _ in 0..50 {
            let v = g.params_avoiding(&[a.clone()].into(), &avoid).unwrap();
            assert_ne!(v[&a], q(1));
        }
    }
}
