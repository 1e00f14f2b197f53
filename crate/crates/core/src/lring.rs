//! The differential ring Q(ζ)[L^{±1}][X][c^{±1}].
//!
//! L = (1+27q)^{−1/3}, X = DC₁/C₁ and c = 1/C₁, with D = q d/dq acting by
//! D(L) = (L⁴ − L)/3, D(X) = −X² + (L³−1)X + (2/9)(L³−1), D(c) = −cX.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::One;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalars::{int, rat, CycScalar, Rational};
use crate::series::QSeries;

/// (L-exponent, X-degree, c-exponent).
pub type Key = (i32, u32, i32);

#[derive(Clone, PartialEq, Eq, Default)]
pub struct RingElem {
    terms: BTreeMap<Key, CycScalar>,
}

fn add_term(map: &mut BTreeMap<Key, CycScalar>, k: Key, c: CycScalar) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&k) {
        Some(v) => {
            *v += &c;
            if v.is_zero() {
                map.remove(&k);
            }
        }
        None => {
            map.insert(k, c);
        }
    }
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem::default()
    }

    pub fn one() -> Self {
        Self::constant(CycScalar::one())
    }

    pub fn constant(c: CycScalar) -> Self {
        Self::monomial((0, 0, 0), c)
    }

    pub fn rational(r: Rational) -> Self {
        Self::constant(CycScalar::from(r))
    }

    pub fn monomial(k: Key, c: CycScalar) -> Self {
        let mut terms = BTreeMap::new();
        add_term(&mut terms, k, c);
        RingElem { terms }
    }

    pub fn l(e: i32) -> Self {
        Self::monomial((e, 0, 0), CycScalar::one())
    }

    pub fn x() -> Self {
        Self::monomial((0, 1, 0), CycScalar::one())
    }

    pub fn c(e: i32) -> Self {
        Self::monomial((0, 0, e), CycScalar::one())
    }

    /// Σ coeffs[k]·L^{lo+k}, a Laurent polynomial in L with rational coefficients.
    pub fn laurent_l(lo: i32, coeffs: &[Rational]) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in coeffs.iter().enumerate() {
            add_term(&mut terms, (lo + k as i32, 0, 0), CycScalar::from(c.clone()));
        }
        RingElem { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Key, CycScalar)>>(it: I) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in it {
            add_term(&mut terms, k, c);
        }
        RingElem { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Key, CycScalar> {
        &self.terms
    }

    pub fn coeff(&self, k: Key) -> CycScalar {
        self.terms.get(&k).cloned().unwrap_or_else(CycScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every coefficient lies in Q.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(CycScalar::is_rational)
    }

    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    /// Smallest and largest L-exponent.
    pub fn l_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|k| k.0).min()?;
        let hi = self.terms.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    /// Distinct c-exponents present.
    pub fn c_degrees(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.terms.keys().map(|k| k.2).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The c-degree if the element is c-homogeneous and nonzero.
    pub fn c_degree(&self) -> Option<i32> {
        match self.c_degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Coefficient of X^k, as an X-free element.
    pub fn x_coeff(&self, k: u32) -> Self {
        RingElem::from_terms(
            self.terms.iter().filter(|(key, _)| key.1 == k).map(|(key, c)| ((key.0, 0, key.2), c.clone())),
        )
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        RingElem::from_terms(self.terms.iter().map(|(k, v)| (*k, v * c)))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&CycScalar::from(r.clone()))
    }

    /// Multiplication by the monomial L^a X^b c^e.
    pub fn shift(&self, a: i32, b: u32, e: i32) -> Self {
        RingElem { terms: self.terms.iter().map(|(k, v)| ((k.0 + a, k.1 + b, k.2 + e), v.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = RingElem::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// D applied with the generator rules of the ring.
    pub fn derive(&self) -> Self {
        self.derive_with(&d_x())
    }

    /// D with the image of X replaced by `dx`; L and c keep their rules.
    pub fn derive_with(&self, dx: &RingElem) -> Self {
        let mut out = BTreeMap::new();
        let third = rat(1, 3);
        let mut x_part = RingElem::zero();
        for (&(a, b, e), v) in &self.terms {
            if a != 0 {
                let w = v.scale(&(&third * int(a as i64)));
                add_term(&mut out, (a + 3, b, e), w.clone());
                add_term(&mut out, (a, b, e), -w);
            }
            if e != 0 {
                add_term(&mut out, (a, b + 1, e), -v.scale(&int(e as i64)));
            }
            if b > 0 {
                x_part = &x_part + &RingElem::monomial((a, b - 1, e), v.scale(&int(b as i64)));
            }
        }
        &RingElem { terms: out } + &(&x_part * dx)
    }

    /// ∂/∂X in the (L, X, c) coordinates.
    pub fn d_dx(&self) -> Self {
        RingElem::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.1 > 0)
                .map(|(k, v)| ((k.0, k.1 - 1, k.2), v.scale(&int(k.1 as i64)))),
        )
    }

    /// ∂/∂A₂ in the (L, A₂, c) coordinates, equal to (L³/3)∂/∂X.
    pub fn d_da2(&self) -> Self {
        self.d_dx().shift(3, 0, 0).scale_rational(&rat(1, 3))
    }

    /// ∂/∂T = c·D.
    pub fn d_dt(&self) -> Self {
        self.derive().shift(0, 0, 1)
    }

    /// Substitutes the q-series of L, X and c.
    pub fn evaluate(&self, gens: &GeneratorSeries) -> QSeries {
        let qmax = gens.qmax();
        let mut acc = QSeries::zero(qmax);
        let mut cache = PowerCache::default();
        for (&(a, b, e), v) in &self.terms {
            let la = cache.pow(&gens.l, &gens.l_inv, a, 0);
            let xb = cache.pow(&gens.x, &gens.x, b as i32, 1);
            let ce = cache.pow(&gens.c, &gens.c_inv, e, 2);
            let term = &(&la * &xb) * &ce;
            acc = &acc + &term.scale(v);
        }
        acc
    }

    /// Rewrites X = (L³A₂ − 1 + L³/2)/3.
    pub fn to_a2_form(&self) -> A2Form {
        // X = α + β·A₂ with α = (L³/2 − 1)/3 and β = L³/3
        let alpha = RingElem::from_terms([((3, 0, 0), CycScalar::from(rat(1, 6))), ((0, 0, 0), CycScalar::from(rat(-1, 3)))]);
        let beta = RingElem::monomial((3, 0, 0), CycScalar::from(rat(1, 3)));
        let mut out = BTreeMap::new();
        for (&(a, b, e), v) in &self.terms {
            // (α + βA)^b = Σ_j binom(b,j) α^{b−j} β^j A^j
            for j in 0..=b {
                let coef = (&alpha.pow(b - j) * &beta.pow(j)).scale_rational(&binom(b, j));
                for (&(la, _, _), w) in coef.terms() {
                    add_term(&mut out, (a + la, j, e), v * w);
                }
            }
        }
        A2Form { terms: out }
    }

    pub fn from_a2_form(f: &A2Form) -> Self {
        // A₂ = (3X + 1 − L³/2)·L⁻³
        let a2 = RingElem::from_terms([
            ((-3, 1, 0), CycScalar::from_int(3)),
            ((-3, 0, 0), CycScalar::one()),
            ((0, 0, 0), CycScalar::from(rat(-1, 2))),
        ]);
        let mut acc = RingElem::zero();
        for (&(a, j, e), v) in &f.terms {
            acc = &acc + &a2.pow(j).shift(a, 0, e).scale(v);
        }
        acc
    }

    /// Value at L = 1, X = 0, c = 1, i.e. at q = 0.
    pub fn at_q_zero(&self) -> CycScalar {
        self.terms.iter().filter(|(k, _)| k.1 == 0).map(|(_, v)| v.clone()).sum()
    }

    /// Plain-text rendering such as `-1/18*L^2 + 1/18`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (&(a, b, e), v) in &self.terms {
            let mut s = if v.is_rational() { v.a.to_string() } else { format!("({})", v) };
            for (name, p) in [("L", a), ("X", b as i32), ("c", e)] {
                if p != 0 {
                    s.push_str(&format!("*{}^{}", name, p));
                }
            }
            parts.push(s);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

/// D(X) = −X² + (L³−1)X + (2/9)(L³−1).
pub fn d_x() -> RingElem {
    RingElem::from_terms([
        ((0, 2, 0), CycScalar::from_int(-1)),
        ((3, 1, 0), CycScalar::one()),
        ((0, 1, 0), CycScalar::from_int(-1)),
        ((3, 0, 0), CycScalar::from(rat(2, 9))),
        ((0, 0, 0), CycScalar::from(rat(-2, 9))),
    ])
}

fn binom(n: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

/// q-series images of the generators and their inverses.
#[derive(Clone, Debug)]
pub struct GeneratorSeries {
    pub l: QSeries,
    pub l_inv: QSeries,
    pub x: QSeries,
    pub c: QSeries,
    pub c_inv: QSeries,
}

impl GeneratorSeries {
    /// D(g) − (ring rule for g) evaluated, for g = L, X, c; all zero when the rules hold.
    pub fn rule_residuals(&self) -> [QSeries; 3] {
        let pairs = [(&self.l, RingElem::l(1)), (&self.x, RingElem::x()), (&self.c, RingElem::c(1))];
        pairs.map(|(s, g)| &s.deriv() - &g.derive().evaluate(self))
    }

    pub fn qmax(&self) -> usize {
        self.l.qmax().min(self.x.qmax()).min(self.c.qmax())
    }
}

#[derive(Default)]
struct PowerCache {
    cache: BTreeMap<(u8, i32), QSeries>,
}

impl PowerCache {
    fn pow(&mut self, base: &QSeries, inv: &QSeries, e: i32, slot: u8) -> QSeries {
        if let Some(s) = self.cache.get(&(slot, e)) {
            return s.clone();
        }
        let qmax = base.qmax().min(inv.qmax());
        let s = if e == 0 {
            QSeries::one(qmax)
        } else {
            let step = if e > 0 { base } else { inv };
            let prev = self.pow(base, inv, e - e.signum(), slot);
            &prev * step
        };
        self.cache.insert((slot, e), s.clone());
        s
    }
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, o: &RingElem) -> RingElem {
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            add_term(&mut terms, *k, v.clone());
        }
        RingElem { terms }
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, o: &RingElem) -> RingElem {
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            add_term(&mut terms, *k, -v);
        }
        RingElem { terms }
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect() }
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, o: &RingElem) -> RingElem {
        let mut terms = BTreeMap::new();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &o.terms {
                add_term(&mut terms, (k1.0 + k2.0, k1.1 + k2.1, k1.2 + k2.2), v1 * v2);
            }
        }
        RingElem { terms }
    }
}

impl std::iter::Sum for RingElem {
    fn sum<I: Iterator<Item = RingElem>>(iter: I) -> RingElem {
        let mut terms = BTreeMap::new();
        for x in iter {
            for (k, v) in x.terms {
                add_term(&mut terms, k, v);
            }
        }
        RingElem { terms }
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    #[serde(rename = "L")]
    l: i32,
    #[serde(rename = "X")]
    x: u32,
    c: i32,
    coeff: CycScalar,
}

impl Serialize for RingElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> =
            self.terms.iter().map(|(&(l, x, c), v)| TermRepr { l, x, c, coeff: v.clone() }).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        for t in &v {
            if !seen.insert((t.l, t.x, t.c)) {
                return Err(D::Error::custom("duplicate monomial"));
            }
        }
        Ok(RingElem::from_terms(v.into_iter().map(|t| ((t.l, t.x, t.c), t.coeff))))
    }
}

/// Polynomial in A₂ over Q(ζ)[L^{±1}][c^{±1}]; keys are (L, A₂-degree, c).
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct A2Form {
    terms: BTreeMap<Key, CycScalar>,
}

impl A2Form {
    pub fn terms(&self) -> &BTreeMap<Key, CycScalar> {
        &self.terms
    }

    pub fn a2_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn l_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|k| k.0).min()?;
        let hi = self.terms.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    /// Coefficient of A₂^j as an element of Q(ζ)[L^{±1}][c^{±1}].
    pub fn a2_coeff(&self, j: u32) -> RingElem {
        RingElem::from_terms(
            self.terms.iter().filter(|(k, _)| k.1 == j).map(|(k, v)| ((k.0, 0, k.2), v.clone())),
        )
    }

    pub fn from_terms<I: IntoIterator<Item = (Key, CycScalar)>>(it: I) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in it {
            add_term(&mut terms, k, c);
        }
        A2Form { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(lo: i32, c: &[(i64, i64)]) -> RingElem {
        RingElem::laurent_l(lo, &c.iter().map(|&(n, d)| rat(n, d)).collect::<Vec<_>>())
    }

    #[test]
    fn generator_rules() {
        assert_eq!(RingElem::l(1).derive(), lp(1, &[(-1, 3), (0, 1), (0, 1), (1, 3)]));
        assert_eq!(RingElem::x().derive(), d_x());
        assert!(RingElem::one().derive().is_zero());
        assert_eq!(RingElem::c(1).derive(), RingElem::monomial((0, 1, 1), CycScalar::from_int(-1)));
    }

    #[test]
    fn a2_round_trip() {
        let f = &(&RingElem::x().pow(2) + &RingElem::l(-2)) * &RingElem::c(1);
        let a = f.to_a2_form();
        assert_eq!(RingElem::from_a2_form(&a), f);
        let x = RingElem::x().to_a2_form();
        assert_eq!(x.a2_coeff(1), RingElem::monomial((3, 0, 0), CycScalar::from(rat(1, 3))));
    }

    #[test]
    fn partial_derivatives() {
        assert_eq!(RingElem::x().d_da2(), RingElem::monomial((3, 0, 0), CycScalar::from(rat(1, 3))));
        assert!(RingElem::l(5).d_da2().is_zero());
        let a2 = RingElem::from_a2_form(&A2Form::from_terms([((0, 1, 0), CycScalar::one())]));
        assert_eq!(a2.d_da2(), RingElem::one());
        assert_eq!(RingElem::c(2).d_dt().c_degree(), Some(3));
    }

    #[test]
    fn json_is_sorted() {
        let f = &RingElem::x() + &RingElem::l(-1);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with(r#"[{"L":-1,"X":0,"c":0"#));
        let back: RingElem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
