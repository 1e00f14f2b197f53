//! Truncated series in q, and objects with per-q-order dependence on z.
//!
//! `QZSeries` stores the q^d coefficient as a Laurent series in z whose pole
//! order is at most d. Internally the entry (d, m) sits at column s = m + d,
//! so a product is an ordinary bivariate truncated product and every stored
//! entry is exact.

use std::ops::{Add, Mul, Neg, Sub};


use crate::error::{Error, Result};
use crate::scalars::{CycScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<CycScalar>,
}

impl QSeries {
    pub fn zero(qmax: usize) -> Self {
        QSeries { coeffs: vec![CycScalar::zero(); qmax + 1] }
    }

    pub fn one(qmax: usize) -> Self {
        Self::constant(CycScalar::one(), qmax)
    }

    pub fn constant(c: CycScalar, qmax: usize) -> Self {
        let mut s = Self::zero(qmax);
        s.coeffs[0] = c;
        s
    }

    /// c·q^d, or zero if d exceeds the truncation.
    pub fn monomial(c: CycScalar, d: usize, qmax: usize) -> Self {
        let mut s = Self::zero(qmax);
        if d <= qmax {
            s.coeffs[d] = c;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<CycScalar>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        QSeries { coeffs }
    }

    pub fn from_rationals(coeffs: Vec<Rational>) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(CycScalar::from).collect())
    }

    pub fn qmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CycScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> CycScalar {
        self.coeffs.get(d).cloned().unwrap_or_else(CycScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(CycScalar::is_zero)
    }

    pub fn truncate(&self, qmax: usize) -> Self {
        let n = qmax.min(self.qmax());
        QSeries { coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        QSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// D = q d/dq.
    pub fn deriv(&self) -> Self {
        QSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(d, x)| x.scale(&Rational::from_integer((d as i64).into())))
                .collect(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        let c0 = self.coeffs[0].inv().map_err(|_| Error::Series("a unit constant term"))?;
        let n = self.qmax();
        let mut out = vec![CycScalar::zero(); n + 1];
        out[0] = c0.clone();
        for d in 1..=n {
            let mut acc = CycScalar::zero();
            for k in 1..=d {
                if !self.coeffs[k].is_zero() {
                    acc += &(&self.coeffs[k] * &out[d - k]);
                }
            }
            out[d] = -(&acc * &c0);
        }
        Ok(QSeries { coeffs: out })
    }

    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Series("zero constant term for exp"));
        }
        let n = self.qmax();
        let mut out = vec![CycScalar::zero(); n + 1];
        out[0] = CycScalar::one();
        for d in 1..=n {
            let mut acc = CycScalar::zero();
            for k in 1..=d {
                if !self.coeffs[k].is_zero() {
                    acc += &(&self.coeffs[k] * &out[d - k]).scale(&Rational::from_integer((k as i64).into()));
                }
            }
            out[d] = acc.scale(&Rational::new(1.into(), (d as i64).into()));
        }
        Ok(QSeries { coeffs: out })
    }

    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Series("constant term 1 for log"));
        }
        let n = self.qmax();
        let mut out = vec![CycScalar::zero(); n + 1];
        for d in 1..=n {
            let mut acc = self.coeffs[d].scale(&Rational::from_integer((d as i64).into()));
            for k in 1..d {
                if !out[k].is_zero() && !self.coeffs[d - k].is_zero() {
                    acc -= &(&out[k] * &self.coeffs[d - k]).scale(&Rational::from_integer((k as i64).into()));
                }
            }
            out[d] = acc.scale(&Rational::new(1.into(), (d as i64).into()));
        }
        Ok(QSeries { coeffs: out })
    }

    /// self^r for a series with constant term 1.
    pub fn pow_ratio(&self, r: &Rational) -> Result<Self> {
        self.log()?.scale(&CycScalar::from(r.clone())).exp()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = QSeries::one(self.qmax());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// self(inner(q)) for inner with zero constant term.
    pub fn compose(&self, inner: &QSeries) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::Series("inner series with zero constant term"));
        }
        let n = self.qmax().min(inner.qmax());
        let inner = inner.truncate(n);
        let mut acc = QSeries::zero(n);
        for c in self.coeffs[..=n].iter().rev() {
            acc = &acc * &inner;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, o: &QSeries) -> QSeries {
        let n = self.qmax().min(o.qmax());
        QSeries { coeffs: (0..=n).map(|d| &self.coeffs[d] + &o.coeffs[d]).collect() }
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, o: &QSeries) -> QSeries {
        let n = self.qmax().min(o.qmax());
        QSeries { coeffs: (0..=n).map(|d| &self.coeffs[d] - &o.coeffs[d]).collect() }
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, o: &QSeries) -> QSeries {
        let n = self.qmax().min(o.qmax());
        let mut out = vec![CycScalar::zero(); n + 1];
        for (i, x) in self.coeffs[..=n].iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs[..=n - i].iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += &(x * y);
                }
            }
        }
        QSeries { coeffs: out }
    }
}

/// The linear polynomial c0 + c1·z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinFactor {
    pub c0: CycScalar,
    pub c1: CycScalar,
}

impl LinFactor {
    pub fn new(c0: CycScalar, c1: CycScalar) -> Self {
        LinFactor { c0, c1 }
    }
}

/// Exact per-degree rational functions of z, each a ratio of products of
/// linear factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatTerm {
    pub num: Vec<LinFactor>,
    pub den: Vec<LinFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunZ {
    pub terms: Vec<RatTerm>,
}

fn poly_mul_trunc(p: &[CycScalar], f: &LinFactor, cap: usize) -> Vec<CycScalar> {
    let len = (p.len() + 1).min(cap + 1);
    let mut out = vec![CycScalar::zero(); len];
    for (k, x) in p.iter().enumerate() {
        if k < len {
            out[k] += &(x * &f.c0);
        }
        if k + 1 < len {
            out[k + 1] += &(x * &f.c1);
        }
    }
    out
}

fn z_degree(fs: &[LinFactor]) -> usize {
    fs.iter().filter(|f| !f.c1.is_zero()).count()
}

impl RatFunZ {
    pub fn qmax(&self) -> usize {
        self.terms.len() - 1
    }

    /// Multiplies the degree-d term by (c0 + d·c1·z), i.e. applies c0 + c1·z·D.
    pub fn apply_m(&self, c0: &CycScalar, c1: &CycScalar) -> Self {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(d, t)| {
                let mut t = t.clone();
                t.num.push(LinFactor::new(c0.clone(), c1.scale(&Rational::from_integer((d as i64).into()))));
                t
            })
            .collect();
        RatFunZ { terms }
    }

    /// Laurent expansion around z = 0, per q-degree.
    pub fn expand_at_zero(&self, zmax: usize) -> Result<QZSeries> {
        let qmax = self.qmax();
        let mut out = QZSeries::zero(qmax, zmax);
        let cap = out.cap();
        for (d, t) in self.terms.iter().enumerate() {
            if t.num.iter().any(|f| f.c0.is_zero() && f.c1.is_zero()) {
                continue;
            }
            let mut net = 0i64;
            let mut scalar = CycScalar::one();
            let mut regular_num = Vec::new();
            let mut regular_den = Vec::new();
            for f in &t.den {
                if f.c0.is_zero() {
                    if f.c1.is_zero() {
                        return Err(Error::Series("nonvanishing denominator factors"));
                    }
                    net += 1;
                    scalar = scalar.checked_div(&f.c1)?;
                } else {
                    regular_den.push(f);
                }
            }
            for f in &t.num {
                if f.c0.is_zero() {
                    net -= 1;
                    scalar = &scalar * &f.c1;
                } else {
                    regular_num.push(f);
                }
            }
            if net > d as i64 {
                return Err(Error::PoleBound { degree: d, order: net as usize });
            }
            // entry z^{k−net} lands in column k − net + d
            let need = cap as i64 - d as i64 + net;
            if need < 0 {
                continue;
            }
            let need = need as usize;
            let mut poly = vec![scalar];
            for f in regular_num {
                poly = poly_mul_trunc(&poly, f, need);
            }
            for f in regular_den {
                let inv0 = f.c0.inv()?;
                let ratio = -(&f.c1 * &inv0);
                let mut series = Vec::with_capacity(need + 1);
                let mut p = inv0;
                for _ in 0..=need {
                    series.push(p.clone());
                    p = &p * &ratio;
                }
                poly = mul_trunc(&poly, &series, need);
            }
            for (k, c) in poly.into_iter().enumerate() {
                let s = k as i64 - net + d as i64;
                if s >= 0 && s as usize <= cap {
                    out.data[d][s as usize] = c;
                }
            }
        }
        Ok(out)
    }

    /// Per-degree limit z → ∞.
    pub fn limit_at_infinity(&self) -> Result<QSeries> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (d, t) in self.terms.iter().enumerate() {
            let (dn, dd) = (z_degree(&t.num), z_degree(&t.den));
            if dn > dd {
                return Err(Error::DivergentLimit(d));
            }
            if t.num.iter().any(|f| f.c0.is_zero() && f.c1.is_zero()) {
                out.push(CycScalar::zero());
                continue;
            }
            if dn < dd {
                out.push(CycScalar::zero());
                continue;
            }
            let top = |fs: &[LinFactor]| {
                fs.iter().fold(CycScalar::one(), |acc, f| {
                    if f.c1.is_zero() {
                        &acc * &f.c0
                    } else {
                        &acc * &f.c1
                    }
                })
            };
            out.push(top(&t.num).checked_div(&top(&t.den))?);
        }
        Ok(QSeries::from_coeffs(out))
    }

    /// Expansion around z = ∞ keeping the exponents top, top−1, …, bottom.
    pub fn expand_at_infinity(&self, top: i64, bottom: i64) -> Result<QInfSeries> {
        let qmax = self.qmax();
        let mut out = QInfSeries::zero(qmax, top, bottom);
        let depth = (top - bottom) as usize;
        for (d, t) in self.terms.iter().enumerate() {
            let lead = z_degree(&t.num) as i64 - z_degree(&t.den) as i64;
            if lead > top {
                return Err(Error::DivergentLimit(d));
            }
            // with s = 1/z each factor is z·(c1 + c0 s) or the constant c0
            let need = (lead - bottom).max(0) as usize;
            let mut poly = vec![CycScalar::one()];
            for f in &t.num {
                let g = if f.c1.is_zero() {
                    LinFactor::new(f.c0.clone(), CycScalar::zero())
                } else {
                    LinFactor::new(f.c1.clone(), f.c0.clone())
                };
                poly = poly_mul_trunc(&poly, &g, need);
            }
            for f in &t.den {
                let (a, b) = if f.c1.is_zero() { (f.c0.clone(), CycScalar::zero()) } else { (f.c1.clone(), f.c0.clone()) };
                let inv0 = a.inv()?;
                let ratio = -(&b * &inv0);
                let mut series = Vec::with_capacity(need + 1);
                let mut p = inv0;
                for _ in 0..=need {
                    series.push(p.clone());
                    p = &p * &ratio;
                }
                poly = mul_trunc(&poly, &series, need);
            }
            for (k, c) in poly.into_iter().enumerate() {
                let e = lead - k as i64;
                if e >= bottom {
                    let idx = (top - e) as usize;
                    if idx <= depth {
                        out.data[d][idx] = c;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn mul_trunc(a: &[CycScalar], b: &[CycScalar], cap: usize) -> Vec<CycScalar> {
    let len = (a.len() + b.len() - 1).min(cap + 1);
    let mut out = vec![CycScalar::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() || i >= len {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    out
}

/// Per-q-degree Laurent data in z with pole order at most d at q^d.
///
/// `data[d][s]` holds the coefficient of q^d z^{s−d}; columns run to
/// `zmax + qmax`, so every entry with m ≤ zmax is present at every degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QZSeries {
    qmax: usize,
    zmax: usize,
    data: Vec<Vec<CycScalar>>,
}

impl QZSeries {
    pub fn zero(qmax: usize, zmax: usize) -> Self {
        QZSeries { qmax, zmax, data: vec![vec![CycScalar::zero(); zmax + qmax + 1]; qmax + 1] }
    }

    pub fn one(qmax: usize, zmax: usize) -> Self {
        let mut s = Self::zero(qmax, zmax);
        s.data[0][0] = CycScalar::one();
        s
    }

    pub fn qmax(&self) -> usize {
        self.qmax
    }

    pub fn zmax(&self) -> usize {
        self.zmax
    }

    fn cap(&self) -> usize {
        self.zmax + self.qmax
    }

    /// Largest z-exponent stored at q-degree d.
    pub fn top_exponent(&self, d: usize) -> i64 {
        self.cap() as i64 - d as i64
    }

    /// Coefficient of q^d z^m; zero outside the pole bound or above the stored range.
    pub fn coeff(&self, d: usize, m: i64) -> CycScalar {
        let s = m + d as i64;
        if d > self.qmax || s < 0 || s > self.cap() as i64 {
            return CycScalar::zero();
        }
        self.data[d][s as usize].clone()
    }

    pub fn set(&mut self, d: usize, m: i64, c: CycScalar) {
        let s = m + d as i64;
        assert!(s >= 0 && s as usize <= self.cap(), "entry outside the pole bound or cap");
        self.data[d][s as usize] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(CycScalar::is_zero))
    }

    /// Nonzero entries as (d, m, coefficient), ordered by (d, m).
    pub fn entries(&self) -> Vec<(usize, i64, CycScalar)> {
        let mut out = Vec::new();
        for (d, row) in self.data.iter().enumerate() {
            for (s, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.push((d, s as i64 - d as i64, c.clone()));
                }
            }
        }
        out
    }

    fn check_shape(&self, o: &QZSeries) {
        assert!(self.qmax == o.qmax && self.zmax == o.zmax, "QZSeries truncation mismatch");
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        let data = self.data.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        QZSeries { qmax: self.qmax, zmax: self.zmax, data }
    }

    /// Multiplication by z; exact because columns shift upward.
    pub fn mul_z(&self) -> Self {
        let mut out = Self::zero(self.qmax, self.zmax);
        for d in 0..=self.qmax {
            for s in 1..=self.cap() {
                out.data[d][s] = self.data[d][s - 1].clone();
            }
        }
        out
    }

    /// Multiplication by q.
    pub fn mul_q(&self) -> Self {
        let mut out = Self::zero(self.qmax, self.zmax);
        for d in 1..=self.qmax {
            for s in 1..=self.cap() {
                out.data[d][s] = self.data[d - 1][s - 1].clone();
            }
        }
        out
    }

    /// D = q d/dq.
    pub fn deriv_q(&self) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(d, r)| {
                let k = Rational::from_integer((d as i64).into());
                r.iter().map(|x| x.scale(&k)).collect()
            })
            .collect();
        QZSeries { qmax: self.qmax, zmax: self.zmax, data }
    }

    /// Multiplication by a z-independent series.
    pub fn mul_qseries(&self, f: &QSeries) -> Self {
        assert!(f.qmax() >= self.qmax, "q-series too short");
        let mut out = Self::zero(self.qmax, self.zmax);
        let cap = self.cap();
        for d in 0..=self.qmax {
            for j in 0..=d {
                let c = f.coeff(j);
                if c.is_zero() {
                    continue;
                }
                // q^j = (q/z)^j z^j: column shift j
                for s in j..=cap {
                    let x = &self.data[d - j][s - j];
                    if !x.is_zero() {
                        out.data[d][s] += &(x * &c);
                    }
                }
            }
        }
        out
    }

    fn row_mul_into(acc: &mut [CycScalar], a: &[CycScalar], b: &[CycScalar], weight: Option<&Rational>) {
        let cap = acc.len() - 1;
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let x = match weight {
                Some(w) => x.scale(w),
                None => x.clone(),
            };
            for (j, y) in b[..=cap - i].iter().enumerate() {
                if !y.is_zero() {
                    acc[i + j] += &(&x * y);
                }
            }
        }
    }

    /// The constant (d = 0, m = 0) entry must be 1 and there may be no other q⁰ entries.
    fn unit_leading(&self) -> bool {
        self.data[0][0].is_one() && self.data[0][1..].iter().all(CycScalar::is_zero)
    }

    /// Logarithm of a series whose q⁰ part is exactly 1.
    pub fn log(&self) -> Result<Self> {
        if !self.unit_leading() {
            return Err(Error::Series("q^0 part equal to 1 for log"));
        }
        let mut out = Self::zero(self.qmax, self.zmax);
        let cap = self.cap();
        for d in 1..=self.qmax {
            // d·ℓ_d = d·f_d − Σ_{k=1}^{d−1} k·ℓ_k·f_{d−k}
            let mut acc = vec![CycScalar::zero(); cap + 1];
            for k in 1..d {
                let w = Rational::from_integer((-(k as i64)).into());
                Self::row_mul_into(&mut acc, &out.data[k], &self.data[d - k], Some(&w));
            }
            let inv_d = Rational::new(1.into(), (d as i64).into());
            for s in 0..=cap {
                let v = &self.data[d][s] + &acc[s].scale(&inv_d);
                out.data[d][s] = v;
            }
        }
        Ok(out)
    }

    /// Exponential of a series with vanishing q⁰ part.
    pub fn exp(&self) -> Result<Self> {
        if self.data[0].iter().any(|x| !x.is_zero()) {
            return Err(Error::Series("vanishing q^0 part for exp"));
        }
        let mut out = Self::one(self.qmax, self.zmax);
        let cap = self.cap();
        for d in 1..=self.qmax {
            let mut acc = vec![CycScalar::zero(); cap + 1];
            for k in 1..=d {
                let w = Rational::new((k as i64).into(), (d as i64).into());
                Self::row_mul_into(&mut acc, &self.data[k], &out.data[d - k], Some(&w));
            }
            out.data[d] = acc;
        }
        Ok(out)
    }

    /// True when no entry with negative z-exponent is present.
    pub fn is_pole_free(&self) -> bool {
        self.data.iter().enumerate().all(|(d, r)| r[..d].iter().all(CycScalar::is_zero))
    }

    /// The q-series of z^m coefficients, for m ≥ 0 within range at every degree.
    pub fn z_coeff(&self, m: i64) -> QSeries {
        QSeries::from_coeffs((0..=self.qmax).map(|d| self.coeff(d, m)).collect())
    }

    /// Largest q-degree at which z^m is still stored.
    pub fn valid_qmax_for(&self, m: i64) -> usize {
        ((self.cap() as i64 - m).max(0) as usize).min(self.qmax)
    }
}

impl Add for &QZSeries {
    type Output = QZSeries;
    fn add(self, o: &QZSeries) -> QZSeries {
        self.check_shape(o);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        QZSeries { qmax: self.qmax, zmax: self.zmax, data }
    }
}

impl Sub for &QZSeries {
    type Output = QZSeries;
    fn sub(self, o: &QZSeries) -> QZSeries {
        self.check_shape(o);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        QZSeries { qmax: self.qmax, zmax: self.zmax, data }
    }
}

impl Mul for &QZSeries {
    type Output = QZSeries;
    fn mul(self, o: &QZSeries) -> QZSeries {
        self.check_shape(o);
        let mut out = QZSeries::zero(self.qmax, self.zmax);
        for d in 0..=self.qmax {
            let mut acc = vec![CycScalar::zero(); self.cap() + 1];
            for k in 0..=d {
                QZSeries::row_mul_into(&mut acc, &self.data[k], &o.data[d - k], None);
            }
            out.data[d] = acc;
        }
        out
    }
}

/// Expansion around z = ∞: per q-degree, coefficients of z^e for
/// bottom ≤ e ≤ top. Everything above `top` is exactly zero; nothing below
/// `bottom` is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QInfSeries {
    top: i64,
    bottom: i64,
    data: Vec<Vec<CycScalar>>,
}

impl QInfSeries {
    pub fn zero(qmax: usize, top: i64, bottom: i64) -> Self {
        assert!(top >= bottom);
        QInfSeries { top, bottom, data: vec![vec![CycScalar::zero(); (top - bottom) as usize + 1]; qmax + 1] }
    }

    pub fn qmax(&self) -> usize {
        self.data.len() - 1
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn bottom(&self) -> i64 {
        self.bottom
    }

    /// Coefficient of q^d z^e; `None` below the known range.
    pub fn coeff(&self, d: usize, e: i64) -> Option<CycScalar> {
        if e > self.top {
            return Some(CycScalar::zero());
        }
        if e < self.bottom {
            return None;
        }
        Some(self.data[d][(self.top - e) as usize].clone())
    }

    /// The q-series of z^e coefficients.
    pub fn z_coeff(&self, e: i64) -> Option<QSeries> {
        (0..=self.qmax()).map(|d| self.coeff(d, e)).collect::<Option<Vec<_>>>().map(QSeries::from_coeffs)
    }

    /// c0·F + c1·z·D(F).
    pub fn apply_m(&self, c0: &CycScalar, c1: &CycScalar) -> Self {
        let mut out = Self::zero(self.qmax(), self.top + 1, self.bottom + 1);
        for d in 0..=self.qmax() {
            let k = c1.scale(&Rational::from_integer((d as i64).into()));
            for e in out.bottom..=out.top {
                let mut v = CycScalar::zero();
                if let Some(x) = self.coeff(d, e) {
                    v += &(&x * c0);
                }
                if let Some(x) = self.coeff(d, e - 1) {
                    v += &(&x * &k);
                }
                out.data[d][(out.top - e) as usize] = v;
            }
        }
        out
    }

    /// Multiplication by a z-independent series.
    pub fn mul_qseries(&self, f: &QSeries) -> Self {
        let n = self.qmax().min(f.qmax());
        let mut out = Self::zero(n, self.top, self.bottom);
        for d in 0..=n {
            for j in 0..=d {
                let c = f.coeff(j);
                if c.is_zero() {
                    continue;
                }
                for (idx, x) in self.data[d - j].iter().enumerate() {
                    if !x.is_zero() {
                        out.data[d][idx] += &(x * &c);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{int, rat};

    fn qs(v: &[i64]) -> QSeries {
        QSeries::from_rationals(v.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn exp_log_round_trip() {
        let x = qs(&[1, 1, 0, 0, 0, 0]);
        let back = x.log().unwrap().exp().unwrap();
        assert_eq!(back, x);
        assert_eq!(QSeries::zero(4).exp().unwrap(), QSeries::one(4));
        assert!(qs(&[1, 2]).exp().is_err());
    }

    #[test]
    fn inverse_of_one_plus_q() {
        let inv = qs(&[1, 1, 0, 0, 0]).inv().unwrap();
        assert_eq!(inv, qs(&[1, -1, 1, -1, 1]));
    }

    #[test]
    fn pow_ratio_cube_root() {
        let x = qs(&[1, 27, 0, 0, 0, 0, 0]);
        let l = x.pow_ratio(&rat(-1, 3)).unwrap();
        assert_eq!(l.coeff(1), CycScalar::from_int(-9));
        assert_eq!(l.coeff(2), CycScalar::from_int(162));
        let cube = &(&l * &l) * &l;
        assert_eq!(&cube * &x, QSeries::one(6));
    }

    #[test]
    fn compose_needs_zero_constant() {
        let f = qs(&[0, 1, 1, 0]);
        assert!(f.compose(&qs(&[1, 1, 0, 0])).is_err());
        // f(f(q)) = q + 2q^2 + 2q^3 + ...
        assert_eq!(f.compose(&f).unwrap(), qs(&[0, 1, 2, 2]));
    }

    fn toy_ratfun(qmax: usize) -> RatFunZ {
        // degree d: 1 / ∏_{k=1}^d (k z (1 + z))
        let terms = (0..=qmax)
            .map(|d| RatTerm {
                num: vec![],
                den: (1..=d)
                    .flat_map(|k| {
                        [
                            LinFactor::new(CycScalar::zero(), CycScalar::from_int(k as i64)),
                            LinFactor::new(CycScalar::one(), CycScalar::one()),
                        ]
                    })
                    .collect(),
            })
            .collect();
        RatFunZ { terms }
    }

    #[test]
    fn expansion_respects_pole_bound() {
        let f = toy_ratfun(4);
        let e = f.expand_at_zero(3).unwrap();
        assert!(e.coeff(0, 0).is_one());
        for d in 1..=4 {
            assert!(!e.coeff(d, -(d as i64)).is_zero());
        }
        // degree 1: 1/(z(1+z)) = z^{-1} − 1 + z − ...
        assert_eq!(e.coeff(1, 0), CycScalar::from_int(-1));
        assert_eq!(e.coeff(1, 2), CycScalar::from_int(-1));
    }

    #[test]
    fn untracked_zero_denominator() {
        let f = RatFunZ {
            terms: vec![RatTerm { num: vec![], den: vec![LinFactor::new(CycScalar::zero(), CycScalar::zero())] }],
        };
        assert!(f.expand_at_zero(2).is_err());
        let g = RatFunZ {
            terms: vec![RatTerm { num: vec![], den: vec![LinFactor::new(CycScalar::zero(), CycScalar::one())] }],
        };
        assert!(matches!(g.expand_at_zero(2), Err(Error::PoleBound { .. })));
    }

    #[test]
    fn limit_and_infinity_expansion_agree() {
        let f = toy_ratfun(3).apply_m(&CycScalar::one(), &CycScalar::one());
        let lim = f.limit_at_infinity().unwrap();
        let inf = f.expand_at_infinity(0, -2).unwrap();
        assert_eq!(inf.z_coeff(0).unwrap(), lim);
        assert!(toy_ratfun(2).apply_m(&CycScalar::zero(), &CycScalar::one()).apply_m(&CycScalar::zero(), &CycScalar::one()).apply_m(&CycScalar::zero(), &CycScalar::one()).limit_at_infinity().is_err());
    }

    #[test]
    fn qz_log_exp_round_trip() {
        let e = toy_ratfun(4).expand_at_zero(3).unwrap();
        let back = e.log().unwrap().exp().unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn qz_derivation_rule() {
        let e = toy_ratfun(3).expand_at_zero(2).unwrap();
        let f = e.mul_z();
        let lhs = (&e * &f).deriv_q();
        let rhs = &(&e.deriv_q() * &f) + &(&e * &f.deriv_q());
        assert_eq!(lhs, rhs);
    }
}
