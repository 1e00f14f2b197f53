//! The small I-function at the fixed points, its Picard–Fuchs equation, the
//! normalization series C₀, C₁, C₂ and the mirror map.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lring::GeneratorSeries;
use crate::scalars::{factorial, int, rat, weight, CycScalar, Rational};
use crate::series::{LinFactor, QInfSeries, QSeries, QZSeries, RatFunZ, RatTerm};

/// Ī restricted to H = w_i at t = 0:
/// Σ_d q^d ∏_{k<3d}(−3w_i − kz) / ∏_j ∏_{k=1}^d (w_i − w_j + kz).
pub fn build_ibar(i: usize, qmax: usize) -> Result<RatFunZ> {
    let wi = weight(i)?;
    let w: Vec<CycScalar> = (0..3).map(|j| weight(j).unwrap()).collect();
    let minus3wi = wi.scale(&int(-3));
    let terms = (0..=qmax)
        .map(|d| {
            let num = (0..3 * d)
                .map(|k| LinFactor::new(minus3wi.clone(), CycScalar::from_int(-(k as i64))))
                .collect();
            let mut den = Vec::with_capacity(3 * d);
            for wj in &w {
                for k in 1..=d {
                    den.push(LinFactor::new(&wi - wj, CycScalar::from_int(k as i64)));
                }
            }
            RatTerm { num, den }
        })
        .collect();
    Ok(RatFunZ { terms })
}

/// Ī at H = w_i expanded around z = 0, through the ratio of consecutive
/// q-terms: ∏_{k=3d−3}^{3d−1}(−3w − kz) / (dz(3w² + 3wdz + d²z²)), using
/// ∏_j (w_i − w_j + kz) = (w_i + kz)³ − 1.
pub fn ibar_at_zero(i: usize, qmax: usize, zmax: usize) -> Result<QZSeries> {
    let w = weight(i)?;
    let mut out = QZSeries::zero(qmax, zmax);
    let cap = zmax + qmax;
    // v[s] holds the coefficient of z^{s−d}
    let mut v = vec![CycScalar::zero(); cap + 1];
    v[0] = CycScalar::one();
    out.set(0, 0, CycScalar::one());
    let minus3w = w.scale(&int(-3));
    let q0_inv = (&w * &w).scale(&int(3)).inv()?;
    for d in 1..=qmax {
        for k in 3 * d - 3..3 * d {
            let c1 = CycScalar::from_int(-(k as i64));
            for s in (0..=cap).rev() {
                let mut x = &v[s] * &minus3w;
                if s > 0 && !v[s - 1].is_zero() {
                    x += &(&v[s - 1] * &c1);
                }
                v[s] = x;
            }
        }
        let dd = d as i64;
        let q1 = w.scale(&int(3 * dd));
        let q2 = CycScalar::from_int(dd * dd);
        for s in 0..=cap {
            let mut x = v[s].clone();
            if s >= 1 {
                x -= &(&q1 * &v[s - 1]);
            }
            if s >= 2 {
                x -= &(&q2 * &v[s - 2]);
            }
            v[s] = &x * &q0_inv;
        }
        let dinv = CycScalar::from(rat(1, dd));
        for x in v.iter_mut() {
            *x = &*x * &dinv;
        }
        for (s, x) in v.iter().enumerate() {
            if !x.is_zero() {
                out.set(d, s as i64 - d as i64, x.clone());
            }
        }
    }
    Ok(out)
}

/// M = w + zD on the z → 0 frame.
fn apply_m(f: &QZSeries, w: &CycScalar) -> QZSeries {
    &f.scale(w) + &f.deriv_q().mul_z()
}

/// Residual of (M³ − 1 + 3qM(3M+z)(3M+2z))Ī at fixed point i.
pub fn verify_pf(i: usize, qmax: usize, zmax: usize) -> Result<QZSeries> {
    pf_residual(i, qmax, zmax, true)
}

/// As `verify_pf`, optionally without the q-correction term.
pub fn pf_residual(i: usize, qmax: usize, zmax: usize, with_correction: bool) -> Result<QZSeries> {
    let w = weight(i)?;
    let g = ibar_at_zero(i, qmax, zmax)?;
    let m1 = apply_m(&g, &w);
    let m2 = apply_m(&m1, &w);
    let m3 = apply_m(&m2, &w);
    let mut res = &m3 - &g;
    if with_correction {
        let inner = &m1.scale(&CycScalar::from_int(3)) + &g.mul_z().scale(&CycScalar::from_int(2));
        let mid = &apply_m(&inner, &w).scale(&CycScalar::from_int(3)) + &inner.mul_z();
        let outer = apply_m(&mid, &w).mul_q().scale(&CycScalar::from_int(3));
        res = &res + &outer;
    }
    Ok(res)
}

/// 3Σ_{d≥1} (−q)^d (3d−1)!/(d!)³, the series T − log q.
pub fn t_minus_log_q(qmax: usize) -> QSeries {
    let mut c = vec![Rational::zero(); qmax + 1];
    for (d, slot) in c.iter_mut().enumerate().skip(1) {
        let f = factorial(d as u64);
        let v = Rational::new(factorial(3 * d as u64 - 1) * BigInt::from(3), &f * &f * &f);
        *slot = if d % 2 == 1 { -v } else { v };
    }
    QSeries::from_rationals(c)
}

/// C₁ = 1 + D(T − log q).
pub fn c1_closed_form(qmax: usize) -> QSeries {
    &QSeries::one(qmax) + &t_minus_log_q(qmax).deriv()
}

/// (T − log q, Q(q)/q).
pub fn mirror_map(qmax: usize) -> Result<(QSeries, QSeries)> {
    let t = t_minus_log_q(qmax);
    let e = t.exp()?;
    Ok((t, e))
}

/// Normalization series and the z → ∞ data they come from.
#[derive(Clone, Debug)]
pub struct Birkhoff {
    pub c0: QSeries,
    pub c1: QSeries,
    pub c2: QSeries,
    /// MĪ, M S̄(H) and M S̄(H²) at fixed point 0, expanded around z = ∞.
    pub m_ibar: QInfSeries,
    pub m2_ibar: QInfSeries,
    pub m3_ibar: QInfSeries,
}

fn constant_term(f: &QInfSeries, what: &str) -> Result<QSeries> {
    for e in 1..=f.top() {
        let pos = f.z_coeff(e).expect("above bottom");
        if !pos.is_zero() {
            return Err(Error::Consistency(format!("{what}: positive power z^{e} survives at z = infinity")));
        }
    }
    f.z_coeff(0).ok_or(Error::Series("enough depth at z = infinity"))
}

/// C₁, C₂, C₀ from the z → ∞ limits of the normalization chain at H = 1.
pub fn birkhoff_normalizations(qmax: usize) -> Result<Birkhoff> {
    let one = CycScalar::one();
    let ibar = build_ibar(0, qmax)?.expand_at_infinity(0, -3)?;
    let m_ibar = ibar.apply_m(&one, &one);
    let c1 = constant_term(&m_ibar, "M I")?;
    let s1 = m_ibar.mul_qseries(&c1.inv()?);
    let m2_ibar = s1.apply_m(&one, &one);
    let c2 = constant_term(&m2_ibar, "M S(H)")?;
    let s2 = m2_ibar.mul_qseries(&c2.inv()?);
    let m3_ibar = s2.apply_m(&one, &one);
    let c0 = constant_term(&m3_ibar, "M S(H^2)")?;

    if c0 != c1 {
        return Err(Error::Consistency("C0 differs from C1".into()));
    }
    let prod = &(&(&c0 * &c1) * &c2) * &(&QSeries::one(qmax) + &QSeries::monomial(CycScalar::from_int(27), 1, qmax));
    if prod != QSeries::one(qmax) {
        return Err(Error::Consistency("C0*C1*C2*(1+27q) differs from 1".into()));
    }
    if c1 != c1_closed_form(qmax) {
        return Err(Error::Consistency("limit-based C1 differs from the closed form".into()));
    }
    Ok(Birkhoff { c0, c1, c2, m_ibar, m2_ibar, m3_ibar })
}

/// Everything the later layers read from the genus-zero side.
#[derive(Clone, Debug)]
pub struct MirrorData {
    pub qmax: usize,
    pub ibar: Vec<RatFunZ>,
    pub birkhoff: Birkhoff,
    pub t_minus_log_q: QSeries,
    pub q_of_q: QSeries,
    pub generators: GeneratorSeries,
}

impl MirrorData {
    pub fn new(qmax: usize) -> Result<Self> {
        let ibar = (0..3).map(|i| build_ibar(i, qmax)).collect::<Result<Vec<_>>>()?;
        let birkhoff = birkhoff_normalizations(qmax)?;
        let (t, qq) = mirror_map(qmax)?;
        let generators = generator_series(&birkhoff.c1)?;
        Ok(MirrorData { qmax, ibar, birkhoff, t_minus_log_q: t, q_of_q: qq, generators })
    }

    pub fn c1(&self) -> &QSeries {
        &self.birkhoff.c1
    }
}

/// L = (1+27q)^{−1/3}.
pub fn l_series(qmax: usize) -> QSeries {
    let base = &QSeries::one(qmax) + &QSeries::monomial(CycScalar::from_int(27), 1, qmax);
    base.pow_ratio(&rat(-1, 3)).expect("constant term 1")
}

/// Series images of L, X, c built from C₁.
pub fn generator_series(c1: &QSeries) -> Result<GeneratorSeries> {
    let qmax = c1.qmax();
    let l = l_series(qmax);
    let l_inv = l.inv()?;
    let c = c1.inv()?;
    let x = &c1.deriv() * &c;
    Ok(GeneratorSeries { l, l_inv, x, c, c_inv: c1.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_term_at_fixed_point_zero() {
        let f = build_ibar(0, 1).unwrap();
        let t = &f.terms[1];
        assert_eq!(t.num.len(), 3);
        assert_eq!(t.num[0].c0, CycScalar::from_int(-3));
        assert_eq!(t.den.iter().filter(|f| f.c0.is_zero()).count(), 1);
        assert!(f.terms[0].num.is_empty() && f.terms[0].den.is_empty());
    }

    #[test]
    fn recurrence_matches_direct_expansion() {
        for i in 0..3 {
            assert_eq!(ibar_at_zero(i, 5, 3).unwrap(), build_ibar(i, 5).unwrap().expand_at_zero(3).unwrap());
        }
    }

    #[test]
    fn picard_fuchs_small() {
        for i in 0..3 {
            assert!(verify_pf(i, 5, 4).unwrap().is_zero());
        }
        let bad = pf_residual(0, 3, 3, false).unwrap();
        assert!(bad.entries().iter().any(|(d, _, _)| *d == 1));
    }

    #[test]
    fn normalizations() {
        let b = birkhoff_normalizations(6).unwrap();
        assert_eq!(b.c1.coeff(1), CycScalar::from_int(-6));
        assert_eq!(b.c1.coeff(2), CycScalar::from_int(90));
    }

    #[test]
    fn mirror_map_coefficients() {
        let (t, qq) = mirror_map(4).unwrap();
        assert_eq!(t.coeff(1), CycScalar::from_int(-6));
        assert_eq!(t.coeff(2), CycScalar::from_int(45));
        assert_eq!(qq.coeff(1), CycScalar::from_int(-6));
    }

    #[test]
    fn limit_of_ibar_is_one() {
        let lim = build_ibar(0, 5).unwrap().limit_at_infinity().unwrap();
        assert_eq!(lim, QSeries::one(5));
        let c1 = build_ibar(0, 5).unwrap().apply_m(&CycScalar::one(), &CycScalar::one()).limit_at_infinity().unwrap();
        assert_eq!(c1, c1_closed_form(5));
    }
}
