//! μ and the asymptotic rows R_{m,k} as elements of the ring.
//!
//! With u = z/w_i one has Ī|_{H=w_i}(z) = Ī|_{H=1}(u), so every row is read
//! off at fixed point 0 and reused at the other two points.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{solve, solve_many};
use crate::lring::{GeneratorSeries, RingElem};
use crate::mirror::{ibar_at_zero, MirrorData};
use crate::scalars::{rat, CycScalar};
use crate::series::{QSeries, QZSeries};

/// Truncation in q needed to fit rows up to z^kmax with room to spare.
///
/// The shared fit window L^{−3..2kmax+1}·{1, X} has 4kmax + 10 unknowns.
pub fn required_qmax(kmax: usize) -> usize {
    4 * kmax + 12
}

/// μ = [z^{−1}] log Ī|_{H=w_i} / w_i, after checking deeper poles vanish.
pub fn extract_mu(expansion: &QZSeries, w: &CycScalar) -> Result<QSeries> {
    let lg = expansion.log()?;
    for (d, m, _) in lg.entries() {
        if m <= -2 {
            return Err(Error::Consistency(format!("log of the I-function has a z^{m} pole at q^{d}")));
        }
    }
    let winv = w.inv()?;
    Ok(QSeries::from_coeffs((0..=lg.qmax()).map(|d| &lg.coeff(d, -1) * &winv).collect()))
}

#[derive(Clone, Debug)]
pub struct AsymptoticData {
    pub kmax: usize,
    pub qmax: usize,
    pub mu: QSeries,
    /// Hat series for rows 0, 1, 2 at fixed point 0, prefactors divided out.
    pub shat: Vec<QZSeries>,
    /// rows[m][k] = R_{m,k}.
    pub rows: Vec<Vec<RingElem>>,
}

impl AsymptoticData {
    pub fn r(&self, m: usize, k: usize) -> &RingElem {
        &self.rows[m][k]
    }

    /// R_{m,k}, or zero for negative k.
    pub fn r_or_zero(&self, m: usize, k: i64) -> RingElem {
        if k < 0 {
            RingElem::zero()
        } else {
            self.rows[m][k as usize].clone()
        }
    }
}

fn fit_columns(gens: &GeneratorSeries, lo: i32, hi: i32, xdeg: u32) -> Vec<(RingElem, QSeries)> {
    let mut out = Vec::new();
    for x in 0..=xdeg {
        for e in lo..=hi {
            let mono = RingElem::l(e).shift(0, x, 0);
            let s = mono.evaluate(gens);
            out.push((mono, s));
        }
    }
    out
}

/// Fits `target` to Σ a_{e,x} L^e X^x over the given window.
pub fn fit_laurent(target: &QSeries, gens: &GeneratorSeries, lo: i32, hi: i32, xdeg: u32) -> Result<RingElem> {
    let cols = fit_columns(gens, lo, hi, xdeg);
    let n = target.qmax().min(gens.qmax());
    if n + 1 < cols.len() {
        return Err(Error::Fit(format!("{} unknowns but only {} coefficients", cols.len(), n + 1)));
    }
    let rows: Vec<Vec<CycScalar>> = (0..=n).map(|d| cols.iter().map(|(_, s)| s.coeff(d)).collect()).collect();
    let rhs: Vec<CycScalar> = (0..=n).map(|d| target.coeff(d)).collect();
    let sol = solve(&rows, &rhs)?;
    Ok(cols.iter().zip(sol).map(|((m, _), a)| m.scale(&a)).sum())
}

/// Computes μ, the hat series and the fitted rows up to z^kmax.
pub fn extract_r_rows(mirror: &MirrorData, kmax: usize) -> Result<AsymptoticData> {
    let qmax = mirror.qmax;
    if qmax < required_qmax(kmax) {
        return Err(Error::Fit(format!("q-order {qmax} too small for kmax {kmax}; need {}", required_qmax(kmax))));
    }
    let gens = &mirror.generators;
    let one = CycScalar::one();
    let g = ibar_at_zero(0, qmax, kmax)?;
    let mu = extract_mu(&g, &one)?;

    let mut neg_mu_over_u = QZSeries::zero(qmax, kmax);
    for d in 1..=qmax {
        neg_mu_over_u.set(d, -1, -mu.coeff(d));
    }
    let e = neg_mu_over_u.exp()?;

    let m_op = |f: &QZSeries| f + &f.deriv_q().mul_z();
    let c = &gens.c;
    let j1 = m_op(&g).mul_qseries(c);
    let c2inv = mirror.birkhoff.c2.inv()?;
    let j2 = m_op(&j1).mul_qseries(&c2inv);

    // prefactors 1, L·c and L²c/C₂ = L⁻¹c⁻¹
    let pre1_inv = &gens.l_inv * &gens.c_inv;
    let pre2_inv = &gens.l * c;
    let shat = vec![&g * &e, (&j1 * &e).mul_qseries(&pre1_inv), (&j2 * &e).mul_qseries(&pre2_inv)];
    for (m, h) in shat.iter().enumerate() {
        if !h.is_pole_free() {
            return Err(Error::Consistency(format!("hat series of row {m} keeps a pole in z")));
        }
    }

    // one elimination over the widest window; each row must land in its own
    // window L^{−m..2k}, which also rules out leakage into a wider one
    let (lo, hi) = (-3, 2 * kmax as i32 + 1);
    let cols = fit_columns(gens, lo, hi, 1);
    let jobs: Vec<(usize, usize)> = (0..3).flat_map(|m| (0..=kmax).map(move |k| (m, k))).collect();
    let targets: Vec<QSeries> = jobs.iter().map(|&(m, k)| shat[m].z_coeff(k as i64)).collect();
    let matrix: Vec<Vec<CycScalar>> = (0..=qmax).map(|d| cols.iter().map(|(_, s)| s.coeff(d)).collect()).collect();
    let rhs: Vec<Vec<CycScalar>> = targets.iter().map(|t| (0..=qmax).map(|d| t.coeff(d)).collect()).collect();
    let sols = solve_many(&matrix, &rhs)?;
    let fitted: Vec<Result<RingElem>> = jobs
        .par_iter()
        .zip(sols.into_par_iter())
        .zip(targets.par_iter())
        .map(|((&(m, k), sol), target)| {
            let r: RingElem = cols.iter().zip(sol).map(|((mono, _), a)| mono.scale(&a)).sum();
            if let Some((a, b)) = r.l_range() {
                if a < -(m as i32) || b > 2 * k as i32 {
                    return Err(Error::Consistency(format!("R_{m},{k} leaves its L-window")));
                }
            }
            if &r.evaluate(gens) != target {
                return Err(Error::Consistency(format!("fit of R_{m},{k} does not reproduce its series")));
            }
            Ok(r)
        })
        .collect();
    let mut rows: Vec<Vec<RingElem>> = (0..3).map(|_| Vec::with_capacity(kmax + 1)).collect();
    for ((m, _), r) in jobs.iter().zip(fitted) {
        rows[*m].push(r?);
    }

    for k in 0..=kmax {
        for m in 0..2 {
            if rows[m][k].x_degree().unwrap_or(0) > 0 {
                return Err(Error::Consistency(format!("R_{m},{k} depends on X")));
            }
        }
        let expected = if k == 0 { RingElem::zero() } else { -&rows[1][k - 1].shift(-1, 0, 0) };
        if rows[2][k].x_coeff(1) != expected || rows[2][k].x_degree().unwrap_or(0) > 1 {
            return Err(Error::Consistency(format!("X-part of R_2,{k} is not -R_1,{}/L", k as i64 - 1)));
        }
    }
    if !rows[0][0].terms().iter().all(|(k, v)| *k == (0, 0, 0) && v.is_one()) {
        return Err(Error::Consistency("R_0,0 differs from 1".into()));
    }
    Ok(AsymptoticData { kmax, qmax, mu, shat, rows })
}

/// 1 + Dμ − L as a q-series.
pub fn mu_residual(data: &AsymptoticData, mirror: &MirrorData) -> QSeries {
    let one = QSeries::one(data.qmax);
    &(&one + &data.mu.deriv()) - &mirror.generators.l
}

/// DL/L² − X/L = (L² − L⁻¹)/3 − X/L.
fn twist() -> RingElem {
    RingElem::from_terms([
        ((2, 0, 0), CycScalar::from(rat(1, 3))),
        ((-1, 0, 0), CycScalar::from(rat(-1, 3))),
        ((-1, 1, 0), CycScalar::from_int(-1)),
    ])
}

#[derive(Clone, Debug)]
pub struct LemmaRReport {
    /// (relation label, p, residual).
    pub residuals: Vec<(String, usize, RingElem)>,
    /// D(X) recovered from the third relation at p = 1, minus the ring rule.
    pub drule_residual: RingElem,
}

impl LemmaRReport {
    pub fn pass(&self) -> bool {
        self.drule_residual.is_zero() && self.residuals.iter().all(|(_, _, r)| r.is_zero())
    }
}

/// Checks the recursions linking the three rows, for p ≤ kmax − 2.
pub fn verify_lemma_r(data: &AsymptoticData) -> Result<LemmaRReport> {
    let r = |m: usize, k: usize| data.r(m, k).clone();
    let inv_l = |f: &RingElem| f.shift(-1, 0, 0);
    let tw = twist();
    let mut residuals = Vec::new();
    if data.kmax < 2 {
        return Err(Error::Fit("kmax of at least 2 needed for the recursions".into()));
    }
    for p in 0..=data.kmax - 2 {
        let row1 = &(&r(0, p + 1) + &inv_l(&r(0, p).derive())) - &r(1, p + 1);
        residuals.push(("row1".to_string(), p, row1));

        let row2 = &(&(&r(1, p + 1) + &inv_l(&r(1, p).derive())) + &(&tw * &r(1, p))) - &r(2, p + 1);
        residuals.push(("row2".to_string(), p, row2));

        let row0 = &(&(&r(2, p + 1) + &inv_l(&r(2, p).derive())) - &(&tw * &r(2, p))) - &r(0, p + 1);
        residuals.push(("row0".to_string(), p, row0));

        // R_{2,p+2} = R_{p+2} + 2DR_{p+1}/L + (DL/L²)R_{p+1} + D²R_p/L² − (R_{p+1}/L + DR_p/L²)X
        let dl_over_l2 = RingElem::from_terms([
            ((2, 0, 0), CycScalar::from(rat(1, 3))),
            ((-1, 0, 0), CycScalar::from(rat(-1, 3))),
        ]);
        let rp = r(0, p);
        let rp1 = r(0, p + 1);
        let closed = [
            r(0, p + 2),
            inv_l(&rp1.derive()).scale(&CycScalar::from_int(2)),
            &dl_over_l2 * &rp1,
            rp.derive().derive().shift(-2, 0, 0),
            -&(&inv_l(&rp1) + &rp.derive().shift(-2, 0, 0)).shift(0, 1, 0),
        ]
        .into_iter()
        .sum::<RingElem>();
        residuals.push(("closed".to_string(), p, &closed - &r(2, p + 2)));
    }

    // third relation at p = 1 with D(X) left as an unknown Y: A + B·Y = 0
    let rel = |dx: &RingElem| {
        &(&(&r(2, 2) + &inv_l(&r(2, 1).derive_with(dx))) - &(&tw * &r(2, 1))) - &r(0, 2)
    };
    let a = rel(&RingElem::zero());
    let b = &rel(&RingElem::one()) - &a;
    let drule_residual = match b.terms().iter().collect::<Vec<_>>().as_slice() {
        [(&(l, 0, 0), coef)] => {
            let y = -&a.shift(-l, 0, 0).scale(&coef.inv()?);
            &y - &crate::lring::d_x()
        }
        _ => return Err(Error::Consistency("coefficient of D(X) is not a unit monomial".into())),
    };
    Ok(LemmaRReport { residuals, drule_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    #[test]
    fn small_rows() {
        let mirror = MirrorData::new(required_qmax(3)).unwrap();
        let data = extract_r_rows(&mirror, 3).unwrap();
        assert_eq!(data.r(0, 1), &RingElem::laurent_l(0, &[rat(1, 18), rat(0, 1), rat(-1, 18)]));
        assert_eq!(
            data.r(0, 2),
            &RingElem::laurent_l(0, &[rat(1, 648), rat(-24, 648), rat(-2, 648), rat(0, 1), rat(25, 648)])
        );
        assert!(data.mu.coeff(0).is_zero());
        assert!(mu_residual(&data, &mirror).is_zero());
        assert!(mirror.generators.rule_residuals().iter().all(QSeries::is_zero));
        let report = verify_lemma_r(&data).unwrap();
        assert!(report.pass(), "{:?}", report);
    }
}
