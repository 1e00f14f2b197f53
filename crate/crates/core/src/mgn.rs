//! Intersection numbers on moduli spaces of stable curves.
//!
//! ψ-integrals come from the DVV recursion. Hodge classes are rewritten as
//! polynomials in odd Chern characters of the Hodge bundle, and each
//! character is removed with Mumford's formula
//!
//! ch_{2l−1}(E) = B_{2l}/(2l)! [κ_{2l−1} − Σ ψ_i^{2l−1}
//!                 + ½ Σ_boundary ι_*(Σ_{a+b=2l−2} (−1)^a ψ_•^a ψ_∘^b)].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::{factorial, int, rat, weight, CycScalar, Rational};

/// Largest genus supported by the Hodge reduction.
pub const MAX_HODGE_GENUS: usize = 2;

type PsiKey = (usize, Vec<u32>);
type ChKey = (usize, Vec<u32>, Vec<u32>);

fn psi_memo() -> &'static Mutex<HashMap<PsiKey, Rational>> {
    static M: OnceLock<Mutex<HashMap<PsiKey, Rational>>> = OnceLock::new();
    M.get_or_init(Default::default)
}

fn ch_memo() -> &'static Mutex<HashMap<ChKey, Rational>> {
    static M: OnceLock<Mutex<HashMap<ChKey, Rational>>> = OnceLock::new();
    M.get_or_init(Default::default)
}

fn is_stable(g: usize, n: usize) -> bool {
    2 * g + n > 2
}

fn dim(g: usize, n: usize) -> i64 {
    3 * g as i64 - 3 + n as i64
}

fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// ∫_{M̄_{g,n}} ψ_1^{a_1}⋯ψ_n^{a_n}.
pub fn psi_integral(g: usize, exps: &[u32]) -> Result<Rational> {
    if !is_stable(g, exps.len()) {
        return Err(Error::Unstable { g, n: exps.len() });
    }
    Ok(psi(g, exps))
}

fn psi(g: usize, exps: &[u32]) -> Rational {
    let n = exps.len();
    if !is_stable(g, n) {
        return Rational::zero();
    }
    if exps.iter().map(|&a| a as i64).sum::<i64>() != dim(g, n) {
        return Rational::zero();
    }
    let mut key = exps.to_vec();
    key.sort_unstable();
    if let Some(v) = psi_memo().lock().unwrap().get(&(g, key.clone())) {
        return v.clone();
    }
    let v = psi_uncached(g, &key);
    psi_memo().lock().unwrap().insert((g, key), v.clone());
    v
}

fn psi_uncached(g: usize, a: &[u32]) -> Rational {
    let n = a.len();
    if g == 0 && n == 3 {
        return Rational::one();
    }
    if g == 1 && n == 1 {
        return rat(1, 24);
    }
    if let Some(p) = a.iter().position(|&x| x == 0) {
        // string equation
        let rest: Vec<u32> = a.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &x)| x).collect();
        let mut acc = Rational::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut b = rest.clone();
                b[j] -= 1;
                acc += psi(g, &b);
            }
        }
        return acc;
    }
    if let Some(p) = a.iter().position(|&x| x == 1) {
        // dilaton equation
        let rest: Vec<u32> = a.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &x)| x).collect();
        return int(2 * g as i64 - 2 + n as i64 - 1) * psi(g, &rest);
    }
    // DVV on the first marking, a_1 = k + 1 ≥ 2
    let k = a[0] as i64 - 1;
    let d = &a[1..];
    let mut acc = Rational::zero();
    for j in 0..d.len() {
        let dj = d[j] as i64;
        let coef = Rational::new(double_factorial(2 * k + 2 * dj + 1), double_factorial(2 * dj - 1));
        let mut b = d.to_vec();
        b[j] = (dj + k) as u32;
        acc += coef * psi(g, &b);
    }
    for r in 0..k {
        let s = k - 1 - r;
        let coef = Rational::from_integer(double_factorial(2 * r + 1) * double_factorial(2 * s + 1)) * rat(1, 2);
        if g >= 1 {
            let mut b = vec![r as u32, s as u32];
            b.extend_from_slice(d);
            acc += &coef * psi(g - 1, &b);
        }
        let m = d.len();
        for g1 in 0..=g {
            for mask in 0..(1u32 << m) {
                let mut left = vec![r as u32];
                let mut right = vec![s as u32];
                for (i, &x) in d.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.push(x);
                    } else {
                        right.push(x);
                    }
                }
                let l = psi(g1, &left);
                if l.is_zero() {
                    continue;
                }
                acc += &coef * l * psi(g - g1, &right);
            }
        }
    }
    acc / Rational::from_integer(double_factorial(2 * k + 3))
}

/// Bernoulli numbers B_0..=B_n with B_1 = −1/2.
fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b = vec![Rational::zero(); n + 1];
    b[0] = Rational::one();
    for m in 1..=n {
        let mut acc = Rational::zero();
        for k in 0..m {
            acc += Rational::from_integer(binomial(m as u64 + 1, k as u64)) * &b[k];
        }
        b[m] = -acc / int(m as i64 + 1);
    }
    b
}

fn binomial(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// ∫_{M̄_{g,n}} ∏ψ_i^{a_i} · ∏_j ch_{k_j}(E).
pub fn ch_psi_integral(g: usize, exps: &[u32], chs: &[u32]) -> Rational {
    let n = exps.len();
    if !is_stable(g, n) {
        return Rational::zero();
    }
    let total: i64 = exps.iter().chain(chs).map(|&x| x as i64).sum();
    if total != dim(g, n) {
        return Rational::zero();
    }
    if chs.is_empty() {
        return psi(g, exps);
    }
    if g == 0 || chs.iter().any(|&k| k % 2 == 0) {
        return Rational::zero();
    }
    let mut pk = exps.to_vec();
    pk.sort_unstable();
    let mut ck = chs.to_vec();
    ck.sort_unstable();
    let key = (g, pk, ck);
    if let Some(v) = ch_memo().lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = ch_uncached(g, &key.1, &key.2);
    ch_memo().lock().unwrap().insert(key, v.clone());
    v
}

fn ch_uncached(g: usize, exps: &[u32], chs: &[u32]) -> Rational {
    let k = chs[0];
    let rest = &chs[1..];
    let n = exps.len();
    let bern = bernoulli(k as usize + 1);
    let pref = &bern[k as usize + 1] / Rational::from_integer(factorial(k as u64 + 1));

    // κ_k = π_*(ψ_{n+1}^{k+1}); Hodge classes pull back along π
    let mut with_kappa = exps.to_vec();
    with_kappa.push(k + 1);
    let mut acc = ch_psi_integral(g, &with_kappa, rest);

    for i in 0..n {
        let mut b = exps.to_vec();
        b[i] += k;
        acc -= ch_psi_integral(g, &b, rest);
    }

    let mut boundary = Rational::zero();
    for a in 0..k {
        let b = k - 1 - a;
        let sign = if a % 2 == 0 { Rational::one() } else { -Rational::one() };
        let mut term = Rational::zero();
        if g >= 1 {
            let mut e = exps.to_vec();
            e.push(a);
            e.push(b);
            term += ch_psi_integral(g - 1, &e, rest);
        }
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0..(1u32 << n) {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (i, &x) in exps.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.push(x);
                    } else {
                        right.push(x);
                    }
                }
                if !is_stable(g1, left.len() + 1) || !is_stable(g2, right.len() + 1) {
                    continue;
                }
                left.push(a);
                right.push(b);
                // ch(E₁ ⊕ E₂) = ch(E₁) + ch(E₂): distribute the remaining characters
                for cmask in 0..(1u32 << rest.len()) {
                    let mut c1 = Vec::new();
                    let mut c2 = Vec::new();
                    for (j, &c) in rest.iter().enumerate() {
                        if cmask & (1 << j) != 0 {
                            c1.push(c);
                        } else {
                            c2.push(c);
                        }
                    }
                    let l = ch_psi_integral(g1, &left, &c1);
                    if l.is_zero() {
                        continue;
                    }
                    term += l * ch_psi_integral(g2, &right, &c2);
                }
            }
        }
        boundary += sign * term;
    }
    acc += boundary * rat(1, 2);
    pref * acc
}

/// Polynomial in the Chern characters ch_1, ch_3, …; keys are sorted index lists.
pub type ChPoly = BTreeMap<Vec<u32>, Rational>;

fn ch_mul(a: &ChPoly, b: &ChPoly) -> ChPoly {
    let mut out = ChPoly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let mut k = ka.clone();
            k.extend_from_slice(kb);
            k.sort_unstable();
            let e = out.entry(k).or_insert_with(Rational::zero);
            *e += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// λ_m as a polynomial in odd Chern characters (Newton's identities with
/// ch_{2l} = 0 for l ≥ 1).
pub fn lambda_as_ch(m: u32) -> ChPoly {
    let mut e: Vec<ChPoly> = vec![ChPoly::from([(vec![], Rational::one())])];
    for j in 1..=m {
        let mut acc = ChPoly::new();
        for i in (1..=j).step_by(2) {
            // p_i = i!·ch_i; even power sums vanish
            let p = ChPoly::from([(vec![i], Rational::from_integer(factorial(i as u64)))]);
            let sign = if (i - 1) % 2 == 0 { Rational::one() } else { -Rational::one() };
            for (k, v) in ch_mul(&e[(j - i) as usize], &p) {
                let s = acc.entry(k).or_insert_with(Rational::zero);
                *s += &sign * v;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        let inv = rat(1, j as i64);
        e.push(acc.into_iter().map(|(k, v)| (k, v * &inv)).collect());
    }
    e.pop().unwrap()
}

/// ∫_{M̄_{g,n}} ∏ψ_i^{a_i} · ∏ λ_{m_j} for g ≤ 2.
pub fn hodge_psi_integral(g: usize, exps: &[u32], lambdas: &[u32]) -> Result<Rational> {
    if g > MAX_HODGE_GENUS {
        return Err(Error::GenusScope(g));
    }
    if !is_stable(g, exps.len()) {
        return Err(Error::Unstable { g, n: exps.len() });
    }
    if lambdas.iter().any(|&m| m as usize > g) {
        return Ok(Rational::zero());
    }
    let total: i64 = exps.iter().chain(lambdas).map(|&x| x as i64).sum();
    if total != dim(g, exps.len()) {
        return Ok(Rational::zero());
    }
    let mut poly = ChPoly::from([(vec![], Rational::one())]);
    for &m in lambdas.iter().filter(|&&m| m > 0) {
        poly = ch_mul(&poly, &lambda_as_ch(m));
    }
    Ok(poly.iter().map(|(chs, v)| v * ch_psi_integral(g, exps, chs)).sum())
}

/// The vertex class Λ*(u₁)Λ*(u₂)Λ*(u₃)/(u₁u₂u₃) at fixed point i in genus h,
/// with u ∈ {w_i − w_j : j ≠ i} ∪ {−3w_i} and Λ*(u) = Σ (−1)^m λ_m u^{h−m}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeVertexClass {
    pub i: usize,
    pub h: usize,
    /// Sorted λ-index multiset (λ₀ omitted) ↦ coefficient.
    pub expansion: BTreeMap<Vec<u32>, CycScalar>,
}

/// Tangent and fiber weights at fixed point i.
pub fn vertex_weights(i: usize) -> Result<[CycScalar; 3]> {
    let wi = weight(i)?;
    let others: Vec<CycScalar> = (0..3).filter(|&j| j != i).map(|j| &wi - &weight(j).unwrap()).collect();
    Ok([others[0].clone(), others[1].clone(), wi.scale(&int(-3))])
}

/// e_i = ∏ of the three weights, equal to −9 for every i.
pub fn euler_weight(i: usize) -> Result<CycScalar> {
    let u = vertex_weights(i)?;
    Ok(&(&u[0] * &u[1]) * &u[2])
}

pub fn expand_vertex_class(i: usize, h: usize) -> Result<HodgeVertexClass> {
    if h > MAX_HODGE_GENUS {
        return Err(Error::GenusScope(h));
    }
    let u = vertex_weights(i)?;
    // λ-degree above h(h+1)/2 vanishes on M̄_h for h ≤ 2
    let cap = (h * (h + 1) / 2) as u32;
    let mut acc: BTreeMap<Vec<u32>, CycScalar> = BTreeMap::from([(vec![], CycScalar::one())]);
    for uk in &u {
        let mut next = BTreeMap::new();
        for (mono, c) in &acc {
            for m in 0..=h as u32 {
                let deg: u32 = mono.iter().sum::<u32>() + m;
                if deg > cap {
                    continue;
                }
                let mut k = mono.clone();
                if m > 0 {
                    k.push(m);
                    k.sort_unstable();
                }
                let sign = if m % 2 == 0 { 1 } else { -1 };
                let w = uk.pow(h as i64 - m as i64)?.scale(&int(sign));
                let e = next.entry(k).or_insert_with(CycScalar::zero);
                *e += &(c * &w);
            }
        }
        acc = next;
    }
    let einv = euler_weight(i)?.inv()?;
    let expansion = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k, &v * &einv)).collect();
    Ok(HodgeVertexClass { i, h, expansion })
}
