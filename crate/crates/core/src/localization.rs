//! Graph-sum assembly of correlators from vertex, edge and leg terms.
//!
//! Hat series at fixed point i: [Ŝ_i(H^m)]_{z^k} = w_i^{m−k}·ρ_m·R_{m,k} with
//! ρ₀ = 1, ρ₁ = Lc, ρ₂ = L⁻¹c⁻¹.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{decorate, enumerate_graphs, DecoratedGraph, FlagKind, StableGraph};
use crate::lring::RingElem;
use crate::mgn::{expand_vertex_class, hodge_psi_integral, HodgeVertexClass, MAX_HODGE_GENUS};
use crate::mirror::MirrorData;
use crate::rseries::{extract_r_rows, required_qmax, AsymptoticData};
use crate::scalars::{factorial, weight, CycScalar, Rational};

/// Marking insertions: H⁰, H¹, H² and the pulled-back descendent π*ψ·H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Insertion {
    H0,
    H1,
    H2,
    PsiH,
}

impl Insertion {
    /// c-degree carried by a leg with this insertion.
    pub fn c_weight(self) -> i32 {
        match self {
            Insertion::H0 => 0,
            Insertion::H1 | Insertion::PsiH => 1,
            Insertion::H2 => -1,
        }
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Insertion::H0 => "1",
            Insertion::H1 => "H",
            Insertion::H2 => "H2",
            Insertion::PsiH => "psiH",
        })
    }
}

impl FromStr for Insertion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" | "H0" => Ok(Insertion::H0),
            "H" | "H1" => Ok(Insertion::H1),
            "H2" => Ok(Insertion::H2),
            "psiH" => Ok(Insertion::PsiH),
            other => Err(format!("unknown insertion '{other}' (expected 1, H, H2 or psiH)")),
        }
    }
}

/// Insertion list for F_{g,n}[a, b, c, δ].
pub fn insertions(a: usize, b: usize, c: usize, delta: usize) -> Vec<Insertion> {
    let mut v = vec![Insertion::H0; a];
    v.extend(std::iter::repeat_n(Insertion::H1, b));
    v.extend(std::iter::repeat_n(Insertion::H2, c));
    v.extend(std::iter::repeat_n(Insertion::PsiH, delta));
    v
}

/// Smallest row depth that covers every extraction for graphs of type (g, n).
pub fn default_kmax(g: usize, n: usize) -> usize {
    (3 * g + n).saturating_sub(2).max(2)
}

fn partitions(d: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=left.min(max)).rev() {
            cur.push(p);
            go(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, d, &mut Vec::new(), &mut out);
    out
}

fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Contribution of one decorated graph.
#[derive(Clone, Debug, Serialize)]
pub struct DecorationTerm {
    pub labels: Vec<usize>,
    pub aut_order: u64,
    pub value: RingElem,
}

/// All decorations of one undecorated graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphTerm {
    pub signature: String,
    pub graph: StableGraph,
    pub total: RingElem,
    pub decorations: Vec<DecorationTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Correlator {
    pub genus: usize,
    pub insertions: Vec<Insertion>,
    pub total: RingElem,
    pub graphs: Vec<GraphTerm>,
}

/// Precomputed genus-zero data plus memo tables for the graph sums.
pub struct Engine {
    pub kmax: usize,
    pub mirror: MirrorData,
    pub rows: AsymptoticData,
    /// Added to every per-vertex flag bound; totals must not depend on it.
    pub flag_slack: usize,
    weights: Vec<CycScalar>,
    classes: Vec<Vec<HodgeVertexClass>>,
    vertex_cache: Mutex<HashMap<(usize, usize, Vec<u32>), RingElem>>,
    edge_cache: Mutex<HashMap<(usize, usize, u32, u32), RingElem>>,
}

impl Engine {
    pub fn new(kmax: usize) -> Result<Self> {
        Self::with_qmax(kmax, required_qmax(kmax))
    }

    pub fn with_qmax(kmax: usize, qmax: usize) -> Result<Self> {
        let mirror = MirrorData::new(qmax.max(required_qmax(kmax)))?;
        let rows = extract_r_rows(&mirror, kmax)?;
        let weights = (0..3).map(weight).collect::<Result<Vec<_>>>()?;
        let classes = (0..3)
            .map(|i| (0..=MAX_HODGE_GENUS).map(|h| expand_vertex_class(i, h)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Engine {
            kmax,
            mirror,
            rows,
            flag_slack: 0,
            weights,
            classes,
            vertex_cache: Mutex::default(),
            edge_cache: Mutex::default(),
        })
    }

    fn w_pow(&self, i: usize, e: i64) -> CycScalar {
        self.weights[i].pow(e).expect("weights are units")
    }

    fn row(&self, m: usize, k: usize) -> Result<&RingElem> {
        if k > self.kmax {
            return Err(Error::Fit(format!("R_{m},{k} needed but rows stop at kmax = {}", self.kmax)));
        }
        Ok(self.rows.r(m, k))
    }

    /// [Ŝ_i(H^m)]_{z^k}.
    pub fn hat(&self, i: usize, m: usize, k: usize) -> Result<RingElem> {
        let rho = match m {
            0 => (0, 0),
            1 => (1, 1),
            2 => (-1, -1),
            _ => return Err(Error::Consistency(format!("no hat series for H^{m}"))),
        };
        Ok(self.row(m, k)?.shift(rho.0, 0, rho.1).scale(&self.w_pow(i, m as i64 - k as i64)))
    }

    /// Σ_μ (1/|Aut μ|)·∏t_{μ_r+1}·∫ψ^{a−1}ψ^{μ+1}·class, with t_j = (−1)^j R_{0,j−1} w_i^{1−j}.
    pub fn vertex_sum(&self, i: usize, h: usize, a: &[u32], class: &BTreeMap<Vec<u32>, CycScalar>) -> Result<RingElem> {
        let n = a.len();
        if 2 * h + n <= 2 {
            return Err(Error::Unstable { g: h, n });
        }
        let dim = 3 * h as i64 - 3 + n as i64;
        let base: i64 = a.iter().map(|&x| x as i64 - 1).sum();
        let psi: Vec<u32> = a.iter().map(|&x| x - 1).collect();
        let mut acc = RingElem::zero();
        for (lam, coef) in class {
            let d = dim - base - lam.iter().map(|&m| m as i64).sum::<i64>();
            if d < 0 {
                continue;
            }
            for mu in partitions(d as usize) {
                let mut exps = psi.clone();
                exps.extend(mu.iter().map(|&p| p as u32 + 1));
                let integral = hodge_psi_integral(h, &exps, lam)?;
                if num_traits::Zero::is_zero(&integral) {
                    continue;
                }
                let mut aut = num_bigint::BigInt::from(1);
                let mut r = 0;
                while r < mu.len() {
                    let s = mu[r..].iter().take_while(|&&p| p == mu[r]).count();
                    aut *= factorial(s as u64);
                    r += s;
                }
                let mut prod = RingElem::one();
                let mut sg = 1;
                for &p in &mu {
                    prod = &prod * self.row(0, p)?;
                    sg *= sign(p as i64 + 1);
                }
                let scalar = coef * &CycScalar::from(integral * Rational::new(sg.into(), aut)) * self.w_pow(i, -d);
                acc = &acc + &prod.scale(&scalar);
            }
        }
        Ok(acc)
    }

    /// Vertex term at fixed point i, genus h, with flag values a.
    pub fn vertex_contribution(&self, i: usize, h: usize, a: &[u32]) -> Result<RingElem> {
        if h > MAX_HODGE_GENUS {
            return Err(Error::GenusScope(h));
        }
        let mut key = a.to_vec();
        key.sort_unstable();
        if let Some(v) = self.vertex_cache.lock().unwrap().get(&(i, h, key.clone())) {
            return Ok(v.clone());
        }
        let v = self.vertex_sum(i, h, &key, &self.classes[i][h].expansion)?;
        if v.x_degree().unwrap_or(0) > 0 || v.c_degrees().iter().any(|&e| e != 0) {
            return Err(Error::Consistency(format!("vertex ({i}, h={h}, a={key:?}) leaves L-Laurent polynomials")));
        }
        self.vertex_cache.lock().unwrap().insert((i, h, key), v.clone());
        Ok(v)
    }

    /// Coefficient of x^p y^q in Σ_r Ŝ_i(φ_r)(x)Ŝ_j(φ^r)(y) = −3Σ_{a+b≡0 (3)} Ŝ_i(H^a)(x)Ŝ_j(H^b)(y).
    fn pairing_coeff(&self, i: usize, j: usize, p: usize, q: usize) -> Result<RingElem> {
        let mut acc = RingElem::zero();
        for (m1, m2) in [(0, 0), (1, 2), (2, 1)] {
            acc = &acc + &(&self.hat(i, m1, p)? * &self.hat(j, m2, q)?);
        }
        Ok(acc.scale(&CycScalar::from_int(-3)))
    }

    /// Edge term between fixed points i and j with half-edge values (b₁, b₂).
    pub fn edge_contribution(&self, i: usize, j: usize, b1: u32, b2: u32) -> Result<RingElem> {
        if b1 == 0 || b2 == 0 {
            return Err(Error::Consistency("edge flag values start at 1".into()));
        }
        if let Some(v) = self.edge_cache.lock().unwrap().get(&(i, j, b1, b2)) {
            return Ok(v.clone());
        }
        let mut acc = RingElem::zero();
        for s in 0..b2 {
            let t = self.pairing_coeff(i, j, (b1 + s) as usize, (b2 - 1 - s) as usize)?;
            acc = if s % 2 == 0 { &acc + &t } else { &acc - &t };
        }
        if (b1 + b2) % 2 == 1 {
            acc = -&acc;
        }
        if acc.c_degrees().iter().any(|&e| e != 0) {
            return Err(Error::Consistency(format!("edge ({i},{j},{b1},{b2}) has nonzero c-degree")));
        }
        if acc.x_degree().unwrap_or(0) > 1 {
            return Err(Error::Consistency(format!("edge ({i},{j},{b1},{b2}) is not linear in X")));
        }
        self.edge_cache.lock().unwrap().insert((i, j, b1, b2), acc.clone());
        Ok(acc)
    }

    /// Leg term at fixed point i with flag value a.
    pub fn leg_contribution(&self, i: usize, ins: Insertion, a: u32) -> Result<RingElem> {
        if a == 0 {
            return Err(Error::Consistency("leg flag values start at 1".into()));
        }
        let s = CycScalar::from_int(sign(a as i64 - 1));
        let (m, k) = match ins {
            Insertion::H0 => (0, a - 1),
            Insertion::H1 => (1, a - 1),
            Insertion::H2 => (2, a - 1),
            Insertion::PsiH if a == 1 => return Ok(RingElem::zero()),
            Insertion::PsiH => (1, a - 2),
        };
        Ok(self.hat(i, m, k as usize)?.scale(&s))
    }

    /// (1/|Aut|)·Σ_A ∏ vertex·∏ edge·∏ leg for one decorated graph.
    pub fn graph_contribution(&self, dg: &DecoratedGraph, ins: &[Insertion]) -> Result<RingElem> {
        let gr = &dg.graph;
        if ins.len() != gr.legs.len() {
            return Err(Error::Consistency("insertion count differs from leg count".into()));
        }
        let flags = gr.flags();
        let nv = gr.num_vertices();
        // per vertex: the admissible flag values with nonzero vertex term
        let mut choices: Vec<(Vec<usize>, Vec<(Vec<u32>, RingElem)>)> = Vec::with_capacity(nv);
        for v in 0..nv {
            let ids: Vec<usize> = (0..flags.len()).filter(|&f| flags[f].vertex == v).collect();
            let h = gr.genera[v];
            let bound = 3 * h + ids.len() - 3 + self.flag_slack;
            let mut opts = Vec::new();
            for a in bounded_tuples(ids.len(), bound) {
                let val = self.vertex_contribution(dg.labels[v], h, &a)?;
                if !val.is_zero() {
                    opts.push((a, val));
                }
            }
            if opts.is_empty() {
                return Ok(RingElem::zero());
            }
            choices.push((ids, opts));
        }
        let mut total = RingElem::zero();
        let mut idx = vec![0usize; nv];
        let mut avals = vec![0u32; flags.len()];
        'outer: loop {
            let mut term = RingElem::one();
            for (v, (ids, opts)) in choices.iter().enumerate() {
                let (a, val) = &opts[idx[v]];
                for (&f, &x) in ids.iter().zip(a) {
                    avals[f] = x;
                }
                term = &term * val;
            }
            for (e, &(x, y)) in gr.edges.iter().enumerate() {
                let ev = self.edge_contribution(dg.labels[x], dg.labels[y], avals[2 * e], avals[2 * e + 1])?;
                term = &term * &ev;
                if term.is_zero() {
                    break;
                }
            }
            if !term.is_zero() {
                for (f, fl) in flags.iter().enumerate() {
                    if let FlagKind::Leg(l) = fl.kind {
                        term = &term * &self.leg_contribution(dg.labels[fl.vertex], ins[l], avals[f])?;
                    }
                }
                total = &total + &term;
            }
            for v in (0..nv).rev() {
                idx[v] += 1;
                if idx[v] < choices[v].1.len() {
                    continue 'outer;
                }
                idx[v] = 0;
            }
            break;
        }
        Ok(total.scale(&CycScalar::from_ratio(1, dg.aut_order as i64)))
    }

    /// ⟨ins⟩_{g,n} summed over all decorated graphs.
    pub fn correlator(&self, g: usize, ins: &[Insertion]) -> Result<Correlator> {
        let graphs = enumerate_graphs(g, ins.len())?;
        if let Some(h) = graphs.iter().flat_map(|gr| gr.genera.iter()).find(|&&h| h > MAX_HODGE_GENUS) {
            return Err(Error::GenusScope(*h));
        }
        let jobs: Vec<(usize, DecoratedGraph)> =
            graphs.iter().enumerate().flat_map(|(k, gr)| decorate(gr).into_iter().map(move |d| (k, d))).collect();
        let values: Vec<Result<RingElem>> = jobs.par_iter().map(|(_, dg)| self.graph_contribution(dg, ins)).collect();
        let mut terms: Vec<GraphTerm> = graphs
            .iter()
            .map(|gr| GraphTerm { signature: gr.signature(), graph: gr.clone(), total: RingElem::zero(), decorations: vec![] })
            .collect();
        for ((k, dg), v) in jobs.into_iter().zip(values) {
            let value = v?;
            terms[k].total = &terms[k].total + &value;
            terms[k].decorations.push(DecorationTerm { labels: dg.labels, aut_order: dg.aut_order, value });
        }
        let total: RingElem = terms.iter().map(|t| t.total.clone()).sum();
        if !total.is_rational() {
            return Err(Error::Consistency(format!("genus {g} correlator {ins:?} keeps a zeta-dependent coefficient")));
        }
        let expected: i32 = ins.iter().map(|i| i.c_weight()).sum();
        if total.c_degrees().iter().any(|&e| e != expected) {
            return Err(Error::Consistency(format!("genus {g} correlator {ins:?} is not of c-degree {expected}")));
        }
        Ok(Correlator { genus: g, insertions: ins.to_vec(), total, graphs: terms })
    }

    /// F_g for g ≥ 2.
    pub fn free_energy(&self, g: usize) -> Result<Correlator> {
        self.correlator(g, &[])
    }
}

/// Tuples of positive integers of length n with Σ(a−1) ≤ bound, in lexicographic order.
fn bounded_tuples(n: usize, bound: usize) -> Vec<Vec<u32>> {
    fn go(n: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in 0..=left {
            cur.push(x as u32 + 1);
            go(n, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, bound, &mut Vec::new(), &mut out);
    out
}
