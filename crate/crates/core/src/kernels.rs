// SPDX-License-Identifier: Apache-2.0
//! HMM forward algorithm and Poisson-binomial tail probability, written once
//! against [`NumericSystem`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::oracle::{BigReal, Precision};
use crate::system::{NumericSystem, Oracle};

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct HmmModel {
    /// H×H, row p is the distribution of the next state from p.
    pub a: Vec<Vec<f64>>,
    /// H×M emission probabilities.
    pub b: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub obs: Vec<usize>,
}

impl HmmModel {
    /// Uniform prior over states.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, obs: Vec<usize>) -> Result<Self> {
        let h = a.len();
        let pi = vec![1.0 / h.max(1) as f64; h];
        let m = HmmModel { a, b, pi, obs };
        m.validate()?;
        Ok(m)
    }

    pub fn h(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }

    pub fn t(&self) -> usize {
        self.obs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, m) = (self.h(), self.m());
        let bad = |s: String| Err(Error::InvalidModel(s));
        if h == 0 || m == 0 || self.obs.is_empty() {
            return bad(format!("empty dimension: H={h} M={m} T={}", self.t()));
        }
        if self.b.len() != h || self.pi.len() != h {
            return bad("B and pi must have H rows".into());
        }
        for (name, rows, width) in [("A", &self.a, h), ("B", &self.b, m)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return bad(format!(
                        "{name} row {i} has {} entries, want {width}",
                        row.len()
                    ));
                }
                check_distribution(row)
                    .map_err(|e| Error::InvalidModel(format!("{name} row {i}: {e}")))?;
            }
        }
        check_distribution(&self.pi).map_err(|e| Error::InvalidModel(format!("pi: {e}")))?;
        if let Some(o) = self.obs.iter().find(|&&o| o >= m) {
            return bad(format!("observation {o} outside alphabet of {m}"));
        }
        Ok(())
    }
}

fn check_distribution(row: &[f64]) -> std::result::Result<(), String> {
    if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(format!("entry {x} outside [0,1]"));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("sums to {s}"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PbdInstance {
    pub k: usize,
    pub probs: Vec<f64>,
}

impl PbdInstance {
    pub fn new(k: usize, probs: Vec<f64>) -> Result<Self> {
        let inst = PbdInstance { k, probs };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n() {
            return Err(Error::InvalidModel(format!(
                "need 1 <= K <= N, got K={} N={}",
                self.k,
                self.n()
            )));
        }
        if let Some(p) = self.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidModel(format!(
                "probability {p} outside [0,1]"
            )));
        }
        Ok(())
    }
}

/// Run the forward recursion, handing each step's alpha vector to `observe`.
/// Step 0 is the initialisation `pi[q]·B[q][O_0]`.
pub fn forward_with<S, F>(model: &HmmModel, sys: &S, mut observe: F) -> Result<S::Value>
where
    S: NumericSystem,
    F: FnMut(usize, &[S::Value]),
{
    model.validate()?;
    let enc = |rows: &[Vec<f64>]| -> Result<Vec<Vec<S::Value>>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&x| sys.encode(&BigReal::from_f64(x)?))
                    .collect()
            })
            .collect()
    };
    let a = enc(&model.a)?;
    let b = enc(&model.b)?;
    let pi = enc(std::slice::from_ref(&model.pi))?.remove(0);
    let h = model.h();

    let o0 = model.obs[0];
    let mut alpha_prev: Vec<S::Value> = (0..h).map(|q| sys.mul(&pi[q], &b[q][o0])).collect();
    observe(0, &alpha_prev);
    let mut alpha = alpha_prev.clone();
    let mut terms = Vec::with_capacity(h);
    for (t, &ot) in model.obs.iter().enumerate().skip(1) {
        for q in 0..h {
            terms.clear();
            terms.extend((0..h).map(|p| sys.mul(&alpha_prev[p], &a[p][q])));
            let path_sum = sys.sum(&terms);
            alpha[q] = sys.mul(&path_sum, &b[q][ot]);
        }
        std::mem::swap(&mut alpha, &mut alpha_prev);
        observe(t, &alpha_prev);
    }
    Ok(sys.sum(&alpha_prev))
}

/// Likelihood of the observations in `sys`. Log systems return the log.
pub fn forward<S: NumericSystem>(model: &HmmModel, sys: &S) -> Result<S::Value> {
    forward_with(model, sys, |_, _| {})
}

/// (t, largest base-2 exponent among alpha entries) per step, in the oracle.
/// Steps where every alpha is zero are skipped.
pub fn exponent_trace(model: &HmmModel, prec: Precision) -> Result<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(model.t());
    forward_with(model, &Oracle(prec), |t, alpha| {
        if let Some(e) = alpha.iter().filter_map(|x| x.exponent_of().ok()).max() {
            out.push((t, e));
        }
    })?;
    Ok(out)
}

/// When the (K-1 → K) transition is first counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PbdGuard {
    /// From trial n = K onward (1-indexed): the result is P(X ≥ K).
    #[default]
    Inclusive,
    /// Only for n > K, which drops the path where the first K trials all succeed.
    Literal,
}

/// P(X ≥ K) by the double-buffered recurrence over states 0..K-1. The
/// complements 1-p are formed exactly before encoding.
pub fn pbd_pvalue<S: NumericSystem>(
    inst: &PbdInstance,
    sys: &S,
    guard: PbdGuard,
) -> Result<S::Value> {
    inst.validate()?;
    let k = inst.k;
    let one = BigReal::one();
    let mut pr_prev = vec![sys.zero(); k];
    pr_prev[0] = sys.one();
    let mut pr = pr_prev.clone();
    let mut pvalue = sys.zero();
    for (i, &p) in inst.probs.iter().enumerate() {
        let n = i + 1;
        let pb = BigReal::from_f64(p)?;
        let pn = sys.encode(&pb)?;
        let qn = sys.encode(&one.sub_exact(&pb))?;
        for j in 1..k {
            let stay = sys.mul(&pr_prev[j], &qn);
            let step = sys.mul(&pr_prev[j - 1], &pn);
            pr[j] = sys.add(&stay, &step);
        }
        pr[0] = sys.mul(&pr_prev[0], &qn);
        let counts = match guard {
            PbdGuard::Inclusive => n >= k,
            PbdGuard::Literal => n > k,
        };
        if counts {
            let reach = sys.mul(&pr_prev[k - 1], &pn);
            pvalue = sys.add(&pvalue, &reach);
        }
        std::mem::swap(&mut pr, &mut pr_prev);
    }
    Ok(pvalue)
}

/// Independent tail probability: states 0..K with K meaning "at least K",
/// carried at 64 bits above `prec` and rounded once at the end.
pub fn pbd_exact_reference(inst: &PbdInstance, prec: Precision) -> Result<BigReal> {
    inst.validate()?;
    let wide = Precision::new(prec.bits() + 64)?;
    let k = inst.k;
    let one = BigReal::one();
    let mut t = vec![BigReal::zero(); k + 1];
    t[0] = BigReal::one();
    for &p in &inst.probs {
        let pb = BigReal::from_f64(p)?;
        let qb = one.sub_exact(&pb);
        // in place, high states first so each reads last trial's values
        t[k] = t[k].add(&t[k - 1].mul(&pb, wide), wide);
        for j in (1..k).rev() {
            t[j] = t[j].mul(&qb, wide).add(&t[j - 1].mul(&pb, wide), wide);
        }
        t[0] = t[0].mul(&qb, wide);
    }
    Ok(t[k].round(prec))
}

/// P(X ≥ K) by summing all 2^N outcomes exactly. N ≤ 20.
pub fn pbd_enumerate(inst: &PbdInstance) -> Result<BigReal> {
    inst.validate()?;
    let n = inst.n();
    if n > 20 {
        return Err(Error::InvalidModel(format!(
            "enumeration needs N <= 20, got {n}"
        )));
    }
    let ps: Vec<BigReal> = inst
        .probs
        .iter()
        .map(|&p| BigReal::from_f64(p))
        .collect::<Result<_>>()?;
    let qs: Vec<BigReal> = ps.iter().map(|p| BigReal::one().sub_exact(p)).collect();
    let mut total = BigReal::zero();
    for mask in 0u32..1 << n {
        if (mask.count_ones() as usize) < inst.k {
            continue;
        }
        let mut w = BigReal::one();
        for i in 0..n {
            w = w.mul_exact(if mask >> i & 1 == 1 { &ps[i] } else { &qs[i] });
            if w.is_zero() {
                break;
            }
        }
        total = total.add_exact(&w);
    }
    Ok(total)
}

fn fmt_prob(out: &mut String, row: &[f64]) {
    let cells: Vec<String> = row.iter().map(|x| format!("{x:.19e}")).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
}

impl HmmModel {
    /// `hmm H M T`, then A rows, B rows, pi, O.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "hmm {} {} {}", self.h(), self.m(), self.t()).unwrap();
        for row in self.a.iter().chain(&self.b) {
            fmt_prob(&mut s, row);
        }
        fmt_prob(&mut s, &self.pi);
        let obs: Vec<String> = self.obs.iter().map(usize::to_string).collect();
        s.push_str(&obs.join(" "));
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tok = Tokens::new(text);
        tok.expect("hmm")?;
        let (h, m, t) = (tok.usize()?, tok.usize()?, tok.usize()?);
        let a = (0..h).map(|_| tok.f64s(h)).collect::<Result<_>>()?;
        let b = (0..h).map(|_| tok.f64s(m)).collect::<Result<_>>()?;
        let pi = tok.f64s(h)?;
        let obs = (0..t).map(|_| tok.usize()).collect::<Result<_>>()?;
        tok.end()?;
        let model = HmmModel { a, b, pi, obs };
        model.validate()?;
        Ok(model)
    }
}

impl PbdInstance {
    /// `pbd N K`, then the success probabilities.
    pub fn to_text(&self) -> String {
        let mut s = format!("pbd {} {}\n", self.n(), self.k);
        fmt_prob(&mut s, &self.probs);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tok = Tokens::new(text);
        tok.expect("pbd")?;
        let (n, k) = (tok.usize()?, tok.usize()?);
        let probs = tok.f64s(n)?;
        tok.end()?;
        PbdInstance::new(k, probs)
    }
}

struct Tokens<'a>(std::str::SplitWhitespace<'a>);

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Tokens(s.split_whitespace())
    }

    fn next(&mut self) -> Result<&'a str> {
        self.0
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let t = self.next()?;
        if t != word {
            return Err(Error::Parse(format!(
                "expected header '{word}', found '{t}'"
            )));
        }
        Ok(())
    }

    fn usize(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| Error::Parse(format!("bad integer '{t}'")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let t = self.next()?;
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad number '{t}'")))
            })
            .collect()
    }

    fn end(&mut self) -> Result<()> {
        match self.0.next() {
            None => Ok(()),
            Some(t) => Err(Error::Parse(format!("trailing token '{t}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posit::PositConfig;
    use crate::system::{Binary64, LogSpace, OracleLog, PositSystem};

    fn p() -> Precision {
        Precision::default()
    }

    fn halving(t: usize) -> HmmModel {
        HmmModel::new(
            vec![vec![1.0]],
            vec![vec![0.5, 0.5]],
            (0..t).map(|i| i % 2).collect(),
        )
        .unwrap()
    }

    #[test]
    fn forward_small_models() {
        let l = forward(&halving(3), &Oracle(p())).unwrap();
        assert_eq!(l.to_f64(), 0.125);
        let sym = HmmModel::new(
            vec![vec![0.5; 2]; 2],
            vec![vec![0.5; 2]; 2],
            vec![0, 1, 1, 0],
        )
        .unwrap();
        assert_eq!(forward(&sym, &Oracle(p())).unwrap().to_f64(), 0.0625);
        assert_eq!(forward(&sym, &Binary64).unwrap(), 0.0625);
        let c = PositConfig::new(64, 18).unwrap();
        let v = forward(&sym, &PositSystem(c)).unwrap();
        assert_eq!(crate::posit::posit_to_real(v).unwrap().to_f64(), 0.0625);
        let lg = forward(&sym, &LogSpace::new(p())).unwrap();
        assert!((lg.lx() - 0.0625f64.ln()).abs() < 1e-15);
        let ol = forward(&sym, &OracleLog(p())).unwrap().unwrap();
        assert_eq!(
            ol.exp(p())
                .unwrap()
                .round(Precision::new(200).unwrap())
                .to_f64(),
            0.0625
        );
    }

    #[test]
    fn binary64_underflows_where_posit_does_not() {
        let m = halving(1100);
        assert_eq!(forward(&m, &Binary64).unwrap(), 0.0);
        let c = PositConfig::new(64, 18).unwrap();
        let v = forward(&m, &PositSystem(c)).unwrap();
        assert_eq!(
            crate::posit::posit_to_real(v).unwrap(),
            BigReal::pow2(-1100)
        );
    }

    #[test]
    fn halving_trace_has_slope_minus_one() {
        let tr = exponent_trace(&halving(50), p()).unwrap();
        assert_eq!(tr.len(), 50);
        for (t, e) in tr {
            assert_eq!(e, -(t as i64) - 1);
        }
        assert_eq!(exponent_trace(&halving(1), p()).unwrap(), vec![(0, -1)]);
    }

    fn pv(probs: &[f64], k: usize, guard: PbdGuard) -> f64 {
        let inst = PbdInstance::new(k, probs.to_vec()).unwrap();
        pbd_pvalue(&inst, &Oracle(p()), guard).unwrap().to_f64()
    }

    #[test]
    fn pbd_examples() {
        let g = PbdGuard::Inclusive;
        assert_eq!(pv(&[1.0; 3], 2, g), 1.0);
        assert_eq!(pv(&[0.0; 3], 2, g), 0.0);
        assert_eq!(pv(&[0.5; 3], 2, g), 0.5);
        // literal guard drops the first-K-trials-all-succeed path
        assert_eq!(pv(&[0.5; 3], 2, PbdGuard::Literal), 0.25);
        assert_eq!(pv(&[1.0; 3], 3, PbdGuard::Literal), 0.0);
    }

    #[test]
    fn reference_examples() {
        let r = |k, ps: &[f64]| {
            pbd_exact_reference(&PbdInstance::new(k, ps.to_vec()).unwrap(), p()).unwrap()
        };
        assert_eq!(r(2, &[0.5; 3]), BigReal::from_f64(0.5).unwrap());
        assert_eq!(r(1, &[0.3]), BigReal::from_f64(0.3).unwrap());
        // 1 - 0.7·0.6 in exact dyadic arithmetic on the binary64 inputs
        let (a, b) = (
            BigReal::from_f64(0.3).unwrap(),
            BigReal::from_f64(0.4).unwrap(),
        );
        let one = BigReal::one();
        let want = one.sub_exact(&one.sub_exact(&a).mul_exact(&one.sub_exact(&b)));
        assert_eq!(r(1, &[0.3, 0.4]), want.round(p()));
        assert!((want.to_f64() - 0.58).abs() < 1e-16);
        let e = pbd_enumerate(&PbdInstance::new(1, vec![0.3, 0.4]).unwrap()).unwrap();
        assert_eq!(e, want);
    }

    #[test]
    fn closed_form_first_success() {
        let inst = PbdInstance::new(1, vec![0.5; 10]).unwrap();
        let want = 1.0 - 2f64.powi(-10);
        assert_eq!(
            pbd_pvalue(&inst, &Oracle(p()), PbdGuard::Inclusive)
                .unwrap()
                .to_f64(),
            want
        );
        assert_eq!(pbd_exact_reference(&inst, p()).unwrap().to_f64(), want);
        assert_eq!(pbd_enumerate(&inst).unwrap().to_f64(), want);
    }

    #[test]
    fn validation() {
        assert!(PbdInstance::new(0, vec![0.5]).is_err());
        assert!(PbdInstance::new(2, vec![0.5]).is_err());
        assert!(PbdInstance::new(1, vec![1.5]).is_err());
        assert!(HmmModel::new(vec![vec![0.6, 0.6]; 2], vec![vec![1.0]; 2], vec![0]).is_err());
        assert!(HmmModel::new(vec![vec![1.0]], vec![vec![0.5, 0.5]], vec![2]).is_err());
        assert!(HmmModel::new(vec![vec![1.0]], vec![vec![0.5, 0.5]], vec![]).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let m = HmmModel::new(
            vec![vec![0.1, 0.9], vec![1.0 / 3.0, 2.0 / 3.0]],
            vec![vec![0.25, 0.75, 0.0], vec![0.2, 0.3, 0.5]],
            vec![0, 2, 1, 1],
        )
        .unwrap();
        let s = m.to_text();
        assert!(s.starts_with("hmm 2 3 4\n"));
        assert!(s.contains("3.3333333333333331483e-1"));
        assert_eq!(HmmModel::from_text(&s).unwrap(), m);
        let inst = PbdInstance::new(2, vec![1e-7, 0.3, 0.123456789]).unwrap();
        assert_eq!(PbdInstance::from_text(&inst.to_text()).unwrap(), inst);
        assert!(PbdInstance::from_text("pbd 2 1\n0.5").is_err());
        assert!(PbdInstance::from_text("pbd 1 1\n0.5 0.5").is_err());
        assert!(HmmModel::from_text("pbd 1 1\n0.5").is_err());
    }
}
