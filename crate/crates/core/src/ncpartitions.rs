//! Non-crossing partitions and the moment–cumulant transforms.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::engine::functional::{Source, TraceFunctional};
use crate::engine::word::Word;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest `n` accepted by [`enumerate_nc`].
pub const MAX_NC_ORDER: usize = 14;

/// A non-crossing partition of `{1..n}`, one bitmask per block
/// (bit `i` stands for the element `i + 1`).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NonCrossingPartition {
    n: usize,
    masks: SmallVec<[u16; 8]>,
}

impl NonCrossingPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[u16] {
        &self.masks
    }

    /// Blocks as sorted 1-based index lists, ordered by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.masks.iter().map(|&m| (0..self.n).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect()).collect()
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.masks.iter().map(|m| m.count_ones() as usize)
    }

    /// Build from 1-based blocks, checking that they partition `{1..n}`
    /// without crossings.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if n > 16 {
            return Err(Error::Input("partitions are limited to n ≤ 16".into()));
        }
        let mut seen = 0u32;
        let mut masks = SmallVec::new();
        for b in blocks {
            let mut m = 0u16;
            for &i in b {
                if i == 0 || i > n || seen >> (i - 1) & 1 == 1 {
                    return Err(Error::Input(format!("bad block {b:?}")));
                }
                seen |= 1 << (i - 1);
                m |= 1 << (i - 1);
            }
            if m != 0 {
                masks.push(m);
            }
        }
        if seen != (1u32 << n) - 1 {
            return Err(Error::Input("blocks do not cover 1..n".into()));
        }
        masks.sort_by_key(|m: &u16| m.trailing_zeros());
        let p = NonCrossingPartition { n, masks };
        if p.has_crossing() {
            return Err(Error::Input("blocks cross".into()));
        }
        Ok(p)
    }

    pub fn has_crossing(&self) -> bool {
        for (x, &a) in self.masks.iter().enumerate() {
            for &b in &self.masks[x + 1..] {
                if crosses(a, b, self.n) {
                    return true;
                }
            }
        }
        false
    }
}

/// Is there `i<j<k<l` with `i,k` in `a` and `j,l` in `b` (or the reverse)?
fn crosses(a: u16, b: u16, n: usize) -> bool {
    // walk left to right recording the alternation pattern
    let mut pattern = 0u8;
    let mut last = 2u8;
    for i in 0..n {
        let which = if a >> i & 1 == 1 {
            0
        } else if b >> i & 1 == 1 {
            1
        } else {
            continue;
        };
        if which != last {
            pattern += 1;
            last = which;
            if pattern >= 4 {
                return true;
            }
        }
    }
    false
}

fn nc_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<NonCrossingPartition>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<NonCrossingPartition>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All non-crossing partitions of `{1..n}`.
pub fn enumerate_nc(n: usize) -> Result<Arc<Vec<NonCrossingPartition>>> {
    if n > MAX_NC_ORDER {
        return Err(Error::Resource(format!("enumerate_nc({n}) exceeds the limit {MAX_NC_ORDER}")));
    }
    if let Some(v) = nc_cache().lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let out = if n == 0 {
        vec![NonCrossingPartition { n: 0, masks: SmallVec::new() }]
    } else {
        let mut out = Vec::new();
        // block containing element 1: choose the rest among 2..n
        for rest in 0u32..(1 << (n - 1)) {
            let first = 1u16 | ((rest as u16) << 1);
            let mut gaps: Vec<(usize, usize)> = Vec::new();
            let mut start = None;
            for i in 0..n {
                if first >> i & 1 == 1 {
                    if let Some(s) = start.take() {
                        gaps.push((s, i - s));
                    }
                } else if start.is_none() {
                    start = Some(i);
                }
            }
            if let Some(s) = start {
                gaps.push((s, n - s));
            }
            let mut partial: Vec<SmallVec<[u16; 8]>> = vec![SmallVec::from_slice(&[first])];
            for (offset, len) in gaps {
                let sub = enumerate_nc(len)?;
                let mut next = Vec::with_capacity(partial.len() * sub.len());
                for p in &partial {
                    for q in sub.iter() {
                        let mut m = p.clone();
                        m.extend(q.masks.iter().map(|b| b << offset));
                        next.push(m);
                    }
                }
                partial = next;
            }
            for mut masks in partial {
                masks.sort_by_key(|m| m.trailing_zeros());
                out.push(NonCrossingPartition { n, masks });
            }
        }
        out
    };
    let out = Arc::new(out);
    nc_cache().lock().unwrap().insert(n, out.clone());
    Ok(out)
}

/// Moments `m_1..m_n` from free cumulants `κ_1..κ_n` (index 0 holds order 1).
pub fn moments_from_cumulants<T>(kappa: &[T]) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    transform(kappa, true)
}

/// Free cumulants `κ_1..κ_n` from moments `m_1..m_n` (index 0 holds order 1).
pub fn cumulants_from_moments<T>(moments: &[T]) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    transform(moments, false)
}

// Uses M(z) = 1 + Σ_s κ_s z^s M(z)^s, i.e. m_n = Σ_s κ_s [z^{n-s}] M^s.
fn transform<T>(input: &[T], forward: bool) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let n = input.len();
    let mut m: Vec<T> = Vec::with_capacity(n + 1);
    m.push(T::one());
    let mut k: Vec<T> = Vec::with_capacity(n);
    for order in 1..=n {
        // powers[s][j] = [z^j] M^s for j ≤ order - s, using m_0..m_{order-1}
        let mut acc = T::zero();
        let mut power: Vec<T> = m.clone();
        for s in 1..order {
            let j = order - s;
            acc = acc + k[s - 1].clone() * power[j].clone();
            // power <- power · M, truncated at degree order - s - 1
            let keep = order - s;
            let mut next = vec![T::zero(); keep];
            for (a, pa) in power.iter().take(keep).enumerate() {
                for (b, mb) in m.iter().take(keep - a).enumerate() {
                    next[a + b] = next[a + b].clone() + pa.clone() * mb.clone();
                }
            }
            power = next;
        }
        if forward {
            let kn = input[order - 1].clone();
            m.push(kn.clone() + acc);
            k.push(kn);
        } else {
            let mn = input[order - 1].clone();
            k.push(mn.clone() - acc);
            m.push(mn);
        }
    }
    if forward {
        m.remove(0);
        m
    } else {
        k
    }
}

/// `m_n = Σ_{π ∈ NC(n)} Π_V κ_{|V|}` by explicit enumeration.
pub fn moment_from_cumulants_by_enumeration<T>(kappa: &[T], n: usize) -> Result<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    if n > kappa.len() {
        return Err(Error::Input(format!("need {n} cumulants, got {}", kappa.len())));
    }
    let mut total = T::zero();
    for p in enumerate_nc(n)?.iter() {
        let mut term = T::one();
        for s in p.block_sizes() {
            term = term * kappa[s - 1].clone();
        }
        total = total + term;
    }
    Ok(total)
}

struct Element<'a, S> {
    src: &'a Source<S>,
    src_id: usize,
    word: Word,
}

struct CumulantEval<'a, S> {
    elems: Vec<Element<'a, S>>,
    moments: HashMap<Vec<usize>, S>,
    cumulants: HashMap<Vec<usize>, S>,
    intervals: HashMap<(usize, usize), S>,
}

impl<'a, S: Scalar> CumulantEval<'a, S> {
    /// Moment of the product of the listed (same-source) elements.
    fn moment(&mut self, idx: &[usize]) -> Result<S> {
        if idx.is_empty() {
            return Ok(S::one());
        }
        let key = self.content_key(idx);
        if let Some(v) = self.moments.get(&key) {
            return Ok(v.clone());
        }
        let w = Word::from_letters(idx.iter().flat_map(|&i| self.elems[i].word.letters().iter().copied()));
        let v = self.elems[idx[0]].src.eval_block(&w, true)?;
        self.moments.insert(key, v.clone());
        Ok(v)
    }

    // equal elements share moments and cumulants
    fn content_key(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| (0..=i).find(|&j| self.elems[j].word == self.elems[i].word).unwrap()).collect()
    }

    /// Free cumulant of the listed same-source elements, in order.
    fn cumulant(&mut self, idx: &[usize]) -> Result<S> {
        let key = self.content_key(idx);
        if let Some(v) = self.cumulants.get(&key) {
            return Ok(v.clone());
        }
        let s = idx.len();
        let mut v = self.moment(idx)?;
        // subtract all partitions whose block through the first element is proper
        for rest in 0u32..(1u32 << (s - 1)) - 1 {
            let block: Vec<usize> = std::iter::once(0).chain((1..s).filter(|i| rest >> (i - 1) & 1 == 1)).collect();
            let mut term = self.cumulant(&block.iter().map(|&b| idx[b]).collect::<Vec<_>>())?;
            let mut bounds = block.clone();
            bounds.push(s);
            for w in bounds.windows(2) {
                if term.is_zero() {
                    break;
                }
                let gap: Vec<usize> = idx[w[0] + 1..w[1]].to_vec();
                term = term * self.moment(&gap)?;
            }
            v = v - term;
        }
        self.cumulants.insert(key, v.clone());
        Ok(v)
    }

    /// Moment of the contiguous range `[lo, hi)` of elements.
    fn interval(&mut self, lo: usize, hi: usize) -> Result<S> {
        if lo >= hi {
            return Ok(S::one());
        }
        if let Some(v) = self.intervals.get(&(lo, hi)) {
            return Ok(v.clone());
        }
        let src = self.elems[lo].src_id;
        let same: Vec<usize> = (lo + 1..hi).filter(|&i| self.elems[i].src_id == src).collect();
        let mut total = S::zero();
        for mask in 0u64..(1u64 << same.len()) {
            let block: Vec<usize> =
                std::iter::once(lo).chain(same.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &i)| i)).collect();
            let mut term = self.cumulant(&block)?;
            let mut bounds = block.clone();
            bounds.push(hi);
            for w in bounds.windows(2) {
                if term.is_zero() {
                    break;
                }
                term = term * self.interval(w[0] + 1, w[1])?;
            }
            total = total + term;
        }
        self.intervals.insert((lo, hi), total.clone());
        Ok(total)
    }
}

/// `φ(w)` as a sum over non-crossing partitions of free cumulants, with
/// blocks mixing different free sources contributing zero.
pub fn word_cumulant_evaluate<S: Scalar>(f: &TraceFunctional<S>, w: &Word) -> Result<S> {
    if w.len() > f.max_degree() {
        return Err(Error::Resource(format!("word length {} exceeds degree bound {}", w.len(), f.max_degree())));
    }
    let mut elems: Vec<Element<S>> = Vec::new();
    for l in w.letters() {
        let src_id = f.source_of(l.gen)?;
        match elems.last_mut() {
            Some(e) if e.src_id == src_id => e.word.0.push(*l),
            _ => elems.push(Element { src: &f.sources()[src_id], src_id, word: Word::from_letters([*l]) }),
        }
    }
    if elems.len() > 60 {
        return Err(Error::Resource("too many alternating factors for the cumulant path".into()));
    }
    let n = elems.len();
    let mut ev = CumulantEval { elems, moments: HashMap::new(), cumulants: HashMap::new(), intervals: HashMap::new() };
    ev.interval(0, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{catalan, rat};
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    // all set partitions via restricted growth strings
    fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
        fn rec(i: usize, n: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
            if i == n {
                let k = rgs.iter().max().map_or(0, |m| m + 1);
                let mut blocks = vec![Vec::new(); k];
                for (j, &b) in rgs.iter().enumerate() {
                    blocks[b].push(j + 1);
                }
                out.push(blocks);
                return;
            }
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            for b in 0..=k {
                rgs.push(b);
                rec(i + 1, n, rgs, out);
                rgs.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, &mut Vec::new(), &mut out);
        out
    }

    fn brute_nc(n: usize) -> usize {
        all_partitions(n)
            .into_iter()
            .filter(|blocks| {
                !blocks.iter().enumerate().any(|(x, a)| {
                    blocks[x + 1..].iter().any(|b| {
                        a.iter().any(|&i| {
                            b.iter().any(|&j| a.iter().any(|&k| b.iter().any(|&l| i < j && j < k && k < l)))
                        }) || b.iter().any(|&i| {
                            a.iter().any(|&j| b.iter().any(|&k| a.iter().any(|&l| i < j && j < k && k < l)))
                        })
                    })
                })
            })
            .count()
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_nc(1).unwrap().len(), 1);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(6).unwrap().len(), 132);
        for n in 1..=7 {
            assert_eq!(enumerate_nc(n).unwrap().len(), brute_nc(n), "n={n}");
        }
        for n in 0..=12 {
            assert_eq!(enumerate_nc(n).unwrap().len() as u64, catalan(n).to_u64().unwrap());
        }
        assert!(matches!(enumerate_nc(15), Err(Error::Resource(_))));
    }

    #[test]
    fn enumeration_is_valid_and_distinct() {
        let parts = enumerate_nc(8).unwrap();
        let set: std::collections::HashSet<_> = parts.iter().cloned().collect();
        assert_eq!(set.len(), parts.len());
        for p in parts.iter() {
            assert!(!p.has_crossing());
            assert_eq!(p.masks().iter().fold(0u16, |a, b| a | b), 0xff);
            assert!(NonCrossingPartition::from_blocks(8, &p.blocks()).is_ok());
        }
        assert!(NonCrossingPartition::from_blocks(4, &[vec![1, 3], vec![2, 4]]).is_err());
    }

    #[test]
    fn transforms() {
        let k: Vec<f64> = vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(moments_from_cumulants(&k), vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
        let ones = moments_from_cumulants(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(ones.iter().all(|&m| m == 1.0));
        let qc: Vec<BigRational> = [1, 2, 5, 14].iter().map(|&v| rat(v, 1)).collect();
        assert_eq!(cumulants_from_moments(&qc), vec![rat(1, 1); 4]);
        let kappa: Vec<BigRational> = (1..=7).map(|i| rat(i * i - 3, i + 1)).collect();
        let m = moments_from_cumulants(&kappa);
        for n in 1..=7 {
            assert_eq!(moment_from_cumulants_by_enumeration(&kappa, n).unwrap(), m[n - 1]);
        }
        assert_eq!(cumulants_from_moments(&m), kappa);
    }
}
