//! Permutations in one-line notation with canonical reduced words.

use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{0, …, n-1}`; `one_line[i]` is the image of `i`.
///
/// The canonical reduced word `w` satisfies `σ = s_{w[0]} ∘ s_{w[1]} ∘ …`,
/// where `s_k` (1-based) swaps `k-1` and `k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    one_line: Vec<usize>,
    word: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({:?})", self.one_line)
    }
}

/// Bubble sort of `p` by adjacent swaps of positions. Each swap replaces
/// `p` with `p ∘ s_k`, so the swaps `k_1, …, k_m` in order give
/// `p = s_{k_m} ∘ … ∘ s_{k_1}`.
fn bubble_word(p: &[usize]) -> Vec<usize> {
    let mut p = p.to_vec();
    let mut swaps = Vec::new();
    let n = p.len();
    for pass in 0..n {
        for k in 0..n.saturating_sub(pass + 1) {
            if p[k] > p[k + 1] {
                p.swap(k, k + 1);
                swaps.push(k + 1);
            }
        }
    }
    swaps.reverse();
    swaps
}

impl Permutation {
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        let mut seen = vec![false; n];
        for &v in &one_line {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(one_line));
            }
            seen[v] = true;
        }
        let word = bubble_word(&one_line);
        Ok(Permutation { one_line, word })
    }

    pub fn identity(n: usize) -> Self {
        Permutation::new((0..n).collect()).expect("identity is valid")
    }

    /// `s_i` in `S_n`, `1 <= i < n`.
    pub fn simple(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i >= n {
            return Err(Error::InvalidPermutation(vec![i]));
        }
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(i - 1, i);
        Permutation::new(p)
    }

    /// The product `s_{w[0]} ∘ s_{w[1]} ∘ …`.
    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut p = Permutation::identity(n);
        for &i in word {
            p = p.compose(&Permutation::simple(n, i)?);
        }
        Ok(p)
    }

    /// The longest element `i ↦ n - 1 - i`.
    pub fn reversal(n: usize) -> Self {
        Permutation::new((0..n).rev().collect()).expect("reversal is valid")
    }

    /// The block swap of `S_{2n}` exchanging the first and last `n` points.
    pub fn block_swap(n: usize) -> Self {
        Permutation::new((n..2 * n).chain(0..n).collect()).expect("block swap is valid")
    }

    pub fn degree(&self) -> usize {
        self.one_line.len()
    }

    pub fn one_line(&self) -> &[usize] {
        &self.one_line
    }

    pub fn apply(&self, i: usize) -> usize {
        self.one_line[i]
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn inversions(&self) -> usize {
        let p = &self.one_line;
        (0..p.len())
            .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count()
    }

    pub fn reduced_word(&self) -> &[usize] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degrees differ");
        Permutation::new(other.one_line.iter().map(|&i| self.one_line[i]).collect())
            .expect("composition of permutations")
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &v) in self.one_line.iter().enumerate() {
            inv[v] = i;
        }
        Permutation::new(inv).expect("inverse of a permutation")
    }

    /// `σ[a] = (a_{σ⁻¹(1)}, …, a_{σ⁻¹(n)})`: the entry in slot `i` moves to slot `σ(i)`.
    pub fn act_on_tuple<T: Clone>(&self, a: &[T]) -> Vec<T> {
        assert_eq!(a.len(), self.degree(), "tuple length differs from degree");
        let mut out = a.to_vec();
        for (i, item) in a.iter().enumerate() {
            out[self.one_line[i]] = item.clone();
        }
        out
    }

    /// All of `S_n` in lexicographic order of one-line notation.
    pub fn all(n: usize) -> Vec<Permutation> {
        fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            let n = used.len();
            if prefix.len() == n {
                out.push(Permutation::new(prefix.clone()).expect("built from distinct values"));
                return;
            }
            for v in 0..n {
                if !used[v] {
                    used[v] = true;
                    prefix.push(v);
                    extend(prefix, used, out);
                    prefix.pop();
                    used[v] = false;
                }
            }
        }
        let mut out = Vec::new();
        extend(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    /// Every reduced word of `self`, in lexicographic order.
    pub fn all_reduced_words(&self) -> Vec<Vec<usize>> {
        if self.is_identity() {
            return vec![Vec::new()];
        }
        let n = self.degree();
        let mut out = Vec::new();
        for i in 1..n {
            // right descent: ℓ(σ s_i) < ℓ(σ)
            if self.one_line[i - 1] > self.one_line[i] {
                let shorter = self.compose(&Permutation::simple(n, i).expect("in range"));
                for mut w in shorter.all_reduced_words() {
                    w.push(i);
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }
}

/// `g ∪ h = (g_1, …, g_n, h_1, …, h_m)`
pub fn concat<T: Clone>(g: &[T], h: &[T]) -> Vec<T> {
    g.iter().chain(h).cloned().collect()
}
