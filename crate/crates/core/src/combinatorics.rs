//! Thue-Morse signs, the tensor shape `(n', ρ)`, and the reordering `π` of the
//! middle matrices `2..=n-1` that aligns the nested complex-power product with
//! the tensor-product layout.

use std::fmt;

/// `β_j` from `β_0 = 0`, `β_{2j} = β_j`, `β_{2j+1} = 1 - β_j`.
pub fn thue_morse_shifted(mut j: usize) -> u8 {
    let mut flips = 0u8;
    while j > 0 {
        if j % 2 == 1 {
            flips ^= 1;
            j = (j - 1) / 2;
        } else {
            j /= 2;
        }
    }
    flips
}

/// `α_k = β_{k-2}` for `k ≥ 2`.
pub fn thue_morse(k: usize) -> u8 {
    assert!(k >= 2, "Thue-Morse index starts at 2, got {k}");
    thue_morse_shifted(k - 2)
}

/// `(α_2, …, α_{len+1})`.
pub fn thue_morse_prefix(len: usize) -> Vec<u8> {
    (2..len + 2).map(thue_morse).collect()
}

/// Smallest positive integer `≥ x`, so `ceil_pos(0) = 1`.
pub fn ceil_pos(x: f64) -> u32 {
    let c = x.ceil();
    if c < 1.0 {
        1
    } else {
        c as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeParams {
    /// `n' = ⌈log₂(n-2)⌉` with `⌈0⌉ = 1`.
    pub n_prime: u32,
    /// Identity padding `2^{n'} - (n-2)`.
    pub rho: usize,
}

impl ShapeParams {
    pub fn factor_count(&self) -> usize {
        1 << self.n_prime
    }
}

pub fn shape_params(n: usize) -> ShapeParams {
    assert!(n >= 3, "shape parameters need n ≥ 3, got {n}");
    let mid = n - 2;
    let n_prime = mid.next_power_of_two().trailing_zeros().max(1);
    ShapeParams {
        n_prime,
        rho: (1usize << n_prime) - mid,
    }
}

/// A bijection `π` on `{2, …, n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidPermutation {
    pub n: usize,
    /// `map[k - 2] = π(k)`.
    pub map: Vec<usize>,
}

impl MidPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            map: (2..n).collect(),
        }
    }

    pub fn from_map(n: usize, map: Vec<usize>) -> Self {
        let p = Self { n, map };
        assert!(
            p.is_bijection(),
            "not a bijection on 2..={}: {:?}",
            n - 1,
            p.map
        );
        p
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k - 2]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v - 2] = i + 2;
        }
        Self {
            n: self.n,
            map: inv,
        }
    }

    pub fn is_bijection(&self) -> bool {
        let len = self.n.saturating_sub(2);
        if self.map.len() != len {
            return false;
        }
        let mut seen = vec![false; len];
        self.map
            .iter()
            .all(|&v| (2..self.n).contains(&v) && !std::mem::replace(&mut seen[v - 2], true))
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| v == i + 2)
    }
}

impl fmt::Display for MidPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}→{}", i + 2, v)?;
        }
        write!(f, "}}")
    }
}

/// `π` for `n = 2^level + 2`, by doubling: with `σ̃` from the previous level,
/// `π̃(m) = σ̃(m/2)` for even `m` and `n + 1 - σ̃((m-1)/2)` for odd `m`.
fn doubling_permutation(level: u32) -> Vec<usize> {
    if level == 0 {
        return vec![2];
    }
    let sigma = doubling_permutation(level - 1);
    let n = (1usize << level) + 2;
    (0..n - 2)
        .map(|m| {
            if m % 2 == 0 {
                sigma[m / 2]
            } else {
                n + 1 - sigma[(m - 1) / 2]
            }
        })
        .collect()
}

/// The reordering `π` for any `n ≥ 3`.
///
/// Sizes with `n - 2` a power of two come straight from the doubling recursion.
/// Otherwise the permutation of the next such size is restricted: the matrices
/// landing in the last `ρ` tensor slots are replaced by identities, drop out of
/// the product, and the surviving indices are relabelled onto `2..=n-1`.
pub fn build_permutation(n: usize) -> MidPermutation {
    assert!(n >= 3, "permutation needs n ≥ 3, got {n}");
    let shape = shape_params(n);
    let padded = shape.factor_count() + 2;
    let full = doubling_permutation(shape.n_prime);
    if padded == n {
        return MidPermutation::from_map(n, full);
    }
    // slots n..=padded-1 carry identities; their indices are removed
    let padding: Vec<usize> = (n..padded).map(|k| full[k - 2]).collect();
    let relabel = |v: usize| v - padding.iter().filter(|&&p| p < v).count();
    let map = full[..n - 2].iter().map(|&v| relabel(v)).collect();
    MidPermutation::from_map(n, map)
}
