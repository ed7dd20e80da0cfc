//! Occupation-string bit manipulation with fermionic phases.

#[inline]
fn parity_below(s: u64, k: usize) -> f64 {
    if (s & ((1u64 << k) - 1)).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_k` on string `s`.
#[inline]
pub fn annihilate(s: u64, k: usize) -> Option<(u64, f64)> {
    if s >> k & 1 == 0 {
        None
    } else {
        Some((s & !(1u64 << k), parity_below(s, k)))
    }
}

/// `a_k^dagger` on string `s`.
#[inline]
pub fn create(s: u64, k: usize) -> Option<(u64, f64)> {
    if s >> k & 1 == 1 {
        None
    } else {
        Some((s | (1u64 << k), parity_below(s, k)))
    }
}

/// `a_p^dagger a_q` on string `s`.
#[inline]
pub fn excite(s: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    let (t, s1) = annihilate(s, q)?;
    let (u, s2) = create(t, p)?;
    Some((u, s1 * s2))
}

/// All `k`-electron strings over `n` orbitals in increasing numeric order.
pub fn strings(n: usize, k: usize) -> alloc::vec::Vec<u64> {
    let mut out = alloc::vec::Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u128 << n;
    let mut s: u64 = (1u64 << k) - 1;
    while (s as u128) < limit {
        out.push(s);
        let c = s & s.wrapping_neg();
        let r = s.wrapping_add(c);
        if r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases() {
        // a_2^dagger a_0 on |0 1> : remove 0 (sign +), add 2 past orbital 1 (sign -)
        assert_eq!(excite(0b011, 2, 0), Some((0b110, -1.0)));
        assert_eq!(excite(0b011, 1, 1), Some((0b011, 1.0)));
        assert_eq!(excite(0b011, 1, 0), None);
    }

    #[test]
    fn string_counts() {
        assert_eq!(strings(6, 3).len(), 20);
        assert_eq!(strings(4, 0), [0]);
        let s = strings(5, 2);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}
