//! Integer binomial/multinomial coefficients and weak-composition
//! enumeration for the direct coefficient sums of the closed-form rates.

use alloc::vec;
use alloc::vec::Vec;

/// `n choose k`, or `None` on `i128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<i128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply.
        acc = acc.checked_mul(i128::from(n - i))? / i128::from(i + 1);
    }
    Some(acc)
}

/// Multinomial coefficient `n! / (k₀!·k₁!·…)` with `n = Σ kᵢ`.
pub fn multinomial(parts: &[u32]) -> Option<i128> {
    let mut total: u64 = 0;
    let mut acc: i128 = 1;
    for &k in parts {
        total += u64::from(k);
        acc = acc.checked_mul(binomial(total, u64::from(k))?)?;
    }
    Some(acc)
}

/// Number of weak compositions of `total` into `parts` parts.
pub fn composition_count(total: u32, parts: usize) -> Option<u128> {
    if parts == 0 {
        return Some(u128::from(total == 0));
    }
    let n = u64::from(total) + parts as u64 - 1;
    binomial(n, parts as u64 - 1).map(|c| c as u128)
}

/// Calls `visit` with every weak composition `(l₁, …, l_parts)` of `total`,
/// in colexicographic order (the last part varies slowest).
pub fn for_each_composition<F: FnMut(&[u32])>(total: u32, parts: usize, mut visit: F) {
    if parts == 0 {
        if total == 0 {
            visit(&[]);
        }
        return;
    }
    let mut current = vec![0u32; parts];
    fill(&mut current, parts, total, &mut visit);
}

fn fill<F: FnMut(&[u32])>(current: &mut [u32], len: usize, remaining: u32, visit: &mut F) {
    if len == 1 {
        current[0] = remaining;
        visit(current);
        return;
    }
    for last in 0..=remaining {
        current[len - 1] = last;
        fill(current, len - 1, remaining - last, visit);
    }
}

/// All weak compositions, collected.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_composition(total, parts, |c| out.push(c.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
        assert!(binomial(400, 200).is_none());
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[2, 1, 1]), Some(12));
        assert_eq!(multinomial(&[0, 0, 3]), Some(1));
        assert_eq!(multinomial(&[]), Some(1));
    }

    #[test]
    fn colex_order_and_count() {
        let all = compositions(2, 3);
        assert_eq!(
            all,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
        for (n, k) in [(0u32, 1usize), (3, 1), (4, 4), (6, 3)] {
            assert_eq!(
                compositions(n, k).len() as u128,
                composition_count(n, k).unwrap()
            );
        }
        assert_eq!(compositions(0, 0), vec![Vec::<u32>::new()]);
        assert!(compositions(1, 0).is_empty());
    }

    #[test]
    fn multinomial_theorem_sum() {
        // Σ multinomial = parts^n
        let total: i128 = compositions(5, 3)
            .iter()
            .map(|c| multinomial(c).unwrap())
            .sum();
        assert_eq!(total, 243);
    }
}
