//! Helpers for sequences given as a finite prefix followed by a repeating cycle.

use num_integer::Integer;

/// Per-level data laid out as `prefix` then `cycle` repeated forever.
/// An empty cycle means the data stops after the prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTable<T> {
    pub prefix: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T> LevelTable<T> {
    pub fn at(&self, level: usize) -> Option<&T> {
        position(self.prefix.len(), self.cycle.len(), level).map(|p| {
            if p < self.prefix.len() {
                &self.prefix[p]
            } else {
                &self.cycle[p - self.prefix.len()]
            }
        })
    }

    /// Number of stored entries (`prefix.len() + cycle.len()`).
    pub fn stored(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }
}

/// Index into `prefix ++ cycle` for the given level, or `None` past a finite sequence.
pub fn position(prefix_len: usize, cycle_len: usize, level: usize) -> Option<usize> {
    if level < prefix_len {
        Some(level)
    } else if cycle_len == 0 {
        None
    } else {
        Some(prefix_len + (level - prefix_len) % cycle_len)
    }
}

/// The stored index that follows `pos` when walking down one level.
pub fn next_position(prefix_len: usize, cycle_len: usize, pos: usize) -> usize {
    if pos + 1 < prefix_len + cycle_len {
        pos + 1
    } else {
        prefix_len
    }
}

/// Shortest presentation of the same infinite sequence: minimal period, then the
/// shortest prefix.
pub fn minimize<T: PartialEq + Clone>(mut prefix: Vec<T>, mut cycle: Vec<T>) -> (Vec<T>, Vec<T>) {
    let c = cycle.len();
    if c > 0 {
        for d in 1..=c {
            if c.is_multiple_of(d) && (0..c).all(|i| cycle[i] == cycle[i % d]) {
                cycle.truncate(d);
                break;
            }
        }
        while let Some(last) = prefix.last() {
            if *last != cycle[cycle.len() - 1] {
                break;
            }
            let last = prefix.pop().unwrap();
            cycle.pop();
            cycle.insert(0, last);
        }
    }
    (prefix, cycle)
}

pub fn lcm(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        a.max(b)
    } else {
        a.lcm(&b)
    }
}

/// Re-expresses a prefix/cycle sequence with a longer prefix and a cycle whose
/// length is a multiple of the original one.
pub fn align<T: Clone>(prefix: &[T], cycle: &[T], prefix_len: usize, cycle_len: usize) -> (Vec<T>, Vec<T>) {
    assert!(prefix_len >= prefix.len());
    assert!(!cycle.is_empty() && cycle_len.is_multiple_of(cycle.len()));
    let at = |i: usize| -> T {
        if i < prefix.len() {
            prefix[i].clone()
        } else {
            cycle[(i - prefix.len()) % cycle.len()].clone()
        }
    };
    let p = (0..prefix_len).map(at).collect();
    let c = (prefix_len..prefix_len + cycle_len).map(at).collect();
    (p, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimize_shortens_period_and_prefix() {
        let (p, c) = minimize(vec![1, 2, 3, 2, 3], vec![2, 3, 2, 3]);
        assert_eq!(p, vec![1]);
        assert_eq!(c, vec![2, 3]);
        let (p, c) = minimize(vec![5, 5], vec![5]);
        assert!(p.is_empty());
        assert_eq!(c, vec![5]);
    }

    #[test]
    fn table_lookup() {
        let t = LevelTable { prefix: vec!['a'], cycle: vec!['b', 'c'] };
        let s: String = (0..6).map(|i| *t.at(i).unwrap()).collect();
        assert_eq!(s, "abcbcb");
        let f = LevelTable { prefix: vec![1], cycle: vec![] };
        assert_eq!(f.at(1), None);
    }

    #[test]
    fn align_preserves_sequence() {
        let (p, c) = align(&[1], &[2, 3], 2, 4);
        assert_eq!(p, vec![1, 2]);
        assert_eq!(c, vec![3, 2, 3, 2]);
    }
}
