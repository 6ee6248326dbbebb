/// `n!` for the small `n` the sequencer enumerates. Saturates instead of overflowing.
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).fold(1u64, |acc, k| acc.saturating_mul(k))
}

/// Streams the permutations of `0..n` in lexicographic order without materializing them.
#[derive(Debug, Clone)]
pub struct LexPermutations {
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl LexPermutations {
    pub fn new(n: usize) -> Self {
        Self {
            current: (0..n).collect(),
            started: false,
            done: false,
        }
    }

    /// Advances to the next ordering and returns it, or `None` once exhausted.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let p = &mut self.current;
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
            self.done = true;
            return None;
        };
        let pivot = i - 1;
        let j = (i..p.len()).rev().find(|&j| p[j] > p[pivot]).expect("successor exists");
        p.swap(pivot, j);
        p[i..].reverse();
        Some(&self.current)
    }
}

/// Streams the permutations of `0..n` (`n ≤ 16`) in Heap's order: each step after the
/// first swaps one pair, so advancing is cheaper than the lexicographic successor.
#[derive(Debug, Clone)]
pub struct HeapPermutations {
    current: [usize; 16],
    counters: [usize; 16],
    n: usize,
    level: usize,
    started: bool,
}

impl HeapPermutations {
    pub fn new(n: usize) -> Self {
        assert!(n <= 16, "at most 16 elements");
        let mut current = [0; 16];
        for (k, slot) in current.iter_mut().enumerate() {
            *slot = k;
        }
        Self {
            current,
            counters: [0; 16],
            n,
            level: 1,
            started: false,
        }
    }

    pub fn advance(&mut self) -> Option<&[usize]> {
        if !self.started {
            self.started = true;
            return Some(&self.current[..self.n]);
        }
        while self.level < self.n {
            let i = self.level;
            let c = self.counters[i];
            if c < i {
                let j = if i % 2 == 0 { 0 } else { c };
                self.current.swap(j, i);
                self.counters[i] = c + 1;
                self.level = 1;
                return Some(&self.current[..self.n]);
            }
            self.counters[i] = 0;
            self.level += 1;
        }
        None
    }
}
