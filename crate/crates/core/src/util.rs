//! Small shared helpers: deterministic combination enumeration and
//! compensated summation.

use num_complex::Complex64 as C64;

/// All strictly increasing `n`-subsets of `[1..m]` in lexicographic order.
pub(crate) fn combinations_lex(m: usize, n: usize) -> Vec<Vec<usize>> {
    if n > m {
        return Vec::new();
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=n).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost index that still has room.
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - (n - 1 - i) {
                cur[i] += 1;
                for j in i + 1..n {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Kahan-compensated accumulator for complex values; the summation order is
/// whatever order `add` is called in, so callers control determinism.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanC {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl KahanC {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, z: C64) {
        let y_re = z.re - self.c_re;
        let t_re = self.sum_re + y_re;
        self.c_re = (t_re - self.sum_re) - y_re;
        self.sum_re = t_re;

        let y_im = z.im - self.c_im;
        let t_im = self.sum_im + y_im;
        self.c_im = (t_im - self.sum_im) - y_im;
        self.sum_im = t_im;
    }

    pub(crate) fn value(&self) -> C64 {
        C64::new(self.sum_re, self.sum_im)
    }
}

/// Kahan-compensated accumulator for real values.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanF {
    sum: f64,
    c: f64,
}

impl KahanF {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}
