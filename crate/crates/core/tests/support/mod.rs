#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vlink::lp::{ColId, LinearProgram, RowKind};

/// Small LP in plain arrays: maximize `c x`, rows `a x (= | <=) b`,
/// `lo <= x <= hi` with finite bounds.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub kind: Vec<RowKind>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    Optimal(f64),
    Infeasible,
}

impl DenseLp {
    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        let cols: Vec<ColId> = (0..self.c.len())
            .map(|j| lp.add_column(format!("x{j}"), self.lo[j], self.hi[j], self.c[j]))
            .collect();
        for (i, row) in self.a.iter().enumerate() {
            let coeffs: Vec<_> = row.iter().enumerate().map(|(j, &v)| (cols[j], v)).collect();
            lp.add_row(format!("r{i}"), self.kind[i], coeffs, self.b[i]);
        }
        lp
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let tol = 1e-9;
        for j in 0..x.len() {
            if x[j] < self.lo[j] - tol * (1.0 + self.lo[j].abs()) || x[j] > self.hi[j] + tol * (1.0 + self.hi[j].abs()) {
                return false;
            }
        }
        for (i, row) in self.a.iter().enumerate() {
            let act: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            let slack = tol * (1.0 + self.b[i].abs() + row.iter().map(|a| a.abs()).sum::<f64>() * 10.0);
            match self.kind[i] {
                RowKind::Eq if (act - self.b[i]).abs() > slack => return false,
                RowKind::Le if act > self.b[i] + slack => return false,
                _ => {}
            }
        }
        true
    }

    /// Best objective over all basic solutions.
    pub fn brute_force(&self) -> Oracle {
        let n = self.c.len();
        let m = self.a.len();
        let le: Vec<usize> = (0..m).filter(|&i| self.kind[i] == RowKind::Le).collect();
        let mut best: Option<f64> = None;
        let col_states = 3usize.pow(n as u32);
        for cs in 0..col_states {
            let mut state = vec![0u8; n];
            let mut k = cs;
            for s in state.iter_mut() {
                *s = (k % 3) as u8;
                k /= 3;
            }
            let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
            let mut x0 = vec![0.0; n];
            for j in 0..n {
                x0[j] = match state[j] {
                    0 => self.lo[j],
                    1 => self.hi[j],
                    _ => 0.0,
                };
            }
            for mask in 0..(1usize << le.len()) {
                let rows: Vec<usize> = (0..m)
                    .filter(|&i| {
                        self.kind[i] == RowKind::Eq
                            || le.iter().position(|&r| r == i).is_some_and(|p| mask >> p & 1 == 1)
                    })
                    .collect();
                if rows.len() < free.len() {
                    continue;
                }
                let mut x = x0.clone();
                if !free.is_empty() || !rows.is_empty() {
                    let sys: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|&i| {
                            let fixed: f64 = (0..n).filter(|j| state[*j] != 2).map(|j| self.a[i][j] * x0[j]).sum();
                            let mut r: Vec<f64> = free.iter().map(|&j| self.a[i][j]).collect();
                            r.push(self.b[i] - fixed);
                            r
                        })
                        .collect();
                    match solve_unique(sys, free.len()) {
                        Some(sol) => {
                            for (k, &j) in free.iter().enumerate() {
                                x[j] = sol[k];
                            }
                        }
                        None => continue,
                    }
                }
                if self.feasible(&x) {
                    let obj: f64 = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
                    best = Some(best.map_or(obj, |b: f64| b.max(obj)));
                }
            }
        }
        best.map_or(Oracle::Infeasible, Oracle::Optimal)
    }
}

/// Solves an augmented system for `k` unknowns when it has exactly one
/// solution.
fn solve_unique(mut sys: Vec<Vec<f64>>, k: usize) -> Option<Vec<f64>> {
    let rows = sys.len();
    let mut r = 0;
    for c in 0..k {
        let p = (r..rows).max_by(|&a, &b| sys[a][c].abs().total_cmp(&sys[b][c].abs()))?;
        if sys[p][c].abs() < 1e-9 {
            return None;
        }
        sys.swap(r, p);
        let piv = sys[r][c];
        for v in sys[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = sys[i][c];
                if f != 0.0 {
                    for cc in 0..=k {
                        let d = f * sys[r][cc];
                        sys[i][cc] -= d;
                    }
                }
            }
        }
        r += 1;
    }
    for row in &sys[r..] {
        if row[k].abs() > 1e-7 {
            return None;
        }
    }
    Some((0..k).map(|c| sys[c][k]).collect())
}

/// Random LP with half-integer data, up to `max_cols` columns and
/// `max_rows` rows.
pub fn random_lp(rng: &mut ChaCha8Rng, max_cols: usize, max_rows: usize) -> DenseLp {
    let n = rng.gen_range(1..=max_cols);
    let m = rng.gen_range(0..=max_rows);
    let half = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64 / 2.0;
    let lo: Vec<f64> = (0..n).map(|_| half(rng, -8, 2)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + half(rng, 0, 12)).collect();
    let c = (0..n).map(|_| half(rng, -10, 10)).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.3) { 0.0 } else { half(rng, -8, 8) })
                .collect()
        })
        .collect();
    let kind = (0..m)
        .map(|_| if rng.gen_bool(0.35) { RowKind::Eq } else { RowKind::Le })
        .collect();
    let b = (0..m).map(|_| half(rng, -10, 10)).collect();
    DenseLp { c, lo, hi, a, kind, b }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
