use super::{LinearProgram, LpError, LpSolution, LpStatus, PivotRule, RowKind, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

/// Working state of the bounded-variable revised simplex.
///
/// Variables are laid out as `[structural | slacks | artificials]`. Every
/// row becomes an equality: `<=` rows get a slack in `[0, +inf)`, and rows
/// that cannot start with a feasible slack get an artificial.
struct Tableau {
    m: usize,
    n_struct: usize,
    first_artificial: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Dense row-major basis inverse.
    binv: Vec<f64>,
    opts: SolveOptions,
    iterations: usize,
    pivots_since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

/// Solves `lp` to optimality, or reports infeasibility/unboundedness.
///
/// The result is a pure function of `lp` and `opts`: no randomness, no
/// hash-ordered iteration.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let mut t = Tableau::new(lp, *opts);

    if t.first_artificial < t.cols.len() {
        t.set_phase_cost(Phase::One, lp);
        match t.run()? {
            Step::Optimal => {}
            // Phase one is bounded below by zero.
            Step::Unbounded | Step::Continue => {
                return Err(t.numerical("phase one reported unbounded"));
            }
        }
        let infeasibility: f64 = (t.first_artificial..t.cols.len()).map(|j| t.x[j]).sum();
        let scale = 1.0 + t.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeasibility > opts.tol_feas.max(1e-9) * scale * (t.m as f64).max(1.0) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: t.x[..t.n_struct].to_vec(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: f64::NAN,
                iterations: t.iterations,
                nondegenerate: false,
            });
        }
        t.retire_artificials()?;
    }

    t.set_phase_cost(Phase::Two, lp);
    t.bland = opts.pivot == PivotRule::Bland;
    t.degenerate_run = 0;
    match t.run()? {
        Step::Optimal => {}
        Step::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: t.x[..t.n_struct].to_vec(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: f64::INFINITY,
                iterations: t.iterations,
                nondegenerate: false,
            });
        }
        Step::Continue => unreachable!(),
    }

    t.refactor()?;
    t.recompute_basics();
    let drift = t.max_bound_violation();
    if drift > 1e-7 {
        return Err(t.numerical(&format!("final basis violates bounds by {drift:e}")));
    }
    t.snap_nonbasics();

    let y = t.duals();
    let reduced_costs: Vec<f64> = (0..t.n_struct).map(|j| t.cost[j] - t.dot_col(&y, j)).collect();
    let x: Vec<f64> = t.x[..t.n_struct].to_vec();
    let nondegenerate = t.basis.iter().all(|&j| {
        let v = t.x[j];
        let margin = opts.tol_feas.max(1e-9) * (1.0 + v.abs());
        v - t.lo[j] > margin && t.hi[j] - v > margin
    });
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&x),
        x,
        duals: y,
        reduced_costs,
        iterations: t.iterations,
        nondegenerate,
    })
}

fn initial_value(lo: f64, hi: f64) -> (f64, VarState) {
    if lo.is_finite() {
        (lo, VarState::AtLower)
    } else if hi.is_finite() {
        (hi, VarState::AtUpper)
    } else {
        (0.0, VarState::Zero)
    }
}

impl Tableau {
    fn new(lp: &LinearProgram, opts: SolveOptions) -> Self {
        let m = lp.num_rows();
        let n_struct = lp.num_columns();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(c, a) in &row.coeffs {
                cols[c.0].push((i, a));
            }
        }
        let mut lo: Vec<f64> = lp.columns().iter().map(|c| c.lower).collect();
        let mut hi: Vec<f64> = lp.columns().iter().map(|c| c.upper).collect();
        let mut x = Vec::with_capacity(n_struct);
        let mut state = Vec::with_capacity(n_struct);
        for j in 0..n_struct {
            let (v, s) = initial_value(lo[j], hi[j]);
            x.push(v);
            state.push(s);
        }

        let rhs: Vec<f64> = lp.rows().iter().map(|r| r.rhs).collect();
        let mut residual = rhs.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    residual[i] -= a * x[j];
                }
            }
        }

        // Slacks for `<=` rows; a slack starts basic when it can absorb the
        // residual on its own.
        let mut basis = vec![usize::MAX; m];
        for (i, row) in lp.rows().iter().enumerate() {
            if row.kind == RowKind::Le {
                let j = cols.len();
                cols.push(vec![(i, 1.0)]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                if residual[i] >= 0.0 {
                    x.push(residual[i]);
                    state.push(VarState::Basic(i));
                    basis[i] = j;
                } else {
                    x.push(0.0);
                    state.push(VarState::AtLower);
                }
            }
        }
        let first_artificial = cols.len();
        for i in 0..m {
            if basis[i] == usize::MAX {
                let j = cols.len();
                let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                cols.push(vec![(i, sign)]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                x.push(residual[i].abs());
                state.push(VarState::Basic(i));
                basis[i] = j;
            }
        }

        let mut binv = vec![0.0; m * m];
        for (i, &j) in basis.iter().enumerate() {
            binv[i * m + i] = 1.0 / cols[j][0].1;
        }
        let n_total = cols.len();
        Self {
            m,
            n_struct,
            first_artificial,
            cols,
            lo,
            hi,
            cost: vec![0.0; n_total],
            x,
            rhs,
            state,
            basis,
            binv,
            opts,
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_run: 0,
            bland: opts.pivot == PivotRule::Bland,
        }
    }

    fn set_phase_cost(&mut self, phase: Phase, lp: &LinearProgram) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        match phase {
            Phase::One => {
                for j in self.first_artificial..self.cols.len() {
                    self.cost[j] = -1.0;
                }
            }
            Phase::Two => {
                for (j, c) in lp.columns().iter().enumerate() {
                    self.cost[j] = c.objective;
                }
            }
        }
    }

    fn numerical(&self, detail: &str) -> LpError {
        LpError::NumericalFailure {
            iterations: self.iterations,
            detail: detail.to_string(),
        }
    }

    fn dot_col(&self, y: &[f64], j: usize) -> f64 {
        self.cols[j].iter().map(|&(i, a)| y[i] * a).sum()
    }

    /// `B^{-1} a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for &(k, a) in &self.cols[j] {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.binv[i * m + k] * a;
            }
        }
        out
    }

    /// `c_B^T B^{-1}`
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = self.cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, b) in y.iter_mut().zip(row) {
                    *yk += cb * b;
                }
            }
        }
        y
    }

    fn is_eligible(&self, j: usize) -> bool {
        // Artificials never re-enter, and fixed variables cannot move.
        j < self.first_artificial && self.lo[j] < self.hi[j]
    }

    /// Picks the entering variable and its direction of motion.
    fn price(&self, y: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.tol_dual;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if !self.is_eligible(j) || matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let d = self.cost[j] - self.dot_col(y, j);
            let dir = match self.state[j] {
                VarState::AtLower if d > tol => 1.0,
                VarState::AtUpper if d < -tol => -1.0,
                VarState::Zero if d.abs() > tol => d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            match best {
                Some((_, _, score)) if d.abs() <= score => {}
                _ => best = Some((j, dir, d.abs())),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run(&mut self) -> Result<Step, LpError> {
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(LpError::IterationLimit(self.opts.max_iterations));
            }
            match self.iterate()? {
                Step::Continue => {}
                done => return Ok(done),
            }
        }
    }

    fn iterate(&mut self) -> Result<Step, LpError> {
        let y = self.duals();
        let Some((enter, dir)) = self.price(&y) else {
            return Ok(Step::Optimal);
        };
        self.iterations += 1;
        let alpha = self.ftran(enter);

        let (step, leaving) = if self.bland {
            self.ratio_textbook(enter, dir, &alpha)
        } else {
            self.ratio_harris(enter, dir, &alpha)
        };
        if step == f64::INFINITY {
            return Ok(Step::Unbounded);
        }

        if step <= self.opts.tol_feas {
            self.degenerate_run += 1;
            if self.degenerate_run > self.opts.stall_threshold {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        self.x[enter] += dir * step;
        for i in 0..self.m {
            let j = self.basis[i];
            self.x[j] -= dir * step * alpha[i];
        }

        match leaving {
            None => {
                self.state[enter] = if dir > 0.0 {
                    self.x[enter] = self.hi[enter];
                    VarState::AtUpper
                } else {
                    self.x[enter] = self.lo[enter];
                    VarState::AtLower
                };
            }
            Some((r, to_upper)) => {
                let out = self.basis[r];
                if to_upper {
                    self.x[out] = self.hi[out];
                    self.state[out] = VarState::AtUpper;
                } else {
                    self.x[out] = self.lo[out];
                    self.state[out] = VarState::AtLower;
                }
                self.pivot(r, enter, &alpha)?;
            }
        }
        Ok(Step::Continue)
    }

    /// Distance the basic variable in slot `i` may travel at `rate` per
    /// unit step, and whether it then sits at its upper bound.
    fn limit(&self, i: usize, rate: f64, slack: f64) -> Option<(f64, bool)> {
        let j = self.basis[i];
        if rate > 0.0 {
            (self.lo[j] > f64::NEG_INFINITY)
                .then(|| (((self.x[j] - self.lo[j] + slack) / rate).max(0.0), false))
        } else {
            (self.hi[j] < f64::INFINITY)
                .then(|| (((self.hi[j] - self.x[j] + slack) / -rate).max(0.0), true))
        }
    }

    /// Entries of the entering column at or below this are not pivots.
    fn pivot_floor(&self, alpha: &[f64]) -> f64 {
        let max_rate = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        self.opts.tol_pivot.max(1e-7 * max_rate)
    }

    /// Minimum ratio, ties broken by smallest basic index. `None` as the
    /// leaving slot means a bound flip of the entering variable.
    fn ratio_textbook(&self, enter: usize, dir: f64, alpha: &[f64]) -> (f64, Option<(usize, bool)>) {
        let floor = self.pivot_floor(alpha);
        let mut step = self.hi[enter] - self.lo[enter];
        let mut leaving: Option<(usize, bool)> = None;
        for (i, a) in alpha.iter().enumerate() {
            let rate = a * dir;
            if rate.abs() <= floor {
                continue;
            }
            let Some((limit, to_upper)) = self.limit(i, rate, 0.0) else { continue };
            let tie = step.is_finite() && (limit - step).abs() <= 1e-12 * (1.0 + step.abs());
            let better = if tie {
                leaving.is_some_and(|(cur, _)| self.basis[i] < self.basis[cur])
            } else {
                limit < step
            };
            if better {
                step = limit;
                leaving = Some((i, to_upper));
            }
        }
        (step, leaving)
    }

    /// Two-pass ratio test: bounds relaxed by the feasibility tolerance
    /// cap the step, then the largest pivot within the cap leaves.
    fn ratio_harris(&self, enter: usize, dir: f64, alpha: &[f64]) -> (f64, Option<(usize, bool)>) {
        let tol = self.opts.tol_feas.max(1e-12);
        let floor = self.pivot_floor(alpha);
        let mut cap = f64::INFINITY;
        for (i, a) in alpha.iter().enumerate() {
            let rate = a * dir;
            if rate.abs() > floor {
                if let Some((limit, _)) = self.limit(i, rate, tol) {
                    cap = cap.min(limit);
                }
            }
        }
        let flip = self.hi[enter] - self.lo[enter];
        if flip <= cap {
            return (flip, None);
        }
        let mut best: Option<(usize, bool, f64, f64)> = None;
        for (i, a) in alpha.iter().enumerate() {
            let rate = a * dir;
            if rate.abs() <= floor {
                continue;
            }
            let Some((limit, to_upper)) = self.limit(i, rate, 0.0) else { continue };
            if limit <= cap && best.is_none_or(|(_, _, _, m)| rate.abs() > m) {
                best = Some((i, to_upper, limit, rate.abs()));
            }
        }
        match best {
            Some((i, to_upper, limit, _)) => (limit, Some((i, to_upper))),
            None => (f64::INFINITY, None),
        }
    }

    /// Replaces the basic variable in position `r` by `enter`, updating the
    /// inverse with an elementary row transformation.
    fn pivot(&mut self, r: usize, enter: usize, alpha: &[f64]) -> Result<(), LpError> {
        let m = self.m;
        let piv = alpha[r];
        if piv.abs() <= self.opts.tol_pivot {
            return Err(self.numerical(&format!("pivot element {piv:e} too small")));
        }
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                let f = alpha[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        self.basis[r] = enter;
        self.state[enter] = VarState::Basic(r);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= self.opts.refactor_interval {
            self.refactor()?;
            self.recompute_basics();
        }
        Ok(())
    }

    /// Inverts the current basis from scratch (Gauss-Jordan, partial pivoting).
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.pivots_since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut p = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-12 {
                return Err(self.numerical("basis matrix is singular"));
            }
            if p != c {
                for k in 0..m {
                    a.swap(c * m + k, p * m + k);
                    inv.swap(c * m + k, p * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // Row `pos` of the inverse corresponds to basis position `pos`.
        self.binv = inv;
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.cols.len() {
            if !matches!(self.state[j], VarState::Basic(_)) && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let v: f64 = (0..m).map(|k| self.binv[i * m + k] * r[k]).sum();
            self.x[self.basis[i]] = v;
        }
    }

    fn snap_nonbasics(&mut self) {
        for j in 0..self.cols.len() {
            match self.state[j] {
                VarState::AtLower => self.x[j] = self.lo[j],
                VarState::AtUpper => self.x[j] = self.hi[j],
                VarState::Zero => self.x[j] = 0.0,
                VarState::Basic(_) => {}
            }
        }
    }

    fn max_bound_violation(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| {
                let v = self.x[j];
                let scale = 1.0 + v.abs();
                ((self.lo[j] - v).max(v - self.hi[j]).max(0.0)) / scale
            })
            .fold(0.0, f64::max)
    }

    /// After phase one: pivot basic artificials out where possible and fix
    /// all artificials at zero. An artificial that cannot leave marks a
    /// redundant row and stays basic at zero.
    fn retire_artificials(&mut self) -> Result<(), LpError> {
        let m = self.m;
        for r in 0..m {
            let art = self.basis[r];
            if art < self.first_artificial {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let v: f64 = self.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((enter, _)) = best {
                let alpha = self.ftran(enter);
                self.x[art] = 0.0;
                self.state[art] = VarState::AtLower;
                self.pivot(r, enter, &alpha)?;
            }
        }
        for j in self.first_artificial..self.cols.len() {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if !matches!(self.state[j], VarState::Basic(_)) {
                self.x[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
        self.refactor()?;
        self.recompute_basics();
        Ok(())
    }
}
