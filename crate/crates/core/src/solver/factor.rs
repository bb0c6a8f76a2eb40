//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The basis is an `m x m` matrix whose columns are indexed by basis position
//! and whose rows are constraint rows. It is factorized by right-looking
//! Gaussian elimination with Markowitz pivot selection: column and row
//! singletons are taken from queues first, the remaining bump is searched
//! with a threshold rule. Column replacements after a pivot are appended as
//! eta vectors until the next refactorization.

use super::SolverError;

const NONE: usize = usize::MAX;
/// Entries below this fraction of their column's largest are not pivots.
const THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
/// Columns examined per Markowitz search.
const SEARCH_COLUMNS: usize = 4;

/// One eliminated column: `rows[i] -= mult * rows[pivot_row]`.
#[derive(Debug, Clone, Default)]
struct Elimination {
    pivot_row: usize,
    rows: Vec<usize>,
    mults: Vec<f64>,
}

/// A row of `U`: the pivot entry and the remaining entries, which all sit in
/// columns pivoted later.
#[derive(Debug, Clone, Default)]
struct URow {
    pivot_col: usize,
    diag: f64,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Replacement of basis position `pos` by a column with representation `alpha`.
#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Factor {
    m: usize,
    lower: Vec<Elimination>,
    upper: Vec<URow>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    lu_nnz: usize,
}

impl Factor {
    pub fn identity(m: usize) -> Self {
        Self {
            m,
            lower: (0..m).map(|i| Elimination { pivot_row: i, ..Default::default() }).collect(),
            upper: (0..m).map(|i| URow { pivot_col: i, diag: 1.0, ..Default::default() }).collect(),
            etas: Vec::new(),
            eta_nnz: 0,
            lu_nnz: m,
        }
    }

    /// Factorizes the matrix whose column `p` has the given `(row, value)` entries.
    pub fn new(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, SolverError> {
        debug_assert_eq!(columns.len(), m);
        Markowitz::new(m, columns).run()
    }

    pub fn updates(&self) -> usize {
        self.etas.len()
    }

    /// Whether the eta file has grown large relative to the factors.
    pub fn is_bloated(&self) -> bool {
        self.eta_nnz > 2 * self.lu_nnz + 10 * self.m
    }

    /// Records that position `pos` now holds a column whose FTRAN is `alpha`.
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut vals = Vec::new();
        for (p, &v) in alpha.iter().enumerate() {
            if p != pos && v != 0.0 {
                idx.push(p);
                vals.push(v);
            }
        }
        self.eta_nnz += idx.len() + 1;
        self.etas.push(Eta { pos, pivot: alpha[pos], idx, vals });
    }

    /// Solves `B x = b` in place: `b` is indexed by row on entry and by basis
    /// position on exit.
    pub fn ftran(&self, b: &mut Vec<f64>) {
        for e in &self.lower {
            let v = b[e.pivot_row];
            if v != 0.0 {
                for (&i, &l) in e.rows.iter().zip(&e.mults) {
                    b[i] -= l * v;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for (t, u) in self.upper.iter().enumerate().rev() {
            let mut s = b[self.lower[t].pivot_row];
            for (&c, &v) in u.cols.iter().zip(&u.vals) {
                s -= v * x[c];
            }
            x[u.pivot_col] = s / u.diag;
        }
        for e in &self.etas {
            let xp = x[e.pos] / e.pivot;
            if xp != 0.0 {
                for (&i, &a) in e.idx.iter().zip(&e.vals) {
                    x[i] -= a * xp;
                }
            }
            x[e.pos] = xp;
        }
        *b = x;
    }

    /// Solves `B' y = c` in place: `c` is indexed by basis position on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut Vec<f64>) {
        for e in self.etas.iter().rev() {
            let mut s = c[e.pos];
            for (&i, &a) in e.idx.iter().zip(&e.vals) {
                s -= a * c[i];
            }
            c[e.pos] = s / e.pivot;
        }
        let mut z = vec![0.0; self.m];
        for (t, u) in self.upper.iter().enumerate() {
            let zr = c[u.pivot_col] / u.diag;
            z[self.lower[t].pivot_row] = zr;
            if zr != 0.0 {
                for (&col, &v) in u.cols.iter().zip(&u.vals) {
                    c[col] -= v * zr;
                }
            }
        }
        for e in self.lower.iter().rev() {
            let mut s = z[e.pivot_row];
            for (&i, &l) in e.rows.iter().zip(&e.mults) {
                s -= l * z[i];
            }
            z[e.pivot_row] = s;
        }
        *c = z;
    }
}

/// Working state of one factorization.
struct Markowitz {
    m: usize,
    /// Active part of each row as `(column, value)`.
    rows: Vec<Vec<(usize, f64)>>,
    /// Rows that may hold an entry in each column (can contain stale rows).
    cols: Vec<Vec<usize>>,
    row_count: Vec<usize>,
    col_count: Vec<usize>,
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    active_cols: Vec<usize>,
    active_pos: Vec<usize>,
    col_queue: Vec<usize>,
    row_queue: Vec<usize>,
    marker: Vec<usize>,
    lower: Vec<Elimination>,
    upper: Vec<URow>,
}

impl Markowitz {
    fn new(m: usize, columns: &[Vec<(usize, f64)>]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push((p, v));
                    cols[p].push(i);
                }
            }
        }
        let row_count: Vec<usize> = rows.iter().map(Vec::len).collect();
        let col_count: Vec<usize> = cols.iter().map(Vec::len).collect();
        let col_queue = (0..m).filter(|&c| col_count[c] == 1).collect();
        let row_queue = (0..m).filter(|&r| row_count[r] == 1).collect();
        Self {
            m,
            rows,
            cols,
            row_count,
            col_count,
            row_done: vec![false; m],
            col_done: vec![false; m],
            active_cols: (0..m).collect(),
            active_pos: (0..m).collect(),
            col_queue,
            row_queue,
            marker: vec![NONE; m],
            lower: Vec::with_capacity(m),
            upper: Vec::with_capacity(m),
        }
    }

    fn entry(&self, row: usize, col: usize) -> Option<f64> {
        self.rows[row].iter().find(|e| e.0 == col).map(|e| e.1)
    }

    fn col_max(&self, col: usize) -> f64 {
        self.cols[col]
            .iter()
            .filter(|&&r| !self.row_done[r])
            .filter_map(|&r| self.entry(r, col))
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    fn singleton_pivot(&mut self) -> Option<(usize, usize)> {
        while let Some(c) = self.col_queue.pop() {
            if self.col_done[c] || self.col_count[c] != 1 {
                continue;
            }
            let row = self.cols[c].iter().copied().find(|&r| !self.row_done[r] && self.entry(r, c).is_some());
            if let Some(r) = row {
                if self.entry(r, c).is_some_and(|v| v.abs() > SINGULAR_TOL) {
                    return Some((r, c));
                }
            }
        }
        while let Some(r) = self.row_queue.pop() {
            if self.row_done[r] || self.row_count[r] != 1 {
                continue;
            }
            let (c, v) = self.rows[r][0];
            if v.abs() >= THRESHOLD * self.col_max(c) && v.abs() > SINGULAR_TOL {
                return Some((r, c));
            }
        }
        None
    }

    fn markowitz_pivot(&self) -> Result<(usize, usize), SolverError> {
        let mut order: Vec<usize> = Vec::with_capacity(SEARCH_COLUMNS);
        for &c in &self.active_cols {
            if self.col_count[c] == 0 {
                return Err(SolverError::Numerical("structurally singular basis".into()));
            }
            if order.len() < SEARCH_COLUMNS {
                order.push(c);
                order.sort_by_key(|&c| self.col_count[c]);
            } else if self.col_count[c] < self.col_count[order[SEARCH_COLUMNS - 1]] {
                order[SEARCH_COLUMNS - 1] = c;
                order.sort_by_key(|&c| self.col_count[c]);
            }
        }
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for &c in &order {
            let cmax = self.col_max(c);
            if cmax <= SINGULAR_TOL {
                continue;
            }
            for &r in &self.cols[c] {
                if self.row_done[r] {
                    continue;
                }
                let Some(v) = self.entry(r, c) else { continue };
                if v.abs() < THRESHOLD * cmax {
                    continue;
                }
                let cost = (self.row_count[r] - 1) * (self.col_count[c] - 1);
                let better = match best {
                    None => true,
                    Some((_, _, bc, bv)) => cost < bc || (cost == bc && v.abs() > bv),
                };
                if better {
                    best = Some((r, c, cost, v.abs()));
                }
            }
        }
        best.map(|(r, c, _, _)| (r, c)).ok_or_else(|| SolverError::Numerical("singular basis".into()))
    }

    fn eliminate(&mut self, r: usize, c: usize) {
        let prow = std::mem::take(&mut self.rows[r]);
        self.row_done[r] = true;
        self.col_done[c] = true;
        let ap = self.active_pos[c];
        let last = *self.active_cols.last().expect("active column");
        self.active_cols.swap_remove(ap);
        self.active_pos[last] = ap;
        for &(cc, _) in &prow {
            if cc != c {
                self.col_count[cc] -= 1;
                if self.col_count[cc] == 1 {
                    self.col_queue.push(cc);
                }
            }
        }
        let diag = prow.iter().find(|e| e.0 == c).expect("pivot entry").1;
        let others: Vec<(usize, f64)> = prow.iter().copied().filter(|e| e.0 != c).collect();

        let mut elim = Elimination { pivot_row: r, rows: Vec::new(), mults: Vec::new() };
        let candidates = std::mem::take(&mut self.cols[c]);
        for &i in &candidates {
            if self.row_done[i] {
                continue;
            }
            let Some(k) = self.rows[i].iter().position(|e| e.0 == c) else { continue };
            let l = self.rows[i][k].1 / diag;
            self.rows[i].swap_remove(k);
            if l != 0.0 {
                elim.rows.push(i);
                elim.mults.push(l);
                for (idx, &(cc, _)) in self.rows[i].iter().enumerate() {
                    self.marker[cc] = idx;
                }
                for &(cc, v) in &others {
                    match self.marker[cc] {
                        NONE => {
                            self.rows[i].push((cc, -l * v));
                            self.cols[cc].push(i);
                            self.col_count[cc] += 1;
                        }
                        idx => self.rows[i][idx].1 -= l * v,
                    }
                }
                for &(cc, _) in &self.rows[i] {
                    self.marker[cc] = NONE;
                }
            }
            self.row_count[i] = self.rows[i].len();
            if self.row_count[i] == 1 {
                self.row_queue.push(i);
            }
        }
        self.col_count[c] = 0;
        self.lower.push(elim);
        self.upper.push(URow {
            pivot_col: c,
            diag,
            cols: others.iter().map(|e| e.0).collect(),
            vals: others.iter().map(|e| e.1).collect(),
        });
    }

    fn run(mut self) -> Result<Factor, SolverError> {
        for _ in 0..self.m {
            let (r, c) = match self.singleton_pivot() {
                Some(p) => p,
                None => self.markowitz_pivot()?,
            };
            self.eliminate(r, c);
        }
        let lu_nnz = self.lower.iter().map(|e| e.rows.len()).sum::<usize>()
            + self.upper.iter().map(|u| u.cols.len() + 1).sum::<usize>();
        Ok(Factor { m: self.m, lower: self.lower, upper: self.upper, etas: Vec::new(), eta_nnz: 0, lu_nnz })
    }
}
