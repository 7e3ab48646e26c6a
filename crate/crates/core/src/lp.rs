//! Small exact linear programs: two-phase tableau simplex with Bland's rule
//! over `BigRational`, so results are exact and cycling cannot occur.
//!
//! Every variable is implicitly `>= 0`.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, relation, rhs }
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost . x` over columns `< active`; `false` if unbounded.
    fn optimize(&mut self, cost: &[Rational], active: usize) -> bool {
        loop {
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                reduced.is_negative()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

/// Minimizes `objective . x` subject to `constraints` and `x >= 0`.
pub fn minimize(objective: &[Rational], constraints: &[Constraint]) -> LpOutcome {
    let n = objective.len();
    let m = constraints.len();
    // Columns: originals, one slack/surplus per inequality, one artificial per row.
    let n_slack = constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let art0 = n + n_slack;
    let width = art0 + m;
    let mut tab = Tableau { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: Vec::with_capacity(m) };
    let mut slack = n;
    for (i, con) in constraints.iter().enumerate() {
        assert_eq!(con.coeffs.len(), n, "constraint {i} has the wrong width");
        let flip = con.rhs.is_negative();
        let sign = |q: &Rational| if flip { -q } else { q.clone() };
        let mut row: Vec<Rational> = con.coeffs.iter().map(sign).collect();
        row.resize(width, Rational::zero());
        let relation = match (con.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        let basic = match relation {
            Relation::Le => {
                row[slack] = Rational::from_integer(1.into());
                slack += 1;
                slack - 1
            }
            Relation::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
                row[art0 + i] = Rational::from_integer(1.into());
                art0 + i
            }
            Relation::Eq => {
                row[art0 + i] = Rational::from_integer(1.into());
                art0 + i
            }
        };
        tab.rows.push(row);
        tab.rhs.push(sign(&con.rhs));
        tab.basis.push(basic);
    }

    let mut phase1 = vec![Rational::zero(); width];
    for v in phase1.iter_mut().skip(art0) {
        *v = Rational::from_integer(1.into());
    }
    tab.optimize(&phase1, width);
    let infeasibility: Rational = tab.basis.iter().zip(&tab.rhs).filter(|(&b, _)| b >= art0).map(|(_, v)| v.clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art0 {
            match (0..art0).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2 = objective.to_vec();
    phase2.resize(width, Rational::zero());
    if !tab.optimize(&phase2, art0) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (&b, v) in tab.basis.iter().zip(&tab.rhs) {
        if b < n {
            x[b] = v.clone();
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn con(coeffs: &[i64], relation: Relation, rhs: Rational) -> Constraint {
        Constraint::new(coeffs.iter().map(|&c| int(c)).collect(), relation, rhs)
    }

    #[test]
    fn textbook_minimum() {
        // min x + y  s.t.  x + 2y >= 3,  3x + y >= 4.
        let cons = [con(&[1, 2], Relation::Ge, int(3)), con(&[3, 1], Relation::Ge, int(4))];
        let LpOutcome::Optimal { x, value } = minimize(&[int(1), int(1)], &cons) else { panic!() };
        assert_eq!(x, vec![int(1), int(1)]);
        assert_eq!(value, int(2));
    }

    #[test]
    fn fractional_vertex() {
        // min -x - y  s.t.  2x + y <= 2,  x + 3y <= 3.
        let cons = [con(&[2, 1], Relation::Le, int(2)), con(&[1, 3], Relation::Le, int(3))];
        let LpOutcome::Optimal { x, value } = minimize(&[int(-1), int(-1)], &cons) else { panic!() };
        assert_eq!(x, vec![ratio(3, 5), ratio(4, 5)]);
        assert_eq!(value, ratio(-7, 5));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let cons = [con(&[1], Relation::Le, int(1)), con(&[1], Relation::Ge, int(2))];
        assert_eq!(minimize(&[int(0)], &cons), LpOutcome::Infeasible);
        assert_eq!(minimize(&[int(-1)], &[con(&[1], Relation::Ge, int(0))]), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_equalities() {
        // min x  s.t.  -x - y <= -4,  x - y = 0.
        let cons = [con(&[-1, -1], Relation::Le, int(-4)), con(&[1, -1], Relation::Eq, int(0))];
        let LpOutcome::Optimal { x, .. } = minimize(&[int(1), int(0)], &cons) else { panic!() };
        assert_eq!(x, vec![int(2), int(2)]);
        assert!(cons.iter().all(|c| c.satisfied_by(&x)));
    }

    #[test]
    fn redundant_equalities() {
        let cons = [con(&[1, 1], Relation::Eq, int(2)), con(&[2, 2], Relation::Eq, int(4))];
        let LpOutcome::Optimal { value, .. } = minimize(&[int(1), int(2)], &cons) else { panic!() };
        assert_eq!(value, int(2));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example under Dantzig's rule.
        let c = [ratio(-3, 4), int(150), ratio(-1, 50), int(6)];
        let cons = [
            Constraint::new(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Relation::Le, int(0)),
            Constraint::new(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Relation::Le, int(0)),
            Constraint::new(vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1)),
        ];
        let LpOutcome::Optimal { value, .. } = minimize(&c, &cons) else { panic!() };
        assert_eq!(value, ratio(-1, 20));
    }
}
