//! 3-CNF formulas, DIMACS I/O and a brute-force satisfiability oracle.

use std::fmt::{self, Write};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn holds(&self, asg: &[bool]) -> bool {
        asg[self.var - 1] == self.positive
    }

    fn dimacs(&self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "~x{}", self.var)
        }
    }
}

pub type Clause = [Literal; 3];

/// Truth values indexed by variable (`asg[k - 1]` is `x_k`).
pub type Assignment = Vec<bool>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula3Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("clause {clause} has {len} literals, expected 3")]
    NotThreeCnf { clause: usize, len: usize },
}

impl Formula3Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.iter().find(|l| l.var == 0 || l.var > num_vars) {
                return Err(CnfError::SyntaxError { line: 0, message: format!("clause {}: variable {} out of range", i + 1, l.var) });
            }
        }
        Ok(Formula3Cnf { num_vars, clauses })
    }

    pub fn satisfied_by(&self, asg: &[bool]) -> bool {
        asg.len() == self.num_vars && self.clauses.iter().all(|c| c.iter().any(|l| l.holds(asg)))
    }

    /// Same clauses over `n` variables (the extra ones appear nowhere).
    pub fn padded(&self, n: usize) -> Self {
        Formula3Cnf { num_vars: self.num_vars.max(n), clauses: self.clauses.clone() }
    }
}

impl fmt::Display for Formula3Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.clauses.iter().map(|c| format!("({} | {} | {})", c[0], c[1], c[2])).collect();
        f.write_str(&parts.join(" & "))
    }
}

pub fn parse_dimacs(text: &str) -> Result<Formula3Cnf, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        let syntax = |message: String| CnfError::SyntaxError { line: lineno, message };
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(syntax("duplicate problem line".into()));
            }
            match parts.as_slice() {
                ["p", "cnf", n, m] => {
                    let n = n.parse().map_err(|_| syntax(format!("bad variable count `{n}`")))?;
                    let m = m.parse().map_err(|_| syntax(format!("bad clause count `{m}`")))?;
                    header = Some((n, m));
                }
                _ => return Err(syntax("expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let Some((n, _)) = header else { return Err(syntax("clause before problem line".into())) };
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| syntax(format!("bad literal `{tok}`")))?;
            if v == 0 {
                if current.len() != 3 {
                    return Err(CnfError::NotThreeCnf { clause: clauses.len() + 1, len: current.len() });
                }
                clauses.push([current[0], current[1], current[2]]);
                current.clear();
                continue;
            }
            let var = v.unsigned_abs() as usize;
            if var > n {
                return Err(syntax(format!("variable {var} exceeds declared count {n}")));
            }
            current.push(Literal { var, positive: v > 0 });
        }
    }
    let Some((n, m)) = header else {
        return Err(CnfError::SyntaxError { line: 0, message: "missing problem line".into() });
    };
    if !current.is_empty() {
        return Err(CnfError::NotThreeCnf { clause: clauses.len() + 1, len: current.len() });
    }
    if clauses.len() != m {
        return Err(CnfError::SyntaxError { line: 0, message: format!("header declares {m} clauses, found {}", clauses.len()) });
    }
    Ok(Formula3Cnf { num_vars: n, clauses })
}

pub fn render_dimacs(f: &Formula3Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        writeln!(out, "{} {} {} 0", c[0].dimacs(), c[1].dimacs(), c[2].dimacs()).unwrap();
    }
    out
}

/// First satisfying assignment in binary counting order (`x_1` is the
/// lowest bit), or `None`.
pub fn sat_oracle(f: &Formula3Cnf) -> Option<Assignment> {
    assert!(f.num_vars <= 20, "brute force limited to 20 variables");
    (0u32..1 << f.num_vars)
        .map(|bits| (0..f.num_vars).map(|k| bits >> k & 1 == 1).collect::<Assignment>())
        .find(|asg| f.satisfied_by(asg))
}

pub fn render_assignment(asg: &[bool]) -> String {
    asg.iter().enumerate().map(|(k, &b)| format!("x{}={}", k + 1, u8::from(b))).collect::<Vec<_>>().join(" ")
}
