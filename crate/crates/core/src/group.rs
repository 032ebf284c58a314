use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication table is not square of size {0}")]
    BadShape(usize),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
}

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub name: String,
    table: Vec<Vec<usize>>,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GroupError::BadShape(n));
        }
        if (0..n).any(|g| table[0][g] != g || table[g][0] != g) {
            return Err(GroupError::NoIdentity);
        }
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n).find(|&h| table[g][h] == 0 && table[h][g] == 0).ok_or(GroupError::NoInverse(g))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), table, inverses })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Z/n with element k standing for k.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(format!("Z/{n}"), table).expect("cyclic group table")
    }

    /// Pairs `(a, b)` numbered `a * |H| + b`.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (m, n) = (g.order(), h.order());
        let table = (0..m * n)
            .map(|x| (0..m * n).map(|y| g.mul(x / n, y / n) * n + h.mul(x % n, y % n)).collect())
            .collect();
        Self::from_table(format!("{}x{}", g.name, h.name), table).expect("product of groups")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Checks that `perms[g]` are permutations forming a left action.
    pub fn is_action(&self, perms: &[Vec<usize>]) -> bool {
        if perms.len() != self.order() {
            return false;
        }
        let m = perms.first().map_or(0, |p| p.len());
        for p in perms {
            if p.len() != m {
                return false;
            }
            let mut seen = vec![false; m];
            for &x in p {
                if x >= m || std::mem::replace(&mut seen[x], true) {
                    return false;
                }
            }
        }
        if perms[0].iter().enumerate().any(|(i, &x)| i != x) {
            return false;
        }
        self.elements().all(|g| {
            self.elements().all(|h| (0..m).all(|x| perms[self.mul(g, h)][x] == perms[g][perms[h][x]]))
        })
    }
}
