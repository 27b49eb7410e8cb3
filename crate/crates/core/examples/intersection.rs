//! Intersection multiplicities from truncated resultants.

use plane_branches::field::{Field, Rationals};
use plane_branches::oracle::{self, intersection_number, IntersectionNumber, OracleConfig};
use plane_branches::series::{BranchPoly, Precision, YPoly};

fn branch(terms: &[(usize, usize, i64)], ydeg: usize) -> BranchPoly<Rationals> {
    let q = Rationals;
    let mut all: Vec<_> = terms.iter().map(|&(y, x, c)| (y, x, q.from_i64(c))).collect();
    all.push((ydeg, 0, q.one()));
    BranchPoly::try_from(YPoly::from_terms(&q, &all, Precision::Exact)).unwrap()
}

pub fn main() {
    let cfg = OracleConfig::default();
    let cusp = branch(&[(0, 3, 1)], 2); // y^2 + x^3
    let line = branch(&[], 1); // y
    let other = branch(&[(0, 3, 1), (0, 5, 1)], 2); // y^2 + x^3 + x^5
    let tacnode = branch(&[(0, 3, 2)], 2); // y^2 + 2x^3

    for (name, g) in [("y", &line), ("y^2+x^3+x^5", &other), ("y^2+2x^3", &tacnode)] {
        let i0 = oracle::i0(&cusp, g, &cfg).unwrap();
        let dx = oracle::dx(&cusp, g, &cfg).unwrap();
        println!("i0(y^2+x^3, {name}) = {i0}, d_x = {dx}");
    }

    // A branch meets itself in infinitely many points; the cap says so.
    match intersection_number(&cusp, &cusp, 100).unwrap().value {
        IntersectionNumber::Finite(n) => println!("unexpected {n}"),
        IntersectionNumber::Exhausted { cap } => println!("i0(f, f) > {cap}"),
    }
}
