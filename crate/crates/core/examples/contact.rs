//! Contact index, intersection formula clauses and the strong triangle
//! inequality on a few branch pairs.

use plane_branches::charseq::CharSequence;
use plane_branches::contact::{analyze_pair, sti_check};
use plane_branches::field::{Field, PrimeField};
use plane_branches::oracle::OracleConfig;
use plane_branches::tower::{build_tower, BranchSpec, Perturbation};

pub fn main() {
    let fp = PrimeField::new(101).unwrap();
    let cfg = OracleConfig::default();
    let seq = |s: &str| -> CharSequence { s.parse().unwrap() };

    let f = build_tower(&BranchSpec::standard(&fp, seq("4,6,13"))).unwrap();
    let cusp = build_tower(&BranchSpec::standard(&fp, seq("2,3"))).unwrap();
    let g = build_tower(&BranchSpec::new(&fp, seq("4,6,15"), vec![fp.one(), fp.from_i64(3)], vec![]).unwrap()).unwrap();
    let spec = BranchSpec::standard(&fp, seq("4,6,13"))
        .with_perturbation(Perturbation::new(vec![5, 1, 1], fp.from_i64(2)))
        .unwrap();
    let h = build_tower(&spec).unwrap();

    for (name, other) in [("cusp", &cusp), ("(4,6,15)", &g), ("perturbed", &h)] {
        let r = analyze_pair(&f, other, &cfg).unwrap();
        println!(
            "(4,6,13) vs {name}: i0 = {}, k = {}, bound {}, {} case, failures {:?}",
            r.i0,
            r.k,
            r.bound_k,
            if r.equality_case { "equality" } else { "strict" },
            r.checks.failures()
        );
    }

    let sti = sti_check(f.branch(), g.branch(), cusp.branch(), &cfg).unwrap();
    println!("d_x = {}, {}, {}; two smallest equal: {}", sti.dx[0], sti.dx[1], sti.dx[2], sti.holds);
}
