//! Key-polynomial towers: build, inspect, perturb.

use plane_branches::charseq::CharSequence;
use plane_branches::field::{Field, Rationals};
use plane_branches::json::tower_to_json;
use plane_branches::oracle::{self, OracleConfig};
use plane_branches::tower::{build_tower, BranchSpec, Perturbation};

pub fn main() {
    let q = Rationals;
    let cfg = OracleConfig::default();
    let seq: CharSequence = "4,6,13".parse().unwrap();
    let tower = build_tower(&BranchSpec::standard(&q, seq.clone())).unwrap();
    for (k, f) in tower.polys().iter().enumerate() {
        let i0 = oracle::i0(tower.branch(), f, &cfg).ok();
        println!("f_{k}: ydeg {}  i0(f, f_{k}) = {i0:?}", f.ydeg());
    }

    // x^4 y f_1 has weight 4·4+6+13 = 35 > 26, so the characteristic survives.
    let p = Perturbation::new(vec![4, 1, 1], q.from_i64(7));
    let spec = BranchSpec::standard(&q, seq).with_perturbation(p).unwrap();
    let perturbed = build_tower(&spec).unwrap();
    let i0 = oracle::i0(tower.branch(), perturbed.branch(), &cfg).unwrap();
    println!("i0 with perturbed branch: {i0}");
    println!("{}", serde_json::to_string_pretty(&tower_to_json(&perturbed)).unwrap());
}
