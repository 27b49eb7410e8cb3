//! Branches at a prescribed logarithmic distance from a fixed one.
//!
//!     cargo run --example distance -- 13/8

use num_rational::BigRational;
use plane_branches::charseq::CharSequence;
use plane_branches::distance::realize_distance;
use plane_branches::field::{Rationals, SeedStream};
use plane_branches::json::branch_to_json;
use plane_branches::oracle::OracleConfig;
use plane_branches::tower::{build_tower, BranchSpec};

fn main() {
    let wanted: Vec<String> = match std::env::args().nth(1) {
        Some(r) => vec![r],
        None => ["3/2", "7/4", "13/8", "5/2", "9/2"].map(String::from).to_vec(),
    };
    run(&wanted);
}

pub fn run(wanted: &[String]) {
    let cfg = OracleConfig::default();
    let seq: CharSequence = "2,3".parse().unwrap();
    let f = build_tower(&BranchSpec::standard(&Rationals, seq)).unwrap();
    let mut rng = SeedStream::new(0);
    for text in wanted {
        let r: BigRational = text.parse().expect("a rational like 7/4");
        match realize_distance(&f, &r, &mut rng, &cfg) {
            Ok(w) => {
                let aux = w.aux.map(|a| a.to_string()).unwrap_or_default();
                println!("R = {r}: {} k = {} i0 = {} {aux}", w.case.tag(), w.k, w.i0);
                println!("    g = {}", serde_json::to_string(&branch_to_json(w.g.branch())).unwrap());
            }
            Err(e) => println!("R = {r}: {e}"),
        }
    }
}
