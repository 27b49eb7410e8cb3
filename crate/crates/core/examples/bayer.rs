//! Attainable intersection numbers and branches realizing them.
//!
//!     cargo run --example bayer -- 4,6,13 2,3

use plane_branches::bayer::{bayer_set, realize_intersection, Mode};
use plane_branches::charseq::CharSequence;
use plane_branches::field::{Rationals, SeedStream};
use plane_branches::oracle::OracleConfig;
use plane_branches::tower::{build_tower, BranchSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let sf = args.next().unwrap_or_else(|| "4,6,13".into());
    let sg = args.next().unwrap_or_else(|| "2,3".into());
    run(&sf, &sg);
}

pub fn run(sf: &str, sg: &str) {
    let sf: CharSequence = sf.parse().unwrap();
    let sg: CharSequence = sg.parse().unwrap();

    let literal = bayer_set(&sf, &sg, Mode::Literal);
    let extended = bayer_set(&sf, &sg, Mode::Extended);
    println!("{extended}");
    println!("literal  {:?}", literal.members(40));
    println!("extended {:?}", extended.members(40));

    let cfg = OracleConfig::default();
    let f = build_tower(&BranchSpec::standard(&Rationals, sf)).unwrap();
    let mut rng = SeedStream::new(1);
    for n in extended.members(40) {
        let w = realize_intersection(&f, &sg, n, &mut rng, &cfg).unwrap();
        println!("N = {n:>2}: {:?}, {} attempt(s)", w.location, w.attempts);
    }
}
