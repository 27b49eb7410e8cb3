//! Combinatorics of a characteristic sequence.
//!
//!     cargo run --example characteristic -- 4,6,13

use plane_branches::charseq::CharSequence;

fn main() {
    run(&std::env::args().nth(1).unwrap_or_else(|| "4,6,13".into()));
}

pub fn run(text: &str) {
    let seq: CharSequence = match text.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{text}: {e}");
            std::process::exit(1);
        }
    };
    println!("sequence     {seq}");
    println!("gcds e_k     {:?}", seq.gcds());
    println!("n_k          {:?}", seq.ns());
    println!("conductor    {}", seq.conductor());
    println!("gaps         {:?}", seq.gaps());
    for k in 1..=seq.h() {
        // n_k v_k as a combination of v_0..v_{k-1}
        println!("bezout k={k}   {} v_{k} = {:?}", seq.n_k(k), seq.bezout(k));
    }
    println!("e_(h-1) v_h  {}", seq.min_universal());
}
