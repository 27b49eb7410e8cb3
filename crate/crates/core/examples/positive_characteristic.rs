//! The same computations over small prime fields, including fields whose
//! characteristic divides the multiplicity.

use plane_branches::campaign::{run_campaign, CampaignConfig, Theorem};
use plane_branches::charseq::{CharSequence, SequenceShape};
use plane_branches::field::PrimeField;
use plane_branches::oracle::{self, OracleConfig};
use plane_branches::tower::{build_tower, BranchSpec};

pub fn main() {
    let cfg = OracleConfig::default();
    for p in [2, 3, 5] {
        let fp = PrimeField::new(p).unwrap();
        for s in ["2,3", "4,6,13", "5,6", "10,15,32"] {
            let seq: CharSequence = s.parse().unwrap();
            let t = build_tower(&BranchSpec::standard(&fp, seq.clone())).unwrap();
            let i0: Vec<u64> = t.polys()[..seq.h()]
                .iter()
                .map(|k| oracle::i0(t.branch(), k, &cfg).unwrap())
                .collect();
            println!("p = {p}, {seq}: i0 with key polynomials {i0:?}");
        }
    }

    let fp = PrimeField::new(5).unwrap();
    let config = CampaignConfig {
        trials: 50,
        seed: 5,
        shape: SequenceShape {
            factors: vec![2, 5],
            ..SequenceShape::default()
        },
        oracle: cfg,
    };
    for theorem in [Theorem::Towers, Theorem::IntersectionFormula, Theorem::Sti, Theorem::Congruence] {
        let r = run_campaign(&fp, theorem, &config);
        println!("{theorem} over fp:5: {}/{} pass", r.passed, r.trials);
    }
}
