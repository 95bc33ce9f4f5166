#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use endtree::ultrametric::FiniteUltrametricSpace;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Points are distinct words of length 3; two points at first disagreement
/// `k` are `r_k` apart, with `r_0 > r_1 > r_2` random rationals. Such a space
/// is ultrametric by construction.
pub fn random_space<R: Rng>(rng: &mut R, max_points: usize) -> FiniteUltrametricSpace {
    let target = rng.gen_range(1..=max_points);
    let mut words: Vec<[u8; 3]> = Vec::new();
    let mut attempts = 0;
    while words.len() < target && attempts < 200 {
        attempts += 1;
        let w = [rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..3)];
        if !words.contains(&w) {
            words.push(w);
        }
    }
    let mut radii = vec![q(rng.gen_range(4..12), rng.gen_range(1..4))];
    for _ in 1..3 {
        let last = radii.last().unwrap().clone();
        radii.push(last * q(rng.gen_range(1..5), 5));
    }
    FiniteUltrametricSpace::from_fn(words.len(), |i, j| {
        let k = (0..3).find(|&k| words[i][k] != words[j][k]).unwrap();
        radii[k].clone()
    })
    .expect("well-formed matrix")
}

pub fn equidistant(n: usize) -> FiniteUltrametricSpace {
    FiniteUltrametricSpace::from_fn(n, |_, _| q(1, 1)).unwrap()
}
