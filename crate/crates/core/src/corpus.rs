//! Seeded random test functions.

use std::f64::consts::PI;

use rand::Rng;

use crate::field::ScalarField;

/// `1 + Σ aⱼ sin(2π(mⱼx + nⱼy) + φⱼ)` with `Σ|aⱼ| ≤ 0.8`; periodic on the
/// unit torus, positive and never constant.
pub fn random_basic_field<R: Rng + ?Sized>(rng: &mut R) -> ScalarField {
    let terms = rng.gen_range(1..=3);
    let budget = 0.8 / terms as f64;
    let mut src = String::from("1");
    for _ in 0..terms {
        let (m, n) = loop {
            let m: i32 = rng.gen_range(-2..=2);
            let n: i32 = rng.gen_range(-2..=2);
            if (m, n) != (0, 0) {
                break (m, n);
            }
        };
        let a = budget * rng.gen_range(0.1..1.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        src.push_str(&format!(
            " + {a:?}*sin(2*{PI:?}*({m}*x + ({n})*y) + {phase:?})"
        ));
    }
    ScalarField::parse(&src).expect("generated expression parses")
}

/// `a + c(1 − r²)/(1 + r²)`: the height function of the round sphere.
pub fn sphere_rotational(a: f64, c: f64) -> ScalarField {
    ScalarField::parse(&format!("{a:?} + ({c:?})*(1-x^2-y^2)/(1+x^2+y^2)"))
        .expect("rotational family parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corpus_is_positive_basic_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f = random_basic_field(&mut a);
            assert_eq!(f.source(), random_basic_field(&mut b).source());
            assert!(f.basic());
            for p in [[0.0, 0.0, 0.0], [0.3, 0.9, 0.0], [0.71, 0.12, 0.0]] {
                assert!(f.eval(p).unwrap() > 0.19);
            }
        }
    }

    #[test]
    fn rotational_family_at_the_pole() {
        assert_eq!(sphere_rotational(2.0, 1.0).eval([0.0; 3]).unwrap(), 3.0);
    }
}
