mod common;

use proptest::prelude::*;

use common::{joint_outcomes, random_instance, rng};
use stosched::model::{enumerate_realizations, Rational, SchedInstance, SizeDistribution};

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..1000, 1i64..200).prop_map(|(n, d)| Rational::new(n, d))
}

proptest! {
    #[test]
    fn rational_text_roundtrip(x in rational()) {
        let text = x.to_string();
        prop_assert_eq!(text.parse::<Rational>().unwrap(), x.clone());
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), x);
    }

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        prop_assert_eq!(&a - &a, Rational::zero());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
    }

    #[test]
    fn enumeration_is_a_distribution(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 6, 5, 3);
        let all: Vec<_> = enumerate_realizations(&inst, 24).unwrap().collect();
        prop_assert_eq!(all.len(), 1usize << inst.two_point_count());
        let mass: Rational = all.iter().map(|r| r.probability.clone()).sum();
        prop_assert_eq!(mass, Rational::one());
        for (i, r) in all.iter().enumerate() {
            prop_assert_eq!(r.mask, i as u64);
        }
    }

    #[test]
    fn enumeration_matches_direct_product(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 5, 4, 2);
        let mut ours: Vec<_> = enumerate_realizations(&inst, 24)
            .unwrap()
            .map(|r| (r.probability, r.sizes))
            .collect();
        let mut theirs = joint_outcomes(&inst);
        ours.sort();
        theirs.sort();
        prop_assert_eq!(ours, theirs);
    }

    #[test]
    fn expectation_matches_mixture(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 5, 4, 2);
        for (pos, job) in inst.jobs.iter().enumerate() {
            let mean: Rational = joint_outcomes(&inst).into_iter().map(|(p, s)| p * &s[pos]).sum();
            prop_assert_eq!(job.size.expectation(), mean);
        }
    }

    #[test]
    fn instance_json_roundtrip(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 6, 4, 3);
        let back = SchedInstance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn stochastic_order_matches_tails(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 2, 2, 1);
        if let [a, b] = &inst.jobs[..] {
            let points: Vec<Rational> = a.size.support().into_iter().chain(b.size.support()).cloned().collect();
            let by_tails = points.iter().all(|t| a.size.tail(t) <= b.size.tail(t));
            prop_assert_eq!(a.size.stochastically_le(&b.size), by_tails);
        }
    }
}

#[test]
fn enumeration_cap_is_enforced() {
    let jobs = (0..5)
        .map(|i| stosched::model::Job::new(i, 1i64, SizeDistribution::two_point(0i64, 1i64, Rational::new(1, 2))))
        .collect();
    let inst = SchedInstance::new(1, jobs);
    let err = enumerate_realizations(&inst, 4).err().unwrap();
    assert_eq!(err.name(), "EnumerationCapExceeded");
}
