use super::*;
use crate::error::OracleError;
use crate::group::{GroupVector, Sign};

fn gv(coords: &[u64], t: u32) -> GroupVector {
    GroupVector::new(coords.to_vec(), t).unwrap()
}

fn oracle_with_secret(secret: GroupVector, run_seed: u64) -> Oracle {
    let l = secret.dim() as u32 * secret.modulus_log();
    Oracle::new(HiddenShiftInstance::with_secret(l, 5, secret).unwrap(), run_seed)
}

/// Samples until a token with the wanted label appears; the rest are measured away.
fn token_with_label(oracle: &mut Oracle, label: &GroupVector) -> PhaseToken {
    loop {
        let tok = oracle.sample_phase_state().unwrap();
        if tok.label() == label {
            return tok;
        }
        oracle.measure_pm(tok).unwrap();
    }
}

#[test]
fn fresh_report_is_zero_and_counts_queries() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 1).unwrap(), 0);
    assert_eq!(oracle.report(), SieveReport::default());
    for _ in 0..7 {
        oracle.sample_phase_state().unwrap();
    }
    let r = oracle.report();
    assert_eq!(r.oracle_queries, 7);
    assert_eq!(r.tokens_created, 7);
    assert_eq!(r.live_tokens, 7);
    assert_eq!(r.peak_live_tokens, 7);
    assert_eq!(r.qft_units, 7 * 16);
}

#[test]
fn sampled_labels_are_uniform() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(1, 2, 2, 3).unwrap(), 9);
    let mut counts = [0u32; 4];
    let draws = 10_000;
    for _ in 0..draws {
        let tok = oracle.sample_phase_state().unwrap();
        counts[tok.label().coords()[0] as usize] += 1;
        oracle.measure_pm(tok).unwrap();
    }
    for c in counts {
        assert!((c as f64 / draws as f64 - 0.25).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn phases_match_inner_products() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(3, 3, 9, 17).unwrap(), 2);
    let s = Inspector::new(&oracle).secret().clone();
    for _ in 0..200 {
        let tok = oracle.sample_phase_state().unwrap();
        let ins = Inspector::new(&oracle);
        assert_eq!(ins.theta(&tok), Some(tok.label().inner_product(&s).unwrap()));
        assert!(ins.phase_consistent(&tok));
        if tok.label().is_zero() {
            assert_eq!(ins.theta(&tok), Some(0));
        }
    }

    let mut zero = oracle_with_secret(GroupVector::zero(2, 3).unwrap(), 4);
    for _ in 0..100 {
        let tok = zero.sample_phase_state().unwrap();
        assert_eq!(Inspector::new(&zero).theta(&tok), Some(0));
    }
}

#[test]
fn combine_adds_or_subtracts_phases() {
    // s = (1,1): <(1,0),s> = 1, <(1,2),s> = 3
    let mut seen = [false; 2];
    for seed in 0..40 {
        let mut oracle = oracle_with_secret(gv(&[1, 1], 2), seed);
        let a = token_with_label(&mut oracle, &gv(&[1, 0], 2));
        let b = token_with_label(&mut oracle, &gv(&[1, 2], 2));
        assert_eq!(Inspector::new(&oracle).theta(&a), Some(1));
        assert_eq!(Inspector::new(&oracle).theta(&b), Some(3));
        let (sign, c) = oracle.combine(a, b).unwrap();
        let theta = Inspector::new(&oracle).theta(&c);
        match sign {
            Sign::Plus => {
                assert_eq!(c.label(), &gv(&[2, 2], 2));
                assert_eq!(theta, Some(0));
                seen[0] = true;
            }
            Sign::Minus => {
                assert_eq!(c.label(), &gv(&[0, 2], 2));
                assert_eq!(theta, Some(2));
                seen[1] = true;
            }
        }
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn combining_with_zero_label_is_identity() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 3, 6, 8).unwrap(), 1);
    let zero = token_with_label(&mut oracle, &GroupVector::zero(2, 3).unwrap());
    let u = oracle.sample_phase_state().unwrap();
    let (label, theta) = (u.label().clone(), Inspector::new(&oracle).theta(&u));
    let (_, c) = oracle.combine(u, zero).unwrap();
    assert_eq!(c.label(), &label);
    assert_eq!(Inspector::new(&oracle).theta(&c), theta);
}

#[test]
fn combination_signs_are_fair() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 21).unwrap(), 5);
    let trials = 10_000;
    let mut plus = 0;
    for _ in 0..trials {
        let a = oracle.sample_phase_state().unwrap();
        let b = oracle.sample_phase_state().unwrap();
        let (sign, c) = oracle.combine(a, b).unwrap();
        plus += (sign == Sign::Plus) as u32;
        oracle.measure_pm(c).unwrap();
    }
    let freq = plus as f64 / trials as f64;
    assert!((freq - 0.5).abs() < 0.03, "{freq}");
    assert_eq!(oracle.report().per_level_consumed, vec![3 * trials as u64]);
}

#[test]
fn born_rule() {
    // t = 2, s = (1): theta = u
    let mut outcomes = [[0u32; 2]; 4];
    let mut oracle = oracle_with_secret(gv(&[1], 2), 77);
    for _ in 0..40_000 {
        let tok = oracle.sample_phase_state().unwrap();
        let theta = Inspector::new(&oracle).theta(&tok).unwrap() as usize;
        let bit = oracle.measure_pm(tok).unwrap();
        outcomes[theta][bit as usize] += 1;
    }
    assert_eq!(outcomes[0][1], 0, "theta = 0 is |+>");
    assert_eq!(outcomes[2][0], 0, "theta = 2 is |->");
    for theta in [1, 3] {
        let [zeros, ones] = outcomes[theta];
        let freq = ones as f64 / (zeros + ones) as f64;
        assert!((freq - 0.5).abs() < 0.03, "theta {theta}: {freq}");
    }
}

#[test]
fn tokens_are_consumed_once() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 2).unwrap(), 0);
    let a = oracle.sample_phase_state().unwrap();
    let a_dup = Inspector::new(&oracle).duplicate_handle(&a);
    let id = a.id();
    oracle.measure_pm(a).unwrap();
    assert_eq!(oracle.measure_pm(a_dup).unwrap_err(), OracleError::TokenConsumed(id));

    let b = oracle.sample_phase_state().unwrap();
    let b_dup = Inspector::new(&oracle).duplicate_handle(&b);
    let fresh = oracle.sample_phase_state().unwrap();
    let (_, c) = oracle.combine(b, fresh).unwrap();
    let other = oracle.sample_phase_state().unwrap();
    assert!(matches!(oracle.combine(b_dup, other), Err(OracleError::TokenConsumed(_))));

    let c_dup = Inspector::new(&oracle).duplicate_handle(&c);
    assert!(matches!(oracle.combine(c, c_dup), Err(OracleError::TokenConsumed(_))));

    let mut foreign = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 2).unwrap(), 0);
    let d = oracle.sample_phase_state().unwrap();
    assert!(matches!(foreign.measure_pm(d), Err(OracleError::UnknownToken(_))));

    let r = oracle.report();
    assert_eq!(r.tokens_created - r.tokens_consumed, r.live_tokens);
}

#[test]
fn mismatched_phase_moduli_are_rejected() {
    let mut oracle = Oracle::new(HiddenShiftInstance::new(1, 2, 2, 2).unwrap(), 0);
    let root = oracle.root();
    let a = oracle.sample_phase_state_via(&root).unwrap();
    let s2 = GroupVector::zero(1, 1).unwrap();
    let down = root.descend(&s2).unwrap();
    let b = oracle.sample_phase_state_via(&down).unwrap();
    assert_eq!(
        oracle.combine(a, b).unwrap_err(),
        OracleError::PhaseModulusMismatch { left: 2, right: 1 }
    );
}

#[test]
fn wrapped_oracle_hides_the_descended_shift() {
    // s = (3,2) over Z_4: s mod 2 = (1,0), descended shift (1,1) over Z_2
    let mut oracle = oracle_with_secret(gv(&[3, 2], 2), 0);
    let root = oracle.root();
    let down = root.descend(&gv(&[1, 0], 1)).unwrap();
    assert_eq!(down.group_bits(), 1);
    assert_eq!(down.offset(), &gv(&[1, 0], 2));
    let shift = gv(&[1, 1], 1);
    for i in 0..4 {
        let x = GroupVector::from_index(i, 2, 1).unwrap();
        let lhs = oracle.f_eval_via(&down, &x, false).unwrap();
        let rhs = oracle.f_eval_via(&down, &x.add(&shift).unwrap(), true).unwrap();
        assert_eq!(lhs, rhs);
    }
    for _ in 0..50 {
        let tok = oracle.sample_phase_state_via(&down).unwrap();
        let ins = Inspector::new(&oracle);
        assert_eq!(ins.theta(&tok), Some(tok.label().inner_product(&shift).unwrap()));
        assert!(ins.phase_consistent(&tok));
    }
    let full = down.descend(&gv(&[1, 1], 1)).unwrap();
    assert_eq!(full.offset(), &gv(&[3, 2], 2));
    assert!(full.descend(&gv(&[0, 0], 1)).is_err());
    assert!(oracle.sample_phase_state_via(&full).is_err());
}

#[test]
fn wrong_descent_gives_mixed_states() {
    let mut oracle = oracle_with_secret(gv(&[1], 3), 3);
    let wrong = oracle.root().descend(&gv(&[0], 1)).unwrap();
    let trials = 4000;
    let mut ones = 0;
    for _ in 0..trials {
        let tok = oracle.sample_phase_state_via(&wrong).unwrap();
        assert_eq!(Inspector::new(&oracle).theta(&tok), None);
        ones += oracle.measure_pm(tok).unwrap() as u32;
    }
    assert!((ones as f64 / trials as f64 - 0.5).abs() < 0.05);
}

#[test]
fn coset_states() {
    let s = gv(&[3, 2], 2);
    let mut oracle = oracle_with_secret(s.clone(), 1);
    let c = oracle.sample_coset_state().unwrap();
    let dup = Inspector::new(&oracle).duplicate_coset_handle(&c);
    let tok = oracle.shift_and_transform(c, &s).unwrap();
    assert_eq!(Inspector::new(&oracle).theta(&tok), Some(0));
    assert!(matches!(oracle.shift_and_transform(dup, &s), Err(OracleError::TokenConsumed(_))));

    let s1 = gv(&[1, 0], 2);
    for _ in 0..100 {
        let c = oracle.sample_coset_state().unwrap();
        let tok = oracle.shift_and_transform(c, &s1).unwrap();
        let ins = Inspector::new(&oracle);
        let theta = ins.theta(&tok).unwrap();
        assert_eq!(theta, tok.label().inner_product(&gv(&[2, 2], 2)).unwrap());
        assert_eq!(theta % 2, 0);
        assert!(ins.phase_consistent(&tok));

        let c = oracle.sample_coset_state().unwrap();
        let tok = oracle.shift_and_transform(c, &GroupVector::zero(2, 2).unwrap()).unwrap();
        assert_eq!(
            Inspector::new(&oracle).theta(&tok),
            Some(tok.label().inner_product(&s).unwrap())
        );
    }
}

#[test]
fn transcripts_are_deterministic() {
    let run = |seed| {
        let mut oracle = Oracle::new(HiddenShiftInstance::new(3, 2, 6, 4).unwrap(), seed);
        let mut transcript = Vec::new();
        for _ in 0..20 {
            let a = oracle.sample_phase_state().unwrap();
            let b = oracle.sample_phase_state().unwrap();
            transcript.push(format!("{}{}", a.label(), b.label()));
            let (sign, c) = oracle.combine(a, b).unwrap();
            transcript.push(format!("{sign:?}{}", oracle.measure_pm(c).unwrap()));
        }
        transcript
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}
