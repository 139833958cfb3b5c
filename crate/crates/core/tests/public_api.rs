//! The solver side works from the public surface alone: labels, signs and
//! measurement bits. The secret only appears when checking the answer.

use hidden_shift::instance_file::InstanceFile;
use hidden_shift::seed;
use hidden_shift::sieve::{run_sieve, OracleSource};
use hidden_shift::solver::{self, collect_equations, solve_mod2};
use hidden_shift::{GroupVector, HiddenShiftInstance, Oracle, Outcome};

#[test]
fn solve_through_a_file() {
    let inst = HiddenShiftInstance::new(3, 3, 40, 77).unwrap();
    let text = InstanceFile::from_instance(&inst, false).to_text();
    let loaded = InstanceFile::parse(&text).unwrap().instantiate().unwrap();
    let mut oracle = Oracle::new(loaded, 1);
    let sol = solver::solve(&mut oracle, 1e-3, &mut seed::rng(2)).unwrap();
    assert_eq!(&sol.shift, inst.secret());
    assert!(sol.verified);
    assert_eq!(sol.report.outcome, Some(Outcome::Success));
    assert_eq!(sol.report.live_tokens, 0);
    assert!(sol.report.peak_live_tokens <= 3 * 3 + 3);
}

#[test]
fn first_round_by_hand() {
    // Sieve, measure, solve mod 2: the low bits of s.
    let inst = HiddenShiftInstance::new(4, 2, 8, 5).unwrap();
    let low: Vec<u64> = inst.secret().coords().iter().map(|c| c & 1).collect();
    let mut oracle = Oracle::new(inst, 6);
    let mut rng = seed::rng(7);
    let found = (0..20)
        .find_map(|_| {
            let root = oracle.root();
            let run = run_sieve(&mut oracle, OracleSource::new(root), 4, 1, 6, &mut rng).unwrap();
            for token in &run.finals {
                assert!(token.label().coords().iter().all(|&c| c < 2));
            }
            let eqs = collect_equations(&mut oracle, run.finals).unwrap();
            solve_mod2(&eqs, 4).ok()
        })
        .expect("a full-rank round within 20 tries");
    assert_eq!(found.coords(), low.as_slice());
    assert_eq!(oracle.report().live_tokens, 0);
}

#[test]
fn descent_matches_the_secret_bits() {
    let inst = HiddenShiftInstance::new(2, 3, 6, 11).unwrap();
    let s = inst.secret().clone();
    let mut oracle = Oracle::new(inst, 0);
    let mut view = oracle.root();
    for i in 0..3 {
        let bit = GroupVector::new(s.coords().iter().map(|c| (c >> i) & 1).collect(), 1).unwrap();
        view = solver::descend(&view, &bit).unwrap();
    }
    assert_eq!(view.offset(), &s);
    assert!(solver::verify(&mut oracle, &s, &mut seed::rng(0)).unwrap());
}
