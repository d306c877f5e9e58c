use proptest::prelude::*;
use xormmap::gf2::{BitVec, ParitySystem, PartialAssignment};
use xormmap::instances::{format_instance, gen_random_2sat, parse_instance};
use xormmap::mmap::{bounds_from_partial, majority_threshold, required_t, Outcome};
use xormmap::model::LogWeight;
use xormmap::oracle::{
    build_replicated, export_dimacs_xor, parse_dimacs_xor, solve_replicated, Engine, OracleOptions,
};
use xormmap::seed::rng_from_seed;
use xormmap::variants::q_star;
use xormmap::weighted::{forced_set, free_count};

fn system(dim: usize, rows: &[(u64, bool)]) -> ParitySystem {
    let mask = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
    let rhs = BitVec::from_bools(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let rows = rows.iter().map(|r| BitVec::from_u64(dim, r.0 & mask)).collect();
    ParitySystem::new(dim, rows, rhs).unwrap()
}

fn brute_solutions(ps: &ParitySystem) -> Vec<u64> {
    (0..1u64 << ps.dim())
        .filter(|&v| ps.satisfied(&BitVec::from_u64(ps.dim(), v)).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn elimination_preserves_the_solution_set(
        dim in 1usize..=8,
        rows in prop::collection::vec((any::<u64>(), any::<bool>()), 0..10),
    ) {
        let ps = system(dim, &rows);
        let ef = ps.eliminate();
        let sols = brute_solutions(&ps);
        prop_assert_eq!(ef.is_consistent(), !sols.is_empty());
        if let Some(log2) = ef.solution_count_log2() {
            prop_assert_eq!(sols.len(), 1usize << log2);
        }
        if ef.is_consistent() {
            prop_assert_eq!(brute_solutions(&ef.to_system()), sols.clone());
        }
        if let Some(p) = ef.particular_solution() {
            prop_assert!(sols.contains(&p.to_u64()));
        }
    }

    #[test]
    fn fixing_finds_a_solution_iff_one_exists(
        dim in 1usize..=7,
        rows in prop::collection::vec((any::<u64>(), any::<bool>()), 0..8),
        fix in prop::collection::vec(prop::option::of(any::<bool>()), 7),
    ) {
        let ps = system(dim, &rows);
        let pairs: Vec<(usize, bool)> = fix.iter().take(dim).enumerate()
            .filter_map(|(i, b)| b.map(|b| (i, b))).collect();
        let fixed = PartialAssignment::from_pairs(dim, &pairs);
        let expected = brute_solutions(&ps).into_iter().any(|v| {
            pairs.iter().all(|&(i, b)| (v >> i) & 1 == b as u64)
        });
        let got = ps.solve_under_fixing(&fixed).unwrap();
        prop_assert_eq!(got.is_some(), expected);
        if let Some(v) = got {
            prop_assert!(ps.satisfied(&v).unwrap());
            for &(i, b) in &pairs {
                prop_assert_eq!(v.get(i), b);
            }
        }
    }

    #[test]
    fn forced_set_is_a_sandwiching_suffix(w in 1e-6f64..=1.0, l in 1usize..=20) {
        let (w, max) = (LogWeight::from_value(w), LogWeight::from_value(1.0));
        let f = free_count(w, max, l);
        let forced = forced_set(w, max, l).unwrap();
        prop_assert_eq!(forced, ((f + 1)..=l).collect::<Vec<_>>());
        // M 2^(f - l) is within a factor two of w from above
        let slice = max.ln() + (f as f64 - l as f64) * std::f64::consts::LN_2;
        if f < l {
            prop_assert!(slice >= w.ln() - 1e-9);
        }
        if f > 0 {
            prop_assert!(slice < w.ln() + std::f64::consts::LN_2 + 1e-9);
        }
    }

    #[test]
    fn required_t_is_monotone(m in 0usize..30, n in 1usize..60, delta in 0.001f64..0.5, c in 2u32..8) {
        let base = required_t(m, n, delta, c).unwrap();
        prop_assert!(base >= 1);
        prop_assert!(required_t(m + 1, n, delta, c).unwrap() >= base);
        prop_assert!(required_t(m, n + 1, delta, c).unwrap() >= base);
        prop_assert!(required_t(m, n, delta / 2.0, c).unwrap() >= base);
        prop_assert!(required_t(m, n, delta, c + 1).unwrap() <= base);
    }

    #[test]
    fn majority_is_strict(t in 1usize..1000) {
        let thr = majority_threshold(t) as usize;
        prop_assert!(2 * thr > t);
        prop_assert!(2 * (thr - 1) <= t);
    }

    #[test]
    fn partial_bounds_are_ordered_and_clamped(
        n in 1usize..40,
        c in 2u32..6,
        outcomes in prop::collection::vec((0usize..40, 0u8..3), 0..20),
    ) {
        let decided: Vec<(usize, Outcome)> = outcomes.into_iter()
            .filter(|(k, _)| *k <= n)
            .map(|(k, o)| (k, [Outcome::True, Outcome::False, Outcome::Unknown][o as usize]))
            .collect();
        let (lo, hi) = bounds_from_partial(&decided, c, n);
        prop_assert!(lo <= hi);
        prop_assert!(hi <= n);
    }

    #[test]
    fn q_star_lies_in_range(t in 2usize..60, m in 0usize..30, c in 2u32..6) {
        let q = q_star(t, m, c).unwrap();
        prop_assert!(q >= 1 && q <= t);
    }

    #[test]
    fn instance_text_round_trips(seed in any::<u64>(), m in 0usize..5, extra in 0usize..6, clauses in 0usize..20) {
        let mut rng = rng_from_seed(seed);
        let inst = gen_random_2sat(m + extra + 2, m, clauses, &mut rng).unwrap();
        let back = parse_instance(&format_instance(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn engines_agree_and_exports_round_trip(seed in any::<u64>(), t in 1usize..5, k in 0usize..5) {
        let mut rng = rng_from_seed(seed);
        let inst = gen_random_2sat(8, 3, 8, &mut rng).unwrap();
        let rep = build_replicated(&inst, t, k, &mut rng).unwrap();
        let thr = majority_threshold(t);
        let full = OracleOptions { early_stop: false, ..Default::default() };
        let a = solve_replicated(&rep, thr, &full).unwrap();
        let j = solve_replicated(&rep, thr, &OracleOptions { engine: Engine::JointDpll, ..full }).unwrap();
        prop_assert_eq!(a.objective, j.objective);
        let parsed = parse_dimacs_xor(&export_dimacs_xor(&rep, thr)).unwrap();
        prop_assert_eq!(parsed.threshold, thr);
        prop_assert_eq!(parsed.problem.systems(), rep.systems());
        let again = solve_replicated(&parsed.problem, thr, &full).unwrap();
        prop_assert_eq!(again.objective, a.objective);
    }
}
