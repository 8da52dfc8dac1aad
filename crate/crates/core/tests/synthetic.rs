mod common;

use std::collections::HashMap;

use snlink::eval::{evaluate_pairs, generate_synthetic, matched_pairs, RecallBase, SynthSpec};
use snlink::name_model::NameStats;
use snlink::pipeline::{match_all, TargetSide};
use snlink::MatchConfig;

#[test]
fn stats_equal_generator_tallies() {
    let spec = SynthSpec {
        n_target: 1000,
        n_source: 100,
        first_pool: 60,
        last_pool: 200,
        ..SynthSpec::default()
    };
    let c = generate_synthetic(&spec, 3).unwrap();
    let target = c.target_network().unwrap();
    let stats = NameStats::build(target.profiles()).unwrap();
    assert_eq!(stats.total(), 1000);
    assert_eq!(stats.first_names(), &c.report.target_first_counts);
    assert_eq!(stats.last_names(), &c.report.target_last_counts);
    // Zipfian pools: the most common name is far above the median
    let mut counts: Vec<u64> = stats.first_names().values().copied().collect();
    counts.sort_unstable();
    assert!(counts[counts.len() - 1] >= 4 * counts[counts.len() / 2]);
}

#[test]
fn dropout_keeps_expected_share_of_friends() {
    let spec = SynthSpec {
        n_target: 20_000,
        n_source: 10_000,
        friend_dropout: 0.3,
        ..SynthSpec::default()
    };
    let c = generate_synthetic(&spec, 9).unwrap();
    let source = c.source_network().unwrap();
    let target = c.target_network().unwrap();
    let to_source: HashMap<&str, &str> = c.truth.iter().map(|(s, t)| (t.as_str(), s.as_str())).collect();
    let to_target: HashMap<&str, &str> = c.truth.iter().map(|(s, t)| (s.as_str(), t.as_str())).collect();

    // friends the source profile could have had: target friends that were
    // sampled into the source network
    let mut before = 0usize;
    let mut after = 0usize;
    for (s, t) in &c.truth {
        let tp = target.get(t).unwrap();
        before += tp.friends.iter().filter(|f| to_source.contains_key(f.as_str())).count();
        let sp = source.get(s).unwrap();
        after += sp.friends.len();
        for f in &sp.friends {
            let tf = to_target[f.as_str()];
            assert!(tp.friends.iter().any(|g| g == tf));
        }
    }
    let ratio = after as f64 / before as f64;
    assert!((ratio - 0.7).abs() <= 0.7 * 0.02, "kept share {ratio}");

    let total = c.report.source_friend_refs as f64 / c.report.source_friend_refs_before_dropout as f64;
    assert!((total - 0.7).abs() <= 0.7 * 0.02, "reported share {total}");
}

fn recall_at_defaults(dropout: f64, seed: u64) -> f64 {
    let spec = SynthSpec {
        n_target: 5000,
        n_source: 1000,
        first_pool: 200,
        last_pool: 2000,
        friend_dropout: dropout,
        typo_rate: 0.1,
        nickname_rate: 0.1,
        ..SynthSpec::default()
    };
    let c = generate_synthetic(&spec, seed).unwrap();
    let source = c.source_network().unwrap();
    let cfg = MatchConfig::default();
    let side = TargetSide::build(c.target_network().unwrap(), cfg.candidate_distance).unwrap();
    let decisions = match_all(&source, &side, &c.synonym_dictionary(), &cfg, 4).unwrap();
    let p = evaluate_pairs(
        &matched_pairs(&decisions),
        &c.truth,
        &RecallBase::SourcePresent(&source),
        cfg.gamma,
        cfg.delta,
    );
    p.recall
}

#[test]
fn recall_degrades_with_dropout() {
    let sweep = [0.0, 0.15, 0.3, 0.45, 0.6];
    let means: Vec<f64> = sweep
        .iter()
        .map(|&d| (1..=5).map(|seed| recall_at_defaults(d, seed)).sum::<f64>() / 5.0)
        .collect();
    let inversions: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).filter(|&up| up > 0.0).collect();
    assert!(
        inversions.len() <= 1 && inversions.iter().all(|&up| up <= 0.01),
        "recall by dropout {means:?}"
    );
    assert!(means[0] > means[4] + 0.1, "{means:?}");
}

#[test]
fn noise_free_small_corpus_is_solved_exactly() {
    let spec = SynthSpec {
        n_target: 3000,
        n_source: 500,
        in_community_rate: 1.0,
        unique_names: true,
        ..SynthSpec::default()
    };
    let c = generate_synthetic(&spec, 21).unwrap();
    let source = c.source_network().unwrap();
    let cfg = MatchConfig::default();
    let side = TargetSide::build(c.target_network().unwrap(), cfg.candidate_distance).unwrap();
    let decisions = match_all(&source, &side, &c.synonym_dictionary(), &cfg, 2).unwrap();
    let p = evaluate_pairs(
        &matched_pairs(&decisions),
        &c.truth,
        &RecallBase::AllPairs,
        cfg.gamma,
        cfg.delta,
    );
    assert_eq!((p.precision, p.recall), (1.0, 1.0));
}
