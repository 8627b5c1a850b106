//! Every scheme in a trial must face the same random environment: the same
//! topology, destinations, channel states and fading gains. Whenever two
//! schemes pick the same channel for the same layer they must therefore see
//! identical airtimes and idle periods.

use std::collections::BTreeMap;

use crmcast_core::experiment::run_scenario;
use crmcast_core::{ScenarioParams, Scheme, TreeKind};

#[test]
fn schemes_share_channel_draws_within_a_trial() {
    let params = ScenarioParams::default();
    let model = params.channel_model().unwrap();
    let mut shared_hops = 0;
    for seed in 0..40 {
        let run = run_scenario(&params, &model, &Scheme::ALL, &TreeKind::ALL, seed).unwrap();
        for tree in TreeKind::ALL {
            // (transmitter, channel) -> (airtimes, idle time) from the first scheme seen.
            let mut seen: BTreeMap<_, (Vec<f64>, Option<f64>)> = BTreeMap::new();
            for s in run.sessions.iter().filter(|s| s.tree == tree) {
                for hop in &s.result.hops {
                    let (Some(ch), true) = (hop.chosen_channel, hop.transmitted) else {
                        continue;
                    };
                    let key = (hop.transmitter, ch);
                    let value = (hop.tx_time.clone(), hop.available_time);
                    match seen.get(&key) {
                        Some(prev) => {
                            assert_eq!(prev, &value, "seed {seed} {tree} {key:?}");
                            shared_hops += 1;
                        }
                        None => {
                            seen.insert(key, value);
                        }
                    }
                }
            }
        }
    }
    assert!(shared_hops > 100, "only {shared_hops} shared hops exercised");
}

#[test]
fn scheme_subset_does_not_change_other_results() {
    let params = ScenarioParams::default();
    let model = params.channel_model().unwrap();
    for seed in [3, 17, 99] {
        let all = run_scenario(&params, &model, &Scheme::ALL, &TreeKind::ALL, seed).unwrap();
        let only_rs = run_scenario(&params, &model, &[Scheme::Rs], &[TreeKind::Mst], seed).unwrap();
        assert_eq!(all.destinations, only_rs.destinations);
        let full = all
            .sessions
            .iter()
            .find(|s| s.tree == TreeKind::Mst && s.scheme == Scheme::Rs)
            .unwrap();
        assert_eq!(full.result, only_rs.sessions[0].result, "seed {seed}");
    }
}
