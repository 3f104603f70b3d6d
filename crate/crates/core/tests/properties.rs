use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ibran::fidelity::{evaluate_images, iss, FidelityParams, FidelityWeights, SurrogateEmbedding};
use ibran::media::flow::{packetize, reconstruct_from_mask};
use ibran::media::png::{encode_png, parse_png, EncodeInput};
use ibran::media::RgbImage;
use ibran::radio::harq::{split_budget, HarqProcess};
use ibran::radio::link::bits_per_alloc;
use ibran::radio::mobility::{step_mobility, MobilityParams, UePosition};
use ibran::sched::alloc::build_allocation;
use ibran::sched::knapsack::{admit_candidates, brute_force_optimum, greedy_select, SchedulingItem};
use ibran::Direction;

fn items(max_n: usize) -> impl Strategy<Value = Vec<SchedulingItem>> {
    prop::collection::vec((0.0f64..10.0, 1u32..20, any::<bool>()), 1..=max_n).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (utility, demand, relevant))| SchedulingItem { rnti: i as u16, utility, demand, relevant })
            .collect()
    })
}

fn selected_rntis(sel: &[SchedulingItem]) -> Vec<u16> {
    let mut v: Vec<_> = sel.iter().map(|i| i.rnti).collect();
    v.sort_unstable();
    v
}

proptest! {
    #[test]
    fn greedy_respects_budget(items in items(12), b_max in 0u32..60) {
        let sel = greedy_select(&items, b_max);
        prop_assert!(sel.total_demand <= b_max);
        prop_assert_eq!(sel.total_demand, sel.items.iter().map(|i| i.demand).sum::<u32>());
    }

    #[test]
    fn greedy_within_max_utility_of_optimum(items in items(12), b_max in 0u32..60) {
        let opt = brute_force_optimum(&items, b_max);
        let best_single = items.iter().filter(|i| i.demand <= b_max).map(|i| i.utility).fold(0.0, f64::max);
        let got = greedy_select(&items, b_max).total_utility;
        prop_assert!(got <= opt + 1e-9);
        prop_assert!(got >= opt - best_single - 1e-9);
    }

    #[test]
    fn greedy_optimal_with_equal_demands(v in prop::collection::vec(0.0f64..10.0, 1..=12), b in 1u32..10, b_max in 0u32..60) {
        let items: Vec<_> = v.iter().enumerate()
            .map(|(i, &utility)| SchedulingItem { rnti: i as u16, utility, demand: b, relevant: true })
            .collect();
        let got = greedy_select(&items, b_max).total_utility;
        prop_assert!((got - brute_force_optimum(&items, b_max)).abs() < 1e-9);
    }

    #[test]
    fn scaling_utilities_keeps_selection(items in items(12), b_max in 0u32..60, k in 0.01f64..100.0) {
        let scaled: Vec<_> = items.iter().map(|i| SchedulingItem { utility: i.utility * k, ..*i }).collect();
        prop_assert_eq!(
            selected_rntis(&greedy_select(&items, b_max).items),
            selected_rntis(&greedy_select(&scaled, b_max).items)
        );
    }

    #[test]
    fn relevant_items_dominate(items in items(12), b_max in 0u32..60) {
        let pool = admit_candidates(&items, true, b_max);
        let sel = greedy_select(&pool, b_max);
        let left = b_max - sel.total_demand;
        let chosen = selected_rntis(&sel.items);
        if sel.items.iter().any(|i| !i.relevant) {
            // once an irrelevant item is in, no relevant item that would still fit may be left out
            for i in items.iter().filter(|i| i.relevant && !chosen.contains(&i.rnti)) {
                prop_assert!(i.demand > left, "relevant rnti {} fits in {left}", i.rnti);
            }
        }
        prop_assert!(items.iter().filter(|i| i.relevant).all(|i| pool.iter().any(|p| p.rnti == i.rnti)));
    }

    #[test]
    fn allocations_are_disjoint_and_uplink_contiguous(
        items in items(10),
        occupied in prop::collection::vec(prop::bool::weighted(0.2), 25..=100),
        dl in any::<bool>(),
    ) {
        let dir = if dl { Direction::Dl } else { Direction::Ul };
        let budget = occupied.iter().filter(|o| !**o).count() as u32;
        let sel = greedy_select(&items, budget);
        let Ok(alloc) = build_allocation(&sel.items, dir, &occupied, budget, |_| 7) else {
            // uplink fragmentation can leave no contiguous span; that must be the only failure
            prop_assert_eq!(dir, Direction::Ul);
            return Ok(());
        };
        let mut seen = occupied.clone();
        for g in &alloc.grants {
            for &u in &g.units {
                prop_assert!(!seen[u as usize], "unit {u} reused");
                seen[u as usize] = true;
            }
            if dir == Direction::Ul {
                prop_assert!(g.units.windows(2).all(|w| w[1] == w[0] + 1));
            }
        }
        prop_assert!(alloc.used() <= budget);
    }

    #[test]
    fn tbs_is_monotone(cqi in 1u8..15, n in 1u32..100) {
        let b = bits_per_alloc(cqi, n).unwrap();
        prop_assert!(bits_per_alloc(cqi + 1, n).unwrap() >= b);
        prop_assert!(bits_per_alloc(cqi, n + 1).unwrap() >= b);
    }

    #[test]
    fn reserved_plus_budget_is_capacity(cap in 1u32..120, res in prop::collection::vec(1u32..30, 0..6)) {
        let pending: Vec<_> = res.iter().map(|&u| HarqProcess {
            ue: 0, direction: Direction::Ul, tb_bits: 100, cqi: 5, attempts: 1, units_reserved: u, segments: vec![],
        }).collect();
        let (reserved, b_max) = split_budget(cap, &pending);
        prop_assert_eq!(reserved + b_max, cap);
    }

    #[test]
    fn packets_partition_the_file(len in 1usize..20_000, pkt in 1usize..3000) {
        let pk = packetize(len, &[], pkt);
        prop_assert_eq!(pk.first().unwrap().start, 0);
        prop_assert_eq!(pk.last().unwrap().end, len);
        for (i, w) in pk.windows(2).enumerate() {
            prop_assert_eq!(w[0].end, w[1].start);
            prop_assert_eq!(w[0].len() as usize, pkt);
            prop_assert_eq!(w[0].seq as usize, i);
        }
    }

    #[test]
    fn walk_stays_in_area(seed in any::<u64>(), steps in 1usize..3000) {
        let p = MobilityParams { speed_mps: 3.0 / 3.6, turn_distance_m: 10.0, area_m: 50.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pos = UePosition::random(p.area_m, &mut rng);
        for _ in 0..steps {
            pos = step_mobility(pos, 0.1, &p, &mut rng);
            prop_assert!((0.0..=p.area_m).contains(&pos.x) && (0.0..=p.area_m).contains(&pos.y));
        }
    }

    #[test]
    fn iss_gating_is_exact(score in 0.0f64..=1.0, relevant in any::<bool>()) {
        let got = iss(score, relevant, 0.2);
        let want = if relevant && score >= 0.2 { score } else { 0.0 };
        prop_assert_eq!(got.to_bits(), want.to_bits());
    }
}

fn noisy_png(w: u32, h: u32, seed: u64, chunk: usize) -> Vec<u8> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px: Vec<u8> = (0..w * h * 3).map(|i| ((i / 3 % w + i / 3 / w) as u8).wrapping_add(rng.random_range(0..24))).collect();
    encode_png(w, h, EncodeInput::Rgb(&px), chunk)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn idat_criticality_never_increases(seed in any::<u64>(), chunk in 200usize..4000) {
        let chunks = parse_png(&noisy_png(64, 48, seed, chunk)).unwrap();
        let idat: Vec<f64> = chunks.iter().filter(|c| &c.kind == b"IDAT").map(|c| c.criticality).collect();
        prop_assert!(idat.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(chunks.iter().all(|c| c.criticality > 0.0 && c.criticality <= 1.0));
        prop_assert_eq!(&chunks[0].kind, b"IHDR");
        prop_assert_eq!(chunks[0].offset, 8);
    }

    #[test]
    fn reconstruction_is_idempotent(seed in any::<u64>(), mask_bits in any::<u64>()) {
        let bytes = noisy_png(48, 40, seed, 1000);
        let n = bytes.len().div_ceil(500);
        let mask: Vec<bool> = (0..n).map(|i| i == 0 || mask_bits >> (i % 64) & 1 == 1).collect();
        prop_assert_eq!(reconstruct_from_mask(&bytes, &mask, 500), reconstruct_from_mask(&bytes, &mask, 500));
    }

    #[test]
    fn fidelity_terms_stay_in_unit_range(seed in any::<u64>(), other in any::<u64>(), relevant in any::<bool>()) {
        use rand::Rng;
        let img = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (w, h) = (rng.random_range(20..90), rng.random_range(20..90));
            RgbImage { width: w, height: h, data: (0..w * h * 3).map(|_| rng.random()).collect() }
        };
        let (a, b) = (img(seed), img(other));
        let r = evaluate_images(&a, Some(&b), relevant, &FidelityParams::default(), &mut SurrogateEmbedding).unwrap();
        for v in [r.f0, r.f1, r.f2, r.coverage, r.score, r.iss] {
            prop_assert!((0.0..=1.0).contains(&v), "{r:?}");
        }
        let w = FidelityWeights::default();
        prop_assert!((r.score - w.score(r.f0, r.f1, r.f2)).abs() < 1e-12);
        let s = evaluate_images(&a, Some(&a), relevant, &FidelityParams::default(), &mut SurrogateEmbedding).unwrap();
        prop_assert_eq!((s.f0, s.f1, s.f2, s.score), (1.0, 1.0, 1.0, 1.0));
    }
}

#[test]
fn walking_speed_over_a_million_steps() {
    let p = MobilityParams { speed_mps: 3.0 / 3.6, turn_distance_m: 10.0, area_m: 500.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pos = UePosition::random(p.area_m, &mut rng);
    let (steps, dt) = (1_000_000, 1e-3);
    let mut travelled = 0.0;
    for _ in 0..steps {
        let next = step_mobility(pos, dt, &p, &mut rng);
        assert!((0.0..=p.area_m).contains(&next.x) && (0.0..=p.area_m).contains(&next.y));
        let d = ((next.x - pos.x).powi(2) + (next.y - pos.y).powi(2)).sqrt();
        travelled += d;
        pos = next;
    }
    let speed = travelled / (steps as f64 * dt);
    assert!((speed - 0.8333).abs() / 0.8333 < 1e-3, "mean speed {speed}");
}

#[test]
fn fidelity_degrades_with_trailing_loss() {
    use ibran::media::dataset::{generate_synthetic, SynthSpec};
    use ibran::media::flow::Reconstruction;
    use ibran::media::Dataset;

    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(dir.path(), &SynthSpec { count: 8, seed: 9, ..SynthSpec::default() }).unwrap();
    let ds = Dataset::load(dir.path()).unwrap();
    let params = FidelityParams::default();
    let mut means = Vec::new();
    for drop in [0.0, 0.1, 0.3, 0.5] {
        let mut total = 0.0;
        for src in &ds.images {
            let n = src.bytes.len().div_ceil(1400);
            let keep = n - (drop * n as f64).round() as usize;
            let mask: Vec<bool> = (0..n).map(|i| i < keep).collect();
            let rec = match reconstruct_from_mask(&src.bytes, &mask, 1400) {
                Reconstruction::Image { image, .. } => Some(image),
                Reconstruction::Undecodable => None,
            };
            total += evaluate_images(&src.decoded, rec.as_ref(), true, &params, &mut SurrogateEmbedding).unwrap().score;
        }
        means.push(total / ds.len() as f64);
    }
    assert_eq!(means[0], 1.0);
    assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
}
