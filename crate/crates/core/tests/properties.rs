use proptest::collection::vec;
use proptest::prelude::*;

use qrm::aod::{apply_move, lower, simulate, validate_move, Direction, TweezerMove};
use qrm::cli::{codec, ScheduleFile};
use qrm::grid::{merge_quadrants, split_quadrants, OccupancyGrid, QuadrantId, SiteCoord, TargetRegion};
use qrm::scheduler::{baseline_schedule, qrm_schedule, SchedulerConfig};
use qrm::shift_kernel::{execute_commands, resolve_commands, scan_line, BitLine, ShiftEnablePolicy, TransposeBuffer};

/// Drops every enabled hole and pads with empty sites at the far end.
fn masked_pack(line: &[bool], mask: &[bool]) -> Vec<bool> {
    let mut kept: Vec<bool> = line
        .iter()
        .zip(mask)
        .filter(|&(&bit, &enabled)| bit || !enabled)
        .map(|(&bit, _)| bit)
        .collect();
    kept.resize(line.len(), false);
    kept
}

fn prefix_counts(line: &[bool]) -> Vec<usize> {
    line.iter()
        .scan(0, |acc, &b| {
            *acc += usize::from(b);
            Some(*acc)
        })
        .collect()
}

fn line_and_mask() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1usize..=64).prop_flat_map(|n| (vec(any::<bool>(), n), vec(any::<bool>(), n)))
}

fn grid(max_half: usize) -> impl Strategy<Value = OccupancyGrid> {
    (1..=max_half).prop_flat_map(|half| {
        let w = 2 * half;
        vec(any::<bool>(), w * w).prop_map(move |bits| OccupancyGrid::from_bits(w, bits).unwrap())
    })
}

fn grid_with_target(max_half: usize) -> impl Strategy<Value = (OccupancyGrid, TargetRegion)> {
    grid(max_half).prop_flat_map(|g| {
        let w = g.width();
        (Just(g), 1..=w / 2).prop_map(move |(g, t)| (g, TargetRegion::new(w, 2 * t).unwrap()))
    })
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::N), Just(Direction::S), Just(Direction::E), Just(Direction::W)]
}

fn policy() -> impl Strategy<Value = ShiftEnablePolicy> {
    prop_oneof![Just(ShiftEnablePolicy::Full), (0usize..12).prop_map(ShiftEnablePolicy::ColumnLimit)]
}

proptest! {
    #[test]
    fn kernel_matches_masked_pack((line, mask) in line_and_mask()) {
        let l = BitLine::new(line.clone());
        let (cmds, emitted) = scan_line(&l, &BitLine::new(mask.clone())).unwrap();
        prop_assert_eq!(emitted.as_slice(), line.as_slice());
        let packed = execute_commands(&l, &cmds).unwrap();
        prop_assert_eq!(packed.count_ones(), l.count_ones());
        prop_assert_eq!(packed.into_vec(), masked_pack(&line, &mask));
    }

    #[test]
    fn full_mask_dominates((line, mask) in line_and_mask()) {
        let l = BitLine::new(line.clone());
        let n = line.len();
        let full = execute_commands(&l, &scan_line(&l, &BitLine::ones(n)).unwrap().0).unwrap();
        let masked = execute_commands(&l, &scan_line(&l, &BitLine::new(mask)).unwrap().0).unwrap();
        let (a, b) = (prefix_counts(full.as_slice()), prefix_counts(masked.as_slice()));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
    }

    #[test]
    fn packing_is_idempotent(line in vec(any::<bool>(), 1..=64)) {
        let full = BitLine::ones(line.len());
        let l = BitLine::new(line);
        let once = execute_commands(&l, &scan_line(&l, &full).unwrap().0).unwrap();
        let (cmds, _) = scan_line(&once, &full).unwrap();
        prop_assert_eq!(&execute_commands(&once, &cmds).unwrap(), &once);
        prop_assert!(resolve_commands(&once, &cmds).unwrap().iter().all(|s| s.atoms_moved == 0));
    }

    #[test]
    fn transpose_buffer_columns(half in 1usize..=16, seed in any::<u64>()) {
        let w = 2 * half;
        let mut rng = qrm::rng::SplitMix64::new(seed);
        let lines: Vec<BitLine> = (0..w).map(|_| BitLine::from_word(rng.next_u64(), w)).collect();
        let mut buf = TransposeBuffer::new(w);
        for l in &lines {
            let (_, emitted) = scan_line(l, &BitLine::ones(w)).unwrap();
            buf.push_line(&emitted).unwrap();
        }
        for j in 0..w {
            for (i, l) in lines.iter().enumerate() {
                prop_assert_eq!(buf.column(j).get(i), l.get(j));
            }
        }
    }

    #[test]
    fn flip_is_an_involution(side in 1usize..=20, seed in any::<u64>()) {
        let mut rng = qrm::rng::SplitMix64::new(seed);
        let bits: Vec<bool> = (0..side * side).map(|_| rng.next_u64() & 1 == 1).collect();
        for q in QuadrantId::ALL {
            let once = q.flip_bitmap(&bits, side).unwrap();
            prop_assert_eq!(once.iter().filter(|&&b| b).count(), bits.iter().filter(|&&b| b).count());
            prop_assert_eq!(q.flip_bitmap(&once, side).unwrap(), bits.clone());
        }
    }

    #[test]
    fn split_merge_round_trip(g in grid(12)) {
        let quads = split_quadrants(&g);
        prop_assert_eq!(quads.iter().map(|q| q.popcount()).sum::<usize>(), g.popcount());
        prop_assert_eq!(merge_quadrants(&quads).unwrap(), g);
    }

    #[test]
    fn lockstep_move_semantics(
        g in grid(6),
        rows in vec(0usize..12, 1..5),
        cols in vec(0usize..12, 1..5),
        dir in direction(),
        steps in 1usize..3,
    ) {
        let w = g.width();
        let mv = TweezerMove::new(rows.iter().map(|r| r % w), cols.iter().map(|c| c % w), dir, steps).unwrap();
        let trapped = |r: usize, c: usize| mv.rows.contains(&r) && mv.cols.contains(&c);
        let (dr, dc) = dir.delta();
        let source = |r: usize, c: usize| {
            let sr = r as isize - dr * steps as isize;
            let sc = c as isize - dc * steps as isize;
            (sr >= 0 && sc >= 0 && (sr as usize) < w && (sc as usize) < w).then_some((sr as usize, sc as usize))
        };
        let lands_outside = mv.rows.iter().any(|&r| mv.cols.iter().any(|&c| {
            let (nr, nc) = (r as isize + dr * steps as isize, c as isize + dc * steps as isize);
            nr < 0 || nc < 0 || nr as usize >= w || nc as usize >= w
        }));
        let collides = mv.rows.iter().any(|&r| mv.cols.iter().any(|&c| {
            let (nr, nc) = ((r as isize + dr * steps as isize) as usize, (c as isize + dc * steps as isize) as usize);
            !lands_outside && g.occupied(r, c) && g.occupied(nr, nc) && !trapped(nr, nc)
        }));
        match apply_move(&g, &mv) {
            Ok(next) => {
                prop_assert!(!lands_outside && !collides);
                prop_assert!(validate_move(&g, &mv).is_ok());
                for r in 0..w {
                    for c in 0..w {
                        let stays = g.occupied(r, c) && !trapped(r, c);
                        let arrives = source(r, c).is_some_and(|(sr, sc)| trapped(sr, sc) && g.occupied(sr, sc));
                        prop_assert_eq!(next.occupied(r, c), stays || arrives, "site ({}, {})", r, c);
                    }
                }
            }
            Err(_) => prop_assert!(lands_outside || collides),
        }
    }

    #[test]
    fn codec_round_trip((g, t) in grid_with_target(24)) {
        let bytes = codec::encode(&g, &t).unwrap();
        prop_assert_eq!(bytes.len(), codec::HEADER_BYTES + (g.width() * g.width()).div_ceil(1024) * codec::PACKET_BYTES);
        prop_assert_eq!(codec::decode(&bytes).unwrap(), (g, t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qrm_invariants((g, t) in grid_with_target(8), s_en in policy()) {
        let cfg = SchedulerConfig { s_en, ..SchedulerConfig::default() };
        let result = qrm_schedule(&g, &t, &cfg).unwrap();
        let w = g.width();

        prop_assert_eq!(result.final_grid.popcount(), g.popcount());
        prop_assert!(result.target_history.windows(2).all(|p| p[0] <= p[1]));
        prop_assert_eq!(result.success, result.final_grid.is_defect_free(&t));
        for mm in &result.moves {
            prop_assert!(mm.points_to_center(w), "{:?}", mm);
            prop_assert_eq!(mm.direction.axis(), mm.axis);
        }

        let lowered = lower(&result.moves, &g).unwrap();
        let moves: Vec<TweezerMove> = lowered.iter().map(|m| m.tweezer.clone()).collect();
        let report = simulate(&g, &moves, Some(&t)).unwrap();
        prop_assert_eq!(&report.final_grid, &result.final_grid);
        prop_assert!(report.target_history.windows(2).all(|p| p[0] <= p[1]));

        let mut origins: Vec<SiteCoord> = result.traces.iter().map(|tr| tr.origin).collect();
        let mut finals: Vec<SiteCoord> = result.traces.iter().map(|tr| tr.final_site).collect();
        origins.sort();
        finals.sort();
        prop_assert_eq!(origins, g.atoms().collect::<Vec<_>>());
        prop_assert_eq!(finals, result.final_grid.atoms().collect::<Vec<_>>());
        for tr in &result.traces {
            prop_assert_eq!(tr.replay(w).unwrap(), tr.final_site);
            prop_assert!(tr.hops.windows(2).all(|h| h[0].0 != h[1].0));
        }

        let file = ScheduleFile::from_schedule(&result, &lowered);
        prop_assert_eq!(ScheduleFile::parse(&file.to_jsonl()).unwrap(), file);
    }

    #[test]
    fn fixpoint_ends_the_schedule((g, t) in grid_with_target(8)) {
        let cfg = SchedulerConfig { early_stop: false, ..SchedulerConfig::default() };
        let result = qrm_schedule(&g, &t, &cfg).unwrap();
        // Iterations that emit moves form a prefix 1..=k: once an
        // iteration is idle, nothing later moves either.
        let mut seen: Vec<usize> = result.moves.iter().map(|m| m.iteration).collect();
        seen.dedup();
        prop_assert_eq!(seen, (1..=result.iterations).collect::<Vec<_>>());
        let stopped = qrm_schedule(&g, &t, &SchedulerConfig::default()).unwrap();
        prop_assert_eq!(stopped.final_grid, result.final_grid);
    }

    #[test]
    fn baseline_is_physical((g, t) in grid_with_target(6)) {
        let result = baseline_schedule(&g, &t, &SchedulerConfig::default()).unwrap();
        let lowered = lower(&result.moves, &g).unwrap();
        let moves: Vec<TweezerMove> = lowered.iter().map(|m| m.tweezer.clone()).collect();
        let report = simulate(&g, &moves, Some(&t)).unwrap();
        prop_assert_eq!(&report.final_grid, &result.final_grid);
        prop_assert_eq!(report.final_grid.popcount(), g.popcount());
        prop_assert!(report.target_history.windows(2).all(|p| p[0] <= p[1]));
        let qrm = qrm_schedule(&g, &t, &SchedulerConfig::default()).unwrap();
        if qrm.success && result.success {
            prop_assert_eq!(qrm.final_grid.target_popcount(&t), result.final_grid.target_popcount(&t));
        }
    }
}
