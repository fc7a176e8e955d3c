use hiprl::controllers::EnvEvent;
use hiprl::eval::{
    accuracy, bootstrap_ci, render, replay, shift, spl, sspl, EpisodeRecord, EvalError, TraceEpisode, TraceFile,
    TraceHeader,
};
use hiprl::metapolicy::{episode_seeds, run_episode, EpisodeConfig, Policy};
use hiprl::world::{generate_scene, generate_task, SceneConfig, Split, TaskKind};

fn rec(success: bool, p: u64, l: u32) -> EpisodeRecord {
    EpisodeRecord {
        task_id: String::new(),
        kind: TaskKind::PutIn,
        split: Split::UnseenTest,
        success,
        correct: None,
        path_length: p,
        oracle_length: l,
    }
}

#[test]
fn spl_hand_cases() {
    assert!((spl(&[rec(true, 20, 10)]).unwrap() - 0.5).abs() < 1e-12);
    assert!((spl(&[rec(true, 5, 10)]).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(spl(&[rec(false, 10, 10)]).unwrap(), 0.0);
    let mixed = [rec(true, 10, 10), rec(true, 40, 10), rec(false, 3, 10), rec(true, 12, 12)];
    assert!((spl(&mixed).unwrap() - (1.0 + 0.25 + 0.0 + 1.0) / 4.0).abs() < 1e-12);
    assert!((shift(1.0, 0.5, 0.5) - 0.5).abs() < 1e-12);
}

#[test]
fn oracle_rows_score_one() {
    let oracle: Vec<_> = (1..30).map(|l| rec(true, l as u64, l)).collect();
    assert_eq!(spl(&oracle).unwrap(), 1.0);
    assert!((sspl(&oracle, 0.3).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sspl_is_zero_at_baseline() {
    let records = [rec(true, 10, 10), rec(false, 4, 10), rec(true, 20, 10), rec(false, 1, 1)];
    let mu = accuracy(&records).unwrap();
    assert_eq!(mu, 0.5);
    assert_eq!(sspl(&records, mu).unwrap(), 0.0);
    assert!(sspl(&records, 0.75).unwrap() < 0.0);
}

#[test]
fn invalid_baseline_and_empty_input_error() {
    let r = [rec(true, 1, 1)];
    assert!(matches!(sspl(&r, 1.0), Err(EvalError::InvalidBaseline(_))));
    assert!(matches!(sspl(&r, -0.1), Err(EvalError::InvalidBaseline(_))));
    assert!(matches!(spl(&[]), Err(EvalError::Empty)));
    assert!(matches!(accuracy(&[]), Err(EvalError::Empty)));
}

#[test]
fn bootstrap_brackets_the_mean_and_is_deterministic() {
    let values: Vec<f64> = (0..200).map(|i| (i % 3 == 0) as u8 as f64).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = bootstrap_ci(&values, 2000, 5);
    assert!(lo < mean && mean < hi);
    assert!(hi - lo < 0.2);
    assert_eq!(bootstrap_ci(&values, 2000, 5), (lo, hi));
    let constant = vec![0.7; 50];
    let (lo, hi) = bootstrap_ci(&constant, 500, 1);
    assert!((lo - 0.7).abs() < 1e-12 && (hi - 0.7).abs() < 1e-12);
}

fn trace_file() -> TraceFile {
    let mut episodes = Vec::new();
    for seed in 0..4 {
        let scene = generate_scene(seed, &SceneConfig::default()).unwrap();
        let Ok(task) = generate_task(&scene, 0, TaskKind::PutIn) else { continue };
        let trace = run_episode(&scene, &task, &Policy::PlannerOnly, episode_seeds(9, &task), &EpisodeConfig::default());
        episodes.push(TraceEpisode { scene, task, trace });
    }
    assert!(!episodes.is_empty());
    TraceFile { header: TraceHeader::new(9, "planner_only", "test"), episodes }
}

#[test]
fn fresh_traces_replay_cleanly_through_jsonl() {
    let file = trace_file();
    let back = TraceFile::from_jsonl(&file.to_jsonl()).unwrap();
    assert_eq!(back.to_jsonl(), file.to_jsonl());
    assert_eq!(back, file);
    let report = replay(&back);
    assert!(report.is_clean(), "{report:?}");
    assert_eq!(report.episodes, file.episodes.len());
    assert!(report.events > 0);
}

#[test]
fn corrupted_event_is_located() {
    let mut file = trace_file();
    let events = &mut file.episodes[0].trace.events;
    let at = events.len() / 2;
    match &mut events[at] {
        EnvEvent::Step { obs, .. } => obs.replace_range(0..1, if obs.starts_with('0') { "1" } else { "0" }),
        EnvEvent::Detect { frame, .. } => frame.replace_range(0..1, if frame.starts_with('0') { "1" } else { "0" }),
    }
    let report = replay(&file);
    assert_eq!(report.divergences.len(), 1);
    assert_eq!(report.divergences[0].episode, 0);
    assert_eq!(report.divergences[0].event, at);
    assert_ne!(report.divergences[0].logged, report.divergences[0].replayed);
}

#[test]
fn truncated_trace_is_inconsistent() {
    let mut file = trace_file();
    file.episodes[0].trace.primitive_length += 1;
    assert!(!replay(&file).inconsistencies.is_empty());
}

#[test]
fn render_lists_phases() {
    let file = trace_file();
    let e = &file.episodes[0];
    let text = render(&e.scene, &e.task, &e.trace);
    let phases = text.lines().find(|l| l.starts_with("phases: ")).expect("phases line");
    assert!(phases.ends_with("stopper"), "{phases}");
    assert!(text.contains("[start]"));
}
