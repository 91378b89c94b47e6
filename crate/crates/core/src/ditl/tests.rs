use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::kinematics::Body;
use crate::lexicon::{builtin_lexicon, Lexicon, Prep, Shape};
use crate::parser::{parse_text, EventFrame};
use crate::rng::SplitMix64;
use crate::scene::{build_scene, SceneConfig};

fn scene_for(sentence: &str, seed: u64) -> (EventFrame, Scene, Lexicon) {
    let lex = builtin_lexicon();
    let frame = parse_text(sentence, &lex).unwrap();
    let cfg = SceneConfig {
        seed,
        ..Default::default()
    };
    let scene = build_scene(&frame, &lex, &cfg).unwrap();
    (frame, scene, lex)
}

/// Ball resting on the floor, nothing else.
fn lone_ball() -> (WorldState, TickContext) {
    let floor = Body::new(
        "floor",
        Shape::Plane {
            normal: crate::lexicon::Axis::PosY,
        },
        false,
        Vec3::zeros(),
    );
    let ball = Body::new("ball", Shape::Sphere { radius: 0.5 }, true, Vec3::new(0.0, 0.5, 0.0));
    let params = KinematicParams {
        dt: 0.1,
        ..Default::default()
    };
    (
        WorldState::new(vec![floor, ball]),
        TickContext::new(ObjectId::new("ball"), Vec3::x(), params),
    )
}

fn tick(a: Action) -> Program {
    Program::Tick(a)
}

fn holds(f: &Formula, s: &WorldState, ctx: &TickContext, budget: u32) -> bool {
    eval_formula(f, s, ctx, budget).unwrap().holds
}

/// Ticks needed before `at(theme, goal)` first holds, found by stepping the
/// integrator directly.
fn first_arrival(s0: &WorldState, ctx: &TickContext, action: Action, goal: &str, limit: u32) -> Option<u32> {
    let goal = ObjectId::new(goal);
    let mut s = s0.clone();
    for k in 0..=limit {
        let d = kinematics::surface_distance(s.body(&ctx.theme).unwrap(), s.body(&goal).unwrap()).unwrap();
        if d <= ctx.params.contact_eps {
            return Some(k);
        }
        s = ctx.step(&s, action).unwrap();
    }
    None
}

#[test]
fn ball_on_floor_is_ec() {
    let (s, ctx) = lone_ball();
    assert!(holds(&Formula::ec("ball", "floor"), &s, &ctx, 0));
    assert!(!holds(&Formula::dc("ball", "floor"), &s, &ctx, 0));
}

#[test]
fn not_at_wall_initially() {
    let (_, scene, _) = scene_for("The ball rolled to the wall.", 0);
    let ctx = TickContext::from_scene(&scene);
    assert!(holds(&Formula::not(Formula::at("ball", "wall")), &scene.world, &ctx, 0));
}

#[test]
fn unbound_object_is_an_error() {
    let (s, ctx) = lone_ball();
    let err = eval_formula(&Formula::ec("ball", "wall"), &s, &ctx, 0).unwrap_err();
    assert_eq!(err, DitlError::UnboundObject(ObjectId::new("wall")));
}

#[test]
fn diamond_agrees_with_direct_stepping() {
    let (_, scene, _) = scene_for("The ball rolled to the wall.", 0);
    let ctx = TickContext::from_scene(&scene);
    let needed = first_arrival(&scene.world, &ctx, Action::Roll, "wall", 1000).unwrap();
    // 4.4 m of free travel at 1 m/s in 1/60 s steps.
    assert_eq!(needed, 264);
    for bound in [200, needed - 1, needed, 300] {
        let f = Formula::diamond(Program::star(tick(Action::Roll), bound), Formula::at("ball", "wall"));
        let v = eval_formula(&f, &scene.world, &ctx, 1000).unwrap();
        assert_eq!(v.holds, bound >= needed, "bound {bound}");
        assert!(!v.undetermined);
    }
}

#[test]
fn diamond_short_of_budget_is_undetermined() {
    let (_, scene, _) = scene_for("The ball rolled to the wall.", 0);
    let ctx = TickContext::from_scene(&scene);
    let f = Formula::diamond(Program::star(tick(Action::Roll), 300), Formula::at("ball", "wall"));
    let v = eval_formula(&f, &scene.world, &ctx, 100).unwrap();
    assert!(!v.holds && v.undetermined);
}

#[test]
fn test_alone_is_a_zero_length_run() {
    let (s, ctx) = lone_ball();
    let t = execute(&Program::Test(Formula::True), &s, &ctx, &mut SplitMix64::new(0), 10).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.tick_count(), 0);
}

#[test]
fn two_slides_cover_two_steps() {
    let (s, ctx) = lone_ball();
    let p = Program::seq(vec![tick(Action::Slide), tick(Action::Slide)]);
    let t = execute(&p, &s, &ctx, &mut SplitMix64::new(0), 10).unwrap();
    assert_eq!(t.len(), 3);
    let id = ObjectId::new("ball");
    let dx = t.last().body(&id).unwrap().position.x - t.first().body(&id).unwrap().position.x;
    assert!((dx - 0.2).abs() < 1e-12);
    assert_eq!(t.labels, vec![Action::Slide, Action::Slide]);
}

#[test]
fn tests_and_assignments_take_no_time() {
    let (s, ctx) = lone_ball();
    let p = Program::seq(vec![
        Program::Test(Formula::True),
        Program::Assign(Attr::new("ball", Attribute::Rot), Term::Scalar(1.0)),
        tick(Action::Slide),
        Program::Test(Formula::ec("ball", "floor")),
    ]);
    let t = execute(&p, &s, &ctx, &mut SplitMix64::new(3), 10).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.instant(1), ctx.params.dt);
    assert_eq!(t.interval(1), (0.0, ctx.params.dt));
    // The assignment rewrote the initial state in place.
    assert_eq!(t.first().body(&ObjectId::new("ball")).unwrap().rotation, 1.0);
    assert_eq!(t.last().time, t.instant(1));
}

#[test]
fn directed_assignment_of_same_value_fails() {
    let (s, ctx) = lone_ball();
    let rot = Attr::new("ball", Attribute::Rot);
    let p = Program::DirectedAssign(rot.clone(), Term::attr("ball", Attribute::Rot));
    let err = execute(&p, &s, &ctx, &mut SplitMix64::new(0), 10).unwrap_err();
    assert!(matches!(err, DitlError::NoSuccessfulRun { budget_exhausted: false, .. }), "{err}");
    let p = Program::DirectedAssign(rot, Term::Scalar(0.5));
    assert!(execute(&p, &s, &ctx, &mut SplitMix64::new(0), 10).is_ok());
}

#[test]
fn failure_reports_deepest_test() {
    let (s, ctx) = lone_ball();
    let p = Program::seq(vec![tick(Action::Slide), Program::Test(Formula::False)]);
    match execute(&p, &s, &ctx, &mut SplitMix64::new(0), 10).unwrap_err() {
        DitlError::NoSuccessfulRun { deepest_failure, .. } => {
            assert_eq!(deepest_failure.as_deref(), Some("false"));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn tick_budget_exhaustion_is_reported() {
    let (s, ctx) = lone_ball();
    let p = Program::seq(vec![tick(Action::Slide); 5]);
    let err = execute(&p, &s, &ctx, &mut SplitMix64::new(0), 3).unwrap_err();
    assert!(matches!(err, DitlError::NoSuccessfulRun { budget_exhausted: true, .. }));
}

#[test]
fn rolling_to_the_wall_ends_in_contact() {
    let (frame, scene, lex) = scene_for("The ball rolled to the wall.", 7);
    let ctx = TickContext::from_scene(&scene);
    let cfg = CompileConfig {
        max_frames: 10_000,
        bare_frames: scene.resolved.bare_frames,
    };
    let p = compile_event(&frame, &lex, &cfg).unwrap();
    let t = execute(&p, &scene.world, &ctx, &mut SplitMix64::new(7), 10_000).unwrap();
    assert!(holds(&Formula::at("ball", "wall"), t.last(), &ctx, 0));
    assert_eq!(t.tick_count(), 264);
    assert!(t.labels.iter().all(|a| *a == Action::Roll));
}

#[test]
fn goal_loop_stops_at_first_goal_state() {
    // Replays the labels through the integrator and checks the goal holds
    // exactly at the end, whatever order the coin flips tried.
    let (frame, scene, lex) = scene_for("The block slid to the wall.", 0);
    let ctx = TickContext::from_scene(&scene);
    let p = compile_event(
        &frame,
        &lex,
        &CompileConfig {
            max_frames: 2000,
            bare_frames: 30,
        },
    )
    .unwrap();
    let goal = Formula::at("block", "wall");
    for seed in 0..5 {
        let t = execute(&p, &scene.world, &ctx, &mut SplitMix64::new(seed), 2000).unwrap();
        let mut s = scene.world.clone();
        for (i, a) in t.labels.iter().enumerate() {
            assert!(!holds(&goal, &s, &ctx, 0), "goal already held at {i}");
            s = ctx.step(&s, *a).unwrap();
            assert_eq!(s, t.states[i + 1]);
        }
        assert!(holds(&goal, &s, &ctx, 0));
    }
}

#[test]
fn execution_is_deterministic_per_seed() {
    let (s, ctx) = lone_ball();
    let p = Program::star(Program::choice(tick(Action::Roll), tick(Action::Slide)), 6);
    let a = execute(&p, &s, &ctx, &mut SplitMix64::new(11), 10).unwrap();
    let b = execute(&p, &s, &ctx, &mut SplitMix64::new(11), 10).unwrap();
    assert_eq!(a.bit_key(), b.bit_key());
}

#[test]
fn choice_enumerates_both_branches() {
    let (s, ctx) = lone_ball();
    let p = Program::choice(tick(Action::Roll), tick(Action::Slide));
    let ts = enumerate_traces(&p, &s, &ctx, 10).unwrap();
    assert_eq!(ts.len(), 2);
    assert_eq!(ts[0].labels, vec![Action::Roll]);
    assert_eq!(ts[1].labels, vec![Action::Slide]);
}

#[test]
fn bounded_star_enumerates_each_length() {
    let (s, ctx) = lone_ball();
    let ts = enumerate_traces(&Program::star(tick(Action::Roll), 2), &s, &ctx, 10).unwrap();
    assert_eq!(ts.iter().map(Trace::tick_count).collect::<Vec<_>>(), vec![0, 1, 2]);
}

#[test]
fn loop_already_at_goal_has_one_empty_run() {
    let (_, scene, _) = scene_for("The ball rolled to the wall.", 0);
    let ctx = TickContext::from_scene(&scene);
    let mut s = scene.world.clone();
    s.body_mut(&ObjectId::new("ball")).unwrap().position.x = 4.4;
    let p = Program::while_not(Formula::at("ball", "wall"), tick(Action::Roll), 50);
    let ts = enumerate_traces(&p, &s, &ctx, 100).unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].tick_count(), 0);
}

#[test]
fn explosion_guard_trips_in_both_interpreters() {
    let (s, mut ctx) = lone_ball();
    ctx.node_cap = 1000;
    let branching = Program::star(Program::choice(tick(Action::Roll), tick(Action::Slide)), 30);
    let err = enumerate_traces(&branching, &s, &ctx, 100).unwrap_err();
    assert_eq!(err, DitlError::ExplosionGuard { cap: 1000 });
    let hopeless = Program::seq(vec![branching, Program::Test(Formula::False)]);
    let err = execute(&hopeless, &s, &ctx, &mut SplitMix64::new(0), 100).unwrap_err();
    assert_eq!(err, DitlError::ExplosionGuard { cap: 1000 });
}

#[test]
fn bare_slide_compiles_to_a_tick_chain() {
    let lex = builtin_lexicon();
    let frame = EventFrame::new("slide", "ball", None);
    let p = compile_event(
        &frame,
        &lex,
        &CompileConfig {
            max_frames: 500,
            bare_frames: 120,
        },
    )
    .unwrap();
    assert_eq!(p, Program::seq(vec![tick(Action::Slide); 120]));
}

#[test]
fn arrive_rejects_to_and_needs_a_ground() {
    let lex = builtin_lexicon();
    let cfg = CompileConfig {
        max_frames: 500,
        bare_frames: 30,
    };
    for frame in [
        EventFrame::new("arrive", "ball", Some((Prep::To, "wall"))),
        EventFrame::new("arrive", "ball", None),
        EventFrame::new("roll", "ball", Some((Prep::At, "wall"))),
    ] {
        let err = compile_event(&frame, &lex, &cfg).unwrap_err();
        assert!(matches!(err, DitlError::IncompatiblePath(_)), "{err}");
    }
}

#[test]
fn leaving_from_compiles_with_both_tests() {
    let lex = builtin_lexicon();
    let frame = EventFrame::new("leave", "ball", Some((Prep::From, "wall")));
    let p = compile_event(
        &frame,
        &lex,
        &CompileConfig {
            max_frames: 500,
            bare_frames: 2,
        },
    )
    .unwrap();
    let at = Formula::at("ball", "wall");
    assert_eq!(
        p,
        Program::seq(vec![
            Program::Test(at.clone()),
            Program::seq(vec![tick(Action::Move); 2]),
            Program::Test(Formula::not(at)),
        ])
    );
}

#[test]
fn text_form_parses() {
    let p = parse_program(
        "; roll until touching\n(seq (star (seq (test (not (at ball wall))) (tick roll)) 10)\n (test (at ball wall)))",
    )
    .unwrap();
    assert_eq!(p, Program::while_not(Formula::at("ball", "wall"), tick(Action::Roll), 10));
    let f = parse_formula("(eq (+ (loc ball) (vec 1 0 0)) (* 2 (vel ball)) 1e-3)").unwrap();
    assert!(matches!(f, Formula::Eq(..)));
}

#[test]
fn text_errors_carry_offsets() {
    let cases = [
        ("(seq (tick roll)", 0),
        ("(tick hop)", 6),
        ("(star (tick roll) 0)", 18),
        ("(seq) (seq)", 6),
        ("(test (at ball))", 6),
    ];
    for (src, offset) in cases {
        match parse_program(src) {
            Err(DitlError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{src}"),
            other => panic!("{src}: {other:?}"),
        }
    }
    assert!(matches!(
        parse_program("(assign ball rot (vec 1 2 3))"),
        Err(DitlError::Dimension(_))
    ));
}

// ---- generators ----

fn arb_action() -> impl Strategy<Value = Action> {
    prop::sample::select(Action::ALL.to_vec())
}

fn arb_scalar() -> impl Strategy<Value = f64> {
    prop_oneof![(-100i32..100).prop_map(f64::from), -1e3..1e3f64]
}

fn arb_scalar_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        arb_scalar().prop_map(Term::Scalar),
        Just(Term::attr("ball", Attribute::Rot)),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::diff(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::scale(a, b)),
        ]
    })
}

fn arb_vector_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (arb_scalar(), arb_scalar(), arb_scalar()).prop_map(|(x, y, z)| Term::Vector(Vec3::new(x, y, z))),
        Just(Term::attr("ball", Attribute::Loc)),
        Just(Term::attr("ball", Attribute::Vel)),
    ];
    (leaf.clone(), leaf, arb_scalar_term(), 0..3u8).prop_map(|(a, b, k, op)| match op {
        0 => a,
        1 => Term::sum(a, b),
        _ => Term::scale(k, a),
    })
}

fn arb_atom_formula() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::ec("ball", "floor")),
        Just(Formula::dc("ball", "floor")),
        Just(Formula::at("ball", "floor")),
        (arb_scalar_term(), arb_scalar_term()).prop_map(|(a, b)| Formula::Leq(a, b)),
        (arb_vector_term(), arb_vector_term(), 0.0..2.0f64).prop_map(|(a, b, t)| Formula::Eq(a, b, t)),
    ]
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    arb_atom_formula().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

/// Programs over the lone ball with at most three choices and loops of at
/// most four iterations.
fn arb_program() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![
        4 => arb_action().prop_map(Program::Tick),
        2 => arb_atom_formula().prop_map(Program::Test),
        1 => arb_scalar_term().prop_map(|t| Program::Assign(Attr::new("ball", Attribute::Rot), t)),
        1 => arb_scalar_term().prop_map(|t| Program::DirectedAssign(Attr::new("ball", Attribute::Rot), t)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Program::Seq),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::choice(a, b)),
            (inner, 1..=4u32).prop_map(|(p, n)| Program::star(p, n)),
        ]
    })
    .prop_filter("at most three choices", |p| p.choice_count() <= 3)
}

fn arb_text_program() -> impl Strategy<Value = Program> {
    arb_program().prop_flat_map(|p| {
        (Just(p), arb_formula(), arb_vector_term()).prop_map(|(p, f, v)| {
            Program::seq(vec![
                p,
                Program::Test(Formula::diamond(Program::Tick(Action::Roll), f)),
                Program::Assign(Attr::new("ball", Attribute::Loc), v),
            ])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn executed_run_is_among_enumerated_runs(p in arb_program(), seed in any::<u64>(), budget in 0..=20u32) {
        let (s, ctx) = lone_ball();
        let all = enumerate_traces(&p, &s, &ctx, budget).unwrap();
        let keys: HashSet<Vec<u64>> = all.iter().map(Trace::bit_key).collect();
        prop_assert_eq!(keys.len(), all.len());
        match execute(&p, &s, &ctx, &mut SplitMix64::new(seed), budget) {
            Ok(t) => {
                prop_assert!(keys.contains(&t.bit_key()), "run of {} not enumerated", p);
                prop_assert!(t.tick_count() <= budget as usize);
            }
            Err(DitlError::NoSuccessfulRun { .. }) => prop_assert!(all.is_empty(), "{} has runs", p),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn enumerated_runs_respect_the_clock(p in arb_program(), budget in 0..=12u32) {
        let (s, ctx) = lone_ball();
        for t in enumerate_traces(&p, &s, &ctx, budget).unwrap() {
            prop_assert_eq!(t.states.len(), t.labels.len() + 1);
            for (i, st) in t.states.iter().enumerate() {
                prop_assert_eq!(st.frame, i as u64);
                prop_assert_eq!(st.time, st.frame as f64 * ctx.params.dt);
            }
            let mut replay = t.first().clone();
            for (i, a) in t.labels.iter().enumerate() {
                replay = ctx.step(&replay, *a).unwrap();
                prop_assert_eq!(replay.frame, t.states[i + 1].frame);
            }
        }
    }

    #[test]
    fn text_form_round_trips(p in arb_text_program()) {
        let text = p.to_string();
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(back, p);
    }
}
