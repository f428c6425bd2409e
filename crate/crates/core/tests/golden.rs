use qagents::dump::{parse_circuits, render};
use qagents::pqc::{build_policy, LayerKind};

const PYRAMID_N3: &str = include_str!("fixtures/pyramid_n3.txt");

#[test]
fn pyramid_render_matches_fixture() {
    let c = build_policy(3, &[LayerKind::MatchgatePyramid]).unwrap();
    let p: Vec<f64> = (0..c.n_params()).map(|i| 0.1 * (i + 1) as f64).collect();
    let dump = render(&c, &p).unwrap();
    assert_eq!(dump.text.trim_end(), PYRAMID_N3.trim_end());
}

#[test]
fn fixture_parses_back() {
    let items = parse_circuits(PYRAMID_N3).unwrap();
    assert_eq!(items.len(), 1);
    assert_eq!(items[0].circuit.n_qubits(), 3);
    assert_eq!(items[0].params.len(), 15);
}
