//! Text serialization of circuits.
//!
//! A dump has two parts: an ASCII diagram with angles rounded to two
//! decimals, for reading, and a circuit-file block with full-precision
//! values, for parsing. The circuit-file grammar is line oriented:
//!
//! ```text
//! qcircuit v1
//! name <identifier>            (optional)
//! qubits <n>
//! window <q0> <q1> ...         (optional, defaults to 0..n)
//! gate U <q> <θ> <φ> [adj] [layer=<LayerKind>]
//! gate M <q_low> <θ> <φ1> <φ2> [adj] [layer=<LayerKind>]
//! gate CRY <control> <target> <θ> [adj] [layer=<LayerKind>]
//! params <p0> <p1> ...         (zero or more values)
//! end
//! ```
//!
//! An angle is either `p<index>` (a reference into the parameter list) or
//! `=<value>` (a constant). Lines starting with `#` and blank lines are
//! ignored; everything outside `qcircuit … end` blocks is ignored too, so a
//! diagram can precede the block. A file may hold several blocks.

use std::fmt::Write as _;

use crate::pqc::{Angle, Gate, GateKind, LayerKind, ParamCircuit, PqcError, PqcResult};

const HEADER: &str = "qcircuit v1";
const WRAP_WIDTH: usize = 110;

/// A rendered circuit: diagram followed by the machine-readable block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDump {
    pub text: String,
}

impl CircuitDump {
    pub fn parse(&self) -> PqcResult<(ParamCircuit, Vec<f64>)> {
        let mut all = parse_circuits(&self.text)?;
        match all.len() {
            0 => Err(PqcError::Parse {
                line: 0,
                msg: format!("no '{HEADER}' block found"),
            }),
            _ => {
                let c = all.remove(0);
                Ok((c.circuit, c.params))
            }
        }
    }
}

/// A parsed circuit-file block.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCircuit {
    pub name: Option<String>,
    pub circuit: ParamCircuit,
    pub params: Vec<f64>,
}

pub fn render(circuit: &ParamCircuit, params: &[f64]) -> PqcResult<CircuitDump> {
    circuit.check_params(params)?;
    let mut text = diagram(circuit, params);
    text.push('\n');
    text.push_str(&circuit_file(circuit, params, None));
    Ok(CircuitDump { text })
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn labels(g: &Gate, v: [f64; 3]) -> Vec<(usize, String)> {
    let dag = if g.adjoint { "Adj" } else { "" };
    match g.kind {
        GateKind::U => vec![(g.qubits[0], format!("RYPhase{dag}({},{})", fmt2(v[0]), fmt2(v[1])))],
        GateKind::Cry => {
            let (c, t) = (g.qubits[0], g.qubits[1]);
            let (cm, tm) = if c < t { ('/', '\\') } else { ('\\', '/') };
            vec![(c, format!("{cm}o")), (t, format!("{tm}RY{dag}({})", fmt2(v[0])))]
        }
        GateKind::M => {
            let body = if g.is_beam_splitter() {
                format!("RBS{dag}({})", fmt2(v[0]))
            } else {
                format!("M{dag}({},{},{})", fmt2(v[0]), fmt2(v[1]), fmt2(v[2]))
            };
            vec![(g.qubits[0], format!("/{body}")), (g.qubits[1], format!("\\{body}"))]
        }
    }
}

/// ASCII diagram, one wire per qubit. Gates are packed into the earliest
/// free column and `||` marks each layer boundary.
pub fn diagram(circuit: &ParamCircuit, params: &[f64]) -> String {
    let n = circuit.n_qubits();
    let mut columns: Vec<Vec<Option<String>>> = Vec::new();
    let mut frontier = vec![0usize; n];
    let mut layer = None;
    for g in circuit.gates() {
        if g.layer.is_some() && g.layer != layer {
            if layer.is_some() || !columns.is_empty() {
                columns.push(vec![Some("||".to_string()); n]);
                frontier.iter_mut().for_each(|f| *f = columns.len());
            }
            layer = g.layer;
        }
        let cells = labels(g, g.resolve(params));
        let lo = g.qubits[0].min(g.qubits[1]);
        let hi = g.qubits[0].max(g.qubits[1]);
        let col = (lo..=hi).map(|q| frontier[q]).max().unwrap_or(0);
        if col == columns.len() {
            columns.push(vec![None; n]);
        }
        for (q, s) in cells {
            columns[col][q] = Some(s);
        }
        for f in &mut frontier[lo..=hi] {
            *f = col + 1;
        }
    }
    let tag_width = format!("{}", n.saturating_sub(1)).len();
    let mut out = String::new();
    let mut start = 0;
    loop {
        let mut width = tag_width + 2;
        let mut end = start;
        while end < columns.len() {
            let w = col_width(&columns[end]);
            if end > start && width + w > WRAP_WIDTH {
                break;
            }
            width += w;
            end += 1;
        }
        for q in 0..n {
            let _ = write!(out, "{q:>tag_width$}: ");
            for col in &columns[start..end] {
                let w = col_width(col);
                let cell = col[q].as_deref().unwrap_or("");
                out.push('-');
                out.push_str(cell);
                out.push_str(&"-".repeat(w - 1 - cell.chars().count()));
            }
            out.push('\n');
        }
        if end >= columns.len() {
            break;
        }
        start = end;
        out.push('\n');
    }
    out
}

fn col_width(col: &[Option<String>]) -> usize {
    col.iter()
        .flatten()
        .map(|s| s.chars().count())
        .max()
        .unwrap_or(0)
        + 2
}

fn angle_token(a: &Angle) -> String {
    match a {
        Angle::Param(i) => format!("p{i}"),
        Angle::Fixed(v) => format!("={v:?}"),
    }
}

/// The machine-readable block for one circuit.
pub fn circuit_file(circuit: &ParamCircuit, params: &[f64], name: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    if let Some(name) = name {
        let _ = writeln!(s, "name {name}");
    }
    let _ = writeln!(s, "qubits {}", circuit.n_qubits());
    let window: Vec<String> = circuit.window().iter().map(|q| q.to_string()).collect();
    let _ = writeln!(s, "window {}", window.join(" "));
    for g in circuit.gates() {
        let kind = match g.kind {
            GateKind::U => "U",
            GateKind::M => "M",
            GateKind::Cry => "CRY",
        };
        let mut parts = vec!["gate".to_string(), kind.to_string()];
        parts.push(g.qubits[0].to_string());
        if g.kind == GateKind::Cry {
            parts.push(g.qubits[1].to_string());
        }
        parts.extend(g.angles().iter().map(angle_token));
        if g.adjoint {
            parts.push("adj".into());
        }
        if let Some(l) = g.layer {
            parts.push(format!("layer={l}"));
        }
        let _ = writeln!(s, "{}", parts.join(" "));
    }
    let vals: Vec<String> = params.iter().map(|v| format!("{v:?}")).collect();
    if vals.is_empty() {
        let _ = writeln!(s, "params");
    } else {
        let _ = writeln!(s, "params {}", vals.join(" "));
    }
    let _ = writeln!(s, "end");
    s
}

/// Several named circuits in one file.
pub fn write_circuits(items: &[NamedCircuit]) -> String {
    items
        .iter()
        .map(|c| circuit_file(&c.circuit, &c.params, c.name.as_deref()))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Default)]
struct Block {
    start: usize,
    name: Option<String>,
    qubits: Option<usize>,
    window: Option<Vec<usize>>,
    gates: Vec<Gate>,
    params: Option<Vec<f64>>,
}

pub fn parse_circuits(text: &str) -> PqcResult<Vec<NamedCircuit>> {
    let mut out = Vec::new();
    let mut block: Option<Block> = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        let err = |msg: String| PqcError::Parse { line: line_no, msg };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(b) = block.as_mut() else {
            if line == HEADER {
                block = Some(Block {
                    start: line_no,
                    ..Block::default()
                });
            }
            continue;
        };
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match key {
            "name" => b.name = Some(rest.join(" ")),
            "qubits" => {
                let [n] = rest[..] else {
                    return Err(err("expected 'qubits <n>'".into()));
                };
                b.qubits = Some(n.parse().map_err(|_| err(format!("bad qubit count '{n}'")))?);
            }
            "window" => {
                let w = rest
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad window entry '{t}'"))))
                    .collect::<PqcResult<Vec<_>>>()?;
                b.window = Some(w);
            }
            "gate" => b.gates.push(parse_gate(&rest).map_err(err)?),
            "params" => {
                let v = rest
                    .iter()
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad parameter value '{t}'"))))
                    .collect::<PqcResult<Vec<_>>>()?;
                b.params = Some(v);
            }
            "end" => {
                let b = block.take().expect("inside block");
                out.push(finish(b, line_no)?);
            }
            other => return Err(err(format!("unknown record '{other}'"))),
        }
    }
    if let Some(b) = block {
        return Err(PqcError::Parse {
            line: b.start,
            msg: "block is missing 'end'".into(),
        });
    }
    Ok(out)
}

fn finish(b: Block, line: usize) -> PqcResult<NamedCircuit> {
    let err = |msg: String| PqcError::Parse { line, msg };
    let n = b.qubits.ok_or_else(|| err("missing 'qubits' record".into()))?;
    let params = b.params.unwrap_or_default();
    let mut circuit = ParamCircuit::from_gates(n, b.gates).map_err(|e| err(e.to_string()))?;
    if circuit.n_params() > params.len() {
        return Err(err(format!(
            "gates reference {} parameters but {} values given",
            circuit.n_params(),
            params.len()
        )));
    }
    if params.len() > circuit.n_params() {
        circuit = circuit.with_param_count(params.len());
    }
    if let Some(w) = b.window {
        circuit = circuit.with_window(w).map_err(|e| err(e.to_string()))?;
    }
    Ok(NamedCircuit {
        name: b.name,
        circuit,
        params,
    })
}

fn parse_angle(t: &str) -> Result<Angle, String> {
    if let Some(i) = t.strip_prefix('p') {
        return i.parse().map(Angle::Param).map_err(|_| format!("bad parameter reference '{t}'"));
    }
    if let Some(v) = t.strip_prefix('=') {
        return v.parse().map(Angle::Fixed).map_err(|_| format!("bad constant angle '{t}'"));
    }
    Err(format!("angle must be 'p<index>' or '=<value>', got '{t}'"))
}

fn parse_gate(toks: &[&str]) -> Result<Gate, String> {
    let (kind, n_q) = match toks.first().copied() {
        Some("U") => (GateKind::U, 1),
        Some("M") => (GateKind::M, 1),
        Some("CRY") => (GateKind::Cry, 2),
        Some(k) => return Err(format!("unknown gate kind '{k}'")),
        None => return Err("missing gate kind".into()),
    };
    let n_a = kind.n_angles();
    if toks.len() < 1 + n_q + n_a {
        return Err(format!("gate needs {n_q} qubit(s) and {n_a} angle(s)"));
    }
    let qs = toks[1..=n_q]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad qubit '{t}'")))
        .collect::<Result<Vec<_>, _>>()?;
    let angles = toks[1 + n_q..1 + n_q + n_a]
        .iter()
        .map(|t| parse_angle(t))
        .collect::<Result<Vec<_>, _>>()?;
    let zero = Angle::Fixed(0.0);
    let mut g = match kind {
        GateKind::U => Gate::u(qs[0], angles[0], angles[1]),
        GateKind::M => Gate::m(qs[0], angles[0], angles[1], angles[2]),
        GateKind::Cry => Gate::cry(qs[0], qs[1], angles[0]),
    };
    if kind != GateKind::M {
        g.angles[2] = zero;
    }
    for t in &toks[1 + n_q + n_a..] {
        if *t == "adj" {
            g.adjoint = true;
        } else if let Some(l) = t.strip_prefix("layer=") {
            g.layer = Some(l.parse::<LayerKind>()?);
        } else {
            return Err(format!("unexpected token '{t}'"));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::build_policy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_random_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = build_policy(4, &LayerKind::ALL).unwrap().at_offset(2);
        let p: Vec<f64> = (0..c.n_params()).map(|_| rng.gen_range(-7.0..7.0)).collect();
        let dump = render(&c, &p).unwrap();
        let (c2, p2) = dump.parse().unwrap();
        assert_eq!(c2.gates(), c.gates());
        assert_eq!(c2.window(), c.window());
        assert_eq!(p2, p);
    }

    #[test]
    fn diagram_uses_two_decimals() {
        let c = build_policy(1, &[LayerKind::RYPhaseShift]).unwrap();
        let d = render(&c, &[3.0612, 3.2749]).unwrap();
        assert!(d.text.contains("RYPhase(3.06,3.27)"), "{}", d.text);
    }

    #[test]
    fn hand_written_single_gate() {
        let text = "qcircuit v1\nqubits 2\ngate CRY 0 1 p0\nparams 1.5\nend\n";
        let (c, p) = CircuitDump { text: text.into() }.parse().unwrap();
        assert_eq!(c.gates().len(), 1);
        assert_eq!(p, vec![1.5]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "junk\nqcircuit v1\nqubits 2\ngate X 0 p0\nend\n";
        match parse_circuits(text) {
            Err(PqcError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "qcircuit v1\nqubits 2\ngate U 0 p0 p1\nparams 0.1\nend\n";
        assert!(matches!(parse_circuits(text), Err(PqcError::Parse { line: 5, .. })));
        assert!(matches!(parse_circuits("qcircuit v1\nqubits 1\n"), Err(PqcError::Parse { line: 1, .. })));
    }

    #[test]
    fn several_named_blocks() {
        let a = build_policy(2, &[LayerKind::RYPhaseShift]).unwrap();
        let b = build_policy(3, &[LayerKind::SwapLayer]).unwrap();
        let items = vec![
            NamedCircuit { name: Some("pre".into()), circuit: a.clone(), params: vec![0.1; 4] },
            NamedCircuit { name: Some("post".into()), circuit: b.clone(), params: vec![0.2] },
        ];
        let back = parse_circuits(&write_circuits(&items)).unwrap();
        assert_eq!(back, items);
    }
}
