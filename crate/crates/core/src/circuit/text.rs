//! Line-oriented circuit text format.
//!
//! ```text
//! lattice <rows> <cols>
//! seed <u64>                  (optional)
//! generator <name>            (optional)
//! layer
//! h <r> <c> | t <r> <c> | x2 <r> <c> | y2 <r> <c>
//! cz <r1> <c1> <r2> <c2>
//! u1 <r> <c> <8 floats: re im, row-major 2x2>
//! u2 <r1> <c1> <r2> <c2> <32 floats: re im, row-major 4x4>
//! ```
//!
//! `#` starts a comment. Custom two-qubit matrices are indexed
//! `[t1 t2 ; s1 s2]` with the first listed site as qubit 1.

use std::fmt::Write as _;

use num_traits::Zero;

use super::{Circuit, Gate, GateKind, Layer, Targets};
use crate::error::{Error, Result};
use crate::gates::{Mat2, Mat4};
use crate::tensor::C64;

pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lattice {} {}", circuit.rows(), circuit.cols());
    if let Some(seed) = circuit.seed {
        let _ = writeln!(out, "seed {seed}");
    }
    if let Some(g) = &circuit.generator {
        let _ = writeln!(out, "generator {g}");
    }
    for layer in circuit.layers() {
        out.push_str("layer\n");
        for g in &layer.gates {
            let sites = match g.targets {
                Targets::One((r, c)) => format!("{r} {c}"),
                Targets::Two((r1, c1), (r2, c2)) => format!("{r1} {c1} {r2} {c2}"),
            };
            let line = match &g.kind {
                GateKind::H => format!("h {sites}"),
                GateKind::T => format!("t {sites}"),
                GateKind::XHalf => format!("x2 {sites}"),
                GateKind::YHalf => format!("y2 {sites}"),
                GateKind::Cz => format!("cz {sites}"),
                GateKind::Custom1(m) => format!("u1 {sites}{}", floats(&m.0)),
                GateKind::Custom2(m) => format!("u2 {sites}{}", floats(&m.0)),
            };
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

fn floats(values: &[C64]) -> String {
    values.iter().fold(String::new(), |mut s, z| {
        let _ = write!(s, " {:?} {:?}", z.re, z.im);
        s
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            format!("expected a non-negative integer, got {tok:?}"),
        )
    })
}

fn parse_matrix<const N: usize>(toks: &[&str], line: usize) -> Result<[C64; N]> {
    if toks.len() != 2 * N {
        return Err(parse_err(
            line,
            format!("expected {} floats, got {}", 2 * N, toks.len()),
        ));
    }
    let mut m = [C64::zero(); N];
    for (k, z) in m.iter_mut().enumerate() {
        let re: f64 = toks[2 * k]
            .parse()
            .map_err(|_| parse_err(line, format!("bad float {:?}", toks[2 * k])))?;
        let im: f64 = toks[2 * k + 1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad float {:?}", toks[2 * k + 1])))?;
        *z = C64::new(re, im);
    }
    Ok(m)
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut current: Option<Layer> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (head, args) = (toks[0], &toks[1..]);

        let Some(c) = circuit.as_mut() else {
            if head != "lattice" || args.len() != 2 {
                return Err(parse_err(line_no, "expected `lattice <rows> <cols>` first"));
            }
            let rows = parse_usize(args[0], line_no)?;
            let cols = parse_usize(args[1], line_no)?;
            circuit =
                Some(Circuit::new(rows, cols).map_err(|e| parse_err(line_no, e.to_string()))?);
            continue;
        };

        match head {
            "lattice" => return Err(parse_err(line_no, "duplicate `lattice` line")),
            "seed" | "generator" if current.is_some() || !c.layers().is_empty() => {
                return Err(parse_err(
                    line_no,
                    format!("`{head}` must precede the first layer"),
                ));
            }
            "seed" => {
                let [s] = args else {
                    return Err(parse_err(line_no, "expected `seed <u64>`"));
                };
                c.seed = Some(
                    s.parse()
                        .map_err(|_| parse_err(line_no, format!("bad seed {s:?}")))?,
                );
            }
            "generator" => {
                let [name] = args else {
                    return Err(parse_err(line_no, "expected `generator <name>`"));
                };
                c.generator = Some(name.to_string());
            }
            "layer" => {
                if !args.is_empty() {
                    return Err(parse_err(line_no, "`layer` takes no arguments"));
                }
                if let Some(l) = current.take() {
                    c.push_layer(l)
                        .map_err(|e| parse_err(line_no, e.to_string()))?;
                }
                current = Some(Layer::new());
            }
            _ => {
                let gate = parse_gate(head, args, line_no)?;
                let Some(layer) = current.as_mut() else {
                    return Err(parse_err(line_no, "gate before the first `layer`"));
                };
                c.check_gate(&gate)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
                layer
                    .try_push(gate)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
            }
        }
    }
    let mut circuit = circuit.ok_or_else(|| parse_err(1, "missing `lattice` line"))?;
    if let Some(l) = current {
        circuit.push_layer(l)?;
    }
    Ok(circuit)
}

fn parse_gate(head: &str, args: &[&str], line: usize) -> Result<Gate> {
    let site = |k: usize| -> Result<(usize, usize)> {
        Ok((parse_usize(args[k], line)?, parse_usize(args[k + 1], line)?))
    };
    let single = |kind: GateKind| -> Result<Gate> {
        if args.len() != 2 {
            return Err(parse_err(line, format!("`{head}` expects <row> <col>")));
        }
        Ok(Gate::single(kind, site(0)?))
    };
    match head {
        "h" => single(GateKind::H),
        "t" => single(GateKind::T),
        "x2" => single(GateKind::XHalf),
        "y2" => single(GateKind::YHalf),
        "cz" => {
            if args.len() != 4 {
                return Err(parse_err(line, "`cz` expects <r1> <c1> <r2> <c2>"));
            }
            Ok(Gate::two(GateKind::Cz, site(0)?, site(2)?))
        }
        "u1" => {
            if args.len() < 2 {
                return Err(parse_err(line, "`u1` expects <row> <col> and 8 floats"));
            }
            let m = parse_matrix::<4>(&args[2..], line)?;
            Ok(Gate::single(GateKind::Custom1(Mat2(m)), site(0)?))
        }
        "u2" => {
            if args.len() < 4 {
                return Err(parse_err(line, "`u2` expects two sites and 32 floats"));
            }
            let m = parse_matrix::<16>(&args[4..], line)?;
            Ok(Gate::two(GateKind::Custom2(Mat4(m)), site(0)?, site(2)?))
        }
        other => Err(parse_err(line, format!("unknown gate {other:?}"))),
    }
}
