//! Layered circuit representation on a rectangular lattice.

mod rqc;
mod text;

pub use rqc::{cz_layout, generate_rqc, GENERATOR_NAME};
pub use text::{parse_circuit, serialize_circuit};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::gates::{self, Mat2, Mat4};
use crate::peps::{GateOp, Site};

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    T,
    XHalf,
    YHalf,
    Cz,
    Custom1(Mat2),
    Custom2(Mat4),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cz | GateKind::Custom2(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    One(Site),
    Two(Site, Site),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Targets,
}

impl Gate {
    pub fn single(kind: GateKind, site: Site) -> Self {
        Gate {
            kind,
            targets: Targets::One(site),
        }
    }

    pub fn two(kind: GateKind, a: Site, b: Site) -> Self {
        Gate {
            kind,
            targets: Targets::Two(a, b),
        }
    }

    pub fn sites(&self) -> Vec<Site> {
        match self.targets {
            Targets::One(s) => vec![s],
            Targets::Two(a, b) => vec![a, b],
        }
    }

    pub fn to_op(&self) -> Result<GateOp> {
        let single = |m: Mat2| match self.targets {
            Targets::One(site) => Ok(GateOp::Single { matrix: m, site }),
            Targets::Two(..) => Err(Error::invalid("single-qubit gate given two sites")),
        };
        let two = |m: Mat4| match self.targets {
            Targets::Two(a, b) => Ok(GateOp::Two { matrix: m, a, b }),
            Targets::One(_) => Err(Error::invalid("two-qubit gate given one site")),
        };
        match &self.kind {
            GateKind::H => single(gates::hadamard()),
            GateKind::T => single(gates::t_gate()),
            GateKind::XHalf => single(gates::x_half()),
            GateKind::YHalf => single(gates::y_half()),
            GateKind::Custom1(m) => single(*m),
            GateKind::Cz => two(gates::cz()),
            GateKind::Custom2(m) => two(*m),
        }
    }
}

/// A set of gates on pairwise disjoint sites.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn new() -> Self {
        Layer::default()
    }

    pub fn try_push(&mut self, gate: Gate) -> Result<()> {
        let used: HashSet<Site> = self.gates.iter().flat_map(|g| g.sites()).collect();
        if let Some(s) = gate.sites().into_iter().find(|s| used.contains(s)) {
            return Err(Error::invalid(format!(
                "site {s:?} appears twice in one layer"
            )));
        }
        self.gates.push(gate);
        Ok(())
    }
}

/// Ordered layers on an `rows x cols` lattice. Circuits produced by the
/// random generator carry `d + 2` layers: the Hadamard layers at both ends
/// are not counted in the depth `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    rows: usize,
    cols: usize,
    layers: Vec<Layer>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

impl Circuit {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "lattice {rows}x{cols} has a zero side"
            )));
        }
        Ok(Circuit {
            rows,
            cols,
            layers: Vec::new(),
            seed: None,
            generator: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_qubits(&self) -> usize {
        self.rows * self.cols
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// `d` in the `(1 + d + 1)` notation.
    pub fn depth(&self) -> usize {
        self.layers.len().saturating_sub(2)
    }

    pub fn check_gate(&self, gate: &Gate) -> Result<()> {
        let sites = gate.sites();
        if sites.len() != gate.kind.arity() {
            return Err(Error::invalid(format!(
                "gate needs {} site(s), got {}",
                gate.kind.arity(),
                sites.len()
            )));
        }
        for &(r, c) in &sites {
            if r >= self.rows || c >= self.cols {
                return Err(Error::invalid(format!(
                    "site ({r}, {c}) outside {}x{} lattice",
                    self.rows, self.cols
                )));
            }
        }
        if let Targets::Two(a, b) = gate.targets {
            let adjacent =
                (a.0 == b.0 && a.1.abs_diff(b.1) == 1) || (a.1 == b.1 && a.0.abs_diff(b.0) == 1);
            if !adjacent {
                return Err(Error::invalid(format!(
                    "sites {a:?} and {b:?} are not nearest neighbours"
                )));
            }
        }
        Ok(())
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<()> {
        let mut checked = Layer::new();
        for g in layer.gates {
            self.check_gate(&g)?;
            checked.try_push(g)?;
        }
        self.layers.push(checked);
        Ok(())
    }

    pub fn ops(&self) -> impl Iterator<Item = Result<GateOp>> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.gates.iter().map(Gate::to_op))
    }

    /// The same circuit with every gate matrix complex-conjugated.
    pub fn conjugated(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.rows, self.cols)?;
        for layer in &self.layers {
            let mut l = Layer::new();
            for g in &layer.gates {
                let kind = match g.to_op()? {
                    GateOp::Single { matrix, .. } => GateKind::Custom1(matrix.conj()),
                    GateOp::Two { matrix, .. } => GateKind::Custom2(matrix.conj()),
                };
                l.try_push(Gate {
                    kind,
                    targets: g.targets.clone(),
                })?;
            }
            out.push_layer(l)?;
        }
        Ok(out)
    }
}

/// Layer of Hadamards on every site.
pub fn hadamard_layer(rows: usize, cols: usize) -> Layer {
    Layer {
        gates: (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Gate::single(GateKind::H, (r, c))))
            .collect(),
    }
}
