//! String diagrams as wire programs.
//!
//! A [`Circuit`] starts with `k` open input wires and applies gates (tensors
//! with designated input and output slots) to chosen wires, contracting as it
//! goes. Wires that are never touched pass through as identity kernels. The
//! finished [`LinearMap`] orders its slots as outputs (top to bottom), then
//! inputs, then any extra label slots the gates carried.

use std::fmt;

use crate::tensor::{Coefficient, Domain, GroupTensor, Kernel, TensorDiff, TensorError, Variance};

/// A step of a program for the (3,3)-relation; programs run first step first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireOp {
    /// Apply `Q` (or `Qσ` when `swapped`) to wires `at, at+1`, producing three wires.
    Q { at: usize, swapped: bool },
    /// `σ` on wires `at, at+1`.
    Swap(usize),
}

/// `(Qσ⊗id³)(id⊗Q⊗id)(σ⊗id²)(id⊗Q)`, read right to left.
pub const P33_LHS: [WireOp; 4] = [
    WireOp::Q { at: 1, swapped: false },
    WireOp::Swap(0),
    WireOp::Q { at: 1, swapped: false },
    WireOp::Q { at: 0, swapped: true },
];

/// `(id²⊗σ⊗id²)(id³⊗Qσ)(id⊗Q⊗id)(id²⊗σ)(Q⊗id)`, read right to left.
pub const P33_RHS: [WireOp; 5] = [
    WireOp::Q { at: 0, swapped: false },
    WireOp::Swap(2),
    WireOp::Q { at: 1, swapped: false },
    WireOp::Q { at: 3, swapped: true },
    WireOp::Swap(2),
];

/// A tensor used as a box: `ins` feed from wires, `outs` become wires.
#[derive(Debug, Clone)]
pub struct Gate<S: Coefficient> {
    tensor: GroupTensor<S>,
    ins: Vec<usize>,
    outs: Vec<usize>,
    extras: Vec<(usize, String)>,
}

impl<S: Coefficient> Gate<S> {
    pub fn new(
        tensor: GroupTensor<S>,
        ins: Vec<usize>,
        outs: Vec<usize>,
        extras: Vec<(usize, String)>,
    ) -> Result<Gate<S>, TensorError> {
        let mut all: Vec<usize> = ins
            .iter()
            .chain(&outs)
            .copied()
            .chain(extras.iter().map(|e| e.0))
            .collect();
        all.sort_unstable();
        if all != (0..tensor.arity()).collect::<Vec<_>>() {
            return Err(TensorError::Shape(
                "gate slots must partition the tensor's slots".into(),
            ));
        }
        if ins.iter().any(|&s| tensor.variances()[s] != Variance::Down)
            || outs.iter().any(|&s| tensor.variances()[s] != Variance::Up)
        {
            return Err(TensorError::Shape(
                "gate inputs must be down slots and outputs up slots".into(),
            ));
        }
        Ok(Gate {
            tensor,
            ins,
            outs,
            extras,
        })
    }

    /// A 5-slot `(x,u,y,v,z)` tensor as `V⊗V → V⊗V⊗V`.
    pub fn q(q: &GroupTensor<S>) -> Result<Gate<S>, TensorError> {
        Gate::new(q.clone(), vec![1, 3], vec![0, 2, 4], vec![])
    }

    /// `Qσ`: inputs crossed before `Q`.
    pub fn q_sigma(q: &GroupTensor<S>) -> Result<Gate<S>, TensorError> {
        Gate::new(q.clone(), vec![3, 1], vec![0, 2, 4], vec![])
    }

    /// A 4-slot `(out₀,out₁,in₀,in₁)` tensor as an element of `End(V⊗V)`.
    pub fn end2(t: &GroupTensor<S>) -> Result<Gate<S>, TensorError> {
        Gate::new(t.clone(), vec![2, 3], vec![0, 1], vec![])
    }

    pub fn tensor(&self) -> &GroupTensor<S> {
        &self.tensor
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Label {
    Wire(usize),
    In(usize),
    Extra(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wire {
    Input(usize),
    Open(usize),
}

/// Incrementally contracted string diagram.
#[derive(Debug, Clone)]
pub struct Circuit<S: Coefficient> {
    domain: Domain,
    n_inputs: usize,
    wires: Vec<Wire>,
    tensor: GroupTensor<S>,
    labels: Vec<Label>,
    next_wire: usize,
}

impl<S: Coefficient> Circuit<S> {
    pub fn new(domain: &Domain, n_inputs: usize) -> Circuit<S> {
        let mut tensor = GroupTensor::new(domain, vec![]);
        let one = S::from_scalar(&crate::Scalar::one(domain.ambient()));
        tensor.set(&[], one).expect("0-slot index");
        Circuit {
            domain: domain.clone(),
            n_inputs,
            wires: (0..n_inputs).map(Wire::Input).collect(),
            tensor,
            labels: vec![],
            next_wire: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.wires.len()
    }

    /// `σ` on wires `at, at+1`.
    pub fn swap(&mut self, at: usize) -> Result<(), TensorError> {
        if at + 1 >= self.wires.len() {
            return Err(TensorError::Shape(format!(
                "swap at {at} on {} wires",
                self.wires.len()
            )));
        }
        self.wires.swap(at, at + 1);
        Ok(())
    }

    /// Feeds `wires[i]` into the gate's `i`-th input. With as many outputs as
    /// inputs, output `i` replaces `wires[i]`; otherwise the wires must be
    /// contiguous and are replaced by the outputs in order.
    pub fn apply(&mut self, gate: &Gate<S>, wires: &[usize]) -> Result<(), TensorError> {
        if wires.len() != gate.ins.len() {
            return Err(TensorError::Shape(format!(
                "gate with {} inputs applied to {} wires",
                gate.ins.len(),
                wires.len()
            )));
        }
        if wires.iter().any(|&w| w >= self.wires.len()) {
            return Err(TensorError::Shape("wire out of range".into()));
        }
        let same_width = gate.ins.len() == gate.outs.len();
        let contiguous = wires.windows(2).all(|p| p[1] == p[0] + 1);
        if !same_width && !contiguous {
            return Err(TensorError::Shape(
                "width-changing gates need contiguous wires".into(),
            ));
        }
        let mut pairs = Vec::new();
        let mut gate_labels: Vec<Option<Label>> = vec![None; gate.tensor.arity()];
        for (&w, &slot) in wires.iter().zip(&gate.ins) {
            match self.wires[w] {
                Wire::Open(id) => {
                    let pos = self
                        .labels
                        .iter()
                        .position(|l| *l == Label::Wire(id))
                        .expect("open wire has a slot");
                    pairs.push((pos, slot));
                }
                Wire::Input(j) => gate_labels[slot] = Some(Label::In(j)),
            }
        }
        let mut fresh = Vec::new();
        for &slot in &gate.outs {
            gate_labels[slot] = Some(Label::Wire(self.next_wire));
            fresh.push(Wire::Open(self.next_wire));
            self.next_wire += 1;
        }
        for (slot, name) in &gate.extras {
            gate_labels[*slot] = Some(Label::Extra(name.clone()));
        }
        let bound_mine: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let bound_gate: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        self.tensor = self.tensor.contract_pairs(&gate.tensor, &pairs)?;
        let mut labels: Vec<Label> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !bound_mine.contains(i))
            .map(|(_, l)| l.clone())
            .collect();
        labels.extend(
            gate_labels
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !bound_gate.contains(i))
                .map(|(_, l)| l.expect("every gate slot labelled")),
        );
        self.labels = labels;
        if same_width {
            for (&w, f) in wires.iter().zip(fresh) {
                self.wires[w] = f;
            }
        } else {
            let start = wires[0];
            self.wires.splice(start..start + wires.len(), fresh);
        }
        Ok(())
    }

    /// Runs a (3,3)-relation program with the given `Q`.
    pub fn run(&mut self, q: &GroupTensor<S>, program: &[WireOp]) -> Result<(), TensorError> {
        let plain = Gate::q(q)?;
        let crossed = Gate::q_sigma(q)?;
        for op in program {
            match *op {
                WireOp::Q { at, swapped } => {
                    let g = if swapped { &crossed } else { &plain };
                    self.apply(g, &[at, at + 1])?;
                }
                WireOp::Swap(at) => self.swap(at)?,
            }
        }
        Ok(())
    }

    /// Orders slots as outputs, inputs, extras (extras sorted by label).
    pub fn finish(self) -> Result<LinearMap<S>, TensorError> {
        let mut tensor = self.tensor;
        let mut labels = self.labels;
        for w in &self.wires {
            if let Wire::Input(j) = *w {
                let id = Kernel::<S>::identity(&self.domain);
                tensor = tensor.outer(id.tensor())?;
                labels.push(Label::Wire(usize::MAX - j));
                labels.push(Label::In(j));
            }
        }
        let mut perm = Vec::new();
        for w in &self.wires {
            let want = match *w {
                Wire::Open(id) => Label::Wire(id),
                Wire::Input(j) => Label::Wire(usize::MAX - j),
            };
            perm.push(labels.iter().position(|l| *l == want).expect("wire slot"));
        }
        for j in 0..self.n_inputs {
            let pos = labels
                .iter()
                .position(|l| *l == Label::In(j))
                .ok_or_else(|| TensorError::Shape(format!("input {j} was never consumed")))?;
            perm.push(pos);
        }
        let mut extras: Vec<(String, usize)> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l {
                Label::Extra(name) => Some((name.clone(), i)),
                _ => None,
            })
            .collect();
        extras.sort();
        perm.extend(extras.iter().map(|e| e.1));
        Ok(LinearMap {
            tensor: tensor.permute(&perm)?,
            n_out: self.wires.len(),
            n_in: self.n_inputs,
            extras: extras.into_iter().map(|e| e.0).collect(),
        })
    }
}

/// Runs a (3,3)-relation program on three input wires.
pub fn run_program<S: Coefficient>(
    q: &GroupTensor<S>,
    program: &[WireOp],
) -> Result<LinearMap<S>, TensorError> {
    let mut c = Circuit::new(q.domain(), 3);
    c.run(q, program)?;
    c.finish()
}

/// A finished diagram: slots are outputs, then inputs, then extra labels.
#[derive(Debug, Clone)]
pub struct LinearMap<S: Coefficient> {
    pub tensor: GroupTensor<S>,
    pub n_out: usize,
    pub n_in: usize,
    pub extras: Vec<String>,
}

impl<S: Coefficient> LinearMap<S> {
    pub fn compare(&self, other: &LinearMap<S>, rel_tol: f64) -> Result<TensorDiff, TensorError> {
        if (self.n_out, self.n_in, &self.extras) != (other.n_out, other.n_in, &other.extras) {
            return Err(TensorError::Shape(format!("{self} vs {other}")));
        }
        self.tensor.compare(&other.tensor, rel_tol)
    }
}

impl<S: Coefficient> fmt::Display for LinearMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "map V^{} -> V^{}", self.n_in, self.n_out)?;
        if !self.extras.is_empty() {
            write!(f, " [{}]", self.extras.join(","))?;
        }
        Ok(())
    }
}
