use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Index of a variable inside its [`MilpModel`].
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    /// Canonical name, e.g. `x[3,e1,2]`.
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Constraint families of the formulation, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Selection,
    ArcParent,
    ArcChild,
    ArcBoth,
    Precedence,
    Completion,
    Deadline,
    NonoverlapFwd,
    NonoverlapBwd,
    ExecSelect,
    ExecStart,
    ExecEnd,
    ExecBefore,
    ExecAfter,
    Capability,
    Memory,
    Storage,
    Energy,
}

impl Tag {
    pub const ALL: [Tag; 18] = [
        Tag::Selection,
        Tag::ArcParent,
        Tag::ArcChild,
        Tag::ArcBoth,
        Tag::Precedence,
        Tag::Completion,
        Tag::Deadline,
        Tag::NonoverlapFwd,
        Tag::NonoverlapBwd,
        Tag::ExecSelect,
        Tag::ExecStart,
        Tag::ExecEnd,
        Tag::ExecBefore,
        Tag::ExecAfter,
        Tag::Capability,
        Tag::Memory,
        Tag::Storage,
        Tag::Energy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Selection => "selection",
            Tag::ArcParent => "arc-parent",
            Tag::ArcChild => "arc-child",
            Tag::ArcBoth => "arc-both",
            Tag::Precedence => "precedence",
            Tag::Completion => "completion",
            Tag::Deadline => "deadline",
            Tag::NonoverlapFwd => "nonoverlap-fwd",
            Tag::NonoverlapBwd => "nonoverlap-bwd",
            Tag::ExecSelect => "exec-select",
            Tag::ExecStart => "exec-start",
            Tag::ExecEnd => "exec-end",
            Tag::ExecBefore => "exec-before",
            Tag::ExecAfter => "exec-after",
            Tag::Capability => "capability",
            Tag::Memory => "memory",
            Tag::Storage => "storage",
            Tag::Energy => "energy",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    /// Unique row name: the tag followed by a per-family counter.
    pub name: String,
    pub tag: Tag,
    pub terms: Vec<(f64, VarId)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, v)| c * values[v]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Maps ETG entities to their variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeMap {
    /// Selection variable per candidate node.
    pub x: Vec<VarId>,
    /// Selection variable per candidate arc.
    pub xa: Vec<VarId>,
    /// Start time per dense task index.
    pub t: Vec<VarId>,
    pub makespan: VarId,
    /// Ordering variable per task pair `(i, j)`, `i < j` (dense indices).
    pub xo: BTreeMap<(usize, usize), VarId>,
    /// Execution indicator per (event task, candidate node), row-major.
    pub xe: Vec<VarId>,
    /// Helper binary per (event task, candidate node), row-major.
    pub xh: Vec<VarId>,
    pub num_nodes: usize,
}

impl DecodeMap {
    pub fn xe(&self, event: usize, node: usize) -> VarId {
        self.xe[event * self.num_nodes + node]
    }

    pub fn xh(&self, event: usize, node: usize) -> VarId {
        self.xh[event * self.num_nodes + node]
    }
}

/// A solver-agnostic mixed-integer linear program minimizing the makespan.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub(crate) variables: Vec<Variable>,
    pub(crate) index: HashMap<String, VarId>,
    pub(crate) constraints: Vec<LinearConstraint>,
    pub(crate) counters: BTreeMap<Tag, usize>,
    pub(crate) big_m: f64,
    pub(crate) epsilon: f64,
    pub(crate) decode: DecodeMap,
}

impl MilpModel {
    pub(crate) fn empty(big_m: f64, epsilon: f64) -> Self {
        MilpModel {
            variables: Vec::new(),
            index: HashMap::new(),
            constraints: Vec::new(),
            counters: BTreeMap::new(),
            big_m,
            epsilon,
            decode: DecodeMap::default(),
        }
    }

    pub(crate) fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: Option<f64>) -> VarId {
        let id = self.variables.len();
        let prev = self.index.insert(name.clone(), id);
        debug_assert!(prev.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub(crate) fn binary(&mut self, name: String) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, Some(1.0))
    }

    /// Adds a constraint after merging repeated variables and dropping zero
    /// coefficients. A row left without terms is dropped (it is a constant
    /// comparison that the builder only produces when it holds).
    pub(crate) fn add(&mut self, tag: Tag, terms: Vec<(f64, VarId)>, sense: Sense, rhs: f64) {
        let mut merged: Vec<(f64, VarId)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match merged.iter_mut().find(|(_, w)| *w == v) {
                Some(e) => e.0 += c,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|&(c, _)| c != 0.0);
        debug_assert!(merged.iter().all(|(c, _)| c.is_finite()) && rhs.is_finite());
        if merged.is_empty() {
            return;
        }
        let k = self.counters.entry(tag).or_insert(0);
        *k += 1;
        let name = format!("{}_{}", tag.as_str().replace('-', "_"), k);
        self.constraints.push(LinearConstraint { name, tag, terms: merged, sense, rhs });
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// The objective is always "minimize T"; this is T's variable.
    pub fn objective(&self) -> VarId {
        self.decode.makespan
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn decode_map(&self) -> &DecodeMap {
        &self.decode
    }

    /// Number of constraints per family.
    pub fn counts(&self) -> BTreeMap<Tag, usize> {
        let mut out: BTreeMap<Tag, usize> = Tag::ALL.iter().map(|&t| (t, 0)).collect();
        for c in &self.constraints {
            *out.entry(c.tag).or_default() += 1;
        }
        out
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.constraints.iter().filter(|c| c.tag == tag).count()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Constraints violated by more than `tol`, with their violation.
    pub fn check_assignment(&self, values: &[f64], tol: f64) -> Vec<(&LinearConstraint, f64)> {
        let mut out: Vec<(&LinearConstraint, f64)> = self
            .constraints
            .iter()
            .map(|c| (c, c.violation(values)))
            .filter(|&(_, v)| v > tol)
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }

    /// Variables whose value lies outside their bounds by more than `tol`.
    pub fn bound_violations(&self, values: &[f64], tol: f64) -> Vec<(&Variable, f64)> {
        self.variables
            .iter()
            .zip(values)
            .filter_map(|(var, &v)| {
                let below = var.lower - v;
                let above = var.upper.map_or(f64::NEG_INFINITY, |u| v - u);
                let worst = below.max(above);
                (worst > tol).then_some((var, worst))
            })
            .collect()
    }
}
