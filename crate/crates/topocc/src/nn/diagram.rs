//! Tensor diagrams: directed acyclic graphs of cochain spaces whose
//! edges carry neighborhood matrices and optional trainable
//! parameters. Compiling binds a diagram to a complex; forward
//! evaluation runs in topological order and records a tape in
//! training mode.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cochain::{Activation, Cochain, Combine};
use crate::complex::CombinatorialComplex;
use crate::neighborhoods::Selector;
use crate::nn::layers::{taped_attention, taped_attention_same_rank, taped_conv, EdgeChannel};
use crate::nn::tape::{NodeId, Tape};
use crate::nn::NnError;
use crate::sparse::SparseMatrix;

/// A cochain-space node of the diagram.
#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub id: String,
    pub rank: usize,
    pub dim: usize,
}

/// What computation an edge performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Matrix application `G · H`, no parameters.
    Plain,
    /// Convolution `G · H · W`.
    Conv,
    /// Masked-softmax attention; same-rank or cross-rank is decided
    /// by the selector's ranks.
    Attention,
}

#[derive(Clone, Debug)]
pub struct EdgeSpec {
    pub src: String,
    pub dst: String,
    pub selector: Selector,
    pub kind: EdgeKind,
    /// For attention edges the score activation, otherwise a
    /// pointwise map applied to the edge contribution.
    pub activation: Activation,
    /// Use the symmetrically normalized matrix.
    pub normalized: bool,
}

/// Per-node merge behavior for nodes with incoming edges.
#[derive(Clone, Copy, Debug)]
pub struct MergeSpec {
    pub combine: Combine,
    pub activation: Activation,
}

impl Default for MergeSpec {
    fn default() -> Self {
        Self {
            combine: Combine::Sum,
            activation: Activation::Identity,
        }
    }
}

/// Unresolved diagram description; see [`DiagramSpec::parse`] for the
/// text format.
#[derive(Clone, Debug, Default)]
pub struct DiagramSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub merges: HashMap<String, MergeSpec>,
}

fn parse_activation(s: &str) -> Result<Activation, NnError> {
    match s {
        "identity" | "id" => Ok(Activation::Identity),
        "relu" => Ok(Activation::Relu),
        "tanh" => Ok(Activation::Tanh),
        "leaky_relu" | "leaky-relu" => Ok(Activation::LeakyRelu),
        other => Err(NnError::Parse(format!("unknown activation `{other}`"))),
    }
}

impl DiagramSpec {
    /// Parses the line-oriented diagram format:
    ///
    /// ```text
    /// # comment
    /// node <id> <rank> <dim>
    /// edge <src> <dst> <selector> <plain|conv|attention> [activation] [normalized]
    /// merge <id> <sum|concat> <activation>
    /// ```
    pub fn parse(text: &str) -> Result<Self, NnError> {
        let mut spec = DiagramSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| NnError::Parse(format!("line {}: {msg}", lineno + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "node" => {
                    if tokens.len() != 4 {
                        return Err(err("expected `node <id> <rank> <dim>`"));
                    }
                    spec.nodes.push(NodeSpec {
                        id: tokens[1].to_string(),
                        rank: tokens[2].parse().map_err(|_| err("bad rank"))?,
                        dim: tokens[3].parse().map_err(|_| err("bad dim"))?,
                    });
                }
                "edge" => {
                    if tokens.len() < 5 || tokens.len() > 7 {
                        return Err(err(
                            "expected `edge <src> <dst> <selector> <kind> [activation] [normalized]`",
                        ));
                    }
                    let selector: Selector = tokens[3]
                        .parse()
                        .map_err(|_| NnError::UnknownSelector(tokens[3].to_string()))?;
                    let kind = match tokens[4] {
                        "plain" => EdgeKind::Plain,
                        "conv" => EdgeKind::Conv,
                        "attention" => EdgeKind::Attention,
                        other => return Err(err(&format!("unknown edge kind `{other}`"))),
                    };
                    let mut activation = if kind == EdgeKind::Attention {
                        Activation::LeakyRelu
                    } else {
                        Activation::Identity
                    };
                    let mut normalized = false;
                    for tok in &tokens[5..] {
                        if *tok == "normalized" {
                            normalized = true;
                        } else {
                            activation = parse_activation(tok)?;
                        }
                    }
                    spec.edges.push(EdgeSpec {
                        src: tokens[1].to_string(),
                        dst: tokens[2].to_string(),
                        selector,
                        kind,
                        activation,
                        normalized,
                    });
                }
                "merge" => {
                    if tokens.len() != 4 {
                        return Err(err("expected `merge <id> <combine> <activation>`"));
                    }
                    let combine = match tokens[2] {
                        "sum" => Combine::Sum,
                        "concat" => Combine::Concat,
                        other => return Err(err(&format!("unknown combine `{other}`"))),
                    };
                    spec.merges.insert(
                        tokens[1].to_string(),
                        MergeSpec {
                            combine,
                            activation: parse_activation(tokens[3])?,
                        },
                    );
                }
                "train" => {
                    // Training config lines are parsed by TrainConfig.
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        Ok(spec)
    }
}

/// Trainable parameters of a compiled diagram: one dense matrix per
/// slot plus a gradient buffer of the same shape.
#[derive(Clone, Debug)]
pub struct ParameterStore {
    slots: Vec<Array2<f64>>,
    grads: Vec<Array2<f64>>,
    names: Vec<String>,
}

impl ParameterStore {
    fn new() -> Self {
        Self {
            slots: Vec::new(),
            grads: Vec::new(),
            names: Vec::new(),
        }
    }

    fn allocate(&mut self, name: String, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> usize {
        let bound = 1.0 / (rows as f64).sqrt();
        let value = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound));
        self.grads.push(Array2::zeros((rows, cols)));
        self.slots.push(value);
        self.names.push(name);
        self.slots.len() - 1
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, i: usize) -> &Array2<f64> {
        &self.slots[i]
    }

    pub fn slot_mut(&mut self, i: usize) -> &mut Array2<f64> {
        &mut self.slots[i]
    }

    pub fn grad(&self, i: usize) -> &Array2<f64> {
        &self.grads[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn set_grads(&mut self, grads: Vec<Array2<f64>>) {
        assert_eq!(grads.len(), self.grads.len());
        self.grads = grads;
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    /// Gradient-descent update `W -= lr * dW`.
    pub fn step(&mut self, lr: f64) {
        for (w, g) in self.slots.iter_mut().zip(&self.grads) {
            *w -= &(lr * g);
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledEdge {
    pub src: usize,
    pub dst: usize,
    pub selector: Selector,
    pub kind: EdgeKind,
    pub activation: Activation,
    pub matrix: Arc<SparseMatrix>,
    pub channel: EdgeChannel,
    /// Weight slot (conv and attention source side).
    pub w: Option<usize>,
    /// Companion-side weight slot (cross-rank attention only).
    pub w_companion: Option<usize>,
    /// Attention vector slot.
    pub a: Option<usize>,
    /// Input node providing the companion cochain for cross-rank
    /// attention.
    pub companion: Option<usize>,
    /// Edge output feature dimension.
    pub out_dim: usize,
}

/// A diagram bound to a complex with resolved matrices, allocated
/// parameters, and a cached topological order.
#[derive(Clone, Debug)]
pub struct CompiledDiagram {
    pub(crate) nodes: Vec<NodeSpec>,
    pub(crate) merges: Vec<MergeSpec>,
    pub(crate) edges: Vec<CompiledEdge>,
    pub(crate) topo: Vec<usize>,
    pub(crate) heights: Vec<usize>,
    pub(crate) params: ParameterStore,
}

/// Compiles a diagram spec on a complex, resolving every selector,
/// checking shapes, and allocating seeded parameters.
pub fn compile_diagram(
    spec: &DiagramSpec,
    cc: &CombinatorialComplex,
    seed: u64,
) -> Result<CompiledDiagram, NnError> {
    let index: HashMap<&str, usize> = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    if index.len() != spec.nodes.len() {
        return Err(NnError::Parse("duplicate node id".into()));
    }
    let node_of = |id: &str| -> Result<usize, NnError> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| NnError::Parse(format!("unknown node `{id}`")))
    };

    let mut indegree = vec![0usize; spec.nodes.len()];
    let mut raw_edges = Vec::new();
    for e in &spec.edges {
        let (src, dst) = (node_of(&e.src)?, node_of(&e.dst)?);
        indegree[dst] += 1;
        raw_edges.push((src, dst));
    }

    // Kahn's algorithm; leftover nodes mean a cycle.
    let mut topo = Vec::new();
    let mut degree = indegree.clone();
    let mut ready: Vec<usize> = (0..spec.nodes.len()).filter(|&n| degree[n] == 0).collect();
    while let Some(n) = ready.pop() {
        topo.push(n);
        for &(src, dst) in &raw_edges {
            if src == n {
                degree[dst] -= 1;
                if degree[dst] == 0 {
                    ready.push(dst);
                }
            }
        }
    }
    if topo.len() != spec.nodes.len() {
        return Err(NnError::CycleDetected);
    }

    // Longest source-to-node path, walked in topological order.
    let mut heights = vec![0usize; spec.nodes.len()];
    for &n in &topo {
        for &(src, dst) in &raw_edges {
            if dst == n {
                heights[n] = heights[n].max(heights[src] + 1);
            }
        }
    }
    topo.sort_by_key(|&n| (heights[n], n));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterStore::new();
    let mut edges = Vec::new();
    for (e, &(src, dst)) in spec.edges.iter().zip(&raw_edges) {
        let (src_node, dst_node) = (&spec.nodes[src], &spec.nodes[dst]);
        let (dom, cod) = e.selector.map_ranks();
        if dom != src_node.rank || cod != dst_node.rank {
            return Err(NnError::ShapeMismatch(format!(
                "edge {}->{}: selector {} maps rank {} to {}, nodes have ranks {} and {}",
                e.src, e.dst, e.selector, dom, cod, src_node.rank, dst_node.rank
            )));
        }
        let resolved = e.selector.resolve(cc)?;
        let matrix = if e.normalized {
            Arc::new(resolved.matrix().sym_normalized())
        } else {
            Arc::new(resolved.matrix().clone())
        };
        let channel = EdgeChannel::from_sparse(&matrix);

        let merge = spec.merges.get(&dst_node.id).copied().unwrap_or_default();
        let share = match merge.combine {
            Combine::Sum => dst_node.dim,
            Combine::Concat => {
                if dst_node.dim % indegree[dst] != 0 {
                    return Err(NnError::ShapeMismatch(format!(
                        "concat at `{}` needs dim {} divisible by in-degree {}",
                        dst_node.id, dst_node.dim, indegree[dst]
                    )));
                }
                dst_node.dim / indegree[dst]
            }
        };

        let mut edge = CompiledEdge {
            src,
            dst,
            selector: e.selector,
            kind: e.kind,
            activation: e.activation,
            matrix,
            channel,
            w: None,
            w_companion: None,
            a: None,
            companion: None,
            out_dim: share,
        };
        match e.kind {
            EdgeKind::Plain => {
                if src_node.dim != share {
                    return Err(NnError::ShapeMismatch(format!(
                        "plain edge {}->{} carries dim {} into a slot of dim {}",
                        e.src, e.dst, src_node.dim, share
                    )));
                }
            }
            EdgeKind::Conv => {
                let name = format!("W[{}->{}:{}]", e.src, e.dst, e.selector);
                edge.w = Some(params.allocate(name, src_node.dim, share, &mut rng));
            }
            EdgeKind::Attention => {
                let name = format!("W[{}->{}:{}]", e.src, e.dst, e.selector);
                edge.w = Some(params.allocate(name, src_node.dim, share, &mut rng));
                if src_node.rank != dst_node.rank {
                    // Cross-rank attention needs destination-side
                    // features from an input node of the same rank.
                    let companion = spec
                        .nodes
                        .iter()
                        .position(|n| n.rank == dst_node.rank && indegree[index[n.id.as_str()]] == 0)
                        .ok_or_else(|| {
                            NnError::ShapeMismatch(format!(
                                "cross-rank attention edge {}->{} needs an input node of rank {}",
                                e.src, e.dst, dst_node.rank
                            ))
                        })?;
                    let comp_dim = spec.nodes[companion].dim;
                    let wt = format!("Wt[{}->{}:{}]", e.src, e.dst, e.selector);
                    edge.w_companion = Some(params.allocate(wt, comp_dim, share, &mut rng));
                    edge.companion = Some(companion);
                }
                let a_name = format!("a[{}->{}:{}]", e.src, e.dst, e.selector);
                edge.a = Some(params.allocate(a_name, 2 * share, 1, &mut rng));
            }
        }
        edges.push(edge);
    }

    let merges = spec
        .nodes
        .iter()
        .map(|n| spec.merges.get(&n.id).copied().unwrap_or_default())
        .collect();

    Ok(CompiledDiagram {
        nodes: spec.nodes.clone(),
        merges,
        edges,
        topo,
        heights,
        params,
    })
}

/// Evaluation mode: training retains the tape for a backward sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Result of a forward pass: node values plus, in training mode, the
/// tape and bookkeeping needed to differentiate.
pub struct ForwardRun {
    outputs: HashMap<String, Cochain>,
    values: Vec<Cochain>,
    tape: Option<Tape>,
    node_tape_ids: Vec<NodeId>,
    param_tape_ids: Vec<NodeId>,
    node_index: HashMap<String, usize>,
    n_params: usize,
}

impl CompiledDiagram {
    pub fn params(&self) -> &ParameterStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterStore {
        &mut self.params
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    pub fn node_rank(&self, id: &str) -> Option<usize> {
        self.nodes.iter().find(|n| n.id == id).map(|n| n.rank)
    }

    pub fn height(&self) -> usize {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    /// Source nodes: in-degree zero, they require input cochains.
    pub fn source_nodes(&self) -> Vec<&str> {
        (0..self.nodes.len())
            .filter(|&n| self.edges.iter().all(|e| e.dst != n))
            .map(|n| self.nodes[n].id.as_str())
            .collect()
    }

    /// Target nodes: out-degree zero, they form the output.
    pub fn target_nodes(&self) -> Vec<&str> {
        (0..self.nodes.len())
            .filter(|&n| self.edges.iter().all(|e| e.src != n))
            .map(|n| self.nodes[n].id.as_str())
            .collect()
    }

    /// Runs the diagram on the given source cochains.
    pub fn forward(
        &self,
        inputs: &HashMap<String, Cochain>,
        mode: Mode,
    ) -> Result<ForwardRun, NnError> {
        self.forward_with(&self.params, inputs, mode)
    }

    /// Runs the diagram with an external parameter store of the same
    /// shape, so weights can be shared across diagrams compiled from
    /// one spec on different complexes.
    pub fn forward_with(
        &self,
        params: &ParameterStore,
        inputs: &HashMap<String, Cochain>,
        mode: Mode,
    ) -> Result<ForwardRun, NnError> {
        if params.len() != self.params.len() {
            return Err(NnError::ShapeMismatch(format!(
                "parameter store has {} slots, diagram expects {}",
                params.len(),
                self.params.len()
            )));
        }
        let mut tape = Tape::new();
        let param_tape_ids: Vec<NodeId> = (0..params.len())
            .map(|i| tape.leaf(params.slot(i).clone()))
            .collect();

        let n = self.nodes.len();
        let mut node_value: Vec<Option<NodeId>> = vec![None; n];
        let node_index: HashMap<String, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();

        // Bind inputs to in-degree-zero nodes.
        for (i, node) in self.nodes.iter().enumerate() {
            let indeg = self.edges.iter().filter(|e| e.dst == i).count();
            if indeg == 0 {
                let Some(h) = inputs.get(&node.id) else {
                    return Err(NnError::MissingInput(node.id.clone()));
                };
                if h.rank() != node.rank || h.dim() != node.dim {
                    return Err(NnError::ShapeMismatch(format!(
                        "input for `{}` must be rank {} dim {}, got rank {} dim {}",
                        node.id,
                        node.rank,
                        node.dim,
                        h.rank(),
                        h.dim()
                    )));
                }
                node_value[i] = Some(tape.leaf(h.data().clone()));
            }
        }

        for &nid in &self.topo {
            if node_value[nid].is_some() {
                continue;
            }
            let incoming: Vec<&CompiledEdge> =
                self.edges.iter().filter(|e| e.dst == nid).collect();
            let mut contributions = Vec::with_capacity(incoming.len());
            for edge in incoming {
                let src_val = node_value[edge.src].ok_or(NnError::CycleDetected)?;
                let contrib = match edge.kind {
                    EdgeKind::Plain => {
                        let v = tape.spmul(edge.matrix.clone(), src_val);
                        tape.activation(edge.activation, v)
                    }
                    EdgeKind::Conv => {
                        let w = param_tape_ids[edge.w.unwrap()];
                        let v = taped_conv(&mut tape, &edge.matrix, src_val, w);
                        tape.activation(edge.activation, v)
                    }
                    EdgeKind::Attention => {
                        let w = param_tape_ids[edge.w.unwrap()];
                        let a = param_tape_ids[edge.a.unwrap()];
                        let d = edge.out_dim;
                        match edge.companion {
                            None => taped_attention_same_rank(
                                &mut tape,
                                &edge.channel,
                                src_val,
                                w,
                                a,
                                d,
                                edge.activation,
                            ),
                            Some(comp) => {
                                // Cross rank: rows are destination
                                // cells scored by the companion
                                // projection through the second block
                                // of `a`, columns are source cells
                                // scored by the first block.
                                let comp_val =
                                    node_value[comp].ok_or(NnError::CycleDetected)?;
                                let wt = param_tape_ids[edge.w_companion.unwrap()];
                                let p_src = tape.matmul(src_val, w);
                                let a_first = tape.slice_rows(a, 0, d);
                                let a_second = tape.slice_rows(a, d, d);
                                let p_comp = tape.matmul(comp_val, wt);
                                let l = tape.matmul(p_comp, a_second);
                                let r = tape.matmul(p_src, a_first);
                                taped_attention(
                                    &mut tape,
                                    &edge.channel,
                                    p_src,
                                    l,
                                    r,
                                    edge.activation,
                                )
                            }
                        }
                    }
                };
                contributions.push(contrib);
            }
            let merge = &self.merges[nid];
            let mut combined = contributions[0];
            for &c in &contributions[1..] {
                combined = match merge.combine {
                    Combine::Sum => tape.add(combined, c),
                    Combine::Concat => tape.concat(combined, c),
                };
            }
            node_value[nid] = Some(tape.activation(merge.activation, combined));
        }

        let values: Vec<Cochain> = (0..n)
            .map(|i| {
                Cochain::new(
                    self.nodes[i].rank,
                    tape.value(node_value[i].unwrap()).clone(),
                )
            })
            .collect();
        let outputs = self
            .target_nodes()
            .into_iter()
            .map(|id| (id.to_string(), values[node_index[id]].clone()))
            .collect();

        Ok(ForwardRun {
            outputs,
            values,
            tape: if mode == Mode::Train { Some(tape) } else { None },
            node_tape_ids: node_value.into_iter().map(Option::unwrap).collect(),
            param_tape_ids,
            node_index,
            n_params: self.params.len(),
        })
    }

    /// Applies a rank-preserving permutation action: every edge
    /// matrix `G` becomes `P_cod G P_dom^T` and parameters are kept.
    /// `perms[rank][i]` is the original index of the cell that lands
    /// at position `i`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> CompiledDiagram {
        let mut out = self.clone();
        for edge in &mut out.edges {
            let (dom, cod) = edge.selector.map_ranks();
            let p_cod = &perms[cod];
            let p_dom = &perms[dom];
            let inv = |p: &[usize]| {
                let mut inv = vec![0usize; p.len()];
                for (new, &old) in p.iter().enumerate() {
                    inv[old] = new;
                }
                inv
            };
            let (inv_cod, inv_dom) = (inv(p_cod), inv(p_dom));
            let m = SparseMatrix::from_triplets(
                edge.matrix.rows(),
                edge.matrix.cols(),
                edge.matrix
                    .triplets()
                    .map(|(i, j, v)| (inv_cod[i], inv_dom[j], v)),
            );
            edge.channel = EdgeChannel::from_sparse(&m);
            edge.matrix = Arc::new(m);
        }
        out
    }

    /// Applies an orientation action: every edge matrix `G` becomes
    /// `D_cod G D_dom` for diagonal ±1 matrices given per rank
    /// (rank 0 must be all ones).
    pub fn orientation_transformed(&self, signs: &[Vec<f64>]) -> CompiledDiagram {
        let mut out = self.clone();
        for edge in &mut out.edges {
            let (dom, cod) = edge.selector.map_ranks();
            let m = SparseMatrix::from_triplets(
                edge.matrix.rows(),
                edge.matrix.cols(),
                edge.matrix
                    .triplets()
                    .map(|(i, j, v)| (i, j, signs[cod][i] * v * signs[dom][j])),
            );
            edge.channel = EdgeChannel::from_sparse(&m);
            edge.matrix = Arc::new(m);
        }
        out
    }
}

impl ForwardRun {
    pub fn outputs(&self) -> &HashMap<String, Cochain> {
        &self.outputs
    }

    pub fn output(&self, id: &str) -> Option<&Cochain> {
        self.outputs.get(id)
    }

    pub fn value(&self, id: &str) -> Option<&Cochain> {
        self.node_index.get(id).map(|&i| &self.values[i])
    }

    /// Records a mean-over-cells readout of a node (training mode).
    pub fn readout_mean(&mut self, id: &str) -> Result<NodeId, NnError> {
        let tape = self.tape.as_mut().ok_or(NnError::StaleTape)?;
        let node = *self
            .node_index
            .get(id)
            .ok_or_else(|| NnError::MissingInput(id.to_string()))?;
        Ok(tape.mean_rows(self.node_tape_ids[node]))
    }

    /// Records scalar cross-entropy of a single-row logit node.
    pub fn cross_entropy(&mut self, logits: NodeId, target: usize) -> Result<NodeId, NnError> {
        let tape = self.tape.as_mut().ok_or(NnError::StaleTape)?;
        Ok(tape.cross_entropy_logits(logits, target))
    }

    /// Records mean squared error of a node against a fixed target.
    pub fn mse(&mut self, id: &str, target: &Array2<f64>) -> Result<NodeId, NnError> {
        let tape = self.tape.as_mut().ok_or(NnError::StaleTape)?;
        let node = *self
            .node_index
            .get(id)
            .ok_or_else(|| NnError::MissingInput(id.to_string()))?;
        Ok(tape.mse(self.node_tape_ids[node], target))
    }

    pub fn scalar(&self, id: NodeId) -> Result<f64, NnError> {
        let tape = self.tape.as_ref().ok_or(NnError::StaleTape)?;
        Ok(tape.scalar(id))
    }

    /// Reverse sweep from a recorded scalar; returns one gradient per
    /// parameter slot.
    pub fn backward_scalar(mut self, loss: NodeId) -> Result<Vec<Array2<f64>>, NnError> {
        let mut tape = self.tape.take().ok_or(NnError::StaleTape)?;
        let grads = tape.backward(loss)?;
        Ok(self
            .param_tape_ids
            .iter()
            .take(self.n_params)
            .map(|&id| grads[id].clone())
            .collect())
    }

    /// Reverse sweep seeded with explicit output-cochain gradients.
    pub fn backward_outputs(
        mut self,
        seeds: &HashMap<String, Array2<f64>>,
    ) -> Result<Vec<Array2<f64>>, NnError> {
        let mut tape = self.tape.take().ok_or(NnError::StaleTape)?;
        let mut seeded = Vec::new();
        for (id, seed) in seeds {
            let node = *self
                .node_index
                .get(id)
                .ok_or_else(|| NnError::MissingInput(id.clone()))?;
            seeded.push((self.node_tape_ids[node], seed.clone()));
        }
        let grads = tape.backward_seeded(&seeded)?;
        Ok(self
            .param_tape_ids
            .iter()
            .take(self.n_params)
            .map(|&id| grads[id].clone())
            .collect())
    }
}

/// Per-layer classification of a diagram decomposed at node heights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerLabel {
    PoolingOne,
    LowestRankPreservingOne,
    UnpoolingOne,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramClass {
    PoolingCcnn,
    UnpoolingCcnn,
    Neither,
}

/// Classifies a diagram as pooling, unpooling, or neither by
/// decomposing it into height-one layers (edges grouped by target
/// height; each layer's domain is the set of its edge sources).
pub fn classify_diagram(diagram: &CompiledDiagram) -> (DiagramClass, Vec<LayerLabel>) {
    let max_height = diagram.height();
    let mut labels = Vec::new();
    for level in 1..=max_height {
        let layer: Vec<&CompiledEdge> = diagram
            .edges
            .iter()
            .filter(|e| diagram.heights[e.dst] == level)
            .collect();
        if layer.is_empty() {
            continue;
        }
        let i_min = layer
            .iter()
            .map(|e| diagram.nodes[e.src].rank)
            .min()
            .unwrap();
        let j_min = layer
            .iter()
            .map(|e| diagram.nodes[e.dst].rank)
            .min()
            .unwrap();
        let has_qualifying_edge = layer.iter().any(|e| {
            diagram.nodes[e.src].rank == i_min && diagram.nodes[e.dst].rank >= j_min
        });
        let label = if i_min < j_min && has_qualifying_edge {
            LayerLabel::PoolingOne
        } else if i_min > j_min && has_qualifying_edge {
            LayerLabel::UnpoolingOne
        } else if i_min == j_min {
            LayerLabel::LowestRankPreservingOne
        } else {
            LayerLabel::Other
        };
        labels.push(label);
    }
    let class = if labels.contains(&LayerLabel::PoolingOne)
        && labels
            .iter()
            .all(|l| matches!(l, LayerLabel::PoolingOne | LayerLabel::LowestRankPreservingOne))
    {
        DiagramClass::PoolingCcnn
    } else if labels.contains(&LayerLabel::UnpoolingOne)
        && labels.iter().all(|l| {
            matches!(
                l,
                LayerLabel::UnpoolingOne | LayerLabel::LowestRankPreservingOne
            )
        })
    {
        DiagramClass::UnpoolingCcnn
    } else {
        DiagramClass::Neither
    };
    (class, labels)
}
