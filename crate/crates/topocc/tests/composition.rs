//! A diagram of height n evaluates to the composition of its n
//! height-one layers run separately with the same parameters.

mod common;

use std::collections::HashMap;

use common::{max_abs_diff, random_inputs};
use topocc::cochain::Cochain;
use topocc::complex::example_cc;
use topocc::nn::{compile_diagram, CompiledDiagram, DiagramSpec, Mode};

/// Copies parameter slots from the full diagram into a layer diagram,
/// given the slot offset of the layer's first edge parameter.
fn copy_params(full: &CompiledDiagram, layer: &mut CompiledDiagram, offset: usize) {
    for i in 0..layer.params().len() {
        let source = full.params().slot(offset + i).clone();
        *layer.params_mut().slot_mut(i) = source;
    }
}

#[test]
fn two_layer_chain_composes() {
    let cc = example_cc();
    let whole = DiagramSpec::parse(
        "\
node v 0 2
node e 1 3
node f 2 4
edge v e B0,1^T conv tanh
edge e f B1,2^T conv identity
",
    )
    .unwrap();
    let layer1 = DiagramSpec::parse(
        "node v 0 2\nnode e 1 3\nedge v e B0,1^T conv tanh\n",
    )
    .unwrap();
    let layer2 = DiagramSpec::parse(
        "node e 1 3\nnode f 2 4\nedge e f B1,2^T conv identity\n",
    )
    .unwrap();

    let full = compile_diagram(&whole, &cc, 12).unwrap();
    let mut first = compile_diagram(&layer1, &cc, 0).unwrap();
    let mut second = compile_diagram(&layer2, &cc, 0).unwrap();
    copy_params(&full, &mut first, 0);
    copy_params(&full, &mut second, 1);

    let inputs = random_inputs(&cc, &[("v", 0, 2)], 5);
    let run = full.forward(&inputs, Mode::Infer).unwrap();

    let mid = first.forward(&inputs, Mode::Infer).unwrap();
    let mid_e = mid.output("e").unwrap().clone();
    assert!(max_abs_diff(run.value("e").unwrap(), &mid_e) <= 1e-12);

    let second_inputs: HashMap<String, Cochain> = [("e".to_string(), mid_e)].into();
    let out = second.forward(&second_inputs, Mode::Infer).unwrap();
    assert!(max_abs_diff(run.output("f").unwrap(), out.output("f").unwrap()) <= 1e-12);
}

#[test]
fn split_merge_diagram_composes() {
    // Split a 1-cochain to ranks 0, 1, 2, then merge back: the two
    // height-one layers evaluated separately must reproduce the full
    // forward pass.
    let cc = example_cc();
    let whole = DiagramSpec::parse(
        "\
node e 1 2
node v 0 2
node mid 1 2
node f 2 2
node out 1 2
edge e v B0,1 conv tanh
edge e mid A1,1 conv tanh
edge e f B1,2^T conv tanh
edge v out B0,1^T conv identity
edge mid out Id1 conv identity
edge f out B1,2 conv identity
merge out sum tanh
",
    )
    .unwrap();
    let layer1 = DiagramSpec::parse(
        "\
node e 1 2
node v 0 2
node mid 1 2
node f 2 2
edge e v B0,1 conv tanh
edge e mid A1,1 conv tanh
edge e f B1,2^T conv tanh
",
    )
    .unwrap();
    let layer2 = DiagramSpec::parse(
        "\
node v 0 2
node mid 1 2
node f 2 2
node out 1 2
edge v out B0,1^T conv identity
edge mid out Id1 conv identity
edge f out B1,2 conv identity
merge out sum tanh
",
    )
    .unwrap();

    let full = compile_diagram(&whole, &cc, 23).unwrap();
    assert_eq!(full.height(), 2);
    let mut first = compile_diagram(&layer1, &cc, 0).unwrap();
    let mut second = compile_diagram(&layer2, &cc, 0).unwrap();
    copy_params(&full, &mut first, 0);
    copy_params(&full, &mut second, 3);

    let inputs = random_inputs(&cc, &[("e", 1, 2)], 7);
    let run = full.forward(&inputs, Mode::Infer).unwrap();

    let mid = first.forward(&inputs, Mode::Infer).unwrap();
    let second_inputs: HashMap<String, Cochain> = ["v", "mid", "f"]
        .into_iter()
        .map(|id| (id.to_string(), mid.output(id).unwrap().clone()))
        .collect();
    let out = second.forward(&second_inputs, Mode::Infer).unwrap();
    assert!(
        max_abs_diff(run.output("out").unwrap(), out.output("out").unwrap()) <= 1e-12
    );
}
