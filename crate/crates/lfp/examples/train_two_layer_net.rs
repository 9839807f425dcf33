//! From-scratch training of a two-layer ReLU network.
//!
//! Builds a network with the antisymmetric trick (so its initial output is
//! exactly zero), trains it full-batch with Adam, prints loss milestones,
//! and writes the loss history to
//! `target/examples-out/train_two_layer_net/history.csv`.
//!
//! Run with `cargo run --example train_two_layer_net`.

use lfp::{
    train, Dataset, InitSpec, NetForm, Optimizer, ParamDist, ParamSelection, TrainConfig,
    TwoLayerNet,
};

fn main() -> lfp::Result<()> {
    let xs: Vec<f64> = (0..16).map(|i| -1.0 + 2.0 * i as f64 / 15.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (3.0 * x).sin() * 0.8 + 0.1 * x).collect();
    let data = Dataset::new(1, xs, ys)?;

    let spec = InitSpec {
        w: ParamDist::XavierNormal,
        r: ParamDist::XavierNormal,
        l: ParamDist::Uniform { lo: -1.0, hi: 1.0 },
    };
    let net = TwoLayerNet::init(1, 256, NetForm::OneD, &spec, 7)?;
    let mut net = net.apply_asi(); // width doubles; output is exactly zero
    println!(
        "width {} after antisymmetric doubling; initial output at 0.3: {:.2e}",
        net.width(),
        net.forward(&[0.3])
    );
    let coeffs = net.lfp_coefficients()?;
    println!("rate coefficients from this init: A = {:.4}, B = {:.4}", coeffs.a(), coeffs.b());

    let cfg = TrainConfig {
        optimizer: Optimizer::adam(1e-3),
        max_steps: 30_000,
        stop_loss: Some(1e-8),
        record_every: 1_000,
        params: ParamSelection::All,
    };
    let record = train(&mut net, &data, &cfg)?;
    println!("\nstep      loss");
    for &(step, loss) in record.history.iter().step_by(5) {
        println!("{step:6}  {loss:.3e}");
    }
    println!(
        "\nstopped after {} steps ({:?}) at loss {:.3e}",
        record.steps, record.stop, record.final_loss
    );

    let out = std::path::Path::new("target/examples-out/train_two_layer_net");
    std::fs::create_dir_all(out)?;
    record.write_history_csv(&out.join("history.csv"))?;
    let json = net.to_json()?;
    std::fs::write(out.join("checkpoint.json"), json)?;
    println!("wrote {}/history.csv and checkpoint.json", out.display());
    Ok(())
}
