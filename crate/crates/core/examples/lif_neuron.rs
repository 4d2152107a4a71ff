//! A single leaky integrate-and-fire neuron under constant drive.
//!
//! cargo run --example lif_neuron

use spikenas::snn_sim::{lif_step, LifParams, LifState};

fn main() -> spikenas::Result<()> {
    let p = LifParams::default();
    for drive in [0.9f32, 1.5, 2.0, 4.0] {
        let mut state = LifState::resting(1, &p);
        let mut train = String::new();
        for _ in 0..16 {
            let (s, next) = lif_step(&state, &[drive], &p)?;
            train.push(if s[0] == 1 { '|' } else { '.' });
            state = next;
        }
        println!("drive {drive:>3}: {train}");
    }
    Ok(())
}
