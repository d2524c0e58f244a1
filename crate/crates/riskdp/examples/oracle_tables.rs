//! Exact oracle policies for both benchmark environments under three inner
//! risk preferences, printed as policy tables.
//!
//! ```bash
//! cargo run --release --example oracle_tables
//! ```
//!
//! More conservative inner measures widen the coin-toss abstain region and
//! raise the inventory replenishment threshold.

use riskdp::envs::{build_coin_toss, build_inventory, inventory_order_up_to, oracle_solve};
use riskdp::risk::InnerRiskSpec;

fn main() -> riskdp::Result<()> {
    let theta = 1e-6;
    let specs = [
        ("expectation", InnerRiskSpec::mean()),
        ("cvar(0.5)", InnerRiskSpec::cvar(0.5)?),
        ("cvar(0.2)", InnerRiskSpec::cvar(0.2)?),
    ];

    let coin = build_coin_toss(0.6);
    println!("== coin toss: bet direction per heads count 0..10 ==");
    for (name, inner) in &specs {
        let (_, policy) = oracle_solve(&coin, inner, theta)?;
        let bets: Vec<i64> = (0..11)
            .map(|s| coin.action_labels[policy.greedy_action(s)])
            .collect();
        println!("{name:>12}: {bets:?}");
    }

    let inv = build_inventory(10, 3.0, 1.0, 2.0, 0.0);
    println!("\n== inventory: order-up-to level per excess demand -10..10 ==");
    for (name, inner) in &specs {
        let (value, policy) = oracle_solve(&inv, inner, theta)?;
        let levels: Vec<i64> = (0..21)
            .map(|i| inventory_order_up_to(&inv, i, policy.greedy_action(i)))
            .collect();
        let threshold = inv
            .state_labels
            .iter()
            .zip(&levels)
            .filter(|(&s, &l)| l > s.max(0))
            .map(|(&s, _)| s)
            .max()
            .unwrap();
        println!("{name:>12}: {levels:?}  (replenish while s <= {threshold})");
        println!("{:>12}  value at s=0: {:.4}", "", value.get(10));
    }
    Ok(())
}
