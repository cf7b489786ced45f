// SPDX-License-Identifier: Apache-2.0

//! Two designers fight over one slider under each arbitration strategy.

use adflow::param::{ParameterUpdate, UpdateValue};
use adflow::relay::{Decision, RelayConfig, SessionState, Strategy};
use adflow::wire::{Control, Role, WireMessage};
use std::time::Duration;

fn ms(n: u64) -> Duration {
    Duration::from_millis(n)
}

fn main() {
    let guid = "slider";
    for strategy in Strategy::ALL {
        let mut config = RelayConfig {
            strategy,
            ..RelayConfig::default()
        };
        config.privileges.insert(2, 5);
        config.parameter_layers.insert(guid.into(), "massing".into());
        config.client_layers.insert(2, ["massing".to_string()].into());

        let mut s = SessionState::new(config);
        let (a, _) = s.on_connect(Role::Designer, "10.0.0.1", ms(0));
        let (b, _) = s.on_connect(Role::Designer, "10.0.0.2", ms(0));
        if strategy == Strategy::PreemptiveLock {
            s.handle(b, WireMessage::Control(Control::LockRequest { guid: guid.into() }), ms(1), &|_| 0);
        }

        let upd = |v| ParameterUpdate::new(guid, UpdateValue::Number(v));
        let (first, _) = s.on_parameter_update(a, upd(1.0), ms(10));
        let (second, _) = s.on_parameter_update(b, upd(2.0), ms(500));
        let show = |d: &Decision| match d {
            Decision::Accepted => "accepted".to_string(),
            Decision::Deferred { deadline } => format!("deferred to {deadline:?}"),
            Decision::Rejected(r) => format!("rejected {r}"),
        };
        println!("{strategy:>15}: client {a} {}, client {b} {}", show(&first), show(&second));
    }

    // Rate limiting: a burst collapses to the latest value.
    let mut s = SessionState::new(RelayConfig::default());
    let (a, _) = s.on_connect(Role::Designer, "10.0.0.1", ms(0));
    for (i, t) in [0u64, 20, 40, 60].into_iter().enumerate() {
        s.on_parameter_update(a, ParameterUpdate::number(guid, i as f64), ms(t));
    }
    println!("pending after burst: {}, next flush at {:?}", s.pending_updates(), s.next_deadline());
    for e in s.poll(ms(100)) {
        println!("flushed {e:?}");
    }
}
