//! Place a few gates in the Clifford hierarchy.

use cvteleport::algebra::{classify, format_gate, parse_gate_expression};

fn main() {
    for text in [
        "(displace 1 0.5)",
        "(rotate 0.7)",
        "(squeeze 0.3)",
        "(cubic 0.05)",
        "(exp (poly \"q^4\") 0.01)",
        "(cphase 1 0 1 2)",
        "(kerr 0.1)",
    ] {
        let g = parse_gate_expression(text).expect("valid expression");
        match classify(&g, 6) {
            Ok(level) => println!("{text:<28} {level:?}"),
            Err(e) => println!("{text:<28} {e}"),
        }
        println!("{:<28} = {}", "", format_gate(&g));
    }
}
