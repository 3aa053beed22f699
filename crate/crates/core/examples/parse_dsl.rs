//! Parses a model from text, reports diagnostics with their source
//! locations, and prints the canonical form.

use maestro::parser::parse_model_file;
use maestro::print;

const GOOD: &str = r#"
MachineState:
  - TypeSpec:
     - Reg: {v: BV[4]}
  - InstanceSpec:
     - r: Reg
Events:
  - Name: "Tick"
    CarriesData: "None"
    TriggersEvent: "IF r.v < 3 : Trigger Tick{NONE}"
    StateChanges: "SC r.v <- r.v + 1"
    TimingDelay: "0"
    PresentAtStart: "Yes"
Assertions:
  - Name: "bounded"
    Assert: "ALWAYS r.v <= 4"
InitialState:
  - Zero: "r.v = 0"
MaxSteps: 6
IntWidth: 4
"#;

fn main() {
    let parsed = parse_model_file(GOOD, "tick.yaml").expect("valid model");
    print!("{}", print::model_yaml(&parsed.model));

    for bad in [
        GOOD.replace("r.v + 1", "r.w + 1"),
        GOOD.replace("BV[4]", "BV[0]"),
        GOOD.replace("IF r.v < 3 :", "IF r.v << 3 :"),
    ] {
        match parse_model_file(&bad, "tick.yaml") {
            Ok(_) => println!("unexpectedly accepted"),
            Err(e) => println!("\n{e}"),
        }
    }
}
