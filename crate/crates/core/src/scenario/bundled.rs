//! Scripts shipped with the crate, reproducing the published experiments
//! against the built-in reference bundle. Tick counts and ramp lengths are
//! our own choices; the published experiments do not report them.

pub struct BundledScenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const BASELINE: &str = "\
# No intervention: both reasoning aspects on, environment untouched.
run-until 200
";

pub const BIKE_SAFETY: &str = "\
# Scenario 1: cycling becomes gradually safer; a crisis resets habits halfway.
# 4.62 is the reference bundle's objective bike safety.
ramp 0 200 bike safety 4.62 9
at 100 reset-habits
run-until 500
";

pub const CAR_COMFORT: &str = "\
# Scenario 2: habits only, no perception bias; driving becomes less and less
# comfortable, then habits are reset once comfort bottoms out.
at 0 set-flags biases=off habits=on
ramp 0 200 car comfort 8 1
at 220 reset-habits
run-until 300
";

pub const PERCEPTION_FILTER: &str = "\
# Scenario 3: stable run with filters, then filters switched off.
at 100 set-flags biases=off habits=on
run-until 300
";

pub const PERCEPTION_FILTER_NO_HABITS: &str = "\
# Scenario 3, variant: filters and habits switched off together.
at 100 set-flags biases=off habits=off
run-until 300
";

pub const ALL: [BundledScenario; 5] = [
    BundledScenario { name: "baseline", summary: "no intervention for 200 ticks", text: BASELINE },
    BundledScenario { name: "bike-safety", summary: "ramp bike safety to 9, reset habits at 100", text: BIKE_SAFETY },
    BundledScenario { name: "car-comfort", summary: "habits only; ramp car comfort to 1, reset at 220", text: CAR_COMFORT },
    BundledScenario { name: "perception-filter", summary: "disable filters at tick 100", text: PERCEPTION_FILTER },
    BundledScenario {
        name: "perception-filter-no-habits",
        summary: "disable filters and habits at tick 100",
        text: PERCEPTION_FILTER_NO_HABITS,
    },
];

pub fn find(name: &str) -> Option<&'static BundledScenario> {
    ALL.iter().find(|s| s.name == name)
}
