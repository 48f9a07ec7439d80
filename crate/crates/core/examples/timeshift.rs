//! One person, many identities: asynchronous verification lets them
//! attend every meeting, synchronized slots do not.

use popkit::sybilsim::{timeshift_demo, VerificationMode};

fn main() {
    for (label, mode) in [
        ("asynchronous", VerificationMode::Asynchronous),
        (
            "synchronized, 1 slot",
            VerificationMode::Synchronized { slots: 1 },
        ),
        (
            "synchronized, 4 slots",
            VerificationMode::Synchronized { slots: 4 },
        ),
    ] {
        let o = timeshift_demo(10, 1, mode);
        println!(
            "{label:<22} 1 human, {} identities -> {} verified",
            o.identities, o.verified
        );
    }
}
