//! Coercion-resistant issuance: the kiosk prints one real token and several
//! fakes that look identical to anyone without the tally key. The holder can
//! surrender a fake and privately delegate the real one.

use popkit::ceremony::open_event;
use popkit::ceremony::EventConfig;
use popkit::coercion::{
    booth_delegate, filter_real, public_validate, DelegationBook, Kiosk, TallyKey, DEFAULT_FAKES,
};
use popkit::crypto::keygen_labeled;

fn main() -> popkit::Result<()> {
    let tally = TallyKey::derive("county-tally");
    let mut kiosk = Kiosk::new();
    let sheet = kiosk.issue("ticket-0042", &tally, DEFAULT_FAKES, &[9; 32])?;
    println!(
        "sheet: {} tokens, all publicly valid: {}",
        sheet.len(),
        sheet.tokens().iter().all(public_validate)
    );
    println!(
        "real after tally filter: {}",
        filter_real(sheet.tokens(), &tally).len()
    );
    println!(
        "same ticket again: {:?}",
        kiosk
            .issue("ticket-0042", &tally, DEFAULT_FAKES, &[9; 32])
            .err()
    );

    // the real token goes through a ceremony like any other
    let mut event = open_event(EventConfig::new("hall/cycle-2", "hall", 2, 10))?;
    let real = sheet.real_keypair();
    event.admit("holder", 5)?;
    event.admit("neighbor", 5)?;
    event.seal(10)?;
    event.scan_exit("holder", *real.public())?;
    event.scan_exit("neighbor", *keygen_labeled("neighbor", 0).public())?;
    let roll = event.publish()?;

    let coercer_gets = sheet.keypair(1);
    println!(
        "coercer's token in the tally: {}",
        filter_real(&sheet.tokens()[1..2], &tally).len()
    );
    println!(
        "coercer's token on the roll: {}",
        roll.contains(coercer_gets.public())
    );

    let mut book = DelegationBook::default();
    let trustee = keygen_labeled("trustee", 0);
    let record = booth_delegate(&real, &roll, trustee.public())?;
    book.record(&roll, record.clone())?;
    println!(
        "delegated to trustee: {}",
        book.delegate_of(&record.delegator_tag) == Some(trustee.public())
    );
    Ok(())
}
