use thiserror::Error;

use crate::ceremony::Phase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // crypto
    #[error("signer's public element is not in the ring")]
    SignerNotInRing,
    #[error("ring must contain at least one member")]
    EmptyRing,
    #[error("ring members must be distinct")]
    DuplicateRingMember,
    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),

    // ceremony
    #[error("invalid event configuration: {0}")]
    ConfigInvalid(String),
    #[error("entry refused: the lobby is sealed")]
    EntryAfterSeal,
    #[error("attendee {0} is already present")]
    DuplicateEntry(String),
    #[error("cannot seal at tick {now}: deadline is {deadline}")]
    SealTooEarly { now: u64, deadline: u64 },
    #[error("attendee {0} was never admitted")]
    NotPresent(String),
    #[error("attendee {0} was already scanned")]
    AlreadyScanned(String),
    #[error("token was already scanned for another attendee")]
    TokenReused,
    #[error("nothing was scanned")]
    NothingScanned,
    #[error("cosignature does not verify against the roll list digest")]
    BadCosignature,
    #[error("witness already cosigned this roll list")]
    DuplicateWitness,
    #[error("operation not permitted in phase {actual:?}")]
    WrongPhase { actual: Phase },

    // federation
    #[error("schedule needs at least one site")]
    EmptySites,
    #[error("site {site} requested deadline {requested}, federation deadline is {shared}")]
    DeadlineOverride {
        site: String,
        requested: u64,
        shared: u64,
    },
    #[error("cycle {next} does not follow cycle {last}")]
    NonIncreasingCycle { last: u64, next: u64 },
    #[error("not enough eligible volunteers to witness site {0}")]
    InsufficientVolunteers(String),
    #[error("reveal does not open the published commitment")]
    BadReveal,
    #[error("the witnessed event has not been finalized")]
    TooEarly,
    #[error("body {0} is scripted to attend more than one event")]
    BodyInTwoPlaces(String),
    #[error("unknown site {0}")]
    UnknownSite(String),

    // coercion / applications
    #[error("ticket {0} was already used")]
    TicketReused(String),
    #[error("signature does not verify")]
    InvalidSignature,
    #[error("token is not in the roll list")]
    TokenNotInRoll,
    #[error("cannot select {k} of {n} tokens")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // sybilsim
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
