//! The pseudonym-party event state machine.
//!
//! An event moves strictly forward through
//! `LobbyOpen → Sealed → Scanning → Published → Finalized`. Attendees are
//! admitted until the deadline, the lobby is sealed, and each present
//! attendee has exactly one token scanned on the way out. The published
//! [`RollList`] carries only tokens, digests and cosignatures.
//!
//! Attendee ids exist only in the [`GroundTruth`] log kept for simulation and
//! verification; they never appear in a published artifact.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::crypto::{
    cosign, cosign_verify, hash_parts, keygen, Cosignature, Digest32, GroupElement, PersonKeyPair,
};
use crate::error::{Error, Result};

pub type AttendeeId = String;
pub type Tick = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeTier {
    Small,
    Medium,
    Large,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    pub event_id: String,
    pub site_id: String,
    pub cycle: u64,
    #[serde(default)]
    pub opening: Tick,
    pub deadline: Tick,
    #[serde(default = "default_threshold")]
    pub cosign_threshold: f64,
    #[serde(default = "default_min_witnesses")]
    pub min_witnesses: usize,
    #[serde(default = "default_tier")]
    pub size_tier: SizeTier,
}

fn default_threshold() -> f64 {
    0.2
}

fn default_min_witnesses() -> usize {
    3
}

fn default_tier() -> SizeTier {
    SizeTier::Small
}

impl EventConfig {
    pub fn new(
        event_id: impl Into<String>,
        site_id: impl Into<String>,
        cycle: u64,
        deadline: Tick,
    ) -> Self {
        Self {
            event_id: event_id.into(),
            site_id: site_id.into(),
            cycle,
            opening: 0,
            deadline,
            cosign_threshold: default_threshold(),
            min_witnesses: default_min_witnesses(),
            size_tier: default_tier(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cosign_threshold > 0.0 && self.cosign_threshold <= 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "cosign_threshold must be in (0, 1], got {}",
                self.cosign_threshold
            )));
        }
        if self.deadline <= self.opening {
            return Err(Error::ConfigInvalid(format!(
                "deadline {} must be after opening {}",
                self.deadline, self.opening
            )));
        }
        Ok(())
    }

    pub fn policy(&self) -> CosignPolicy {
        CosignPolicy {
            threshold: self.cosign_threshold,
            min_witnesses: self.min_witnesses,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    LobbyOpen,
    Sealed,
    Scanning,
    Published,
    Finalized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complaint {
    pub attendee: AttendeeId,
    pub reason: String,
}

/// Ground-truth record of what physically happened at an event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    Admitted { attendee: AttendeeId, tick: Tick },
    Sealed { tick: Tick },
    Scanned { attendee: AttendeeId },
    Fabricated { count: usize },
}

/// Manipulations a corrupt organizer can apply; used as test fixtures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    /// Publish `k` tokens that no attendee carried out.
    Inflate(usize),
    /// Scan an already-scanned attendee a second time.
    DoubleScan(AttendeeId),
    /// Let someone in after the lobby was sealed.
    LateEntry(AttendeeId),
}

#[derive(Clone, Debug)]
pub struct EventState {
    config: EventConfig,
    phase: Phase,
    present: BTreeSet<AttendeeId>,
    scanned: Vec<(AttendeeId, GroupElement)>,
    fabricated: Vec<GroupElement>,
    complaints: Vec<Complaint>,
    log: Vec<LogEntry>,
}

pub fn open_event(config: EventConfig) -> Result<EventState> {
    config.validate()?;
    Ok(EventState {
        config,
        phase: Phase::LobbyOpen,
        present: BTreeSet::new(),
        scanned: Vec::new(),
        fabricated: Vec::new(),
        complaints: Vec::new(),
        log: Vec::new(),
    })
}

impl EventState {
    pub fn config(&self) -> &EventConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn present(&self) -> &BTreeSet<AttendeeId> {
        &self.present
    }

    pub fn scanned(&self) -> &[(AttendeeId, GroupElement)] {
        &self.scanned
    }

    pub fn complaints(&self) -> &[Complaint] {
        &self.complaints
    }

    pub fn admit(&mut self, attendee: &str, now: Tick) -> Result<()> {
        if self.phase != Phase::LobbyOpen || now >= self.config.deadline {
            return Err(Error::EntryAfterSeal);
        }
        if self.present.contains(attendee) {
            return Err(Error::DuplicateEntry(attendee.to_owned()));
        }
        self.present.insert(attendee.to_owned());
        self.log.push(LogEntry::Admitted {
            attendee: attendee.to_owned(),
            tick: now,
        });
        Ok(())
    }

    pub fn seal(&mut self, now: Tick) -> Result<()> {
        if self.phase != Phase::LobbyOpen {
            return Err(Error::WrongPhase { actual: self.phase });
        }
        if now < self.config.deadline {
            return Err(Error::SealTooEarly {
                now,
                deadline: self.config.deadline,
            });
        }
        self.phase = Phase::Sealed;
        self.log.push(LogEntry::Sealed { tick: now });
        Ok(())
    }

    pub fn scan_exit(&mut self, attendee: &str, token: GroupElement) -> Result<()> {
        if !matches!(self.phase, Phase::Sealed | Phase::Scanning) {
            return Err(Error::WrongPhase { actual: self.phase });
        }
        if !self.present.contains(attendee) {
            return Err(Error::NotPresent(attendee.to_owned()));
        }
        if self.scanned.iter().any(|(a, _)| a == attendee) {
            return Err(Error::AlreadyScanned(attendee.to_owned()));
        }
        if self.scanned.iter().any(|(_, t)| *t == token) {
            return Err(Error::TokenReused);
        }
        self.record_scan(attendee, token);
        Ok(())
    }

    fn record_scan(&mut self, attendee: &str, token: GroupElement) {
        self.scanned.push((attendee.to_owned(), token));
        self.log.push(LogEntry::Scanned {
            attendee: attendee.to_owned(),
        });
        self.phase = Phase::Scanning;
    }

    /// Records a complaint. Complaints are not adjudicated; a complaining
    /// witness simply withholds its cosignature.
    pub fn complain(&mut self, attendee: &str, reason: impl Into<String>) -> Result<()> {
        if !self.present.contains(attendee) {
            return Err(Error::NotPresent(attendee.to_owned()));
        }
        self.complaints.push(Complaint {
            attendee: attendee.to_owned(),
            reason: reason.into(),
        });
        Ok(())
    }

    pub fn publish(&mut self) -> Result<RollList> {
        if !matches!(self.phase, Phase::Sealed | Phase::Scanning) {
            return Err(Error::WrongPhase { actual: self.phase });
        }
        if self.scanned.is_empty() {
            return Err(Error::NothingScanned);
        }
        let tokens = self
            .scanned
            .iter()
            .map(|(_, t)| *t)
            .chain(self.fabricated.iter().copied())
            .collect();
        let roll = RollList::new(&self.config.event_id, self.config.cycle, tokens)?;
        self.phase = Phase::Published;
        Ok(roll)
    }

    /// Closes the event once cosigning is complete; cross-witness reveals are
    /// only accepted after this point.
    pub fn finalize(&mut self) -> Result<()> {
        if self.phase != Phase::Published {
            return Err(Error::WrongPhase { actual: self.phase });
        }
        self.phase = Phase::Finalized;
        Ok(())
    }

    /// Applies a manipulation, bypassing the guards an honest organizer
    /// would enforce. The physical effect is recorded in the ground log.
    pub fn inject_attack(&mut self, attack: &Attack) -> Result<()> {
        match attack {
            Attack::Inflate(k) => {
                if !matches!(self.phase, Phase::Sealed | Phase::Scanning) {
                    return Err(Error::WrongPhase { actual: self.phase });
                }
                let start = self.fabricated.len();
                for i in start..start + k {
                    let seed = hash_parts(
                        "popkit/fabricated-token",
                        &[self.config.event_id.as_bytes(), &(i as u64).to_be_bytes()],
                    );
                    self.fabricated.push(*keygen(&seed).public());
                }
                self.log.push(LogEntry::Fabricated { count: *k });
            }
            Attack::DoubleScan(attendee) => {
                if !matches!(self.phase, Phase::Sealed | Phase::Scanning) {
                    return Err(Error::WrongPhase { actual: self.phase });
                }
                if !self.present.contains(attendee) {
                    return Err(Error::NotPresent(attendee.clone()));
                }
                let n = self.scanned.iter().filter(|(a, _)| a == attendee).count() as u64;
                let seed = hash_parts(
                    "popkit/double-scan-token",
                    &[
                        self.config.event_id.as_bytes(),
                        attendee.as_bytes(),
                        &n.to_be_bytes(),
                    ],
                );
                self.record_scan(attendee, *keygen(&seed).public());
            }
            Attack::LateEntry(attendee) => {
                if !matches!(self.phase, Phase::Sealed | Phase::Scanning) {
                    return Err(Error::WrongPhase { actual: self.phase });
                }
                if self.present.insert(attendee.clone()) {
                    let tick = self.sealed_at().unwrap_or(self.config.deadline);
                    self.log.push(LogEntry::Admitted {
                        attendee: attendee.clone(),
                        tick,
                    });
                }
            }
        }
        Ok(())
    }

    fn sealed_at(&self) -> Option<Tick> {
        self.log.iter().find_map(|e| match e {
            LogEntry::Sealed { tick } => Some(*tick),
            _ => None,
        })
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth::from_log(self.log.clone())
    }
}

/// What an honest observer saw: number of distinct bodies scanned out and
/// the ordered event log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scan_count: usize,
    pub seal_log: Vec<LogEntry>,
}

impl GroundTruth {
    pub fn from_log(seal_log: Vec<LogEntry>) -> Self {
        let scan_count = seal_log
            .iter()
            .filter_map(|e| match e {
                LogEntry::Scanned { attendee } => Some(attendee.as_str()),
                _ => None,
            })
            .collect::<HashSet<_>>()
            .len();
        Self {
            scan_count,
            seal_log,
        }
    }

    /// Attendees admitted to the event, in log order.
    pub fn attendees(&self) -> impl Iterator<Item = &str> {
        self.seal_log.iter().filter_map(|e| match e {
            LogEntry::Admitted { attendee, .. } => Some(attendee.as_str()),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub cosignature: Cosignature,
    /// Attendance count the witness claims to have observed.
    pub attested_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollList {
    event_id: String,
    cycle: u64,
    tokens: Vec<GroupElement>,
    list_digest: Digest32,
    cosignatures: Vec<Attestation>,
}

#[derive(Serialize)]
struct DigestInput<'a> {
    cycle: u64,
    event_id: &'a str,
    tokens: &'a [GroupElement],
}

pub fn roll_digest(event_id: &str, cycle: u64, tokens: &[GroupElement]) -> Result<Digest32> {
    let bytes = to_canonical_bytes(&DigestInput {
        cycle,
        event_id,
        tokens,
    })?;
    Ok(Digest32(hash_parts("popkit/roll-list", &[&bytes])))
}

impl RollList {
    fn new(event_id: &str, cycle: u64, tokens: Vec<GroupElement>) -> Result<Self> {
        let list_digest = roll_digest(event_id, cycle, &tokens)?;
        Ok(Self {
            event_id: event_id.to_owned(),
            cycle,
            tokens,
            list_digest,
            cosignatures: Vec::new(),
        })
    }

    pub fn event_id(&self) -> &str {
        &self.event_id
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn tokens(&self) -> &[GroupElement] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &GroupElement) -> bool {
        self.tokens.contains(token)
    }

    pub fn list_digest(&self) -> &Digest32 {
        &self.list_digest
    }

    pub fn cosignatures(&self) -> &[Attestation] {
        &self.cosignatures
    }

    pub fn add_cosignature(&mut self, cosig: Cosignature, attested_count: u64) -> Result<()> {
        if !cosign_verify(&cosig, &self.list_digest) {
            return Err(Error::BadCosignature);
        }
        if self
            .cosignatures
            .iter()
            .any(|a| a.cosignature.witness_public == cosig.witness_public)
        {
            return Err(Error::DuplicateWitness);
        }
        self.cosignatures.push(Attestation {
            cosignature: cosig,
            attested_count,
        });
        Ok(())
    }
}

/// A roll list that did not come out of a ceremony: what a fabricating
/// organizer publishes. Verification has to catch these.
pub fn forge_roll_list(event_id: &str, cycle: u64, tokens: Vec<GroupElement>) -> Result<RollList> {
    RollList::new(event_id, cycle, tokens)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosignPolicy {
    pub threshold: f64,
    pub min_witnesses: usize,
}

impl Default for CosignPolicy {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            min_witnesses: default_min_witnesses(),
        }
    }
}

impl CosignPolicy {
    /// Number of verifying cosignatures required for a list of `count` tokens.
    pub fn required(&self, count: usize) -> usize {
        let frac = (self.threshold * count as f64 - 1e-9).ceil().max(0.0) as usize;
        frac.max(self.min_witnesses)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FindingCode {
    InflationDetected,
    DuplicateScan,
    CosignShortfall,
    EntryAfterSeal,
    DigestMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub findings: Vec<Finding>,
}

impl VerificationReport {
    fn from_findings(findings: Vec<Finding>) -> Self {
        Self {
            passed: findings.is_empty(),
            findings,
        }
    }

    pub fn has(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

/// Third-party check of a published roll list against what was observed.
pub fn verify_event(
    roll: &RollList,
    ground: &GroundTruth,
    policy: &CosignPolicy,
) -> VerificationReport {
    let mut findings = Vec::new();
    let n = roll.tokens.len();

    let recomputed = roll_digest(&roll.event_id, roll.cycle, &roll.tokens).ok();
    if recomputed != Some(roll.list_digest) {
        findings.push(Finding {
            code: FindingCode::DigestMismatch,
            detail: "list digest does not match the published tokens".into(),
        });
    }
    let distinct: HashSet<_> = roll.tokens.iter().collect();
    if distinct.len() != n {
        findings.push(Finding {
            code: FindingCode::DigestMismatch,
            detail: format!("{} repeated tokens in the list", n - distinct.len()),
        });
    }

    if n > ground.scan_count {
        findings.push(Finding {
            code: FindingCode::InflationDetected,
            detail: format!(
                "{n} tokens published for {} scanned attendees",
                ground.scan_count
            ),
        });
    }
    let under: Vec<u64> = roll
        .cosignatures
        .iter()
        .map(|a| a.attested_count)
        .filter(|&c| c < n as u64)
        .collect();
    if !under.is_empty() {
        findings.push(Finding {
            code: FindingCode::InflationDetected,
            detail: format!(
                "{} witnesses attested fewer than {n} attendees: {under:?}",
                under.len()
            ),
        });
    }

    // cosignatures count only against the digest of the tokens actually shown
    let valid_witnesses: HashSet<_> = roll
        .cosignatures
        .iter()
        .filter(|a| recomputed.is_some_and(|d| cosign_verify(&a.cosignature, &d)))
        .map(|a| a.cosignature.witness_public)
        .collect();
    let required = policy.required(n);
    if valid_witnesses.len() < required {
        findings.push(Finding {
            code: FindingCode::CosignShortfall,
            detail: format!(
                "{} verifying cosignatures, {required} required",
                valid_witnesses.len()
            ),
        });
    }

    let mut scans: BTreeMap<&str, usize> = BTreeMap::new();
    let mut sealed: Option<Tick> = None;
    let mut late = Vec::new();
    for entry in &ground.seal_log {
        match entry {
            LogEntry::Sealed { tick } => sealed = Some(*tick),
            LogEntry::Admitted { attendee, .. } => {
                // honest admissions are refused at or after the deadline,
                // so any admission logged after the seal is a late entry
                if sealed.is_some() {
                    late.push(attendee.as_str());
                }
            }
            LogEntry::Scanned { attendee } => *scans.entry(attendee).or_default() += 1,
            LogEntry::Fabricated { .. } => {}
        }
    }
    let repeated = scans.values().filter(|&&c| c > 1).count();
    if repeated > 0 {
        findings.push(Finding {
            code: FindingCode::DuplicateScan,
            detail: format!("{repeated} attendees scanned more than once"),
        });
    }
    if !late.is_empty() {
        findings.push(Finding {
            code: FindingCode::EntryAfterSeal,
            detail: format!("{} admissions after the lobby was sealed", late.len()),
        });
    }

    VerificationReport::from_findings(findings)
}

/// A scripted run of one event, used by simulations, fixtures and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeremonyScript {
    pub config: EventConfig,
    pub attendees: Vec<AttendeeId>,
    /// Attendees that scan out with the tokens; defaults to all.
    #[serde(default)]
    pub no_show_at_exit: Vec<AttendeeId>,
    #[serde(default)]
    pub attacks: Vec<Attack>,
    /// How many attendees also act as cosigning witnesses; defaults to the
    /// policy minimum for the attendance.
    #[serde(default)]
    pub witnesses: Option<usize>,
    /// Witnesses that complain and withhold their cosignature.
    #[serde(default)]
    pub complainers: Vec<AttendeeId>,
}

#[derive(Clone, Debug)]
pub struct CeremonyOutcome {
    pub state: EventState,
    pub roll: RollList,
    pub ground: GroundTruth,
}

pub fn attendee_token(seed: u64, event_id: &str, attendee: &str) -> PersonKeyPair {
    keygen(&hash_parts(
        "popkit/attendee-token",
        &[
            &seed.to_be_bytes(),
            event_id.as_bytes(),
            attendee.as_bytes(),
        ],
    ))
}

pub fn witness_key(seed: u64, event_id: &str, attendee: &str) -> PersonKeyPair {
    keygen(&hash_parts(
        "popkit/witness-key",
        &[
            &seed.to_be_bytes(),
            event_id.as_bytes(),
            attendee.as_bytes(),
        ],
    ))
}

impl CeremonyScript {
    pub fn honest(config: EventConfig, attendees: Vec<AttendeeId>) -> Self {
        Self {
            config,
            attendees,
            no_show_at_exit: Vec::new(),
            attacks: Vec::new(),
            witnesses: None,
            complainers: Vec::new(),
        }
    }

    /// Runs the script: admit everyone before the deadline, seal, scan out,
    /// apply attacks, publish, collect cosignatures, finalize.
    pub fn run(&self, seed: u64) -> Result<CeremonyOutcome> {
        let cfg = &self.config;
        let mut state = open_event(cfg.clone())?;
        let admit_tick = cfg.deadline - 1;
        for a in &self.attendees {
            state.admit(a, admit_tick)?;
        }
        state.seal(cfg.deadline)?;

        for attack in &self.attacks {
            if let Attack::LateEntry(_) = attack {
                state.inject_attack(attack)?;
            }
        }
        // scripted attendees first, in script order, then late entries
        let late: Vec<AttendeeId> = state
            .present()
            .iter()
            .filter(|a| !self.attendees.contains(a))
            .cloned()
            .collect();
        let leaving: Vec<&AttendeeId> = self
            .attendees
            .iter()
            .chain(late.iter())
            .filter(|a| !self.no_show_at_exit.contains(a))
            .collect();
        for a in leaving {
            state.scan_exit(a, *attendee_token(seed, &cfg.event_id, a).public())?;
        }
        for attack in &self.attacks {
            if !matches!(attack, Attack::LateEntry(_)) {
                state.inject_attack(attack)?;
            }
        }
        for c in &self.complainers {
            state.complain(c, "withheld cosignature")?;
        }

        let mut roll = state.publish()?;
        let ground = state.ground_truth();
        let n_witnesses = self
            .witnesses
            .unwrap_or_else(|| cfg.policy().required(roll.len()))
            .min(self.attendees.len());
        for w in self.attendees.iter().take(n_witnesses) {
            if self.complainers.contains(w) {
                continue;
            }
            let key = witness_key(seed, &cfg.event_id, w);
            roll.add_cosignature(cosign(&key, roll.list_digest()), ground.scan_count as u64)?;
        }
        state.finalize()?;
        Ok(CeremonyOutcome {
            state,
            roll,
            ground,
        })
    }
}
