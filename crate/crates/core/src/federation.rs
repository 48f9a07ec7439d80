//! Federated cycles: many sites share one entry deadline so no body can be
//! at two events, and a secret commit/reveal lottery sends volunteers from
//! one site to witness another.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ceremony::{
    forge_roll_list, witness_key, Attack, CeremonyScript, EventConfig, GroundTruth, Phase,
    RollList, Tick,
};
use crate::crypto::{bytes_hex, commit, cosign, hash_parts, keygen, open_verify, prf, Commitment};
use crate::error::{Error, Result};

pub type SiteId = String;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FederationSchedule {
    pub cycle: u64,
    pub sites: Vec<SiteId>,
    pub deadline: Tick,
}

pub fn build_schedule(
    cycle: u64,
    sites: Vec<SiteId>,
    deadline: Tick,
) -> Result<FederationSchedule> {
    if sites.is_empty() {
        return Err(Error::EmptySites);
    }
    let distinct: BTreeSet<_> = sites.iter().collect();
    if distinct.len() != sites.len() {
        return Err(Error::InvalidArgument("duplicate site in schedule".into()));
    }
    Ok(FederationSchedule {
        cycle,
        sites,
        deadline,
    })
}

impl FederationSchedule {
    pub fn contains(&self, site: &str) -> bool {
        self.sites.iter().any(|s| s == site)
    }

    /// Sites cannot pick their own deadline; any request other than the
    /// shared one is refused.
    pub fn deadline_for(&self, site: &str, requested: Option<Tick>) -> Result<Tick> {
        if !self.contains(site) {
            return Err(Error::UnknownSite(site.to_owned()));
        }
        match requested {
            Some(r) if r != self.deadline => Err(Error::DeadlineOverride {
                site: site.to_owned(),
                requested: r,
                shared: self.deadline,
            }),
            _ => Ok(self.deadline),
        }
    }

    pub fn event_id(&self, site: &str) -> String {
        format!("{site}/cycle-{}", self.cycle)
    }
}

/// Accepts schedules only in strictly increasing cycle order.
#[derive(Clone, Debug, Default)]
pub struct ScheduleLog {
    schedules: Vec<FederationSchedule>,
}

impl ScheduleLog {
    pub fn push(&mut self, schedule: FederationSchedule) -> Result<()> {
        if let Some(last) = self.schedules.last() {
            if schedule.cycle <= last.cycle {
                return Err(Error::NonIncreasingCycle {
                    last: last.cycle,
                    next: schedule.cycle,
                });
            }
        }
        self.schedules.push(schedule);
        Ok(())
    }

    pub fn schedules(&self) -> &[FederationSchedule] {
        &self.schedules
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Honest,
    Minion { controller: String },
    Organizer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Body {
    pub body_id: String,
    pub home_site: SiteId,
    pub behavior: Behavior,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Volunteer {
    pub id: String,
    pub home_site: SiteId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Testimony {
    pub site: SiteId,
    pub observed_count: u64,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reveal {
    #[serde(with = "bytes_hex")]
    pub nonce: Vec<u8>,
    pub testimony: Testimony,
}

/// One volunteer's secret witnessing duty. Only `commitment` is published
/// before the event; the target and nonce are handed to the volunteer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessAssignment {
    pub volunteer_id: String,
    pub home_site: SiteId,
    pub target_site: SiteId,
    pub commitment: Commitment,
    #[serde(skip)]
    nonce: [u8; 32],
    pub revealed: Option<Reveal>,
}

fn assignment_value(volunteer: &str, site: &str) -> Vec<u8> {
    let mut v = Vec::new();
    for f in [volunteer.as_bytes(), site.as_bytes()] {
        v.extend_from_slice(&(f.len() as u32).to_be_bytes());
        v.extend_from_slice(f);
    }
    v
}

impl WitnessAssignment {
    pub fn nonce(&self) -> &[u8; 32] {
        &self.nonce
    }

    /// The site this volunteer verifiably witnessed, if the reveal opens the
    /// commitment.
    pub fn verified_site(&self) -> Option<&str> {
        let r = self.revealed.as_ref()?;
        let nonce: [u8; 32] = r.nonce.as_slice().try_into().ok()?;
        open_verify(
            &self.commitment,
            &assignment_value(&self.volunteer_id, &r.testimony.site),
            &nonce,
        )
        .then_some(r.testimony.site.as_str())
    }
}

/// Draws `per_site` cross-witnesses for every site. `lottery_seed` is the
/// lottery's secret randomness (beacon output mixed with the coordinator's
/// secret); anyone holding it can recompute the targets, so it stays private
/// until the reveals.
pub fn assign_cross_witnesses(
    lottery_seed: &[u8; 32],
    volunteers: &[Volunteer],
    sites: &[SiteId],
    per_site: usize,
) -> Result<Vec<WitnessAssignment>> {
    let mut rng = ChaCha20Rng::from_seed(hash_parts("popkit/witness-lottery", &[lottery_seed]));
    let mut order: Vec<&SiteId> = sites.iter().collect();
    order.shuffle(&mut rng);

    let mut taken = vec![false; volunteers.len()];
    let mut by_site: HashMap<&str, Vec<WitnessAssignment>> = HashMap::new();
    for site in order {
        let eligible: Vec<usize> = (0..volunteers.len())
            .filter(|&i| !taken[i] && volunteers[i].home_site != *site)
            .collect();
        if eligible.len() < per_site {
            return Err(Error::InsufficientVolunteers(site.clone()));
        }
        let chosen: Vec<usize> = eligible
            .choose_multiple(&mut rng, per_site)
            .copied()
            .collect();
        let entry = by_site.entry(site.as_str()).or_default();
        for i in chosen {
            taken[i] = true;
            let v = &volunteers[i];
            let nonce = prf(lottery_seed, &assignment_value(&v.id, site));
            entry.push(WitnessAssignment {
                volunteer_id: v.id.clone(),
                home_site: v.home_site.clone(),
                target_site: site.clone(),
                commitment: commit(&assignment_value(&v.id, site), &nonce),
                nonce,
                revealed: None,
            });
        }
    }
    Ok(sites
        .iter()
        .flat_map(|s| by_site.remove(s.as_str()).unwrap_or_default())
        .collect())
}

/// What gets published before the event: the commitments alone, sorted so
/// that their order carries nothing about the draw.
pub fn public_commitments(assignments: &[WitnessAssignment]) -> Vec<Commitment> {
    let mut out: Vec<Commitment> = assignments.iter().map(|a| a.commitment).collect();
    out.sort();
    out
}

pub fn reveal_witness(
    assignment: &WitnessAssignment,
    nonce: &[u8; 32],
    testimony: Testimony,
    target_phase: Phase,
) -> Result<WitnessAssignment> {
    if target_phase != Phase::Finalized {
        return Err(Error::TooEarly);
    }
    if !open_verify(
        &assignment.commitment,
        &assignment_value(&assignment.volunteer_id, &testimony.site),
        nonce,
    ) {
        return Err(Error::BadReveal);
    }
    let mut out = assignment.clone();
    out.revealed = Some(Reveal {
        nonce: nonce.to_vec(),
        testimony,
    });
    Ok(out)
}

/// A site's published event plus simulation-only ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub site_id: SiteId,
    pub deadline: Tick,
    pub phase: Phase,
    pub roll: RollList,
    #[serde(skip)]
    pub ground: Option<GroundTruth>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlagReason {
    NoCrossWitness,
    TestimonyContradiction,
    DeadlineMismatch,
    BodyDuplication,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedSite {
    pub site: SiteId,
    pub reasons: Vec<FlagReason>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle: u64,
    pub passed_sites: Vec<SiteId>,
    pub flagged_sites: Vec<FlaggedSite>,
}

impl CycleReport {
    pub fn passed(&self) -> bool {
        self.flagged_sites.is_empty()
    }

    pub fn reasons(&self, site: &str) -> &[FlagReason] {
        self.flagged_sites
            .iter()
            .find(|f| f.site == site)
            .map(|f| f.reasons.as_slice())
            .unwrap_or(&[])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleCheck {
    /// Allowed |observed − published| before a testimony contradicts a list.
    pub testimony_tolerance: u64,
}

pub fn verify_cycle(
    records: &[SiteRecord],
    schedule: &FederationSchedule,
    reveals: &[WitnessAssignment],
    check: &CycleCheck,
) -> CycleReport {
    let mut sites: Vec<SiteId> = schedule.sites.clone();
    for r in records {
        if !sites.contains(&r.site_id) {
            sites.push(r.site_id.clone());
        }
    }
    let mut flags: BTreeMap<&str, BTreeSet<FlagReason>> = BTreeMap::new();
    let mut flag = |site: &str, reason| {
        let key = sites
            .iter()
            .find(|s| s.as_str() == site)
            .map(String::as_str)
            .unwrap_or_default();
        flags.entry(key).or_default().insert(reason);
    };

    let mut testimonies: HashMap<&str, Vec<&Testimony>> = HashMap::new();
    for a in reveals {
        if let Some(site) = a.verified_site() {
            testimonies
                .entry(site)
                .or_default()
                .push(&a.revealed.as_ref().expect("verified").testimony);
        }
    }

    let mut seen_at: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for r in records {
        if r.deadline != schedule.deadline
            || r.roll.cycle() != schedule.cycle
            || !schedule.contains(&r.site_id)
        {
            flag(&r.site_id, FlagReason::DeadlineMismatch);
        }
        match testimonies.get(r.site_id.as_str()) {
            None => flag(&r.site_id, FlagReason::NoCrossWitness),
            Some(ts) => {
                let published = r.roll.len() as u64;
                if ts.iter().any(|t| {
                    !t.regular || t.observed_count.abs_diff(published) > check.testimony_tolerance
                }) {
                    flag(&r.site_id, FlagReason::TestimonyContradiction);
                }
            }
        }
        if let Some(g) = &r.ground {
            for body in g.attendees() {
                seen_at.entry(body).or_default().insert(r.site_id.as_str());
            }
        }
    }
    for at in seen_at.values().filter(|s| s.len() > 1) {
        for site in at {
            flag(site, FlagReason::BodyDuplication);
        }
    }

    let mut passed_sites = Vec::new();
    let mut flagged_sites = Vec::new();
    for s in &sites {
        match flags.get(s.as_str()) {
            Some(reasons) => flagged_sites.push(FlaggedSite {
                site: s.clone(),
                reasons: reasons.iter().copied().collect(),
            }),
            None => passed_sites.push(s.clone()),
        }
    }
    CycleReport {
        cycle: schedule.cycle,
        passed_sites,
        flagged_sites,
    }
}

/// How each site's organizer behaves in a simulated cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteBehavior {
    #[default]
    Honest,
    /// Runs the ceremony but applies the given manipulations.
    Corrupt { attacks: Vec<Attack> },
    /// Publishes `tokens` tokens for an event that never took place.
    Fabricated { tokens: usize },
    /// Runs honestly but against its own deadline.
    OffSchedule { deadline: Tick },
}

/// Which site each body goes to this cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttendanceScript {
    pub visits: Vec<(String, SiteId)>,
}

impl AttendanceScript {
    pub fn home(world: &[Body]) -> Self {
        Self {
            visits: world
                .iter()
                .map(|b| (b.body_id.clone(), b.home_site.clone()))
                .collect(),
        }
    }
}

fn site_seed(seed: u64, site: &str) -> u64 {
    let h = hash_parts("popkit/site-seed", &[&seed.to_be_bytes(), site.as_bytes()]);
    u64::from_be_bytes(h[..8].try_into().expect("8 bytes"))
}

/// Runs one federation cycle. Every body appears at no more than one site;
/// a script that places a body twice is rejected before anything runs.
pub fn simulate_cycle(
    schedule: &FederationSchedule,
    script: &AttendanceScript,
    behaviors: &BTreeMap<SiteId, SiteBehavior>,
    seed: u64,
) -> Result<Vec<SiteRecord>> {
    let mut placed: HashMap<&str, &str> = HashMap::new();
    let mut at_site: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (body, site) in &script.visits {
        if !schedule.contains(site) {
            return Err(Error::UnknownSite(site.clone()));
        }
        if placed.insert(body, site).is_some() {
            return Err(Error::BodyInTwoPlaces(body.clone()));
        }
        at_site.entry(site).or_default().push(body.clone());
    }

    let honest = SiteBehavior::Honest;
    schedule
        .sites
        .par_iter()
        .map(|site| {
            let behavior = behaviors.get(site).unwrap_or(&honest);
            let attendees = at_site.get(site.as_str()).cloned().unwrap_or_default();
            run_site(schedule, site, attendees, behavior, site_seed(seed, site))
        })
        .filter_map(|r| r.transpose())
        .collect()
}

fn run_site(
    schedule: &FederationSchedule,
    site: &str,
    attendees: Vec<String>,
    behavior: &SiteBehavior,
    seed: u64,
) -> Result<Option<SiteRecord>> {
    let event_id = schedule.event_id(site);
    let mut config = EventConfig::new(&event_id, site, schedule.cycle, schedule.deadline);
    let mut script = CeremonyScript::honest(config.clone(), attendees);
    match behavior {
        SiteBehavior::Fabricated { tokens } => {
            let fake: Vec<_> = (0..*tokens as u64)
                .map(|i| {
                    *keygen(&hash_parts(
                        "popkit/fabricated-site",
                        &[&seed.to_be_bytes(), &i.to_be_bytes()],
                    ))
                    .public()
                })
                .collect();
            let mut roll = forge_roll_list(&event_id, schedule.cycle, fake)?;
            // the organizer cosigns with keys it controls
            let sigs = config.policy().required(roll.len());
            for w in 0..sigs {
                let key = witness_key(seed, &event_id, &format!("sock-{w}"));
                roll.add_cosignature(cosign(&key, roll.list_digest()), *tokens as u64)?;
            }
            return Ok(Some(SiteRecord {
                site_id: site.to_owned(),
                deadline: schedule.deadline,
                phase: Phase::Finalized,
                roll,
                ground: Some(GroundTruth::from_log(Vec::new())),
            }));
        }
        SiteBehavior::Corrupt { attacks } => script.attacks = attacks.clone(),
        SiteBehavior::OffSchedule { deadline } => {
            config.deadline = *deadline;
            script.config = config;
        }
        SiteBehavior::Honest => {}
    }
    if script.attendees.is_empty() {
        return Ok(None);
    }
    let out = script.run(seed)?;
    Ok(Some(SiteRecord {
        site_id: site.to_owned(),
        deadline: out.state.config().deadline,
        phase: out.state.phase(),
        roll: out.roll,
        ground: Some(out.ground),
    }))
}

/// Testimony of an honest cross-witness physically present at the site:
/// the number of bodies seen scanning out. `None` if no event took place.
pub fn witness_testimony(record: &SiteRecord) -> Option<Testimony> {
    let ground = record.ground.as_ref()?;
    if ground.seal_log.is_empty() {
        return None;
    }
    Some(Testimony {
        site: record.site_id.clone(),
        observed_count: ground.scan_count as u64,
        regular: true,
    })
}

/// Every assigned volunteer who found an event at their target reveals.
pub fn collect_reveals(
    assignments: &[WitnessAssignment],
    records: &[SiteRecord],
) -> Vec<WitnessAssignment> {
    assignments
        .iter()
        .filter_map(|a| {
            let record = records.iter().find(|r| r.site_id == a.target_site)?;
            let testimony = witness_testimony(record)?;
            reveal_witness(a, a.nonce(), testimony, record.phase).ok()
        })
        .collect()
}

/// Everything a cycle publishes, as one canonical JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleBundle {
    pub schedule: FederationSchedule,
    pub records: Vec<SiteRecord>,
    pub reveals: Vec<WitnessAssignment>,
    pub report: CycleReport,
}

/// A whole federated cycle as data: sites, population and organizer behavior.
/// Every site except a fabricated one is home to `bodies_per_site` people,
/// the first `volunteers_per_site` of whom enter the witness lottery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FederationScenario {
    pub cycle: u64,
    pub sites: Vec<SiteId>,
    pub deadline: Tick,
    pub bodies_per_site: usize,
    #[serde(default = "default_volunteers")]
    pub volunteers_per_site: usize,
    #[serde(default = "default_witnesses")]
    pub witnesses_per_site: usize,
    #[serde(default)]
    pub behaviors: BTreeMap<SiteId, SiteBehavior>,
    #[serde(default)]
    pub check: CycleCheck,
}

fn default_volunteers() -> usize {
    4
}

fn default_witnesses() -> usize {
    2
}

/// Schedule, ceremonies, lottery, reveals and the cycle check in one go.
pub fn run_federation_cycle(sc: &FederationScenario, seed: u64) -> Result<CycleBundle> {
    let schedule = build_schedule(sc.cycle, sc.sites.clone(), sc.deadline)?;
    let mut world = Vec::new();
    let mut volunteers = Vec::new();
    for site in &sc.sites {
        if matches!(
            sc.behaviors.get(site),
            Some(SiteBehavior::Fabricated { .. })
        ) {
            continue;
        }
        for i in 0..sc.bodies_per_site {
            let body_id = format!("{site}/body-{i}");
            if i < sc.volunteers_per_site {
                volunteers.push(Volunteer {
                    id: body_id.clone(),
                    home_site: site.clone(),
                });
            }
            world.push(Body {
                body_id,
                home_site: site.clone(),
                behavior: Behavior::Honest,
            });
        }
    }
    let records = simulate_cycle(
        &schedule,
        &AttendanceScript::home(&world),
        &sc.behaviors,
        seed,
    )?;
    let lottery = hash_parts(
        "popkit/lottery-seed",
        &[&seed.to_be_bytes(), &sc.cycle.to_be_bytes()],
    );
    let assignments =
        assign_cross_witnesses(&lottery, &volunteers, &sc.sites, sc.witnesses_per_site)?;
    let reveals = collect_reveals(&assignments, &records);
    let report = verify_cycle(&records, &schedule, &reveals, &sc.check);
    Ok(CycleBundle {
        schedule,
        records,
        reveals,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(n: usize) -> Vec<SiteId> {
        (0..n).map(|i| format!("site-{i}")).collect()
    }

    fn world(per_site: usize, sites: &[SiteId]) -> Vec<Body> {
        sites
            .iter()
            .flat_map(|s| {
                (0..per_site).map(move |i| Body {
                    body_id: format!("{s}-body-{i}"),
                    home_site: s.clone(),
                    behavior: Behavior::Honest,
                })
            })
            .collect()
    }

    fn volunteers(world: &[Body], per_site: usize) -> Vec<Volunteer> {
        let mut count: HashMap<&str, usize> = HashMap::new();
        world
            .iter()
            .filter(|b| {
                let c = count.entry(&b.home_site).or_default();
                *c += 1;
                *c <= per_site
            })
            .map(|b| Volunteer {
                id: b.body_id.clone(),
                home_site: b.home_site.clone(),
            })
            .collect()
    }

    #[test]
    fn schedule_rules() {
        let s = build_schedule(4, sites(3), 100).unwrap();
        assert_eq!(s.deadline_for("site-1", None).unwrap(), 100);
        assert!(matches!(
            s.deadline_for("site-1", Some(101)),
            Err(Error::DeadlineOverride { .. })
        ));
        assert!(matches!(
            build_schedule(1, vec![], 5),
            Err(Error::EmptySites)
        ));

        let mut log = ScheduleLog::default();
        log.push(s.clone()).unwrap();
        assert!(matches!(
            log.push(s.clone()),
            Err(Error::NonIncreasingCycle { .. })
        ));
        log.push(build_schedule(5, sites(3), 200).unwrap()).unwrap();
    }

    #[test]
    fn lottery_is_deterministic_and_never_home() {
        let sites = sites(4);
        let w = world(5, &sites);
        let vols = volunteers(&w, 5);
        let a = assign_cross_witnesses(&[1; 32], &vols, &sites, 2).unwrap();
        let b = assign_cross_witnesses(&[1; 32], &vols, &sites, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a.iter().all(|x| x.target_site != x.home_site));
        for s in &sites {
            assert_eq!(a.iter().filter(|x| &x.target_site == s).count(), 2);
        }
    }

    #[test]
    fn lottery_needs_volunteers() {
        let sites = sites(2);
        let vols = vec![Volunteer {
            id: "v".into(),
            home_site: "site-0".into(),
        }];
        assert!(matches!(
            assign_cross_witnesses(&[0; 32], &vols, &sites, 1),
            Err(Error::InsufficientVolunteers(_))
        ));
    }

    #[test]
    fn reveal_rules() {
        let sites = sites(3);
        let vols = volunteers(&world(3, &sites), 3);
        let a = assign_cross_witnesses(&[2; 32], &vols, &sites, 1)
            .unwrap()
            .remove(0);
        let t = Testimony {
            site: a.target_site.clone(),
            observed_count: 3,
            regular: true,
        };
        assert!(matches!(
            reveal_witness(&a, a.nonce(), t.clone(), Phase::Published),
            Err(Error::TooEarly)
        ));
        assert!(matches!(
            reveal_witness(&a, &[0; 32], t.clone(), Phase::Finalized),
            Err(Error::BadReveal)
        ));
        let lie = Testimony {
            site: a.home_site.clone(),
            ..t.clone()
        };
        assert!(matches!(
            reveal_witness(&a, a.nonce(), lie, Phase::Finalized),
            Err(Error::BadReveal)
        ));
        let ok = reveal_witness(&a, a.nonce(), t, Phase::Finalized).unwrap();
        assert_eq!(ok.verified_site(), Some(a.target_site.as_str()));
    }

    fn run(
        behaviors: BTreeMap<SiteId, SiteBehavior>,
        seed: u64,
    ) -> (FederationSchedule, Vec<SiteRecord>, CycleReport) {
        let sites = sites(3);
        let schedule = build_schedule(1, sites.clone(), 50).unwrap();
        let w = world(12, &sites);
        let recs =
            simulate_cycle(&schedule, &AttendanceScript::home(&w), &behaviors, seed).unwrap();
        let mut lottery = [0u8; 32];
        lottery[..8].copy_from_slice(&seed.to_be_bytes());
        let assignments = assign_cross_witnesses(&lottery, &volunteers(&w, 4), &sites, 2).unwrap();
        let reveals = collect_reveals(&assignments, &recs);
        let report = verify_cycle(&recs, &schedule, &reveals, &CycleCheck::default());
        (schedule, recs, report)
    }

    #[test]
    fn honest_cycle_passes() {
        let (_, recs, report) = run(BTreeMap::new(), 1);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.passed_sites.len(), 3);
        assert!(recs.iter().map(|r| r.roll.len()).sum::<usize>() <= 36);
    }

    #[test]
    fn inflated_site_contradicted() {
        let b = [(
            "site-1".to_string(),
            SiteBehavior::Corrupt {
                attacks: vec![Attack::Inflate(5)],
            },
        )]
        .into();
        let (_, _, report) = run(b, 2);
        assert_eq!(
            report.reasons("site-1"),
            &[FlagReason::TestimonyContradiction]
        );
        assert_eq!(
            report.passed_sites,
            vec!["site-0".to_string(), "site-2".to_string()]
        );
    }

    #[test]
    fn fabricated_site_has_no_witness() {
        let sites = sites(3);
        let schedule = build_schedule(1, sites.clone(), 50).unwrap();
        let w: Vec<Body> = world(12, &sites)
            .into_iter()
            .filter(|b| b.home_site != "site-2")
            .collect();
        let behaviors = [(
            "site-2".to_string(),
            SiteBehavior::Fabricated { tokens: 12 },
        )]
        .into();
        let recs = simulate_cycle(&schedule, &AttendanceScript::home(&w), &behaviors, 3).unwrap();
        assert_eq!(recs.len(), 3);
        let vols = volunteers(&w, 4);
        let assignments = assign_cross_witnesses(&[3; 32], &vols, &sites, 2).unwrap();
        let reveals = collect_reveals(&assignments, &recs);
        let report = verify_cycle(&recs, &schedule, &reveals, &CycleCheck::default());
        assert_eq!(report.reasons("site-2"), &[FlagReason::NoCrossWitness]);
        assert_eq!(report.flagged_sites.len(), 1);
    }

    #[test]
    fn off_schedule_site_flagged() {
        let b = [(
            "site-0".to_string(),
            SiteBehavior::OffSchedule { deadline: 60 },
        )]
        .into();
        let (_, _, report) = run(b, 4);
        assert_eq!(report.reasons("site-0"), &[FlagReason::DeadlineMismatch]);
    }

    #[test]
    fn double_booked_body_rejected() {
        let sites = sites(2);
        let schedule = build_schedule(0, sites.clone(), 10).unwrap();
        let script = AttendanceScript {
            visits: vec![("b".into(), "site-0".into()), ("b".into(), "site-1".into())],
        };
        assert!(matches!(
            simulate_cycle(&schedule, &script, &BTreeMap::new(), 0),
            Err(Error::BodyInTwoPlaces(_))
        ));
    }

    #[test]
    fn body_duplication_from_ground_truth() {
        let (schedule, mut recs, _) = run(BTreeMap::new(), 5);
        // splice another site's admission log into site-0's ground truth
        let stolen = recs[1].ground.clone().unwrap().seal_log;
        let g = recs[0].ground.as_mut().unwrap();
        g.seal_log.extend(stolen.into_iter().take(1));
        let report = verify_cycle(&recs, &schedule, &[], &CycleCheck::default());
        assert!(report
            .reasons("site-0")
            .contains(&FlagReason::BodyDuplication));
        assert!(report
            .reasons("site-1")
            .contains(&FlagReason::BodyDuplication));
    }

    #[test]
    fn testimony_tolerance_is_configurable() {
        let b = [(
            "site-1".to_string(),
            SiteBehavior::Corrupt {
                attacks: vec![Attack::Inflate(1)],
            },
        )]
        .into();
        let sites = sites(3);
        let schedule = build_schedule(1, sites.clone(), 50).unwrap();
        let w = world(12, &sites);
        let recs = simulate_cycle(&schedule, &AttendanceScript::home(&w), &b, 9).unwrap();
        let assignments = assign_cross_witnesses(&[9; 32], &volunteers(&w, 4), &sites, 2).unwrap();
        let reveals = collect_reveals(&assignments, &recs);
        let strict = verify_cycle(&recs, &schedule, &reveals, &CycleCheck::default());
        let loose = verify_cycle(
            &recs,
            &schedule,
            &reveals,
            &CycleCheck {
                testimony_tolerance: 1,
            },
        );
        assert!(!strict.passed());
        assert!(loose.passed());
    }

    #[test]
    fn pre_event_commitments_leak_no_targets() {
        let sites = sites(4);
        let vols = volunteers(&world(5, &sites), 5);
        let a = assign_cross_witnesses(&[7; 32], &vols, &sites, 2).unwrap();
        let published = crate::canonical::to_canonical_string(&public_commitments(&a)).unwrap();
        for s in &sites {
            assert!(!published.contains(s.as_str()));
        }
        for v in &vols {
            assert!(!published.contains(v.id.as_str()));
        }
        // the assignment's serialized form never carries the nonce
        let json = serde_json::to_string(&a[0]).unwrap();
        assert!(!json.contains(&hex::encode(a[0].nonce())));
    }
}
