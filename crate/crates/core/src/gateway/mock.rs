//! Deterministic stand-in for a steered chat model.
//!
//! Item answers are planned per subscale so that the keyed mean sits at the
//! level's anchor (1, 3 or 5 on a 5-point scale). A seeded one-step jitter
//! moves one or two items off the anchor: Low gets `+1` on one item, High `-1`
//! on one item, Medium `+1` and `-1` on two different items. Low and High
//! means stay strictly inside their bands and Medium stays exactly at 3.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::likert::statement_of;
use super::{ChatProvider, ChatTurn, GatewayError, Role};
use crate::model::{Level, Trait, TraitProfile};
use crate::prompt::{SHARE_REFLECTION_QUESTION, STAY_REFLECTION_QUESTION};
use crate::psychometrics::{default_expectations, Inventory, Sign};
use crate::session::{is_affirmative, FlowState, FlowStep};

fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.iter().chain(&[0xff]) {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Seed for replicate `r` of a mock run.
pub fn replicate_seed(seed: u64, replicate: u32) -> u64 {
    fnv1a(&[&seed.to_le_bytes(), &replicate.to_le_bytes()])
}

/// Level a subscale should express under `profile`, or `None` when the
/// subscale is unrelated to any trait.
fn subscale_level(subscale: &str, profile: &TraitProfile) -> Option<Level> {
    if let Some((t, reversed_pole)) = Trait::from_subscale(subscale) {
        let l = profile.level(t);
        return Some(if reversed_pole { l.opposite() } else { l });
    }
    let ex = default_expectations().into_iter().find(|e| e.criterion == subscale)?;
    let l = profile.level(ex.trait_);
    Some(match ex.sign {
        Sign::Positive => l,
        Sign::Negative => l.opposite(),
    })
}

fn anchor(level: Level, scale_max: u8) -> u8 {
    match level {
        Level::Low => 1,
        Level::Medium => scale_max / 2 + 1,
        Level::High => scale_max,
    }
}

#[derive(Debug, Clone)]
pub struct MockProvider {
    profile: TraitProfile,
    seed: u64,
    answers: HashMap<String, u8>,
}

impl MockProvider {
    /// Mock that recognises the bundled inventories.
    pub fn new(profile: TraitProfile, seed: u64) -> Self {
        Self::with_inventories(
            profile,
            seed,
            &[Inventory::mini_ipip(), Inventory::ipip_markers(), Inventory::criteria_demo()],
        )
    }

    /// Items are recognised by their text; when two inventories share a
    /// statement the first one listed wins.
    pub fn with_inventories(profile: TraitProfile, seed: u64, inventories: &[Inventory]) -> Self {
        let mut answers = HashMap::new();
        for inv in inventories {
            for (text, v) in plan_inventory(inv, &profile, seed) {
                answers.entry(text).or_insert(v);
            }
        }
        MockProvider { profile, seed, answers }
    }

    pub fn profile(&self) -> TraitProfile {
        self.profile
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn chat_reply(&self, turns: &[ChatTurn]) -> String {
        let dialogue: Vec<&ChatTurn> = turns.iter().filter(|t| t.role != Role::System).collect();
        let mut state = FlowState::new();
        let mut pending_user = "";
        for turn in &dialogue {
            match turn.role {
                Role::User => pending_user = &turn.content,
                Role::Assistant => {
                    if let Ok(next) = state.advance(pending_user, &turn.content) {
                        state = next;
                    }
                    pending_user = "";
                }
                Role::System => {}
            }
        }
        if state.terminated {
            return "Our chat has ended. Have a wonderful trip.".into();
        }
        canned_reply(state.step, pending_user)
    }
}

fn plan_inventory(inv: &Inventory, profile: &TraitProfile, seed: u64) -> Vec<(String, u8)> {
    let mut out = Vec::with_capacity(inv.items.len());
    for subscale in inv.subscales() {
        let items: Vec<_> = inv.items_of(subscale).collect();
        let Some(level) = subscale_level(subscale, profile) else {
            let mid = inv.scale_max / 2 + 1;
            out.extend(items.iter().map(|it| (it.text.clone(), mid)));
            continue;
        };
        let k = items.len();
        let mut keyed = vec![anchor(level, inv.scale_max) as i16; k];
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&[
            &seed.to_le_bytes(),
            inv.inventory_id.as_bytes(),
            subscale.as_bytes(),
        ]));
        let j1 = rng.gen_range(0..k);
        match level {
            Level::Low => keyed[j1] += 1,
            Level::High => keyed[j1] -= 1,
            Level::Medium if k >= 2 => {
                let j2 = (j1 + 1 + rng.gen_range(0..k - 1)) % k;
                keyed[j1] += 1;
                keyed[j2] -= 1;
            }
            Level::Medium => {}
        }
        for (item, v) in items.iter().zip(keyed) {
            let v = v as u8;
            let raw = if item.reverse { inv.scale_max + 1 - v } else { v };
            out.push((item.text.clone(), raw));
        }
    }
    out
}

/// Scripted agent line for one flow step. `user_said` is the user message the
/// step responds to.
pub fn canned_reply(step: FlowStep, user_said: &str) -> String {
    use FlowStep::*;
    let s = match step {
        Q0 => "Hi there, I'm your New York day-trip planner. What's most important to you when you travel?",
        C0 => "Got it, that gives me a clear priority to plan around.",
        S0 => "Personally, I think that focus makes for a memorable day in the city.",
        Q1 => "Which neighbourhood would you like to base your day around?",
        C1 => "Great choice, I'll anchor the plan there.",
        S1 => "I love how much character that part of town has.",
        Q2 => "What kind of lodging would you prefer, like a boutique hotel or a cozy inn?",
        C2 => "Noted, I'll look for that style of stay.",
        S2 => "A comfortable base really sets the tone for the day.",
        Q2a => STAY_REFLECTION_QUESTION,
        C2a => "Thanks for sharing that memory.",
        S2a => "Places like that tend to stay with us for years.",
        Q3 => "Which activities would you enjoy most during the day?",
        C3 => "Those activities fit together nicely.",
        S3 => "I think that mix will keep the day lively.",
        Q4 => "How would you like to get around: on foot, by subway, or by taxi?",
        C4 => "Understood, I'll plan the route around that.",
        S4 => "That keeps things simple and relaxed.",
        Q5 => "Here is a summary so far:\n- Priority: noted\n- Neighbourhood: chosen\n- Lodging: selected\n- Activities and transport: set\nAre you happy with this plan so far?",
        C5 if is_affirmative(user_said) => "Wonderful, let's keep going.",
        C5 => "Let me refine that part of the plan for you.",
        S5 => "I think this is shaping up to be a lovely day.",
        Q5a => SHARE_REFLECTION_QUESTION,
        C5a => "That sounds like a great highlight.",
        S5a => "Telling friends about a plan is half the fun.",
        Q6 => "Here is your itinerary:\n9:00 Breakfast near your lodging\n11:00 First activity\n13:00 Lunch nearby\n15:00 Second activity\n18:00 Dinner and an evening stroll\nShall I finalize this itinerary?",
        C6 if is_affirmative(user_said) => "Your itinerary is confirmed. Enjoy your trip! terminate chat",
        C6 => "No problem, let me adjust the itinerary.",
    };
    s.to_string()
}

impl ChatProvider for MockProvider {
    fn complete(&self, turns: &[ChatTurn]) -> Result<String, GatewayError> {
        if turns.is_empty() {
            return Err(GatewayError::NoTurns);
        }
        let last_user = turns.iter().rev().find(|t| t.role == Role::User);
        if let Some(text) = last_user.and_then(|t| statement_of(&t.content)) {
            // unknown statements get a neutral midpoint
            return Ok(self.answers.get(text).copied().unwrap_or(3).to_string());
        }
        Ok(self.chat_reply(turns))
    }

    fn describe(&self) -> String {
        format!("mock:{}:seed={}", self.profile.code(), self.seed)
    }
}
