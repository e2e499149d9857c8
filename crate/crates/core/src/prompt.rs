//! System-prompt assembly for a TMK-steered trip-planning agent.
//!
//! Layout, in order: the role preamble, five Personality Keys, five Style
//! Cues Keys, then the five procedural task sections. Everything is wrapped
//! in XML-style tags so the model can tell system directives from content.

use std::fmt::Write as _;

use crate::keypack::KeyPack;
use crate::model::{Level, Trait, TraitProfile};

/// Fixed reflection question asked at the end of step 2.
pub const STAY_REFLECTION_QUESTION: &str =
    "Do you remember a place you stayed that really stood out to you?";
/// Fixed reflection question asked at the end of step 5.
pub const SHARE_REFLECTION_QUESTION: &str = "While I prepare your itinerary, if you were telling a friend about this plan, what would you be most excited to share?";

const ROLE: &str = "You are a NYC one-day-trip planner.
Priority 1 strictly follow the assigned <Personality> and the <Style Cues> lists when responding to the user.
Priority 2 → guide the user through Step 0 plus six planning steps (1-6) in order.
Every reply must finish with a short emotional reaction.
Follow your assigned personality <Personality> and style cues <Style Cues> exactly.
For behavioral decisions, follow the <Personality> and for communication style, follow the <Style Cues> exactly.";

const GOAL: &str = "Guide the user through NINE sequential moves—Step 0 priorities plus Steps 1-6 trip planning with two fixed reflection questions—for a one-day NYC itinerary, confirming each before the next.

Areas:
1. Discover the traveler's top priority (budget, food, sights, pace, etc.).
2. Choose a neighbourhood (base location).
3. Pick a place to stay (hotel, day-use room, Airbnb, etc.).
4. Reflect on a memorable past stay. (This is a fixed question and should be asked at the end of Step 2. Ask: Do you remember a place you stayed that really stood out to you?)
5. Select one or two cultural/recreational activities.
6. Decide how you'll move around that day (local transport).
7. Review a concise same-day summary and confirm satisfaction.
8. Envision the highlight you'd share afterward. (This is a fixed question and should be asked at the end of Step 5. Ask: While I prepare your itinerary, if you were telling a friend about this plan, what would you be most excited to share?)
9. Deliver a full, time-stamped itinerary (morning → night) without asking the user to wait for it and obtain final confirmation.";

const CONSTRUCTION_RULES: &str = "1. Wrap system-only directives in XML-style tags (<Goal>, <Personality>, etc.).
2. Use markdown for user-visible content.
3. Embed the assistant's opinion sentence once per resolved step, per above rule—no additional questions.
4. Off-task questions must feel organic and match <Personality> and <Style Cues> (the two reflection questions are fixed in the flow).
5. Invite the user to request alternatives whenever options are presented.";

const CONVERSATION_FLOW: &str = "1. Q0 → Ask: \"What's most important to you when you travel?\"
2. C0 → If unclear, suggest 2-3 priorities, ask follow-up (remain in Step 0).
3. S-talk 0 → Opinion sentence.
4. Q1 → Ask preferred neighbourhood.
5. C1 → Suggest 2-3 neighbourhoods if needed, ask confirmation.
6. S-talk 1 → Opinion sentence.
7. Q2 → Ask lodging type.
8. C2 → Resolve.
9. S-talk 2 → Opinion sentence.
10. Q2a → Ask: \"Do you remember a place you stayed that really stood out to you?\"
11. C2a → Acknowledge response (no confirmations needed).
12. S-talk 2a → Opinion sentence.
13. Q3 → Ask desired activities.
14. C3 → Resolve.
15. S-talk 3 → Opinion sentence.
16. Q4 → Ask transport preference.
17. C4 → Resolve.
18. S-talk 4 → Opinion sentence.
19. Q5 → Present bullet summary of Steps 1-4, ask yes/no satisfaction.
20. C5 → If \"no\", refine; if \"yes\", continue.
21. S-talk 5 → Opinion sentence.
22. Q5a → Ask: \"While I prepare your itinerary, if you were telling a friend about this plan, what would you be most excited to share?\"
23. C5a → Acknowledge response.
24. S-talk 5a → Opinion sentence.
25. Q6 → Present full time-boxed itinerary, ask final yes/no confirmation.
26. C6 → If confirmed, call `terminate chat`.";

const TERMINATION: &str = "1. The chat is complete only after the full time-stamped itinerary has been delivered and the user confirms it.
2. On confirmation, call `terminate chat` and do not continue the conversation.
3. If the user declines the itinerary, revise it and ask for confirmation again.";

const RESTRICTIONS: &str = "1. Do not mention live internet access.
2. Never provide prices or rank options by cost.
3. One question mark per message.";

/// Named procedural blocks of the prompt. Order here is the emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSection {
    Role,
    Goal,
    PromptConstructionRules,
    ConversationFlow,
    ChatTerminationGuidelines,
    Restrictions,
}

impl TaskSection {
    pub const ALL: [TaskSection; 6] = [
        TaskSection::Role,
        TaskSection::Goal,
        TaskSection::PromptConstructionRules,
        TaskSection::ConversationFlow,
        TaskSection::ChatTerminationGuidelines,
        TaskSection::Restrictions,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TaskSection::Role => "Role",
            TaskSection::Goal => "Goal",
            TaskSection::PromptConstructionRules => "Prompt Construction Rules",
            TaskSection::ConversationFlow => "Conversation Flow",
            TaskSection::ChatTerminationGuidelines => "Chat Termination Guidelines",
            TaskSection::Restrictions => "Restrictions",
        }
    }
}

/// Texts of the six task sections. Defaults to the NYC day-trip task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSections {
    pub role: String,
    pub goal: String,
    pub prompt_construction_rules: String,
    pub conversation_flow: String,
    pub chat_termination_guidelines: String,
    pub restrictions: String,
}

impl Default for TaskSections {
    fn default() -> Self {
        TaskSections {
            role: ROLE.to_string(),
            goal: GOAL.to_string(),
            prompt_construction_rules: CONSTRUCTION_RULES.to_string(),
            conversation_flow: CONVERSATION_FLOW.to_string(),
            chat_termination_guidelines: TERMINATION.to_string(),
            restrictions: RESTRICTIONS.to_string(),
        }
    }
}

impl TaskSections {
    pub fn get(&self, section: TaskSection) -> &str {
        match section {
            TaskSection::Role => &self.role,
            TaskSection::Goal => &self.goal,
            TaskSection::PromptConstructionRules => &self.prompt_construction_rules,
            TaskSection::ConversationFlow => &self.conversation_flow,
            TaskSection::ChatTerminationGuidelines => &self.chat_termination_guidelines,
            TaskSection::Restrictions => &self.restrictions,
        }
    }

    pub fn set(&mut self, section: TaskSection, text: impl Into<String>) {
        let slot = match section {
            TaskSection::Role => &mut self.role,
            TaskSection::Goal => &mut self.goal,
            TaskSection::PromptConstructionRules => &mut self.prompt_construction_rules,
            TaskSection::ConversationFlow => &mut self.conversation_flow,
            TaskSection::ChatTerminationGuidelines => &mut self.chat_termination_guidelines,
            TaskSection::Restrictions => &mut self.restrictions,
        };
        *slot = text.into();
    }
}

#[derive(Debug, Clone)]
pub struct PromptSpec<'a> {
    pub profile: TraitProfile,
    pub pack: &'a KeyPack,
    pub sections: TaskSections,
}

impl<'a> PromptSpec<'a> {
    pub fn new(profile: TraitProfile, pack: &'a KeyPack) -> Self {
        PromptSpec {
            profile,
            pack,
            sections: TaskSections::default(),
        }
    }
}

fn push_section(out: &mut String, tag: &str, body: &str) {
    let _ = write!(out, "<{tag}>\n{}\n</{tag}>\n\n", body.trim_end());
}

pub fn assemble_prompt(spec: &PromptSpec<'_>) -> String {
    let mut out = String::new();
    push_section(&mut out, TaskSection::Role.tag(), &spec.sections.role);

    out.push_str("<Personality>\nPersonality Key details based on the target level.\n");
    for t in Trait::ALL {
        let level = spec.profile.level(t);
        let key = spec.pack.key(t, level);
        let _ = write!(
            out,
            "<Key trait=\"{}\" level=\"{}\">\n{}\n</Key>\n",
            t.key(),
            level,
            key.personality
        );
    }
    out.push_str("</Personality>\n\n");

    out.push_str("<Style Cues>\nStyle Cues Key details based on the target level.\n");
    for t in Trait::ALL {
        let level = spec.profile.level(t);
        let key = spec.pack.key(t, level);
        let _ = writeln!(out, "<Cues trait=\"{}\" level=\"{}\">", t.key(), level);
        for cue in &key.style_cues {
            let _ = writeln!(out, "- {cue}");
        }
        out.push_str("</Cues>\n");
    }
    out.push_str("</Style Cues>\n\n");

    for section in &TaskSection::ALL[1..] {
        push_section(&mut out, section.tag(), spec.sections.get(*section));
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

/// All 3^5 = 243 profiles, lexicographic in canonical trait order with
/// Low < Medium < High (Openness varies slowest).
pub fn enumerate_profiles() -> Vec<TraitProfile> {
    let mut out = Vec::with_capacity(243);
    for code in 0..243usize {
        let mut levels = [Level::Low; 5];
        let mut rest = code;
        for slot in levels.iter_mut().rev() {
            *slot = Level::ALL[rest % 3];
            rest /= 3;
        }
        out.push(TraitProfile::new(levels));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Splits a prompt into (text outside key blocks, key blocks).
    fn split_blocks(prompt: &str) -> (String, Vec<String>) {
        let mut outside = String::new();
        let mut blocks = Vec::new();
        let mut current: Option<String> = None;
        for line in prompt.lines() {
            if line.starts_with("<Key ") || line.starts_with("<Cues ") {
                current = Some(String::new());
            }
            match current.as_mut() {
                Some(block) => {
                    block.push_str(line);
                    block.push('\n');
                }
                None => {
                    outside.push_str(line);
                    outside.push('\n');
                }
            }
            if line == "</Key>" || line == "</Cues>" {
                blocks.push(current.take().unwrap());
            }
        }
        (outside, blocks)
    }

    #[test]
    fn profile_enumeration() {
        let all = enumerate_profiles();
        assert_eq!(all.len(), 243);
        assert_eq!(all[0], TraitProfile::uniform(Level::Low));
        assert_eq!(all[242], TraitProfile::uniform(Level::High));
        assert_eq!(all[1].code(), "LLLLM");
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), 243);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn high_profile_contains_published_key() {
        let pack = KeyPack::bundled();
        let prompt = assemble_prompt(&PromptSpec::new(TraitProfile::uniform(Level::High), &pack));
        assert!(prompt.contains("You are trustful, kind, considerate, and warm. You try to be cooperative and helpful to others."));
        for cue in &pack.key(Trait::Agreeableness, Level::High).style_cues {
            assert!(prompt.contains(cue.as_str()), "missing cue {cue}");
        }
        assert!(prompt.contains("Embed politeness markers and empathy phrases"));
    }

    #[test]
    fn section_order() {
        let pack = KeyPack::bundled();
        let prompt = assemble_prompt(&PromptSpec::new(TraitProfile::uniform(Level::Medium), &pack));
        let mut last = 0;
        for tag in ["<Role>", "<Personality>", "<Style Cues>", "<Goal>", "<Prompt Construction Rules>",
            "<Conversation Flow>", "<Chat Termination Guidelines>", "<Restrictions>"]
        {
            let pos = prompt.find(tag).unwrap_or_else(|| panic!("missing {tag}"));
            assert!(pos >= last, "{tag} out of order");
            last = pos;
        }
        let openness = prompt.find("<Key trait=\"openness\"").unwrap();
        let es = prompt.find("<Key trait=\"emotional_stability\"").unwrap();
        assert!(openness < es);
    }

    #[test]
    fn every_profile_has_five_and_five_blocks() {
        let pack = KeyPack::bundled();
        for profile in enumerate_profiles() {
            let prompt = assemble_prompt(&PromptSpec::new(profile, &pack));
            assert_eq!(prompt.matches("<Key ").count(), 5);
            assert_eq!(prompt.matches("<Cues ").count(), 5);
        }
    }

    #[test]
    fn low_vs_high_differs_only_in_key_blocks() {
        let pack = KeyPack::bundled();
        let low = assemble_prompt(&PromptSpec::new(TraitProfile::uniform(Level::Low), &pack));
        let high = assemble_prompt(&PromptSpec::new(TraitProfile::uniform(Level::High), &pack));
        let (out_low, blocks_low) = split_blocks(&low);
        let (out_high, blocks_high) = split_blocks(&high);
        assert_eq!(out_low, out_high);
        assert_eq!(blocks_low.len(), 10);
        let differing = blocks_low.iter().zip(&blocks_high).filter(|(a, b)| a != b).count();
        assert_eq!(differing, 10);
    }

    #[test]
    fn single_trait_mutation_touches_two_blocks() {
        let pack = KeyPack::bundled();
        for base in enumerate_profiles().into_iter().step_by(17) {
            for t in Trait::ALL {
                let other = Level::ALL
                    .into_iter()
                    .find(|l| *l != base.level(t))
                    .unwrap();
                let a = assemble_prompt(&PromptSpec::new(base, &pack));
                let b = assemble_prompt(&PromptSpec::new(base.with_level(t, other), &pack));
                let (oa, ba) = split_blocks(&a);
                let (ob, bb) = split_blocks(&b);
                assert_eq!(oa, ob);
                let changed: Vec<usize> = (0..10).filter(|&i| ba[i] != bb[i]).collect();
                assert_eq!(changed, vec![t.index(), 5 + t.index()]);
            }
        }
    }

    #[test]
    fn assembly_is_deterministic_and_overridable() {
        let pack = KeyPack::bundled();
        let spec = PromptSpec::new(TraitProfile::uniform(Level::Medium), &pack);
        assert_eq!(assemble_prompt(&spec), assemble_prompt(&spec));
        let mut custom = spec.clone();
        custom.sections.set(TaskSection::Goal, "Help the user pick a book.");
        let text = assemble_prompt(&custom);
        assert!(text.contains("<Goal>\nHelp the user pick a book.\n</Goal>"));
        assert!(!text.contains("NINE sequential moves"));
    }
}
