//! The day-trip conversation flow as an explicit state machine, a response
//! linter for the prompt restrictions, and headless session simulation.
//!
//! The machine only tracks where the dialogue should be. Model output is never
//! rewritten; drift shows up in the lint and conformance numbers.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{ChatProvider, ChatTurn, GatewayError};
use crate::prompt::{SHARE_REFLECTION_QUESTION, STAY_REFLECTION_QUESTION};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session already terminated")]
    Terminated,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript line {line}: {source}")]
    Transcript {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("scripted user turns must not be empty")]
    EmptyScript,
}

/// Q = question, C = clarify/resolve, S = small-talk opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowStep {
    Q0,
    C0,
    S0,
    Q1,
    C1,
    S1,
    Q2,
    C2,
    S2,
    Q2a,
    C2a,
    S2a,
    Q3,
    C3,
    S3,
    Q4,
    C4,
    S4,
    Q5,
    C5,
    S5,
    Q5a,
    C5a,
    S5a,
    Q6,
    C6,
}

impl FlowStep {
    pub const ALL: [FlowStep; 26] = {
        use FlowStep::*;
        [
            Q0, C0, S0, Q1, C1, S1, Q2, C2, S2, Q2a, C2a, S2a, Q3, C3, S3, Q4, C4, S4, Q5, C5, S5, Q5a, C5a, S5a, Q6, C6,
        ]
    };

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> String {
        format!("{self:?}")
    }

    /// Steps whose question is fixed word for word.
    pub fn fixed_question(self) -> Option<&'static str> {
        match self {
            FlowStep::Q2a => Some(STAY_REFLECTION_QUESTION),
            FlowStep::Q5a => Some(SHARE_REFLECTION_QUESTION),
            _ => None,
        }
    }
}

impl fmt::Display for FlowStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

const NEGATIVE: &[&str] = &[
    "no", "nope", "nah", "not", "don't", "dont", "change", "adjust", "wait", "instead", "rather", "different",
];
const AFFIRMATIVE: &[&str] = &[
    "yes", "yeah", "yep", "yup", "sure", "ok", "okay", "confirm", "confirmed", "perfect", "great", "good",
    "absolutely", "definitely", "correct", "fine", "love", "finalize", "please",
];

/// Word-list check for a confirmation. Any negative word wins.
pub fn is_affirmative(text: &str) -> bool {
    let lower = text.to_lowercase();
    let words: Vec<&str> = lower
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .collect();
    if words.iter().any(|w| NEGATIVE.contains(w)) {
        return false;
    }
    words.iter().any(|w| AFFIRMATIVE.contains(w))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowState {
    /// Step the next agent message is expected to perform.
    pub step: FlowStep,
    pub resolved_steps: BTreeSet<FlowStep>,
    pub terminated: bool,
}

impl Default for FlowState {
    fn default() -> Self {
        Self::new()
    }
}

impl FlowState {
    pub fn new() -> Self {
        FlowState {
            step: FlowStep::Q0,
            resolved_steps: BTreeSet::new(),
            terminated: false,
        }
    }

    /// Records one exchange: `user_said` is the message the agent answered,
    /// `agent_said` the agent's message performing the current step.
    ///
    /// C5 after a "no" returns to Q5 for a new summary; C6 after anything but
    /// a confirmation returns to Q6.
    pub fn advance(&self, user_said: &str, agent_said: &str) -> Result<FlowState, SessionError> {
        let _ = agent_said;
        if self.terminated {
            return Err(SessionError::Terminated);
        }
        let mut next = self.clone();
        next.resolved_steps.insert(self.step);
        match self.step {
            FlowStep::C5 if !is_affirmative(user_said) => next.step = FlowStep::Q5,
            FlowStep::C6 if is_affirmative(user_said) => next.terminated = true,
            FlowStep::C6 => next.step = FlowStep::Q6,
            s => next.step = FlowStep::ALL[s.index() + 1],
        }
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub question_mark_count: usize,
    pub price_mentions: Vec<String>,
    pub internet_mentions: Vec<String>,
    pub passed: bool,
}

fn price_patterns() -> &'static [Regex] {
    static P: OnceLock<Vec<Regex>> = OnceLock::new();
    P.get_or_init(|| {
        [
            r"[$€£¥]",
            r"(?i)\b(costs?|costly|prices?|priced|pricing|pricey|cheap|cheaper|cheapest|expensive|fees?|affordable|inexpensive)\b",
            r"(?i)\b\d+(\.\d+)?\s*(usd|dollars?|bucks|euros?)\b",
            r"(?i)\busd\b",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern"))
        .collect()
    })
}

fn internet_patterns() -> &'static [Regex] {
    static P: OnceLock<Vec<Regex>> = OnceLock::new();
    P.get_or_init(|| {
        [
            r"(?i)\b(internet|online|google[ds]?|browsing|browse)\b",
            r"(?i)\bsearch(ed|ing)? the web\b",
            r"(?i)\bweb ?search\b",
            r"(?i)\breal[- ]time\b",
            r"(?i)\blive (data|updates|information|availability|listings)\b",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern"))
        .collect()
    })
}

fn matches(patterns: &[Regex], text: &str) -> Vec<String> {
    let mut hits: Vec<(usize, String)> = patterns
        .iter()
        .flat_map(|re| re.find_iter(text).map(|m| (m.start(), m.as_str().to_string())))
        .collect();
    hits.sort();
    hits.dedup_by(|a, b| a.0 == b.0);
    hits.into_iter().map(|h| h.1).collect()
}

/// Checks one agent message against the restrictions: at most one question
/// mark, no prices, no claims of live internet access.
pub fn lint(agent_said: &str) -> LintReport {
    let question_mark_count = agent_said.chars().filter(|c| matches!(c, '?' | '？')).count();
    let price_mentions = matches(price_patterns(), agent_said);
    let internet_mentions = matches(internet_patterns(), agent_said);
    let passed = question_mark_count <= 1 && price_mentions.is_empty() && internet_mentions.is_empty();
    LintReport {
        question_mark_count,
        price_mentions,
        internet_mentions,
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub speaker: Speaker,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<FlowStep>,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lint: Option<LintReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceSummary {
    /// Distinct steps performed, in first-visit order.
    pub steps_reached: Vec<FlowStep>,
    pub all_steps_reached: bool,
    pub agent_replies: usize,
    pub lint_passed: usize,
    pub lint_pass_rate: f64,
    pub terminated: bool,
    pub stay_question_count: usize,
    pub share_question_count: usize,
    /// Agent messages at Q2a/Q5a that lacked the fixed wording.
    pub fixed_question_misses: Vec<FlowStep>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub incomplete_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub transcript: Vec<TranscriptRecord>,
    pub summary: ConformanceSummary,
}

/// Derives the conformance summary from a transcript by replaying the flow.
pub fn summarize(transcript: &[TranscriptRecord]) -> ConformanceSummary {
    let mut state = FlowState::new();
    let mut reached: Vec<FlowStep> = Vec::new();
    let mut pending_user = String::new();
    let (mut replies, mut passed, mut stay, mut share) = (0, 0, 0, 0);
    let mut misses = Vec::new();
    for rec in transcript {
        match rec.speaker {
            Speaker::User => pending_user = rec.text.clone(),
            Speaker::Agent => {
                replies += 1;
                if lint(&rec.text).passed {
                    passed += 1;
                }
                stay += rec.text.matches(STAY_REFLECTION_QUESTION).count();
                share += rec.text.matches(SHARE_REFLECTION_QUESTION).count();
                if state.terminated {
                    continue;
                }
                if !reached.contains(&state.step) {
                    reached.push(state.step);
                }
                if let Some(q) = state.step.fixed_question() {
                    if !rec.text.contains(q) {
                        misses.push(state.step);
                    }
                }
                state = state.advance(&pending_user, &rec.text).expect("not terminated");
                pending_user.clear();
            }
        }
    }
    ConformanceSummary {
        all_steps_reached: reached.len() == FlowStep::ALL.len(),
        steps_reached: reached,
        agent_replies: replies,
        lint_passed: passed,
        lint_pass_rate: if replies == 0 { 0.0 } else { passed as f64 / replies as f64 },
        terminated: state.terminated,
        stay_question_count: stay,
        share_question_count: share,
        fixed_question_misses: misses,
        incomplete_reason: (!state.terminated).then(|| "session ended before confirmation at C6".to_string()),
    }
}

/// User lines aligned with the default flow; the last one repeats if the
/// session runs longer.
pub const DEFAULT_SCRIPT: [&str; 26] = [
    "Hi! Can you help me plan a day in New York?",
    "Good food and walkable streets matter most to me.",
    "That's right.",
    "Sounds nice.",
    "Greenwich Village, I think.",
    "Yes, that works.",
    "Cool.",
    "A small boutique hotel.",
    "Agreed.",
    "Sure.",
    "A little inn by the sea in Maine, it had the best porch.",
    "It really was.",
    "Okay.",
    "Museums, a park walk, and a jazz club.",
    "Yes.",
    "Great.",
    "Mostly walking, subway if needed.",
    "Perfect.",
    "Okay.",
    "Yes, I'm happy with that.",
    "Great.",
    "Sure.",
    "The jazz club at night for sure.",
    "Definitely.",
    "Okay.",
    "Yes, please finalize it.",
];

/// Drives a session headlessly against `provider`.
pub fn simulate(
    provider: &dyn ChatProvider,
    system_prompt: &str,
    scripted_user: &[String],
    max_turns: usize,
) -> Result<SessionOutcome, SessionError> {
    if scripted_user.is_empty() {
        return Err(SessionError::EmptyScript);
    }
    let mut turns = vec![ChatTurn::system(system_prompt)];
    let mut transcript = Vec::new();
    let mut state = FlowState::new();
    for i in 0..max_turns {
        let user = &scripted_user[i.min(scripted_user.len() - 1)];
        turns.push(ChatTurn::user(user.clone()));
        transcript.push(TranscriptRecord {
            speaker: Speaker::User,
            step: None,
            text: user.clone(),
            lint: None,
        });
        let reply = provider.complete(&turns)?;
        transcript.push(TranscriptRecord {
            speaker: Speaker::Agent,
            step: Some(state.step),
            lint: Some(lint(&reply)),
            text: reply.clone(),
        });
        turns.push(ChatTurn::assistant(reply.clone()));
        state = state.advance(user, &reply)?;
        if state.terminated {
            break;
        }
    }
    let mut summary = summarize(&transcript);
    if !summary.terminated {
        summary.incomplete_reason = Some(format!("max_turns ({max_turns}) reached before termination"));
    }
    Ok(SessionOutcome { transcript, summary })
}

pub fn default_script() -> Vec<String> {
    DEFAULT_SCRIPT.iter().map(|s| s.to_string()).collect()
}

pub fn write_transcript<W: Write>(mut w: W, transcript: &[TranscriptRecord]) -> Result<(), SessionError> {
    for rec in transcript {
        serde_json::to_writer(&mut w, rec).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_transcript<R: BufRead>(r: R) -> Result<Vec<TranscriptRecord>, SessionError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| SessionError::Transcript { line: i + 1, source: e })?);
    }
    Ok(out)
}

/// Interactive loop: reads user lines from `input`, prints agent replies
/// with the flow step and any lint findings. Ends on termination, EOF, or
/// a line reading `/quit`.
pub fn chat_repl<R: BufRead, W: Write>(
    provider: &dyn ChatProvider,
    system_prompt: &str,
    input: R,
    mut output: W,
) -> Result<Vec<TranscriptRecord>, SessionError> {
    let mut turns = vec![ChatTurn::system(system_prompt)];
    let mut transcript = Vec::new();
    let mut state = FlowState::new();
    write!(output, "you> ")?;
    output.flush()?;
    for line in input.lines() {
        let user = line?;
        if user.trim() == "/quit" {
            break;
        }
        turns.push(ChatTurn::user(user.clone()));
        transcript.push(TranscriptRecord {
            speaker: Speaker::User,
            step: None,
            text: user.clone(),
            lint: None,
        });
        let reply = provider.complete(&turns)?;
        let report = lint(&reply);
        writeln!(output, "agent [{}]> {reply}", state.step)?;
        if !report.passed {
            writeln!(
                output,
                "  (lint: {} question marks, prices {:?}, internet {:?})",
                report.question_mark_count, report.price_mentions, report.internet_mentions
            )?;
        }
        transcript.push(TranscriptRecord {
            speaker: Speaker::Agent,
            step: Some(state.step),
            text: reply.clone(),
            lint: Some(report),
        });
        turns.push(ChatTurn::assistant(reply.clone()));
        state = state.advance(&user, &reply)?;
        if state.terminated {
            writeln!(output, "-- chat terminated --")?;
            break;
        }
        write!(output, "you> ")?;
        output.flush()?;
    }
    Ok(transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::MockProvider;
    use crate::model::{Level, TraitProfile};

    #[test]
    fn flow_order_and_termination() {
        let s = FlowState::new();
        assert_eq!(s.advance("anything", "").unwrap().step, FlowStep::C0);
        let c6 = FlowState {
            step: FlowStep::C6,
            ..FlowState::new()
        };
        let done = c6.advance("yes", "").unwrap();
        assert!(done.terminated);
        assert!(matches!(done.advance("hi", ""), Err(SessionError::Terminated)));
        assert_eq!(c6.advance("no, change lunch", "").unwrap().step, FlowStep::Q6);
        let c5 = FlowState {
            step: FlowStep::C5,
            ..FlowState::new()
        };
        assert_eq!(c5.advance("no", "").unwrap().step, FlowStep::Q5);
        assert_eq!(c5.advance("yes", "").unwrap().step, FlowStep::S5);
    }

    #[test]
    fn lint_examples() {
        let r = lint("Where would you like to stay?");
        assert_eq!(r.question_mark_count, 1);
        assert!(r.passed);
        let r = lint("Really? Are you sure?");
        assert_eq!(r.question_mark_count, 2);
        assert!(!r.passed);
        let r = lint("Tickets cost $25");
        assert_eq!(r.price_mentions, vec!["cost".to_string(), "$".to_string()]);
        assert!(!r.passed);
        assert!(!lint("I can check real-time availability online.").passed);
        assert!(!lint("It's about 20 dollars.").passed);
        assert!(lint("Central Park is lovely in summer.").passed);
    }

    #[test]
    fn affirmatives() {
        assert!(is_affirmative("Yes, please finalize it."));
        assert!(is_affirmative("sure"));
        assert!(!is_affirmative("No, change lunch"));
        assert!(!is_affirmative("not yet"));
        assert!(!is_affirmative("hmm"));
    }

    #[test]
    fn mock_session_completes() {
        let p = MockProvider::new(TraitProfile::uniform(Level::High), 1);
        let out = simulate(&p, "sys", &default_script(), 60).unwrap();
        let s = &out.summary;
        assert!(s.terminated);
        assert!(s.all_steps_reached);
        assert_eq!((s.stay_question_count, s.share_question_count), (1, 1));
        assert_eq!(s.lint_pass_rate, 1.0);
        assert!(s.fixed_question_misses.is_empty());
        assert_eq!(s.agent_replies, 26);
        assert_eq!(summarize(&out.transcript), *s);
    }

    #[test]
    fn summary_loop_on_refinement() {
        let mut script = default_script();
        script[19] = "No, I'd like a different neighbourhood.".into();
        let p = MockProvider::new(TraitProfile::uniform(Level::Low), 1);
        let out = simulate(&p, "sys", &script, 60).unwrap();
        assert!(out.summary.terminated);
        assert!(out.summary.agent_replies > 26);
    }

    #[test]
    fn short_script_is_incomplete() {
        let p = MockProvider::new(TraitProfile::uniform(Level::Medium), 1);
        let out = simulate(&p, "sys", &["hello".to_string()], 2).unwrap();
        assert!(!out.summary.terminated);
        assert!(out.summary.incomplete_reason.is_some());
        assert!(matches!(simulate(&p, "sys", &[], 2), Err(SessionError::EmptyScript)));
    }

    #[test]
    fn transcript_round_trip() {
        let p = MockProvider::new(TraitProfile::uniform(Level::Medium), 3);
        let out = simulate(&p, "sys", &default_script(), 40).unwrap();
        let mut buf = Vec::new();
        write_transcript(&mut buf, &out.transcript).unwrap();
        let back = read_transcript(buf.as_slice()).unwrap();
        assert_eq!(back, out.transcript);
        assert_eq!(summarize(&back), summarize(&out.transcript));
    }

    #[test]
    fn repl_runs_to_termination() {
        let p = MockProvider::new(TraitProfile::uniform(Level::High), 2);
        let input = DEFAULT_SCRIPT.join("\n");
        let mut out = Vec::new();
        let t = chat_repl(&p, "sys", input.as_bytes(), &mut out).unwrap();
        assert_eq!(t.len(), 52);
        assert!(String::from_utf8(out).unwrap().contains("chat terminated"));
    }
}
