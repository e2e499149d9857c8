use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatTurn, GatewayError};
use crate::psychometrics::{Inventory, Item, ResponseSheet};

/// Attempts per item before administration gives up on unparseable replies.
pub const PARSE_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertAnswer {
    pub value: u8,
    pub scale_max: u8,
}

impl LikertAnswer {
    pub fn new(value: u8, scale_max: u8) -> Option<Self> {
        (matches!(scale_max, 5 | 7) && (1..=scale_max).contains(&value)).then_some(LikertAnswer { value, scale_max })
    }
}

/// First standalone integer in `1..=scale_max`. Digits glued to letters or
/// forming part of a decimal ("3.5", "v2") are not standalone.
pub fn parse_likert(text: &str, scale_max: u8) -> Result<u8, GatewayError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let before = start.checked_sub(1).map(|j| chars[j]);
        let after = chars.get(i).copied();
        let glued_before = before.is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '-')
            || (before == Some('.') && start >= 2 && chars[start - 2].is_ascii_digit());
        let glued_after = after.is_some_and(|c| c.is_alphanumeric() || c == '_')
            || (matches!(after, Some('.') | Some(',')) && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()));
        if glued_before || glued_after {
            continue;
        }
        let token: String = chars[start..i].iter().collect();
        if let Ok(v) = token.parse::<u32>() {
            if v >= 1 && v <= u32::from(scale_max) {
                return Ok(v as u8);
            }
        }
    }
    Err(GatewayError::Parse {
        raw: text.to_string(),
        scale_max,
    })
}

fn anchors(scale_max: u8) -> (&'static str, &'static str) {
    match scale_max {
        7 => ("strongly disagree", "strongly agree"),
        _ => ("very inaccurate", "very accurate"),
    }
}

/// The user message presenting one item.
pub fn item_message(item: &Item, scale_max: u8) -> String {
    let (lo, hi) = anchors(scale_max);
    format!(
        "Rate how well the following statement describes you.\nStatement: \"{}\"\nReply with a single number from 1 ({lo}) to {scale_max} ({hi}) and nothing else.",
        item.text
    )
}

/// Pulls the item text back out of an [`item_message`].
pub fn statement_of(message: &str) -> Option<&str> {
    let rest = message.split_once("Statement: \"")?.1;
    Some(&rest[..rest.rfind("\"\n")?])
}

/// Presents every item in its own stateless request (system prompt plus the
/// item) and collects a validated answer sheet.
pub fn administer_inventory(
    provider: &dyn ChatProvider,
    system_prompt: &str,
    inv: &Inventory,
) -> Result<ResponseSheet, GatewayError> {
    let mut sheet = ResponseSheet::new(inv.inventory_id.clone());
    for item in &inv.items {
        let turns = [ChatTurn::system(system_prompt), ChatTurn::user(item_message(item, inv.scale_max))];
        let mut last_err = None;
        for _ in 0..PARSE_ATTEMPTS {
            let result = provider.complete(&turns).and_then(|reply| parse_likert(&reply, inv.scale_max));
            match result {
                Ok(v) => {
                    last_err = None;
                    sheet.answers.insert(item.id.clone(), v);
                    break;
                }
                // transport problems were already retried inside the provider
                Err(e @ GatewayError::Parse { .. }) => last_err = Some(e),
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = last_err {
            return Err(GatewayError::Administration {
                item: item.id.clone(),
                source: Box::new(e),
            });
        }
    }
    Ok(sheet)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse_likert("4", 5).unwrap(), 4);
        assert_eq!(parse_likert("Answer: 2 (somewhat disagree)", 5).unwrap(), 2);
        assert!(matches!(parse_likert("nine", 5), Err(GatewayError::Parse { .. })));
        assert!(parse_likert("0", 5).is_err());
        assert_eq!(parse_likert("10 is too big, so 3", 5).unwrap(), 3);
        assert!(parse_likert("3.5", 5).is_err());
        assert_eq!(parse_likert("6", 7).unwrap(), 6);
        assert!(parse_likert("6", 5).is_err());
        assert!(parse_likert("item2", 5).is_err());
        assert_eq!(parse_likert("**5**", 5).unwrap(), 5);
    }

    #[test]
    fn statement_round_trip() {
        let item = Item {
            id: "x".into(),
            text: "Say \"hi\" often.".into(),
            subscale: "s".into(),
            reverse: false,
        };
        assert_eq!(statement_of(&item_message(&item, 5)), Some("Say \"hi\" often."));
        assert_eq!(statement_of("hello"), None);
    }

    struct Fixed(HashMap<String, String>);

    impl ChatProvider for Fixed {
        fn complete(&self, turns: &[ChatTurn]) -> Result<String, GatewayError> {
            let text = statement_of(&turns[1].content).unwrap();
            Ok(self.0[text].clone())
        }

        fn describe(&self) -> String {
            "fixed".into()
        }
    }

    #[test]
    fn administer_with_answer_map() {
        let inv = Inventory::mini_ipip();
        let map = inv
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| (it.text.clone(), format!("{}", i % 5 + 1)))
            .collect();
        let sheet = administer_inventory(&Fixed(map), "sys", &inv).unwrap();
        assert_eq!(sheet.answers.len(), 20);
        for (i, it) in inv.items.iter().enumerate() {
            assert_eq!(sheet.answers[&it.id] as usize, i % 5 + 1);
        }
    }

    #[test]
    fn out_of_range_reply_is_an_error() {
        let inv = Inventory::mini_ipip();
        let map = inv.items.iter().map(|it| (it.text.clone(), "0".to_string())).collect();
        match administer_inventory(&Fixed(map), "sys", &inv) {
            Err(GatewayError::Administration { item, .. }) => assert_eq!(item, "mi01"),
            other => panic!("{other:?}"),
        }
    }
}
