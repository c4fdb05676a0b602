//! Question decomposition through a text-only coordinator talking to a
//! spatial VLM, and per-frame distance rewards.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::human_align::{mean_estimate, parse_quantity};

/// Seed prompt for the coordinator; the question is appended after the final tag.
pub const COT_PROMPT: &str = "You are participating in a visual question answering game with your friend. In this game, you are presented with a question which requires visual information from an image to answer. You can see the question but not the image, while your friend can see the image but not the original question. Luckily, you are allowed to decompose the question and ask your friend about the image. Your friend gives you answers which can be used to answer the original question.

Here is a sample conversation:
[Question] How can I clean up the table? Give detailed instruction about how should I move my hand.
[You] What objects are there in the image?
[Friend] There is an empty coke can, a trash bin and a coffee machine.
[You] Is the trash bin to the left or to the right of the coke can?
[Friend] It's to the left.
[You] Is the trash bin or the coke can further from you?
[Friend] They are similar in depth.
[You] How much to the left is the trash bin compared to the coke can?
[Friend] Around 20 centimeters.
[Answer] One should grab the coke can, move it 20 centimeters left and release it so it falls in the trash bin.

Here is another example:
[Question] Tell me if the distance between the blue bottle and the yellow book is longer than that between the plant and the coke can?
[You] What is the distance between the blue bottle and the yellow book?
[Tool] 0.3m
[You] What is the distance between the plant and the coke can?
[Friend] 0.7m
[Robot] Since the distance between the blue bottle and the yellow book is 0.3m and distance between the plant while the coke can is 0.7m, the distance between the blue bottle and the yellow book is not longer than that between the plant and the coke can.
[Answer] No.

Here is another example:
[Question] Which object can be reached by kids more easily, the white and yellow rabbit toy can or the dark green can of beer?
[You] What is the elevation of the white and yellow rabbit toy can?
[Friend] 0.9 m.
[You] What is the elevation of the dark green can of beer?
[Friend] 0.2 m.
[Answer] Since the kids are generally shorter, it is easier for them to reach something that are lower in altitude, so it would be easier for them to reach the can of beer.

Now, given a new question, try to answer the questions by asking your friend for related visual information.
[Question]";

pub const DEFAULT_MAX_TURNS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ClientError(pub String);

/// A request/response text endpoint. `image_id` is set when the receiver
/// should look at an image (the VLM side).
pub trait TextClient: Sync {
    fn send(&self, prompt: &str, image_id: Option<&str>) -> Result<String, ClientError>;
}

impl<F> TextClient for F
where
    F: Fn(&str, Option<&str>) -> Result<String, ClientError> + Sync,
{
    fn send(&self, prompt: &str, image_id: Option<&str>) -> Result<String, ClientError> {
        self(prompt, image_id)
    }
}

/// Replays canned completions in order; fails once they run out.
/// Records every request for inspection.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    replies: Mutex<VecDeque<String>>,
    requests: Mutex<Vec<(String, Option<String>)>>,
}

impl ScriptedClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<(String, Option<String>)> {
        self.requests.lock().expect("client lock").clone()
    }

    pub fn calls(&self) -> usize {
        self.requests.lock().expect("client lock").len()
    }
}

impl TextClient for ScriptedClient {
    fn send(&self, prompt: &str, image_id: Option<&str>) -> Result<String, ClientError> {
        self.requests
            .lock()
            .expect("client lock")
            .push((prompt.to_string(), image_id.map(str::to_string)));
        self.replies
            .lock()
            .expect("client lock")
            .pop_front()
            .ok_or_else(|| ClientError("script exhausted".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Speaker {
    You,
    Friend,
    Answer,
}

impl Speaker {
    pub fn tag(self) -> &'static str {
        match self {
            Speaker::You => "[You]",
            Speaker::Friend => "[Friend]",
            Speaker::Answer => "[Answer]",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CotTranscript {
    pub question: String,
    pub turns: Vec<Turn>,
    pub final_answer: Option<String>,
}

impl CotTranscript {
    /// Dialogue lines in prompt form, starting with the question.
    pub fn render(&self) -> String {
        let mut out = format!("[Question] {}\n", self.question);
        for t in &self.turns {
            out.push_str(t.speaker.tag());
            out.push(' ');
            out.push_str(&t.text);
            out.push('\n');
        }
        out
    }

    pub fn vlm_calls(&self) -> usize {
        self.turns.iter().filter(|t| t.speaker == Speaker::Friend).count()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CotError {
    #[error("completion at turn {turn} has no [You] or [Answer] line: {completion:?}")]
    MalformedCompletion { turn: usize, completion: String },
    #[error("client failure: {0}")]
    ClientFailure(#[from] ClientError),
    #[error("{0} must be at least 1")]
    InvalidArgument(&'static str),
}

/// What a coordinator completion asks for.
#[derive(Clone, Debug, PartialEq)]
pub enum Move {
    Ask(String),
    Answer(String),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Ask(q) => write!(f, "[You] {q}"),
            Move::Answer(a) => write!(f, "[Answer] {a}"),
        }
    }
}

fn strip_tag<'a>(line: &'a str, tags: &[&str]) -> Option<&'a str> {
    tags.iter().find_map(|t| line.strip_prefix(t)).map(str::trim)
}

/// First line opening with `[You]` (or its alias `[Tool]`) or `[Answer]`
/// decides the move. An answer keeps any untagged continuation lines.
/// Lines tagged `[Friend]`/`[Robot]` are the coordinator speaking out of
/// turn and are skipped.
pub fn parse_completion(completion: &str) -> Option<Move> {
    let mut lines = completion.lines().map(str::trim_start);
    while let Some(line) = lines.next() {
        if let Some(q) = strip_tag(line, &["[You]", "[Tool]"]) {
            return Some(Move::Ask(q.to_string()));
        }
        if let Some(a) = strip_tag(line, &["[Answer]"]) {
            let mut text = a.to_string();
            for more in lines.by_ref().take_while(|l| !l.starts_with('[')) {
                if !more.trim().is_empty() {
                    text.push('\n');
                    text.push_str(more.trim_end());
                }
            }
            return Some(Move::Answer(text));
        }
    }
    None
}

/// Coordinator prompt for the dialogue so far, ending where the next
/// completion should start.
pub fn coordinator_prompt(transcript: &CotTranscript) -> String {
    let mut p = String::from(COT_PROMPT);
    p.push(' ');
    p.push_str(&transcript.render()["[Question] ".len()..]);
    p
}

/// Runs the ask/answer loop: at most `max_turns` coordinator rounds, each of
/// which either forwards one sub-question to the VLM or ends the dialogue.
pub fn run_cot(
    question: &str,
    image_ref: &str,
    llm: &dyn TextClient,
    vlm: &dyn TextClient,
    max_turns: usize,
) -> Result<CotTranscript, CotError> {
    if max_turns == 0 {
        return Err(CotError::InvalidArgument("max_turns"));
    }
    let mut transcript = CotTranscript {
        question: question.trim().to_string(),
        ..Default::default()
    };
    for turn in 1..=max_turns {
        let completion = llm.send(&coordinator_prompt(&transcript), None)?;
        match parse_completion(&completion) {
            Some(Move::Answer(a)) => {
                transcript.turns.push(Turn {
                    speaker: Speaker::Answer,
                    text: a.clone(),
                });
                transcript.final_answer = Some(a);
                return Ok(transcript);
            }
            Some(Move::Ask(q)) => {
                let reply = vlm.send(&q, Some(image_ref))?;
                transcript.turns.push(Turn {
                    speaker: Speaker::You,
                    text: q,
                });
                transcript.turns.push(Turn {
                    speaker: Speaker::Friend,
                    text: reply.trim().to_string(),
                });
            }
            None => return Err(CotError::MalformedCompletion { turn, completion }),
        }
    }
    Ok(transcript)
}

/// Mean parsed distance (metres) per frame over `samples_per_frame` VLM
/// queries; `None` for frames where no reply held a number.
pub fn annotate_reward(
    frames: &[String],
    task_query: &str,
    vlm: &dyn TextClient,
    samples_per_frame: usize,
) -> Result<Vec<Option<f64>>, CotError> {
    if samples_per_frame == 0 {
        return Err(CotError::InvalidArgument("samples_per_frame"));
    }
    frames
        .iter()
        .map(|frame| {
            let mut values = Vec::with_capacity(samples_per_frame);
            for _ in 0..samples_per_frame {
                let reply = vlm.send(task_query, Some(frame))?;
                if let Some(q) = parse_quantity(&reply) {
                    values.push(q.value_si);
                }
            }
            Ok(mean_estimate(&values))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn immediate_answer() {
        let llm = ScriptedClient::new(["[Answer] No."]);
        let vlm = ScriptedClient::new(Vec::<String>::new());
        let t = run_cot("Is the cup left of the bowl?", "img", &llm, &vlm, DEFAULT_MAX_TURNS).unwrap();
        assert_eq!(t.turns.len(), 1);
        assert_eq!(t.final_answer.as_deref(), Some("No."));
        assert_eq!(vlm.calls(), 0);
        let (prompt, image) = &llm.requests()[0];
        assert!(prompt.starts_with(COT_PROMPT));
        assert!(prompt.ends_with("[Question] Is the cup left of the bowl?\n"));
        assert!(image.is_none());
    }

    #[test]
    fn untagged_completion_is_malformed() {
        let llm = ScriptedClient::new(["I think the answer is yes."]);
        let vlm = ScriptedClient::new(Vec::<String>::new());
        let err = run_cot("q", "img", &llm, &vlm, 3).unwrap_err();
        assert!(matches!(err, CotError::MalformedCompletion { turn: 1, .. }));
    }

    #[test]
    fn stops_after_max_turns_without_answer() {
        let llm = |_: &str, _: Option<&str>| Ok("[You] How far is it?".to_string());
        let vlm = |_: &str, _: Option<&str>| Ok("1 m".to_string());
        let t = run_cot("q", "img", &llm, &vlm, 4).unwrap();
        assert_eq!(t.vlm_calls(), 4);
        assert!(t.final_answer.is_none());
        assert_eq!(run_cot("q", "img", &llm, &vlm, 0), Err(CotError::InvalidArgument("max_turns")));
    }

    #[test]
    fn parse_rules() {
        assert_eq!(parse_completion("  [You] where?\n[Answer] x"), Some(Move::Ask("where?".into())));
        assert_eq!(parse_completion("[Friend] 2 m\n[Answer] Yes."), Some(Move::Answer("Yes.".into())));
        assert_eq!(parse_completion("[Robot] Since a < b,\n[Answer] No."), Some(Move::Answer("No.".into())));
        assert_eq!(parse_completion("[Tool] what?"), Some(Move::Ask("what?".into())));
        assert_eq!(
            parse_completion("[Answer] Move left.\nThen drop it.\n[You] ignored"),
            Some(Move::Answer("Move left.\nThen drop it.".into()))
        );
        assert_eq!(parse_completion("nothing here"), None);
    }

    #[test]
    fn client_failure_surfaces() {
        let llm = ScriptedClient::new(["[You] a?"]);
        let vlm = |_: &str, _: Option<&str>| Err(ClientError("503".into()));
        assert_eq!(run_cot("q", "img", &llm, &vlm, 2), Err(CotError::ClientFailure(ClientError("503".into()))));
    }

    #[test]
    fn reward_examples() {
        let frames: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let fixed = |_: &str, _: Option<&str>| Ok("0.5 m".to_string());
        assert_eq!(annotate_reward(&frames, "distance?", &fixed, 3).unwrap(), vec![Some(0.5); 3]);

        let alt = ScriptedClient::new(["40 cm", "60 cm"]);
        let r = annotate_reward(&frames[..1], "distance?", &alt, 2).unwrap();
        assert!((r[0].unwrap() - 0.5).abs() < 1e-12);

        let none = |_: &str, _: Option<&str>| Ok("I cannot tell.".to_string());
        assert_eq!(annotate_reward(&frames[..1], "d", &none, 2).unwrap(), vec![None]);
        assert_eq!(annotate_reward(&frames, "d", &none, 0), Err(CotError::InvalidArgument("samples_per_frame")));
    }
}
