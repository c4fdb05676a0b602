"""Builds templates.json.

Entries come in two origins: "canonical" (the reference template lists, kept
verbatim, typos included) and "paraphrase" (padding written for this bank).
Run from this directory: python3 build_templates.py
"""

import json

CANONICAL = {
    "distance": {
        "questions": [
            "What is the distance between [A] and [B]?",
            "How far apart are [A] and [B]?",
            "How distant is [A] from [B]?",
            "How far is [A] from [B]?",
            "How close is [A] from [B]?",
            "Could you measure the distance between [A] and [B]?",
            "Can you tell me the distance of [A] from [B]?",
            "How far away is [A] from [B]?",
            "Can you provide the distance measurement between [A] and [B]?",
            "Can you give me an estimation of the distance between [A] and [B]?",
            "Could you provide the distance between [A] and [B]?",
            "How much distance is there between [A] and [B]?",
            "Tell me the distance between [A] and [B].",
            "Give me the distance from [A] to [B].",
            "Measure the distance from [A] to [B].",
            "Measure the distance between [A] and [B].",
        ],
        "value": [
            "[X]",
            "[A] and [B] are [X] apart.",
            "[A] is [X] away from [B].",
            "A distance of [X] exists between [A] and [B].",
            "[A] is [X] from [B].",
            "[A] and [B] are [X] apart from each other.",
            "They are [X] apart.",
            "The distance of [A] from [B] is [X].",
        ],
    },
    "vertical_distance": {
        "questions": [
            "What is the vertical distance between [A] and [B]?",
            "How far apart are [A] and [B] vertically?",
            "How distant is [A] from [B] vertically?",
            "How far is [A] from [B] vertically?",
            "Could you measure the vertical distance between [A] and [B]?",
            "Can you tell me the vertical distance between [A] and [B]?",
            "How far away is [A] from [B] vertically?",
            "Can you provide the measurement of the vertical distance between [A] and [B]?",
            "Estimate the vertical distance between [A] and [B].",
            "Could you provide the vertical distance between [A] and [B]?",
            "How much distance is there between [A] and [B] vertically?",
            "Tell me the distance between [A] and [B] vertically.",
            "Give me the vertical distance from [A] to [B].",
            "Measure the vertical distance from [A] to [B].",
            "Measure the distance between [A] and [B] vertically.",
        ],
        "value": [
            "[X]",
            "[A] and [B] are [X] apart vertically.",
            "[A] is [X] away from [B] vertically.",
            "A vertical distance of [X] exists between [A] and [B].",
            "[A] is [X] from [B] vertically.",
            "[A] and [B] are [X] apart vertically from each other.",
            "Vertically, They are [X] apart.",
            "The vertical distance of [A] from [B] is [X].",
            "They are [X] apart.",
            "It's approximately [X].",
        ],
    },
    "horizontal_distance": {
        "questions": [
            "What is the horizontal distance between [A] and [B]?",
            "How far apart are [A] and [B] horizontally?",
            "How distant is [A] from [B] horizontally?",
            "How far is [A] from [B] horizontally?",
            "Could you measure the horizontal distance between [A] and [B]?",
            "Can you tell me the horizontal distance of [A] from [B]?",
            "How far away is [A] from [B] horizontally?",
            "Can you provide the measurement of the horizontal distance between [A] and [B]?",
            "Can you give me an estimation of the horizontal distance between [A] and [B]?",
            "Could you provide the horizontal distance between [A] and [B]?",
            "How much distance is there between [A] and [B] horizontally?",
            "Tell me the distance between [A] and [B] horizontally.",
            "Give me the horizontal distance from [A] to [B].",
            "Vertial gap between [A] and [B].",
            "Measure the horizontal distance from [A] to [B].",
            "Measure the distance between [A] and [B] horizontally.",
        ],
        "value": [
            "[X]",
            "[A] and [B] are [X] apart horizontally.",
            "[A] is [X] away from [B] horizontally.",
            "A horizontal distance of [X] exists between [A] and [B].",
            "[A] is [X] from [B] horizontally.",
            "[A] and [B] are [X] apart horizontally from each other.",
            "Horizontally, They are [X] apart.",
            "The horizontal distance of [A] from [B] is [X].",
            "They are [X] apart.",
            "It's approximately [X].",
        ],
    },
    "width": {
        "questions": [
            "Measure the width of [A].",
            "Determine the horizontal dimensions of [A].",
            "Find out how wide [A] is.",
            "What is the width of [A]?",
            "How wide is [A]?",
            "What are the dimensions of [A] in terms of width?",
            "Could you tell me the horizontal size of [A]?",
            "What is the approximate width of [A]?",
            "How wide is [A]?",
            "How much space does [A] occupy horizontally?",
            "How big is [A]?",
            "How big is [A] in terms of width?",
            "What's the radius of [A]?",
        ],
        "value": [
            "[X]",
            "The width of [A] is [X].",
            "[A] is [X] wide.",
            "[A] is [X] in width.",
            "It's [X].",
        ],
    },
    "behind_predicate": {
        "questions": [
            "Is [A] behind [B]?",
            "Is the position of [A] more distant than that of [B]?",
            "Does [A] lie behind [B]?",
            "Is [A] positioned behind [B]?",
            "Is [A] further to camera compared to [B]?",
            "Does [A] come behind [B]?",
            "Is [A] positioned at the back of [B]?",
            "Is [A] further to the viewer compared to [B]?",
        ],
        "true": [
            "Yes.",
            "Yes, it is.",
            "Yes, it's behind [B].",
            "That's True.",
            "Yes, [A] is further from the viewer.",
            "Yes, [A] is behind [B].",
        ],
        "false": [
            "No.",
            "No, it is not.",
            "No, it's in front of [B].",
            "That's False.",
            "No, [A] is closer to the viewer.",
            "No, [B] is in front of [A].",
        ],
    },
    "front_predicate": {
        "questions": [
            "Is [A] in front of [B]?",
            "Is the position of [A] less distant than that of [B]?",
            "Does [A] lie in front of [B]?",
            "Is [A] positioned in front of [B]?",
            "Is [A] closer to camera compared to [B]?",
            "Does [A] come in front of [B]?",
            "Is [A] positioned before [B]?",
            "Is [A] closer to the viewer compared to [B]?",
        ],
        "true": [
            "Yes.",
            "Yes, it is.",
            "Yes, it's in front of [B].",
            "That's True.",
            "Yes, [A] is closer to the viewer.",
            "Yes, [A] is in front of [B].",
        ],
        "false": [
            "No.",
            "No, it is not.",
            "No, it's behind [B].",
            "That's False.",
            "No, [A] is further to the viewer.",
            "No, [B] is behind [A].",
        ],
    },
}

# relation -> (phrase taking an object, comparative without object)
REL = {
    "left": ("to the left of", "more to the left"),
    "right": ("to the right of", "more to the right"),
    "above": ("above", "higher"),
    "below": ("below", "lower"),
    "behind": ("behind", "further from the viewer"),
    "front": ("in front of", "closer to the viewer"),
    "tall": ("taller than", "taller"),
    "short": ("shorter than", "shorter"),
    "wide": ("wider than", "wider"),
    "thin": ("thinner than", "thinner"),
    "big": ("bigger than", "bigger"),
    "small": ("smaller than", "smaller"),
}
OPP = {
    "left": "right", "right": "left", "above": "below", "below": "above",
    "behind": "front", "front": "behind", "tall": "short", "short": "tall",
    "wide": "thin", "thin": "wide", "big": "small", "small": "big",
}

PREDICATE_Q = [
    "Is [A] {R} [B]?",
    "Would you say [A] is {R} [B]?",
    "Is it true that [A] is {R} [B]?",
    "Can you confirm that [A] is {R} [B]?",
    "Does [A] appear to be {R} [B]?",
    "Is [A] {R} [B] or not?",
    "Would you agree that [A] is {R} [B]?",
    "Tell me whether [A] is {R} [B].",
    "Answer yes or no: is [A] {R} [B]?",
    "Am I right that [A] is {R} [B]?",
    "Do you think [A] is {R} [B]?",
    "Is [A] actually {R} [B]?",
    "Looking at the image, is [A] {R} [B]?",
    "Check whether [A] is {R} [B].",
    "In this picture, is [A] {R} [B]?",
    "Would it be correct to say [A] is {R} [B]?",
    "Compared with [B], is [A] {C}?",
    "Relative to [B], is [A] {C}?",
    "Between [A] and [B], is [A] the one that is {C}?",
    "When comparing [A] with [B], is [A] {C}?",
]
PREDICATE_TRUE = [
    "Yes.",
    "Yes, it is.",
    "Yes, [A] is {R} [B].",
    "Correct, [A] is {R} [B].",
    "That's right.",
    "Yes, [A] is {C}.",
    "Indeed, [A] is {R} [B].",
    "Yes, it's {R} [B].",
]
PREDICATE_FALSE = [
    "No.",
    "No, it is not.",
    "No, [A] is not {R} [B].",
    "That's not right.",
    "No, [A] is {OR} [B].",
    "No, [B] is {R} [A].",
    "No, it's {OR} [B].",
    "No, [A] is {OC}.",
]

CHOICE_Q = [
    "Which is {C}, [A] or [B]?",
    "Which of [A] and [B] is {C}?",
    "Between [A] and [B], which one is {C}?",
    "Which object is {C}: [A] or [B]?",
    "Out of [A] and [B], which is {C}?",
    "Tell me which is {C}, [A] or [B].",
    "Can you tell which is {C}, [A] or [B]?",
    "Which one appears {C}, [A] or [B]?",
    "Of [A] and [B], which one is {C}?",
    "Pick the one that is {C}: [A] or [B].",
    "Which would you say is {C}, [A] or [B]?",
    "Looking at [A] and [B], which is {C}?",
    "Which is {C} in the image, [A] or [B]?",
    "Identify which of [A] and [B] is {C}.",
    "Which of these two is {C}: [A] or [B]?",
    "Comparing [A] and [B], which is {C}?",
    "Is [A] or [B] {C}?",
    "Which one is {C}? [A] or [B]?",
    "Would [A] or [B] be {C}?",
    "Which is {C} of the two, [A] or [B]?",
]
# [A] is the winner, [B] the other object
CHOICE_A = [
    "[A].",
    "[A] is {C}.",
    "It's [A].",
    "[A] is {R} [B].",
    "The answer is [A].",
    "[A], not [B].",
    "That would be [A].",
    "[A] is the one that is {C}.",
    "Clearly [A].",
    "Of the two, [A] is {C}.",
]

CLASSIFY = {
    "left_right_classify": ("left", "right"),
    "above_below_classify": ("above", "below"),
    "behind_front_classify": ("behind", "front"),
    "tall_short_classify": ("tall", "short"),
    "wide_thin_classify": ("wide", "thin"),
    "big_small_classify": ("big", "small"),
}
# object-taking "x or y" phrase for each classify pair
CLASSIFY_OR = {
    "left_right_classify": "to the left or to the right of",
    "above_below_classify": "above or below",
    "behind_front_classify": "behind or in front of",
    "tall_short_classify": "taller or shorter than",
    "wide_thin_classify": "wider or thinner than",
    "big_small_classify": "bigger or smaller than",
}
CLASSIFY_Q = [
    "Is [A] {Q} [B]?",
    "Would you say [A] is {Q} [B]?",
    "Tell me if [A] is {Q} [B].",
    "Can you tell whether [A] is {Q} [B]?",
    "Do you think [A] is {Q} [B]?",
    "Looking at the image, is [A] {Q} [B]?",
    "In this picture, is [A] {Q} [B]?",
    "From what you can see, is [A] {Q} [B]?",
    "Relative to [B], is [A] {C1} or {C2}?",
    "Compared with [B], is [A] {C1} or {C2}?",
    "Is [A] {C1} or {C2} than [B]?",
    "When comparing [A] and [B], is [A] {C1} or {C2}?",
    "Which describes [A] relative to [B]: {C1} or {C2}?",
    "How does [A] compare to [B], {C1} or {C2}?",
    "Against [B], is [A] {C1} or {C2}?",
    "Is [A] {C2} or {C1} compared to [B]?",
    "Would [A] be {C1} or {C2} relative to [B]?",
    "Decide whether [A] is {C1} or {C2} than [B].",
    "Say whether [A] is {Q} [B].",
    "Please tell me whether [A] is {Q} [B].",
]
CLASSIFY_A = [
    "[A] is {R} [B].",
    "It's {R} [B].",
    "{Ccap}.",
    "[A] is {C}.",
    "[A] is {C} than [B].",
    "From here, [A] is {R} [B].",
    "[B] is {OR} [A].",
    "It is {C}.",
]

PAD = {
    "distance": {
        "questions": [
            "What's the distance between [A] and [B]?",
            "How far is it from [A] to [B]?",
            "Estimate the distance between [A] and [B].",
            "Roughly how far apart are [A] and [B]?",
        ],
        "value": ["It's approximately [X].", "Roughly [X]."],
    },
    "vertical_distance": {
        "questions": [
            "What's the height difference between the centers of [A] and [B]?",
            "Roughly how far apart are [A] and [B] in height?",
            "How much higher or lower is [A] than [B]?",
            "Estimate how far apart [A] and [B] are vertically.",
            "What is the vertical separation between [A] and [B]?",
        ],
        "value": [],
    },
    "horizontal_distance": {
        "questions": [
            "What is the horizontal separation between [A] and [B]?",
            "Estimate the horizontal distance between [A] and [B].",
            "Ignoring height, how far apart are [A] and [B]?",
            "Roughly how far apart are [A] and [B] horizontally?",
        ],
        "value": [],
    },
    "width": {
        "questions": [
            "How wide would you say [A] is?",
            "Estimate the width of [A].",
            "Roughly how wide is [A]?",
            "Tell me the width of [A].",
            "What's the width of [A]?",
            "Can you measure how wide [A] is?",
            "Give me the width of [A].",
        ],
        "value": [
            "[A] measures [X] across.",
            "Roughly [X].",
            "It's about [X] wide.",
            "The width is [X].",
            "[A] spans [X].",
        ],
    },
}

ESTIMATION = {
    "gap": {
        "questions": [
            "What is the gap between [A] and [B]?",
            "How much space is there between [A] and [B]?",
            "How wide is the gap between [A] and [B]?",
            "What is the clearance between [A] and [B]?",
            "How close do [A] and [B] come to each other?",
            "What is the shortest distance between [A] and [B]?",
            "How much room is there between [A] and [B]?",
            "Measure the gap between [A] and [B].",
            "Estimate the gap between [A] and [B].",
            "How big is the gap between [A] and [B]?",
            "What's the gap between [A] and [B]?",
            "Tell me the size of the gap between [A] and [B].",
            "How far apart are the closest points of [A] and [B]?",
            "Could you measure the space between [A] and [B]?",
            "What is the minimum distance between [A] and [B]?",
            "How much free space separates [A] and [B]?",
            "Roughly how big is the gap between [A] and [B]?",
            "Give me the gap between [A] and [B].",
            "How narrow is the gap between [A] and [B]?",
            "Can you tell me the spacing between [A] and [B]?",
        ],
        "value": [
            "[X]",
            "The gap between [A] and [B] is [X].",
            "There is [X] between [A] and [B].",
            "[A] and [B] are separated by a gap of [X].",
            "It's [X].",
            "Roughly [X].",
            "About [X] of space.",
            "The gap is [X].",
            "They are [X] apart at the closest point.",
            "It's approximately [X].",
        ],
    },
    "height": {
        "questions": [
            "How tall is [A]?",
            "What is the height of [A]?",
            "Measure the height of [A].",
            "Determine the vertical dimensions of [A].",
            "Find out how tall [A] is.",
            "What are the dimensions of [A] in terms of height?",
            "Could you tell me the vertical size of [A]?",
            "What is the approximate height of [A]?",
            "How much space does [A] occupy vertically?",
            "How high is [A]?",
            "Estimate the height of [A].",
            "Roughly how tall is [A]?",
            "Tell me the height of [A].",
            "What's the height of [A]?",
            "Can you measure how tall [A] is?",
            "Give me the height of [A].",
            "How tall would you say [A] is?",
            "How big is [A] in terms of height?",
            "From bottom to top, how tall is [A]?",
            "What is the vertical extent of [A]?",
        ],
        "value": [
            "[X]",
            "The height of [A] is [X].",
            "[A] is [X] tall.",
            "[A] is [X] in height.",
            "It's [X].",
            "It's about [X] tall.",
            "Roughly [X].",
            "[A] stands [X] tall.",
            "The height is [X].",
            "[A] measures [X] from bottom to top.",
        ],
    },
    "elevation": {
        "questions": [
            "What is the elevation of [A]?",
            "How high above the ground is [A]?",
            "How far above the floor is [A]?",
            "At what height is [A] positioned?",
            "How high off the ground is [A]?",
            "How high above the ground is the bottom of [A]?",
            "How far is [A] from the ground?",
            "Estimate the elevation of [A].",
            "How elevated is [A]?",
            "Tell me how high [A] sits above the ground.",
            "What's the elevation of [A]?",
            "How far off the floor is [A]?",
            "Measure how high [A] is above the ground.",
            "At what elevation is [A]?",
            "Roughly how high above the ground is [A]?",
            "How much is [A] raised above the floor?",
            "Give me the elevation of [A].",
            "Could you tell me how high [A] is placed?",
            "What is the distance from the ground to the bottom of [A]?",
            "How high up is [A]?",
        ],
        "value": [
            "[X]",
            "[A] is [X] above the ground.",
            "The elevation of [A] is [X].",
            "It's [X] off the ground.",
            "[A] sits [X] above the floor.",
            "Roughly [X].",
            "It's about [X] up.",
            "The bottom of [A] is [X] above the ground.",
            "[A] is elevated by [X].",
            "It's approximately [X].",
        ],
    },
}

# direction -> (object-taking phrase, comparative)
DIFF = {
    "above_difference": ("above", "higher"),
    "below_difference": ("below", "lower"),
    "behind_difference": ("behind", "further back"),
    "front_difference": ("in front of", "further forward"),
    "left_difference": ("to the left of", "further to the left"),
    "right_difference": ("to the right of", "further to the right"),
}
DIFF_Q = [
    "How much {D} is [A] than [B]?",
    "How far {P} [B] is [A]?",
    "By how much is [A] {P} [B]?",
    "What is the distance that [A] is {P} [B]?",
    "How much is [A] {P} [B]?",
    "Measure how far [A] is {P} [B].",
    "Estimate how much {D} [A] is than [B].",
    "How far is [A] {P} [B]?",
    "Could you tell me how much {D} [A] is compared to [B]?",
    "Tell me how far [A] is {P} [B].",
    "Roughly how far {P} [B] is [A]?",
    "By what distance is [A] {P} [B]?",
    "Can you measure how much {D} [A] is than [B]?",
    "Give me the distance by which [A] is {P} [B].",
    "Compared to [B], how much {D} is [A]?",
    "Estimate the distance [A] is {P} [B].",
    "Roughly how much {D} is [A] than [B]?",
    "If [A] is {P} [B], by how much?",
    "In terms of distance, how much {D} is [A] than [B]?",
    "How much {D} does [A] sit than [B]?",
]
DIFF_A = [
    "[X]",
    "[A] is [X] {P} [B].",
    "It's [X] {D}.",
    "[A] is [X] {D} than [B].",
    "About [X].",
    "Roughly [X].",
    "The difference is [X].",
    "By [X].",
    "It's approximately [X].",
    "[A] sits [X] {P} [B].",
]

UNCERTAIN = [
    "It's hard to tell.",
    "I can't tell for sure.",
    "Hard to say.",
    "They look about the same.",
    "It's difficult to tell from this image.",
    "I'm not sure; [A] and [B] look very similar in that respect.",
    "They seem roughly equal.",
    "It's too close to call.",
    "I can't really tell the difference between [A] and [B] here.",
    "Not clearly; they're about the same.",
]


def entries(texts, origin):
    return [{"text": t, "origin": origin} for t in texts]


def merged(canonical, padding):
    seen = set(canonical)
    extra = [t for t in padding if t not in seen and not seen.add(t)]
    return entries(canonical, "canonical") + entries(extra, "paraphrase")


def fill(templates, **kw):
    return [t.format(**kw) for t in templates]


def cap(s):
    return s[:1].upper() + s[1:]


def build():
    cats = {}
    for rel, (r, c) in REL.items():
        o = OPP[rel]
        kw = dict(R=r, C=c, OR=REL[o][0], OC=REL[o][1])
        pid = f"{rel}_predicate"
        base = CANONICAL.get(pid, {"questions": [], "true": [], "false": []})
        cats[pid] = {
            "questions": merged(base["questions"], fill(PREDICATE_Q, **kw))[:20],
            "answers": {
                "true": merged(base["true"], fill(PREDICATE_TRUE, **kw))[:8],
                "false": merged(base["false"], fill(PREDICATE_FALSE, **kw))[:8],
            },
        }
        cats[f"{rel}_choice"] = {
            "questions": merged([], fill(CHOICE_Q, **kw)),
            "answers": {"winner": merged([], fill(CHOICE_A, **kw))},
        }
    for cid, (l1, l2) in CLASSIFY.items():
        kw = dict(Q=CLASSIFY_OR[cid], C1=REL[l1][1], C2=REL[l2][1])
        answers = {}
        for lab in (l1, l2):
            o = OPP[lab]
            answers[lab] = merged(
                [], fill(CLASSIFY_A, R=REL[lab][0], C=REL[lab][1], Ccap=cap(REL[lab][1]), OR=REL[o][0])
            )
        cats[cid] = {"questions": merged([], fill(CLASSIFY_Q, **kw)), "answers": answers}
    for cid in ("distance", "vertical_distance", "horizontal_distance", "width"):
        base, pad = CANONICAL[cid], PAD[cid]
        cats[cid] = {
            "questions": merged(base["questions"], pad["questions"]),
            "answers": {"value": merged(base["value"], pad["value"])},
        }
    for cid, spec in ESTIMATION.items():
        cats[cid] = {
            "questions": merged([], spec["questions"]),
            "answers": {"value": merged([], spec["value"])},
        }
    for cid, (p, d) in DIFF.items():
        cats[cid] = {
            "questions": merged([], fill(DIFF_Q, P=p, D=d)),
            "answers": {"value": merged([], fill(DIFF_A, P=p, D=d))},
        }
    return {"version": 1, "uncertain": entries(UNCERTAIN, "paraphrase"), "categories": cats}


if __name__ == "__main__":
    bank = build()
    with open("templates.json", "w") as f:
        json.dump(bank, f, indent=1, ensure_ascii=False)
        f.write("\n")
    print(len(bank["categories"]), "categories")
