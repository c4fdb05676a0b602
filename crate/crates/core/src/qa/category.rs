use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Predicate,
    Choice,
    Classify,
    Estimation,
}

impl Kind {
    pub fn is_quantitative(self) -> bool {
        self == Kind::Estimation
    }
}

/// Spatial relation a comparative category decides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Left,
    Right,
    Above,
    Below,
    Behind,
    Front,
    Tall,
    Short,
    Wide,
    Thin,
    Big,
    Small,
}

impl Relation {
    pub fn opposite(self) -> Self {
        use Relation::*;
        match self {
            Left => Right,
            Right => Left,
            Above => Below,
            Below => Above,
            Behind => Front,
            Front => Behind,
            Tall => Short,
            Short => Tall,
            Wide => Thin,
            Thin => Wide,
            Big => Small,
            Small => Big,
        }
    }

    pub fn word(self) -> &'static str {
        use Relation::*;
        match self {
            Left => "left",
            Right => "right",
            Above => "above",
            Below => "below",
            Behind => "behind",
            Front => "front",
            Tall => "tall",
            Short => "short",
            Wide => "wide",
            Thin => "thin",
            Big => "big",
            Small => "small",
        }
    }
}

macro_rules! categories {
    ($($variant:ident => $id:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum QACategory {
            $($variant),*
        }

        impl QACategory {
            pub const ALL: &'static [QACategory] = &[$(QACategory::$variant),*];

            pub fn id(self) -> &'static str {
                match self {
                    $(QACategory::$variant => $id),*
                }
            }
        }

        impl FromStr for QACategory {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($id => Ok(QACategory::$variant),)*
                    other => Err(format!("unknown category {other:?}")),
                }
            }
        }
    };
}

categories! {
    LeftPredicate => "left_predicate",
    RightPredicate => "right_predicate",
    AbovePredicate => "above_predicate",
    BelowPredicate => "below_predicate",
    BehindPredicate => "behind_predicate",
    FrontPredicate => "front_predicate",
    TallPredicate => "tall_predicate",
    ShortPredicate => "short_predicate",
    WidePredicate => "wide_predicate",
    ThinPredicate => "thin_predicate",
    BigPredicate => "big_predicate",
    SmallPredicate => "small_predicate",
    LeftChoice => "left_choice",
    RightChoice => "right_choice",
    AboveChoice => "above_choice",
    BelowChoice => "below_choice",
    BehindChoice => "behind_choice",
    FrontChoice => "front_choice",
    TallChoice => "tall_choice",
    ShortChoice => "short_choice",
    WideChoice => "wide_choice",
    ThinChoice => "thin_choice",
    BigChoice => "big_choice",
    SmallChoice => "small_choice",
    LeftRightClassify => "left_right_classify",
    AboveBelowClassify => "above_below_classify",
    BehindFrontClassify => "behind_front_classify",
    TallShortClassify => "tall_short_classify",
    WideThinClassify => "wide_thin_classify",
    BigSmallClassify => "big_small_classify",
    Distance => "distance",
    Gap => "gap",
    Height => "height",
    Width => "width",
    Elevation => "elevation",
    VerticalDistance => "vertical_distance",
    HorizontalDistance => "horizontal_distance",
    AboveDifference => "above_difference",
    BelowDifference => "below_difference",
    BehindDifference => "behind_difference",
    FrontDifference => "front_difference",
    LeftDifference => "left_difference",
    RightDifference => "right_difference",
}

impl QACategory {
    pub fn kind(self) -> Kind {
        use QACategory::*;
        match self {
            LeftPredicate | RightPredicate | AbovePredicate | BelowPredicate | BehindPredicate | FrontPredicate
            | TallPredicate | ShortPredicate | WidePredicate | ThinPredicate | BigPredicate | SmallPredicate => {
                Kind::Predicate
            }
            LeftChoice | RightChoice | AboveChoice | BelowChoice | BehindChoice | FrontChoice | TallChoice
            | ShortChoice | WideChoice | ThinChoice | BigChoice | SmallChoice => Kind::Choice,
            LeftRightClassify | AboveBelowClassify | BehindFrontClassify | TallShortClassify | WideThinClassify
            | BigSmallClassify => Kind::Classify,
            _ => Kind::Estimation,
        }
    }

    pub fn is_quantitative(self) -> bool {
        self.kind().is_quantitative()
    }

    /// Relation decided by a predicate, choice or classify category (for
    /// classify: the first label of the pair), or the direction of a
    /// difference estimation.
    pub fn relation(self) -> Option<Relation> {
        use QACategory::*;
        use Relation as R;
        Some(match self {
            LeftPredicate | LeftChoice | LeftRightClassify | LeftDifference => R::Left,
            RightPredicate | RightChoice | RightDifference => R::Right,
            AbovePredicate | AboveChoice | AboveBelowClassify | AboveDifference => R::Above,
            BelowPredicate | BelowChoice | BelowDifference => R::Below,
            BehindPredicate | BehindChoice | BehindFrontClassify | BehindDifference => R::Behind,
            FrontPredicate | FrontChoice | FrontDifference => R::Front,
            TallPredicate | TallChoice | TallShortClassify => R::Tall,
            ShortPredicate | ShortChoice => R::Short,
            WidePredicate | WideChoice | WideThinClassify => R::Wide,
            ThinPredicate | ThinChoice => R::Thin,
            BigPredicate | BigChoice | BigSmallClassify => R::Big,
            SmallPredicate | SmallChoice => R::Small,
            _ => return None,
        })
    }

    /// The two labels a classify category chooses between.
    pub fn classify_labels(self) -> Option<(&'static str, &'static str)> {
        if self.kind() != Kind::Classify {
            return None;
        }
        let r = self.relation()?;
        Some((r.word(), r.opposite().word()))
    }

    pub fn needs_canonicalization(self) -> bool {
        use QACategory::*;
        matches!(
            self,
            AbovePredicate
                | BelowPredicate
                | TallPredicate
                | ShortPredicate
                | BigPredicate
                | SmallPredicate
                | AboveChoice
                | BelowChoice
                | TallChoice
                | ShortChoice
                | BigChoice
                | SmallChoice
                | AboveBelowClassify
                | TallShortClassify
                | BigSmallClassify
                | Height
                | Elevation
                | VerticalDistance
                | HorizontalDistance
                | AboveDifference
                | BelowDifference
        )
    }

    pub fn arity(self) -> usize {
        match self {
            QACategory::Height | QACategory::Width | QACategory::Elevation => 1,
            _ => 2,
        }
    }

    /// Estimations whose pair order carries a direction ("how much is A
    /// left of B").
    pub fn is_directional_difference(self) -> bool {
        use QACategory::*;
        matches!(
            self,
            AboveDifference | BelowDifference | BehindDifference | FrontDifference | LeftDifference | RightDifference
        )
    }
}

impl fmt::Display for QACategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Categories that can be asked about a scene.
pub fn eligible_categories(canonicalized: bool, num_entities: usize) -> Vec<QACategory> {
    QACategory::ALL
        .iter()
        .copied()
        .filter(|c| canonicalized || !c.needs_canonicalization())
        .filter(|c| c.arity() <= num_entities)
        .collect()
}
