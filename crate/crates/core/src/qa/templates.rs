//! Question wording.
//!
//! Every question string in the dataset is an exact instantiation of one of
//! these templates: the synthesis code substitutes category names (and, for
//! the route task, a pre-rendered action list) into the placeholders and does
//! nothing else to the text. Keeping the raw templates as constants lets
//! tests verify that instantiation never perturbs the surrounding wording.

/// Sentence prepended to every conversation, before the question.
pub const PRE_PROMPT: &str = "These are frames of a video.";

/// Sentence appended after an open-ended question.
pub const POST_PROMPT_OPEN: &str = "Please answer the question using a single word or phrase.";

/// Sentence appended after a multiple-choice question.
pub const POST_PROMPT_CHOICE: &str =
    "Answer with the option's letter from the given choices directly.";

pub const OBJ_COUNT: &str = "How many {category}(s) are in this room?";

pub const OBJ_SIZE: &str = "What is the length of the longest dimension (length, width, or \
     height) of the {category}, measured in centimeters?";

pub const ROOM_SIZE: &str = "What is the size of this room (in square meters)? If multiple rooms \
     are shown, estimate the size of the combined space.";

pub const ABS_DIST: &str = "Measuring from the closest point of each object, what is the direct \
     distance between the {object1} and the {object2} (in meters)?";

pub const REL_DIST: &str = "Measuring from the closest point of each object, which of these \
     objects ({choice_a}, {choice_b}, {choice_c}, {choice_d}) is the closest to the {category}? \
     If there are multiple instances of an object category, measure to the closest.";

pub const REL_DIR_HARD: &str = "If I am standing by the {positioning_object} and facing the \
     {orienting_object}, is the {querying_object} to my front-left, front-right, back-left, or \
     back-right? The directions refer to the quadrants of a Cartesian plane (if I am standing at \
     the origin and facing along the positive y-axis).";

pub const REL_DIR_MEDIUM: &str = "If I am standing by the {positioning_object} and facing the \
     {orienting_object}, is the {querying_object} to my left, right, or back? An object is to my \
     back if I would have to turn at least 135 degrees in order to face it.";

pub const REL_DIR_EASY: &str = "If I am standing by the {positioning_object} and facing the \
     {orienting_object}, is the {querying_object} to the left or the right of the \
     {orienting_object}?";

pub const APPEARANCE_ORDER: &str = "What will be the first-time appearance order of the \
     following categories in the video: {choice_a}, {choice_b}, {choice_c}, {choice_d}?";

pub const SPATIOTEMPORAL_DIST: &str = "Which of these objects ({choice_a}, {choice_b}, \
     {choice_c}, {choice_d}) is the closest to the ego-position at the last frame in the video?";

pub const ROUTE_PLAN: &str = "You are a robot beginning at the {start_obj} and facing the \
     {orienting_obj}. You want to navigate to the {end_obj}. You will perform the following \
     actions (Note: for each [please fill in], choose either 'turn back,' 'turn left,' or 'turn \
     right.'): {actions} You have reached the final destination.";

pub fn obj_count(category: &str) -> String {
    OBJ_COUNT.replace("{category}", category)
}

pub fn obj_size(category: &str) -> String {
    OBJ_SIZE.replace("{category}", category)
}

pub fn room_size() -> String {
    ROOM_SIZE.to_string()
}

pub fn abs_dist(object1: &str, object2: &str) -> String {
    ABS_DIST
        .replace("{object1}", object1)
        .replace("{object2}", object2)
}

pub fn rel_dist(choices: &[String; 4], category: &str) -> String {
    REL_DIST
        .replace("{choice_a}", &choices[0])
        .replace("{choice_b}", &choices[1])
        .replace("{choice_c}", &choices[2])
        .replace("{choice_d}", &choices[3])
        .replace("{category}", category)
}

pub fn rel_dir(
    difficulty: super::geometry::Difficulty,
    positioning: &str,
    orienting: &str,
    querying: &str,
) -> String {
    use super::geometry::Difficulty;
    let template = match difficulty {
        Difficulty::Easy => REL_DIR_EASY,
        Difficulty::Medium => REL_DIR_MEDIUM,
        Difficulty::Hard => REL_DIR_HARD,
    };
    template
        .replace("{positioning_object}", positioning)
        .replace("{orienting_object}", orienting)
        .replace("{querying_object}", querying)
}

pub fn appearance_order(choices: &[String; 4]) -> String {
    APPEARANCE_ORDER
        .replace("{choice_a}", &choices[0])
        .replace("{choice_b}", &choices[1])
        .replace("{choice_c}", &choices[2])
        .replace("{choice_d}", &choices[3])
}

pub fn spatiotemporal_dist(choices: &[String; 4]) -> String {
    SPATIOTEMPORAL_DIST
        .replace("{choice_a}", &choices[0])
        .replace("{choice_b}", &choices[1])
        .replace("{choice_c}", &choices[2])
        .replace("{choice_d}", &choices[3])
}

pub fn route_plan(start: &str, orienting: &str, end: &str, actions: &str) -> String {
    ROUTE_PLAN
        .replace("{start_obj}", start)
        .replace("{orienting_obj}", orienting)
        .replace("{end_obj}", end)
        .replace("{actions}", actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::geometry::Difficulty;

    #[test]
    fn instantiation_fills_every_placeholder() {
        let all = [
            obj_count("chair"),
            obj_size("table"),
            room_size(),
            abs_dist("sofa", "lamp"),
            rel_dist(
                &["bed".into(), "desk".into(), "rug".into(), "fan".into()],
                "sofa",
            ),
            rel_dir(Difficulty::Easy, "bed", "desk", "rug"),
            rel_dir(Difficulty::Medium, "bed", "desk", "rug"),
            rel_dir(Difficulty::Hard, "bed", "desk", "rug"),
            appearance_order(&["a".into(), "b".into(), "c".into(), "d".into()]),
            spatiotemporal_dist(&["a".into(), "b".into(), "c".into(), "d".into()]),
            route_plan("sofa", "tv stand", "bed", "1. Go forward."),
        ];
        for q in &all {
            assert!(
                !q.contains('{') && !q.contains('}'),
                "unfilled placeholder left in question: {q}"
            );
        }
    }

    #[test]
    fn wording_survives_substitution_verbatim() {
        assert_eq!(obj_count("chair"), "How many chair(s) are in this room?");
        assert_eq!(
            abs_dist("sofa", "floor lamp"),
            "Measuring from the closest point of each object, what is the direct distance \
             between the sofa and the floor lamp (in meters)?"
        );
        assert_eq!(
            rel_dir(Difficulty::Easy, "bed", "desk", "rug"),
            "If I am standing by the bed and facing the desk, is the rug to the left or the \
             right of the desk?"
        );
        let q = rel_dist(
            &["bed".into(), "desk".into(), "rug".into(), "fan".into()],
            "sofa",
        );
        assert!(
            q.contains("(bed, desk, rug, fan) is the closest to the sofa?"),
            "choice listing should appear in order: {q}"
        );
    }

    #[test]
    fn easy_direction_names_the_orienting_object_twice() {
        let q = rel_dir(Difficulty::Easy, "bed", "desk", "rug");
        assert_eq!(q.matches("desk").count(), 2, "template repeats the orienting object");
    }

    #[test]
    fn route_template_keeps_the_instruction_note() {
        let q = route_plan("sofa", "tv", "bed", "1. Go forward. 2. [please fill in]");
        assert!(q.contains("choose either 'turn back,' 'turn left,' or 'turn right.'"));
        assert!(q.ends_with("You have reached the final destination."));
    }
}
