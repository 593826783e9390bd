#include "gtsd/errors.hpp"

namespace gtsd {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::bit_count_overflow: return "BitCountOverflow";
    case Errc::payload_too_long: return "PayloadTooLong";
    case Errc::truncated_frame: return "TruncatedFrame";
    case Errc::width_overflow: return "WidthOverflow";
    case Errc::value_overflow: return "ValueOverflow";
    case Errc::bad_arity: return "BadArity";
    case Errc::not_power_of_two: return "NotPowerOfTwo";
    case Errc::duplicate_prompt: return "DuplicatePrompt";
    case Errc::duplicate_token: return "DuplicateToken";
    case Errc::unknown_token: return "UnknownToken";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::prompt_not_found: return "PromptNotFound";
    case Errc::ambiguous_prompt: return "AmbiguousPrompt";
    case Errc::table_too_small: return "TableTooSmall";
    case Errc::bad_steps: return "BadSteps";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::step_out_of_range: return "StepOutOfRange";
    case Errc::degenerate_alpha: return "DegenerateAlpha";
    case Errc::bad_step_sequence: return "BadStepSequence";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::length_overflow: return "LengthOverflow";
    case Errc::empty_sentence: return "EmptySentence";
    case Errc::bad_range: return "BadRange";
    case Errc::collision_detected: return "CollisionDetected";
    case Errc::table_mismatch: return "TableMismatch";
    case Errc::model_missing: return "ModelMissing";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::not_enough_positions: return "NotEnoughPositions";
    case Errc::bad_counts: return "BadCounts";
    case Errc::empty_set: return "EmptySet";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::io_error: return "IoError";
    case Errc::bad_format: return "BadFormat";
  }
  return "UnknownError";
}

}  // namespace gtsd
