#ifndef MARL_PARSING_HPP
#define MARL_PARSING_HPP

#include <optional>
#include <string>
#include <vector>

#include "marl/core.hpp"

namespace marl {

inline constexpr const char* kCreditBlockMarker = "CREDITS:";
inline constexpr const char* kTaskBlockMarker = "TASKS:";

// The output grammar the critic is instructed to follow. These texts are the
// single source of truth: they are embedded verbatim into the task prompt and
// the parser below implements exactly what they state. The task half is only
// issued in task-assignment mode.
const std::string& credit_grammar_text();
const std::string& task_grammar_text();
const std::string& feedback_grammar_text();  // both halves joined

enum class ParseErrorKind {
    missing_block,
    row_count_mismatch,
    length_mismatch,
    non_numeric,
    duplicate_block,
};

std::string parse_error_kind_name(ParseErrorKind kind);

struct ParseError {
    ParseErrorKind kind = ParseErrorKind::missing_block;
    std::string detail;
    std::size_t span_begin = 0;  // character range within the response text
    std::size_t span_end = 0;
};

struct CreditParseResult {
    std::optional<CreditMatrix> credits;
    std::optional<ParseError> error;
    std::vector<ParseError> warnings;

    bool ok() const { return credits.has_value(); }
};

struct TaskParseResult {
    std::optional<TaskAssignmentMatrix> tasks;
    std::optional<ParseError> error;
    std::vector<ParseError> warnings;

    bool ok() const { return tasks.has_value(); }
};

// Locates the credit block and reads exactly num_agents rows of exactly
// num_steps finite numbers; surrounding prose is ignored. The first
// well-formed block wins when the model emits duplicates.
CreditParseResult extract_credit_matrix(const std::string& text, int num_agents, int num_steps);

// Absent block means "no assignments" and is valid. Wrong-width or
// out-of-range entries are rejected individually as warnings.
TaskParseResult extract_task_assignments(const std::string& text, int num_agents, int num_steps,
                                         int d_task);

enum class NormalizationMode { none, symmetric, sum_preserving };

std::string normalization_mode_name(NormalizationMode mode);
NormalizationMode normalization_mode_from_name(const std::string& name);

// none: identity. symmetric: divide by max(1, max|entry|) so values land in
// [-1,1] without reordering any column. sum_preserving: rescale column k so
// its sum reproduces rewards[k] (columns with zero raw sum pass unchanged).
CreditMatrix normalize_credits(const CreditMatrix& matrix, NormalizationMode mode,
                               const std::vector<double>* rewards = nullptr);

// Inverse direction of the grammar, used for fixtures and round-trip checks.
std::string render_credits(const CreditMatrix& matrix);
std::string render_tasks(const TaskAssignmentMatrix& tasks);

}  // namespace marl

#endif
