#include "marl/parsing.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace marl {

const std::string& credit_grammar_text() {
    static const std::string grammar =
        "Report credits in exactly this machine-readable form, one row per agent,\n"
        "one number per timestep (K numbers per row, agents numbered from 1),\n"
        "with the CREDITS: marker emitted exactly once:\n"
        "\n"
        "CREDITS:\n"
        "agent 1: [c_1, c_2, ..., c_K]\n"
        "agent 2: [c_1, c_2, ..., c_K]";
    return grammar;
}

const std::string& task_grammar_text() {
    static const std::string grammar =
        "Task assignments are optional. If you issue any, add one block:\n"
        "\n"
        "TASKS:\n"
        "agent 1 step 4: [t_1, ..., t_d]\n"
        "agent 2 step 1: none\n"
        "\n"
        "Each task row names one agent and one timestep (both numbered from 1) and\n"
        "carries either a short integer array of the agreed width d or the literal\n"
        "word none. Unmentioned agent/step pairs mean no assignment. Emit the\n"
        "TASKS: marker at most once.";
    return grammar;
}

const std::string& feedback_grammar_text() {
    static const std::string grammar = credit_grammar_text() + "\n\n" + task_grammar_text();
    return grammar;
}

std::string parse_error_kind_name(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::missing_block: return "missing_block";
        case ParseErrorKind::row_count_mismatch: return "row_count_mismatch";
        case ParseErrorKind::length_mismatch: return "length_mismatch";
        case ParseErrorKind::non_numeric: return "non_numeric";
        case ParseErrorKind::duplicate_block: return "duplicate_block";
    }
    return "unknown";
}

namespace {

// Hand-rolled scanner rather than std::regex: it must stay robust (and fast)
// on megabyte-sized arbitrary text.
class Scanner {
public:
    Scanner(const std::string& text, std::size_t pos) : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= text_.size(); }

    void skip_space_and_breaks() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '/') {
                ++pos_;
            } else {
                break;
            }
        }
    }

    void skip_blanks() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool consume_literal(const std::string& lit) {
        if (text_.compare(pos_, lit.size(), lit) == 0) {
            pos_ += lit.size();
            return true;
        }
        return false;
    }

    std::optional<long> consume_integer() {
        skip_blanks();
        std::size_t end = pos_;
        if (end < text_.size() && (text_[end] == '-' || text_[end] == '+')) ++end;
        std::size_t digits_begin = end;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        if (end == digits_begin) return std::nullopt;
        long value = 0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, value);
        if (ec != std::errc() || ptr != text_.data() + end) return std::nullopt;
        pos_ = end;
        return value;
    }

    // Next comma/bracket-delimited token inside a [...] list.
    std::pair<std::size_t, std::size_t> peek_list_token() const {
        std::size_t begin = pos_;
        while (begin < text_.size() && (text_[begin] == ' ' || text_[begin] == '\t')) ++begin;
        std::size_t end = begin;
        while (end < text_.size() && text_[end] != ',' && text_[end] != ']' &&
               text_[end] != '\n')
            ++end;
        std::size_t trimmed = end;
        while (trimmed > begin &&
               (text_[trimmed - 1] == ' ' || text_[trimmed - 1] == '\t'))
            --trimmed;
        return {begin, trimmed};
    }

    void seek(std::size_t pos) { pos_ = pos; }

    const std::string& text() const { return text_; }

private:
    const std::string& text_;
    std::size_t pos_;
};

std::vector<std::size_t> find_markers(const std::string& text, const char* marker) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    const std::string m(marker);
    while ((pos = text.find(m, pos)) != std::string::npos) {
        out.push_back(pos);
        pos += m.size();
    }
    return out;
}

ParseError make_error(ParseErrorKind kind, std::string detail, std::size_t begin,
                      std::size_t end) {
    return ParseError{kind, std::move(detail), begin, end};
}

// Parses "[v, v, ...]" returning raw token spans; the caller interprets them.
struct ListTokens {
    std::vector<std::pair<std::size_t, std::size_t>> tokens;
    std::size_t end_pos = 0;
    bool closed = false;
};

ListTokens scan_bracket_list(Scanner& scan) {
    ListTokens list;
    scan.skip_blanks();
    if (!scan.consume_literal("[")) return list;
    while (true) {
        scan.skip_blanks();
        if (scan.at_end()) return list;
        if (scan.text()[scan.pos()] == ']') {
            scan.seek(scan.pos() + 1);
            list.closed = true;
            list.end_pos = scan.pos();
            return list;
        }
        const auto [begin, end] = scan.peek_list_token();
        if (begin == end) return list;  // empty token or newline inside the list
        list.tokens.emplace_back(begin, end);
        scan.seek(end);
        scan.skip_blanks();
        if (scan.at_end()) return list;
        const char c = scan.text()[scan.pos()];
        if (c == ',') {
            scan.seek(scan.pos() + 1);
        } else if (c != ']') {
            return list;
        }
    }
}

std::optional<CreditMatrix> parse_credit_block(const std::string& text, std::size_t block_pos,
                                               int num_agents, int num_steps,
                                               ParseError& error) {
    Scanner scan(text, block_pos + std::string(kCreditBlockMarker).size());
    CreditMatrix matrix;
    matrix.values.assign(num_agents, {});

    for (int row = 0; row < num_agents; ++row) {
        scan.skip_space_and_breaks();
        const std::size_t row_begin = scan.pos();
        if (!scan.consume_literal("agent")) {
            std::ostringstream os;
            os << "expected row for agent " << (row + 1) << ", found "
               << (row == 0 ? "no rows" : "fewer rows") << " (got " << row << " of "
               << num_agents << ")";
            error = make_error(ParseErrorKind::row_count_mismatch, os.str(), row_begin,
                               row_begin);
            return std::nullopt;
        }
        const auto index = scan.consume_integer();
        if (!index || *index != row + 1) {
            std::ostringstream os;
            os << "expected row for agent " << (row + 1);
            if (index) os << ", found agent " << *index;
            error = make_error(ParseErrorKind::row_count_mismatch, os.str(), row_begin,
                               scan.pos());
            return std::nullopt;
        }
        scan.skip_blanks();
        if (!scan.consume_literal(":")) {
            error = make_error(ParseErrorKind::row_count_mismatch,
                               "missing ':' after agent index", row_begin, scan.pos());
            return std::nullopt;
        }

        auto list = scan_bracket_list(scan);
        if (!list.closed) {
            std::ostringstream os;
            os << "agent " << (row + 1) << ": unterminated credit list";
            error = make_error(ParseErrorKind::length_mismatch, os.str(), row_begin, scan.pos());
            return std::nullopt;
        }
        if (static_cast<int>(list.tokens.size()) != num_steps) {
            std::ostringstream os;
            os << "agent " << (row + 1) << ": expected " << num_steps << " values, found "
               << list.tokens.size();
            error = make_error(ParseErrorKind::length_mismatch, os.str(), row_begin, scan.pos());
            return std::nullopt;
        }
        auto& values = matrix.values[row];
        values.reserve(num_steps);
        for (const auto& [tb, te] : list.tokens) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(text.data() + tb, text.data() + te, v);
            if (ec != std::errc() || ptr != text.data() + te || !std::isfinite(v)) {
                std::ostringstream os;
                os << "agent " << (row + 1) << ": token '" << text.substr(tb, te - tb)
                   << "' is not a finite number";
                error = make_error(ParseErrorKind::non_numeric, os.str(), tb, te);
                return std::nullopt;
            }
            values.push_back(v);
        }
    }
    return matrix;
}

}  // namespace

CreditParseResult extract_credit_matrix(const std::string& text, int num_agents, int num_steps) {
    if (num_agents < 1 || num_steps < 1)
        throw std::invalid_argument("extract_credit_matrix: need N, K >= 1");

    CreditParseResult result;
    const auto markers = find_markers(text, kCreditBlockMarker);
    if (markers.empty()) {
        result.error = make_error(ParseErrorKind::missing_block,
                                  std::string("no '") + kCreditBlockMarker + "' block found", 0,
                                  text.size());
        return result;
    }

    std::optional<ParseError> first_error;
    for (const auto pos : markers) {
        ParseError err;
        auto matrix = parse_credit_block(text, pos, num_agents, num_steps, err);
        if (matrix) {
            result.credits = std::move(matrix);
            break;
        }
        if (!first_error) first_error = err;
    }
    if (markers.size() > 1) {
        std::ostringstream os;
        os << "found " << markers.size() << " '" << kCreditBlockMarker << "' markers";
        result.warnings.push_back(make_error(ParseErrorKind::duplicate_block, os.str(),
                                             markers[1], markers[1]));
    }
    if (!result.credits) result.error = first_error;
    return result;
}

namespace {

bool parse_task_block(const std::string& text, std::size_t block_pos, int num_agents,
                      int num_steps, int d_task, TaskAssignmentMatrix& matrix,
                      std::vector<ParseError>& warnings) {
    Scanner scan(text, block_pos + std::string(kTaskBlockMarker).size());
    bool any_row = false;
    while (true) {
        scan.skip_space_and_breaks();
        const std::size_t row_begin = scan.pos();
        if (!scan.consume_literal("agent")) break;  // prose resumes; block over
        const auto agent = scan.consume_integer();
        if (!agent) break;
        scan.skip_blanks();
        if (!scan.consume_literal("step")) break;
        const auto step = scan.consume_integer();
        if (!step) break;
        scan.skip_blanks();
        if (!scan.consume_literal(":")) break;
        scan.skip_blanks();

        std::optional<TaskVector> entry;
        bool parsed = false;
        if (scan.consume_literal("none")) {
            parsed = true;  // explicit absence
        } else {
            auto list = scan_bracket_list(scan);
            if (list.closed) {
                TaskVector values;
                bool numeric = true;
                for (const auto& [tb, te] : list.tokens) {
                    int v = 0;
                    const auto [ptr, ec] = std::from_chars(text.data() + tb, text.data() + te, v);
                    if (ec != std::errc() || ptr != text.data() + te) {
                        numeric = false;
                        break;
                    }
                    values.push_back(v);
                }
                if (!numeric) {
                    warnings.push_back(make_error(ParseErrorKind::non_numeric,
                                                  "task entry rejected: non-integer token",
                                                  row_begin, scan.pos()));
                    parsed = true;
                } else if (static_cast<int>(values.size()) != d_task) {
                    std::ostringstream os;
                    os << "task entry rejected: width " << values.size() << " != d_task "
                       << d_task;
                    warnings.push_back(make_error(ParseErrorKind::length_mismatch, os.str(),
                                                  row_begin, scan.pos()));
                    parsed = true;
                } else {
                    entry = std::move(values);
                    parsed = true;
                }
            }
        }
        if (!parsed) break;
        any_row = true;

        if (*agent < 1 || *agent > num_agents || *step < 1 || *step > num_steps) {
            std::ostringstream os;
            os << "task entry rejected: agent " << *agent << " step " << *step
               << " out of range";
            warnings.push_back(
                make_error(ParseErrorKind::row_count_mismatch, os.str(), row_begin, scan.pos()));
            continue;
        }
        if (entry)
            matrix.entries[static_cast<std::size_t>(*agent - 1)]
                          [static_cast<std::size_t>(*step - 1)] = std::move(entry);
    }
    return any_row;
}

}  // namespace

TaskParseResult extract_task_assignments(const std::string& text, int num_agents, int num_steps,
                                         int d_task) {
    if (d_task < 1) throw std::invalid_argument("extract_task_assignments: d_task must be >= 1");
    if (num_agents < 1 || num_steps < 1)
        throw std::invalid_argument("extract_task_assignments: need N, K >= 1");

    TaskParseResult result;
    auto matrix = TaskAssignmentMatrix::absent(num_agents, num_steps);

    const auto markers = find_markers(text, kTaskBlockMarker);
    if (markers.size() > 1) {
        std::ostringstream os;
        os << "found " << markers.size() << " '" << kTaskBlockMarker << "' markers";
        result.warnings.push_back(
            make_error(ParseErrorKind::duplicate_block, os.str(), markers[1], markers[1]));
    }
    for (const auto pos : markers) {
        if (parse_task_block(text, pos, num_agents, num_steps, d_task, matrix, result.warnings))
            break;  // first block with rows wins
    }
    result.tasks = std::move(matrix);
    return result;
}

std::string normalization_mode_name(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::none: return "none";
        case NormalizationMode::symmetric: return "symmetric";
        case NormalizationMode::sum_preserving: return "sum_preserving";
    }
    return "unknown";
}

NormalizationMode normalization_mode_from_name(const std::string& name) {
    if (name == "none") return NormalizationMode::none;
    if (name == "symmetric") return NormalizationMode::symmetric;
    if (name == "sum_preserving") return NormalizationMode::sum_preserving;
    throw std::invalid_argument("unknown normalization mode: " + name);
}

CreditMatrix normalize_credits(const CreditMatrix& matrix, NormalizationMode mode,
                               const std::vector<double>* rewards) {
    CreditMatrix out = matrix;
    switch (mode) {
        case NormalizationMode::none:
            return out;
        case NormalizationMode::symmetric: {
            double peak = 0.0;
            for (const auto& row : out.values)
                for (double v : row) peak = std::max(peak, std::abs(v));
            const double scale = std::max(1.0, peak);
            for (auto& row : out.values)
                for (double& v : row) v /= scale;
            return out;
        }
        case NormalizationMode::sum_preserving: {
            if (rewards == nullptr)
                throw std::invalid_argument("sum_preserving normalization needs rewards");
            const std::size_t steps = out.num_steps();
            if (rewards->size() != steps)
                throw std::invalid_argument("sum_preserving: reward length mismatch");
            for (std::size_t k = 0; k < steps; ++k) {
                double column_sum = 0.0;
                for (const auto& row : out.values) column_sum += row[k];
                if (column_sum == 0.0) continue;
                const double scale = (*rewards)[k] / column_sum;
                for (auto& row : out.values) row[k] *= scale;
            }
            return out;
        }
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string render_credits(const CreditMatrix& matrix) {
    std::ostringstream os;
    os << kCreditBlockMarker << "\n";
    for (std::size_t i = 0; i < matrix.values.size(); ++i) {
        os << "agent " << (i + 1) << ": [";
        for (std::size_t k = 0; k < matrix.values[i].size(); ++k) {
            if (k) os << ", ";
            os << format_double(matrix.values[i][k]);
        }
        os << "]\n";
    }
    return os.str();
}

std::string render_tasks(const TaskAssignmentMatrix& tasks) {
    std::ostringstream os;
    os << kTaskBlockMarker << "\n";
    for (std::size_t i = 0; i < tasks.entries.size(); ++i) {
        for (std::size_t k = 0; k < tasks.entries[i].size(); ++k) {
            if (!tasks.entries[i][k]) continue;
            os << "agent " << (i + 1) << " step " << (k + 1) << ": [";
            const auto& vec = *tasks.entries[i][k];
            for (std::size_t d = 0; d < vec.size(); ++d) {
                if (d) os << ", ";
                os << vec[d];
            }
            os << "]\n";
        }
    }
    return os.str();
}

}  // namespace marl
