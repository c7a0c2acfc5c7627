#ifndef MARL_LLM_CLIENT_HPP
#define MARL_LLM_CLIENT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace marl {

enum class ChatMode { live, record, replay };
enum class ChatRole { system, user, assistant };

std::string chat_mode_name(ChatMode mode);
ChatMode chat_mode_from_name(const std::string& name);
std::string chat_role_name(ChatRole role);

struct ChatTurn {
    ChatRole role = ChatRole::user;
    std::string content;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CassetteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChatConfig {
    std::string endpoint;           // OpenAI-compatible chat-completions URL (http)
    std::string model_name = "gemma-7b";
    std::int64_t token_budget = 60000;  // soft bound, chars/4 heuristic
    ChatMode mode = ChatMode::replay;
    std::string cassette_path;      // required for record/replay
    std::string api_key;            // bearer token for live/record
    int max_attempts = 5;
    int backoff_base_ms = 1000;
    double backoff_factor = 2.0;
};

// One conversation with the critic model. The base prompt is pinned as
// history[0] and never evicted; everything after it accumulates turn pairs so
// each new batch prompt effectively carries the full feedback history. In
// replay mode no network activity happens at all: responses come from the
// cassette, matched request-by-request through a stable hash.
class ChatSession {
public:
    ChatSession(ChatConfig config, std::string base_prompt);

    std::string chat_send(const std::string& message);

    // Evicts oldest non-system turn pairs until the chars/4 estimate fits the
    // budget (the latest pair is always kept).
    void manage_history();

    const std::vector<ChatTurn>& history() const { return history_; }
    const ChatConfig& config() const { return config_; }

    std::int64_t estimated_tokens() const;
    int last_attempt_count() const { return last_attempt_count_; }
    std::int64_t network_attempts() const { return network_attempts_; }
    std::int64_t evictions() const { return evictions_; }

    static std::uint64_t request_hash(const std::string& model_name,
                                      const std::vector<ChatTurn>& messages);

private:
    struct CassetteRecord {
        std::uint64_t request_hash = 0;
        std::string response;
    };

    std::string send_over_network(const std::vector<ChatTurn>& messages);
    void append_cassette_record(std::uint64_t hash, const std::vector<ChatTurn>& messages,
                                const std::string& response);
    void load_cassette();

    ChatConfig config_;
    std::vector<ChatTurn> history_;
    std::vector<CassetteRecord> cassette_;
    std::size_t cassette_cursor_ = 0;
    int last_attempt_count_ = 0;
    std::int64_t network_attempts_ = 0;
    std::int64_t evictions_ = 0;
};

}  // namespace marl

#endif
