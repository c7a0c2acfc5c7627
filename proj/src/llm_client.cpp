#include "marl/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace marl {

using nlohmann::json;

std::string chat_mode_name(ChatMode mode) {
    switch (mode) {
        case ChatMode::live: return "live";
        case ChatMode::record: return "record";
        case ChatMode::replay: return "replay";
    }
    return "unknown";
}

ChatMode chat_mode_from_name(const std::string& name) {
    if (name == "live") return ChatMode::live;
    if (name == "record") return ChatMode::record;
    if (name == "replay") return ChatMode::replay;
    throw std::invalid_argument("unknown chat mode: " + name);
}

std::string chat_role_name(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "unknown";
}

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint must look like http://host:port/path, got '" +
                                    url + "'");
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http")
        throw std::invalid_argument("only http endpoints are supported (got scheme '" + scheme +
                                    "'); use record/replay cassettes or an http proxy");
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.host_port = url;
        out.path = "/";
    } else {
        out.host_port = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

std::uint64_t ChatSession::request_hash(const std::string& model_name,
                                        const std::vector<ChatTurn>& messages) {
    // FNV-1a over a canonical serialization; stable across platforms.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    };
    feed(model_name);
    for (const auto& turn : messages) {
        feed(chat_role_name(turn.role));
        feed(turn.content);
    }
    return h;
}

ChatSession::ChatSession(ChatConfig config, std::string base_prompt)
    : config_(std::move(config)) {
    if (config_.mode != ChatMode::replay && config_.endpoint.empty())
        throw std::invalid_argument("ChatSession: live/record modes need an endpoint");
    if (config_.mode != ChatMode::live && config_.cassette_path.empty())
        throw std::invalid_argument("ChatSession: record/replay modes need a cassette path");
    history_.push_back({ChatRole::system, std::move(base_prompt)});
    if (config_.mode == ChatMode::replay) load_cassette();
}

void ChatSession::load_cassette() {
    std::ifstream in(config_.cassette_path);
    if (!in) throw CassetteError("cassette not found: " + config_.cassette_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            std::ostringstream os;
            os << "cassette " << config_.cassette_path << " line " << line_no
               << ": bad record: " << e.what();
            throw CassetteError(os.str());
        }
        CassetteRecord r;
        r.request_hash = std::stoull(record.at("request_hash").get<std::string>(), nullptr, 16);
        r.response = record.at("response").get<std::string>();
        cassette_.push_back(std::move(r));
    }
}

std::string ChatSession::send_over_network(const std::vector<ChatTurn>& messages) {
    const ParsedUrl url = parse_url(config_.endpoint);

    json body;
    body["model"] = config_.model_name;
    body["messages"] = json::array();
    for (const auto& turn : messages)
        body["messages"].push_back({{"role", chat_role_name(turn.role)},
                                    {"content", turn.content}});
    const std::string payload = body.dump();

    httplib::Client client(url.host_port);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_failure;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        last_attempt_count_ = attempt;
        ++network_attempts_;
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                const json reply = json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw TransportError(std::string("malformed chat-completions response: ") +
                                     e.what());
            }
        }
        if (res && res->status >= 400 && res->status < 500) {
            std::ostringstream os;
            os << "endpoint returned " << res->status << ": " << res->body;
            throw TransportError(os.str());
        }
        if (res) {
            std::ostringstream os;
            os << "status " << res->status;
            last_failure = os.str();
        } else {
            last_failure = "transport failure (" + httplib::to_string(res.error()) + ")";
        }
        if (attempt < config_.max_attempts) {
            const auto delay = static_cast<std::int64_t>(
                config_.backoff_base_ms * std::pow(config_.backoff_factor, attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    throw TransportError("retries exhausted contacting " + config_.endpoint + ": " +
                         last_failure);
}

void ChatSession::append_cassette_record(std::uint64_t hash,
                                         const std::vector<ChatTurn>& messages,
                                         const std::string& response) {
    std::ofstream out(config_.cassette_path, std::ios::app);
    if (!out) throw CassetteError("cannot append to cassette: " + config_.cassette_path);
    json record;
    record["request_hash"] = hash_hex(hash);
    json msgs = json::array();
    for (const auto& turn : messages)
        msgs.push_back({{"role", chat_role_name(turn.role)}, {"content", turn.content}});
    record["request"] = {{"model", config_.model_name}, {"messages", std::move(msgs)}};
    record["response"] = response;
    out << record.dump() << "\n";
}

std::int64_t ChatSession::estimated_tokens() const {
    std::int64_t chars = 0;
    for (const auto& turn : history_) chars += static_cast<std::int64_t>(turn.content.size());
    return chars / 4;
}

void ChatSession::manage_history() {
    // Keep the base prompt (index 0) and at least the latest turn pair.
    while (estimated_tokens() > config_.token_budget && history_.size() >= 5) {
        history_.erase(history_.begin() + 1, history_.begin() + 3);
        ++evictions_;
    }
}

std::string ChatSession::chat_send(const std::string& message) {
    if (static_cast<std::int64_t>(message.size()) / 4 > config_.token_budget)
        throw BudgetError("message alone exceeds the session token budget");

    std::vector<ChatTurn> messages = history_;
    messages.push_back({ChatRole::user, message});
    const std::uint64_t hash = request_hash(config_.model_name, messages);

    std::string reply;
    switch (config_.mode) {
        case ChatMode::live:
            reply = send_over_network(messages);
            break;
        case ChatMode::record:
            reply = send_over_network(messages);
            append_cassette_record(hash, messages, reply);
            break;
        case ChatMode::replay: {
            if (cassette_cursor_ >= cassette_.size())
                throw CassetteError("cassette exhausted: no response left for request " +
                                    hash_hex(hash));
            const auto& record = cassette_[cassette_cursor_];
            if (record.request_hash != hash) {
                std::ostringstream os;
                os << "cassette mismatch at record " << cassette_cursor_ << ": expected request "
                   << hash_hex(record.request_hash) << ", got " << hash_hex(hash);
                throw CassetteError(os.str());
            }
            ++cassette_cursor_;
            reply = record.response;
            break;
        }
    }

    history_.push_back({ChatRole::user, message});
    history_.push_back({ChatRole::assistant, reply});
    manage_history();
    return reply;
}

}  // namespace marl
