#include "marl/llm_critic.hpp"

#include <cctype>
#include <sstream>

namespace marl {

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Prose preceding the first grammar block, kept as the critic's explanation.
std::string explanation_of(const std::string& reply) {
    auto cut = reply.find(kCreditBlockMarker);
    const auto tasks = reply.find(kTaskBlockMarker);
    if (tasks != std::string::npos && (cut == std::string::npos || tasks < cut)) cut = tasks;
    return strip(cut == std::string::npos ? reply : reply.substr(0, cut));
}

}  // namespace

LlmCritic::LlmCritic(EnvConfig env_config, LlmCriticConfig config, ChatConfig chat_config)
    : env_config_(std::move(env_config)), config_(config) {
    const auto env = make_env(env_config_);
    bundle_ = build_base_prompt(*env, config_.mode, config_.d_task);
    session_ = std::make_unique<ChatSession>(std::move(chat_config), bundle_.joined());
}

CriticVerdict LlmCritic::do_assign(const EpisodeBatch& batch) {
    const int n = batch.num_agents();
    const int total_steps = static_cast<int>(batch.total_steps());
    const CreditSource credit_source = source();

    CriticVerdict verdict;
    std::ostringstream transcript;
    std::string message = serialize_batch(batch);

    for (int attempt = 0; attempt <= config_.max_parse_retries; ++attempt) {
        std::string reply;
        try {
            reply = session_->chat_send(message);
        } catch (const TransportError& e) {
            throw CriticError(std::string("critic transport failed: ") + e.what(),
                              transcript.str());
        }
        transcript << reply << "\n";
        verdict.retry_count = attempt;

        const auto parsed = extract_credit_matrix(reply, n, total_steps);
        if (!parsed.ok()) {
            if (attempt == config_.max_parse_retries) break;
            std::ostringstream correction;
            correction << "Your previous reply could not be parsed ("
                       << parse_error_kind_name(parsed.error->kind) << ": "
                       << parsed.error->detail << "). Re-send the machine-readable output for "
                       << "the same batch, exactly " << n << " agent rows of " << total_steps
                       << " numbers.\n\n"
                       << credit_grammar_text();
            message = correction.str();
            continue;
        }

        // Slice the concatenated columns back into per-trajectory matrices.
        verdict.credits.reserve(batch.trajectories.size());
        std::size_t offset = 0;
        for (const auto& traj : batch.trajectories) {
            CreditMatrix m;
            m.source = credit_source;
            m.values.assign(n, std::vector<double>(traj.length(), 0.0));
            for (int i = 0; i < n; ++i)
                for (std::size_t k = 0; k < traj.length(); ++k)
                    m.values[i][k] = parsed.credits->values[i][offset + k];
            std::vector<double> rewards;
            rewards.reserve(traj.length());
            for (const auto& step : traj.steps()) rewards.push_back(step.global_reward);
            verdict.credits.push_back(
                normalize_credits(m, config_.normalization, &rewards));
            offset += traj.length();
        }

        if (config_.mode == PromptMode::taca) {
            const auto tasks =
                extract_task_assignments(reply, n, total_steps, config_.d_task);
            std::size_t task_offset = 0;
            for (const auto& traj : batch.trajectories) {
                auto per_traj = TaskAssignmentMatrix::absent(n, traj.length());
                for (int i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < traj.length(); ++k)
                        per_traj.entries[i][k] = tasks.tasks->entries[i][task_offset + k];
                verdict.tasks.push_back(std::move(per_traj));
                task_offset += traj.length();
            }
        }

        verdict.explanation = explanation_of(reply);
        verdict.raw_response = transcript.str();
        return verdict;
    }

    // Persistent garbage: keep training alive on the shared-reward signal.
    verdict.credits = SharedRewardCritic::shared_credits(batch);
    verdict.tasks.clear();
    verdict.degraded = true;
    verdict.explanation.clear();
    verdict.raw_response = transcript.str();
    return verdict;
}

}  // namespace marl
