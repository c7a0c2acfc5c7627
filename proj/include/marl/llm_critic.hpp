#ifndef MARL_LLM_CRITIC_HPP
#define MARL_LLM_CRITIC_HPP

#include <memory>

#include "marl/critic.hpp"
#include "marl/llm_client.hpp"
#include "marl/parsing.hpp"
#include "marl/prompting.hpp"

namespace marl {

struct LlmCriticConfig {
    PromptMode mode = PromptMode::mca;
    int d_task = 4;
    NormalizationMode normalization = NormalizationMode::symmetric;
    int max_parse_retries = 2;  // corrective re-asks before falling back
};

// Language-model critic: serializes the whole batch into one prompt, sends it
// through the chat session, and parses credits (and, in task mode, task
// assignments) back out. Malformed replies get bounded corrective retries;
// persistent failure degrades to shared-reward credits so training stays live.
class LlmCritic : public Critic {
public:
    LlmCritic(EnvConfig env_config, LlmCriticConfig config, ChatConfig chat_config);

    CreditSource source() const override {
        return config_.mode == PromptMode::taca ? CreditSource::llm_taca
                                                : CreditSource::llm_mca;
    }

    const PromptBundle& base_prompt() const { return bundle_; }
    ChatSession& session() { return *session_; }

protected:
    CriticVerdict do_assign(const EpisodeBatch& batch) override;

private:
    EnvConfig env_config_;
    LlmCriticConfig config_;
    PromptBundle bundle_;
    std::unique_ptr<ChatSession> session_;
};

}  // namespace marl

#endif
