#ifndef MARL_PROMPTING_HPP
#define MARL_PROMPTING_HPP

#include <string>

#include "marl/core.hpp"
#include "marl/env.hpp"

namespace marl {

enum class PromptMode { mca, taca };

std::string prompt_mode_name(PromptMode mode);

// The four-part base prompt handed to the critic session as its system
// message: scenario rules, input-data description, collaboration
// definitions, and the critic's role with the required output grammar.
struct PromptBundle {
    std::string p_env;
    std::string p_desc;
    std::string p_defn;
    std::string p_task;
    PromptMode mode = PromptMode::mca;

    std::string joined() const;
};

// Deterministic text from templates parameterized by the environment's
// configuration. Same inputs produce byte-identical bundles.
PromptBundle build_base_prompt(const Env& env, PromptMode mode, int d_task);

// Mnemonic action names per environment kind, used in serialized batches.
std::string action_name_for(EnvKind kind, int action);

// One section per trajectory ("episode 1" ...), one line per step:
//   t=<k> | obs=<per-agent vectors> | act=<per-agent action names> | R=<reward>
// Numbers print with 3 decimal places, integer values without decimals.
// The returned string's size() is the character count used for token budgeting.
std::string serialize_batch(const EpisodeBatch& batch);

}  // namespace marl

#endif
