#ifndef MARL_ENV_FACTORY_HPP
#define MARL_ENV_FACTORY_HPP

#include <memory>
#include <string>

#include "marl/env.hpp"

namespace marl {

struct EnvConfig {
    EnvKind kind = EnvKind::matrix;
    std::string scenario;  // empty = per-kind default

    // Canonical "<kind>:<scenario>" form, parseable by parse_env_string.
    std::string to_string() const;
};

// Accepts "<kind>" or "<kind>:<scenario>", e.g. "matrix",
// "spaceworld:10x10", "lbf:8x8-2p-2f-c", "rware:tiny 2p".
EnvConfig parse_env_string(const std::string& text);

std::unique_ptr<Env> make_env(const EnvConfig& config);

}  // namespace marl

#endif
