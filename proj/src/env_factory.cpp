#include "marl/env_factory.hpp"

#include <charconv>

#include "marl/foraging.hpp"
#include "marl/matrix_game.hpp"
#include "marl/spaceworld.hpp"
#include "marl/warehouse.hpp"

namespace marl {

std::string EnvConfig::to_string() const {
    if (scenario.empty()) return env_kind_name(kind);
    return env_kind_name(kind) + ":" + scenario;
}

EnvConfig parse_env_string(const std::string& text) {
    EnvConfig config;
    const auto colon = text.find(':');
    const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
    config.kind = env_kind_from_name(kind);
    if (colon != std::string::npos) config.scenario = text.substr(colon + 1);
    return config;
}

namespace {

int parse_spaceworld_grid(const std::string& scenario) {
    if (scenario.empty()) return 10;
    // Accept "10" and "10x10".
    std::string token = scenario;
    const auto x = token.find('x');
    if (x != std::string::npos) {
        const std::string a = token.substr(0, x);
        const std::string b = token.substr(x + 1);
        if (a != b)
            throw std::invalid_argument("spaceworld scenario must be square, got '" + scenario +
                                        "'");
        token = a;
    }
    int grid = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), grid);
    if (ec != std::errc() || ptr != token.data() + token.size() || grid < 4)
        throw std::invalid_argument("bad spaceworld scenario '" + scenario + "'");
    return grid;
}

}  // namespace

std::unique_ptr<Env> make_env(const EnvConfig& config) {
    switch (config.kind) {
        case EnvKind::matrix:
            if (!config.scenario.empty() && config.scenario != "climbing")
                throw std::invalid_argument("unknown matrix scenario '" + config.scenario + "'");
            return std::make_unique<MatrixGame>();
        case EnvKind::spaceworld:
            return std::make_unique<Spaceworld>(parse_spaceworld_grid(config.scenario));
        case EnvKind::foraging:
            return std::make_unique<Foraging>(
                lbf_parse_scenario(config.scenario.empty() ? "8x8-2p-2f-c" : config.scenario));
        case EnvKind::warehouse:
            return std::make_unique<Warehouse>(
                rware_parse_scenario(config.scenario.empty() ? "tiny 2p" : config.scenario));
    }
    throw std::invalid_argument("unknown env kind");
}

}  // namespace marl
