#include "marl/prompting.hpp"

#include <cmath>
#include <sstream>

#include "marl/foraging.hpp"
#include "marl/matrix_game.hpp"
#include "marl/parsing.hpp"
#include "marl/spaceworld.hpp"
#include "marl/warehouse.hpp"

namespace marl {

std::string prompt_mode_name(PromptMode mode) {
    return mode == PromptMode::mca ? "mca" : "taca";
}

std::string PromptBundle::joined() const {
    return p_env + "\n\n" + p_desc + "\n\n" + p_defn + "\n\n" + p_task;
}

namespace {

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
    return os.str();
}

std::string matrix_env_text(const MatrixGame& env) {
    std::ostringstream os;
    const auto& p = env.payoff();
    os << "Scenario: a repeated 3x3 common-payoff matrix game. Two agents simultaneously "
          "pick one of three actions (a0, a1, a2) for exactly "
       << MatrixGame::kEpisodeLength
       << " timesteps per episode and both receive the same payoff each step.\n"
          "Payoff table (rows: agent 1 action, columns: agent 2 action):\n";
    for (int a = 0; a < 3; ++a) {
        os << "  a" << a << ":";
        for (int b = 0; b < 3; ++b) os << " " << format_number(p[a][b]);
        os << "\n";
    }
    const auto [oa, ob] = env.optimal_joint_action();
    os << "Objective: maximize the shared episode return. The best joint action is (a" << oa
       << ", a" << ob << ") paying " << format_number(p[oa][ob])
       << " per step; miscoordination around it can pay far less. Observations are the "
          "constant vector [1] for every agent.";
    return os.str();
}

std::string spaceworld_env_text(const Spaceworld& env) {
    const int g = env.grid_size();
    std::ostringstream os;
    os << "Scenario: two satellite robots service a telescope on a " << g << "x" << g
       << " grid. Each robot is color-matched to one mirror segment and one target cell; "
          "starting, mirror, and target cells are randomized each episode. Actions are N, S, "
          "E, W, stay, interact. interact picks up a mirror in the robot's cell when "
          "empty-handed and otherwise drops the carried mirror; a carried mirror moves with "
          "its carrier.\n"
          "Safety rule: if the two robots ever try to enter the same cell, or swap cells, "
          "they collide, both are destroyed, and the episode terminates with reward zero.\n"
          "Reward: all intermediate rewards are zero. Placing both mirrors on their matching "
          "targets ends the episode with a reward on a 0-to-10 scale: finishing in the "
          "minimal number of steps pays exactly 10 and each extra step deducts one point, "
          "reaching zero at the step cap. Balancing collision safety against speed is the "
          "whole game.";
    return os.str();
}

std::string foraging_env_text(const Foraging& env) {
    const auto& c = env.config();
    std::ostringstream os;
    os << "Scenario: level-based foraging on a " << c.grid_size << "x" << c.grid_size
       << " grid (" << c.name() << "). " << c.num_players << " agents gather " << c.num_food
       << " foods. Every agent and food carries a level from 1 to 3 (visible in the "
          "observations). Actions are N, S, E, W, stay, load.\n"
          "Harvest rule: a food is collected when the combined levels of the agents standing "
          "next to it that chose load reach the food's level.\n";
    if (c.cooperative)
        os << "This is the cooperative variant: every food outlevels every single agent, so "
              "no agent can ever harvest alone.\n";
    if (c.sight_radius)
        os << "Each agent only sees entities within " << *c.sight_radius
           << " cells of itself; everything else reads as the -1 sentinel.\n";
    else
        os << "Agents observe the full grid.\n";
    os << "Reward: each harvest pays the food's level divided by the total food level, so "
          "clearing everything earns exactly 1.0 per episode. The episode ends when all food "
          "is gone or after " << 50 * c.grid_size / 8 << " steps.";
    return os.str();
}

std::string warehouse_env_text(const Warehouse& env) {
    const auto& c = env.config();
    std::ostringstream os;
    os << "Scenario: a robotic warehouse (" << c.name() << ", " << env.width() << "x"
       << env.height() << " grid). " << c.num_robots
       << " robots deliver requested shelves to the workstation cells at the bottom of the "
          "grid. Actions are N, S, E, W, stay, toggle_load. toggle_load lifts the shelf "
          "under an empty robot or sets a carried shelf down on an empty rack cell. Loaded "
          "robots cannot pass under stored shelves; unloaded robots can.\n"
          "Reward: bringing a currently requested shelf onto a workstation cell pays +1, "
          "retires that request, and a new shelf is requested. Rewards are sparse and "
          "robots block each other in the aisles; conflicting moves leave everyone in "
          "place. Episodes last "
       << Warehouse::kHorizon << " steps.";
    return os.str();
}

std::string desc_text(const Env& env, PromptMode mode, int d_task) {
    std::ostringstream os;
    os << "Input format: after each batch of episodes you receive every episode as a "
          "section headed 'episode <n>' followed by one line per timestep:\n"
          "  t=<k> | obs=<per-agent vectors> | act=<per-agent action names> | R=<reward>\n"
          "obs lists one bracketed numeric vector per agent separated by ';', act lists the "
          "agents' action names separated by ',', and R is the single shared reward for "
          "that step. Numbers use at most 3 decimal places.\n";
    switch (env.spec().env_kind) {
        case EnvKind::matrix:
            os << "Observation vectors are the constant [1]: the game state never changes.";
            break;
        case EnvKind::spaceworld:
            os << "Each robot's observation vector holds: own x and y (grid-normalized), the "
                  "other robot's relative offset, the offset to its current objective (its "
                  "mirror, or its target while carrying), a carrying flag, a delivered flag, "
                  "the other robot's carrying and delivered flags, and the elapsed-step "
                  "fraction.";
            break;
        case EnvKind::foraging:
            os << "Each agent's observation vector holds one (dx, dy, level) triple per food "
                  "followed by one per agent (itself included), offsets grid-normalized. A "
                  "triple of -1 values marks something out of sight or already harvested.";
            break;
        case EnvKind::warehouse:
            os << "Each robot's observation vector holds, for the 3x3 cells around it, four "
                  "flags per cell (wall, shelf, requested shelf, robot), then its carrying "
                  "flag and its own normalized position.";
            break;
    }
    if (mode == PromptMode::taca) {
        os << "\nBesides numeric credits you may hand any agent at any timestep an explicit "
              "task assignment: a short integer array of width "
           << d_task
           << ". Task arrays are fed straight into that agent's policy inputs during "
              "training, so use them to pin down who should do what.";
    }
    return os.str();
}

std::string agreement_example(EnvKind kind) {
    switch (kind) {
        case EnvKind::matrix:
            return "For example, when both agents commit to the highest-paying joint action "
                   "on the same step, they have agreed; one agent playing it alone is not an "
                   "agreement.";
        case EnvKind::spaceworld:
            return "For example, when one robot yields a contested cell so the other can "
                   "pass and both still deliver their own mirrors, they have agreed on who "
                   "moves where.";
        case EnvKind::foraging:
            return "For example, when two agents whose levels together reach a food's level "
                   "stand next to it and load on the same step, they have agreed; loading a "
                   "food that one agent could harvest alone with three agents crowded around "
                   "it is over-collaboration.";
        case EnvKind::warehouse:
            return "For example, when two robots split the request queue instead of chasing "
                   "the same shelf, they have agreed on a division of labor.";
    }
    return {};
}

std::string defn_text(const Env& env) {
    std::ostringstream os;
    os << "Definitions used in this training run:\n"
          "- Temporal credit assignment: attributing a reward that arrived late to the "
          "earlier actions of a single agent that earned it.\n"
          "- Structural credit assignment: splitting one shared reward into per-agent "
          "credits that reflect each agent's actual contribution.\n"
          "- Under-collaboration: j agents commit to a sub-task that needs m > j agents, so "
          "the sub-task fails or stalls.\n"
          "- Over-collaboration: j agents pile onto a sub-task that needs m < j agents, "
          "wasting effort and causing conflicts.\n"
          "- Agreement Problem: given a set of observations and actions as performed by the "
          "agents in the environment, there will be times when the agents will individually "
          "accomplish goals, but occasionally they will need to collaborate. When the "
          "correct number of agents agree to collaborate on a task requiring exactly that "
          "many agents, they have found a valid solution to the Agreement Problem.\n"
       << agreement_example(env.spec().env_kind);
    return os.str();
}

std::string task_text(const Env& env, PromptMode mode) {
    std::ostringstream os;
    os << "Your role: you are the centralized critic for this training run. After every "
          "batch of episodes you receive the full joint trajectories and must judge each of "
          "the " << env.spec().num_agents
       << " agents individually. Assign a numeric credit to every agent for every timestep: "
          "reward progress on useful sub-tasks even when the shared reward is still zero, "
          "split shared successes by actual contribution, and penalize the agent that broke "
          "an agreement rather than everyone. Briefly explain your reasoning in prose before "
          "the machine-readable output";
    if (mode == PromptMode::taca)
        os << ", citing which disagreement (under- or over-collaboration) each correction "
              "addresses, and assign explicit tasks where they would settle an agreement";
    os << ".\n\n";
    os << credit_grammar_text();
    os << "\n\nThe agent rows must cover all episodes of the batch concatenated in order: K "
          "equals the total number of timesteps across the batch.";
    if (mode == PromptMode::taca) {
        os << "\n\n" << task_grammar_text();
        os << "\n\nTask steps use the same concatenated numbering as the credit columns.";
    }
    return os.str();
}

}  // namespace

PromptBundle build_base_prompt(const Env& env, PromptMode mode, int d_task) {
    PromptBundle bundle;
    bundle.mode = mode;
    switch (env.spec().env_kind) {
        case EnvKind::matrix:
            bundle.p_env = matrix_env_text(dynamic_cast<const MatrixGame&>(env));
            break;
        case EnvKind::spaceworld:
            bundle.p_env = spaceworld_env_text(dynamic_cast<const Spaceworld&>(env));
            break;
        case EnvKind::foraging:
            bundle.p_env = foraging_env_text(dynamic_cast<const Foraging&>(env));
            break;
        case EnvKind::warehouse:
            bundle.p_env = warehouse_env_text(dynamic_cast<const Warehouse&>(env));
            break;
    }
    bundle.p_desc = desc_text(env, mode, d_task);
    bundle.p_defn = defn_text(env);
    bundle.p_task = task_text(env, mode);
    return bundle;
}

std::string action_name_for(EnvKind kind, int action) {
    switch (kind) {
        case EnvKind::matrix: {
            static const MatrixGame env;
            return env.action_name(action);
        }
        case EnvKind::spaceworld: {
            static const Spaceworld env;
            return env.action_name(action);
        }
        case EnvKind::foraging: {
            static const Foraging env{lbf_parse_scenario("8x8-2p-2f")};
            return env.action_name(action);
        }
        case EnvKind::warehouse: {
            static const Warehouse env{WarehouseConfig{}};
            return env.action_name(action);
        }
    }
    throw std::invalid_argument("unknown env kind");
}

std::string serialize_batch(const EpisodeBatch& batch) {
    std::ostringstream os;
    for (std::size_t e = 0; e < batch.trajectories.size(); ++e) {
        if (e) os << "\n";
        os << "episode " << (e + 1) << "\n";
        const auto& traj = batch.trajectories[e];
        for (std::size_t k = 0; k < traj.steps().size(); ++k) {
            const auto& step = traj.steps()[k];
            os << "t=" << (k + 1) << " | obs=";
            for (std::size_t i = 0; i < step.joint_obs.size(); ++i) {
                if (i) os << ";";
                os << "[";
                for (std::size_t d = 0; d < step.joint_obs[i].size(); ++d) {
                    if (d) os << ", ";
                    os << format_number(step.joint_obs[i][d]);
                }
                os << "]";
            }
            os << " | act=";
            for (std::size_t i = 0; i < step.joint_action.size(); ++i) {
                if (i) os << ",";
                os << action_name_for(traj.env_kind(), step.joint_action[i]);
            }
            os << " | R=" << format_number(step.global_reward) << "\n";
        }
    }
    return os.str();
}

}  // namespace marl
