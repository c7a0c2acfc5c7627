#include "marl/dataset.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace marl {

using nlohmann::json;

namespace {

std::string sanitize(const std::string& s) {
    std::string out = s;
    std::replace(out.begin(), out.end(), ' ', '-');
    return out;
}

json header_to_json(const DatasetHeader& h) {
    return json{{"type", "header"},
                {"schema_version", h.schema_version},
                {"env", env_kind_name(h.env_kind)},
                {"scenario", h.scenario},
                {"agents", h.num_agents},
                {"seed", h.seed},
                {"critic", h.critic_kind},
                {"run_id", h.run_id},
                {"normalization", h.normalization}};
}

json step_to_json(const DatasetStep& s, std::size_t k) {
    json tasks = json::array();
    for (const auto& t : s.tasks) {
        if (t)
            tasks.push_back(*t);
        else
            tasks.push_back(nullptr);
    }
    return json{{"type", "step"},     {"k", k},
                {"obs", s.joint_obs}, {"act", s.joint_action},
                {"reward", s.global_reward}, {"credits", s.credits},
                {"tasks", std::move(tasks)}, {"done", s.done}};
}

}  // namespace

std::string dataset_relative_path(EnvKind env_kind, const std::string& scenario,
                                  const std::string& critic_kind, const std::string& run_id) {
    return env_kind_name(env_kind) + "/" + sanitize(scenario) + "/" + sanitize(critic_kind) +
           "/" + sanitize(run_id) + ".jsonl";
}

DatasetWriter::DatasetWriter(const std::string& path)
    : path_(path), out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("dataset: cannot open " + path + " for append");
}

std::size_t DatasetWriter::write_episode(const DatasetRecord& record) {
    if (record.steps.empty()) throw std::invalid_argument("dataset: empty episode");
    for (const auto& step : record.steps) {
        if (static_cast<int>(step.credits.size()) != record.header.num_agents ||
            static_cast<int>(step.tasks.size()) != record.header.num_agents)
            throw std::invalid_argument("dataset: per-agent annotation count mismatch");
    }

    std::ostringstream buffer;
    buffer << header_to_json(record.header).dump() << "\n";
    for (std::size_t k = 0; k < record.steps.size(); ++k)
        buffer << step_to_json(record.steps[k], k).dump() << "\n";
    buffer << json{{"type", "footer"},
                   {"episode_return", record.episode_return},
                   {"explanation", record.explanation},
                   {"degraded", record.degraded}}
                  .dump()
           << "\n";

    const std::string text = buffer.str();
    out_ << text;
    out_.flush();
    if (!out_) throw std::runtime_error("dataset: write failed (partial episode) on " + path_);
    return text.size();
}

bool DatasetFilter::matches(const DatasetHeader& header) const {
    if (env_kind && *env_kind != header.env_kind) return false;
    if (critic_kind && *critic_kind != header.critic_kind) return false;
    if (run_id && *run_id != header.run_id) return false;
    return true;
}

DatasetReader::DatasetReader(const std::string& path, DatasetFilter filter, bool strict)
    : in_(path), path_(path), filter_(filter), strict_(strict) {
    if (!in_) throw std::runtime_error("dataset: cannot open " + path);
}

std::optional<DatasetRecord> DatasetReader::next() {
    DatasetRecord record;
    bool in_episode = false;

    auto complain = [&](const std::string& what) {
        std::ostringstream os;
        os << path_ << ":" << line_no_ << ": " << what;
        if (strict_) throw std::runtime_error(os.str());
        warnings_.push_back(os.str());
    };

    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            complain(std::string("corrupt line: ") + e.what());
            continue;
        }
        try {
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (in_episode) complain("header before footer; dropping truncated episode");
                record = DatasetRecord{};
                record.header.schema_version = j.at("schema_version").get<int>();
                if (record.header.schema_version != kDatasetSchemaVersion) {
                    complain("unsupported schema_version " +
                             std::to_string(record.header.schema_version));
                    in_episode = false;
                    continue;
                }
                record.header.env_kind = env_kind_from_name(j.at("env").get<std::string>());
                record.header.scenario = j.at("scenario").get<std::string>();
                record.header.num_agents = j.at("agents").get<int>();
                record.header.seed = j.at("seed").get<std::uint64_t>();
                record.header.critic_kind = j.at("critic").get<std::string>();
                record.header.run_id = j.at("run_id").get<std::string>();
                record.header.normalization = j.at("normalization").get<std::string>();
                in_episode = true;
            } else if (type == "step") {
                if (!in_episode) {
                    complain("step outside episode");
                    continue;
                }
                DatasetStep step;
                step.joint_obs = j.at("obs").get<std::vector<Obs>>();
                step.joint_action = j.at("act").get<std::vector<int>>();
                step.global_reward = j.at("reward").get<double>();
                step.credits = j.at("credits").get<std::vector<double>>();
                for (const auto& t : j.at("tasks")) {
                    if (t.is_null())
                        step.tasks.push_back(std::nullopt);
                    else
                        step.tasks.push_back(t.get<TaskVector>());
                }
                step.done = j.at("done").get<bool>();
                record.steps.push_back(std::move(step));
            } else if (type == "footer") {
                if (!in_episode) {
                    complain("footer outside episode");
                    continue;
                }
                record.episode_return = j.at("episode_return").get<double>();
                record.explanation = j.at("explanation").get<std::string>();
                record.degraded = j.at("degraded").get<bool>();
                in_episode = false;
                if (filter_.matches(record.header)) return record;
                record = DatasetRecord{};
            } else {
                complain("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            complain(std::string("bad record: ") + e.what());
        }
    }
    if (in_episode) complain("truncated trailing episode (no footer)");
    return std::nullopt;
}

}  // namespace marl
