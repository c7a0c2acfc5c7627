#ifndef MARL_DATASET_HPP
#define MARL_DATASET_HPP

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "marl/core.hpp"

namespace marl {

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetHeader {
    EnvKind env_kind = EnvKind::matrix;
    std::string scenario;
    int num_agents = 0;
    std::uint64_t seed = 0;
    std::string critic_kind;
    std::string run_id;
    int schema_version = kDatasetSchemaVersion;
    std::string normalization = "none";
};

struct DatasetStep {
    std::vector<Obs> joint_obs;
    std::vector<int> joint_action;
    double global_reward = 0.0;
    std::vector<double> credits;                     // one per agent
    std::vector<std::optional<TaskVector>> tasks;    // null = no assignment
    bool done = false;
};

// One annotated episode: header line, one line per step, footer line.
struct DatasetRecord {
    DatasetHeader header;
    std::vector<DatasetStep> steps;
    double episode_return = 0.0;
    std::string explanation;
    bool degraded = false;
};

// Canonical relative location of a run's episode file.
std::string dataset_relative_path(EnvKind env_kind, const std::string& scenario,
                                  const std::string& critic_kind, const std::string& run_id);

// Append-only JSONL writer; flushes on every episode boundary so a crash
// loses at most the episode being written.
class DatasetWriter {
public:
    explicit DatasetWriter(const std::string& path);

    std::size_t write_episode(const DatasetRecord& record);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

struct DatasetFilter {
    std::optional<EnvKind> env_kind;
    std::optional<std::string> critic_kind;
    std::optional<std::string> run_id;

    bool matches(const DatasetHeader& header) const;
};

// Streaming reader. Corrupt or truncated episodes are skipped with a warning
// unless strict mode is on, in which case they raise.
class DatasetReader {
public:
    DatasetReader(const std::string& path, DatasetFilter filter = {}, bool strict = false);

    std::optional<DatasetRecord> next();
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::ifstream in_;
    std::string path_;
    DatasetFilter filter_;
    bool strict_;
    std::size_t line_no_ = 0;
    std::vector<std::string> warnings_;
};

}  // namespace marl

#endif
