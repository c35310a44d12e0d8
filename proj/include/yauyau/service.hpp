#pragma once

#include "yauyau/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace yauyau::service {

enum class JobState { Queued, Running, Done, Failed };

const char* state_name(JobState s);

class QueueFull : public Error {
public:
    using Error::Error;
};

class UnknownJob : public Error {
public:
    using Error::Error;
};

// The job exists but is not in a state that allows the request.
class JobConflict : public Error {
public:
    using Error::Error;
};

struct JobView {
    std::string id;
    ExperimentConfig config;
    JobState state = JobState::Queued;
    double progress = 0.0; // fraction of Ntau completed
    std::string message;   // failure reason
    double created_at = 0.0; // unix seconds
    std::optional<double> finished_at;
    nlohmann::json summary; // null until done
};

nlohmann::json to_json(const JobView& v);

struct RegistryOptions {
    std::size_t workers = 2;
    std::size_t queue_depth = 8; // queued plus running jobs
    std::filesystem::path persist_dir; // empty: keep results in memory only
};

class JobRegistry {
public:
    explicit JobRegistry(RegistryOptions options = {});
    ~JobRegistry();
    JobRegistry(const JobRegistry&) = delete;
    JobRegistry& operator=(const JobRegistry&) = delete;

    // Throws ValidationError or QueueFull.
    std::string submit(const ExperimentConfig& cfg);
    JobView status(const std::string& id) const;
    std::vector<JobView> list() const;
    // Throws UnknownJob, or JobConflict carrying the failure message when the
    // job is not done.
    std::shared_ptr<const ExperimentOutput> result(const std::string& id) const;
    // Queued jobs fail at once; running jobs stop at the next coarse step.
    // Throws JobConflict for finished jobs.
    JobView cancel(const std::string& id);
    // Blocks until the job finishes or the timeout passes; returns the view.
    JobView wait(const std::string& id, double timeout_seconds) const;

    const RegistryOptions& options() const noexcept { return options_; }

private:
    struct Job;
    void worker_loop();
    void execute(const std::shared_ptr<Job>& job);
    std::shared_ptr<Job> find(const std::string& id) const;
    JobView view(const Job& job) const;

    RegistryOptions options_;
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::condition_variable work_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::vector<std::string> order_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::size_t active_ = 0;
    std::size_t next_id_ = 1;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

struct DensitySlice {
    std::vector<int> axes;              // 1-based, one or two entries
    std::vector<std::size_t> fixed;     // per-axis node index; entries on the slice axes are ignored
    std::vector<double> x, y;           // node coordinates along the slice axes (y empty for one axis)
    std::vector<double> values;         // row-major, x index outer
    double mass = 0.0;                  // sum(values) * ds^D, this slice's share of the total mass
};

// Throws ConfigError naming the offending parameter when an axis or index is
// out of range.
DensitySlice density_slice(const SpatialGrid& grid, std::span<const double> field, const std::vector<int>& axes,
                           const std::vector<std::size_t>& fixed);

// Builds the HTTP routes over a registry. Static files under `static_dir`
// are mounted at "/" when the directory exists.
std::unique_ptr<httplib::Server> make_server(JobRegistry& registry, const std::filesystem::path& static_dir = {});

} // namespace yauyau::service
