#include "yauyau/service.hpp"

#include <chrono>
#include <cstdio>

namespace yauyau::service {

using nlohmann::json;

namespace {

double unix_now() {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

} // namespace

const char* state_name(JobState s) {
    switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
    }
    return "unknown";
}

struct JobRegistry::Job {
    std::string id;
    ExperimentConfig config;
    JobState state = JobState::Queued;
    double progress = 0.0;
    std::string message;
    double created_at = 0.0;
    std::optional<double> finished_at;
    json summary;
    std::shared_ptr<const ExperimentOutput> output;
    std::atomic<bool> cancel{false};
};

json to_json(const JobView& v) {
    json j = {
        {"id", v.id},
        {"state", state_name(v.state)},
        {"progress", v.progress},
        {"created_at", v.created_at},
        {"finished_at", v.finished_at ? json(*v.finished_at) : json(nullptr)},
        {"config", yauyau::to_json(v.config)},
        {"summary", v.summary},
    };
    if (v.state == JobState::Failed) j["message"] = v.message;
    return j;
}

JobRegistry::JobRegistry(RegistryOptions options) : options_(std::move(options)) {
    if (options_.workers == 0) throw ConfigError("workers", "at least one worker is required");
    if (options_.queue_depth == 0) throw ConfigError("queue_depth", "must be positive");
    for (std::size_t i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobRegistry::~JobRegistry() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        for (auto& [id, job] : jobs_) job->cancel = true;
    }
    work_.notify_all();
    for (auto& t : workers_) t.join();
}

std::string JobRegistry::submit(const ExperimentConfig& cfg) {
    auto errs = validate(cfg);
    if (!errs.empty()) throw ValidationError(std::move(errs));
    auto job = std::make_shared<Job>();
    job->config = cfg;
    job->created_at = unix_now();
    {
        std::lock_guard lock(mutex_);
        if (active_ >= options_.queue_depth)
            throw QueueFull("queue is full (" + std::to_string(options_.queue_depth) + " jobs queued or running)");
        char buf[32];
        std::snprintf(buf, sizeof buf, "job-%06zu", next_id_++);
        job->id = buf;
        jobs_.emplace(job->id, job);
        order_.push_back(job->id);
        queue_.push_back(job);
        ++active_;
    }
    work_.notify_one();
    return job->id;
}

std::shared_ptr<JobRegistry::Job> JobRegistry::find(const std::string& id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw UnknownJob("no job with id '" + id + "'");
    return it->second;
}

JobView JobRegistry::view(const Job& job) const {
    return {job.id, job.config, job.state, job.progress, job.message, job.created_at, job.finished_at, job.summary};
}

JobView JobRegistry::status(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return view(*find(id));
}

std::vector<JobView> JobRegistry::list() const {
    std::lock_guard lock(mutex_);
    std::vector<JobView> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(view(*jobs_.at(id)));
    return out;
}

std::shared_ptr<const ExperimentOutput> JobRegistry::result(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto job = find(id);
    if (job->state == JobState::Failed) throw JobConflict("job failed: " + job->message);
    if (job->state != JobState::Done) throw JobConflict(std::string("job is ") + state_name(job->state));
    return job->output;
}

JobView JobRegistry::cancel(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto job = find(id);
    if (job->state == JobState::Done || job->state == JobState::Failed)
        throw JobConflict(std::string("job already ") + state_name(job->state));
    job->cancel = true;
    if (job->state == JobState::Queued) {
        std::erase(queue_, job);
        job->state = JobState::Failed;
        job->message = "cancelled";
        job->finished_at = unix_now();
        --active_;
        changed_.notify_all();
    }
    return view(*job);
}

JobView JobRegistry::wait(const std::string& id, double timeout_seconds) const {
    std::unique_lock lock(mutex_);
    auto job = find(id);
    changed_.wait_for(lock, std::chrono::duration<double>(timeout_seconds),
                      [&] { return job->state == JobState::Done || job->state == JobState::Failed; });
    return view(*job);
}

void JobRegistry::worker_loop() {
    for (;;) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            work_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job = queue_.front();
            queue_.pop_front();
            job->state = JobState::Running;
            changed_.notify_all();
        }
        execute(job);
    }
}

void JobRegistry::execute(const std::shared_ptr<Job>& job) {
    FilterOptions opts;
    opts.cancel = &job->cancel;
    opts.on_progress = [&](std::size_t k, std::size_t ntau) {
        std::lock_guard lock(mutex_);
        job->progress = static_cast<double>(k) / static_cast<double>(ntau);
        changed_.notify_all();
    };

    std::shared_ptr<ExperimentOutput> out;
    std::string failure;
    try {
        out = std::make_shared<ExperimentOutput>(run_experiment(job->config, opts));
        if (!options_.persist_dir.empty()) write_artifacts(*out, options_.persist_dir / job->id);
    } catch (const Cancelled&) {
        failure = "cancelled";
    } catch (const std::exception& e) {
        failure = e.what();
        if (failure.empty()) failure = "unknown error";
    }

    json summary;
    if (out) {
        summary = summary_json(*out);
        summary.erase("config");
    }
    std::lock_guard lock(mutex_);
    if (out) {
        job->output = std::move(out);
        job->summary = std::move(summary);
        job->progress = 1.0;
        job->state = JobState::Done;
    } else {
        job->state = JobState::Failed;
        job->message = failure;
    }
    job->finished_at = unix_now();
    --active_;
    changed_.notify_all();
}

} // namespace yauyau::service
