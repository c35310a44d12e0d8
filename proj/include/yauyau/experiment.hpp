#pragma once

#include "yauyau/errors.hpp"
#include "yauyau/filter.hpp"
#include "yauyau/grid.hpp"
#include "yauyau/sde.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace yauyau {

enum class BoundsMode { Data, Fixed };

struct ExperimentConfig {
    std::string preset;

    int dim = 1;
    int obs_dim = 1;
    std::vector<std::string> f;
    std::vector<std::string> h;

    double T = 0.0;
    double dt = 0.0;
    double dtau = 0.0;

    double ds = 0.0;
    BoundsMode bounds = BoundsMode::Data;
    std::vector<double> lo; // fixed bounds only, one per axis
    std::vector<double> hi;

    std::uint64_t seed = 42;
    std::vector<double> x0; // empty means the zero vector
    InitKind init = InitKind::Gaussian;
    double init_sigma = 1.0;

    std::string output_dir;
    std::size_t snapshots = 20;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct FieldError {
    std::string field;   // dotted path, e.g. "model.f[2]"
    std::string message;
    std::optional<std::size_t> offset; // byte offset for expression errors
};

// One or more configuration fields are invalid.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

// Empty when the config is usable. Checks shapes, positivity, time-grid
// nesting, expression parsing under the declared dimension and, for fixed
// bounds, the node budget.
std::vector<FieldError> validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

// Fields absent from the document keep the values of the named preset, or
// the defaults above when there is none. Throws ValidationError listing every
// bad field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();
// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

expr::ModelSpec model_of(const ExperimentConfig& cfg);
TimeGrid time_grid_of(const ExperimentConfig& cfg);
std::vector<double> initial_state(const ExperimentConfig& cfg);

struct ExperimentOutput {
    ExperimentConfig config;
    TimeGrid time;
    SpatialGrid grid;
    SimulatedPaths paths;
    Matrix truth; // coarse states, (Ntau+1) x D
    FilterResult result;
    double zero_rmse = 0.0; // RMSE of the all-zero estimator
    double wall_seconds = 0.0;
};

// Simulates, builds the grid (data-driven or fixed), filters and scores.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, const FilterOptions& options = {});

// sqrt(mean over k, d of (est - truth)^2). Throws on shape mismatch.
double rmse(const Matrix& estimates, const Matrix& truth);
// Per-row RMSE over dimensions.
std::vector<double> step_errors(const Matrix& estimates, const Matrix& truth);

nlohmann::json summary_json(const ExperimentOutput& out);

// states.csv, observations.csv, estimates.csv, summary.json and one
// density_####.bin per retained snapshot.
void write_artifacts(const ExperimentOutput& out, const std::filesystem::path& dir);

} // namespace yauyau
