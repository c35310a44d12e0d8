#include "yauyau/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace yauyau {

using nlohmann::json;

namespace {

std::string indexed(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

const std::map<std::string, ExperimentConfig>& preset_table() {
    static const std::map<std::string, ExperimentConfig> table = [] {
        std::map<std::string, ExperimentConfig> t;

        ExperimentConfig c;
        c.preset = "cubic1d";
        c.dim = 1;
        c.obs_dim = 1;
        c.f = {"cos(x1)"};
        c.h = {"x1^3"};
        c.T = 20.0;
        c.dt = 0.001;
        c.dtau = 0.005;
        c.ds = 0.5;
        c.seed = 42;
        c.output_dir = "out/cubic1d";
        t[c.preset] = c;

        // T = 20 rather than the T = 5 of one listing: Ntau = 4000 and
        // 20000 fine steps only fit T = 20.
        ExperimentConfig c3 = c;
        c3.preset = "cubic3d";
        c3.dim = 3;
        c3.obs_dim = 3;
        c3.f = {"cos(x1)", "cos(x2)", "cos(x3)"};
        c3.h = {"x1^3", "x2^3", "x3^3"};
        c3.output_dir = "out/cubic3d";
        t[c3.preset] = c3;

        ExperimentConfig al;
        al.preset = "almostlinear";
        al.dim = 1;
        al.obs_dim = 1;
        al.f = {"0"};
        al.h = {"x1*(1+0.25*cos(x1))"};
        al.T = 50.0;
        al.dt = 0.0001;
        al.dtau = 0.0005;
        al.ds = 0.5;
        al.seed = 42;
        al.output_dir = "out/almostlinear";
        t[al.preset] = al;

        // Three independent copies, for the literal Dim = 3.
        ExperimentConfig al3 = al;
        al3.preset = "almostlinear3d";
        al3.dim = 3;
        al3.obs_dim = 3;
        al3.f = {"0", "0", "0"};
        al3.h = {"x1*(1+0.25*cos(x1))", "x2*(1+0.25*cos(x2))", "x3*(1+0.25*cos(x3))"};
        al3.output_dir = "out/almostlinear3d";
        t[al3.preset] = al3;

        ExperimentConfig lg;
        lg.preset = "linear";
        lg.dim = 1;
        lg.obs_dim = 1;
        lg.f = {"-0.5*x1"};
        lg.h = {"x1"};
        lg.T = 10.0;
        lg.dt = 0.001;
        lg.dtau = 0.005;
        lg.ds = 0.1;
        lg.bounds = BoundsMode::Fixed;
        lg.lo = {-5.0};
        lg.hi = {5.0};
        lg.seed = 42;
        lg.output_dir = "out/linear";
        t[lg.preset] = lg;
        return t;
    }();
    return table;
}

const char* init_name(InitKind k) { return k == InitKind::Uniform ? "uniform" : "gaussian"; }

// Reads doc[key] into out when present, recording a FieldError on type
// mismatch.
template <typename T>
void read_field(const json& obj, const char* key, const std::string& path, T& out, std::vector<FieldError>& errs) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        errs.push_back({path, "has the wrong type", std::nullopt});
    }
}

const json* object_at(const json& obj, const char* key, const std::string& path, std::vector<FieldError>& errs) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    if (!it->is_object()) {
        errs.push_back({path, "must be an object", std::nullopt});
        return nullptr;
    }
    return &*it;
}

} // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : ConfigError(errors.empty() ? std::string("config") : errors.front().field,
                  errors.empty() ? std::string("invalid") : errors.front().message +
                                       (errors.size() > 1 ? " (and " + std::to_string(errors.size() - 1) +
                                                                " more)"
                                                          : std::string())),
      errors_(std::move(errors)) {}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : preset_table()) n.push_back(k);
        return n;
    }();
    return names;
}

ExperimentConfig preset(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw ConfigError("preset", "unknown preset '" + name + "'");
    return it->second;
}

std::vector<FieldError> validate(const ExperimentConfig& cfg) {
    std::vector<FieldError> errs;
    auto bad = [&](std::string field, std::string msg) { errs.push_back({std::move(field), std::move(msg), {}}); };

    const bool dim_ok = cfg.dim >= 1 && cfg.dim <= 6;
    if (!dim_ok) bad("model.dim", "must be in 1..6");
    if (cfg.obs_dim < 1) bad("model.obs_dim", "must be at least 1");
    if (cfg.f.size() != static_cast<std::size_t>(std::max(cfg.dim, 0)))
        bad("model.f", "needs " + std::to_string(cfg.dim) + " expressions, got " + std::to_string(cfg.f.size()));
    if (cfg.h.size() != static_cast<std::size_t>(std::max(cfg.obs_dim, 0)))
        bad("model.h", "needs " + std::to_string(cfg.obs_dim) + " expressions, got " + std::to_string(cfg.h.size()));
    if (dim_ok) {
        auto check_exprs = [&](const std::vector<std::string>& texts, const std::string& base) {
            for (std::size_t i = 0; i < texts.size(); ++i) {
                try {
                    (void)expr::parse(texts[i], cfg.dim);
                } catch (const ParseError& e) {
                    errs.push_back({indexed(base, i), e.detail(), e.offset()});
                }
            }
        };
        check_exprs(cfg.f, "model.f");
        check_exprs(cfg.h, "model.h");
    }

    bool time_ok = true;
    auto positive = [&](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            bad(field, "must be positive and finite");
            time_ok = false;
        }
    };
    positive(cfg.T, "time.T");
    positive(cfg.dt, "time.dt");
    positive(cfg.dtau, "time.dtau");
    if (time_ok) {
        try {
            (void)TimeGrid::make(cfg.T, cfg.dt, cfg.dtau);
        } catch (const ConfigError& e) {
            errs.push_back({e.field(), std::string(e.what()).substr(e.field().size() + 2), {}});
        }
    }

    const bool ds_ok = cfg.ds > 0.0 && std::isfinite(cfg.ds);
    if (!ds_ok) bad("space.ds", "must be positive and finite");
    if (cfg.bounds == BoundsMode::Fixed && dim_ok) {
        const auto D = static_cast<std::size_t>(cfg.dim);
        bool shape_ok = true;
        if (cfg.lo.size() != D) {
            bad("space.bounds.lo", "needs one value per dimension");
            shape_ok = false;
        }
        if (cfg.hi.size() != D) {
            bad("space.bounds.hi", "needs one value per dimension");
            shape_ok = false;
        }
        if (shape_ok && ds_ok) {
            bool each_ok = true;
            for (std::size_t d = 0; d < D; ++d) {
                if (!std::isfinite(cfg.lo[d]) || !std::isfinite(cfg.hi[d]) || cfg.hi[d] - cfg.lo[d] < 2.0 * cfg.ds) {
                    bad(indexed("space.bounds.hi", d), "must exceed lo by at least 2 ds");
                    each_ok = false;
                }
            }
            if (each_ok) {
                try {
                    (void)build_grid(cfg.dim, cfg.lo, cfg.hi, cfg.ds);
                } catch (const CapacityError& e) {
                    bad("space.ds", e.what());
                } catch (const ConfigError& e) {
                    bad(e.field(), e.what());
                }
            }
        }
    }

    if (!cfg.x0.empty()) {
        if (cfg.x0.size() != static_cast<std::size_t>(std::max(cfg.dim, 0))) bad("x0", "needs one value per dimension");
        for (std::size_t i = 0; i < cfg.x0.size(); ++i)
            if (!std::isfinite(cfg.x0[i])) bad(indexed("x0", i), "must be finite");
    }
    if (cfg.init == InitKind::Gaussian && !(cfg.init_sigma > 0.0 && std::isfinite(cfg.init_sigma)))
        bad("init.sigma", "must be positive and finite");
    if (cfg.init == InitKind::Gaussian && cfg.bounds == BoundsMode::Fixed && errs.empty()) {
        auto x0 = initial_state(cfg);
        for (std::size_t d = 0; d < x0.size(); ++d)
            if (x0[d] < cfg.lo[d] || x0[d] > cfg.hi[d]) bad("x0", "Gaussian centre lies outside the fixed bounds");
    }
    if (cfg.snapshots > 10000) bad("snapshots", "at most 10000");
    return errs;
}

expr::ModelSpec model_of(const ExperimentConfig& cfg) { return expr::ModelSpec::from_text(cfg.dim, cfg.f, cfg.h); }

TimeGrid time_grid_of(const ExperimentConfig& cfg) { return TimeGrid::make(cfg.T, cfg.dt, cfg.dtau); }

std::vector<double> initial_state(const ExperimentConfig& cfg) {
    if (!cfg.x0.empty()) return cfg.x0;
    return std::vector<double>(static_cast<std::size_t>(std::max(cfg.dim, 0)), 0.0);
}

json to_json(const ExperimentConfig& cfg) {
    json bounds = {{"mode", cfg.bounds == BoundsMode::Fixed ? "fixed" : "data"}};
    if (cfg.bounds == BoundsMode::Fixed) {
        bounds["lo"] = cfg.lo;
        bounds["hi"] = cfg.hi;
    }
    json doc = {
        {"preset", cfg.preset},
        {"model", {{"dim", cfg.dim}, {"obs_dim", cfg.obs_dim}, {"f", cfg.f}, {"h", cfg.h}}},
        {"time", {{"T", cfg.T}, {"dt", cfg.dt}, {"dtau", cfg.dtau}}},
        {"space", {{"ds", cfg.ds}, {"bounds", bounds}}},
        {"seed", cfg.seed},
        {"x0", cfg.x0},
        {"init", {{"kind", init_name(cfg.init)}, {"sigma", cfg.init_sigma}}},
        {"output_dir", cfg.output_dir},
        {"snapshots", cfg.snapshots},
    };
    return doc;
}

ExperimentConfig config_from_json(const json& doc) {
    std::vector<FieldError> errs;
    if (!doc.is_object()) throw ValidationError({{"config", "must be a JSON object", std::nullopt}});

    ExperimentConfig cfg;
    if (auto it = doc.find("preset"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) {
            errs.push_back({"preset", "has the wrong type", std::nullopt});
        } else if (!it->get<std::string>().empty()) {
            try {
                cfg = preset(it->get<std::string>());
            } catch (const ConfigError& e) {
                errs.push_back({"preset", "unknown preset '" + it->get<std::string>() + "'", std::nullopt});
            }
        }
    }

    if (const json* m = object_at(doc, "model", "model", errs)) {
        read_field(*m, "dim", "model.dim", cfg.dim, errs);
        read_field(*m, "f", "model.f", cfg.f, errs);
        read_field(*m, "h", "model.h", cfg.h, errs);
        cfg.obs_dim = static_cast<int>(cfg.h.size());
        read_field(*m, "obs_dim", "model.obs_dim", cfg.obs_dim, errs);
    }
    if (const json* t = object_at(doc, "time", "time", errs)) {
        read_field(*t, "T", "time.T", cfg.T, errs);
        read_field(*t, "dt", "time.dt", cfg.dt, errs);
        read_field(*t, "dtau", "time.dtau", cfg.dtau, errs);
    }
    if (const json* s = object_at(doc, "space", "space", errs)) {
        read_field(*s, "ds", "space.ds", cfg.ds, errs);
        if (const json* b = object_at(*s, "bounds", "space.bounds", errs)) {
            std::string mode = cfg.bounds == BoundsMode::Fixed ? "fixed" : "data";
            read_field(*b, "mode", "space.bounds.mode", mode, errs);
            if (mode == "fixed") {
                cfg.bounds = BoundsMode::Fixed;
            } else if (mode == "data") {
                cfg.bounds = BoundsMode::Data;
                cfg.lo.clear();
                cfg.hi.clear();
            } else {
                errs.push_back({"space.bounds.mode", "must be 'data' or 'fixed'", std::nullopt});
            }
            read_field(*b, "lo", "space.bounds.lo", cfg.lo, errs);
            read_field(*b, "hi", "space.bounds.hi", cfg.hi, errs);
        }
    }
    read_field(doc, "seed", "seed", cfg.seed, errs);
    read_field(doc, "x0", "x0", cfg.x0, errs);
    if (const json* i = object_at(doc, "init", "init", errs)) {
        std::string kind = init_name(cfg.init);
        read_field(*i, "kind", "init.kind", kind, errs);
        if (kind == "gaussian") {
            cfg.init = InitKind::Gaussian;
        } else if (kind == "uniform") {
            cfg.init = InitKind::Uniform;
        } else {
            errs.push_back({"init.kind", "must be 'gaussian' or 'uniform'", std::nullopt});
        }
        read_field(*i, "sigma", "init.sigma", cfg.init_sigma, errs);
    }
    read_field(doc, "output_dir", "output_dir", cfg.output_dir, errs);
    read_field(doc, "snapshots", "snapshots", cfg.snapshots, errs);

    if (!errs.empty()) throw ValidationError(std::move(errs));
    auto semantic = validate(cfg);
    if (!semantic.empty()) throw ValidationError(std::move(semantic));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

} // namespace yauyau
