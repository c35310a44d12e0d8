#include "yauyau/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>

namespace yauyau::service {

using nlohmann::json;

DensitySlice density_slice(const SpatialGrid& grid, std::span<const double> field, const std::vector<int>& axes,
                           const std::vector<std::size_t>& fixed) {
    const int D = grid.dim();
    const std::size_t ns = grid.ns();
    if (field.size() != grid.size()) throw ConfigError("snapshot", "field does not match the grid");
    const std::size_t want = D == 1 ? 1 : 2;
    if (axes.size() != want)
        throw ConfigError("axes", "expected " + std::to_string(want) + " axis index(es) for D=" + std::to_string(D));
    for (int a : axes)
        if (a < 1 || a > D) throw ConfigError("axes", "axis " + std::to_string(a) + " outside 1.." + std::to_string(D));
    if (want == 2 && axes[0] == axes[1]) throw ConfigError("axes", "axes must differ");

    DensitySlice s;
    s.axes = axes;
    s.fixed.assign(static_cast<std::size_t>(D), ns / 2);
    if (!fixed.empty()) {
        if (fixed.size() != static_cast<std::size_t>(D))
            throw ConfigError("fixed", "expected " + std::to_string(D) + " indices");
        s.fixed = fixed;
    }
    for (int d = 0; d < D; ++d) {
        const bool on_slice = d + 1 == axes[0] || (want == 2 && d + 1 == axes[1]);
        if (on_slice) {
            s.fixed[static_cast<std::size_t>(d)] = 0;
        } else if (s.fixed[static_cast<std::size_t>(d)] >= ns) {
            throw ConfigError("fixed", "index " + std::to_string(s.fixed[static_cast<std::size_t>(d)]) + " on axis " +
                                           std::to_string(d + 1) + " outside 0.." + std::to_string(ns - 1));
        }
    }

    std::size_t base = 0;
    for (int d = 0; d < D; ++d) base += s.fixed[static_cast<std::size_t>(d)] * grid.stride(d);
    const auto nodes = grid.nodes();
    s.x.assign(nodes.begin(), nodes.end());
    const std::size_t sa = grid.stride(axes[0] - 1);
    if (want == 1) {
        s.values.resize(ns);
        for (std::size_t i = 0; i < ns; ++i) s.values[i] = field[base + i * sa];
    } else {
        s.y = s.x;
        const std::size_t sb = grid.stride(axes[1] - 1);
        s.values.resize(ns * ns);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ns; ++j) s.values[i * ns + j] = field[base + i * sa + j * sb];
    }
    double total = 0.0;
    for (double v : s.values) total += v;
    s.mass = total * grid.cell_volume();
    return s;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

json validation_body(const ValidationError& e) {
    json fields = json::array();
    for (const auto& f : e.errors()) {
        json item = {{"field", f.field}, {"message", f.message}};
        if (f.offset) item["offset"] = *f.offset;
        fields.push_back(std::move(item));
    }
    return {{"error", "validation failed"}, {"fields", fields}};
}

// Comma separated non-negative integers; nullopt on any malformed entry.
std::optional<std::vector<std::size_t>> parse_list(const std::string& text) {
    std::vector<std::size_t> out;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        std::size_t v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || next == p) return std::nullopt;
        out.push_back(v);
        p = next;
        if (p < end) {
            if (*p != ',') return std::nullopt;
            ++p;
            if (p == end) return std::nullopt;
        }
    }
    return out;
}

json columns(const Matrix& m) {
    json out = json::array();
    for (std::size_t d = 0; d < m.cols(); ++d) {
        std::vector<double> col(m.rows());
        for (std::size_t k = 0; k < m.rows(); ++k) col[k] = m(k, d);
        out.push_back(std::move(col));
    }
    return out;
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const ValidationError& e) {
        send_json(res, 422, validation_body(e));
    } catch (const UnknownJob& e) {
        send_error(res, 404, e.what());
    } catch (const JobConflict& e) {
        send_error(res, 409, e.what());
    } catch (const QueueFull& e) {
        send_error(res, 429, e.what());
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        if (msg.starts_with(e.field() + ": ")) msg.erase(0, e.field().size() + 2);
        send_json(res, 422, {{"error", e.what()}, {"fields", {{{"field", e.field()}, {"message", msg}}}}});
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

} // namespace

std::unique_ptr<httplib::Server> make_server(JobRegistry& registry, const std::filesystem::path& static_dir) {
    auto srv = std::make_unique<httplib::Server>();
    srv->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    srv->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv->Post("/api/jobs", [&registry](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            json doc = json::parse(req.body, nullptr, false);
            if (doc.is_discarded() || !doc.is_object()) {
                send_error(res, 400, "request body must be a JSON object");
                return;
            }
            const auto id = registry.submit(config_from_json(doc));
            send_json(res, 202, to_json(registry.status(id)));
        });
    });

    srv->Get("/api/jobs", [&registry](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            json jobs = json::array();
            for (const auto& v : registry.list()) jobs.push_back(to_json(v));
            send_json(res, 200, {{"jobs", jobs}});
        });
    });

    srv->Get(R"(/api/jobs/([^/]+))", [&registry](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(registry.status(req.matches[1]))); });
    });

    srv->Delete(R"(/api/jobs/([^/]+))", [&registry](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(registry.cancel(req.matches[1]))); });
    });

    srv->Get(R"(/api/jobs/([^/]+)/result)", [&registry](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto out = registry.result(req.matches[1]);
            std::vector<double> tau(out->truth.rows());
            for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = static_cast<double>(k) * out->time.dtau;
            send_json(res, 200,
                      {{"id", std::string(req.matches[1])},
                       {"dim", out->grid.dim()},
                       {"tau", tau},
                       {"truth", columns(out->truth)},
                       {"estimates", columns(out->result.estimates)},
                       {"errors", out->result.errors},
                       {"rmse", out->result.rmse},
                       {"zero_rmse", out->zero_rmse}});
        });
    });

    srv->Get(R"(/api/jobs/([^/]+)/density)", [&registry](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto out = registry.result(req.matches[1]);
            const auto& snaps = out->result.snapshots;
            if (snaps.empty()) throw JobConflict("job retained no density snapshots");
            auto list_param = [&](const char* name) -> std::vector<std::size_t> {
                if (!req.has_param(name)) return {};
                auto v = parse_list(req.get_param_value(name));
                if (!v) throw ConfigError(name, "expected comma separated non-negative integers");
                return *v;
            };
            std::size_t index = snaps.size() - 1;
            if (req.has_param("snapshot")) {
                auto v = list_param("snapshot");
                if (v.size() != 1) throw ConfigError("snapshot", "expected one index");
                index = v[0];
            }
            if (index >= snaps.size())
                throw ConfigError("snapshot", "index " + std::to_string(index) + " outside 0.." +
                                                  std::to_string(snaps.size() - 1));
            std::vector<int> axes;
            for (auto a : list_param("axes")) axes.push_back(static_cast<int>(std::min<std::size_t>(a, 1u << 20)));
            if (axes.empty()) axes = out->grid.dim() == 1 ? std::vector<int>{1} : std::vector<int>{1, 2};
            const auto& snap = snaps[index];
            auto s = density_slice(out->grid, snap.values, axes, list_param("fixed"));
            json values;
            if (s.axes.size() == 1) {
                values = s.values;
            } else {
                values = json::array();
                const std::size_t ns = out->grid.ns();
                for (std::size_t i = 0; i < ns; ++i)
                    values.push_back(std::vector<double>(s.values.begin() + static_cast<std::ptrdiff_t>(i * ns),
                                                         s.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * ns)));
            }
            json body = {{"snapshot", index}, {"snapshot_count", snaps.size()}, {"k", snap.k}, {"tau", snap.tau},
                         {"axes", s.axes},   {"fixed", s.fixed},           {"ds", out->grid.ds()},
                         {"x", s.x},         {"values", values},           {"mass", s.mass}};
            if (s.axes.size() == 2) body["y"] = s.y;
            send_json(res, 200, body);
        });
    });

    if (!static_dir.empty() && std::filesystem::is_directory(static_dir))
        srv->set_mount_point("/", static_dir.string());
    return srv;
}

} // namespace yauyau::service
