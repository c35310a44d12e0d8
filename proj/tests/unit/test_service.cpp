#include "doctest.h"

#include "yauyau/service.hpp"

#include <httplib.h>

#include <chrono>
#include <random>
#include <thread>

using namespace yauyau;
using namespace yauyau::service;
using nlohmann::json;

namespace {

struct TestServer {
    JobRegistry registry;
    std::unique_ptr<httplib::Server> server;
    int port = 0;
    std::thread thread;

    explicit TestServer(RegistryOptions opts = {}) : registry(std::move(opts)), server(make_server(registry)) {
        port = server->bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server->listen_after_bind(); });
        server->wait_until_ready();
    }
    ~TestServer() {
        server->stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
};

json body_of(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

// A cubic1d run long enough to still be going when the test inspects it.
json slow_payload() { return {{"preset", "cubic1d"}, {"time", {{"T", 2000.0}}}}; }

json poll_done(httplib::Client& c, const std::string& id, std::vector<double>* progress = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    for (;;) {
        auto v = body_of(c.Get("/api/jobs/" + id));
        if (progress) progress->push_back(v["progress"].get<double>());
        const auto state = v["state"].get<std::string>();
        if (state == "done" || state == "failed") return v;
        REQUIRE(std::chrono::steady_clock::now() - start < std::chrono::seconds(60));
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

} // namespace

TEST_CASE("density_slice shapes and the marginalisation identity") {
    const double lo[] = {-1.0, -1.0, -1.0}, hi[] = {1.0, 1.0, 1.0};
    auto g = build_grid(3, lo, hi, 0.25);
    const std::size_t ns = g.ns();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DensityField f{std::vector<double>(g.size()), false};
    for (auto& v : f.values) v = u(rng);
    f = normalize(f, g);

    auto mid = density_slice(g, f.values, {1, 2}, {0, 0, ns / 2});
    CHECK(mid.values.size() == ns * ns);
    CHECK(mid.x.size() == ns);
    CHECK(mid.y.size() == ns);
    CHECK(mid.mass <= 1.0);
    const std::size_t idx[] = {2, 5, ns / 2};
    CHECK(mid.values[2 * ns + 5] == f.values[g.flatten(idx)]);

    // Fixing x1 and slicing (x3, x2) transposes the index roles.
    auto other = density_slice(g, f.values, {3, 2}, {4, 0, 0});
    const std::size_t idx2[] = {4, 6, 1};
    CHECK(other.values[1 * ns + 6] == f.values[g.flatten(idx2)]);

    double total = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
        auto s = density_slice(g, f.values, {1, 2}, {0, 0, j});
        double plane = 0.0;
        for (double v : s.values) plane += v;
        total += plane * g.ds() * g.ds() * g.ds();
    }
    CHECK(std::fabs(total - 1.0) < 1e-10);

    CHECK_THROWS_AS(density_slice(g, f.values, {1, 4}, {}), ConfigError);
    CHECK_THROWS_AS(density_slice(g, f.values, {1, 1}, {}), ConfigError);
    CHECK_THROWS_AS(density_slice(g, f.values, {1}, {}), ConfigError);
    CHECK_THROWS_AS(density_slice(g, f.values, {1, 2}, {0, 0, ns}), ConfigError);
    CHECK_THROWS_AS(density_slice(g, f.values, {1, 2}, {0, 0}), ConfigError);

    const double l1[] = {0.0}, h1[] = {2.0};
    auto g1 = build_grid(1, l1, h1, 0.5);
    std::vector<double> v1{0.1, 0.2, 0.3, 0.4, 0.5};
    auto s1 = density_slice(g1, v1, {1}, {});
    CHECK(s1.values == v1);
    CHECK(s1.y.empty());
}

TEST_CASE("registry: queue depth, listing and cancellation") {
    JobRegistry reg({.workers = 1, .queue_depth = 8, .persist_dir = {}});
    auto slow = config_from_json(slow_payload());
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) ids.push_back(reg.submit(slow));
    CHECK_THROWS_AS(reg.submit(slow), QueueFull);
    CHECK(reg.list().size() == 8);
    for (std::size_t i = 0; i < ids.size(); ++i) CHECK(reg.list()[i].id == ids[i]);

    for (const auto& id : ids) {
        auto v = reg.status(id);
        CHECK((v.state == JobState::Queued || v.state == JobState::Running));
        CHECK(v.progress >= 0.0);
        reg.cancel(id);
    }
    for (const auto& id : ids) {
        auto v = reg.wait(id, 30.0);
        CHECK(v.state == JobState::Failed);
        CHECK(v.message == "cancelled");
        CHECK(v.finished_at.has_value());
        CHECK_THROWS_AS(reg.cancel(id), JobConflict);
        CHECK_THROWS_AS(reg.result(id), JobConflict);
    }
    CHECK_NOTHROW(reg.cancel(reg.submit(slow)));
    CHECK_THROWS_AS(reg.status("job-999999"), UnknownJob);
}

TEST_CASE("registry: results match a direct run bit for bit") {
    auto cfg = preset("cubic1d");
    cfg.T = 2.0;
    JobRegistry reg({.workers = 2, .queue_depth = 8, .persist_dir = {}});
    auto a = reg.submit(cfg);
    auto b = reg.submit(cfg);
    REQUIRE(reg.wait(a, 60.0).state == JobState::Done);
    REQUIRE(reg.wait(b, 60.0).state == JobState::Done);
    auto direct = run_experiment(cfg);
    for (const auto& id : {a, b}) {
        auto out = reg.result(id);
        CHECK(out->result.estimates == direct.result.estimates);
        CHECK(out->result.rmse == direct.result.rmse);
        CHECK(reg.status(id).summary["rmse"].get<double>() == direct.result.rmse);
        CHECK(reg.status(id).progress == 1.0);
    }
}

TEST_CASE("http: submit, poll, fetch") {
    TestServer ts;
    auto c = ts.client();

    json payload = {{"preset", "cubic1d"}, {"time", {{"T", 2.0}}}};
    auto r = c.Post("/api/jobs", payload.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 202);
    CHECK(r->get_header_value("Content-Type") == "application/json");
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto id = body_of(r)["id"].get<std::string>();

    std::vector<double> progress;
    auto done = poll_done(c, id, &progress);
    CHECK(done["state"] == "done");
    CHECK(std::is_sorted(progress.begin(), progress.end()));
    CHECK(progress.front() >= 0.0);

    auto res = c.Get("/api/jobs/" + id + "/result");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto result = json::parse(res->body);
    CHECK(result["tau"].size() == 401);
    CHECK(result["estimates"][0].size() == 401);
    CHECK(result["truth"][0].size() == 401);
    CHECK(result["errors"].size() == 401);
    CHECK(done["summary"]["rmse"] == result["rmse"]);

    auto cfg = preset("cubic1d");
    cfg.T = 2.0;
    auto direct = run_experiment(cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < 401; ++k)
        worst = std::max(worst, std::fabs(result["estimates"][0][k].get<double>() - direct.result.estimates(k, 0)));
    CHECK(worst == 0.0);

    auto dens = c.Get("/api/jobs/" + id + "/density?snapshot=5");
    REQUIRE(dens);
    CHECK(dens->status == 200);
    auto d = json::parse(dens->body);
    CHECK(d["values"].size() == direct.grid.ns());
    CHECK(d["x"].size() == direct.grid.ns());
    CHECK(d["snapshot_count"] == 20);
    CHECK(std::fabs(d["mass"].get<double>() - 1.0) < 1e-12);

    for (const char* bad : {"snapshot=20", "axes=2", "axes=1,2", "snapshot=x", "fixed=1,,2"}) {
        CAPTURE(bad);
        auto e = c.Get("/api/jobs/" + id + "/density?" + bad);
        REQUIRE(e);
        CHECK(e->status == 422);
    }

    auto listed = body_of(c.Get("/api/jobs"));
    CHECK(listed["jobs"].size() == 1);
    CHECK(listed["jobs"][0]["config"] == to_json(cfg));

    auto del = c.Delete("/api/jobs/" + id);
    REQUIRE(del);
    CHECK(del->status == 409);
}

TEST_CASE("http: error statuses") {
    TestServer ts({.workers = 1, .queue_depth = 8, .persist_dir = {}});
    auto c = ts.client();

    json bad = {{"preset", "cubic3d"}, {"model", {{"f", {"cos(x1)", "cos(x2)", "cos(x4)"}}}}};
    auto r = c.Post("/api/jobs", bad.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 422);
    auto body = json::parse(r->body);
    REQUIRE(body["fields"].size() == 1);
    CHECK(body["fields"][0]["field"] == "model.f[2]");
    CHECK(body["fields"][0]["message"].get<std::string>().find("x4") != std::string::npos);
    CHECK(body["fields"][0]["offset"] == 4);

    auto malformed = c.Post("/api/jobs", "{not json", "application/json");
    REQUIRE(malformed);
    CHECK(malformed->status == 400);

    auto missing = c.Get("/api/jobs/job-424242");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(c.Get("/api/jobs/job-424242/result")->status == 404);

    // Observation function undefined on the whole path: fails while running.
    json failing = {{"preset", "cubic1d"}, {"model", {{"h", {"log(x1 - 100)"}}}}};
    auto fid = body_of(c.Post("/api/jobs", failing.dump(), "application/json"))["id"].get<std::string>();
    auto fv = poll_done(c, fid);
    CHECK(fv["state"] == "failed");
    auto conflict = c.Get("/api/jobs/" + fid + "/result");
    REQUIRE(conflict);
    CHECK(conflict->status == 409);
    CHECK(json::parse(conflict->body)["error"].get<std::string>().find(fv["message"].get<std::string>()) !=
          std::string::npos);

    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) {
        auto s = c.Post("/api/jobs", slow_payload().dump(), "application/json");
        REQUIRE(s);
        CHECK(s->status == 202);
        ids.push_back(json::parse(s->body)["id"]);
    }
    auto full = c.Post("/api/jobs", slow_payload().dump(), "application/json");
    REQUIRE(full);
    CHECK(full->status == 429);

    auto running = c.Get("/api/jobs/" + ids[0] + "/result");
    REQUIRE(running);
    CHECK(running->status == 409);

    CHECK(body_of(c.Get("/api/jobs"))["jobs"].size() == 9);
    for (const auto& id : ids) {
        auto d = c.Delete("/api/jobs/" + id);
        REQUIRE(d);
        CHECK(d->status == 200);
    }
    for (const auto& id : ids) CHECK(poll_done(c, id)["message"] == "cancelled");

    auto pre = c.Options("/api/jobs");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
}
