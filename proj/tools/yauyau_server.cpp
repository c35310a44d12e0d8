// yauyau-server: HTTP job service for filter experiments.

#include "yauyau/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdio>

namespace {

httplib::Server* running = nullptr;

void on_signal(int) {
    if (running) running->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yau-Yau filter job service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t workers = 2;
    std::size_t depth = 8;
    std::string persist_dir;
    std::string static_dir = "web-ui/dist";
    app.add_option("--host", host, "address to bind");
    app.add_option("--port", port, "port to listen on (0 picks a free one)")->check(CLI::Range(0, 65535));
    app.add_option("--workers", workers, "jobs run concurrently")->check(CLI::Range(1ul, 256ul));
    app.add_option("--queue-depth", depth, "queued plus running jobs accepted")->check(CLI::Range(1ul, 100000ul));
    app.add_option("--persist-dir", persist_dir, "write artifacts of finished jobs under <dir>/<job id>");
    app.add_option("--static-dir", static_dir, "web UI assets served under /");
    CLI11_PARSE(app, argc, argv);

    try {
        yauyau::service::JobRegistry registry({.workers = workers, .queue_depth = depth, .persist_dir = persist_dir});
        auto srv = yauyau::service::make_server(registry, static_dir);
        const int bound = port == 0 ? srv->bind_to_any_port(host) : (srv->bind_to_port(host, port) ? port : -1);
        if (bound < 0) {
            std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
            return 1;
        }
        running = srv.get();
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::printf("listening on http://%s:%d (%zu workers)\n", host.c_str(), bound, workers);
        std::fflush(stdout);
        srv->listen_after_bind();
        running = nullptr;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
