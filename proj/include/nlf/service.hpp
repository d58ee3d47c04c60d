#pragma once

#include "nlf/api.hpp"
#include "nlf/error.hpp"
#include "nlf/store.hpp"

#include <httplib.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace nlf {

/// HTTP front end over an immutable ScoreStore.
///
/// Handlers take a snapshot of the current store pointer and never mutate
/// shared state; `set_store` swaps the whole store atomically.
class Service {
public:
    using LogSink = std::function<void(const std::string&)>;

    explicit Service(LogSink log = {}) : log_(std::move(log)) {
        // SO_REUSEADDR only; the library default also sets SO_REUSEPORT, which
        // lets a second server bind a port that is already taken
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        install_routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void set_store(std::shared_ptr<const ScoreStore> store) {
        std::lock_guard lock(mutex_);
        store_ = std::move(store);
    }

    /// Loads a directory fully before swapping it in; on failure the previous
    /// store stays active and the error propagates.
    void load(const std::filesystem::path& dir) {
        set_store(std::make_shared<const ScoreStore>(ScoreStore::load(dir)));
    }

    std::shared_ptr<const ScoreStore> store() const {
        std::lock_guard lock(mutex_);
        return store_;
    }

    bool mount_ui(const std::filesystem::path& dir) { return server_.set_mount_point("/", dir.string()); }

    bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
    int bind_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }
    bool is_running() const { return server_.is_running(); }

private:
    using Handler = std::function<api::Json(const ScoreStore&, const api::Params&)>;

    static api::Params params_of(const httplib::Request& req) {
        api::Params out;
        for (const auto& [k, v] : req.params) out[k] = v;  // last value wins
        return out;
    }

    static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
        res.status = status;
        api::Json body{{"error", code}, {"message", message}};
        res.set_content(body.dump(), "application/json");
    }

    void route(const std::string& path, Handler handler) {
        server_.Get(path, [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
            const auto store = this->store();
            if (!store) {
                send_error(res, 503, "StoreNotLoaded", "score store not loaded");
                return;
            }
            try {
                res.set_content(handler(*store, params_of(req)).dump(), "application/json");
            } catch (const Error& e) {
                const int status = e.code() == ErrorCode::UnknownPenetration ? 404 : 400;
                send_error(res, status, std::string(to_string(e.code())), e.what());
            }
        });
    }

    void install_routes() {
        server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
        route("/api/meta", [](const ScoreStore& s, const api::Params&) { return api::meta(s); });
        route("/api/comparison",
              [](const ScoreStore& s, const api::Params& p) { return api::comparison(s, api::parse_filter(p, s)); });
        route("/api/patterns",
              [](const ScoreStore& s, const api::Params& p) { return api::patterns(s, api::parse_filter(p, s)); });
        server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send_error(res, 500, "Internal", what);
        });
        server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            if (!log_) return;
            std::string target = req.path;
            if (!req.params.empty()) {
                target.push_back('?');
                bool first = true;
                for (const auto& [k, v] : req.params) {
                    if (!first) target.push_back('&');
                    first = false;
                    target += k + "=" + v;
                }
            }
            log_(req.method + " " + target + " " + std::to_string(res.status) + " " +
                 std::to_string(res.body.size()) + "B");
        });
    }

    LogSink log_;
    httplib::Server server_;
    mutable std::mutex mutex_;
    std::shared_ptr<const ScoreStore> store_;
};

} // namespace nlf
