// nlf: synthesize net-load scenarios, backtest and score forecasters against
// the 30-day reference, and serve the comparison/patterns API.

#include "nlf/nlf.hpp"
#include "nlf/service.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int fail(int code, const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return code;
}

void setup_logging() {
    auto logger = spdlog::stderr_logger_st("nlf");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("NLF_LOG")) {
        const std::string v = level;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else if (v != "info") spdlog::warn("ignoring NLF_LOG={} (expected error, info or debug)", v);
    }
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    std::uint64_t seed = 42;
    std::string start = "2023-01-01";
    int days = 365;
    std::string out;
};

int run_synth(const SynthArgs& args) {
    const auto start = nlf::try_parse_date(args.start);
    if (!start) throw UsageError("--start must be YYYY-MM-DD, got '" + args.start + "'");
    if (args.days < nlf::ScenarioConfig::kMinDays) {
        throw UsageError("--days must be at least " + std::to_string(nlf::ScenarioConfig::kMinDays) +
                         " (30-day warm-up plus scored days), got " + std::to_string(args.days));
    }
    const auto manifest = nlf::write_suite(args.out, args.seed, *start, args.days);
    for (const auto& e : manifest.scenarios) spdlog::info("wrote {} ({})", (fs::path(args.out) / e.path).string(), e.sha256);
    spdlog::info("wrote {}", (fs::path(args.out) / nlf::kManifestFile).string());
    return 0;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
    std::string data;
    std::string models = "reference,candidate";
    std::string out;
    bool forecasts = false;
};

int run_score(const ScoreArgs& args) {
    const auto model_ids = split_csv(args.models);
    if (std::find(model_ids.begin(), model_ids.end(), "reference") == model_ids.end()) {
        throw UsageError("--models must include 'reference'");
    }
    std::vector<nlf::ForecasterSpec> specs;
    for (const auto& id : model_ids) {
        if (std::any_of(specs.begin(), specs.end(), [&](const auto& s) { return s.model_id == id; })) {
            throw UsageError("model '" + id + "' listed twice");
        }
        try {
            specs.push_back(nlf::forecaster_for(id));
        } catch (const nlf::Error& e) {
            throw UsageError(e.what());
        }
    }

    const fs::path data_dir = args.data;
    const auto suite = nlf::read_suite_manifest(data_dir);
    nlf::ensure_directory(args.out);
    nlf::ScoreRunConfig config{model_ids, "reference", nlf::to_json(suite)};

    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    std::vector<std::string> summary;
    for (const auto& entry : suite.scenarios) {
        if (!entry.sha256.empty() && nlf::file_sha256(data_dir / entry.path) != entry.sha256) {
            throw nlf::Error(nlf::ErrorCode::Io, entry.scenario_id + ": " + entry.path + " does not match manifest digest");
        }
        const auto series = nlf::load_scenario(data_dir, entry);
        spdlog::info("scoring {} ({} points, {} missing)", entry.scenario_id, series.size(), series.missing_count());
        nlf::ScenarioScores scores = [&] {
            try {
                return nlf::score_scenario(series, specs, "reference");
            } catch (const nlf::Error& e) {
                if (e.code() == nlf::ErrorCode::InsufficientHistory) {
                    throw nlf::Error(e.code(), "scenario " + entry.scenario_id + ": " + e.what());
                }
                throw;
            }
        }();
        entries.push_back(nlf::write_scenario_scores(args.out, scores));
        if (args.forecasts) {
            for (const auto& spec : specs) {
                const auto schedule = nlf::day_ahead_schedule(series, spec, series.start().date(),
                                                              series.timestamp_at(series.size() - 1).date());
                const auto name = entry.scenario_id + "." + spec.model_id + ".forecasts.jsonl";
                nlf::write_file(fs::path(args.out) / name, nlf::to_jsonl(schedule.forecasts));
            }
        }
        for (const auto& spec : specs) {
            const auto median = nlf::median_daily_skill(scores, spec.model_id);
            std::size_t days = 0;
            for (const auto& d : scores.daily) days += d.model_id == spec.model_id ? 1 : 0;
            char line[160];
            std::snprintf(line, sizeof(line), "%-14s %-12s %6zu %14s", entry.scenario_id.c_str(),
                          spec.model_id.c_str(), days, median ? std::to_string(*median).c_str() : "n/a");
            summary.emplace_back(line);
        }
    }
    nlf::write_file(fs::path(args.out) / nlf::kManifestFile, nlf::run_manifest(config, entries).dump(2) + "\n");

    std::printf("%-14s %-12s %6s %14s\n", "scenario", "model", "days", "median_crpss");
    for (const auto& line : summary) std::printf("%s\n", line.c_str());
    return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
    std::string scores;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string ui;
};

std::atomic<nlf::Service*> g_service{nullptr};

extern "C" void handle_signal(int) {
    if (auto* s = g_service.load()) s->stop();
}

int run_serve(const ServeArgs& args) {
    nlf::Service service([](const std::string& line) { spdlog::info("{}", line); });
    try {
        service.load(args.scores);
    } catch (const nlf::Error& e) {
        return fail(kExitIo, std::string("store validation failed: ") + e.what());
    }
    if (!args.ui.empty() && !service.mount_ui(args.ui)) {
        return fail(kExitIo, "cannot serve UI directory " + args.ui);
    }
    if (!service.bind(args.host, args.port)) {
        return fail(kExitIo, "cannot bind " + args.host + ":" + std::to_string(args.port) + " (port in use?)");
    }
    g_service.store(&service);
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    spdlog::info("serving {} on http://{}:{}", args.scores, args.host, args.port);
    service.listen_after_bind();
    g_service.store(nullptr);
    spdlog::info("stopped");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Net-load forecast comparison: synthesize, score against the 30-day reference, serve"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate the 3 penetration x 2 resolution synthetic suite");
    synth_cmd->add_option("--seed", synth.seed, "Noise seed")->capture_default_str();
    synth_cmd->add_option("--start", synth.start, "First date (YYYY-MM-DD)")->capture_default_str();
    synth_cmd->add_option("--days", synth.days, "Number of days (>= 32)")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Day-ahead backtest and CRPS/CRPSS scoring of each scenario");
    score_cmd->add_option("--data", score.data, "Suite directory written by synth")->required();
    score_cmd->add_option("--models", score.models, "Comma-separated model ids; must include reference")
        ->capture_default_str();
    score_cmd->add_option("--out", score.out, "Score store directory")->required();
    score_cmd->add_flag("--forecasts", score.forecasts, "Also write each model's forecasts as JSON lines");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the comparison and patterns API over a score store");
    serve_cmd->add_option("--scores", serve.scores, "Score store directory")->required();
    serve_cmd->add_option("--port", serve.port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--ui", serve.ui, "Directory of the built UI bundle to serve at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitUsage, e.what());
    }

    try {
        if (*synth_cmd) return run_synth(synth);
        if (*score_cmd) return run_score(score);
        if (*serve_cmd) return run_serve(serve);
    } catch (const UsageError& e) {
        return fail(kExitUsage, e.what());
    } catch (const std::exception& e) {
        return fail(kExitIo, e.what());
    }
    return kExitUsage;
}
