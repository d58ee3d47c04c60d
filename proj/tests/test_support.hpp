#pragma once

#include "nlf/nlf.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace nlf::test {

inline Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline PenetrationLevel pen(int percent = 20) { return PenetrationLevel::from_percent(percent); }

/// Series of `days` days starting at midnight of `start`, with value(day, step).
template <typename F>
NetLoadSeries make_series(Resolution res, const Date& start, int days, F&& value) {
    std::vector<Observation> values;
    for (int d = 0; d < days; ++d) {
        for (int k = 0; k < steps_per_day(res); ++k) values.push_back(value(d, k));
    }
    return NetLoadSeries{res, pen(), Timestamp{start, 0}, std::move(values), "test"};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("nlf-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct CommandResult {
    int exit_code;
    std::string output;  // stdout and stderr combined
};

inline CommandResult run_command(const std::string& command) {
    CommandResult result{-1, {}};
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string cli() { return NLF_CLI_PATH; }

} // namespace nlf::test
