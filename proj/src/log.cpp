#include "stackcast/log.hpp"

#include <cstdio>

namespace stackcast {

namespace {
bool g_quiet = false;
}

void set_log_quiet(bool quiet) noexcept { g_quiet = quiet; }
bool log_quiet() noexcept { return g_quiet; }

void log_info(const std::string& stage, const std::string& message) {
    if (g_quiet) return;
    std::printf("[%s] %s\n", stage.c_str(), message.c_str());
    std::fflush(stdout);
}

void log_warn(const std::string& stage, const std::string& message) {
    std::fprintf(stderr, "[%s] warning: %s\n", stage.c_str(), message.c_str());
}

} // namespace stackcast
