#pragma once

#include <string>

namespace stackcast {

/// Line-oriented progress logging with a `[stage]` prefix. Info lines go to
/// stdout and are suppressed in quiet mode; warnings go to stderr always.
void set_log_quiet(bool quiet) noexcept;
bool log_quiet() noexcept;

void log_info(const std::string& stage, const std::string& message);
void log_warn(const std::string& stage, const std::string& message);

} // namespace stackcast
