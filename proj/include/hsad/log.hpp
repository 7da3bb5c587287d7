#pragma once

#include <string>

namespace hsad {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);

} // namespace hsad
