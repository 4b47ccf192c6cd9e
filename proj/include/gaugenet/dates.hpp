#pragma once

#include <chrono>
#include <string>

namespace gaugenet {

using Day = std::chrono::sys_days;

// Parse strict ISO-8601 calendar date "YYYY-MM-DD". Throws input_error.
Day parse_date(const std::string& s);

// Format as "YYYY-MM-DD".
std::string format_date(Day d);

}  // namespace gaugenet
