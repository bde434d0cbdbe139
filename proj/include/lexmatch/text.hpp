#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexmatch::text {

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// Whole-string numeric parsing; throws std::invalid_argument with `what` in
// the message when the string is not a complete number.
double to_double(std::string_view s, std::string_view what);
long long to_int(std::string_view s, std::string_view what);

// Shortest form that round-trips a double exactly (17 significant digits).
std::string exact(double x);

}  // namespace lexmatch::text
