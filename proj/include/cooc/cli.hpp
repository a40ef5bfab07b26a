#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace cooc::cli {

// Exit codes, stable for scripting.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kCheckFailed = 3;

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "32x16" -> {32, 16}; "" -> {}. Throws std::invalid_argument otherwise.
std::vector<std::size_t> parse_layer_spec(const std::string& spec);
/// "1,10" -> {1, 10}.
std::vector<std::size_t> parse_size_list(const std::string& list);

}  // namespace cooc::cli
