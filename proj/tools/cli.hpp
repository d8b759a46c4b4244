#pragma once

// The `cellnet` command line: argument parsing, input files, reports.
//
// Exit codes: 0 ok/pass, 2 invalid input, 3 theorem violation or acceptance
// failure, 4 numeric failure.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellnet/netcore.hpp"
#include "cellnet/quotient.hpp"

namespace cellnet::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitViolation = 3;
inline constexpr int kExitNumeric = 4;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// File formats, exposed for tests.
NetworkSpec parse_network(const Json& j);
Json network_to_json(const NetworkSpec& net);
Partition parse_partition(const NetworkSpec& net, const Json& j);
Json partition_to_json(const NetworkSpec& net, const Partition& p);
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
/// %.17g
std::string format_double(double v);

}  // namespace cellnet::cli
