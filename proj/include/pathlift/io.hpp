#pragma once

#include <string>
#include <string_view>

#include "pathlift/net.hpp"
#include "pathlift/pruning.hpp"

namespace pathlift {

// Network document:
//   {"neurons": [{"id": "in", "activation": "input"},
//                {"id": "m", "activation": {"kpool": 1}}, ...],
//    "edges":   [{"src": "in", "dst": "m", "weight": 2.0}, ...],
//    "biases":  {"m": 0.0, ...}}
// Missing biases default to 0. Structural problems raise ParseError with the
// offending key; graph problems raise the validation error of the architecture.

Network parse_network(std::string_view text);
std::string network_to_string(const Architecture& arch, const ParamVector& theta);

Network load_network(const std::string& path);
void save_network(const std::string& path, const Architecture& arch, const ParamVector& theta);

// {"inputs": [[...], ...], "targets": [[...], ...]}
Batch parse_batch(std::string_view text);
Batch load_batch(const std::string& path);

// Whole file contents; throws ParseError if the file cannot be read.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace pathlift
